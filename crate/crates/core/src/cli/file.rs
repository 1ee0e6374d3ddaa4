//! TOML scenario files.
//!
//! ```toml
//! objective = "total_time"          # or "average_latency"; optional
//!
//! [[segments]]
//! name = "serial"
//! weight = 0.1
//! function = { type = "power_law", alpha = 1.0, beta = 0.5 }
//!
//! [[segments]]
//! name = "parallel"
//! weight = 0.9
//! function = { type = "power_law", alpha = 1.0, beta = 1.0 }
//!
//! [resource]
//! type = "static"                   # static | inst_power | energy | tdp | area_energy
//! budget = 16.0
//!
//! [pooling]                         # optional, static budgets only
//! parallel = "parallel"
//! helper = "serial"
//!
//! [solver]                          # optional tolerance overrides
//! kkt_tol = 1e-8
//! ```
//!
//! Function types: `power_law {alpha, beta}`, `throughput {t_unit}`,
//! `cache {base, rate, t_hit, t_miss}`, `branch {base, rate, t_mispredict}`,
//! `tabulated {points = [[x, f], ...]}`. Power resources take an optional `k`
//! list (default all zero); `area_energy` takes `area_budget` and
//! `energy_budget` instead of `budget`.

use serde::Deserialize;

use crate::model::{
    EfficiencyFunction, ModelError, Objective, Pooling, ResourceModel, SaturatingCurve, Scenario, Segment,
};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub segments: Vec<SegmentSpec>,
    pub resource: ResourceSpec,
    #[serde(default)]
    pub objective: ObjectiveSpec,
    pub pooling: Option<PoolingSpec>,
    pub solver: Option<SolverSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub name: String,
    pub weight: f64,
    pub function: FunctionSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    PowerLaw {
        alpha: f64,
        beta: f64,
    },
    Throughput {
        t_unit: f64,
    },
    Cache {
        base: f64,
        rate: f64,
        t_hit: f64,
        t_miss: f64,
    },
    Branch {
        base: f64,
        rate: f64,
        t_mispredict: f64,
    },
    Tabulated {
        points: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ResourceSpec {
    Static { budget: f64 },
    InstPower { budget: f64, k: Option<Vec<f64>> },
    Energy { budget: f64, k: Option<Vec<f64>> },
    Tdp { budget: f64, k: Option<Vec<f64>> },
    AreaEnergy { area_budget: f64, energy_budget: f64 },
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveSpec {
    #[default]
    TotalTime,
    AverageLatency,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolingSpec {
    pub parallel: String,
    pub helper: String,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub multiplier_tol: Option<f64>,
    pub budget_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub outer_iters: Option<usize>,
    pub kkt_tol: Option<f64>,
}

/// Parse failure with the path of the offending key when known.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "at `{}`: {}", self.path, self.message)
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn parse_value(text: &str) -> Result<toml::Value, SchemaError> {
    text.parse::<toml::Table>()
        .map(toml::Value::Table)
        .map_err(|e| SchemaError {
            path: String::new(),
            message: one_line(e.message()),
        })
}

pub fn from_value(value: toml::Value) -> Result<ScenarioFile, SchemaError> {
    serde_path_to_error::deserialize(value).map_err(|e| SchemaError {
        path: e.path().to_string(),
        message: one_line(&e.inner().to_string()),
    })
}

pub fn parse(text: &str) -> Result<ScenarioFile, SchemaError> {
    from_value(parse_value(text)?)
}

/// Overwrites the number at a dotted `path` such as `resource.budget`,
/// `resource.k.0` or `segments.serial.function.alpha` (segments by name or
/// index).
pub fn set_number(value: &mut toml::Value, path: &str, x: f64) -> Result<(), SchemaError> {
    let err = |m: String| SchemaError {
        path: path.to_string(),
        message: m,
    };
    let mut cur = value;
    let parts: Vec<&str> = path.split('.').collect();
    for (k, part) in parts.iter().enumerate() {
        let last = k + 1 == parts.len();
        cur = match cur {
            toml::Value::Table(t) => {
                let entry = t.get_mut(*part).ok_or_else(|| err(format!("no key `{part}`")))?;
                entry
            }
            toml::Value::Array(a) => {
                let idx = match part.parse::<usize>() {
                    Ok(i) => i,
                    Err(_) => a
                        .iter()
                        .position(|e| e.get("name").and_then(|n| n.as_str()) == Some(*part))
                        .ok_or_else(|| err(format!("no element named `{part}`")))?,
                };
                let len = a.len();
                a.get_mut(idx)
                    .ok_or_else(|| err(format!("index {idx} out of range ({len} elements)")))?
            }
            _ => return Err(err(format!("`{part}` is below a scalar"))),
        };
        if last {
            if !matches!(cur, toml::Value::Float(_) | toml::Value::Integer(_)) {
                return Err(err("target is not a number".into()));
            }
            *cur = toml::Value::Float(x);
        }
    }
    Ok(())
}

impl FunctionSpec {
    pub fn build(&self) -> Result<EfficiencyFunction, ModelError> {
        match self {
            Self::PowerLaw { alpha, beta } => EfficiencyFunction::power_law(*alpha, *beta),
            Self::Throughput { t_unit } => EfficiencyFunction::throughput(*t_unit),
            Self::Cache {
                base,
                rate,
                t_hit,
                t_miss,
            } => EfficiencyFunction::cache(SaturatingCurve::new(*base, *rate)?, *t_hit, *t_miss),
            Self::Branch {
                base,
                rate,
                t_mispredict,
            } => EfficiencyFunction::branch(SaturatingCurve::new(*base, *rate)?, *t_mispredict),
            Self::Tabulated { points } => {
                let pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
                EfficiencyFunction::tabulated(&pts)
            }
        }
    }
}

impl ScenarioFile {
    pub fn scenario(&self) -> Result<Scenario, ModelError> {
        let n = self.segments.len();
        let segs = self
            .segments
            .iter()
            .map(|s| Ok(Segment::new(s.name.clone(), s.weight, s.function.build()?)))
            .collect::<Result<Vec<_>, ModelError>>()?;
        let k = |k: &Option<Vec<f64>>| k.clone().unwrap_or_else(|| vec![0.0; n]);
        let resource = match &self.resource {
            ResourceSpec::Static { budget } => ResourceModel::StaticBudget { total: *budget },
            ResourceSpec::InstPower { budget, k: kk } => ResourceModel::InstantaneousPower {
                total: *budget,
                k: k(kk),
            },
            ResourceSpec::Energy { budget, k: kk } => ResourceModel::EnergyBudget {
                total: *budget,
                k: k(kk),
            },
            ResourceSpec::Tdp { budget, k: kk } => ResourceModel::TdpBudget {
                total: *budget,
                k: k(kk),
            },
            ResourceSpec::AreaEnergy {
                area_budget,
                energy_budget,
            } => ResourceModel::AreaEnergy {
                area_total: *area_budget,
                energy_total: *energy_budget,
            },
        };
        let objective = match self.objective {
            ObjectiveSpec::TotalTime => Objective::TotalTime,
            ObjectiveSpec::AverageLatency => Objective::AverageLatency,
        };
        let scenario = Scenario::new(segs, resource, objective)?;
        match &self.pooling {
            None => Ok(scenario),
            Some(p) => {
                let find = |name: &str| {
                    self.segments
                        .iter()
                        .position(|s| s.name == name)
                        .ok_or_else(|| ModelError::InvalidScenario(format!("pooling names unknown segment `{name}`")))
                };
                scenario.with_pooling(Pooling {
                    parallel: find(&p.parallel)?,
                    helper: find(&p.helper)?,
                })
            }
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let d = SolverConfig::default();
        let s = self.solver.clone().unwrap_or_default();
        SolverConfig {
            multiplier_tol: s.multiplier_tol.unwrap_or(d.multiplier_tol),
            budget_tol: s.budget_tol.unwrap_or(d.budget_tol),
            max_iters: s.max_iters.unwrap_or(d.max_iters),
            outer_iters: s.outer_iters.unwrap_or(d.outer_iters),
            kkt_tol: s.kkt_tol.unwrap_or(d.kkt_tol),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
[[segments]]
name = "serial"
weight = 0.1
function = { type = "power_law", alpha = 1.0, beta = 0.5 }

[[segments]]
name = "parallel"
weight = 0.9
function = { type = "power_law", alpha = 1.0, beta = 1.0 }

[resource]
type = "static"
budget = 16
"#;

    #[test]
    fn parses_basic_file() {
        let f = parse(BASIC).unwrap();
        let s = f.scenario().unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.resource(), &ResourceModel::StaticBudget { total: 16.0 });
        assert_eq!(s.objective(), Objective::TotalTime);
    }

    #[test]
    fn unknown_key_reports_path() {
        let bad = BASIC.replace("beta = 0.5", "beta = 0.5, gamma = 2");
        let e = parse(&bad).unwrap_err();
        assert!(e.path.starts_with("segments[0].function"), "{e}");
        assert!(e.message.contains("gamma"), "{e}");
        let bad = format!("{BASIC}\nextra = 1\n");
        let e = parse(&bad).unwrap_err();
        assert!(e.message.contains("extra"), "{e}");
    }

    #[test]
    fn wrong_type_reports_path() {
        let bad = BASIC.replace("budget = 16", "budget = \"lots\"");
        let e = parse(&bad).unwrap_err();
        // tagged enums buffer their content, so the path stops at the enum
        assert!(e.path.starts_with("resource"), "{e}");
        assert!(e.message.contains("string"), "{e}");
    }

    #[test]
    fn set_number_by_name_and_index() {
        let mut v = parse_value(BASIC).unwrap();
        set_number(&mut v, "segments.parallel.function.alpha", 3.0).unwrap();
        set_number(&mut v, "segments.0.weight", 0.2).unwrap();
        set_number(&mut v, "resource.budget", 32.0).unwrap();
        let s = from_value(v.clone()).unwrap().scenario().unwrap();
        assert_eq!(s.segments()[0].weight, 0.2);
        assert_eq!(s.resource().budget(), 32.0);
        assert_eq!(
            s.segments()[1].efficiency,
            EfficiencyFunction::power_law(3.0, 1.0).unwrap()
        );
        assert!(set_number(&mut v, "resource.nope", 1.0).is_err());
        assert!(set_number(&mut v, "resource.type", 1.0).is_err());
        assert!(set_number(&mut v, "segments.nobody.weight", 1.0).is_err());
    }

    #[test]
    fn pooling_and_k_defaults() {
        let pooled = format!("{BASIC}\n[pooling]\nparallel = \"parallel\"\nhelper = \"serial\"\n");
        let s = parse(&pooled).unwrap().scenario().unwrap();
        assert_eq!(s.pooling(), Some(Pooling { parallel: 1, helper: 0 }));
        let energy = BASIC.replace("type = \"static\"", "type = \"energy\"");
        let s = parse(&energy).unwrap().scenario().unwrap();
        assert_eq!(s.resource().static_factors(), Some(&[0.0, 0.0][..]));
        let bad = format!("{BASIC}\n[pooling]\nparallel = \"x\"\nhelper = \"serial\"\n");
        assert!(parse(&bad).unwrap().scenario().is_err());
    }
}
