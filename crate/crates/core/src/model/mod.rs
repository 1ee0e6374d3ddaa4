//! Domain types and pure evaluation of objectives and constraint usage.
//!
//! A [`Scenario`] is a workload split into weighted [`Segment`]s, one
//! [`ResourceModel`] describing the shared budget, and an [`Objective`] tag.
//! Nothing in here optimizes; the solvers live in [`crate::solver`].

mod efficiency;

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

pub use efficiency::{EfficiencyFunction, SaturatingCurve, TabulatedCurve};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{function} function evaluated outside its domain at x = {value}")]
    Domain { function: &'static str, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("duplicate segment name `{0}`")]
    DuplicateName(String),
    #[error("scenario has no segment with positive weight")]
    NoActiveSegment,
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

/// One aggregated execution segment.
///
/// `weight` is the segment's baseline execution time (total-time objectives)
/// or its input rate (latency objectives).
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub name: String,
    pub weight: f64,
    pub efficiency: EfficiencyFunction,
}

impl Segment {
    pub fn new(name: impl Into<String>, weight: f64, efficiency: EfficiencyFunction) -> Self {
        Self {
            name: name.into(),
            weight,
            efficiency,
        }
    }

    pub fn is_active(&self) -> bool {
        self.weight > 0.0
    }
}

/// The shared constraint.
///
/// `k` holds per-segment static (leakage) power as a fraction of the active
/// power the unit is assigned.
#[derive(Debug, Clone, PartialEq)]
pub enum ResourceModel {
    /// `sum x_i <= total`.
    StaticBudget { total: f64 },
    /// For every segment `i`: `p_i + sum_j k_j p_j <= total`.
    InstantaneousPower { total: f64, k: Vec<f64> },
    /// `(sum_j k_j p_j) * T + sum_i t_i f_i(p_i) p_i <= total`, with
    /// `T = sum_i t_i f_i(p_i)`.
    EnergyBudget { total: f64, k: Vec<f64> },
    /// `sum_i k_i p_i + (sum_i t_i f_i(p_i) p_i) / T <= total`.
    TdpBudget { total: f64, k: Vec<f64> },
    /// Per-segment area `a_i` and voltage `v_i`; execution multiplier
    /// `f_i(a_i) / v_i` and energy `t_i f_i(a_i) a_i v_i^2`.
    /// `sum a_i <= area_total`, `sum energy_i <= energy_total`.
    AreaEnergy { area_total: f64, energy_total: f64 },
}

impl ResourceModel {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::StaticBudget { .. } => "static",
            Self::InstantaneousPower { .. } => "inst_power",
            Self::EnergyBudget { .. } => "energy",
            Self::TdpBudget { .. } => "tdp",
            Self::AreaEnergy { .. } => "area_energy",
        }
    }

    /// Static-power factors, if the model has them.
    pub fn static_factors(&self) -> Option<&[f64]> {
        match self {
            Self::InstantaneousPower { k, .. } | Self::EnergyBudget { k, .. } | Self::TdpBudget { k, .. } => Some(k),
            _ => None,
        }
    }

    /// Primary budget: the total for single-budget models, the area for
    /// [`ResourceModel::AreaEnergy`].
    pub fn budget(&self) -> f64 {
        match self {
            Self::StaticBudget { total }
            | Self::InstantaneousPower { total, .. }
            | Self::EnergyBudget { total, .. }
            | Self::TdpBudget { total, .. } => *total,
            Self::AreaEnergy { area_total, .. } => *area_total,
        }
    }

    /// Budgets in constraint order; one shared entry for the per-segment
    /// instantaneous-power constraints.
    pub fn budgets(&self) -> Vec<f64> {
        match self {
            Self::AreaEnergy {
                area_total,
                energy_total,
            } => vec![*area_total, *energy_total],
            other => vec![other.budget()],
        }
    }

    fn validate(&self, n: usize) -> Result<(), ModelError> {
        let budget_ok = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter(format!(
                    "{name} budget must be positive and finite, got {v}"
                )))
            }
        };
        match self {
            Self::AreaEnergy {
                area_total,
                energy_total,
            } => {
                budget_ok("area", *area_total)?;
                budget_ok("energy", *energy_total)
            }
            other => {
                budget_ok(other.kind(), other.budget())?;
                if let Some(k) = other.static_factors() {
                    if k.len() != n {
                        return Err(ModelError::DimensionMismatch {
                            expected: n,
                            got: k.len(),
                        });
                    }
                    if let Some(bad) = k.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                        return Err(ModelError::InvalidParameter(format!(
                            "static power factors must be non-negative, got {bad}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Sum of segment execution times.
    TotalTime,
    /// Rate-weighted latency; same arithmetic, different units.
    AverageLatency,
}

impl Objective {
    pub fn label(&self) -> &'static str {
        match self {
            Self::TotalTime => "total_time",
            Self::AverageLatency => "average_latency",
        }
    }
}

/// The `parallel` segment runs on its own units and the `helper` unit at
/// once: its time is `w / (1/f_parallel(x_parallel) + 1/f_helper(x_helper))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pooling {
    pub parallel: usize,
    pub helper: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    segments: Vec<Segment>,
    resource: ResourceModel,
    objective: Objective,
    pooling: Option<Pooling>,
}

impl Scenario {
    pub fn new(segments: Vec<Segment>, resource: ResourceModel, objective: Objective) -> Result<Self, ModelError> {
        let mut names = HashSet::new();
        for s in &segments {
            if !names.insert(s.name.as_str()) {
                return Err(ModelError::DuplicateName(s.name.clone()));
            }
            if !(s.weight.is_finite() && s.weight >= 0.0) {
                return Err(ModelError::InvalidParameter(format!(
                    "segment `{}` weight must be non-negative, got {}",
                    s.name, s.weight
                )));
            }
            s.efficiency.validate()?;
        }
        if !segments.iter().any(Segment::is_active) {
            return Err(ModelError::NoActiveSegment);
        }
        resource.validate(segments.len())?;
        if matches!(resource, ResourceModel::AreaEnergy { .. }) && objective != Objective::TotalTime {
            return Err(ModelError::InvalidScenario(
                "area/energy scenarios only support the total_time objective".into(),
            ));
        }
        Ok(Self {
            segments,
            resource,
            objective,
            pooling: None,
        })
    }

    /// Lets the `parallel` segment also run on the `helper` segment's unit.
    /// Only meaningful for static budgets with starving power-law units.
    pub fn with_pooling(mut self, pooling: Pooling) -> Result<Self, ModelError> {
        let n = self.segments.len();
        if pooling.parallel >= n || pooling.helper >= n || pooling.parallel == pooling.helper {
            return Err(ModelError::InvalidScenario(format!(
                "pooling indices ({}, {}) invalid for {n} segments",
                pooling.parallel, pooling.helper
            )));
        }
        if !matches!(self.resource, ResourceModel::StaticBudget { .. }) {
            return Err(ModelError::InvalidScenario(
                "pooled execution requires a static budget".into(),
            ));
        }
        for idx in [pooling.parallel, pooling.helper] {
            let s = &self.segments[idx];
            if !s.efficiency.starves_at_zero() {
                return Err(ModelError::InvalidScenario(format!(
                    "pooled segment `{}` needs a power-law or throughput function",
                    s.name
                )));
            }
        }
        self.pooling = Some(pooling);
        Ok(self)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn resource(&self) -> &ResourceModel {
        &self.resource
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    pub fn pooling(&self) -> Option<Pooling> {
        self.pooling
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.segments.iter().map(|s| s.weight).collect()
    }

    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.segments.len())
            .filter(|&i| self.segments[i].is_active())
            .collect()
    }

    /// Same scenario with every weight multiplied by `factor`.
    pub fn scaled_weights(&self, factor: f64) -> Result<Self, ModelError> {
        let mut out = self.clone();
        for s in &mut out.segments {
            s.weight *= factor;
        }
        Scenario::new(out.segments, out.resource, out.objective).and_then(|s| match out.pooling {
            Some(p) => s.with_pooling(p),
            None => Ok(s),
        })
    }

    /// Same scenario with a different resource model.
    pub fn with_resource(&self, resource: ResourceModel) -> Result<Self, ModelError> {
        let s = Scenario::new(self.segments.clone(), resource, self.objective)?;
        match self.pooling {
            Some(p) => s.with_pooling(p),
            None => Ok(s),
        }
    }

    fn check_len(&self, v: &[f64]) -> Result<(), ModelError> {
        if v.len() != self.segments.len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.segments.len(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Execution-time multiplier of segment `i` under allocation `x`
    /// (ignoring voltage).
    fn multiplier(&self, i: usize, x: &[f64]) -> Result<f64, ModelError> {
        let seg = &self.segments[i];
        match self.pooling {
            Some(p) if p.parallel == i => {
                let perf = |j: usize| -> Result<f64, ModelError> {
                    let xj = x[j];
                    if xj == 0.0 {
                        Ok(0.0)
                    } else {
                        Ok(1.0 / self.segments[j].efficiency.eval(xj)?)
                    }
                };
                let total = perf(p.parallel)? + perf(p.helper)?;
                if total > 0.0 {
                    Ok(1.0 / total)
                } else {
                    Err(ModelError::Domain {
                        function: seg.efficiency.kind(),
                        value: 0.0,
                    })
                }
            }
            _ => seg.efficiency.eval(x[i]),
        }
    }

    /// Per-segment `w_i * multiplier_i`; zero for inactive segments.
    pub fn contributions(&self, x: &[f64], voltage: Option<&[f64]>) -> Result<Vec<f64>, ModelError> {
        self.check_len(x)?;
        let v = self.voltage_for(voltage)?;
        (0..self.segments.len())
            .map(|i| {
                let s = &self.segments[i];
                if !s.is_active() {
                    return Ok(0.0);
                }
                let m = self.multiplier(i, x)?;
                let vi = v.map_or(1.0, |v| v[i]);
                Ok(s.weight * m / vi)
            })
            .collect()
    }

    fn voltage_for<'a>(&self, voltage: Option<&'a [f64]>) -> Result<Option<&'a [f64]>, ModelError> {
        match (&self.resource, voltage) {
            (ResourceModel::AreaEnergy { .. }, Some(v)) => {
                self.check_len(v)?;
                if let Some(bad) = v
                    .iter()
                    .zip(&self.segments)
                    .find(|(v, s)| s.is_active() && !(**v > 0.0 && v.is_finite()))
                {
                    return Err(ModelError::Domain {
                        function: "voltage",
                        value: *bad.0,
                    });
                }
                Ok(Some(v))
            }
            (ResourceModel::AreaEnergy { .. }, None) => Err(ModelError::InvalidScenario(
                "area/energy scenarios need a voltage per segment".into(),
            )),
            (_, Some(_)) => Err(ModelError::InvalidScenario(
                "voltages only apply to area/energy scenarios".into(),
            )),
            (_, None) => Ok(None),
        }
    }
}

/// `sum_i w_i f_i(x_i)` over the active segments.
pub fn weighted_cost(scenario: &Scenario, x: &[f64]) -> Result<f64, ModelError> {
    Ok(scenario.contributions(x, None)?.iter().sum())
}

/// `sum_i t_i f_i(a_i) / v_i` for area/voltage scenarios.
pub fn weighted_cost_with_voltage(scenario: &Scenario, a: &[f64], v: &[f64]) -> Result<f64, ModelError> {
    Ok(scenario.contributions(a, Some(v))?.iter().sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintUsage {
    pub id: String,
    pub lhs: f64,
    pub budget: f64,
}

impl ConstraintUsage {
    pub fn slack(&self) -> f64 {
        self.budget - self.lhs
    }

    pub fn satisfied(&self, rel_tol: f64) -> bool {
        self.lhs <= self.budget * (1.0 + rel_tol)
    }
}

impl fmt::Display for ConstraintUsage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} / {}", self.id, self.lhs, self.budget)
    }
}

/// Left-hand side of every scalar constraint at allocation `x` (areas for
/// area/voltage scenarios, in which case `voltage` must be given).
pub fn constraint_usage(
    scenario: &Scenario,
    x: &[f64],
    voltage: Option<&[f64]>,
) -> Result<Vec<ConstraintUsage>, ModelError> {
    let lhs = constraint_values(scenario, x, voltage)?;
    let budgets = scenario.resource.budgets();
    let ids: Vec<String> = match &scenario.resource {
        ResourceModel::StaticBudget { .. } => vec!["budget".into()],
        ResourceModel::InstantaneousPower { .. } => (0..x.len()).map(|i| format!("power[{i}]")).collect(),
        ResourceModel::EnergyBudget { .. } => vec!["energy".into()],
        ResourceModel::TdpBudget { .. } => vec!["tdp".into()],
        ResourceModel::AreaEnergy { .. } => vec!["area".into(), "energy".into()],
    };
    Ok(ids
        .into_iter()
        .zip(lhs)
        .enumerate()
        .map(|(j, (id, lhs))| ConstraintUsage {
            id,
            lhs,
            budget: budgets[j.min(budgets.len() - 1)],
        })
        .collect())
}

/// The bare left-hand sides of [`constraint_usage`], in the same order.
pub fn constraint_values(scenario: &Scenario, x: &[f64], voltage: Option<&[f64]>) -> Result<Vec<f64>, ModelError> {
    scenario.check_len(x)?;
    let v = scenario.voltage_for(voltage)?;
    let segs = &scenario.segments;
    let active = scenario.active_indices();
    // time-weighted multipliers t_i f_i(p_i), only defined on active segments
    let timed = || -> Result<Vec<(usize, f64)>, ModelError> {
        active
            .iter()
            .map(|&i| Ok((i, segs[i].weight * scenario.multiplier(i, x)?)))
            .collect()
    };
    Ok(match &scenario.resource {
        ResourceModel::StaticBudget { .. } => {
            let mut sum = 0.0;
            for xi in x {
                sum += xi;
            }
            vec![sum]
        }
        ResourceModel::InstantaneousPower { k, .. } => {
            let standing = dot(k, x);
            x.iter().map(|xi| xi + standing).collect()
        }
        ResourceModel::EnergyBudget { k, .. } => {
            let standing = dot(k, x);
            let tf = timed()?;
            let time: f64 = tf.iter().map(|p| p.1).sum();
            let dynamic: f64 = tf.iter().map(|&(i, t)| t * x[i]).sum();
            vec![standing * time + dynamic]
        }
        ResourceModel::TdpBudget { k, .. } => {
            let standing = dot(k, x);
            let tf = timed()?;
            let time: f64 = tf.iter().map(|p| p.1).sum();
            let dynamic: f64 = tf.iter().map(|&(i, t)| t * x[i]).sum();
            vec![standing + dynamic / time]
        }
        ResourceModel::AreaEnergy { .. } => {
            let v = v.expect("voltage checked above");
            let mut area = 0.0;
            for xi in x {
                area += xi;
            }
            let tf = timed()?;
            // f(a, v) t a v^3 = t f(a) a v^2
            let energy: f64 = tf.iter().map(|&(i, t)| t * x[i] * v[i] * v[i]).sum();
            vec![area, energy]
        }
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

/// A solved (or candidate) allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    /// Resource per segment (areas for area/voltage scenarios).
    pub x: Vec<f64>,
    /// Voltage per segment, area/voltage scenarios only.
    pub voltage: Option<Vec<f64>>,
    pub objective_value: f64,
    /// One multiplier per scalar constraint, in `constraint_usage` order.
    pub multipliers: Vec<f64>,
    pub kkt_residual: f64,
    /// Stationarity was reached outside the convex class, so the point is
    /// only known to be a local optimum.
    pub local_only: bool,
    pub iterations: usize,
}

impl Allocation {
    pub fn new(x: Vec<f64>, objective_value: f64) -> Self {
        Self {
            x,
            voltage: None,
            objective_value,
            multipliers: Vec::new(),
            kkt_residual: 0.0,
            local_only: false,
            iterations: 0,
        }
    }

    /// Builds an allocation by evaluating the scenario objective at `x`
    /// (and `voltage`).
    pub fn evaluate(scenario: &Scenario, x: Vec<f64>, voltage: Option<Vec<f64>>) -> Result<Self, ModelError> {
        let objective_value: f64 = scenario.contributions(&x, voltage.as_deref())?.iter().sum();
        Ok(Self {
            voltage,
            ..Self::new(x, objective_value)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pl(alpha: f64, beta: f64) -> EfficiencyFunction {
        EfficiencyFunction::power_law(alpha, beta).unwrap()
    }

    fn two(resource: ResourceModel, w: (f64, f64), f: (EfficiencyFunction, EfficiencyFunction)) -> Scenario {
        Scenario::new(
            vec![Segment::new("a", w.0, f.0), Segment::new("b", w.1, f.1)],
            resource,
            Objective::TotalTime,
        )
        .unwrap()
    }

    #[test]
    fn weighted_cost_examples() {
        let s = two(
            ResourceModel::StaticBudget { total: 2.0 },
            (0.5, 0.5),
            (pl(1.0, 1.0), pl(1.0, 1.0)),
        );
        assert_eq!(weighted_cost(&s, &[1.0, 1.0]).unwrap(), 1.0);

        let one = Scenario::new(
            vec![Segment::new("only", 1.0, pl(1.0, 0.5))],
            ResourceModel::StaticBudget { total: 4.0 },
            Objective::TotalTime,
        )
        .unwrap();
        assert_eq!(weighted_cost(&one, &[4.0]).unwrap(), 0.5);

        let hm = two(
            ResourceModel::StaticBudget { total: 16.0 },
            (0.1, 0.9),
            (pl(1.0, 0.5), pl(1.0, 1.0)),
        );
        let v = weighted_cost(&hm, &[1.0, 15.0]).unwrap();
        // brute evaluation: 0.1 * 1/sqrt(1) + 0.9 / 15
        let brute = 0.1 / 1f64.sqrt() + 0.9 / 15.0;
        assert!((v - brute).abs() < 1e-15);
        assert!((v - 0.16).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let s = two(
            ResourceModel::StaticBudget { total: 2.0 },
            (0.5, 0.5),
            (pl(1.0, 1.0), pl(1.0, 1.0)),
        );
        assert!(matches!(
            weighted_cost(&s, &[1.0]),
            Err(ModelError::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(constraint_usage(&s, &[1.0, 1.0, 1.0], None).is_err());
    }

    #[test]
    fn constraint_usage_examples() {
        let s = two(
            ResourceModel::StaticBudget { total: 16.0 },
            (0.5, 0.5),
            (pl(1.0, 1.0), pl(1.0, 1.0)),
        );
        let u = constraint_usage(&s, &[1.0, 15.0], None).unwrap();
        assert_eq!(u.len(), 1);
        assert_eq!((u[0].lhs, u[0].budget), (16.0, 16.0));

        let s = two(
            ResourceModel::InstantaneousPower {
                total: 10.0,
                k: vec![0.1, 0.1],
            },
            (0.5, 0.5),
            (pl(1.0, 1.0), pl(1.0, 1.0)),
        );
        let u = constraint_usage(&s, &[4.0, 4.0], None).unwrap();
        assert_eq!(u.len(), 2);
        for c in &u {
            assert!((c.lhs - 4.8).abs() < 1e-15);
            assert_eq!(c.budget, 10.0);
        }

        let s = two(
            ResourceModel::EnergyBudget {
                total: 3.0,
                k: vec![0.0, 0.0],
            },
            (0.6, 0.4),
            (pl(2.0, 0.5), pl(5.0, 0.3)),
        );
        let p = [1.7, 0.4];
        let u = constraint_usage(&s, &p, None).unwrap();
        let expected = 0.6 / (2.0 * 1.7f64.sqrt()) * 1.7 + 0.4 / (5.0 * 0.4f64.powf(0.3)) * 0.4;
        assert!((u[0].lhs - expected).abs() < 1e-15);
    }

    #[test]
    fn tdp_is_weighted_mean_power_plus_leakage() {
        let s = two(
            ResourceModel::TdpBudget {
                total: 3.0,
                k: vec![0.2, 0.1],
            },
            (0.5, 0.5),
            (pl(1.0, 1.0), pl(1.0, 1.0)),
        );
        // equal powers: weighted mean is the common power
        let u = constraint_usage(&s, &[2.0, 2.0], None).unwrap();
        assert!((u[0].lhs - (0.2 * 2.0 + 0.1 * 2.0 + 2.0)).abs() < 1e-15);
    }

    #[test]
    fn area_energy_usage_and_cost() {
        let s = two(
            ResourceModel::AreaEnergy {
                area_total: 4.0,
                energy_total: 2.0,
            },
            (0.7, 0.3),
            (pl(1.0, 0.5), pl(1.0, 0.5)),
        );
        let (a, v) = ([3.0, 1.0], [0.5, 2.0]);
        let u = constraint_usage(&s, &a, Some(&v)).unwrap();
        assert_eq!(u[0].lhs, 4.0);
        let e = 0.7 * 3f64.sqrt() * 0.25 + 0.3 * 1.0 * 4.0;
        assert!((u[1].lhs - e).abs() < 1e-14);
        let c = weighted_cost_with_voltage(&s, &a, &v).unwrap();
        let brute = 0.7 / (0.5 * 3f64.sqrt()) + 0.3 / (2.0 * 1.0);
        assert!((c - brute).abs() < 1e-14);
        assert!(weighted_cost(&s, &a).is_err());
    }

    #[test]
    fn zero_weight_segments_ignored() {
        let s = two(
            ResourceModel::StaticBudget { total: 2.0 },
            (1.0, 0.0),
            (pl(1.0, 1.0), pl(1.0, 1.0)),
        );
        assert_eq!(weighted_cost(&s, &[2.0, 0.0]).unwrap(), 0.5);
        assert_eq!(s.active_indices(), vec![0]);
    }

    #[test]
    fn scenario_validation() {
        let seg = |n: &str, w: f64| Segment::new(n, w, pl(1.0, 1.0));
        let st = ResourceModel::StaticBudget { total: 1.0 };
        assert!(matches!(
            Scenario::new(vec![seg("a", 1.0), seg("a", 1.0)], st.clone(), Objective::TotalTime),
            Err(ModelError::DuplicateName(_))
        ));
        assert!(matches!(
            Scenario::new(vec![seg("a", 0.0)], st.clone(), Objective::TotalTime),
            Err(ModelError::NoActiveSegment)
        ));
        assert!(Scenario::new(vec![seg("a", -1.0)], st, Objective::TotalTime).is_err());
        assert!(Scenario::new(
            vec![seg("a", 1.0)],
            ResourceModel::EnergyBudget {
                total: 1.0,
                k: vec![0.1, 0.2]
            },
            Objective::TotalTime
        )
        .is_err());
        assert!(Scenario::new(
            vec![seg("a", 1.0)],
            ResourceModel::StaticBudget { total: 0.0 },
            Objective::TotalTime
        )
        .is_err());
        assert!(Scenario::new(
            vec![seg("a", 1.0)],
            ResourceModel::AreaEnergy {
                area_total: 1.0,
                energy_total: 1.0
            },
            Objective::AverageLatency
        )
        .is_err());
    }

    #[test]
    fn pooled_parallel_time() {
        let s = two(
            ResourceModel::StaticBudget { total: 16.0 },
            (0.1, 0.9),
            (pl(1.0, 0.5), pl(1.0, 1.0)),
        )
        .with_pooling(Pooling { parallel: 1, helper: 0 })
        .unwrap();
        let c = weighted_cost(&s, &[4.0, 12.0]).unwrap();
        assert!((c - (0.1 / 2.0 + 0.9 / (12.0 + 2.0))).abs() < 1e-15);
        // no small cores at all: the big core runs the parallel part alone
        let c0 = weighted_cost(&s, &[16.0, 0.0]).unwrap();
        assert!((c0 - (0.1 / 4.0 + 0.9 / 4.0)).abs() < 1e-15);
    }
}
