//! Scenario builders and closed-form speedup evaluators.
//!
//! * Serial/parallel split ([`build_hill_marty`]): a Pollack-law serial core
//!   (`1/sqrt(a)`) and linearly scaling parallel cores (`1/a`) sharing an area
//!   budget, with total baseline time 1. In pooled mode the parallel segment
//!   also runs on the serial core, with parallel performance
//!   `a_parallel + sqrt(a_serial)`.
//! * Heterogeneous chips ([`build_het`], [`het_speedup`],
//!   [`sensitivity_speedup`]): one general-purpose segment (`1/a`, weight
//!   `1 - delta`) and `n` equally efficient accelerators (`1/(alpha a)`,
//!   weight `delta / n` each).
//! * Average-latency builders for a CPU's internal units and for a network
//!   processor with per-class accelerators.

use crate::model::{
    EfficiencyFunction, ModelError, Objective, Pooling, ResourceModel, SaturatingCurve, Scenario, Segment,
};
use crate::solver::{solve, SolveError, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HillMartyMode {
    /// The parallel segment runs on the small cores only.
    Dedicated,
    /// The parallel segment runs on every core, the serial core included.
    Pooled,
}

fn unit_interval_open(name: &'static str, v: f64) -> Result<(), ModelError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(ModelError::Domain {
            function: name,
            value: v,
        })
    }
}

/// Two segments, `serial` (index 0) and `parallel` (index 1).
pub fn build_hill_marty(t_parallel: f64, area: f64, mode: HillMartyMode) -> Result<Scenario, ModelError> {
    unit_interval_open("t_parallel", t_parallel)?;
    let s = Scenario::new(
        vec![
            Segment::new("serial", 1.0 - t_parallel, EfficiencyFunction::power_law(1.0, 0.5)?),
            Segment::new("parallel", t_parallel, EfficiencyFunction::power_law(1.0, 1.0)?),
        ],
        ResourceModel::StaticBudget { total: area },
        Objective::TotalTime,
    )?;
    match mode {
        HillMartyMode::Dedicated => Ok(s),
        HillMartyMode::Pooled => s.with_pooling(Pooling { parallel: 1, helper: 0 }),
    }
}

/// Optimal serial-core area for the serial/parallel split.
pub fn optimal_serial_area(
    t_parallel: f64,
    area: f64,
    mode: HillMartyMode,
    cfg: &SolverConfig,
) -> Result<f64, SolveError> {
    let s = build_hill_marty(t_parallel, area, mode)?;
    Ok(solve(&s, cfg)?.x[0])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HetParams {
    /// Number of accelerators.
    pub n: usize,
    /// Common accelerator efficiency.
    pub alpha: f64,
    /// Fraction of baseline time that runs on accelerators.
    pub delta: f64,
    pub area: f64,
    /// The designer's assumed `delta`; used by [`sensitivity_speedup`] only.
    pub d: f64,
}

impl HetParams {
    pub fn new(n: usize, alpha: f64, delta: f64, area: f64) -> Self {
        Self {
            n,
            alpha,
            delta,
            area,
            d: 0.5,
        }
    }

    pub fn with_design(self, d: f64) -> Self {
        Self { d, ..self }
    }

    /// `n / alpha`, the only way `n` and `alpha` enter the closed forms.
    pub fn ratio(&self) -> f64 {
        self.n as f64 / self.alpha
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n == 0 {
            return Err(ModelError::InvalidParameter(
                "at least one accelerator is needed".into(),
            ));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(ModelError::Domain {
                function: "alpha",
                value: self.alpha,
            });
        }
        if !(self.delta >= 0.0 && self.delta < 1.0) {
            return Err(ModelError::Domain {
                function: "delta",
                value: self.delta,
            });
        }
        if !(self.area.is_finite() && self.area > 0.0) {
            return Err(ModelError::Domain {
                function: "area",
                value: self.area,
            });
        }
        Ok(())
    }
}

/// `(2 sqrt((n/alpha) delta (1 - delta)) + 1 - delta (1 - n/alpha))^-1`:
/// optimal heterogeneous time relative to spending the whole area on the
/// general-purpose core. Independent of the area.
pub fn het_speedup(p: &HetParams) -> Result<f64, ModelError> {
    p.validate()?;
    let (r, delta) = (p.ratio(), p.delta);
    Ok(1.0 / (2.0 * (r * delta * (1.0 - delta)).sqrt() + 1.0 - delta * (1.0 - r)))
}

/// Speedup of a chip whose accelerator areas were sized for `delta = d`
/// (`a_i = a_0 sqrt(d / (alpha n (1 - d)))`) when the workload actually has
/// `delta`:
/// `((1 + delta/d - 2 delta) sqrt((n/alpha) d/(1-d)) + 1 - delta (1 - n/alpha))^-1`.
pub fn sensitivity_speedup(p: &HetParams) -> Result<f64, ModelError> {
    p.validate()?;
    unit_interval_open("d", p.d)?;
    let (r, delta, d) = (p.ratio(), p.delta, p.d);
    let q = (r * d / (1.0 - d)).sqrt();
    Ok(1.0 / ((1.0 + delta / d - 2.0 * delta) * q + 1.0 - delta * (1.0 - r)))
}

/// The `n + 1`-segment scenario behind [`het_speedup`]: segment 0 is the
/// general-purpose core, segments `1..=n` the accelerators.
pub fn build_het(p: &HetParams) -> Result<Scenario, ModelError> {
    p.validate()?;
    let mut segs = vec![Segment::new(
        "cpu",
        1.0 - p.delta,
        EfficiencyFunction::power_law(1.0, 1.0)?,
    )];
    for i in 0..p.n {
        segs.push(Segment::new(
            format!("acc{i}"),
            p.delta / p.n as f64,
            EfficiencyFunction::power_law(p.alpha, 1.0)?,
        ));
    }
    Scenario::new(
        segs,
        ResourceModel::StaticBudget { total: p.area },
        Objective::TotalTime,
    )
}

/// [`het_speedup`] from first principles: `T_hom / T_exec` with `T_hom = 1/A`
/// and `T_exec` the solved optimum of [`build_het`].
pub fn het_speedup_numeric(p: &HetParams, cfg: &SolverConfig) -> Result<f64, SolveError> {
    let s = build_het(p)?;
    let t_exec = solve(&s, cfg)?.objective_value;
    Ok((1.0 / p.area) / t_exec)
}

/// Units of a CPU with their latency functions and per-instruction rates.
#[derive(Debug, Clone, PartialEq)]
pub struct CpuUnits {
    pub cache: EfficiencyFunction,
    pub branch: EfficiencyFunction,
    pub alu: EfficiencyFunction,
}

impl Default for CpuUnits {
    /// Cache hit rate `1 - 0.2 x^-0.5` between 1 and 50 cycles, branch
    /// prediction `1 - 0.15 x^-0.5` with a 15-cycle penalty, one-cycle ALU.
    fn default() -> Self {
        let hit = SaturatingCurve::new(0.8, 0.5).expect("valid curve");
        let predict = SaturatingCurve::new(0.85, 0.5).expect("valid curve");
        Self {
            cache: EfficiencyFunction::cache(hit, 1.0, 50.0).expect("valid cache"),
            branch: EfficiencyFunction::branch(predict, 15.0).expect("valid branch"),
            alu: EfficiencyFunction::throughput(1.0).expect("valid alu"),
        }
    }
}

/// Cycles-per-instruction model: `lambda_c c_c(x_c) + lambda_p c_p(x_p) +
/// lambda_a c_a(x_a)` under a shared static budget.
pub fn build_cpu_internal(
    lambda_c: f64,
    lambda_p: f64,
    lambda_a: f64,
    units: &CpuUnits,
    budget: f64,
) -> Result<Scenario, ModelError> {
    for f in [&units.cache, &units.branch, &units.alu] {
        f.validate()?;
    }
    Scenario::new(
        vec![
            Segment::new("cache", lambda_c, units.cache.clone()),
            Segment::new("predictor", lambda_p, units.branch.clone()),
            Segment::new("alu", lambda_a, units.alu.clone()),
        ],
        ResourceModel::StaticBudget { total: budget },
        Objective::AverageLatency,
    )
}

/// One accelerator per packet class; `rates[i]` is the arrival rate of class
/// `i`, handled with latency `functions[i]`.
pub fn build_network_processor(
    rates: &[f64],
    functions: &[EfficiencyFunction],
    budget: f64,
) -> Result<Scenario, ModelError> {
    if rates.len() != functions.len() {
        return Err(ModelError::DimensionMismatch {
            expected: rates.len(),
            got: functions.len(),
        });
    }
    let segs = rates
        .iter()
        .zip(functions)
        .enumerate()
        .map(|(i, (&r, f))| Segment::new(format!("class{i}"), r, f.clone()))
        .collect();
    Scenario::new(
        segs,
        ResourceModel::StaticBudget { total: budget },
        Objective::AverageLatency,
    )
}

/// Evenly spaced values from `from` to `to` inclusive.
pub fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![from],
        _ => (0..steps)
            .map(|i| {
                if i == steps - 1 {
                    to
                } else {
                    from + (to - from) * (i as f64 / (steps - 1) as f64)
                }
            })
            .collect(),
    }
}

/// Geometrically spaced values from `from` to `to` inclusive; both must be
/// positive.
pub fn logspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    linspace(from.ln(), to.ln(), steps)
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 {
                from
            } else if i + 1 == steps {
                to
            } else {
                l.exp()
            }
        })
        .collect()
}
