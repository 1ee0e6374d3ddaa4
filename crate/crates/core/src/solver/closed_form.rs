//! Analytic allocation relations.
//!
//! Both solvers here express every area as an explicit function of a single
//! reference area, then bisect that reference area until the budget is met.

use super::{bisect_linear, bisect_log, kkt_residual, relative_gap, SolveError, SolverConfig};
use crate::model::{Allocation, EfficiencyFunction, ModelError, ResourceModel, Scenario};

/// Serial/parallel split with a Pollack-law serial core (`1/sqrt(a)`) and
/// linearly scaling parallel cores (`1/a`), total baseline time 1.
///
/// The optimum satisfies `a_parallel = a_serial^(3/4) * sqrt(2 t_p / (1 - t_p))`;
/// `x[0]` is the serial area and `x[1]` the parallel area.
pub fn closed_form_two_segment(t_parallel: f64, area: f64) -> Result<Allocation, SolveError> {
    if !(t_parallel > 0.0 && t_parallel < 1.0) {
        return Err(ModelError::Domain {
            function: "t_parallel",
            value: t_parallel,
        }
        .into());
    }
    if !(area.is_finite() && area > 0.0) {
        return Err(ModelError::InvalidParameter(format!("area must be positive, got {area}")).into());
    }
    let t_serial = 1.0 - t_parallel;
    let ratio = (2.0 * t_parallel / t_serial).sqrt();
    let (lo, hi) = bisect_linear(0.0, area, 2000, |a_s| a_s + ratio * a_s.powf(0.75) < area);
    let a_serial = 0.5 * (lo + hi);
    let a_parallel = area - a_serial;

    let objective = t_serial / a_serial.sqrt() + t_parallel / a_parallel;
    let mut alloc = Allocation::new(vec![a_serial, a_parallel], objective);
    // common marginal gain; both forms agree at the optimum
    alloc.multipliers = vec![t_parallel / (a_parallel * a_parallel)];
    let g_s = -0.5 * t_serial * a_serial.powf(-1.5);
    let g_p = -t_parallel / (a_parallel * a_parallel);
    alloc.kkt_residual = (g_s - g_p).abs() / g_s.abs().max(g_p.abs());
    Ok(alloc)
}

/// All-power-law static-budget allocation relative to segment 0:
///
/// `a_i = a_0^((b_0 + 1)/(b_i + 1)) * ((alpha_0/b_0) / (alpha_i/b_i) * t_i/t_0)^(1/(b_i + 1))`.
pub fn closed_form_powerlaw(scenario: &Scenario, cfg: &SolverConfig) -> Result<Allocation, SolveError> {
    cfg.validate()?;
    let total = match scenario.resource() {
        ResourceModel::StaticBudget { total } if scenario.pooling().is_none() => *total,
        other => {
            return Err(SolveError::Unsupported(format!(
                "closed form needs a plain static budget, got {}",
                other.kind()
            )))
        }
    };
    let segs = scenario.segments();
    let params: Vec<Option<(f64, f64)>> = segs
        .iter()
        .map(|s| match (&s.efficiency, s.is_active()) {
            (_, false) => Ok(None),
            (EfficiencyFunction::PowerLaw { alpha, beta }, true) => Ok(Some((*alpha, *beta))),
            (other, true) => Err(SolveError::InvalidModel(format!(
                "segment `{}` uses a {} function; the closed form needs power laws",
                s.name,
                other.kind()
            ))),
        })
        .collect::<Result<_, _>>()?;
    let Some((alpha0, beta0)) = params[0] else {
        return Err(SolveError::InvalidModel(
            "baseline segment 0 must have positive weight".into(),
        ));
    };
    let t0 = segs[0].weight;

    // ln a_i = exponent_i * ln a_0 + offset_i
    let terms: Vec<Option<(f64, f64)>> = params
        .iter()
        .zip(segs)
        .map(|(p, s)| {
            p.map(|(alpha, beta)| {
                let exponent = (beta0 + 1.0) / (beta + 1.0);
                let coef = (alpha0 / beta0) / (alpha / beta) * (s.weight / t0);
                (exponent, coef.ln() / (beta + 1.0))
            })
        })
        .collect();
    let areas = |a0: f64| -> Vec<f64> {
        let l = a0.ln();
        terms
            .iter()
            .map(|t| t.map_or(0.0, |(e, o)| (e * l + o).exp()))
            .collect()
    };
    let spend = |a0: f64| areas(a0).iter().sum::<f64>();

    let mut lo = total * 1e-12;
    let mut grow = 0;
    while spend(lo) >= total {
        lo *= 1e-6;
        grow += 1;
        if grow > cfg.max_iters || lo == 0.0 {
            return Err(SolveError::NonConvergence {
                reason: "could not bracket the baseline area".into(),
                residual: f64::INFINITY,
                best: None,
                trace: Vec::new(),
            });
        }
    }
    let (lo, hi) = bisect_log(lo, total, cfg.max_iters.max(2000), |a0| spend(a0) < total);
    let a0 = if (spend(lo) - total).abs() <= (spend(hi) - total).abs() {
        lo
    } else {
        hi
    };
    let x = areas(a0);
    let used: f64 = x.iter().sum();

    let mut alloc = Allocation::evaluate(scenario, x, None)?;
    alloc.multipliers = vec![-t0 * segs[0].efficiency.deriv_unchecked(a0)];
    alloc.kkt_residual = kkt_residual(scenario, &alloc);
    let gap = relative_gap(used, total);
    if gap > cfg.budget_tol || alloc.kkt_residual > cfg.kkt_tol {
        return Err(SolveError::NonConvergence {
            reason: "closed form did not meet tolerance".into(),
            residual: gap.max(alloc.kkt_residual),
            best: Some(Box::new(alloc)),
            trace: Vec::new(),
        });
    }
    Ok(alloc)
}
