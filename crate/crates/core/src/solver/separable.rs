//! Water-filling for a single static budget.
//!
//! At the optimum every active segment has the same weighted marginal gain
//! `w_i f_i'(x_i) = -slope`. For a trial slope each segment's allocation is
//! the inverse of its marginal, and the total allocation is decreasing in the
//! slope, so bisecting the slope (in log space) drives the total onto the
//! budget.

use super::{bisect_log, kkt_residual, relative_gap, SolveError, SolverConfig};
use crate::model::{Allocation, ResourceModel, Scenario};

pub fn solve_separable(scenario: &Scenario, cfg: &SolverConfig) -> Result<Allocation, SolveError> {
    cfg.validate()?;
    let total = match scenario.resource() {
        ResourceModel::StaticBudget { total } => *total,
        other => {
            return Err(SolveError::Unsupported(format!(
                "separable solver needs a static budget, got {}",
                other.kind()
            )))
        }
    };
    if scenario.pooling().is_some() {
        return Err(SolveError::Unsupported(
            "pooled execution is not separable; use solve_coupled".into(),
        ));
    }
    let segs = scenario.segments();
    let active = scenario.active_indices();
    let n = active.len();

    let mut floor = 0.0;
    let mut local_only = false;
    for &i in &active {
        let f = &segs[i].efficiency;
        let (lo, hi) = f.domain();
        floor += f.convex_from().max(lo);
        let probe = (total / n as f64).max(f.convex_from() * (1.0 + 1e-9)).max(lo).min(hi);
        if !(f.deriv_unchecked(probe) < 0.0) {
            return Err(SolveError::InvalidModel(format!(
                "efficiency of `{}` is not decreasing at x = {probe}",
                segs[i].name
            )));
        }
        local_only |= !f.is_convex();
    }
    if floor >= total {
        return Err(SolveError::Infeasible(format!(
            "budget {total} does not cover the segments' minimum useful resource {floor}"
        )));
    }

    let mut x = vec![0.0; segs.len()];
    if n == 1 {
        let i = active[0];
        let (_, hi) = segs[i].efficiency.domain();
        if hi < total {
            return Err(SolveError::InvalidModel(format!(
                "`{}` cannot absorb the budget (domain ends at {hi})",
                segs[i].name
            )));
        }
        x[i] = total;
        let mut alloc = Allocation::evaluate(scenario, x, None)?;
        alloc.multipliers = vec![-segs[i].weight * segs[i].efficiency.deriv_unchecked(total)];
        alloc.local_only = local_only;
        return Ok(alloc);
    }

    let spend = |slope: f64, x: &mut [f64]| -> f64 {
        let mut sum = 0.0;
        for &i in &active {
            x[i] = segs[i].efficiency.marginal_inverse(segs[i].weight, slope);
            sum += x[i];
        }
        sum
    };

    // Initial bracket from the marginals at an even split.
    let even = total / n as f64;
    let marginals: Vec<f64> = active
        .iter()
        .map(|&i| {
            let f = &segs[i].efficiency;
            let (lo, hi) = f.domain();
            let p = even.max(f.convex_from() * (1.0 + 1e-9)).max(lo).min(hi);
            -segs[i].weight * f.deriv_unchecked(p)
        })
        .collect();
    let mut lo = marginals.iter().cloned().fold(f64::INFINITY, f64::min) * 1e-6;
    let mut hi = marginals.iter().cloned().fold(0.0, f64::max) * 1e6;
    let mut scratch = vec![0.0; segs.len()];
    let mut grow = 0;
    while spend(lo, &mut scratch) < total {
        lo *= 0.5;
        grow += 1;
        if grow > cfg.max_iters || lo == 0.0 {
            return Err(SolveError::InvalidModel(
                "segment domains cannot absorb the whole budget".into(),
            ));
        }
    }
    grow = 0;
    while spend(hi, &mut scratch) > total {
        hi *= 2.0;
        grow += 1;
        if grow > cfg.max_iters || !hi.is_finite() {
            return Err(SolveError::NonConvergence {
                reason: "could not bracket the marginal gain".into(),
                residual: f64::INFINITY,
                best: None,
                trace: Vec::new(),
            });
        }
    }

    let target = 0.01 * cfg.budget_tol * total;
    let mut best = (f64::INFINITY, lo);
    let mut iterations = 0;
    let (lo, hi) = bisect_log(lo, hi, cfg.max_iters, |slope| {
        iterations += 1;
        let s = spend(slope, &mut scratch);
        let err = (s - total).abs();
        if err < best.0 {
            best = (err, slope);
        }
        s > total && err > target
    });
    // the last probe may have terminated on the tolerance, so keep whichever
    // end of the bracket or recorded slope fits the budget best
    for slope in [lo, hi] {
        let err = (spend(slope, &mut scratch) - total).abs();
        if err < best.0 {
            best = (err, slope);
        }
    }
    let slope = best.1;
    let used = spend(slope, &mut x);

    let mut alloc = Allocation::evaluate(scenario, x, None)?;
    alloc.multipliers = vec![slope];
    alloc.iterations = iterations;
    alloc.local_only = local_only || active.iter().any(|&i| alloc.x[i] <= segs[i].efficiency.convex_from());
    alloc.kkt_residual = kkt_residual(scenario, &alloc);

    let gap = relative_gap(used, total);
    if gap > cfg.budget_tol || (!alloc.local_only && alloc.kkt_residual > cfg.kkt_tol) {
        let residual = gap.max(alloc.kkt_residual);
        return Err(SolveError::NonConvergence {
            reason: "budget or stationarity tolerance not reached".into(),
            residual,
            best: Some(Box::new(alloc)),
            trace: Vec::new(),
        });
    }
    Ok(alloc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{weighted_cost, EfficiencyFunction, Objective, Segment};

    fn pl(alpha: f64, beta: f64) -> EfficiencyFunction {
        EfficiencyFunction::power_law(alpha, beta).unwrap()
    }

    fn scenario(weights: &[f64], fs: Vec<EfficiencyFunction>, total: f64) -> Scenario {
        let segs = weights
            .iter()
            .zip(fs)
            .enumerate()
            .map(|(i, (&w, f))| Segment::new(format!("s{i}"), w, f))
            .collect();
        Scenario::new(segs, ResourceModel::StaticBudget { total }, Objective::TotalTime).unwrap()
    }

    #[test]
    fn symmetric_segments_split_evenly() {
        let s = scenario(&[0.5, 0.5], vec![pl(3.0, 0.7), pl(3.0, 0.7)], 2.0);
        let a = solve_separable(&s, &SolverConfig::default()).unwrap();
        assert!((a.x[0] - 1.0).abs() < 1e-9 && (a.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_segment_takes_everything() {
        let s = scenario(&[1.0], vec![pl(2.0, 0.5)], 7.0);
        let a = solve_separable(&s, &SolverConfig::default()).unwrap();
        assert_eq!(a.x, vec![7.0]);
    }

    #[test]
    fn zero_weight_segments_get_nothing() {
        let s = scenario(&[0.3, 0.0, 0.7], vec![pl(1.0, 1.0), pl(5.0, 1.0), pl(1.0, 1.0)], 3.0);
        let a = solve_separable(&s, &SolverConfig::default()).unwrap();
        assert_eq!(a.x[1], 0.0);
        assert!((a.x[0] + a.x[2] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn half_parallel_matches_scalar_oracle() {
        // t = (0.5, 0.5), f = (1/sqrt(a), 1/a), A = 16: optimum satisfies
        // a_p = sqrt(2) a_s^(3/4). Independent oracle: bisect
        // a_s + sqrt(2) a_s^(3/4) = 16 directly.
        let (mut lo, mut hi) = (0.0f64, 16.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid + 2f64.sqrt() * mid.powf(0.75) < 16.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let a_s = 0.5 * (lo + hi);
        let s = scenario(&[0.5, 0.5], vec![pl(1.0, 0.5), pl(1.0, 1.0)], 16.0);
        let a = solve_separable(&s, &SolverConfig::default()).unwrap();
        assert!((a.x[0] - a_s).abs() < 1e-8 * a_s);
        assert!((a.x[1] - (16.0 - a_s)).abs() < 1e-8 * a_s);
        assert!((a.x[1] / a.x[0].powf(0.75) - 2f64.sqrt()).abs() < 1e-8);
        // brute-force scan never beats the solver
        let best_scan = (1..16000)
            .map(|k| {
                let xs = k as f64 * 1e-3;
                weighted_cost(&s, &[xs, 16.0 - xs]).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(a.objective_value <= best_scan + 1e-12);
    }

    #[test]
    fn budget_exhausted_and_stationary() {
        let s = scenario(
            &[0.2, 0.5, 0.3],
            vec![pl(1.0, 0.5), pl(30.0, 0.9), pl(200.0, 1.3)],
            10.0,
        );
        let cfg = SolverConfig::default();
        let a = solve_separable(&s, &cfg).unwrap();
        let used: f64 = a.x.iter().sum();
        assert!((used - 10.0).abs() <= cfg.budget_tol * 10.0);
        assert!(a.kkt_residual <= cfg.kkt_tol);
        assert!(!a.local_only);
        assert!(a.multipliers[0] > 0.0);
    }

    #[test]
    fn rejects_wrong_resource() {
        let s = Scenario::new(
            vec![Segment::new("a", 1.0, pl(1.0, 0.5))],
            ResourceModel::EnergyBudget {
                total: 1.0,
                k: vec![0.0],
            },
            Objective::TotalTime,
        )
        .unwrap();
        assert!(matches!(
            solve_separable(&s, &SolverConfig::default()),
            Err(SolveError::Unsupported(_))
        ));
    }

    #[test]
    fn non_convex_table_is_flagged_local_only() {
        let t = EfficiencyFunction::tabulated(&[(0.1, 10.0), (1.0, 8.0), (3.0, 1.0), (10.0, 0.5)]).unwrap();
        let s = scenario(&[0.5, 0.5], vec![t, pl(1.0, 1.0)], 4.0);
        let a = solve_separable(&s, &SolverConfig::default()).unwrap();
        assert!(a.local_only);
    }

    #[test]
    fn tabulated_power_law_matches_analytic() {
        let pts: Vec<(f64, f64)> = (0..60)
            .map(|i| {
                let x = 0.01 * 1.2f64.powi(i);
                (x, 1.0 / x)
            })
            .collect();
        let t = EfficiencyFunction::tabulated(&pts).unwrap();
        let s_tab = scenario(&[0.9, 0.1], vec![t, pl(1.0, 0.5)], 5.0);
        let s_pl = scenario(&[0.9, 0.1], vec![pl(1.0, 1.0), pl(1.0, 0.5)], 5.0);
        let cfg = SolverConfig::default();
        let a = solve_separable(&s_tab, &cfg).unwrap();
        let b = solve_separable(&s_pl, &cfg).unwrap();
        assert!(!a.local_only);
        for (x, y) in a.x.iter().zip(&b.x) {
            assert!((x - y).abs() < 1e-5 * y, "{x} vs {y}");
        }
    }
}
