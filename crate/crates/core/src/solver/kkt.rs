//! First-order optimality diagnostics.

use crate::model::{Allocation, ResourceModel, Scenario};

/// Partial derivatives of the objective with respect to each segment's
/// resource (areas for area/voltage scenarios, voltage held fixed).
pub fn objective_gradient(scenario: &Scenario, x: &[f64]) -> Vec<f64> {
    let segs = scenario.segments();
    let mut g = vec![0.0; segs.len()];
    for i in scenario.active_indices() {
        g[i] = segs[i].weight * segs[i].efficiency.deriv_unchecked(x[i]);
    }
    if let Some(p) = scenario.pooling() {
        let (fp, fh) = (&segs[p.parallel].efficiency, &segs[p.helper].efficiency);
        let perf = perf(fp, x[p.parallel]) + perf(fh, x[p.helper]);
        let w = segs[p.parallel].weight;
        g[p.parallel] = -w * perf_deriv(fp, x[p.parallel]) / (perf * perf);
        g[p.helper] -= w * perf_deriv(fh, x[p.helper]) / (perf * perf);
    }
    g
}

/// Throughput `1/f(x)` of a unit, zero for an empty unit.
pub(crate) fn perf(f: &crate::model::EfficiencyFunction, x: f64) -> f64 {
    use crate::model::EfficiencyFunction::*;
    match f {
        PowerLaw { alpha, beta } => alpha * x.powf(*beta),
        Throughput { t_unit } => x / t_unit,
        _ if x == 0.0 => 0.0,
        other => 1.0 / other.eval_unchecked(x),
    }
}

pub(crate) fn perf_deriv(f: &crate::model::EfficiencyFunction, x: f64) -> f64 {
    use crate::model::EfficiencyFunction::*;
    match f {
        PowerLaw { alpha, beta } => alpha * beta * x.powf(beta - 1.0),
        Throughput { t_unit } => 1.0 / t_unit,
        other => {
            let v = other.eval_unchecked(x);
            -other.deriv_unchecked(x) / (v * v)
        }
    }
}

/// Gradient of the single scalar power constraint (energy or average
/// power) with respect to each segment's power.
pub(crate) fn power_constraint_gradient(scenario: &Scenario, p: &[f64]) -> Vec<f64> {
    let segs = scenario.segments();
    let active = scenario.active_indices();
    let (k, energy) = match scenario.resource() {
        ResourceModel::EnergyBudget { k, .. } => (k, true),
        ResourceModel::TdpBudget { k, .. } => (k, false),
        _ => unreachable!("power_constraint_gradient on a non-power model"),
    };
    let standing: f64 = k.iter().zip(p).map(|(k, p)| k * p).sum();
    let mut time = 0.0;
    let mut dynamic = 0.0;
    for &i in &active {
        let tf = segs[i].weight * segs[i].efficiency.eval_unchecked(p[i]);
        time += tf;
        dynamic += tf * p[i];
    }
    let mut g = vec![0.0; segs.len()];
    for &i in &active {
        let w = segs[i].weight;
        let f = segs[i].efficiency.eval_unchecked(p[i]);
        let df = segs[i].efficiency.deriv_unchecked(p[i]);
        let d_time = w * df;
        let d_dynamic = w * (f + p[i] * df);
        g[i] = if energy {
            k[i] * time + standing * d_time + d_dynamic
        } else {
            k[i] + (d_dynamic * time - dynamic * d_time) / (time * time)
        };
    }
    g
}

/// Relative violation of the first-order optimality conditions.
///
/// For a plain static budget this is the spread of the weighted marginals,
/// `max_ij |w_i f_i'(x_i) - w_j f_j'(x_j)| / max_k |w_k f_k'(x_k)|`, and needs
/// no multiplier. Every other model measures the Lagrangian gradient using
/// the multipliers stored in the allocation, relative to the largest
/// objective partial.
pub fn kkt_residual(scenario: &Scenario, allocation: &Allocation) -> f64 {
    let x = &allocation.x;
    let active = scenario.active_indices();
    let mu = |j: usize| allocation.multipliers.get(j).copied().unwrap_or(0.0);
    match scenario.resource() {
        ResourceModel::StaticBudget { .. } if scenario.pooling().is_none() => {
            let g: Vec<f64> = active
                .iter()
                .map(|&i| scenario.segments()[i].weight * scenario.segments()[i].efficiency.deriv_unchecked(x[i]))
                .collect();
            let (min, max) = g
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if g.len() < 2 || scale == 0.0 {
                0.0
            } else {
                (max - min) / scale
            }
        }
        ResourceModel::StaticBudget { .. } => {
            let g = objective_gradient(scenario, x);
            let scale = active.iter().fold(0.0f64, |m, &i| m.max(g[i].abs()));
            let nu = mu(0);
            active
                .iter()
                .map(|&i| {
                    let r = g[i] + nu;
                    // x = 0 is admissible for the pooled parallel units; there
                    // only a negative reduced gradient is a violation
                    if x[i] == 0.0 {
                        (-r).max(0.0)
                    } else {
                        r.abs()
                    }
                })
                .fold(0.0, f64::max)
                / scale
        }
        ResourceModel::InstantaneousPower { k, total } => {
            let segs = scenario.segments();
            let g = objective_gradient(scenario, x);
            let scale = active.iter().fold(0.0f64, |m, &i| m.max(g[i].abs()));
            let nu: Vec<f64> = (0..x.len()).map(mu).collect();
            let sum_nu: f64 = nu.iter().sum();
            let standing: f64 = k.iter().zip(x).map(|(k, p)| k * p).sum();
            let mut worst = 0.0f64;
            for i in 0..segs.len() {
                if segs[i].is_active() {
                    worst = worst.max((g[i] + nu[i] + k[i] * sum_nu).abs());
                }
                worst = worst.max((-nu[i]).max(0.0));
                // complementary slackness, scaled like a gradient entry
                let slack = (total - x[i] - standing) / total;
                worst = worst.max((nu[i] * slack).abs());
            }
            worst / scale
        }
        ResourceModel::EnergyBudget { .. } | ResourceModel::TdpBudget { .. } => {
            let g = objective_gradient(scenario, x);
            let c = power_constraint_gradient(scenario, x);
            let scale = active.iter().fold(0.0f64, |m, &i| m.max(g[i].abs()));
            let nu = mu(0);
            active.iter().map(|&i| (g[i] + nu * c[i]).abs()).fold(0.0, f64::max) / scale
        }
        ResourceModel::AreaEnergy { .. } => {
            let Some(v) = allocation.voltage.as_ref() else {
                return f64::INFINITY;
            };
            let (lambda, nu) = (mu(0), mu(1));
            let segs = scenario.segments();
            let mut worst = 0.0f64;
            let mut scale = 0.0f64;
            for &i in &active {
                let (t, f) = (segs[i].weight, &segs[i].efficiency);
                let (a, vi) = (x[i], v[i]);
                let (fa, dfa) = (f.eval_unchecked(a), f.deriv_unchecked(a));
                let dt_da = t * dfa / vi;
                let dt_dv = -t * fa / (vi * vi);
                let de_da = t * vi * vi * (fa + a * dfa);
                let de_dv = 2.0 * t * fa * a * vi;
                scale = scale.max(dt_da.abs()).max(dt_dv.abs());
                worst = worst
                    .max((dt_da + lambda + nu * de_da).abs())
                    .max((dt_dv + nu * de_dv).abs());
            }
            worst / scale
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EfficiencyFunction, Objective, Segment};

    fn pl(alpha: f64, beta: f64) -> EfficiencyFunction {
        EfficiencyFunction::power_law(alpha, beta).unwrap()
    }

    #[test]
    fn equal_split_on_skewed_weights_is_far_from_optimal() {
        let s = Scenario::new(
            vec![
                Segment::new("heavy", 0.9, pl(1.0, 1.0)),
                Segment::new("light", 0.1, pl(1.0, 1.0)),
            ],
            ResourceModel::StaticBudget { total: 2.0 },
            Objective::TotalTime,
        )
        .unwrap();
        let a = Allocation::evaluate(&s, vec![1.0, 1.0], None).unwrap();
        let r = kkt_residual(&s, &a);
        // |0.9 - 0.1| / 0.9 by hand
        assert!((r - 0.8 / 0.9).abs() < 1e-15);
        assert!(r >= 0.5);
    }

    #[test]
    fn analytic_two_segment_relation_is_stationary() {
        // a_p = a_s^(3/4) * sqrt(2 t_p / (1 - t_p)) holds the weighted
        // marginals equal for f_s = 1/sqrt(a), f_p = 1/a.
        let tp = 0.7f64;
        let a_s = 3.3f64;
        let a_p = a_s.powf(0.75) * (2.0 * tp / (1.0 - tp)).sqrt();
        let s = Scenario::new(
            vec![
                Segment::new("serial", 1.0 - tp, pl(1.0, 0.5)),
                Segment::new("parallel", tp, pl(1.0, 1.0)),
            ],
            ResourceModel::StaticBudget { total: a_s + a_p },
            Objective::TotalTime,
        )
        .unwrap();
        let a = Allocation::evaluate(&s, vec![a_s, a_p], None).unwrap();
        assert!(kkt_residual(&s, &a) <= 1e-9);
    }

    #[test]
    fn power_gradient_matches_finite_differences() {
        for resource in [
            ResourceModel::EnergyBudget {
                total: 5.0,
                k: vec![0.1, 0.3],
            },
            ResourceModel::TdpBudget {
                total: 5.0,
                k: vec![0.1, 0.3],
            },
        ] {
            let s = Scenario::new(
                vec![
                    Segment::new("a", 0.6, pl(1.0, 0.5)),
                    Segment::new("b", 0.4, pl(10.0, 0.7)),
                ],
                resource,
                Objective::TotalTime,
            )
            .unwrap();
            let p = [1.3, 2.1];
            let g = power_constraint_gradient(&s, &p);
            for i in 0..2 {
                let h = 1e-6 * p[i];
                let mut up = p;
                let mut dn = p;
                up[i] += h;
                dn[i] -= h;
                let lhs = |q: &[f64]| crate::model::constraint_usage(&s, q, None).unwrap()[0].lhs;
                let fd = (lhs(&up) - lhs(&dn)) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-6 * g[i].abs().max(1e-3), "{fd} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn pooled_gradient_matches_finite_differences() {
        let s = Scenario::new(
            vec![
                Segment::new("serial", 0.2, pl(1.0, 0.5)),
                Segment::new("parallel", 0.8, pl(1.0, 1.0)),
            ],
            ResourceModel::StaticBudget { total: 16.0 },
            Objective::TotalTime,
        )
        .unwrap()
        .with_pooling(crate::model::Pooling { parallel: 1, helper: 0 })
        .unwrap();
        let x = [5.0, 11.0];
        let g = objective_gradient(&s, &x);
        for i in 0..2 {
            let h = 1e-6 * x[i];
            let mut up = x;
            let mut dn = x;
            up[i] += h;
            dn[i] -= h;
            let c = |q: &[f64]| crate::model::weighted_cost(&s, q).unwrap();
            let fd = (c(&up) - c(&dn)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7 * g[i].abs());
        }
    }
}
