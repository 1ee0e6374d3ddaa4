//! Joint area and voltage assignment under an area and an energy budget.
//!
//! Segment `i` runs in `t_i f_i(a_i) / v_i` and spends `t_i f_i(a_i) a_i v_i^2`.
//! For fixed areas the optimal voltages are `v_i = (2 mu a_i)^(-1/3)`, which
//! makes the energy constraint bind with `(2 mu)^(2/3) = H / E`, where
//! `H = sum t_i f_i(a_i) a_i^(1/3)`, and the time becomes `H^(3/2) / E^(1/2)`.
//! The area split therefore minimizes `H` under the area budget alone, a
//! static water-filling on `h_i(a) = f_i(a) a^(1/3)`, independent of `E`.

use super::{solve_separable, SolveError, SolverConfig};
use crate::model::{Allocation, EfficiencyFunction, ResourceModel, Scenario};

pub fn solve_area_voltage(scenario: &Scenario, cfg: &SolverConfig) -> Result<Allocation, SolveError> {
    cfg.validate()?;
    let (area, energy) = match scenario.resource() {
        ResourceModel::AreaEnergy {
            area_total,
            energy_total,
        } => (*area_total, *energy_total),
        other => {
            return Err(SolveError::Unsupported(format!(
                "area/voltage solver needs an area_energy model, got {}",
                other.kind()
            )))
        }
    };
    let segs = scenario.segments();
    let reduced: Vec<_> = segs
        .iter()
        .map(|s| {
            let mut r = s.clone();
            r.efficiency = match &s.efficiency {
                EfficiencyFunction::PowerLaw { alpha, beta } if *beta > 1.0 / 3.0 => EfficiencyFunction::PowerLaw {
                    alpha: *alpha,
                    beta: beta - 1.0 / 3.0,
                },
                EfficiencyFunction::Throughput { t_unit } => EfficiencyFunction::PowerLaw {
                    alpha: 1.0 / t_unit,
                    beta: 2.0 / 3.0,
                },
                _ if !s.is_active() => EfficiencyFunction::Throughput { t_unit: 1.0 },
                other => return Err(SolveError::InvalidModel(format!(
                    "segment `{}`: voltage scaling needs a power law with beta > 1/3 or a throughput function, got {}",
                    s.name,
                    other.kind()
                ))),
            };
            Ok(r)
        })
        .collect::<Result<_, _>>()?;
    let reduced = Scenario::new(
        reduced,
        ResourceModel::StaticBudget { total: area },
        scenario.objective(),
    )?;
    let split = solve_separable(&reduced, cfg)?;

    let h: f64 = scenario
        .active_indices()
        .iter()
        .map(|&i| segs[i].weight * segs[i].efficiency.eval_unchecked(split.x[i]) * split.x[i].cbrt())
        .sum();
    let mu = 0.5 * (h / energy).powf(1.5);
    let voltage: Vec<f64> = segs
        .iter()
        .zip(&split.x)
        .map(|(s, &a)| {
            if s.is_active() {
                (2.0 * mu * a).cbrt().recip()
            } else {
                0.0
            }
        })
        .collect();

    let mut alloc = Allocation::evaluate(scenario, split.x, Some(voltage))?;
    // area multiplier by the envelope theorem on T = H^(3/2) E^(-1/2)
    let lambda = 1.5 * (h / energy).sqrt() * split.multipliers[0];
    alloc.multipliers = vec![lambda, mu];
    alloc.iterations = split.iterations;
    alloc.local_only = split.local_only;
    alloc.kkt_residual = super::kkt_residual(scenario, &alloc);
    Ok(alloc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{constraint_usage, weighted_cost_with_voltage, Objective, Segment};

    fn scenario(w: &[f64], fs: Vec<EfficiencyFunction>, area: f64, energy: f64) -> Scenario {
        let segs = w
            .iter()
            .zip(fs)
            .enumerate()
            .map(|(i, (&w, f))| Segment::new(format!("s{i}"), w, f))
            .collect();
        Scenario::new(
            segs,
            ResourceModel::AreaEnergy {
                area_total: area,
                energy_total: energy,
            },
            Objective::TotalTime,
        )
        .unwrap()
    }

    #[test]
    fn pollack_cores_split_area_by_weight_power() {
        // f = 1/sqrt(a): h = a^(-1/6), so a_i is proportional to t_i^(6/7)
        let f = EfficiencyFunction::power_law(1.0, 0.5).unwrap();
        let s = scenario(&[0.7, 0.3], vec![f.clone(), f], 10.0, 3.0);
        let a = solve_area_voltage(&s, &SolverConfig::default()).unwrap();
        let r = (0.7f64 / 0.3).powf(6.0 / 7.0);
        assert!((a.x[0] / a.x[1] - r).abs() < 1e-8 * r);
        let u = constraint_usage(&s, &a.x, a.voltage.as_deref()).unwrap();
        for c in &u {
            assert!((c.lhs - c.budget).abs() < 1e-9 * c.budget, "{c}");
        }
        assert!(a.kkt_residual < 1e-7, "{}", a.kkt_residual);
    }

    #[test]
    fn no_local_improvement() {
        let s = scenario(
            &[0.5, 0.5],
            vec![
                EfficiencyFunction::power_law(1.0, 0.5).unwrap(),
                EfficiencyFunction::throughput(0.2).unwrap(),
            ],
            8.0,
            4.0,
        );
        let a = solve_area_voltage(&s, &SolverConfig::default()).unwrap();
        let v = a.voltage.clone().unwrap();
        let h = 1e-3;
        for (da, dv0) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h), (h, h), (-h, -h)] {
            let x = [a.x[0] + da, a.x[1] - da];
            let mut volt = [v[0] + dv0, v[1]];
            // rescale the second voltage back onto the energy budget
            let seg = s.segments();
            let e0 = 0.5 * seg[0].efficiency.eval(x[0]).unwrap() * x[0] * volt[0] * volt[0];
            let c1 = 0.5 * seg[1].efficiency.eval(x[1]).unwrap() * x[1];
            if e0 >= 4.0 {
                continue;
            }
            volt[1] = ((4.0 - e0) / c1).sqrt();
            let t = weighted_cost_with_voltage(&s, &x, &volt).unwrap();
            assert!(t >= a.objective_value - 1e-12, "{t} < {}", a.objective_value);
        }
    }

    #[test]
    fn flat_power_law_rejected() {
        let s = scenario(&[1.0], vec![EfficiencyFunction::power_law(1.0, 0.3).unwrap()], 1.0, 1.0);
        assert!(matches!(
            solve_area_voltage(&s, &SolverConfig::default()),
            Err(SolveError::InvalidModel(_))
        ));
    }
}
