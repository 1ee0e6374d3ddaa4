//! Solvers for constraints that couple the segments.
//!
//! Energy, average-power and pooled static problems share one scheme: an
//! outer bisection on the constraint multiplier `mu`, and for each trial `mu`
//! an inner minimization of the Lagrangian `T(x) + mu * g(x)` by exact
//! coordinate minimization (each coordinate is a 1-D bisection on the sign of
//! the Lagrangian partial). The constraint value at the inner minimizer is
//! non-increasing in `mu`, which is what the outer bisection relies on.
//!
//! Instantaneous power has one inequality per segment, all sharing the
//! standing-power term, so it is equivalent to `max_i p_i + sum_j k_j p_j <=
//! P`. It is solved by bisecting the cap `m = max_i p_i`: for fixed `m` the
//! rest is a water-filling on `sum_j k_j p_j <= P - m` with box `p_j <= m`,
//! and the derivative of the optimal value in `m` follows from the envelope
//! theorem.

use super::kkt::{perf, perf_deriv};
use super::{bisect_linear, bisect_log, kkt_residual, relative_gap, SolveError, SolverConfig};
use crate::model::{Allocation, EfficiencyFunction, ResourceModel, Scenario};

/// Coordinates pushed to this bound are treated as unbounded by the
/// constraint.
const POWER_CEILING: f64 = 1e12;
const POWER_FLOOR: f64 = 1e-12;

pub fn solve_coupled(scenario: &Scenario, cfg: &SolverConfig) -> Result<Allocation, SolveError> {
    cfg.validate()?;
    match scenario.resource() {
        ResourceModel::InstantaneousPower { total, k } => instantaneous(scenario, *total, k, cfg),
        ResourceModel::EnergyBudget { total, k } => {
            check_energy_degeneracy(scenario, *total, k)?;
            Lagrangian::new(scenario).solve(cfg)
        }
        ResourceModel::TdpBudget { .. } | ResourceModel::StaticBudget { .. } => Lagrangian::new(scenario).solve(cfg),
        ResourceModel::AreaEnergy { .. } => Err(SolveError::Unsupported(
            "area/energy scenarios are solved by solve_area_voltage".into(),
        )),
    }
}

/// Power laws with `beta >= 1` spend no more dynamic energy as power grows;
/// without static power such a unit is not limited by an energy budget.
fn check_energy_degeneracy(scenario: &Scenario, budget: f64, k: &[f64]) -> Result<(), SolveError> {
    let segs = scenario.segments();
    let active = scenario.active_indices();
    // energy per unit of baseline time when it does not depend on power
    let flat_energy = |f: &EfficiencyFunction| match f {
        EfficiencyFunction::PowerLaw { alpha, beta } if *beta == 1.0 => Some(1.0 / alpha),
        EfficiencyFunction::Throughput { t_unit } => Some(*t_unit),
        _ => None,
    };
    let unbounded: Vec<&str> = active
        .iter()
        .filter(|&&i| {
            k[i] == 0.0
                && match &segs[i].efficiency {
                    EfficiencyFunction::PowerLaw { beta, .. } => *beta >= 1.0,
                    EfficiencyFunction::Throughput { .. } => true,
                    _ => false,
                }
        })
        .map(|&i| segs[i].name.as_str())
        .collect();
    if unbounded.is_empty() {
        return Ok(());
    }
    let all_flat = k.iter().all(|&v| v == 0.0) && active.iter().all(|&i| flat_energy(&segs[i].efficiency).is_some());
    if all_flat {
        let energy: f64 = active
            .iter()
            .map(|&i| segs[i].weight * flat_energy(&segs[i].efficiency).unwrap())
            .sum();
        if energy > budget {
            return Err(SolveError::Infeasible(format!(
                "allocation-independent energy {energy} exceeds budget {budget}"
            )));
        }
        return Err(SolveError::Degenerate(format!(
            "energy is allocation-independent ({energy} <= budget {budget}); every allocation is feasible and time falls without bound"
        )));
    }
    Err(SolveError::Degenerate(format!(
        "energy does not grow with power for segment(s) {}; their allocation is unbounded",
        unbounded.join(", ")
    )))
}

enum Constraint {
    Static,
    Energy(Vec<f64>),
    Tdp(Vec<f64>),
}

struct Lagrangian<'a> {
    scenario: &'a Scenario,
    active: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    budget: f64,
    constraint: Constraint,
}

impl<'a> Lagrangian<'a> {
    fn new(scenario: &'a Scenario) -> Self {
        let segs = scenario.segments();
        let n = segs.len();
        let (budget, constraint) = match scenario.resource() {
            ResourceModel::StaticBudget { total } => (*total, Constraint::Static),
            ResourceModel::EnergyBudget { total, k } => (*total, Constraint::Energy(k.clone())),
            ResourceModel::TdpBudget { total, k } => (*total, Constraint::Tdp(k.clone())),
            _ => unreachable!("Lagrangian built for a single-constraint model"),
        };
        let mut lower = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in scenario.active_indices() {
            let f = &segs[i].efficiency;
            let (dlo, dhi) = f.domain();
            let (lo, hi) = match constraint {
                Constraint::Static => {
                    let pooled = scenario.pooling().is_some_and(|p| p.parallel == i);
                    (if pooled { 0.0 } else { budget * 1e-15 }, budget)
                }
                _ => (POWER_FLOOR, POWER_CEILING),
            };
            lower[i] = lo.max(dlo).max(f.convex_from());
            upper[i] = hi.min(dhi);
        }
        Self {
            active: scenario.active_indices(),
            scenario,
            lower,
            upper,
            budget,
            constraint,
        }
    }

    /// `(standing, time, dynamic)`: `sum k_j p_j`, `sum t_j f_j`, `sum t_j f_j p_j`.
    fn aggregates(&self, x: &[f64], k: &[f64]) -> (f64, f64, f64) {
        let segs = self.scenario.segments();
        let mut standing = 0.0;
        let mut time = 0.0;
        let mut dynamic = 0.0;
        for &i in &self.active {
            let tf = segs[i].weight * segs[i].efficiency.eval_unchecked(x[i]);
            standing += k[i] * x[i];
            time += tf;
            dynamic += tf * x[i];
        }
        (standing, time, dynamic)
    }

    fn lhs(&self, x: &[f64]) -> f64 {
        match &self.constraint {
            Constraint::Static => self.active.iter().map(|&i| x[i]).sum(),
            Constraint::Energy(k) => {
                let (s, t, d) = self.aggregates(x, k);
                s * t + d
            }
            Constraint::Tdp(k) => {
                let (s, t, d) = self.aggregates(x, k);
                s + d / t
            }
        }
    }

    fn objective_partial(&self, x: &[f64], i: usize) -> f64 {
        let segs = self.scenario.segments();
        match self.scenario.pooling() {
            Some(p) if p.parallel == i || p.helper == i => {
                let (fp, fh) = (&segs[p.parallel].efficiency, &segs[p.helper].efficiency);
                let total = perf(fp, x[p.parallel]) + perf(fh, x[p.helper]);
                let pooled = -segs[p.parallel].weight * perf_deriv(&segs[i].efficiency, x[i]) / (total * total);
                if i == p.helper {
                    pooled + segs[i].weight * segs[i].efficiency.deriv_unchecked(x[i])
                } else {
                    pooled
                }
            }
            _ => segs[i].weight * segs[i].efficiency.deriv_unchecked(x[i]),
        }
    }

    fn constraint_partial(&self, x: &[f64], i: usize) -> f64 {
        let seg = &self.scenario.segments()[i];
        let (k, energy) = match &self.constraint {
            Constraint::Static => return 1.0,
            Constraint::Energy(k) => (k, true),
            Constraint::Tdp(k) => (k, false),
        };
        let (standing, time, dynamic) = self.aggregates(x, k);
        let f = seg.efficiency.eval_unchecked(x[i]);
        let df = seg.efficiency.deriv_unchecked(x[i]);
        let d_time = seg.weight * df;
        let d_dynamic = seg.weight * (f + x[i] * df);
        if energy {
            k[i] * time + standing * d_time + d_dynamic
        } else {
            k[i] + (d_dynamic * time - dynamic * d_time) / (time * time)
        }
    }

    fn partial(&self, x: &[f64], i: usize, mu: f64) -> f64 {
        self.objective_partial(x, i) + mu * self.constraint_partial(x, i)
    }

    /// Exact minimization along coordinate `i`, assuming the Lagrangian is
    /// unimodal along it.
    fn coordinate_min(&self, x: &mut [f64], i: usize, mu: f64, iters: usize) -> f64 {
        let (lo, hi) = (self.lower[i], self.upper[i]);
        let d = |s: f64, x: &mut [f64]| {
            x[i] = s;
            self.partial(x, i, mu)
        };
        if d(lo, x) >= 0.0 {
            x[i] = lo;
            return lo;
        }
        if d(hi, x) <= 0.0 {
            x[i] = hi;
            return hi;
        }
        let start = if lo > 0.0 { lo } else { hi * 1e-30 };
        if d(start, x) >= 0.0 {
            x[i] = start;
            return start;
        }
        let mut probe = x.to_vec();
        let (a, b) = bisect_log(start, hi, iters, |s| d(s, &mut probe) < 0.0);
        let s = 0.5 * (a + b);
        x[i] = s;
        s
    }

    /// Minimizes the Lagrangian for fixed `mu`, warm-started from `x`.
    /// Returns the number of sweeps.
    fn inner(&self, x: &mut [f64], mu: f64, cfg: &SolverConfig) -> usize {
        let max_sweeps = cfg.max_iters * 10;
        for sweep in 1..=max_sweeps {
            let mut change = 0.0f64;
            for &i in &self.active {
                let old = x[i];
                let new = self.coordinate_min(x, i, mu, cfg.max_iters);
                change = change.max((new - old).abs() / old.abs().max(new.abs()).max(f64::MIN_POSITIVE));
            }
            if change <= 1e-14 {
                return sweep;
            }
        }
        max_sweeps
    }

    fn initial(&self) -> Vec<f64> {
        let n = self.scenario.len();
        let mut x = vec![0.0; n];
        let share = match self.constraint {
            Constraint::Static => self.budget / self.active.len() as f64,
            _ => 1.0,
        };
        for &i in &self.active {
            x[i] = share.clamp(self.lower[i].max(f64::MIN_POSITIVE), self.upper[i]);
        }
        x
    }

    fn at_ceiling(&self, x: &[f64]) -> Option<usize> {
        let power = !matches!(self.constraint, Constraint::Static);
        self.active
            .iter()
            .copied()
            .find(|&i| power && x[i] >= self.upper[i] && self.upper[i] >= POWER_CEILING)
    }

    /// Least-squares multiplier from `dT/dx_i + mu dg/dx_i = 0` on the
    /// coordinates away from their bounds.
    fn fit_multiplier(&self, x: &[f64]) -> Option<f64> {
        let stat = matches!(self.constraint, Constraint::Static);
        let (mut num, mut den) = (0.0, 0.0);
        for &i in &self.active {
            let free = x[i] > self.lower[i] && (stat || x[i] < self.upper[i]);
            if free {
                let c = self.constraint_partial(x, i);
                num -= self.objective_partial(x, i) * c;
                den += c * c;
            }
        }
        (den > 0.0 && num > 0.0).then(|| num / den)
    }

    fn solve(&self, cfg: &SolverConfig) -> Result<Allocation, SolveError> {
        let segs = self.scenario.segments();
        let mut x = self.initial();
        let grad_t = self
            .active
            .iter()
            .fold(0.0f64, |m, &i| m.max(self.objective_partial(&x, i).abs()));
        let grad_g = self
            .active
            .iter()
            .fold(0.0f64, |m, &i| m.max(self.constraint_partial(&x, i).abs()));
        let scale = if grad_g > 0.0 && grad_t > 0.0 {
            grad_t / grad_g
        } else {
            1.0
        };

        let mut lo = scale * 1e-6;
        let mut hi = scale * 1e6;
        let mut x_lo = x.clone();
        self.inner(&mut x_lo, lo, cfg);
        let mut expand = 0;
        while self.lhs(&x_lo) <= self.budget {
            if expand >= cfg.outer_iters / 4 || lo < f64::MIN_POSITIVE * 1e10 {
                if let Some(i) = self.at_ceiling(&x_lo) {
                    return Err(SolveError::Degenerate(format!(
                        "the {} constraint does not bound the allocation of `{}`",
                        self.scenario.resource().kind(),
                        segs[i].name
                    )));
                }
                return Err(SolveError::NonConvergence {
                    reason: "constraint never binds".into(),
                    residual: relative_gap(self.lhs(&x_lo), self.budget),
                    best: None,
                    trace: Vec::new(),
                });
            }
            lo *= 1e-3;
            expand += 1;
            self.inner(&mut x_lo, lo, cfg);
        }
        let mut x_hi = x_lo.clone();
        self.inner(&mut x_hi, hi, cfg);
        expand = 0;
        while self.lhs(&x_hi) > self.budget {
            if expand >= cfg.outer_iters / 4 || hi > f64::MAX / 1e10 {
                return Err(SolveError::Infeasible(format!(
                    "smallest reachable {} usage {} exceeds budget {}",
                    self.scenario.resource().kind(),
                    self.lhs(&x_hi),
                    self.budget
                )));
            }
            hi *= 1e3;
            expand += 1;
            self.inner(&mut x_hi, hi, cfg);
        }

        let target = 0.01 * cfg.budget_tol;
        let mut trace = Vec::new();
        let mut best = (f64::INFINITY, lo, x_lo.clone());
        x.clone_from(&x_lo);
        let mut sweeps = 0;
        bisect_log(lo, hi, cfg.outer_iters, |mu| {
            sweeps += self.inner(&mut x, mu, cfg);
            let gap = (self.lhs(&x) - self.budget) / self.budget;
            if trace.len() < cfg.max_iters {
                trace.push(gap.abs());
            }
            if gap.abs() < best.0 {
                best = (gap.abs(), mu, x.clone());
            }
            gap > 0.0 && gap.abs() > target
        });
        let (gap, mu, x) = best;
        if let Some(i) = self.at_ceiling(&x) {
            return Err(SolveError::Degenerate(format!(
                "the {} constraint does not bound the allocation of `{}`",
                self.scenario.resource().kind(),
                segs[i].name
            )));
        }

        let mut alloc = Allocation::evaluate(self.scenario, x, None)?;
        alloc.multipliers = vec![mu];
        alloc.kkt_residual = kkt_residual(self.scenario, &alloc);
        // while a coordinate is clipped the constraint value is flat in mu,
        // so refit the multiplier on the coordinates that are free to move
        if let Some(fit) = self.fit_multiplier(&alloc.x) {
            let mut trial = alloc.clone();
            trial.multipliers = vec![fit];
            let r = kkt_residual(self.scenario, &trial);
            if r < alloc.kkt_residual {
                alloc = trial;
            }
        }
        alloc.iterations = sweeps;
        alloc.local_only = self.active.iter().any(|&i| {
            let f = &segs[i].efficiency;
            !f.is_convex() || (f.convex_from() > 0.0 && alloc.x[i] <= f.convex_from())
        });
        alloc.kkt_residual = kkt_residual(self.scenario, &alloc);
        if gap > cfg.budget_tol || alloc.kkt_residual > cfg.kkt_tol {
            let residual = gap.max(alloc.kkt_residual);
            return Err(SolveError::NonConvergence {
                reason: "multiplier search did not meet tolerance".into(),
                residual,
                best: Some(Box::new(alloc)),
                trace,
            });
        }
        Ok(alloc)
    }
}

/// Water-filling on `sum_j k_j p_j <= reserve` with `p_j <= cap`, for the
/// segments with positive `k`. Writes the powers and returns the multiplier.
fn leaky_fill(
    scenario: &Scenario,
    leaky: &[usize],
    k: &[f64],
    cap: f64,
    reserve: f64,
    p: &mut [f64],
    iters: usize,
) -> f64 {
    let segs = scenario.segments();
    let full: f64 = leaky.iter().map(|&j| k[j] * cap).sum();
    if full <= reserve {
        for &j in leaky {
            p[j] = cap;
        }
        return 0.0;
    }
    let fill = |mu: f64, p: &mut [f64]| -> f64 {
        let mut used = 0.0;
        for &j in leaky {
            p[j] = segs[j].efficiency.marginal_inverse(segs[j].weight, mu * k[j]).min(cap);
            used += k[j] * p[j];
        }
        used
    };
    // at these multipliers every unit sits exactly on the cap
    let at_cap: Vec<f64> = leaky
        .iter()
        .map(|&j| -segs[j].weight * segs[j].efficiency.deriv_unchecked(cap) / k[j])
        .collect();
    let lo = at_cap.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = at_cap.iter().cloned().fold(0.0, f64::max).max(lo);
    let mut guard = 0;
    while fill(hi, p) > reserve && guard < 2000 {
        hi *= 2.0;
        guard += 1;
    }
    let (a, b) = bisect_log(lo, hi, iters, |mu| fill(mu, p) > reserve);
    let mu = if (fill(a, p) - reserve).abs() <= (fill(b, p) - reserve).abs() {
        a
    } else {
        b
    };
    fill(mu, p);
    mu
}

fn instantaneous(scenario: &Scenario, total: f64, k: &[f64], cfg: &SolverConfig) -> Result<Allocation, SolveError> {
    let segs = scenario.segments();
    let active = scenario.active_indices();
    for &i in &active {
        let (lo, _) = segs[i].efficiency.domain();
        if lo >= total {
            return Err(SolveError::Infeasible(format!(
                "`{}` needs at least {lo} power but the budget is {total}",
                segs[i].name
            )));
        }
    }
    let leaky: Vec<usize> = active.iter().copied().filter(|&i| k[i] > 0.0).collect();
    let plain: Vec<usize> = active.iter().copied().filter(|&i| k[i] == 0.0).collect();

    let mut p = vec![0.0; segs.len()];
    let evaluate = |cap: f64, p: &mut [f64]| -> (f64, f64) {
        for &j in &plain {
            p[j] = cap;
        }
        let mu = leaky_fill(scenario, &leaky, k, cap, total - cap, p, cfg.max_iters);
        let slope: f64 = active
            .iter()
            .filter(|&&j| p[j] == cap)
            .map(|&j| segs[j].weight * segs[j].efficiency.deriv_unchecked(cap) + mu * k[j])
            .sum::<f64>()
            + mu;
        (mu, slope)
    };

    let cap = if leaky.is_empty() {
        // no standing power: every unit can run at the full budget
        total
    } else {
        let (a, b) = bisect_linear(0.0, total, cfg.max_iters.max(1000), |cap| {
            evaluate(cap, &mut p.clone()).1 < 0.0
        });
        0.5 * (a + b)
    };
    let (mu, _) = evaluate(cap, &mut p);

    // per-constraint multipliers: only units running at the cap are binding
    let binding: Vec<usize> = active.iter().copied().filter(|&j| p[j] == cap).collect();
    let pull: f64 = binding
        .iter()
        .map(|&j| -segs[j].weight * segs[j].efficiency.deriv_unchecked(cap))
        .sum();
    let leak: f64 = binding.iter().map(|&j| k[j]).sum();
    let standing_mult = if leaky.is_empty() { pull } else { pull / (1.0 + leak) };
    let _ = mu;
    let mut nu = vec![0.0; segs.len()];
    for &j in &binding {
        nu[j] = -segs[j].weight * segs[j].efficiency.deriv_unchecked(cap) - k[j] * standing_mult;
    }

    let standing: f64 = k.iter().zip(&p).map(|(k, p)| k * p).sum();
    let worst = p.iter().map(|pi| pi + standing).fold(0.0, f64::max);
    let mut alloc = Allocation::evaluate(scenario, p, None)?;
    alloc.multipliers = nu;
    alloc.local_only = active.iter().any(|&i| !segs[i].efficiency.is_convex());
    alloc.kkt_residual = kkt_residual(scenario, &alloc);
    let gap = relative_gap(worst, total);
    if gap > cfg.budget_tol || (!alloc.local_only && alloc.kkt_residual > cfg.kkt_tol) {
        return Err(SolveError::NonConvergence {
            reason: "power cap search did not meet tolerance".into(),
            residual: gap.max(alloc.kkt_residual),
            best: Some(Box::new(alloc)),
            trace: Vec::new(),
        });
    }
    Ok(alloc)
}
