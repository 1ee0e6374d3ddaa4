//! Brute-force verification of solver outputs on small instances.
//!
//! [`grid_search`] enumerates a tensor grid over the free variables of a
//! scenario. A static budget is substituted out (the last active segment
//! receives the remainder), area/voltage scenarios search the free areas plus
//! one voltage per segment, and every other model searches the full box and
//! discards points that violate a constraint. Feasibility and objective come
//! from the same model code the solvers use.

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{constraint_values, Allocation, ModelError, ResourceModel, Scenario};

pub const MAX_DIMENSIONS: usize = 4;

/// Relative slack on budgets when filtering grid points, to absorb rounding
/// in sums that equal the budget by construction.
const FEASIBILITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// `resolution` counts intervals, so each dimension has `resolution + 1`
/// points including both bounds, and doubling the resolution nests the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub resolution: usize,
    pub bounds: Vec<(f64, f64)>,
    pub spacing: Spacing,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("{dims} free dimensions exceed the grid limit of {max}")]
    TooManyDimensions { dims: usize, max: usize },
    #[error("no grid point satisfies the constraints")]
    EmptyFeasibleSet,
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl GridSpec {
    pub fn new(resolution: usize, bounds: Vec<(f64, f64)>, spacing: Spacing) -> Result<Self, OracleError> {
        let g = Self {
            resolution,
            bounds,
            spacing,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if self.resolution < 10 {
            return Err(OracleError::InvalidGrid(format!(
                "resolution must be at least 10, got {}",
                self.resolution
            )));
        }
        if self.bounds.is_empty() {
            return Err(OracleError::InvalidGrid("no dimensions".into()));
        }
        if self.bounds.len() > MAX_DIMENSIONS {
            return Err(OracleError::TooManyDimensions {
                dims: self.bounds.len(),
                max: MAX_DIMENSIONS,
            });
        }
        for &(lo, hi) in &self.bounds {
            if !(lo > 0.0 && lo < hi && hi.is_finite()) {
                return Err(OracleError::InvalidGrid(format!("bad bounds ({lo}, {hi})")));
            }
        }
        let points = (self.resolution as f64 + 1.0).powi(self.bounds.len() as i32);
        if points > 1e10 {
            return Err(OracleError::InvalidGrid(format!("{points:e} points is too many")));
        }
        Ok(())
    }

    /// Default box for a scenario: linear over the budget for areas, log
    /// over `[1e-6, 1e6]` for powers and voltages (instantaneous power is
    /// capped by its budget).
    pub fn for_scenario(scenario: &Scenario, resolution: usize) -> Result<Self, OracleError> {
        let m = scenario.active_indices().len();
        let area = |total: f64| (total * 1e-6, total * (1.0 - 1e-6));
        let (bounds, spacing) = match scenario.resource() {
            ResourceModel::StaticBudget { total } => (vec![area(*total); m.saturating_sub(1)], Spacing::Linear),
            ResourceModel::InstantaneousPower { total, .. } => (vec![(total * 1e-6, *total); m], Spacing::Log),
            ResourceModel::EnergyBudget { .. } | ResourceModel::TdpBudget { .. } => {
                (vec![(1e-6, 1e6); m], Spacing::Log)
            }
            ResourceModel::AreaEnergy { area_total, .. } => {
                // areas share the voltage grid's log spacing
                let mut b = vec![area(*area_total); m - 1];
                b.extend(std::iter::repeat_n((1e-6, 1e6), m));
                (b, Spacing::Log)
            }
        };
        if bounds.is_empty() {
            return Err(OracleError::InvalidGrid(
                "a single active segment has nothing to search".into(),
            ));
        }
        Self::new(resolution, bounds, spacing)
    }

    pub fn point(&self, dim: usize, k: usize) -> f64 {
        let (lo, hi) = self.bounds[dim];
        let t = k as f64 / self.resolution as f64;
        match self.spacing {
            Spacing::Linear => lo + (hi - lo) * t,
            Spacing::Log => (lo.ln() + (hi.ln() - lo.ln()) * t).exp(),
        }
    }

    /// Bounds `radius` grid steps either side of `center`, clipped to this
    /// grid's box.
    fn around(&self, center: &[f64], radius: f64) -> Vec<(f64, f64)> {
        self.bounds
            .iter()
            .zip(center)
            .map(|(&(lo, hi), &c)| match self.spacing {
                Spacing::Linear => {
                    let h = (hi - lo) / self.resolution as f64 * radius;
                    ((c - h).max(lo), (c + h).min(hi))
                }
                Spacing::Log => {
                    let r = ((hi / lo).ln() / self.resolution as f64 * radius).exp();
                    ((c / r).max(lo), (c * r).min(hi))
                }
            })
            .collect()
    }
}

/// Number of grid dimensions [`grid_search`] needs for this scenario.
pub fn free_dimensions(scenario: &Scenario) -> usize {
    let m = scenario.active_indices().len();
    match scenario.resource() {
        ResourceModel::StaticBudget { .. } => m.saturating_sub(1),
        ResourceModel::AreaEnergy { .. } => 2 * m - 1,
        _ => m,
    }
}

struct Layout<'a> {
    scenario: &'a Scenario,
    active: Vec<usize>,
    budgets: Vec<f64>,
}

impl<'a> Layout<'a> {
    fn new(scenario: &'a Scenario) -> Self {
        Self {
            active: scenario.active_indices(),
            budgets: scenario.resource().budgets(),
            scenario,
        }
    }

    /// Maps grid coordinates to `(x, voltage)`, or `None` if the substituted
    /// coordinate leaves the domain.
    fn decode(&self, coords: &[f64]) -> Option<(Vec<f64>, Option<Vec<f64>>)> {
        let n = self.scenario.len();
        let m = self.active.len();
        let mut x = vec![0.0; n];
        match self.scenario.resource() {
            ResourceModel::StaticBudget { total } | ResourceModel::AreaEnergy { area_total: total, .. } => {
                let mut used = 0.0;
                for (k, &i) in self.active[..m - 1].iter().enumerate() {
                    x[i] = coords[k];
                    used += coords[k];
                }
                let last = self.active[m - 1];
                x[last] = total - used;
                let zero_ok = self.scenario.pooling().is_some_and(|p| p.parallel == last);
                if x[last] < 0.0 || (x[last] == 0.0 && !zero_ok) {
                    return None;
                }
                if matches!(self.scenario.resource(), ResourceModel::AreaEnergy { .. }) {
                    let mut v = vec![0.0; n];
                    for (k, &i) in self.active.iter().enumerate() {
                        v[i] = coords[m - 1 + k];
                    }
                    return Some((x, Some(v)));
                }
            }
            _ => {
                for (k, &i) in self.active.iter().enumerate() {
                    x[i] = coords[k];
                }
            }
        }
        Some((x, None))
    }

    fn feasible(&self, x: &[f64], v: Option<&[f64]>, limit: &[f64]) -> bool {
        match constraint_values(self.scenario, x, v) {
            Ok(lhs) => lhs
                .iter()
                .enumerate()
                .all(|(j, l)| l.is_finite() && *l <= limit[j.min(limit.len() - 1)] * (1.0 + FEASIBILITY_SLACK)),
            Err(_) => false,
        }
    }

    fn objective(&self, x: &[f64], v: Option<&[f64]>) -> Option<f64> {
        let c: f64 = self.scenario.contributions(x, v).ok()?.iter().sum();
        c.is_finite().then_some(c)
    }

    /// Objective of a grid point if it is feasible.
    fn score(&self, coords: &[f64]) -> Option<f64> {
        let (x, v) = self.decode(coords)?;
        let constrained = !matches!(self.scenario.resource(), ResourceModel::StaticBudget { .. });
        if constrained && !self.feasible(&x, v.as_deref(), &self.budgets) {
            return None;
        }
        self.objective(&x, v.as_deref())
    }
}

/// Best grid point: objective, grid index, coordinates.
type Best = (f64, Vec<usize>, Vec<f64>);

fn better(a: Best, b: Best) -> Best {
    // total order on (objective, index) so the reduction is deterministic
    match a.0.partial_cmp(&b.0) {
        Some(std::cmp::Ordering::Less) => a,
        Some(std::cmp::Ordering::Greater) => b,
        _ if a.1 <= b.1 => a,
        _ => b,
    }
}

fn search(layout: &Layout, grid: &GridSpec) -> Option<Best> {
    let d = grid.bounds.len();
    let r = grid.resolution;
    let axes: Vec<Vec<f64>> = (0..d).map(|k| (0..=r).map(|i| grid.point(k, i)).collect()).collect();
    (0..=r)
        .into_par_iter()
        .filter_map(|i0| {
            let mut idx = vec![0usize; d];
            idx[0] = i0;
            let mut coords: Vec<f64> = (0..d).map(|k| axes[k][idx[k]]).collect();
            let mut best: Option<Best> = None;
            loop {
                if let Some(obj) = layout.score(&coords) {
                    if best.as_ref().is_none_or(|b| obj < b.0) {
                        best = Some((obj, idx.clone(), coords.clone()));
                    }
                }
                // odometer over dimensions 1..d, last dimension fastest
                let mut k = d;
                loop {
                    if k == 1 {
                        return best;
                    }
                    k -= 1;
                    if idx[k] < r {
                        idx[k] += 1;
                        coords[k] = axes[k][idx[k]];
                        break;
                    }
                    idx[k] = 0;
                    coords[k] = axes[k][0];
                }
            }
        })
        .reduce_with(better)
}

fn to_allocation(layout: &Layout, best: &Best) -> Result<Allocation, OracleError> {
    let (x, v) = layout.decode(&best.2).expect("best point decodes");
    Ok(Allocation::evaluate(layout.scenario, x, v)?)
}

fn check_dims(scenario: &Scenario, grid: &GridSpec) -> Result<(), OracleError> {
    grid.validate()?;
    let dims = free_dimensions(scenario);
    if dims > MAX_DIMENSIONS {
        return Err(OracleError::TooManyDimensions {
            dims,
            max: MAX_DIMENSIONS,
        });
    }
    if dims != grid.bounds.len() {
        return Err(OracleError::InvalidGrid(format!(
            "scenario has {dims} free dimensions but the grid has {}",
            grid.bounds.len()
        )));
    }
    Ok(())
}

/// Exhaustive search of `grid`; returns the best feasible point. Ties go to
/// the lexicographically smallest grid index.
pub fn grid_search(scenario: &Scenario, grid: &GridSpec) -> Result<Allocation, OracleError> {
    check_dims(scenario, grid)?;
    let layout = Layout::new(scenario);
    let best = search(&layout, grid).ok_or(OracleError::EmptyFeasibleSet)?;
    to_allocation(&layout, &best)
}

/// [`grid_search`] followed by `rounds` zoomed searches, each over two grid
/// steps either side of the incumbent at the same resolution. Never returns a
/// worse point than the first pass.
pub fn grid_search_refined(scenario: &Scenario, grid: &GridSpec, rounds: usize) -> Result<Allocation, OracleError> {
    check_dims(scenario, grid)?;
    let layout = Layout::new(scenario);
    let mut best = search(&layout, grid).ok_or(OracleError::EmptyFeasibleSet)?;
    let mut current = grid.clone();
    for _ in 0..rounds {
        let bounds = current.around(&best.2, 2.0);
        if bounds.iter().any(|&(lo, hi)| !(lo < hi)) {
            break;
        }
        current = GridSpec {
            bounds,
            ..current.clone()
        };
        if let Some(b) = search(&layout, &current) {
            if b.0 < best.0 {
                best = b;
            }
        }
    }
    to_allocation(&layout, &best)
}

/// `true` iff no feasible move of size `step` lowers the objective by more
/// than `1e-12`. Moves are pairwise transfers between active segments; for
/// non-static models also single-coordinate changes; for area/voltage
/// scenarios also single and pairwise voltage tweaks. A move is feasible if
/// it does not push any constraint above both its budget and its value at
/// `allocation`.
pub fn perturbation_check(scenario: &Scenario, allocation: &Allocation, step: f64) -> bool {
    if !(step > 0.0 && step.is_finite()) {
        return true;
    }
    let layout = Layout::new(scenario);
    let x0 = &allocation.x;
    let v0 = allocation.voltage.as_deref();
    let Some(base) = layout.objective(x0, v0) else {
        return true;
    };
    let Ok(lhs0) = constraint_values(scenario, x0, v0) else {
        return true;
    };
    let limit: Vec<f64> = lhs0
        .iter()
        .enumerate()
        .map(|(j, l)| l.max(layout.budgets[j.min(layout.budgets.len() - 1)]))
        .collect();
    let pooled_parallel = scenario.pooling().map(|p| p.parallel);
    let admissible = |x: &[f64]| {
        layout
            .active
            .iter()
            .all(|&i| x[i] > 0.0 || (x[i] == 0.0 && pooled_parallel == Some(i)))
    };
    let improves = |x: &[f64], v: Option<&[f64]>| {
        admissible(x)
            && v.is_none_or(|v| layout.active.iter().all(|&i| v[i] > 0.0))
            && layout.feasible(x, v, &limit)
            && layout.objective(x, v).is_some_and(|c| c < base - 1e-12)
    };

    let a = &layout.active;
    let single = !matches!(scenario.resource(), ResourceModel::StaticBudget { .. });
    let mut moves: Vec<Vec<(usize, f64)>> = Vec::new();
    for (p, &i) in a.iter().enumerate() {
        for &j in &a[p + 1..] {
            moves.push(vec![(i, step), (j, -step)]);
            moves.push(vec![(i, -step), (j, step)]);
        }
        if single {
            moves.push(vec![(i, step)]);
            moves.push(vec![(i, -step)]);
        }
    }
    for m in &moves {
        let mut x = x0.clone();
        for &(i, d) in m {
            x[i] += d;
        }
        if improves(&x, v0) {
            return false;
        }
    }
    if let Some(v0) = v0 {
        for m in &moves {
            let mut v = v0.to_vec();
            for &(i, d) in m {
                v[i] += d;
            }
            if improves(x0, Some(&v)) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EfficiencyFunction, Objective, Segment};

    fn pl(alpha: f64, beta: f64) -> EfficiencyFunction {
        EfficiencyFunction::power_law(alpha, beta).unwrap()
    }

    fn stat(w: &[f64], fs: Vec<EfficiencyFunction>, total: f64) -> Scenario {
        let segs = w
            .iter()
            .zip(fs)
            .enumerate()
            .map(|(i, (&w, f))| Segment::new(format!("s{i}"), w, f))
            .collect();
        Scenario::new(segs, ResourceModel::StaticBudget { total }, Objective::TotalTime).unwrap()
    }

    #[test]
    fn symmetric_static_lands_on_centre() {
        let s = stat(&[0.5, 0.5], vec![pl(1.0, 0.5), pl(1.0, 0.5)], 2.0);
        let g = GridSpec::for_scenario(&s, 1000).unwrap();
        let a = grid_search(&s, &g).unwrap();
        assert!((a.x[0] - 1.0).abs() <= 2.0 / 1000.0);
        assert!((a.x[0] + a.x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_resolution_never_worsens() {
        let s = stat(&[0.2, 0.3, 0.5], vec![pl(1.0, 0.5), pl(7.0, 0.9), pl(40.0, 1.2)], 10.0);
        let mut prev = f64::INFINITY;
        for r in [10, 20, 40, 80, 160] {
            let a = grid_search(&s, &GridSpec::for_scenario(&s, r).unwrap()).unwrap();
            assert!(a.objective_value <= prev);
            prev = a.objective_value;
        }
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(9, vec![(1.0, 2.0)], Spacing::Linear).is_err());
        assert!(GridSpec::new(10, vec![(0.0, 2.0)], Spacing::Linear).is_err());
        assert!(GridSpec::new(10, vec![(2.0, 2.0)], Spacing::Log).is_err());
        assert!(matches!(
            GridSpec::new(10, vec![(1.0, 2.0); 5], Spacing::Linear),
            Err(OracleError::TooManyDimensions { .. })
        ));
        let s = stat(&[0.5, 0.5], vec![pl(1.0, 0.5), pl(1.0, 0.5)], 2.0);
        let g = GridSpec::new(10, vec![(0.1, 1.0); 2], Spacing::Linear).unwrap();
        assert!(matches!(grid_search(&s, &g), Err(OracleError::InvalidGrid(_))));
    }

    #[test]
    fn energy_below_floor_has_no_feasible_point() {
        let s = Scenario::new(
            vec![
                Segment::new("a", 0.6, pl(1.0, 1.0)),
                Segment::new("b", 0.4, pl(10.0, 1.0)),
            ],
            ResourceModel::EnergyBudget {
                total: 0.5,
                k: vec![0.0, 0.0],
            },
            Objective::TotalTime,
        )
        .unwrap();
        let g = GridSpec::for_scenario(&s, 20).unwrap();
        assert_eq!(grid_search(&s, &g), Err(OracleError::EmptyFeasibleSet));
    }

    #[test]
    fn ties_resolve_to_smallest_index() {
        let a = (1.0, vec![0, 3], vec![0.1, 0.4]);
        let b = (1.0, vec![0, 2], vec![0.1, 0.3]);
        assert_eq!(better(a.clone(), b.clone()).1, vec![0, 2]);
        assert_eq!(better(b, a).1, vec![0, 2]);
        let s = stat(&[0.3, 0.7], vec![pl(1.0, 0.5), pl(2.0, 0.5)], 4.0);
        let g = GridSpec::for_scenario(&s, 100).unwrap();
        assert_eq!(grid_search(&s, &g).unwrap(), grid_search(&s, &g).unwrap());
    }

    #[test]
    fn equal_split_fails_perturbation_on_skewed_weights() {
        let s = stat(&[0.9, 0.1], vec![pl(1.0, 1.0), pl(1.0, 1.0)], 2.0);
        let a = Allocation::evaluate(&s, vec![1.0, 1.0], None).unwrap();
        assert!(!perturbation_check(&s, &a, 1e-2));
        let one = stat(&[1.0], vec![pl(1.0, 1.0)], 2.0);
        let a = Allocation::evaluate(&one, vec![2.0], None).unwrap();
        assert!(perturbation_check(&one, &a, 1e-2));
    }

    #[test]
    fn refined_search_is_no_worse() {
        let s = stat(&[0.2, 0.3, 0.5], vec![pl(1.0, 0.5), pl(7.0, 0.9), pl(40.0, 1.2)], 10.0);
        let g = GridSpec::for_scenario(&s, 40).unwrap();
        let a = grid_search(&s, &g).unwrap();
        let b = grid_search_refined(&s, &g, 4).unwrap();
        assert!(b.objective_value <= a.objective_value);
    }
}
