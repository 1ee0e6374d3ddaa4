//! Tables behind the `reproduce` command.

use rayon::prelude::*;

use crate::model::{EfficiencyFunction, Objective, ResourceModel, Scenario, Segment};
use crate::report::Table;
use crate::scenarios::{
    het_speedup, linspace, logspace, optimal_serial_area, sensitivity_speedup, HetParams, HillMartyMode,
};
use crate::solver::{closed_form_powerlaw, SolverConfig};

use super::CliError;

pub const FIG2B_AREAS: [f64; 2] = [16.0, 256.0];
pub const FIG4_DESIGNS: [f64; 4] = [0.3, 0.5, 0.7, 0.9];
pub const FIG4_RATIO: f64 = 1.0 / 50.0;
pub const EQ5_AREAS: [f64; 4] = [4.0, 16.0, 64.0, 256.0];

/// `(name, alpha, beta, t)` for the power-law example: a Pollack-law CPU and
/// three accelerators of increasing efficiency.
pub const EQ5_SEGMENTS: [(&str, f64, f64, f64); 4] = [
    ("cpu", 1.0, 0.5, 0.4),
    ("acc1", 5.0, 0.8, 0.3),
    ("acc2", 10.0, 0.9, 0.2),
    ("acc3", 100.0, 1.0, 0.1),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Artifact {
    Fig2b,
    Fig3,
    Fig4,
    Eq5Table,
}

impl Artifact {
    pub const ALL: [Artifact; 4] = [Self::Fig2b, Self::Fig3, Self::Fig4, Self::Eq5Table];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fig2b => "fig2b",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Eq5Table => "eq5_table",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }
}

fn mode_name(m: HillMartyMode) -> &'static str {
    match m {
        HillMartyMode::Dedicated => "dedicated",
        HillMartyMode::Pooled => "pooled",
    }
}

pub fn fig2b_columns() -> Vec<String> {
    let mut c = Vec::new();
    for a in FIG2B_AREAS {
        for m in [HillMartyMode::Dedicated, HillMartyMode::Pooled] {
            c.push(format!("a_serial_{}_A{a}", mode_name(m)));
        }
    }
    c
}

/// Optimal serial-core area against `t_parallel` in 0.01 steps, for both
/// execution modes at each chip area.
pub fn fig2b() -> Result<Table, CliError> {
    let cfg = SolverConfig::default();
    let tps: Vec<f64> = (1..=99).map(|k| k as f64 / 100.0).collect();
    let rows: Vec<Vec<f64>> = tps
        .par_iter()
        .map(|&tp| {
            let mut row = vec![tp];
            for a in FIG2B_AREAS {
                for m in [HillMartyMode::Dedicated, HillMartyMode::Pooled] {
                    row.push(optimal_serial_area(tp, a, m, &cfg)?);
                }
            }
            Ok(row)
        })
        .collect::<Result<_, CliError>>()?;
    let mut cols = vec![("t_parallel".to_string(), String::new())];
    cols.extend(fig2b_columns().into_iter().map(|c| (c, "BGP area".to_string())));
    let mut t = Table::new(cols);
    for r in rows {
        t.push_row(r)?;
    }
    Ok(t)
}

/// Heterogeneous speedup over `n/alpha` (50 log-spaced values in
/// `[1/200, 1]`) and `delta` (99 values in `[0, 0.99]`), with `n = 1`.
pub fn fig3() -> Result<Table, CliError> {
    let mut t = Table::new([("n_over_alpha", ""), ("delta", ""), ("speedup", "")]);
    for r in logspace(1.0 / 200.0, 1.0, 50) {
        for delta in linspace(0.0, 0.99, 99) {
            let s = het_speedup(&HetParams::new(1, 1.0 / r, delta, 1.0))?;
            t.push_row(vec![r, delta, s])?;
        }
    }
    Ok(t)
}

pub fn fig4_columns() -> Vec<String> {
    FIG4_DESIGNS.iter().map(|d| format!("speedup_d{d}")).collect()
}

/// Speedup of chips designed for `d` against the actual `delta`, at
/// `n/alpha = 1/50`, plus the matched-design optimum.
pub fn fig4() -> Result<Table, CliError> {
    let mut cols = vec![("delta".to_string(), String::new())];
    cols.extend(fig4_columns().into_iter().map(|c| (c, String::new())));
    cols.push(("speedup_optimal".to_string(), String::new()));
    let mut t = Table::new(cols);
    for delta in linspace(0.0, 0.99, 100) {
        let p = HetParams::new(1, 1.0 / FIG4_RATIO, delta, 1.0);
        let mut row = vec![delta];
        for d in FIG4_DESIGNS {
            row.push(sensitivity_speedup(&p.with_design(d))?);
        }
        row.push(het_speedup(&p)?);
        t.push_row(row)?;
    }
    Ok(t)
}

pub fn eq5_scenario(area: f64) -> Result<Scenario, CliError> {
    let segs = EQ5_SEGMENTS
        .iter()
        .map(|&(name, alpha, beta, t)| Ok(Segment::new(name, t, EfficiencyFunction::power_law(alpha, beta)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Scenario::new(
        segs,
        ResourceModel::StaticBudget { total: area },
        Objective::TotalTime,
    )?)
}

/// Power-law allocations for the example segments at several chip areas,
/// with the resulting time and the speedup over a single Pollack-law core
/// of the whole area.
pub fn eq5_table() -> Result<Table, CliError> {
    let mut cols = vec![("area".to_string(), "BGP area".to_string())];
    cols.extend(
        EQ5_SEGMENTS
            .iter()
            .map(|s| (format!("a_{}", s.0), "BGP area".to_string())),
    );
    cols.push(("time".to_string(), "BGP time".to_string()));
    cols.push(("speedup".to_string(), String::new()));
    let mut t = Table::new(cols);
    let cfg = SolverConfig::default();
    for area in EQ5_AREAS {
        let a = closed_form_powerlaw(&eq5_scenario(area)?, &cfg)?;
        let mut row = vec![area];
        row.extend(&a.x);
        row.push(a.objective_value);
        row.push((1.0 / area.sqrt()) / a.objective_value);
        t.push_row(row)?;
    }
    Ok(t)
}

/// Checks the trends each artifact must show; returns a description of the
/// first violation.
pub fn check_trends(artifact: Artifact, table: &Table) -> Option<String> {
    let non_increasing = |v: &[f64]| v.windows(2).position(|w| w[1] > w[0]);
    match artifact {
        Artifact::Fig2b => {
            for c in fig2b_columns() {
                let v = table.column(&c).ok()?;
                if let Some(i) = non_increasing(&v) {
                    return Some(format!("{c} increases at row {}", i + 1));
                }
            }
            None
        }
        Artifact::Fig4 => {
            let opt = table.column("speedup_optimal").ok()?;
            for c in fig4_columns() {
                let v = table.column(&c).ok()?;
                if v[0] >= 1.0 {
                    return Some(format!("{c} is not a slowdown at delta = 0"));
                }
                if let Some(i) = v.iter().zip(&opt).position(|(s, o)| *s > o + 1e-12) {
                    return Some(format!("{c} exceeds the matched design at row {i}"));
                }
            }
            None
        }
        Artifact::Fig3 | Artifact::Eq5Table => None,
    }
}

pub fn build(artifact: Artifact) -> Result<Table, CliError> {
    match artifact {
        Artifact::Fig2b => fig2b(),
        Artifact::Fig3 => fig3(),
        Artifact::Fig4 => fig4(),
        Artifact::Eq5Table => eq5_table(),
    }
}
