//! Command-line front end.
//!
//! Exit codes:
//!
//! | code | category         | meaning                                        |
//! |------|------------------|------------------------------------------------|
//! | 0    |                  | success                                        |
//! | 2    | `infeasible`     | no allocation satisfies the constraints        |
//! | 3    | `nonconvergence` | a solver hit its iteration limit               |
//! | 4    | `schema`         | the scenario file is malformed                 |
//! | 5    | `verify`         | verification or a reproduction trend failed    |
//! | 6    | `io`             | reading or writing a file failed               |
//! | 7    | `usage`          | bad command-line arguments                     |
//! | 8    | `model`          | invalid model parameters or unsupported setup  |
//! | 9    | `degenerate`     | the constraint does not determine an optimum   |
//! | 10   | `oracle`         | the grid oracle could not run                  |
//!
//! Every failure prints one line to stderr: `error:<category>: <message>`.

pub mod file;
pub mod reproduce;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::model::{constraint_usage, Allocation, ModelError, Scenario};
use crate::oracle::{free_dimensions, grid_search_refined, perturbation_check, GridSpec, OracleError};
use crate::report::{format_number, write_csv, write_svg_heatmap, write_svg_line, ReportError, Table};
use crate::solver::{solve, SolveError, SolverConfig};

use self::file::SchemaError;
use self::reproduce::Artifact;

/// Largest relative excess of the solver objective over the grid optimum
/// that `verify` accepts.
pub const VERIFY_GAP: f64 = 1e-3;

/// Refinement rounds `verify` runs after the first grid pass.
pub const VERIFY_ROUNDS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub category: &'static str,
    pub message: String,
}

impl CliError {
    fn new(category: &'static str, message: impl Into<String>) -> Self {
        Self {
            category,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category {
            "infeasible" => 2,
            "nonconvergence" => 3,
            "schema" => 4,
            "verify" => 5,
            "io" => 6,
            "usage" => 7,
            "model" => 8,
            "degenerate" => 9,
            "oracle" => 10,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let msg = self.message.split_whitespace().collect::<Vec<_>>().join(" ");
        write!(f, "error:{}: {}", self.category, msg)
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        let category = match &e {
            SolveError::Infeasible(_) => "infeasible",
            SolveError::NonConvergence { .. } => "nonconvergence",
            SolveError::Degenerate(_) => "degenerate",
            SolveError::InvalidConfig(_) => "schema",
            SolveError::Model(_) | SolveError::InvalidModel(_) | SolveError::Unsupported(_) => "model",
        };
        Self::new(category, e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        Self::new("model", e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        Self::new("oracle", e.to_string())
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Io(e) => Self::new("io", e.to_string()),
            other => Self::new("model", other.to_string()),
        }
    }
}

impl From<SchemaError> for CliError {
    fn from(e: SchemaError) -> Self {
        Self::new("schema", e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "multiamdahl",
    version,
    about = "Optimal allocation of a shared chip resource across accelerated execution segments",
    after_help = "MULTIAMDAHL_SEED is reserved and has no effect: every command is deterministic."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a scenario file and print the allocation.
    Solve {
        file: PathBuf,
        /// Also write the allocation as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Re-solve while sweeping one numeric parameter of the file.
    Sweep {
        file: PathBuf,
        /// Dotted path of the parameter, e.g. `resource.budget` or
        /// `segments.serial.function.alpha`.
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        /// Space the values geometrically.
        #[arg(long)]
        log: bool,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the solver with a brute-force grid and local perturbations.
    Verify {
        file: PathBuf,
        /// Grid intervals per dimension (default depends on the dimension).
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Regenerate a figure or table as CSV and SVG.
    Reproduce {
        /// fig2b, fig3, fig4 or eq5_table.
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let text = e.render().to_string();
            let first = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            let err = CliError::new("usage", first);
            eprintln!("{err}");
            return err.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Solve { file, csv } => cmd_solve(&file, csv.as_deref(), &mut out),
        Command::Sweep {
            file,
            param,
            from,
            to,
            steps,
            log,
            out: dest,
        } => cmd_sweep(&file, &param, from, to, steps, log, dest.as_deref(), &mut out),
        Command::Verify { file, resolution } => cmd_verify(&file, resolution, &mut out),
        Command::Reproduce { name, out: dir } => cmd_reproduce(&name, &dir, &mut out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = out.flush();
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::new("io", format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn load(path: &Path) -> Result<(Scenario, SolverConfig), CliError> {
    let f = file::parse(&read(path)?)?;
    let cfg = f.solver_config();
    cfg.validate()?;
    Ok((f.scenario()?, cfg))
}

fn print(out: &mut dyn Write, text: std::fmt::Arguments) -> Result<(), CliError> {
    out.write_fmt(text).map_err(|e| CliError::new("io", e.to_string()))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `(name, x, voltage, f, contribution)` for printing.
type Row = (String, f64, Option<f64>, f64, f64);

fn allocation_rows(s: &Scenario, a: &Allocation) -> Result<Vec<Row>, CliError> {
    let contrib = s.contributions(&a.x, a.voltage.as_deref())?;
    Ok(s.segments()
        .iter()
        .enumerate()
        .map(|(i, seg)| {
            let v = a.voltage.as_ref().map(|v| v[i]);
            let f = if seg.is_active() { contrib[i] / seg.weight } else { 0.0 };
            (seg.name.clone(), a.x[i], v, f, contrib[i])
        })
        .collect())
}

pub fn cmd_solve(path: &Path, csv: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let (s, cfg) = load(path)?;
    let a = solve(&s, &cfg)?;
    let rows = allocation_rows(&s, &a)?;
    let voltage = a.voltage.is_some();
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(7);
    print(out, format_args!("resource: {}\n", s.resource().kind()))?;
    if voltage {
        print(
            out,
            format_args!(
                "{:<width$}  {:>18}  {:>18}  {:>18}  {:>18}\n",
                "segment", "x", "v", "f(x)", "t*f(x)"
            ),
        )?;
    } else {
        print(
            out,
            format_args!("{:<width$}  {:>18}  {:>18}  {:>18}\n", "segment", "x", "f(x)", "t*f(x)"),
        )?;
    }
    for (name, x, v, f, c) in &rows {
        let (x, f, c) = (format_number(*x), format_number(*f), format_number(*c));
        match v {
            Some(v) => print(
                out,
                format_args!("{name:<width$}  {x:>18}  {:>18}  {f:>18}  {c:>18}\n", format_number(*v)),
            )?,
            None => print(out, format_args!("{name:<width$}  {x:>18}  {f:>18}  {c:>18}\n"))?,
        }
    }
    print(
        out,
        format_args!(
            "objective ({}): {}\n",
            s.objective().label(),
            format_number(a.objective_value)
        ),
    )?;
    for u in constraint_usage(&s, &a.x, a.voltage.as_deref())? {
        print(
            out,
            format_args!(
                "constraint {}: {} of {}\n",
                u.id,
                format_number(u.lhs),
                format_number(u.budget)
            ),
        )?;
    }
    let mults: Vec<String> = a.multipliers.iter().map(|m| format_number(*m)).collect();
    print(out, format_args!("multipliers: {}\n", mults.join(" ")))?;
    print(out, format_args!("kkt_residual: {}\n", format_number(a.kkt_residual)))?;
    if a.local_only {
        print(
            out,
            format_args!("note: non-convex efficiency; the allocation is a local optimum only\n"),
        )?;
    }

    if let Some(dest) = csv {
        let mut text = String::from(if voltage {
            "segment,x,v,f,contribution\n"
        } else {
            "segment,x,f,contribution\n"
        });
        for (name, x, v, f, c) in &rows {
            let mut cells = vec![csv_field(name), format_number(*x)];
            if let Some(v) = v {
                cells.push(format_number(*v));
            }
            cells.push(format_number(*f));
            cells.push(format_number(*c));
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        fs::write(dest, text).map_err(|e| io_err(dest, e))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_sweep(
    path: &Path,
    param: &str,
    from: f64,
    to: f64,
    steps: usize,
    log: bool,
    dest: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if steps < 2 {
        return Err(CliError::new("usage", "--steps must be at least 2"));
    }
    if !(from.is_finite() && to.is_finite()) || (log && !(from > 0.0 && to > 0.0)) {
        return Err(CliError::new(
            "usage",
            "sweep range must be finite (and positive with --log)",
        ));
    }
    let base = file::parse_value(&read(path)?)?;
    // validate the file and path once before fanning out
    let first = file::from_value(base.clone())?;
    let segments: Vec<String> = first.segments.iter().map(|s| s.name.clone()).collect();
    let area_energy = matches!(first.resource, file::ResourceSpec::AreaEnergy { .. });
    file::set_number(&mut base.clone(), param, from)?;

    let values = if log {
        crate::scenarios::logspace(from, to, steps)
    } else {
        crate::scenarios::linspace(from, to, steps)
    };
    let rows: Vec<Vec<f64>> = values
        .par_iter()
        .map(|&v| {
            let mut doc = base.clone();
            file::set_number(&mut doc, param, v)?;
            let f = file::from_value(doc)?;
            let cfg = f.solver_config();
            cfg.validate()?;
            let a = solve(&f.scenario()?, &cfg)?;
            let mut row = vec![v, a.objective_value];
            row.extend(&a.x);
            if let Some(volt) = &a.voltage {
                row.extend(volt);
            }
            Ok(row)
        })
        .collect::<Result<_, CliError>>()?;

    let mut cols = vec![
        (param.to_string(), String::new()),
        ("objective".to_string(), String::new()),
    ];
    cols.extend(segments.iter().map(|n| (format!("x_{n}"), String::new())));
    if area_energy {
        cols.extend(segments.iter().map(|n| (format!("v_{n}"), String::new())));
    }
    let mut table = Table::new(cols);
    for r in rows {
        table.push_row(r)?;
    }
    match dest {
        Some(d) => {
            let mut f = fs::File::create(d).map_err(|e| io_err(d, e))?;
            write_csv(&table, &mut f)?;
        }
        None => {
            write_csv(&table, &mut &mut *out)?;
        }
    }
    Ok(())
}

/// Grid resolution used by `verify` when none is given.
pub fn default_resolution(dims: usize) -> usize {
    match dims {
        0 | 1 => 2000,
        2 => 400,
        3 => 100,
        _ => 30,
    }
}

/// Solver and oracle objectives and the perturbation verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub solver: f64,
    pub grid: f64,
    pub gap: f64,
    pub perturbation_ok: bool,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.gap <= VERIFY_GAP && self.perturbation_ok
    }
}

pub fn verify_scenario(s: &Scenario, cfg: &SolverConfig, resolution: Option<usize>) -> Result<Verification, CliError> {
    let a = solve(s, cfg)?;
    let dims = free_dimensions(s);
    let grid = if dims == 0 {
        // a static budget with one user has a single feasible point
        let mut x = vec![0.0; s.len()];
        x[s.active_indices()[0]] = s.resource().budget();
        Allocation::evaluate(s, x, None)?.objective_value
    } else {
        let g = GridSpec::for_scenario(s, resolution.unwrap_or(default_resolution(dims)))?;
        grid_search_refined(s, &g, VERIFY_ROUNDS)?.objective_value
    };
    let step = 1e-4 * s.resource().budget();
    Ok(Verification {
        solver: a.objective_value,
        grid,
        gap: (a.objective_value - grid) / grid,
        perturbation_ok: perturbation_check(s, &a, step),
    })
}

pub fn cmd_verify(path: &Path, resolution: Option<usize>, out: &mut dyn Write) -> Result<(), CliError> {
    let (s, cfg) = load(path)?;
    let v = verify_scenario(&s, &cfg, resolution)?;
    print(out, format_args!("solver objective: {}\n", format_number(v.solver)))?;
    print(out, format_args!("grid objective: {}\n", format_number(v.grid)))?;
    print(out, format_args!("relative gap: {}\n", format_number(v.gap)))?;
    print(
        out,
        format_args!(
            "perturbation check: {}\n",
            if v.perturbation_ok { "pass" } else { "fail" }
        ),
    )?;
    if !v.passed() {
        return Err(CliError::new(
            "verify",
            format!(
                "gap {} (limit {VERIFY_GAP}), perturbation check {}",
                format_number(v.gap),
                if v.perturbation_ok { "passed" } else { "failed" }
            ),
        ));
    }
    print(out, format_args!("verified\n"))
}

fn write_file(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<usize, ReportError>) -> Result<(), CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    fs::write(path, buf).map_err(|e| io_err(path, e))
}

pub fn cmd_reproduce(name: &str, dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let artifact = Artifact::parse(name).ok_or_else(|| {
        CliError::new(
            "usage",
            format!("unknown artifact `{name}`; expected one of fig2b, fig3, fig4, eq5_table"),
        )
    })?;
    let table = reproduce::build(artifact)?;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let csv = dir.join(format!("{name}.csv"));
    let svg = dir.join(format!("{name}.svg"));
    write_file(&csv, |b| write_csv(&table, b))?;
    write_file(&svg, |b| match artifact {
        Artifact::Fig2b => {
            let cols = reproduce::fig2b_columns();
            let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
            write_svg_line(&table, "t_parallel", &refs, b)
        }
        Artifact::Fig3 => write_svg_heatmap(&table, "n_over_alpha", "delta", "speedup", b),
        Artifact::Fig4 => {
            let mut cols = reproduce::fig4_columns();
            cols.push("speedup_optimal".into());
            let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
            write_svg_line(&table, "delta", &refs, b)
        }
        Artifact::Eq5Table => {
            let cols: Vec<String> = reproduce::EQ5_SEGMENTS.iter().map(|s| format!("a_{}", s.0)).collect();
            let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
            write_svg_line(&table, "area", &refs, b)
        }
    })?;
    if let Some(problem) = reproduce::check_trends(artifact, &table) {
        return Err(CliError::new("verify", format!("{name}: {problem}")));
    }
    print(
        out,
        format_args!(
            "wrote {} and {} ({} rows)\n",
            csv.display(),
            svg.display(),
            table.rows().len()
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ResourceModel;

    #[test]
    fn exit_codes_are_distinct() {
        let cats = [
            "infeasible",
            "nonconvergence",
            "schema",
            "verify",
            "io",
            "usage",
            "model",
            "degenerate",
            "oracle",
        ];
        let mut codes: Vec<i32> = cats.iter().map(|c| CliError::new(c, "").exit_code()).collect();
        codes.sort();
        codes.dedup();
        assert_eq!(codes.len(), cats.len());
        assert!(!codes.contains(&0));
    }

    #[test]
    fn error_line_is_single_line() {
        let e = CliError::new("schema", "bad\nthing  here");
        assert_eq!(e.to_string(), "error:schema: bad thing here");
    }

    #[test]
    fn solver_errors_map_to_categories() {
        assert_eq!(CliError::from(SolveError::Infeasible("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(SolveError::Degenerate("x".into())).exit_code(), 9);
        let nc = SolveError::NonConvergence {
            reason: "r".into(),
            residual: 1.0,
            best: None,
            trace: vec![],
        };
        assert_eq!(CliError::from(nc).exit_code(), 3);
    }

    #[test]
    fn verification_needs_gap_and_perturbation() {
        let ok = Verification {
            solver: 1.0,
            grid: 1.0005,
            gap: -5e-4,
            perturbation_ok: true,
        };
        assert!(ok.passed());
        assert!(!Verification {
            gap: 2e-3,
            ..ok.clone()
        }
        .passed());
        assert!(!Verification {
            perturbation_ok: false,
            ..ok
        }
        .passed());
    }

    #[test]
    fn static_resource_is_area_energy_free() {
        assert!(!matches!(
            ResourceModel::StaticBudget { total: 1.0 },
            ResourceModel::AreaEnergy { .. }
        ));
    }
}
