//! Batch driver: configuration, per-level solves and artifact output.
//!
//! A run walks a range of mesh levels. Level `ℓ` is the uniform triangle
//! mesh with `2^ℓ` intervals per side, unless a list of mesh files is given,
//! in which case file `i` is level `start + i`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Parser;

use crate::assembly::{solve_monolithic, Monolithic};
use crate::convergence::{error_norms, ErrorNorms, weak_gradient_norm, ConvergenceRow, ConvergenceTable, TableFormat, TableMeta};
use crate::dd::{
    build_subdomain_systems, solve_hybrid_direct, InitialGuess, IterationLog, StopRule, ORACLE_REL_DECREASE,
};
use crate::error::{Error, Result};
use crate::mesh::{build_uniform_triangle_mesh, load_mesh_file, partition_grid, partition_per_element, Mesh, SubdomainPartition};
use crate::problem::{Problem, TestCase};
use crate::wgcore::{ElementFamily, FamilyKind, TraceLayout, WeakFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    Monolithic,
    DdIter,
    HybridDirect,
}

impl FromStr for SolverMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monolithic" => Ok(SolverMode::Monolithic),
            "dd-iter" => Ok(SolverMode::DdIter),
            "hybrid-direct" => Ok(SolverMode::HybridDirect),
            other => Err(Error::Config(format!(
                "unknown mode `{other}` (expected monolithic, dd-iter or hybrid-direct)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopMode {
    /// Stop once a sweep improves neither the L² nor the energy error
    /// against the exact solution by 1 %.
    Oracle,
    /// Stop once the distance to the monolithic solution `u_h` falls below
    /// the level's truncation error `Q_h u - u_h`, in the L² and energy norms.
    Truncation,
    /// Stop on the interface residual.
    Residual,
}

impl FromStr for StopMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(StopMode::Oracle),
            "truncation" => Ok(StopMode::Truncation),
            "residual" => Ok(StopMode::Residual),
            other => Err(Error::Config(format!(
                "unknown stop mode `{other}` (expected oracle, truncation or residual)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionSpec {
    /// `m`×`m` blocks.
    Grid(usize),
    PerElement,
}

impl FromStr for PartitionSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "per-element" {
            return Ok(PartitionSpec::PerElement);
        }
        match s.parse::<usize>() {
            Ok(m) if m > 0 => Ok(PartitionSpec::Grid(m)),
            _ => Err(Error::Config(format!(
                "subdomains must be a positive block count or `per-element`, got `{s}`"
            ))),
        }
    }
}

impl std::fmt::Display for PartitionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PartitionSpec::Grid(m) => write!(f, "{} subdomains", m * m),
            PartitionSpec::PerElement => f.write_str("per-element"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub test: TestCase,
    pub family: FamilyKind,
    pub degree: usize,
    pub partition: PartitionSpec,
    /// `None` selects the family default.
    pub beta: Option<f64>,
    pub levels: RangeInclusive<u32>,
    pub mode: SolverMode,
    pub stop: StopMode,
    pub tol: f64,
    pub max_iters: usize,
    pub initial_guess: InitialGuess,
    /// Output directory; the table goes to stdout when absent.
    pub out: Option<PathBuf>,
    pub diagnostics: bool,
    pub mesh_files: Vec<PathBuf>,
    pub format: TableFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            test: TestCase::Test1,
            family: FamilyKind::Standard,
            degree: 1,
            partition: PartitionSpec::Grid(2),
            beta: None,
            levels: 1..=4,
            mode: SolverMode::DdIter,
            stop: StopMode::Oracle,
            tol: 1e-10,
            max_iters: 10_000,
            initial_guess: InitialGuess::Zero,
            out: None,
            diagnostics: false,
            mesh_files: Vec::new(),
            format: TableFormat::Markdown,
        }
    }
}

pub const MAX_CLI_DEGREE: usize = 6;

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("invalid value `{value}` for `{key}`"))),
    }
}

fn parse_levels(value: &str) -> Result<RangeInclusive<u32>> {
    let bad = || Error::Config(format!("levels must look like `A..B` or `A`, got `{value}`"));
    let (a, b) = match value.split_once("..") {
        Some((a, b)) => (a.trim(), b.trim().trim_start_matches('=')),
        None => (value.trim(), value.trim()),
    };
    let a: u32 = a.parse().map_err(|_| bad())?;
    let b: u32 = b.parse().map_err(|_| bad())?;
    if a > b {
        return Err(Error::Config(format!("empty level range {a}..{b}")));
    }
    if b > 12 {
        return Err(Error::Config(format!("level {b} is beyond the supported maximum 12")));
    }
    Ok(a..=b)
}

impl RunConfig {
    /// Sets one `key = value` pair. Keys accept `-` or `_` as separator.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "test" => self.test = value.parse()?,
            "family" => self.family = value.parse()?,
            "degree" => {
                let k: usize = parse_num("degree", value)?;
                if !(1..=MAX_CLI_DEGREE).contains(&k) {
                    return Err(Error::Config(format!(
                        "degree {k} out of range 1..={MAX_CLI_DEGREE}"
                    )));
                }
                self.degree = k;
            }
            "subdomains" => self.partition = value.parse()?,
            "beta" => {
                let b: f64 = parse_num("beta", value)?;
                if !(b > 0.0 && b.is_finite()) {
                    return Err(Error::Config(format!("beta must be positive, got {value}")));
                }
                self.beta = Some(b);
            }
            "levels" => self.levels = parse_levels(value)?,
            "mode" => self.mode = value.parse()?,
            "stop" => self.stop = value.parse()?,
            "tol" => {
                let t: f64 = parse_num("tol", value)?;
                if !(t > 0.0) {
                    return Err(Error::Config(format!("tol must be positive, got {value}")));
                }
                self.tol = t;
            }
            "max_iters" => self.max_iters = parse_num("max_iters", value)?,
            "initial_guess" => {
                self.initial_guess = match value {
                    "zero" => InitialGuess::Zero,
                    "local-solve" => InitialGuess::LocalSolve,
                    other => {
                        return Err(Error::Config(format!(
                            "unknown initial guess `{other}` (expected zero or local-solve)"
                        )))
                    }
                }
            }
            "out" => self.out = Some(PathBuf::from(value)),
            "diagnostics" => self.diagnostics = parse_bool("diagnostics", value)?,
            "mesh_file" | "mesh_files" => {
                self.mesh_files = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(PathBuf::from)
                    .collect()
            }
            "format" => self.format = value.parse()?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn element_family(&self) -> Result<ElementFamily> {
        ElementFamily::new(self.family, self.degree)
    }

    pub fn effective_beta(&self) -> Result<f64> {
        Ok(match self.beta {
            Some(b) => b,
            None => self.element_family()?.default_beta(),
        })
    }

    fn validate(&self) -> Result<()> {
        if !self.mesh_files.is_empty() {
            let n = (self.levels.end() - self.levels.start() + 1) as usize;
            if n != self.mesh_files.len() {
                return Err(Error::Config(format!(
                    "{} mesh files given for {n} levels",
                    self.mesh_files.len()
                )));
            }
        }
        if self.mode == SolverMode::DdIter && matches!(self.stop, StopMode::Oracle | StopMode::Truncation) {
            if Problem::from_id(self.test).exact.is_none() {
                return Err(Error::Config(format!(
                    "stop mode needs an exact solution, which {} lacks",
                    self.test
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "wgdd", about = "Weak Galerkin solves with domain decomposition")]
struct Cli {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// test1, test2, test3 or manufactured.
    #[arg(long)]
    test: Option<String>,
    /// standard or superconvergent.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    degree: Option<String>,
    /// Blocks per side `m`, or `per-element`.
    #[arg(long)]
    subdomains: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    /// `A..B`.
    #[arg(long)]
    levels: Option<String>,
    /// monolithic, dd-iter or hybrid-direct.
    #[arg(long)]
    mode: Option<String>,
    /// oracle, truncation or residual.
    #[arg(long)]
    stop: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    max_iters: Option<String>,
    /// zero or local-solve.
    #[arg(long)]
    initial_guess: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    diagnostics: bool,
    /// One mesh file per level, in level order.
    #[arg(long, num_args = 1..)]
    mesh_file: Vec<String>,
    /// csv or markdown.
    #[arg(long)]
    format: Option<String>,
}

/// Result of argument parsing.
#[derive(Debug)]
pub enum Invocation {
    Run(RunConfig),
    /// Help or version text was requested.
    Info(String),
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config_file(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("config line {}: expected `key = value`", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Parses command-line arguments (program name first), merging an optional
/// config file underneath.
pub fn parse_config<I, T>(args: I) -> Result<Invocation>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Ok(Invocation::Info(e.render().to_string())),
                _ => Err(Error::Config(e.render().to_string())),
            };
        }
    };
    let mut config = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        for (k, v) in read_config_file(&text)? {
            config.set(&k, &v)?;
        }
    }
    let flags = [
        ("test", cli.test),
        ("family", cli.family),
        ("degree", cli.degree),
        ("subdomains", cli.subdomains),
        ("beta", cli.beta),
        ("levels", cli.levels),
        ("mode", cli.mode),
        ("stop", cli.stop),
        ("tol", cli.tol),
        ("max_iters", cli.max_iters),
        ("initial_guess", cli.initial_guess),
        ("out", cli.out),
        ("format", cli.format),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            config.set(k, &v)?;
        }
    }
    if cli.diagnostics {
        config.diagnostics = true;
    }
    if !cli.mesh_file.is_empty() {
        config.mesh_files = cli.mesh_file.into_iter().map(PathBuf::from).collect();
    }
    config.validate()?;
    Ok(Invocation::Run(config))
}

/// Outcome of one level.
#[derive(Debug, Clone)]
pub struct LevelReport {
    pub level: u32,
    pub num_cells: usize,
    pub num_subdomains: usize,
    /// Errors of the monolithic solution, when an exact solution is known.
    pub truncation_error: Option<ErrorNorms>,
    pub log: Option<IterationLog>,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub table: ConvergenceTable,
    pub levels: Vec<LevelReport>,
    pub beta: Option<f64>,
}

impl RunReport {
    pub fn all_converged(&self) -> bool {
        self.levels.iter().all(|l| l.converged)
    }
}

/// Exit status for an error: 1 for usage problems, 2 for solver failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidParameter(_) => 1,
        _ => 2,
    }
}

pub fn level_mesh(config: &RunConfig, level: u32) -> Result<Mesh> {
    if config.mesh_files.is_empty() {
        build_uniform_triangle_mesh(1 << level)
    } else {
        let i = (level - config.levels.start()) as usize;
        load_mesh_file(&config.mesh_files[i])
    }
}

/// Grid partitions are clamped to the level's resolution, so coarse levels
/// run with fewer, larger subdomains.
pub fn level_partition(mesh: &Mesh, spec: PartitionSpec, level: u32) -> Result<SubdomainPartition> {
    match spec {
        PartitionSpec::PerElement => Ok(partition_per_element(mesh)),
        PartitionSpec::Grid(m) => partition_grid(mesh, m.min(1 << level)),
    }
}

/// Runs every level and writes artifacts when an output directory is set.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let family = config.element_family()?;
    let problem = Problem::from_id(config.test);
    let beta = match config.mode {
        SolverMode::DdIter => Some(config.effective_beta()?),
        _ => None,
    };
    let mut table = ConvergenceTable::new(TableMeta {
        test: config.test.to_string(),
        family: family.to_string(),
        degree: config.degree,
        beta,
        partition: match config.mode {
            SolverMode::Monolithic => "none".into(),
            _ => config.partition.to_string(),
        },
    });
    let mut levels = Vec::new();
    for level in config.levels.clone() {
        let mesh = level_mesh(config, level)?;
        let mono = solve_monolithic(&mesh, family, &problem)?;
        let truncation_error = match &problem.exact {
            Some(u) => Some(error_norms(&mesh, &mono.ops, &**u, &mono.solution)?),
            None => None,
        };
        let (solution, log, converged, num_subdomains) = match config.mode {
            SolverMode::Monolithic => (mono.solution.clone(), None, true, 1),
            SolverMode::HybridDirect => {
                let part = level_partition(&mesh, config.partition, level)?;
                let h = solve_hybrid_direct(&mesh, &part, &mono.ops, &problem)?;
                (h.u, None, true, part.num_subdomains())
            }
            SolverMode::DdIter => {
                let part = level_partition(&mesh, config.partition, level)?;
                let (u, log, ok) = run_dd(config, &mesh, &part, &mono, &problem, beta.unwrap(), truncation_error)?;
                (u, Some(log), ok, part.num_subdomains())
            }
        };
        let (l2, energy) = match &problem.exact {
            Some(u) => {
                let e = error_norms(&mesh, &mono.ops, &**u, &solution)?;
                (e.l2, e.energy)
            }
            // without an exact solution, report the distance to the monolithic solve
            None => {
                let d = solution.sub(&mono.solution.to_per_side(&mesh));
                (
                    crate::convergence::interior_l2_norm(&mesh, &mono.ops, &d),
                    weak_gradient_norm(&mesh, &mono.ops, &d),
                )
            }
        };
        table.push(ConvergenceRow {
            level,
            l2,
            energy,
            iterations: log.as_ref().map(IterationLog::iterations),
        });
        levels.push(LevelReport {
            level,
            num_cells: mesh.num_cells(),
            num_subdomains,
            truncation_error,
            log,
            converged,
        });
    }
    let report = RunReport { table, levels, beta };
    if let Some(dir) = &config.out {
        write_artifacts(config, &report, dir)?;
    }
    Ok(report)
}

fn run_dd(
    config: &RunConfig,
    mesh: &Mesh,
    part: &SubdomainPartition,
    mono: &Monolithic,
    problem: &Problem,
    beta: f64,
    truncation_error: Option<ErrorNorms>,
) -> Result<(WeakFunction, IterationLog, bool)> {
    let systems = build_subdomain_systems(mesh, part, &mono.ops, problem, beta)?;
    let hybrid = if config.diagnostics {
        Some(solve_hybrid_direct(mesh, part, &mono.ops, problem)?)
    } else {
        None
    };
    let exact = match &problem.exact {
        Some(u) => Some(WeakFunction::interpolate(mesh, mono.ops.family, &**u, TraceLayout::PerSide)?),
        None => None,
    };
    let discrete = mono.solution.to_per_side(mesh);
    let stop = match config.stop {
        StopMode::Residual => StopRule::Residual {
            tol: config.tol,
            max_iters: config.max_iters,
        },
        StopMode::Oracle => StopRule::Oracle {
            exact: exact.as_ref().expect("validated"),
            rel_decrease: ORACLE_REL_DECREASE,
            max_iters: config.max_iters,
        },
        StopMode::Truncation => StopRule::Truncation {
            target: truncation_error.expect("validated").energy,
            target_l2: truncation_error.expect("validated").l2,
            reference: &discrete,
            max_iters: config.max_iters,
        },
    };
    let state = systems.initial_state(mesh, config.initial_guess);
    let out = systems.run(mesh, &mono.ops, state, stop, hybrid.as_ref());
    Ok((out.state.u, out.log, out.converged))
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| format!("{v:.6e}"))
}

/// Iteration log as CSV.
pub fn iteration_log_csv(log: &IterationLog) -> String {
    let mut s = String::from("n,residual,jump,multiplier_sum,oracle_energy,oracle_l2\n");
    for r in &log.records {
        let _ = writeln!(
            s,
            "{},{:.6e},{:.6e},{:.6e},{},{}",
            r.n,
            r.residual,
            r.jump,
            r.multiplier_sum,
            opt(r.oracle_error),
            opt(r.oracle_l2)
        );
    }
    s
}

/// Energy functional series with the decrement identity residual
/// `(E_{n-1} - E_n) - 4β energy(e^(n-1))`.
pub fn diagnostics_csv(log: &IterationLog, beta: f64) -> String {
    let mut s = String::from("n,functional,split_form,energy,decrement,predicted,identity_residual\n");
    let dec: BTreeMap<usize, (f64, f64)> = log
        .decrements(beta)
        .into_iter()
        .map(|(n, d, p)| (n, (d, p)))
        .collect();
    for r in &log.records {
        let Some(e) = &r.energy else { continue };
        let (d, p, res) = match dec.get(&r.n) {
            Some(&(d, p)) => (format!("{d:.6e}"), format!("{p:.6e}"), format!("{:.6e}", d - p)),
            None => Default::default(),
        };
        let _ = writeln!(
            s,
            "{},{:.6e},{:.6e},{:.6e},{d},{p},{res}",
            r.n, e.functional, e.split_form, e.energy
        );
    }
    s
}

fn write_artifacts(config: &RunConfig, report: &RunReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("table.csv"), report.table.emit(TableFormat::Csv))?;
    std::fs::write(dir.join("table.md"), report.table.emit(TableFormat::Markdown))?;
    for l in &report.levels {
        let Some(log) = &l.log else { continue };
        std::fs::write(dir.join(format!("iterations_level{}.csv", l.level)), iteration_log_csv(log))?;
        if config.diagnostics {
            std::fs::write(
                dir.join(format!("diagnostics_level{}.csv", l.level)),
                diagnostics_csv(log, report.beta.expect("dd-iter run")),
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<RunConfig> {
        let mut v = vec!["wgdd"];
        v.extend_from_slice(args);
        match parse_config(v)? {
            Invocation::Run(c) => Ok(c),
            Invocation::Info(_) => panic!("unexpected help"),
        }
    }

    #[test]
    fn defaults() {
        let c = parse(&[]).unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.test, TestCase::Test1);
        assert_eq!(c.degree, 1);
        assert_eq!(c.partition, PartitionSpec::Grid(2));
        assert_eq!(c.effective_beta().unwrap(), 8.0);
        assert_eq!(c.levels, 1..=4);
    }

    #[test]
    fn flags() {
        let c = parse(&["--beta", "19", "--degree", "5"]).unwrap();
        assert_eq!(c.beta, Some(19.0));
        assert_eq!(c.degree, 5);
        let c = parse(&["--subdomains", "per-element", "--levels", "2..5", "--mode", "hybrid-direct"]).unwrap();
        assert_eq!(c.partition, PartitionSpec::PerElement);
        assert_eq!(c.levels, 2..=5);
        assert_eq!(c.mode, SolverMode::HybridDirect);
    }

    #[test]
    fn rejections() {
        assert!(matches!(parse(&["--degree", "9"]), Err(Error::Config(_))));
        assert!(matches!(parse(&["--degree", "0"]), Err(Error::Config(_))));
        assert!(matches!(parse(&["--beta", "0"]), Err(Error::Config(_))));
        assert!(matches!(parse(&["--beta", "-1"]), Err(Error::Config(_))));
        assert!(matches!(parse(&["--levels", "4..2"]), Err(Error::Config(_))));
        assert!(matches!(parse(&["--bogus", "1"]), Err(Error::Config(_))));
        let mut c = RunConfig::default();
        assert!(matches!(c.set("colour", "red"), Err(Error::Config(_))));
    }

    #[test]
    fn help_is_info() {
        assert!(matches!(parse_config(["wgdd", "--help"]), Ok(Invocation::Info(_))));
    }

    #[test]
    fn config_file_lines() {
        let kv = read_config_file("# comment\ndegree = 2\n\nbeta=4 # trailing\n").unwrap();
        assert_eq!(kv, vec![("degree".into(), "2".into()), ("beta".into(), "4".into())]);
        assert!(read_config_file("degree 2").is_err());
    }

    #[test]
    fn manufactured_is_exact() {
        let mut c = RunConfig::default();
        c.test = TestCase::Manufactured;
        c.levels = 1..=2;
        c.stop = StopMode::Residual;
        c.tol = 1e-11;
        let r = run(&c).unwrap();
        assert!(r.all_converged());
        for row in &r.table.rows {
            assert!(row.l2 < 1e-9 && row.energy < 1e-9, "{row:?}");
        }
    }
}
