//! Command-line surface and subcommand execution.

use std::path::PathBuf;
use std::time::Instant;

use ale_core::aklines::{build_line, residual_ak, AkParams};
use ale_core::delliptic::{
    abel_map, constraint_solve, d4_candidates, d4_exhaustive, d4_divisor_points, principality_residual,
    ConstraintOptions, EllipticCurveData, Selector,
};
use ale_core::nodal::{genus_report, newton_solve, solve_for_branch, Gauge, NodalCandidate, NodalOptions};
use ale_core::picard::{standard_types, verify_theorem, ConfigType, CurveConfig};
use ale_core::polycore::ComplexPoly;
use ale_core::weylmetrics::GridFunction;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::checks::{self, MetricCheck};
use crate::config::{self, ConfigError, Module, ModuleList, RunConfig, Tolerance};
use crate::numbers::{parse_complex_list, parse_fixed, parse_pair, parse_real, parse_real_list};
use crate::report::{json as to_value, Check, Report};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {message}")]
    Write { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "ale", version, about = "Verification runs for ALE twistor-line computations")]
pub struct Cli {
    /// Replaces every upper-bound tolerance.
    #[arg(long, global = true)]
    pub tol: Option<Tolerance>,
    /// Seed for the random sweeps.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Comma-separated modules to run.
    #[arg(long, global = true, value_name = "LIST")]
    pub only: Option<ModuleList>,
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Every check of every selected module.
    VerifyAll,
    /// The class Q and its intersection numbers.
    Picard(PicardArgs),
    /// A twistor line of an A_k surface.
    AkLine(AkLineArgs),
    /// A nodal curve with prescribed branch points.
    Nodal(NodalArgs),
    /// The D4 divisor and its Abel–Jacobi residual.
    D4(D4Args),
    /// One metric fixture.
    Metrics(MetricsArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct PicardArgs {
    /// `A5`, `D7`, `E8`, ...; all standard types when omitted.
    #[arg(long = "type")]
    #[serde(rename = "type")]
    pub kind: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct AkLineArgs {
    /// Surface index; the line has k + 1 levels.
    #[arg(long)]
    pub k: usize,
    /// Real middle coefficient of the quadratic section `c ζ² + a ζ − c̄`.
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    /// Leading coefficient c of the section as `RE,IM`.
    #[arg(long, allow_hyphen_values = true)]
    pub c: String,
    /// Leading coefficient of x as `RE,IM`.
    #[arg(long = "A", allow_hyphen_values = true)]
    pub amp: String,
    /// The k + 1 real levels.
    #[arg(long, allow_hyphen_values = true)]
    pub levels: String,
}

#[derive(Debug, Args, Serialize)]
pub struct NodalArgs {
    /// Degree of p, from 2 to 8.
    #[arg(long)]
    pub ell: usize,
    /// 2ℓ complex branch points, e.g. `1,-1,2+0.5i,-2`.
    #[arg(long, allow_hyphen_values = true)]
    pub branch: String,
    /// JSON starting point `{"c": [re, im], "p": [...], "s": [...]}`;
    /// continuation from a constructed instance when omitted.
    #[arg(long, value_name = "FILE")]
    pub seed_file: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct D4Args {
    /// Coefficients z0..z4 of z(u), lowest first.
    #[arg(long, allow_hyphen_values = true)]
    pub z: String,
    /// The four nonzero reals a_j.
    #[arg(long, allow_hyphen_values = true)]
    pub a: String,
    /// The four signs of w = ±i a_j u.
    #[arg(long, allow_hyphen_values = true)]
    pub signs: String,
    /// Root index per j for the zeros.
    #[arg(long, default_value = "0,1,2,3")]
    pub zeros: String,
    /// Root index per j for the poles.
    #[arg(long, default_value = "0,1,2,3")]
    pub poles: String,
    /// Score every assignment and keep the best.
    #[arg(long)]
    pub exhaustive: bool,
    /// Solve for this coefficient of z so that the divisor is principal.
    #[arg(long, value_name = "INDEX")]
    pub solve_coeff: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricName {
    EhRicci,
    Moment,
    Hyperbolic,
    WeylForm,
    Toda,
}

impl From<MetricName> for MetricCheck {
    fn from(m: MetricName) -> Self {
        match m {
            MetricName::EhRicci => MetricCheck::EhRicci,
            MetricName::Moment => MetricCheck::Moment,
            MetricName::Hyperbolic => MetricCheck::Hyperbolic,
            MetricName::WeylForm => MetricCheck::WeylForm,
            MetricName::Toda => MetricCheck::Toda,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct MetricsArgs {
    #[arg(long, value_enum)]
    pub check: MetricName,
    /// Grid function JSON for the Toda check.
    #[arg(long, value_name = "FILE")]
    pub grid: Option<PathBuf>,
    /// Finite-difference step.
    #[arg(long)]
    pub h: Option<Tolerance>,
}

/// Resolves the configuration: file first, then flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => config::load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(t) = cli.tol {
        cfg.tol = Some(t);
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.only {
        cfg.only = Some(o.0.clone());
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    if let Command::Metrics(MetricsArgs { h: Some(h), .. }) = &cli.command {
        if h.get() > 0.05 {
            return Err(usage("--h must be at most 0.05"));
        }
        cfg.weylmetrics.h = *h;
    }
    Ok(cfg)
}

/// Runs the command and assembles the report; errors are usage errors.
pub fn execute(cli: &Cli) -> Result<(Report, Option<PathBuf>), CliError> {
    let start = Instant::now();
    let cfg = resolve_config(cli)?;
    let (result, checks) = match &cli.command {
        Command::VerifyAll => (None, checks::verify_all(&cfg)),
        Command::Picard(a) => picard(a)?,
        Command::AkLine(a) => ak_line(&cfg, a)?,
        Command::Nodal(a) => nodal(&cfg, a)?,
        Command::D4(a) => d4(&cfg, a)?,
        Command::Metrics(a) => metrics(&cfg, a)?,
    };
    let report = Report::new(
        to_value(&cli.command),
        to_value(&cfg),
        result,
        checks,
        start.elapsed().as_secs_f64(),
    );
    Ok((report, cfg.out))
}

type Outcome = (Option<Value>, Vec<Check>);

fn picard(a: &PicardArgs) -> Result<Outcome, CliError> {
    let kinds: Vec<ConfigType> = match &a.kind {
        Some(s) => vec![s.parse().map_err(usage)?],
        None => standard_types(6, 10),
    };
    let mut rows = Vec::new();
    for &kind in &kinds {
        let cfg = CurveConfig::new(kind).map_err(usage)?;
        rows.push(verify_theorem(&cfg).map_err(usage)?);
    }
    let checks = kinds.into_iter().map(checks::theorem_check).collect();
    Ok((Some(to_value(&rows)), checks))
}

fn ak_line(cfg: &RunConfig, a: &AkLineArgs) -> Result<Outcome, CliError> {
    let params = AkParams {
        k: a.k,
        a: a.a,
        c: parse_pair(&a.c).map_err(usage)?,
        amp: parse_pair(&a.amp).map_err(usage)?,
        levels: parse_real_list(&a.levels).map_err(usage)?,
    };
    let line = build_line(&params).map_err(usage)?;
    let residual = residual_ak(&line, &params.levels);
    let result = json!({
        "alphas": line.alphas,
        "betas": line.betas,
        "x": line.x.coeffs(),
        "y": line.y.coeffs(),
        "z": line.z.coeffs(),
        "residual": residual,
    });
    let check = Check::at_most(Module::Aklines, "residual", residual, cfg.tol(cfg.aklines.tol));
    Ok((Some(result), vec![check]))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeedFile {
    c: Complex64,
    p: Vec<Complex64>,
    s: Vec<Complex64>,
}

fn nodal(cfg: &RunConfig, a: &NodalArgs) -> Result<Outcome, CliError> {
    let branch = parse_complex_list(&a.branch).map_err(usage)?;
    if branch.len() != 2 * a.ell {
        return Err(usage(format!("--branch needs {} points for ell={}, got {}", 2 * a.ell, a.ell, branch.len())));
    }
    let tol = cfg.tol(cfg.nodal.tol);
    let opts = NodalOptions {
        tol: tol.max(1e-14),
        ..NodalOptions::default()
    };
    let solved = match &a.seed_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let seed: SeedFile = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let cand = NodalCandidate::new(branch, seed.c, seed.p, seed.s).map_err(usage)?;
            newton_solve(&cand, Gauge::Auto, &opts)
        }
        None => solve_for_branch(&branch, &opts),
    };
    let sol = match solved {
        Ok(sol) => sol,
        Err(e) => return Ok((None, vec![Check::failed(Module::Nodal, "solve", e)])),
    };
    let genus = genus_report(&sol).ok();
    let result = json!({
        "p": sol.candidate.p,
        "c": sol.candidate.c,
        "s": sol.candidate.s,
        "doubles": sol.doubles,
        "residual": sol.residual,
        "iterations": sol.iterations,
        "node_count": sol.node_count,
        "tangent_dim": sol.tangent_dim,
        "kernel": sol.kernel,
        "genus": genus.map(|g| json!({"arith": g.arith, "geom": g.geom})),
    });
    let checks = checks::solution_checks("solution", &sol, tol, cfg.nodal.min_gap);
    Ok((Some(result), checks))
}

fn d4(cfg: &RunConfig, a: &D4Args) -> Result<Outcome, CliError> {
    let z = ComplexPoly::new(parse_complex_list(&a.z).map_err(usage)?);
    let av: [f64; 4] = parse_fixed(&a.a, "--a", parse_real).map_err(usage)?;
    let signs: [i8; 4] = parse_fixed(&a.signs, "--signs", |s| match s.trim() {
        "1" | "+1" | "+" => Ok(1),
        "-1" | "-" => Ok(-1),
        other => Err(format!("sign must be 1 or -1, got {other:?}")),
    })
    .map_err(usage)?;
    let index = |s: &str| s.trim().parse::<usize>().map_err(|_| format!("not an index: {s:?}"));
    let selector = if a.exhaustive {
        Selector::Exhaustive
    } else {
        Selector::Indices {
            zeros: parse_fixed(&a.zeros, "--zeros", index).map_err(usage)?,
            poles: parse_fixed(&a.poles, "--poles", index).map_err(usage)?,
        }
    };
    let curve = EllipticCurveData::new(z.clone()).map_err(usage)?;
    let cands = d4_candidates(&curve.z, &av, &signs).map_err(usage)?;
    let (div, residual) = match selector {
        Selector::Exhaustive => d4_exhaustive(&curve, &cands).map_err(usage)?,
        _ => {
            let div = d4_divisor_points(&curve, &av, &signs, selector).map_err(usage)?;
            let r = principality_residual(&curve, &div.zeros, &div.poles).map_err(usage)?;
            (div, r)
        }
    };
    let path_gap = div
        .zeros
        .iter()
        .chain(&div.poles)
        .map(|&p| abel_map(&curve, p).map(|v| v.path_gap))
        .collect::<Result<Vec<f64>, _>>()
        .map_err(usage)?
        .into_iter()
        .fold(0.0f64, f64::max);
    let mut result = json!({
        "periods": curve.periods,
        "zeros": div.zeros,
        "poles": div.poles,
        "zero_index": div.zero_index,
        "pole_index": div.pole_index,
        "residual": {
            "value": residual.value,
            "lattice_distance": residual.lattice_distance,
        },
        "path_gap": path_gap,
    });
    let mut checks = Vec::new();
    if let Some(idx) = a.solve_coeff {
        let opts = ConstraintOptions {
            tol: cfg.tol(cfg.delliptic.tol),
            ..ConstraintOptions::default()
        };
        let start = Selector::Indices {
            zeros: div.zero_index,
            poles: div.pole_index,
        };
        match constraint_solve(&z, idx, &av, &signs, start, &opts) {
            Ok(sol) => {
                result["solved_z"] = to_value(sol.z.coeffs());
                result["solved_residual"] = to_value(&sol.residual);
                checks.push(
                    Check::at_most(Module::Delliptic, "constraint", sol.residual.lattice_distance, opts.tol)
                        .with_detail(&json!({"iterations": sol.iterations})),
                );
            }
            Err(e) => checks.push(Check::failed(Module::Delliptic, "constraint", e)),
        }
    }
    Ok((Some(result), checks))
}

fn metrics(cfg: &RunConfig, a: &MetricsArgs) -> Result<Outcome, CliError> {
    let grid: Option<GridFunction> = match &a.grid {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            Some(serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?)
        }
        None => None,
    };
    if grid.is_some() && !matches!(a.check, MetricName::Toda) {
        return Err(usage("--grid applies only to --check toda"));
    }
    Ok((None, checks::metric_checks(cfg, a.check.into(), grid.as_ref())))
}

/// Writes the report once: to `out` if given, else to standard output.
pub fn emit(report: &Report, out: Option<&PathBuf>) -> Result<(), CliError> {
    let text = report.to_json();
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Write {
            path: path.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Write {
                path: "<stdout>".to_string(),
                message: e.to_string(),
            })
        }
    }
}
