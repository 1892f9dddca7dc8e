//! Command-line front end for the `ncball` library.
//!
//! Every subcommand reads JSON, drives the solvers, and emits one JSON
//! document — to stdout, or to `--out` — that is byte-identical across
//! reruns with the same inputs and seed. A fixed-width summary table goes
//! to stderr for human eyes; the JSON is the source of truth.
//!
//! Exit codes: 0 when every check passes, 2 for unreadable input or bad
//! flags, 3 when well-formed input fails validation or a verification
//! check, 4 when a numerical routine breaks down.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use ncball::acceptance::run_all_with;
use ncball::fock::enumerate_words;
use ncball::gen::{random_schur_series, random_series, rescale_h2, seeded};
use ncball::lifting::{
    build_omega, minimal_isometric_dilation, solve_with_omega, validate_data, verify_interpolant,
    zero_lift_parameter, LiftingData,
};
use ncball::linalg::{identity, max_abs, zeros, MatrixJson};
use ncball::majorant::{defect_residual, is_subpluriharmonic, least_majorant, CurveSampler};
use ncball::report::{retune, Check, Report};
use ncball::schur::{j_forward, j_inverse, reconstruct_theta};
use ncball::series::{coefficient_distance, FreeSeries, OperatorTuple};

#[derive(Parser)]
#[command(
    name = "ncball",
    version,
    about = "Free-analysis toolbox on truncated Fock spaces: least pluriharmonic majorants, \
             Schur-column parametrizations, isometric dilations, and multivariable commutant lifting",
    after_help = "Exit codes: 0 all checks pass; 2 unreadable input or invalid flags; \
                  3 validation or verification failure; 4 numerical breakdown.\n\
                  Set NCBALL_THREADS to cap worker threads. Identical inputs and seed \
                  produce byte-identical JSON output."
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Least pluriharmonic majorant of |Θ|² with its defect identity checked on the radius grid
    Majorant {
        /// JSON file holding the series Θ
        #[arg(value_name = "THETA_JSON")]
        theta: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Solve a lifting problem {A, T, C, Q} and verify the interpolant
    Lift {
        /// JSON file holding the data {"A", "T", "C", "Q"}
        #[arg(value_name = "DATA_JSON")]
        data: PathBuf,
        /// Free parameter: "zero", "random" (one per trial), or a series file
        #[arg(long, default_value = "zero", value_name = "zero|random|FILE")]
        param: String,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Minimal isometric dilation of a row contraction
    Dilate {
        /// JSON file holding the tuple under key "T" (other keys are ignored)
        #[arg(value_name = "TUPLE_JSON")]
        tuple: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Round-trip random Schur columns through their free parametrization
    SchurRoundtrip {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Run the built-in verification suite (problem sizes are pinned; seed and tolerances apply)
    Selftest {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    /// Letters of the free algebra for generated problems (file-driven commands read it from the file)
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Truncation degree of the Fock space
    #[arg(long, default_value_t = 4)]
    m: usize,
    /// Comma-separated evaluation radii in [0, 1]
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.25, 0.5, 0.75, 0.9, 1.0])]
    grid: Vec<f64>,
    /// How far below zero an eigenvalue floor may dip
    #[arg(long = "tol-eig", default_value_t = ncball::TOL_EIG)]
    tol_eig: f64,
    /// Ceiling for residual checks
    #[arg(long = "tol-res", default_value_t = ncball::TOL_RES)]
    tol_res: f64,
    /// Seed for every randomized draw
    #[arg(long, default_value_t = 271828)]
    seed: u64,
    /// Number of randomized trials
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Write the JSON document to this file instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// One validated run configuration, echoed into every JSON document.
#[derive(Debug, Clone, Serialize)]
struct RunConfig {
    n: usize,
    m: usize,
    r_grid: Vec<f64>,
    tol_eig: f64,
    tol_residual: f64,
    seed: u64,
    trials: usize,
}

impl RunConfig {
    fn validated(args: &ConfigArgs) -> Result<RunConfig, Failure> {
        if args.n < 1 {
            return Err(Failure::usage("--n must be at least 1"));
        }
        if args.m < 1 {
            return Err(Failure::usage("--m must be at least 1"));
        }
        for &r in &args.grid {
            if !(0.0..=1.0).contains(&r) {
                return Err(Failure::usage(format!("grid radius {r} lies outside [0, 1]")));
            }
        }
        for (flag, value) in [("--tol-eig", args.tol_eig), ("--tol-res", args.tol_res)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Failure::usage(format!("{flag} must be a positive finite number")));
            }
        }
        if args.trials < 1 {
            return Err(Failure::usage("--trials must be at least 1"));
        }
        Ok(RunConfig {
            n: args.n,
            m: args.m,
            r_grid: args.grid.clone(),
            tol_eig: args.tol_eig,
            tol_residual: args.tol_res,
            seed: args.seed,
            trials: args.trials,
        })
    }
}

/// A terminal failure: message to stderr, code to the shell.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }

    fn validation(message: impl Into<String>) -> Failure {
        Failure { code: 3, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Failure {
        Failure { code: 4, message: message.into() }
    }
}

impl From<ncball::Error> for Failure {
    fn from(e: ncball::Error) -> Failure {
        let code = if matches!(e, ncball::Error::Numerical(_)) { 4 } else { 3 };
        Failure { code, message: e.to_string() }
    }
}

/// What a subcommand produced: the JSON document, the stderr tables, and
/// whether every check passed.
struct Outcome {
    json: String,
    tables: String,
    pass: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let (args, outcome) = match cli.command {
        Cmd::Majorant { theta, config } => {
            let rc = RunConfig::validated(&config)?;
            (config, cmd_majorant(&theta, &rc)?)
        }
        Cmd::Lift { data, param, config } => {
            let rc = RunConfig::validated(&config)?;
            (config, cmd_lift(&data, &param, &rc)?)
        }
        Cmd::Dilate { tuple, config } => {
            let rc = RunConfig::validated(&config)?;
            (config, cmd_dilate(&tuple, &rc)?)
        }
        Cmd::SchurRoundtrip { config } => {
            let rc = RunConfig::validated(&config)?;
            (config, cmd_schur_roundtrip(&rc)?)
        }
        Cmd::Selftest { config } => {
            let rc = RunConfig::validated(&config)?;
            (config, cmd_selftest(&rc)?)
        }
    };
    eprint!("{}", outcome.tables);
    match &args.out {
        Some(path) => fs::write(path, &outcome.json)
            .map_err(|e| Failure::internal(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{}", outcome.json),
    }
    Ok(if outcome.pass { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

/// Honor NCBALL_THREADS as a cap on the worker pool; silently keep the
/// default when unset, warn and keep the default when unparseable.
fn configure_threads() {
    if let Ok(raw) = std::env::var("NCBALL_THREADS") {
        match raw.trim().parse::<usize>() {
            Ok(k) if k >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
            _ => eprintln!("warning: NCBALL_THREADS={raw:?} is not a positive integer; ignored"),
        }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::usage(format!("{what} does not parse: {e}")))
}

fn to_pretty<T: Serialize>(doc: &T) -> Result<String, Failure> {
    let mut text = serde_json::to_string_pretty(doc)
        .map_err(|e| Failure::internal(format!("cannot serialize output: {e}")))?;
    text.push('\n');
    Ok(text)
}

#[derive(Serialize)]
struct MajorantDoc {
    config: RunConfig,
    #[serde(rename = "Theta")]
    theta: FreeSeries,
    #[serde(rename = "W")]
    majorant: FreeSeries,
    report: Report,
}

/// Least pluriharmonic majorant of |Θ|²: compute W, measure the defect
/// identity on every grid radius, and test sub-pluriharmonicity of the
/// curve r ↦ Θ(rR)*Θ(rR) against the grid's largest radius.
fn cmd_majorant(path: &Path, config: &RunConfig) -> Result<Outcome, Failure> {
    let theta: FreeSeries = parse_json(&read_input(path)?, "series file")?;
    let basis = enumerate_words(theta.n(), config.m)?;
    let majorant = least_majorant(&theta, &basis)?;
    let mut report = Report::new("least-pluriharmonic-majorant");
    for &r in &config.r_grid {
        report.push(Check::residual(
            format!("defect-identity r={r}"),
            defect_residual(&theta, r, &basis)?,
            config.tol_residual,
        ));
    }
    let gamma = config.r_grid.iter().fold(0.0f64, |a, &b| a.max(b));
    if gamma > 0.0 {
        let curve = CurveSampler::squared_modulus(&theta, &basis);
        report.merge(is_subpluriharmonic(&curve, &config.r_grid, gamma, &basis, config.tol_eig)?);
    }
    let tables = report.render_table();
    let pass = report.pass();
    let doc = MajorantDoc { config: config.clone(), theta, majorant, report };
    Ok(Outcome { json: to_pretty(&doc)?, tables, pass })
}

#[derive(Serialize)]
struct SolutionDoc {
    #[serde(rename = "B")]
    b: MatrixJson,
    #[serde(rename = "Theta")]
    theta: FreeSeries,
    report: Report,
}

#[derive(Serialize)]
struct LiftDoc {
    config: RunConfig,
    validation: Report,
    solutions: Vec<SolutionDoc>,
}

/// Solve the lifting problem for one or many free parameters and replay the
/// defining constraints on every interpolant.
fn cmd_lift(path: &Path, param: &str, config: &RunConfig) -> Result<Outcome, Failure> {
    let data: LiftingData = parse_json(&read_input(path)?, "lifting data file")?;
    let validation = validate_data(&data);
    if let Some(bad) = validation.checks.iter().find(|c| !c.pass) {
        eprint!("{}", validation.render_table());
        return Err(Failure::validation(format!(
            "lifting data fails the {} invariant (residual {:.3e})",
            bad.name, bad.residual
        )));
    }
    let basis = enumerate_words(data.n(), config.m)?;
    let pair = build_omega(&data)?;
    let dil = minimal_isometric_dilation(data.t(), &basis)?;
    let params: Vec<FreeSeries> = match param {
        "zero" => vec![zero_lift_parameter(&pair, &basis)],
        "random" => {
            let mut rng = seeded(config.seed);
            let (_, u_os) = pair.adjoint_defect();
            let deg = config.m.min(2);
            (0..config.trials)
                .map(|_| {
                    random_schur_series(
                        &mut rng,
                        data.n(),
                        u_os.ncols(),
                        pair.complement_rank(),
                        deg,
                        true,
                        0.9,
                    )
                })
                .collect()
        }
        file => vec![parse_json(&read_input(Path::new(file))?, "parameter file")?],
    };
    let solved: Vec<ncball::Result<(_, Report)>> = params
        .par_iter()
        .map(|p| {
            let sol = solve_with_omega(&data, &pair, p, &basis)?;
            let mut rep = verify_interpolant(&data, &sol.b, &dil)?;
            retune(&mut rep, config.tol_eig, config.tol_residual);
            Ok((sol, rep))
        })
        .collect();
    let mut tables = validation.render_table();
    let mut pass = true;
    let mut solutions = Vec::with_capacity(solved.len());
    for (i, item) in solved.into_iter().enumerate() {
        let (sol, mut rep) = item?;
        rep.title = format!("solution-{}", i + 1);
        tables.push('\n');
        tables.push_str(&rep.render_table());
        pass &= rep.pass();
        solutions.push(SolutionDoc {
            b: MatrixJson::from_matrix(&sol.b),
            theta: sol.theta,
            report: rep,
        });
    }
    let doc = LiftDoc { config: config.clone(), validation, solutions };
    Ok(Outcome { json: to_pretty(&doc)?, tables, pass })
}

#[derive(Deserialize)]
struct TupleFile {
    #[serde(rename = "T")]
    t: Vec<MatrixJson>,
}

#[derive(Serialize)]
struct DilateDoc {
    config: RunConfig,
    dim_h: usize,
    defect_rank: usize,
    k_dim: usize,
    #[serde(rename = "V")]
    v: Vec<MatrixJson>,
    report: Report,
}

/// Minimal isometric dilation of a row contraction: the dilated tuple must
/// reproduce the contraction in its top rows exactly and act jointly
/// isometrically on the block where the truncated shift is isometric.
fn cmd_dilate(path: &Path, config: &RunConfig) -> Result<Outcome, Failure> {
    let raw: TupleFile = parse_json(&read_input(path)?, "tuple file")?;
    let mats = raw
        .t
        .iter()
        .map(MatrixJson::to_matrix)
        .collect::<ncball::Result<Vec<_>>>()
        .map_err(|e| Failure::usage(format!("tuple file does not parse: {e}")))?;
    let tuple = OperatorTuple::new(mats)?;
    let basis = enumerate_words(tuple.n(), config.m)?;
    let dil = minimal_isometric_dilation(&tuple, &basis)?;
    let (n, h, k) = (tuple.n(), tuple.dim(), dil.k_dim());

    let mut report = Report::new("minimal-isometric-dilation");
    let mut worst_rows = 0.0f64;
    for i in 0..n {
        let mut expected = zeros(h, k);
        expected.view_mut((0, 0), (h, h)).copy_from(tuple.entry(i));
        let top = dil.v().entry(i).rows(0, h).into_owned();
        worst_rows = worst_rows.max(max_abs(&(top - expected)));
    }
    report.push(Check::residual("compression-rows", worst_rows, 0.0));
    let p = dil.safe_projection();
    let mut worst_iso = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let mut gram = dil.v().entry(i).adjoint() * dil.v().entry(j);
            if i == j {
                gram -= identity(k);
            }
            worst_iso = worst_iso.max(max_abs(&(&p * &gram * &p)));
        }
    }
    report.push(Check::residual("joint-isometry-safe-block", worst_iso, 1e-12));

    let tables = report.render_table();
    let pass = report.pass();
    let doc = DilateDoc {
        config: config.clone(),
        dim_h: h,
        defect_rank: dil.defect_rank(),
        k_dim: k,
        v: dil.v().entries().iter().map(MatrixJson::from_matrix).collect(),
        report,
    };
    Ok(Outcome { json: to_pretty(&doc)?, tables, pass })
}

#[derive(Serialize)]
struct RoundtripDoc {
    config: RunConfig,
    report: Report,
}

/// Drive random strict contractions and free parameters through the Schur
/// column and back; both legs must return to their inputs through one
/// degree below the truncation.
fn cmd_schur_roundtrip(config: &RunConfig) -> Result<Outcome, Failure> {
    let basis = enumerate_words(config.n, config.m)?;
    let deg = config.m.saturating_sub(1).min(2);
    let k = 2usize;
    let mut rng = seeded(config.seed);
    let draws: Vec<(FreeSeries, Vec<FreeSeries>)> = (0..config.trials)
        .map(|_| {
            let theta = rescale_h2(&random_series(&mut rng, config.n, k, k, deg, true), 0.9);
            let stacked = random_schur_series(&mut rng, config.n, config.n * k, k, deg, true, 0.9);
            let phi = stacked.row_blocks(&vec![k; config.n])?;
            Ok((theta, phi))
        })
        .collect::<ncball::Result<_>>()?;
    let through = config.m - 1;
    let gaps: Vec<ncball::Result<(f64, f64)>> = draws
        .par_iter()
        .map(|(theta, phi)| {
            let col = j_forward(theta, phi, &basis)?;
            let rebuilt = reconstruct_theta(&col, &basis)?;
            let series_gap = coefficient_distance(&rebuilt, theta, through)?;
            let back = j_inverse(theta, &col, &basis)?;
            let mut param_gap = 0.0f64;
            for (p, q) in phi.iter().zip(&back) {
                param_gap = param_gap.max(coefficient_distance(p, q, through)?);
            }
            Ok((series_gap, param_gap))
        })
        .collect();
    let mut report = Report::new("schur-column-round-trips");
    for (t, item) in gaps.into_iter().enumerate() {
        let (series_gap, param_gap) = item?;
        report.push(Check::residual(
            format!("series-round-trip trial={}", t + 1),
            series_gap,
            config.tol_residual,
        ));
        report.push(Check::residual(
            format!("parameter-round-trip trial={}", t + 1),
            param_gap,
            config.tol_residual,
        ));
    }
    let tables = report.render_table();
    let pass = report.pass();
    let doc = RoundtripDoc { config: config.clone(), report };
    Ok(Outcome { json: to_pretty(&doc)?, tables, pass })
}

#[derive(Serialize)]
struct SelftestDoc {
    config: RunConfig,
    criteria: Vec<Report>,
}

/// The full verification suite at its pinned problem sizes, re-judged
/// against the configured tolerances. Near machine epsilon the honest
/// rounding in the measured residuals shows up as failures; that
/// sensitivity is intended, not a defect.
fn cmd_selftest(config: &RunConfig) -> Result<Outcome, Failure> {
    let criteria = run_all_with(config.seed, config.tol_eig, config.tol_residual)?;
    let mut tables = String::new();
    let mut pass = true;
    for report in &criteria {
        pass &= report.pass();
        tables.push_str(&report.render_table());
        tables.push('\n');
    }
    let doc = SelftestDoc { config: config.clone(), criteria };
    Ok(Outcome { json: to_pretty(&doc)?, tables, pass })
}
