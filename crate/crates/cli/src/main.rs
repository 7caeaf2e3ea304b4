//! `hypoell` command-line front end.
//!
//! Exit codes: 0 success, 1 analysis failed (residual above tolerance, no
//! witness), 2 malformed config or input, 3 not solvable or undetermined
//! without `--force`, 4 near-resonant frequency.

mod config;
mod expr;
mod output;

use std::f64::consts::PI;
use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hypoell::classify::{classify, symbol_zero_set};
use hypoell::exec::Execution;
use hypoell::mixedfft::{decay_report, decay_report_field, Transforms};
use hypoell::solve::solve;
use hypoell::witness::{sign_change_witness, zero_symbol_witness};
use hypoell::{io, CylinderGrid, Error, Field, C64};
use serde::Serialize;

use config::RunConfig;
use output::{to_json, OutDir};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("output: {0}")]
    Output(String),
    #[error(transparent)]
    Core(#[from] Error),
    /// Analysis ran but did not succeed; outputs may have been written.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Failed(_) => 1,
            CliError::Core(e) => match e {
                Error::DomainTooSmall { .. }
                | Error::InvalidGrid(_)
                | Error::DimensionMismatch { .. }
                | Error::Precondition(_)
                | Error::Parse(_)
                | Error::NotReal(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::Csv(_) => 2,
                Error::NotSolvable(_) | Error::Undetermined => 3,
                Error::NearResonant { .. } => 4,
                _ => 1,
            },
        }
    }
}

#[derive(Parser)]
#[command(name = "hypoell", version, about = "Global hypoellipticity and solvability of first-order operators on the cylinder")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's `output`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the operator: SGH verdict, solvability verdict, singular set.
    Classify(Common),
    /// Solve Lu = f and write u.csv and outcome.json.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Attempt operators classified undetermined.
        #[arg(long)]
        force: bool,
        /// Project f onto the compatible subspace first.
        #[arg(long)]
        project: bool,
    },
    /// Construct a counterexample and fit the decay of the induced solution.
    Witness(Common),
    /// Run the transform identity suite and print the maximal errors.
    Roundtrip {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Decay report of a field CSV.
    Report {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Field CSV (overrides the config's `field`).
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execution() -> Result<Execution, CliError> {
    let Ok(raw) = std::env::var("HYPOELL_THREADS") else {
        return Ok(Execution::default());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("HYPOELL_THREADS must be a positive integer, got {raw:?}")))?;
    if n == 1 {
        return Ok(Execution::Sequential);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    Ok(Execution::Parallel)
}

fn out_dir(flag: Option<PathBuf>, cfg: Option<&RunConfig>) -> Result<OutDir, CliError> {
    let path = flag
        .or_else(|| cfg.and_then(|c| c.output.as_ref().map(|p| c.resolve(p))))
        .unwrap_or_else(|| PathBuf::from("."));
    OutDir::create(path)
}

fn cmd_classify(common: Common) -> Result<(), CliError> {
    let cfg = RunConfig::load(&common.config)?;
    cfg.grid()?;
    let op = cfg.operator()?;
    let verdict = classify(&op, cfg.tolerances.xi_max);
    let out = out_dir(common.out, Some(&cfg))?;
    print!("{}", out.json("verdict.json", &verdict)?);
    Ok(())
}

fn cmd_solve(common: Common, force: bool, project: bool, exec: Execution) -> Result<(), CliError> {
    let cfg = RunConfig::load(&common.config)?;
    let grid = cfg.grid()?;
    let op = cfg.operator()?;
    let f = cfg.rhs(grid)?;
    let opts = hypoell::solve::SolveOptions {
        exec,
        force,
        project,
        ..cfg.solve_options()
    };
    let outcome = match solve(&op, &f, &opts) {
        Err(Error::NotSolvable(cert)) => {
            println!("{cert}");
            return Err(Error::NotSolvable(cert).into());
        }
        other => other?,
    };
    let out = out_dir(common.out, Some(&cfg))?;
    out.csv("u.csv", |w| io::write_field(w, &outcome.u))?;
    print!("{}", out.json("outcome.json", &outcome)?);
    if outcome.converged() {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "residual {:e} above tolerance {:e}",
            outcome.residual, outcome.tolerance
        )))
    }
}

#[derive(Serialize)]
struct SignChangeSummary<'a> {
    kind: &'static str,
    exponent: f64,
    k_min: f64,
    xi_range: [f64; 2],
    f_hat_schwartz_like: bool,
    f_hat_decay: &'a hypoell::DecayReport,
}

#[derive(Serialize)]
struct ZeroSymbolSummary<'a> {
    kind: &'static str,
    k0: i64,
    xi0: f64,
    schwartz_like: bool,
    decay: &'a hypoell::DecayReport,
}

fn cmd_witness(common: Common, exec: Execution) -> Result<(), CliError> {
    let cfg = RunConfig::load(&common.config)?;
    let grid = cfg.grid()?;
    let op = cfg.operator()?;
    let tr = Transforms::new(grid, exec);
    let w = &cfg.witness;
    let tol = &cfg.tolerances;
    let sign_change = match sign_change_witness(&op, w.variant.into(), grid) {
        Ok(sc) => Some(sc),
        Err(Error::Precondition(msg)) => {
            eprintln!("sign-change witness unavailable: {msg}");
            None
        }
        Err(e) => return Err(e.into()),
    };
    let out = out_dir(common.out, Some(&cfg))?;
    if let Some(sc) = sign_change {
        let rep = decay_report(&tr.forward_t(&sc.f_hat), tol.n_max, tol.decay_threshold)?;
        let fit = sc.decay_fit(w.xi_min, w.xi_max, w.count);
        let curve: Vec<(f64, f64)> = fit.xis.iter().copied().zip(fit.values.iter().copied()).collect();
        out.csv("f_hat.csv", |wr| io::write_half(wr, &sc.f_hat))?;
        out.csv("u_decay.csv", |wr| io::write_curve(wr, ["xi", "u"], &curve))?;
        out.json("recipe.json", &sc.recipe)?;
        let summary = SignChangeSummary {
            kind: "sign_change_bump",
            exponent: fit.exponent,
            k_min: fit.k_min,
            xi_range: [w.xi_min, w.xi_max],
            f_hat_schwartz_like: rep.schwartz_like,
            f_hat_decay: &rep,
        };
        print!("{}", out.json("witness.json", &summary)?);
        return Ok(());
    }
    // Plane wave or kernel element at a grid frequency on the zero set.
    let sigma = symbol_zero_set(op.c0(), op.q0());
    let mut candidates = sigma.points_within(grid.xi_nyquist() * 0.9);
    if let Some((_, xi)) = sigma.zero_frequency(op.c0(), op.q0()) {
        candidates.insert(0, xi);
    }
    for xi0 in candidates {
        let k0 = -(op.c0().re * xi0 + op.q0().im).round() as i64;
        let Ok((v, recipe)) = zero_symbol_witness(&op, grid, k0, xi0) else {
            continue;
        };
        let rep = decay_report_field(&tr, &v, tol.n_max, tol.decay_threshold)?;
        out.csv("v.csv", |wr| io::write_field(wr, &v))?;
        out.json("recipe.json", &recipe)?;
        let summary = ZeroSymbolSummary {
            kind: "zero_symbol",
            k0,
            xi0,
            schwartz_like: rep.schwartz_like,
            decay: &rep,
        };
        print!("{}", out.json("witness.json", &summary)?);
        return Ok(());
    }
    Err(CliError::Failed(
        "no witness: b keeps its sign and no zero of the symbol lies on the grid".into(),
    ))
}

#[derive(Serialize)]
struct RoundtripReport {
    grid: CylinderGrid,
    x_roundtrip: f64,
    t_roundtrip: f64,
    gaussian_pair: f64,
    dt_eigenfunction: f64,
    dx_gaussian: f64,
    pass: bool,
}

fn cmd_roundtrip(config: Option<PathBuf>, exec: Execution) -> Result<(), CliError> {
    let grid = match config {
        Some(p) => RunConfig::load(&p)?.grid()?,
        None => CylinderGrid::default(),
    };
    let tr = Transforms::new(grid, exec);
    let gauss = |x: f64| (-x * x / 2.0).exp();
    let (mut x_err, mut t_err) = (0.0f64, 0.0f64);
    for m in 0..8 {
        let (shift, width, k) = (0.5 * m as f64 - 2.0, 0.8 + 0.05 * m as f64, m as f64 - 3.0);
        let f = Field::from_fn(grid, move |t, x| {
            C64::from_polar((-(x - shift).powi(2) / (2.0 * width * width)).exp(), k * t + 0.4 * t.cos())
                * (1.0 + 0.3 * (2.0 * t).sin())
        });
        let hat = tr.forward_x(&f)?;
        x_err = x_err.max(tr.inverse_x(&hat).max_diff(&f) / f.max_abs());
        t_err = t_err.max(tr.inverse_t(&tr.forward_t(&hat)).max_diff(&hat) / hat.max_abs());
    }
    let g = Field::from_fn(grid, |_, x| C64::new(gauss(x), 0.0));
    let g_hat = tr.forward_x(&g)?;
    let root = (2.0 * PI).sqrt();
    let mut pair: f64 = 0.0;
    for j in 0..grid.n_x {
        let xi = grid.xi(j);
        if xi.abs() <= 8.0 {
            pair = pair.max((g_hat.get(0, j) - root * gauss(xi)).norm() / root);
        }
    }
    let mode = Field::from_fn(grid, |t, x| C64::from_polar(gauss(x), t));
    let dt = tr.dt_field(&mode).max_diff(&mode.scale(C64::new(0.0, 1.0)));
    let dx_expect = Field::from_fn(grid, |_, x| C64::new(-x * gauss(x), 0.0));
    let dx = tr.dx_field(&g).max_diff(&dx_expect);
    let rep = RoundtripReport {
        grid,
        x_roundtrip: x_err,
        t_roundtrip: t_err,
        gaussian_pair: pair,
        dt_eigenfunction: dt,
        dx_gaussian: dx,
        pass: x_err < 1e-10 && t_err < 1e-10 && pair < 1e-10 && dt < 1e-8 && dx < 1e-8,
    };
    print!("{}", to_json(&rep)?);
    if rep.pass {
        Ok(())
    } else {
        Err(CliError::Failed("transform identities above tolerance".into()))
    }
}

fn cmd_report(
    config: Option<PathBuf>,
    input: Option<PathBuf>,
    out: Option<PathBuf>,
    exec: Execution,
) -> Result<(), CliError> {
    let cfg = config.as_deref().map(RunConfig::load).transpose()?;
    let path = input
        .or_else(|| cfg.as_ref().and_then(|c| c.field.as_ref().map(|p| c.resolve(p))))
        .ok_or_else(|| CliError::Config("no field CSV: pass --input or set \"field\"".into()))?;
    let file = File::open(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let f = io::read_field(file)?;
    let tol = cfg.as_ref().map(|c| c.tolerances).unwrap_or_default();
    let tr = Transforms::new(f.grid, exec);
    let rep = decay_report_field(&tr, &f, tol.n_max, tol.decay_threshold)?;
    let dir = out_dir(out, cfg.as_ref())?;
    print!("{}", dir.json("report.json", &rep)?);
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let exec = execution()?;
    match cli.command {
        Command::Classify(common) => cmd_classify(common),
        Command::Solve {
            common,
            force,
            project,
        } => cmd_solve(common, force, project, exec),
        Command::Witness(common) => cmd_witness(common, exec),
        Command::Roundtrip { config } => cmd_roundtrip(config, exec),
        Command::Report { config, input, out } => cmd_report(config, input, out, exec),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hypoell: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
