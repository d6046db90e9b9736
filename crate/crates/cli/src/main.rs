//! Command-line front end: parse a declarative JSON config, dispatch to the
//! computational modules, and emit CSV/JSON artifacts.
//!
//! Exit codes: 0 success, 2 validation error (bad config, bad domain),
//! 3 numeric non-convergence. Every output starts with a header block
//! carrying the config hash, the crate version, and the seed where one
//! applies, so artifacts can be traced to their exact inputs.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ultraheat::config::{config_hash, parse_model, BuiltModel};
use ultraheat::walk::exact_return;
use ultraheat::{
    eigenfunction, laplacian_matrix, simulate_return, Error, HeatKernelEvaluator, Window,
};

#[derive(Parser)]
#[command(
    name = "ultraheat",
    version,
    about = "Hierarchical Laplacians on ultrametric spaces: certified heat kernels, oscillation envelopes, and random-walk validation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Heat kernel over a geometric time grid: CSV (t, value, errbound)
    Eval(RunArgs),
    /// Log-periodic envelope over one period: CSV (tau, A)
    Envelope(RunArgs),
    /// Envelope extrema across p: CSV (p, alpha, minA, maxA, minNormalized, maxNormalized)
    PadicScan(RunArgs),
    /// Kernel against the envelope pair: CSV (t, p, psi, Psi, p_over_psi, p_over_Psi)
    SinfEnvelope(RunArgs),
    /// Saddle state over a time grid: CSV (t, rbar, Delta1, Delta2, ratio)
    SinfSaddle(RunArgs),
    /// Monte-Carlo return estimation: CSV (n, empirical, stderr, exact, z) or JSON report
    Simulate(RunArgs),
    /// Doubling, order, and Legendre diagnostics: JSON
    Diagnose(RunArgs),
    /// Eigenfunction-identity residuals on a window: JSON
    MatrixCheck(RunArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON configuration document
    #[arg(long)]
    input: PathBuf,
    /// Output path (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Override the worker count of a walk config
    #[arg(long)]
    workers: Option<usize>,
    /// Override the seed of a walk config
    #[arg(long)]
    seed: Option<u64>,
    /// Relative tolerance for certified series evaluation
    #[arg(long, default_value_t = 1e-12)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-2)]
    t_min: f64,
    #[arg(long, default_value_t = 1e6)]
    t_max: f64,
    #[arg(long, default_value_t = 200)]
    t_points: usize,
    /// Samples per period for envelope output
    #[arg(long, default_value_t = 512)]
    points: usize,
    /// Fine level of the window for matrix-check
    #[arg(long, default_value_t = 0)]
    fine: i64,
    /// Root level of the window for matrix-check
    #[arg(long, default_value_t = 4)]
    root: i64,
}

type Runner = fn(&RunArgs, &str) -> Result<Output, Error>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, run): (&RunArgs, Runner) = match &cli.command {
        Command::Eval(a) => (a, run_eval),
        Command::Envelope(a) => (a, run_envelope),
        Command::PadicScan(a) => (a, run_padic_scan),
        Command::SinfEnvelope(a) => (a, run_sinf_envelope),
        Command::SinfSaddle(a) => (a, run_sinf_saddle),
        Command::Simulate(a) => (a, run_simulate),
        Command::Diagnose(a) => (a, run_diagnose),
        Command::MatrixCheck(a) => (a, run_matrix_check),
    };
    let raw = match std::fs::read_to_string(&args.input) {
        Ok(raw) => raw,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.input.display());
            return ExitCode::from(2);
        }
    };
    match run(args, &raw).and_then(|out| write_output(args, &raw, out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::Convergence { .. } | Error::Bracket { .. } => 3,
        _ => 2,
    }
}

/// Full-precision decimal formatting: 17 significant digits.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

enum Output {
    Csv {
        header: &'static str,
        rows: Vec<Vec<f64>>,
        seed: Option<u64>,
        extra: Vec<String>,
    },
    Json {
        data: serde_json::Value,
        seed: Option<u64>,
    },
}

fn write_output(args: &RunArgs, raw: &str, out: Output) -> Result<(), Error> {
    let hash = config_hash(raw);
    let version = env!("CARGO_PKG_VERSION");
    // tabular results honor --format json by carrying the same columns
    let out = match out {
        Output::Csv {
            header,
            rows,
            seed,
            extra,
        } if args.format == Format::Json => Output::Json {
            data: serde_json::json!({
                "columns": header.split(',').collect::<Vec<_>>(),
                "rows": rows,
                "notes": extra,
            }),
            seed,
        },
        other => other,
    };
    let mut buffer = Vec::new();
    match out {
        Output::Csv {
            header,
            rows,
            seed,
            extra,
        } => {
            let _ = writeln!(buffer, "# config-hash: {hash:016x}");
            let _ = writeln!(buffer, "# version: {version}");
            if let Some(seed) = seed {
                let _ = writeln!(buffer, "# seed: {seed}");
            }
            for line in extra {
                let _ = writeln!(buffer, "# {line}");
            }
            let _ = writeln!(buffer, "{header}");
            for row in rows {
                let line: Vec<String> = row.iter().map(|v| fmt(*v)).collect();
                let _ = writeln!(buffer, "{}", line.join(","));
            }
        }
        Output::Json { data, seed } => {
            let mut meta = serde_json::json!({
                "configHash": format!("{hash:016x}"),
                "version": version,
            });
            if let Some(seed) = seed {
                meta["seed"] = serde_json::json!(seed);
            }
            let body = serde_json::json!({ "meta": meta, "data": data });
            buffer = serde_json::to_vec_pretty(&body).expect("report serializes");
            buffer.push(b'\n');
        }
    }
    match &args.output {
        Some(path) => std::fs::write(path, buffer)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(&buffer)
            .map_err(|e| Error::Config(format!("cannot write stdout: {e}"))),
    }
}

fn geometric_grid(args: &RunArgs) -> Result<Vec<f64>, Error> {
    if !(args.t_min > 0.0 && args.t_max > args.t_min && args.t_points >= 2) {
        return Err(Error::config(
            "need 0 < t-min < t-max and at least 2 t-points",
        ));
    }
    let (lo, hi, n) = (args.t_min.ln(), args.t_max.ln(), args.t_points);
    Ok((0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .collect())
}

fn evaluator_for(model: &BuiltModel, rel_tol: f64) -> Result<HeatKernelEvaluator, Error> {
    match model {
        BuiltModel::Padic(m) => m.evaluator(rel_tol),
        BuiltModel::PadicMixed(m) => HeatKernelEvaluator::new(m.space(), m.profile(), rel_tol),
        BuiltModel::Sinf(m) => m.evaluator(rel_tol),
        BuiltModel::Space { space, profile } => {
            HeatKernelEvaluator::new(space.clone(), profile.clone(), rel_tol)
        }
        _ => Err(Error::config(
            "this subcommand needs a padic, padic-mixed, sinf, or space config",
        )),
    }
}

fn run_eval(args: &RunArgs, raw: &str) -> Result<Output, Error> {
    let model = parse_model(raw)?.build()?;
    let evaluator = evaluator_for(&model, args.rel_tol)?;
    let mut rows = Vec::new();
    for t in geometric_grid(args)? {
        let c = evaluator.diagonal(t)?;
        rows.push(vec![t, c.value, c.error_bound]);
    }
    Ok(Output::Csv {
        header: "t,value,errbound",
        rows,
        seed: None,
        extra: vec![],
    })
}

fn run_envelope(args: &RunArgs, raw: &str) -> Result<Output, Error> {
    let model = parse_model(raw)?.build()?;
    let padic = match model {
        BuiltModel::Padic(m) => m,
        _ => return Err(Error::config("envelope needs a padic config")),
    };
    let env = padic.envelope_extrema(args.points.max(64), 1e-11)?;
    Ok(Output::Csv {
        header: "tau,A",
        rows: env.samples.iter().map(|(t, a)| vec![*t, *a]).collect(),
        seed: None,
        extra: vec![
            format!("period: {}", fmt(env.period)),
            format!("min: {} at tau = {}", fmt(env.min_value), fmt(env.argmin)),
            format!("max: {} at tau = {}", fmt(env.max_value), fmt(env.argmax)),
        ],
    })
}

fn run_padic_scan(_args: &RunArgs, raw: &str) -> Result<Output, Error> {
    let model = parse_model(raw)?.build()?;
    let (alpha, ps) = match model {
        BuiltModel::PadicScan { alpha, ps } => (alpha, ps),
        _ => return Err(Error::config("padic-scan needs a padic-scan config")),
    };
    let rows = ultraheat::padic::large_p_scan(alpha, &ps)?;
    Ok(Output::Csv {
        header: "p,alpha,minA,maxA,minNormalized,maxNormalized",
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.p as f64,
                    r.alpha,
                    r.min_value,
                    r.max_value,
                    r.min_normalized,
                    r.max_normalized,
                ]
            })
            .collect(),
        seed: None,
        extra: vec![],
    })
}

fn run_sinf_envelope(args: &RunArgs, raw: &str) -> Result<Output, Error> {
    let model = parse_model(raw)?.build()?;
    let sinf = match model {
        BuiltModel::Sinf(m) => m,
        _ => return Err(Error::config("sinf-envelope needs a sinf config")),
    };
    let grid = geometric_grid(args)?;
    let scan = sinf.envelope_ratio_scan(&grid, args.rel_tol)?;
    Ok(Output::Csv {
        header: "t,p,psi,Psi,p_over_psi,p_over_Psi",
        rows: scan
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.t,
                    r.kernel,
                    r.lower,
                    r.upper,
                    r.kernel_over_lower,
                    r.kernel_over_upper,
                ]
            })
            .collect(),
        seed: None,
        extra: vec![
            format!("running-max p/Psi: {}", fmt(scan.max_kernel_over_upper)),
            format!("running-min p/psi: {}", fmt(scan.min_kernel_over_lower)),
        ],
    })
}

fn run_sinf_saddle(args: &RunArgs, raw: &str) -> Result<Output, Error> {
    let model = parse_model(raw)?.build()?;
    let sinf = match model {
        BuiltModel::Sinf(m) => m,
        _ => return Err(Error::config("sinf-saddle needs a sinf config")),
    };
    let mut rows = Vec::new();
    for t in geometric_grid(args)? {
        let s = sinf.saddle(t)?;
        let check = sinf.two_term_check(t, args.rel_tol)?;
        rows.push(vec![t, s.r_bar, s.delta1, s.delta2, check.ratio]);
    }
    Ok(Output::Csv {
        header: "t,rbar,Delta1,Delta2,ratio",
        rows,
        seed: None,
        extra: vec!["ratio column: full kernel over the two-term saddle sum".into()],
    })
}

fn run_simulate(args: &RunArgs, raw: &str) -> Result<Output, Error> {
    let model = parse_model(raw)?.build()?;
    let mut config = match model {
        BuiltModel::Walk(w) => w,
        _ => return Err(Error::config("simulate needs a walk config")),
    };
    if let Some(workers) = args.workers {
        config.workers = workers.max(1);
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    // exact spectral values recovered from the step law itself
    let profile = config.step.to_profile()?;
    let space = config.group.space()?;
    let exact: Vec<f64> = (1..=config.horizon)
        .map(|n| exact_return(n, &profile, &space, args.rel_tol))
        .collect::<Result<_, _>>()?;
    let report = simulate_return(&config, &exact)?;
    match args.format {
        Format::Csv => Ok(Output::Csv {
            header: "n,empirical,stderr,exact,z",
            rows: report
                .rows
                .iter()
                .map(|r| vec![r.n as f64, r.empirical, r.stderr, r.exact, r.z])
                .collect(),
            seed: Some(config.seed),
            extra: vec![format!("samples: {}", report.samples)],
        }),
        Format::Json => Ok(Output::Json {
            data: serde_json::to_value(&report).expect("report serializes"),
            seed: Some(config.seed),
        }),
    }
}

fn run_diagnose(args: &RunArgs, raw: &str) -> Result<Output, Error> {
    let model = parse_model(raw)?.build()?;
    let evaluator = evaluator_for(&model, args.rel_tol)?;
    let (scan_lo, scan_hi) = match evaluator.space().case() {
        ultraheat::CaseKind::BiInfinite => (-30i64, 30i64),
        ultraheat::CaseKind::OneSided => (1, 50),
    };
    let doubling = evaluator.doubling_report(scan_lo, scan_hi)?;
    let order = evaluator.order_estimate(&geometric_grid(args)?)?;
    let t = args.t_max;
    let m_star = evaluator.legendre_transform(t)?;
    let log_inv = -evaluator.diagonal(t)?.value.ln();
    let data = serde_json::json!({
        "doubling": doubling,
        "order": order,
        "legendre": {
            "t": t,
            "mStar": m_star,
            "logInverseKernel": log_inv,
            "ratio": log_inv / m_star,
        },
    });
    Ok(Output::Json { data, seed: None })
}

fn run_matrix_check(args: &RunArgs, raw: &str) -> Result<Output, Error> {
    let model = parse_model(raw)?.build()?;
    let (space, profile) = match model {
        BuiltModel::Space { space, profile } => (space, profile),
        BuiltModel::Padic(m) => (m.space(), m.profile()),
        BuiltModel::Sinf(m) => (m.space(), m.profile()),
        _ => {
            return Err(Error::config(
                "matrix-check needs a space, padic, or sinf config",
            ))
        }
    };
    let window = Window::new(&space, args.fine, args.root)?;
    let operator = laplacian_matrix(&space, &profile, &window)?;
    let mut worst = 0.0f64;
    let mut per_level = Vec::new();
    for level in args.fine..args.root {
        let mut level_worst = 0.0f64;
        for ball in window.balls_at_level(level)? {
            let f = eigenfunction(&space, &window, &ball)?;
            let lam = profile.lambda(level + 1)?;
            let lf = operator.apply(&f)?;
            let resid = lf
                .values()
                .iter()
                .zip(f.values())
                .fold(0.0f64, |m, (l, v)| m.max((l - lam * v).abs()))
                / lam;
            level_worst = level_worst.max(resid);
        }
        worst = worst.max(level_worst);
        per_level.push(serde_json::json!({
            "level": level,
            "maxRelativeResidual": level_worst,
        }));
    }
    let pass = worst <= 1e-12;
    let data = serde_json::json!({
        "leaves": window.leaves(),
        "fine": args.fine,
        "root": args.root,
        "perLevel": per_level,
        "maxRelativeResidual": worst,
        "pass": pass,
    });
    if !pass {
        // still write the report, but fail loudly through the exit code path
        eprintln!("matrix-check: eigen-identity residual {worst:e} exceeds 1e-12");
    }
    Ok(Output::Json { data, seed: None })
}
