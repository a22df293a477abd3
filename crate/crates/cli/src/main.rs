use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lpsq_core::experiments::{
    self, envelope_probe, fit_exponent, run_experiment, write_report, ExperimentConfig,
    ExperimentKind, NCoupling, ReportFormat,
};
use lpsq_core::hardy::{h1_norm, kx_split};
use lpsq_core::kernels::{Family, FamilySpec};
use lpsq_core::multipliers::{square_function, MultiplierSpec};
use lpsq_core::orlicz::{orlicz_norm_poly, weak_quasinorm, OrliczParams};
use lpsq_core::spectral::DEFAULT_OVERSAMPLE;
use lpsq_core::{corpus, Error, Result, TrigPoly};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "lpsq",
    version,
    about = "Littlewood-Paley square functions on the torus"
)]
struct Cli {
    /// Grid points per axis (power of two); for experiments, the per-axis
    /// budget.
    #[arg(long, global = true)]
    resolution: Option<usize>,
    /// Oversampling factor for Riemann-sum norms.
    #[arg(long, global = true)]
    oversample: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Experiment configuration as JSON; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Refuse grids with more points than this.
    #[arg(long, global = true, default_value_t = 1 << 22)]
    max_points: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the coefficients of a family member or a random polynomial.
    Gen(GenArgs),
    /// Apply a tensor multiplier to a polynomial.
    Apply {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        multiplier: PathBuf,
    },
    /// Evaluate one norm of a polynomial.
    Norm(NormArgs),
    /// Sample the square function on a grid.
    Sqfn {
        #[arg(long)]
        input: PathBuf,
    },
    /// Split an analytic polynomial at height lambda.
    KxSplit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        lambda: f64,
    },
    /// Square-function blow-up as p → 1.
    Rate(ExperimentArgs),
    /// Endpoint ratio against L log^r L.
    Zygmund(ExperimentArgs),
    /// Weak-type ratio against L log^{d-1} L.
    Weaktype(ExperimentArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    /// fejer, vallee_poussin, pichorides, zygmund_tensor or diagonal.
    #[arg(long, conflicts_with = "random")]
    family: Option<String>,
    #[arg(long, default_value_t = 4)]
    n: u32,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Random analytic polynomial with this many terms instead of a family.
    #[arg(long)]
    random: Option<usize>,
    /// Frequency box width for --random.
    #[arg(long, default_value_t = 32)]
    width: i64,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false, id = "quantity")]
struct NormQuantity {
    /// L^p norm.
    #[arg(long)]
    p: Option<f64>,
    /// L log^r L norm.
    #[arg(long)]
    orlicz: Option<f64>,
    /// Weak L^{1,∞} quasinorm.
    #[arg(long)]
    weak: bool,
    /// ‖f‖_1 + ‖Hf‖_1 (one-dimensional input).
    #[arg(long)]
    h1: bool,
}

#[derive(Args, Debug)]
struct NormArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    quantity: NormQuantity,
}

#[derive(Clone, Debug)]
struct PGrid(Vec<f64>);

/// Comma list of exponents; the empty string is an empty grid.
fn parse_p_grid(s: &str) -> std::result::Result<PGrid, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| format!("{t}: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(PGrid)
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long)]
    d: Option<usize>,
    /// Comma-separated exponents, strictly decreasing toward 1.
    #[arg(long, value_parser = parse_p_grid)]
    p: Option<PGrid>,
    /// reciprocal (capped by the resolution), strict, or a fixed N.
    #[arg(long)]
    coupling: Option<String>,
    #[arg(long)]
    n_min: Option<u32>,
    #[arg(long)]
    n_max: Option<u32>,
    /// Orlicz exponent for zygmund runs (defaults to d).
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    family: Option<String>,
    /// Random analytic inputs per row checked against the family envelope.
    #[arg(long, default_value_t = 0)]
    probe: usize,
    /// Print the fitted exponent of a rate run to stderr.
    #[arg(long)]
    fit: bool,
}

fn format(cli: &Cli, default: ReportFormat) -> Result<ReportFormat> {
    cli.format.as_deref().map_or(Ok(default), str::parse)
}

fn emit(cli: &Cli, bytes: &[u8]) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, bytes).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn read_poly(path: &Path) -> Result<TrigPoly> {
    TrigPoly::read_json(path)
}

fn oversample(cli: &Cli) -> usize {
    cli.oversample.unwrap_or(DEFAULT_OVERSAMPLE)
}

fn check_points(grid: &[usize], limit: usize) -> Result<()> {
    let points = grid.iter().map(|&r| r as u128).product::<u128>();
    if points > limit as u128 {
        return Err(Error::InvalidParameter(format!(
            "grid {grid:?} has {points} points, above --max-points {limit}"
        )));
    }
    Ok(())
}

fn json_bytes(value: &impl serde::Serialize) -> Result<Vec<u8>> {
    let mut buf = serde_json::to_vec_pretty(value)?;
    buf.push(b'\n');
    Ok(buf)
}

fn gen(cli: &Cli, args: &GenArgs) -> Result<()> {
    let poly = match args.random {
        Some(terms) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed.unwrap_or(0));
            corpus::random_analytic(&mut rng, args.d, args.width, terms)?
        }
        None => {
            let family: Family = args.family.as_deref().unwrap_or("pichorides").parse()?;
            FamilySpec::new(family, args.n, args.d)?.build()?
        }
    };
    emit(cli, &json_bytes(&poly.to_json())?)
}

fn apply(cli: &Cli, input: &Path, multiplier: &Path) -> Result<()> {
    let f = read_poly(input)?;
    let text = std::fs::read_to_string(multiplier).map_err(|source| Error::Io {
        path: multiplier.to_path_buf(),
        source,
    })?;
    let spec = MultiplierSpec::from_json_str(&text)?;
    emit(cli, &json_bytes(&spec.apply(&f)?.to_json())?)
}

fn norm(cli: &Cli, args: &NormArgs) -> Result<()> {
    let f = read_poly(&args.input)?;
    let os = oversample(cli);
    let q = &args.quantity;
    let (name, param, value) = if let Some(p) = q.p {
        ("lp", Some(p), f.lp_norm(p, os)?)
    } else if let Some(r) = q.orlicz {
        (
            "orlicz",
            Some(r),
            orlicz_norm_poly(&f, &OrliczParams::new(r), os)?,
        )
    } else if q.weak {
        let grid = f.norm_grid(os);
        check_points(&grid, cli.max_points)?;
        ("weak", None, weak_quasinorm(&f.synthesize(&grid)?))
    } else {
        ("h1", None, h1_norm(&f, os)?)
    };
    let bytes = match format(cli, ReportFormat::Csv)? {
        ReportFormat::Csv => {
            let p = param.map(|v| v.to_string()).unwrap_or_default();
            format!("quantity,param,value\n{name},{p},{value}\n").into_bytes()
        }
        ReportFormat::Json => {
            json_bytes(&json!({"quantity": name, "param": param, "value": value}))?
        }
    };
    emit(cli, &bytes)
}

fn sqfn(cli: &Cli, input: &Path) -> Result<()> {
    let f = read_poly(input)?;
    let grid = match cli.resolution {
        Some(r) => vec![r; f.dim()],
        None => f.norm_grid(oversample(cli)),
    };
    check_points(&grid, cli.max_points)?;
    let s = square_function(&f, &grid)?;
    let bytes = match format(cli, ReportFormat::Csv)? {
        ReportFormat::Csv => {
            let mut buf = Vec::new();
            s.write_csv(&mut buf)?;
            buf
        }
        ReportFormat::Json => {
            let values: Vec<f64> = s.samples().iter().map(|c| c.re).collect();
            json_bytes(&json!({"resolution": s.resolution(), "values": values}))?
        }
    };
    emit(cli, &bytes)
}

fn split(cli: &Cli, input: &Path, lambda: f64) -> Result<()> {
    let f = read_poly(input)?;
    let r = cli.resolution.unwrap_or(4096);
    let report = kx_split(&f, lambda, r)?.report();
    let bytes = match format(cli, ReportFormat::Json)? {
        ReportFormat::Json => json_bytes(&report)?,
        ReportFormat::Csv => format!(
            "lambda,h_sup,bullet1_C,bullet2_C,residual\n{},{},{},{},{}\n",
            report.lambda, report.h_sup, report.bullet1_c, report.bullet2_c, report.residual
        )
        .into_bytes(),
    };
    emit(cli, &bytes)
}

fn parse_coupling(s: &str) -> Result<NCoupling> {
    match s {
        "reciprocal" => Ok(NCoupling::Reciprocal),
        "strict" => Ok(NCoupling::Strict),
        other => other
            .parse::<u32>()
            .map(|n| NCoupling::Fixed { n })
            .map_err(|_| Error::InvalidParameter(format!("unknown coupling {other:?}"))),
    }
}

fn experiment_config(
    cli: &Cli,
    kind: ExperimentKind,
    a: &ExperimentArgs,
) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::read_json(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.experiment = kind;
    if let Some(d) = a.d {
        cfg.d = d;
    }
    if let Some(p) = &a.p {
        cfg.p_grid = p.0.clone();
    }
    if let Some(c) = &a.coupling {
        cfg.coupling = parse_coupling(c)?;
    }
    if let Some(n) = a.n_min {
        cfg.n_min = n;
    }
    if let Some(n) = a.n_max {
        cfg.n_max = n;
    }
    if a.r.is_some() {
        cfg.r = a.r;
    }
    if let Some(f) = &a.family {
        cfg.family = f.parse()?;
    }
    if let Some(r) = cli.resolution {
        cfg.resolution = r;
    }
    if let Some(o) = cli.oversample {
        cfg.oversample = o;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    cfg.max_points = cli.max_points;
    cfg.validate()?;
    Ok(cfg)
}

fn experiment(cli: &Cli, kind: ExperimentKind, a: &ExperimentArgs) -> Result<()> {
    let cfg = experiment_config(cli, kind, a)?;
    let table = run_experiment(&cfg)?;
    if a.fit && kind == ExperimentKind::Rate {
        let fit = fit_exponent(&table)?;
        eprintln!(
            "slope {} intercept {} max_residual {}",
            fit.slope, fit.intercept, fit.max_residual
        );
    }
    if a.probe > 0 {
        let probe = envelope_probe(&cfg, &table, a.probe)?;
        eprintln!(
            "envelope probe: {} inputs per row, worst ratio to family {}",
            probe.samples, probe.worst
        );
    }
    let fmt = format(cli, ReportFormat::Csv)?;
    match &cfg.out {
        Some(path) => experiments::emit_report(&table, fmt, path),
        None => {
            let mut buf = Vec::new();
            write_report(&table, fmt, &mut buf)?;
            emit(cli, &buf)
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gen(args) => gen(cli, args),
        Command::Apply { input, multiplier } => apply(cli, input, multiplier),
        Command::Norm(args) => norm(cli, args),
        Command::Sqfn { input } => sqfn(cli, input),
        Command::KxSplit { input, lambda } => split(cli, input, *lambda),
        Command::Rate(a) => experiment(cli, ExperimentKind::Rate, a),
        Command::Zygmund(a) => experiment(cli, ExperimentKind::Zygmund, a),
        Command::Weaktype(a) => experiment(cli, ExperimentKind::Weaktype, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
