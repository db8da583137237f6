use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use quench_rqa::ed::equivalence_check;
use quench_rqa::pipeline::{
    export_single, parse_window, read_series_csv, rescale_time, run_sweep, select_window,
    series_csv, SweepConfig, SWEEP_CSV,
};
use quench_rqa::recurrence::{rp_csv, threshold_by_rate, distance_matrix, embed, write_text, EmbeddingConfig, Metric};
use quench_rqa::tfim::{simulate_series, Observable, QuenchSpec};
use quench_rqa::{Error, Result};

#[derive(Parser)]
#[command(name = "quench-rqa", version, about = "Transverse-field Ising quench dynamics and recurrence analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a correlator on the time grid and write it as CSV.
    Simulate(SimulateArgs),
    /// Recurrence plot and line statistics of one series column.
    Rp(RpArgs),
    /// Parameter sweep over h; writes sweep.csv and optional images.
    Sweep(SweepArgs),
    /// Compare the free-fermion engine with exact diagonalization.
    OracleCheck(OracleArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 128)]
    size: usize,
    #[arg(long)]
    h: f64,
    #[arg(long, default_value_t = 500.0)]
    t_max: f64,
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
    #[arg(long, default_value = "xx")]
    observable: Observable,
    /// Comma-separated distances.
    #[arg(long, default_value = "1", value_delimiter = ',')]
    distances: Vec<usize>,
    /// Output CSV file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long, default_value_t = 1)]
    embed_dim: usize,
    #[arg(long, default_value_t = 1)]
    embed_delay: usize,
    #[arg(long, default_value = "euclidean")]
    metric: Metric,
}

#[derive(Args)]
struct RpArgs {
    /// Series CSV with a leading `t` column.
    #[arg(long)]
    input: PathBuf,
    /// Value column; defaults to the first one after `t`.
    #[arg(long)]
    column: Option<String>,
    #[arg(long, default_value_t = 0.10)]
    rr: f64,
    /// Half-open time window LO:HI.
    #[arg(long)]
    window: Option<String>,
    /// Rescale time by min(h, 1) before windowing.
    #[arg(long)]
    rescale: Option<f64>,
    #[command(flatten)]
    embed: EmbedArgs,
    /// Also write the full recurrence matrix as rp.csv.
    #[arg(long)]
    matrix_csv: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    rr: Option<String>,
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    rescale: bool,
    #[arg(long)]
    threads: Option<String>,
    #[arg(long)]
    size: Option<String>,
    #[arg(long)]
    t_max: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    /// Comma list or lo:hi:step.
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    distances: Option<String>,
    #[arg(long)]
    observables: Option<String>,
    #[arg(long)]
    embed_dim: Option<String>,
    #[arg(long)]
    embed_delay: Option<String>,
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    images: Option<String>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 8)]
    size: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let spec = QuenchSpec::new(args.size, args.h, args.t_max, args.dt)?;
    let series = simulate_series(&spec, args.observable, &args.distances)?;
    let text = series_csv(args.observable, &args.distances, &series.times(), &series.values);
    write_text(&args.out, &text)?;
    eprintln!(
        "wrote {} samples to {} (max imaginary residue {:e})",
        series.len(),
        args.out.display(),
        series.max_imag
    );
    Ok(())
}

fn rp(args: RpArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input).map_err(|e| Error::io(&args.input, e))?;
    let mut series = read_series_csv(&text, args.column.as_deref())?;
    if let Some(h) = args.rescale {
        series = rescale_time(&series, h)?;
    }
    if let Some(w) = &args.window {
        let (lo, hi) = parse_window(w)?;
        series = select_window(&series, lo, hi)?;
    }
    let embedding = EmbeddingConfig {
        dim: args.embed.embed_dim,
        delay: args.embed.embed_delay,
        metric: args.embed.metric,
    };
    let report = export_single(&series, &embedding, args.rr, &args.out)?;
    if args.matrix_csv {
        let traj = embed(&series, &embedding)?;
        let plot = threshold_by_rate(&distance_matrix(&traj, embedding.metric)?, args.rr)?;
        write_text(&args.out.join("rp.csv"), &rp_csv(&plot))?;
    }
    println!(
        "DET={} LAM={} DIV={} ENTR={} RR={}",
        report.det, report.lam, report.div, report.entr, report.rr_achieved
    );
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => SweepConfig::load(path)?,
        None => SweepConfig::default(),
    };
    let overrides = [
        ("size", &args.size),
        ("t_max", &args.t_max),
        ("dt", &args.dt),
        ("h", &args.h),
        ("distances", &args.distances),
        ("observables", &args.observables),
        ("window", &args.window),
        ("rr", &args.rr),
        ("embed_dim", &args.embed_dim),
        ("embed_delay", &args.embed_delay),
        ("metric", &args.metric),
        ("out", &args.out),
        ("images", &args.images),
        ("threads", &args.threads),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    if args.rescale {
        cfg.rescale = true;
    }
    let rows = run_sweep(&cfg)?;
    eprintln!("wrote {} rows to {}", rows.len(), cfg.out.join(SWEEP_CSV).display());
    Ok(())
}

fn oracle_check(args: OracleArgs) -> Result<bool> {
    let fields = [0.5, 1.0, 2.0];
    let times = [0.0, 0.5, 1.0, 2.0];
    let distances: Vec<usize> = (1..=3.min(args.size / 2)).collect();
    let cmp = equivalence_check(args.size, &fields, &times, &distances)?;
    let mut ok = true;
    for c in &cmp {
        let pass = c.error() <= args.tol;
        ok &= pass;
        if !pass {
            println!(
                "MISMATCH {} h={} t={} ell={}: ed={} engine={} err={:e}",
                c.observable, c.field, c.time, c.ell, c.exact, c.engine, c.error()
            );
        }
    }
    let worst = cmp.iter().map(|c| c.error()).fold(0.0, f64::max);
    println!(
        "{} comparisons at L={}, max |error| = {worst:e}: {}",
        cmp.len(),
        args.size,
        if ok { "ok" } else { "FAILED" }
    );
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a).map(|_| true),
        Command::Rp(a) => rp(a).map(|_| true),
        Command::Sweep(a) => sweep(a).map(|_| true),
        Command::OracleCheck(a) => oracle_check(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
