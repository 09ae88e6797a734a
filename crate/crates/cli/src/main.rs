//! `splitmimo`: calibration, Monte-Carlo sweeps and plotting for split precoding.

mod manifest;
mod plot;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use splitmimo_core::evaluation::presets::{Preset, PresetRun};
use splitmimo_core::evaluation::report::{rows_to_csv, stats_to_csv};
use splitmimo_core::evaluation::{calibrate_scheme, run_sweep_with, SchemeSpec};
use splitmimo_core::quantizer::calibrate_step;
use splitmimo_core::{Error, ExperimentConfig, QuantizerSpec};

use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "splitmimo", version, about = "Split precoding under limited fronthaul")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate quantizer step sizes and write them as JSON.
    Calibrate(CalibrateArgs),
    /// Run a Monte-Carlo sum-rate sweep and write CSV plus a run manifest.
    Sweep(SweepArgs),
    /// Validate sweep CSVs and hand them to the plotting script.
    Plot(PlotArgs),
}

#[derive(Args)]
struct Scenario {
    /// Flat key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_preset)]
    preset: Option<Preset>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Lift the exact one-stage search-tree guard.
    #[arg(long)]
    allow_large: bool,
    /// Worker threads for the trial loop (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[command(flatten)]
    scenario: Scenario,
    /// Calibrate on whitespace-separated real samples instead of QRZF draws.
    #[arg(long, requires = "bits")]
    samples: Option<PathBuf>,
    /// Resolution for `--samples`.
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long, default_value = "calibration.json")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    scenario: Scenario,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Previously calibrated quantizers; schemes missing from it are calibrated here.
    #[arg(long)]
    calibration: Option<PathBuf>,
    /// Re-run exactly the sweep described by a manifest.
    #[arg(long, conflicts_with_all = ["config", "preset", "trials", "seed", "allow_large", "calibration"])]
    manifest: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Png,
    Pdf,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(required = true)]
    csv: Vec<PathBuf>,
    #[arg(long, default_value = "plots")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "png")]
    format: Format,
    /// Print the grouped data series as JSON instead of rendering.
    #[arg(long)]
    dry_run: bool,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Calibrate(args) => calibrate(args),
        Command::Sweep(args) => sweep(args),
        Command::Plot(args) => plot::run(&args.csv, &args.out, args.format, args.dry_run),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_budget() {
                eprintln!("hint: reduce M or B, or pass --allow-large to search with a node budget");
                ExitCode::from(3)
            } else if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn init_threads(threads: Option<usize>) -> Result<(), Error> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn resolve(s: &Scenario) -> Result<PresetRun, Error> {
    let base = s.config.as_deref().map(ExperimentConfig::from_kv_file).transpose()?;
    let preset = match (s.preset, &base) {
        (Some(p), _) => p,
        (None, Some(_)) => Preset::Custom,
        (None, None) => return Err(Error::Config("pass --config, --preset or both".into())),
    };
    let mut config = base.unwrap_or_else(|| preset.default_config());
    if let Some(t) = s.trials {
        config.trials = t;
    }
    if let Some(seed) = s.seed {
        config.seed = seed;
    }
    config.allow_large |= s.allow_large;
    let run = preset.build(Some(config))?;
    run.config.validate()?;
    for spec in &run.schemes {
        spec.check_budget(&run.config)?;
    }
    Ok(run)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn calibrate(args: CalibrateArgs) -> Result<(), Error> {
    if let Some(path) = &args.samples {
        let text = fs::read_to_string(path)?;
        let samples = text
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| Error::Config(format!("bad sample `{t}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        let spec = calibrate_step(&samples, args.bits.expect("clap enforces --bits"))?;
        write_json(&args.out, &spec)?;
        println!("delta = {} (B = {}, eta = {})", spec.delta, spec.bits, spec.eta);
        return Ok(());
    }
    init_threads(args.scenario.threads)?;
    let run = resolve(&args.scenario)?;
    let mut out = BTreeMap::new();
    for spec in &run.schemes {
        if let Some(q) = calibrate_scheme(&run.config, spec)? {
            println!("{}: delta = {} (B = {})", spec.label, q.delta, q.bits);
            out.insert(spec.label.clone(), q);
        }
    }
    write_json(&args.out, &out)
}

fn sweep(args: SweepArgs) -> Result<(), Error> {
    init_threads(args.scenario.threads)?;
    let started = unix_now();
    let (preset, config, schemes, notes, mut calibration) = match &args.manifest {
        Some(path) => {
            let m = RunManifest::load(path)?;
            let config = ExperimentConfig::from_kv_str(&m.config)?;
            let schemes = parse_schemes(&m.schemes, &config)?;
            (m.preset, config, schemes, m.notes, m.calibration)
        }
        None => {
            let run = resolve(&args.scenario)?;
            let calibration: BTreeMap<String, QuantizerSpec> = match &args.calibration {
                Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
                None => BTreeMap::new(),
            };
            (run.preset.to_string(), run.config, run.schemes, run.notes, calibration)
        }
    };
    for spec in &schemes {
        if !calibration.contains_key(&spec.label) {
            if let Some(q) = calibrate_scheme(&config, spec)? {
                calibration.insert(spec.label.clone(), q);
            }
        }
    }
    calibration.retain(|label, _| schemes.iter().any(|s| &s.label == label));

    eprintln!(
        "sweep {preset}: {} schemes x {} SNR points x {} trials",
        schemes.len(),
        config.system.snr_db_list.len(),
        config.trials
    );
    let result = run_sweep_with(&config, &schemes, &calibration)?;

    fs::create_dir_all(&args.out_dir)?;
    let csv_path = args.out_dir.join(format!("{preset}.csv"));
    fs::write(&csv_path, rows_to_csv(&result.rows))?;
    fs::write(args.out_dir.join(format!("{preset}_stats.csv")), stats_to_csv(&result.stats))?;
    let manifest = RunManifest::new(preset.clone(), &config, &schemes, calibration, notes, started, unix_now());
    write_json(&args.out_dir.join(format!("{preset}_manifest.json")), &manifest)?;
    println!("{}", csv_path.display());
    Ok(())
}

fn parse_schemes(labels: &[String], config: &ExperimentConfig) -> Result<Vec<SchemeSpec>, Error> {
    labels.iter().map(|l| SchemeSpec::parse(l, config)).collect()
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}
