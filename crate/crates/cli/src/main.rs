use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rfps_cli::{output, ExperimentConfig, ExperimentId};
use rfps_core::robust::{predict_iterations, rfps_sft, BoundParams, RfpsConfig, VotingConfig};
use rfps_core::{fps_sft, make_scene, Dims, FpsConfig, SampleSource, Scene, SceneSpec, WindowSpec};

#[derive(Parser)]
#[command(name = "rfps", version, about = "Multidimensional sparse Fourier transform runs and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random scene and write it as TOML.
    Scene(SceneArgs),
    /// Recover the sparse spectrum of a scene file.
    Recover(RecoverArgs),
    /// Tabulate the localization bound and the predicted iteration schedule.
    Bound(BoundArgs),
    /// Run a Monte Carlo experiment suite.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct SceneArgs {
    #[arg(long, value_delimiter = ',', default_value = "256,256")]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Per-tone SNR, dB.
    #[arg(long, default_value_t = 30.0)]
    snr: f64,
    #[arg(long, default_value_t = 1.0)]
    noise_sigma: f64,
    #[arg(long)]
    on_grid: bool,
    #[arg(long, default_value_t = 0.0)]
    min_separation: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RecoverArgs {
    /// Scene TOML (see `rfps scene`).
    #[arg(long)]
    scene: PathBuf,
    /// Exact-sparse mode: rectangular window, no voting, relative threshold only.
    #[arg(long)]
    exact: bool,
    /// Chebyshev window PSR in dB; rectangular when omitted.
    #[arg(long)]
    psr: Option<f64>,
    #[arg(long, default_value_t = 3)]
    n_s: usize,
    #[arg(long, default_value_t = 2)]
    n_d: usize,
    #[arg(long, default_value_t = 30)]
    iterations: usize,
    #[arg(long, default_value_t = 5.0)]
    kappa: f64,
    /// Consecutive empty iterations before stopping [default: 10 exact, 3 robust].
    #[arg(long)]
    stop_after_empty: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Result JSON path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, value_delimiter = ',', default_value = "256,256")]
    dims: Vec<usize>,
    /// |S'|, the number of frequencies to recover.
    #[arg(long, default_value_t = 1000)]
    sparsity: usize,
    #[arg(long, default_value_t = 30.0)]
    snr: f64,
    #[arg(long, default_value_t = 1.0)]
    noise_sigma: f64,
    #[arg(long, default_value_t = rfps_core::robust::bound::SIGMA_P_DEFAULT)]
    sigma_p: f64,
    #[arg(long, default_value_t = 3)]
    n_s: usize,
    #[arg(long, default_value_t = 2)]
    n_d: usize,
    /// Chebyshev window PSR in dB; rectangular when omitted.
    #[arg(long)]
    psr: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    max_iterations: usize,
    /// CSV path for the table; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// psr-sweep | window-compare | voting-compare | iteration-bound | radar-recon
    id: ExperimentId,
    /// TOML config; keys it omits keep the experiment defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Exit nonzero if any acceptance check fails.
    #[arg(long)]
    check: bool,
    /// Print the effective config and exit.
    #[arg(long)]
    print_config: bool,
}

fn window_for(dims: &Dims, psr: Option<f64>) -> Result<WindowSpec> {
    Ok(match psr {
        Some(p) => WindowSpec::chebyshev(dims, p)?,
        None => WindowSpec::rectangular(dims),
    })
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn scene(args: SceneArgs) -> Result<()> {
    let reference = if args.noise_sigma > 0.0 { args.noise_sigma } else { 1.0 };
    let a = SceneSpec::amplitude_for_snr(args.snr, reference);
    let scene = make_scene(&SceneSpec {
        dims: args.dims,
        k: args.k,
        a_min: a,
        a_max: a,
        noise_sigma: args.noise_sigma,
        seed: args.seed,
        on_grid: args.on_grid,
        min_separation_bins: args.min_separation,
    })?;
    write_out(args.out.as_ref(), &scene.to_toml()?)
}

fn recover(args: RecoverArgs) -> Result<()> {
    let scene = Scene::load(&args.scene)?;
    let source = SampleSource::new(scene);
    let result = if args.exact {
        fps_sft(
            &source,
            &FpsConfig {
                iterations: args.iterations,
                stop_after_empty: args.stop_after_empty.unwrap_or(FpsConfig::default().stop_after_empty),
                seed: args.seed,
                ..Default::default()
            },
        )
    } else {
        let window = window_for(source.dims(), args.psr)?;
        let cfg = RfpsConfig {
            iterations: args.iterations,
            voting: VotingConfig::new(args.n_s, args.n_d)?,
            kappa: args.kappa,
            stop_after_empty: args.stop_after_empty.unwrap_or(RfpsConfig::default().stop_after_empty),
            seed: args.seed,
        };
        rfps_sft(&source, &window, &cfg)?
    };
    log::info!(
        "recovered {} frequencies in {} iterations, {} distinct samples ({:.3}% of N)",
        result.recovered.len(),
        result.iterations.len(),
        result.samples_read,
        100.0 * result.samples_read as f64 / source.dims().total() as f64
    );
    write_out(args.out.as_ref(), &result.to_json())
}

fn bound(args: BoundArgs) -> Result<()> {
    let dims = Dims::new(args.dims)?;
    let window = window_for(&dims, args.psr)?;
    let a = SceneSpec::amplitude_for_snr(args.snr, args.noise_sigma);
    let voting = VotingConfig::new(args.n_s, args.n_d)?;
    let params = BoundParams::new(dims, &window, args.noise_sigma, args.sigma_p, a, voting)?;
    let prediction = predict_iterations(args.sparsity, &params, args.max_iterations);

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["iteration", "s_remaining", "p1", "pw", "pd", "predicted_recovered"])?;
    for step in &prediction.schedule {
        let row = params.row(step.remaining_before);
        w.write_record([
            step.iteration.to_string(),
            row.s_remaining.to_string(),
            format!("{:.6e}", row.p1),
            format!("{:.6e}", row.pw),
            format!("{:.6e}", row.pd),
            step.recovered.to_string(),
        ])?;
    }
    write_out(args.out.as_ref(), &String::from_utf8(w.into_inner()?)?)?;
    eprintln!(
        "predicted iterations: {}{}",
        prediction.iterations,
        if prediction.converged { "" } else { " (did not converge)" }
    );
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<bool> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::defaults(args.id),
    };
    if cfg.id != args.id {
        bail!("config is for '{}', not '{}'", cfg.id, args.id);
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    cfg.validate()?;
    if args.print_config {
        print!("{}", cfg.to_toml());
        return Ok(true);
    }
    let report = rfps_cli::run(&cfg)?;
    let (csv, json) = output::write_report(&report, &args.out)?;
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(!args.check || report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // Experiments run under-designed windows on purpose; keep their per-run warnings quiet.
    let default_filter = match cli.command {
        Command::Experiment(_) => "warn,rfps_core=error",
        _ => "warn",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(default_filter)).init();
    let outcome = match cli.command {
        Command::Scene(a) => scene(a).map(|_| true),
        Command::Recover(a) => recover(a).map(|_| true),
        Command::Bound(a) => bound(a).map(|_| true),
        Command::Experiment(a) => experiment(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
