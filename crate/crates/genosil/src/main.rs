//! Command-line front end: dataset generation, training, evaluation, and
//! checkpoint inspection.
//!
//! Every subcommand reads an optional JSON config file (`--config`); flags
//! override file values, which override built-in defaults. Exit codes: 0 on
//! success, 1 for validation problems, 2 for runtime failures.

use std::path::PathBuf;
use std::process::exit;

use clap::{Parser, Subcommand};

use genosil::checkpoint::Checkpoint;
use genosil::config::{require, resolve, RunConfig};
use genosil::dataset::{generate_dataset, load_dataset};
use genosil::env::EnvKind;
use genosil::error::{Error, Result};
use genosil::eval::{compare, write_trajectories, EvalConfig, EvalPolicy, Preset};
use genosil::scenario::ScenarioRanges;
use genosil::trainer::{train, train_gcbc, TrainConfig};

#[derive(Parser)]
#[command(
    name = "genosil",
    version,
    about = "Safe imitation learning with a latent safety embedding",
    propagate_version = true
)]
struct Cli {
    /// JSON config file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Cap the worker-thread count for parallel generation and evaluation.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an expert demonstration dataset.
    Generate {
        /// Environment: "vehicle" or "manipulator".
        #[arg(long)]
        env: Option<String>,
        /// Number of episodes to keep.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Dataset body path; the manifest lands next to it.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Scale the obstacle speed range by this factor.
        #[arg(long, value_name = "FACTOR")]
        speed_scale: Option<f64>,
        /// Scale the obstacle radius range by this factor.
        #[arg(long, value_name = "FACTOR")]
        radius_scale: Option<f64>,
    },
    /// Train a policy on a generated dataset.
    Train {
        #[arg(long, value_name = "FILE")]
        dataset: Option<PathBuf>,
        /// Training method: "genosil" (latent safety embedding) or "gcbc"
        /// (goal-conditioned behavior cloning).
        #[arg(long)]
        method: Option<String>,
        /// Checkpoint path; the training log lands next to it.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        beta_max: Option<f64>,
        #[arg(long)]
        gamma_max: Option<f64>,
        #[arg(long)]
        t_anneal: Option<u64>,
        #[arg(long)]
        latent_dim: Option<usize>,
    },
    /// Evaluate checkpoints (and optionally the expert) on fresh scenarios.
    Eval {
        /// Checkpoint to evaluate; repeat to compare several on the same
        /// scenario set.
        #[arg(long, value_name = "FILE")]
        checkpoint: Vec<PathBuf>,
        /// Also run the demonstration expert on the same scenarios.
        #[arg(long)]
        include_expert: bool,
        /// Environment; only needed when no checkpoint supplies it.
        #[arg(long)]
        env: Option<String>,
        /// Scenario preset: "default", "shifted-speed", or "shifted-radius".
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Report path.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Directory for per-trial trajectory files (one JSONL per trial).
        #[arg(long, value_name = "DIR")]
        export_trajectories: Option<PathBuf>,
    },
    /// Print a human-readable summary of a checkpoint.
    Inspect {
        checkpoint: PathBuf,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        exit(e.exit_code());
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.workers {
        if n < 1 {
            return Err(Error::InvalidConfig("--workers must be at least 1".into()));
        }
        // Ignore the error if a global pool already exists (e.g. in tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::empty(),
    };
    match cli.command {
        Command::Generate {
            env,
            n,
            seed,
            out,
            speed_scale,
            radius_scale,
        } => cmd_generate(&config, env, n, seed, out, speed_scale, radius_scale),
        Command::Train {
            dataset,
            method,
            out,
            seed,
            epochs,
            batch_size,
            learning_rate,
            beta_max,
            gamma_max,
            t_anneal,
            latent_dim,
        } => cmd_train(
            &config,
            dataset,
            method,
            out,
            seed,
            epochs,
            batch_size,
            learning_rate,
            beta_max,
            gamma_max,
            t_anneal,
            latent_dim,
        ),
        Command::Eval {
            checkpoint,
            include_expert,
            env,
            preset,
            trials,
            seed,
            out,
            export_trajectories,
        } => cmd_eval(
            &config,
            checkpoint,
            include_expert,
            env,
            preset,
            trials,
            seed,
            out,
            export_trajectories,
        ),
        Command::Inspect { checkpoint } => cmd_inspect(&checkpoint),
    }
}

fn parse_env(name: &str) -> Result<EnvKind> {
    EnvKind::parse(name)
}

#[allow(clippy::too_many_arguments)]
fn cmd_generate(
    config: &RunConfig,
    env: Option<String>,
    n: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    speed_scale: Option<f64>,
    radius_scale: Option<f64>,
) -> Result<()> {
    let section = config.generate_section();
    let kind = parse_env(&require(env, config.env.clone(), "--env")?)?;
    let n = require(n, section.n, "--n")?;
    let seed = resolve(seed, config.seed, 0);
    let out = resolve(out, section.out, PathBuf::from("dataset.jsonl"));
    let mut ranges = section
        .ranges
        .unwrap_or_else(|| ScenarioRanges::defaults(kind));
    if let Some(factor) = speed_scale.or(section.speed_scale) {
        ranges = ranges.scaled_speed(factor);
    }
    if let Some(factor) = radius_scale.or(section.radius_scale) {
        ranges = ranges.scaled_radius(factor);
    }
    let cbf = section.cbf.unwrap_or_default();
    let manifest = generate_dataset(&out, n, kind, &ranges, &cbf, seed)?;
    println!(
        "wrote {} episodes ({} steps) to {} [{} attempts: {} collided, {} timeout, {} infeasible]",
        manifest.n_kept,
        manifest.total_steps,
        out.display(),
        manifest.attempts,
        manifest.discarded.collided,
        manifest.discarded.timeout,
        manifest.discarded.infeasible,
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    config: &RunConfig,
    dataset: Option<PathBuf>,
    method: Option<String>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    epochs: Option<usize>,
    batch_size: Option<usize>,
    learning_rate: Option<f64>,
    beta_max: Option<f64>,
    gamma_max: Option<f64>,
    t_anneal: Option<u64>,
    latent_dim: Option<usize>,
) -> Result<()> {
    let section = config.train_section();
    let dataset_path = require(dataset, section.dataset, "--dataset")?;
    let method = resolve(method, section.method, "genosil".to_string());
    let out = resolve(out, section.out, PathBuf::from("checkpoint.json"));
    let data = load_dataset(&dataset_path)?;
    let kind = data.manifest.env;

    let defaults = TrainConfig::defaults(kind);
    let train_config = TrainConfig {
        learning_rate: resolve(learning_rate, section.learning_rate, defaults.learning_rate),
        beta_max: resolve(beta_max, section.beta_max, defaults.beta_max),
        gamma_max: resolve(gamma_max, section.gamma_max, defaults.gamma_max),
        t_anneal: resolve(t_anneal, section.t_anneal, defaults.t_anneal),
        epochs: resolve(epochs, section.epochs, defaults.epochs),
        batch_size: resolve(batch_size, section.batch_size, defaults.batch_size),
        seed: resolve(seed, config.seed, defaults.seed),
        latent_dim: resolve(latent_dim, section.latent_dim, defaults.latent_dim),
        encoder_hidden: section.encoder_hidden.unwrap_or(defaults.encoder_hidden),
        decoder_hidden: section.decoder_hidden.unwrap_or(defaults.decoder_hidden),
        policy_hidden: section.policy_hidden.unwrap_or(defaults.policy_hidden),
        dataset_path: Some(dataset_path),
        checkpoint_path: Some(out.clone()),
    };

    let (_, report) = match method.as_str() {
        "genosil" => train(&data, &train_config)?,
        "gcbc" => train_gcbc(&data, &train_config)?,
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown method '{other}' (expected 'genosil' or 'gcbc')"
            )))
        }
    };
    let last = report.epochs.last().expect("at least one epoch");
    println!(
        "trained {} for {} epochs ({} steps, {:.1}s): imitation {:.5}, kl {:.4}, reconstruction {:.5}",
        method,
        report.epochs.len(),
        report.global_steps,
        report.wall_clock_seconds,
        last.imitation,
        last.kl,
        last.reconstruction,
    );
    println!("wrote checkpoint to {}", out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    config: &RunConfig,
    checkpoint_flags: Vec<PathBuf>,
    include_expert_flag: bool,
    env: Option<String>,
    preset: Option<String>,
    trials: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    export_trajectories: Option<PathBuf>,
) -> Result<()> {
    let section = config.eval_section();
    let checkpoint_paths = if checkpoint_flags.is_empty() {
        section.checkpoints.unwrap_or_default()
    } else {
        checkpoint_flags
    };
    let include_expert = include_expert_flag || section.include_expert.unwrap_or(false);
    if checkpoint_paths.is_empty() && !include_expert {
        return Err(Error::InvalidConfig(
            "nothing to evaluate: pass --checkpoint and/or --include-expert".into(),
        ));
    }
    let preset = Preset::parse(&resolve(preset, section.preset, "default".to_string()))?;
    let n_trials = resolve(trials, section.trials, 200);
    let seed = resolve(seed, config.seed, 0);
    let out = resolve(out, section.out, PathBuf::from("eval_report.json"));
    let export_dir = export_trajectories.or(section.export_trajectories);
    let cbf = section.cbf.unwrap_or_default();

    let checkpoints: Vec<Checkpoint> = checkpoint_paths
        .iter()
        .map(|p| Checkpoint::load(p))
        .collect::<Result<_>>()?;
    let kind = match (&env, config.env.as_deref(), checkpoints.first()) {
        (Some(name), _, _) => parse_env(name)?,
        (None, Some(name), _) => parse_env(name)?,
        (None, None, Some(ckpt)) => ckpt.env,
        (None, None, None) => {
            return Err(Error::InvalidConfig(
                "missing required option: --env (no checkpoint to infer it from)".into(),
            ))
        }
    };

    let mut labels: Vec<String> = checkpoint_paths
        .iter()
        .map(|p| {
            p.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string())
        })
        .collect();
    // Disambiguate duplicate stems so every row is addressable.
    for i in 0..labels.len() {
        if labels[..i].contains(&labels[i]) {
            labels[i] = format!("{}-{}", labels[i], i + 1);
        }
    }

    let mut methods: Vec<(String, EvalPolicy<'_>)> = checkpoints
        .iter()
        .zip(&labels)
        .map(|(ckpt, label)| (label.clone(), EvalPolicy::Checkpoint(ckpt)))
        .collect();
    if include_expert {
        methods.push(("expert".to_string(), EvalPolicy::Expert(&cbf)));
    }

    let eval_config = EvalConfig::preset(kind, preset, n_trials, seed);
    let (report, trajectories) = compare(&methods, kind, &eval_config)?;
    print!("{}", report.table());
    report.save(&out)?;
    println!("wrote report to {}", out.display());
    if let Some(dir) = export_dir {
        for (row, trajs) in report.methods.iter().zip(&trajectories) {
            let paths = write_trajectories(&dir, &row.label, trajs)?;
            println!(
                "wrote {} trajectory files for {} under {}",
                paths.len(),
                row.label,
                dir.display()
            );
        }
    }
    Ok(())
}

fn cmd_inspect(path: &PathBuf) -> Result<()> {
    let checkpoint = Checkpoint::load(path)?;
    print!("{}", checkpoint.summary());
    Ok(())
}
