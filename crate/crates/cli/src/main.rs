use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use qsnn::experiment::{
    emit_outputs, output_dir, render_tables, replay, run_experiment_with_progress, ExperimentConfig, ExperimentKind,
    ExperimentResults, Overrides,
};

#[derive(Parser)]
#[command(name = "qsnn", version, about = "Train quantum stochastic neural networks on state discrimination tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pure qubit pairs with real amplitudes
    BinaryReal(RunArgs),
    /// Pure qubit pairs differing by a relative phase
    BinaryComplex(RunArgs),
    /// Random mixed qubit pairs on spheres of fixed Bloch radius
    BinaryMixed(RunArgs),
    /// M equiprobable qubit states, one output neuron each
    MultiState(RunArgs),
    /// GHZ against W on three qubits
    GhzW(RunArgs),
    /// Separable vs entangled Werner-like states
    WernerClassify(RunArgs),
    /// Same task across several network shapes
    TopologyAblation(RunArgs),
    /// Re-run an experiment from its manifest
    Replay(ReplayArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config; defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run a single init seed instead of the configured list
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Learning rate
    #[arg(long)]
    eta: Option<f64>,
    /// Evolution time T
    #[arg(long)]
    time: Option<f64>,
    /// Print the resolved config and exit
    #[arg(long)]
    dry_run: bool,
    /// Suppress per-run progress on stderr
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Args)]
struct ReplayArgs {
    /// Path to a manifest.toml written by an earlier run
    manifest: PathBuf,
    /// Where to write the regenerated tables; defaults to the manifest's directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compare regenerated tables against those next to the manifest instead of writing
    #[arg(long)]
    check: bool,
    #[arg(long, short)]
    quiet: bool,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::BinaryReal(a) => (ExperimentKind::BinaryReal, a),
        Command::BinaryComplex(a) => (ExperimentKind::BinaryComplex, a),
        Command::BinaryMixed(a) => (ExperimentKind::BinaryMixed, a),
        Command::MultiState(a) => (ExperimentKind::MultiState, a),
        Command::GhzW(a) => (ExperimentKind::GhzW, a),
        Command::WernerClassify(a) => (ExperimentKind::WernerClassify, a),
        Command::TopologyAblation(a) => (ExperimentKind::TopologyAblation, a),
        Command::Replay(a) => return run_replay(a),
    };
    run(kind, args)
}

fn run(kind: ExperimentKind, args: RunArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::new(kind),
    };
    if config.kind != kind {
        bail!(
            "config {} describes a {} experiment, not {}",
            args.config.as_deref().unwrap_or(Path::new("")).display(),
            config.kind.as_str(),
            kind.as_str()
        );
    }
    config.apply(&Overrides {
        seed: args.seed,
        output: args.out.clone(),
        iterations: args.iterations,
        learning_rate: args.eta,
        evolution_time: args.time,
    });
    let config = config.resolve()?;
    if args.dry_run {
        print!("{}", config.to_toml_string()?);
        return Ok(());
    }

    let results = execute(&config, args.quiet)?;
    let dir = output_dir(&results.config, None);
    emit_outputs(&results, &dir)?;
    report(&results);
    println!("wrote {}", dir.display());
    Ok(())
}

fn execute(config: &ExperimentConfig, quiet: bool) -> Result<ExperimentResults> {
    let results = run_experiment_with_progress(config, |done, total, r| {
        if !quiet {
            eprintln!(
                "[{done}/{total}] {} {} seed {}: P_N = {:.4}{}",
                r.group,
                r.setting,
                r.seed,
                r.final_success(),
                r.helstrom.map(|h| format!(", P_H = {h:.4}")).unwrap_or_default()
            );
        }
    })?;
    Ok(results)
}

fn report(results: &ExperimentResults) {
    for group in results.groups() {
        let runs: Vec<_> = results.runs_in(&group).collect();
        let n = runs.len() as f64;
        let mean = runs.iter().map(|r| r.final_success()).sum::<f64>() / n;
        let helstrom: Option<Vec<f64>> = runs.iter().map(|r| r.helstrom).collect();
        match helstrom {
            Some(h) => println!(
                "{group}: mean final P_N {mean:.4}, mean P_H {:.4} over {} runs",
                h.iter().sum::<f64>() / n,
                runs.len()
            ),
            None => println!("{group}: mean final P_N {mean:.4} over {} runs", runs.len()),
        }
        for r in runs.iter().filter_map(|r| r.classifier.as_ref().map(|c| (r, c))) {
            let (run, c) = r;
            let [s, e] = c.confusion.rows;
            println!(
                "  seed {}: separable {:.4}/{:.4}, entangled {:.4}/{:.4}, {}/{} correct",
                run.seed,
                s[0],
                s[1],
                e[0],
                e[1],
                c.correct(),
                c.states.len()
            );
        }
    }
}

fn run_replay(args: ReplayArgs) -> Result<()> {
    if !args.quiet {
        eprintln!("replaying {}", args.manifest.display());
    }
    let results = replay(&args.manifest)?;
    let manifest_dir = args.manifest.parent().unwrap_or(Path::new(".")).to_path_buf();

    if args.check {
        let mut mismatched = Vec::new();
        for table in render_tables(&results)? {
            let path = manifest_dir.join(table.name);
            let existing = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            if existing != table.contents {
                mismatched.push(table.name);
            }
        }
        if !mismatched.is_empty() {
            bail!("replay differs from recorded tables: {}", mismatched.join(", "));
        }
        println!("all tables identical to {}", manifest_dir.display());
        return Ok(());
    }

    let dir = args.out.unwrap_or(manifest_dir);
    emit_outputs(&results, &dir)?;
    report(&results);
    println!("wrote {}", dir.display());
    Ok(())
}
