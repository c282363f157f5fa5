use std::fs::File;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use smallworld::balance::solve_balanced;
use smallworld::continuum::{
    augment, build_delaunay, mean_length, poisson_balance_iterate, run_continuum_walks, sample_points, CellLookup,
    RadialMeasure,
};
use smallworld::harness::{
    emit_svg_plot, fit_doubling_slope, parse_sizes, run_distribution_snapshot, run_scaling, write_results_csv,
    ExperimentSpec, Model, SnapshotSpec, TopologyKind,
};
use smallworld::io::file_writer;
use smallworld::rewiring::{run_chain, write_series_csv, Variant};
use smallworld::routing::{monte_carlo_tau, ConfigSource};
use smallworld::shortcuts::{harmonic_cycle, harmonic_volume, DistanceDistribution, ShortcutSampler};
use smallworld::{io as csvio, Error, Topology};

#[derive(Debug, Parser)]
#[command(name = "smallworld", version, about = "Greedy routing experiments on small-world graphs")]
#[command(args_override_self = true)]
struct Cli {
    /// key=value file supplying defaults for the subcommand's flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the balanced shortcut distribution on the cycle.
    Solve(SolveArgs),
    /// Estimate the mean greedy walk length under a shortcut distribution.
    Route(RouteArgs),
    /// Run the destination-sampling rewiring chain.
    Rewire(RewireArgs),
    /// Multi-size experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Greedy routing on Poisson points of the circle or the torus.
    Continuum(ContinuumArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 0.0)]
    damping: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BaseKind {
    Cycle,
    Grid2d,
}

impl BaseKind {
    fn kind(self) -> TopologyKind {
        match self {
            Self::Cycle => TopologyKind::Cycle,
            Self::Grid2d => TopologyKind::Grid2d,
        }
    }
}

#[derive(Debug, Args)]
struct RouteArgs {
    #[arg(long, value_enum, default_value = "cycle")]
    topology: BaseKind,
    /// Vertex count on the cycle, side length on the grid.
    #[arg(long)]
    n: usize,
    /// harmonic, balanced, or file:PATH to a distance,prob table.
    #[arg(long, default_value = "harmonic")]
    model: String,
    #[arg(long, default_value_t = 100_000)]
    walks: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    Full,
    Single,
}

#[derive(Debug, Args)]
struct RewireArgs {
    #[arg(long, value_enum, default_value = "cycle")]
    topology: BaseKind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    #[arg(long)]
    steps: u64,
    #[arg(long, value_enum, default_value = "full")]
    variant: VariantArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Steps between configuration snapshots; defaults to the vertex count.
    #[arg(long)]
    snapshot_every: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum ExperimentCommand {
    /// Mean walk length across sizes.
    Scaling(ScalingArgs),
    /// Shortcut lengths of the rewiring chain after burn-in.
    Distribution(DistributionArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScalingModel {
    Sampling,
    Kleinberg,
    Balanced,
}

#[derive(Debug, Args)]
struct ScalingArgs {
    /// `2^A..2^B` or a comma-separated list.
    #[arg(long, default_value = "2^10..2^17")]
    sizes: String,
    #[arg(long, value_enum, default_value = "sampling")]
    model: ScalingModel,
    #[arg(long, value_enum, default_value = "cycle")]
    topology: BaseKind,
    #[arg(long, default_value_t = 100_000)]
    walks: usize,
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    burnin_multiplier: usize,
    /// Measure on the configuration frozen after burn-in.
    #[arg(long)]
    freeze: bool,
    /// Also write scaling.svg.
    #[arg(long)]
    plot: bool,
}

#[derive(Debug, Args)]
struct DistributionArgs {
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    burnin_multiplier: usize,
    #[arg(long, default_value_t = 20)]
    snapshots: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ContinuumModel {
    Kleinberg,
    BalanceIterate,
}

#[derive(Debug, Args)]
struct ContinuumArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    dim: u8,
    /// Scale; the point process has intensity n^dim.
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "kleinberg")]
    model: ContinuumModel,
    #[arg(long, default_value_t = 10_000)]
    walks: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Refinement rounds for balance-iterate.
    #[arg(long, default_value_t = 8)]
    iters: usize,
    #[arg(long, default_value_t = 64)]
    bins: usize,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match with_config_defaults(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("smallworld: {e}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("smallworld: {e}");
            match e {
                Error::NotConverged(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

/// Splices `--key value` pairs from the config file in right after the
/// subcommand, so flags given on the command line (which come later) win.
/// Keys the chosen subcommand does not accept are ignored.
fn with_config_defaults(argv: Vec<String>) -> Result<Vec<String>, Error> {
    let Some(i) = argv.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(argv);
    };
    let path = match argv[i].strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => argv.get(i + 1).cloned().ok_or_else(|| Error::Domain("--config needs a path".into()))?,
    };
    let text = std::fs::read_to_string(&path)?;

    let root = Cli::command();
    let mut cmd = &root;
    let mut at = 1;
    while at < argv.len() {
        let a = &argv[at];
        if a == "--config" || a == "--out" {
            at += 2;
            continue;
        }
        if a.starts_with("--") {
            at += 1;
            continue;
        }
        match cmd.find_subcommand(a) {
            Some(sub) => {
                cmd = sub;
                at += 1;
                if !cmd.has_subcommands() {
                    break;
                }
            }
            None => break,
        }
    }

    let mut extra = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Domain(format!("{path}:{}: expected key=value", lineno + 1)))?;
        let (key, value) = (key.trim().replace('_', "-"), value.trim());
        let Some(arg) = cmd.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            continue;
        };
        if matches!(arg.get_action(), clap::ArgAction::SetTrue) {
            if value == "true" {
                extra.push(format!("--{key}"));
            }
        } else {
            extra.push(format!("--{key}"));
            extra.push(value.to_string());
        }
    }
    let mut out = argv[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[at..]);
    Ok(out)
}

fn run(cli: Cli) -> Result<(), Error> {
    let out = cli.out;
    match cli.command {
        Command::Solve(a) => solve(&out, a),
        Command::Route(a) => route(&out, a),
        Command::Rewire(a) => rewire(&out, a),
        Command::Experiment(ExperimentCommand::Scaling(a)) => scaling(&out, a),
        Command::Experiment(ExperimentCommand::Distribution(a)) => distribution(&out, a),
        Command::Continuum(a) => continuum(&out, a),
    }
}

fn create(path: &Path) -> Result<File, Error> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    Ok(File::create(path)?)
}

fn solve(out: &Path, a: SolveArgs) -> Result<(), Error> {
    let clock = Instant::now();
    let report = solve_balanced(a.n, a.tol, a.max_iters, a.damping)?;
    report.write_table_csv(create(&out.join(format!("balanced_{}.csv", a.n)))?)?;
    report.write_report_csv(create(&out.join(format!("balanced_{}_report.csv", a.n)))?)?;
    report.write_report_csv(io::stdout().lock())?;
    eprintln!("solve n={} took {:.3}s", a.n, clock.elapsed().as_secs_f64());
    if !report.converged {
        return Err(Error::NotConverged(format!(
            "{} iterations left total variation {:e} above {:e}",
            report.iterations, report.final_tv, a.tol
        )));
    }
    Ok(())
}

fn route(out: &Path, a: RouteArgs) -> Result<(), Error> {
    let g = a.topology.kind().base_graph(a.n)?;
    let dist: DistanceDistribution<f64> = match a.model.as_str() {
        "harmonic" => match a.topology {
            BaseKind::Cycle => harmonic_cycle(a.n)?,
            BaseKind::Grid2d => harmonic_volume(&g)?,
        },
        "balanced" => {
            if !matches!(a.topology, BaseKind::Cycle) {
                return Err(Error::Domain("the balanced solver is defined on the cycle only".into()));
            }
            let r = solve_balanced(a.n, 1e-10, 10_000, 0.0)?;
            if !r.converged {
                return Err(Error::NotConverged(format!("balanced solve for n = {}", a.n)));
            }
            r.result
        }
        other => match other.strip_prefix("file:") {
            Some(path) => DistanceDistribution::read_csv(path)?,
            None => return Err(Error::Domain(format!("unknown model `{other}`"))),
        },
    };
    let sampler = ShortcutSampler::new(&dist, &g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let est = monte_carlo_tau(&g, ConfigSource::Fresh(&sampler), a.walks, &mut rng)?;
    let mut w = file_writer(out.join("route.csv"))?;
    w.write_record(["topology", "n", "model", "walks", "seed", "mean_steps", "stderr"])?;
    w.write_record([
        g.name().to_string(),
        a.n.to_string(),
        a.model.clone(),
        est.walks.to_string(),
        a.seed.to_string(),
        csvio::float(est.mean),
        csvio::float(est.stderr),
    ])?;
    w.flush()?;
    println!("mean_steps={} stderr={}", est.mean, est.stderr);
    Ok(())
}

fn rewire(out: &Path, a: RewireArgs) -> Result<(), Error> {
    let g = a.topology.kind().base_graph(a.n)?;
    let variant = match a.variant {
        VariantArg::Full => Variant::Full,
        VariantArg::Single => Variant::SingleSample,
    };
    let every = a.snapshot_every.unwrap_or(g.len() as u64);
    let run = run_chain(&g, a.p, a.steps, variant, a.seed, every)?;
    write_series_csv(&run.lengths, create(&out.join("rewire_walks.csv"))?)?;
    for snap in &run.snapshots {
        snap.config.write_csv(create(&out.join(format!("rewire_snapshot_{}.csv", snap.step)))?)?;
    }
    run.state.config.write_csv(create(&out.join("rewire_final.csv"))?)?;
    let walks = run.state.stats.walks;
    println!(
        "steps={} walks={} mean_length={} snapshots={}",
        run.state.step,
        walks,
        if walks > 0 { run.state.stats.mean() } else { 0.0 },
        run.snapshots.len()
    );
    Ok(())
}

fn scaling(out: &Path, a: ScalingArgs) -> Result<(), Error> {
    let model = match a.model {
        ScalingModel::Sampling => Model::DestinationSampling,
        ScalingModel::Kleinberg => Model::KleinbergHarmonic,
        ScalingModel::Balanced => Model::BalancedSolved,
    };
    let mut spec = ExperimentSpec::new(model, a.topology.kind(), parse_sizes(&a.sizes)?);
    spec.walks = a.walks;
    spec.p = a.p;
    spec.seed = a.seed;
    spec.burnin_multiplier = a.burnin_multiplier;
    spec.freeze = a.freeze;
    spec.output_dir = out.to_path_buf();
    let results = run_scaling(&spec)?;
    for r in &results {
        eprintln!("n={} {} took {:.3}s", r.n, r.status(), r.wall_time.as_secs_f64());
    }
    let table = out.join("scaling.csv");
    write_results_csv(&results, create(&table)?)?;
    if let Ok(slope) = fit_doubling_slope(&results) {
        eprintln!("doubling slope of sqrt(mean_steps): {slope:.4}");
    }
    if a.plot {
        emit_svg_plot(&table, "n", "mean_steps", &out.join("scaling.svg"))?;
    }
    Ok(())
}

fn distribution(out: &Path, a: DistributionArgs) -> Result<(), Error> {
    let mut spec = SnapshotSpec::new(a.n, a.p, a.seed);
    spec.burnin_multiplier = a.burnin_multiplier;
    spec.snapshots = a.snapshots;
    let snap = run_distribution_snapshot(&spec)?;
    snap.write_csv(create(&out.join("shortcut_dist.csv"))?)?;
    Ok(())
}

fn continuum(out: &Path, a: ContinuumArgs) -> Result<(), Error> {
    let dim = a.dim as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let measure = match a.model {
        ContinuumModel::Kleinberg => RadialMeasure::kleinberg(a.n, dim)?,
        ContinuumModel::BalanceIterate => {
            let trace = poisson_balance_iterate(a.n, dim, a.iters, a.walks, a.bins, &mut rng)?;
            let mut w = file_writer(out.join("continuum_balance.csv"))?;
            w.write_record(["iteration", "tv", "tau"])?;
            for (i, (tv, tau)) in trace.tv.iter().zip(&trace.taus).enumerate() {
                w.write_record([(i + 1).to_string(), csvio::float(*tv), csvio::float(*tau)])?;
            }
            w.flush()?;
            for (i, m) in trace.measures.iter().enumerate() {
                m.write_csv(create(&out.join(format!("continuum_measure_{i}.csv")))?)?;
            }
            trace.measures.last().expect("at least one measure").clone()
        }
    };
    let mut set = sample_points(a.n, dim, &mut rng)?;
    let graph = build_delaunay(&mut set, &mut rng)?;
    let lookup = CellLookup::new(&set, &graph);
    let config = augment(&set, &lookup, &measure, &mut rng)?;
    let walks = run_continuum_walks(&set, &graph, &config, a.walks, &mut rng)?;
    let est = mean_length(&walks)?;

    set.write_csv(create(&out.join("continuum_points.csv"))?)?;
    graph.write_csv(create(&out.join("continuum_edges.csv"))?)?;
    config.write_csv(create(&out.join("continuum_shortcuts.csv"))?)?;
    smallworld::routing::write_walks_csv(&walks, create(&out.join("continuum_walks.csv"))?)?;
    println!(
        "points={} retries={} jitter_rounds={} mean_degree={} mean_steps={} stderr={}",
        set.len(),
        set.retries,
        set.jitter_rounds,
        config.mean_degree(),
        est.mean,
        est.stderr
    );
    Ok(())
}
