//! Experiment orchestration: walk-length scaling runs, shortcut-length
//! snapshots of the rewiring chain, and plots of the resulting tables.

mod distribution;
mod svg;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use distribution::{run_distribution_snapshot, DistributionRow, DistributionSnapshot, SnapshotSpec};
pub use svg::emit_svg_plot;

use crate::balance::solve_balanced;
use crate::continuum::{
    augment, build_delaunay, mean_length, poisson_balance_iterate, run_continuum_walks, sample_points, CellLookup,
    RadialMeasure,
};
use crate::error::{domain, Error, Result};
use crate::io;
use crate::rewiring::{destination_sampling_step, ChainState, WalkStats};
use crate::routing::{monte_carlo_tau, summarize, ConfigSource, TauEstimate};
use crate::shortcuts::{harmonic_cycle, harmonic_volume, DistanceDistribution, ShortcutSampler};
use crate::topology::{BaseGraph, CycleTopology, Topology, TorusGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    KleinbergHarmonic,
    BalancedSolved,
    DestinationSampling,
    ContinuumKleinberg,
    ContinuumBalanced,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Self::KleinbergHarmonic => "kleinberg-harmonic",
            Self::BalancedSolved => "balanced-solved",
            Self::DestinationSampling => "destination-sampling",
            Self::ContinuumKleinberg => "continuum-kleinberg",
            Self::ContinuumBalanced => "continuum-balanced",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "kleinberg-harmonic" | "kleinberg" | "harmonic" => Self::KleinbergHarmonic,
            "balanced-solved" | "balanced" => Self::BalancedSolved,
            "destination-sampling" | "sampling" => Self::DestinationSampling,
            "continuum-kleinberg" => Self::ContinuumKleinberg,
            "continuum-balanced" | "balance-iterate" => Self::ContinuumBalanced,
            other => return domain(format!("unknown model `{other}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyKind {
    Cycle,
    Grid2d,
    Continuum1d,
    Continuum2d,
}

impl TopologyKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Cycle => "cycle",
            Self::Grid2d => "grid2d",
            Self::Continuum1d => "continuum1d",
            Self::Continuum2d => "continuum2d",
        }
    }

    fn is_continuum(self) -> bool {
        matches!(self, Self::Continuum1d | Self::Continuum2d)
    }

    /// Discrete base graph for size `n`; on the grid `n` is the side length.
    pub fn base_graph(self, n: usize) -> Result<BaseGraph> {
        match self {
            Self::Cycle => Ok(BaseGraph::Cycle(CycleTopology::new(n)?)),
            Self::Grid2d => Ok(BaseGraph::Torus(TorusGrid::new(n, 2)?)),
            _ => domain(format!("{} has no discrete base graph", self.name())),
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "cycle" | "ring" => Self::Cycle,
            "grid2d" => Self::Grid2d,
            "continuum1d" => Self::Continuum1d,
            "continuum2d" => Self::Continuum2d,
            other => return domain(format!("unknown topology `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub model: Model,
    pub topology: TopologyKind,
    pub sizes: Vec<usize>,
    pub p: f64,
    pub walks: usize,
    /// Chain steps before measuring, per vertex.
    pub burnin_multiplier: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Measure destination sampling on the configuration frozen after
    /// burn-in instead of on the walks that keep updating it.
    pub freeze: bool,
    /// Refinement rounds for the continuum balanced model.
    pub balance_iters: usize,
}

impl ExperimentSpec {
    pub fn new(model: Model, topology: TopologyKind, sizes: Vec<usize>) -> Self {
        Self {
            model,
            topology,
            sizes,
            p: 0.1,
            walks: 100_000,
            burnin_multiplier: 10,
            seed: 0,
            output_dir: PathBuf::from("."),
            freeze: false,
            balance_iters: 8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return domain("no sizes given");
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return domain("sizes must be strictly increasing");
        }
        if self.walks == 0 {
            return domain("walks must be at least 1");
        }
        if self.model == Model::DestinationSampling && !(self.p > 0.0 && self.p < 1.0) {
            return domain("p must lie in (0, 1)");
        }
        let continuum_model = matches!(self.model, Model::ContinuumKleinberg | Model::ContinuumBalanced);
        if continuum_model != self.topology.is_continuum() {
            return domain(format!("model {} does not run on topology {}", self.model, self.topology));
        }
        if self.model == Model::BalancedSolved && self.topology != TopologyKind::Cycle {
            return domain("the balanced solver is defined on the cycle only");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub n: usize,
    pub model: Model,
    pub mean_steps: f64,
    pub stderr: f64,
    pub walks: usize,
    pub seed: u64,
    pub wall_time: Duration,
    /// `None` on success, otherwise why this size failed.
    pub error: Option<String>,
}

impl RunResult {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    pub fn status(&self) -> String {
        match &self.error {
            None => "ok".into(),
            Some(e) => format!("error: {e}"),
        }
    }
}

/// `n,model,mean_steps,stderr,walks,seed,status`. Wall time is left out so
/// reruns produce identical bytes.
pub fn write_results_csv<W: Write>(results: &[RunResult], out: W) -> Result<()> {
    let mut w = io::writer(out);
    w.write_record(["n", "model", "mean_steps", "stderr", "walks", "seed", "status"])?;
    for r in results {
        w.write_record([
            r.n.to_string(),
            r.model.to_string(),
            io::float(r.mean_steps),
            io::float(r.stderr),
            r.walks.to_string(),
            r.seed.to_string(),
            r.status(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per size, sizes run in parallel with seeds `seed ⊕ index`. A
/// failing size becomes an error row.
pub fn run_scaling(spec: &ExperimentSpec) -> Result<Vec<RunResult>> {
    spec.validate()?;
    Ok(spec
        .sizes
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let seed = spec.seed ^ i as u64;
            let clock = Instant::now();
            let outcome = run_size(spec, n, seed);
            let wall_time = clock.elapsed();
            match outcome {
                Ok(est) => RunResult {
                    n,
                    model: spec.model,
                    mean_steps: est.mean,
                    stderr: est.stderr,
                    walks: est.walks,
                    seed,
                    wall_time,
                    error: None,
                },
                Err(e) => RunResult {
                    n,
                    model: spec.model,
                    mean_steps: f64::NAN,
                    stderr: f64::NAN,
                    walks: 0,
                    seed,
                    wall_time,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

fn run_size(spec: &ExperimentSpec, n: usize, seed: u64) -> Result<TauEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spec.model {
        Model::DestinationSampling => {
            let g = spec.topology.base_graph(n)?;
            sampling_run(&g, spec, seed)
        }
        Model::KleinbergHarmonic => {
            let g = spec.topology.base_graph(n)?;
            let dist: DistanceDistribution<f64> = match spec.topology {
                TopologyKind::Cycle => harmonic_cycle(n)?,
                _ => harmonic_volume(&g)?,
            };
            let sampler = ShortcutSampler::new(&dist, &g)?;
            monte_carlo_tau(&g, ConfigSource::Fresh(&sampler), spec.walks, &mut rng)
        }
        Model::BalancedSolved => {
            let g = spec.topology.base_graph(n)?;
            let report = solve_balanced(n, 1e-10, 10_000, 0.0)?;
            if !report.converged {
                return Err(Error::NotConverged(format!("n = {n}, final tv {:e}", report.final_tv)));
            }
            let sampler = ShortcutSampler::new(&report.result, &g)?;
            monte_carlo_tau(&g, ConfigSource::Fresh(&sampler), spec.walks, &mut rng)
        }
        Model::ContinuumKleinberg | Model::ContinuumBalanced => {
            let dim = if spec.topology == TopologyKind::Continuum1d { 1 } else { 2 };
            let measure = if spec.model == Model::ContinuumKleinberg {
                RadialMeasure::kleinberg(n, dim)?
            } else {
                let walks = spec.walks.clamp(1, 20_000);
                let trace = poisson_balance_iterate(n, dim, spec.balance_iters.max(1), walks, 64, &mut rng)?;
                trace.measures.last().expect("at least one measure").clone()
            };
            let mut set = sample_points(n, dim, &mut rng)?;
            let graph = build_delaunay(&mut set, &mut rng)?;
            let lookup = CellLookup::new(&set, &graph);
            let config = augment(&set, &lookup, &measure, &mut rng)?;
            let walks = run_continuum_walks(&set, &graph, &config, spec.walks, &mut rng)?;
            mean_length(&walks)
        }
    }
}

/// Burn-in from the empty configuration, then `walks` measured walks.
fn sampling_run<G: Topology>(g: &G, spec: &ExperimentSpec, seed: u64) -> Result<TauEstimate> {
    let mut state = ChainState::new(g.len(), seed);
    for _ in 0..spec.burnin_multiplier * g.len() {
        destination_sampling_step(&mut state, g, spec.p)?;
    }
    if spec.freeze {
        let frozen = state.config.clone();
        return monte_carlo_tau(g, ConfigSource::Frozen(&frozen), spec.walks, &mut state.rng);
    }
    state.stats = WalkStats::default();
    let bound = g.max_distance();
    while (state.stats.walks as usize) < spec.walks {
        let out = destination_sampling_step(&mut state, g, spec.p)?;
        if let Some(w) = out.walk {
            if w.length > bound {
                return Err(Error::TopologyViolation { vertex: w.start.0, dest: w.dest.0 });
            }
        }
    }
    Ok(summarize(state.stats.sum, state.stats.sumsq, spec.walks))
}

/// Least-squares slope of `√mean_steps` against `log₂ n` over the successful
/// rows, which must be at least three sizes each double the previous.
pub fn fit_doubling_slope(results: &[RunResult]) -> Result<f64> {
    let mut ok: Vec<&RunResult> = results.iter().filter(|r| r.is_ok()).collect();
    ok.sort_by_key(|r| r.n);
    if ok.len() < 3 {
        return domain(format!("need at least three sizes, have {}", ok.len()));
    }
    if ok.windows(2).any(|w| w[1].n != 2 * w[0].n) {
        return domain("sizes must double from one to the next");
    }
    let pts: Vec<(f64, f64)> = ok.iter().map(|r| ((r.n as f64).log2(), r.mean_steps.sqrt())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Parses `2^A..2^B` or a comma-separated list of sizes.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::Domain(format!("cannot parse sizes `{text}`"));
    if let Some((a, b)) = text.split_once("..") {
        let exp = |s: &str| s.trim().strip_prefix("2^").and_then(|e| e.parse::<u32>().ok()).ok_or_else(bad);
        let (a, b) = (exp(a)?, exp(b)?);
        if a > b || b >= usize::BITS {
            return Err(bad());
        }
        return Ok((a..=b).map(|e| 1usize << e).collect());
    }
    text.split(',')
        .map(|s| {
            let s = s.trim();
            match s.strip_prefix("2^") {
                Some(e) => e.parse::<u32>().ok().filter(|&e| e < usize::BITS).map(|e| 1usize << e),
                None => s.parse().ok(),
            }
            .ok_or_else(bad)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::hitting_profile_cycle;

    fn result(n: usize, mean: f64) -> RunResult {
        RunResult {
            n,
            model: Model::KleinbergHarmonic,
            mean_steps: mean,
            stderr: 0.0,
            walks: 1,
            seed: 0,
            wall_time: Duration::ZERO,
            error: None,
        }
    }

    #[test]
    fn sizes_parse() {
        assert_eq!(parse_sizes("2^3..2^5").unwrap(), vec![8, 16, 32]);
        assert_eq!(parse_sizes("8, 2^4,100").unwrap(), vec![8, 16, 100]);
        assert!(parse_sizes("2^5..2^3").is_err());
        assert!(parse_sizes("x").is_err());
    }

    #[test]
    fn spec_validation() {
        let mut s = ExperimentSpec::new(Model::KleinbergHarmonic, TopologyKind::Cycle, vec![16, 8]);
        assert!(s.validate().is_err());
        s.sizes = vec![8, 16];
        assert!(s.validate().is_ok());
        s.walks = 0;
        assert!(s.validate().is_err());
        let s = ExperimentSpec::new(Model::ContinuumKleinberg, TopologyKind::Cycle, vec![8]);
        assert!(s.validate().is_err());
        let mut s = ExperimentSpec::new(Model::DestinationSampling, TopologyKind::Cycle, vec![8]);
        s.p = 1.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn flat_means_have_zero_slope() {
        let rs: Vec<_> = [8, 16, 32, 64].iter().map(|&n| result(n, 9.0)).collect();
        assert_eq!(fit_doubling_slope(&rs).unwrap(), 0.0);
        // √mean rising by exactly 0.5 per doubling
        let rs: Vec<_> = (3..8).map(|k| result(1 << k, (1.0 + 0.5 * k as f64).powi(2))).collect();
        assert!((fit_doubling_slope(&rs).unwrap() - 0.5).abs() < 1e-12);
        assert!(fit_doubling_slope(&rs[..2]).is_err());
        let gap = vec![result(8, 1.0), result(16, 1.0), result(64, 1.0)];
        assert!(fit_doubling_slope(&gap).is_err());
    }

    #[test]
    fn single_walk_single_row() {
        let mut s = ExperimentSpec::new(Model::KleinbergHarmonic, TopologyKind::Cycle, vec![32]);
        s.walks = 1;
        let rs = run_scaling(&s).unwrap();
        assert_eq!(rs.len(), 1);
        assert_eq!(rs[0].stderr, 0.0);
        assert!(rs[0].is_ok());
    }

    #[test]
    fn kleinberg_rows_match_exact_tau() {
        let mut s = ExperimentSpec::new(Model::KleinbergHarmonic, TopologyKind::Cycle, vec![64, 128, 256]);
        s.walks = 200_000;
        s.seed = 12;
        for r in run_scaling(&s).unwrap() {
            let exact = hitting_profile_cycle(&harmonic_cycle::<f64>(r.n).unwrap(), r.n).unwrap().tau;
            assert!((r.mean_steps - exact).abs() <= 3.0 * r.stderr, "n={} {} vs {exact}", r.n, r.mean_steps);
        }
    }

    #[test]
    fn reruns_are_byte_identical() {
        for model in [Model::DestinationSampling, Model::KleinbergHarmonic, Model::BalancedSolved] {
            let mut s = ExperimentSpec::new(model, TopologyKind::Cycle, vec![32, 64, 128]);
            s.walks = 3000;
            s.seed = 99;
            let bytes = |s: &ExperimentSpec| {
                let mut buf = Vec::new();
                write_results_csv(&run_scaling(s).unwrap(), &mut buf).unwrap();
                buf
            };
            let a = bytes(&s);
            assert_eq!(a, bytes(&s));
            let text = String::from_utf8(a).unwrap();
            assert!(text.starts_with("n,model,mean_steps,stderr,walks,seed,status\n32,"));
            assert_eq!(text.lines().count(), 4);
        }
    }

    #[test]
    fn grid_and_frozen_runs() {
        let mut s = ExperimentSpec::new(Model::DestinationSampling, TopologyKind::Grid2d, vec![8, 16]);
        s.walks = 2000;
        s.freeze = true;
        assert!(run_scaling(&s).unwrap().iter().all(|r| r.is_ok() && r.mean_steps > 0.0));
        let mut s = ExperimentSpec::new(Model::KleinbergHarmonic, TopologyKind::Grid2d, vec![8]);
        s.walks = 2000;
        assert!(run_scaling(&s).unwrap()[0].is_ok());
    }

    #[test]
    fn continuum_rows() {
        for (model, topo) in [
            (Model::ContinuumKleinberg, TopologyKind::Continuum1d),
            (Model::ContinuumKleinberg, TopologyKind::Continuum2d),
            (Model::ContinuumBalanced, TopologyKind::Continuum1d),
        ] {
            let mut s = ExperimentSpec::new(model, topo, vec![16]);
            s.walks = 500;
            s.balance_iters = 2;
            let r = &run_scaling(&s).unwrap()[0];
            assert!(r.is_ok(), "{:?}", r.error);
        }
    }

    #[test]
    fn failures_become_rows() {
        // n = 1 cannot form a cycle; the other size still runs
        let mut s = ExperimentSpec::new(Model::KleinbergHarmonic, TopologyKind::Cycle, vec![1, 16]);
        s.walks = 100;
        let rs = run_scaling(&s).unwrap();
        assert!(!rs[0].is_ok() && rs[0].status().starts_with("error: "));
        assert!(rs[1].is_ok());
    }
}
