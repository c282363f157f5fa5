//! The destination-sampling chain: after each greedy walk, vertices on the
//! walk re-point their shortcut at the walk's destination.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};
use crate::io;
use crate::routing::{greedy_walk, WalkRecord};
use crate::shortcuts::{empirical_marginal, DistanceDistribution, ShortcutConfig};
use crate::topology::{Topology, VertexId};

/// Which update rule a chain applies after each walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Every forwarding vertex rewires independently with probability `p`.
    Full,
    /// With probability `p·w`, one uniformly chosen forwarding vertex rewires.
    SingleSample,
}

/// Running sums over the lengths of walks that actually happened.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WalkStats {
    pub walks: u64,
    pub sum: f64,
    pub sumsq: f64,
}

impl WalkStats {
    pub fn record(&mut self, length: usize) {
        let l = length as f64;
        self.walks += 1;
        self.sum += l;
        self.sumsq += l * l;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.walks as f64
    }
}

#[derive(Debug, Clone)]
pub struct ChainState {
    pub config: ShortcutConfig,
    pub step: u64,
    pub rng: ChaCha8Rng,
    pub stats: WalkStats,
}

impl ChainState {
    /// No shortcuts anywhere.
    pub fn new(n: usize, seed: u64) -> Self {
        Self::from_config(ShortcutConfig::empty(n), seed)
    }

    pub fn from_config(config: ShortcutConfig, seed: u64) -> Self {
        Self { config, step: 0, rng: ChaCha8Rng::seed_from_u64(seed), stats: WalkStats::default() }
    }
}

/// What one transition did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOutcome {
    /// `None` when the source and destination coincided.
    pub walk: Option<WalkRecord>,
    pub rewired: Vec<VertexId>,
}

/// Draws `y, z` uniformly; unless they coincide, walks `y → z` under the
/// current configuration.
fn walk_step<G: Topology + ?Sized>(state: &mut ChainState, topology: &G) -> Result<Option<WalkRecord>> {
    let n = topology.len();
    if state.config.len() != n {
        return domain("configuration size does not match topology");
    }
    let y = VertexId(state.rng.random_range(0..n));
    let z = VertexId(state.rng.random_range(0..n));
    state.step += 1;
    if y == z {
        return Ok(None);
    }
    let walk = greedy_walk(topology, &state.config, y, z, &mut state.rng)?;
    state.stats.record(walk.length);
    Ok(Some(walk))
}

pub fn destination_sampling_step<G: Topology + ?Sized>(state: &mut ChainState, topology: &G, p: f64) -> Result<StepOutcome> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("rewire probability must lie in (0, 1), got {p}"));
    }
    let Some(walk) = walk_step(state, topology)? else {
        return Ok(StepOutcome { walk: None, rewired: Vec::new() });
    };
    let mut rewired = Vec::new();
    for &x in walk.forwarding_vertices() {
        if state.rng.random_bool(p) {
            state.config.set(x, walk.dest)?;
            rewired.push(x);
        }
    }
    Ok(StepOutcome { walk: Some(walk), rewired })
}

pub fn single_sample_step<G: Topology + ?Sized>(state: &mut ChainState, topology: &G, p: f64) -> Result<StepOutcome> {
    let n = topology.len();
    if !(p > 0.0 && p * n as f64 <= 1.0) {
        return domain(format!("single-sample rewiring needs 0 < p <= 1/n, got p = {p} with n = {n}"));
    }
    let Some(walk) = walk_step(state, topology)? else {
        return Ok(StepOutcome { walk: None, rewired: Vec::new() });
    };
    let mut rewired = Vec::new();
    let w = walk.length;
    if state.rng.random_bool((p * w as f64).min(1.0)) {
        let x = walk.path[state.rng.random_range(0..w)];
        state.config.set(x, walk.dest)?;
        rewired.push(x);
    }
    Ok(StepOutcome { walk: Some(walk), rewired })
}

pub fn step<G: Topology + ?Sized>(state: &mut ChainState, topology: &G, p: f64, variant: Variant) -> Result<StepOutcome> {
    match variant {
        Variant::Full => destination_sampling_step(state, topology, p),
        Variant::SingleSample => single_sample_step(state, topology, p),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub step: u64,
    pub config: ShortcutConfig,
}

#[derive(Debug, Clone)]
pub struct ChainRun {
    pub state: ChainState,
    pub snapshots: Vec<Snapshot>,
    /// `(step, length)` for every walk that happened.
    pub lengths: Vec<(u64, usize)>,
}

/// Runs a chain from the empty configuration, snapshotting every
/// `snapshot_every` steps (never when it is zero).
pub fn run_chain<G: Topology + ?Sized>(
    topology: &G,
    p: f64,
    steps: u64,
    variant: Variant,
    seed: u64,
    snapshot_every: u64,
) -> Result<ChainRun> {
    let mut state = ChainState::new(topology.len(), seed);
    let mut snapshots = Vec::new();
    let mut lengths = Vec::new();
    for _ in 0..steps {
        let out = step(&mut state, topology, p, variant)?;
        if let Some(walk) = out.walk {
            lengths.push((state.step, walk.length));
        }
        if snapshot_every > 0 && state.step.is_multiple_of(snapshot_every) {
            snapshots.push(Snapshot { step: state.step, config: state.config.clone() });
        }
    }
    Ok(ChainRun { state, snapshots, lengths })
}

/// `step,length`.
pub fn write_series_csv<W: Write>(lengths: &[(u64, usize)], out: W) -> Result<()> {
    let mut w = io::writer(out);
    w.write_record(["step", "length"])?;
    for (s, l) in lengths {
        w.write_record([s.to_string(), l.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Total variation between the pooled shortcut lengths of `snapshots` and
/// `reference`.
pub fn stationarity_check<G: Topology + ?Sized>(
    snapshots: &[ShortcutConfig],
    topology: &G,
    reference: &DistanceDistribution<f64>,
) -> Result<f64> {
    empirical_marginal(snapshots, topology)?.total_variation(reference)
}
