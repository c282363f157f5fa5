//! Distance-invariant shortcut distributions and shortcut configurations.

use std::io::Write;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{domain, Error, Result};
use crate::io;
use crate::scalar::{self, Scalar};
use crate::topology::{Topology, VertexId};

/// Probability of a shortcut having each length `1..=D`.
///
/// Stored per distance, so per-pair probabilities are always a function of
/// distance alone.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceDistribution<T> {
    probs: Vec<T>,
}

impl<T: Scalar> DistanceDistribution<T> {
    /// Wraps a probability vector whose entry `i` is the mass at distance `i + 1`.
    pub fn from_probs(probs: Vec<T>) -> Result<Self> {
        if probs.is_empty() {
            return domain("distribution needs at least one distance");
        }
        if let Some(bad) = probs.iter().position(|p| p < &T::zero() || p.as_f64().is_nan()) {
            return domain(format!("negative or NaN mass at distance {}", bad + 1));
        }
        let total = scalar::sum(&probs);
        if (total.clone() - T::one()).abs() > T::simplex_tolerance() {
            return domain(format!("masses sum to {total}, not 1"));
        }
        Ok(Self { probs })
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(weights: Vec<T>) -> Result<Self> {
        if weights.iter().any(|w| w < &T::zero()) {
            return domain("negative weight");
        }
        let total = scalar::sum(&weights);
        if total <= T::zero() {
            return domain("weights sum to zero");
        }
        let probs = weights.into_iter().map(|w| w / total.clone()).collect();
        Self::from_probs(probs)
    }

    pub fn uniform(max_distance: usize) -> Result<Self> {
        Self::from_weights(vec![T::one(); max_distance])
    }

    pub fn point_mass(max_distance: usize, at: usize) -> Result<Self> {
        if at == 0 || at > max_distance {
            return domain(format!("distance {at} outside 1..={max_distance}"));
        }
        let mut probs = vec![T::zero(); max_distance];
        probs[at - 1] = T::one();
        Self::from_probs(probs)
    }

    /// Largest distance carrying a probability entry.
    pub fn max_distance(&self) -> usize {
        self.probs.len()
    }

    /// Mass at distance `d` (1-based); zero outside the support.
    pub fn prob(&self, d: usize) -> T {
        if d == 0 || d > self.probs.len() {
            T::zero()
        } else {
            self.probs[d - 1].clone()
        }
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<T> {
        self.probs
    }

    pub fn total_variation(&self, other: &Self) -> Result<T> {
        if self.probs.len() != other.probs.len() {
            return domain("distributions have different supports");
        }
        Ok(scalar::total_variation(&self.probs, &other.probs))
    }

    pub fn to_f64(&self) -> DistanceDistribution<f64> {
        DistanceDistribution { probs: self.probs.iter().map(Scalar::as_f64).collect() }
    }

    /// `distance,prob` table.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = io::writer(out);
        w.write_record(["distance", "prob"])?;
        for (i, p) in self.probs.iter().enumerate() {
            w.write_record([(i + 1).to_string(), io::float(p.as_f64())])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl DistanceDistribution<f64> {
    /// Reads a `distance,prob` table; rows may come in any order but must
    /// cover `1..=D` exactly once.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut rdr = io::reader(path)?;
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn(name.into()))
        };
        let (dcol, pcol) = (col("distance")?, col("prob")?);
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let d: usize = rec[dcol].parse().map_err(|_| Error::Domain(format!("bad distance `{}`", &rec[dcol])))?;
            let p: f64 = rec[pcol].parse().map_err(|_| Error::Domain(format!("bad prob `{}`", &rec[pcol])))?;
            rows.push((d, p));
        }
        rows.sort_by_key(|r| r.0);
        if rows.iter().enumerate().any(|(i, r)| r.0 != i + 1) {
            return domain("distance column must cover 1..=D exactly once");
        }
        Self::from_probs(rows.into_iter().map(|r| r.1).collect())
    }
}

/// Kleinberg's one-dimensional harmonic law `ℓ(d) ∝ 1/d` on `1..n-1`.
pub fn harmonic_cycle<T: Scalar>(n: usize) -> Result<DistanceDistribution<T>> {
    if n < 2 {
        return domain(format!("harmonic distribution needs n >= 2, got {n}"));
    }
    DistanceDistribution::from_weights((1..n).map(|d| T::one() / T::from_count(d)).collect())
}

/// Inverse-ball-volume law: each vertex `y` gets weight `1/|B_x(d(x,y))|`,
/// pooled per distance.
pub fn harmonic_volume<T: Scalar, G: Topology + ?Sized>(topology: &G) -> Result<DistanceDistribution<T>> {
    let weights = (1..=topology.max_distance())
        .map(|d| Ok(T::from_count(topology.shell_size(d)) / T::from_count(topology.ball_volume(d)?)))
        .collect::<Result<Vec<_>>>()?;
    DistanceDistribution::from_weights(weights)
}

/// The shortcut map `γ`: at most one shortcut destination per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortcutConfig {
    dest: Vec<Option<VertexId>>,
}

impl ShortcutConfig {
    /// No vertex has a shortcut yet.
    pub fn empty(n: usize) -> Self {
        Self { dest: vec![None; n] }
    }

    /// Builds a total configuration, rejecting self-loops and bad indices.
    pub fn from_dests(dests: Vec<VertexId>) -> Result<Self> {
        let n = dests.len();
        let mut cfg = Self::empty(n);
        for (x, y) in dests.into_iter().enumerate() {
            cfg.set(VertexId(x), y)?;
        }
        Ok(cfg)
    }

    pub fn len(&self) -> usize {
        self.dest.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dest.is_empty()
    }

    #[inline]
    pub fn get(&self, x: VertexId) -> Option<VertexId> {
        self.dest[x.0]
    }

    pub fn set(&mut self, x: VertexId, y: VertexId) -> Result<()> {
        let n = self.dest.len();
        if x.0 >= n || y.0 >= n {
            return domain(format!("shortcut {x} -> {y} out of range for {n} vertices"));
        }
        if x == y {
            return domain(format!("self-loop shortcut at {x}"));
        }
        self.dest[x.0] = Some(y);
        Ok(())
    }

    /// True when every vertex has a shortcut.
    pub fn is_total(&self) -> bool {
        self.dest.iter().all(Option::is_some)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, Option<VertexId>)> + '_ {
        self.dest.iter().enumerate().map(|(x, d)| (VertexId(x), *d))
    }

    /// `vertex,dest` table; absent shortcuts leave `dest` empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = io::writer(out);
        w.write_record(["vertex", "dest"])?;
        for (x, d) in self.iter() {
            w.write_record([x.to_string(), d.map(|d| d.to_string()).unwrap_or_default()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Draws shortcut destinations from a distance distribution: a distance by
/// weight, then a uniform vertex among those at that distance.
#[derive(Debug, Clone)]
pub struct ShortcutSampler {
    index: WeightedIndex<f64>,
}

impl ShortcutSampler {
    pub fn new<T: Scalar, G: Topology + ?Sized>(dist: &DistanceDistribution<T>, topology: &G) -> Result<Self> {
        if dist.max_distance() != topology.max_distance() {
            return domain(format!(
                "distribution covers distances 1..={} but topology reaches {}",
                dist.max_distance(),
                topology.max_distance()
            ));
        }
        let weights: Vec<f64> = dist.probs().iter().map(Scalar::as_f64).collect();
        let index = WeightedIndex::new(&weights).map_err(|e| Error::Domain(e.to_string()))?;
        Ok(Self { index })
    }

    #[inline]
    pub fn sample_distance<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index.sample(rng) + 1
    }

    #[inline]
    pub fn sample_dest<G: Topology + ?Sized, R: Rng + ?Sized>(&self, topology: &G, x: VertexId, rng: &mut R) -> VertexId {
        let d = self.sample_distance(rng);
        let size = topology.shell_size(d);
        let i = if size == 1 { 0 } else { rng.random_range(0..size) };
        topology.translate(x, topology.shell_member(d, i))
    }
}

/// Independently draws one shortcut per vertex.
pub fn sample_config<T: Scalar, G: Topology + ?Sized, R: Rng + ?Sized>(
    dist: &DistanceDistribution<T>,
    topology: &G,
    rng: &mut R,
) -> Result<ShortcutConfig> {
    let sampler = ShortcutSampler::new(dist, topology)?;
    let dest = (0..topology.len())
        .map(|x| Some(sampler.sample_dest(topology, VertexId(x), rng)))
        .collect();
    Ok(ShortcutConfig { dest })
}

/// Pooled frequency of shortcut lengths over all vertices of all configs.
pub fn empirical_marginal<G: Topology + ?Sized>(
    configs: &[ShortcutConfig],
    topology: &G,
) -> Result<DistanceDistribution<f64>> {
    if configs.is_empty() {
        return domain("no configurations to pool");
    }
    let mut counts = vec![0u64; topology.max_distance()];
    for cfg in configs {
        if cfg.len() != topology.len() {
            return domain("configuration size does not match topology");
        }
        for (x, d) in cfg.iter() {
            let y = d.ok_or_else(|| Error::Domain(format!("vertex {x} has no shortcut")))?;
            counts[topology.distance(x, y) - 1] += 1;
        }
    }
    DistanceDistribution::from_weights(counts.into_iter().map(|c| c as f64).collect())
}

/// Where a walk finds the shortcut of the vertex it is standing on.
pub trait ShortcutSource {
    fn shortcut<R: Rng + ?Sized>(&mut self, x: VertexId, rng: &mut R) -> Option<VertexId>;
}

impl ShortcutSource for &ShortcutConfig {
    #[inline]
    fn shortcut<R: Rng + ?Sized>(&mut self, x: VertexId, _rng: &mut R) -> Option<VertexId> {
        self.get(x)
    }
}

/// A freshly sampled independent configuration, drawn lazily.
///
/// A greedy walk never revisits a vertex, so drawing each shortcut the first
/// time it is looked at has the same law as sampling the whole configuration
/// up front.
#[derive(Debug, Clone, Copy)]
pub struct FreshShortcuts<'a, G: ?Sized> {
    pub sampler: &'a ShortcutSampler,
    pub topology: &'a G,
}

impl<G: Topology + ?Sized> ShortcutSource for FreshShortcuts<'_, G> {
    #[inline]
    fn shortcut<R: Rng + ?Sized>(&mut self, x: VertexId, rng: &mut R) -> Option<VertexId> {
        Some(self.sampler.sample_dest(self.topology, x, rng))
    }
}
