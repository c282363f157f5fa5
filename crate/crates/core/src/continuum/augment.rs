//! Shortcut measures over radius and their Poisson augmentation: each point
//! `x` receives the owners of a Poisson sample of its measure, minus the
//! sample points that fall in its own cell.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::delaunay::DelaunayGraph;
use super::space::{ball_volume, check_dim, max_radius, wrap, NearestIndex, Point, PointSet};
use crate::error::{domain, Error, Result};
use crate::io;

/// A shortcut intensity as a function of distance from the owner.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialMeasure {
    /// Density `1 / (ln n · Vol(r))` per unit volume at distance `r`.
    Kleinberg { n: usize, dim: usize },
    /// Mass per radial bin; `edges` has one more entry than `masses`.
    Binned { dim: usize, edges: Vec<f64>, masses: Vec<f64> },
}

/// Fraction of the circle of radius `r` (centred at the origin) lying in the
/// square `[-1/2, 1/2]²`.
pub fn square_arc_fraction(r: f64) -> f64 {
    if r <= 0.5 {
        1.0
    } else if r >= FRAC_1_SQRT_2 {
        0.0
    } else {
        1.0 - 4.0 / PI * (0.5 / r).acos()
    }
}

/// `k` bins: `[0, 1/(4n)]`, then log-spaced up to the maximum distance.
pub fn log_bin_edges(n: usize, dim: usize, k: usize) -> Result<Vec<f64>> {
    check_dim(dim)?;
    if k < 2 {
        return domain("need at least two bins");
    }
    let lo = 1.0 / (4.0 * n as f64);
    let hi = max_radius(dim);
    if lo >= hi {
        return domain("scale too small for log-spaced bins");
    }
    let mut edges = vec![0.0];
    for i in 0..k {
        edges.push(lo * (hi / lo).powf(i as f64 / (k - 1) as f64));
    }
    *edges.last_mut().expect("k >= 2") = hi;
    Ok(edges)
}

impl RadialMeasure {
    pub fn kleinberg(n: usize, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if n < 2 {
            return domain("scale must be at least 2");
        }
        Ok(Self::Kleinberg { n, dim })
    }

    pub fn binned(dim: usize, edges: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if edges.len() != masses.len() + 1 || masses.is_empty() {
            return domain("binned measure needs one more edge than bins");
        }
        if edges.windows(2).any(|w| !(w[0] < w[1])) || edges[0] < 0.0 {
            return domain("bin edges must increase from a nonnegative start");
        }
        if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return domain("bin masses must be finite and nonnegative");
        }
        Ok(Self::Binned { dim, edges, masses })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Kleinberg { dim, .. } | Self::Binned { dim, .. } => *dim,
        }
    }

    /// Mass per unit radius at distance `r` for the analytic form: the
    /// density times the length of the sphere of radius `r` inside the
    /// space. `None` for binned measures.
    pub fn radial_density(&self, r: f64) -> Option<f64> {
        match *self {
            Self::Kleinberg { n, dim } => {
                if r <= 0.0 || r > max_radius(dim) {
                    return Some(0.0);
                }
                let sphere = if dim == 1 { 2.0 } else { 2.0 * PI * r * square_arc_fraction(r) };
                Some(sphere / ((n as f64).ln() * ball_volume(dim, r)))
            }
            Self::Binned { .. } => None,
        }
    }

    /// Mass between radii `a` and `b`.
    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        match self {
            Self::Kleinberg { n, dim } => {
                let hi = max_radius(*dim);
                let (a, b) = (a.max(0.0), b.min(hi));
                if a <= 0.0 || b <= a {
                    return if a <= 0.0 && b > 0.0 { f64::INFINITY } else { 0.0 };
                }
                let ln_n = (*n as f64).ln();
                if *dim == 1 {
                    (b / a).ln() / ln_n
                } else {
                    // flat part up to 1/2, then the arc fraction numerically
                    let split = b.min(0.5);
                    let mut m = if a < split { 2.0 * (split / a).ln() / ln_n } else { 0.0 };
                    let (c, d) = (a.max(0.5), b);
                    if d > c {
                        m += simpson(|r| self.radial_density(r).unwrap_or(0.0), c, d, 512);
                    }
                    m
                }
            }
            Self::Binned { edges, masses, .. } => {
                let mut m = 0.0;
                for (i, &mass) in masses.iter().enumerate() {
                    let (lo, hi) = (edges[i], edges[i + 1]);
                    let overlap = (hi.min(b) - lo.max(a)).max(0.0);
                    if overlap > 0.0 {
                        m += mass * overlap / (hi - lo);
                    }
                }
                m
            }
        }
    }

    /// Projects onto bins; the innermost bin (reaching radius 0, where the
    /// analytic mass diverges) gets zero.
    pub fn to_bins(&self, edges: &[f64]) -> Result<Self> {
        let masses = edges
            .windows(2)
            .map(|w| if w[0] <= 0.0 && matches!(self, Self::Kleinberg { .. }) { 0.0 } else { self.mass_between(w[0], w[1]) })
            .collect();
        Self::binned(self.dim(), edges.to_vec(), masses)
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            Self::Binned { masses, .. } => masses.iter().sum(),
            Self::Kleinberg { .. } => f64::INFINITY,
        }
    }

    /// Rescales a binned measure to unit mass.
    pub fn normalized(&self) -> Result<Self> {
        match self {
            Self::Binned { dim, edges, masses } => {
                let total: f64 = masses.iter().sum();
                if !(total > 0.0) {
                    return domain("cannot normalize a zero measure");
                }
                Self::binned(*dim, edges.clone(), masses.iter().map(|m| m / total).collect())
            }
            Self::Kleinberg { .. } => domain("the analytic measure has infinite mass"),
        }
    }

    pub fn masses(&self) -> Option<&[f64]> {
        match self {
            Self::Binned { masses, .. } => Some(masses),
            Self::Kleinberg { .. } => None,
        }
    }

    pub fn edges(&self) -> Option<&[f64]> {
        match self {
            Self::Binned { edges, .. } => Some(edges),
            Self::Kleinberg { .. } => None,
        }
    }

    /// Total variation between two binned measures on the same bins.
    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        match (self, other) {
            (Self::Binned { edges: e1, masses: a, .. }, Self::Binned { edges: e2, masses: b, .. }) if e1 == e2 => {
                Ok(0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>())
            }
            _ => domain("total variation needs binned measures on identical bins"),
        }
    }

    /// `bin_lo,bin_hi,mass`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let (Some(edges), Some(masses)) = (self.edges(), self.masses()) else {
            return domain("only binned measures serialize");
        };
        let mut w = io::writer(out);
        w.write_record(["bin_lo", "bin_hi", "mass"])?;
        for (i, m) in masses.iter().enumerate() {
            w.write_record([io::float(edges[i]), io::float(edges[i + 1]), io::float(*m)])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
    let steps = steps + steps % 2;
    let h = (b - a) / steps as f64;
    let mut s = f(a) + f(b);
    for i in 1..steps {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Shortcut targets of every point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuumConfig {
    pub targets: Vec<Vec<usize>>,
}

impl ContinuumConfig {
    pub fn none(len: usize) -> Self {
        Self { targets: vec![Vec::new(); len] }
    }

    pub fn mean_degree(&self) -> f64 {
        self.targets.iter().map(Vec::len).sum::<usize>() as f64 / self.targets.len() as f64
    }

    /// `src,dst`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = io::writer(out);
        w.write_record(["src", "dst"])?;
        for (a, ts) in self.targets.iter().enumerate() {
            for b in ts {
                w.write_record([a.to_string(), b.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// What the augmentation of one point produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Augmentation {
    pub targets: Vec<usize>,
    /// Sample points that survived the support checks, with their distance
    /// from the owner; includes those landing in the owner's own cell.
    pub raw_radii: Vec<f64>,
    /// Sample points rejected because they fell in the owner's own cell.
    pub rejected_own_cell: usize,
}

/// Point-set context shared by every augmentation.
#[derive(Debug, Clone)]
pub struct CellLookup {
    pub index: NearestIndex,
    /// Distance from each point to its nearest other point.
    pub nearest: Vec<f64>,
}

impl CellLookup {
    pub fn new(set: &PointSet, graph: &DelaunayGraph) -> Self {
        Self { index: NearestIndex::new(set), nearest: graph.nearest_distances(set) }
    }
}

fn displaced(set: &PointSet, x: usize, r: f64, dir: [f64; 2]) -> Point {
    let p = set.points[x];
    if set.dim == 1 {
        [wrap(p[0] + r * dir[0]), 0.0]
    } else {
        [wrap(p[0] + r * dir[0]), wrap(p[1] + r * dir[1])]
    }
}

fn record(out: &mut Augmentation, lookup: &CellLookup, set: &PointSet, x: usize, r: f64, dir: [f64; 2]) {
    let w = displaced(set, x, r, dir);
    out.raw_radii.push(r);
    let owner = lookup.index.nearest(&w);
    if owner == x {
        out.rejected_own_cell += 1;
    } else if !out.targets.contains(&owner) {
        out.targets.push(owner);
    }
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if mean <= 0.0 {
        return Ok(0);
    }
    Ok(Poisson::new(mean).map_err(|e| Error::Domain(e.to_string()))?.sample(rng) as u64)
}

/// Augments point `x` with the analytic measure. The ball of radius `δ/2`
/// (half the nearest-neighbor distance) lies inside the own cell, so only
/// radii in `[δ/2, r_max]` are sampled.
pub fn sample_kleinberg_shortcuts<R: Rng + ?Sized>(
    x: usize,
    set: &PointSet,
    lookup: &CellLookup,
    n: usize,
    rng: &mut R,
) -> Result<Augmentation> {
    let lo = lookup.nearest[x] / 2.0;
    let hi = max_radius(set.dim);
    let mut out = Augmentation::default();
    if lo >= hi {
        return Ok(out);
    }
    let ln_n = (n as f64).ln();
    let log_ratio = (hi / lo).ln();
    // mass of dr·S(r)/(ln n · Vol(r)) over the full disk: (dim) · ln(hi/lo) / ln n
    let mean = set.dim as f64 * log_ratio / ln_n;
    let count = poisson_count(mean, rng)?;
    for _ in 0..count {
        let r = lo * (rng.random::<f64>() * log_ratio).exp();
        let dir = if set.dim == 1 {
            [if rng.random_bool(0.5) { 1.0 } else { -1.0 }, 0.0]
        } else {
            let theta = rng.random_range(0.0..2.0 * PI);
            [theta.cos(), theta.sin()]
        };
        // displacements outside the fundamental square would double count
        if set.dim == 2 && (r * dir[0]).abs().max((r * dir[1]).abs()) > 0.5 {
            continue;
        }
        record(&mut out, lookup, set, x, r, dir);
    }
    Ok(out)
}

/// Augments point `x` with a binned measure: a bin by mass, a uniform radius
/// within it, a uniform direction redrawn until the displacement stays in
/// the fundamental square.
pub fn sample_binned_shortcuts<R: Rng + ?Sized>(
    x: usize,
    set: &PointSet,
    lookup: &CellLookup,
    measure: &RadialMeasure,
    rng: &mut R,
) -> Result<Augmentation> {
    let RadialMeasure::Binned { edges, masses, .. } = measure else {
        return domain("binned sampler needs a binned measure");
    };
    let total: f64 = masses.iter().sum();
    let mut out = Augmentation::default();
    let count = poisson_count(total, rng)?;
    if count == 0 {
        return Ok(out);
    }
    let pick = rand::distr::weighted::WeightedIndex::new(masses).map_err(|e| Error::Domain(e.to_string()))?;
    for _ in 0..count {
        let b = pick.sample(rng);
        let r = rng.random_range(edges[b]..edges[b + 1]);
        let dir = if set.dim == 1 {
            [if rng.random_bool(0.5) { 1.0 } else { -1.0 }, 0.0]
        } else {
            loop {
                let theta = rng.random_range(0.0..2.0 * PI);
                let d = [theta.cos(), theta.sin()];
                if (r * d[0]).abs().max((r * d[1]).abs()) <= 0.5 {
                    break d;
                }
            }
        };
        record(&mut out, lookup, set, x, r, dir);
    }
    Ok(out)
}

/// Augments every point, by the analytic measure or a binned one.
pub fn augment<R: Rng + ?Sized>(
    set: &PointSet,
    lookup: &CellLookup,
    measure: &RadialMeasure,
    rng: &mut R,
) -> Result<ContinuumConfig> {
    let mut targets = Vec::with_capacity(set.len());
    for x in 0..set.len() {
        let a = match measure {
            RadialMeasure::Kleinberg { n, .. } => sample_kleinberg_shortcuts(x, set, lookup, *n, rng)?,
            RadialMeasure::Binned { .. } => sample_binned_shortcuts(x, set, lookup, measure, rng)?,
        };
        targets.push(a.targets);
    }
    Ok(ContinuumConfig { targets })
}
