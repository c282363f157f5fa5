//! Greedy routing over Delaunay edges plus shortcuts, and radial hit
//! statistics of the resulting walks.

use rand::Rng;
use rayon::prelude::*;

use super::augment::{log_bin_edges, sample_binned_shortcuts, CellLookup, ContinuumConfig, RadialMeasure};
use super::delaunay::{build_delaunay, DelaunayGraph};
use super::space::{check_dim, max_radius, sample_points, PointSet};
use crate::error::{domain, Error, Result};
use crate::routing::{chunk_rng, draw_pair, summarize, TauEstimate, WalkRecord};
use crate::topology::VertexId;

/// Greedy walk from `start` to `dest`. Each step goes to the neighbor or
/// shortcut target closest to `dest`; shortcuts win ties and remaining ties
/// are broken uniformly.
pub fn continuum_greedy_walk<R: Rng + ?Sized>(
    set: &PointSet,
    graph: &DelaunayGraph,
    config: &ContinuumConfig,
    start: usize,
    dest: usize,
    rng: &mut R,
) -> Result<WalkRecord> {
    let n = set.len();
    if start >= n || dest >= n {
        return domain(format!("walk endpoints {start}, {dest} out of range for {n} points"));
    }
    let mut path = vec![VertexId(start)];
    let mut current = start;
    let mut ties = Vec::new();
    while current != dest {
        let here = set.distance(current, dest);
        let mut best = f64::INFINITY;
        let mut best_shortcut = None;
        for &y in &config.targets[current] {
            let d = set.distance(y, dest);
            if d < best {
                best = d;
                best_shortcut = Some(y);
            }
        }
        let next = match best_shortcut {
            Some(y) if graph.neighbors(current).iter().all(|&b| set.distance(b, dest) >= best) => y,
            _ => {
                ties.clear();
                let mut best = f64::INFINITY;
                for &y in graph.neighbors(current) {
                    let d = set.distance(y, dest);
                    if d < best {
                        best = d;
                        ties.clear();
                    }
                    if d == best {
                        ties.push(y);
                    }
                }
                match ties.len() {
                    0 => return Err(Error::GeometryViolation { vertex: current, dest }),
                    1 => ties[0],
                    k => ties[rng.random_range(0..k)],
                }
            }
        };
        if set.distance(next, dest) >= here {
            return Err(Error::GeometryViolation { vertex: current, dest });
        }
        path.push(VertexId(next));
        current = next;
    }
    Ok(WalkRecord { start: VertexId(start), dest: VertexId(dest), length: path.len() - 1, path })
}

/// `walks` walks between uniform distinct pairs, in parallel chunks whose
/// streams derive from one draw of `rng`.
pub fn run_continuum_walks<R: Rng + ?Sized>(
    set: &PointSet,
    graph: &DelaunayGraph,
    config: &ContinuumConfig,
    walks: usize,
    rng: &mut R,
) -> Result<Vec<WalkRecord>> {
    const CHUNK: usize = 1024;
    let base: u64 = rng.random();
    let chunks = walks.div_ceil(CHUNK);
    let parts: Result<Vec<Vec<WalkRecord>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(base, c as u64);
            (0..CHUNK.min(walks - c * CHUNK))
                .map(|_| {
                    let (s, d) = draw_pair(set.len(), &mut rng);
                    continuum_greedy_walk(set, graph, config, s.0, d.0, &mut rng)
                })
                .collect()
        })
        .collect();
    Ok(parts?.into_iter().flatten().collect())
}

pub fn mean_length(walks: &[WalkRecord]) -> Result<TauEstimate> {
    if walks.is_empty() {
        return domain("no walks");
    }
    let (s, q) = walks.iter().fold((0.0, 0.0), |(s, q), w| (s + w.length as f64, q + (w.length * w.length) as f64));
    Ok(summarize(s, q, walks.len()))
}

/// Volume of the points at distance in `[a, b)` from a fixed point.
pub fn shell_volume(dim: usize, a: f64, b: f64) -> f64 {
    let b = b.min(max_radius(dim));
    if b <= a {
        return 0.0;
    }
    if dim == 1 {
        2.0 * (b - a)
    } else {
        square_disk_area(b) - square_disk_area(a.max(0.0))
    }
}

/// Area of the disk of radius `r` intersected with the unit square centred
/// on it: the disk minus four circular segments once `r > 1/2`.
fn square_disk_area(r: f64) -> f64 {
    let disk = std::f64::consts::PI * r * r;
    if r <= 0.5 {
        disk
    } else if r >= max_radius(2) {
        1.0
    } else {
        let segment = r * r * (0.5 / r).acos() - 0.5 * (r * r - 0.25).sqrt();
        disk - 4.0 * segment
    }
}

/// Radial hit profile relative to the destination.
#[derive(Debug, Clone, PartialEq)]
pub struct HitEstimate {
    /// Mean hits per walk in each bin.
    pub measure: RadialMeasure,
    pub stderr: Vec<f64>,
    /// Mean hits per walk overall, which is the mean walk length.
    pub tau: f64,
}

impl HitEstimate {
    /// Mean hits per unit volume in each bin.
    pub fn density(&self) -> Vec<f64> {
        let edges = self.measure.edges().expect("binned");
        let masses = self.measure.masses().expect("binned");
        masses
            .iter()
            .enumerate()
            .map(|(i, m)| m / shell_volume(self.measure.dim(), edges[i], edges[i + 1]))
            .collect()
    }
}

/// Bins every non-destination point of every walk by its distance to that
/// walk's destination.
pub fn estimate_hitting_measure(walks: &[WalkRecord], set: &PointSet, edges: &[f64]) -> Result<HitEstimate> {
    if walks.is_empty() {
        return domain("no walks to estimate from");
    }
    let k = edges.len().saturating_sub(1);
    RadialMeasure::binned(set.dim, edges.to_vec(), vec![0.0; k])?;
    let mut sum = vec![0.0; k];
    let mut sumsq = vec![0.0; k];
    let mut counts = vec![0u32; k];
    let mut total = 0usize;
    for w in walks {
        for x in w.forwarding_vertices() {
            let r = set.distance(x.0, w.dest.0);
            let i = edges.partition_point(|&e| e < r).clamp(1, k) - 1;
            counts[i] += 1;
        }
        total += w.length;
        for i in 0..k {
            if counts[i] > 0 {
                let c = counts[i] as f64;
                sum[i] += c;
                sumsq[i] += c * c;
                counts[i] = 0;
            }
        }
    }
    let m = walks.len();
    let stats: Vec<TauEstimate> = (0..k).map(|i| summarize(sum[i], sumsq[i], m)).collect();
    Ok(HitEstimate {
        measure: RadialMeasure::binned(set.dim, edges.to_vec(), stats.iter().map(|s| s.mean).collect())?,
        stderr: stats.iter().map(|s| s.stderr).collect(),
        tau: total as f64 / m as f64,
    })
}

/// Measures and diagnostics of the empirical balance iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceTrace {
    /// The starting measure (analytic, projected to bins and normalized)
    /// followed by one refinement per iteration.
    pub measures: Vec<RadialMeasure>,
    /// Total variation between successive measures.
    pub tv: Vec<f64>,
    /// Mean walk length observed in each iteration.
    pub taus: Vec<f64>,
}

/// Repeats `ℓ ← ĥ/τ̂` on freshly drawn point sets: the first iteration
/// augments with the analytic measure, later ones with the previous
/// binned estimate.
pub fn poisson_balance_iterate<R: Rng + ?Sized>(
    n: usize,
    dim: usize,
    iters: usize,
    walks_per_iter: usize,
    bins: usize,
    rng: &mut R,
) -> Result<BalanceTrace> {
    check_dim(dim)?;
    if iters == 0 || walks_per_iter == 0 {
        return domain("need at least one iteration and one walk");
    }
    let edges = log_bin_edges(n, dim, bins)?;
    let analytic = RadialMeasure::kleinberg(n, dim)?;
    let mut measures = vec![analytic.to_bins(&edges)?.normalized()?];
    let mut tv = Vec::new();
    let mut taus = Vec::new();
    for it in 0..iters {
        let mut set = sample_points(n, dim, rng)?;
        let graph = build_delaunay(&mut set, rng)?;
        let lookup = CellLookup::new(&set, &graph);
        let current = if it == 0 { &analytic } else { measures.last().expect("nonempty") };
        let config = augment_with(&set, &lookup, current, rng)?;
        let walks = run_continuum_walks(&set, &graph, &config, walks_per_iter, rng)?;
        let est = estimate_hitting_measure(&walks, &set, &edges)?;
        let next = est.measure.normalized()?;
        tv.push(next.total_variation(measures.last().expect("nonempty"))?);
        taus.push(est.tau);
        measures.push(next);
    }
    Ok(BalanceTrace { measures, tv, taus })
}

fn augment_with<R: Rng + ?Sized>(
    set: &PointSet,
    lookup: &CellLookup,
    measure: &RadialMeasure,
    rng: &mut R,
) -> Result<ContinuumConfig> {
    match measure {
        RadialMeasure::Binned { .. } => {
            let mut targets = Vec::with_capacity(set.len());
            for x in 0..set.len() {
                targets.push(sample_binned_shortcuts(x, set, lookup, measure, rng)?.targets);
            }
            Ok(ContinuumConfig { targets })
        }
        RadialMeasure::Kleinberg { .. } => super::augment::augment(set, lookup, measure, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::augment::augment;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize, dim: usize, seed: u64) -> (PointSet, DelaunayGraph, ChaCha8Rng) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut set = sample_points(n, dim, &mut rng).unwrap();
        let g = build_delaunay(&mut set, &mut rng).unwrap();
        (set, g, rng)
    }

    #[test]
    fn zero_length_walk() {
        let (set, g, mut rng) = setup(20, 1, 1);
        let w = continuum_greedy_walk(&set, &g, &ContinuumConfig::none(set.len()), 3, 3, &mut rng).unwrap();
        assert_eq!(w.length, 0);
        assert_eq!(w.path, vec![VertexId(3)]);
    }

    #[test]
    fn circle_without_shortcuts_follows_the_short_arc() {
        let set = PointSet::new(1, 6, (0..6).map(|i| [i as f64 / 6.0 + 0.01, 0.0]).collect()).unwrap();
        let mut s = set.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = build_delaunay(&mut s, &mut rng).unwrap();
        let none = ContinuumConfig::none(6);
        let w = continuum_greedy_walk(&set, &g, &none, 0, 2, &mut rng).unwrap();
        assert_eq!(w.path, vec![VertexId(0), VertexId(1), VertexId(2)]);
        let w = continuum_greedy_walk(&set, &g, &none, 0, 4, &mut rng).unwrap();
        assert_eq!(w.path, vec![VertexId(0), VertexId(5), VertexId(4)]);
        // random points well short of antipodal: hop count equals the points
        // strictly inside the arc plus one
        let (set, g, mut rng) = setup(100, 1, 2);
        for _ in 0..200 {
            let (a, b) = (rng.random_range(0..set.len()), rng.random_range(0..set.len()));
            if set.distance(a, b) > 0.25 {
                continue;
            }
            let w = continuum_greedy_walk(&set, &g, &ContinuumConfig::none(set.len()), a, b, &mut rng).unwrap();
            let d = set.distance(a, b);
            let (pa, pb) = (set.points[a][0], set.points[b][0]);
            let inside = (0..set.len())
                .filter(|&c| c != a && c != b)
                .filter(|&c| {
                    let pc = set.points[c][0];
                    let da = crate::continuum::space::distance(1, &[pa, 0.0], &[pc, 0.0]);
                    let db = crate::continuum::space::distance(1, &[pb, 0.0], &[pc, 0.0]);
                    (da + db - d).abs() < 1e-12
                })
                .count();
            assert_eq!(w.length, if a == b { 0 } else { inside + 1 });
            for pair in w.path.windows(2) {
                assert!(set.distance(pair[1].0, b) < set.distance(pair[0].0, b));
            }
        }
    }

    #[test]
    fn walks_with_shortcuts_progress_in_both_dims() {
        for (n, dim) in [(512, 1), (20, 2)] {
            let (set, g, mut rng) = setup(n, dim, 3);
            let lookup = CellLookup::new(&set, &g);
            let cfg = augment(&set, &lookup, &RadialMeasure::kleinberg(n, dim).unwrap(), &mut rng).unwrap();
            let walks = run_continuum_walks(&set, &g, &cfg, 3000, &mut rng).unwrap();
            assert_eq!(walks.len(), 3000);
            for w in &walks {
                assert_eq!(*w.path.last().unwrap(), w.dest);
                for pair in w.path.windows(2) {
                    assert!(set.distance(pair[1].0, w.dest.0) < set.distance(pair[0].0, w.dest.0));
                }
            }
        }
    }

    #[test]
    fn parallel_walks_are_seeded() {
        let (set, g, _) = setup(300, 1, 4);
        let cfg = ContinuumConfig::none(set.len());
        let a = run_continuum_walks(&set, &g, &cfg, 5000, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = run_continuum_walks(&set, &g, &cfg, 5000, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn shell_volumes_partition_space() {
        let edges = log_bin_edges(64, 2, 20).unwrap();
        let total: f64 = edges.windows(2).map(|w| shell_volume(2, w[0], w[1])).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((shell_volume(2, 0.0, 0.6) - shell_volume(2, 0.0, 0.55) - shell_volume(2, 0.55, 0.6)).abs() < 1e-15);
        assert!((shell_volume(1, 0.0, 0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hit_estimate_bookkeeping() {
        let (set, g, mut rng) = setup(200, 1, 5);
        let edges = log_bin_edges(200, 1, 16).unwrap();
        let none = ContinuumConfig::none(set.len());
        let lone = continuum_greedy_walk(&set, &g, &none, 7, 7, &mut rng).unwrap();
        let est = estimate_hitting_measure(&[lone], &set, &edges).unwrap();
        assert!(est.measure.masses().unwrap().iter().all(|&m| m == 0.0));
        assert_eq!(est.tau, 0.0);

        let walks = run_continuum_walks(&set, &g, &none, 2000, &mut rng).unwrap();
        let est = estimate_hitting_measure(&walks, &set, &edges).unwrap();
        assert!((est.measure.total_mass() - est.tau).abs() < 1e-9);
        assert_eq!(est.tau, mean_length(&walks).unwrap().mean);
        assert!(estimate_hitting_measure(&[], &set, &edges).is_err());
    }

    #[test]
    fn shortcut_free_profile_decreases() {
        // hits per unit length fall off with distance: a point at distance r
        // is passed by walks that start farther out on its side
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let edges: Vec<f64> = (0..=10).map(|i| i as f64 * 0.05).collect();
        let mut walks = Vec::new();
        let mut sets = Vec::new();
        for _ in 0..20 {
            let mut set = sample_points(200, 1, &mut rng).unwrap();
            let g = build_delaunay(&mut set, &mut rng).unwrap();
            walks.push(run_continuum_walks(&set, &g, &ContinuumConfig::none(set.len()), 5000, &mut rng).unwrap());
            sets.push(set);
        }
        let per_set: Vec<HitEstimate> =
            walks.iter().zip(&sets).map(|(w, s)| estimate_hitting_measure(w, s, &edges).unwrap()).collect();
        let k = edges.len() - 1;
        let dens: Vec<f64> = (0..k).map(|i| per_set.iter().map(|e| e.density()[i]).sum::<f64>() / 20.0).collect();
        let se: Vec<f64> = (0..k)
            .map(|i| {
                let vol = shell_volume(1, edges[i], edges[i + 1]);
                (per_set.iter().map(|e| e.stderr[i].powi(2)).sum::<f64>()).sqrt() / 20.0 / vol
            })
            .collect();
        for i in 1..k {
            assert!(dens[i] <= dens[i - 1] + 4.0 * (se[i].hypot(se[i - 1])), "bin {i}: {dens:?}");
        }
    }

    #[test]
    fn balance_iteration_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = poisson_balance_iterate(128, 1, 1, 2000, 16, &mut rng).unwrap();
        assert_eq!(t.measures.len(), 2);
        assert_eq!(t.tv.len(), 1);
        for m in &t.measures {
            assert!((m.total_mass() - 1.0).abs() < 1e-9);
        }
        assert!(poisson_balance_iterate(128, 1, 0, 10, 16, &mut rng).is_err());
    }
}
