//! Independent brute-force oracles checked against the library.

mod common;

use std::collections::{HashMap, HashSet, VecDeque};

use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smallworld::balance::{hitting_profile_cycle, hitting_profile_general};
use smallworld::continuum::{
    build_delaunay, distance, sample_kleinberg_shortcuts, sample_points, CellLookup, NearestIndex, Point, PointSet,
};
use smallworld::rewiring::{destination_sampling_step, ChainState};
use smallworld::shortcuts::{harmonic_cycle, DistanceDistribution, ShortcutConfig};
use smallworld::{CycleTopology, VertexId};

#[test]
fn cycle_recursion_matches_enumeration_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 3..=5 {
        let mut cases = vec![harmonic_cycle::<BigRational>(n).unwrap()];
        for _ in 0..4 {
            let w: Vec<BigRational> = (1..n).map(|_| common::rat(rng.random_range(0..7), 1)).collect();
            if w.iter().all(|x| x.is_zero()) {
                continue;
            }
            cases.push(DistanceDistribution::from_weights(w).unwrap());
        }
        for ell in cases {
            let want = common::enumerate_profile(ell.probs(), n);
            let got = hitting_profile_cycle(&ell, n).unwrap();
            assert_eq!(got.h, want, "n = {n}, ell = {:?}", ell.probs());
            let general = hitting_profile_general(&ell, &CycleTopology::new(n).unwrap()).unwrap();
            assert_eq!(general.h, want);
            let tau: BigRational = want.iter().cloned().sum();
            assert_eq!(got.tau, tau);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hitting_is_nonincreasing_in_distance(
        k in 3u32..7,
        weights in proptest::collection::vec(0.0f64..1.0, 63),
    ) {
        let n = 1usize << k;
        let mut w = weights[..n - 1].to_vec();
        w[0] += 1e-3;
        let ell = DistanceDistribution::from_weights(w).unwrap();
        let h = hitting_profile_cycle(&ell, n).unwrap().h;
        for i in 1..h.len() {
            prop_assert!(h[i] <= h[i - 1] + 1e-12, "h[{}] = {} > h[{}] = {}", i + 1, h[i], i, h[i - 1]);
        }
    }
}

// ---- rewiring chain on the 4-cycle ----

const N: usize = 4;

fn dist(a: usize, b: usize) -> usize {
    (a + N - b) % N
}

/// Forwarding vertices of the walk `y → z` under `cfg` (shortcut targets).
fn forwarding(cfg: &[usize; N], y: usize, z: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut v = y;
    while v != z {
        out.push(v);
        let base = (v + N - 1) % N;
        let s = cfg[v];
        v = if dist(s, z) < dist(v, z) && dist(s, z) <= dist(base, z) { s } else { base };
    }
    out
}

fn all_configs() -> Vec<[usize; N]> {
    let mut out = Vec::new();
    for code in 0..3usize.pow(N as u32) {
        let mut c = [0; N];
        let mut rest = code;
        for (v, slot) in c.iter_mut().enumerate() {
            slot.clone_from(&((v + 1 + rest % 3) % N));
            rest /= 3;
        }
        out.push(c);
    }
    out
}

/// Exact one-step law of destination sampling from `cfg`.
fn transition_law(cfg: &[usize; N], p: f64) -> HashMap<[usize; N], f64> {
    let mut law = HashMap::new();
    let pair = 1.0 / (N * N) as f64;
    *law.entry(*cfg).or_insert(0.0) += N as f64 * pair;
    for y in 0..N {
        for z in (0..N).filter(|&z| z != y) {
            let fw = forwarding(cfg, y, z);
            for mask in 0..(1u32 << fw.len()) {
                let mut next = *cfg;
                let mut prob = pair;
                for (i, &v) in fw.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        next[v] = z;
                        prob *= p;
                    } else {
                        prob *= 1.0 - p;
                    }
                }
                *law.entry(next).or_insert(0.0) += prob;
            }
        }
    }
    law
}

#[test]
fn destination_sampling_is_irreducible_on_small_cycle() {
    let p = 0.1;
    let configs = all_configs();
    assert_eq!(configs.len(), 81);
    let index: HashMap<[usize; N], usize> = configs.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let succ: Vec<Vec<usize>> = configs
        .iter()
        .map(|c| transition_law(c, p).into_iter().filter(|&(_, q)| q > 0.0).map(|(d, _)| index[&d]).collect())
        .collect();
    for from in 0..configs.len() {
        let mut seen = HashSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(a) = queue.pop_front() {
            for &b in &succ[a] {
                if seen.insert(b) {
                    queue.push_back(b);
                }
            }
        }
        assert_eq!(seen.len(), 81, "not every configuration reachable from {:?}", configs[from]);
    }

    // any single shortcut can be reset to any target with the stated probability
    let bound = p * (1.0 - p).powi(N as i32 - 2) / (N * N) as f64;
    for c in &configs {
        let law = transition_law(c, p);
        let total: f64 = law.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
        for x in 0..N {
            for y in (0..N).filter(|&y| y != x && y != c[x]) {
                let mut next = *c;
                next[x] = y;
                let q = law.get(&next).copied().unwrap_or(0.0);
                assert!(q >= bound, "{c:?}: {x} -> {y} has probability {q} < {bound}");
            }
        }
    }
}

#[test]
fn library_step_follows_the_exact_law() {
    let p = 0.3;
    let topo = CycleTopology::new(N).unwrap();
    let start = [3, 3, 1, 2];
    let law = transition_law(&start, p);
    let config = ShortcutConfig::from_dests(start.iter().map(|&d| VertexId(d)).collect()).unwrap();
    let mut state = ChainState::from_config(config.clone(), 5);
    let trials = 200_000;
    let mut counts: HashMap<[usize; N], usize> = HashMap::new();
    for _ in 0..trials {
        state.config = config.clone();
        destination_sampling_step(&mut state, &topo, p).unwrap();
        let mut next = [0; N];
        for (v, d) in state.config.iter() {
            next[v.0] = d.unwrap().0;
        }
        *counts.entry(next).or_default() += 1;
    }
    for (cfg, &k) in &counts {
        assert!(law.contains_key(cfg), "impossible transition to {cfg:?}");
        let q = law[cfg];
        let sd = (q * (1.0 - q) / trials as f64).sqrt();
        assert!((k as f64 / trials as f64 - q).abs() < 5.0 * sd + 1e-9, "{cfg:?}: {k} vs {q}");
    }
    for (cfg, &q) in &law {
        if q > 1e-3 {
            assert!(counts.contains_key(cfg), "never saw {cfg:?} (probability {q})");
        }
    }
}

// ---- continuum geometry ----

/// Delaunay adjacency on the unit torus by testing every candidate triangle
/// for an empty circumcircle among the periodic images.
fn brute_delaunay_torus(points: &[Point]) -> Vec<HashSet<usize>> {
    let n = points.len();
    let mut images = Vec::new();
    for dx in -2i32..=2 {
        for dy in -2i32..=2 {
            for (i, p) in points.iter().enumerate() {
                images.push((i, [p[0] + dx as f64, p[1] + dy as f64]));
            }
        }
    }
    let mut adj = vec![HashSet::new(); n];
    // an empty circle has radius below sqrt(2)/2, so partners lie within sqrt(2)
    let reach = 2f64.sqrt() + 1e-9;
    for (a, pa) in points.iter().enumerate() {
        let near: Vec<&(usize, Point)> = images
            .iter()
            .filter(|(_, q)| {
                let d = ((q[0] - pa[0]).powi(2) + (q[1] - pa[1]).powi(2)).sqrt();
                d > 0.0 && d < reach
            })
            .collect();
        for i in 0..near.len() {
            for j in i + 1..near.len() {
                let (b, pb) = near[i];
                let (c, pc) = near[j];
                let Some((center, r2)) = circumcircle(pa, pb, pc) else { continue };
                let empty = images.iter().all(|(_, q)| {
                    let d2 = (q[0] - center[0]).powi(2) + (q[1] - center[1]).powi(2);
                    d2 >= r2 * (1.0 - 1e-12)
                });
                if empty {
                    for (u, v) in [(a, *b), (a, *c), (*b, *c)] {
                        if u != v {
                            adj[u].insert(v);
                            adj[v].insert(u);
                        }
                    }
                }
            }
        }
    }
    adj
}

fn circumcircle(a: &Point, b: &Point, c: &Point) -> Option<(Point, f64)> {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
    let d = 2.0 * (bx * cy - by * cx);
    if d.abs() < 1e-14 {
        return None;
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    Some(([a[0] + ux, a[1] + uy], ux * ux + uy * uy))
}

#[test]
fn torus_delaunay_matches_empty_circle_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..40 {
        let count = rng.random_range(3..=12);
        let points: Vec<Point> = (0..count).map(|_| [rng.random(), rng.random()]).collect();
        let mut set = PointSet::new(2, 4, points.clone()).unwrap();
        let graph = build_delaunay(&mut set, &mut rng).unwrap();
        assert_eq!(set.jitter_rounds, 0);
        let want = brute_delaunay_torus(&points);
        for x in 0..count {
            let got: HashSet<usize> = graph.neighbors(x).iter().copied().collect();
            assert_eq!(got, want[x], "trial {trial}, point {x} of {count}");
        }
    }
}

#[test]
fn circle_delaunay_links_cyclic_neighbors() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let set = {
            let mut s = sample_points(12, 1, &mut rng).unwrap();
            build_delaunay(&mut s, &mut rng).map(|g| (s, g)).unwrap()
        };
        let (set, graph) = set;
        let mut order: Vec<usize> = (0..set.len()).collect();
        order.sort_by(|&a, &b| set.points[a][0].total_cmp(&set.points[b][0]));
        let m = order.len();
        for (k, &x) in order.iter().enumerate() {
            let want: HashSet<usize> = [order[(k + 1) % m], order[(k + m - 1) % m]].into_iter().filter(|&y| y != x).collect();
            let got: HashSet<usize> = graph.neighbors(x).iter().copied().collect();
            assert_eq!(got, want);
        }
    }
}

#[test]
fn nearest_index_agrees_with_linear_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for dim in [1, 2] {
        for _ in 0..20 {
            let set = sample_points(if dim == 1 { 300 } else { 15 }, dim, &mut rng).unwrap();
            let index = NearestIndex::new(&set);
            for _ in 0..500 {
                let q: Point = if dim == 1 { [rng.random(), 0.0] } else { [rng.random(), rng.random()] };
                let got = index.nearest(&q);
                let best = (0..set.len()).map(|i| distance(dim, &q, &set.points[i])).fold(f64::INFINITY, f64::min);
                assert_eq!(distance(dim, &q, &set.points[got]), best);
            }
        }
    }
}

/// A position within a quarter of `|z - x|` of `z` belongs to a cell whose
/// owner is within half of `|z - x|`.
#[test]
fn nearby_positions_have_nearby_owners() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    let mut checked = 0;
    while checked < 100_000 {
        let dim = 1 + checked % 2;
        let set = sample_points(if dim == 1 { 200 } else { 14 }, dim, &mut rng).unwrap();
        let index = NearestIndex::new(&set);
        for _ in 0..1000 {
            let x = rng.random_range(0..set.len());
            let z = rng.random_range(0..set.len());
            if x == z {
                continue;
            }
            let span = set.distance(x, z);
            let r = span / 4.0 * rng.random::<f64>().sqrt();
            let pz = set.points[z];
            let w: Point = if dim == 1 {
                let s = if rng.random_bool(0.5) { r } else { -r };
                [(pz[0] + s).rem_euclid(1.0), 0.0]
            } else {
                let t = rng.random_range(0.0..std::f64::consts::TAU);
                [(pz[0] + r * t.cos()).rem_euclid(1.0), (pz[1] + r * t.sin()).rem_euclid(1.0)]
            };
            if distance(dim, &pz, &w) > span / 4.0 {
                continue;
            }
            let y = index.nearest(&w);
            assert!(set.distance(z, y) <= span / 2.0, "owner {y} of {w:?} too far from {z}");
            checked += 1;
        }
    }
}

#[test]
fn circle_shortcut_radii_follow_the_analytic_density() {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let n = 256;
    let mut edges: Vec<f64> = (0..=12).map(|i| 0.5 * 2f64.powi(-i)).rev().collect();
    edges[0] = 0.0;
    let k = edges.len() - 1;
    let mut observed = vec![0.0; k];
    let mut expected = vec![0.0; k];
    let ln_n = (n as f64).ln();
    for _ in 0..40 {
        let mut set = sample_points(n, 1, &mut rng).unwrap();
        let graph = build_delaunay(&mut set, &mut rng).unwrap();
        let lookup = CellLookup::new(&set, &graph);
        for x in 0..set.len() {
            let lo = lookup.nearest[x] / 2.0;
            for i in 0..k {
                let (a, b) = (edges[i].max(lo), edges[i + 1]);
                if b > a {
                    expected[i] += (b / a).ln() / ln_n;
                }
            }
            let aug = sample_kleinberg_shortcuts(x, &set, &lookup, n, &mut rng).unwrap();
            for r in aug.raw_radii {
                let i = edges.partition_point(|&e| e < r).clamp(1, k) - 1;
                observed[i] += 1.0;
            }
        }
    }
    for i in 0..k {
        let sd = expected[i].sqrt().max(1.0);
        assert!(
            (observed[i] - expected[i]).abs() < 5.0 * sd,
            "bin [{}, {}]: {} observed, {} expected",
            edges[i],
            edges[i + 1],
            observed[i],
            expected[i]
        );
    }
}
