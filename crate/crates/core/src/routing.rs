//! Greedy routing over a base topology plus shortcuts, and Monte Carlo
//! estimates of the expected walk length.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::io;
use crate::shortcuts::{FreshShortcuts, ShortcutConfig, ShortcutSampler, ShortcutSource};
use crate::topology::{Topology, VertexId};

/// One greedy walk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkRecord {
    pub start: VertexId,
    pub dest: VertexId,
    /// Visited vertices, `start` first and `dest` last.
    pub path: Vec<VertexId>,
    pub length: usize,
}

impl WalkRecord {
    /// The vertices that routed a message onward (everything but `dest`).
    pub fn forwarding_vertices(&self) -> &[VertexId] {
        &self.path[..self.path.len() - 1]
    }
}

/// `start,dest,length` rows.
pub fn write_walks_csv<W: Write>(walks: &[WalkRecord], out: W) -> Result<()> {
    let mut w = io::writer(out);
    w.write_record(["start", "dest", "length"])?;
    for walk in walks {
        w.write_record([walk.start.to_string(), walk.dest.to_string(), walk.length.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// One greedy move from `current` toward `dest`.
///
/// The shortcut wins when it is strictly closer than `current` and at least
/// as close as every base neighbor; otherwise a uniformly random base
/// neighbor at minimal distance is taken.
pub fn greedy_step<G, S, R>(topology: &G, shortcuts: &mut S, current: VertexId, dest: VertexId, rng: &mut R) -> Result<VertexId>
where
    G: Topology + ?Sized,
    S: ShortcutSource,
    R: Rng + ?Sized,
{
    if current == dest {
        return domain(format!("greedy step requested at destination {dest}"));
    }
    let here = topology.distance(current, dest);
    let neighbors = topology.neighbors(current);

    let mut best = usize::MAX;
    let mut ties = 0usize;
    for &y in neighbors.iter() {
        let d = topology.distance(y, dest);
        if d < best {
            best = d;
            ties = 1;
        } else if d == best {
            ties += 1;
        }
    }

    if let Some(s) = shortcuts.shortcut(current, rng) {
        let ds = topology.distance(s, dest);
        if ds < here && ds <= best {
            return Ok(s);
        }
    }
    if best >= here {
        return Err(Error::TopologyViolation { vertex: current.0, dest: dest.0 });
    }
    let pick = if ties == 1 { 0 } else { rng.random_range(0..ties) };
    let chosen = neighbors
        .iter()
        .copied()
        .filter(|&y| topology.distance(y, dest) == best)
        .nth(pick)
        .expect("tie index within range");
    Ok(chosen)
}

/// Appends the walk from `start` to `dest` to `path` (which is cleared first).
pub(crate) fn walk_into<G, S, R>(
    topology: &G,
    shortcuts: &mut S,
    start: VertexId,
    dest: VertexId,
    rng: &mut R,
    path: &mut Vec<VertexId>,
) -> Result<()>
where
    G: Topology + ?Sized,
    S: ShortcutSource,
    R: Rng + ?Sized,
{
    topology.check_vertex(start)?;
    topology.check_vertex(dest)?;
    path.clear();
    path.push(start);
    let mut current = start;
    let mut remaining = topology.distance(start, dest);
    while current != dest {
        let next = greedy_step(topology, shortcuts, current, dest, rng)?;
        let d = topology.distance(next, dest);
        debug_assert!(d < remaining);
        remaining = d;
        path.push(next);
        current = next;
        if path.len() > topology.len() {
            return Err(Error::TopologyViolation { vertex: current.0, dest: dest.0 });
        }
    }
    Ok(())
}

/// Greedy walk from `start` until `dest` is reached.
pub fn greedy_walk<G, S, R>(topology: &G, mut shortcuts: S, start: VertexId, dest: VertexId, rng: &mut R) -> Result<WalkRecord>
where
    G: Topology + ?Sized,
    S: ShortcutSource,
    R: Rng + ?Sized,
{
    let mut path = Vec::new();
    walk_into(topology, &mut shortcuts, start, dest, rng, &mut path)?;
    Ok(WalkRecord { start, dest, length: path.len() - 1, path })
}

/// Where walks in a Monte Carlo run get their shortcuts.
#[derive(Debug, Clone, Copy)]
pub enum ConfigSource<'a> {
    /// One configuration reused by every walk.
    Frozen(&'a ShortcutConfig),
    /// An independent configuration per walk.
    Fresh(&'a ShortcutSampler),
}

/// Mean walk length with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub walks: usize,
}

const CHUNK: usize = 4096;

/// Random streams for chunk `i` of a parallel run seeded with `base`.
pub(crate) fn chunk_rng(base: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(chunk);
    rng
}

/// Uniform destination and a uniform start among the other vertices.
#[inline]
pub(crate) fn draw_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (VertexId, VertexId) {
    let dest = rng.random_range(0..n);
    let mut start = rng.random_range(0..n - 1);
    if start >= dest {
        start += 1;
    }
    (VertexId(start), VertexId(dest))
}

/// Runs `walks` walks in parallel chunks; `visit` sees every completed path.
/// Results depend only on the seed drawn from `rng`, not on scheduling.
fn run_walks<G, R, A, F>(topology: &G, source: ConfigSource<'_>, walks: usize, rng: &mut R, init: A, visit: F) -> Result<Vec<A>>
where
    G: Topology + ?Sized,
    R: Rng + ?Sized,
    A: Clone + Send + Sync,
    F: Fn(&mut A, &[VertexId], VertexId) + Sync,
{
    if walks == 0 {
        return domain("need at least one walk");
    }
    if topology.len() < 2 {
        return domain("need at least two vertices");
    }
    let base: u64 = rng.random();
    let chunks = walks.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(base, c as u64);
            let mut acc = init.clone();
            let mut path = Vec::new();
            let count = CHUNK.min(walks - c * CHUNK);
            for _ in 0..count {
                let (start, dest) = draw_pair(topology.len(), &mut rng);
                match source {
                    ConfigSource::Frozen(cfg) => walk_into(topology, &mut &*cfg, start, dest, &mut rng, &mut path)?,
                    ConfigSource::Fresh(sampler) => {
                        let mut fresh = FreshShortcuts { sampler, topology };
                        walk_into(topology, &mut fresh, start, dest, &mut rng, &mut path)?
                    }
                }
                visit(&mut acc, &path, dest);
            }
            Ok(acc)
        })
        .collect()
}

/// Monte Carlo estimate of the expected greedy walk length.
pub fn monte_carlo_tau<G, R>(topology: &G, source: ConfigSource<'_>, walks: usize, rng: &mut R) -> Result<TauEstimate>
where
    G: Topology + ?Sized,
    R: Rng + ?Sized,
{
    let parts = run_walks(topology, source, walks, rng, (0.0f64, 0.0f64), |acc, path, _| {
        let len = (path.len() - 1) as f64;
        acc.0 += len;
        acc.1 += len * len;
    })?;
    let (sum, sumsq) = parts.into_iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(summarize(sum, sumsq, walks))
}

pub(crate) fn summarize(sum: f64, sumsq: f64, count: usize) -> TauEstimate {
    let k = count as f64;
    let mean = sum / k;
    let stderr = if count > 1 {
        let var = ((sumsq - k * mean * mean) / (k - 1.0)).max(0.0);
        (var / k).sqrt()
    } else {
        0.0
    };
    TauEstimate { mean, stderr, walks: count }
}

/// Per-distance hit rates: entry `d - 1` estimates the expected number of
/// visited vertices at distance `d` from the destination (the destination
/// itself excluded), with its standard error.
pub fn hitting_frequencies<G, R>(topology: &G, source: ConfigSource<'_>, walks: usize, rng: &mut R) -> Result<Vec<(f64, f64)>>
where
    G: Topology + ?Sized,
    R: Rng + ?Sized,
{
    let dmax = topology.max_distance();
    let init = (vec![0u64; dmax], vec![0u64; dmax], vec![0u32; dmax]);
    let parts = run_walks(topology, source, walks, rng, init, |acc, path, dest| {
        let (sum, sumsq, scratch) = acc;
        for &x in &path[..path.len() - 1] {
            scratch[topology.distance(x, dest) - 1] += 1;
        }
        for &x in &path[..path.len() - 1] {
            let i = topology.distance(x, dest) - 1;
            let k = scratch[i] as u64;
            if k > 0 {
                sum[i] += k;
                sumsq[i] += k * k;
                scratch[i] = 0;
            }
        }
    })?;
    let mut sum = vec![0u64; dmax];
    let mut sumsq = vec![0u64; dmax];
    for (s, q, _) in parts {
        for i in 0..dmax {
            sum[i] += s[i];
            sumsq[i] += q[i];
        }
    }
    Ok((0..dmax)
        .map(|i| {
            let est = summarize(sum[i] as f64, sumsq[i] as f64, walks);
            (est.mean, est.stderr)
        })
        .collect())
}
