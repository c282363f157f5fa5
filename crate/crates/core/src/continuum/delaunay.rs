//! Delaunay graphs on the circle and the flat torus.
//!
//! On the torus the point set is tiled with periodic copies around the unit
//! square and triangulated in the plane. A triangle with a corner in the
//! central copy is kept once its circumcircle fits inside the tiled region,
//! since then no copy outside the region can violate its empty circle; the
//! margin grows until every such triangle passes.

use std::io::Write;

use rand::Rng;
use robust::{incircle, Coord};
use spade::{DelaunayTriangulation, HasPosition, Point2, Triangulation};

use super::space::{distance, wrap, Point, PointSet};
use crate::error::{domain, Error, Result};
use crate::io;

const JITTER: f64 = 1e-12;
const MAX_JITTER_ROUNDS: u32 = 16;

/// Symmetric adjacency lists, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelaunayGraph {
    pub adjacency: Vec<Vec<usize>>,
}

impl DelaunayGraph {
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.adjacency[x]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, ns)| ns.iter().map(move |&b| (a, b)))
    }

    pub fn is_connected(&self) -> bool {
        if self.adjacency.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &y in &self.adjacency[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Distance from each point to its nearest other point (always a
    /// Delaunay neighbor).
    pub fn nearest_distances(&self, set: &PointSet) -> Vec<f64> {
        (0..self.len())
            .map(|x| self.adjacency[x].iter().map(|&y| set.distance(x, y)).fold(f64::INFINITY, f64::min))
            .collect()
    }

    /// `src,dst`, both directions of every edge.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = io::writer(out);
        w.write_record(["src", "dst"])?;
        for (a, b) in self.edges() {
            w.write_record([a.to_string(), b.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Builds the Delaunay graph. Cocircular configurations on the torus are
/// broken by jittering every point by up to `1e-12`; the number of rounds
/// is recorded in `set.jitter_rounds`.
pub fn build_delaunay<R: Rng + ?Sized>(set: &mut PointSet, rng: &mut R) -> Result<DelaunayGraph> {
    if set.len() < 2 {
        return domain("Delaunay graph needs at least two points");
    }
    if set.dim == 1 {
        return Ok(circle_graph(set));
    }
    loop {
        match torus_graph(&set.points)? {
            Some(graph) => return Ok(graph),
            None if set.jitter_rounds < MAX_JITTER_ROUNDS => {
                for p in &mut set.points {
                    for c in p.iter_mut() {
                        *c = wrap(*c + rng.random_range(-JITTER..JITTER));
                    }
                }
                set.jitter_rounds += 1;
            }
            None => return domain("could not break cocircular point configuration"),
        }
    }
}

fn circle_graph(set: &PointSet) -> DelaunayGraph {
    let n = set.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| set.points[a][0].total_cmp(&set.points[b][0]));
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        let a = order[i];
        let b = order[(i + 1) % n];
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    finish(adjacency)
}

fn finish(mut adjacency: Vec<Vec<usize>>) -> DelaunayGraph {
    for ns in &mut adjacency {
        ns.sort_unstable();
        ns.dedup();
    }
    DelaunayGraph { adjacency }
}

#[derive(Debug, Clone, Copy)]
struct Site {
    pos: Point,
    id: usize,
    central: bool,
}

impl HasPosition for Site {
    type Scalar = f64;

    fn position(&self) -> Point2<f64> {
        Point2::new(self.pos[0], self.pos[1])
    }
}

fn coord(p: Point2<f64>) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

/// `None` when the triangulation is ambiguous (four cocircular points).
fn torus_graph(points: &[Point]) -> Result<Option<DelaunayGraph>> {
    let n = points.len();
    // no empty circle through a central point has radius above √2/2, so a
    // margin of √2 always suffices
    let limit = std::f64::consts::SQRT_2 + 1e-9;
    let mut margin = (3.0 / (n as f64).sqrt()).min(limit);
    loop {
        let mut sites = Vec::new();
        for sx in -2i32..=2 {
            for sy in -2i32..=2 {
                for (id, p) in points.iter().enumerate() {
                    let q = [p[0] + sx as f64, p[1] + sy as f64];
                    if q.iter().all(|&c| c >= -margin && c < 1.0 + margin) {
                        sites.push(Site { pos: q, id, central: sx == 0 && sy == 0 });
                    }
                }
            }
        }
        let tri = DelaunayTriangulation::<Site>::bulk_load_stable(sites).map_err(|e| Error::Domain(e.to_string()))?;

        let mut adjacency = vec![Vec::new(); n];
        let mut verified = true;
        for face in tri.inner_faces() {
            let vs = face.vertices();
            if !vs.iter().any(|v| v.data().central) {
                continue;
            }
            let (center, r2) = face.circumcircle();
            let r = r2.sqrt();
            let inside = center.x - r >= -margin
                && center.x + r <= 1.0 + margin
                && center.y - r >= -margin
                && center.y + r <= 1.0 + margin;
            if !inside {
                verified = false;
                break;
            }
            for e in face.adjacent_edges() {
                if let Some(d) = e.rev().opposite_vertex() {
                    let [a, b, c] = vs.map(|v| coord(v.position()));
                    if incircle(a, b, c, coord(d.position())) == 0.0 {
                        return Ok(None);
                    }
                }
            }
            for i in 0..3 {
                let a = vs[i].data().id;
                let b = vs[(i + 1) % 3].data().id;
                if a != b {
                    adjacency[a].push(b);
                    adjacency[b].push(a);
                }
            }
        }
        if verified {
            return Ok(Some(finish(adjacency)));
        }
        if margin >= limit {
            return domain("periodic triangulation failed to verify");
        }
        margin = (margin * 2.0).min(limit);
    }
}

/// Checks that every ordered pair has a Delaunay neighbor strictly closer to
/// the destination; returns the violating pairs.
pub fn adaptedness_violations(set: &PointSet, graph: &DelaunayGraph) -> Vec<(usize, usize)> {
    let mut bad = Vec::new();
    for x in 0..set.len() {
        for z in 0..set.len() {
            if x == z {
                continue;
            }
            let here = set.distance(x, z);
            if !graph.neighbors(x).iter().any(|&y| distance(set.dim, &set.points[y], &set.points[z]) < here) {
                bad.push((x, z));
            }
        }
    }
    bad
}
