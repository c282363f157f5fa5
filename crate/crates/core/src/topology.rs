//! Translation-invariant base graphs: the directed cycle and the wrapped grid.
//!
//! Every topology here is a Cayley graph of `Z_n` or `Z_m^dim`, so the
//! distance from `x` to `x + o` depends only on the offset `o`. Shells
//! (vertices at a fixed distance from the origin) are therefore enough to
//! describe the whole distance structure.

use std::fmt;
use std::ops::Deref;

use crate::error::{domain, Result};

/// Index of a vertex in `[0, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Base neighbors of a vertex, stored inline (at most four in this crate).
#[derive(Debug, Clone, Copy)]
pub struct Neighbors {
    len: usize,
    items: [VertexId; 4],
}

impl Neighbors {
    fn new() -> Self {
        Self { len: 0, items: [VertexId(0); 4] }
    }

    fn push_unique(&mut self, v: VertexId) {
        if !self.items[..self.len].contains(&v) {
            self.items[self.len] = v;
            self.len += 1;
        }
    }
}

impl Deref for Neighbors {
    type Target = [VertexId];
    fn deref(&self) -> &[VertexId] {
        &self.items[..self.len]
    }
}

/// A connected, translation-invariant base graph with its routing distance.
pub trait Topology: Send + Sync {
    /// Number of vertices.
    fn len(&self) -> usize;

    /// Routing distance from `x` to `y`.
    fn distance(&self, x: VertexId, y: VertexId) -> usize;

    /// Largest value `distance` can take.
    fn max_distance(&self) -> usize;

    fn neighbors(&self, x: VertexId) -> Neighbors;

    /// Group translation: the vertex reached from `x` by the offset `offset`
    /// (an offset is itself named by the vertex it reaches from the origin).
    fn translate(&self, x: VertexId, offset: VertexId) -> VertexId;

    /// Number of vertices at distance exactly `d` from any vertex.
    fn shell_size(&self, d: usize) -> usize;

    /// The `i`-th vertex at distance `d` from the origin.
    fn shell_member(&self, d: usize, i: usize) -> VertexId;

    fn name(&self) -> &'static str;

    fn is_translation_invariant(&self) -> bool {
        true
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn base_neighbors(&self, x: VertexId) -> Vec<VertexId> {
        self.neighbors(x).to_vec()
    }

    /// `|B_x(r)|`, identical for every `x`.
    fn ball_volume(&self, r: usize) -> Result<usize> {
        if r > self.max_distance() {
            return domain(format!("radius {r} exceeds max distance {}", self.max_distance()));
        }
        Ok((0..=r).map(|d| self.shell_size(d)).sum())
    }

    fn check_vertex(&self, x: VertexId) -> Result<()> {
        if x.0 >= self.len() {
            return domain(format!("vertex {} out of range [0, {})", x.0, self.len()));
        }
        Ok(())
    }
}

/// `d(x, y)` on the directed cycle with edges `x -> x-1 (mod n)`.
pub fn cycle_distance(x: VertexId, y: VertexId, n: usize) -> Result<usize> {
    if x.0 >= n || y.0 >= n {
        return domain(format!("vertex out of range for cycle of {n}"));
    }
    Ok(if y.0 <= x.0 { x.0 - y.0 } else { n - y.0 + x.0 })
}

/// Per-axis wrapped l1 distance on `[0, m)^dim`.
pub fn torus_distance(x: &[usize], y: &[usize], side: usize) -> Result<usize> {
    if x.len() != y.len() {
        return domain("coordinate dimensions differ");
    }
    if x.iter().chain(y).any(|&c| c >= side) {
        return domain(format!("coordinate out of range for side {side}"));
    }
    Ok(x.iter().zip(y).map(|(&a, &b)| wrap_diff(a, b, side)).sum())
}

#[inline]
fn wrap_diff(a: usize, b: usize, m: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(m - d)
}

/// Directed cycle on `n` vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleTopology {
    n: usize,
}

impl CycleTopology {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return domain(format!("cycle needs at least 2 vertices, got {n}"));
        }
        Ok(Self { n })
    }
}

impl Topology for CycleTopology {
    #[inline]
    fn len(&self) -> usize {
        self.n
    }

    #[inline]
    fn distance(&self, x: VertexId, y: VertexId) -> usize {
        if y.0 <= x.0 {
            x.0 - y.0
        } else {
            self.n - y.0 + x.0
        }
    }

    fn max_distance(&self) -> usize {
        self.n - 1
    }

    #[inline]
    fn neighbors(&self, x: VertexId) -> Neighbors {
        let mut out = Neighbors::new();
        out.push_unique(VertexId((x.0 + self.n - 1) % self.n));
        out
    }

    #[inline]
    fn translate(&self, x: VertexId, offset: VertexId) -> VertexId {
        VertexId((x.0 + offset.0) % self.n)
    }

    fn shell_size(&self, d: usize) -> usize {
        usize::from(d < self.n)
    }

    fn shell_member(&self, d: usize, i: usize) -> VertexId {
        debug_assert!(i == 0 && d < self.n);
        VertexId((self.n - d) % self.n)
    }

    fn ball_volume(&self, r: usize) -> Result<usize> {
        if r >= self.n {
            return domain(format!("radius {r} exceeds max distance {}", self.n - 1));
        }
        Ok(r + 1)
    }

    fn name(&self) -> &'static str {
        "cycle"
    }
}

/// Wrapped grid `Z_m^dim` (dim 1 or 2) with row-major vertex numbering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusGrid {
    side: usize,
    dim: usize,
    /// `shells[d]` lists the vertices at distance `d` from the origin.
    shells: Vec<Vec<VertexId>>,
}

impl TorusGrid {
    pub fn new(side: usize, dim: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return domain(format!("torus dimension must be 1 or 2, got {dim}"));
        }
        if side < 2 {
            return domain(format!("torus side must be at least 2, got {side}"));
        }
        let n = side.pow(dim as u32);
        let max = dim * (side / 2);
        let mut shells = vec![Vec::new(); max + 1];
        let mut grid = Self { side, dim, shells: Vec::new() };
        for v in 0..n {
            let d = grid.distance(VertexId(0), VertexId(v));
            shells[d].push(VertexId(v));
        }
        grid.shells = shells;
        Ok(grid)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self, x: VertexId) -> [usize; 2] {
        if self.dim == 1 {
            [x.0, 0]
        } else {
            [x.0 / self.side, x.0 % self.side]
        }
    }

    pub fn vertex(&self, coords: &[usize]) -> Result<VertexId> {
        if coords.len() != self.dim || coords.iter().any(|&c| c >= self.side) {
            return domain(format!("coordinates {coords:?} invalid for {}-dim side {}", self.dim, self.side));
        }
        Ok(VertexId(coords.iter().fold(0, |acc, &c| acc * self.side + c)))
    }
}

impl Topology for TorusGrid {
    fn len(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    #[inline]
    fn distance(&self, x: VertexId, y: VertexId) -> usize {
        let (a, b) = (self.coords(x), self.coords(y));
        (0..self.dim).map(|i| wrap_diff(a[i], b[i], self.side)).sum()
    }

    fn max_distance(&self) -> usize {
        self.dim * (self.side / 2)
    }

    fn neighbors(&self, x: VertexId) -> Neighbors {
        let m = self.side;
        let c = self.coords(x);
        let mut out = Neighbors::new();
        for axis in 0..self.dim {
            for step in [1, m - 1] {
                let mut nc = c;
                nc[axis] = (c[axis] + step) % m;
                let id = if self.dim == 1 { nc[0] } else { nc[0] * m + nc[1] };
                out.push_unique(VertexId(id));
            }
        }
        out
    }

    fn translate(&self, x: VertexId, offset: VertexId) -> VertexId {
        let (a, b) = (self.coords(x), self.coords(offset));
        let m = self.side;
        if self.dim == 1 {
            VertexId((a[0] + b[0]) % m)
        } else {
            VertexId(((a[0] + b[0]) % m) * m + (a[1] + b[1]) % m)
        }
    }

    fn shell_size(&self, d: usize) -> usize {
        self.shells.get(d).map_or(0, Vec::len)
    }

    fn shell_member(&self, d: usize, i: usize) -> VertexId {
        self.shells[d][i]
    }

    fn name(&self) -> &'static str {
        if self.dim == 1 {
            "ring"
        } else {
            "grid2d"
        }
    }
}

/// Either base graph, for call sites that pick the topology at run time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseGraph {
    Cycle(CycleTopology),
    Torus(TorusGrid),
}

macro_rules! delegate {
    ($self:ident, $g:ident => $e:expr) => {
        match $self {
            BaseGraph::Cycle($g) => $e,
            BaseGraph::Torus($g) => $e,
        }
    };
}

impl Topology for BaseGraph {
    fn len(&self) -> usize {
        delegate!(self, g => g.len())
    }
    #[inline]
    fn distance(&self, x: VertexId, y: VertexId) -> usize {
        delegate!(self, g => g.distance(x, y))
    }
    fn max_distance(&self) -> usize {
        delegate!(self, g => g.max_distance())
    }
    #[inline]
    fn neighbors(&self, x: VertexId) -> Neighbors {
        delegate!(self, g => g.neighbors(x))
    }
    fn translate(&self, x: VertexId, offset: VertexId) -> VertexId {
        delegate!(self, g => g.translate(x, offset))
    }
    fn shell_size(&self, d: usize) -> usize {
        delegate!(self, g => g.shell_size(d))
    }
    fn shell_member(&self, d: usize, i: usize) -> VertexId {
        delegate!(self, g => g.shell_member(d, i))
    }
    fn name(&self) -> &'static str {
        delegate!(self, g => g.name())
    }
    fn ball_volume(&self, r: usize) -> Result<usize> {
        delegate!(self, g => g.ball_volume(r))
    }
}
