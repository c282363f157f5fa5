//! The unit-circumference circle and the flat unit torus, Poisson point
//! sets on them, and nearest-point queries.

use std::collections::HashSet;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{domain, Result};
use crate::io;

/// A position; the second coordinate is unused on the circle.
pub type Point = [f64; 2];

/// Signed periodic offset from `a` to `b`, in `[-1/2, 1/2]`.
#[inline]
pub fn offset(a: f64, b: f64) -> f64 {
    let d = b - a;
    d - d.round()
}

#[inline]
pub fn wrap(a: f64) -> f64 {
    let w = a - a.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Geodesic distance on the circle (`dim = 1`) or the flat torus (`dim = 2`).
#[inline]
pub fn distance(dim: usize, p: &Point, q: &Point) -> f64 {
    let dx = offset(p[0], q[0]);
    if dim == 1 {
        dx.abs()
    } else {
        dx.hypot(offset(p[1], q[1]))
    }
}

/// Largest possible distance between two points.
pub fn max_radius(dim: usize) -> f64 {
    if dim == 1 {
        0.5
    } else {
        std::f64::consts::FRAC_1_SQRT_2
    }
}

/// Volume of the Euclidean ball of radius `r`.
pub fn ball_volume(dim: usize, r: f64) -> f64 {
    if dim == 1 {
        2.0 * r
    } else {
        std::f64::consts::PI * r * r
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        domain(format!("dimension must be 1 or 2, got {dim}"))
    }
}

/// Points of a Poisson process of intensity `n^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub dim: usize,
    /// The scale `n`.
    pub n: usize,
    pub points: Vec<Point>,
    /// Draws discarded because they held fewer than two or coinciding points.
    pub retries: u32,
    /// Rounds of jitter applied to break cocircular configurations.
    pub jitter_rounds: u32,
}

impl PointSet {
    /// Wraps explicit positions, checking they are in range and distinct.
    pub fn new(dim: usize, n: usize, points: Vec<Point>) -> Result<Self> {
        check_dim(dim)?;
        if points.len() < 2 {
            return domain("a point set needs at least two points");
        }
        for p in &points {
            let used = &p[..dim];
            if used.iter().any(|c| !(0.0..1.0).contains(c)) || (dim == 1 && p[1] != 0.0) {
                return domain(format!("coordinates {p:?} outside [0, 1)"));
            }
        }
        if !distinct(&points) {
            return domain("point positions must be pairwise distinct");
        }
        Ok(Self { dim, n, points, retries: 0, jitter_rounds: 0 })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn intensity(&self) -> f64 {
        (self.n as f64).powi(self.dim as i32)
    }

    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        distance(self.dim, &self.points[a], &self.points[b])
    }

    /// `id,x` or `id,x,y`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = io::writer(out);
        if self.dim == 1 {
            w.write_record(["id", "x"])?;
        } else {
            w.write_record(["id", "x", "y"])?;
        }
        for (i, p) in self.points.iter().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(p[..self.dim].iter().map(|&c| io::float(c)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn distinct(points: &[Point]) -> bool {
    let mut seen = HashSet::with_capacity(points.len());
    points.iter().all(|p| seen.insert((p[0].to_bits(), p[1].to_bits())))
}

/// Poisson(`n^dim`) uniform points, redrawn until there are at least two.
pub fn sample_points<R: Rng + ?Sized>(n: usize, dim: usize, rng: &mut R) -> Result<PointSet> {
    check_dim(dim)?;
    if n < 2 {
        return domain(format!("scale must be at least 2, got {n}"));
    }
    let lambda = (n as f64).powi(dim as i32);
    let poisson = Poisson::new(lambda).map_err(|e| crate::Error::Domain(e.to_string()))?;
    let mut retries = 0;
    loop {
        let count = poisson.sample(rng) as usize;
        let points: Vec<Point> = (0..count)
            .map(|_| if dim == 1 { [rng.random::<f64>(), 0.0] } else { [rng.random(), rng.random()] })
            .collect();
        if count >= 2 && distinct(&points) {
            return Ok(PointSet { dim, n, points, retries, jitter_rounds: 0 });
        }
        retries += 1;
    }
}

/// Bucket grid answering "which point is closest to this position", i.e.
/// which Voronoi cell contains it.
#[derive(Debug, Clone)]
pub struct NearestIndex {
    dim: usize,
    side: usize,
    buckets: Vec<Vec<usize>>,
    points: Vec<Point>,
}

impl NearestIndex {
    pub fn new(set: &PointSet) -> Self {
        let n = set.len();
        let side = if set.dim == 1 { n } else { ((n as f64).sqrt().ceil() as usize).max(1) };
        let cells = if set.dim == 1 { side } else { side * side };
        let mut index = Self { dim: set.dim, side, buckets: vec![Vec::new(); cells], points: set.points.clone() };
        for (i, p) in set.points.iter().enumerate() {
            let b = index.bucket(p);
            index.buckets[b].push(i);
        }
        index
    }

    fn coord(&self, c: f64) -> usize {
        ((c * self.side as f64) as usize).min(self.side - 1)
    }

    fn bucket(&self, p: &Point) -> usize {
        if self.dim == 1 {
            self.coord(p[0])
        } else {
            self.coord(p[0]) * self.side + self.coord(p[1])
        }
    }

    /// Index of the point nearest to `q`; ties go to the smaller index.
    pub fn nearest(&self, q: &Point) -> usize {
        let h = 1.0 / self.side as f64;
        let s = self.side as isize;
        let cx = self.coord(q[0]) as isize;
        let cy = if self.dim == 1 { 0 } else { self.coord(q[1]) as isize };
        let mut best = (f64::INFINITY, usize::MAX);
        let consider = |bucket: usize, best: &mut (f64, usize)| {
            for &i in &self.buckets[bucket] {
                let d = distance(self.dim, q, &self.points[i]);
                if d < best.0 || (d == best.0 && i < best.1) {
                    *best = (d, i);
                }
            }
        };
        let mut k: isize = 0;
        loop {
            if 2 * k + 1 >= s {
                // the ring wraps onto itself: scan everything once
                for b in 0..self.buckets.len() {
                    consider(b, &mut best);
                }
                return best.1;
            }
            if self.dim == 1 {
                for dx in [-k, k] {
                    consider((cx + dx).rem_euclid(s) as usize, &mut best);
                    if k == 0 {
                        break;
                    }
                }
            } else {
                for dx in -k..=k {
                    let edge = dx == -k || dx == k;
                    let step = if edge || k == 0 { 1 } else { 2 * k as usize };
                    let mut dy = -k;
                    while dy <= k {
                        let b = (cx + dx).rem_euclid(s) as usize * self.side + (cy + dy).rem_euclid(s) as usize;
                        consider(b, &mut best);
                        dy += step as isize;
                    }
                }
            }
            // anything outside rings 0..=k is at least k·h away
            if best.1 != usize::MAX && best.0 <= k as f64 * h {
                return best.1;
            }
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn periodic_distances() {
        assert!((distance(1, &[0.1, 0.0], &[0.9, 0.0]) - 0.2).abs() < 1e-15);
        assert!((distance(2, &[0.05, 0.05], &[0.95, 0.95]) - 0.1f64.hypot(0.1)).abs() < 1e-15);
        assert_eq!(wrap(-0.25), 0.75);
        assert_eq!(wrap(1.0), 0.0);
        assert_eq!(wrap(-1e-300), 0.0);
    }

    #[test]
    fn poisson_counts_have_right_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (n, dim, lambda) in [(100, 1, 100.0), (30, 2, 900.0)] {
            let reps = 400;
            let total: usize = (0..reps).map(|_| sample_points(n, dim, &mut rng).unwrap().len()).sum();
            let mean = total as f64 / reps as f64;
            let se = (lambda / reps as f64).sqrt();
            assert!((mean - lambda).abs() <= 4.0 * se, "n={n} dim={dim} mean={mean}");
        }
    }

    #[test]
    fn sampling_is_seeded() {
        let a = sample_points(20, 2, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = sample_points(20, 2, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        assert!(a.points.iter().all(|p| (0.0..1.0).contains(&p[0]) && (0.0..1.0).contains(&p[1])));
    }

    #[test]
    fn constructor_validates() {
        assert!(PointSet::new(1, 2, vec![[0.1, 0.0]]).is_err());
        assert!(PointSet::new(1, 2, vec![[0.1, 0.0], [0.1, 0.0]]).is_err());
        assert!(PointSet::new(1, 2, vec![[0.1, 0.0], [1.0, 0.0]]).is_err());
        assert!(PointSet::new(3, 2, vec![[0.1, 0.0], [0.2, 0.0]]).is_err());
        assert!(sample_points(1, 1, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn nearest_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (n, dim) in [(3, 1), (50, 1), (2, 2), (4, 2), (12, 2)] {
            let set = sample_points(n, dim, &mut rng).unwrap();
            let index = NearestIndex::new(&set);
            for _ in 0..2000 {
                let q = [rng.random::<f64>(), if dim == 1 { 0.0 } else { rng.random() }];
                let scan = (0..set.len())
                    .min_by(|&a, &b| {
                        distance(dim, &q, &set.points[a]).partial_cmp(&distance(dim, &q, &set.points[b])).unwrap()
                    })
                    .unwrap();
                assert_eq!(index.nearest(&q), scan);
            }
        }
    }

    #[test]
    fn csv_layout() {
        let set = PointSet::new(2, 2, vec![[0.25, 0.5], [0.75, 0.0]]).unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("id,x,y\n0,2.5000000000000000e-1,5.0000000000000000e-1\n"));
    }
}
