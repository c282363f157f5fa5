//! How much of a sphere `S_r(y)` falls inside `B_{3δ/8}(x)` when both
//! `|x - y|` and `r` lie in `(3δ/4, δ]`.

use std::f64::consts::PI;

use rand::Rng;

use super::space::check_dim;
use crate::error::{domain, Result};

const GRID: usize = 16;

/// The smallest covered fraction found and where it occurred.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapEstimate {
    pub q: f64,
    pub stderr: f64,
    pub separation: f64,
    pub radius: f64,
}

/// Minimum over a `16 × 16` grid of `(|x - y|, r)` pairs. On the circle the
/// sphere is two points and the fraction is counted exactly; on the plane
/// each pair is estimated from `samples` uniform angles.
pub fn cap_fraction<R: Rng + ?Sized>(dim: usize, delta: f64, samples: usize, rng: &mut R) -> Result<CapEstimate> {
    check_dim(dim)?;
    if !(delta > 0.0) || samples == 0 {
        return domain("need a positive scale and at least one sample");
    }
    let reach = 0.375 * delta;
    let grid = |i: usize| delta * (0.75 + 0.25 * (i + 1) as f64 / GRID as f64);
    let mut best = CapEstimate { q: f64::INFINITY, stderr: 0.0, separation: 0.0, radius: 0.0 };
    for i in 0..GRID {
        for j in 0..GRID {
            let (sep, r) = (grid(i), grid(j));
            let (q, stderr) = if dim == 1 {
                // y at 0, x at sep: the two sphere points are ±r
                let hits = [-r, r].iter().filter(|&&p| (p - sep).abs() < reach).count();
                (hits as f64 / 2.0, 0.0)
            } else {
                let hits = (0..samples)
                    .filter(|_| {
                        let t = rng.random_range(0.0..2.0 * PI);
                        (r * t.cos() - sep).hypot(r * t.sin()) < reach
                    })
                    .count();
                let q = hits as f64 / samples as f64;
                (q, (q * (1.0 - q) / samples as f64).sqrt())
            };
            if q < best.q {
                best = CapEstimate { q, stderr, separation: sep, radius: r };
            }
        }
    }
    Ok(best)
}
