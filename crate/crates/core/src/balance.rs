//! Exact hitting probabilities of greedy walks and the balanced shortcut
//! distribution, found by fixed-point iteration of `ℓ ↦ h_ℓ / τ_ℓ`.
//!
//! Hitting probabilities are computed for destination `0` with a uniform
//! start on the other `n - 1` vertices. A greedy walk only ever moves
//! strictly closer to `0`, so `h(x)` depends only on vertices farther away
//! and the whole profile falls out of one backward sweep.

use std::io::Write;

use crate::error::{domain, Result};
use crate::io;
use crate::scalar::{self, Scalar};
use crate::shortcuts::DistanceDistribution;
use crate::topology::{Topology, VertexId};

/// Hitting probabilities `h(x)` for every vertex `x ≠ 0`, and `τ = Σ h`.
///
/// Entry `i` belongs to vertex `i + 1`. On the directed cycle vertex `x`
/// sits at distance `x` from `0`, so the same entry is also distance `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingProfile<T> {
    pub h: Vec<T>,
    pub tau: T,
}

impl<T: Scalar> HittingProfile<T> {
    pub fn new(h: Vec<T>) -> Self {
        let tau = scalar::sum(&h);
        Self { h, tau }
    }

    /// Hit mass pooled by distance from the destination.
    pub fn per_distance<G: Topology + ?Sized>(&self, topology: &G) -> Vec<T> {
        let mut out = vec![T::zero(); topology.max_distance()];
        for (i, h) in self.h.iter().enumerate() {
            let d = topology.distance(VertexId(i + 1), VertexId(0));
            out[d - 1] = out[d - 1].clone() + h.clone();
        }
        out
    }
}

/// Expected greedy walk length: the sum of the hitting probabilities.
pub fn tau<T: Scalar>(profile: &HittingProfile<T>) -> T {
    scalar::sum(&profile.h)
}

/// Hitting profile on the directed cycle of `n` vertices.
///
/// `h(x) = Σ_{ξ>x} h(ξ) ℓ(ξ-x) + h(x+1) Σ_{ξ≥x+2} ℓ(ξ) + 1/(n-1)`: entry
/// through a shortcut, by the base edge from `x + 1` when its shortcut
/// overshoots `0`, or by starting at `x`.
pub fn hitting_profile_cycle<T: Scalar>(ell: &DistanceDistribution<T>, n: usize) -> Result<HittingProfile<T>> {
    if n < 2 {
        return domain(format!("cycle needs n >= 2, got {n}"));
    }
    if ell.max_distance() != n - 1 {
        return domain(format!("distribution has {} distances, cycle of {n} needs {}", ell.max_distance(), n - 1));
    }
    let l = ell.probs();
    let start = T::one() / T::from_count(n - 1);

    // overshoot[k] = Σ_{j ≥ k+1} ℓ(j), i.e. mass of lengths strictly above k
    let mut overshoot = vec![T::zero(); n];
    for k in (0..n - 1).rev() {
        overshoot[k] = overshoot[k + 1].clone() + l[k].clone();
    }
    let overshoot = |len: usize| if len < n { overshoot[len].clone() } else { T::zero() };

    let mut h = vec![T::zero(); n - 1];
    h[n - 2] = start.clone();
    for x in (1..n - 1).rev() {
        // h[x..] holds h(x+1), h(x+2), ... ; l[j] is ℓ(j+1)
        let via_shortcut = h[x..].iter().zip(l).fold(T::zero(), |acc, (hv, lv)| acc + hv.clone() * lv.clone());
        let via_base = h[x].clone() * overshoot(x + 1);
        h[x - 1] = via_shortcut + via_base + start.clone();
    }
    Ok(HittingProfile::new(h))
}

/// Hitting profile on any translation-invariant topology.
///
/// The shortcut of a vertex lands uniformly on the sphere of its sampled
/// length, so `ℓ(ξ → η) = ℓ(d(ξ,η)) / |S(d(ξ,η))|`. Vertices are swept in
/// order of decreasing distance to `0`; each finished vertex pushes its mass
/// to the closer vertices its shortcut can reach, and spreads the mass of
/// useless shortcuts evenly over its closest base neighbors.
pub fn hitting_profile_general<T: Scalar, G: Topology + ?Sized>(
    ell: &DistanceDistribution<T>,
    topology: &G,
) -> Result<HittingProfile<T>> {
    if !topology.is_translation_invariant() {
        return domain("hitting recursion needs a translation-invariant topology");
    }
    let n = topology.len();
    if ell.max_distance() != topology.max_distance() {
        return domain(format!(
            "distribution has {} distances, topology needs {}",
            ell.max_distance(),
            topology.max_distance()
        ));
    }
    let origin = VertexId(0);
    let depth: Vec<usize> = (0..n).map(|x| topology.distance(VertexId(x), origin)).collect();
    let pair_prob: Vec<T> = (1..=topology.max_distance())
        .map(|d| ell.prob(d) / T::from_count(topology.shell_size(d).max(1)))
        .collect();

    let mut order: Vec<usize> = (1..n).collect();
    order.sort_by(|a, b| depth[*b].cmp(&depth[*a]).then(a.cmp(b)));

    let start = T::one() / T::from_count(n - 1);
    let mut incoming = vec![T::zero(); n];
    let mut h = vec![T::zero(); n];
    for &xi in &order {
        let hx = incoming[xi].clone() + start.clone();
        h[xi] = hx.clone();

        let mut useless = T::zero();
        for y in 0..n {
            if y == xi {
                continue;
            }
            let p = pair_prob[topology.distance(VertexId(xi), VertexId(y)) - 1].clone();
            if depth[y] < depth[xi] {
                if y != 0 {
                    incoming[y] = incoming[y].clone() + hx.clone() * p;
                }
            } else {
                useless = useless + p;
            }
        }

        let neighbors = topology.neighbors(VertexId(xi));
        let closest = neighbors.iter().map(|c| depth[c.0]).min().unwrap_or(usize::MAX);
        if closest >= depth[xi] {
            return domain(format!("vertex {xi} has no base neighbor closer to 0"));
        }
        let children: Vec<usize> = neighbors.iter().filter(|c| depth[c.0] == closest).map(|c| c.0).collect();
        let share = hx * useless / T::from_count(children.len());
        for c in children {
            if c != 0 {
                incoming[c] = incoming[c].clone() + share.clone();
            }
        }
    }
    h.remove(0);
    Ok(HittingProfile::new(h))
}

/// One application of `ℓ ↦ h_ℓ / τ_ℓ` on the directed cycle.
pub fn balance_map<T: Scalar>(ell: &DistanceDistribution<T>, n: usize) -> Result<DistanceDistribution<T>> {
    let profile = hitting_profile_cycle(ell, n)?;
    let tau = profile.tau.clone();
    DistanceDistribution::from_probs(profile.h.into_iter().map(|h| h / tau.clone()).collect())
}

/// Outcome of the fixed-point iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport<T> {
    pub n: usize,
    pub iterations: usize,
    /// Total variation between the last two iterates.
    pub final_tv: T,
    pub converged: bool,
    pub result: DistanceDistribution<T>,
    /// Hitting profile under `result`.
    pub profile: HittingProfile<T>,
    pub tau_at_fixed_point: T,
}

impl<T: Scalar> FixedPointReport<T> {
    /// `n,iterations,final_tv,converged,tau`.
    pub fn write_report_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = io::writer(out);
        w.write_record(["n", "iterations", "final_tv", "converged", "tau"])?;
        w.write_record([
            self.n.to_string(),
            self.iterations.to_string(),
            io::float(self.final_tv.as_f64()),
            self.converged.to_string(),
            io::float(self.tau_at_fixed_point.as_f64()),
        ])?;
        w.flush()?;
        Ok(())
    }

    /// `distance,prob,h`.
    pub fn write_table_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = io::writer(out);
        w.write_record(["distance", "prob", "h"])?;
        for (i, (p, h)) in self.result.probs().iter().zip(&self.profile.h).enumerate() {
            w.write_record([(i + 1).to_string(), io::float(p.as_f64()), io::float(h.as_f64())])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Iterates `ℓ ← (1-damping)·balance_map(ℓ) + damping·ℓ` from the uniform
/// distribution until successive iterates are within `tol` in total
/// variation, or `max_iters` is spent. Non-convergence is reported, not
/// raised.
pub fn solve_balanced<T: Scalar>(n: usize, tol: T, max_iters: usize, damping: T) -> Result<FixedPointReport<T>> {
    if n < 2 {
        return domain(format!("cycle needs n >= 2, got {n}"));
    }
    if tol <= T::zero() {
        return domain("tolerance must be positive");
    }
    if damping < T::zero() || damping >= T::one() {
        return domain("damping must lie in [0, 1)");
    }
    let keep = T::one() - damping.clone();
    let mut ell = DistanceDistribution::<T>::uniform(n - 1)?;
    let mut final_tv = T::zero();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        let mapped = balance_map(&ell, n)?;
        let next: Vec<T> = mapped
            .probs()
            .iter()
            .zip(ell.probs())
            .map(|(m, old)| keep.clone() * m.clone() + damping.clone() * old.clone())
            .collect();
        let next = DistanceDistribution::from_weights(next)?;
        final_tv = ell.total_variation(&next)?;
        ell = next;
        iterations += 1;
        if final_tv <= tol {
            converged = true;
            break;
        }
    }
    let profile = hitting_profile_cycle(&ell, n)?;
    Ok(FixedPointReport {
        n,
        iterations,
        final_tv,
        converged,
        tau_at_fixed_point: profile.tau.clone(),
        result: ell,
        profile,
    })
}

/// Power-law exponent `α` of `ℓ(d) ≈ c·d^-α`, fitted by least squares on
/// log-log scale over `d ∈ [n^¼, n^¾]`. Diagnostic only; `None` when that
/// window holds fewer than three distances or a zero mass.
pub fn tail_exponent<T: Scalar>(ell: &DistanceDistribution<T>) -> Option<f64> {
    let n = ell.max_distance() + 1;
    let lo = (n as f64).powf(0.25).ceil() as usize;
    let hi = ((n as f64).powf(0.75).floor() as usize).min(n - 1);
    if hi < lo + 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = (lo.max(1)..=hi).map(|d| ((d as f64).ln(), ell.prob(d).as_f64().ln())).collect();
    if pts.iter().any(|p| !p.1.is_finite()) {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(-sxy / sxx)
}
