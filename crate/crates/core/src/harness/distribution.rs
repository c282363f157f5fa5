use std::io::Write;

use crate::error::{domain, Result};
use crate::io;
use crate::rewiring::{destination_sampling_step, ChainState};
use crate::shortcuts::harmonic_cycle;
use crate::topology::{CycleTopology, Topology};

/// Destination sampling on the cycle, observed through periodic snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSpec {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub burnin_multiplier: usize,
    pub snapshots: usize,
    /// Chain steps between snapshots; `n` when `None`.
    pub spacing: Option<usize>,
    /// Distances per output bin; about `n / 500` when `None`.
    pub bin_width: Option<usize>,
}

impl SnapshotSpec {
    pub fn new(n: usize, p: f64, seed: u64) -> Self {
        Self { n, p, seed, burnin_multiplier: 10, snapshots: 20, spacing: None, bin_width: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionRow {
    /// First and last distance in the bin.
    pub bin_lo: usize,
    pub bin_hi: usize,
    /// Share of pooled shortcuts whose length falls in the bin.
    pub frequency: f64,
    /// Reciprocal of the mean per-distance frequency in the bin.
    pub inverse: f64,
    /// The same reciprocal for the harmonic distribution.
    pub harmonic_inverse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSnapshot {
    pub n: usize,
    /// Pooled shortcut count per distance `1..n`.
    pub counts: Vec<u64>,
    pub rows: Vec<DistributionRow>,
}

impl DistributionSnapshot {
    /// `bin_lo,bin_hi,frequency,inverse,harmonic_inverse`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = io::writer(out);
        w.write_record(["bin_lo", "bin_hi", "frequency", "inverse", "harmonic_inverse"])?;
        for r in &self.rows {
            w.write_record([
                r.bin_lo.to_string(),
                r.bin_hi.to_string(),
                io::float(r.frequency),
                io::float(r.inverse),
                io::float(r.harmonic_inverse),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn run_distribution_snapshot(spec: &SnapshotSpec) -> Result<DistributionSnapshot> {
    if spec.snapshots == 0 {
        return domain("need at least one snapshot");
    }
    let n = spec.n;
    let g = CycleTopology::new(n)?;
    let mut state = ChainState::new(n, spec.seed);
    for _ in 0..spec.burnin_multiplier * n {
        destination_sampling_step(&mut state, &g, spec.p)?;
    }
    let mut counts = vec![0u64; n - 1];
    for _ in 0..spec.snapshots {
        for _ in 0..spec.spacing.unwrap_or(n) {
            destination_sampling_step(&mut state, &g, spec.p)?;
        }
        for (x, d) in state.config.iter() {
            if let Some(y) = d {
                counts[g.distance(x, y) - 1] += 1;
            }
        }
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return domain("no shortcuts were ever set");
    }
    let harmonic = harmonic_cycle::<f64>(n)?;
    let width = spec.bin_width.unwrap_or((n / 500).max(1)).max(1);
    let rows = (1..n)
        .step_by(width)
        .map(|lo| {
            let hi = (lo + width - 1).min(n - 1);
            let k = (hi - lo + 1) as f64;
            let c: u64 = counts[lo - 1..hi].iter().sum();
            let frequency = c as f64 / total as f64;
            let h: f64 = (lo..=hi).map(|d| harmonic.prob(d)).sum();
            DistributionRow { bin_lo: lo, bin_hi: hi, frequency, inverse: k / frequency, harmonic_inverse: k / h }
        })
        .collect();
    Ok(DistributionSnapshot { n, counts, rows })
}
