//! Single-pass streaming scan of prefix digit sums: the centered/normalized
//! deviation d = (S - mu*n) / (sigma*sqrt(n)), its density and cumulative
//! histograms over [-3, +3], and per-digit frequency statistics.
//!
//! The running sum S and count n are exact integers at all times; floating
//! point only enters when a deviation is evaluated from them.

use crate::error::{Error, Result};
use crate::moments::{normal_cdf, normal_pdf, MomentSet};

/// Exact integer scan state: the single source of truth for d and delta.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanState {
    /// Digits consumed.
    pub n: u64,
    /// Exact digit sum. 128 bits leaves ample headroom over the 9 * 10^10
    /// worst case at ten billion decimal digits, and keeps merges exact.
    pub s: u128,
    pub q: u32,
}

impl ScanState {
    pub fn new(q: u32) -> Self {
        ScanState { n: 0, s: 0, q }
    }

    /// Resume from a known prefix (chunked scans seed chunk k+1 with chunk
    /// k's final state).
    pub fn with_prefix(q: u32, n: u64, s: u128) -> Self {
        ScanState { n, s, q }
    }

    pub fn update(&mut self, digit: u8) -> Result<()> {
        if digit as u32 >= self.q {
            return Err(Error::usage(format!(
                "digit {digit} out of range for base {}",
                self.q
            )));
        }
        self.n += 1;
        self.s += digit as u128;
        Ok(())
    }

    /// Centered, normalized deviation of the digit sum from its expectation.
    pub fn deviation(&self, m: &MomentSet) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::usage("deviation undefined at n = 0"));
        }
        Ok(deviation_at(self.n, self.s, m))
    }
}

/// d = (S - mu*n) / (sigma * sqrt(n)) evaluated from exact integers.
pub fn deviation_at(n: u64, s: u128, m: &MomentSet) -> f64 {
    (s as f64 - m.mu * n as f64) / (m.sigma * (n as f64).sqrt())
}

pub const HIST_X_MIN: f64 = -3.0;
pub const HIST_X_MAX: f64 = 3.0;

/// Integer-count histogram over (-3, +3] with half-open (left, right] bins
/// plus explicit underflow/overflow tallies, so conservation is testable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistogramAccumulator {
    step_per_mille: u32,
    bins: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
    pub total: u64,
}

impl HistogramAccumulator {
    /// `step` must divide the [-3, 3] span exactly; the supported grids are
    /// 0.1 and 0.025 plus any other exact divisor of 6.
    pub fn new(step: f64) -> Result<Self> {
        if !(step > 0.0) || step > 6.0 {
            return Err(Error::usage(format!("invalid histogram step {step}")));
        }
        // Work on a millesimal grid so bin arithmetic is integral.
        let per_mille = step * 1000.0;
        if (per_mille - per_mille.round()).abs() > 1e-9 || 6000 % per_mille.round() as u32 != 0 {
            return Err(Error::usage(format!(
                "step {step} does not divide the [-3, 3] span evenly"
            )));
        }
        let step_per_mille = per_mille.round() as u32;
        let nbins = 6000 / step_per_mille;
        Ok(HistogramAccumulator {
            step_per_mille,
            bins: vec![0; nbins as usize],
            underflow: 0,
            overflow: 0,
            total: 0,
        })
    }

    pub fn step(&self) -> f64 {
        self.step_per_mille as f64 / 1000.0
    }

    /// Bin width in thousandths; the exact integer form used in checkpoints.
    pub fn step_per_mille(&self) -> u32 {
        self.step_per_mille
    }

    pub(crate) fn restore(
        step_per_mille: u32,
        bins: Vec<u64>,
        underflow: u64,
        overflow: u64,
        total: u64,
    ) -> Self {
        HistogramAccumulator {
            step_per_mille,
            bins,
            underflow,
            overflow,
            total,
        }
    }

    pub fn num_bins(&self) -> usize {
        self.bins.len()
    }

    pub fn bins(&self) -> &[u64] {
        &self.bins
    }

    /// Right edge of bin b: the bin covers (edge(b), edge(b+1)].
    pub fn edge(&self, i: usize) -> f64 {
        HIST_X_MIN + (i as u64 * self.step_per_mille as u64) as f64 / 1000.0
    }

    pub fn accumulate(&mut self, d: f64) -> Result<()> {
        if d.is_nan() {
            return Err(Error::usage("cannot accumulate NaN"));
        }
        self.total += 1;
        if d <= HIST_X_MIN {
            self.underflow += 1;
            return Ok(());
        }
        if d > HIST_X_MAX {
            self.overflow += 1;
            return Ok(());
        }
        let step = self.step();
        let mut b = (((d - HIST_X_MIN) / step).ceil() as isize - 1)
            .clamp(0, self.bins.len() as isize - 1) as usize;
        // Float rounding can land one bin off near an edge; settle it with
        // the interval predicate itself.
        while b > 0 && d <= self.edge(b) {
            b -= 1;
        }
        while b + 1 < self.bins.len() && d > self.edge(b + 1) {
            b += 1;
        }
        self.bins[b] += 1;
        Ok(())
    }

    /// Component-wise addition; merging chunk histograms is exact.
    pub fn merge(&mut self, other: &HistogramAccumulator) -> Result<()> {
        if self.step_per_mille != other.step_per_mille {
            return Err(Error::usage("histogram step mismatch in merge"));
        }
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        self.total += other.total;
        Ok(())
    }

    /// Conservation: underflow + bins + overflow = total.
    pub fn is_conserved(&self) -> bool {
        self.underflow + self.bins.iter().sum::<u64>() + self.overflow == self.total
    }

    /// Per-bin rows: fraction of samples (the count/total normalization) and
    /// count/(total*step), which is directly comparable to the normal
    /// density at the bin midpoint.
    pub fn density_rows(&self) -> Result<Vec<DensityRow>> {
        if self.total == 0 {
            return Err(Error::usage("empty histogram"));
        }
        let step = self.step();
        let total = self.total as f64;
        Ok(self
            .bins
            .iter()
            .enumerate()
            .map(|(i, &count)| {
                let x_right = self.edge(i + 1);
                let mid = x_right - step / 2.0;
                DensityRow {
                    x_right,
                    count,
                    frac: count as f64 / total,
                    density: count as f64 / (total * step),
                    phi_ref: normal_pdf(mid),
                }
            })
            .collect())
    }

    /// Cumulative rows: fraction of samples at or below each right edge,
    /// with the standard normal CDF for reference.
    pub fn cumulative_rows(&self) -> Result<Vec<CumulativeRow>> {
        if self.total == 0 {
            return Err(Error::usage("empty histogram"));
        }
        let total = self.total as f64;
        let mut running = self.underflow;
        let mut rows = Vec::with_capacity(self.bins.len());
        for (i, &count) in self.bins.iter().enumerate() {
            running += count;
            let x = self.edge(i + 1);
            rows.push(CumulativeRow {
                x,
                cum_frac: running as f64 / total,
                phi_cap_ref: normal_cdf(x),
            });
        }
        Ok(rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityRow {
    pub x_right: f64,
    pub count: u64,
    pub frac: f64,
    pub density: f64,
    pub phi_ref: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulativeRow {
    pub x: f64,
    pub cum_frac: f64,
    pub phi_cap_ref: f64,
}

/// Exact per-digit occurrence counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTable {
    pub q: u32,
    pub counts: Vec<u64>,
    pub n: u64,
}

impl FrequencyTable {
    pub fn new(q: u32) -> Self {
        FrequencyTable {
            q,
            counts: vec![0; q as usize],
            n: 0,
        }
    }

    pub fn update(&mut self, digit: u8) -> Result<()> {
        if digit as u32 >= self.q {
            return Err(Error::usage(format!(
                "digit {digit} out of range for base {}",
                self.q
            )));
        }
        self.counts[digit as usize] += 1;
        self.n += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &FrequencyTable) -> Result<()> {
        if self.q != other.q {
            return Err(Error::usage("base mismatch in frequency merge"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.n += other.n;
        Ok(())
    }

    /// Population variance of the observed digit frequencies around 1/q.
    pub fn variance(&self) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::usage("frequency variance undefined at n = 0"));
        }
        let p = 1.0 / self.q as f64;
        let n = self.n as f64;
        let sum: f64 = self
            .counts
            .iter()
            .map(|&c| {
                let diff = c as f64 / n - p;
                diff * diff
            })
            .sum();
        Ok(sum / self.q as f64)
    }
}
