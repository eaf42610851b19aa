//! Iterated-logarithm normalization of the deviation series: delta = d /
//! sqrt(2 ln ln n), suffix extrema (finite-data stand-ins for lim inf and
//! lim sup), envelope-preserving block downsampling for plots, and
//! oscillation/tail summaries.

use crate::cltscan::deviation_at;
use crate::error::{Error, Result};
use crate::moments::MomentSet;

/// Smallest n with a usable divisor: ln ln n > 0 needs n > e, and 10 is the
/// smallest round prefix length past that. During full-stream scans, points
/// below the cutoff are omitted rather than errored.
pub const LIL_MIN_N: u64 = 10;

/// sqrt(2 ln ln n), natural logarithms at both levels.
pub fn lil_divisor(n: u64) -> Result<f64> {
    if n < LIL_MIN_N {
        return Err(Error::Domain(format!(
            "LIL divisor defined for n >= {LIL_MIN_N}, got {n}"
        )));
    }
    Ok((2.0 * (n as f64).ln().ln()).sqrt())
}

/// delta = d / sqrt(2 ln ln n).
pub fn lil_delta(d: f64, n: u64) -> Result<f64> {
    Ok(d / lil_divisor(n)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LilPoint {
    pub n: u64,
    pub d: f64,
    pub delta: f64,
}

impl LilPoint {
    pub fn from_state(n: u64, s: u128, m: &MomentSet) -> Result<LilPoint> {
        let d = deviation_at(n, s, m);
        Ok(LilPoint {
            n,
            d,
            delta: lil_delta(d, n)?,
        })
    }
}

/// Running extrema over every tail of a sampled delta series.
#[derive(Debug, Clone, PartialEq)]
pub struct SuffixExtrema {
    pub indices: Vec<u64>,
    pub suffix_min: Vec<f64>,
    pub suffix_max: Vec<f64>,
}

/// One reverse pass: suffix_min[i] = min of delta over positions i..end.
pub fn suffix_extrema(series: &[(u64, f64)]) -> Result<SuffixExtrema> {
    if series.is_empty() {
        return Err(Error::usage("suffix extrema of an empty series"));
    }
    let len = series.len();
    let mut suffix_min = vec![0.0; len];
    let mut suffix_max = vec![0.0; len];
    let mut cur_min = f64::INFINITY;
    let mut cur_max = f64::NEG_INFINITY;
    for i in (0..len).rev() {
        cur_min = cur_min.min(series[i].1);
        cur_max = cur_max.max(series[i].1);
        suffix_min[i] = cur_min;
        suffix_max[i] = cur_max;
    }
    Ok(SuffixExtrema {
        indices: series.iter().map(|&(n, _)| n).collect(),
        suffix_min,
        suffix_max,
    })
}

/// Envelope-preserving downsampling: partition n into consecutive blocks of
/// `block_size`, split each block into `points_per_block` buckets, and emit
/// each bucket's minimum, maximum, and end point. Per-bucket min/max (rather
/// than naive striding) keeps oscillation envelopes from aliasing away.
pub fn block_series(
    series: &[LilPoint],
    block_size: u64,
    points_per_block: u64,
) -> Result<Vec<LilPoint>> {
    if points_per_block < 1 || block_size < points_per_block {
        return Err(Error::usage(
            "need block_size >= points_per_block >= 1".to_string(),
        ));
    }
    let width = block_size.div_ceil(points_per_block);
    let mut out: Vec<LilPoint> = Vec::new();
    let mut i = 0usize;
    while i < series.len() {
        // Bucket containing series[i].n: [start, start + width).
        let start = (series[i].n / width) * width;
        let mut min_p = series[i];
        let mut max_p = series[i];
        let mut end_p = series[i];
        let mut j = i;
        while j < series.len() && series[j].n < start + width {
            let p = series[j];
            if p.delta < min_p.delta {
                min_p = p;
            }
            if p.delta > max_p.delta {
                max_p = p;
            }
            end_p = p;
            j += 1;
        }
        let mut picked = [min_p, max_p, end_p];
        picked.sort_by_key(|p| p.n);
        for p in picked {
            if out.last().map_or(true, |last| last.n != p.n) {
                out.push(p);
            }
        }
        i = j;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationSummary {
    pub n_from: u64,
    pub n_to: u64,
    pub min_delta: f64,
    pub max_delta: f64,
    /// Fraction of sampled points whose delta lies in the query interval.
    pub fraction_in: f64,
}

/// Extrema of delta over n in [n_from, n_to], plus the fraction of sampled
/// indices inside a query interval (lo, hi).
pub fn oscillation_summary(
    series: &[LilPoint],
    n_from: u64,
    n_to: u64,
    query: (f64, f64),
) -> Result<OscillationSummary> {
    if n_from >= n_to {
        return Err(Error::usage("need n_from < n_to"));
    }
    let mut min_delta = f64::INFINITY;
    let mut max_delta = f64::NEG_INFINITY;
    let mut inside = 0u64;
    let mut total = 0u64;
    for p in series.iter().filter(|p| p.n >= n_from && p.n <= n_to) {
        min_delta = min_delta.min(p.delta);
        max_delta = max_delta.max(p.delta);
        if p.delta > query.0 && p.delta < query.1 {
            inside += 1;
        }
        total += 1;
    }
    if total == 0 {
        return Err(Error::usage(format!(
            "no sampled points in [{n_from}, {n_to}]"
        )));
    }
    Ok(OscillationSummary {
        n_from,
        n_to,
        min_delta,
        max_delta,
        fraction_in: inside as f64 / total as f64,
    })
}

/// Fraction of d values strictly above the threshold.
pub fn tail_fraction(ds: &[f64], threshold: f64) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::usage("tail fraction of an empty series"));
    }
    Ok(ds.iter().filter(|&&d| d > threshold).count() as f64 / ds.len() as f64)
}

/// Streaming envelope accumulator over exact scan states. Interior extrema
/// are remembered as the exact (n, S) integer pairs at which they occurred,
/// so checkpoints carry no floating-point state and a resumed run reproduces
/// bit-identical deltas.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeAccumulator {
    moments: MomentSet,
    bucket_width: u64,
    cutoff: u64,
    cur: Option<BucketState>,
    /// Cached deltas of the open bucket's extrema; always recomputable from
    /// the integer state, so they are never checkpointed.
    cur_min_delta: f64,
    cur_max_delta: f64,
    closed: Vec<BucketState>,
}

/// Integer core of one bucket: positions of the delta extrema and the end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BucketState {
    pub n_min: u64,
    pub s_min: u128,
    pub n_max: u64,
    pub s_max: u128,
    pub n_end: u64,
    pub s_end: u128,
}

impl EnvelopeAccumulator {
    pub fn new(moments: MomentSet, bucket_width: u64, cutoff: u64) -> Result<Self> {
        if bucket_width == 0 {
            return Err(Error::usage("bucket width must be >= 1"));
        }
        Ok(EnvelopeAccumulator {
            moments,
            bucket_width,
            cutoff: cutoff.max(LIL_MIN_N),
            cur: None,
            cur_min_delta: f64::INFINITY,
            cur_max_delta: f64::NEG_INFINITY,
            closed: Vec::new(),
        })
    }

    pub fn bucket_width(&self) -> u64 {
        self.bucket_width
    }

    fn delta(&self, n: u64, s: u128) -> f64 {
        // n >= cutoff >= LIL_MIN_N here, so the divisor is always defined.
        deviation_at(n, s, &self.moments) / (2.0 * (n as f64).ln().ln()).sqrt()
    }

    /// Record the exact state after digit n. Must be called for every n in
    /// increasing order.
    pub fn push(&mut self, n: u64, s: u128) {
        if n < self.cutoff {
            return;
        }
        let delta = self.delta(n, s);
        match self.cur {
            Some(ref mut b) => {
                if delta < self.cur_min_delta {
                    self.cur_min_delta = delta;
                    b.n_min = n;
                    b.s_min = s;
                }
                if delta > self.cur_max_delta {
                    self.cur_max_delta = delta;
                    b.n_max = n;
                    b.s_max = s;
                }
                b.n_end = n;
                b.s_end = s;
            }
            None => {
                self.cur = Some(BucketState {
                    n_min: n,
                    s_min: s,
                    n_max: n,
                    s_max: s,
                    n_end: n,
                    s_end: s,
                });
                self.cur_min_delta = delta;
                self.cur_max_delta = delta;
            }
        }
        if n % self.bucket_width == 0 {
            self.closed.push(self.cur.take().unwrap());
            self.cur_min_delta = f64::INFINITY;
            self.cur_max_delta = f64::NEG_INFINITY;
        }
    }

    /// Append a chunk-local accumulator whose range follows this one.
    /// The left side must have ended exactly on a bucket boundary.
    pub fn merge(&mut self, other: &EnvelopeAccumulator) -> Result<()> {
        if self.bucket_width != other.bucket_width || self.cutoff != other.cutoff {
            return Err(Error::usage("envelope accumulator shape mismatch in merge"));
        }
        if self.cur.is_some() {
            return Err(Error::usage(
                "cannot merge into an envelope with an open bucket".to_string(),
            ));
        }
        self.closed.extend_from_slice(&other.closed);
        self.cur = other.cur;
        self.cur_min_delta = other.cur_min_delta;
        self.cur_max_delta = other.cur_max_delta;
        Ok(())
    }

    pub fn closed_buckets(&self) -> &[BucketState] {
        &self.closed
    }

    pub fn open_bucket(&self) -> Option<&BucketState> {
        self.cur.as_ref()
    }

    pub(crate) fn restore(
        moments: MomentSet,
        bucket_width: u64,
        cutoff: u64,
        closed: Vec<BucketState>,
        cur: Option<BucketState>,
    ) -> Self {
        let mut acc = EnvelopeAccumulator {
            moments,
            bucket_width,
            cutoff,
            cur,
            cur_min_delta: f64::INFINITY,
            cur_max_delta: f64::NEG_INFINITY,
            closed,
        };
        if let Some(b) = acc.cur {
            acc.cur_min_delta = acc.delta(b.n_min, b.s_min);
            acc.cur_max_delta = acc.delta(b.n_max, b.s_max);
        }
        acc
    }

    /// Plot points: per bucket the min, max, and end states, ordered by n.
    pub fn points(&self) -> Result<Vec<LilPoint>> {
        let mut out = Vec::new();
        let all = self.closed.iter().chain(self.cur.iter());
        for b in all {
            let mut picked = [
                (b.n_min, b.s_min),
                (b.n_max, b.s_max),
                (b.n_end, b.s_end),
            ];
            picked.sort_by_key(|&(n, _)| n);
            for (n, s) in picked {
                if out.last().map_or(true, |last: &LilPoint| last.n != n) {
                    out.push(LilPoint::from_state(n, s, &self.moments)?);
                }
            }
        }
        Ok(out)
    }
}
