//! Sliding-window pattern counts for finite normality checks: every
//! overlapping k-digit window is counted, frequencies are compared against
//! the q^(-k) expected under normality via per-pattern z-scores and an
//! overall chi-square statistic.

use crate::error::{Error, Result};

/// Default upper bound on pattern length; q^k count slots must stay
/// addressable and statistically meaningful. Larger k can be requested
/// explicitly where the sample size justifies it.
pub const DEFAULT_MAX_PATTERN_LEN: u32 = 4;

/// Counts of all q^k overlapping k-digit patterns in a digit stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternCounter {
    base: u32,
    k: u32,
    /// counts[code] where code is the base-q value of the k-digit window.
    counts: Vec<u64>,
    /// Number of windows counted (digits consumed minus k-1 per segment).
    windows: u64,
    /// Digits consumed; the frequency denominator is n, not n-k+1.
    digits: u64,
    /// Rolling window code of the last k-1 digits, plus how many digits of
    /// it are valid (ramps up at the start of a segment).
    window: u64,
    filled: u32,
}

impl PatternCounter {
    pub fn new(base: u32, k: u32) -> Result<Self> {
        Self::with_limit(base, k, DEFAULT_MAX_PATTERN_LEN)
    }

    /// As `new` but with an explicit cap on k for callers that need longer
    /// patterns and accept the q^k memory cost.
    pub fn with_limit(base: u32, k: u32, max_k: u32) -> Result<Self> {
        if !(2..=36).contains(&base) {
            return Err(Error::usage(format!("base must be in 2..=36, got {base}")));
        }
        if k < 1 || k > max_k {
            return Err(Error::usage(format!(
                "pattern length must be in 1..={max_k}, got {k}"
            )));
        }
        let slots = (base as u64).checked_pow(k).ok_or_else(|| {
            Error::usage(format!("base^k overflows for base {base}, k {k}"))
        })?;
        if slots > (1u64 << 28) {
            return Err(Error::Resource(format!(
                "pattern table of {slots} slots is too large"
            )));
        }
        Ok(PatternCounter {
            base,
            k,
            counts: vec![0; slots as usize],
            windows: 0,
            digits: 0,
            window: 0,
            filled: 0,
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn pattern_len(&self) -> u32 {
        self.k
    }

    pub fn window_count(&self) -> u64 {
        self.windows
    }

    /// Digits consumed (seed digits excluded).
    pub fn digit_count(&self) -> u64 {
        self.digits
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Feed one digit, extending the current segment.
    pub fn push(&mut self, digit: u8) -> Result<()> {
        if digit as u32 >= self.base {
            return Err(Error::usage(format!(
                "digit {digit} out of range for base {}",
                self.base
            )));
        }
        self.digits += 1;
        let modulus = (self.base as u64).pow(self.k - 1);
        self.window = (self.window % modulus) * self.base as u64 + digit as u64;
        if self.filled < self.k {
            self.filled += 1;
        }
        if self.filled == self.k {
            self.counts[self.window as usize] += 1;
            self.windows += 1;
        }
        Ok(())
    }

    /// Seed the rolling window with the last k-1 digits preceding this
    /// chunk, so chunked scans count the windows that straddle the cut.
    pub fn with_seed_window(base: u32, k: u32, prior: &[u8]) -> Result<Self> {
        let mut c = Self::new(base, k)?;
        let tail = &prior[prior.len().saturating_sub(k as usize - 1)..];
        for &d in tail {
            if d as u32 >= base {
                return Err(Error::usage(format!(
                    "seed digit {d} out of range for base {base}"
                )));
            }
            c.window = c.window * base as u64 + d as u64;
            c.filled += 1;
        }
        Ok(c)
    }

    /// Combine two counters over adjacent chunks. `other` must have been
    /// seeded with this chunk's trailing digits for straddling windows to
    /// be counted exactly once.
    pub fn merge(&mut self, other: &PatternCounter) -> Result<()> {
        if self.base != other.base || self.k != other.k {
            return Err(Error::usage("pattern counter shape mismatch in merge"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.windows += other.windows;
        self.digits += other.digits;
        self.window = other.window;
        self.filled = self.filled.min(self.k).max(other.filled);
        Ok(())
    }

    /// Observed sliding frequency of one pattern code: count / n, with n the
    /// number of digits consumed (not the window count n - k + 1).
    pub fn freq(&self, code: u64) -> Result<f64> {
        let count = *self
            .counts
            .get(code as usize)
            .ok_or_else(|| Error::usage(format!("pattern code {code} out of range")))?;
        if self.digits == 0 {
            return Err(Error::usage("no digits consumed yet"));
        }
        Ok(count as f64 / self.digits as f64)
    }

    /// z-score of one pattern's sliding frequency against the normality
    /// expectation p = q^(-k): (freq - p) / sqrt(p(1-p)/n). The binomial
    /// framing ignores the correlation between overlapping windows; this is
    /// a documented limitation, not a bug.
    pub fn z_score(&self, code: u64) -> Result<f64> {
        let f = self.freq(code)?;
        let n = self.digits as f64;
        let p = (self.base as f64).powi(-(self.k as i32));
        Ok((f - p) / (p * (1.0 - p) / n).sqrt())
    }

    /// Pearson chi-square over all q^k patterns with expected count
    /// E = N * q^(-k), plus the degrees of freedom q^k - 1.
    pub fn chi_square(&self) -> Result<(f64, u64)> {
        let n = self.windows as f64;
        let p = (self.base as f64).powi(-(self.k as i32));
        let expected = n * p;
        if expected < 1.0 {
            return Err(Error::usage(format!(
                "expected count {expected:.3} per pattern is below 1; \
                 need more digits for k = {}",
                self.k
            )));
        }
        let chi2 = self
            .counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        Ok((chi2, self.counts.len() as u64 - 1))
    }

    /// Render a pattern code as its k-digit string (e.g. code 7, k=2,
    /// base 10 -> "07"; base 16 uses uppercase hex digits).
    pub fn pattern_string(&self, code: u64) -> String {
        const DIGITS: &[u8] = b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
        let mut s = vec![0u8; self.k as usize];
        let mut c = code;
        for slot in s.iter_mut().rev() {
            *slot = DIGITS[(c % self.base as u64) as usize];
            c /= self.base as u64;
        }
        String::from_utf8(s).unwrap()
    }

    pub(crate) fn restore(
        base: u32,
        k: u32,
        counts: Vec<u64>,
        windows: u64,
        digits: u64,
        window: u64,
        filled: u32,
    ) -> Self {
        PatternCounter {
            base,
            k,
            counts,
            windows,
            digits,
            window,
            filled,
        }
    }

    pub(crate) fn raw_state(&self) -> (u64, u64, u64, u32) {
        (self.windows, self.digits, self.window, self.filled)
    }
}

/// Count all overlapping k-digit windows in a slice of digits.
pub fn pattern_scan(digits: &[u8], base: u32, k: u32) -> Result<PatternCounter> {
    let mut c = PatternCounter::new(base, k)?;
    for &d in digits {
        c.push(d)?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_digit_counts_are_frequencies() {
        let digits = [1u8, 2, 1, 1, 3];
        let c = pattern_scan(&digits, 10, 1).unwrap();
        assert_eq!(c.window_count(), 5);
        assert_eq!(c.counts()[1], 3);
        assert_eq!(c.counts()[2], 1);
        assert_eq!(c.freq(1).unwrap(), 0.6);
    }

    #[test]
    fn overlapping_pairs() {
        // "1212" has pairs 12, 21, 12.
        let c = pattern_scan(&[1, 2, 1, 2], 10, 2).unwrap();
        assert_eq!(c.window_count(), 3);
        assert_eq!(c.counts()[12], 2);
        assert_eq!(c.counts()[21], 1);

        // "11111" has four overlapping "11" windows across five digits,
        // so the sliding frequency is 4/5.
        let c = pattern_scan(&[1; 5], 10, 2).unwrap();
        assert_eq!(c.counts()[11], 4);
        assert_eq!(c.freq(11).unwrap(), 0.8);
    }

    #[test]
    fn repeating_decade_pairs() {
        let digits: Vec<u8> = (0..100).map(|i| (i % 10) as u8).collect();
        let c = pattern_scan(&digits, 10, 2).unwrap();
        assert_eq!(c.counts()[1], 10); // "01"
        assert_eq!(c.counts()[2], 0); // "02"
        assert_eq!(c.counts()[23], 10); // "23"
        assert_eq!(c.freq(23).unwrap(), 0.1);
    }

    #[test]
    fn window_count_is_n_minus_k_plus_1() {
        let digits: Vec<u8> = (0..100).map(|i| (i % 7) as u8).collect();
        for k in 1..=4u32 {
            let c = pattern_scan(&digits, 10, k).unwrap();
            assert_eq!(c.window_count(), 100 - k as u64 + 1);
            assert_eq!(c.counts().iter().sum::<u64>(), c.window_count());
        }
    }

    #[test]
    fn brute_force_agreement() {
        // Pseudo-random digits, compare against direct substring counting.
        let digits: Vec<u8> = (0..2000u64).map(|i| ((i * 31 + 17) % 97 % 10) as u8).collect();
        for k in 1..=3u32 {
            let c = pattern_scan(&digits, 10, k).unwrap();
            let mut brute = vec![0u64; 10usize.pow(k)];
            for w in digits.windows(k as usize) {
                let code = w.iter().fold(0u64, |acc, &d| acc * 10 + d as u64);
                brute[code as usize] += 1;
            }
            assert_eq!(c.counts(), &brute[..], "k={k}");
        }
    }

    #[test]
    fn seeded_chunk_merge_matches_whole() {
        let digits: Vec<u8> = (0..1500u64).map(|i| ((i * 13 + 7) % 10) as u8).collect();
        for k in 1..=3u32 {
            let whole = pattern_scan(&digits, 10, k).unwrap();
            let mut left = pattern_scan(&digits[..700], 10, k).unwrap();
            let mut right =
                PatternCounter::with_seed_window(10, k, &digits[..700]).unwrap();
            for &d in &digits[700..] {
                right.push(d).unwrap();
            }
            left.merge(&right).unwrap();
            assert_eq!(left.counts(), whole.counts(), "k={k}");
            assert_eq!(left.window_count(), whole.window_count(), "k={k}");
            assert_eq!(left.digit_count(), whole.digit_count(), "k={k}");
        }
    }

    #[test]
    fn z_score_zero_at_expectation() {
        // 10000 windows of k=1 with exactly uniform counts.
        let digits: Vec<u8> = (0..10000).map(|i| (i % 10) as u8).collect();
        let c = pattern_scan(&digits, 10, 1).unwrap();
        for code in 0..10 {
            assert!(c.z_score(code).unwrap().abs() < 1e-12);
        }
        let (chi2, dof) = c.chi_square().unwrap();
        assert_eq!(dof, 9);
        assert!(chi2.abs() < 1e-12);
    }

    #[test]
    fn z_score_hand_value() {
        // 8 zeros, 2 ones in base 2, k=1: p = 0.5, N = 10.
        let c = pattern_scan(&[0, 0, 0, 0, 0, 0, 0, 0, 1, 1], 2, 1).unwrap();
        let z = c.z_score(0).unwrap();
        // (8 - 5) / sqrt(10 * 0.25) = 3 / 1.5811 = 1.8974
        assert!((z - 1.897366596).abs() < 1e-8, "{z}");
        assert!((c.z_score(1).unwrap() + z).abs() < 1e-12);
    }

    #[test]
    fn chi_square_skew_case() {
        // All-same digits: one cell holds everything.
        let c = pattern_scan(&[3u8; 100], 10, 1).unwrap();
        let (chi2, dof) = c.chi_square().unwrap();
        assert_eq!(dof, 9);
        // E = 10 per cell; cell 3 contributes (100-10)^2/10, others 10 each.
        assert!((chi2 - (8100.0 / 10.0 + 9.0 * 10.0)).abs() < 1e-9);
    }

    #[test]
    fn chi_square_requires_enough_windows() {
        let c = pattern_scan(&[1, 2, 3], 10, 3).unwrap();
        assert!(matches!(c.chi_square(), Err(Error::Usage(_))));
    }

    #[test]
    fn pattern_strings() {
        let c = PatternCounter::new(10, 2).unwrap();
        assert_eq!(c.pattern_string(7), "07");
        assert_eq!(c.pattern_string(42), "42");
        let h = PatternCounter::new(16, 2).unwrap();
        assert_eq!(h.pattern_string(0xF3), "F3");
    }

    #[test]
    fn constructor_guards() {
        assert!(PatternCounter::new(10, 0).is_err());
        assert!(PatternCounter::new(10, 5).is_err());
        assert!(PatternCounter::with_limit(10, 5, 6).is_ok());
        assert!(PatternCounter::new(1, 1).is_err());
        assert!(PatternCounter::new(37, 1).is_err());
        let mut c = PatternCounter::new(8, 1).unwrap();
        assert!(c.push(8).is_err());
    }
}
