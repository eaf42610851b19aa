//! Fractional decimal digits of e by exact integer evaluation of the
//! factorial series, sum 1/k!, via binary splitting.
//!
//! With K chosen so that 2/(K+1)! < 10^-(count+12), the truncated series
//! differs from e by less than one unit ten places past the last guard
//! digit, so the emitted digits carry a proven error bound below
//! 10^-(count+10).

use num_bigint::BigUint;
use num_traits::One;

use crate::bigmath::{div_rem_floor, pow10, DecimalSplitter};
use crate::error::{Error, Result};

const MAX_E_DIGITS: u64 = 50_000_000;
const GUARD_DIGITS: u64 = 10;

/// Partial sums over half-open term ranges (a, b]:
/// S(a, b) = sum_{k=a+1}^{b} a!/k! = P(a,b) / Q(a,b), Q(a,b) = (a+1)...(b).
fn split(a: u64, b: u64) -> (BigUint, BigUint) {
    if b - a == 1 {
        return (BigUint::one(), BigUint::from(b));
    }
    let m = (a + b) / 2;
    let (p_left, q_left) = split(a, m);
    let (p_right, q_right) = split(m, b);
    (p_left * &q_right + p_right, q_left * q_right)
}

/// Smallest K with log10((K+1)!) comfortably past `decimal_digits`.
fn terms_for(decimal_digits: u64) -> u64 {
    let target = (decimal_digits + 3) as f64;
    let mut log_fact = 0.0f64;
    let mut k = 0u64;
    while log_fact <= target {
        k += 1;
        log_fact += (k as f64).log10();
    }
    k
}

pub fn e_digits(count: u64) -> Result<Vec<u8>> {
    if count == 0 {
        return Err(Error::usage("digit count must be >= 1"));
    }
    if count > MAX_E_DIGITS {
        return Err(Error::Resource(format!(
            "e generator capped at {MAX_E_DIGITS} digits, requested {count}"
        )));
    }
    let prec = count + GUARD_DIGITS;
    let k = terms_for(prec + 2);
    // e = 1 + S(0, K) + tail, so the fractional part is P/Q - 1 (P/Q in (1,2)).
    let (p, q) = split(0, k);
    let scaled = (&p - &q) * pow10(prec);
    let (frac, _) = div_rem_floor(&scaled, &q);
    // frac(e) = 0.718..., so the quotient has exactly `prec` digits.
    let dec = DecimalSplitter::new().to_decimal_padded(&frac, prec);
    Ok(dec.bytes().take(count as usize).map(|b| b - b'0').collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_digits() {
        assert_eq!(e_digits(1).unwrap(), vec![7]);
        assert_eq!(e_digits(9).unwrap(), vec![7, 1, 8, 2, 8, 1, 8, 2, 8]);
        assert_eq!(
            e_digits(15).unwrap(),
            vec![7, 1, 8, 2, 8, 1, 8, 2, 8, 4, 5, 9, 0, 4, 5]
        );
    }

    #[test]
    fn prefix_consistency() {
        let long = e_digits(500).unwrap();
        for m in [1u64, 16, 100, 499] {
            assert_eq!(e_digits(m).unwrap(), long[..m as usize]);
        }
    }

    #[test]
    fn term_count_bounds_tail() {
        // (K+1)! must exceed 10^(digits+3).
        for digits in [10u64, 100, 1000] {
            let k = terms_for(digits);
            let mut log_fact = 0.0f64;
            for i in 1..=k {
                log_fact += (i as f64).log10();
            }
            assert!(log_fact > digits as f64 + 2.5, "digits={digits} k={k}");
        }
    }

    #[test]
    fn bad_inputs_rejected() {
        assert!(e_digits(0).is_err());
        assert!(matches!(e_digits(MAX_E_DIGITS + 1), Err(Error::Resource(_))));
    }
}
