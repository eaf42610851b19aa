//! Fractional decimal digits of square roots by one-shot integer square root
//! at the target precision: floor(isqrt(radicand * 10^(2*count))) with the
//! integer-part digits stripped. Digits are exact truncations, never rounded.

use num_bigint::BigUint;

use crate::bigmath::{decimal_len, isqrt, pow10, DecimalSplitter};
use crate::error::{Error, Result};

/// Hard memory guard; 5e7 digits of scratch is already a multi-GB computation.
const MAX_SQRT_DIGITS: u64 = 50_000_000;

pub fn sqrt_digits(radicand: u64, count: u64) -> Result<Vec<u8>> {
    if radicand == 0 {
        return Err(Error::usage("radicand must be >= 1"));
    }
    if count == 0 {
        return Err(Error::usage("digit count must be >= 1"));
    }
    if count > MAX_SQRT_DIGITS {
        return Err(Error::Resource(format!(
            "sqrt generator capped at {MAX_SQRT_DIGITS} digits, requested {count}"
        )));
    }
    let scaled = BigUint::from(radicand) * pow10(2 * count);
    let root = isqrt(&scaled);
    // root has exactly int_len + count decimal digits (radicand >= 1 so the
    // integer part of the square root is >= 1).
    let int_len = decimal_len(&isqrt(&BigUint::from(radicand)));
    let total = int_len + count;
    let dec = DecimalSplitter::new().to_decimal_padded(&root, total);
    Ok(dec.bytes().skip(int_len as usize).map(|b| b - b'0').collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt2_first_digits() {
        assert_eq!(sqrt_digits(2, 8).unwrap(), vec![4, 1, 4, 2, 1, 3, 5, 6]);
    }

    #[test]
    fn perfect_square_yields_zeros() {
        assert_eq!(sqrt_digits(9, 4).unwrap(), vec![0, 0, 0, 0]);
        assert_eq!(sqrt_digits(144, 6).unwrap(), vec![0; 6]);
    }

    #[test]
    fn sqrt3_first_digits() {
        assert_eq!(sqrt_digits(3, 7).unwrap(), vec![7, 3, 2, 0, 5, 0, 8]);
    }

    #[test]
    fn prefix_consistency() {
        let long = sqrt_digits(2, 200).unwrap();
        for m in [1u64, 7, 50, 199] {
            assert_eq!(sqrt_digits(2, m).unwrap(), long[..m as usize]);
        }
    }

    #[test]
    fn multi_digit_integer_part() {
        // sqrt(200) = 14.1421356...
        assert_eq!(sqrt_digits(200, 5).unwrap(), vec![1, 4, 2, 1, 3]);
    }

    #[test]
    fn bad_inputs_rejected() {
        assert!(sqrt_digits(0, 5).is_err());
        assert!(sqrt_digits(2, 0).is_err());
        assert!(matches!(
            sqrt_digits(2, MAX_SQRT_DIGITS + 1),
            Err(Error::Resource(_))
        ));
    }
}
