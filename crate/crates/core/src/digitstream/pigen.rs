//! Decimal digits of pi by the Rabinowitz-Wagon spigot: exact integer
//! arithmetic over the mixed-radix representation pi = 2 + (1/3)(2 + (2/5)(2
//! + (3/7)(...))), emitting four decimal digits per pass.
//!
//! The spigot is quadratic in the digit count, which is fine at desk scale
//! for verification runs; bulk pi data beyond the cap comes from digit files.

use crate::error::{Error, Result};

/// Work grows quadratically; 10^6 digits is roughly a quarter-hour.
pub const PI_SPIGOT_MAX_DIGITS: u64 = 1_000_000;

/// Emission chunk: 10^4 per pass.
const GROUP: usize = 4;
const POW: u64 = 10_000;

pub fn pi_digits(count: u64) -> Result<Vec<u8>> {
    if count == 0 {
        return Err(Error::usage("digit count must be >= 1"));
    }
    if count > PI_SPIGOT_MAX_DIGITS {
        return Err(Error::Resource(format!(
            "pi spigot capped at {PI_SPIGOT_MAX_DIGITS} digits, requested {count}"
        )));
    }
    // The first pass extracts only the integer part (the group "0003");
    // every later pass yields a full 4-digit fraction group. Add slack for
    // the held predigit group.
    let total = count as usize + 3 * GROUP;
    let len = total * 10 / 3 + 2;
    let mut a = vec![2u64; len];
    let mut out: Vec<u8> = Vec::with_capacity(total + GROUP);
    let mut held: Option<u64> = None;
    let mut nines = 0usize;

    let emit_group = |out: &mut Vec<u8>, g: u64| {
        let mut digits = [0u8; GROUP];
        let mut v = g;
        for slot in digits.iter_mut().rev() {
            *slot = (v % 10) as u8;
            v /= 10;
        }
        out.extend_from_slice(&digits);
    };

    while out.len() < total {
        // One pass: multiply the mixed-radix number by 10^4 and normalize.
        // Overflow q at term i carries left as q*i (the numerator of the
        // radix fraction i/(2i+1)), so weight it when it is produced.
        let mut carry = 0u64;
        for i in (1..len).rev() {
            let denom = (2 * i + 1) as u64;
            let x = POW * a[i] + carry;
            a[i] = x % denom;
            carry = (x / denom) * i as u64;
        }
        let x = POW * a[0] + carry;
        a[0] = x % POW;
        let q = x / POW;

        // Buffer the predigit group: a later carry can still bump it by one,
        // turning a run of 9999-groups into 0000-groups.
        if q == POW {
            if let Some(h) = held {
                emit_group(&mut out, h + 1);
            }
            for _ in 0..nines {
                emit_group(&mut out, 0);
            }
            held = Some(0);
            nines = 0;
        } else if q == POW - 1 {
            nines += 1;
        } else {
            if let Some(h) = held {
                emit_group(&mut out, h);
            }
            for _ in 0..nines {
                emit_group(&mut out, POW - 1);
            }
            held = Some(q);
            nines = 0;
        }
    }
    // out[..4] is the zero-padded integer part; the fraction follows.
    debug_assert_eq!(&out[..4], &[0, 0, 0, 3]);
    Ok(out[GROUP..GROUP + count as usize].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_digits() {
        assert_eq!(pi_digits(5).unwrap(), vec![1, 4, 1, 5, 9]);
        assert_eq!(pi_digits(10).unwrap(), vec![1, 4, 1, 5, 9, 2, 6, 5, 3, 5]);
        assert_eq!(
            pi_digits(20).unwrap(),
            vec![1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7, 9, 3, 2, 3, 8, 4, 6]
        );
    }

    #[test]
    fn known_window_at_position_50() {
        // pi fraction digits 51..60 are 5820974944.
        let d = pi_digits(60).unwrap();
        assert_eq!(&d[50..60], &[5, 8, 2, 0, 9, 7, 4, 9, 4, 4]);
    }

    #[test]
    fn prefix_consistency() {
        let long = pi_digits(300).unwrap();
        for m in [1u64, 4, 5, 64, 299] {
            assert_eq!(pi_digits(m).unwrap(), long[..m as usize]);
        }
    }

    #[test]
    fn bad_inputs_rejected() {
        assert!(pi_digits(0).is_err());
        assert!(matches!(
            pi_digits(PI_SPIGOT_MAX_DIGITS + 1),
            Err(Error::Resource(_))
        ));
    }
}
