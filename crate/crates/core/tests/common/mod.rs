//! Independent oracles for cross-checking the digit generators. Each is a
//! deliberately different algorithm from the implementation it checks:
//! long-division ("abacus") square roots vs Newton isqrt, a Machin arctan
//! series vs the pi spigot and BBP, and a mixed-radix spigot vs binary
//! splitting for e. Keep them separate: collapsing an oracle onto the code
//! under test would make the comparison circular.

// Shared by several test targets; not every target uses every oracle.
#![allow(dead_code)]

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

fn u128_isqrt(v: u128) -> u128 {
    if v == 0 {
        return 0;
    }
    let mut x = (v as f64).sqrt() as u128;
    while x.checked_mul(x).map_or(true, |sq| sq > v) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).map_or(false, |sq| sq <= v) {
        x += 1;
    }
    x
}

/// Digit-by-digit long-division square root of `radicand`, generalized to
/// process `chunk_digits` decimal digits per step (chunk base B = 10^c).
/// Returns `count` fractional decimal digits of sqrt(radicand).
///
/// Invariant per step: rem = N - r^2 where N is the input scaled so far and
/// r is the root built so far in base B. The next base-B digit x is the
/// largest with (2*r*B + x)*x <= rem*B^2 + pair.
pub fn abacus_sqrt_digits(radicand: u64, count: u64, chunk_digits: u32) -> Vec<u8> {
    assert!(radicand >= 1 && chunk_digits >= 1 && chunk_digits <= 18);
    let c = chunk_digits as u64;
    let b_small: u128 = 10u128.pow(chunk_digits);
    let b = BigUint::from(b_small);
    let b2 = &b * &b;

    // Integer-part length in decimal digits.
    let int_len = {
        let mut len = 0u64;
        let mut v = u128_isqrt(radicand as u128);
        while v > 0 {
            len += 1;
            v /= 10;
        }
        len
    };

    // Fractional decimals F, a multiple of c: scaled input m * 10^(2F) is m
    // followed by F/c zero pairs in base B^2.
    let f = count.div_ceil(c) * c;
    let mut pairs: Vec<BigUint> = Vec::new();
    let mut m = BigUint::from(radicand);
    while !m.is_zero() {
        pairs.push(&m % &b2);
        m /= &b2;
    }
    pairs.reverse();
    let n_pairs = pairs.len() as u64 + f / c;

    let mut r = BigUint::zero();
    let mut rem = BigUint::zero();
    let mut decimal = String::new();
    for i in 0..n_pairs {
        let pair = pairs.get(i as usize).cloned().unwrap_or_else(BigUint::zero);
        rem = rem * &b2 + pair;
        let x = if r.is_zero() {
            BigUint::from(u128_isqrt(rem.to_u128().expect("first pair fits u128")))
        } else {
            // Largest x with (base + x) * x <= rem. rem/base ignores the +x
            // term and overestimates; rem/(base + hi) underestimates. Close
            // the remaining gap (can be ~B/2 while r is short) by binary
            // search on the exact predicate.
            let base = (&r << 1) * &b;
            let mut hi = &rem / &base;
            if hi >= b {
                hi = &b - BigUint::one();
            }
            let mut lo = &rem / (&base + &hi);
            if lo > hi {
                // Only possible after capping hi at B-1; x = B-1 then.
                lo = hi.clone();
            }
            while lo < hi {
                let mid = (&lo + &hi + BigUint::one()) >> 1;
                if (&base + &mid) * &mid <= rem {
                    lo = mid;
                } else {
                    hi = mid - BigUint::one();
                }
            }
            lo
        };
        rem -= (((&r << 1) * &b) + &x) * &x;
        r = r * &b + &x;
        // Each chunk contributes exactly c decimal digits (zero-padded).
        let s = x.to_str_radix(10);
        for _ in 0..(c as usize - s.len()) {
            decimal.push('0');
        }
        decimal.push_str(&s);
    }

    // Leading zero padding before the integer part, then int_len integer
    // digits, then the fraction.
    let offset = (n_pairs * c - (int_len + f)) as usize;
    let frac = &decimal[offset + int_len as usize..];
    frac[..count as usize].bytes().map(|ch| ch - b'0').collect()
}

/// atan(1/x) * scale, by the alternating Taylor series in fixed point.
fn atan_inv_scaled(x: u64, scale: &BigUint) -> BigInt {
    let x2 = BigInt::from(x * x);
    let mut term = BigInt::from(scale.clone()) / BigInt::from(x);
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    let mut negative = false;
    while !term.is_zero() {
        let contrib = &term / BigInt::from(2 * k + 1);
        if negative {
            sum -= contrib;
        } else {
            sum += contrib;
        }
        term /= &x2;
        negative = !negative;
        k += 1;
    }
    sum
}

/// pi = 16 atan(1/5) - 4 atan(1/239) (Machin), in fixed point.
fn machin_pi_scaled(scale: &BigUint) -> BigUint {
    let pi = atan_inv_scaled(5, scale) * BigInt::from(16)
        - atan_inv_scaled(239, scale) * BigInt::from(4);
    pi.to_biguint().expect("pi is positive")
}

/// First `count` fractional decimal digits of pi via the Machin formula.
pub fn machin_pi_decimal(count: u64) -> Vec<u8> {
    let guard = 12u64;
    let scale = BigUint::from(10u32).pow((count + guard) as u32);
    let pi = machin_pi_scaled(&scale);
    let frac = pi - BigUint::from(3u32) * &scale;
    let s = frac.to_str_radix(10);
    // Pad leading zeros to the full fixed-point width.
    let width = (count + guard) as usize;
    let padded: String = "0".repeat(width - s.len()) + &s;
    padded[..count as usize].bytes().map(|ch| ch - b'0').collect()
}

/// First `count` fractional hexadecimal digits of pi via the Machin formula
/// in binary fixed point.
pub fn machin_pi_hex(count: u64) -> Vec<u8> {
    let guard_bits = 64u64;
    let bits = count * 4 + guard_bits;
    let scale = BigUint::one() << bits;
    let pi = machin_pi_scaled(&scale);
    let frac = pi - BigUint::from(3u32) * &scale;
    let s = frac.to_str_radix(16);
    let width = (bits / 4) as usize;
    let padded: String = "0".repeat(width - s.len()) + &s;
    padded[..count as usize]
        .bytes()
        .map(|ch| char::from(ch).to_digit(16).unwrap() as u8)
        .collect()
}

/// First `count` fractional decimal digits of e by the mixed-radix spigot:
/// e - 2 = [1, 1, 1, ...] in base (1/2!, 1/3!, ...); multiplying the tail
/// by 10 and extracting the integer part yields one decimal digit per pass.
pub fn e_spigot_decimal(count: u64) -> Vec<u8> {
    // Need m with m! > 10^(count + margin) so the truncated tail cannot
    // disturb the produced digits.
    let target = (count + 4) as f64;
    let mut m = 4usize;
    let mut log_fact = 0.0f64;
    while log_fact <= target {
        m += 1;
        log_fact += (m as f64).log10();
    }

    let mut a = vec![1u64; m + 1]; // a[2..=m] used
    let mut digits: Vec<i8> = Vec::with_capacity(count as usize + 2);
    for _ in 0..count + 2 {
        let mut carry = 0u64;
        for i in (2..=m).rev() {
            let x = 10 * a[i] + carry;
            a[i] = x % i as u64;
            carry = x / i as u64;
        }
        digits.push(carry as i8);
    }
    // A produced "digit" can be 10; normalize backward.
    for i in (1..digits.len()).rev() {
        if digits[i] >= 10 {
            digits[i] -= 10;
            digits[i - 1] += 1;
        }
    }
    digits[..count as usize].iter().map(|&d| d as u8).collect()
}
