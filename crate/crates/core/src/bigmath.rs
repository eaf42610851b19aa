//! Exact big-integer helpers sized for multi-million-digit work.
//!
//! `num-bigint` multiplies sub-quadratically (Karatsuba/Toom-3) but divides
//! with the schoolbook algorithm, which is far too slow once quotients reach
//! millions of digits. Division and square root here go through a fixed-point
//! Newton reciprocal built only from multiplications, followed by an exact
//! remainder correction, so every result is a true floor.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};

const RECIP_GUARD: u64 = 32;

/// Schoolbook division is fine (often faster) below this quotient size.
const SMALL_DIV_BITS: u64 = 8192;

/// Reciprocal of `d` scaled so the result is approximately `2^(d.bits() + t) / d`,
/// accurate to within a few units in the last place.
fn recip(d: &BigUint, t: u64) -> BigUint {
    debug_assert!(!d.is_zero());
    let b = d.bits();
    let m = t + RECIP_GUARD;
    if b > m {
        // The reciprocal at precision t only depends on the leading bits.
        recip_trunc(&(d >> (b - m)), t)
    } else {
        recip_trunc(d, t)
    }
}

/// Same contract as `recip`, assuming `d` is already truncated to ~t bits.
fn recip_trunc(d: &BigUint, t: u64) -> BigUint {
    let b = d.bits();
    if b + t <= 126 {
        return (BigUint::one() << (b + t)) / d;
    }
    // One Newton step lifts a half-precision reciprocal to full precision:
    // with Y ~ 1/d, the refinement is Y(2 - d*Y), evaluated in fixed point.
    let th = t / 2 + 4;
    let y = recip(d, th); // y ~ 2^(b + th) / d
    let dy2 = d * (&y * &y);
    (y << (t - th + 1)) - (dy2 >> (b + 2 * th - t))
}

/// Cheap under-estimate of floor(a / d); never zero, never over the true value.
fn quot_estimate(a: &BigUint, d: &BigUint) -> BigUint {
    let s = d.bits().saturating_sub(63);
    let d_top = (d >> s).to_u64().expect("divisor top fits 64 bits");
    // d_top + 1 over-estimates the shifted divisor, so the ratio rounds down.
    let est = (a >> s) / (d_top + 1);
    if est.is_zero() {
        BigUint::one()
    } else {
        est
    }
}

/// A cached scaled reciprocal, reusable across divisions by the same divisor.
pub struct Reciprocal {
    x: BigUint,
    t: u64,
}

impl Reciprocal {
    /// Prepare a reciprocal of `d` good for quotients up to `max_qbits` bits.
    pub fn new(d: &BigUint, max_qbits: u64) -> Self {
        let t = max_qbits + 2;
        Reciprocal { x: recip(d, t), t }
    }
}

/// Exact floor division with remainder, sub-quadratic for large quotients.
pub fn div_rem_floor(n: &BigUint, d: &BigUint) -> (BigUint, BigUint) {
    assert!(!d.is_zero(), "division by zero");
    if n < d {
        return (BigUint::zero(), n.clone());
    }
    let qbits = n.bits() - d.bits() + 1;
    if qbits <= SMALL_DIV_BITS || d.bits() <= SMALL_DIV_BITS {
        return num_integer::Integer::div_rem(n, d);
    }
    let rec = Reciprocal::new(d, qbits);
    div_rem_with(n, d, &rec)
}

/// Floor division using a precomputed reciprocal for `d`.
pub fn div_rem_with(n: &BigUint, d: &BigUint, rec: &Reciprocal) -> (BigUint, BigUint) {
    if n < d {
        return (BigUint::zero(), n.clone());
    }
    let qbits = n.bits() - d.bits() + 1;
    if qbits <= SMALL_DIV_BITS || d.bits() <= SMALL_DIV_BITS {
        return num_integer::Integer::div_rem(n, d);
    }
    let t = qbits + 2;
    assert!(t <= rec.t, "cached reciprocal too short for this quotient");
    let x = &rec.x >> (rec.t - t);
    let mut q = (n * &x) >> (d.bits() + t);
    let mut r = BigInt::from(n.clone()) - BigInt::from(&q * d);
    // The approximate quotient is off by at most a few ulps; converge exactly.
    loop {
        if r.sign() == Sign::Minus {
            let adj = quot_estimate(r.magnitude(), d);
            r += BigInt::from(&adj * d);
            q -= adj;
        } else if r.magnitude() >= d {
            let adj = quot_estimate(r.magnitude(), d);
            r -= BigInt::from(&adj * d);
            q += adj;
        } else {
            break;
        }
    }
    (q, r.to_biguint().expect("remainder is nonnegative"))
}

pub fn div_floor(n: &BigUint, d: &BigUint) -> BigUint {
    div_rem_floor(n, d).0
}

/// Exact floor(sqrt(n)), precision-doubling (each step uses one division at
/// the current precision, so the final division dominates the cost).
pub fn isqrt(n: &BigUint) -> BigUint {
    if n.bits() <= 2048 {
        return num_integer::Roots::sqrt(n);
    }
    let c = (n.bits() - 1) / 2;
    let cb = 64 - c.leading_zeros() as u64;
    let mut a = BigUint::one();
    let mut d: u64 = 0;
    for s in (0..cb).rev() {
        let e = d;
        d = c >> s;
        let (q, _) = div_rem_floor(&(n >> (2 * c - e - d + 1)), &a);
        a = (a << (d - e - 1)) + q;
    }
    // Invariant after the loop: (a-1)^2 <= n < (a+1)^2. One full squaring,
    // then unit steps on the remainder ((a+1)^2 - a^2 = 2a+1).
    let mut r = BigInt::from(n.clone()) - BigInt::from(&a * &a);
    while r.sign() == Sign::Minus {
        let step = (&a << 1u32) - 1u32;
        r += BigInt::from(step);
        a -= 1u32;
    }
    loop {
        let step = BigInt::from((&a << 1u32) + 1u32);
        if r >= step {
            r -= step;
            a += 1u32;
        } else {
            break;
        }
    }
    a
}

pub fn pow10(k: u64) -> BigUint {
    BigUint::from(10u32).pow(u32::try_from(k).expect("exponent fits u32"))
}

/// Memoizing converter from big integers to fixed-width decimal strings.
/// Splits recursively around powers of ten, reusing the per-level divisors
/// and their reciprocals, so conversion stays close to multiplication cost.
pub struct DecimalSplitter {
    powers: HashMap<u64, BigUint>,
    recips: HashMap<u64, Reciprocal>,
}

impl DecimalSplitter {
    pub fn new() -> Self {
        DecimalSplitter {
            powers: HashMap::new(),
            recips: HashMap::new(),
        }
    }

    fn power(&mut self, k: u64) -> BigUint {
        if let Some(p) = self.powers.get(&k) {
            return p.clone();
        }
        let p = if k <= 4096 {
            pow10(k)
        } else {
            let h = k / 2;
            self.power(h) * self.power(k - h)
        };
        self.powers.insert(k, p.clone());
        p
    }

    /// Decimal digits of `x`, left-padded with zeros to exactly `width`.
    pub fn to_decimal_padded(&mut self, x: &BigUint, width: u64) -> String {
        assert!(
            x < &self.power(width),
            "value does not fit in {width} decimal digits"
        );
        let mut out = String::with_capacity(width as usize);
        self.emit(x, width, &mut out);
        out
    }

    fn emit(&mut self, x: &BigUint, width: u64, out: &mut String) {
        if width <= 4096 {
            let s = x.to_string();
            for _ in s.len() as u64..width {
                out.push('0');
            }
            out.push_str(&s);
            return;
        }
        let low = width / 2;
        let p = self.power(low);
        // Sibling nodes at the same depth divide by the same power; one
        // reciprocal per power covers them all.
        if !self.recips.contains_key(&low) {
            // Quotient width is width - low <= low + 1 digits.
            let max_qbits = (((low + 2) as f64) / std::f64::consts::LOG10_2) as u64 + 8;
            self.recips.insert(low, Reciprocal::new(&p, max_qbits));
        }
        let rec = &self.recips[&low];
        let (q, r) = div_rem_with(x, &p, rec);
        self.emit(&q, width - low, out);
        self.emit(&r, low, out);
    }
}

impl Default for DecimalSplitter {
    fn default() -> Self {
        Self::new()
    }
}

/// Number of decimal digits of `x` (1 for zero).
pub fn decimal_len(x: &BigUint) -> u64 {
    if x.is_zero() {
        return 1;
    }
    // bits * log10(2), then fix up around the boundary with exact compares.
    let mut est = ((x.bits() as f64) * std::f64::consts::LOG10_2) as u64;
    est = est.max(1);
    while pow10(est) <= *x {
        est += 1;
    }
    while est > 1 && pow10(est - 1) > *x {
        est -= 1;
    }
    est
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::RandBigInt;
    use rand::SeedableRng;

    #[test]
    fn div_rem_matches_schoolbook_small() {
        let n = BigUint::from(123456789u64);
        let d = BigUint::from(1001u64);
        let (q, r) = div_rem_floor(&n, &d);
        assert_eq!(q, &n / &d);
        assert_eq!(r, &n % &d);
    }

    #[test]
    fn div_rem_matches_schoolbook_large() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for &(nb, db) in &[(40_000u64, 12_000u64), (120_000, 20_000), (65_537, 9_001)] {
            let n = rng.gen_biguint(nb);
            let d = rng.gen_biguint(db) | BigUint::one() << (db - 1);
            let (q, r) = div_rem_floor(&n, &d);
            let (q2, r2) = num_integer::Integer::div_rem(&n, &d);
            assert_eq!(q, q2);
            assert_eq!(r, r2);
        }
    }

    #[test]
    fn isqrt_exact_on_randoms() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for &bits in &[10u64, 100, 3000, 50_000, 200_001] {
            let n = rng.gen_biguint(bits) | BigUint::one() << (bits - 1);
            let s = isqrt(&n);
            assert!(&s * &s <= n);
            assert!((&s + 1u32) * (&s + 1u32) > n);
        }
    }

    #[test]
    fn isqrt_perfect_squares() {
        for k in [0u64, 1, 2, 9, 10, 81, 1 << 31] {
            let n = BigUint::from(k) * BigUint::from(k);
            assert_eq!(isqrt(&n), BigUint::from(k));
        }
        let big = pow10(5000);
        assert_eq!(isqrt(&(&big * &big)), big);
    }

    #[test]
    fn decimal_splitter_roundtrip() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        let mut splitter = DecimalSplitter::new();
        for &bits in &[1u64, 64, 1000, 40_000] {
            let x = rng.gen_biguint(bits);
            let width = decimal_len(&x) + 7;
            let s = splitter.to_decimal_padded(&x, width);
            assert_eq!(s.len() as u64, width);
            let trimmed = s.trim_start_matches('0');
            if x.is_zero() {
                assert!(trimmed.is_empty());
            } else {
                assert_eq!(trimmed, x.to_string());
            }
        }
    }

    #[test]
    fn decimal_len_boundaries() {
        assert_eq!(decimal_len(&BigUint::zero()), 1);
        assert_eq!(decimal_len(&BigUint::from(9u32)), 1);
        assert_eq!(decimal_len(&BigUint::from(10u32)), 2);
        assert_eq!(decimal_len(&pow10(100)), 101);
        assert_eq!(decimal_len(&(pow10(100) - 1u32)), 100);
    }
}
