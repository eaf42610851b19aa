//! Per-digit moments of the uniform base-q digit model, the Berry-Esseen
//! convergence bound, and the standard normal reference functions.

use crate::error::{Error, Result};

/// Best known constant in the Berry-Esseen inequality (Shevtsova, 2011).
pub const BERRY_ESSEEN_CONSTANT: f64 = 0.4748;

/// Moments of a single uniformly distributed base-q digit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub q: u32,
    /// Expected digit value, (q-1)/2.
    pub mu: f64,
    /// Digit variance, (q^2-1)/12.
    pub sigma2: f64,
    pub sigma: f64,
    /// Third absolute central moment, (1/q) * sum |j - mu|^3.
    pub alpha3: f64,
}

pub fn digit_moments(q: u32) -> Result<MomentSet> {
    if q < 2 {
        return Err(Error::usage(format!("base must be >= 2, got {q}")));
    }
    let qf = q as f64;
    let mu = (qf - 1.0) / 2.0;
    let sigma2 = (qf * qf - 1.0) / 12.0;
    // Direct summation, valid for every q (the closed form q(q^2-2)/32 holds
    // only for even q). With j - mu = (2j - q + 1)/2 the sum is integral.
    let mut sum: u128 = 0;
    for j in 0..q as i64 {
        let twice = (2 * j - q as i64 + 1).unsigned_abs() as u128;
        sum += twice * twice * twice;
    }
    let alpha3 = sum as f64 / (8.0 * qf);
    Ok(MomentSet {
        q,
        mu,
        sigma2,
        sigma: sigma2.sqrt(),
        alpha3,
    })
}

/// Uniform bound on |F_n(x) - Phi(x)|: 0.4748 * alpha3 / (sigma^3 * sqrt(n)).
pub fn berry_esseen_bound(q: u32, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::usage("prefix length must be >= 1"));
    }
    let m = digit_moments(q)?;
    Ok(BERRY_ESSEEN_CONSTANT * m.alpha3 / (m.sigma.powi(3) * (n as f64).sqrt()))
}

/// Standard normal CDF. Evaluated through the complementary error function
/// (libm's musl port, a rational approximation accurate to ~1 ulp, far inside
/// the 1e-9 absolute target).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density (1/sqrt(2 pi)) e^(-x^2/2).
pub fn normal_pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.3989422804014326779399460599343818684;
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Expected variance of digit frequencies under the uniform model: p(1-p)/n
/// with p = 1/q.
pub fn expected_freq_variance(n: u64, q: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::usage("prefix length must be >= 1"));
    }
    if q < 2 {
        return Err(Error::usage(format!("base must be >= 2, got {q}")));
    }
    let p = 1.0 / q as f64;
    Ok(p * (1.0 - p) / n as f64)
}
