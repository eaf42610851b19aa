//! Seed-reproducible uniform digit stream: the probabilistic model the
//! deterministic constants are compared against.
//!
//! Digits come from ChaCha12 seeded via `seed_from_u64`, drawn through
//! `rand`'s `Uniform` integer distribution (Lemire-style rejection sampling,
//! so each digit is exactly uniform on 0..q).

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

use super::DigitStream;

pub(crate) struct BaselineDigits {
    rng: ChaCha12Rng,
    dist: Uniform<u32>,
}

impl BaselineDigits {
    pub(crate) fn next_digit(&mut self) -> u8 {
        self.dist.sample(&mut self.rng) as u8
    }
}

pub fn baseline_digits(seed: u64, count: u64, base: u32) -> Result<DigitStream> {
    if !(2..=36).contains(&base) {
        return Err(Error::usage(format!("base must be in 2..=36, got {base}")));
    }
    let gen = BaselineDigits {
        rng: ChaCha12Rng::seed_from_u64(seed),
        dist: Uniform::new(0, base),
    };
    let source = format!("gen:baseline:{seed}:{count}");
    Ok(DigitStream::from_baseline(base, source, count, gen))
}
