//! Deterministic base-q digit sequences with provenance: parsed from digit
//! files or produced by exact integer generators, plus cross-verification
//! between independent sources.

mod baseline;
mod bbp;
mod egen;
mod file;
mod pigen;
mod sqrtgen;

pub use baseline::baseline_digits;
pub use bbp::{bbp_hex_digit, bbp_hex_digits, BBP_MAX_POSITION};
pub use egen::e_digits;
pub use file::{open_digit_file, FileFormat};
pub use pigen::{pi_digits, PI_SPIGOT_MAX_DIGITS};
pub use sqrtgen::sqrt_digits;

use std::path::PathBuf;

use crate::error::{Error, Result};

/// Where a digit stream comes from. Re-opening the same source always yields
/// the identical sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DigitSource {
    File {
        path: PathBuf,
        format: FileFormat,
        strict: bool,
    },
    Sqrt {
        radicand: u64,
        count: u64,
    },
    E {
        count: u64,
    },
    Pi {
        count: u64,
    },
    Baseline {
        seed: u64,
        count: u64,
    },
}

impl DigitSource {
    pub fn open(&self, base: u32) -> Result<DigitStream> {
        if !(2..=36).contains(&base) {
            return Err(Error::usage(format!("base must be in 2..=36, got {base}")));
        }
        match self {
            DigitSource::File {
                path,
                format,
                strict,
            } => open_digit_file(path, base, *format, *strict),
            DigitSource::Sqrt { radicand, count } => {
                require_decimal(base, "sqrt generator")?;
                Ok(DigitStream::from_digits(
                    10,
                    self.describe(),
                    sqrt_digits(*radicand, *count)?,
                ))
            }
            DigitSource::E { count } => {
                require_decimal(base, "e generator")?;
                Ok(DigitStream::from_digits(10, self.describe(), e_digits(*count)?))
            }
            DigitSource::Pi { count } => {
                require_decimal(base, "pi generator")?;
                Ok(DigitStream::from_digits(10, self.describe(), pi_digits(*count)?))
            }
            DigitSource::Baseline { seed, count } => {
                Ok(baseline_digits(*seed, *count, base)?)
            }
        }
    }

    /// Canonical one-line description, used in reports and checkpoints.
    pub fn describe(&self) -> String {
        match self {
            DigitSource::File {
                path,
                format,
                strict,
            } => format!(
                "file:{}:{}:{}",
                path.display(),
                format.name(),
                if *strict { "strict" } else { "lenient" }
            ),
            DigitSource::Sqrt { radicand, count } => format!("gen:sqrt:{radicand}:{count}"),
            DigitSource::E { count } => format!("gen:e:{count}"),
            DigitSource::Pi { count } => format!("gen:pi:{count}"),
            DigitSource::Baseline { seed, count } => format!("gen:baseline:{seed}:{count}"),
        }
    }
}

fn require_decimal(base: u32, what: &str) -> Result<()> {
    if base != 10 {
        return Err(Error::usage(format!("{what} produces decimal digits; requested base {base}")));
    }
    Ok(())
}

enum Inner {
    /// Fully materialized digits (generators compute exactly once, up front).
    Digits(Vec<u8>),
    File(file::FileDigits),
    Baseline(baseline::BaselineDigits),
}

/// A sequential, single-consumer stream of base-q digits.
pub struct DigitStream {
    base: u32,
    source: String,
    length_hint: Option<u64>,
    cursor: u64,
    inner: Inner,
}

impl DigitStream {
    fn from_digits(base: u32, source: String, digits: Vec<u8>) -> Self {
        let hint = digits.len() as u64;
        DigitStream {
            base,
            source,
            length_hint: Some(hint),
            cursor: 0,
            inner: Inner::Digits(digits),
        }
    }

    pub(crate) fn from_file(base: u32, source: String, file: file::FileDigits) -> Self {
        DigitStream {
            base,
            source,
            length_hint: None,
            cursor: 0,
            inner: Inner::File(file),
        }
    }

    pub(crate) fn from_baseline(base: u32, source: String, count: u64, gen: baseline::BaselineDigits) -> Self {
        DigitStream {
            base,
            source,
            length_hint: Some(count),
            cursor: 0,
            inner: Inner::Baseline(gen),
        }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn length_hint(&self) -> Option<u64> {
        self.length_hint
    }

    /// Number of digits already yielded.
    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    pub fn next_digit(&mut self) -> Option<Result<u8>> {
        let item = match &mut self.inner {
            Inner::Digits(v) => v.get(self.cursor as usize).copied().map(Ok),
            Inner::File(f) => f.next_digit(),
            Inner::Baseline(b) => {
                if Some(self.cursor) == self.length_hint {
                    None
                } else {
                    Some(Ok(b.next_digit()))
                }
            }
        };
        if let Some(Ok(d)) = item {
            debug_assert!((d as u32) < self.base, "digit {d} out of range for base {}", self.base);
            self.cursor += 1;
        }
        item
    }

    /// Consume and discard `n` digits (used when resuming from a checkpoint).
    pub fn skip_digits(&mut self, n: u64) -> Result<()> {
        for _ in 0..n {
            match self.next_digit() {
                Some(Ok(_)) => {}
                Some(Err(e)) => return Err(e),
                None => {
                    return Err(Error::usage(format!(
                        "source {} ended before skipping {n} digits",
                        self.source
                    )))
                }
            }
        }
        Ok(())
    }

    /// Count of lenient-mode bytes skipped with a warning (file sources).
    pub fn skipped_bytes(&self) -> u64 {
        match &self.inner {
            Inner::File(f) => f.skipped_bytes(),
            _ => 0,
        }
    }
}

impl Iterator for DigitStream {
    type Item = Result<u8>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_digit()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyStatus {
    Match,
    Mismatch,
    ShortInput,
}

/// Outcome of comparing two digit streams over a shared prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub digits_compared: u64,
    /// 1-based index of the first disagreeing digit.
    pub first_mismatch: Option<u64>,
    pub status: VerifyStatus,
}

/// Compare the first `count` digits of two streams of the same base.
pub fn verify_prefix(a: &mut DigitStream, b: &mut DigitStream, count: u64) -> Result<VerificationReport> {
    if a.base() != b.base() {
        return Err(Error::usage(format!(
            "base mismatch: {} vs {}",
            a.base(),
            b.base()
        )));
    }
    let mut compared = 0u64;
    for i in 1..=count {
        let (da, db) = match (a.next_digit(), b.next_digit()) {
            (Some(da), Some(db)) => (da?, db?),
            _ => {
                return Ok(VerificationReport {
                    digits_compared: compared,
                    first_mismatch: None,
                    status: VerifyStatus::ShortInput,
                })
            }
        };
        if da != db {
            return Ok(VerificationReport {
                digits_compared: i,
                first_mismatch: Some(i),
                status: VerifyStatus::Mismatch,
            });
        }
        compared = i;
    }
    Ok(VerificationReport {
        digits_compared: compared,
        first_mismatch: None,
        status: VerifyStatus::Match,
    })
}
