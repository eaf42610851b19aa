//! Streaming statistics over base-q digit expansions of mathematical
//! constants: prefix-sum deviation scans against the normal model,
//! iterated-logarithm normalization, Borel sliding-pattern normality
//! counts, and exact integer digit generation with cross-verification.

pub mod bigmath;
pub mod cltscan;
pub mod digitstream;
pub mod error;
pub mod harness;
pub mod lilscan;
pub mod moments;
pub mod normality;
