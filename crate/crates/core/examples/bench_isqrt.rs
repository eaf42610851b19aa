use digitstat_core::bigmath::{decimal_len, isqrt, pow10, DecimalSplitter};
use num_bigint::BigUint;
use std::time::Instant;

fn main() {
    let count: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1_000_000);
    let t0 = Instant::now();
    let n = BigUint::from(2u32) * pow10(2 * count);
    println!("pow10: {:?}", t0.elapsed());
    let t1 = Instant::now();
    let s = isqrt(&n);
    println!("isqrt: {:?}", t1.elapsed());
    let t2 = Instant::now();
    let width = decimal_len(&s);
    let mut splitter = DecimalSplitter::new();
    let dec = splitter.to_decimal_padded(&s, width);
    println!("to_decimal: {:?} len={} prefix={}", t2.elapsed(), dec.len(), &dec[..20]);
}
