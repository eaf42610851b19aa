//! Full-run orchestration: configuration, the single-pass streaming
//! analysis, checkpoint/resume persistence, an optional chunk-parallel
//! pipeline, and CSV/summary emission.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::cltscan::{deviation_at, FrequencyTable, HistogramAccumulator, ScanState};
use crate::digitstream::DigitSource;
use crate::error::{Error, Result};
use crate::lilscan::{
    lil_delta, suffix_extrema, tail_fraction, BucketState, EnvelopeAccumulator, LilPoint,
    LIL_MIN_N,
};
use crate::moments::{
    berry_esseen_bound, digit_moments, expected_freq_variance, MomentSet,
};
use crate::normality::PatternCounter;

pub use crate::digitstream::baseline_digits;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_BLOCK_SIZE: u64 = 100_000_000;
pub const DEFAULT_POINTS_PER_BLOCK: u64 = 1000;
pub const DEFAULT_CHECKPOINT_INTERVAL: u64 = 10_000_000;

/// Environment variable supplying the default output directory.
/// Precedence: explicit flag > this variable > current directory.
pub const OUT_DIR_ENV: &str = "DIGITSTAT_OUT";

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: DigitSource,
    pub base: u32,
    pub max_digits: u64,
    /// Histogram bin width; must divide the [-3, 3] span evenly.
    pub step: f64,
    /// Initial prefix excluded from histogram accumulation.
    pub burn_in: u64,
    pub block_size: u64,
    pub points_per_block: u64,
    pub lil_cutoff: u64,
    /// Pattern lengths for the normality scans.
    pub pattern_lens: Vec<u32>,
    pub out_dir: PathBuf,
    pub checkpoint_path: Option<PathBuf>,
    /// Digits between periodic checkpoint saves.
    pub checkpoint_interval: u64,
    pub resume: bool,
    pub threads: u32,
}

impl RunConfig {
    pub fn new(source: DigitSource, max_digits: u64, out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            source,
            base: 10,
            max_digits,
            step: 0.1,
            burn_in: 0,
            block_size: DEFAULT_BLOCK_SIZE,
            points_per_block: DEFAULT_POINTS_PER_BLOCK,
            lil_cutoff: LIL_MIN_N,
            pattern_lens: vec![1, 2, 3],
            out_dir: out_dir.into(),
            checkpoint_path: None,
            checkpoint_interval: DEFAULT_CHECKPOINT_INTERVAL,
            resume: false,
            threads: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_digits < 1 {
            return Err(Error::usage("max_digits must be >= 1"));
        }
        if self.points_per_block < 1 || self.block_size < self.points_per_block {
            return Err(Error::usage(
                "need block_size >= points_per_block >= 1".to_string(),
            ));
        }
        if self.pattern_lens.is_empty() {
            return Err(Error::usage("at least one pattern length is required"));
        }
        if self.checkpoint_interval < 1 {
            return Err(Error::usage("checkpoint interval must be >= 1"));
        }
        if self.threads < 1 {
            return Err(Error::usage("threads must be >= 1"));
        }
        Ok(())
    }

    /// Digits per envelope bucket.
    pub fn bucket_width(&self) -> u64 {
        self.block_size.div_ceil(self.points_per_block)
    }

    /// SHA-256 over everything that affects the analyzed numbers. Output
    /// paths and scheduling knobs are deliberately excluded: a checkpoint
    /// remains valid if only those change.
    pub fn fingerprint(&self) -> String {
        let mut canon = String::new();
        write!(
            canon,
            "v{CHECKPOINT_FORMAT_VERSION}|source={}|base={}|digits={}|step_pm={}|burn_in={}\
             |block={}|ppb={}|cutoff={}|k=",
            self.source.describe(),
            self.base,
            self.max_digits,
            (self.step * 1000.0).round() as u32,
            self.burn_in,
            self.block_size,
            self.points_per_block,
            self.lil_cutoff,
        )
        .unwrap();
        for (i, k) in self.pattern_lens.iter().enumerate() {
            if i > 0 {
                canon.push(',');
            }
            write!(canon, "{k}").unwrap();
        }
        let digest = Sha256::digest(canon.as_bytes());
        let mut hex = String::with_capacity(64);
        for b in digest {
            write!(hex, "{b:02x}").unwrap();
        }
        hex
    }
}

/// Everything accumulated during one pass. All fields are exact integers or
/// derived deterministically from them.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisState {
    scan: ScanState,
    hist: HistogramAccumulator,
    freq: FrequencyTable,
    patterns: Vec<PatternCounter>,
    envelope: EnvelopeAccumulator,
    moments: MomentSet,
    burn_in: u64,
}

impl AnalysisState {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let moments = digit_moments(config.base)?;
        let patterns = config
            .pattern_lens
            .iter()
            .map(|&k| PatternCounter::new(config.base, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(AnalysisState {
            scan: ScanState::new(config.base),
            hist: HistogramAccumulator::new(config.step)?,
            freq: FrequencyTable::new(config.base),
            patterns,
            envelope: EnvelopeAccumulator::new(
                moments,
                config.bucket_width(),
                config.lil_cutoff,
            )?,
            moments,
            burn_in: config.burn_in,
        })
    }

    /// A chunk-local state that continues from digit position `n0` with
    /// prefix sum `s0`. `carry` holds the digits immediately preceding the
    /// chunk (at least max(k)-1 of them) so pattern windows straddling the
    /// boundary are counted.
    pub fn chunk(config: &RunConfig, n0: u64, s0: u128, carry: &[u8]) -> Result<Self> {
        let mut st = AnalysisState::new(config)?;
        st.scan = ScanState::with_prefix(config.base, n0, s0);
        st.patterns = config
            .pattern_lens
            .iter()
            .map(|&k| PatternCounter::with_seed_window(config.base, k, carry))
            .collect::<Result<Vec<_>>>()?;
        Ok(st)
    }

    pub fn n(&self) -> u64 {
        self.scan.n
    }

    pub fn s(&self) -> u128 {
        self.scan.s
    }

    pub fn scan(&self) -> &ScanState {
        &self.scan
    }

    pub fn histogram(&self) -> &HistogramAccumulator {
        &self.hist
    }

    pub fn frequency(&self) -> &FrequencyTable {
        &self.freq
    }

    pub fn patterns(&self) -> &[PatternCounter] {
        &self.patterns
    }

    pub fn envelope(&self) -> &EnvelopeAccumulator {
        &self.envelope
    }

    pub fn update(&mut self, digit: u8) -> Result<()> {
        self.scan.update(digit)?;
        self.freq.update(digit)?;
        for p in &mut self.patterns {
            p.push(digit)?;
        }
        if self.scan.n > self.burn_in {
            let d = deviation_at(self.scan.n, self.scan.s, &self.moments);
            self.hist.accumulate(d)?;
        }
        self.envelope.push(self.scan.n, self.scan.s);
        Ok(())
    }

    /// Merge a chunk state that covers the digits immediately after this
    /// one. The other state must have been created with `chunk` seeded from
    /// this state's (n, S) and trailing digits.
    pub fn merge(&mut self, other: &AnalysisState) -> Result<()> {
        if other.scan.q != self.scan.q {
            return Err(Error::usage("base mismatch in analysis merge"));
        }
        self.scan = other.scan;
        self.hist.merge(&other.hist)?;
        self.freq.merge(&other.freq)?;
        for (a, b) in self.patterns.iter_mut().zip(&other.patterns) {
            a.merge(b)?;
        }
        self.envelope.merge(&other.envelope)?;
        Ok(())
    }
}

fn join_u64(values: impl IntoIterator<Item = u64>) -> String {
    let mut s = String::new();
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        write!(s, "{v}").unwrap();
    }
    s
}

fn parse_fields<'a>(
    line: Option<&'a str>,
    key: &str,
    path: &Path,
) -> Result<Vec<&'a str>> {
    let line = line.ok_or_else(|| Error::Checkpoint(format!(
        "{}: truncated checkpoint, missing '{key}'",
        path.display()
    )))?;
    let mut parts = line.split(' ');
    let head = parts.next().unwrap_or("");
    if head != key {
        return Err(Error::Checkpoint(format!(
            "{}: expected '{key}', found '{head}'",
            path.display()
        )));
    }
    Ok(parts.collect())
}

fn parse_num<T: std::str::FromStr>(field: &str, what: &str, path: &Path) -> Result<T> {
    field.parse().map_err(|_| {
        Error::Checkpoint(format!("{}: bad {what} value '{field}'", path.display()))
    })
}

fn parse_u64_list(field: &str, what: &str, path: &Path) -> Result<Vec<u64>> {
    if field.is_empty() {
        return Ok(Vec::new());
    }
    field
        .split(',')
        .map(|v| parse_num(v, what, path))
        .collect()
}

/// Persist the full analysis state. Integers are written as decimal
/// strings; no floating-point value is stored, so a resumed run recomputes
/// every float from the same integers and stays bit-identical. The file is
/// written to a temporary sibling and renamed, so an interrupted save never
/// clobbers the previous checkpoint.
pub fn checkpoint_save(state: &AnalysisState, config: &RunConfig, path: &Path) -> Result<()> {
    let mut body = String::new();
    writeln!(body, "digitstat-checkpoint {CHECKPOINT_FORMAT_VERSION}").unwrap();
    writeln!(body, "fingerprint {}", config.fingerprint()).unwrap();
    writeln!(body, "scan {} {} {}", state.scan.q, state.scan.n, state.scan.s).unwrap();
    writeln!(
        body,
        "hist {} {} {} {} {}",
        state.hist.step_per_mille(),
        state.hist.underflow,
        state.hist.overflow,
        state.hist.total,
        join_u64(state.hist.bins().iter().copied()),
    )
    .unwrap();
    writeln!(
        body,
        "freq {} {}",
        state.freq.n,
        join_u64(state.freq.counts.iter().copied())
    )
    .unwrap();
    writeln!(body, "patterns {}", state.patterns.len()).unwrap();
    for p in &state.patterns {
        let (windows, digits, window, filled) = p.raw_state();
        writeln!(
            body,
            "pattern {} {windows} {digits} {window} {filled} {}",
            p.pattern_len(),
            join_u64(p.counts().iter().copied()),
        )
        .unwrap();
    }
    let env = &state.envelope;
    writeln!(
        body,
        "envelope {} {} {} {}",
        env.bucket_width(),
        state.burn_in,
        env.closed_buckets().len(),
        if env.open_bucket().is_some() { 1 } else { 0 },
    )
    .unwrap();
    let open = env.open_bucket().into_iter();
    for b in env.closed_buckets().iter().chain(open) {
        writeln!(
            body,
            "bucket {} {} {} {} {} {}",
            b.n_min, b.s_min, b.n_max, b.s_max, b.n_end, b.s_end
        )
        .unwrap();
    }
    writeln!(body, "end").unwrap();

    let tmp = path.with_extension("tmp");
    fs::write(&tmp, body).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Load a checkpoint, rejecting version or fingerprint mismatches and any
/// corruption rather than silently restarting.
pub fn checkpoint_load(path: &Path, config: &RunConfig) -> Result<AnalysisState> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();

    let fields = parse_fields(lines.next(), "digitstat-checkpoint", path)?;
    let version: u32 = parse_num(fields.first().copied().unwrap_or(""), "version", path)?;
    if version != CHECKPOINT_FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "{}: format version {version}, expected {CHECKPOINT_FORMAT_VERSION}",
            path.display()
        )));
    }
    let fields = parse_fields(lines.next(), "fingerprint", path)?;
    let fp = fields.first().copied().unwrap_or("");
    if fp != config.fingerprint() {
        return Err(Error::Checkpoint(format!(
            "{}: config fingerprint mismatch; refusing to resume",
            path.display()
        )));
    }

    let fields = parse_fields(lines.next(), "scan", path)?;
    if fields.len() != 3 {
        return Err(Error::Checkpoint(format!(
            "{}: malformed scan line",
            path.display()
        )));
    }
    let q: u32 = parse_num(fields[0], "base", path)?;
    let n: u64 = parse_num(fields[1], "n", path)?;
    let s: u128 = parse_num(fields[2], "S", path)?;

    let fields = parse_fields(lines.next(), "hist", path)?;
    if fields.len() != 5 {
        return Err(Error::Checkpoint(format!(
            "{}: malformed hist line",
            path.display()
        )));
    }
    let step_per_mille: u32 = parse_num(fields[0], "hist step", path)?;
    let underflow: u64 = parse_num(fields[1], "underflow", path)?;
    let overflow: u64 = parse_num(fields[2], "overflow", path)?;
    let total: u64 = parse_num(fields[3], "total", path)?;
    let bins = parse_u64_list(fields[4], "hist bin", path)?;
    if step_per_mille == 0 || bins.len() as u32 != 6000 / step_per_mille {
        return Err(Error::Checkpoint(format!(
            "{}: hist bin count inconsistent with step",
            path.display()
        )));
    }
    let hist = HistogramAccumulator::restore(step_per_mille, bins, underflow, overflow, total);
    if !hist.is_conserved() {
        return Err(Error::Checkpoint(format!(
            "{}: histogram counts do not sum to total",
            path.display()
        )));
    }

    let fields = parse_fields(lines.next(), "freq", path)?;
    if fields.len() != 2 {
        return Err(Error::Checkpoint(format!(
            "{}: malformed freq line",
            path.display()
        )));
    }
    let freq_n: u64 = parse_num(fields[0], "freq n", path)?;
    let freq_counts = parse_u64_list(fields[1], "freq count", path)?;
    if freq_counts.len() != q as usize || freq_counts.iter().sum::<u64>() != freq_n {
        return Err(Error::Checkpoint(format!(
            "{}: frequency counts inconsistent",
            path.display()
        )));
    }
    let freq = FrequencyTable {
        q,
        counts: freq_counts,
        n: freq_n,
    };

    let fields = parse_fields(lines.next(), "patterns", path)?;
    let npat: usize = parse_num(fields.first().copied().unwrap_or(""), "pattern count", path)?;
    if npat != config.pattern_lens.len() {
        return Err(Error::Checkpoint(format!(
            "{}: pattern counter count mismatch",
            path.display()
        )));
    }
    let mut patterns = Vec::with_capacity(npat);
    for &want_k in &config.pattern_lens {
        let fields = parse_fields(lines.next(), "pattern", path)?;
        if fields.len() != 6 {
            return Err(Error::Checkpoint(format!(
                "{}: malformed pattern line",
                path.display()
            )));
        }
        let k: u32 = parse_num(fields[0], "k", path)?;
        if k != want_k {
            return Err(Error::Checkpoint(format!(
                "{}: pattern length order mismatch",
                path.display()
            )));
        }
        let windows: u64 = parse_num(fields[1], "windows", path)?;
        let digits: u64 = parse_num(fields[2], "digits", path)?;
        let window: u64 = parse_num(fields[3], "window", path)?;
        let filled: u32 = parse_num(fields[4], "filled", path)?;
        let counts = parse_u64_list(fields[5], "pattern count", path)?;
        if counts.len() as u64 != (q as u64).pow(k) || counts.iter().sum::<u64>() != windows {
            return Err(Error::Checkpoint(format!(
                "{}: pattern counts inconsistent for k={k}",
                path.display()
            )));
        }
        patterns.push(PatternCounter::restore(q, k, counts, windows, digits, window, filled));
    }

    let fields = parse_fields(lines.next(), "envelope", path)?;
    if fields.len() != 4 {
        return Err(Error::Checkpoint(format!(
            "{}: malformed envelope line",
            path.display()
        )));
    }
    let bucket_width: u64 = parse_num(fields[0], "bucket width", path)?;
    let burn_in: u64 = parse_num(fields[1], "burn-in", path)?;
    let nclosed: usize = parse_num(fields[2], "closed bucket count", path)?;
    let has_open: u32 = parse_num(fields[3], "open flag", path)?;
    let mut buckets = Vec::with_capacity(nclosed + has_open as usize);
    for _ in 0..nclosed + has_open as usize {
        let fields = parse_fields(lines.next(), "bucket", path)?;
        if fields.len() != 6 {
            return Err(Error::Checkpoint(format!(
                "{}: malformed bucket line",
                path.display()
            )));
        }
        buckets.push(BucketState {
            n_min: parse_num(fields[0], "n_min", path)?,
            s_min: parse_num(fields[1], "s_min", path)?,
            n_max: parse_num(fields[2], "n_max", path)?,
            s_max: parse_num(fields[3], "s_max", path)?,
            n_end: parse_num(fields[4], "n_end", path)?,
            s_end: parse_num(fields[5], "s_end", path)?,
        });
    }
    let open = if has_open == 1 { buckets.pop() } else { None };
    parse_fields(lines.next(), "end", path)?;

    let moments = digit_moments(q)?;
    let envelope = EnvelopeAccumulator::restore(
        moments,
        bucket_width,
        config.lil_cutoff.max(LIL_MIN_N),
        buckets,
        open,
    );

    Ok(AnalysisState {
        scan: ScanState::with_prefix(q, n, s),
        hist,
        freq,
        patterns,
        envelope,
        moments,
        burn_in,
    })
}

/// Per-k chi-square result carried into the summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareSummary {
    pub k: u32,
    pub statistic: f64,
    pub dof: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub n: u64,
    pub s: u128,
    pub d: f64,
    /// None when the run ended below the LIL cutoff.
    pub delta: Option<f64>,
    pub berry_esseen: f64,
    pub freq_variance: f64,
    pub expected_variance: f64,
    /// Only the k values with enough windows for a valid chi-square.
    pub chi_square: Vec<ChiSquareSummary>,
    pub delta_min: Option<f64>,
    pub delta_max: Option<f64>,
    pub out_files: Vec<PathBuf>,
}

fn csv_writer(path: &Path) -> Result<BufWriter<fs::File>> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(BufWriter::new(f))
}

fn finish_file(mut w: BufWriter<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn emit_density(path: &Path, hist: &HistogramAccumulator) -> Result<()> {
    let mut w = csv_writer(path)?;
    writeln!(w, "x_right,count,frac,density,phi_ref").map_err(|e| Error::io(path, e))?;
    for r in hist.density_rows()? {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.x_right, r.count, r.frac, r.density, r.phi_ref
        )
        .map_err(|e| Error::io(path, e))?;
    }
    finish_file(w, path)
}

fn emit_cumulative(path: &Path, hist: &HistogramAccumulator) -> Result<()> {
    let mut w = csv_writer(path)?;
    writeln!(w, "x,cum_frac,Phi_ref").map_err(|e| Error::io(path, e))?;
    for r in hist.cumulative_rows()? {
        writeln!(w, "{},{},{}", r.x, r.cum_frac, r.phi_cap_ref)
            .map_err(|e| Error::io(path, e))?;
    }
    finish_file(w, path)
}

fn emit_frequency(path: &Path, freq: &FrequencyTable) -> Result<()> {
    let mut w = csv_writer(path)?;
    writeln!(w, "digit,count,freq").map_err(|e| Error::io(path, e))?;
    for (digit, &count) in freq.counts.iter().enumerate() {
        let f = if freq.n == 0 {
            0.0
        } else {
            count as f64 / freq.n as f64
        };
        writeln!(w, "{digit},{count},{f}").map_err(|e| Error::io(path, e))?;
    }
    finish_file(w, path)
}

fn emit_lil(path: &Path, points: &[LilPoint]) -> Result<()> {
    let mut w = csv_writer(path)?;
    writeln!(w, "n,delta").map_err(|e| Error::io(path, e))?;
    for p in points {
        writeln!(w, "{},{}", p.n, p.delta).map_err(|e| Error::io(path, e))?;
    }
    finish_file(w, path)
}

fn emit_extrema(path: &Path, points: &[LilPoint]) -> Result<()> {
    let mut w = csv_writer(path)?;
    writeln!(w, "n,suffix_min,suffix_max").map_err(|e| Error::io(path, e))?;
    if !points.is_empty() {
        let series: Vec<(u64, f64)> = points.iter().map(|p| (p.n, p.delta)).collect();
        let e = suffix_extrema(&series)?;
        for i in 0..e.indices.len() {
            writeln!(w, "{},{},{}", e.indices[i], e.suffix_min[i], e.suffix_max[i])
                .map_err(|e| Error::io(path, e))?;
        }
    }
    finish_file(w, path)
}

fn emit_normality(path: &Path, counter: &PatternCounter) -> Result<()> {
    let mut w = csv_writer(path)?;
    writeln!(w, "pattern,count,freq,expected,z").map_err(|e| Error::io(path, e))?;
    let windows = counter.window_count();
    let p = (counter.base() as f64).powi(-(counter.pattern_len() as i32));
    let expected = windows as f64 * p;
    for (code, &count) in counter.counts().iter().enumerate() {
        let code = code as u64;
        writeln!(
            w,
            "{},{},{},{},{}",
            counter.pattern_string(code),
            count,
            counter.freq(code)?,
            expected,
            counter.z_score(code)?,
        )
        .map_err(|e| Error::io(path, e))?;
    }
    if let Ok((chi2, dof)) = counter.chi_square() {
        writeln!(w, "# chi_square={chi2} dof={dof}").map_err(|e| Error::io(path, e))?;
    }
    finish_file(w, path)
}

fn write_summary(
    path: &Path,
    config: &RunConfig,
    state: &AnalysisState,
    report: &RunReport,
    points: &[LilPoint],
) -> Result<()> {
    let mut w = csv_writer(path)?;
    let r = |e| Error::io(path, e);
    writeln!(w, "source: {}", config.source.describe()).map_err(r)?;
    writeln!(w, "base: {}", config.base).map_err(r)?;
    writeln!(w, "digits analyzed (n): {}", report.n).map_err(r)?;
    writeln!(w, "digit sum (S): {}", report.s).map_err(r)?;
    writeln!(w, "deviation d = (S - mu n)/(sigma sqrt(n)): {}", report.d).map_err(r)?;
    match report.delta {
        Some(delta) => writeln!(w, "LIL-normalized delta = d/sqrt(2 ln ln n): {delta}").map_err(r)?,
        None => writeln!(w, "LIL-normalized delta: undefined (n below cutoff)").map_err(r)?,
    }
    writeln!(w, "Berry-Esseen bound at n: {}", report.berry_esseen).map_err(r)?;
    writeln!(
        w,
        "digit frequency variance: observed {} expected {}",
        report.freq_variance, report.expected_variance
    )
    .map_err(r)?;
    for c in &report.chi_square {
        writeln!(
            w,
            "chi-square (k={}): {} with {} dof",
            c.k, c.statistic, c.dof
        )
        .map_err(r)?;
    }
    for p in &state.patterns {
        if p.chi_square().is_err() {
            writeln!(
                w,
                "chi-square (k={}): skipped, expected count per pattern below 1",
                p.pattern_len()
            )
            .map_err(r)?;
        }
    }
    writeln!(
        w,
        "histogram: {} in-range, {} underflow, {} overflow of {} samples",
        state.hist.total - state.hist.underflow - state.hist.overflow,
        state.hist.underflow,
        state.hist.overflow,
        state.hist.total
    )
    .map_err(r)?;

    if !points.is_empty() {
        writeln!(
            w,
            "delta range over sampled points: [{}, {}]",
            report.delta_min.unwrap(),
            report.delta_max.unwrap()
        )
        .map_err(r)?;
        let ds: Vec<f64> = points.iter().map(|p| p.d).collect();
        let in_band = tail_fraction(&ds, -1.48)? - tail_fraction(&ds, -0.36)?;
        writeln!(w, "fraction of sampled d in [-1.48, -0.36]: {in_band}").map_err(r)?;
        writeln!(w, "fraction of sampled d above 0: {}", tail_fraction(&ds, 0.0)?)
            .map_err(r)?;

        writeln!(w, "per-block delta extrema (block size {}):", config.block_size).map_err(r)?;
        let mut i = 0usize;
        while i < points.len() {
            let block = points[i].n / config.block_size;
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            let from = points[i].n;
            let mut to = from;
            while i < points.len() && points[i].n / config.block_size == block {
                min = min.min(points[i].delta);
                max = max.max(points[i].delta);
                to = points[i].n;
                i += 1;
            }
            writeln!(w, "  n in [{from}, {to}]: min {min} max {max}").map_err(r)?;
        }
    } else {
        writeln!(w, "no LIL sample points (run below cutoff)").map_err(r)?;
    }
    finish_file(w, path)
}

fn build_report(state: &AnalysisState, points: &[LilPoint], out_files: Vec<PathBuf>) -> Result<RunReport> {
    let n = state.scan.n;
    let d = state.scan.deviation(&state.moments)?;
    let delta = if n >= LIL_MIN_N {
        Some(lil_delta(d, n)?)
    } else {
        None
    };
    let chi_square = state
        .patterns
        .iter()
        .filter_map(|p| {
            p.chi_square().ok().map(|(statistic, dof)| ChiSquareSummary {
                k: p.pattern_len(),
                statistic,
                dof,
            })
        })
        .collect();
    let (delta_min, delta_max) = if points.is_empty() {
        (None, None)
    } else {
        (
            Some(points.iter().map(|p| p.delta).fold(f64::INFINITY, f64::min)),
            Some(points.iter().map(|p| p.delta).fold(f64::NEG_INFINITY, f64::max)),
        )
    };
    Ok(RunReport {
        n,
        s: state.scan.s,
        d,
        delta,
        berry_esseen: berry_esseen_bound(state.scan.q, n)?,
        freq_variance: state.freq.variance()?,
        expected_variance: expected_freq_variance(n, state.scan.q)?,
        chi_square,
        delta_min,
        delta_max,
        out_files,
    })
}

fn emit_all(config: &RunConfig, state: &AnalysisState) -> Result<RunReport> {
    fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    let points = state.envelope.points()?;
    let mut out_files = Vec::new();
    let mut out = |name: &str| {
        let p = config.out_dir.join(name);
        out_files.push(p.clone());
        p
    };

    emit_density(&out("density.csv"), &state.hist)?;
    emit_cumulative(&out("cumulative.csv"), &state.hist)?;
    emit_frequency(&out("frequency.csv"), &state.freq)?;
    emit_lil(&out("lil.csv"), &points)?;
    emit_extrema(&out("extrema.csv"), &points)?;
    for p in &state.patterns {
        emit_normality(&out(&format!("normality_k{}.csv", p.pattern_len())), p)?;
    }
    let summary_path = out("summary.txt");
    let report = build_report(state, &points, out_files)?;
    write_summary(&summary_path, config, state, &report, &points)?;
    Ok(report)
}

/// One full streaming run: consume digits, checkpoint periodically if
/// configured, then emit every CSV and the summary.
pub fn run_analysis(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    if config.threads > 1 {
        return run_analysis_chunked(config);
    }

    let mut stream = config.source.open(config.base)?;
    let mut state = match (&config.checkpoint_path, config.resume) {
        (Some(path), true) if path.exists() => {
            let st = checkpoint_load(path, config)?;
            stream.skip_digits(st.n())?;
            st
        }
        _ => AnalysisState::new(config)?,
    };

    while state.n() < config.max_digits {
        match stream.next_digit() {
            Some(Ok(d)) => {
                state.update(d)?;
                if let Some(path) = &config.checkpoint_path {
                    if state.n() % config.checkpoint_interval == 0 {
                        checkpoint_save(&state, config, path)?;
                    }
                }
            }
            Some(Err(e)) => return Err(e),
            None => break,
        }
    }
    if state.n() == 0 {
        return Err(Error::usage("source produced no digits"));
    }
    if let Some(path) = &config.checkpoint_path {
        checkpoint_save(&state, config, path)?;
    }
    emit_all(config, &state)
}

/// Two-phase chunk-parallel pipeline: the digits are materialized once, a
/// cheap sequential pass computes each chunk's starting (n, S), then the
/// detailed scans run in parallel and merge in order. Chunk boundaries are
/// aligned to envelope buckets so every merge is exact; the result is
/// bit-identical to the sequential path.
fn run_analysis_chunked(config: &RunConfig) -> Result<RunReport> {
    let mut stream = config.source.open(config.base)?;
    let mut digits: Vec<u8> = Vec::new();
    while (digits.len() as u64) < config.max_digits {
        match stream.next_digit() {
            Some(Ok(d)) => digits.push(d),
            Some(Err(e)) => return Err(e),
            None => break,
        }
    }
    if digits.is_empty() {
        return Err(Error::usage("source produced no digits"));
    }

    let threads = config.threads as usize;
    let width = config.bucket_width();
    // Chunk boundaries on bucket-width multiples.
    let raw = (digits.len() as u64).div_ceil(threads as u64);
    let chunk_len = raw.div_ceil(width) * width;
    let mut bounds = vec![0u64];
    while *bounds.last().unwrap() < digits.len() as u64 {
        bounds.push((bounds.last().unwrap() + chunk_len).min(digits.len() as u64));
    }

    // Phase 1: exact prefix sums at each boundary.
    let mut prefix = vec![0u128; bounds.len()];
    for i in 1..bounds.len() {
        let (a, b) = (bounds[i - 1] as usize, bounds[i] as usize);
        prefix[i] = prefix[i - 1] + digits[a..b].iter().map(|&d| d as u128).sum::<u128>();
    }

    // Phase 2: detailed scans in parallel.
    let max_k = *config.pattern_lens.iter().max().unwrap() as usize;
    let states = std::thread::scope(|scope| -> Result<Vec<AnalysisState>> {
        let mut handles = Vec::new();
        for i in 1..bounds.len() {
            let (a, b) = (bounds[i - 1] as usize, bounds[i] as usize);
            let carry_from = a.saturating_sub(max_k.saturating_sub(1));
            let carry = &digits[carry_from..a];
            let chunk = &digits[a..b];
            let n0 = bounds[i - 1];
            let s0 = prefix[i - 1];
            handles.push(scope.spawn(move || -> Result<AnalysisState> {
                let mut st = AnalysisState::chunk(config, n0, s0, carry)?;
                for &d in chunk {
                    st.update(d)?;
                }
                Ok(st)
            }));
        }
        let mut states = Vec::with_capacity(handles.len());
        for h in handles {
            states.push(h.join().expect("analysis thread panicked")?);
        }
        Ok(states)
    })?;

    let mut iter = states.into_iter();
    let mut state = iter.next().expect("at least one chunk");
    for st in iter {
        state.merge(&st)?;
    }
    if let Some(path) = &config.checkpoint_path {
        checkpoint_save(&state, config, path)?;
    }
    emit_all(config, &state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digitstream::FileFormat;

    fn temp_out() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    fn baseline_config(seed: u64, digits: u64, out: &Path) -> RunConfig {
        let mut c = RunConfig::new(
            DigitSource::Baseline { seed, count: digits },
            digits,
            out,
        );
        // Small blocks so short test runs still exercise bucket closing.
        c.block_size = 1000;
        c.points_per_block = 10;
        c
    }

    #[test]
    fn repeating_digits_are_perfectly_uniform() {
        let dir = temp_out();
        let path = dir.path().join("digits.txt");
        let digits: String = (0..10_000).map(|i| char::from(b'0' + (i % 10) as u8)).collect();
        fs::write(&path, digits).unwrap();
        let config = RunConfig::new(
            DigitSource::File {
                path: path.clone(),
                format: FileFormat::Ascii,
                strict: true,
            },
            10_000,
            dir.path().join("out"),
        );
        let report = run_analysis(&config).unwrap();
        assert_eq!(report.n, 10_000);
        assert_eq!(report.s, 45_000);
        assert_eq!(report.freq_variance, 0.0);
        let k1 = report.chi_square.iter().find(|c| c.k == 1).unwrap();
        assert_eq!(k1.statistic, 0.0);
        assert_eq!(k1.dof, 9);
        for name in [
            "density.csv",
            "cumulative.csv",
            "frequency.csv",
            "lil.csv",
            "extrema.csv",
            "normality_k1.csv",
            "normality_k2.csv",
            "normality_k3.csv",
            "summary.txt",
        ] {
            assert!(dir.path().join("out").join(name).exists(), "{name}");
        }
    }

    #[test]
    fn checkpoint_round_trip_is_lossless() {
        let dir = temp_out();
        let config = baseline_config(7, 5000, &dir.path().join("out"));
        let mut state = AnalysisState::new(&config).unwrap();
        let mut stream = config.source.open(config.base).unwrap();
        for _ in 0..3333 {
            state.update(stream.next_digit().unwrap().unwrap()).unwrap();
        }
        let ckpt = dir.path().join("state.ckpt");
        checkpoint_save(&state, &config, &ckpt).unwrap();
        let loaded = checkpoint_load(&ckpt, &config).unwrap();
        assert_eq!(loaded, state);
    }

    #[test]
    fn checkpoint_rejects_altered_config_and_corruption() {
        let dir = temp_out();
        let config = baseline_config(7, 5000, &dir.path().join("out"));
        let mut state = AnalysisState::new(&config).unwrap();
        let mut stream = config.source.open(config.base).unwrap();
        for _ in 0..100 {
            state.update(stream.next_digit().unwrap().unwrap()).unwrap();
        }
        let ckpt = dir.path().join("state.ckpt");
        checkpoint_save(&state, &config, &ckpt).unwrap();

        let mut other = config.clone();
        other.base = 8;
        other.source = DigitSource::Baseline { seed: 7, count: 5000 };
        assert!(matches!(
            checkpoint_load(&ckpt, &other),
            Err(Error::Checkpoint(_))
        ));

        let mut other = config.clone();
        other.burn_in = 99;
        assert!(checkpoint_load(&ckpt, &other).is_err());

        // Truncation is detected.
        let text = fs::read_to_string(&ckpt).unwrap();
        let cut: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
        fs::write(&ckpt, cut).unwrap();
        assert!(matches!(
            checkpoint_load(&ckpt, &config),
            Err(Error::Checkpoint(_))
        ));
    }

    #[test]
    fn resumed_run_matches_uninterrupted_run() {
        let dir = temp_out();

        let straight = {
            let c = baseline_config(42, 4000, &dir.path().join("straight"));
            run_analysis(&c).unwrap()
        };

        // Same run, interrupted every 1000 digits and resumed from disk.
        let out = dir.path().join("resumed");
        let ckpt = dir.path().join("resume.ckpt");
        let mut c = baseline_config(42, 4000, &out);
        c.checkpoint_path = Some(ckpt.clone());
        c.checkpoint_interval = 1000;
        let mut report = None;
        for stop in [1000u64, 2000, 3000, 4000] {
            // Drive the state directly up to `stop` digits; max_digits stays
            // at 4000 so the fingerprint is identical across partial runs.
            let mut partial = c.clone();
            partial.resume = stop > 1000;
            let mut state = if partial.resume {
                checkpoint_load(&ckpt, &partial).unwrap()
            } else {
                AnalysisState::new(&partial).unwrap()
            };
            let mut stream = partial.source.open(partial.base).unwrap();
            stream.skip_digits(state.n()).unwrap();
            while state.n() < stop {
                state.update(stream.next_digit().unwrap().unwrap()).unwrap();
            }
            checkpoint_save(&state, &partial, &ckpt).unwrap();
            if stop == 4000 {
                report = Some(emit_all(&partial, &state).unwrap());
            }
        }
        let resumed = report.unwrap();

        assert_eq!(resumed.n, straight.n);
        assert_eq!(resumed.s, straight.s);
        assert_eq!(resumed.d, straight.d);
        assert_eq!(resumed.delta, straight.delta);
        // CSVs are byte-identical.
        for name in ["density.csv", "cumulative.csv", "lil.csv", "extrema.csv", "normality_k3.csv"] {
            let a = fs::read(dir.path().join("straight").join(name)).unwrap();
            let b = fs::read(out.join(name)).unwrap();
            assert_eq!(a, b, "{name}");
        }
    }

    #[test]
    fn chunk_parallel_matches_sequential() {
        let dir = temp_out();
        let seq = {
            let c = baseline_config(11, 12_345, &dir.path().join("seq"));
            run_analysis(&c).unwrap()
        };
        let par = {
            let mut c = baseline_config(11, 12_345, &dir.path().join("par"));
            c.threads = 4;
            run_analysis(&c).unwrap()
        };
        assert_eq!(seq.n, par.n);
        assert_eq!(seq.s, par.s);
        assert_eq!(seq.d, par.d);
        for name in ["density.csv", "cumulative.csv", "frequency.csv", "lil.csv", "extrema.csv", "normality_k2.csv", "summary.txt"] {
            let a = fs::read(dir.path().join("seq").join(name)).unwrap();
            let b = fs::read(dir.path().join("par").join(name)).unwrap();
            assert_eq!(a, b, "{name}");
        }
    }

    #[test]
    fn summary_identity_holds() {
        let dir = temp_out();
        let c = baseline_config(3, 2000, &dir.path().join("out"));
        let report = run_analysis(&c).unwrap();
        let divisor = crate::lilscan::lil_divisor(report.n).unwrap();
        let delta = report.delta.unwrap();
        assert!((delta * divisor - report.d).abs() <= 1e-12 * report.d.abs().max(1e-300));
    }

    #[test]
    fn fingerprint_tracks_analysis_inputs_only() {
        let dir = temp_out();
        let base = baseline_config(1, 100, &dir.path().join("a"));
        let mut same = base.clone();
        same.out_dir = dir.path().join("b");
        same.checkpoint_interval = 5;
        same.threads = 3;
        assert_eq!(base.fingerprint(), same.fingerprint());
        let mut diff = base.clone();
        diff.burn_in = 1;
        assert_ne!(base.fingerprint(), diff.fingerprint());
        let mut diff = base.clone();
        diff.source = DigitSource::Baseline { seed: 2, count: 100 };
        assert_ne!(base.fingerprint(), diff.fingerprint());
    }

    #[test]
    fn config_validation() {
        let dir = temp_out();
        let mut c = baseline_config(1, 0, dir.path());
        assert!(run_analysis(&c).is_err());
        c.max_digits = 10;
        c.pattern_lens.clear();
        assert!(run_analysis(&c).is_err());
    }
}
