//! ASCII digit-file parsing: bytes '0'-'9' / 'A'-'Z' (case-insensitive),
//! optional single "X." integer-part prefix, whitespace always skipped.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};

use super::DigitStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    /// Fractional digits only.
    Ascii,
    /// A single leading "<integer-part>." prefix is consumed and discarded.
    AsciiWithHeader,
}

impl FileFormat {
    pub fn name(&self) -> &'static str {
        match self {
            FileFormat::Ascii => "ascii",
            FileFormat::AsciiWithHeader => "ascii-with-header",
        }
    }
}

pub fn open_digit_file(
    path: impl AsRef<Path>,
    base: u32,
    format: FileFormat,
    strict: bool,
) -> Result<DigitStream> {
    let path = path.as_ref();
    if !(2..=36).contains(&base) {
        return Err(Error::usage(format!("base must be in 2..=36, got {base}")));
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let inner = FileDigits {
        reader: BufReader::with_capacity(1 << 16, file),
        buf: Vec::new(),
        pos: 0,
        byte_offset: 0,
        base,
        strict,
        in_header: format == FileFormat::AsciiWithHeader,
        skipped: 0,
        done: false,
    };
    let source = format!(
        "file:{}:{}:{}",
        path.display(),
        format.name(),
        if strict { "strict" } else { "lenient" }
    );
    Ok(DigitStream::from_file(base, source, inner))
}

pub(crate) struct FileDigits {
    reader: BufReader<File>,
    buf: Vec<u8>,
    pos: usize,
    byte_offset: u64,
    base: u32,
    strict: bool,
    in_header: bool,
    skipped: u64,
    done: bool,
}

fn digit_value(b: u8) -> Option<u8> {
    match b {
        b'0'..=b'9' => Some(b - b'0'),
        b'A'..=b'Z' => Some(b - b'A' + 10),
        b'a'..=b'z' => Some(b - b'a' + 10),
        _ => None,
    }
}

fn is_whitespace(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\r' | b'\n')
}

impl FileDigits {
    pub(crate) fn skipped_bytes(&self) -> u64 {
        self.skipped
    }

    fn refill(&mut self) -> Result<bool> {
        self.buf.resize(1 << 16, 0);
        let n = self
            .reader
            .read(&mut self.buf)
            .map_err(|e| Error::io("<digit file>", e))?;
        self.buf.truncate(n);
        self.pos = 0;
        Ok(n > 0)
    }

    pub(crate) fn next_digit(&mut self) -> Option<Result<u8>> {
        if self.done {
            return None;
        }
        loop {
            if self.pos >= self.buf.len() {
                match self.refill() {
                    Ok(true) => {}
                    Ok(false) => {
                        self.done = true;
                        return None;
                    }
                    Err(e) => {
                        self.done = true;
                        return Some(Err(e));
                    }
                }
            }
            let b = self.buf[self.pos];
            self.pos += 1;
            let offset = self.byte_offset;
            self.byte_offset += 1;
            if is_whitespace(b) {
                continue;
            }
            if self.in_header {
                if b == b'.' {
                    self.in_header = false;
                    continue;
                }
                if digit_value(b).is_none() && self.strict {
                    self.done = true;
                    return Some(Err(Error::Parse {
                        offset,
                        reason: format!("invalid byte 0x{b:02x} in integer-part header"),
                    }));
                }
                continue; // header content is discarded
            }
            match digit_value(b) {
                Some(v) if (v as u32) < self.base => return Some(Ok(v)),
                Some(v) => {
                    self.done = true;
                    return Some(Err(Error::Parse {
                        offset,
                        reason: format!("digit {v} out of range for base {}", self.base),
                    }));
                }
                None => {
                    if self.strict {
                        self.done = true;
                        return Some(Err(Error::Parse {
                            offset,
                            reason: format!("invalid byte 0x{b:02x}"),
                        }));
                    }
                    self.skipped += 1;
                }
            }
        }
    }
}
