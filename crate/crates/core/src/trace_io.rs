//! Binary trace files.
//!
//! Little-endian layout:
//!
//! | offset | size | field                  |
//! |--------|------|------------------------|
//! | 0      | 4    | magic `PSPT`           |
//! | 4      | 4    | version (u32), 1       |
//! | 8      | 8    | sample rate, Hz (f64)  |
//! | 16     | 8    | sample count (u64)     |
//! | 24     | 16·n | `(re, im)` f64 pairs   |

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const TRACE_MAGIC: [u8; 4] = *b"PSPT";
pub const TRACE_VERSION: u32 = 1;
const HEADER_LEN: usize = 24;

/// Complex samples with their sample rate, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub sample_rate_hz: f64,
    pub samples: Vec<Complex64>,
}

pub fn write_trace<W: Write>(mut w: W, sample_rate_hz: f64, samples: &[Complex64]) -> Result<()> {
    let mut buf = Vec::with_capacity(HEADER_LEN + 16 * samples.len());
    buf.extend_from_slice(&TRACE_MAGIC);
    buf.extend_from_slice(&TRACE_VERSION.to_le_bytes());
    buf.extend_from_slice(&sample_rate_hz.to_le_bytes());
    buf.extend_from_slice(&(samples.len() as u64).to_le_bytes());
    for z in samples {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_trace<R: Read>(mut r: R) -> Result<TraceFile> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn save_trace(path: &Path, sample_rate_hz: f64, samples: &[Complex64]) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_trace(std::io::BufWriter::new(file), sample_rate_hz, samples)
}

pub fn load_trace(path: &Path) -> Result<TraceFile> {
    decode(&std::fs::read(path)?)
}

fn decode(bytes: &[u8]) -> Result<TraceFile> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "file shorter than the {HEADER_LEN}-byte header"
        )));
    }
    if bytes[..4] != TRACE_MAGIC {
        return Err(Error::Format(format!("bad magic {:?}", &bytes[..4])));
    }
    let word = |at: usize| -> [u8; 8] { bytes[at..at + 8].try_into().expect("8 bytes") };
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != TRACE_VERSION {
        return Err(Error::Format(format!(
            "unsupported version {version}, expected {TRACE_VERSION}"
        )));
    }
    let sample_rate_hz = f64::from_le_bytes(word(8));
    if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
        return Err(Error::Format(format!(
            "invalid sample rate {sample_rate_hz}"
        )));
    }
    let count = u64::from_le_bytes(word(16));
    let body = &bytes[HEADER_LEN..];
    if (body.len() as u64) != count.saturating_mul(16) {
        return Err(Error::Format(format!(
            "header declares {count} samples but body holds {} bytes",
            body.len()
        )));
    }
    let samples = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    Ok(TraceFile {
        sample_rate_hz,
        samples,
    })
}
