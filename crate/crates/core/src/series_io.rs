//! Snapshot series on disk.
//!
//! CSV: header `k,time,count`, `k` counting from 1.
//! Binary: magic `DCLS1`, then little-endian `u64` K and K pairs of
//! `f64` time and `u32` count.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph_sim::{SamplingScheme, SnapshotSeries};

pub const MAGIC: &[u8; 5] = b"DCLS1";

pub fn write_series_csv<W: Write>(series: &SnapshotSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "time", "count"])?;
    for (k, (t, c)) in series.times.iter().zip(&series.counts).enumerate() {
        w.write_record([(k + 1).to_string(), t.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `(times, counts)` back from CSV.
pub fn read_series_csv<R: Read>(input: R) -> Result<(Vec<f64>, Vec<u32>)> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().collect::<Vec<_>>() != ["k", "time", "count"] {
        return Err(Error::Format("expected header k,time,count".into()));
    }
    let mut times = Vec::new();
    let mut counts = Vec::new();
    for (i, row) in r.deserialize::<(usize, f64, u32)>().enumerate() {
        let (k, t, c) = row?;
        if k != i + 1 {
            return Err(Error::Format(format!("row {} has k = {k}", i + 1)));
        }
        times.push(t);
        counts.push(c);
    }
    Ok((times, counts))
}

pub fn write_series_binary<W: Write>(series: &SnapshotSeries, mut out: W) -> Result<()> {
    let mut buf = Vec::with_capacity(13 + 12 * series.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(series.len() as u64).to_le_bytes());
    for (t, c) in series.times.iter().zip(&series.counts) {
        buf.extend_from_slice(&t.to_le_bytes());
        buf.extend_from_slice(&c.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_series_binary<R: Read>(mut input: R) -> Result<(Vec<f64>, Vec<u32>)> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() < 13 || &bytes[..5] != MAGIC {
        return Err(Error::Format("missing DCLS1 header".into()));
    }
    let k = u64::from_le_bytes(bytes[5..13].try_into().expect("8 bytes")) as usize;
    let body = &bytes[13..];
    if k.checked_mul(12) != Some(body.len()) {
        return Err(Error::Format(format!("header announces {k} records but {} bytes follow", body.len())));
    }
    let mut times = Vec::with_capacity(k);
    let mut counts = Vec::with_capacity(k);
    for rec in body.chunks_exact(12) {
        times.push(f64::from_le_bytes(rec[..8].try_into().expect("8 bytes")));
        counts.push(u32::from_le_bytes(rec[8..].try_into().expect("4 bytes")));
    }
    Ok((times, counts))
}

/// Loads a series file, choosing the format from the magic bytes. The
/// scheme (rate or spacing) is not stored and must be supplied.
pub fn load_series(path: &Path, scheme: SamplingScheme, seed: u64) -> Result<SnapshotSeries> {
    let bytes = std::fs::read(path)?;
    let (times, counts) = if bytes.starts_with(MAGIC) {
        read_series_binary(bytes.as_slice())?
    } else {
        read_series_csv(bytes.as_slice())?
    };
    SnapshotSeries::from_parts(times, counts, scheme, seed)
}
