//! Reading and writing string records in the two supported formats.

use std::io::{self, Read, Write};

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// One string per line; strings cannot contain the newline byte.
    Lines,
    /// Each record is a u32 little-endian length followed by raw bytes.
    LenPrefixed,
}

/// Length written in place of a record that has no string (len-prefixed only).
pub const MISSING_RECORD: u32 = u32::MAX;

#[derive(Debug)]
pub enum RecordError {
    Io(io::Error),
    /// A truncated or oversized record.
    Malformed(String),
}

impl std::fmt::Display for RecordError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RecordError::Io(e) => write!(f, "{e}"),
            RecordError::Malformed(m) => f.write_str(m),
        }
    }
}

impl From<io::Error> for RecordError {
    fn from(e: io::Error) -> Self {
        RecordError::Io(e)
    }
}

pub fn read_all(mut src: impl Read) -> io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    src.read_to_end(&mut buf)?;
    Ok(buf)
}

/// Splits a buffer into records. In lines mode a final newline does not start
/// an extra empty record.
pub fn parse_records(data: &[u8], format: Format) -> Result<Vec<Vec<u8>>, RecordError> {
    match format {
        Format::Lines => {
            let body = data.strip_suffix(b"\n").unwrap_or(data);
            if data.is_empty() {
                return Ok(Vec::new());
            }
            Ok(body.split(|&b| b == b'\n').map(<[u8]>::to_vec).collect())
        }
        Format::LenPrefixed => {
            let mut out = Vec::new();
            let mut rest = data;
            while !rest.is_empty() {
                let Some((head, tail)) = rest.split_first_chunk::<4>() else {
                    return Err(RecordError::Malformed(format!(
                        "record {}: truncated length prefix",
                        out.len()
                    )));
                };
                let n = u32::from_le_bytes(*head) as usize;
                if n > tail.len() {
                    return Err(RecordError::Malformed(format!(
                        "record {}: length {n} exceeds remaining {} bytes",
                        out.len(),
                        tail.len()
                    )));
                }
                out.push(tail[..n].to_vec());
                rest = &tail[n..];
            }
            Ok(out)
        }
    }
}

/// Writes one record. Lines mode refuses strings containing a newline.
pub fn write_record(out: &mut impl Write, s: &[u8], format: Format) -> Result<(), RecordError> {
    match format {
        Format::Lines => {
            if s.contains(&b'\n') {
                return Err(RecordError::Malformed(
                    "string contains a newline byte; use --format len-prefixed".into(),
                ));
            }
            out.write_all(s)?;
            out.write_all(b"\n")?;
        }
        Format::LenPrefixed => {
            let n = u32::try_from(s.len())
                .ok()
                .filter(|&n| n != MISSING_RECORD)
                .ok_or_else(|| RecordError::Malformed(format!("string of {} bytes is too long", s.len())))?;
            out.write_all(&n.to_le_bytes())?;
            out.write_all(s)?;
        }
    }
    Ok(())
}
