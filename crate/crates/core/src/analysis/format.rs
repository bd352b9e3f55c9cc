//! PTT1 binary tag-stream format (little-endian).
//!
//! Header (32 bytes): magic "PTT1", version u16, reserved u16, config hash
//! u64, trial count u64, record count u64. Records (24 bytes): trial index
//! u64, detector u8, pulse label u8, reserved u16, time (ps) u64, pad u32.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::FormatError;
use crate::tags::{PulseLabel, StreamHeader, TagRecord, TagStream, FORMAT_VERSION};

pub const MAGIC: [u8; 4] = *b"PTT1";
pub const HEADER_LEN: usize = 32;
pub const RECORD_LEN: usize = 24;

pub fn encode(stream: &TagStream) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + RECORD_LEN * stream.records.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&stream.header.version.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&stream.header.config_hash.to_le_bytes());
    out.extend_from_slice(&stream.header.trial_count.to_le_bytes());
    out.extend_from_slice(&(stream.records.len() as u64).to_le_bytes());
    for r in &stream.records {
        out.extend_from_slice(&r.trial_index.to_le_bytes());
        out.push(r.detector);
        out.push(r.pulse as u8);
        out.extend_from_slice(&0u16.to_le_bytes());
        out.extend_from_slice(&r.time_ps.to_le_bytes());
        out.extend_from_slice(&0u32.to_le_bytes());
    }
    out
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes(b[at..at + 2].try_into().unwrap())
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn u64_at(b: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

pub fn decode(bytes: &[u8]) -> Result<TagStream, FormatError> {
    if bytes.len() < 4 {
        return Err(FormatError::Truncated(format!(
            "{} bytes, header needs {HEADER_LEN}",
            bytes.len()
        )));
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(FormatError::BadMagic { found: magic });
    }
    if bytes.len() < HEADER_LEN {
        return Err(FormatError::Truncated(format!(
            "{} bytes, header needs {HEADER_LEN}",
            bytes.len()
        )));
    }
    let version = u16_at(bytes, 4);
    if version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    if u16_at(bytes, 6) != 0 {
        return Err(FormatError::BadRecord {
            index: 0,
            offset: 6,
            reason: "reserved header field is not zero".into(),
        });
    }
    let header = StreamHeader {
        version,
        config_hash: u64_at(bytes, 8),
        trial_count: u64_at(bytes, 16),
    };
    let n_records = u64_at(bytes, 24);
    let body = &bytes[HEADER_LEN..];
    let expected = n_records.checked_mul(RECORD_LEN as u64);
    if expected != Some(body.len() as u64) {
        let whole = body.len() / RECORD_LEN;
        return Err(FormatError::Truncated(format!(
            "header announces {n_records} records but the body holds {} bytes ({whole} whole records, record {whole} starts at byte {})",
            body.len(),
            HEADER_LEN + whole * RECORD_LEN
        )));
    }
    let mut records = Vec::with_capacity(n_records as usize);
    for (i, rec) in body.chunks_exact(RECORD_LEN).enumerate() {
        let offset = (HEADER_LEN + i * RECORD_LEN) as u64;
        let bad = |reason: String| FormatError::BadRecord {
            index: i as u64,
            offset,
            reason,
        };
        let trial_index = u64_at(rec, 0);
        let detector = rec[8];
        let label = rec[9];
        if trial_index >= header.trial_count {
            return Err(bad(format!(
                "trial index {trial_index} beyond trial count {}",
                header.trial_count
            )));
        }
        if detector > 1 {
            return Err(bad(format!("detector {detector} is not 0 or 1")));
        }
        let pulse = PulseLabel::from_byte(label)
            .ok_or_else(|| bad(format!("pulse label {label} is not WRITE(0) or READ(1)")))?;
        if u16_at(rec, 10) != 0 || u32_at(rec, 20) != 0 {
            return Err(bad("reserved or padding bytes are not zero".into()));
        }
        records.push(TagRecord {
            trial_index,
            detector,
            pulse,
            time_ps: u64_at(rec, 12),
        });
    }
    Ok(TagStream { header, records })
}

pub fn write_tagstream(path: &Path, stream: &TagStream) -> Result<(), FormatError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode(stream))?;
    w.flush()?;
    Ok(())
}

pub fn read_tagstream(path: &Path) -> Result<TagStream, FormatError> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TagStream {
        let mut s = TagStream::empty(0xdead_beef, 10);
        s.records.push(TagRecord {
            trial_index: 0,
            detector: 1,
            pulse: PulseLabel::Write,
            time_ps: 1234,
        });
        s.records.push(TagRecord {
            trial_index: 9,
            detector: 0,
            pulse: PulseLabel::Read,
            time_ps: 160_000,
        });
        s
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let s = sample();
        let bytes = encode(&s);
        assert_eq!(bytes.len(), HEADER_LEN + 2 * RECORD_LEN);
        assert_eq!(&bytes[..4], b"PTT1");
        let back = decode(&bytes).unwrap();
        assert_eq!(back, s);
        assert_eq!(encode(&back), bytes);
    }

    #[test]
    fn rejects_malformed_input() {
        let bytes = encode(&sample());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(FormatError::BadMagic { .. })));
        assert!(matches!(
            decode(&bytes[..bytes.len() - 5]),
            Err(FormatError::Truncated(_))
        ));
        assert!(matches!(decode(&bytes[..20]), Err(FormatError::Truncated(_))));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(matches!(decode(&bad), Err(FormatError::UnsupportedVersion(9))));
        let mut bad = bytes.clone();
        bad[HEADER_LEN + RECORD_LEN + 9] = 7;
        match decode(&bad) {
            Err(FormatError::BadRecord { index, offset, .. }) => {
                assert_eq!(index, 1);
                assert_eq!(offset, (HEADER_LEN + RECORD_LEN) as u64);
            }
            other => panic!("{other:?}"),
        }
        let mut bad = bytes.clone();
        bad[HEADER_LEN + 8] = 2;
        assert!(matches!(decode(&bad), Err(FormatError::BadRecord { index: 0, .. })));
    }
}
