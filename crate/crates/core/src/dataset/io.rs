//! Dataset files.
//!
//! Binary layout, little-endian throughout:
//!
//! | field            | type      |
//! |------------------|-----------|
//! | magic `R2RD`     | 4 bytes   |
//! | version (= 1)    | u16       |
//! | record count     | u64       |
//! | grid extent, mm  | f64       |
//! | cells per side   | u64       |
//! | records          | u32 cell id + 8 × f64 (p_i, d_i, p_o, d_o) |

use std::fmt::Write as _;
use std::path::Path;

use super::RaySample;
use crate::error::{Error, Result};
use crate::io::{atomic_write, Reader};

pub const BINARY_MAGIC: &[u8; 4] = b"R2RD";
pub const BINARY_VERSION: u16 = 1;
pub const CSV_HEADER: &str = "cell_id,pix,piy,dix,diy,pox,poy,dox,doy";

const HEADER_LEN: usize = 4 + 2 + 8 + 8 + 8;
const RECORD_LEN: usize = 4 + 8 * 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub extent: f64,
    pub cells_per_side: u64,
    pub records: Vec<RaySample>,
}

pub fn encode_binary(ds: &Dataset) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER_LEN + RECORD_LEN * ds.records.len());
    buf.extend_from_slice(BINARY_MAGIC);
    buf.extend_from_slice(&BINARY_VERSION.to_le_bytes());
    buf.extend_from_slice(&(ds.records.len() as u64).to_le_bytes());
    buf.extend_from_slice(&ds.extent.to_le_bytes());
    buf.extend_from_slice(&ds.cells_per_side.to_le_bytes());
    for r in &ds.records {
        buf.extend_from_slice(&r.cell_id.to_le_bytes());
        for v in r.features() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    buf
}

pub fn decode_binary(bytes: &[u8]) -> Result<Dataset> {
    let mut rd = Reader::new(bytes);
    let magic = rd.take(4).ok_or(Error::BadHeader {
        offset: 0,
        msg: "file shorter than the magic".into(),
    })?;
    if magic != BINARY_MAGIC {
        return Err(Error::BadHeader {
            offset: 0,
            msg: format!("bad magic {magic:?}, expected \"R2RD\""),
        });
    }
    let short = |rd: &Reader| Error::BadHeader {
        offset: rd.pos as u64,
        msg: "header truncated".into(),
    };
    let version = rd.u16().ok_or_else(|| short(&rd))?;
    if version != BINARY_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: BINARY_VERSION,
        });
    }
    let count = rd.u64().ok_or_else(|| short(&rd))?;
    let extent = rd.f64().ok_or_else(|| short(&rd))?;
    let cells_per_side = rd.u64().ok_or_else(|| short(&rd))?;
    let mut records = Vec::with_capacity((count as usize).min(rd.remaining() / RECORD_LEN + 1));
    for index in 0..count {
        let offset = rd.pos as u64;
        let cell_id = rd.u32().ok_or(Error::Truncated { index, offset })?;
        let mut f = [0.0; 8];
        for v in f.iter_mut() {
            *v = rd.f64().ok_or(Error::Truncated { index, offset })?;
        }
        records.push(RaySample {
            cell_id,
            p_i: [f[0], f[1]],
            d_i: [f[2], f[3]],
            p_o: [f[4], f[5]],
            d_o: [f[6], f[7]],
        });
    }
    if rd.remaining() != 0 {
        return Err(Error::Data(format!(
            "{} trailing bytes after {count} records at byte {}",
            rd.remaining(),
            rd.pos
        )));
    }
    Ok(Dataset {
        extent,
        cells_per_side,
        records,
    })
}

pub fn save_binary(path: &Path, ds: &Dataset) -> Result<()> {
    atomic_write(path, &encode_binary(ds))
}

pub fn load_binary(path: &Path) -> Result<Dataset> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_binary(&bytes)
}

pub fn encode_csv(records: &[RaySample]) -> String {
    let mut out = String::with_capacity(64 + records.len() * 160);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = write!(out, "{}", r.cell_id);
        for v in r.features() {
            // Display for f64 is the shortest string that parses back to the same bits.
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

pub fn decode_csv(text: &str, path: &Path) -> Result<Vec<RaySample>> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        Some((_, h)) => return Err(err(1, format!("bad header `{h}`, expected `{CSV_HEADER}`"))),
        None => return Err(err(1, "empty file".into())),
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 9 {
            return Err(err(lineno, format!("expected 9 columns, found {}", cols.len())));
        }
        let cell_id = cols[0]
            .trim()
            .parse()
            .map_err(|_| err(lineno, format!("bad cell_id `{}`", cols[0])))?;
        let mut f = [0.0; 8];
        for (v, c) in f.iter_mut().zip(&cols[1..]) {
            *v = c.trim().parse().map_err(|_| err(lineno, format!("bad number `{c}`")))?;
        }
        records.push(RaySample {
            cell_id,
            p_i: [f[0], f[1]],
            d_i: [f[2], f[3]],
            p_o: [f[4], f[5]],
            d_o: [f[6], f[7]],
        });
    }
    Ok(records)
}

pub fn save_csv(path: &Path, records: &[RaySample]) -> Result<()> {
    atomic_write(path, encode_csv(records).as_bytes())
}

pub fn load_csv(path: &Path) -> Result<Vec<RaySample>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_csv(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(i: u32) -> RaySample {
        let x = i as f64;
        RaySample {
            cell_id: i,
            p_i: [x, -x],
            d_i: [0.1 / (x + 3.0), 1.0 / 3.0],
            p_o: [x.sin(), x.cos() * 1e-17],
            d_o: [-0.2, f64::MIN_POSITIVE],
        }
    }

    #[test]
    fn empty_dataset_is_valid() {
        let ds = Dataset {
            extent: 12.0,
            cells_per_side: 24,
            records: vec![],
        };
        let bytes = encode_binary(&ds);
        assert_eq!(bytes.len(), HEADER_LEN);
        assert_eq!(decode_binary(&bytes).unwrap(), ds);
        assert_eq!(decode_csv(&encode_csv(&[]), Path::new("x")).unwrap(), vec![]);
    }

    #[test]
    fn header_errors_are_distinct() {
        let ds = Dataset {
            extent: 12.0,
            cells_per_side: 24,
            records: (0..3).map(sample).collect(),
        };
        let bytes = encode_binary(&ds);

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_binary(&bad), Err(Error::BadHeader { offset: 0, .. })));

        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(matches!(
            decode_binary(&bad),
            Err(Error::VersionMismatch { found: 2, expected: 1 })
        ));

        let cut = &bytes[..bytes.len() - 5];
        assert!(matches!(
            decode_binary(cut),
            Err(Error::Truncated { index: 2, offset }) if offset == (HEADER_LEN + 2 * RECORD_LEN) as u64
        ));

        assert!(matches!(decode_binary(&bytes[..10]), Err(Error::BadHeader { .. })));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let recs: Vec<_> = (0..20).map(sample).collect();
        let back = decode_csv(&encode_csv(&recs), Path::new("x")).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn csv_column_error_names_line() {
        let mut text = encode_csv(&(0..10).map(sample).collect::<Vec<_>>());
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[6] = "1,2,3".into();
        text = lines.join("\n");
        let e = decode_csv(&text, Path::new("data.csv")).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 7, .. }), "{e}");
        assert!(e.to_string().contains("data.csv:7"));
    }
}
