//! Point and metric file formats.
//!
//! * `text`: one point per line, whitespace-separated coordinates. Blank
//!   lines and lines starting with `#` are skipped.
//! * `binary`: `u64` n, `u64` d, then `n·d` little-endian `f64`, row-major.
//! * `metric`: whitespace-separated `n` followed by the `n²` matrix entries.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use super::metric_space::GeneralMetric;
use crate::error::{Error, Result};
use crate::metric::{Norm, PointSet};

/// Metrics larger than this skip the cubic triangle check unless forced.
pub const TRIANGLE_CHECK_LIMIT: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    Text,
    Binary,
    Metric,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" | "txt" => Ok(InputFormat::Text),
            "binary" | "bin" => Ok(InputFormat::Binary),
            "metric" => Ok(InputFormat::Metric),
            other => Err(Error::InvalidParameter(format!("unknown input format {other:?}"))),
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputFormat::Text => "text",
            InputFormat::Binary => "binary",
            InputFormat::Metric => "metric",
        })
    }
}

pub fn parse_text(s: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (lineno, line) in s.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|e| Error::Parse {
                    line: lineno + 1,
                    msg: format!("{tok:?}: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn parse_binary(bytes: &[u8]) -> Result<Vec<Vec<f64>>> {
    let word = |k: usize| -> Result<[u8; 8]> {
        bytes
            .get(8 * k..8 * k + 8)
            .map(|s| s.try_into().unwrap())
            .ok_or(Error::Parse {
                line: 0,
                msg: "binary input is truncated".into(),
            })
    };
    let n = u64::from_le_bytes(word(0)?) as usize;
    let d = u64::from_le_bytes(word(1)?) as usize;
    let expected = n
        .checked_mul(d)
        .and_then(|c| c.checked_add(2))
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| Error::Parse {
            line: 0,
            msg: "binary header overflows".into(),
        })?;
    if bytes.len() != expected {
        return Err(Error::Parse {
            line: 0,
            msg: format!("expected {expected} bytes for {n}x{d} points, found {}", bytes.len()),
        });
    }
    (0..n)
        .map(|i| (0..d).map(|j| Ok(f64::from_le_bytes(word(2 + i * d + j)?))).collect())
        .collect()
}

/// Reads raw coordinates without validation or scaling.
pub fn read_points(path: impl AsRef<Path>, format: InputFormat) -> Result<Vec<Vec<f64>>> {
    match format {
        InputFormat::Text => parse_text(&fs::read_to_string(path)?),
        InputFormat::Binary => parse_binary(&fs::read(path)?),
        InputFormat::Metric => Err(Error::InvalidParameter(
            "metric files hold distances, not points".into(),
        )),
    }
}

/// Loads a point set and rescales it by a power of two so the minimum
/// distance is in `[1, 2)`. Metric files are embedded isometrically into ℓ∞.
pub fn ingest_points(path: impl AsRef<Path>, format: InputFormat, norm: Norm) -> Result<PointSet> {
    ingest_with(path, format, norm, false)
}

/// Like [`ingest_points`]; `force_triangle` runs the cubic triangle check on
/// metrics of any size.
pub fn ingest_with(path: impl AsRef<Path>, format: InputFormat, norm: Norm, force_triangle: bool) -> Result<PointSet> {
    let ps = match format {
        InputFormat::Metric => {
            let m = GeneralMetric::parse(&fs::read_to_string(path)?)?;
            if force_triangle || m.len() <= TRIANGLE_CHECK_LIMIT {
                m.validate_triangle()?;
            }
            super::metric_space::embed_general_metric(&m)?
        }
        _ => PointSet::normalized(read_points(path, format)?, norm)?,
    };
    if ps.len() < 2 {
        return Err(Error::InvalidParameter("need at least two points".into()));
    }
    Ok(ps)
}

pub fn write_text(path: impl AsRef<Path>, rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_binary(path: impl AsRef<Path>, rows: &[Vec<f64>]) -> Result<()> {
    let d = rows.first().map_or(0, |r| r.len());
    let mut f = fs::File::create(path)?;
    f.write_all(&(rows.len() as u64).to_le_bytes())?;
    f.write_all(&(d as u64).to_le_bytes())?;
    for row in rows {
        for x in row {
            f.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}
