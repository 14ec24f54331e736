//! Exact all-pairs oracle and distortion reports.

use std::io::{self, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::SizeReport;
use crate::error::{Error, Result};
use crate::estimate::QueryContext;
use crate::metric::{Norm, PointSet};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub i: usize,
    pub j: usize,
    pub exact: f64,
    pub estimate: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    #[serde(skip)]
    pub pairs: Vec<PairRecord>,
    /// Errors are measured on squared distances (Euclidean sketches).
    pub squared: bool,
    pub band: f64,
    pub max_rel_error: f64,
    pub mean_rel_error: f64,
    pub p99_rel_error: f64,
    pub fraction_within_band: f64,
    pub pair_count: usize,
    pub size: SizeReport,
    pub seed: Option<u64>,
    #[serde(skip)]
    pub query_seconds: f64,
}

impl DistortionReport {
    /// One line per pair: `i j exact estimate rel_error`.
    pub fn write_pairs<W: Write>(&self, mut w: W) -> io::Result<()> {
        for p in &self.pairs {
            writeln!(w, "{} {} {:.12e} {:.12e} {:.6e}", p.i, p.j, p.exact, p.estimate, p.rel_error)?;
        }
        Ok(())
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn all_within_band(&self) -> bool {
        self.fraction_within_band == 1.0
    }
}

/// Exact distances (in the units of the original input) for all `i < j`,
/// row by row.
pub fn exact_distances(ps: &PointSet) -> Vec<(usize, usize, f64)> {
    let scale = ps.scale();
    (0..ps.len())
        .into_par_iter()
        .flat_map_iter(|i| (i + 1..ps.len()).map(move |j| (i, j, ps.distance(i, j) * scale)))
        .collect()
}

/// Compares every pairwise estimate with the exact distance.
///
/// For Euclidean sketches the error is `|Z_1·Z_2 − ‖x_i−x_j‖²| / ‖x_i−x_j‖²`,
/// otherwise `|Ẽ − ‖x_i−x_j‖| / ‖x_i−x_j‖`. `band` is the tolerated relative error.
pub fn evaluate(ctx: &QueryContext, ps: &PointSet, band: f64, size: SizeReport) -> Result<DistortionReport> {
    let h = ctx.header();
    if h.n as usize != ps.len() {
        return Err(Error::DimensionMismatch {
            expected: h.n as usize,
            found: ps.len(),
        });
    }
    let squared = h.euclidean;
    if squared {
        if ps.norm() != Norm::Lp(2) {
            return Err(Error::NotL2);
        }
    } else {
        if h.d as usize != ps.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.d as usize,
                found: ps.dim(),
            });
        }
        if h.norm != ps.norm() {
            return Err(Error::InvalidParameter(format!(
                "sketch norm {} does not match input norm {}",
                h.norm,
                ps.norm()
            )));
        }
    }
    let start = Instant::now();
    let pairs = exact_distances(ps)
        .into_par_iter()
        .map(|(i, j, exact)| {
            let (truth, estimate) = if squared {
                (exact * exact, ctx.estimate_euclidean_squared(i, j)?)
            } else {
                (exact, ctx.estimate_lp(i, j)?)
            };
            Ok(PairRecord {
                i,
                j,
                exact: truth,
                estimate,
                rel_error: (estimate - truth).abs() / truth,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let query_seconds = start.elapsed().as_secs_f64();

    let m = pairs.len();
    let mut errs: Vec<f64> = pairs.iter().map(|p| p.rel_error).collect();
    errs.sort_by(f64::total_cmp);
    let within = errs.iter().filter(|&&e| e <= band).count();
    Ok(DistortionReport {
        squared,
        band,
        max_rel_error: errs.last().copied().unwrap_or(0.0),
        mean_rel_error: if m == 0 { 0.0 } else { errs.iter().sum::<f64>() / m as f64 },
        p99_rel_error: if m == 0 {
            0.0
        } else {
            errs[((0.99 * m as f64).ceil() as usize).clamp(1, m) - 1]
        },
        fraction_within_band: if m == 0 { 1.0 } else { within as f64 / m as f64 },
        pair_count: m,
        size,
        seed: None,
        query_seconds,
        pairs,
    })
}
