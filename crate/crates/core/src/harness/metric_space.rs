//! Finite metric spaces given by distance matrices.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::metric::{Norm, PointSet};

/// Relative tolerance of the triangle-inequality check.
const TRIANGLE_TOLERANCE: f64 = 1e-12;

/// A symmetric distance matrix with zero diagonal and positive off-diagonal entries.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralMetric {
    n: usize,
    entries: Vec<f64>,
}

impl GeneralMetric {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyPointSet);
        }
        if entries.len() != n * n {
            return Err(Error::InvalidMetric(format!(
                "expected {} entries, found {}",
                n * n,
                entries.len()
            )));
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::InvalidMetric(format!("d({i},{i}) is not zero")));
            }
            for j in i + 1..n {
                let (a, b) = (entries[i * n + j], entries[j * n + i]);
                if a != b {
                    return Err(Error::InvalidMetric(format!("d({i},{j}) != d({j},{i})")));
                }
                if !(a > 0.0 && a.is_finite()) {
                    return Err(Error::InvalidMetric(format!("d({i},{j}) = {a} is not positive")));
                }
            }
        }
        Ok(GeneralMetric { n, entries })
    }

    /// Parses `n` followed by the `n²` entries, whitespace separated.
    pub fn parse(s: &str) -> Result<Self> {
        let mut tokens = s
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim_start().starts_with('#'))
            .flat_map(|(k, l)| l.split_whitespace().map(move |t| (k + 1, t)));
        let (line, first) = tokens.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty metric file".into(),
        })?;
        let n: usize = first.parse().map_err(|e| Error::Parse {
            line,
            msg: format!("size {first:?}: {e}"),
        })?;
        let entries = tokens
            .map(|(line, t)| {
                t.parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    msg: format!("{t:?}: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        Self::new(n, entries)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|x| format!("{x:?}")).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Cubic check of `d(i,k) ≤ d(i,j) + d(j,k)`.
    pub fn validate_triangle(&self) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let dij = self.get(i, j);
                for k in 0..n {
                    let dik = self.get(i, k);
                    let bound = dij + self.get(j, k);
                    if dik > bound * (1.0 + TRIANGLE_TOLERANCE) {
                        return Err(Error::TriangleInequality { i, j, k });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Isometric embedding into ℓ∞^n: point `i` is row `i` of the matrix, then
/// rescaled like any other input.
pub fn embed_general_metric(m: &GeneralMetric) -> Result<PointSet> {
    let rows = (0..m.len()).map(|i| m.row(i).to_vec()).collect();
    PointSet::normalized(rows, Norm::Inf)
}
