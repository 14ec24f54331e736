//! Norms, point sets, grid nets and randomized grid rounding.
//!
//! Every other module works on top of these primitives. Two quantizers live
//! here:
//!
//! * [`round_to_net`] floors a vector of the unit ℓp ball onto the grid net
//!   `N_γ = 2·B_p^d ∩ G^d[γ / d^{1/p}]`. The result is within ℓp distance `γ`
//!   of the input and is stored as integer grid coordinates.
//! * [`randomized_grid_round`] adds a uniform random shift of one cell before
//!   flooring, which makes the returned bottom-left corner an unbiased
//!   estimator of the input, coordinate by coordinate.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest magnitude accepted when converting a floored coordinate to `i64`.
const GRID_LIMIT: f64 = (1u64 << 62) as f64;

/// An ℓp norm with integer order `p ≥ 1`, or the max norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Norm {
    Lp(u32),
    Inf,
}

impl Norm {
    pub fn new(p: u32) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter("norm order must be >= 1".into()));
        }
        Ok(Norm::Lp(p))
    }

    /// `d^{1/p}`, with the convention `d^{1/∞} = 1`.
    pub fn root_dim(self, d: usize) -> f64 {
        match self {
            Norm::Lp(1) => d as f64,
            Norm::Lp(2) => (d as f64).sqrt(),
            Norm::Lp(p) => (d as f64).powf(1.0 / p as f64),
            Norm::Inf => 1.0,
        }
    }

    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            Norm::Lp(1) => v.iter().map(|x| x.abs()).sum(),
            Norm::Lp(2) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::Lp(p) => v
                .iter()
                .map(|x| x.abs().powi(p as i32))
                .sum::<f64>()
                .powf(1.0 / p as f64),
            Norm::Inf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    /// Distance between two equal-length slices. Lengths are not checked.
    pub fn dist(self, x: &[f64], y: &[f64]) -> f64 {
        let diffs = x.iter().zip(y).map(|(a, b)| (a - b).abs());
        match self {
            Norm::Lp(1) => diffs.sum(),
            Norm::Lp(2) => diffs.map(|t| t * t).sum::<f64>().sqrt(),
            Norm::Lp(p) => diffs
                .map(|t| t.powi(p as i32))
                .sum::<f64>()
                .powf(1.0 / p as f64),
            Norm::Inf => diffs.fold(0.0, f64::max),
        }
    }

    /// Wire code: the order `p`, or 0 for the max norm.
    pub fn code(self) -> u64 {
        match self {
            Norm::Lp(p) => p as u64,
            Norm::Inf => 0,
        }
    }

    pub fn from_code(code: u64) -> Result<Self> {
        match code {
            0 => Ok(Norm::Inf),
            p if p <= u32::MAX as u64 => Ok(Norm::Lp(p as u32)),
            p => Err(Error::InvalidParameter(format!("norm order {p} too large"))),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Lp(p) => write!(f, "{p}"),
            Norm::Inf => write!(f, "inf"),
        }
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "max" | "∞" => Ok(Norm::Inf),
            other => other
                .parse::<u32>()
                .map_err(|_| Error::InvalidParameter(format!("unknown norm order {s:?}")))
                .and_then(Norm::new),
        }
    }
}

/// `‖x − y‖_p`.
pub fn lp_distance(x: &[f64], y: &[f64], norm: Norm) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(norm.dist(x, y))
}

/// Distortion parameter stored as the dyadic rational `num / 2^exp`.
///
/// Keeping ε dyadic lets the decoder reproduce every width that depends on
/// `γ·ε` bit for bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Epsilon {
    num: u32,
    exp: u32,
}

impl Epsilon {
    /// Finest resolution used when the requested ε is not dyadic.
    pub const MAX_EXP: u32 = 31;

    pub fn new(num: u32, exp: u32) -> Result<Self> {
        if exp > Self::MAX_EXP || num == 0 || (num as u64) >= (1u64 << exp) {
            return Err(Error::InvalidParameter(format!(
                "epsilon {num}/2^{exp} must lie in (0, 1)"
            )));
        }
        Ok(Epsilon { num, exp })
    }

    /// Largest dyadic `num / 2^exp ≤ eps` with `exp ≤ 31`, in lowest terms.
    pub fn from_f64(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {eps}"
            )));
        }
        for exp in 0..=Self::MAX_EXP {
            let scaled = eps * (1u64 << exp) as f64;
            if scaled.fract() == 0.0 {
                return Epsilon::new(scaled as u32, exp);
            }
        }
        let num = (eps * (1u64 << Self::MAX_EXP) as f64).floor() as u32;
        let mut e = Epsilon::new(num.max(1), Self::MAX_EXP)?;
        while e.num % 2 == 0 && e.exp > 0 {
            e.num /= 2;
            e.exp -= 1;
        }
        Ok(e)
    }

    pub fn half() -> Self {
        Epsilon { num: 1, exp: 1 }
    }

    pub fn numerator(self) -> u32 {
        self.num
    }

    pub fn exponent(self) -> u32 {
        self.exp
    }

    pub fn value(self) -> f64 {
        self.num as f64 / (1u64 << self.exp) as f64
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Smallest `t ≥ 0` with `2^t ≥ x`; returns 0 for `x ≤ 1`.
pub fn ceil_log2(x: f64) -> u32 {
    let mut t = 0u32;
    let mut p = 1.0f64;
    while p < x {
        p *= 2.0;
        t += 1;
    }
    t
}

/// Number of bits needed to address `count` distinct values (0 for `count ≤ 1`).
pub fn index_width(count: u64) -> u32 {
    if count <= 1 {
        0
    } else {
        64 - (count - 1).leading_zeros()
    }
}

/// `n` points in `d` dimensions under a fixed ℓp norm, stored row-major.
///
/// Points produced by [`PointSet::normalized`] have been divided by a power
/// of two `M′ = 2^scale_exponent` so that the minimum pairwise distance lies
/// in `[1, 2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    coords: Vec<f64>,
    n: usize,
    d: usize,
    norm: Norm,
    scale_exponent: i32,
    phi: f64,
}

struct PairExtremes {
    min: f64,
    min_pair: (usize, usize),
    max: f64,
}

impl PointSet {
    /// Wraps points that already satisfy `‖x_i − x_j‖ ≥ 1` for `i ≠ j`.
    pub fn new(rows: Vec<Vec<f64>>, norm: Norm) -> Result<Self> {
        let (coords, n, d) = flatten(rows)?;
        let ext = pair_extremes(&coords, n, d, norm);
        if n > 1 && ext.min < 1.0 {
            let (i, j) = ext.min_pair;
            return Err(if ext.min == 0.0 {
                Error::DuplicatePoints { i, j }
            } else {
                Error::BelowUnitDistance {
                    i,
                    j,
                    distance: ext.min,
                }
            });
        }
        Ok(PointSet {
            coords,
            n,
            d,
            norm,
            scale_exponent: 0,
            phi: ext.max.max(1.0),
        })
    }

    /// Rescales by the power of two `M′ ∈ (M/2, M]`, `M` the minimum distance,
    /// so every pairwise distance becomes at least 1.
    pub fn normalized(rows: Vec<Vec<f64>>, norm: Norm) -> Result<Self> {
        let (coords, n, d) = flatten(rows)?;
        Self::normalize_flat(coords, n, d, norm, 0)
    }

    pub(crate) fn normalize_flat(
        mut coords: Vec<f64>,
        n: usize,
        d: usize,
        norm: Norm,
        base_exponent: i32,
    ) -> Result<Self> {
        let ext = pair_extremes(&coords, n, d, norm);
        if n == 1 {
            return Ok(PointSet {
                coords,
                n,
                d,
                norm,
                scale_exponent: base_exponent,
                phi: 1.0,
            });
        }
        if ext.min == 0.0 {
            let (i, j) = ext.min_pair;
            return Err(Error::DuplicatePoints { i, j });
        }
        let e = floor_log2(ext.min);
        let factor = pow2(-e);
        coords.iter_mut().for_each(|c| *c *= factor);
        Ok(PointSet {
            coords,
            n,
            d,
            norm,
            scale_exponent: base_exponent + e,
            phi: (ext.max * factor).max(1.0),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }

    /// Exponent `e` of the ingestion scale `M′ = 2^e`.
    pub fn scale_exponent(&self) -> i32 {
        self.scale_exponent
    }

    /// `M′`, the factor that maps stored distances back to input units.
    pub fn scale(&self) -> f64 {
        pow2(self.scale_exponent)
    }

    /// Measured diameter (at least 1).
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.norm.dist(self.point(i), self.point(j))
    }
}

fn flatten(rows: Vec<Vec<f64>>) -> Result<(Vec<f64>, usize, usize)> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::EmptyPointSet);
    }
    let d = rows[0].len();
    if d == 0 {
        return Err(Error::InvalidParameter("points must have dimension >= 1".into()));
    }
    let mut coords = Vec::with_capacity(n * d);
    for (i, row) in rows.into_iter().enumerate() {
        if row.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: row.len(),
            });
        }
        if let Some(c) = row.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { point: i, coord: c });
        }
        coords.extend(row);
    }
    Ok((coords, n, d))
}

fn pair_extremes(coords: &[f64], n: usize, d: usize, norm: Norm) -> PairExtremes {
    let init = PairExtremes {
        min: f64::INFINITY,
        min_pair: (0, 0),
        max: 0.0,
    };
    (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = &coords[i * d..(i + 1) * d];
            let mut ext = PairExtremes {
                min: f64::INFINITY,
                min_pair: (0, 0),
                max: 0.0,
            };
            for j in i + 1..n {
                let dist = norm.dist(xi, &coords[j * d..(j + 1) * d]);
                if dist < ext.min {
                    ext.min = dist;
                    ext.min_pair = (i, j);
                }
                ext.max = ext.max.max(dist);
            }
            ext
        })
        .reduce(
            || PairExtremes { ..init },
            |a, b| {
                let (min, min_pair) = if b.min < a.min || (b.min == a.min && b.min_pair < a.min_pair)
                {
                    (b.min, b.min_pair)
                } else {
                    (a.min, a.min_pair)
                };
                PairExtremes {
                    min,
                    min_pair,
                    max: a.max.max(b.max),
                }
            },
        )
}

/// `2^e` for moderate exponents.
pub fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

/// Largest `e` with `2^e ≤ x`, for positive finite `x`.
pub fn floor_log2(x: f64) -> i32 {
    let mut e = x.log2().floor() as i32;
    while pow2(e) > x {
        e -= 1;
    }
    while pow2(e + 1) <= x {
        e += 1;
    }
    e
}

pub(crate) fn to_grid_int(x: f64) -> Result<i64> {
    if !x.is_finite() || x.abs() >= GRID_LIMIT {
        return Err(Error::Overflow("grid coordinate"));
    }
    Ok(x as i64)
}

/// Coordinate-wise floor of `v / cell`.
pub(crate) fn floor_to_grid(v: &[f64], cell: f64) -> Result<Vec<i64>> {
    v.iter().map(|x| to_grid_int((x / cell).floor())).collect()
}

/// A point of the grid net `N_γ`, stored as integer multiples of `γ / d^{1/p}`.
#[derive(Clone, Debug, PartialEq)]
pub struct NetElement {
    pub grid: Vec<i64>,
    pub gamma: f64,
}

impl NetElement {
    pub fn cell_side(&self, norm: Norm) -> f64 {
        self.gamma / norm.root_dim(self.grid.len())
    }

    pub fn to_vector(&self, norm: Norm) -> Vec<f64> {
        let cell = self.cell_side(norm);
        self.grid.iter().map(|&g| g as f64 * cell).collect()
    }

    /// Per-coordinate magnitude bound `ceil(2·d^{1/p}/γ)` implied by net membership.
    pub fn coordinate_bound(gamma: f64, d: usize, norm: Norm) -> f64 {
        (2.0 * norm.root_dim(d) / gamma).ceil()
    }
}

/// Rounds `v` (with `‖v‖_p ≤ 1`) down onto the grid net `N_γ`.
pub fn round_to_net(v: &[f64], gamma: f64, norm: Norm) -> Result<NetElement> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "net precision must lie in (0, 1], got {gamma}"
        )));
    }
    let len = norm.norm(v);
    if !(len <= 1.0) {
        return Err(Error::NormPrecondition { norm: len });
    }
    let cell = gamma / norm.root_dim(v.len());
    Ok(NetElement {
        grid: floor_to_grid(v, cell)?,
        gamma,
    })
}

/// Bottom-left corner of a cell of the uniform grid with side `cell_side`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridCorner {
    pub corner: Vec<i64>,
    pub cell_side: f64,
}

impl GridCorner {
    pub fn to_vector(&self) -> Vec<f64> {
        self.corner
            .iter()
            .map(|&c| c as f64 * self.cell_side)
            .collect()
    }
}

/// Corner of the grid cell containing `y + cell_side·σ`.
///
/// For `σ` uniform on `[0,1]^d` the corner is supported on the `2^d` corners
/// of the cell containing `y`, and its expectation is `y`.
pub fn randomized_grid_round(y: &[f64], cell_side: f64, sigma: &[f64]) -> Result<GridCorner> {
    if !(cell_side > 0.0 && cell_side.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "cell side must be positive, got {cell_side}"
        )));
    }
    if y.len() != sigma.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: sigma.len(),
        });
    }
    if let Some(s) = sigma.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::InvalidParameter(format!(
            "shift coordinate {s} outside [0, 1]"
        )));
    }
    let corner = y
        .iter()
        .zip(sigma)
        .map(|(&yj, &sj)| to_grid_int(((yj + cell_side * sj) / cell_side).floor()))
        .collect::<Result<_>>()?;
    Ok(GridCorner { corner, cell_side })
}
