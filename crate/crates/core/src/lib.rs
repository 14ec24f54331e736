//! Relative location tree sketches.
//!
//! A sketch is a bitstring built from `n` points in ℓp^d from which every
//! pairwise distance can be recovered within a factor `1 ± 4ε`, without the
//! points themselves. The Euclidean variant adds a random projection and
//! randomized grid roundings and answers squared distances up to `1 ± O(ε)`
//! with high probability, using fewer bits.
//!
//! ```
//! use rlt_sketch::{Epsilon, Norm, PointSet, build_lp_sketch, QueryContext};
//!
//! let rows = vec![vec![0.0, 0.0], vec![3.0, 4.0], vec![10.0, 1.0]];
//! let ps = PointSet::normalized(rows, Norm::Lp(2)).unwrap();
//! let bits = build_lp_sketch(&ps, Epsilon::from_f64(0.1).unwrap()).unwrap();
//! let ctx = QueryContext::from_bits(&bits).unwrap();
//! let d = ctx.estimate(0, 1).unwrap();
//! assert!((d - 5.0).abs() <= 0.4 * 5.0);
//! ```

pub mod codec;
pub mod error;
pub mod estimate;
pub mod euclid;
pub mod harness;
pub mod metric;
pub mod tree;

pub use codec::{decode, encode, SizeReport, SketchBits, SketchContents, SketchHeader};
pub use error::{Error, Result};
pub use estimate::{QueryContext, QueryStats};
pub use euclid::{build_euclidean_sketch, JlConfig};
pub use metric::{lp_distance, round_to_net, randomized_grid_round, Epsilon, GridCorner, NetElement, Norm, PointSet};
pub use tree::RelativeLocationTree;

/// Builds and encodes an ℓp sketch.
pub fn build_lp_sketch(ps: &PointSet, eps: Epsilon) -> Result<SketchBits> {
    let tree = RelativeLocationTree::build(ps, eps)?;
    encode(&SketchContents::from_tree(&tree, None)?)
}
