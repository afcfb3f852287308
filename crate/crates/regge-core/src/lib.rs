// Index loops mirror the tensor notation; negated float comparisons are
// deliberate so that NaN fails the check.
#![allow(
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::type_complexity
)]

pub mod elemgeom;
pub mod frames;
pub mod functional;
pub mod gauss2d;
pub mod mesh;
pub mod meshes;
pub mod metric;
pub mod poly;
pub mod taylor;
