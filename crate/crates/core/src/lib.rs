// Negated comparisons below are deliberate: they treat NaN as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod polycore;
pub mod picard;
pub mod aklines;
pub mod nodal;
pub mod delliptic;
pub mod weylmetrics;
