//! Runs the code listings of the guide in `book/` as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/fgn.md")]
pub mod fgn {}
#[doc = include_str!("../../../book/src/coalescence.md")]
pub mod coalescence {}
#[doc = include_str!("../../../book/src/lpp.md")]
pub mod lpp {}
#[doc = include_str!("../../../book/src/fields.md")]
pub mod fields {}
#[doc = include_str!("../../../book/src/statistics.md")]
pub mod statistics {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
