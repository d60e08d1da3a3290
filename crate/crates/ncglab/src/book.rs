//! The guide chapters (book/src/*.md), attached as module documentation so
//! `cargo test --doc` compiles and runs every code block in the book. The
//! rendered book is built separately with `mdbook build book`; this module
//! is what keeps the two from drifting apart.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/operators.md")]
pub mod operators {}

#[doc = include_str!("../../../book/src/spectra.md")]
pub mod spectra {}

#[doc = include_str!("../../../book/src/estimators.md")]
pub mod estimators {}

#[doc = include_str!("../../../book/src/kcycles.md")]
pub mod kcycles {}

#[doc = include_str!("../../../book/src/forms.md")]
pub mod forms {}

#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}

#[doc = include_str!("../../../book/src/running.md")]
pub mod running {}
