//! Numerical laboratory for Dixmier traces and finite spectral triples.
//!
//! The crate builds finite-dimensional truncations of summable K-cycles,
//! estimates Dixmier traces with explicit convergence tables, and verifies
//! or refutes trace properties of the associated functionals: the
//! hypertrace property on the algebra, the trace-level Hoelder inequality,
//! and the trace property (or its closed-form failure) on represented
//! differential forms.
//!
//! Layer by layer:
//!
//! * [`operator`] — exact complex operator algebra with structured storage
//!   (diagonal, 2x2-block, banded, circulant) tracked through products;
//! * [`spectral`] — singular values, Hermitian eigendecomposition,
//!   functional calculus, the finite-N product inequality;
//! * [`dixmier`] — ratio/increment trace estimators, cutoff sums in the
//!   Dirac eigenbasis, trace-level Hoelder checks;
//! * [`kcycle`] — K-cycle construction and verification, the functional
//!   `phi`, hypertrace defects, the derivation and its flow, regularity
//!   sweeps;
//! * [`forms`] — represented differential forms, the functional `tau`,
//!   monomial enumeration and the trace-defect survey;
//! * [`models`] — the two-block trace-property counterexample and the
//!   circle model, with closed-form expected values and random probes;
//! * [`cli`] — the batch experiment runner behind the `ncglab` binary.
//!
//! The guide in `book/` (compiled as doc-tests via [`book`]) walks through
//! the concepts; `tests/acceptance.rs` pins the quantitative contract.

#![forbid(unsafe_code)]

pub mod book;
pub mod cli;
pub mod dixmier;
pub mod forms;
pub mod kcycle;
pub mod models;
pub mod operator;
pub mod rng;
pub mod spectral;
pub(crate) mod fourier;
