//! Win-stay lose-shift (Pavlov) dynamics of the iterated prisoner's dilemma on
//! graphs.
//!
//! Every edge carries a unit-rate Poisson clock; when it rings, the two
//! endpoints play one round and update by win-stay lose-shift, which reduces to
//! the transition table `CC→CC, CD→DD, DC→DD, DD→CC`. Starting from all-defect,
//! the process is absorbed in all-cooperate, and the interesting quantity is
//! how long that takes on different graph families.
//!
//! The crate is split into:
//!
//! * [`graph`]: cycles, complete graphs, caterpillar trees, random regular
//!   graphs and the exact `(α, β)`-expansion constant.
//! * [`dynamics`]: continuous-time and sped-up discrete simulation, star
//!   observables and the space-time projection onto a percolation lattice.
//! * [`walk`]: gambler's-ruin and Poisson-tail closed forms together with the
//!   bounds built from them, plus an exact birth-death solver to check them.
//! * [`percolation`]: the four-node block, towers, the oriented lattice, its
//!   planar dual and crossing estimators.
//! * [`harness`]: reproducible, parallel experiment suites with JSON/CSV output.
//!
//! Analytic code is generic over the scalar type (see [`scalar`]); the aliases
//! below fix the common instantiations.

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod graph;
pub mod harness;
pub mod percolation;
pub mod rng;
pub mod scalar;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

/// Arbitrary-precision rational used for exact closed-form checks.
pub type Exact = num_rational::BigRational;

/// Exact value of an expansion ratio `|E(U, Uᶜ)| / vol(U)`.
pub type Ratio = num_rational::Ratio<u64>;

pub type WalkSpecF64 = walk::WalkSpec<f64>;
pub type WalkSpecExact = walk::WalkSpec<Exact>;
pub type StarBoundSpecF64 = walk::StarBoundSpec<f64>;
pub type ExpansionRatesF64 = walk::ExpansionRates<f64>;
pub type AbsorptionF64 = walk::Absorption<f64>;
pub type AbsorptionExact = walk::Absorption<Exact>;
