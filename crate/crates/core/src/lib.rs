//! Exact verification tools for variational-inequality operator properties.
//!
//! * [`pwcalc`]: exact calculus for piecewise-linear functions on `[0, 1]`
//!   and the p = 3 Laplacian pairing.
//! * [`gen`]: the sawtooth family, scaled hats and ℓ² unit vectors.
//! * [`proplab`]: equilibrium gaps and certificates for Ky–Fan
//!   hemicontinuity, the Brezis pseudomonotonicity premise, monotonicity
//!   and boundedness along explicit sequences.
//! * [`visolve`]: extragradient solver for the discretised problem.

pub mod error;
pub mod exact;
pub mod gen;
pub mod proplab;
pub mod pwcalc;
pub mod sample;
pub mod visolve;

pub use error::{Error, Result};
pub use exact::{parse_rational, ExactReal, Rational};
pub use gen::{scaled_hat, sawtooth, L2SeqVector, Point, SequenceSpec, SparseL2};
pub use proplab::{Certificate, Exactness, PairingSequenceReport, Property, Verdict};
pub use pwcalc::{PiecewiseConstFn, PiecewiseLinearFn, TestFunction};
pub use visolve::{DiscreteVI, FeasibleSet, SolveResult};
