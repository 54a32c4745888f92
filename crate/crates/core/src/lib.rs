//! Exact-arithmetic toolkit for two-dimensional Looijenga pairs.
//!
//! A Looijenga pair `(X, E)` is a smooth rational projective surface together
//! with an anticanonical cycle of rational curves.  We describe such a pair by
//! a *toric model*: a smooth complete fan in `Z^2` plus a count of non-toric
//! blowups on each boundary divisor.  From that combinatorial seed the crate
//! computes, over exact integers and rationals throughout:
//!
//! * the Picard lattice with its intersection form, Riemann-Roch, and a
//!   search for positive (ample-like) divisors ([`pair`]);
//! * the integral affine structure on the tropicalisation `B` of the pair,
//!   with charts, parallel transport and monodromy ([`trop`]);
//! * the canonical scattering diagram, completed order by order until it is
//!   consistent ([`scatter`]);
//! * broken lines, theta functions, and the structure constants of the
//!   resulting graded algebra ([`theta`]);
//! * the multigraded coordinate ring ("Cox ring") picture: polygon slices,
//!   Hilbert-style point counts, and the dictionary with lattice points
//!   ([`cox`]);
//! * a small standalone variation-of-GIT library for torus actions of rank
//!   at most three: GIT fans, chambers, stability ([`vgit`]).
//!
//! All lattice and rational arithmetic is generic over the integer scalar via
//! [`num::IntScalar`]; the crate-root aliases [`Int`] and [`Rat`] fix the
//! default concrete choice (`i64` and `Ratio<i64>`).  Swapping in
//! `num_bigint::BigInt` is a one-line change at the call site.

pub mod classring;
pub mod cox;
pub mod error;
pub mod json;
pub mod linalg;
pub mod num;
pub mod pair;
pub mod scatter;
pub mod theta;
pub mod trop;
pub mod vgit;

pub use error::Error;
pub use num::{IntScalar, Rational, Scalar};

/// Default integer scalar.  All bundled examples fit comfortably in 64 bits.
pub type Int = i64;

/// Default exact rational scalar.
pub type Rat = Rational<Int>;
