//! Scalar abstraction: exact integers and rationals.
//!
//! Every computation in this crate is exact.  The integer scalar is pluggable
//! — `i64` by default, `num_bigint::BigInt` when coordinates outgrow machine
//! words — and rationals are `num_rational::Ratio` over the same scalar.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

/// Exact scalar with ring arithmetic and a total order.  Matrices accept any
/// of these; both the integer scalars and their rationals qualify.
pub trait Scalar: Signed + Ord + Clone + Debug + Display + 'static {}

impl<T> Scalar for T where T: Signed + Ord + Clone + Debug + Display + 'static {}

/// Exact signed integer scalar.
///
/// Blanket-implemented for anything with the usual ring traits plus hashing
/// and conversion from small literals: `i64`, `i128`, `BigInt`, ...
pub trait IntScalar:
    Scalar + Integer + Hash + FromPrimitive + ToPrimitive
{
    /// Build a scalar from a small literal.  Panics only if the scalar type
    /// cannot represent the value, which no sane instantiation hits.
    fn of(n: i64) -> Self {
        Self::from_i64(n).expect("literal out of range for integer scalar")
    }
}

impl<T> IntScalar for T where T: Scalar + Integer + Hash + FromPrimitive + ToPrimitive {}

/// Exact rational number over the integer scalar `I`.
pub type Rational<I> = Ratio<I>;

/// `n/d` as a rational.
pub fn rat<I: IntScalar>(n: i64, d: i64) -> Rational<I> {
    Ratio::new(I::of(n), I::of(d))
}

/// Embed an integer into the rationals.
pub fn to_rat<I: IntScalar>(n: &I) -> Rational<I> {
    Ratio::from_integer(n.clone())
}

/// Integer vector of small literals, handy in tests and seeds.
pub fn ivec<I: IntScalar>(xs: &[i64]) -> Vec<I> {
    xs.iter().map(|&x| I::of(x)).collect()
}
