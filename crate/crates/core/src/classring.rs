//! Truncated group ring of curve classes with Laurent `z`-monomials.
//!
//! Elements are finite integer sums `Σ c · t^γ · z^m` where `γ` is a curve
//! class (stored as its intersection functional) and `m ∈ Z²` a Laurent
//! exponent in the toric model's cocharacter plane.  A fixed positive class
//! grades everything by `deg γ = A·γ`; multiplication drops terms of degree
//! beyond the cutoff.  Wall functions, wall-crossing automorphisms, and path
//! products all live here.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::linalg::{v2_add, vadd, vdot, V2};
use crate::num::IntScalar;
use crate::pair::CurveClass;

/// Monomial key: curve class then `z`-exponent, ordered for determinism.
pub type MonKey<I> = (CurveClass<I>, V2<I>);

/// A truncated ring element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingElt<I: IntScalar> {
    terms: BTreeMap<MonKey<I>, I>,
}

/// The ring context: grading class and truncation order.
#[derive(Clone, Debug)]
pub struct ClassRing<I> {
    /// the grading divisor class (some positive `W` from the pair)
    pub ample: Vec<I>,
    /// truncation order: classes of degree > `order` are dropped
    pub order: usize,
}

impl<I: IntScalar> ClassRing<I> {
    pub fn new(ample: Vec<I>, order: usize) -> Self {
        ClassRing { ample, order }
    }

    /// Degree of a curve class against the grading divisor.
    pub fn deg(&self, gamma: &[I]) -> I {
        vdot(&self.ample, gamma)
    }

    fn keeps(&self, gamma: &[I]) -> bool {
        self.deg(gamma) <= I::of(self.order as i64)
    }

    pub fn zero(&self) -> RingElt<I> {
        RingElt { terms: BTreeMap::new() }
    }

    pub fn one(&self) -> RingElt<I> {
        self.monomial(I::one(), vec![I::zero(); self.ample.len()], [I::zero(), I::zero()])
    }

    /// `c · t^γ · z^m`.
    pub fn monomial(&self, c: I, gamma: CurveClass<I>, m: V2<I>) -> RingElt<I> {
        let mut terms = BTreeMap::new();
        if !c.is_zero() && self.keeps(&gamma) {
            terms.insert((gamma, m), c);
        }
        RingElt { terms }
    }

    /// Plain `z^m`.
    pub fn z_mon(&self, m: V2<I>) -> RingElt<I> {
        self.monomial(I::one(), vec![I::zero(); self.ample.len()], m)
    }

    pub fn add(&self, a: &RingElt<I>, b: &RingElt<I>) -> RingElt<I> {
        let mut terms = a.terms.clone();
        for (k, c) in &b.terms {
            let entry = terms.entry(k.clone()).or_insert_with(I::zero);
            *entry = entry.clone() + c.clone();
            if entry.is_zero() {
                terms.remove(k);
            }
        }
        RingElt { terms }
    }

    pub fn neg(&self, a: &RingElt<I>) -> RingElt<I> {
        RingElt { terms: a.terms.iter().map(|(k, c)| (k.clone(), -c.clone())).collect() }
    }

    pub fn sub(&self, a: &RingElt<I>, b: &RingElt<I>) -> RingElt<I> {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &RingElt<I>, b: &RingElt<I>) -> RingElt<I> {
        let mut terms: BTreeMap<MonKey<I>, I> = BTreeMap::new();
        for ((ga, ma), ca) in &a.terms {
            for ((gb, mb), cb) in &b.terms {
                let gamma = vadd(ga, gb);
                if !self.keeps(&gamma) {
                    continue;
                }
                let key = (gamma, v2_add(ma, mb));
                let entry = terms.entry(key.clone()).or_insert_with(I::zero);
                *entry = entry.clone() + ca.clone() * cb.clone();
                if entry.is_zero() {
                    terms.remove(&key);
                }
            }
        }
        RingElt { terms }
    }

    /// `a^e` for any integer `e`.  Negative powers require `a` to be `1 +
    /// (positive-degree terms)`; the inverse is the truncated geometric
    /// series.
    pub fn pow(&self, a: &RingElt<I>, e: i64) -> RingElt<I> {
        if e == 0 {
            return self.one();
        }
        let base = if e > 0 { a.clone() } else { self.inv_unit(a) };
        // binary powering; exponents stay tiny but it costs nothing
        let mut acc = self.one();
        let mut sq = base;
        let mut left = e.unsigned_abs();
        while left > 0 {
            if left & 1 == 1 {
                acc = self.mul(&acc, &sq);
            }
            left >>= 1;
            if left > 0 {
                sq = self.mul(&sq, &sq);
            }
        }
        acc
    }

    /// Inverse of `1 + h` with `h` of strictly positive degree.
    fn inv_unit(&self, a: &RingElt<I>) -> RingElt<I> {
        let one = self.one();
        let h = self.sub(a, &one);
        assert!(
            a.coeff_at(&one.terms.keys().next().unwrap().clone()).is_one()
                && h.terms.keys().all(|(g, _)| self.deg(g).is_positive()),
            "inverse requires a unit of the form 1 + (positive degree)"
        );
        // Σ (−h)^j ; terminates because deg(h^j) ≥ j
        let mut acc = self.one();
        let mut pw = self.one();
        let neg_h = self.neg(&h);
        for _ in 0..self.order {
            pw = self.mul(&pw, &neg_h);
            if pw.is_zero() {
                break;
            }
            acc = self.add(&acc, &pw);
        }
        acc
    }
}

impl<I: IntScalar> RingElt<I> {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms.iter().all(|((g, m), c)| {
                c.is_one()
                    && g.iter().all(Zero::is_zero)
                    && m[0].is_zero()
                    && m[1].is_zero()
            })
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MonKey<I>, &I)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff_at(&self, key: &MonKey<I>) -> I {
        self.terms.get(key).cloned().unwrap_or_else(I::zero)
    }

    /// Largest coefficient magnitude, as a quick overflow sentinel in tests.
    pub fn max_coeff(&self) -> i64 {
        self.terms
            .values()
            .map(|c| c.abs().to_i64().unwrap_or(i64::MAX))
            .max()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Int;

    // rank-2 class lattice, grading by (1, 1), cutoff 4
    fn ring() -> ClassRing<Int> {
        ClassRing::new(vec![1, 1], 4)
    }

    fn e1(r: &ClassRing<Int>) -> RingElt<Int> {
        // 1 + t^{(1,0)} z^{(-1,0)}
        r.add(&r.one(), &r.monomial(1, vec![1, 0], [-1, 0]))
    }

    #[test]
    fn one_and_zero() {
        let r = ring();
        assert!(r.one().is_one());
        assert!(r.zero().is_zero());
        assert_eq!(r.add(&r.one(), &r.neg(&r.one())), r.zero());
        assert!(r.mul(&r.one(), &e1(&r)) == e1(&r));
    }

    #[test]
    fn multiplication_truncates_by_degree() {
        let r = ring();
        let f = e1(&r);
        // f^5 would have a degree-5 term; cutoff 4 keeps degrees 0..4
        let p = r.pow(&f, 5);
        for ((g, _), _) in p.terms() {
            assert!(r.deg(g) <= 4);
        }
        // binomial coefficients survive under the cutoff: coefficient of
        // t^{(2,0)} z^{(-2,0)} in (1+u)^5 is 10
        assert_eq!(p.coeff_at(&(vec![2, 0], [-2, 0])), 10);
    }

    #[test]
    fn geometric_series_inverse() {
        let r = ring();
        let f = e1(&r);
        let inv = r.pow(&f, -1);
        assert!(r.mul(&f, &inv).is_one());
        assert!(r.mul(&inv, &f).is_one());
        // alternating signs of the geometric series
        assert_eq!(inv.coeff_at(&(vec![3, 0], [-3, 0])), -1);
    }

    #[test]
    fn power_laws() {
        let r = ring();
        let f = e1(&r);
        let g = r.add(&r.one(), &r.monomial(2, vec![0, 1], [0, -1]));
        assert_eq!(r.pow(&f, 3), r.mul(&f, &r.mul(&f, &f)));
        assert_eq!(r.mul(&r.pow(&f, 2), &r.pow(&f, -2)), r.one());
        // commutativity and distributivity spot checks
        assert_eq!(r.mul(&f, &g), r.mul(&g, &f));
        let h = r.add(&f, &g);
        assert_eq!(r.mul(&h, &f), r.add(&r.mul(&f, &f), &r.mul(&g, &f)));
    }

    #[test]
    #[should_panic(expected = "unit")]
    fn inverse_of_non_unit_panics() {
        let r = ring();
        let bad = r.monomial(2, vec![0, 0], [1, 0]);
        let _ = r.pow(&bad, -1);
    }
}
