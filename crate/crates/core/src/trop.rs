//! The integral piecewise-affine structure on the tropicalisation of a pair.
//!
//! The skeleton is a cone over a circle, glued from the cones of the toric
//! model's fan.  Points are always stored in cone-local coordinates: a point
//! of cone `i` is `a·v_i + b·v_{i+1}` with `a, b ≥ 0`.  There is no global
//! chart — for charge > 0 the structure has monodromy — so every comparison
//! between charts goes through an explicit crossing matrix.
//!
//! Crossing ray `v_r` counterclockwise re-expresses coordinates using the
//! glued relation `v_{r−1} + v_{r+1} = −(D_r·D_r)·v_r`, with the
//! self-intersection taken on the blown-up surface.  For a toric pair the
//! relation is the fan relation and developing any loop gives the identity;
//! each blowup bends the structure and leaves a nontrivial total monodromy.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{det2, m2_mul, M2, V2};
use crate::num::{IntScalar, Rational};
use crate::pair::LooijengaPair;

/// A point of the skeleton in cone-local coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TropPoint<I: IntScalar> {
    pub cone: usize,
    pub a: Rational<I>,
    pub b: Rational<I>,
}

impl<I: IntScalar> TropPoint<I> {
    /// Integral points are the ones with integer coordinates (cones are
    /// smooth, so this is chart-independent).
    pub fn is_integral(&self) -> bool {
        self.a.is_integer() && self.b.is_integer()
    }

    pub fn is_origin(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

/// The skeleton of a pair: fan rays plus blown-up self-intersections.
#[derive(Clone, Debug)]
pub struct Tropical<I> {
    rays: Vec<V2<I>>,
    self_int: Vec<I>,
}

/// One piecewise-linear lower-bound constraint: on cone `i` the functional
/// `coeffs[i]·(a, b)` must be at least `min`.
#[derive(Clone, Debug)]
pub struct PLConstraint<I: IntScalar> {
    pub coeffs: Vec<[Rational<I>; 2]>,
    pub min: Rational<I>,
}

impl<I: IntScalar> PLConstraint<I> {
    pub fn lower(coeffs: Vec<[Rational<I>; 2]>, min: Rational<I>) -> Self {
        PLConstraint { coeffs, min }
    }

    /// Upper-bound form `ℓ(p) ≤ max`, stored negated.
    pub fn upper(coeffs: Vec<[Rational<I>; 2]>, max: Rational<I>) -> Self {
        PLConstraint {
            coeffs: coeffs.into_iter().map(|[x, y]| [-x, -y]).collect(),
            min: -max,
        }
    }

    fn eval(&self, cone: usize, a: &Rational<I>, b: &Rational<I>) -> Rational<I> {
        self.coeffs[cone][0].clone() * a.clone() + self.coeffs[cone][1].clone() * b.clone()
    }
}

impl<I: IntScalar> Tropical<I> {
    pub fn new(pair: &LooijengaPair<I>) -> Self {
        let n = pair.fan().len();
        Tropical {
            rays: pair.fan().rays().to_vec(),
            self_int: (0..n).map(|i| pair.boundary_self_intersection(i)).collect(),
        }
    }

    /// Number of rays (= cones).
    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ray(&self, r: usize) -> &V2<I> {
        &self.rays[r % self.rays.len()]
    }

    /// `D_r²` on the blown-up surface — the bending of the structure at ray r.
    pub fn bend(&self, r: usize) -> &I {
        &self.self_int[r % self.self_int.len()]
    }

    /// Build a normalized point.  Rejects negative coordinates; points on a
    /// ray are stored in the counterclockwise cone (`b = 0`), the origin in
    /// cone 0.
    pub fn point(&self, cone: usize, a: Rational<I>, b: Rational<I>) -> Result<TropPoint<I>> {
        let n = self.rays.len();
        if cone >= n {
            return Err(Error::ConeOutOfRange { index: cone, rays: n });
        }
        if a.is_negative() || b.is_negative() {
            return Err(Error::NegativeTropCoordinate(format!("({a}, {b})")));
        }
        Ok(self.normalize(TropPoint { cone, a, b }))
    }

    /// Canonical representative: `b = 0` points live on their own ray's
    /// cone, the origin lives in cone 0.  Idempotent.
    pub fn normalize(&self, p: TropPoint<I>) -> TropPoint<I> {
        let n = self.rays.len();
        if p.a.is_zero() && p.b.is_zero() {
            return TropPoint { cone: 0, a: p.a, b: p.b };
        }
        if p.a.is_zero() {
            // on ray v_{cone+1}: represent there
            return TropPoint { cone: (p.cone + 1) % n, a: p.b, b: p.a };
        }
        p
    }

    /// Matrix re-expressing cone-(r−1) coordinates in cone-r coordinates
    /// (crossing ray `v_r` counterclockwise).  Determinant 1; sends the ray
    /// itself, `(0,1)`, to `(1,0)`.
    pub fn crossing_ccw(&self, r: usize) -> M2<I> {
        let d = self.bend(r).clone();
        [[-d, I::one()], [-I::one(), I::zero()]]
    }

    /// Inverse of [`Self::crossing_ccw`]: cone-r coordinates in cone-(r−1)
    /// coordinates.
    pub fn crossing_cw(&self, r: usize) -> M2<I> {
        let d = self.bend(r).clone();
        [[I::zero(), -I::one()], [I::one(), -d]]
    }

    /// Transport a point across an adjacent ray, returning the target cone
    /// and the raw coordinates there.  Coordinates may be negative when the
    /// point is interior to its cone; that is the extension of the adjacent
    /// chart, not a [`TropPoint`].
    pub fn transport_across_ray(
        &self,
        p: &TropPoint<I>,
        ray: usize,
    ) -> Result<(usize, [Rational<I>; 2])> {
        let n = self.rays.len();
        if ray >= n {
            return Err(Error::ConeOutOfRange { index: ray, rays: n });
        }
        let up = ray; // cone just counterclockwise of the ray
        let down = (ray + n - 1) % n; // cone just clockwise
        if p.cone == down {
            Ok((up, apply(&self.crossing_ccw(ray), &p.a, &p.b)))
        } else if p.cone == up {
            Ok((down, apply(&self.crossing_cw(ray), &p.a, &p.b)))
        } else {
            Err(Error::ConeOutOfRange { index: p.cone, rays: n })
        }
    }

    /// Develop a full counterclockwise loop starting (and ending) in the
    /// given cone.  Identity exactly when the pair is toric.
    pub fn total_monodromy(&self, start_cone: usize) -> M2<I> {
        let n = self.rays.len();
        let mut m = crate::linalg::m2_identity();
        for k in 1..=n {
            m = m2_mul(&self.crossing_ccw((start_cone + k) % n), &m);
        }
        m
    }

    /// Locate a nonzero vector of the toric model plane in the fan: returns
    /// the containing cone and the cone-local coordinates.  Boundary rule as
    /// in [`Self::normalize`].
    pub fn cone_of_vector(&self, x: &[Rational<I>; 2]) -> (usize, [Rational<I>; 2]) {
        let n = self.rays.len();
        if x[0].is_zero() && x[1].is_zero() {
            return (0, [Rational::zero(), Rational::zero()]);
        }
        for i in 0..n {
            let vi = ray_rat(&self.rays[i]);
            let vn = ray_rat(&self.rays[(i + 1) % n]);
            // x = a·v_i + b·v_{i+1} with det(v_i, v_{i+1}) = 1
            let a = det2(x, &vn);
            let b = det2(&vi, x);
            if a.is_positive() && !b.is_negative() {
                return (i, [a, b]);
            }
        }
        unreachable!("complete fan covers the plane");
    }

    /// Toric-plane position of a point (chart-dependent for charge > 0, but
    /// canonical per cone).
    pub fn embed(&self, p: &TropPoint<I>) -> [Rational<I>; 2] {
        let vi = ray_rat(&self.rays[p.cone]);
        let vn = ray_rat(&self.rays[(p.cone + 1) % self.rays.len()]);
        [
            p.a.clone() * vi[0].clone() + p.b.clone() * vn[0].clone(),
            p.a.clone() * vi[1].clone() + p.b.clone() * vn[1].clone(),
        ]
    }

    /// All integral points satisfying every constraint, with cone-local
    /// `a + b ≤ bound`, in canonical order (cone, then lexicographic).
    ///
    /// Fails with an unboundedness error when some cone admits a recession
    /// direction along which every constraint stays satisfiable.
    pub fn integral_points(
        &self,
        constraints: &[PLConstraint<I>],
        bound: usize,
    ) -> Result<Vec<TropPoint<I>>> {
        let n = self.rays.len();
        for c in constraints {
            if c.coeffs.len() != n {
                return Err(Error::BadPairInput(format!(
                    "constraint covers {} cones, fan has {n}",
                    c.coeffs.len()
                )));
            }
        }
        self.check_bounded(constraints)?;
        let mut out = Vec::new();
        for cone in 0..n {
            for a in 0..=bound {
                for b in 0..=bound.saturating_sub(a) {
                    if a == 0 && (b > 0 || cone != 0) {
                        continue; // ray points belong to their own cone; origin to cone 0
                    }
                    let (ar, br) = (
                        Rational::from_integer(I::of(a as i64)),
                        Rational::from_integer(I::of(b as i64)),
                    );
                    if constraints.iter().all(|c| c.eval(cone, &ar, &br) >= c.min) {
                        out.push(TropPoint { cone, a: ar, b: br });
                    }
                }
            }
        }
        Ok(out)
    }

    fn check_bounded(&self, constraints: &[PLConstraint<I>]) -> Result<()> {
        let n = self.rays.len();
        for cone in 0..n {
            // candidate recession directions: the cone edges plus every
            // constraint boundary, clipped to the non-negative quadrant
            let mut cands: Vec<[Rational<I>; 2]> =
                vec![[Rational::one(), Rational::zero()], [Rational::zero(), Rational::one()]];
            for c in constraints {
                let [x, y] = c.coeffs[cone].clone();
                for d in [[-y.clone(), x.clone()], [y, -x]] {
                    if !d[0].is_negative() && !d[1].is_negative() && !(d[0].is_zero() && d[1].is_zero())
                    {
                        cands.push(d);
                    }
                }
            }
            for d in cands {
                if constraints
                    .iter()
                    .all(|c| !c.eval(cone, &d[0], &d[1]).is_negative())
                {
                    return Err(Error::BadPairInput(format!(
                        "region is unbounded along ({}, {}) in cone {cone}",
                        d[0], d[1]
                    )));
                }
            }
        }
        Ok(())
    }
}

fn apply<I: IntScalar>(m: &M2<I>, a: &Rational<I>, b: &Rational<I>) -> [Rational<I>; 2] {
    let lift = |x: &I| Rational::from_integer(x.clone());
    [
        lift(&m[0][0]) * a.clone() + lift(&m[0][1]) * b.clone(),
        lift(&m[1][0]) * a.clone() + lift(&m[1][1]) * b.clone(),
    ]
}

fn ray_rat<I: IntScalar>(v: &V2<I>) -> [Rational<I>; 2] {
    [Rational::from_integer(v[0].clone()), Rational::from_integer(v[1].clone())]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::m2_identity;
    use crate::num::rat;
    use crate::Int;

    fn p2(blow: &[usize]) -> Tropical<Int> {
        Tropical::new(&LooijengaPair::of(&[(1, 0), (0, 1), (-1, -1)], blow).unwrap())
    }

    fn quadric() -> Tropical<Int> {
        Tropical::new(
            &LooijengaPair::of(&[(1, 0), (0, 1), (-1, 0), (0, -1)], &[0, 0, 0, 0]).unwrap(),
        )
    }

    #[test]
    fn crossing_fixes_the_ray_and_inverts() {
        let t = p2(&[0, 0, 0]);
        for r in 0..3 {
            let ccw = t.crossing_ccw(r);
            let cw = t.crossing_cw(r);
            assert_eq!(m2_mul(&ccw, &cw), m2_identity::<Int>());
            // the ray itself: (0,1) in the clockwise chart, (1,0) in its own
            assert_eq!(crate::linalg::m2_apply(&ccw, &[0, 1]), [1, 0]);
        }
    }

    #[test]
    fn toric_monodromy_is_trivial() {
        for t in [
            p2(&[0, 0, 0]),
            quadric(),
            Tropical::new(&LooijengaPair::of(&[(1, 0), (0, 1), (-1, 1), (0, -1)], &[0; 4]).unwrap()),
            Tropical::new(&LooijengaPair::of(&[(1, 0), (0, 1), (-1, 2), (0, -1)], &[0; 4]).unwrap()),
        ] {
            for start in 0..t.len() {
                assert_eq!(t.total_monodromy(start), m2_identity::<Int>());
            }
        }
    }

    #[test]
    fn one_blowup_bends_the_monodromy() {
        let t = p2(&[1, 0, 0]);
        let m = t.total_monodromy(0);
        assert_ne!(m, m2_identity::<Int>());
        // unipotent: a single bend gives a shear with trace 2, det 1
        assert_eq!(m[0][0] + m[1][1], 2);
        assert_eq!(crate::linalg::m2_det(&m), 1);
    }

    #[test]
    fn point_normalization() {
        let t = quadric();
        // on-ray point migrates to its own cone
        let p = t.point(1, rat(0, 1), rat(5, 2)).unwrap();
        assert_eq!(p, TropPoint { cone: 2, a: rat::<Int>(5, 2), b: rat(0, 1) });
        // origin is canonical in cone 0
        let o = t.point(3, rat(0, 1), rat(0, 1)).unwrap();
        assert_eq!(o.cone, 0);
        assert!(o.is_origin());
        // idempotent
        assert_eq!(t.normalize(p.clone()), p);
        // negative coordinates refused
        assert!(t.point(0, rat(-1, 2), rat(0, 1)).is_err());
    }

    #[test]
    fn transport_round_trip_bulk() {
        let t = p2(&[2, 1, 0]);
        let mut state = 0x9E37_79B9_7F4A_7C15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..10_000 {
            let cone = (next() % 3) as usize;
            let a = rat::<Int>((next() % 50) as i64, 1 + (next() % 7) as i64);
            let b = rat::<Int>((next() % 50) as i64, 1 + (next() % 7) as i64);
            let p = t.point(cone, a, b).unwrap();
            // cross the counterclockwise boundary ray and come back
            let ray = (p.cone + 1) % 3;
            let (c1, coords) = t.transport_across_ray(&p, ray).unwrap();
            assert_eq!(c1, ray);
            let back = crate::trop::apply(&t.crossing_cw(ray), &coords[0], &coords[1]);
            assert_eq!(back, [p.a.clone(), p.b.clone()]);
        }
    }

    #[test]
    fn transport_requires_adjacency() {
        let t = quadric();
        let p = t.point(0, rat(1, 1), rat(1, 1)).unwrap();
        assert!(t.transport_across_ray(&p, 2).is_err());
        assert!(t.transport_across_ray(&p, 1).is_ok());
        assert!(t.transport_across_ray(&p, 0).is_ok());
    }

    #[test]
    fn locating_plane_vectors() {
        let t = quadric();
        let (c, ab) = t.cone_of_vector(&[rat(3, 1), rat(2, 1)]);
        assert_eq!(c, 0);
        assert_eq!(ab, [rat::<Int>(3, 1), rat(2, 1)]);
        // on a ray: normalized to that ray's cone
        let (c, ab) = t.cone_of_vector(&[rat(0, 1), rat(7, 3)]);
        assert_eq!(c, 1);
        assert_eq!(ab, [rat::<Int>(7, 3), rat(0, 1)]);
        let (c, ab) = t.cone_of_vector(&[rat(-5, 1), rat(-1, 1)]);
        assert_eq!(c, 2);
        assert_eq!(ab, [rat::<Int>(5, 1), rat(1, 1)]);
        // embed is the inverse
        let p = t.point(2, rat(5, 1), rat(1, 1)).unwrap();
        assert_eq!(t.embed(&p), [rat::<Int>(-5, 1), rat(-1, 1)]);
    }

    #[test]
    fn integral_points_simplex() {
        let t = p2(&[0, 0, 0]);
        // a + b ≤ 1 on every cone: the origin plus one primitive point per ray
        let c = PLConstraint::upper(vec![[rat(1, 1), rat(1, 1)]; 3], rat(1, 1));
        let pts = t.integral_points(&[c], 4).unwrap();
        assert_eq!(pts.len(), 4);
        assert!(pts[0].is_origin());
        for (i, p) in pts.iter().skip(1).enumerate() {
            assert_eq!(p.cone, i);
            assert_eq!((p.a.clone(), p.b.clone()), (rat::<Int>(1, 1), rat(0, 1)));
        }
        // infeasible bound: empty
        let c = PLConstraint::upper(vec![[rat(1, 1), rat(1, 1)]; 3], rat(-1, 1));
        assert!(t.integral_points(&[c], 4).unwrap().is_empty());
    }

    #[test]
    fn unbounded_region_is_an_error() {
        let t = p2(&[0, 0, 0]);
        // no constraints at all: every direction recedes
        assert!(t.integral_points(&[], 4).is_err());
        // bounded in one direction only
        let c = PLConstraint::upper(vec![[rat(1, 1), rat(0, 1)]; 3], rat(10, 1));
        assert!(t.integral_points(&[c], 4).is_err());
    }

    #[test]
    fn integral_points_canonical_order_dedupes_rays() {
        let t = quadric();
        let c = PLConstraint::upper(vec![[rat(1, 1), rat(1, 1)]; 4], rat(2, 1));
        let pts = t.integral_points(&[c], 8).unwrap();
        // count: origin + per cone {(1,0),(2,0),(1,1)} = 1 + 4·3
        assert_eq!(pts.len(), 13);
        // no duplicates under normalization
        let mut seen = std::collections::BTreeSet::new();
        for p in &pts {
            assert!(seen.insert((p.cone, p.a.clone(), p.b.clone())));
            assert!(p.is_integral());
        }
        // canonical order: cones ascending, coords lexicographic
        let mut sorted = pts.clone();
        sorted.sort_by_key(|p| (p.cone, p.a.clone(), p.b.clone()));
        assert_eq!(pts, sorted);
    }
}
