//! Canonical scattering diagrams in the plane of the toric model.
//!
//! Walls live in the cocharacter plane `Z²`: one full line through the origin
//! along `v_i` for each non-toric blowup on the ray `v_i`, carrying the
//! function `1 + t^{ℰ} z^{−v_i}`, plus whatever outgoing rays consistency
//! forces.  Crossing a wall with function `f` is the ring automorphism
//!
//! ```text
//!     z^m  ↦  z^m · f^{⟨n, m⟩}
//! ```
//!
//! where `n` is the primitive normal to the wall chosen *negative* on the
//! direction of travel.  A diagram is consistent at order `k` when the
//! ordered product of all crossings along a counterclockwise loop around the
//! origin is the identity modulo curve classes of degree greater than `k`.
//!
//! [`Diagram::complete`] restores consistency order by order: the lowest
//! degree where the loop fails to close determines, for each offending
//! monomial `t^γ z^m`, a single outgoing ray in direction `−m` whose
//! coefficient is solved exactly from the discrepancy.  The discrepancy of a
//! consistent-below-degree-`ℓ` diagram is always tangent to a rotation at
//! degree `ℓ` (the two generator images pin the same coefficient twice), and
//! we verify rather than trust this: a mismatch or a non-integral
//! coefficient is reported as [`Error::ScatteringInconsistent`].

use std::cmp::Ordering;
use std::collections::BTreeMap;


use crate::classring::{ClassRing, MonKey, RingElt};
use crate::error::{Error, Result};
use crate::linalg::{det2, dot2, v2, v2_neg, v2_primitive, V2};
use crate::num::IntScalar;
use crate::pair::LooijengaPair;

/// Where a wall sits: a full line through the origin, or a ray leaving it.
/// The direction vector is primitive; for a line the two halves `±dir` carry
/// the same function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WallGeom<I> {
    Line(V2<I>),
    Ray(V2<I>),
}

/// A wall: geometry plus its function `1 + Σ c · t^γ · z^{−ℓ·dir}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wall<I: IntScalar> {
    pub geom: WallGeom<I>,
    pub f: RingElt<I>,
}

impl<I: IntScalar> Wall<I> {
    pub fn direction(&self) -> &V2<I> {
        match &self.geom {
            WallGeom::Line(d) | WallGeom::Ray(d) => d,
        }
    }

    pub fn is_line(&self) -> bool {
        matches!(self.geom, WallGeom::Line(_))
    }

    /// Validate the wall shape: primitive direction, and every non-constant
    /// term of `f` a positive-degree class attached to `z^{−ℓ·dir}`, `ℓ ≥ 1`.
    pub fn check(&self, ring: &ClassRing<I>) -> Result<()> {
        let d = self.direction();
        if d[0].is_zero() && d[1].is_zero() || !d[0].gcd(&d[1]).is_one() {
            return Err(Error::BadPairInput(format!(
                "wall direction ({}, {}) is not primitive",
                d[0], d[1]
            )));
        }
        let one = ring.one();
        let rest = ring.sub(&self.f, &one);
        for ((gamma, m), _) in rest.terms() {
            let along = det2(m, d).is_zero()
                && (dot2(m, d).is_negative())
                && !(m[0].is_zero() && m[1].is_zero());
            if !along {
                return Err(Error::BadPairInput(
                    "wall function has a z-exponent not pointing down the wall".into(),
                ));
            }
            if !ring.deg(gamma).is_positive() {
                return Err(Error::BadPairInput(
                    "wall function has a class of non-positive degree".into(),
                ));
            }
        }
        if !self.f.coeff_at(one.terms().next().unwrap().0).is_one() {
            return Err(Error::BadPairInput("wall function has no constant term 1".into()));
        }
        Ok(())
    }
}

/// Apply the crossing automorphism of a wall with function `f` and chosen
/// normal `n` to an element, term by term.
pub fn cross_wall<I: IntScalar>(
    ring: &ClassRing<I>,
    x: &RingElt<I>,
    f: &RingElt<I>,
    normal: &V2<I>,
) -> RingElt<I> {
    let mut acc = ring.zero();
    for ((gamma, m), c) in x.terms() {
        let e = dot2(normal, m).to_i64().expect("crossing exponent fits in i64");
        let term = ring.monomial(c.clone(), gamma.clone(), m.clone());
        acc = ring.add(&acc, &ring.mul(&term, &ring.pow(f, e)));
    }
    acc
}

// counterclockwise order starting just after `base`: directions parallel to
// `base` come last (a full turn), everything else sorts by exact angle
fn cmp_from_base<I: IntScalar>(base: &V2<I>, a: &V2<I>, b: &V2<I>) -> Ordering {
    let sector = |v: &V2<I>| -> u8 {
        let d = det2(base, v);
        if d.is_zero() && dot2(base, v).is_positive() {
            2
        } else if d.is_positive() {
            0
        } else {
            1
        }
    };
    let (sa, sb) = (sector(a), sector(b));
    sa.cmp(&sb).then_with(|| {
        if sa == 2 {
            Ordering::Equal
        } else {
            I::zero().cmp(&det2(a, b))
        }
    })
}

/// A scattering diagram at a fixed truncation order.
#[derive(Clone, Debug)]
pub struct Diagram<I: IntScalar> {
    ring: ClassRing<I>,
    walls: Vec<Wall<I>>,
    home: V2<I>,
    saw_negative: bool,
}

impl<I: IntScalar> Diagram<I> {
    /// The initial diagram of a pair: one line per blowup, graded by the
    /// given class, truncated at `order`.  The grading class must pair
    /// strictly positively with every exceptional class (otherwise nothing
    /// here terminates meaningfully).
    pub fn initial(pair: &LooijengaPair<I>, ample: &[I], order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::BadOrder(order));
        }
        let pic = pair.pic();
        if ample.len() != pic.rank() {
            return Err(Error::ClassRankMismatch { expected: pic.rank(), got: ample.len() });
        }
        for ((ray, j), e) in pic.exceptional_classes() {
            if !pic.intersection(ample, e).is_positive() {
                return Err(Error::AmpleRejected(format!(
                    "pairing with the exceptional class {} over ray {} is not positive",
                    j + 1,
                    ray + 1
                )));
            }
        }
        let ring = ClassRing::new(ample.to_vec(), order);
        let mut walls = Vec::new();
        for ((ray, _), e) in pic.exceptional_classes() {
            let v = pair.fan().ray(*ray).clone();
            let f = ring.add(
                &ring.one(),
                &ring.monomial(I::one(), pic.to_curve(e), v2_neg(&v)),
            );
            walls.push(Wall { geom: WallGeom::Line(v), f });
        }
        Ok(Diagram { ring, walls, home: pair.fan().ray(0).clone(), saw_negative: false })
    }

    pub fn ring(&self) -> &ClassRing<I> {
        &self.ring
    }

    pub fn order(&self) -> usize {
        self.ring.order
    }

    pub fn walls(&self) -> &[Wall<I>] {
        &self.walls
    }

    /// Walls added by completion (everything after the initial lines).
    pub fn added_walls(&self) -> impl Iterator<Item = &Wall<I>> {
        self.walls.iter().filter(|w| !w.is_line())
    }

    /// Whether completion ever solved a negative wall coefficient.  All
    /// shipped examples stay non-negative; a `true` here is worth a close
    /// look rather than a hard error.
    pub fn has_negative_coefficient(&self) -> bool {
        self.saw_negative
    }

    // every circle crossing, counterclockwise from just after `base`:
    // (position direction, wall index, incoming normal)
    fn loop_crossings(&self, base: &V2<I>) -> Vec<(V2<I>, usize, V2<I>)> {
        let mut ev = Vec::new();
        for (i, w) in self.walls.iter().enumerate() {
            let d = w.direction();
            // at position d the travel direction is d rotated a quarter turn
            // counterclockwise, so the incoming normal is the clockwise one
            let near = [d[1].clone(), -d[0].clone()];
            ev.push((d.clone(), i, near.clone()));
            if w.is_line() {
                ev.push((v2_neg(d), i, v2_neg(&near)));
            }
        }
        ev.sort_by(|a, b| cmp_from_base(base, &a.0, &b.0));
        ev
    }

    /// Apply the full counterclockwise loop based just after `base` to an
    /// element.
    pub fn transport_loop(&self, base: &V2<I>, x: &RingElt<I>) -> RingElt<I> {
        let mut y = x.clone();
        for (_, i, n) in self.loop_crossings(base) {
            y = cross_wall(&self.ring, &y, &self.walls[i].f, &n);
        }
        y
    }

    /// Images of the two coordinate monomials under the loop based just
    /// after `base`.  The loop automorphism is determined by these.
    pub fn path_product(&self, base: &V2<I>) -> [RingElt<I>; 2] {
        [
            self.transport_loop(base, &self.ring.z_mon(v2(1, 0))),
            self.transport_loop(base, &self.ring.z_mon(v2(0, 1))),
        ]
    }

    pub fn is_consistent(&self, base: &V2<I>) -> bool {
        let [a, b] = self.path_product(base);
        a == self.ring.z_mon(v2(1, 0)) && b == self.ring.z_mon(v2(0, 1))
    }

    /// Add outgoing rays, lowest degree first, until the loop closes at this
    /// diagram's truncation order.
    pub fn complete(mut self) -> Result<Self> {
        let base = self.home.clone();
        let gens = [v2::<I>(1, 0), v2::<I>(0, 1)];
        let mut prev = 0usize;
        loop {
            let imgs = self.path_product(&base);
            // discrepancy of each generator: z^{-e} · image − 1
            let mut disc = Vec::with_capacity(2);
            for (img, e) in imgs.iter().zip(&gens) {
                let u = self.ring.mul(img, &self.ring.z_mon(v2_neg(e)));
                disc.push(self.ring.sub(&u, &self.ring.one()));
            }
            if disc.iter().all(RingElt::is_zero) {
                return Ok(self);
            }
            let lowest = disc
                .iter()
                .flat_map(|d| d.terms())
                .map(|((g, _), _)| self.ring.deg(g).to_usize().expect("degree fits usize"))
                .min()
                .unwrap();
            if lowest <= prev {
                return Err(Error::ScatteringInconsistent {
                    order: lowest,
                    detail: "completion made no progress".into(),
                });
            }
            // group the degree-`lowest` failures by monomial, tracking how
            // each generator sees them
            let mut bad: BTreeMap<MonKey<I>, [I; 2]> = BTreeMap::new();
            for (i, d) in disc.iter().enumerate() {
                for ((gamma, m), c) in d.terms() {
                    if self.ring.deg(gamma).to_usize() == Some(lowest) {
                        let slot = bad
                            .entry((gamma.clone(), m.clone()))
                            .or_insert_with(|| [I::zero(), I::zero()]);
                        slot[i] = c.clone();
                    }
                }
            }
            for ((gamma, m), alpha) in bad {
                self.insert_ray(lowest, gamma, m, alpha)?;
            }
            prev = lowest;
        }
    }

    // one new outgoing ray cancelling the discrepancy monomial t^γ z^m seen
    // with coefficients (α_1, α_2) by the two generators
    fn insert_ray(
        &mut self,
        degree: usize,
        gamma: Vec<I>,
        m: V2<I>,
        alpha: [I; 2],
    ) -> Result<()> {
        let stuck = |detail: String| Error::ScatteringInconsistent { order: degree, detail };
        if m[0].is_zero() && m[1].is_zero() {
            return Err(stuck("discrepancy monomial carries no direction".into()));
        }
        let d = v2_primitive(&v2_neg(&m));
        // crossing the new ray first-order adds c·⟨n, e_i⟩ with n = (d_2, −d_1),
        // so c must solve c·d_2 = −α_1 and c·(−d_1) = −α_2 simultaneously
        let div = |num: I, den: &I| -> Option<I> {
            if den.is_zero() || !(num.clone() % den.clone()).is_zero() {
                None
            } else {
                Some(num / den.clone())
            }
        };
        let c = if !d[1].is_zero() {
            div(-alpha[0].clone(), &d[1])
        } else {
            div(alpha[1].clone(), &d[0])
        }
        .ok_or_else(|| stuck("wall coefficient is not an integer".into()))?;
        let ok1 = c.clone() * d[1].clone() == -alpha[0].clone();
        let ok2 = c.clone() * d[0].clone() == alpha[1].clone();
        if !(ok1 && ok2) {
            return Err(stuck(format!(
                "discrepancy at t^{:?} z^({}, {}) is not tangent to a rotation",
                gamma, m[0], m[1]
            )));
        }
        if c.is_negative() {
            self.saw_negative = true;
        }
        let f = self.ring.add(&self.ring.one(), &self.ring.monomial(c, gamma, m));
        let wall = Wall { geom: WallGeom::Ray(d), f };
        debug_assert!(wall.check(&self.ring).is_ok());
        self.walls.push(wall);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pair::LooijengaPair;
    use crate::Int;

    fn p2(blowups: &[usize]) -> LooijengaPair<Int> {
        LooijengaPair::of(&[(1, 0), (0, 1), (-1, -1)], blowups).unwrap()
    }

    fn anticanonical(p: &LooijengaPair<Int>) -> Vec<Int> {
        p.pic().canonical().iter().map(|c| -c).collect()
    }

    #[test]
    fn toric_diagrams_are_empty_and_consistent() {
        for (rays, name) in [
            (vec![(1, 0), (0, 1), (-1, -1)], "plane"),
            (vec![(1, 0), (0, 1), (-1, 0), (0, -1)], "quadric"),
            (vec![(1, 0), (0, 1), (-1, 1), (0, -1)], "first Hirzebruch"),
            (vec![(1, 0), (0, 1), (-1, 2), (0, -1)], "second Hirzebruch"),
        ] {
            let p = LooijengaPair::<Int>::of(&rays, &vec![0; rays.len()]).unwrap();
            let d = Diagram::initial(&p, &anticanonical(&p), 6).unwrap();
            assert!(d.walls().is_empty(), "{name}");
            let d = d.complete().unwrap();
            assert!(d.walls().is_empty(), "{name}");
            for base in [(1, 0), (0, 1), (-1, -1), (2, 1), (-3, 5)] {
                assert!(d.is_consistent(&[base.0, base.1]), "{name} at {base:?}");
            }
        }
    }

    #[test]
    fn single_line_closes_on_its_own() {
        // one blowup: the two crossings of the line cancel exactly
        let p = p2(&[1, 0, 0]);
        let d = Diagram::initial(&p, &anticanonical(&p), 6).unwrap();
        assert_eq!(d.walls().len(), 1);
        assert!(d.walls()[0].is_line());
        assert!(d.is_consistent(&[1, 1]));
        let d = d.complete().unwrap();
        assert_eq!(d.walls().len(), 1);
        assert!(!d.has_negative_coefficient());
    }

    #[test]
    fn crossing_fixes_tangent_monomials_and_double_crossing_cancels() {
        let p = p2(&[1, 0, 0]);
        let d = Diagram::initial(&p, &anticanonical(&p), 6).unwrap();
        let (ring, f) = (d.ring(), &d.walls()[0].f);
        // tangent to the wall along (1, 0): untouched from either side
        let tangent = ring.z_mon([3, 0]);
        assert_eq!(cross_wall(ring, &tangent, f, &[0, -1]), tangent);
        // transverse: picks up exactly one factor of f
        let zm = ring.z_mon([0, 1]);
        assert_eq!(cross_wall(ring, &zm, f, &[0, 1]), ring.mul(&zm, f));
        // crossing back with the opposite normal inverts, on random elements
        let mut state = 0x2545f4914f6cdd1du64;
        let mut rng = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..1000 {
            let m = [(rng() % 19) as Int - 9, (rng() % 19) as Int - 9];
            let x = ring.z_mon(m);
            let there = cross_wall(ring, &x, f, &[0, 1]);
            let back = cross_wall(ring, &there, f, &[0, -1]);
            assert_eq!(back, x);
        }
    }

    #[test]
    fn two_lines_fail_exactly_at_degree_two() {
        // blowups on the first two rays: the loop based just after v_1 sends
        // z^{(1,0)} to z^{(1,0)}(1 − t^{ℰ_1+ℰ_2} z^{(−1,−1)}) and z^{(0,1)}
        // to z^{(0,1)}(1 + the same monomial) before completion
        let p = p2(&[1, 1, 0]);
        let d = Diagram::initial(&p, &anticanonical(&p), 2).unwrap();
        assert_eq!(d.walls().len(), 2);
        let ring = d.ring();
        let [a, b] = d.path_product(&[1, 0]);
        let pic = p.pic();
        let e1 = pic.to_curve(pic.exceptional(0, 0).unwrap());
        let e2 = pic.to_curve(pic.exceptional(1, 0).unwrap());
        let gamma: Vec<Int> = e1.iter().zip(&e2).map(|(a, b)| a + b).collect();
        let expect_a = ring.add(
            &ring.z_mon([1, 0]),
            &ring.monomial(-1, gamma.clone(), [0, -1]),
        );
        let expect_b = ring.add(
            &ring.z_mon([0, 1]),
            &ring.monomial(1, gamma.clone(), [-1, 0]),
        );
        assert_eq!(a, expect_a);
        assert_eq!(b, expect_b);
    }

    #[test]
    fn two_blowups_force_one_diagonal_ray_at_order_two() {
        let p = p2(&[1, 1, 0]);
        let d = Diagram::initial(&p, &anticanonical(&p), 2).unwrap().complete().unwrap();
        assert_eq!(d.walls().len(), 3);
        let new: Vec<_> = d.added_walls().collect();
        assert_eq!(new.len(), 1);
        assert_eq!(new[0].geom, WallGeom::Ray([1, 1]));
        let ring = d.ring();
        let pic = p.pic();
        let e1 = pic.to_curve(pic.exceptional(0, 0).unwrap());
        let e2 = pic.to_curve(pic.exceptional(1, 0).unwrap());
        let gamma: Vec<Int> = e1.iter().zip(&e2).map(|(a, b)| a + b).collect();
        let expect = ring.add(&ring.one(), &ring.monomial(1, gamma, [-1, -1]));
        assert_eq!(new[0].f, expect);
        assert!(d.is_consistent(&[1, 0]));
        assert!(d.is_consistent(&[-2, 3]));
        assert!(!d.has_negative_coefficient());
    }

    #[test]
    fn completion_is_stable_under_raising_the_order() {
        let p = p2(&[1, 1, 0]);
        let low = Diagram::initial(&p, &anticanonical(&p), 4).unwrap().complete().unwrap();
        let high = Diagram::initial(&p, &anticanonical(&p), 5).unwrap().complete().unwrap();
        assert!(low.walls().len() <= high.walls().len());
        for (w, v) in low.walls().iter().zip(high.walls()) {
            assert_eq!(w.geom, v.geom);
            // the lower-order wall function is the higher one truncated
            for ((g, m), c) in w.f.terms() {
                assert_eq!(v.f.coeff_at(&(g.clone(), m.clone())), *c);
            }
            for ((g, m), c) in v.f.terms() {
                if low.ring().deg(g) <= 4 {
                    assert_eq!(w.f.coeff_at(&(g.clone(), m.clone())), *c);
                }
            }
        }
    }

    #[test]
    fn two_blowup_diagram_closes_at_order_six() {
        let p = p2(&[1, 1, 0]);
        let d = Diagram::initial(&p, &anticanonical(&p), 6).unwrap().complete().unwrap();
        for base in [(1, 0), (0, 1), (-1, -1), (5, 2)] {
            assert!(d.is_consistent(&[base.0, base.1]));
        }
        assert!(!d.has_negative_coefficient());
        // walls stay within the cone spanned by the two blown-up rays
        for w in d.added_walls() {
            let dir = w.direction();
            assert!(dir[0] > 0 && dir[1] > 0);
            w.check(d.ring()).unwrap();
        }
    }

    #[test]
    fn interior_blowups_on_a_quadric_close_at_order_six() {
        let p = LooijengaPair::<Int>::of(&[(1, 0), (0, 1), (-1, 0), (0, -1)], &[1, 1, 0, 0])
            .unwrap();
        let d = Diagram::initial(&p, &anticanonical(&p), 6).unwrap().complete().unwrap();
        assert!(d.is_consistent(&[1, 0]));
        assert!(d.is_consistent(&[-1, 2]));
        assert!(!d.has_negative_coefficient());
    }

    #[test]
    fn grading_must_pair_positively_with_exceptionals() {
        let p = p2(&[1, 0, 0]);
        // the canonical class pairs with every exceptional by −1
        let k = p.pic().canonical().clone();
        let err = Diagram::initial(&p, &k, 4).unwrap_err();
        assert_eq!(err.code(), "AMPLE_REJECTED");
        let err = Diagram::initial(&p, &anticanonical(&p), 0).unwrap_err();
        assert_eq!(err.code(), "BAD_ORDER");
    }
}
