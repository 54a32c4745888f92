//! Small dense exact linear algebra: determinants, Smith normal form,
//! rational elimination, integer kernels.
//!
//! Everything here is sized for lattice work (matrices up to a dozen rows),
//! so the algorithms favour exactness and clarity over asymptotics: Bareiss
//! for determinants, textbook row/column reduction for Smith normal form with
//! all four transform matrices tracked, Gauss-Jordan over rationals.

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::num::{IntScalar, Rational, Scalar};

/// Integer 2-vector.
pub type V2<I> = [I; 2];

/// Integer 2x2 matrix, row major.
pub type M2<I> = [[I; 2]; 2];

pub fn v2<I: IntScalar>(x: i64, y: i64) -> V2<I> {
    [I::of(x), I::of(y)]
}

pub fn v2_add<I: Scalar>(a: &V2<I>, b: &V2<I>) -> V2<I> {
    [a[0].clone() + b[0].clone(), a[1].clone() + b[1].clone()]
}

pub fn v2_sub<I: Scalar>(a: &V2<I>, b: &V2<I>) -> V2<I> {
    [a[0].clone() - b[0].clone(), a[1].clone() - b[1].clone()]
}

pub fn v2_neg<I: Scalar>(a: &V2<I>) -> V2<I> {
    [-a[0].clone(), -a[1].clone()]
}

pub fn v2_scale<I: Scalar>(k: &I, a: &V2<I>) -> V2<I> {
    [k.clone() * a[0].clone(), k.clone() * a[1].clone()]
}

/// `det [a b]` — the standard symplectic pairing on `Z^2`.
pub fn det2<I: Scalar>(a: &V2<I>, b: &V2<I>) -> I {
    a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone()
}

pub fn dot2<I: Scalar>(a: &V2<I>, b: &V2<I>) -> I {
    a[0].clone() * b[0].clone() + a[1].clone() * b[1].clone()
}

/// Divide out the gcd of the two coordinates; the zero vector stays zero.
pub fn v2_primitive<I: IntScalar>(a: &V2<I>) -> V2<I> {
    let g = a[0].gcd(&a[1]);
    if g.is_zero() {
        return a.clone();
    }
    [a[0].clone() / g.clone(), a[1].clone() / g]
}

/// Rotate a quarter turn counterclockwise: `(x, y) ↦ (−y, x)`.
pub fn v2_rot90<I: Scalar>(a: &V2<I>) -> V2<I> {
    [-a[1].clone(), a[0].clone()]
}

/// Compare two nonzero vectors by counterclockwise angle from the positive
/// `x`-axis, exactly: first by half-plane (closed upper half first), then by
/// the cross product within a half.  Parallel same-direction vectors compare
/// equal regardless of length.
pub fn cmp_angle<I: Scalar>(a: &V2<I>, b: &V2<I>) -> std::cmp::Ordering {
    let half = |v: &V2<I>| -> u8 {
        if v[1].is_positive() || (v[1].is_zero() && v[0].is_positive()) {
            0
        } else {
            1
        }
    };
    half(a)
        .cmp(&half(b))
        .then_with(|| I::zero().cmp(&det2(a, b)))
}

pub fn m2_identity<I: Scalar>() -> M2<I> {
    [[I::one(), I::zero()], [I::zero(), I::one()]]
}

pub fn m2_mul<I: Scalar>(a: &M2<I>, b: &M2<I>) -> M2<I> {
    let e = |r: usize, c: usize| {
        a[r][0].clone() * b[0][c].clone() + a[r][1].clone() * b[1][c].clone()
    };
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

pub fn m2_apply<I: Scalar>(m: &M2<I>, x: &V2<I>) -> V2<I> {
    [
        m[0][0].clone() * x[0].clone() + m[0][1].clone() * x[1].clone(),
        m[1][0].clone() * x[0].clone() + m[1][1].clone() * x[1].clone(),
    ]
}

pub fn m2_det<I: Scalar>(m: &M2<I>) -> I {
    m[0][0].clone() * m[1][1].clone() - m[0][1].clone() * m[1][0].clone()
}

/// Inverse of a 2x2 integer matrix with `det = ±1`.
pub fn m2_inv<I: Scalar>(m: &M2<I>) -> M2<I> {
    let d = m2_det(m);
    assert!(
        d.abs().is_one(),
        "m2_inv needs det ±1, got {d}"
    );
    // adjugate over determinant; with det ±1 this stays integral
    let adj = [
        [m[1][1].clone(), -m[0][1].clone()],
        [-m[1][0].clone(), m[0][0].clone()],
    ];
    if d.is_one() {
        adj
    } else {
        [
            [-adj[0][0].clone(), -adj[0][1].clone()],
            [-adj[1][0].clone(), -adj[1][1].clone()],
        ]
    }
}

/// Componentwise sum of two vectors.
pub fn vadd<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

pub fn vsub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn vneg<S: Scalar>(a: &[S]) -> Vec<S> {
    a.iter().map(|x| -x.clone()).collect()
}

pub fn vscale<S: Scalar>(k: &S, a: &[S]) -> Vec<S> {
    a.iter().map(|x| k.clone() * x.clone()).collect()
}

pub fn vdot<S: Scalar>(a: &[S], b: &[S]) -> S {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter().zip(b).fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Dense row-major matrix over the integer scalar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat<I> {
    pub rows: usize,
    pub cols: usize,
    a: Vec<I>,
}

impl<I: IntScalar> Mat<I> {
    /// Small-literal constructor, used all over the tests.
    pub fn of(rows: &[&[i64]]) -> Self {
        Mat::from_rows(&rows.iter().map(|r| crate::num::ivec(r)).collect::<Vec<_>>())
    }

    /// Map entries into the rationals.
    pub fn to_rational(&self) -> Mat<Rational<I>> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            a: self.a.iter().map(|x| Ratio::from_integer(x.clone())).collect(),
        }
    }
}

impl<I: Scalar> Mat<I> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, a: vec![I::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zero(n, n);
        for i in 0..n {
            m[(i, i)] = I::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<I>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat { rows: r, cols: c, a: rows.concat() }
    }

    pub fn row(&self, i: usize) -> &[I] {
        &self.a[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<I> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Mat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out: Mat<I> = Mat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let lik = self[(i, k)].clone();
                if lik.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)].clone() + lik.clone() * other[(k, j)].clone();
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[I]) -> Vec<I> {
        assert_eq!(self.cols, x.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(I::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j { self[(i, j)].is_one() } else { self[(i, j)].is_zero() }
                })
            })
    }

    /// Determinant by fraction-free (Bareiss) elimination.  Exact; all the
    /// intermediate divisions come out even.
    pub fn det(&self) -> I {
        assert_eq!(self.rows, self.cols, "det of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return I::one();
        }
        let mut m = self.clone();
        let mut sign = I::one();
        let mut prev = I::one();
        for k in 0..n - 1 {
            if m[(k, k)].is_zero() {
                // find a row to swap in
                match (k + 1..n).find(|&i| !m[(i, k)].is_zero()) {
                    Some(i) => {
                        m.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return I::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = m[(k, k)].clone() * m[(i, j)].clone()
                        - m[(i, k)].clone() * m[(k, j)].clone();
                    m[(i, j)] = num / prev.clone();
                }
                m[(i, k)] = I::zero();
            }
            prev = m[(k, k)].clone();
        }
        sign * m[(n - 1, n - 1)].clone()
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            let (x, y) = (self[(i, c)].clone(), self[(j, c)].clone());
            self[(i, c)] = y;
            self[(j, c)] = x;
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.rows {
            let (x, y) = (self[(r, i)].clone(), self[(r, j)].clone());
            self[(r, i)] = y;
            self[(r, j)] = x;
        }
    }

    // row_i += k * row_j
    fn add_row(&mut self, i: usize, j: usize, k: &I) {
        for c in 0..self.cols {
            self[(i, c)] = self[(i, c)].clone() + k.clone() * self[(j, c)].clone();
        }
    }

    // col_i += k * col_j
    fn add_col(&mut self, i: usize, j: usize, k: &I) {
        for r in 0..self.rows {
            self[(r, i)] = self[(r, i)].clone() + k.clone() * self[(r, j)].clone();
        }
    }

    fn negate_row(&mut self, i: usize) {
        for c in 0..self.cols {
            self[(i, c)] = -self[(i, c)].clone();
        }
    }

    fn negate_col(&mut self, j: usize) {
        for r in 0..self.rows {
            self[(r, j)] = -self[(r, j)].clone();
        }
    }
}

impl<I> std::ops::Index<(usize, usize)> for Mat<I> {
    type Output = I;
    fn index(&self, (i, j): (usize, usize)) -> &I {
        &self.a[i * self.cols + j]
    }
}

impl<I> std::ops::IndexMut<(usize, usize)> for Mat<I> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut I {
        &mut self.a[i * self.cols + j]
    }
}

/// Smith normal form `s = u * a * v` with all four transforms.
///
/// `u`, `v` are unimodular; `s` is diagonal with each diagonal entry
/// non-negative and dividing the next.
#[derive(Clone, Debug)]
pub struct Snf<I> {
    pub s: Mat<I>,
    pub u: Mat<I>,
    pub u_inv: Mat<I>,
    pub v: Mat<I>,
    pub v_inv: Mat<I>,
    pub rank: usize,
}

pub fn smith_normal_form<I: IntScalar>(a: &Mat<I>) -> Snf<I> {
    let (r, c) = (a.rows, a.cols);
    let mut s = a.clone();
    let mut u = Mat::identity(r);
    let mut u_inv = Mat::identity(r);
    let mut v = Mat::identity(c);
    let mut v_inv = Mat::identity(c);

    // elementary ops, applied consistently to s and to the transforms:
    // row ops hit u on the left (and u_inv on the right, inverted);
    // column ops hit v on the right (and v_inv on the left, inverted).
    macro_rules! row_add {
        ($i:expr, $j:expr, $k:expr) => {{
            let k = $k;
            s.add_row($i, $j, &k);
            u.add_row($i, $j, &k);
            u_inv.add_col($j, $i, &-k);
        }};
    }
    macro_rules! col_add {
        ($i:expr, $j:expr, $k:expr) => {{
            let k = $k;
            s.add_col($i, $j, &k);
            v.add_col($i, $j, &k);
            v_inv.add_row($j, $i, &-k);
        }};
    }

    let mut t = 0;
    while t < r.min(c) {
        // move a nonzero entry of smallest absolute value into the pivot slot
        let pivot = (t..r)
            .flat_map(|i| (t..c).map(move |j| (i, j)))
            .filter(|&(i, j)| !s[(i, j)].is_zero())
            .min_by_key(|&(i, j)| s[(i, j)].abs());
        let Some((pi, pj)) = pivot else { break };
        s.swap_rows(t, pi);
        u.swap_rows(t, pi);
        u_inv.swap_cols(t, pi);
        s.swap_cols(t, pj);
        v.swap_cols(t, pj);
        v_inv.swap_rows(t, pj);

        // euclid on row and column t until the pivot divides everything there
        let mut dirty = false;
        for i in t + 1..r {
            if !s[(i, t)].is_zero() {
                let q = div_nearest(&s[(i, t)], &s[(t, t)]);
                row_add!(i, t, -q);
                dirty = dirty || !s[(i, t)].is_zero();
            }
        }
        for j in t + 1..c {
            if !s[(t, j)].is_zero() {
                let q = div_nearest(&s[(t, j)], &s[(t, t)]);
                col_add!(j, t, -q);
                dirty = dirty || !s[(t, j)].is_zero();
            }
        }
        if dirty {
            continue; // smaller remainders exist; re-pick the pivot
        }

        // divisibility condition: the pivot must divide the rest of the block
        let offender = (t + 1..r)
            .flat_map(|i| (t + 1..c).map(move |j| (i, j)))
            .find(|&(i, j)| !(s[(i, j)].clone() % s[(t, t)].clone()).is_zero());
        if let Some((i, _)) = offender {
            row_add!(t, i, I::one());
            continue;
        }

        if s[(t, t)].is_negative() {
            s.negate_row(t);
            u.negate_row(t);
            u_inv.negate_col(t);
        }
        t += 1;
    }

    Snf { rank: t, s, u, u_inv, v, v_inv }
}

// rounded division: minimises |a - q b|, which is what makes the Smith loop
// terminate quickly
fn div_nearest<I: IntScalar>(a: &I, b: &I) -> I {
    let (q, rem) = a.div_mod_floor(b);
    if (rem.clone() + rem) >= b.abs() {
        q + b.signum()
    } else {
        q
    }
}

/// Basis of the integer kernel `{ x : a x = 0 }`, as columns of `v` past the
/// rank.  The basis is saturated: it spans the full lattice kernel.
pub fn integer_kernel<I: IntScalar>(a: &Mat<I>) -> Vec<Vec<I>> {
    let snf = smith_normal_form(a);
    (snf.rank..a.cols).map(|j| snf.v.col(j)).collect()
}

/// Gauss-Jordan over the rationals.  Returns the reduced matrix and the list
/// of pivot columns.
pub fn rref<I: IntScalar>(m: &Mat<Rational<I>>) -> (Mat<Rational<I>>, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..a.cols {
        if row == a.rows {
            break;
        }
        let Some(p) = (row..a.rows).find(|&i| !a[(i, col)].is_zero()) else {
            continue;
        };
        a.swap_rows(row, p);
        let inv = a[(row, col)].clone().recip();
        for j in 0..a.cols {
            a[(row, j)] = a[(row, j)].clone() * inv.clone();
        }
        for i in 0..a.rows {
            if i != row && !a[(i, col)].is_zero() {
                let f = a[(i, col)].clone();
                for j in 0..a.cols {
                    let sub = f.clone() * a[(row, j)].clone();
                    a[(i, j)] = a[(i, j)].clone() - sub;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots)
}

/// Solve the square system `a x = b` over the rationals.  `None` when `a` is
/// singular.
pub fn solve<I: IntScalar>(a: &Mat<Rational<I>>, b: &[Rational<I>]) -> Option<Vec<Rational<I>>> {
    assert_eq!(a.rows, a.cols, "solve wants a square system");
    assert_eq!(a.rows, b.len(), "dimension mismatch");
    let mut aug = Mat::zero(a.rows, a.cols + 1);
    for i in 0..a.rows {
        for j in 0..a.cols {
            aug[(i, j)] = a[(i, j)].clone();
        }
        aug[(i, a.cols)] = b[i].clone();
    }
    let (r, pivots) = rref(&aug);
    if pivots.len() != a.cols || pivots.iter().any(|&p| p >= a.cols) {
        return None;
    }
    Some((0..a.rows).map(|i| r[(i, a.cols)].clone()).collect())
}

/// Inverse of a square rational matrix.  `None` when singular.
pub fn inverse<I: IntScalar>(a: &Mat<Rational<I>>) -> Option<Mat<Rational<I>>> {
    assert_eq!(a.rows, a.cols, "inverse of a non-square matrix");
    let n = a.rows;
    let mut aug = Mat::zero(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = a[(i, j)].clone();
        }
        aug[(i, n + i)] = Ratio::one();
    }
    let (r, pivots) = rref(&aug);
    if pivots.len() != n || pivots.iter().any(|&p| p >= n) {
        return None;
    }
    let mut out = Mat::zero(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = r[(i, n + j)].clone();
        }
    }
    Some(out)
}

/// Inverse of a unimodular integer matrix, kept integral.
///
/// Panics when `det != ±1`; lattice bases and intersection forms in this
/// crate are unimodular by construction, so a failure here is a logic error.
pub fn unimodular_inverse<I: IntScalar>(a: &Mat<I>) -> Mat<I> {
    let d = a.det();
    assert!(d.abs().is_one(), "matrix is not unimodular (det {d})");
    let inv = inverse(&a.to_rational()).expect("unimodular matrix is invertible");
    let mut out = Mat::zero(a.rows, a.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let e = &inv[(i, j)];
            assert!(e.is_integer(), "inverse of unimodular matrix must be integral");
            out[(i, j)] = e.numer().clone();
        }
    }
    out
}
