//! Wehler surfaces `S = V(L, Q)` in `P^2 x P^2`.
//!
//! `L = sum a_ij x_i y_j` is stored row-major as `[a00, a01, .., a22]`.
//! `Q = sum b_{ij,kl} x_i x_j y_k y_l` is stored as 36 coefficients indexed
//! `6 * outer + inner`, where `outer` ranges over the unordered x-pairs and
//! `inner` over the unordered y-pairs, both in the order of [`PAIRS`].

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ff::Field;

/// Unordered index pairs in storage order.
pub const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Position of the unordered pair `{i, j}` in [`PAIRS`].
pub const fn pair_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    match (i, j) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    X,
    Y,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::X => Side::Y,
            Side::Y => Side::X,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::X => "x",
            Side::Y => "y",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSurface", into = "RawSurface")]
pub struct SurfaceCoefficients {
    l: [i64; 9],
    q: [i64; 36],
}

#[derive(Serialize, Deserialize)]
struct RawSurface {
    #[serde(rename = "L")]
    l: Vec<i64>,
    #[serde(rename = "Q")]
    q: Vec<i64>,
}

impl TryFrom<RawSurface> for SurfaceCoefficients {
    type Error = Error;

    fn try_from(raw: RawSurface) -> Result<Self> {
        SurfaceCoefficients::new(&raw.l, &raw.q)
    }
}

impl From<SurfaceCoefficients> for RawSurface {
    fn from(s: SurfaceCoefficients) -> Self {
        RawSurface {
            l: s.l.to_vec(),
            q: s.q.to_vec(),
        }
    }
}

impl SurfaceCoefficients {
    pub fn new(l: &[i64], q: &[i64]) -> Result<Self> {
        let l: [i64; 9] = l.try_into().map_err(|_| Error::Arity {
            what: "L",
            expected: 9,
            found: l.len(),
        })?;
        let q: [i64; 36] = q.try_into().map_err(|_| Error::Arity {
            what: "Q",
            expected: 36,
            found: q.len(),
        })?;
        if l.iter().all(|&c| c == 0) {
            return Err(Error::InvalidSurface("L is identically zero".into()));
        }
        if q.iter().all(|&c| c == 0) {
            return Err(Error::InvalidSurface("Q is identically zero".into()));
        }
        Ok(SurfaceCoefficients { l, q })
    }

    /// Parse the JSON surface format `{"L": [9 ints], "Q": [36 ints]}`.
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            // validation errors come back wrapped in serde's message
            let msg = e.to_string();
            if msg.contains("expected 9")
                || msg.contains("expected 36")
                || msg.contains("identically zero")
            {
                Error::InvalidSurface(msg)
            } else {
                Error::Parse(msg)
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("coefficient vectors serialize")
    }

    pub fn l(&self) -> &[i64; 9] {
        &self.l
    }

    pub fn q(&self) -> &[i64; 36] {
        &self.q
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_json().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Coefficient-wise reduction to residues in `[0, p)`.
    ///
    /// The result may fail the nonzero-form invariant, in which case the
    /// reduced surface is not of the stated type and an error is returned.
    pub fn reduce_mod_p(&self, p: u64) -> Result<SurfaceCoefficients> {
        let r = |c: &i64| c.rem_euclid(p as i64);
        let l: Vec<i64> = self.l.iter().map(r).collect();
        let q: Vec<i64> = self.q.iter().map(r).collect();
        SurfaceCoefficients::new(&l, &q)
    }

    pub fn over<'f, F: Field>(&self, field: &'f F) -> FieldSurface<'f, F> {
        FieldSurface::new(self, field)
    }
}

/// A point of `P^2 x P^2`, as a pair of coordinate triples.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SurfacePoint<E> {
    pub x: [E; 3],
    pub y: [E; 3],
}

impl<E> SurfacePoint<E> {
    pub fn new(x: [E; 3], y: [E; 3]) -> Self {
        SurfacePoint { x, y }
    }

    pub fn side(&self, side: Side) -> &[E; 3] {
        match side {
            Side::X => &self.x,
            Side::Y => &self.y,
        }
    }
}

/// The restriction of `L` and `Q` to the fiber over a fixed triple `a` on one
/// side: `L*_j` is the coefficient of the free variable `j`, `Q*_kl` that of
/// the monomial in the free variables `k, l` (indexed by [`pair_index`]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SideForms<E> {
    pub l: [E; 3],
    pub q: [E; 6],
}

impl<E> SideForms<E> {
    pub fn q_at(&self, i: usize, j: usize) -> &E {
        &self.q[pair_index(i, j)]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GhData<E> {
    pub side: Side,
    /// `G*_0, G*_1, G*_2`.
    pub g: [E; 3],
    /// `H*_01, H*_02, H*_12`.
    pub h: [E; 3],
}

impl<E> GhData<E> {
    /// `H*_ij` for `i != j`, in either order.
    pub fn h_at(&self, i: usize, j: usize) -> &E {
        match pair_index(i, j) {
            1 => &self.h[0],
            2 => &self.h[1],
            4 => &self.h[2],
            _ => panic!("H is only defined for distinct indices"),
        }
    }
}

/// The third index of `{0, 1, 2}`.
pub(crate) const fn complement(i: usize, j: usize) -> usize {
    3 - i - j
}

/// A surface with coefficients mapped into a field.
pub struct FieldSurface<'f, F: Field> {
    field: &'f F,
    l: [F::Elem; 9],
    q: [F::Elem; 36],
}

impl<'f, F: Field> FieldSurface<'f, F> {
    pub fn new(coeffs: &SurfaceCoefficients, field: &'f F) -> Self {
        FieldSurface {
            field,
            l: coeffs.l.map(|c| field.from_i64(c)),
            q: coeffs.q.map(|c| field.from_i64(c)),
        }
    }

    pub fn field(&self) -> &'f F {
        self.field
    }

    /// `(L(x, y), Q(x, y))`.
    pub fn evaluate(&self, pt: &SurfacePoint<F::Elem>) -> (F::Elem, F::Elem) {
        let forms = self.side_coefficients(&pt.x, Side::X);
        let f = self.field;
        let mut lv = f.zero();
        for j in 0..3 {
            lv = f.add(&lv, &f.mul(&forms.l[j], &pt.y[j]));
        }
        let mut qv = f.zero();
        for (b, &(k, l)) in PAIRS.iter().enumerate() {
            let mono = f.mul(&pt.y[k], &pt.y[l]);
            qv = f.add(&qv, &f.mul(&forms.q[b], &mono));
        }
        (lv, qv)
    }

    pub fn contains(&self, pt: &SurfacePoint<F::Elem>) -> bool {
        let (lv, qv) = self.evaluate(pt);
        self.field.is_zero(&lv) && self.field.is_zero(&qv)
    }

    #[allow(clippy::needless_range_loop)]
    pub fn side_coefficients(&self, a: &[F::Elem; 3], side: Side) -> SideForms<F::Elem> {
        let f = self.field;
        let monos: [F::Elem; 6] = PAIRS.map(|(i, j)| f.mul(&a[i], &a[j]));
        let mut l: [F::Elem; 3] = std::array::from_fn(|_| f.zero());
        let mut q: [F::Elem; 6] = std::array::from_fn(|_| f.zero());
        match side {
            Side::X => {
                for j in 0..3 {
                    for i in 0..3 {
                        l[j] = f.add(&l[j], &f.mul(&self.l[3 * i + j], &a[i]));
                    }
                }
                for (inner, qv) in q.iter_mut().enumerate() {
                    for (outer, mono) in monos.iter().enumerate() {
                        *qv = f.add(qv, &f.mul(&self.q[6 * outer + inner], mono));
                    }
                }
            }
            Side::Y => {
                for (i, lv) in l.iter_mut().enumerate() {
                    for j in 0..3 {
                        *lv = f.add(lv, &f.mul(&self.l[3 * i + j], &a[j]));
                    }
                }
                for (outer, qv) in q.iter_mut().enumerate() {
                    for (inner, mono) in monos.iter().enumerate() {
                        *qv = f.add(qv, &f.mul(&self.q[6 * outer + inner], mono));
                    }
                }
            }
        }
        SideForms { l, q }
    }

    pub fn gh_values(&self, a: &[F::Elem; 3], side: Side) -> GhData<F::Elem> {
        gh_from_forms(self.field, &self.side_coefficients(a, side), side)
    }

    pub fn is_degenerate_fiber(&self, a: &[F::Elem; 3], side: Side) -> bool {
        let gh = self.gh_values(a, side);
        gh.g.iter()
            .chain(gh.h.iter())
            .all(|v| self.field.is_zero(v))
    }
}

/// `G*_k = L_j^2 Q_ii - L_i L_j Q_ij + L_i^2 Q_jj` for `{i, j, k} = {0, 1, 2}`.
pub(crate) fn g_value<F: Field>(f: &F, forms: &SideForms<F::Elem>, i: usize, j: usize) -> F::Elem {
    let (li, lj) = (&forms.l[i], &forms.l[j]);
    let t1 = f.mul(&f.square(lj), forms.q_at(i, i));
    let t2 = f.mul(&f.mul(li, lj), forms.q_at(i, j));
    let t3 = f.mul(&f.square(li), forms.q_at(j, j));
    f.add(&f.sub(&t1, &t2), &t3)
}

/// `H*_ij = 2 L_i L_j Q_kk - L_i L_k Q_jk - L_j L_k Q_ik + L_k^2 Q_ij`.
pub(crate) fn h_value<F: Field>(f: &F, forms: &SideForms<F::Elem>, i: usize, j: usize) -> F::Elem {
    let k = complement(i, j);
    let (li, lj, lk) = (&forms.l[i], &forms.l[j], &forms.l[k]);
    let lilj = f.mul(li, lj);
    let t1 = f.mul(&f.add(&lilj, &lilj), forms.q_at(k, k));
    let t2 = f.mul(&f.mul(li, lk), forms.q_at(j, k));
    let t3 = f.mul(&f.mul(lj, lk), forms.q_at(i, k));
    let t4 = f.mul(&f.square(lk), forms.q_at(i, j));
    f.add(&f.sub(&f.sub(&t1, &t2), &t3), &t4)
}

pub(crate) fn gh_from_forms<F: Field>(
    f: &F,
    forms: &SideForms<F::Elem>,
    side: Side,
) -> GhData<F::Elem> {
    GhData {
        side,
        g: [
            g_value(f, forms, 1, 2),
            g_value(f, forms, 0, 2),
            g_value(f, forms, 0, 1),
        ],
        h: [
            h_value(f, forms, 0, 1),
            h_value(f, forms, 0, 2),
            h_value(f, forms, 1, 2),
        ],
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::ff::{enumerate_projective_plane, FiniteField, Rationals, TableField};
    use crate::testdata;

    #[test]
    fn parse_table_entry() {
        let s = &testdata::periodic_table()[3];
        assert_eq!(s.period, 4);
        assert_eq!(s.surface.l(), &[-1, -1, 0, -1, 0, -1, 0, 0, -1]);
        let again = SurfaceCoefficients::parse(&s.surface.to_json()).unwrap();
        assert_eq!(&again, &s.surface);
    }

    #[test]
    fn parse_errors() {
        let q = vec![1i64; 36];
        let short = serde_json::json!({"L": [1, 0, 0, 0, 0, 0, 0, 0], "Q": q}).to_string();
        assert!(matches!(
            SurfaceCoefficients::parse(&short),
            Err(Error::InvalidSurface(_))
        ));
        assert!(matches!(
            SurfaceCoefficients::new(&[1; 8], &q),
            Err(Error::Arity {
                expected: 9,
                found: 8,
                ..
            })
        ));
        assert!(matches!(
            SurfaceCoefficients::new(&[0; 9], &q),
            Err(Error::InvalidSurface(_))
        ));
        let bad = r#"{"L": [1, 0, 0, 0, 0, 0, 0, 0, 0.5], "Q": []}"#;
        assert!(matches!(
            SurfaceCoefficients::parse(bad),
            Err(Error::Parse(_))
        ));
    }

    fn ints(v: [i64; 3]) -> [num_rational::BigRational; 3] {
        v.map(|c| Rationals.from_i64(c))
    }

    #[test]
    fn evaluate_fixed_point_of_period_one_surface() {
        let row = &testdata::periodic_table()[0];
        let s = row.surface.over(&Rationals);
        let pt = SurfacePoint::new(ints([0, 0, 1]), ints([1, 0, 1]));
        let (lv, qv) = s.evaluate(&pt);
        assert!(lv == Rationals.zero() && qv == Rationals.zero());
        let a = row.surface.l();
        assert_eq!(lv, Rationals.from_i64(a[6] + a[8]));
    }

    /// Term-by-term expansion over all 81 index quadruples, independent of
    /// the side-form code path.
    fn brute_q(s: &SurfaceCoefficients, x: [i64; 3], y: [i64; 3]) -> i64 {
        let mut total = 0;
        for (outer, &(i, j)) in PAIRS.iter().enumerate() {
            for (inner, &(k, l)) in PAIRS.iter().enumerate() {
                total += s.q()[6 * outer + inner] * x[i] * x[j] * y[k] * y[l];
            }
        }
        total
    }

    #[test]
    fn side_coefficients_match_expansion() {
        let s = &testdata::periodic_table()[1].surface;
        let fs = s.over(&Rationals);
        let x = [3, 1, 3];
        let forms = fs.side_coefficients(&ints(x), Side::X);
        for j in 0..3 {
            let expect: i64 = (0..3).map(|i| s.l()[3 * i + j] * x[i]).sum();
            assert_eq!(forms.l[j], Rationals.from_i64(expect));
        }
        // Q*_kl is the coefficient of y_k y_l: probe with unit and pair vectors
        for (b, &(k, l)) in PAIRS.iter().enumerate() {
            let mut y = [0; 3];
            y[k] = 1;
            if k == l {
                assert_eq!(forms.q[b], Rationals.from_i64(brute_q(s, x, y)));
            } else {
                y[l] = 1;
                let mut yk = [0; 3];
                yk[k] = 1;
                let mut yl = [0; 3];
                yl[l] = 1;
                let cross = brute_q(s, x, y) - brute_q(s, x, yk) - brute_q(s, x, yl);
                assert_eq!(forms.q[b], Rationals.from_i64(cross));
            }
        }
    }

    #[test]
    fn x_coefficients_at_last_basis_vector() {
        let s = &testdata::periodic_table()[4].surface;
        let forms = s
            .over(&Rationals)
            .side_coefficients(&ints([0, 0, 1]), Side::X);
        for j in 0..3 {
            assert_eq!(forms.l[j], Rationals.from_i64(s.l()[6 + j]));
        }
    }

    #[test]
    fn zero_line_gives_zero_gh() {
        let mut l = [0i64; 9];
        l[0] = 1;
        let s = SurfaceCoefficients::new(&l, &[1; 36]).unwrap();
        let fs = s.over(&Rationals);
        // L^x at (0,0,1) is row 2 of L, which is zero
        assert!(fs.is_degenerate_fiber(&ints([0, 0, 1]), Side::X));
        let gh = fs.gh_values(&ints([0, 1, 0]), Side::X);
        assert!(gh.g.iter().chain(gh.h.iter()).all(|v| Rationals.is_zero(v)));
    }

    #[test]
    fn g_and_h_do_not_depend_on_index_order() {
        let f = Rationals;
        let s = &testdata::periodic_table()[6].surface;
        let forms = s.over(&f).side_coefficients(&ints([1, -2, 1]), Side::Y);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert_eq!(g_value(&f, &forms, i, j), g_value(&f, &forms, j, i));
            assert_eq!(h_value(&f, &forms, i, j), h_value(&f, &forms, j, i));
        }
    }

    #[test]
    fn fiber_points_satisfy_pair_quadratics() {
        let f = TableField::for_prime_power(5, 1).unwrap();
        for row in testdata::periodic_table() {
            let fs = row.surface.over(&f);
            for x in enumerate_projective_plane(&f) {
                let gh = fs.gh_values(&x, Side::X);
                for y in enumerate_projective_plane(&f) {
                    let pt = SurfacePoint::new(x, y);
                    if !fs.contains(&pt) {
                        continue;
                    }
                    for (i, j) in [(1, 2), (0, 1), (0, 2)] {
                        // G_j y_i^2 + H_ij y_i y_j + G_i y_j^2
                        let v = f.add(
                            &f.add(
                                &f.mul(&gh.g[j], &f.square(&y[i])),
                                &f.mul(gh.h_at(i, j), &f.mul(&y[i], &y[j])),
                            ),
                            &f.mul(&gh.g[i], &f.square(&y[j])),
                        );
                        assert!(f.is_zero(&v));
                    }
                }
            }
        }
    }

    #[test]
    fn picard_two_surface_has_no_degenerate_fiber_mod_3() {
        let f = TableField::for_prime_power(3, 1).unwrap();
        let s = testdata::picard_two().over(&f);
        for a in enumerate_projective_plane(&f) {
            assert!(!s.is_degenerate_fiber(&a, Side::X));
            assert!(!s.is_degenerate_fiber(&a, Side::Y));
        }
    }

    #[test]
    fn period_four_surface_has_no_degenerate_x_fiber_mod_5() {
        let f = TableField::for_prime_power(5, 1).unwrap();
        let s = testdata::periodic_table()[3].surface.over(&f);
        assert_eq!(enumerate_projective_plane(&f).count(), 31);
        assert!(enumerate_projective_plane(&f).all(|a| !s.is_degenerate_fiber(&a, Side::X)));
    }

    #[test]
    fn reduction() {
        let mut l = [0i64; 9];
        l[..3].copy_from_slice(&[3, 1, 3]);
        let s = SurfaceCoefficients::new(&l, &[1; 36]).unwrap();
        assert_eq!(&s.reduce_mod_p(3).unwrap().l()[..3], &[0, 1, 0]);
        let zeroed = SurfaceCoefficients::new(&[3, 0, 0, 0, 0, 0, 0, 0, 0], &[1; 36]).unwrap();
        assert!(zeroed.reduce_mod_p(3).is_err());

        let base = testdata::picard_two();
        for idx in 0..45 {
            let mut l = *base.l();
            let mut q = *base.q();
            if idx < 9 {
                l[idx] += 3
            } else {
                q[idx - 9] += 3
            }
            let shifted = SurfaceCoefficients::new(&l, &q).unwrap();
            assert_eq!(
                shifted.reduce_mod_p(3).unwrap(),
                base.reduce_mod_p(3).unwrap()
            );
        }
    }

    proptest! {
        #[test]
        fn reduction_commutes_with_evaluation(
            x in proptest::array::uniform3(-20i64..20),
            y in proptest::array::uniform3(-20i64..20),
            row in 0usize..16,
            p in prop::sample::select(vec![3u64, 5, 7, 11]),
        ) {
            let s = &testdata::periodic_table()[row].surface;
            let f = TableField::for_prime_power(p, 1).unwrap();
            let reduced = s.over(&f);
            let pt = SurfacePoint::new(x.map(|c| f.from_i64(c)), y.map(|c| f.from_i64(c)));
            let (lv, qv) = reduced.evaluate(&pt);
            let (lz, qz) = s.over(&Rationals).evaluate(&SurfacePoint::new(ints(x), ints(y)));
            let to_res = |r: &num_rational::BigRational| {
                let n: i64 = r.numer().try_into().unwrap();
                f.from_i64(n)
            };
            prop_assert_eq!(lv, to_res(&lz));
            prop_assert_eq!(qv, to_res(&qz));
        }

        #[test]
        fn gh_is_homogeneous_of_degree_four(
            a in proptest::array::uniform3(0u64..7),
            lam in 1u64..7,
            row in 0usize..16,
        ) {
            prop_assume!(a.iter().any(|&c| c != 0));
            let f = TableField::for_prime_power(7, 1).unwrap();
            let s = testdata::periodic_table()[row].surface.over(&f);
            let v = a.map(|c| f.element(c));
            let l = f.element(lam);
            let scaled = v.map(|c| f.mul(&c, &l));
            let l4 = f.square(&f.square(&l));
            for side in [Side::X, Side::Y] {
                let g1 = s.gh_values(&v, side);
                let g2 = s.gh_values(&scaled, side);
                for k in 0..3 {
                    prop_assert_eq!(g2.g[k], f.mul(&g1.g[k], &l4));
                    prop_assert_eq!(g2.h[k], f.mul(&g1.h[k], &l4));
                }
                prop_assert_eq!(s.is_degenerate_fiber(&v, side), s.is_degenerate_fiber(&scaled, side));
            }
        }

        #[test]
        fn evaluate_is_bihomogeneous(
            x in proptest::array::uniform3(0u64..5),
            y in proptest::array::uniform3(0u64..5),
            lam in 1u64..5,
            mu in 1u64..5,
        ) {
            let f = TableField::for_prime_power(5, 1).unwrap();
            let s = testdata::periodic_table()[8].surface.over(&f);
            let (xv, yv) = (x.map(|c| f.element(c)), y.map(|c| f.element(c)));
            let (l, m) = (f.element(lam), f.element(mu));
            let (l0, q0) = s.evaluate(&SurfacePoint::new(xv, yv));
            let (l1, q1) = s.evaluate(&SurfacePoint::new(xv.map(|c| f.mul(&c, &l)), yv.map(|c| f.mul(&c, &m))));
            let lm = f.mul(&l, &m);
            prop_assert_eq!(l1, f.mul(&l0, &lm));
            prop_assert_eq!(q1, f.mul(&q0, &f.square(&lm)));
        }
    }
}
