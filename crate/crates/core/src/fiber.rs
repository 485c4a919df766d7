//! Fibers of the two projections `S -> P^2` and the involutions they induce.
//!
//! Over a fixed triple `a` on one side, the fiber is the intersection of the
//! line `sum L*_j z_j = 0` with the conic `sum Q*_kl z_k z_l = 0` in the other
//! factor. Eliminating `z_k` for the first index with `L*_k != 0` leaves the
//! binary quadratic `G_j s^2 + H_ij s t + G_i t^2` in `(s, t) = (z_i, z_j)`,
//! whose projective roots are the fiber points.

use crate::error::{Error, Result};
use crate::ff::{enumerate_projective_plane, Field, FiniteField};
use crate::surface::{
    g_value, gh_from_forms, h_value, FieldSurface, Side, SideForms, SurfacePoint,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberSolution<E> {
    pub points: Vec<SurfacePoint<E>>,
    /// A single point of multiplicity two.
    pub tangent: bool,
    pub degenerate: bool,
}

impl<E> FiberSolution<E> {
    fn degenerate() -> Self {
        FiberSolution {
            points: Vec::new(),
            tangent: false,
            degenerate: true,
        }
    }
}

/// `a s^2 + b s t + c t^2` in the free coordinates `(z_i, z_j)`, with `z_k`
/// recovered from the line.
struct PairQuadratic<E> {
    i: usize,
    j: usize,
    k: usize,
    a: E,
    b: E,
    c: E,
}

fn pair_quadratic<F: Field>(f: &F, forms: &SideForms<F::Elem>) -> Option<PairQuadratic<F::Elem>> {
    let k = (0..3).find(|&k| !f.is_zero(&forms.l[k]))?;
    let (i, j) = match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    Some(PairQuadratic {
        i,
        j,
        k,
        a: g_value(f, forms, i, k),
        b: h_value(f, forms, i, j),
        c: g_value(f, forms, j, k),
    })
}

impl<E: Clone> PairQuadratic<E> {
    fn is_zero<F: Field<Elem = E>>(&self, f: &F) -> bool {
        f.is_zero(&self.a) && f.is_zero(&self.b) && f.is_zero(&self.c)
    }

    /// Complete `(z_i, z_j) = (s, t)` to a point of the line.
    fn complete<F: Field<Elem = E>>(&self, f: &F, forms: &SideForms<E>, s: E, t: E) -> [E; 3] {
        let lk_inv = f.inv(&forms.l[self.k]).expect("pivot is nonzero");
        let partial = f.add(&f.mul(&forms.l[self.i], &s), &f.mul(&forms.l[self.j], &t));
        let zk = f.neg(&f.mul(&partial, &lk_inv));
        let mut z: [E; 3] = std::array::from_fn(|_| f.zero());
        z[self.i] = s;
        z[self.j] = t;
        z[self.k] = zk;
        z
    }

    /// The second root given one root `(s0, t0)`, from the product and sum of
    /// the roots. No square roots are needed.
    fn other_root<F: Field<Elem = E>>(&self, f: &F, s0: &E, t0: &E) -> (E, E) {
        if f.is_zero(t0) {
            (f.neg(&self.c), self.b.clone())
        } else if f.is_zero(s0) {
            (f.neg(&self.b), self.a.clone())
        } else {
            (f.mul(&self.c, t0), f.mul(&self.a, s0))
        }
    }
}

fn assemble<E: Clone>(side: Side, fixed: &[E; 3], free: [E; 3]) -> SurfacePoint<E> {
    match side {
        Side::X => SurfacePoint::new(fixed.clone(), free),
        Side::Y => SurfacePoint::new(free, fixed.clone()),
    }
}

fn describe<F: Field>(f: &F, v: &[F::Elem; 3]) -> String {
    format!(
        "[{},{},{}]",
        f.format(&v[0]),
        f.format(&v[1]),
        f.format(&v[2])
    )
}

pub fn describe_point<F: Field>(f: &F, pt: &SurfacePoint<F::Elem>) -> String {
    format!("[{},{}]", describe(f, &pt.x), describe(f, &pt.y))
}

pub fn normalize_point<F: Field>(
    f: &F,
    pt: &SurfacePoint<F::Elem>,
) -> Option<SurfacePoint<F::Elem>> {
    Some(SurfacePoint::new(f.normalize(&pt.x)?, f.normalize(&pt.y)?))
}

fn degenerate_error<F: Field>(f: &F, a: &[F::Elem; 3], side: Side) -> Error {
    Error::DegenerateFiber {
        side,
        point: describe(f, a),
    }
}

/// All points of `S` lying over `a` on the given side.
pub fn solve_fiber<F: Field>(
    surface: &FieldSurface<'_, F>,
    a: &[F::Elem; 3],
    side: Side,
) -> Result<FiberSolution<F::Elem>> {
    let f = surface.field();
    if f.characteristic() == 2 {
        return Err(Error::UnsupportedCharacteristic);
    }
    let forms = surface.side_coefficients(a, side);
    let gh = gh_from_forms(f, &forms, side);
    if gh.g.iter().chain(gh.h.iter()).all(|v| f.is_zero(v)) {
        return Ok(FiberSolution::degenerate());
    }
    let Some(pq) = pair_quadratic(f, &forms) else {
        return Ok(FiberSolution::degenerate());
    };
    debug_assert!(!pq.is_zero(f), "line inside conic without vanishing G/H");

    let mut tangent = false;
    let mut roots: Vec<(F::Elem, F::Elem)> = Vec::with_capacity(2);
    if f.is_zero(&pq.a) {
        // t = 0 is a root; the other is b s + c t = 0
        roots.push((f.one(), f.zero()));
        if f.is_zero(&pq.b) {
            tangent = true;
        } else {
            roots.push((f.neg(&pq.c), pq.b.clone()));
        }
    } else {
        let four_ac = f.mul(&f.from_i64(4), &f.mul(&pq.a, &pq.c));
        let disc = f.sub(&f.square(&pq.b), &four_ac);
        let two_a = f.add(&pq.a, &pq.a);
        let inv_two_a = f.inv(&two_a).expect("odd characteristic");
        let sq = f.sqrt(&disc)?;
        tangent = sq.len() == 1;
        for r in sq {
            let s = f.mul(&f.sub(&r, &pq.b), &inv_two_a);
            roots.push((s, f.one()));
        }
    }

    let mut points: Vec<SurfacePoint<F::Elem>> = Vec::with_capacity(2);
    for (s, t) in roots {
        let z = pq.complete(f, &forms, s, t);
        let Some(pt) = normalize_point(f, &assemble(side, a, z)) else {
            continue;
        };
        if surface.contains(&pt) && !points.contains(&pt) {
            points.push(pt);
        }
    }
    Ok(FiberSolution {
        points,
        tangent,
        degenerate: false,
    })
}

/// Number of points over `a`, without constructing them.
pub fn fiber_size<F: Field>(
    surface: &FieldSurface<'_, F>,
    a: &[F::Elem; 3],
    side: Side,
) -> Result<u64> {
    let f = surface.field();
    let forms = surface.side_coefficients(a, side);
    let Some(pq) = pair_quadratic(f, &forms) else {
        return Err(degenerate_error(f, a, side));
    };
    if pq.is_zero(f) {
        return Err(degenerate_error(f, a, side));
    }
    if f.is_zero(&pq.a) {
        return Ok(if f.is_zero(&pq.b) { 1 } else { 2 });
    }
    let four_ac = f.mul(&f.from_i64(4), &f.mul(&pq.a, &pq.c));
    let disc = f.sub(&f.square(&pq.b), &four_ac);
    if f.is_zero(&disc) {
        Ok(1)
    } else if f.is_square(&disc)? {
        Ok(2)
    } else {
        Ok(0)
    }
}

/// The other point of the fiber through `pt` on the given side; `pt` itself
/// when the fiber is tangent there.
pub fn conjugate<F: Field>(
    surface: &FieldSurface<'_, F>,
    pt: &SurfacePoint<F::Elem>,
    side: Side,
) -> Result<SurfacePoint<F::Elem>> {
    let f = surface.field();
    let pt = normalize_point(f, pt).ok_or_else(|| Error::NotOnSurface(describe_point(f, pt)))?;
    if !surface.contains(&pt) {
        return Err(Error::NotOnSurface(describe_point(f, &pt)));
    }
    let fixed = pt.side(side);
    let moving = pt.side(side.other());
    let forms = surface.side_coefficients(fixed, side);
    let gh = gh_from_forms(f, &forms, side);
    if gh.g.iter().chain(gh.h.iter()).all(|v| f.is_zero(v)) {
        return Err(degenerate_error(f, fixed, side));
    }

    // y_t y'_t = G_t and y_t y'_i + y'_t y_i = -H_ti, scaled by y_t^2
    for t in 0..3 {
        if f.is_zero(&moving[t]) {
            continue;
        }
        let gt = &gh.g[t];
        let mut w: [F::Elem; 3] = std::array::from_fn(|_| f.zero());
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = if i == t {
                f.mul(gt, &moving[t])
            } else {
                f.neg(&f.add(&f.mul(gh.h_at(t, i), &moving[t]), &f.mul(gt, &moving[i])))
            };
        }
        if let Some(candidate) = normalize_point(f, &assemble(side, fixed, w)) {
            if surface.contains(&candidate) {
                return Ok(candidate);
            }
        }
    }

    let pq = pair_quadratic(f, &forms).ok_or_else(|| degenerate_error(f, fixed, side))?;
    let (s1, t1) = pq.other_root(f, &moving[pq.i], &moving[pq.j]);
    let z = pq.complete(f, &forms, s1, t1);
    let candidate = normalize_point(f, &assemble(side, fixed, z))
        .filter(|c| surface.contains(c))
        .ok_or_else(|| {
            Error::Inconsistent(format!("no conjugate for {}", describe_point(f, &pt)))
        })?;
    Ok(candidate)
}

/// `phi = sigma_x . sigma_y`.
pub fn phi<F: Field>(
    surface: &FieldSurface<'_, F>,
    pt: &SurfacePoint<F::Elem>,
) -> Result<SurfacePoint<F::Elem>> {
    let mid = conjugate(surface, pt, Side::Y)?;
    conjugate(surface, &mid, Side::X)
}

pub fn phi_inverse<F: Field>(
    surface: &FieldSurface<'_, F>,
    pt: &SurfacePoint<F::Elem>,
) -> Result<SurfacePoint<F::Elem>> {
    let mid = conjugate(surface, pt, Side::X)?;
    conjugate(surface, &mid, Side::Y)
}

/// Fiber over `a` found by testing every point of `P^2(F_q)`. Works in every
/// characteristic; this is the characteristic-2 path and the test oracle.
pub fn fiber_by_scan<F: FiniteField>(
    surface: &FieldSurface<'_, F>,
    a: &[F::Elem; 3],
    side: Side,
) -> Vec<SurfacePoint<F::Elem>> {
    let f = surface.field();
    enumerate_projective_plane(f)
        .map(|z| assemble(side, a, z))
        .filter(|pt| surface.contains(pt))
        .collect()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::ff::{Rationals, TableField};
    use crate::surface::SurfaceCoefficients;
    use crate::testdata;

    fn random_surface(seed: u64, range: i64) -> SurfaceCoefficients {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let l: Vec<i64> = (0..9).map(|_| rng.gen_range(-range..=range)).collect();
            let q: Vec<i64> = (0..36).map(|_| rng.gen_range(-range..=range)).collect();
            if let Ok(s) = SurfaceCoefficients::new(&l, &q) {
                return s;
            }
        }
    }

    fn zpoint(x: [i64; 3], y: [i64; 3]) -> SurfacePoint<num_rational::BigRational> {
        SurfacePoint::new(
            x.map(|c| Rationals.from_i64(c)),
            y.map(|c| Rationals.from_i64(c)),
        )
    }

    #[test]
    fn counts_picard_two_surface_mod_3() {
        let f = TableField::for_prime_power(3, 1).unwrap();
        let s = testdata::picard_two().over(&f);
        let total: usize = enumerate_projective_plane(&f)
            .map(|x| solve_fiber(&s, &x, Side::X).unwrap().points.len())
            .sum();
        assert_eq!(total, 13);
    }

    #[test]
    fn solve_fiber_matches_scan_on_random_surfaces() {
        for (seed, p) in [(1u64, 5u64), (2, 5), (3, 7), (4, 3)] {
            let f = TableField::for_prime_power(p, 1).unwrap();
            let s = random_surface(seed, 2).over(&f);
            for side in [Side::X, Side::Y] {
                for a in enumerate_projective_plane(&f) {
                    let sol = solve_fiber(&s, &a, side).unwrap();
                    let mut scan = fiber_by_scan(&s, &a, side);
                    assert_eq!(sol.degenerate, s.is_degenerate_fiber(&a, side));
                    if sol.degenerate {
                        continue;
                    }
                    let mut got = sol.points.clone();
                    got.sort_by_key(|p| format!("{p:?}"));
                    scan.sort_by_key(|p| format!("{p:?}"));
                    assert_eq!(got, scan);
                    assert_eq!(fiber_size(&s, &a, side).unwrap(), scan.len() as u64);
                    assert_eq!(sol.tangent, scan.len() == 1);
                }
            }
        }
    }

    #[test]
    fn non_residue_discriminant_gives_empty_fiber() {
        let f = TableField::for_prime_power(5, 1).unwrap();
        let s = testdata::periodic_table()[3].surface.over(&f);
        let empty = enumerate_projective_plane(&f)
            .find(|a| fiber_size(&s, a, Side::X).unwrap() == 0)
            .expect("some fiber has no rational point");
        let sol = solve_fiber(&s, &empty, Side::X).unwrap();
        assert!(sol.points.is_empty() && !sol.degenerate);
    }

    #[test]
    fn degenerate_fiber_is_flagged() {
        let mut l = [0i64; 9];
        l[0] = 1;
        l[4] = 1;
        let s = SurfaceCoefficients::new(&l, &[1; 36]).unwrap();
        let f = TableField::for_prime_power(5, 1).unwrap();
        let fs = s.over(&f);
        let a = [f.zero(), f.zero(), f.one()];
        assert!(solve_fiber(&fs, &a, Side::X).unwrap().degenerate);
        assert!(matches!(
            fiber_size(&fs, &a, Side::X),
            Err(Error::DegenerateFiber { .. })
        ));
    }

    #[test]
    fn conjugate_agrees_with_solve_fiber() {
        let f = TableField::for_prime_power(7, 1).unwrap();
        for seed in 10..14 {
            let s = random_surface(seed, 1).over(&f);
            for side in [Side::X, Side::Y] {
                for a in enumerate_projective_plane(&f) {
                    let sol = solve_fiber(&s, &a, side).unwrap();
                    if sol.degenerate {
                        continue;
                    }
                    match sol.points.as_slice() {
                        [p] => assert_eq!(conjugate(&s, p, side).unwrap(), *p),
                        [p, q] => {
                            assert_eq!(conjugate(&s, p, side).unwrap(), *q);
                            assert_eq!(conjugate(&s, q, side).unwrap(), *p);
                        }
                        _ => {}
                    }
                }
            }
        }
    }

    #[test]
    fn tangent_fiber_is_fixed() {
        let f = TableField::for_prime_power(7, 1).unwrap();
        let mut found = false;
        for seed in 20..30 {
            let s = random_surface(seed, 1).over(&f);
            for a in enumerate_projective_plane(&f) {
                let sol = solve_fiber(&s, &a, Side::Y).unwrap();
                if sol.tangent && !sol.degenerate {
                    let p = &sol.points[0];
                    assert_eq!(conjugate(&s, p, Side::Y).unwrap(), *p);
                    found = true;
                }
            }
        }
        assert!(found);
    }

    #[test]
    fn period_one_point_is_fixed() {
        let s = testdata::periodic_table()[0].surface.over(&Rationals);
        let p = zpoint([0, 0, 1], [1, 0, 1]);
        assert_eq!(phi(&s, &p).unwrap(), p);
    }

    #[test]
    fn period_two_point() {
        let s = testdata::periodic_table()[1].surface.over(&Rationals);
        let p = zpoint([3, 1, 3], [1, 0, 0]);
        let q = phi(&s, &p).unwrap();
        assert_ne!(q, p);
        assert_eq!(phi(&s, &q).unwrap(), p);
        assert_eq!(phi_inverse(&s, &q).unwrap(), p);
    }

    #[test]
    fn period_eleven_orbit_over_q() {
        let s = testdata::periodic_table()[10].surface.over(&Rationals);
        let p = normalize_point(&Rationals, &zpoint([1, 0, -1], [-2, 1, 0])).unwrap();
        let mut cur = p.clone();
        for step in 1..=11 {
            cur = phi(&s, &cur).unwrap();
            // coordinates stay primitive integers
            assert!(cur.x.iter().chain(cur.y.iter()).all(|c| c.is_integer()));
            assert_eq!(cur == p, step == 11, "step {step}");
        }
    }

    #[test]
    fn off_surface_point_rejected() {
        let s = testdata::periodic_table()[0].surface.over(&Rationals);
        let p = zpoint([1, 0, 0], [1, 0, 0]);
        assert!(matches!(
            conjugate(&s, &p, Side::X),
            Err(Error::NotOnSurface(_))
        ));
    }

    #[test]
    fn char_two_has_no_quadratic_formula() {
        let f = TableField::for_prime_power(2, 1).unwrap();
        let s = testdata::periodic_table()[0].surface.over(&f);
        let a = [f.one(), f.zero(), f.zero()];
        assert_eq!(
            solve_fiber(&s, &a, Side::X),
            Err(Error::UnsupportedCharacteristic)
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn involutions_fix_their_side(seed in 0u64..1000, p in prop::sample::select(vec![3u64, 5, 7])) {
            let f = TableField::for_prime_power(p, 1).unwrap();
            let s = random_surface(seed, 1).over(&f);
            for a in enumerate_projective_plane(&f) {
                let sol = solve_fiber(&s, &a, Side::X).unwrap();
                if sol.degenerate { return Ok(()); }
                for pt in &sol.points {
                    let Ok(c) = conjugate(&s, pt, Side::Y) else { continue };
                    prop_assert_eq!(&c.y, &pt.y);
                    let c = conjugate(&s, pt, Side::X).unwrap();
                    prop_assert_eq!(&c.x, &pt.x);
                    prop_assert_eq!(&conjugate(&s, &c, Side::X).unwrap(), pt);
                }
            }
        }
    }
}
