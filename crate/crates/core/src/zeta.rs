//! Zeta function and Picard-number bound from point counts.
//!
//! For a K3 surface over `F_p` the zeta function is
//! `1/((1-T) P2(T) (1-p^2 T))` with `deg P2 = 22`. The reciprocal roots of
//! `P2` pair up as `alpha * alpha' = p^2`, so `P2(T) = prod (1 - a_i T + p^2 T^2)`
//! over 11 values `a_i = alpha_i + p^2/alpha_i`, and the counts `N_1..N_11`
//! determine it.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::{binomial, Integer};
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};

use crate::error::{Error, Result};
use crate::ff::is_prime;

/// Number of independent `a_i`, i.e. half the second Betti number.
pub const HALF_BETTI: usize = 11;

/// Integer polynomial, lowest degree first.
pub type Poly = Vec<BigInt>;

fn trim(mut p: Poly) -> Poly {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

pub fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return vec![BigInt::zero()];
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

/// First `len` terms of the power series `a / b`; `b(0)` must be a unit.
fn series_div(a: &[BigInt], b: &[BigInt], len: usize) -> Poly {
    let b0 = &b[0];
    debug_assert!(b0.abs().is_one());
    let mut out = Vec::with_capacity(len);
    for k in 0..len {
        let mut acc = a.get(k).cloned().unwrap_or_default();
        for i in 1..=k.min(b.len() - 1) {
            acc -= &b[i] * &out[k - i];
        }
        out.push(acc * b0);
    }
    out
}

/// Exact quotient `a / b` when `b(0) = +-1` divides `a`.
fn exact_div(a: &[BigInt], b: &[BigInt]) -> Option<Poly> {
    let (a, b) = (trim(a.to_vec()), trim(b.to_vec()));
    if a.len() < b.len() {
        return None;
    }
    let q = trim(series_div(&a, &b, a.len() - b.len() + 1));
    (poly_mul(&q, &b) == a).then_some(q)
}

/// Cyclotomic polynomial `Phi_n`, by dividing `x^n - 1` by `Phi_d` for the
/// proper divisors `d`.
pub fn cyclotomic(n: usize) -> Poly {
    let mut p = vec![BigInt::zero(); n + 1];
    p[0] = BigInt::from(-1);
    p[n] = BigInt::one();
    for d in (1..n).filter(|d| n.is_multiple_of(*d)) {
        let phi_d = cyclotomic(d);
        // Phi_d(0) = +-1 so the quotient is integral
        p = exact_div(&p, &phi_d).expect("cyclotomic divisor");
    }
    p
}

pub fn euler_phi(n: usize) -> usize {
    (1..=n).filter(|k| k.gcd(&n) == 1).count()
}

/// `P_k = sum_a a^k` from the counts, via
/// `P_k = sum_{j < k/2} C(k,j) q^j S_{k-2j} + [k even] 11 C(k,k/2) q^{k/2}`
/// with `q = p^2` and `S_m = N_m - 1 - q^m`.
pub fn power_sums_from_counts(counts: &[BigInt], p: u64) -> Result<Vec<BigInt>> {
    if counts.len() < HALF_BETTI {
        return Err(Error::Arity {
            what: "point counts",
            expected: HALF_BETTI,
            found: counts.len(),
        });
    }
    let q = BigInt::from(p).pow(2u32);
    let s: Vec<BigInt> = (1..=HALF_BETTI)
        .map(|m| &counts[m - 1] - 1 - q.clone().pow(m as u32))
        .collect();
    let mut out = Vec::with_capacity(HALF_BETTI);
    for k in 1..=HALF_BETTI {
        let mut acc = BigInt::zero();
        for j in 0..=(k - 1) / 2 {
            acc += binomial(BigInt::from(k), BigInt::from(j))
                * q.clone().pow(j as u32)
                * &s[k - 2 * j - 1];
        }
        if k % 2 == 0 {
            acc += BigInt::from(HALF_BETTI)
                * binomial(BigInt::from(k), BigInt::from(k / 2))
                * q.clone().pow((k / 2) as u32);
        }
        out.push(acc);
    }
    Ok(out)
}

/// Elementary symmetric functions `C_1..C_k` from power sums `P_1..P_k`.
pub fn newton_girard(power_sums: &[BigInt]) -> Result<Vec<BigInt>> {
    let mut c = vec![BigInt::one()];
    for k in 1..=power_sums.len() {
        let mut acc = BigInt::zero();
        for i in 1..=k {
            let term = &c[k - i] * &power_sums[i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        let (quot, rem) = acc.div_rem(&BigInt::from(k));
        if !rem.is_zero() {
            return Err(Error::Inconsistent(format!(
                "Newton-Girard step {k} is not integral; the counts are not those of a K3 surface"
            )));
        }
        c.push(quot);
    }
    c.remove(0);
    Ok(c)
}

/// `R(u) = u^11 - C_1 u^10 + C_2 u^9 - ...`, lowest degree first.
pub fn r_polynomial(c: &[BigInt]) -> Poly {
    let n = c.len();
    let mut out = vec![BigInt::zero(); n + 1];
    out[n] = BigInt::one();
    for (k, ck) in c.iter().enumerate() {
        let k = k + 1;
        out[n - k] = if k % 2 == 1 { -ck } else { ck.clone() };
    }
    out
}

/// `P2(T) = T^11 R((1 + p^2 T^2)/T) = sum_k (-1)^k C_k T^k (1 + p^2 T^2)^(11-k)`.
pub fn build_p2(c: &[BigInt], p: u64) -> Result<Poly> {
    if c.len() != HALF_BETTI {
        return Err(Error::Arity {
            what: "symmetric functions",
            expected: HALF_BETTI,
            found: c.len(),
        });
    }
    let q = BigInt::from(p).pow(2u32);
    let quad = vec![BigInt::one(), BigInt::zero(), q.clone()];
    let mut powers = vec![vec![BigInt::one()]];
    for _ in 0..HALF_BETTI {
        let next = poly_mul(powers.last().unwrap(), &quad);
        powers.push(next);
    }
    let mut out = vec![BigInt::zero(); 2 * HALF_BETTI + 1];
    for k in 0..=HALF_BETTI {
        let ck = if k == 0 {
            BigInt::one()
        } else {
            c[k - 1].clone()
        };
        let signed = if k % 2 == 1 { -ck } else { ck };
        for (i, coeff) in powers[HALF_BETTI - k].iter().enumerate() {
            out[i + k] += &signed * coeff;
        }
    }
    check_symmetry(&out, p)?;
    Ok(out)
}

/// Functional equation: `c_{22-k} = p^{2(11-k)} c_k`.
pub fn check_symmetry(p2: &[BigInt], p: u64) -> Result<()> {
    let deg = 2 * HALF_BETTI;
    if p2.len() != deg + 1 {
        return Err(Error::Inconsistent(format!(
            "P2 has {} coefficients",
            p2.len()
        )));
    }
    let pb = BigInt::from(p);
    for k in 0..=HALF_BETTI {
        let scale = pb.clone().pow((2 * (HALF_BETTI - k)) as u32);
        if p2[deg - k] != &p2[k] * scale {
            return Err(Error::Inconsistent(format!(
                "functional equation fails at degree {k}"
            )));
        }
    }
    Ok(())
}

/// Multiplicities `e_n` of `Phi_n(pT)` in `P2`, over all `n` with `phi(n) <= 22`.
pub fn cyclotomic_multiplicities(p2: &[BigInt], p: u64) -> Vec<(usize, usize)> {
    let deg = 2 * HALF_BETTI;
    let pb = BigInt::from(p);
    let mut rest = trim(p2.to_vec());
    let mut out = Vec::new();
    for n in (1..=120).filter(|&n| euler_phi(n) <= deg) {
        let scaled: Poly = cyclotomic(n)
            .into_iter()
            .enumerate()
            .map(|(i, c)| c * pb.clone().pow(i as u32))
            .collect();
        let mut e = 0;
        while let Some(q) = exact_div(&rest, &scaled) {
            rest = q;
            e += 1;
        }
        if e > 0 {
            out.push((n, e));
        }
    }
    out
}

/// Number of reciprocal roots `alpha` of `P2` with `alpha/p` a root of unity.
pub fn picard_upper_bound(p2: &[BigInt], p: u64) -> usize {
    cyclotomic_multiplicities(p2, p)
        .iter()
        .map(|&(n, e)| e * euler_phi(n))
        .sum()
}

/// `N_1..N_len` read back from `Z = 1/D` with `D = (1-T) P2(T) (1-p^2 T)`,
/// using `sum N_m T^m = -T D'(T) / D(T)`.
pub fn counts_from_p2(p2: &[BigInt], p: u64, len: usize) -> Vec<BigInt> {
    let q = BigInt::from(p).pow(2u32);
    let d = poly_mul(
        &poly_mul(&[BigInt::one(), BigInt::from(-1)], p2),
        &[BigInt::one(), -q],
    );
    // -T D'(T): coefficient of T^k is -k d_k
    let num: Poly = d
        .iter()
        .enumerate()
        .map(|(k, c)| -(c * BigInt::from(k)))
        .collect();
    let series = series_div(&num, &d, len + 1);
    series[1..].to_vec()
}

fn eval(p: &[BigRational], x: &BigRational) -> BigRational {
    p.iter()
        .rev()
        .fold(BigRational::zero(), |acc, c| acc * x + c)
}

fn rat_rem(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut r = a.to_vec();
    let lead = b.last().unwrap();
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let factor = r.last().unwrap() / lead;
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= &factor * c;
        }
        r.pop();
        while r.last().is_some_and(Zero::is_zero) {
            r.pop();
        }
    }
    r
}

fn sign_changes(seq: &[Vec<BigRational>], x: Option<&BigRational>) -> usize {
    let signs: Vec<i8> = seq
        .iter()
        .map(|p| {
            let v = match x {
                Some(x) => eval(p, x),
                // sign at +-infinity from the leading term
                None => p.last().unwrap().clone(),
            };
            if v.is_zero() {
                0
            } else if v.is_positive() {
                1
            } else {
                -1
            }
        })
        .filter(|&s| s != 0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

fn sign_changes_at_minus_infinity(seq: &[Vec<BigRational>]) -> usize {
    let signs: Vec<i8> = seq
        .iter()
        .map(|p| {
            let lead = p.last().unwrap();
            let s: i8 = if lead.is_positive() { 1 } else { -1 };
            if (p.len() - 1) % 2 == 1 {
                -s
            } else {
                s
            }
        })
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Whether every real root of `r` lies in `[-bound, bound]`, decided exactly
/// with a Sturm sequence.
pub fn real_roots_within(r: &[BigInt], bound: u64) -> bool {
    let b = BigInt::from(bound);
    let mut poly = trim(r.to_vec());
    // strip roots at the endpoints so they are not Sturm evaluation points
    for root in [b.clone(), -b.clone()] {
        let lin = vec![-root.clone(), BigInt::one()];
        while let Some(q) = exact_div_monic(&poly, &lin) {
            poly = q;
        }
    }
    if poly.len() <= 1 {
        return true;
    }
    let p0: Vec<BigRational> = poly
        .iter()
        .cloned()
        .map(BigRational::from_integer)
        .collect();
    let p1: Vec<BigRational> = p0
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
        .collect();
    let mut seq = vec![p0, p1];
    loop {
        let n = seq.len();
        let rem = rat_rem(&seq[n - 2], &seq[n - 1]);
        if rem.is_empty() {
            break;
        }
        seq.push(rem.into_iter().map(|c| -c).collect());
    }
    let lo = BigRational::from_integer(-b.clone());
    let hi = BigRational::from_integer(b);
    let total = sign_changes_at_minus_infinity(&seq) - sign_changes(&seq, None);
    let inside = sign_changes(&seq, Some(&lo)) - sign_changes(&seq, Some(&hi));
    total == inside
}

/// Division by a monic linear or higher polynomial, exact or `None`.
fn exact_div_monic(a: &[BigInt], b: &[BigInt]) -> Option<Poly> {
    if a.len() < b.len() {
        return None;
    }
    let mut r = a.to_vec();
    let mut q = vec![BigInt::zero(); a.len() - b.len() + 1];
    for shift in (0..q.len()).rev() {
        let factor = r[shift + b.len() - 1].clone();
        for (i, c) in b.iter().enumerate() {
            r[shift + i] -= &factor * c;
        }
        q[shift] = factor;
    }
    r.iter().all(Zero::is_zero).then_some(q)
}

/// Everything the pipeline derives from `N_1..N_11`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZetaData {
    pub p: u64,
    pub counts: Vec<BigInt>,
    /// `S_m = N_m - 1 - p^(2m)`, the power sums of the 22 reciprocal roots.
    pub s: Vec<BigInt>,
    pub power_sums: Vec<BigInt>,
    pub symmetric: Vec<BigInt>,
    pub r: Poly,
    pub p2: Poly,
    pub multiplicities: Vec<(usize, usize)>,
    pub picard_bound: usize,
}

impl ZetaData {
    pub fn from_counts(counts: &[BigInt], p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let power_sums = power_sums_from_counts(counts, p)?;
        let counts = counts[..HALF_BETTI].to_vec();
        let q = BigInt::from(p).pow(2u32);
        let s = (1..=HALF_BETTI)
            .map(|m| &counts[m - 1] - 1 - q.clone().pow(m as u32))
            .collect();
        let symmetric = newton_girard(&power_sums)?;
        let r = r_polynomial(&symmetric);
        let p2 = build_p2(&symmetric, p)?;
        let multiplicities = cyclotomic_multiplicities(&p2, p);
        let picard_bound = multiplicities.iter().map(|&(n, e)| e * euler_phi(n)).sum();
        Ok(ZetaData {
            p,
            counts,
            s,
            power_sums,
            symmetric,
            r,
            p2,
            multiplicities,
            picard_bound,
        })
    }

    /// The Picard number is at least 2 for every smooth Wehler surface, so a
    /// bound of 2 pins it down.
    pub fn picard_exact(&self) -> Option<usize> {
        (self.picard_bound == 2).then_some(2)
    }
}

/// Human-readable polynomial in `var`, highest degree first.
pub fn format_poly(p: &[BigInt], var: &str) -> String {
    let mut out = String::new();
    for (k, c) in p.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        let show_coeff = k == 0 || !mag.is_one();
        if show_coeff {
            out.push_str(&mag.to_string());
        }
        match k {
            0 => {}
            1 => out.push_str(var),
            _ => {
                let _ = write!(out, "{var}^{k}");
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

pub fn zeta_report(data: &ZetaData) -> String {
    let q = data.p * data.p;
    let mut out = String::new();
    let _ = writeln!(out, "p = {}", data.p);
    let _ = writeln!(out, "Z(S,T) = 1/((1-T)*P2(T)*(1-{q}T))");
    let _ = writeln!(out, "P2(T) = {}", format_poly(&data.p2, "T"));
    let _ = writeln!(out, "R(u) = {}", format_poly(&data.r, "u"));
    let mults: Vec<String> = data
        .multiplicities
        .iter()
        .map(|(n, e)| format!("Phi_{n}({}T)^{e}", data.p))
        .collect();
    let _ = writeln!(
        out,
        "cyclotomic factors: {}",
        if mults.is_empty() {
            "none".to_string()
        } else {
            mults.join(" * ")
        }
    );
    let _ = writeln!(out, "Picard upper bound: {}", data.picard_bound);
    match data.picard_exact() {
        Some(rho) => {
            let _ = writeln!(
                out,
                "Picard number exactly {rho} (lower bound 2 holds for all smooth Wehler K3 surfaces)"
            );
        }
        None => {
            let _ = writeln!(out, "Picard number between 2 and {}", data.picard_bound);
        }
    }
    out
}
