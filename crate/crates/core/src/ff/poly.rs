use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::{format_residues, is_prime, Field, FiniteField};
use crate::error::{Error, Result};

/// `F_{p^m}` presented as `F_p[t] / (modulus)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDescriptor {
    p: u64,
    m: u32,
    /// Monic, low-degree first, length `m + 1`.
    modulus: Vec<u64>,
    order: BigUint,
}

/// Residues `[c0, .., c_{m-1}]` in the polynomial basis, little-endian in `t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    pub coeffs: Vec<u64>,
}

/// The smallest monic irreducible polynomial of degree `m` over `F_p`, ordered
/// by the integer `c0 + c1 p + .. + c_{m-1} p^{m-1}`.
pub fn make_extension(p: u64, m: u32) -> Result<FieldDescriptor> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if m == 0 {
        return Err(Error::ZeroDegree);
    }
    let mut low = vec![0u64; m as usize];
    loop {
        let mut f = low.clone();
        f.push(1);
        if is_irreducible(&f, p) {
            return Ok(FieldDescriptor::with_modulus(p, f));
        }
        // next candidate in numeric order
        let mut i = 0;
        loop {
            if i == low.len() {
                // every monic polynomial of degree m was reducible, impossible
                unreachable!("no irreducible polynomial of degree {m} over F_{p}");
            }
            low[i] += 1;
            if low[i] < p {
                break;
            }
            low[i] = 0;
            i += 1;
        }
    }
}

impl FieldDescriptor {
    fn with_modulus(p: u64, modulus: Vec<u64>) -> Self {
        let m = (modulus.len() - 1) as u32;
        let order = BigUint::from(p).pow(m);
        FieldDescriptor {
            p,
            m,
            modulus,
            order,
        }
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn order_big(&self) -> &BigUint {
        &self.order
    }

    pub fn elem(&self, coeffs: &[u64]) -> FieldElement {
        let mut c: Vec<u64> = coeffs.iter().map(|v| v % self.p).collect();
        c.resize(self.m as usize, 0);
        FieldElement { coeffs: c }
    }

    pub fn pow(&self, a: &FieldElement, e: &BigUint) -> FieldElement {
        let mut result = self.one();
        for i in (0..e.bits()).rev() {
            result = self.mul(&result, &result);
            if e.bit(i) {
                result = self.mul(&result, a);
            }
        }
        result
    }

    fn is_one(&self, a: &FieldElement) -> bool {
        a.coeffs[0] == 1 && a.coeffs[1..].iter().all(|&c| c == 0)
    }

    fn first_non_residue(&self) -> FieldElement {
        let half = (&self.order - 1u32) >> 1;
        let mut idx = 2u64;
        loop {
            let z = self.element(idx);
            if !self.is_one(&self.pow(&z, &half)) {
                return z;
            }
            idx += 1;
        }
    }
}

impl Field for FieldDescriptor {
    type Elem = FieldElement;

    fn characteristic(&self) -> u64 {
        self.p
    }

    fn zero(&self) -> FieldElement {
        FieldElement {
            coeffs: vec![0; self.m as usize],
        }
    }

    fn one(&self) -> FieldElement {
        self.from_i64(1)
    }

    fn from_i64(&self, v: i64) -> FieldElement {
        let mut z = self.zero();
        z.coeffs[0] = v.rem_euclid(self.p as i64) as u64;
        z
    }

    fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let p = self.p;
        FieldElement {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| ((*x as u128 + *y as u128) % p as u128) as u64)
                .collect(),
        }
    }

    fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.add(a, &self.neg(b))
    }

    fn neg(&self, a: &FieldElement) -> FieldElement {
        let p = self.p;
        FieldElement {
            coeffs: a.coeffs.iter().map(|&x| (p - x) % p).collect(),
        }
    }

    fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        let prod = poly_mul(&a.coeffs, &b.coeffs, self.p);
        let mut r = poly_rem(&prod, &self.modulus, self.p);
        r.resize(self.m as usize, 0);
        FieldElement { coeffs: r }
    }

    fn is_zero(&self, a: &FieldElement) -> bool {
        a.coeffs.iter().all(|&c| c == 0)
    }

    fn inv(&self, a: &FieldElement) -> Option<FieldElement> {
        if self.is_zero(a) {
            return None;
        }
        Some(self.pow(a, &(&self.order - 2u32)))
    }

    /// Tonelli-Shanks in `F_q`, with the direct exponent `(q+1)/4` when
    /// `q = 3 mod 4`.
    fn sqrt(&self, a: &FieldElement) -> Result<Vec<FieldElement>> {
        if self.p == 2 {
            return Err(Error::UnsupportedCharacteristic);
        }
        if self.is_zero(a) {
            return Ok(vec![self.zero()]);
        }
        let q_minus_1 = &self.order - 1u32;
        if !self.is_one(&self.pow(a, &(&q_minus_1 >> 1))) {
            return Ok(Vec::new());
        }
        let s = q_minus_1.trailing_zeros().unwrap_or(0);
        let root = if s == 1 {
            self.pow(a, &((&self.order + 1u32) >> 2))
        } else {
            let t = &q_minus_1 >> s;
            let mut c = self.pow(&self.first_non_residue(), &t);
            let mut r = self.pow(a, &((&t + 1u32) >> 1));
            let mut tt = self.pow(a, &t);
            let mut mm = s;
            while !self.is_one(&tt) {
                let mut i = 0u64;
                let mut probe = tt.clone();
                while !self.is_one(&probe) {
                    probe = self.square(&probe);
                    i += 1;
                }
                let mut b = c.clone();
                for _ in 0..(mm - i - 1) {
                    b = self.square(&b);
                }
                r = self.mul(&r, &b);
                c = self.square(&b);
                tt = self.mul(&tt, &c);
                mm = i;
            }
            r
        };
        let other = self.neg(&root);
        let mut roots = vec![root, other];
        roots.sort_by_key(|e| self.index_of(e));
        Ok(roots)
    }

    fn format(&self, a: &FieldElement) -> String {
        format_residues(&a.coeffs)
    }
}

impl FiniteField for FieldDescriptor {
    fn prime(&self) -> u64 {
        self.p
    }

    fn degree(&self) -> u32 {
        self.m
    }

    /// Saturates at `u64::MAX` for fields too large to enumerate.
    fn order(&self) -> u64 {
        self.order.to_u64().unwrap_or(u64::MAX)
    }

    fn element(&self, mut index: u64) -> FieldElement {
        let coeffs = (0..self.m)
            .map(|_| {
                let c = index % self.p;
                index /= self.p;
                c
            })
            .collect();
        FieldElement { coeffs }
    }

    fn index_of(&self, a: &FieldElement) -> u64 {
        a.coeffs.iter().rev().fold(0u64, |acc, &c| acc * self.p + c)
    }
}

fn trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn mod_inv_u64(a: u64, p: u64) -> u64 {
    let mut result = 1u128;
    let mut base = a as u128 % p as u128;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u128;
        }
        base = base * base % p as u128;
        e >>= 1;
    }
    result as u64
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u128 * y as u128) % p as u128;
        }
    }
    out.into_iter().map(|v| v as u64).collect()
}

/// Remainder of `a` modulo a nonzero `f`.
fn poly_rem(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let mut f = f.to_vec();
    trim(&mut f);
    let df = f.len() - 1;
    let lead_inv = mod_inv_u64(f[df], p) as u128;
    while r.len() > df {
        let top = r.len() - 1;
        let coef = r[top] as u128 * lead_inv % p as u128;
        let shift = top - df;
        for (k, &fk) in f.iter().enumerate() {
            let sub = coef * fk as u128 % p as u128;
            r[shift + k] = ((r[shift + k] as u128 + p as u128 - sub) % p as u128) as u64;
        }
        trim(&mut r);
    }
    r
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn poly_powmod(base: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut result = vec![1u64];
    let mut b = poly_rem(base, f, p);
    while e > 0 {
        if e & 1 == 1 {
            result = poly_rem(&poly_mul(&result, &b, p), f, p);
        }
        b = poly_rem(&poly_mul(&b, &b, p), f, p);
        e >>= 1;
    }
    result
}

/// Ben-Or: a monic `f` of degree `m` is irreducible iff
/// `gcd(x^{p^k} - x, f) = 1` for `k = 1 ..= m/2`.
fn is_irreducible(f: &[u64], p: u64) -> bool {
    let m = f.len() - 1;
    if m == 1 {
        return true;
    }
    let x = vec![0u64, 1];
    let mut xp = x.clone();
    for _ in 0..m / 2 {
        xp = poly_powmod(&xp, p, f, p);
        let mut diff = xp.clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = (diff[1] + p - 1) % p;
        let g = poly_gcd(f, &diff, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}
