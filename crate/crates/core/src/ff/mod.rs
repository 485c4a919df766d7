//! Exact field arithmetic: prime fields, their extensions, and the rationals.
//!
//! Two finite-field backends exist. [`FieldDescriptor`] works directly in the
//! polynomial basis and is the reference implementation (Tonelli-Shanks square
//! roots). [`TableField`] is built from a descriptor and stores elements as
//! discrete logarithms with a Zech table, which is what the point counter uses.

mod poly;
mod projective;
mod rational;
mod table;

use std::fmt::Debug;
use std::hash::Hash;

pub use poly::{make_extension, FieldDescriptor, FieldElement};
pub use projective::{enumerate_projective_plane, plane_size, projective_point, ProjectivePlane};
pub use rational::Rationals;
pub use table::TableField;

use crate::error::Result;

pub trait Field {
    type Elem: Clone + PartialEq + Eq + Hash + Debug;

    /// 0 for the rationals.
    fn characteristic(&self) -> u64;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    /// Image of an integer; needs the field for the reduction.
    #[allow(clippy::wrong_self_convention)]
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;

    /// All `r` with `r * r == a`: two roots for a nonzero square, one for zero,
    /// none for a non-residue.
    fn sqrt(&self, a: &Self::Elem) -> Result<Vec<Self::Elem>>;

    fn is_square(&self, a: &Self::Elem) -> Result<bool> {
        Ok(!self.sqrt(a)?.is_empty())
    }

    fn square(&self, a: &Self::Elem) -> Self::Elem {
        self.mul(a, a)
    }

    /// Canonical representative of the projective class of `v`, or `None` for
    /// the zero vector. Over a field the first nonzero coordinate becomes 1.
    fn normalize(&self, v: &[Self::Elem; 3]) -> Option<[Self::Elem; 3]> {
        let pivot = v.iter().find(|c| !self.is_zero(c))?;
        let inv = self.inv(pivot)?;
        Some([
            self.mul(&v[0], &inv),
            self.mul(&v[1], &inv),
            self.mul(&v[2], &inv),
        ])
    }

    /// Render an element for diagnostics and serialization.
    fn format(&self, a: &Self::Elem) -> String;
}

/// A finite field whose elements can be indexed canonically.
///
/// The index of an element is its residue list `[c0, .., c_{m-1}]` read as a
/// base-`p` number with `c0` least significant.
pub trait FiniteField: Field + Sync {
    fn prime(&self) -> u64;
    fn degree(&self) -> u32;
    fn order(&self) -> u64;
    fn element(&self, index: u64) -> Self::Elem;
    fn index_of(&self, a: &Self::Elem) -> u64;

    fn residues(&self, a: &Self::Elem) -> Vec<u64> {
        let p = self.prime();
        let mut idx = self.index_of(a);
        (0..self.degree())
            .map(|_| {
                let c = idx % p;
                idx /= p;
                c
            })
            .collect()
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Odd primes in increasing order, starting at 3.
pub fn odd_primes() -> impl Iterator<Item = u64> {
    (3u64..).step_by(2).filter(|&n| is_prime(n))
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Format residue lists as `[c0,...]` (or a bare integer when `m = 1`).
pub(crate) fn format_residues(res: &[u64]) -> String {
    if res.len() == 1 {
        return res[0].to_string();
    }
    let parts: Vec<String> = res.iter().map(|c| c.to_string()).collect();
    format!("[{}]", parts.join(","))
}
