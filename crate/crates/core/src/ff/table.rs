use num_bigint::BigUint;

use super::{format_residues, prime_factors, Field, FieldDescriptor, FiniteField};
use crate::error::{Error, Result};

const ZERO: u32 = u32::MAX;
const MAX_ORDER: u64 = 1 << 26;

/// `F_q` with elements stored as discrete logarithms to a fixed primitive
/// element `g`; addition goes through the Zech table `log(1 + g^n)`.
///
/// Multiplication, inversion and square roots are index arithmetic modulo
/// `q - 1`, which makes this the backend for bulk point counting.
#[derive(Clone, Debug)]
pub struct TableField {
    p: u64,
    m: u32,
    q: u64,
    /// `q - 1`, the order of the unit group.
    units: u32,
    /// Log of `-1`; zero in characteristic 2.
    minus_one: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    zech: Vec<u32>,
}

impl TableField {
    pub fn new(desc: &FieldDescriptor) -> Result<Self> {
        let p = desc.prime();
        let m = desc.degree();
        let q = desc.order();
        if q > MAX_ORDER {
            return Err(Error::FieldTooLarge { p, m });
        }
        let units = (q - 1) as u32;
        let g = primitive_element(desc);

        let mut exp = vec![0u32; units as usize];
        let mut log = vec![ZERO; q as usize];
        let mut cur = desc.one();
        for k in 0..units {
            let idx = desc.index_of(&cur) as u32;
            exp[k as usize] = idx;
            log[idx as usize] = k;
            cur = desc.mul(&cur, &g);
        }

        let zech = (0..units)
            .map(|n| {
                let idx = exp[n as usize] as u64;
                let c0 = idx % p;
                let bumped = idx - c0 + (c0 + 1) % p;
                log[bumped as usize]
            })
            .collect();

        let minus_one = if p == 2 { 0 } else { units / 2 };
        Ok(TableField {
            p,
            m,
            q,
            units,
            minus_one,
            exp,
            log,
            zech,
        })
    }

    /// Shorthand for `TableField::new(&make_extension(p, m)?)`.
    pub fn for_prime_power(p: u64, m: u32) -> Result<Self> {
        Self::new(&super::make_extension(p, m)?)
    }

    #[inline]
    fn wrap(&self, s: u32) -> u32 {
        if s >= self.units {
            s - self.units
        } else {
            s
        }
    }
}

fn primitive_element(desc: &FieldDescriptor) -> super::FieldElement {
    let q = desc.order();
    if q == 2 {
        return desc.one();
    }
    let factors = prime_factors(q - 1);
    (1..q)
        .map(|i| desc.element(i))
        .find(|g| {
            factors.iter().all(|&r| {
                let e = BigUint::from((q - 1) / r);
                desc.pow(g, &e) != desc.one()
            })
        })
        .expect("the unit group of a finite field is cyclic")
}

impl Field for TableField {
    type Elem = u32;

    fn characteristic(&self) -> u64 {
        self.p
    }

    #[inline]
    fn zero(&self) -> u32 {
        ZERO
    }

    #[inline]
    fn one(&self) -> u32 {
        0
    }

    fn from_i64(&self, v: i64) -> u32 {
        self.log[v.rem_euclid(self.p as i64) as usize]
    }

    #[inline]
    fn add(&self, a: &u32, b: &u32) -> u32 {
        let (a, b) = (*a, *b);
        if a == ZERO {
            return b;
        }
        if b == ZERO {
            return a;
        }
        let d = if b >= a { b - a } else { b + self.units - a };
        let z = self.zech[d as usize];
        if z == ZERO {
            ZERO
        } else {
            self.wrap(a + z)
        }
    }

    #[inline]
    fn sub(&self, a: &u32, b: &u32) -> u32 {
        self.add(a, &self.neg(b))
    }

    #[inline]
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        if *a == ZERO || *b == ZERO {
            ZERO
        } else {
            self.wrap(a + b)
        }
    }

    #[inline]
    fn neg(&self, a: &u32) -> u32 {
        if *a == ZERO {
            ZERO
        } else {
            self.wrap(a + self.minus_one)
        }
    }

    #[inline]
    fn is_zero(&self, a: &u32) -> bool {
        *a == ZERO
    }

    fn inv(&self, a: &u32) -> Option<u32> {
        if *a == ZERO {
            None
        } else if *a == 0 {
            Some(0)
        } else {
            Some(self.units - a)
        }
    }

    /// Halves the logarithm; `g^k` is a square iff `k` is even.
    fn sqrt(&self, a: &u32) -> Result<Vec<u32>> {
        if self.p == 2 {
            return Err(Error::UnsupportedCharacteristic);
        }
        if *a == ZERO {
            return Ok(vec![ZERO]);
        }
        if a % 2 == 1 {
            return Ok(Vec::new());
        }
        let r = a / 2;
        let mut roots = vec![r, self.neg(&r)];
        roots.sort_by_key(|e| self.index_of(e));
        Ok(roots)
    }

    #[inline]
    fn is_square(&self, a: &u32) -> Result<bool> {
        if self.p == 2 {
            return Err(Error::UnsupportedCharacteristic);
        }
        Ok(*a == ZERO || a.is_multiple_of(2))
    }

    fn format(&self, a: &u32) -> String {
        format_residues(&self.residues(a))
    }
}

impl FiniteField for TableField {
    fn prime(&self) -> u64 {
        self.p
    }

    fn degree(&self) -> u32 {
        self.m
    }

    fn order(&self) -> u64 {
        self.q
    }

    #[inline]
    fn element(&self, index: u64) -> u32 {
        self.log[index as usize]
    }

    #[inline]
    fn index_of(&self, a: &u32) -> u64 {
        if *a == ZERO {
            0
        } else {
            self.exp[*a as usize] as u64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::make_extension;

    #[test]
    fn agrees_with_polynomial_basis() {
        for &(p, m) in &[(2u64, 3u32), (3, 1), (3, 2), (5, 2), (3, 3), (7, 2)] {
            let desc = make_extension(p, m).unwrap();
            let tf = TableField::new(&desc).unwrap();
            let q = desc.order();
            for i in 0..q {
                assert_eq!(tf.index_of(&tf.element(i)), i);
                for j in 0..q {
                    let (a, b) = (tf.element(i), tf.element(j));
                    let (da, db) = (desc.element(i), desc.element(j));
                    assert_eq!(
                        tf.index_of(&tf.add(&a, &b)),
                        desc.index_of(&desc.add(&da, &db))
                    );
                    assert_eq!(
                        tf.index_of(&tf.sub(&a, &b)),
                        desc.index_of(&desc.sub(&da, &db))
                    );
                    assert_eq!(
                        tf.index_of(&tf.mul(&a, &b)),
                        desc.index_of(&desc.mul(&da, &db))
                    );
                }
            }
        }
    }

    #[test]
    fn square_roots_match_tonelli_shanks() {
        for &(p, m) in &[(3u64, 2u32), (5, 2), (7, 1), (17, 1), (3, 5), (7, 3)] {
            let desc = make_extension(p, m).unwrap();
            let tf = TableField::new(&desc).unwrap();
            for i in 0..desc.order() {
                let via_table: Vec<u64> = tf
                    .sqrt(&tf.element(i))
                    .unwrap()
                    .iter()
                    .map(|r| tf.index_of(r))
                    .collect();
                let via_ts: Vec<u64> = desc
                    .sqrt(&desc.element(i))
                    .unwrap()
                    .iter()
                    .map(|r| desc.index_of(r))
                    .collect();
                assert_eq!(via_table, via_ts, "q={} a={i}", desc.order());
            }
        }
    }

    #[test]
    fn constants() {
        let tf = TableField::for_prime_power(7, 1).unwrap();
        assert_eq!(tf.index_of(&tf.from_i64(-1)), 6);
        assert_eq!(tf.index_of(&tf.from_i64(9)), 2);
        assert!(tf.is_zero(&tf.from_i64(14)));
        assert_eq!(tf.format(&tf.from_i64(3)), "3");
        let f9 = TableField::for_prime_power(3, 2).unwrap();
        assert_eq!(f9.format(&f9.element(5)), "[2,1]");
    }

    #[test]
    fn too_large() {
        assert!(matches!(
            TableField::for_prime_power(3, 17),
            Err(Error::FieldTooLarge { .. })
        ));
    }
}
