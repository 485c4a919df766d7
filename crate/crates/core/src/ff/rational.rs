use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Field;
use crate::error::Result;

/// The field of rational numbers.
///
/// Projective normalization differs from the finite fields: vectors are
/// scaled to primitive integer vectors whose first nonzero entry is positive,
/// so iterated maps never accumulate denominators.
#[derive(Clone, Copy, Debug, Default)]
pub struct Rationals;

impl Rationals {
    /// Primitive integer representative of a rational projective triple.
    pub fn primitive(v: &[BigRational; 3]) -> Option<[BigInt; 3]> {
        if v.iter().all(|c| c.is_zero()) {
            return None;
        }
        let lcm = v.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut ints: Vec<BigInt> = v.iter().map(|c| c.numer() * (&lcm / c.denom())).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let first_negative = ints.iter().find(|c| !c.is_zero()).unwrap().is_negative();
        for c in &mut ints {
            *c /= &g;
            if first_negative {
                *c = -&*c;
            }
        }
        let [a, b, c]: [BigInt; 3] = ints.try_into().unwrap();
        Some([a, b, c])
    }

    pub fn lift(v: &[BigInt; 3]) -> [BigRational; 3] {
        [
            BigRational::from_integer(v[0].clone()),
            BigRational::from_integer(v[1].clone()),
            BigRational::from_integer(v[2].clone()),
        ]
    }
}

fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

impl Field for Rationals {
    type Elem = BigRational;

    fn characteristic(&self) -> u64 {
        0
    }

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn one(&self) -> BigRational {
        BigRational::one()
    }

    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }

    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }

    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }

    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }

    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }

    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        (!a.is_zero()).then(|| a.recip())
    }

    /// Rational square roots exist only for squares of rationals.
    fn sqrt(&self, a: &BigRational) -> Result<Vec<BigRational>> {
        if a.is_zero() {
            return Ok(vec![BigRational::zero()]);
        }
        let (Some(n), Some(d)) = (exact_sqrt(a.numer()), exact_sqrt(a.denom())) else {
            return Ok(Vec::new());
        };
        let r = BigRational::new(n, d);
        Ok(vec![-&r, r])
    }

    fn normalize(&self, v: &[BigRational; 3]) -> Option<[BigRational; 3]> {
        Self::primitive(v).map(|p| Self::lift(&p))
    }

    fn format(&self, a: &BigRational) -> String {
        a.to_string()
    }
}
