//! Small finite fields, the unitary conjugation and q-analog integers.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::geometry::SpaceConfig;

pub const SUPPORTED_ORDERS: [u32; 7] = [2, 3, 4, 5, 7, 8, 9];

/// Finite field of order `q = p^k` with elements packed as base-`p` integers.
///
/// Element `c_0 + c_1 t + ... + c_{k-1} t^{k-1}` is encoded as `Σ c_i p^i`.
#[derive(Clone)]
pub struct FiniteField {
    p: u32,
    k: u32,
    q: u32,
    modulus: Vec<u32>,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
    conj: Option<Vec<u8>>,
}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteField")
            .field("p", &self.p)
            .field("k", &self.k)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}

impl Eq for FiniteField {}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Fixed modulus per extension order, constant term first.
fn fixed_modulus(p: u32, k: u32) -> Vec<u32> {
    match (p, k) {
        (_, 1) => Vec::new(),
        (2, 2) => vec![1, 1, 1],
        (2, 3) => vec![1, 1, 0, 1],
        (3, 2) => vec![1, 0, 1],
        _ => unreachable!("order checked by caller"),
    }
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    let lead_inv = (1..p).find(|x| x * m[dm] % p == 1).unwrap();
    while r.len() > dm {
        let c = r[r.len() - 1] * lead_inv % p;
        let shift = r.len() - 1 - dm;
        for (i, &mi) in m.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p * p - c * mi % p) % p;
        }
        r.pop();
        while r.last() == Some(&0) {
            r.pop();
        }
    }
    r
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
fn is_irreducible(m: &[u32], p: u32) -> bool {
    let deg = m.len() - 1;
    for d in 1..=deg / 2 {
        let count = p.pow(d as u32);
        for code in 0..count {
            let mut f: Vec<u32> = (0..d).map(|i| code / p.pow(i as u32) % p).collect();
            f.push(1);
            if poly_rem(m, &f, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl FiniteField {
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Square root of the order when `k` is even.
    pub fn q0(&self) -> Option<u32> {
        self.k.is_multiple_of(2).then(|| self.p.pow(self.k / 2))
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.q as usize + b as usize]
    }

    #[inline]
    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg[b as usize])
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q as usize + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }

    /// Multiplicative inverse; `a` must be nonzero.
    #[inline]
    pub fn inv(&self, a: u8) -> u8 {
        debug_assert!(a != 0);
        self.inv[a as usize]
    }

    /// `a^{q0}`, or `a` itself when the order is not a square.
    #[inline]
    pub fn conj_or_id(&self, a: u8) -> u8 {
        match &self.conj {
            Some(t) => t[a as usize],
            None => a,
        }
    }

    pub fn conj(&self, a: u8) -> Result<u8> {
        match &self.conj {
            Some(t) => Ok(t[a as usize]),
            None => Err(Error::NotSquare(self.q)),
        }
    }

    pub fn pow(&self, a: u8, mut e: u64) -> u8 {
        let mut base = a;
        let mut acc = 1u8;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn elements(&self) -> impl Iterator<Item = u8> {
        0..self.q as u8
    }

    fn coeffs(&self, a: u32) -> Vec<u32> {
        (0..self.k).map(|i| a / self.p.pow(i) % self.p).collect()
    }

    fn pack(&self, c: &[u32]) -> u32 {
        c.iter()
            .enumerate()
            .map(|(i, &ci)| ci * self.p.pow(i as u32))
            .sum()
    }
}

/// Builds the field of order `p^k` with its fixed modulus.
pub fn make_field(p: u32, k: u32) -> Result<FiniteField> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let q64 = (p as u64).checked_pow(k).unwrap_or(u64::MAX);
    if k == 0 || !SUPPORTED_ORDERS.contains(&(q64.min(u32::MAX as u64) as u32)) {
        return Err(Error::UnsupportedOrder(q64));
    }
    let q = q64 as u32;
    let modulus = fixed_modulus(p, k);
    if k > 1 && !is_irreducible(&modulus, p) {
        return Err(Error::Inconsistent(format!(
            "modulus {modulus:?} is reducible over F_{p}"
        )));
    }
    let mut f = FiniteField {
        p,
        k,
        q,
        modulus,
        add: vec![0; (q * q) as usize],
        mul: vec![0; (q * q) as usize],
        neg: vec![0; q as usize],
        inv: vec![0; q as usize],
        conj: None,
    };
    for a in 0..q {
        let ca = f.coeffs(a);
        for b in 0..q {
            let cb = f.coeffs(b);
            let s: Vec<u32> = ca.iter().zip(&cb).map(|(x, y)| (x + y) % p).collect();
            f.add[(a * q + b) as usize] = f.pack(&s) as u8;
            let mut prod = vec![0u32; 2 * k as usize - 1];
            for (i, x) in ca.iter().enumerate() {
                for (j, y) in cb.iter().enumerate() {
                    prod[i + j] = (prod[i + j] + x * y) % p;
                }
            }
            while prod.last() == Some(&0) {
                prod.pop();
            }
            let red = if k > 1 {
                poly_rem(&prod, &f.modulus, p)
            } else {
                prod
            };
            let mut red = red;
            red.resize(k as usize, 0);
            f.mul[(a * q + b) as usize] = f.pack(&red) as u8;
        }
    }
    for a in 0..q as u8 {
        f.neg[a as usize] = (0..q as u8).find(|&b| f.add(a, b) == 0).unwrap();
        if a != 0 {
            f.inv[a as usize] = (1..q as u8)
                .find(|&b| f.mul(a, b) == 1)
                .ok_or_else(|| Error::Inconsistent(format!("{a} has no inverse")))?;
        }
    }
    if let Some(q0) = f.q0() {
        let t = (0..q as u8).map(|a| f.pow(a, q0 as u64)).collect();
        f.conj = Some(t);
    }
    Ok(f)
}

/// Field of a supported order `q`.
pub fn field_of_order(q: u32) -> Result<FiniteField> {
    let (p, k) = match q {
        2 | 3 | 5 | 7 => (q, 1),
        4 => (2, 2),
        8 => (2, 3),
        9 => (3, 2),
        _ => return Err(Error::UnsupportedOrder(q as u64)),
    };
    make_field(p, k)
}

/// Element tied to a shared field.
#[derive(Clone, Debug)]
pub struct FieldElement {
    value: u8,
    field: Arc<FiniteField>,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && *self.field == *other.field
    }
}

impl Eq for FieldElement {}

impl FieldElement {
    pub fn new(field: &Arc<FiniteField>, value: u32) -> Result<Self> {
        if value >= field.order() {
            return Err(Error::OutOfRange(format!(
                "element {value} in field of order {}",
                field.order()
            )));
        }
        Ok(FieldElement {
            value: value as u8,
            field: Arc::clone(field),
        })
    }

    pub fn value(&self) -> u32 {
        self.value as u32
    }

    pub fn field(&self) -> &Arc<FiniteField> {
        &self.field
    }

    pub fn inverse(&self) -> Option<Self> {
        (self.value != 0).then(|| self.with(self.field.inv(self.value)))
    }

    fn with(&self, value: u8) -> Self {
        FieldElement {
            value,
            field: Arc::clone(&self.field),
        }
    }

    fn check(&self, other: &Self) {
        assert!(
            *self.field == *other.field,
            "combining elements of different fields"
        );
    }
}

impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> Self {
        self.check(&rhs);
        self.with(self.field.add(self.value, rhs.value))
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: Self) -> Self {
        self.check(&rhs);
        self.with(self.field.sub(self.value, rhs.value))
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: Self) -> Self {
        self.check(&rhs);
        self.with(self.field.mul(self.value, rhs.value))
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> Self {
        self.with(self.field.neg(self.value))
    }
}

/// `a^{q0}`; requires a square field order.
pub fn conjugate(a: &FieldElement) -> Result<FieldElement> {
    Ok(a.with(a.field.conj(a.value)?))
}

pub fn big_pow(base: u64, exp: u64) -> BigInt {
    num_traits::pow(BigInt::from(base), exp as usize)
}

/// Gaussian binomial coefficient `[n k]_q`.
pub fn gauss_binomial(n: i64, k: i64, q: u64) -> BigInt {
    if k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for t in 0..k {
        num *= big_pow(q, (n - t) as u64) - 1;
        den *= big_pow(q, (t + 1) as u64) - 1;
    }
    num / den
}

/// Powers `q^{a/2}` for the case's parameter `e`, evaluated in base `q0`
/// when `e = 1/2` and in base `q` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HalfPowers {
    q: u64,
    q0: Option<u64>,
}

impl HalfPowers {
    /// `unitary` selects base `q0 = sqrt(q)`.
    pub fn new(q: u64, unitary: bool) -> Result<Self> {
        let q0 = if unitary {
            let r = (1..=q).find(|r| r * r >= q).unwrap_or(q);
            if r * r != q {
                return Err(Error::NotSquare(q as u32));
            }
            Some(r)
        } else {
            None
        };
        Ok(HalfPowers { q, q0 })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// The base `b` and its exponent for `q^{a2/2}`.
    fn base_exp(&self, a2: i64) -> Result<(u64, i64)> {
        match self.q0 {
            Some(q0) => Ok((q0, a2)),
            None if a2 % 2 == 0 => Ok((self.q, a2 / 2)),
            None => Err(Error::Inconsistent(format!(
                "odd doubled exponent {a2} with base q = {}",
                self.q
            ))),
        }
    }

    /// `q^{a2/2}` for `a2 ≥ 0`.
    pub fn int(&self, a2: i64) -> Result<BigInt> {
        let (b, e) = self.base_exp(a2)?;
        if e < 0 {
            return Err(Error::NonIntegral(format!("q^({a2}/2)")));
        }
        Ok(big_pow(b, e as u64))
    }

    /// `q^{a2/2}` for any sign of `a2`.
    pub fn rat(&self, a2: i64) -> Result<BigRational> {
        let (b, e) = self.base_exp(a2)?;
        let mag = big_pow(b, e.unsigned_abs());
        Ok(if e >= 0 {
            BigRational::from_integer(mag)
        } else {
            BigRational::new(BigInt::one(), mag)
        })
    }

    /// Valuation base: `q0` in the unitary case, `q` otherwise.
    pub fn base(&self) -> u64 {
        self.q0.unwrap_or(self.q)
    }

    /// Number of base steps per unit power of `q`.
    pub fn steps_per_q(&self) -> i64 {
        if self.q0.is_some() {
            2
        } else {
            1
        }
    }
}

/// `q^{e t}` as an integer power of the case's base.
pub fn e_power(config: &SpaceConfig, t: i64) -> Result<BigInt> {
    config.half_powers().int(config.e2() as i64 * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_fields() -> Vec<FiniteField> {
        SUPPORTED_ORDERS
            .iter()
            .map(|&q| field_of_order(q).unwrap())
            .collect()
    }

    #[test]
    fn field_axioms_exhaustive() {
        for f in all_fields() {
            let q = f.order() as u8;
            for a in 0..q {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), 1);
                }
                for b in 0..q {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in 0..q {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn f4_generator() {
        let f = make_field(2, 2).unwrap();
        // t = 2, t + 1 = 3
        assert_eq!(f.mul(2, 3), 1);
        assert_eq!(f.conj(2).unwrap(), 3);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(make_field(4, 1), Err(Error::NotPrime(4))));
        assert!(matches!(make_field(2, 4), Err(Error::UnsupportedOrder(16))));
        assert!(matches!(make_field(11, 1), Err(Error::UnsupportedOrder(11))));
        let f = make_field(3, 1).unwrap();
        assert!(f.conj(1).is_err());
    }

    #[test]
    fn conjugation_is_involutive_automorphism() {
        for f in all_fields().into_iter().filter(|f| f.k() % 2 == 0) {
            let q0 = f.q0().unwrap() as u8;
            let mut fixed = 0;
            for a in f.elements() {
                let c = f.conj(a).unwrap();
                assert_eq!(f.conj(c).unwrap(), a);
                if c == a {
                    fixed += 1;
                }
                for b in f.elements() {
                    assert_eq!(f.conj(f.add(a, b)).unwrap(), f.add(c, f.conj(b).unwrap()));
                    assert_eq!(f.conj(f.mul(a, b)).unwrap(), f.mul(c, f.conj(b).unwrap()));
                }
            }
            assert_eq!(fixed, q0);
        }
    }

    #[test]
    fn element_wrapper() {
        let f = Arc::new(make_field(2, 2).unwrap());
        let w = FieldElement::new(&f, 2).unwrap();
        let w1 = FieldElement::new(&f, 3).unwrap();
        assert_eq!((w.clone() * w1.clone()).value(), 1);
        assert_eq!(conjugate(&w).unwrap(), w1);
        assert_eq!(conjugate(&FieldElement::new(&f, 0).unwrap()).unwrap().value(), 0);
        assert_eq!(conjugate(&FieldElement::new(&f, 1).unwrap()).unwrap().value(), 1);
        assert!(FieldElement::new(&f, 4).is_err());
        assert_eq!(w.inverse().unwrap(), w1);
    }

    /// Counts `k`-subspaces of `F_q^n` by counting ordered bases.
    fn subspace_count(n: u32, k: u32, q: u64) -> u64 {
        let mut num = 1u64;
        let mut den = 1u64;
        for i in 0..k {
            num *= q.pow(n) - q.pow(i);
            den *= q.pow(k) - q.pow(i);
        }
        num / den
    }

    #[test]
    fn gauss_binomial_values() {
        assert_eq!(gauss_binomial(5, 0, 3), BigInt::one());
        assert_eq!(gauss_binomial(2, 1, 2), BigInt::from(3));
        assert_eq!(gauss_binomial(4, 2, 2), BigInt::from(35));
        assert_eq!(gauss_binomial(3, 4, 2), BigInt::zero());
        assert_eq!(gauss_binomial(3, -1, 2), BigInt::zero());
        for q in [2u64, 3, 4, 5] {
            for n in 0..6u32 {
                for k in 0..=n {
                    assert_eq!(
                        gauss_binomial(n as i64, k as i64, q),
                        BigInt::from(subspace_count(n, k, q))
                    );
                }
            }
        }
    }

    #[test]
    fn half_powers() {
        let h = HalfPowers::new(4, true).unwrap();
        assert_eq!(h.int(1).unwrap(), BigInt::from(2));
        assert_eq!(h.rat(-3).unwrap(), BigRational::new(1.into(), 8.into()));
        let s = HalfPowers::new(3, false).unwrap();
        assert!(matches!(s.int(1), Err(Error::Inconsistent(_))));
        assert_eq!(s.int(4).unwrap(), BigInt::from(9));
        assert!(HalfPowers::new(8, true).is_err());
    }
}
