//! Exact arithmetic in `F_p` and in `Q`.
//!
//! A [`FieldCtx`] is either a prime modulus, verified prime at construction,
//! or the rationals. Elements carry their canonical representative: an
//! integer in `[0, p)` or a fraction in lowest terms. Equality, ordering and
//! hashing are structural on that representative.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A modulus that has been checked to be prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Modulus(u64);

impl Modulus {
    pub fn new(p: u64) -> Result<Self> {
        if is_prime_u64(p) {
            Ok(Modulus(p))
        } else {
            Err(Error::NonPrimeModulus(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldCtx {
    Prime(Modulus),
    Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Residue(u64),
    Ratio(BigRational),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Inv,
    Neg,
}

/// Exponents appearing in the size-versus-characteristic conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GuardExponent {
    /// `n < p^{1/4}`
    Quarter,
    /// `n < p^{18/35}`
    EighteenThirtyFifths,
}

impl FieldCtx {
    pub fn prime(p: u64) -> Result<Self> {
        Modulus::new(p).map(FieldCtx::Prime)
    }

    pub fn rational() -> Self {
        FieldCtx::Rational
    }

    /// The characteristic, `None` for the rationals.
    pub fn modulus(&self) -> Option<u64> {
        match self {
            FieldCtx::Prime(m) => Some(m.get()),
            FieldCtx::Rational => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, FieldCtx::Rational)
    }

    pub fn zero(&self) -> Element {
        self.int(0)
    }

    pub fn one(&self) -> Element {
        self.int(1)
    }

    pub fn int(&self, v: i64) -> Element {
        match self {
            FieldCtx::Prime(m) => Element::Residue(reduce_i128(v as i128, m.get())),
            FieldCtx::Rational => Element::Ratio(BigRational::from_integer(BigInt::from(v))),
        }
    }

    pub fn big_int(&self, v: &BigInt) -> Element {
        match self {
            FieldCtx::Prime(m) => {
                let r = v.mod_floor(&BigInt::from(m.get()));
                Element::Residue(u64::try_from(r).expect("residue fits in u64"))
            }
            FieldCtx::Rational => Element::Ratio(BigRational::from_integer(v.clone())),
        }
    }

    pub fn frac(&self, num: i64, den: i64) -> Result<Element> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        self.div(&self.int(num), &self.int(den))
    }

    pub fn contains(&self, e: &Element) -> bool {
        match (self, e) {
            (FieldCtx::Prime(m), Element::Residue(v)) => *v < m.get(),
            (FieldCtx::Rational, Element::Ratio(_)) => true,
            _ => false,
        }
    }

    /// Parses an integer (`-3`, `12`) or a fraction (`1/2`, `-5/7`).
    pub fn parse(&self, s: &str) -> Result<Element> {
        let s = s.trim();
        let parse_int = |t: &str| {
            BigInt::from_str(t.trim()).map_err(|_| Error::Parse(format!("not an integer: {t:?}")))
        };
        match s.split_once('/') {
            None => Ok(self.big_int(&parse_int(s)?)),
            Some((n, d)) => {
                let n = self.big_int(&parse_int(n)?);
                let d = self.big_int(&parse_int(d)?);
                self.div(&n, &d)
            }
        }
    }

    pub fn add(&self, x: &Element, y: &Element) -> Element {
        match (self, x, y) {
            (FieldCtx::Prime(m), Element::Residue(a), Element::Residue(b)) => {
                Element::Residue(((*a as u128 + *b as u128) % m.get() as u128) as u64)
            }
            (FieldCtx::Rational, Element::Ratio(a), Element::Ratio(b)) => Element::Ratio(a + b),
            _ => mismatch(),
        }
    }

    pub fn neg(&self, x: &Element) -> Element {
        match (self, x) {
            (FieldCtx::Prime(m), Element::Residue(a)) => {
                Element::Residue(if *a == 0 { 0 } else { m.get() - a })
            }
            (FieldCtx::Rational, Element::Ratio(a)) => Element::Ratio(-a),
            _ => mismatch(),
        }
    }

    pub fn sub(&self, x: &Element, y: &Element) -> Element {
        self.add(x, &self.neg(y))
    }

    pub fn mul(&self, x: &Element, y: &Element) -> Element {
        match (self, x, y) {
            (FieldCtx::Prime(m), Element::Residue(a), Element::Residue(b)) => {
                Element::Residue(mul_mod(*a, *b, m.get()))
            }
            (FieldCtx::Rational, Element::Ratio(a), Element::Ratio(b)) => Element::Ratio(a * b),
            _ => mismatch(),
        }
    }

    pub fn inv(&self, x: &Element) -> Result<Element> {
        if x.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(match (self, x) {
            (FieldCtx::Prime(m), Element::Residue(a)) => Element::Residue(inv_mod(*a, m.get())),
            (FieldCtx::Rational, Element::Ratio(a)) => Element::Ratio(a.recip()),
            _ => mismatch(),
        })
    }

    pub fn div(&self, x: &Element, y: &Element) -> Result<Element> {
        Ok(self.mul(x, &self.inv(y)?))
    }

    pub fn pow(&self, x: &Element, mut k: u64) -> Element {
        let mut base = x.clone();
        let mut acc = self.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            k >>= 1;
        }
        acc
    }

    /// Checked arithmetic entry point. `y` is ignored for unary operations.
    pub fn arith(&self, op: ArithOp, x: &Element, y: Option<&Element>) -> Result<Element> {
        if !self.contains(x) || y.is_some_and(|y| !self.contains(y)) {
            return Err(Error::CtxMismatch);
        }
        let rhs = || y.ok_or_else(|| Error::BadParams(format!("{op:?} needs two operands")));
        match op {
            ArithOp::Add => Ok(self.add(x, rhs()?)),
            ArithOp::Sub => Ok(self.sub(x, rhs()?)),
            ArithOp::Mul => Ok(self.mul(x, rhs()?)),
            ArithOp::Div => self.div(x, rhs()?),
            ArithOp::Inv => self.inv(x),
            ArithOp::Neg => Ok(self.neg(x)),
        }
    }

    /// `true` iff the set size `n` is below the characteristic threshold
    /// `p^{exponent}`, decided in exact integer arithmetic. Always true over `Q`.
    pub fn char_guard(&self, n: u64, exponent: GuardExponent) -> bool {
        let Some(p) = self.modulus() else {
            return true;
        };
        let n = BigUint::from(n);
        let p = BigUint::from(p);
        match exponent {
            GuardExponent::Quarter => n.pow(4) < p,
            GuardExponent::EighteenThirtyFifths => n.pow(35) < p.pow(18),
        }
    }

    /// Multiplicative order of a nonzero residue. `None` over `Q` unless `x = ±1`.
    pub fn multiplicative_order(&self, x: &Element) -> Option<u64> {
        if x.is_zero() {
            return None;
        }
        match (self, x) {
            (FieldCtx::Prime(m), Element::Residue(a)) => {
                let p = m.get();
                let mut order = p - 1;
                for (q, _) in factorize(p - 1) {
                    while order % q == 0 && pow_mod(*a, order / q, p) == 1 {
                        order /= q;
                    }
                }
                Some(order)
            }
            (FieldCtx::Rational, Element::Ratio(r)) => {
                if r.is_one() {
                    Some(1)
                } else if (-r).is_one() {
                    Some(2)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Smallest primitive root of `F_p^*`.
    pub fn primitive_root(&self) -> Option<Element> {
        let p = self.modulus()?;
        if p == 2 {
            return Some(Element::Residue(1));
        }
        let factors = factorize(p - 1);
        (2..p)
            .find(|&g| factors.iter().all(|&(q, _)| pow_mod(g, (p - 1) / q, p) != 1))
            .map(Element::Residue)
    }
}

impl Element {
    pub fn is_zero(&self) -> bool {
        match self {
            Element::Residue(v) => *v == 0,
            Element::Ratio(r) => r.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Element::Residue(v) => *v == 1,
            Element::Ratio(r) => r.is_one(),
        }
    }

    /// The residue, when this is an element of `F_p`.
    pub fn residue(&self) -> Option<u64> {
        match self {
            Element::Residue(v) => Some(*v),
            Element::Ratio(_) => None,
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Residue(v) => write!(f, "{v}"),
            Element::Ratio(r) if r.denom().is_one() => write!(f, "{}", r.numer()),
            Element::Ratio(r) => {
                let sign = if r.is_negative() { "-" } else { "" };
                write!(f, "{sign}{}/{}", r.numer().abs(), r.denom())
            }
        }
    }
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl fmt::Display for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldCtx::Prime(m) => write!(f, "{}", m.get()),
            FieldCtx::Rational => f.write_str("rational"),
        }
    }
}

impl FromStr for FieldCtx {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("rational") || s == "0" || s.eq_ignore_ascii_case("q") {
            return Ok(FieldCtx::Rational);
        }
        let p = s
            .parse::<u64>()
            .map_err(|_| Error::Parse(format!("expected a prime or `rational`, got {s:?}")))?;
        FieldCtx::prime(p)
    }
}

impl Serialize for FieldCtx {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

fn mismatch() -> ! {
    panic!("element does not belong to this field context")
}

fn reduce_i128(v: i128, p: u64) -> u64 {
    v.rem_euclid(p as i128) as u64
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    reduce_i128(old_s, p)
}

/// Deterministic Miller-Rabin; the witness set is exact for all `n < 2^64`.
pub fn is_prime_u64(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Trial-division factorization, adequate for the desk-scale moduli used here.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut q = 2u64;
    while q.saturating_mul(q) <= n {
        if n.is_multiple_of(q) {
            let mut e = 0;
            while n.is_multiple_of(q) {
                n /= q;
                e += 1;
            }
            out.push((q, e));
        }
        q += if q == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_mul_wraps() {
        let f = FieldCtx::prime(7).unwrap();
        assert_eq!(f.mul(&f.int(3), &f.int(5)), f.int(1));
    }

    #[test]
    fn rational_div_is_reduced() {
        let q = FieldCtx::rational();
        let half = q.div(&q.int(1), &q.int(2)).unwrap();
        assert_eq!(half.to_string(), "1/2");
        assert_eq!(q.div(&q.int(2), &q.int(4)).unwrap(), half);
        assert_eq!(q.parse("-6/4").unwrap().to_string(), "-3/2");
    }

    #[test]
    fn inverse_of_zero_fails() {
        let f = FieldCtx::prime(7).unwrap();
        assert_eq!(f.inv(&f.int(0)), Err(Error::DivisionByZero));
        assert_eq!(
            f.arith(ArithOp::Inv, &f.int(0), None),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn rejects_composite_modulus() {
        assert_eq!(FieldCtx::prime(91), Err(Error::NonPrimeModulus(91)));
        assert_eq!(FieldCtx::prime(1), Err(Error::NonPrimeModulus(1)));
        assert!(FieldCtx::prime(4294967311).is_ok());
    }

    #[test]
    fn miller_rabin_matches_sieve() {
        let limit = 5000usize;
        let mut sieve = vec![true; limit];
        sieve[0] = false;
        sieve[1] = false;
        for i in 2..limit {
            if sieve[i] {
                for j in (i * i..limit).step_by(i) {
                    sieve[j] = false;
                }
            }
        }
        for (n, &is_p) in sieve.iter().enumerate() {
            assert_eq!(is_prime_u64(n as u64), is_p, "n = {n}");
        }
        // strong pseudoprime to bases 2..=37 is out of reach; spot-check known ones
        assert!(!is_prime_u64(3_215_031_751));
        assert!(is_prime_u64(18_446_744_073_709_551_557));
    }

    #[test]
    fn char_guard_uses_strict_fourth_power() {
        let f = FieldCtx::prime(101).unwrap();
        assert!(f.char_guard(3, GuardExponent::Quarter));
        assert!(!f.char_guard(4, GuardExponent::Quarter));
        assert!(FieldCtx::rational().char_guard(1000, GuardExponent::Quarter));
        // 2^35 < 101^18 easily; 14^35 vs 101^18
        assert!(f.char_guard(2, GuardExponent::EighteenThirtyFifths));
    }

    #[test]
    fn arith_rejects_foreign_elements() {
        let f = FieldCtx::prime(7).unwrap();
        let q = FieldCtx::rational();
        assert_eq!(
            f.arith(ArithOp::Add, &q.int(1), Some(&f.int(1))),
            Err(Error::CtxMismatch)
        );
        assert_eq!(
            f.arith(ArithOp::Add, &Element::Residue(9), Some(&f.int(1))),
            Err(Error::CtxMismatch)
        );
    }

    #[test]
    fn field_axioms_exhaustive_small_primes() {
        for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
            let f = FieldCtx::prime(p).unwrap();
            let all: Vec<Element> = (0..p as i64).map(|v| f.int(v)).collect();
            for x in &all {
                if !x.is_zero() {
                    assert!(f.mul(x, &f.inv(x).unwrap()).is_one());
                }
                for y in &all {
                    assert_eq!(f.mul(x, y), f.mul(y, x));
                    for z in &all {
                        assert_eq!(f.mul(&f.mul(x, y), z), f.mul(x, &f.mul(y, z)));
                        assert_eq!(
                            f.mul(x, &f.add(y, z)),
                            f.add(&f.mul(x, y), &f.mul(x, z))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn orders_and_primitive_roots() {
        let f = FieldCtx::prime(101).unwrap();
        assert_eq!(f.multiplicative_order(&f.int(36)), Some(5));
        assert_eq!(f.multiplicative_order(&f.int(-36)), Some(10));
        assert_eq!(f.primitive_root(), Some(f.int(2)));
        let big = FieldCtx::prime(4294967311).unwrap();
        assert_eq!(big.primitive_root(), Some(big.int(3)));
        let q = FieldCtx::rational();
        assert_eq!(q.multiplicative_order(&q.int(-1)), Some(2));
        assert_eq!(q.multiplicative_order(&q.int(2)), None);
    }
}
