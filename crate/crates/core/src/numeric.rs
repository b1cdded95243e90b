//! Real-number helpers: compensated summation and certified comparisons
//! against natural logarithms of integers.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};

/// Relative tolerance used whenever two fractional-moment energies are compared.
pub const ENERGY_REL_TOL: f64 = 1e-9;

/// Kahan-Babuska (Neumaier) compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// `a >= b` up to relative tolerance.
pub fn ge_rel(a: f64, b: f64, tol: f64) -> bool {
    a >= b || (b - a) <= tol * a.abs().max(b.abs())
}

/// `a <= b` up to relative tolerance.
pub fn le_rel(a: f64, b: f64, tol: f64) -> bool {
    ge_rel(b, a, tol)
}

pub fn biguint_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Natural logarithm of a big integer without overflowing `f64`.
pub fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return biguint_to_f64(x).ln();
    }
    let shift = bits - 64;
    biguint_to_f64(&(x >> shift)).ln() + shift as f64 * std::f64::consts::LN_2
}

const FIXED_BITS: u64 = 256;

/// `atanh(num/den)` in fixed point with `FIXED_BITS` fractional bits, for `0 <= num/den <= 1/3`.
fn atanh_fixed(num: &BigInt, den: &BigInt) -> BigInt {
    let one = BigInt::from(1) << FIXED_BITS;
    let z = (&one * num) / den;
    let z2 = (&z * &z) >> FIXED_BITS;
    let mut power = z.clone();
    let mut acc = BigInt::zero();
    let mut k = 1u64;
    while !power.is_zero() {
        acc += &power / BigInt::from(k);
        power = (&power * &z2) >> FIXED_BITS;
        k += 2;
    }
    acc
}

/// `ln(n)` in fixed point with `FIXED_BITS` fractional bits; absolute error below `2^-240`.
fn ln_fixed(n: u64) -> BigInt {
    assert!(n >= 1);
    let k = 63 - n.leading_zeros() as u64; // 2^k <= n < 2^{k+1}
    let ln2 = atanh_fixed(&BigInt::from(1), &BigInt::from(3)) * 2;
    // n / 2^k = m in [1, 2); ln m = 2 atanh((n - 2^k) / (n + 2^k))
    let pow = BigInt::from(1u128 << k);
    let nb = BigInt::from(n);
    let ln_m = atanh_fixed(&(&nb - &pow), &(&nb + &pow)) * 2;
    ln2 * BigInt::from(k) + ln_m
}

/// Compares `ln(n)` with the rational `num/den` (`den > 0`), certified.
///
/// For `n >= 2` the logarithm is transcendental, so it never equals a
/// rational; the fixed-point path only runs when the `f64` estimate is too
/// close to call.
pub fn cmp_ln_rational(n: u64, num: &BigUint, den: &BigUint) -> Ordering {
    assert!(!den.is_zero());
    if n == 1 {
        return if num.is_zero() { Ordering::Equal } else { Ordering::Less };
    }
    let ln = (n as f64).ln();
    let q = biguint_to_f64(num) / biguint_to_f64(den);
    if q.is_finite() && (ln - q).abs() > 1e-12 * ln.max(q) {
        return ln.partial_cmp(&q).expect("finite");
    }
    let lhs = ln_fixed(n) * BigInt::from(den.clone());
    let rhs = BigInt::from(num.clone()) << FIXED_BITS;
    let slack = BigInt::from(den.clone()) << 16;
    if lhs > &rhs + &slack {
        Ordering::Greater
    } else if lhs < &rhs - &slack {
        Ordering::Less
    } else {
        // within 2^-240 of a rational with this denominator; cannot happen at desk scale
        lhs.cmp(&rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn fixed_point_log_matches_f64() {
        for n in [2u64, 3, 10, 25, 1000, 4294967311] {
            let fixed = ln_fixed(n);
            let approx = (fixed >> (FIXED_BITS - 52)).to_f64().unwrap() / 2f64.powi(52);
            assert!((approx - (n as f64).ln()).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn log_comparison_near_ties() {
        // ln 3 = 1.09861228866810969139...
        let n = BigUint::from(10986122886681098u64);
        let d = BigUint::from(10u64.pow(16));
        assert_eq!(cmp_ln_rational(3, &n, &d), Ordering::Less);
        let n = BigUint::from(10986122886681096u64);
        assert_eq!(cmp_ln_rational(3, &n, &d), Ordering::Greater);
        assert_eq!(
            cmp_ln_rational(3, &BigUint::from(1u8), &BigUint::from(1u8)),
            Ordering::Greater
        );
        assert_eq!(
            cmp_ln_rational(1, &BigUint::from(0u8), &BigUint::from(1u8)),
            Ordering::Equal
        );
    }
}
