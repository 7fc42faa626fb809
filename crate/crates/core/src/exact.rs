//! Arbitrary-precision helpers: memoized factorials, harmonic numbers and
//! rational/float conversions.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub type Rational = BigRational;

/// Euler–Mascheroni constant to 20 significant digits.
pub const EULER_GAMMA_20: &str = "0.57721566490153286061";
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const FACTORIAL_TABLE: usize = 1024;

fn factorial_table() -> &'static [BigUint] {
    static TABLE: OnceLock<Vec<BigUint>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(FACTORIAL_TABLE);
        t.push(BigUint::one());
        for i in 1..FACTORIAL_TABLE as u64 {
            let next = &t[(i - 1) as usize] * i;
            t.push(next);
        }
        t
    })
}

pub fn factorial(n: u64) -> BigUint {
    let table = factorial_table();
    if (n as usize) < table.len() {
        return table[n as usize].clone();
    }
    let last = table.len() as u64 - 1;
    rising(last + 1, n - last) * &table[last as usize]
}

/// `a (a+1) … (a+n-1)`, the empty product being 1.
pub fn rising(a: u64, n: u64) -> BigUint {
    product_range(a, a + n)
}

fn product_range(lo: u64, hi: u64) -> BigUint {
    match hi.saturating_sub(lo) {
        0 => BigUint::one(),
        1..=16 => (lo..hi).fold(BigUint::one(), |acc, i| acc * i),
        len => {
            let mid = lo + len / 2;
            product_range(lo, mid) * product_range(mid, hi)
        }
    }
}

pub fn int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Rational {
    Rational::new(num.into(), den.into())
}

pub fn uint(n: BigUint) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn pow(r: &Rational, e: u32) -> Rational {
    num_traits::pow(r.clone(), e as usize)
}

/// Correctly rounded conversion of an exact rational to `f64`.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite `f64`.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

/// `Σ_{i=1}^{k} i^{-j}` as an exact rational, by binary splitting.
pub fn power_sum(k: u64, j: u32) -> Rational {
    if k == 0 {
        return Rational::zero();
    }
    let (p, q) = split_power_sum(1, k + 1, j);
    Rational::new(BigInt::from(p), BigInt::from(q))
}

fn split_power_sum(lo: u64, hi: u64, j: u32) -> (BigUint, BigUint) {
    if hi - lo == 1 {
        return (BigUint::one(), num_traits::pow(BigUint::from(lo), j as usize));
    }
    let mid = lo + (hi - lo) / 2;
    let (p1, q1) = split_power_sum(lo, mid, j);
    let (p2, q2) = split_power_sum(mid, hi, j);
    (&p1 * &q2 + &p2 * &q1, q1 * q2)
}

/// The harmonic number `H_k = 1 + 1/2 + … + 1/k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Harmonic {
    k: u64,
    value: Rational,
}

impl Harmonic {
    pub fn new(k: u64) -> Self {
        Harmonic {
            k,
            value: power_sum(k, 1),
        }
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.value)
    }

    /// `log k + γ`, the leading asymptotic of `H_k`.
    pub fn asymptotic(&self) -> f64 {
        (self.k as f64).ln() + EULER_GAMMA
    }
}

/// Natural log of a positive big integer, safe past the `f64` range.
pub fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    (n >> shift).to_f64().expect("64-bit value").ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational.
pub fn ln_rational(r: &Rational) -> f64 {
    match (r.numer().to_biguint(), r.denom().to_biguint()) {
        (Some(num), Some(den)) if r.is_positive() => ln_biguint(&num) - ln_biguint(&den),
        _ => f64::NAN,
    }
}

/// Decimal expansion of `sqrt(r)` truncated to `digits` fractional digits.
pub fn sqrt_decimal(r: &Rational, digits: u32) -> String {
    assert!(!r.is_negative(), "square root of a negative rational");
    let scale = num_traits::pow(BigInt::from(10), 2 * digits as usize);
    let scaled = (r.numer() * scale) / r.denom();
    let root = scaled.to_biguint().expect("nonnegative").sqrt();
    let s = root.to_str_radix(10);
    let d = digits as usize;
    if s.len() <= d {
        format!("0.{}{}", "0".repeat(d - s.len()), s)
    } else {
        let (int_part, frac) = s.split_at(s.len() - d);
        format!("{int_part}.{frac}")
    }
}

/// JSON representation of an exact rational: numerator and denominator strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalRepr {
    pub num: String,
    pub den: String,
}

impl From<&Rational> for RationalRepr {
    fn from(r: &Rational) -> Self {
        RationalRepr {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), BigUint::one());
        assert_eq!(factorial(5), BigUint::from(120u32));
        let big = factorial(1030);
        let by_hand = (1..=1030u64).fold(BigUint::one(), |a, i| a * i);
        assert_eq!(big, by_hand);
    }

    #[test]
    fn rising_products() {
        assert_eq!(rising(3, 0), BigUint::one());
        assert_eq!(rising(3, 4), BigUint::from(3u32 * 4 * 5 * 6));
    }

    #[test]
    fn harmonic_recurrence() {
        assert_eq!(Harmonic::new(1).value(), &int(1));
        for k in 2..40 {
            let diff = Harmonic::new(k).value() - Harmonic::new(k - 1).value();
            assert_eq!(diff, ratio(1, k as i64));
        }
        assert_eq!(Harmonic::new(4).value(), &ratio(25, 12));
    }

    #[test]
    fn power_sums() {
        assert_eq!(power_sum(3, 2), ratio(49, 36));
        assert_eq!(power_sum(0, 2), int(0));
    }

    #[test]
    fn sqrt_digits() {
        assert_eq!(sqrt_decimal(&int(2), 10), "1.4142135623");
        assert_eq!(sqrt_decimal(&ratio(1, 4), 3), "0.500");
        assert_eq!(sqrt_decimal(&ratio(1, 10000), 4), "0.0100");
    }

    #[test]
    fn float_round_trip() {
        let r = from_f64(0.1);
        assert_eq!(to_f64(&r), 0.1);
        assert_eq!(to_f64(&ratio(1, 3)), 1.0 / 3.0);
    }
}
