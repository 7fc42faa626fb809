//! Exact evaluation of the simplex moments
//! `I_{k,r,n} = ∫ (Σ_s x_s/s)^n dν_{k,r}(x)` and the error quantities built
//! from them.
//!
//! Two independent routes are provided. [`ikrn_enumerated`] sums the
//! multinomial expansion over weak compositions `β` of `n` into `k` parts,
//! each weighted by the exact moment of `ν_{k,r}`. [`ikrn_exact`] uses the
//! product form of the same sum,
//!
//! ```text
//! Σ_β ∏_i C(r+β_i−1, β_i) i^{−β_i} = [t^n] ∏_{i≤k} (1 − t/i)^{−r},
//! ```
//!
//! whose coefficients follow from the power sums `p_j = Σ_i i^{−j}` through
//! `m·P_m = r Σ_{j≤m} p_j P_{m−j}`. The cost is `k·n` big-rational terms
//! instead of `C(n+k−1, n)`, which keeps `k = 10⁴` within reach.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{
    factorial, from_f64, int, pow, power_sum, rising, sqrt_decimal, to_f64, uint, Harmonic,
    Rational, EULER_GAMMA,
};
use crate::measures::{nu_moment, sample_nu};
use crate::rng::{lanes, stream};
use crate::stats::{accumulate, Estimate};

/// Default ceiling on the number of terms an exact evaluation may touch.
pub const DEFAULT_TERM_CEILING: u128 = 100_000_000;

/// `sqrt(31/15)`, the constant in the `1/log k` bound on the error ratio.
pub const EPSILON_CONSTANT_SQUARED: (i64, i64) = (31, 15);

fn check_counts(k: u64, r: u64) -> Result<()> {
    if k == 0 || r == 0 {
        return Err(Error::invalid(format!("need k >= 1 and r >= 1, got k = {k}, r = {r}")));
    }
    Ok(())
}

/// `n!(kr−1)!/(kr+n−1)! = n!/(kr)(kr+1)…(kr+n−1)`.
fn moment_prefactor(k: u64, r: u64, n: u64) -> Rational {
    uint(factorial(n)) / uint(rising(k * r, n))
}

/// Exact `I_{k,r,n}` through the power-sum recurrence.
pub fn ikrn_exact(k: u64, r: u64, n: u64) -> Result<Rational> {
    ikrn_exact_with_ceiling(k, r, n, DEFAULT_TERM_CEILING)
}

pub fn ikrn_exact_with_ceiling(k: u64, r: u64, n: u64, ceiling: u128) -> Result<Rational> {
    check_counts(k, r)?;
    let terms = k as u128 * n.max(1) as u128;
    if terms > ceiling {
        return Err(Error::ResourceCeiling { terms, ceiling });
    }
    if k == 1 {
        return Ok(int(1));
    }
    let power_sums: Vec<Rational> = (1..=n).map(|j| power_sum(k, j as u32)).collect();
    let r_q = int(r);
    let mut coeffs: Vec<Rational> = vec![int(1)];
    for m in 1..=n as usize {
        let acc: Rational = (1..=m)
            .map(|j| &power_sums[j - 1] * &coeffs[m - j])
            .fold(Rational::zero(), |a, b| a + b);
        coeffs.push(acc * &r_q / int(m as u64));
    }
    Ok(moment_prefactor(k, r, n) * &coeffs[n as usize])
}

/// Number of weak compositions of `n` into `k` parts, `C(n+k−1, n)`.
pub fn composition_count(k: u64, n: u64) -> BigUint {
    if k == 0 {
        return if n == 0 { BigUint::one() } else { BigUint::zero() };
    }
    rising(k, n) / factorial(n)
}

/// Exact `I_{k,r,n}` by enumerating weak compositions with multinomial
/// multiplicity, each term carrying the exact `ν_{k,r}` moment.
pub fn ikrn_enumerated(k: u64, r: u64, n: u64, ceiling: u128) -> Result<Rational> {
    check_counts(k, r)?;
    let count = composition_count(k, n);
    let terms = count.to_u128().unwrap_or(u128::MAX);
    if terms > ceiling {
        return Err(Error::ResourceCeiling { terms, ceiling });
    }
    let n_fact = uint(factorial(n));
    let mut beta = vec![0u64; k as usize];
    let mut total = Rational::zero();
    enumerate(&mut beta, 0, n, &mut |b| {
        // multinomial n!/∏β_i! times ∏ i^{−β_i}
        let mut den = BigUint::one();
        for (i, &bi) in b.iter().enumerate() {
            den *= factorial(bi) * num_traits::pow(BigUint::from(i as u64 + 1), bi as usize);
        }
        let moment = nu_moment(b.len(), r, b)?;
        total += &n_fact / uint(den) * moment;
        Ok(())
    })?;
    Ok(total)
}

fn enumerate<F>(beta: &mut [u64], pos: usize, remaining: u64, visit: &mut F) -> Result<()>
where
    F: FnMut(&[u64]) -> Result<()>,
{
    if pos + 1 == beta.len() {
        beta[pos] = remaining;
        visit(beta)?;
        beta[pos] = 0;
        return Ok(());
    }
    for b in 0..=remaining {
        beta[pos] = b;
        enumerate(beta, pos + 1, remaining - b, visit)?;
    }
    beta[pos] = 0;
    Ok(())
}

/// `1 + (1/3) Σ_{m=2}^{n} 2^m n!/(n−m)! H^{−m}`.
fn upper_factor(n: u64, harmonic: &Rational) -> Rational {
    let inv = int(1) / harmonic;
    let mut sum = Rational::zero();
    for m in 2..=n {
        let falling = uint(factorial(n) / factorial(n - m));
        sum += int(1u64 << m) * falling * pow(&inv, m as u32);
    }
    int(1) + sum / int(3)
}

/// Lower and upper rational bounds bracketing `I_{k,r,n}`:
/// `lower = r^n H_k^n / (kr(kr+1)…(kr+n−1))` and `upper = lower·(1 + (1/3)Σ…)`.
pub fn ikrn_bounds(k: u64, r: u64, n: u64) -> Result<(Rational, Rational)> {
    check_counts(k, r)?;
    if n == 0 {
        return Err(Error::invalid("bounds need n >= 1"));
    }
    let h = Harmonic::new(k);
    let lower = pow(&(int(r) * h.value()), n as u32) / uint(rising(k * r, n));
    let upper = &lower * upper_factor(n, h.value());
    Ok((lower, upper))
}

/// Leading asymptotic `(log k + γ)^n / k^n`.
pub fn ikrn_asymptotic(k: u64, n: u64) -> f64 {
    let k = k as f64;
    ((k.ln() + EULER_GAMMA) / k).powi(n as i32)
}

/// Monte-Carlo estimate of `I_{k,r,n}` from draws of `ν_{k,r}`.
pub fn ikrn_monte_carlo(k: u64, r: u64, n: u64, n_samples: u64, seed: u64) -> Result<Estimate> {
    check_counts(k, r)?;
    if n_samples < 2 {
        return Err(Error::invalid("at least two samples are required"));
    }
    let m = accumulate(n_samples, 1, |i, out| {
        let x = sample_nu(k as usize, r, &mut stream(seed, lanes::IKRN, i))?;
        out[0] = x.harmonic_weight().powi(n as i32);
        Ok(())
    })?;
    Ok(m[0].estimate())
}

/// Exact error ratio and its bounds.
#[derive(Clone, Debug)]
pub struct EpsilonRatio {
    pub k: u64,
    pub r: u64,
    pub n: u64,
    /// `I_{k,r,2n−2} / (k(k+1/r) I_{k,r,n}^2)`, the square of the quotient.
    pub squared: Rational,
    /// The quotient to 30 decimals (truncated).
    pub decimal: String,
    pub value: f64,
    /// Square of the harmonic-sum bound obtained from the moment brackets.
    pub harmonic_bound_squared: Rational,
    pub harmonic_bound: f64,
    /// `sqrt(31/15) / log k`.
    pub log_bound: f64,
}

impl EpsilonRatio {
    /// Rigorous check of `quotient ≤ harmonic bound` by exact comparison of squares.
    pub fn below_harmonic_bound(&self) -> bool {
        self.squared <= self.harmonic_bound_squared
    }

    /// Rigorous check of `quotient ≤ sqrt(31/15)/log k`, using an outward
    /// rounded enclosure of `log k`.
    pub fn below_log_bound(&self) -> bool {
        square_below_log_bound(&self.squared, self.k)
    }

    /// Rigorous check of `harmonic bound ≤ sqrt(31/15)/log k`.
    pub fn harmonic_below_log_bound(&self) -> bool {
        square_below_log_bound(&self.harmonic_bound_squared, self.k)
    }
}

/// `sq · (log k)^2 ≤ 31/15`, certified with an upper enclosure of `log k`.
fn square_below_log_bound(sq: &Rational, k: u64) -> bool {
    let mut hi = (k as f64).ln();
    for _ in 0..4 {
        hi = hi.next_up();
    }
    let hi = from_f64(hi);
    let (num, den) = EPSILON_CONSTANT_SQUARED;
    sq * &hi * &hi <= Rational::new(num.into(), den.into())
}

pub fn epsilon_ratio(k: u64, r: u64, n: u64) -> Result<EpsilonRatio> {
    check_counts(k, r)?;
    if n == 0 || k < 2 {
        return Err(Error::invalid("error ratio needs n >= 1 and k >= 2"));
    }
    let i_n = ikrn_exact(k, r, n)?;
    let i_2n2 = ikrn_exact(k, r, 2 * n - 2)?;
    // k(k + 1/r) = k(kr + 1)/r
    let kk = Rational::new((k * (k * r + 1)).into(), r.into());
    let squared = i_2n2 / (kk * &i_n * &i_n);
    let h = Harmonic::new(k);
    let harmonic_bound_squared = upper_factor(2 * n - 2, h.value()) / (h.value() * h.value());
    let (num, den) = EPSILON_CONSTANT_SQUARED;
    Ok(EpsilonRatio {
        k,
        r,
        n,
        decimal: sqrt_decimal(&squared, 30),
        value: to_f64(&squared).sqrt(),
        harmonic_bound: to_f64(&harmonic_bound_squared).sqrt(),
        harmonic_bound_squared,
        squared,
        log_bound: (num as f64 / den as f64).sqrt() / (k as f64).ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    /// Composite Gauss–Legendre rule on [0, 1]; exact for the polynomial
    /// integrands below.
    fn quad01(f: impl Fn(f64) -> f64) -> f64 {
        let nodes = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
        let weights = [0.236_926_885_056_189, 0.478_628_670_499_366, 0.568_888_888_888_889, 0.478_628_670_499_366, 0.236_926_885_056_189];
        let panels = 64;
        let h = 1.0 / panels as f64;
        (0..panels)
            .map(|p| {
                let mid = (p as f64 + 0.5) * h;
                nodes
                    .iter()
                    .zip(weights)
                    .map(|(t, w)| w * f(mid + 0.5 * h * t))
                    .sum::<f64>()
                    * 0.5
                    * h
            })
            .sum()
    }

    #[test]
    fn quadrature_oracle_values() {
        // k = 2, r = 1: ν is uniform on x ∈ [0,1] with x_2 = 1 − x
        let i1 = quad01(|x| x + (1.0 - x) / 2.0);
        let i2 = quad01(|x| ((1.0 + x) / 2.0).powi(2));
        assert!((i1 - 0.75).abs() < 1e-12);
        assert!((i2 - 7.0 / 12.0).abs() < 1e-12);
        assert_eq!(ikrn_exact(2, 1, 1).unwrap(), ratio(3, 4));
        assert_eq!(ikrn_exact(2, 1, 2).unwrap(), ratio(7, 12));
    }

    #[test]
    fn single_part_is_one() {
        for r in 1..4 {
            for n in 0..6 {
                assert_eq!(ikrn_exact(1, r, n).unwrap(), int(1));
                assert_eq!(ikrn_enumerated(1, r, n, DEFAULT_TERM_CEILING).unwrap(), int(1));
            }
        }
    }

    #[test]
    fn routes_agree() {
        for k in 1..=12 {
            for r in 1..=3 {
                for n in 0..=5 {
                    let a = ikrn_exact(k, r, n).unwrap();
                    let b = ikrn_enumerated(k, r, n, DEFAULT_TERM_CEILING).unwrap();
                    assert_eq!(a, b, "k={k} r={r} n={n}");
                }
            }
        }
    }

    #[test]
    fn first_moment_is_harmonic_over_k() {
        for k in 1..60 {
            for r in 1..4 {
                let v = ikrn_exact(k, r, 1).unwrap() * int(k);
                assert_eq!(&v, Harmonic::new(k).value());
            }
        }
    }

    #[test]
    fn n_equal_one_bounds_collapse() {
        for k in 1..20 {
            let (lo, hi) = ikrn_bounds(k, 2, 1).unwrap();
            assert_eq!(lo, hi);
            assert_eq!(lo, ikrn_exact(k, 2, 1).unwrap());
        }
    }

    #[test]
    fn bracket_at_k10() {
        let (lo, hi) = ikrn_bounds(10, 1, 2).unwrap();
        let v = ikrn_exact(10, 1, 2).unwrap();
        assert!(lo <= v && v <= hi);
    }

    #[test]
    fn ceilings_are_enforced() {
        let err = ikrn_enumerated(100, 1, 5, 1000).unwrap_err();
        match err {
            Error::ResourceCeiling { terms, ceiling } => {
                assert_eq!(ceiling, 1000);
                assert_eq!(terms, composition_count(100, 5).to_u128().unwrap());
            }
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(
            ikrn_exact_with_ceiling(1000, 1, 5, 100),
            Err(Error::ResourceCeiling { .. })
        ));
    }

    #[test]
    fn composition_counts() {
        assert_eq!(composition_count(3, 2), BigUint::from(6u8));
        assert_eq!(composition_count(1, 7), BigUint::from(1u8));
    }

    #[test]
    fn harmonic_vs_euler_maclaurin() {
        for k in [10u64, 100, 1000] {
            let h = Harmonic::new(k);
            assert!((h.to_f64() - h.asymptotic()).abs() <= 1.0 / (2.0 * k as f64) + 1e-3);
        }
        assert!((ikrn_asymptotic(1, 3) - EULER_GAMMA.powi(3)).abs() < 1e-15);
    }

    #[test]
    fn epsilon_chain_small_case() {
        let e = epsilon_ratio(150, 1, 2).unwrap();
        assert!(e.below_harmonic_bound());
        assert!(e.below_log_bound());
        assert!(e.harmonic_below_log_bound());
        assert!(e.value <= e.log_bound);
        assert!(e.decimal.starts_with("0."));
        let parsed: f64 = e.decimal.parse().unwrap();
        assert!((parsed - e.value).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_agrees_with_exact() {
        for (k, r, n) in [(2, 1, 1), (5, 2, 3), (12, 3, 2)] {
            let e = ikrn_monte_carlo(k, r, n, 50_000, 3).unwrap();
            let want = to_f64(&ikrn_exact(k, r, n).unwrap());
            assert!(e.agrees_with(want, 3.0, 0.0), "{k} {r} {n}: {e:?} vs {want}");
        }
    }
}
