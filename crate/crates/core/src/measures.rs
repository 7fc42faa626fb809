//! Probability measures on the simplex and on products of complex spheres.
//!
//! `ν_{k,r}` is the Dirichlet law with `k` equal parameters `r`, density
//! `(kr−1)!·(x_1…x_k)^{r−1}/((r−1)!)^k` on `Δ_{k−1}`; `μ` is the unitarily
//! invariant probability measure on `S^{2r−1} ⊂ C^r`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::exact::{factorial, rising, uint, Rational};

pub const SIMPLEX_TOL: f64 = 1e-12;
pub const SPHERE_TOL: f64 = 1e-12;

/// A point of the standard simplex `Δ_{k−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPoint {
    x: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::invalid("simplex point needs at least one coordinate"));
        }
        if x.iter().any(|&v| v.is_nan() || v < 0.0) {
            return Err(Error::invalid("simplex coordinates must be nonnegative"));
        }
        let sum: f64 = x.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::invalid(format!("simplex coordinates sum to {sum}")));
        }
        Ok(SimplexPoint { x })
    }

    pub fn coords(&self) -> &[f64] {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// `Σ_s x_s / s` with `s` counted from 1.
    pub fn harmonic_weight(&self) -> f64 {
        self.x
            .iter()
            .enumerate()
            .map(|(i, &v)| v / (i + 1) as f64)
            .sum()
    }
}

/// A tuple of unit vectors `u_s ∈ S^{2r_s−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereTuple {
    u: Vec<Vec<Complex64>>,
}

impl SphereTuple {
    pub fn new(u: Vec<Vec<Complex64>>) -> Result<Self> {
        for (s, v) in u.iter().enumerate() {
            let norm = norm(v);
            if v.is_empty() || (norm - 1.0).abs() > SPHERE_TOL {
                return Err(Error::invalid(format!("factor {s} has norm {norm}, expected 1")));
            }
        }
        Ok(SphereTuple { u })
    }

    pub fn factors(&self) -> &[Vec<Complex64>] {
        &self.u
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Draws from the Dirichlet law with integer parameters `r` by normalizing
/// independent `Gamma(r_s, 1)` variables.
pub fn sample_dirichlet<R: Rng + ?Sized>(r: &[u64], rng: &mut R) -> SimplexPoint {
    let mut x: Vec<f64> = r.iter().map(|&rs| gamma(rs, rng)).collect();
    normalize_simplex(&mut x);
    SimplexPoint { x }
}

pub(crate) fn gamma<R: Rng + ?Sized>(shape: u64, rng: &mut R) -> f64 {
    Gamma::new(shape as f64, 1.0)
        .expect("positive shape")
        .sample(rng)
}

pub(crate) fn normalize_simplex(x: &mut [f64]) {
    let total: f64 = x.iter().sum();
    if total > 0.0 {
        x.iter_mut().for_each(|v| *v /= total);
    } else {
        // all gammas underflowed; fall back to the barycentre
        let k = x.len() as f64;
        x.iter_mut().for_each(|v| *v = 1.0 / k);
    }
}

/// Draws `x ~ ν_{k,r}`.
pub fn sample_nu<R: Rng + ?Sized>(k: usize, r: u64, rng: &mut R) -> Result<SimplexPoint> {
    if k == 0 || r == 0 {
        return Err(Error::invalid("sample_nu needs k >= 1 and r >= 1"));
    }
    if k == 1 {
        return Ok(SimplexPoint { x: vec![1.0] });
    }
    Ok(sample_dirichlet(&vec![r; k], rng))
}

/// Uniform draw on the unit sphere of `C^dim` from a normalized complex
/// Gaussian vector.
pub fn sample_sphere<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    assert!(dim >= 1, "sphere dimension must be positive");
    loop {
        let mut v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let n = norm(&v);
        if n > 0.0 && n.is_finite() {
            v.iter_mut().for_each(|z| *z /= n);
            return v;
        }
    }
}

/// Draws `u ∈ ∏_s S^{2 r_s − 1}` from the product measure `μ`.
pub fn sample_sphere_tuple<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> SphereTuple {
    SphereTuple {
        u: dims.iter().map(|&d| sample_sphere(d, rng)).collect(),
    }
}

/// Exact `∫ x_1^{β_1} … x_k^{β_k} dν_{k,r}`.
pub fn nu_moment(k: usize, r: u64, beta: &[u64]) -> Result<Rational> {
    if k == 0 || r == 0 {
        return Err(Error::invalid("nu_moment needs k >= 1 and r >= 1"));
    }
    if beta.len() != k {
        return Err(Error::dimension(format!(
            "multi-index has {} entries, expected {k}",
            beta.len()
        )));
    }
    let n: u64 = beta.iter().sum();
    let num = beta.iter().fold(num_bigint::BigUint::from(1u8), |acc, &b| acc * rising(r, b));
    Ok(uint(num) / uint(rising(k as u64 * r, n)))
}

/// Exact `∫_{Δ_{k−1}} ∏ x_s^{r_s−1} dx = ∏(r_s−1)!/(|r|−1)!`.
pub fn dirichlet_integral(r: &[u64]) -> Result<Rational> {
    if r.is_empty() || r.contains(&0) {
        return Err(Error::invalid("multiplicities must be positive and nonempty"));
    }
    let total: u64 = r.iter().sum();
    let num = r
        .iter()
        .fold(num_bigint::BigUint::from(1u8), |acc, &rs| acc * factorial(rs - 1));
    Ok(uint(num) / uint(factorial(total - 1)))
}
