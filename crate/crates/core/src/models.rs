//! Concrete curvature tensors: projective space, hypersurfaces through their
//! second fundamental form, the Fermat family, random tensors, plus the
//! explicit error bound `J` and the jet-order threshold for complete
//! intersections.

use nalgebra::Schur;
use num_complex::Complex64;
use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::curvature::{eta, trace_free, sup_norm, CurvatureTensor, TensorJson, TwistForm};
use crate::error::{Error, Result};
use crate::hermitian::{operator_norm, CMatrix, HermitianForm};
use crate::measures::{norm, sample_sphere};
use crate::morse::{ManifoldSample, SamplePoint};
use crate::rng::{lane, lanes, stream};

/// The constant in front of the threshold `log k ≥ 7.38 n^{n+1/2} (…)^n`.
pub const THRESHOLD_CONSTANT: f64 = 7.38;

/// Tolerance for `P(z) = 0` on a normalized point.
pub const ON_HYPERSURFACE_TOL: f64 = 1e-10;

/// Smooth complete intersection of multidegree `degrees` in `P^{n+s}`,
/// twisted by `O(−a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompleteIntersectionSpec {
    pub n: usize,
    pub s: usize,
    pub degrees: Vec<u64>,
    pub a: f64,
}

impl CompleteIntersectionSpec {
    pub fn new(n: usize, degrees: Vec<u64>, a: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("dimension n must be at least 1"));
        }
        if degrees.is_empty() || degrees.contains(&0) {
            return Err(Error::invalid("degrees must be a nonempty list of positive integers"));
        }
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::invalid(format!("twist parameter a = {a} must be >= 0")));
        }
        Ok(CompleteIntersectionSpec { n, s: degrees.len(), degrees, a })
    }

    pub fn degree_sum(&self) -> u64 {
        self.degrees.iter().sum()
    }

    /// `Σ d_j − (n + s + a + 1)`, positive exactly when `K_X ⊗ O(−a)` is ample.
    pub fn excess(&self) -> f64 {
        self.degree_sum() as f64 - (self.n + self.s + 1) as f64 - self.a
    }
}

/// `7.38 n^{n+1/2} ((Σd+1)/(Σd−n−s−a−1))^n`, the natural log of the
/// sufficient jet order.
pub fn ci_threshold(spec: &CompleteIntersectionSpec) -> Result<f64> {
    if spec.s != spec.degrees.len() {
        return Err(Error::invalid(format!(
            "codimension s = {} but {} degrees were given",
            spec.s,
            spec.degrees.len()
        )));
    }
    let excess = spec.excess();
    if excess <= 0.0 {
        return Err(Error::domain(format!(
            "general type condition violated: sum of degrees {} must exceed n + s + a + 1 = {}",
            spec.degree_sum(),
            (spec.n + spec.s + 1) as f64 + spec.a
        )));
    }
    let ratio = (spec.degree_sum() as f64 + 1.0) / excess;
    Ok(ci_threshold_limit(spec.n) * ratio.powi(spec.n as i32))
}

/// `7.38 n^{n+1/2}`, the value of [`ci_threshold`] as all degrees grow.
pub fn ci_threshold_limit(n: usize) -> f64 {
    let n = n as f64;
    THRESHOLD_CONSTANT * n.powf(n + 0.5)
}

/// `Σ_{s≤k} 1/s²`; past `10⁶` terms the tail `π²/6 − 1/(k + 1/2)` is used.
pub fn inverse_square_sum(k: u64) -> f64 {
    if k <= 1_000_000 {
        (1..=k).rev().map(|s| 1.0 / (s as f64 * s as f64)).sum()
    } else {
        std::f64::consts::PI.powi(2) / 6.0 - 1.0 / (k as f64 + 0.5)
    }
}

/// Largest `k` for which [`ci_diagnostics`] evaluates the error ratio exactly.
pub const EXACT_EPSILON_MAX_K: u64 = 100_000;

/// Error-term diagnostics of a complete intersection at jet order `k`, with
/// the normalized norms `‖η‖ ≤ 1`, `‖Θ‖ ≤ 1`, `‖Θ̃‖ ≤ 2` relative to
/// `ω = (Σd+1)h`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CiDiagnostics {
    pub k: u64,
    pub ln_k_min: f64,
    pub log10_k_min: f64,
    /// `∫ η^n = (Σd − n − s − a − 1)^n deg X`.
    pub eta_volume: f64,
    /// `∫ ω^n = (Σd + 1)^n deg X`.
    pub omega_volume: f64,
    pub j_bound: f64,
    /// Exact error ratio, when `2 ≤ k ≤ EXACT_EPSILON_MAX_K`.
    pub epsilon: Option<f64>,
    pub epsilon_log_bound: f64,
    /// `∫ η^n − ε J` with `ε` replaced by its `1/log k` bound.
    pub margin: f64,
}

pub fn ci_diagnostics(spec: &CompleteIntersectionSpec, k: u64) -> Result<CiDiagnostics> {
    if k < 2 {
        return Err(Error::invalid("diagnostics need k >= 2"));
    }
    let ln_k_min = ci_threshold(spec)?;
    let n = spec.n;
    let deg: f64 = spec.degrees.iter().map(|&d| d as f64).product();
    let eta_volume = spec.excess().powi(n as i32) * deg;
    let omega_volume = (spec.degree_sum() as f64 + 1.0).powi(n as i32) * deg;
    let r = n as f64;
    let s2 = inverse_square_sum(k);
    let inner: f64 = (1..n).map(|i| r.powi(i as i32)).sum();
    let j_bound = n as f64 * r.sqrt() * s2.sqrt() * 2.0 * inner * omega_volume;
    let epsilon = if k <= EXACT_EPSILON_MAX_K {
        Some(crate::jet_combinatorics::epsilon_ratio(k, n as u64, n as u64)?.value)
    } else {
        None
    };
    let (num, den) = crate::jet_combinatorics::EPSILON_CONSTANT_SQUARED;
    let epsilon_log_bound = (num as f64 / den as f64).sqrt() / (k as f64).ln();
    Ok(CiDiagnostics {
        k,
        ln_k_min,
        log10_k_min: ln_k_min / std::f64::consts::LN_10,
        eta_volume,
        omega_volume,
        j_bound,
        epsilon,
        epsilon_log_bound,
        margin: eta_volume - epsilon_log_bound * j_bound,
    })
}

/// `β^m_{iα}`: `s` symmetric bilinear forms on `C^n`, so that
/// `(β(ζ)·u)_m = Σ_{iα} β^m_{iα} ζ_i u_α`.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondFundamentalForm {
    s: usize,
    n: usize,
    b: Vec<Complex64>,
}

impl SecondFundamentalForm {
    pub fn new(s: usize, n: usize, b: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("second fundamental form needs n >= 1"));
        }
        if b.len() != s * n * n {
            return Err(Error::dimension(format!(
                "expected {} coefficients for s = {s}, n = {n}, got {}",
                s * n * n,
                b.len()
            )));
        }
        let scale = b.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for m in 0..s {
            for i in 0..n {
                for a in 0..i {
                    let d = (b[(m * n + i) * n + a] - b[(m * n + a) * n + i]).norm();
                    if d > 1e-10 * scale {
                        return Err(Error::invalid(format!(
                            "component {m} is not symmetric at ({i}, {a}): deviation {d:.3e}"
                        )));
                    }
                }
            }
        }
        Ok(SecondFundamentalForm { s, n, b })
    }

    pub fn zero(s: usize, n: usize) -> Self {
        SecondFundamentalForm { s, n, b: vec![Complex64::zero(); s * n * n] }
    }

    /// Reads the coefficients off a bilinear callback `(ζ, u) ↦ β(ζ)·u`.
    pub fn from_bilinear(
        s: usize,
        n: usize,
        f: impl Fn(&[Complex64], &[Complex64]) -> Vec<Complex64>,
    ) -> Result<Self> {
        let basis = |i: usize| {
            let mut e = vec![Complex64::zero(); n];
            e[i] = Complex64::new(1.0, 0.0);
            e
        };
        let mut b = vec![Complex64::zero(); s * n * n];
        for i in 0..n {
            for a in 0..n {
                let v = f(&basis(i), &basis(a));
                if v.len() != s {
                    return Err(Error::dimension(format!(
                        "callback returned {} components, expected {s}",
                        v.len()
                    )));
                }
                for (m, x) in v.into_iter().enumerate() {
                    b[(m * n + i) * n + a] = x;
                }
            }
        }
        Self::new(s, n, b)
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, m: usize, i: usize, a: usize) -> Complex64 {
        self.b[(m * self.n + i) * self.n + a]
    }

    /// `β(ζ)·u ∈ C^s`.
    pub fn apply(&self, zeta: &[Complex64], u: &[Complex64]) -> Vec<Complex64> {
        (0..self.s)
            .map(|m| {
                let mut acc = Complex64::zero();
                for i in 0..self.n {
                    for a in 0..self.n {
                        acc += self.get(m, i, a) * zeta[i] * u[a];
                    }
                }
                acc
            })
            .collect()
    }

    pub fn scaled(&self, t: f64) -> Self {
        SecondFundamentalForm { b: self.b.iter().map(|z| z * t).collect(), ..self.clone() }
    }

    /// `Tr(β ∧ β*)_ij = Σ_{m,α} β^m_{iα} conj(β^m_{jα})`.
    pub fn trace_form(&self) -> HermitianForm {
        let n = self.n;
        let m = CMatrix::from_fn(n, n, |i, j| {
            let mut acc = Complex64::zero();
            for m in 0..self.s {
                for a in 0..n {
                    acc += self.get(m, i, a) * self.get(m, j, a).conj();
                }
            }
            acc
        });
        HermitianForm::new(m).expect("Gram matrix is hermitian")
    }
}

/// Fubini–Study on `P^n` with `V = T`: `c_{ijαβ} = −(δ_ij δ_αβ + δ_iβ δ_jα)`,
/// so that `⟨Θ(ζ,ζ)u,u⟩ = |ζ|²|u|² + |⟨ζ,u⟩|²` and `η = −(n+1)`.
pub fn fubini_study_tensor(n: usize) -> Result<CurvatureTensor> {
    hypersurface_tensor(&SecondFundamentalForm::zero(0, n), n)
}

/// Submanifold curvature `|ζ|²|u|² + |⟨ζ,u⟩|² − |β(ζ)·u|²`, i.e.
/// `c_{ijαβ} = −(δ_ij δ_αβ + δ_iβ δ_jα) + Σ_m β^m_{iα} conj(β^m_{jβ})`.
pub fn hypersurface_tensor(ff: &SecondFundamentalForm, n: usize) -> Result<CurvatureTensor> {
    if n == 0 || ff.n != n {
        return Err(Error::dimension(format!(
            "second fundamental form acts on C^{}, expected C^{n}",
            ff.n
        )));
    }
    CurvatureTensor::from_fn(n, n, |i, j, a, b| {
        let flat = (i == j && a == b) as i32 + (i == b && j == a) as i32;
        let mut v = Complex64::zero();
        for m in 0..ff.s {
            v += ff.get(m, i, a) * ff.get(m, j, b).conj();
        }
        v - flat as f64
    })
}

/// `Σ_j z_j^d`.
fn fermat_value(z: &[Complex64], d: u32) -> Complex64 {
    z.iter().map(|x| x.powu(d)).sum()
}

/// Orthonormal basis of the hermitian complement of `avoid` (orthonormal
/// vectors) in `C^dim`, by Gram–Schmidt on the coordinate axes taken in
/// order of decreasing residual.
fn complement_frame(dim: usize, avoid: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
    };
    let mut basis: Vec<Vec<Complex64>> = avoid.to_vec();
    let mut frame = Vec::with_capacity(dim - avoid.len());
    let mut used = vec![false; dim];
    while frame.len() < dim - avoid.len() {
        let mut best: Option<(usize, Vec<Complex64>, f64)> = None;
        for (axis, _) in used.iter().enumerate().filter(|(_, u)| !**u) {
            let mut v = vec![Complex64::zero(); dim];
            v[axis] = Complex64::new(1.0, 0.0);
            for e in &basis {
                let c = dot(&v, e);
                for (x, y) in v.iter_mut().zip(e) {
                    *x -= c * y;
                }
            }
            let len = norm(&v);
            if best.as_ref().is_none_or(|b| len > b.2) {
                best = Some((axis, v, len));
            }
        }
        let (axis, mut v, len) = best.expect("enough axes remain");
        used[axis] = true;
        v.iter_mut().for_each(|x| *x /= len);
        basis.push(v.clone());
        frame.push(v);
    }
    frame
}

/// Second fundamental form of `{Σ z_j^d = 0} ⊂ P^{n+1}` at `point`, in an
/// orthonormal frame of the tangent space: `β(e_a, e_b) = Hess P(e_a, e_b)/|∇P|`
/// for the normalized representative `|z| = 1`.
pub fn fermat_second_fundamental_form(
    n: usize,
    d: u32,
    point: &[Complex64],
) -> Result<SecondFundamentalForm> {
    Ok(fermat_frame(n, d, point)?.0)
}

fn fermat_frame(
    n: usize,
    d: u32,
    point: &[Complex64],
) -> Result<(SecondFundamentalForm, Vec<Vec<Complex64>>)> {
    if n == 0 || d == 0 {
        return Err(Error::invalid("Fermat hypersurface needs n >= 1 and d >= 1"));
    }
    if point.len() != n + 2 {
        return Err(Error::dimension(format!(
            "a point of P^{} has {} homogeneous coordinates, got {}",
            n + 1,
            n + 2,
            point.len()
        )));
    }
    let len = norm(point);
    if !(len > 0.0 && len.is_finite()) {
        return Err(Error::domain("the zero vector is not a projective point"));
    }
    let z: Vec<Complex64> = point.iter().map(|x| x / len).collect();
    let value = fermat_value(&z, d).norm();
    if value > ON_HYPERSURFACE_TOL {
        return Err(Error::domain(format!("point is off the hypersurface: |P(z)| = {value:.3e}")));
    }
    let df = d as f64;
    let grad: Vec<Complex64> = z.iter().map(|x| x.powu(d - 1) * df).collect();
    let grad_len = norm(&grad);
    if grad_len < 1e-12 {
        return Err(Error::domain("singular point: the gradient of P vanishes"));
    }
    // tangent vectors v satisfy ⟨v, z⟩ = 0 and Σ v_j ∂_j P = ⟨v, conj ∇P⟩ = 0
    let normal: Vec<Complex64> = grad.iter().map(|g| g.conj() / grad_len).collect();
    let frame = complement_frame(n + 2, &[z.clone(), normal]);
    let hess: Vec<Complex64> = if d >= 2 {
        z.iter().map(|x| x.powu(d - 2) * (df * (df - 1.0))).collect()
    } else {
        vec![Complex64::zero(); n + 2]
    };
    let mut b = vec![Complex64::zero(); n * n];
    for a in 0..n {
        for c in 0..n {
            let h: Complex64 = (0..n + 2).map(|j| hess[j] * frame[a][j] * frame[c][j]).sum();
            b[a * n + c] = h / grad_len;
        }
    }
    Ok((SecondFundamentalForm::new(1, n, b)?, frame))
}

/// Roots of `Σ_m coeffs[m] t^m` (leading coefficient nonzero) from the
/// companion matrix, polished by Newton steps.
fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    if deg == 1 {
        return Ok(vec![-coeffs[0] / lead]);
    }
    let companion = CMatrix::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -coeffs[deg - 1 - j] / lead
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::zero()
        }
    });
    let schur = Schur::try_new(companion, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("companion matrix Schur form did not converge".into()))?;
    let (_, t) = schur.unpack();
    let eval = |x: Complex64| {
        let mut p = Complex64::zero();
        let mut dp = Complex64::zero();
        for c in coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    };
    Ok((0..deg)
        .map(|i| {
            let mut x = t[(i, i)];
            for _ in 0..4 {
                let (p, dp) = eval(x);
                if dp.norm() == 0.0 {
                    break;
                }
                x -= p / dp;
            }
            x
        })
        .collect())
}

fn binomial(d: u32, m: u32) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (d - i) as f64 / (i + 1) as f64)
}

/// A Fubini–Study distributed point of the Fermat hypersurface: a uniformly
/// chosen intersection point of `X` with a uniformly random projective line.
pub fn fermat_point<R: Rng + ?Sized>(n: usize, d: u32, rng: &mut R) -> Result<Vec<Complex64>> {
    if n == 0 || d == 0 {
        return Err(Error::invalid("Fermat hypersurface needs n >= 1 and d >= 1"));
    }
    loop {
        let p = sample_sphere(n + 2, rng);
        let q = sample_sphere(n + 2, rng);
        let coeffs: Vec<Complex64> = (0..=d)
            .map(|m| {
                let sum: Complex64 =
                    p.iter().zip(&q).map(|(a, b)| a.powu(d - m) * b.powu(m)).sum();
                sum * binomial(d, m)
            })
            .collect();
        if coeffs[d as usize].norm() < 1e-8 {
            continue;
        }
        let roots = polynomial_roots(&coeffs)?;
        let pick = rng.random_range(0..roots.len());
        let t = roots[pick];
        let z: Vec<Complex64> = p.iter().zip(&q).map(|(a, b)| a + t * b).collect();
        let len = norm(&z);
        let z: Vec<Complex64> = z.iter().map(|x| x / len).collect();
        if fermat_value(&z, d).norm() <= ON_HYPERSURFACE_TOL {
            return Ok(z);
        }
    }
}

/// Curvature tensors of `T_X` at `count` Fubini–Study distributed points of
/// the Fermat hypersurface of degree `d` in `P^{n+1}`.
pub fn fermat_tensors(n: usize, d: u32, count: usize, seed: u64) -> Result<Vec<CurvatureTensor>> {
    (0..count as u64)
        .map(|i| {
            let mut rng = stream(seed, lane(lanes::MODEL, 0xfe), i);
            let z = fermat_point(n, d, &mut rng)?;
            hypersurface_tensor(&fermat_second_fundamental_form(n, d, &z)?, n)
        })
        .collect()
}

/// Hermitian-symmetric tensor with complex Gaussian entries of standard
/// deviation `scale`.
pub fn random_tensor(n: usize, r: usize, scale: f64, seed: u64) -> Result<CurvatureTensor> {
    if !(scale.is_finite() && scale >= 0.0) {
        return Err(Error::invalid(format!("scale {scale} must be finite and nonnegative")));
    }
    if n == 0 || r == 0 {
        return Err(Error::invalid("random tensor needs n >= 1 and r >= 1"));
    }
    let mut rng = stream(seed, lanes::MODEL, ((n as u64) << 32) | r as u64);
    let h = std::f64::consts::FRAC_1_SQRT_2 * scale;
    let raw: Vec<Complex64> = (0..n * n * r * r)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * h, im * h)
        })
        .collect();
    let at = |i: usize, j: usize, a: usize, b: usize| raw[((i * n + j) * r + a) * r + b];
    CurvatureTensor::from_fn(n, r, |i, j, a, b| (at(i, j, a, b) + at(j, i, b, a).conj()) * 0.5)
}

/// `n r^{1/2} (Σ_{s≤k} 1/s²)^{1/2} Σ_p w ‖Θ̃‖ Σ_{i=1}^{n−1} r^i ‖Θ‖^i ‖η‖^{n−1−i}`,
/// with `‖Θ‖`, `‖Θ̃‖` from [`sup_norm`] (`restarts` starts each).
pub fn j_bound(m: &ManifoldSample, k: u64, restarts: u64, seed: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let (n, r) = (m.n(), m.r() as f64);
    if n < 2 {
        return Ok(0.0);
    }
    let s2 = inverse_square_sum(k);
    let mut total = 0.0;
    for p in m.points() {
        let tilde = sup_norm(&trace_free(&p.tensor), restarts, seed)?;
        if tilde == 0.0 {
            continue;
        }
        let theta = sup_norm(&p.tensor, restarts, seed)?;
        let eta_norm = operator_norm(&eta(&p.tensor))?;
        let inner: f64 = (1..n)
            .map(|i| (r * theta).powi(i as i32) * eta_norm.powi((n - 1 - i) as i32))
            .sum();
        total += p.weight * tilde * inner;
    }
    Ok(n as f64 * r.sqrt() * s2.sqrt() * total)
}

/// JSON model description consumed by the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// `points` copies of projective space `P^n`.
    FubiniStudy {
        n: usize,
        #[serde(default = "one")]
        points: usize,
        #[serde(default)]
        total_volume: Option<f64>,
    },
    /// Fermat hypersurface of degree `d` in `P^{n+1}` twisted by `O(−a)`.
    Fermat {
        n: usize,
        d: u32,
        #[serde(default = "one")]
        s: usize,
        #[serde(default)]
        a: f64,
        points: usize,
        seed: u64,
        #[serde(default)]
        total_volume: Option<f64>,
    },
    Random {
        n: usize,
        r: usize,
        #[serde(default = "unit_scale")]
        scale: f64,
        points: usize,
        seed: u64,
        #[serde(default)]
        trace_free: bool,
        #[serde(default)]
        total_volume: Option<f64>,
    },
    Explicit {
        tensors: Vec<TensorJson>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
        /// Per-point `n × n` twist forms as `[[re, im], …]`, row-major.
        #[serde(default)]
        twists: Option<Vec<Option<Vec<[f64; 2]>>>>,
        #[serde(default)]
        total_volume: Option<f64>,
    },
}

fn one() -> usize {
    1
}

fn unit_scale() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn build(&self) -> Result<ManifoldSample> {
        match self {
            ModelSpec::FubiniStudy { n, points, total_volume } => {
                nonzero_points(*points)?;
                let t = fubini_study_tensor(*n)?;
                ManifoldSample::equal_weights(vec![t; *points], *total_volume)
            }
            ModelSpec::Fermat { n, d, s, a, points, seed, total_volume } => {
                if *s != 1 {
                    return Err(Error::invalid(format!(
                        "fermat models are hypersurfaces (s = 1), got s = {s}"
                    )));
                }
                if !(a.is_finite() && *a >= 0.0) {
                    return Err(Error::invalid(format!("twist parameter a = {a} must be >= 0")));
                }
                nonzero_points(*points)?;
                let tensors = fermat_tensors(*n, *d, *points, *seed)?;
                let m = ManifoldSample::equal_weights(tensors, *total_volume)?;
                if *a == 0.0 {
                    return Ok(m);
                }
                let twist = TwistForm::new(HermitianForm::identity(*n).scaled(-a));
                m.with_twists(vec![Some(twist); *points])
            }
            ModelSpec::Random { n, r, scale, points, seed, trace_free: tf, total_volume } => {
                nonzero_points(*points)?;
                let tensors = (0..*points as u64)
                    .map(|i| {
                        let t = random_tensor(*n, *r, *scale, lane(*seed, i))?;
                        Ok(if *tf { trace_free(&t) } else { t })
                    })
                    .collect::<Result<Vec<_>>>()?;
                ManifoldSample::equal_weights(tensors, *total_volume)
            }
            ModelSpec::Explicit { tensors, weights, twists, total_volume } => {
                let tensors = tensors
                    .iter()
                    .map(CurvatureTensor::from_json)
                    .collect::<Result<Vec<_>>>()?;
                let m = match weights {
                    None => ManifoldSample::equal_weights(tensors, *total_volume)?,
                    Some(w) => {
                        if w.len() != tensors.len() {
                            return Err(Error::dimension(format!(
                                "{} weights for {} tensors",
                                w.len(),
                                tensors.len()
                            )));
                        }
                        let total = total_volume.unwrap_or_else(|| w.iter().sum());
                        let points = tensors
                            .into_iter()
                            .zip(w)
                            .enumerate()
                            .map(|(i, (tensor, &weight))| SamplePoint {
                                id: i as u64,
                                tensor,
                                weight,
                                twist: None,
                            })
                            .collect();
                        ManifoldSample::new(points, Some(total))?
                    }
                };
                match twists {
                    None => Ok(m),
                    Some(list) => {
                        let n = m.n();
                        let forms = list
                            .iter()
                            .map(|t| {
                                t.as_ref()
                                    .map(|flat| twist_from_flat(n, flat))
                                    .transpose()
                            })
                            .collect::<Result<Vec<_>>>()?;
                        m.with_twists(forms)
                    }
                }
            }
        }
    }
}

fn nonzero_points(points: usize) -> Result<()> {
    if points == 0 {
        return Err(Error::invalid("a model needs at least one point"));
    }
    Ok(())
}

fn twist_from_flat(n: usize, flat: &[[f64; 2]]) -> Result<TwistForm> {
    if flat.len() != n * n {
        return Err(Error::dimension(format!(
            "twist form needs {} entries, got {}",
            n * n,
            flat.len()
        )));
    }
    let m = CMatrix::from_fn(n, n, |i, j| {
        let [re, im] = flat[i * n + j];
        Complex64::new(re, im)
    });
    Ok(TwistForm::new(HermitianForm::new(m)?))
}
