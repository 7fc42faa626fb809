//! Curvature tensors `c_{ijαβ}` of a hermitian bundle `(V, h)` of rank `r`
//! over an `n`-dimensional base, in orthonormal frames, and the random
//! hermitian forms built from them.
//!
//! Sign convention: `c` is stored so that `η_ij = Σ_α c_{ijαα}` is the
//! curvature of `det V*`. The curvature of `V` itself evaluates as
//! `⟨Θ_V(ζ,ζ)u, u⟩ = −Σ c_{ijαβ} ζ_i ζ̄_j u_α ū_β`
//! (see [`CurvatureTensor::curvature_value`]).

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{to_f64, Harmonic};
use crate::hermitian::{sphere_second_moment, trace_free_part, CMatrix, HermitianForm, SYMMETRY_TOL};
use crate::measures::{sample_sphere, SimplexPoint, SphereTuple};
use crate::rng::{lanes, stream};
use crate::stats::{accumulate, Estimate};

/// Coefficients `c[i][j][α][β]`, `1 ≤ i,j ≤ n`, `1 ≤ α,β ≤ r`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureTensor {
    n: usize,
    r: usize,
    c: Vec<Complex64>,
}

impl CurvatureTensor {
    /// Validates `c[i][j][α][β] = conj(c[j][i][β][α])` to a relative tolerance
    /// and stores the exactly symmetrized coefficients.
    pub fn new(n: usize, r: usize, c: Vec<Complex64>) -> Result<Self> {
        if n == 0 || r == 0 {
            return Err(Error::invalid("curvature tensor needs n >= 1 and r >= 1"));
        }
        if c.len() != n * n * r * r {
            return Err(Error::dimension(format!(
                "expected {} coefficients for n = {n}, r = {r}, got {}",
                n * n * r * r,
                c.len()
            )));
        }
        let t = CurvatureTensor { n, r, c };
        let scale = t.c.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let deviation = t
            .indices()
            .map(|(i, j, a, b)| (t.get(i, j, a, b) - t.get(j, i, b, a).conj()).norm())
            .fold(0.0, f64::max);
        let tolerance = SYMMETRY_TOL * scale;
        if deviation > tolerance || !deviation.is_finite() {
            return Err(Error::NotHermitian { deviation, tolerance });
        }
        Ok(t.symmetrized())
    }

    pub(crate) fn symmetrized(self) -> Self {
        let c = self
            .indices()
            .map(|(i, j, a, b)| (self.get(i, j, a, b) + self.get(j, i, b, a).conj()) * 0.5)
            .collect();
        CurvatureTensor { c, ..self }
    }

    pub fn from_fn(
        n: usize,
        r: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> Complex64,
    ) -> Result<Self> {
        let mut c = Vec::with_capacity(n * n * r * r);
        for i in 0..n {
            for j in 0..n {
                for a in 0..r {
                    for b in 0..r {
                        c.push(f(i, j, a, b));
                    }
                }
            }
        }
        Self::new(n, r, c)
    }

    pub fn zeros(n: usize, r: usize) -> Self {
        CurvatureTensor {
            n,
            r,
            c: vec![Complex64::zero(); n * n * r * r],
        }
    }

    /// `c = δ_ij δ_αβ`.
    pub fn unit(n: usize, r: usize) -> Self {
        Self::from_fn(n, r, |i, j, a, b| {
            Complex64::new(if i == j && a == b { 1.0 } else { 0.0 }, 0.0)
        })
        .expect("unit tensor is hermitian")
    }

    fn indices(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> {
        let (n, r) = (self.n, self.r);
        (0..n).flat_map(move |i| {
            (0..n).flat_map(move |j| (0..r).flat_map(move |a| (0..r).map(move |b| (i, j, a, b))))
        })
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, a: usize, b: usize) -> usize {
        ((i * self.n + j) * self.r + a) * self.r + b
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, a: usize, b: usize) -> Complex64 {
        self.c[self.idx(i, j, a, b)]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.c
    }

    pub fn add(&self, other: &CurvatureTensor) -> Result<Self> {
        self.same_shape(other)?;
        Ok(CurvatureTensor {
            c: self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect(),
            ..self.clone()
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CurvatureTensor {
            c: self.c.iter().map(|z| z * factor).collect(),
            ..self.clone()
        }
    }

    fn same_shape(&self, other: &CurvatureTensor) -> Result<()> {
        if (self.n, self.r) != (other.n, other.r) {
            return Err(Error::dimension(format!(
                "tensor shapes (n={}, r={}) and (n={}, r={}) differ",
                self.n, self.r, other.n, other.r
            )));
        }
        Ok(())
    }

    /// `Σ c_{ijαβ} ζ_i ζ̄_j u_α ū_β`, real for hermitian-symmetric `c`.
    pub fn coefficient_value(&self, zeta: &[Complex64], u: &[Complex64]) -> f64 {
        let mut acc = Complex64::zero();
        for (i, j, a, b) in self.indices() {
            acc += self.get(i, j, a, b) * zeta[i] * zeta[j].conj() * u[a] * u[b].conj();
        }
        acc.re
    }

    /// `⟨Θ_V(ζ,ζ)u, u⟩_h = −Σ c_{ijαβ} ζ_i ζ̄_j u_α ū_β`.
    pub fn curvature_value(&self, zeta: &[Complex64], u: &[Complex64]) -> f64 {
        -self.coefficient_value(zeta, u)
    }

    /// The `n × n` matrix `Σ_{αβ} c_{ijαβ} u_α ū_β`.
    pub fn base_form(&self, u: &[Complex64]) -> Result<HermitianForm> {
        if u.len() != self.r {
            return Err(Error::dimension(format!("fiber vector has {} entries, rank is {}", u.len(), self.r)));
        }
        Ok(HermitianForm::symmetrized(self.base_matrix(u)))
    }

    fn base_matrix(&self, u: &[Complex64]) -> CMatrix {
        let r = self.r;
        let mut outer = vec![Complex64::zero(); r * r];
        for a in 0..r {
            for b in 0..r {
                outer[a * r + b] = u[a] * u[b].conj();
            }
        }
        CMatrix::from_fn(self.n, self.n, |i, j| {
            let base = self.idx(i, j, 0, 0);
            self.c[base..base + r * r]
                .iter()
                .zip(&outer)
                .map(|(c, o)| c * o)
                .sum()
        })
    }

    pub fn to_json(&self) -> TensorJson {
        TensorJson {
            n: self.n,
            r: self.r,
            c: self.c.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn from_json(json: &TensorJson) -> Result<Self> {
        Self::new(
            json.n,
            json.r,
            json.c.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
        )
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("tensor serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(s)?)
    }
}

/// Wire format: `{"n": …, "r": …, "c": [[re, im], …]}`, coefficients flat in
/// row-major `(i, j, α, β)` order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorJson {
    pub n: usize,
    pub r: usize,
    pub c: Vec<[f64; 2]>,
}

/// A twisting line bundle `F`, given by its curvature form in the base frame.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistForm {
    pub theta_f: HermitianForm,
}

impl TwistForm {
    pub fn new(theta_f: HermitianForm) -> Self {
        TwistForm { theta_f }
    }
}

/// `η_ij = Σ_α c_{ijαα}`, the curvature of `det V*`.
pub fn eta(t: &CurvatureTensor) -> HermitianForm {
    let m = CMatrix::from_fn(t.n, t.n, |i, j| (0..t.r).map(|a| t.get(i, j, a, a)).sum());
    HermitianForm::symmetrized(m)
}

/// `c̃_{ijαβ} = c_{ijαβ} − (1/r) η_ij δ_αβ`.
pub fn trace_free(t: &CurvatureTensor) -> CurvatureTensor {
    let e = eta(t);
    let inv_r = 1.0 / t.r as f64;
    let c = t
        .indices()
        .map(|(i, j, a, b)| {
            let mut v = t.get(i, j, a, b);
            if a == b {
                v -= e.entry(i, j) * inv_r;
            }
            v
        })
        .collect();
    CurvatureTensor { c, ..t.clone() }.symmetrized()
}

/// The `r × r` fiber form `Σ_{ij} c_{ijαβ} ζ_i ζ̄_j`.
pub fn q_form(t: &CurvatureTensor, zeta: &[Complex64]) -> Result<HermitianForm> {
    if zeta.len() != t.n {
        return Err(Error::dimension(format!("base vector has {} entries, n is {}", zeta.len(), t.n)));
    }
    let m = CMatrix::from_fn(t.r, t.r, |a, b| {
        let mut acc = Complex64::zero();
        for i in 0..t.n {
            for j in 0..t.n {
                acc += t.get(i, j, a, b) * zeta[i] * zeta[j].conj();
            }
        }
        acc
    });
    Ok(HermitianForm::symmetrized(m))
}

/// `g_k(x,u)_ij = Σ_s (x_s/s) Σ_{αβ} c_{ijαβ} u_{sα} ū_{sβ}`.
pub fn g_k(t: &CurvatureTensor, x: &SimplexPoint, u: &SphereTuple) -> Result<HermitianForm> {
    if x.len() != u.len() {
        return Err(Error::dimension(format!(
            "simplex point has {} coordinates but {} sphere factors were given",
            x.len(),
            u.len()
        )));
    }
    let mut m = CMatrix::zeros(t.n, t.n);
    for (s, (xs, us)) in x.coords().iter().zip(u.factors()).enumerate() {
        if us.len() != t.r {
            return Err(Error::dimension(format!(
                "sphere factor {s} has dimension {}, rank is {}",
                us.len(),
                t.r
            )));
        }
        m += t.base_matrix(us) * Complex64::new(xs / (s + 1) as f64, 0.0);
    }
    Ok(HermitianForm::symmetrized(m))
}

/// `E[g_k] = (H_k/(kr)) η`.
pub fn expected_g_k(t: &CurvatureTensor, k: u64) -> HermitianForm {
    let delta = to_f64(Harmonic::new(k).value()) / (k as f64 * t.r as f64);
    eta(t).scaled(delta)
}

/// `η_k = (kr/H_k) g_k + Θ_F`.
pub fn eta_k(
    t: &CurvatureTensor,
    f: &TwistForm,
    x: &SimplexPoint,
    u: &SphereTuple,
) -> Result<HermitianForm> {
    let k = x.len() as u64;
    let g = g_k(t, x, u)?;
    if f.theta_f.dim() != t.n {
        return Err(Error::dimension("twist form dimension differs from the base"));
    }
    let scale = (k * t.r as u64) as f64 / to_f64(Harmonic::new(k).value());
    g.scaled(scale).add(&f.theta_f)
}

/// `ḡ_k(x) = (Σ_s x_s/s)(1/r) η`, the fiber average of `g_k` at fixed `x`.
pub fn fiber_mean_g_k(t: &CurvatureTensor, x: &SimplexPoint) -> HermitianForm {
    eta(t).scaled(x.harmonic_weight() / t.r as f64)
}

/// Closed form of `E|g_k(ζ) − ḡ_k(ζ)|^2` over `ν_{k,r} × μ^k` for a unit `ζ`:
/// `(r+1)/(k(kr+1)) · Σ_{s≤k} 1/s^2 · V(Q̃_ζ)`, with `V` the sphere second
/// moment of the trace-free fiber form.
pub fn partial_variance(t: &CurvatureTensor, zeta: &[Complex64], k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let q = trace_free_part(&q_form(t, zeta)?);
    let r = t.r as f64;
    let kf = k as f64;
    let inv_sq: f64 = (1..=k).map(|s| 1.0 / (s as f64 * s as f64)).sum();
    Ok((r + 1.0) / (kf * (kf * r + 1.0)) * inv_sq * sphere_second_moment(&q))
}

/// Estimate of `σ(Θ̃)^2 = ∫∫ |⟨Θ̃(ζ,ζ)u,u⟩|^2 dμ(ζ) dμ(u)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaEstimate {
    pub estimate: Estimate,
    /// Operator-size residual of `η`; nonzero means the tensor was not trace free.
    pub eta_residual: f64,
}

impl SigmaEstimate {
    pub fn is_trace_free(&self) -> bool {
        self.eta_residual <= 1e-10
    }
}

/// Hybrid estimator: the `u`-integral in closed form through the sphere
/// second moment of the fiber form, Monte-Carlo over `ζ`.
pub fn sigma_variance(t: &CurvatureTensor, n_zeta: u64, seed: u64) -> Result<SigmaEstimate> {
    if n_zeta < 2 {
        return Err(Error::invalid("at least two ζ samples are required"));
    }
    let e = eta(t);
    let eta_residual = e.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let m = accumulate(n_zeta, 1, |i, out| {
        let zeta = sample_sphere(t.n, &mut stream(seed, lanes::SIGMA, i));
        out[0] = sphere_second_moment(&q_form(t, &zeta)?);
        Ok(())
    })?;
    Ok(SigmaEstimate {
        estimate: m[0].estimate(),
        eta_residual,
    })
}

/// Plain double Monte-Carlo over `(ζ, u)`; an independent check of
/// [`sigma_variance`].
pub fn sigma_variance_double_mc(t: &CurvatureTensor, n: u64, seed: u64) -> Result<Estimate> {
    if n < 2 {
        return Err(Error::invalid("at least two samples are required"));
    }
    let m = accumulate(n, 1, |i, out| {
        let mut rng = stream(seed, lanes::SIGMA ^ 0xff, i);
        let zeta = sample_sphere(t.n, &mut rng);
        let u = sample_sphere(t.r, &mut rng);
        out[0] = t.coefficient_value(&zeta, &u).powi(2);
        Ok(())
    })?;
    Ok(m[0].estimate())
}

/// Top-|eigenvalue| eigenpair of a hermitian form; returns `(|λ|, conj(v))`
/// so that the maximizer plugs into `Σ m_ij w_i w̄_j` directly.
fn top_direction(form: &HermitianForm) -> Result<(f64, Vec<Complex64>)> {
    let (vals, vecs) = form.eigen()?;
    let (idx, lam) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, l)| (i, l.abs()))
        .unwrap_or((0, 0.0));
    let v = (0..form.dim()).map(|row| vecs[(row, idx)].conj()).collect();
    Ok((lam, v))
}

/// Lower estimate of `sup_{|ζ|=|u|=1} |Σ c ζ_i ζ̄_j u_α ū_β|` by alternating
/// eigen-maximization over `ζ` and `u`, best over `restarts` random starts.
pub fn sup_norm(t: &CurvatureTensor, restarts: u64, seed: u64) -> Result<f64> {
    if restarts == 0 {
        return Err(Error::invalid("sup_norm needs at least one restart"));
    }
    let mut best: f64 = 0.0;
    for start in 0..restarts {
        let mut u = sample_sphere(t.r, &mut stream(seed, lanes::SUP_NORM, start));
        let mut value = 0.0;
        for _ in 0..500 {
            let (_, zeta) = top_direction(&t.base_form(&u)?)?;
            let (next, u_next) = top_direction(&q_form(t, &zeta)?)?;
            u = u_next;
            let stalled = next - value <= 1e-10 * next.max(1e-300);
            value = next;
            if stalled {
                break;
            }
        }
        best = best.max(value);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{sample_nu, sample_sphere_tuple};
    use rand::Rng;

    fn random_tensor(n: usize, r: usize, seed: u64) -> CurvatureTensor {
        let mut rng = stream(seed, lanes::MODEL, 99);
        let c = (0..n * n * r * r)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        CurvatureTensor { n, r, c }.symmetrized()
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut c = vec![Complex64::zero(); 4];
        c[1] = Complex64::new(1.0, 0.0); // (i=0, j=1) without its mirror (1, 0)
        assert!(matches!(CurvatureTensor::new(2, 1, c), Err(Error::NotHermitian { .. })));
        assert!(matches!(
            CurvatureTensor::new(2, 1, vec![Complex64::zero(); 3]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn eta_of_zero_and_random() {
        assert_eq!(eta(&CurvatureTensor::zeros(2, 3)), HermitianForm::zeros(2));
        let t = random_tensor(3, 2, 1);
        assert!(HermitianForm::new(eta(&t).matrix().clone()).is_ok());
    }

    #[test]
    fn trace_free_kills_eta() {
        for (n, r) in [(1, 1), (2, 2), (3, 2), (2, 4)] {
            let t = random_tensor(n, r, 7);
            let tf = trace_free(&t);
            let res = eta(&tf).matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(res < 1e-14);
            assert_eq!(trace_free(&tf).coefficients().len(), tf.coefficients().len());
            let again = trace_free(&tf);
            for (a, b) in again.coefficients().iter().zip(tf.coefficients()) {
                assert!((a - b).norm() < 1e-15);
            }
        }
        let rank_one = random_tensor(3, 1, 2);
        assert!(trace_free(&rank_one).coefficients().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn q_form_examples() {
        let mut rng = stream(3, lanes::SPHERE, 0);
        let zeta = sample_sphere(3, &mut rng);
        assert_eq!(q_form(&CurvatureTensor::zeros(3, 2), &zeta).unwrap(), HermitianForm::zeros(2));
        let q = q_form(&CurvatureTensor::unit(3, 2), &zeta).unwrap();
        assert!((q.matrix() - CMatrix::identity(2, 2)).norm() < 1e-14);
        let t = random_tensor(3, 2, 4);
        let q = q_form(&t, &zeta).unwrap();
        assert!(HermitianForm::new(q.matrix().clone()).is_ok());
    }

    #[test]
    fn g_k_single_term_and_zero() {
        let t = random_tensor(2, 3, 5);
        let mut rng = stream(6, lanes::GK, 0);
        let x = sample_nu(1, 3, &mut rng).unwrap();
        let u = sample_sphere_tuple(&[3], &mut rng);
        let g = g_k(&t, &x, &u).unwrap();
        let direct = t.base_form(&u.factors()[0]).unwrap();
        assert!((g.matrix() - direct.matrix()).norm() < 1e-14);
        let z = g_k(&CurvatureTensor::zeros(2, 3), &x, &u).unwrap();
        assert_eq!(z, HermitianForm::zeros(2));
    }

    #[test]
    fn g_k_dimension_checks() {
        let t = random_tensor(2, 2, 5);
        let mut rng = stream(6, lanes::GK, 1);
        let x = sample_nu(3, 2, &mut rng).unwrap();
        let u = sample_sphere_tuple(&[2, 2], &mut rng);
        assert!(matches!(g_k(&t, &x, &u), Err(Error::Dimension(_))));
        let u = sample_sphere_tuple(&[2, 3, 2], &mut rng);
        assert!(matches!(g_k(&t, &x, &u), Err(Error::Dimension(_))));
    }

    #[test]
    fn g_k_is_linear_in_the_tensor() {
        let a = random_tensor(2, 2, 8);
        let b = random_tensor(2, 2, 9);
        let mut rng = stream(10, lanes::GK, 0);
        let x = sample_nu(4, 2, &mut rng).unwrap();
        let u = sample_sphere_tuple(&[2; 4], &mut rng);
        let lhs = g_k(&a.add(&b).unwrap(), &x, &u).unwrap();
        let rhs = g_k(&a, &x, &u).unwrap().add(&g_k(&b, &x, &u).unwrap()).unwrap();
        assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-14);
    }

    #[test]
    fn expected_g_k_examples() {
        let t = random_tensor(2, 1, 11);
        assert_eq!(expected_g_k(&t, 1), eta(&t));
        let e2 = expected_g_k(&t, 2);
        assert!((e2.matrix() - eta(&t).scaled(0.75).matrix()).norm() < 1e-15);
        let tf = trace_free(&random_tensor(2, 3, 12));
        assert!(expected_g_k(&tf, 5).matrix().norm() < 1e-14);
    }

    #[test]
    fn eta_k_with_zero_tensor_is_the_twist() {
        let f = TwistForm::new(HermitianForm::diagonal(&[1.0, -2.0]));
        let mut rng = stream(13, lanes::GK, 0);
        let x = sample_nu(3, 2, &mut rng).unwrap();
        let u = sample_sphere_tuple(&[2; 3], &mut rng);
        let v = eta_k(&CurvatureTensor::zeros(2, 2), &f, &x, &u).unwrap();
        assert_eq!(v, f.theta_f);
        let t = random_tensor(2, 2, 14);
        let zero = TwistForm::new(HermitianForm::zeros(2));
        let scaled = g_k(&t, &x, &u).unwrap().scaled(6.0 / (11.0 / 6.0));
        assert!((eta_k(&t, &zero, &x, &u).unwrap().matrix() - scaled.matrix()).norm() < 1e-13);
    }

    #[test]
    fn sigma_of_zero_and_rank_one() {
        let s = sigma_variance(&CurvatureTensor::zeros(2, 2), 100, 1).unwrap();
        assert_eq!(s.estimate.value, 0.0);
        let s = sigma_variance(&trace_free(&random_tensor(3, 1, 2)), 100, 1).unwrap();
        assert_eq!(s.estimate.value, 0.0);
        assert!(s.is_trace_free());
        let s = sigma_variance(&random_tensor(2, 2, 3), 100, 1).unwrap();
        assert!(!s.is_trace_free());
    }

    #[test]
    fn sigma_estimators_agree() {
        for (n, r, seed) in [(2, 2, 20), (3, 2, 21), (2, 3, 22)] {
            let t = trace_free(&random_tensor(n, r, seed));
            let hybrid = sigma_variance(&t, 20_000, seed).unwrap().estimate;
            let double = sigma_variance_double_mc(&t, 200_000, seed).unwrap();
            let se = hybrid.std_error.hypot(double.std_error);
            assert!((hybrid.value - double.value).abs() <= 3.0 * se, "{hybrid:?} {double:?}");
        }
    }

    #[test]
    fn partial_variance_examples() {
        let zeta = sample_sphere(2, &mut stream(4, lanes::MODEL, 1));
        let rank_one = random_tensor(2, 1, 5);
        assert_eq!(partial_variance(&rank_one, &zeta, 7).unwrap(), 0.0);
        let t = random_tensor(2, 3, 6);
        let v1 = partial_variance(&t, &zeta, 1).unwrap();
        let direct = sphere_second_moment(&q_form(&trace_free(&t), &zeta).unwrap());
        assert!((v1 - direct).abs() < 1e-12 * direct);
        let v2 = partial_variance(&t, &zeta, 2).unwrap();
        assert!((v2 - v1 * 4.0 / 14.0 * 1.25).abs() < 1e-12 * v1);
        assert!(partial_variance(&t, &zeta, 0).is_err());
    }

    #[test]
    fn sup_norm_of_unit_tensor() {
        let v = sup_norm(&CurvatureTensor::unit(3, 2), 3, 1).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sup_norm_monotone_in_restarts() {
        let t = random_tensor(3, 3, 30);
        let mut last = 0.0;
        for restarts in 1..6 {
            let v = sup_norm(&t, restarts, 4).unwrap();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn sup_norm_dominates_random_probes() {
        let t = random_tensor(2, 3, 31);
        let s = sup_norm(&t, 8, 2).unwrap();
        let mut rng = stream(5, lanes::SUP_NORM, 1000);
        for _ in 0..20_000 {
            let z = sample_sphere(2, &mut rng);
            let u = sample_sphere(3, &mut rng);
            assert!(t.coefficient_value(&z, &u).abs() <= s + 1e-9);
        }
    }

    #[test]
    fn json_round_trip() {
        let t = random_tensor(2, 2, 40);
        let back = CurvatureTensor::from_json_str(&t.to_json_string()).unwrap();
        assert_eq!(back, t);
        let err = CurvatureTensor::from_json_str("{\"n\": 1, \"r\": 1, \"c\": [[1.0, 0.0]").unwrap_err();
        assert!(matches!(err, Error::Json { .. }));
        let bad = "{\"n\": 2, \"r\": 1, \"c\": [[0,0],[1,0],[0,0],[0,0]]}";
        assert!(matches!(CurvatureTensor::from_json_str(bad), Err(Error::NotHermitian { .. })));
    }
}
