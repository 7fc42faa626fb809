//! Weighted projective spaces `P(a_1^{[r_1]}, …, a_k^{[r_k]})` with the
//! degenerate Kähler potential `φ_{a,r,p}(z) = (1/p) log Σ_s |z_s|^{2p/a_s}`.
//!
//! Integrals against `ω_{a,r,p}^{|r|−1}` are evaluated through the fiber
//! parametrization `z_s = x_s^{a_s/2p} u_s` with `x` Dirichlet on the simplex
//! and `u` uniform on the product of unit spheres.

use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{Error, Result};
use crate::hermitian::CMatrix;
use crate::exact::{int, uint, Rational};
use crate::measures::{norm, sample_dirichlet, sample_sphere};
use crate::rng::{lanes, stream};
use crate::stats::{accumulate, Estimate};

/// Weights `a`, multiplicities `r` and exponent `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSpec {
    a: Vec<u64>,
    r: Vec<u64>,
    p: f64,
}

impl WeightSpec {
    /// `p = None` selects `lcm(a_1, …, a_k)`, for which the potential is
    /// real-analytic.
    pub fn new(a: Vec<u64>, r: Vec<u64>, p: Option<f64>) -> Result<Self> {
        if a.is_empty() || a.len() != r.len() {
            return Err(Error::invalid(format!(
                "weights ({}) and multiplicities ({}) must be nonempty and of equal length",
                a.len(),
                r.len()
            )));
        }
        if a.contains(&0) || r.contains(&0) {
            return Err(Error::invalid("weights and multiplicities must be positive"));
        }
        let g = a.iter().fold(0u64, |g, &x| g.gcd(&x));
        if g != 1 {
            return Err(Error::invalid(format!(
                "weights {a:?} are not coprime (gcd = {g})"
            )));
        }
        let max_a = *a.iter().max().expect("nonempty") as f64;
        let p = match p {
            Some(p) => p,
            None => a.iter().fold(1u64, |l, &x| l.lcm(&x)) as f64,
        };
        if !(p.is_finite() && p >= max_a) {
            return Err(Error::invalid(format!(
                "exponent p = {p} must satisfy p >= max(a) = {max_a}"
            )));
        }
        Ok(WeightSpec { a, r, p })
    }

    pub fn weights(&self) -> &[u64] {
        &self.a
    }

    pub fn multiplicities(&self) -> &[u64] {
        &self.r
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    pub fn k(&self) -> usize {
        self.a.len()
    }

    /// `|r| = Σ r_s`.
    pub fn total_rank(&self) -> u64 {
        self.r.iter().sum()
    }

    pub fn with_exponent(&self, p: f64) -> Result<Self> {
        WeightSpec::new(self.a.clone(), self.r.clone(), Some(p))
    }

    /// Reorders the `(a_s, r_s)` pairs: entry `i` of the result is pair `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.k()];
        for &i in perm {
            if i >= self.k() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::invalid(format!("{perm:?} is not a permutation")));
            }
        }
        if perm.len() != self.k() {
            return Err(Error::invalid(format!("{perm:?} is not a permutation")));
        }
        Ok(WeightSpec {
            a: perm.iter().map(|&i| self.a[i]).collect(),
            r: perm.iter().map(|&i| self.r[i]).collect(),
            p: self.p,
        })
    }
}

/// A point `z = (z_1, …, z_k)` with `z_s ∈ C^{r_s}`, not all zero.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberPoint {
    z: Vec<Vec<Complex64>>,
}

impl FiberPoint {
    pub fn new(z: Vec<Vec<Complex64>>) -> Result<Self> {
        if z.iter().all(|zs| zs.iter().all(|c| c.norm_sqr() == 0.0)) {
            return Err(Error::domain("fiber point has all components zero"));
        }
        Ok(FiberPoint { z })
    }

    /// Real scalar components, one per block: convenient for `r = (1, …, 1)`.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        FiberPoint::new(values.iter().map(|&v| vec![Complex64::new(v, 0.0)]).collect())
    }

    pub fn blocks(&self) -> &[Vec<Complex64>] {
        &self.z
    }

    /// `|z_s|`, the hermitian norm of block `s`.
    pub fn block_norm(&self, s: usize) -> f64 {
        norm(&self.z[s])
    }

    /// The weighted action `λ·z = (λ^{a_1} z_1, …, λ^{a_k} z_k)`.
    pub fn act(&self, w: &WeightSpec, lambda: Complex64) -> FiberPoint {
        FiberPoint {
            z: self
                .z
                .iter()
                .zip(w.weights())
                .map(|(zs, &a)| {
                    let f = lambda.powu(a as u32);
                    zs.iter().map(|c| c * f).collect()
                })
                .collect(),
        }
    }

    fn check(&self, w: &WeightSpec) -> Result<()> {
        if self.z.len() != w.k()
            || self
                .z
                .iter()
                .zip(w.multiplicities())
                .any(|(zs, &r)| zs.len() as u64 != r)
        {
            return Err(Error::dimension(format!(
                "fiber point blocks {:?} do not match multiplicities {:?}",
                self.z.iter().map(Vec::len).collect::<Vec<_>>(),
                w.multiplicities()
            )));
        }
        Ok(())
    }
}

/// `φ_{a,r,p}(z) = (1/p) log Σ_s |z_s|^{2p/a_s}`, evaluated by log-sum-exp.
pub fn phi(w: &WeightSpec, z: &FiberPoint) -> Result<f64> {
    z.check(w)?;
    let p = w.exponent();
    let logs: Vec<f64> = (0..w.k())
        .filter_map(|s| {
            let n = z.block_norm(s);
            (n > 0.0).then(|| 2.0 * p / w.weights()[s] as f64 * n.ln())
        })
        .collect();
    if logs.is_empty() {
        return Err(Error::domain("potential undefined at the origin"));
    }
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs.iter().map(|t| (t - m).exp()).sum();
    Ok((m + sum.ln()) / p)
}

/// `φ_{a,r,∞}(z) = log max_s |z_s|^{2/a_s}`.
pub fn phi_limit(w: &WeightSpec, z: &FiberPoint) -> Result<f64> {
    z.check(w)?;
    (0..w.k())
        .filter_map(|s| {
            let n = z.block_norm(s);
            (n > 0.0).then(|| 2.0 / w.weights()[s] as f64 * n.ln())
        })
        .reduce(f64::max)
        .ok_or_else(|| Error::domain("potential undefined at the origin"))
}

/// `∫ ω_{a,r,p}^{|r|−1} = 1/∏ a_s^{r_s}`, independent of `p`.
pub fn volume_closed_form(w: &WeightSpec) -> Rational {
    let den = w
        .weights()
        .iter()
        .zip(w.multiplicities())
        .fold(num_bigint::BigUint::from(1u8), |acc, (&a, &r)| {
            acc * num_traits::pow(num_bigint::BigUint::from(a), r as usize)
        });
    int(1) / uint(den)
}

fn dims(w: &WeightSpec) -> Vec<usize> {
    w.multiplicities().iter().map(|&r| r as usize).collect()
}

fn fiber_estimate<F, G>(
    w: &WeightSpec,
    f: F,
    n_samples: u64,
    seed: u64,
    lane: u64,
    radius: G,
) -> Result<Estimate>
where
    F: Fn(&FiberPoint) -> f64 + Sync,
    G: Fn(f64, u64) -> f64 + Sync,
{
    if n_samples < 2 {
        return Err(Error::invalid("at least two samples are required"));
    }
    let dims = dims(w);
    let moments = accumulate(n_samples, 1, |i, out| {
        let mut rng = stream(seed, lane, i);
        let x = sample_dirichlet(w.multiplicities(), &mut rng);
        let z = x
            .coords()
            .iter()
            .zip(w.weights())
            .zip(&dims)
            .map(|((&xs, &a), &d)| {
                let rho = radius(xs, a);
                sample_sphere(d, &mut rng).into_iter().map(|c| c * rho).collect()
            })
            .collect();
        let value = f(&FiberPoint { z });
        if !value.is_finite() {
            return Err(Error::Evaluation { sample: i, value });
        }
        out[0] = value;
        Ok(())
    })?;
    let volume = crate::exact::to_f64(&volume_closed_form(w));
    Ok(moments[0].estimate().scaled(volume))
}

/// Monte-Carlo estimate of `∫ f ω_{a,r,p}^{|r|−1}` for a `C^*`-invariant `f`.
///
/// `f` receives the fiber point `(x_1^{a_1/2p} u_1, …, x_k^{a_k/2p} u_k)`.
pub fn integrate_fiber<F>(w: &WeightSpec, f: F, n_samples: u64, seed: u64) -> Result<Estimate>
where
    F: Fn(&FiberPoint) -> f64 + Sync,
{
    let p = w.exponent();
    fiber_estimate(w, f, n_samples, seed, lanes::FIBER, |x, a| {
        x.powf(a as f64 / (2.0 * p))
    })
}

/// Monte-Carlo estimate of the `p → ∞` limit `(1/∏ a_s^{r_s}) ∫ f(u) dμ(u)`
/// over the product of unit spheres.
pub fn integrate_fiber_limit<F>(
    w: &WeightSpec,
    f: F,
    n_samples: u64,
    seed: u64,
) -> Result<Estimate>
where
    F: Fn(&FiberPoint) -> f64 + Sync,
{
    fiber_estimate(w, f, n_samples, seed, lanes::FIBER_LIMIT, |_, _| 1.0)
}

/// Complex Hessian `∂_j ∂̄_k log(1 + e^φ)` at `z`, coordinates flattened
/// block by block.
fn mass_hessian(w: &WeightSpec, z: &[Vec<Complex64>]) -> CMatrix {
    let p = w.p;
    let big_n: usize = z.iter().map(|b| b.len()).sum();
    let mut block = Vec::with_capacity(big_n);
    let mut coords = Vec::with_capacity(big_n);
    for (s, zs) in z.iter().enumerate() {
        for &c in zs {
            block.push(s);
            coords.push(c);
        }
    }
    let q: Vec<f64> = w.a.iter().map(|&a| p / a as f64).collect();
    let t: Vec<f64> = z.iter().map(|zs| zs.iter().map(|c| c.norm_sqr()).sum()).collect();
    // S = Σ t_s^{q_s} evaluated as e^{lmax} Σ ws
    let logs: Vec<f64> = t.iter().zip(&q).map(|(t, q)| q * t.ln()).collect();
    let lmax = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ws: Vec<f64> = logs.iter().map(|l| (l - lmax).exp()).collect();
    let total: f64 = ws.iter().sum();
    // share of block s in S, divided by t_s
    let share: Vec<f64> = ws
        .iter()
        .zip(&t)
        .map(|(w, t)| if *w == 0.0 { 0.0 } else { w / total / t })
        .collect();
    // ∂_j S / S
    let ds: Vec<Complex64> = coords
        .iter()
        .zip(&block)
        .map(|(c, &s)| c.conj() * (q[s] * share[s]))
        .collect();
    let phi = (lmax + total.ln()) / p;
    let sig = 1.0 / (1.0 + (-phi).exp());
    let (d1, d2) = (sig, sig * (1.0 - sig));
    CMatrix::from_fn(big_n, big_n, |j, k| {
        let mut sjk = Complex64::new(0.0, 0.0);
        if block[j] == block[k] && share[block[j]] != 0.0 {
            let s = block[j];
            if j == k {
                sjk += q[s] * share[s];
            }
            sjk += coords[j].conj() * coords[k] * (q[s] * (q[s] - 1.0) * share[s] / t[s]);
        }
        let phi_jk = (sjk - ds[j] * ds[k].conj()) / p;
        let phi_j = ds[j] / p;
        let phi_k = ds[k] / p;
        phi_jk * d1 + phi_j * phi_k.conj() * d2
    })
}

/// Determinant of a positive semidefinite hermitian matrix, computed on the
/// unit-diagonal rescaling so that widely spread entries do not underflow.
fn equilibrated_det(mut m: CMatrix) -> f64 {
    let diag: Vec<f64> = m.diagonal().iter().map(|c| c.re).collect();
    if diag.iter().any(|&d| d.is_nan() || d <= 0.0) {
        return 0.0;
    }
    let scale: Vec<f64> = diag.iter().map(|d| d.sqrt().recip()).collect();
    for ((i, j), c) in m.iter_mut().enumerate().map(|(idx, c)| ((idx % diag.len(), idx / diag.len()), c)) {
        *c = *c * scale[i] * scale[j];
    }
    diag.iter().product::<f64>() * m.determinant().re
}

/// Monte-Carlo estimate of the total volume, independent of the fiber
/// parametrization: the Monge–Ampère mass of `log(1 + e^φ)` over `C^N`.
///
/// Points are drawn as `z_s = y_s |y_s|^{a_s − 1}` with `y` Fubini–Study
/// distributed in an affine chart of `P^N`.
pub fn volume_monte_carlo(w: &WeightSpec, n_samples: u64, seed: u64) -> Result<Estimate> {
    if n_samples < 2 {
        return Err(Error::invalid("at least two samples are required"));
    }
    let big_n = w.total_rank() as usize;
    let dims = dims(w);
    let moments = accumulate(n_samples, 1, |i, out| {
        let mut rng = stream(seed, lanes::FIBER ^ 0x5eed, i);
        let v = sample_sphere(big_n + 1, &mut rng);
        let y: Vec<Complex64> = v[1..].iter().map(|c| c / v[0]).collect();
        let y2: f64 = y.iter().map(|c| c.norm_sqr()).sum();
        let mut jac = 1.0;
        let mut z = Vec::with_capacity(dims.len());
        let mut off = 0;
        for (&d, &a) in dims.iter().zip(w.weights()) {
            let ys = &y[off..off + d];
            off += d;
            let len = norm(ys);
            let a = a as f64;
            jac *= a * len.powf(2.0 * d as f64 * (a - 1.0));
            z.push(ys.iter().map(|c| c * len.powf(a - 1.0)).collect::<Vec<_>>());
        }
        let det = equilibrated_det(mass_hessian(w, &z));
        let value = det * jac * (1.0 + y2).powi(big_n as i32 + 1);
        if !value.is_finite() {
            return Err(Error::Evaluation { sample: i, value });
        }
        out[0] = value;
        Ok(())
    })?;
    Ok(moments[0].estimate())
}
