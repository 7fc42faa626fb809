//! Monte-Carlo evaluation of the reduced `q`-index Morse integrals over a
//! sampled manifold, and their comparison with `∫_X 1_{η,q} η^n`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::curvature::{eta, CurvatureTensor, TwistForm};
use crate::error::{Error, Result};
use crate::exact::{factorial, ln_rational, to_f64, uint, Harmonic, Rational, RationalRepr};
use crate::hermitian::{
    eigenvalues, CMatrix, HermitianForm, Signature, SIGNATURE_REL_TOL,
};
use crate::jet_combinatorics::ikrn_exact;
use crate::measures::{gamma, sample_sphere};
use crate::rng::{lane, lanes, stream};
use crate::stats::{accumulate, Estimate};

/// Relative width of the zero band used by default when classifying indices.
pub const DEFAULT_TOL: f64 = SIGNATURE_REL_TOL;

/// One quadrature node of `X`.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePoint {
    pub id: u64,
    pub tensor: CurvatureTensor,
    pub weight: f64,
    pub twist: Option<TwistForm>,
}

/// A fixed quadrature of `X`: weighted curvature tensors sharing `(n, r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldSample {
    points: Vec<SamplePoint>,
    n: usize,
    r: usize,
    total_volume: f64,
}

impl ManifoldSample {
    /// `total_volume = None` means unit volume.
    pub fn new(points: Vec<SamplePoint>, total_volume: Option<f64>) -> Result<Self> {
        let total_volume = total_volume.unwrap_or(1.0);
        if !(total_volume.is_finite() && total_volume > 0.0) {
            return Err(Error::invalid(format!("total volume {total_volume} must be positive")));
        }
        let first = points
            .first()
            .ok_or_else(|| Error::invalid("a manifold sample needs at least one point"))?;
        let (n, r) = (first.tensor.n(), first.tensor.r());
        let mut ids = BTreeSet::new();
        for p in &points {
            if (p.tensor.n(), p.tensor.r()) != (n, r) {
                return Err(Error::dimension(format!(
                    "point {} has (n, r) = ({}, {}), expected ({n}, {r})",
                    p.id,
                    p.tensor.n(),
                    p.tensor.r()
                )));
            }
            if !(p.weight.is_finite() && p.weight > 0.0) {
                return Err(Error::invalid(format!("point {} has weight {}", p.id, p.weight)));
            }
            if let Some(t) = &p.twist {
                if t.theta_f.dim() != n {
                    return Err(Error::dimension(format!(
                        "twist at point {} has dimension {}, expected {n}",
                        p.id,
                        t.theta_f.dim()
                    )));
                }
            }
            if !ids.insert(p.id) {
                return Err(Error::invalid(format!("duplicate point id {}", p.id)));
            }
        }
        let sum: f64 = points.iter().map(|p| p.weight).sum();
        if (sum - total_volume).abs() > 1e-9 * total_volume {
            return Err(Error::invalid(format!(
                "weights sum to {sum}, expected total volume {total_volume}"
            )));
        }
        Ok(ManifoldSample { points, n, r, total_volume })
    }

    /// Equal weights summing to `total_volume`, ids `0..len`.
    pub fn equal_weights(
        tensors: Vec<CurvatureTensor>,
        total_volume: Option<f64>,
    ) -> Result<Self> {
        let vol = total_volume.unwrap_or(1.0);
        let w = vol / tensors.len().max(1) as f64;
        let points = tensors
            .into_iter()
            .enumerate()
            .map(|(i, tensor)| SamplePoint { id: i as u64, tensor, weight: w, twist: None })
            .collect();
        Self::new(points, Some(vol))
    }

    pub fn with_twists(mut self, twists: Vec<Option<TwistForm>>) -> Result<Self> {
        if twists.len() != self.points.len() {
            return Err(Error::dimension(format!(
                "{} twists for {} points",
                twists.len(),
                self.points.len()
            )));
        }
        for (p, t) in self.points.iter_mut().zip(twists) {
            p.twist = t;
        }
        Self::new(self.points, Some(self.total_volume))
    }

    pub fn points(&self) -> &[SamplePoint] {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn total_volume(&self) -> f64 {
        self.total_volume
    }

    pub fn has_twist(&self) -> bool {
        self.points.iter().any(|p| p.twist.is_some())
    }
}

fn band(eigs: &[f64], rel_tol: f64) -> f64 {
    rel_tol * eigs.iter().fold(1.0f64, |m, e| m.max(e.abs()))
}

fn twisted(form: HermitianForm, twist: Option<&TwistForm>, delta: f64) -> Result<HermitianForm> {
    match twist {
        Some(t) => form.add(&t.theta_f.scaled(delta)),
        None => Ok(form),
    }
}

/// `Σ_points w · 1_{η+Θ_F, q} det(η + Θ_F)`. `tol` is relative to the
/// operator norm (floored at 1).
pub fn eta_index_integral(m: &ManifoldSample, q: usize, tol: f64) -> Result<f64> {
    let mut terms = Vec::with_capacity(m.points.len());
    for p in &m.points {
        let form = twisted(eta(&p.tensor), p.twist.as_ref(), 1.0)?;
        let eigs = eigenvalues(&form)?;
        let sig = Signature::from_eigenvalues(&eigs, band(&eigs, tol));
        let v = if sig.has_index(q) { eigs.iter().product() } else { 0.0 };
        terms.push(p.weight * v);
    }
    Ok(terms.iter().sum())
}

/// `δ_k = H_k/(kr)`.
pub fn twist_delta(k: u64, r: u64) -> Result<Rational> {
    if k == 0 || r == 0 {
        return Err(Error::invalid("twist_delta needs k >= 1 and r >= 1"));
    }
    Ok(Harmonic::new(k).value() / uint((k * r).into()))
}

/// Reduced Morse integrals for one `k`, all indices at once.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexEstimates {
    pub k: u64,
    /// `per_q[q]` estimates `R_q(k)` for `0 ≤ q ≤ n`.
    pub per_q: Vec<Estimate>,
    /// Estimate of `Σ w E[det g_k]` restricted to nondegenerate draws.
    pub nondegenerate: Estimate,
    /// Fraction of (point, draw) pairs whose form had an eigenvalue in the zero band.
    pub degenerate_fraction: f64,
}

impl IndexEstimates {
    pub fn estimate(&self, q: usize) -> Estimate {
        self.per_q.get(q).copied().unwrap_or(Estimate::new(0.0, 0.0))
    }
}

fn check_args(m: &ManifoldSample, ks: &[u64], n_samples: u64, tol: f64) -> Result<()> {
    if n_samples < 2 {
        return Err(Error::invalid("at least two samples are required"));
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::invalid(format!("tolerance {tol} must be a finite nonnegative number")));
    }
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::invalid("k values must be positive"));
    }
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!("k list {ks:?} must be strictly ascending")));
    }
    if m.points.is_empty() {
        return Err(Error::invalid("empty manifold sample"));
    }
    Ok(())
}

/// Shared engine. Each `(point, sample)` pair owns the stream
/// `(seed, point id, sample index)` and draws `Gamma(r), u_s` for
/// `s = 1..max k` in order, so every `k` sees the same prefix.
fn index_estimates(
    m: &ManifoldSample,
    ks: &[u64],
    n_samples: u64,
    seed: u64,
    tol: f64,
) -> Result<Vec<IndexEstimates>> {
    check_args(m, ks, n_samples, tol)?;
    let (n, r) = (m.n, m.r);
    let kmax = *ks.last().expect("nonempty") as usize;
    let stride = n + 3;
    let npts = m.points.len() as f64;
    let deltas: Vec<f64> = ks
        .iter()
        .map(|&k| twist_delta(k, r as u64).map(|d| to_f64(&d)))
        .collect::<Result<_>>()?;
    let moments = accumulate(n_samples, ks.len() * stride, |i, out| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for p in &m.points {
            let mut rng = stream(seed, lane(lanes::MORSE, p.id), i);
            let mut acc = CMatrix::zeros(n, n);
            let mut gamma_sum = 0.0;
            let mut next = 0;
            for s in 1..=kmax {
                let g = gamma(r as u64, &mut rng);
                let u = sample_sphere(r, &mut rng);
                gamma_sum += g;
                acc += p.tensor.base_form(&u)?.matrix() * Complex64::new(g / s as f64, 0.0);
                if s as u64 != ks[next] {
                    continue;
                }
                let scale = if gamma_sum > 0.0 { 1.0 / gamma_sum } else { 0.0 };
                let form = HermitianForm::symmetrized(&acc * Complex64::new(scale, 0.0));
                let form = twisted(form, p.twist.as_ref(), deltas[next])?;
                let eigs = eigenvalues(&form)?;
                let sig = Signature::from_eigenvalues(&eigs, band(&eigs, tol));
                let slot = &mut out[next * stride..(next + 1) * stride];
                if sig.zero > 0 {
                    slot[n + 2] += 1.0 / npts;
                } else {
                    let det: f64 = eigs.iter().product();
                    slot[sig.minus] += p.weight * det;
                    slot[n + 1] += p.weight * det;
                }
                next += 1;
            }
        }
        Ok(())
    })?;
    Ok(ks
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let col = &moments[j * stride..(j + 1) * stride];
            IndexEstimates {
                k,
                per_q: col[..=n].iter().map(|c| c.estimate()).collect(),
                nondegenerate: col[n + 1].estimate(),
                degenerate_fraction: col[n + 2].mean(),
            }
        })
        .collect())
}

/// All-index estimates `R_q(k)`, `0 ≤ q ≤ n`, for a single `k`.
pub fn reduced_morse_integrals(
    m: &ManifoldSample,
    k: u64,
    n_samples: u64,
    seed: u64,
    tol: f64,
) -> Result<IndexEstimates> {
    Ok(index_estimates(m, &[k], n_samples, seed, tol)?.remove(0))
}

/// MC estimate of `R_q(k) = Σ_points w ∫∫ 1_{g_k,q} det g_k dν dμ`. With a
/// twist the integrand is `g_k + δ_k Θ_F = δ_k η_k`. `q > n` yields zero.
pub fn reduced_morse_integral(
    m: &ManifoldSample,
    k: u64,
    q: usize,
    n_samples: u64,
    seed: u64,
    tol: f64,
) -> Result<Estimate> {
    Ok(reduced_morse_integrals(m, k, n_samples, seed, tol)?.estimate(q))
}

/// `(n+kr−1)! / (n! (k!)^r (kr−1)!)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FullConstant {
    pub value: Rational,
    pub ln: f64,
}

pub fn full_morse_constant(n: u64, k: u64, r: u64) -> Result<FullConstant> {
    if n == 0 || k == 0 || r == 0 {
        return Err(Error::invalid("full_morse_constant needs n, k, r >= 1"));
    }
    let num = factorial(n + k * r - 1);
    let den = factorial(n) * num_traits::pow(factorial(k), r as usize) * factorial(k * r - 1);
    let value = uint(num) / uint(den);
    let ln = ln_rational(&value);
    Ok(FullConstant { value, ln })
}

/// One `(k, q)` row of a convergence study.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MorseRow {
    pub k: u64,
    pub q: usize,
    pub reduced_estimate: f64,
    pub std_error: f64,
    pub eta_integral: f64,
    /// `|R_q(k) r^n / I_{k,r,n} − ∫ 1_{η,q} η^n|`.
    pub normalized_deviation: f64,
    /// `|R_q(k) / I_{k,r,n} − ∫ 1_{η,q} η^n|`, without the `r^n` factor.
    pub unnormalized_deviation: f64,
    /// `C / log k` with `C` fitted on the first `k ≥ 2` of the study.
    pub predicted_decay: Option<f64>,
    pub degenerate_fraction: f64,
    pub log_full_constant: f64,
}

/// Exact per-`k` constants of a study.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MorseConstants {
    pub k: u64,
    pub ikrn: RationalRepr,
    pub full_constant: RationalRepr,
    pub twist_delta: RationalRepr,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MorseReport {
    pub n: usize,
    pub r: usize,
    pub q_list: Vec<usize>,
    pub k_list: Vec<u64>,
    pub samples: u64,
    pub seed: u64,
    pub tol: f64,
    pub total_volume: f64,
    pub twisted: bool,
    pub rows: Vec<MorseRow>,
    pub constants: Vec<MorseConstants>,
}

pub const CSV_HEADER: &str =
    "k,q,reduced_estimate,std_error,eta_integral,normalized_deviation,degenerate_fraction,log_full_constant";

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

impl MorseReport {
    pub fn row(&self, k: u64, q: usize) -> Option<&MorseRow> {
        self.rows.iter().find(|row| row.k == k && row.q == q)
    }

    /// Comma-separated rows with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for row in &self.rows {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                row.k,
                row.q,
                sci(row.reduced_estimate),
                sci(row.std_error),
                sci(row.eta_integral),
                sci(row.normalized_deviation),
                sci(row.degenerate_fraction),
                sci(row.log_full_constant)
            )
            .expect("writing to a string");
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Runs the reduced integrals for every `k` in `k_list` (common random
/// numbers across `k`) and compares them with `∫ 1_{η,q} η^n`.
pub fn convergence_study(
    m: &ManifoldSample,
    k_list: &[u64],
    q_list: &[usize],
    n_samples: u64,
    seed: u64,
    tol: f64,
) -> Result<MorseReport> {
    if q_list.is_empty() {
        return Err(Error::invalid("at least one index q is required"));
    }
    let q_list: Vec<usize> = q_list.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let estimates = index_estimates(m, k_list, n_samples, seed, tol)?;
    let (n, r) = (m.n as u64, m.r as u64);
    let r_pow_n = (r as f64).powi(n as i32);
    let eta_integrals: Vec<f64> = q_list
        .iter()
        .map(|&q| eta_index_integral(m, q, tol))
        .collect::<Result<_>>()?;
    let mut constants = Vec::with_capacity(k_list.len());
    let mut rows = Vec::with_capacity(k_list.len() * q_list.len());
    let mut fitted: Vec<Option<f64>> = vec![None; q_list.len()];
    for est in &estimates {
        let k = est.k;
        let ikrn = ikrn_exact(k, r, n)?;
        let full = full_morse_constant(n, k, r)?;
        let i_f = to_f64(&ikrn);
        for (j, &q) in q_list.iter().enumerate() {
            let e = est.estimate(q);
            let normalized_deviation = (e.value * r_pow_n / i_f - eta_integrals[j]).abs();
            let unnormalized_deviation = (e.value / i_f - eta_integrals[j]).abs();
            let log_k = (k as f64).ln();
            if k >= 2 && fitted[j].is_none() {
                fitted[j] = Some(normalized_deviation * log_k);
            }
            rows.push(MorseRow {
                k,
                q,
                reduced_estimate: e.value,
                std_error: e.std_error,
                eta_integral: eta_integrals[j],
                normalized_deviation,
                unnormalized_deviation,
                predicted_decay: fitted[j].filter(|_| k >= 2).map(|c| c / log_k),
                degenerate_fraction: est.degenerate_fraction,
                log_full_constant: full.ln,
            });
        }
        constants.push(MorseConstants {
            k,
            ikrn: (&ikrn).into(),
            full_constant: (&full.value).into(),
            twist_delta: (&twist_delta(k, r)?).into(),
        });
    }
    Ok(MorseReport {
        n: m.n,
        r: m.r,
        q_list,
        k_list: k_list.to_vec(),
        samples: n_samples,
        seed,
        tol,
        total_volume: m.total_volume,
        twisted: m.has_twist(),
        rows,
        constants,
    })
}
