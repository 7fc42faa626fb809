//! Dense hermitian forms: spectra, signatures, the signed index determinant
//! `1_{A,q} det A`, and second moments of `Q_A` on the unit sphere.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Relative tolerance for the hermitian symmetry check.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Relative width of the default zero band for signatures.
pub const SIGNATURE_REL_TOL: f64 = 1e-9;

const EIGEN_MAX_ITER: usize = 10_000;

/// An `n × n` hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianForm {
    m: CMatrix,
}

impl HermitianForm {
    /// Validates squareness and `m[i][j] = conj(m[j][i])` to a relative
    /// tolerance, then stores the exactly symmetrized matrix.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::dimension(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let mut deviation: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                deviation = deviation.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        let tolerance = SYMMETRY_TOL * scale;
        if deviation > tolerance || !deviation.is_finite() {
            return Err(Error::NotHermitian { deviation, tolerance });
        }
        Ok(Self::symmetrized(m))
    }

    /// `(m + m*)/2`, hermitian by construction.
    pub(crate) fn symmetrized(m: CMatrix) -> Self {
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        HermitianForm { m: h }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        Self::new(CMatrix::from_fn(dim, dim, f))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        HermitianForm {
            m: CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    Complex64::new(values[i], 0.0)
                } else {
                    Complex64::zero()
                }
            }),
        }
    }

    pub fn identity(n: usize) -> Self {
        HermitianForm {
            m: CMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        HermitianForm {
            m: CMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    /// `Σ_i λ_i^2 = ‖A‖_F^2`.
    pub fn frobenius_sq(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        HermitianForm {
            m: &self.m * Complex64::new(factor, 0.0),
        }
    }

    pub fn add(&self, other: &HermitianForm) -> Result<Self> {
        same_dim(self, other)?;
        Ok(HermitianForm { m: &self.m + &other.m })
    }

    pub fn sub(&self, other: &HermitianForm) -> Result<Self> {
        same_dim(self, other)?;
        Ok(HermitianForm { m: &self.m - &other.m })
    }

    /// `Q_A(ζ) = Σ_{ij} A_ij conj(ζ_i) ζ_j = ⟨Aζ, ζ⟩`.
    pub fn quadratic(&self, zeta: &[Complex64]) -> f64 {
        let n = self.dim();
        let mut acc = Complex64::zero();
        for i in 0..n {
            let mut row = Complex64::zero();
            for j in 0..n {
                row += self.m[(i, j)] * zeta[j];
            }
            acc += zeta[i].conj() * row;
        }
        acc.re
    }

    /// Ascending eigenvalues and the matching unitary eigenvector matrix.
    pub fn eigen(&self) -> Result<(Vec<f64>, CMatrix)> {
        let n = self.dim();
        if n == 0 {
            return Ok((Vec::new(), CMatrix::zeros(0, 0)));
        }
        let eig = SymmetricEigen::try_new(self.m.clone(), f64::EPSILON, EIGEN_MAX_ITER)
            .ok_or_else(|| Error::Numerical("hermitian eigensolver did not converge".into()))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok((values, vectors))
    }
}

fn same_dim(a: &HermitianForm, b: &HermitianForm) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::dimension(format!("{}x{0} vs {}x{1}", a.dim(), b.dim())));
    }
    Ok(())
}

/// Ascending real eigenvalues.
pub fn eigenvalues(a: &HermitianForm) -> Result<Vec<f64>> {
    Ok(a.eigen()?.0)
}

/// Counts of positive, negative and near-zero eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Signature {
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
}

impl Signature {
    pub fn from_eigenvalues(eigs: &[f64], tol: f64) -> Self {
        let plus = eigs.iter().filter(|&&l| l > tol).count();
        let minus = eigs.iter().filter(|&&l| l < -tol).count();
        Signature {
            plus,
            minus,
            zero: eigs.len() - plus - minus,
        }
    }

    /// `true` when the form is nondegenerate with exactly `q` negative directions.
    pub fn has_index(&self, q: usize) -> bool {
        self.zero == 0 && self.minus == q
    }
}

pub fn signature(a: &HermitianForm, tol: f64) -> Result<Signature> {
    Ok(Signature::from_eigenvalues(&eigenvalues(a)?, tol))
}

/// `1e-9 · max(1, ‖A‖)`.
pub fn default_tolerance(a: &HermitianForm) -> Result<f64> {
    Ok(SIGNATURE_REL_TOL * operator_norm(a)?.max(1.0))
}

/// `1_{A,q} det A` from a precomputed spectrum.
pub fn signed_index_det_from_eigenvalues(eigs: &[f64], q: usize, tol: f64) -> f64 {
    if Signature::from_eigenvalues(eigs, tol).has_index(q) {
        eigs.iter().product()
    } else {
        0.0
    }
}

/// `det A` when `A` has signature `(n−q, q)` with no eigenvalue in `[−tol, tol]`, else 0.
pub fn signed_index_det(a: &HermitianForm, q: usize, tol: f64) -> Result<f64> {
    Ok(signed_index_det_from_eigenvalues(&eigenvalues(a)?, q, tol))
}

/// `max |λ_i|`.
pub fn operator_norm(a: &HermitianForm) -> Result<f64> {
    Ok(eigenvalues(a)?.iter().fold(0.0, |m, l| m.max(l.abs())))
}

/// Checks `|1_{A,q}det A − 1_{B,q}det B| ≤ ‖A−B‖ Σ_{i<n} ‖A‖^i ‖B‖^{n−1−i}`.
///
/// Each indicator is evaluated with the default zero band; the band can move
/// a determinant of size at most `tol·‖·‖^{n−1}` across the indicator, and
/// that amount is added as slack together with a rounding allowance.
pub fn det_diff_bound_holds(a: &HermitianForm, b: &HermitianForm, q: usize) -> Result<bool> {
    same_dim(a, b)?;
    let n = a.dim();
    let ea = eigenvalues(a)?;
    let eb = eigenvalues(b)?;
    let na = ea.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let nb = eb.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let ta = SIGNATURE_REL_TOL * na.max(1.0);
    let tb = SIGNATURE_REL_TOL * nb.max(1.0);
    let lhs = (signed_index_det_from_eigenvalues(&ea, q, ta)
        - signed_index_det_from_eigenvalues(&eb, q, tb))
    .abs();
    let diff = operator_norm(&a.sub(b)?)?;
    let rhs = diff
        * (0..n)
            .map(|i| na.powi(i as i32) * nb.powi((n - 1 - i) as i32))
            .sum::<f64>();
    let band = ta * na.max(1.0).powi(n as i32 - 1) + tb * nb.max(1.0).powi(n as i32 - 1);
    let rounding = 1e-12 * (rhs + na.powi(n as i32) + nb.powi(n as i32));
    Ok(lhs <= rhs + band + rounding)
}

/// Closed form of `∫_{|ζ|=1} |Q_A(ζ)|^2 dμ(ζ) = (Σλ_i^2 + (Σλ_i)^2)/(n(n+1))`.
pub fn sphere_second_moment(a: &HermitianForm) -> f64 {
    let n = a.dim() as f64;
    let tr = a.trace();
    (a.frobenius_sq() + tr * tr) / (n * (n + 1.0))
}

/// `Q − (tr Q / dim)·I`.
pub fn trace_free_part(q: &HermitianForm) -> HermitianForm {
    let n = q.dim();
    let shift = Complex64::new(q.trace() / n as f64, 0.0);
    let mut m = q.m.clone();
    for i in 0..n {
        m[(i, i)] -= shift;
    }
    HermitianForm::symmetrized(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::sample_sphere;
    use crate::rng::{lanes, stream};
    use crate::stats::Moments;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_form(n: usize, seed: u64) -> HermitianForm {
        let mut rng = stream(seed, lanes::MODEL, n as u64);
        let m = CMatrix::from_fn(n, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        HermitianForm::symmetrized(m)
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(eigenvalues(&HermitianForm::identity(3)).unwrap(), vec![1.0; 3]);
        let e = eigenvalues(&HermitianForm::diagonal(&[2.0, -1.0])).unwrap();
        assert_eq!(e, vec![-1.0, 2.0]);
    }

    #[test]
    fn reconstruction() {
        for n in 1..7 {
            let a = random_form(n, 3);
            let (vals, u) = a.eigen().unwrap();
            let lambda = CMatrix::from_fn(n, n, |i, j| if i == j { c(vals[i], 0.0) } else { c(0.0, 0.0) });
            let back = &u * lambda * u.adjoint();
            let err = (a.matrix() - back).norm();
            assert!(err <= 1e-10 * a.matrix().norm(), "n={n} err={err}");
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(HermitianForm::new(m), Err(Error::NotHermitian { .. })));
        let m = CMatrix::from_row_slice(1, 2, &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(HermitianForm::new(m), Err(Error::Dimension(_))));
    }

    #[test]
    fn signature_examples() {
        let s = signature(&HermitianForm::identity(3), 1e-9).unwrap();
        assert_eq!(s, Signature { plus: 3, minus: 0, zero: 0 });
        let s = signature(&HermitianForm::diagonal(&[1.0, -1.0]), 1e-9).unwrap();
        assert_eq!(s, Signature { plus: 1, minus: 1, zero: 0 });
        let s = signature(&HermitianForm::diagonal(&[1.0, 1e-12]), 1e-9).unwrap();
        assert_eq!(s, Signature { plus: 1, minus: 0, zero: 1 });
    }

    #[test]
    fn signed_index_det_examples() {
        let tol = 1e-9;
        assert_eq!(signed_index_det(&HermitianForm::identity(2), 0, tol).unwrap(), 1.0);
        let d = HermitianForm::diagonal(&[1.0, -1.0]);
        assert_eq!(signed_index_det(&d, 1, tol).unwrap(), -1.0);
        assert_eq!(signed_index_det(&d, 0, tol).unwrap(), 0.0);
        assert_eq!(signed_index_det(&d, 3, tol).unwrap(), 0.0);
    }

    #[test]
    fn det_diff_examples() {
        let a = random_form(4, 9);
        for q in 0..=4 {
            assert!(det_diff_bound_holds(&a, &a, q).unwrap());
        }
        let one = HermitianForm::diagonal(&[1.0]);
        let minus = HermitianForm::diagonal(&[-1.0]);
        assert!(det_diff_bound_holds(&one, &minus, 0).unwrap());
    }

    #[test]
    fn sphere_moment_examples() {
        for n in 1..6 {
            assert!((sphere_second_moment(&HermitianForm::identity(n)) - 1.0).abs() < 1e-15);
        }
        let v = sphere_second_moment(&HermitianForm::diagonal(&[1.0, -1.0]));
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rank_one_projector_moment_by_monte_carlo() {
        for n in 1..5usize {
            let mut diag = vec![0.0; n];
            diag[0] = 1.0;
            let a = HermitianForm::diagonal(&diag);
            let closed = sphere_second_moment(&a);
            assert!((closed - 2.0 / (n * (n + 1)) as f64).abs() < 1e-15);
            let mut m = Moments::default();
            for i in 0..100_000 {
                let z = sample_sphere(n, &mut stream(5, lanes::SPHERE, i));
                m.push(a.quadratic(&z).powi(2));
            }
            assert!(m.estimate().agrees_with(closed, 3.0, 1e-12), "n={n}");
        }
    }

    #[test]
    fn trace_free_examples() {
        assert_eq!(trace_free_part(&HermitianForm::identity(2)), HermitianForm::zeros(2));
        let t = trace_free_part(&HermitianForm::diagonal(&[1.0, 0.0]));
        assert_eq!(t, HermitianForm::diagonal(&[0.5, -0.5]));
        for n in 1..6 {
            let a = random_form(n, 21);
            let t = trace_free_part(&a);
            assert!(t.trace().abs() <= 1e-12 * a.matrix().norm().max(1.0));
        }
    }

    #[test]
    fn operator_norm_examples() {
        assert_eq!(operator_norm(&HermitianForm::diagonal(&[3.0, -5.0])).unwrap(), 5.0);
        assert_eq!(operator_norm(&HermitianForm::identity(4)).unwrap(), 1.0);
    }
}
