//! Dense complex Hermitian linear algebra.
//!
//! Everything here works on small matrices (a handful of antennas), so the
//! routines favour accuracy and reproducibility over raw speed. The ordinary
//! Hermitian eigensolver and the Cholesky factorization come from `nalgebra`;
//! the generalized problem `R v = λ B v` is reduced to an ordinary one via
//! `B = L L†`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used throughout the crate.
pub type CMat = DMatrix<Complex64>;

/// Relative Frobenius tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Relative floor on the smallest eigenvalue of a positive definite matrix.
pub const PD_FLOOR: f64 = 1e-12;

/// A square matrix that equals its own conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMat);

impl HermitianMatrix {
    /// Validates `m` and stores its exactly Hermitian part.
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let norm = m.norm();
        let skew = (&m - m.adjoint()).norm();
        if skew > HERMITIAN_TOL * norm.max(f64::MIN_POSITIVE) && skew > 0.0 {
            return Err(Error::NotHermitian {
                relative_skew: skew / norm,
            });
        }
        Ok(Self::symmetrized(m))
    }

    /// Takes `(m + m†) / 2` without checking. For matrices built as sums of
    /// outer products, where any asymmetry is rounding noise.
    pub(crate) fn symmetrized(m: CMat) -> Self {
        let adj = m.adjoint();
        Self((m + adj) * Complex64::new(0.5, 0.0))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMat::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMat::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    /// `self + s·I`.
    pub fn add_scaled_identity(&self, s: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += Complex64::new(s, 0.0);
        }
        Self(m)
    }

    /// Quadratic form `v† A v` (real for Hermitian `A`).
    pub fn quadratic_form(&self, v: &DVector<Complex64>) -> f64 {
        (v.adjoint() * &self.0 * v)[(0, 0)].re
    }

    /// `X† A X`, symmetrized.
    pub fn congruence(&self, x: &CMat) -> HermitianMatrix {
        Self::symmetrized(x.adjoint() * &self.0 * x)
    }
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigResult {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

/// Eigenpairs of a Hermitian pencil `(R, B)`, eigenvalues descending,
/// eigenvectors normalized so that `V† B V = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct GevdResult {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

/// Full eigendecomposition of a Hermitian matrix, ascending.
///
/// Equal eigenvalues keep the solver's order (stable sort). Each eigenvector
/// is rotated so its largest-magnitude entry is real and nonnegative, which
/// makes the output a deterministic function of the input bits.
pub fn hermitian_eig_sorted(a: &HermitianMatrix) -> EigResult {
    let n = a.dim();
    if n == 0 {
        return EigResult {
            values: Vec::new(),
            vectors: CMat::zeros(0, 0),
        };
    }
    let eig = a.as_matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let mut vectors = CMat::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let mut col = eig.eigenvectors.column(src).into_owned();
        let norm = col.norm();
        if norm > 0.0 {
            col /= Complex64::new(norm, 0.0);
        }
        fix_phase(col.as_mut_slice());
        vectors.set_column(dst, &col);
    }
    EigResult { values, vectors }
}

/// Rotates `v` so its first largest-magnitude entry is real nonnegative.
pub fn fix_phase(v: &mut [Complex64]) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm_sqr();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag <= 0.0 {
        return;
    }
    let pivot = v[best];
    let rot = pivot.conj() / pivot.norm();
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[best] = Complex64::new(v[best].norm(), 0.0);
}

fn check_positive_definite(b: &HermitianMatrix) -> Result<()> {
    let vals = hermitian_eig_sorted(b).values;
    let (min, max) = match (vals.first(), vals.last()) {
        (Some(&min), Some(&max)) => (min, max),
        _ => return Ok(()),
    };
    if !(min > PD_FLOOR * max.abs()) || !(min > 0.0) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
            max_eigenvalue: max,
        });
    }
    Ok(())
}

fn cholesky(b: &HermitianMatrix) -> Result<Cholesky<Complex64, Dyn>> {
    check_positive_definite(b)?;
    b.as_matrix()
        .clone()
        .cholesky()
        .ok_or(Error::FactorizationFailed("cholesky"))
}

/// Generalized eigendecomposition of a Hermitian pencil with positive
/// definite `B`, eigenvalues descending.
///
/// Computed as `C = L⁻¹ R L⁻†`, `C W = W Λ`, `V = L⁻† W` with `B = L L†`, so
/// the returned vectors are `B`-orthonormal by construction.
pub fn gevd_hpd(r: &HermitianMatrix, b: &HermitianMatrix) -> Result<GevdResult> {
    if r.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            found: r.dim(),
        });
    }
    let chol = cholesky(b)?;
    let l = chol.l();
    let lh = l.adjoint();
    // L⁻¹ R
    let left = l
        .solve_lower_triangular(r.as_matrix())
        .ok_or(Error::FactorizationFailed("triangular solve"))?;
    // (L⁻¹ R) L⁻† = (L⁻¹ (L⁻¹ R)†)†
    let c = l
        .solve_lower_triangular(&left.adjoint())
        .ok_or(Error::FactorizationFailed("triangular solve"))?
        .adjoint();
    let eig = hermitian_eig_sorted(&HermitianMatrix::symmetrized(c));

    let n = r.dim();
    let mut w = CMat::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for dst in 0..n {
        let src = n - 1 - dst;
        values.push(eig.values[src]);
        w.set_column(dst, &eig.vectors.column(src));
    }
    let mut vectors = lh
        .solve_upper_triangular(&w)
        .ok_or(Error::FactorizationFailed("triangular solve"))?;
    for mut col in vectors.column_iter_mut() {
        fix_phase(col.as_mut_slice());
    }
    Ok(GevdResult { values, vectors })
}

/// Solves `B Y = X` for Hermitian positive definite `B`.
pub fn solve_hpd(b: &HermitianMatrix, x: &CMat) -> Result<CMat> {
    if x.nrows() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            found: x.nrows(),
        });
    }
    let chol = b
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or(Error::FactorizationFailed("cholesky"))?;
    let l = chol.l_dirty();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..b.dim() {
        let d = l[(i, i)].re;
        lo = lo.min(d * d);
        hi = hi.max(d * d);
    }
    // the squared Cholesky pivots bracket the spectrum loosely; reject
    // anything numerically singular
    if !(lo > PD_FLOOR * hi) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: lo,
            max_eigenvalue: hi,
        });
    }
    Ok(chol.solve(x))
}

/// `log det` of a Hermitian positive definite matrix (natural log).
pub fn log_det_hpd(a: &HermitianMatrix) -> Result<f64> {
    let chol = a
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite {
            min_eigenvalue: f64::NAN,
            max_eigenvalue: f64::NAN,
        })?;
    let l = chol.l_dirty();
    Ok((0..a.dim()).map(|i| 2.0 * l[(i, i)].re.ln()).sum())
}

/// Inverse square root of a Hermitian positive definite matrix.
pub fn inv_sqrt_hpd(a: &HermitianMatrix) -> Result<CMat> {
    check_positive_definite(a)?;
    let eig = hermitian_eig_sorted(a);
    let n = a.dim();
    let mut scaled = eig.vectors.clone();
    for (j, &lambda) in eig.values.iter().enumerate() {
        let s = Complex64::new(lambda.powf(-0.5), 0.0);
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    Ok(scaled * eig.vectors.adjoint())
}

/// Scales every column of `m` to unit 2-norm. Zero columns are left alone.
pub fn normalize_columns(m: &mut CMat) {
    for mut col in m.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= Complex64::new(n, 0.0);
        }
    }
}

/// Thin QR orthonormalization via modified Gram–Schmidt.
pub fn orthonormalize_columns(m: &CMat) -> CMat {
    let mut q = m.clone();
    for j in 0..q.ncols() {
        for i in 0..j {
            let qi = q.column(i).into_owned();
            let proj = qi.dotc(&q.column(j));
            let upd = q.column(j) - qi * proj;
            q.set_column(j, &upd);
        }
        let n = q.column(j).norm();
        if n > 0.0 {
            let col = q.column(j) / Complex64::new(n, 0.0);
            q.set_column(j, &col);
        }
    }
    q
}

/// Orthonormal basis of the column space of `m`. Directions whose singular
/// value falls below `rel_tol · σ_max` are dropped, so nearly collinear
/// columns collapse onto one basis vector.
pub fn column_space(m: &CMat, rel_tol: f64) -> CMat {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > rel_tol * smax)
        .collect();
    CMat::from_fn(m.nrows(), keep.len(), |i, j| u[(i, keep[j])])
}

/// Real trace of a Hermitian matrix.
pub fn trace_re(m: &CMat) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}
