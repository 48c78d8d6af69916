use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{ComplexMatrix, ToleranceConfig};
use crate::error::{OpsError, Result};

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    m.as_dmatrix().clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Number of singular values above `rel_tol · σ_max`.
pub fn numerical_rank(m: &ComplexMatrix, tol: &ToleranceConfig) -> usize {
    let sv = singular_values(m);
    let Some(&smax) = sv.first() else { return 0 };
    rank_with_cutoff(&sv, tol.rank_cutoff(smax))
}

pub(crate) fn rank_with_cutoff(sv: &[f64], cutoff: f64) -> usize {
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Orthonormal basis (as columns) of the numerical null space of `m`:
/// right singular vectors whose singular value is at most `cutoff`.
pub(crate) fn null_space_with_cutoff(m: &ComplexMatrix, cutoff: f64) -> ComplexMatrix {
    let (rows, cols) = (m.rows(), m.cols());
    if cols == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    // Pad to at least square so the SVD returns a full right basis.
    let padded = if rows < cols {
        m.vstack(&ComplexMatrix::zeros(cols - rows, cols)).expect("same column count")
    } else {
        m.clone()
    };
    let svd = padded.into_dmatrix().svd(false, true);
    let v = svd.v_t.expect("requested V").adjoint();
    let keep: Vec<usize> = (0..cols).filter(|&k| svd.singular_values[k] <= cutoff).collect();
    ComplexMatrix::from_fn(cols, keep.len(), |i, j| v[(i, keep[j])])
}

/// Null space with the standard `rel_tol · σ_max` cutoff.
pub fn null_space(m: &ComplexMatrix, tol: &ToleranceConfig) -> ComplexMatrix {
    let smax = singular_values(m).first().copied().unwrap_or(0.0);
    null_space_with_cutoff(m, tol.rank_cutoff(smax))
}

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues ascend; the
/// eigenvectors are the matching columns of the returned matrix.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = h.dim()?;
    if n == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    let sym = (h + &h.adjoint()).scale_real(0.5);
    let eig = SymmetricEigen::new(sym.into_dmatrix());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((vals, vecs))
}

fn check_hermitian(h: &ComplexMatrix, tol: &ToleranceConfig) -> Result<()> {
    h.dim()?;
    let residual = h.hermitian_residual();
    if !tol.is_zero(residual, h.frobenius_norm()) {
        return Err(OpsError::NotHermitian(residual));
    }
    Ok(())
}

/// Positive square root of a Hermitian positive semidefinite matrix.
///
/// Eigenvalues in `[-threshold, 0)` are clamped to zero, where the threshold
/// is `abs_tol + rel_tol · max|λ|`.
pub fn psd_sqrt(h: &ComplexMatrix, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    check_hermitian(h, tol)?;
    let (vals, vecs) = hermitian_eigen(h)?;
    let largest = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if let Some(&lo) = vals.first() {
        if lo < -tol.threshold(largest) {
            return Err(OpsError::NotPositiveSemidefinite(lo));
        }
    }
    let roots: Vec<Complex64> = vals.iter().map(|&v| Complex64::new(v.max(0.0).sqrt(), 0.0)).collect();
    let r = &(&vecs * &ComplexMatrix::diagonal(&roots)) * &vecs.adjoint();
    Ok((&r + &r.adjoint()).scale_real(0.5))
}

/// Moore–Penrose pseudoinverse; singular values at or below `rel_tol · σ_max`
/// are treated as zero.
pub fn pseudo_inverse(m: &ComplexMatrix, tol: &ToleranceConfig) -> ComplexMatrix {
    let (rows, cols) = (m.rows(), m.cols());
    if rows == 0 || cols == 0 {
        return ComplexMatrix::zeros(cols, rows);
    }
    let svd = m.as_dmatrix().clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = tol.rank_cutoff(smax);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V");
    let k = svd.singular_values.len();
    let mut out = DMatrix::<Complex64>::zeros(cols, rows);
    for s in 0..k {
        let sigma = svd.singular_values[s];
        if sigma > cutoff && sigma > 0.0 {
            let inv = 1.0 / sigma;
            for i in 0..cols {
                let vi = v_t[(s, i)].conj() * inv;
                for j in 0..rows {
                    out[(i, j)] += vi * u[(j, s)].conj();
                }
            }
        }
    }
    ComplexMatrix::wrap(out)
}

/// Eigenvalues read off the diagonal of a complex Schur form.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = m.dim()?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let (_, t) = schur(m)?;
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

fn schur(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = m.rows();
    let schur = nalgebra::Schur::try_new(m.as_dmatrix().clone(), f64::EPSILON, 100 * n.max(10))
        .ok_or_else(|| OpsError::Numerical("Schur iteration did not converge".into()))?;
    let (q, mut t) = schur.unpack();
    for j in 0..n {
        for i in (j + 1)..n {
            t[(i, j)] = Complex64::ZERO;
        }
    }
    Ok((ComplexMatrix::wrap(q), ComplexMatrix::wrap(t)))
}

/// Swaps the adjacent diagonal entries `k` and `k + 1` of the upper-triangular
/// `t` with a Givens rotation, accumulating it into `z`.
fn swap_adjacent(t: &mut ComplexMatrix, z: &mut ComplexMatrix, k: usize) {
    let n = t.rows();
    let a = t[(k, k)];
    let b = t[(k + 1, k + 1)];
    // (t[k,k+1], b − a) is an eigenvector of the 2x2 block for eigenvalue b.
    let x = t[(k, k + 1)];
    let y = b - a;
    let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
    if r == 0.0 {
        return;
    }
    let (cs, sn) = (x / r, y / r);
    for i in 0..n {
        let (p, q) = (t[(i, k)], t[(i, k + 1)]);
        t[(i, k)] = p * cs + q * sn;
        t[(i, k + 1)] = -p * sn.conj() + q * cs.conj();
        let (p, q) = (z[(i, k)], z[(i, k + 1)]);
        z[(i, k)] = p * cs + q * sn;
        z[(i, k + 1)] = -p * sn.conj() + q * cs.conj();
    }
    for j in 0..n {
        let (p, q) = (t[(k, j)], t[(k + 1, j)]);
        t[(k, j)] = cs.conj() * p + sn.conj() * q;
        t[(k + 1, j)] = -sn * p + cs * q;
    }
    t[(k + 1, k)] = Complex64::ZERO;
    t[(k, k)] = b;
    t[(k + 1, k + 1)] = a;
}

/// Complex Schur form `m = Z T Z*` with every eigenvalue satisfying `first`
/// moved to the leading diagonal positions (relative order preserved).
/// Returns `(Z, T, count)` where `count` eigenvalues satisfy `first`.
pub fn ordered_schur(
    m: &ComplexMatrix,
    first: impl Fn(Complex64) -> bool,
) -> Result<(ComplexMatrix, ComplexMatrix, usize)> {
    let n = m.dim()?;
    if n == 0 {
        return Ok((ComplexMatrix::zeros(0, 0), ComplexMatrix::zeros(0, 0), 0));
    }
    let (mut z, mut t) = schur(m)?;
    let mut placed = 0;
    for k in 0..n {
        if first(t[(k, k)]) {
            let mut pos = k;
            while pos > placed {
                swap_adjacent(&mut t, &mut z, pos - 1);
                pos -= 1;
            }
            placed += 1;
        }
    }
    Ok((z, t, placed))
}

/// Block-triangular splitting of a matrix with spectrum in the closed unit
/// disk: `W* S W = [[interior, coupling], [0, boundary]]` with `W` unitary,
/// interior eigenvalues `|λ| < 1 − band` and boundary eigenvalues within
/// `band` of the unit circle.
#[derive(Clone, Debug)]
pub struct SpectralSplit {
    pub basis: ComplexMatrix,
    pub triangular: ComplexMatrix,
    pub interior: ComplexMatrix,
    pub boundary: ComplexMatrix,
    pub coupling: ComplexMatrix,
    pub interior_eigenvalues: Vec<Complex64>,
    pub boundary_eigenvalues: Vec<Complex64>,
}

pub fn spectral_split(s: &ComplexMatrix, tol: &ToleranceConfig) -> Result<SpectralSplit> {
    let n = s.dim()?;
    let eig = eigenvalues(s)?;
    let rho = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let band = tol.unit_band(rho);
    if let Some(&bad) = eig.iter().find(|z| z.norm() > 1.0 + band) {
        return Err(OpsError::OutsideUnitDisk { eigenvalue: bad, modulus: bad.norm() });
    }
    let (basis, t, k0) = ordered_schur(s, |z| z.norm() < 1.0 - band)?;
    let k1 = n - k0;
    let diag: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    Ok(SpectralSplit {
        interior: t.block(0, 0, k0, k0),
        boundary: t.block(k0, k0, k1, k1),
        coupling: t.block(0, k0, k0, k1),
        interior_eigenvalues: diag[..k0].to_vec(),
        boundary_eigenvalues: diag[k0..].to_vec(),
        basis,
        triangular: t,
    })
}
