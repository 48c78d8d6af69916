//! Range inclusion, majorization and factorization for a pair `A, B`.

use num_complex::Complex64;

use crate::error::{OpsError, Result};
use crate::matcore::{hermitian_eigen, numerical_rank, pseudo_inverse, ComplexMatrix, ToleranceConfig};

/// The factor `C` in `A = BC` with its diagnostics.
#[derive(Clone, Debug)]
pub struct DouglasFactor {
    pub c: ComplexMatrix,
    /// `‖A − BC‖_F`.
    pub residual: f64,
    /// Least `μ` with `AA* ≤ μ BB*`, computed on the range of `B`.
    pub mu2: f64,
    /// `ker C = ker A`.
    pub kernels_agree: bool,
    /// Columns of `C` lie in `ran B* = (ker B)^⊥`.
    pub range_in_corange: bool,
}

struct RangeBasis {
    u: ComplexMatrix,
    sigma: Vec<f64>,
}

fn range_basis(b: &ComplexMatrix, tol: &ToleranceConfig) -> RangeBasis {
    let svd = b.as_dmatrix().clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = tol.rank_cutoff(smax);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > cutoff)
        .collect();
    RangeBasis {
        u: ComplexMatrix::from_fn(b.rows(), keep.len(), |i, j| u[(i, keep[j])]),
        sigma: keep.iter().map(|&k| svd.singular_values[k]).collect(),
    }
}

fn check_shapes(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.rows() != b.rows() {
        return Err(OpsError::DimensionMismatch(format!(
            "A has {} rows but B has {}",
            a.rows(),
            b.rows()
        )));
    }
    Ok(())
}

/// Verifies `ran A ⊆ ran B`; on failure returns the column of `(I − Π_B) A`
/// of largest norm as a witness.
fn require_range_inclusion(a: &ComplexMatrix, b: &ComplexMatrix, rb: &RangeBasis, tol: &ToleranceConfig) -> Result<()> {
    let joint = b.hstack(a)?;
    if numerical_rank(&joint, tol) == rb.sigma.len() {
        return Ok(());
    }
    let proj = &rb.u * &rb.u.adjoint();
    let outside = a - &(&proj * a);
    let (col, residual) = (0..outside.cols())
        .map(|j| (j, outside.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()))
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    Err(OpsError::RangeInclusion { residual, witness: outside.column(col) })
}

/// `inf { μ : AA* ≤ μ BB* }`, assuming `ran A ⊆ ran B`.
fn majorization_constant(a: &ComplexMatrix, rb: &RangeBasis) -> Result<f64> {
    if rb.sigma.is_empty() {
        return Ok(0.0);
    }
    let inv_sigma: Vec<Complex64> = rb.sigma.iter().map(|s| Complex64::new(1.0 / s, 0.0)).collect();
    let w = &ComplexMatrix::diagonal(&inv_sigma) * &(&rb.u.adjoint() * a);
    let (vals, _) = hermitian_eigen(&(&w * &w.adjoint()))?;
    Ok(vals.last().copied().unwrap_or(0.0).max(0.0))
}

/// Factors `A = BC` with `C = B⁺A`, the unique solution whose range lies in
/// `(ker B)^⊥`. Fails with a witness vector if `ran A ⊄ ran B`.
pub fn douglas_factor(a: &ComplexMatrix, b: &ComplexMatrix, tol: &ToleranceConfig) -> Result<DouglasFactor> {
    check_shapes(a, b)?;
    let rb = range_basis(b, tol);
    require_range_inclusion(a, b, &rb, tol)?;
    let c = &pseudo_inverse(b, tol) * a;
    let bc = b * &c;
    let residual = (a - &bc).frobenius_norm();
    let mu2 = majorization_constant(a, &rb)?;

    let rank_a = numerical_rank(a, tol);
    let stacked = a.vstack(&c)?;
    let kernels_agree = rank_a == numerical_rank(&c, tol) && rank_a == numerical_rank(&stacked, tol);

    let kernel_b = crate::matcore::null_space(b, tol);
    let range_in_corange = if kernel_b.cols() == 0 {
        true
    } else {
        let leak = &kernel_b.adjoint() * &c;
        tol.is_zero(leak.frobenius_norm(), c.frobenius_norm())
    };
    Ok(DouglasFactor { c, residual, mu2, kernels_agree, range_in_corange })
}

/// The majorization constant alone: least `μ` with `AA* ≤ μ BB*`.
pub fn douglas_mu(a: &ComplexMatrix, b: &ComplexMatrix, tol: &ToleranceConfig) -> Result<f64> {
    check_shapes(a, b)?;
    let rb = range_basis(b, tol);
    require_range_inclusion(a, b, &rb, tol)?;
    majorization_constant(a, &rb)
}
