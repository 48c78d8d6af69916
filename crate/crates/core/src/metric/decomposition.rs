use crate::error::{OpsError, Result};
use crate::matcore::{spectral_split, ComplexMatrix, ToleranceConfig};

use super::power::require_power_bounded;
use super::similarity::isometry_check;

/// Upper triangular splitting `W⁻¹SW = [[A₁, A₀], [0, A₂]]` of a power
/// bounded matrix into a part with `Aⁿ → 0` and a part with unimodular
/// spectrum.
#[derive(Clone, Debug)]
pub struct C01Decomposition {
    /// Unitary change of basis `W`.
    pub basis: ComplexMatrix,
    /// `A₁`, all eigenvalues inside the open unit disk. `None` when empty.
    pub block_c0: Option<ComplexMatrix>,
    /// `A₂`, unimodular spectrum. `None` when empty.
    pub block_c1: Option<ComplexMatrix>,
    /// `A₀`. `None` when either diagonal block is empty.
    pub coupling: Option<ComplexMatrix>,
    /// Coupling numerically zero in the unitary basis `W`.
    pub orthogonal: bool,
    /// `‖W⁻¹SW − [[A₁, A₀], [0, A₂]]‖_F`.
    pub residual: f64,
}

impl C01Decomposition {
    pub fn c0_dim(&self) -> usize {
        self.block_c0.as_ref().map_or(0, |b| b.rows())
    }

    pub fn c1_dim(&self) -> usize {
        self.block_c1.as_ref().map_or(0, |b| b.rows())
    }
}

fn nonempty(m: ComplexMatrix) -> Option<ComplexMatrix> {
    (m.rows() > 0 && m.cols() > 0).then_some(m)
}

pub fn c0_c1_decompose(s: &ComplexMatrix, tol: &ToleranceConfig) -> Result<C01Decomposition> {
    require_power_bounded(s, "S", tol)?;
    let split = spectral_split(s, tol)?;
    let w = split.basis;
    let moved = &(&w.adjoint() * s) * &w;
    let residual = (&moved - &split.triangular).frobenius_norm();
    let coupling_norm = split.coupling.frobenius_norm();
    let basis_unitary = isometry_check(&w, tol).holds;
    let orthogonal = basis_unitary && tol.is_zero(coupling_norm, s.frobenius_norm());
    Ok(C01Decomposition {
        basis: w,
        block_c0: nonempty(split.interior),
        block_c1: nonempty(split.boundary),
        coupling: nonempty(split.coupling),
        orthogonal,
        residual,
    })
}

/// Wold splitting of an isometry. Every isometry on a finite-dimensional
/// space is unitary, so the shift part is always absent: returns `(V, 0)`.
pub fn wold_decompose(v: &ComplexMatrix, tol: &ToleranceConfig) -> Result<(ComplexMatrix, usize)> {
    v.dim()?;
    let check = isometry_check(v, tol);
    if !check.holds {
        return Err(OpsError::NotIsometry(check.residual));
    }
    Ok((v.clone(), 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn diagonal_split_is_orthogonal() {
        let d = c0_c1_decompose(&ComplexMatrix::real_diagonal(&[1.0, 0.5]), &tol()).unwrap();
        assert!(d.orthogonal);
        assert!((d.block_c0.unwrap()[(0, 0)].re - 0.5).abs() < 1e-14);
        assert!((d.block_c1.unwrap()[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!(d.residual < 1e-14);
    }

    #[test]
    fn unitary_has_no_c0_part() {
        let u = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let d = c0_c1_decompose(&u, &tol()).unwrap();
        assert!(d.block_c0.is_none() && d.coupling.is_none());
        assert_eq!(d.c1_dim(), 2);
        assert!(d.orthogonal);
    }

    #[test]
    fn coupled_split_is_not_orthogonal() {
        let s = ComplexMatrix::from_real_rows(&[[1.0, 1.0], [0.0, 0.5]]).unwrap();
        let d = c0_c1_decompose(&s, &tol()).unwrap();
        assert!(!d.orthogonal);
        assert!(d.coupling.unwrap().frobenius_norm() > 0.1);
        assert!((d.block_c0.unwrap()[(0, 0)].re - 0.5).abs() < 1e-13);
        assert!(d.residual < 1e-13);
    }

    #[test]
    fn decomposition_needs_power_bounded() {
        let j = ComplexMatrix::from_real_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(c0_c1_decompose(&j, &tol()), Err(OpsError::NotPowerBounded(_))));
    }

    #[test]
    fn wold_examples() {
        let u = ComplexMatrix::from_real_rows(&[[0.6, -0.8], [0.8, 0.6]]).unwrap();
        assert_eq!(wold_decompose(&u, &tol()).unwrap(), (u.clone(), 0));
        let i = ComplexMatrix::identity(3);
        assert_eq!(wold_decompose(&i, &tol()).unwrap(), (i.clone(), 0));
        let j = ComplexMatrix::from_real_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(wold_decompose(&j, &tol()), Err(OpsError::NotIsometry(_))));
    }
}
