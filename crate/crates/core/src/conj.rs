//! Conjugations `C(x) = J·conj(x)` and (m,C)-isometries.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{OpsError, Result};
use crate::matcore::{ensure_same_square, ComplexMatrix, ToleranceConfig};
use crate::metric::require_power_bounded;
use crate::minv::{binomial, defect_with_scale, ZeroCheck};

/// An antilinear involution with `⟨Cx, Cy⟩ = ⟨y, x⟩`, stored as the unitary
/// symmetric matrix `J` with `C(x) = J·conj(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConjugationJson", into = "ConjugationJson")]
pub struct Conjugation {
    j: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct ConjugationJson {
    #[serde(rename = "J")]
    j: ComplexMatrix,
}

impl TryFrom<ConjugationJson> for Conjugation {
    type Error = OpsError;
    fn try_from(c: ConjugationJson) -> Result<Self> {
        make_conjugation(c.j, &ToleranceConfig::default())
    }
}

impl From<Conjugation> for ConjugationJson {
    fn from(c: Conjugation) -> Self {
        ConjugationJson { j: c.j }
    }
}

impl Conjugation {
    /// Entrywise complex conjugation, `J = I`.
    pub fn entrywise(n: usize) -> Self {
        Conjugation { j: ComplexMatrix::identity(n) }
    }

    pub fn j(&self) -> &ComplexMatrix {
        &self.j
    }

    pub fn dim(&self) -> usize {
        self.j.rows()
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let conj: Vec<Complex64> = x.iter().map(|z| z.conj()).collect();
        self.j.apply(&conj)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("conjugation serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Validates `J` (unitary and symmetric) and wraps it.
pub fn make_conjugation(j: ComplexMatrix, tol: &ToleranceConfig) -> Result<Conjugation> {
    let n = j.dim()?;
    let id = ComplexMatrix::identity(n);
    let gram = &j.adjoint() * &j;
    let unitary = (&gram - &id).frobenius_norm();
    if !tol.is_zero(unitary, gram.frobenius_norm().max(id.frobenius_norm())) {
        return Err(OpsError::InvalidConjugation(format!("J is not unitary: ‖J*J − I‖ = {unitary:.3e}")));
    }
    let symmetric = (&j - &j.transpose()).frobenius_norm();
    if !tol.is_zero(symmetric, j.frobenius_norm()) {
        return Err(OpsError::InvalidConjugation(format!(
            "J is not symmetric: ‖J − Jᵀ‖ = {symmetric:.3e}"
        )));
    }
    Ok(Conjugation { j })
}

fn ensure_conj_dim(s: &ComplexMatrix, c: &Conjugation) -> Result<usize> {
    ensure_same_square(s, &c.j)
}

/// The matrix of `x ↦ C(S(Cx))`, namely `J·conj(S)·J*`.
pub fn conjugate_operator(c: &Conjugation, s: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_conj_dim(s, c)?;
    Ok(&(&c.j * &s.conjugate()) * &c.j.adjoint())
}

/// `Σ_{j=0}^m (−1)^{m−j} C(m,j) S*ʲ C Sʲ C`, evaluated as `P_m(CSC, S*)`.
pub fn mc_isometry_defect(s: &ComplexMatrix, c: &Conjugation, m: u32) -> Result<ComplexMatrix> {
    check_order(m)?;
    let csc = conjugate_operator(c, s)?;
    Ok(defect_with_scale(&csc, &s.adjoint(), m).0)
}

fn check_order(m: u32) -> Result<()> {
    if m == 0 {
        return Err(OpsError::InvalidArgument("m must be at least 1".into()));
    }
    Ok(())
}

/// The same defect computed column by column, applying `C` as an antilinear
/// map to each basis vector.
pub fn mc_isometry_defect_direct(s: &ComplexMatrix, c: &Conjugation, m: u32) -> Result<ComplexMatrix> {
    check_order(m)?;
    let n = ensure_conj_dim(s, c)?;
    let sa = s.adjoint();
    let mut columns = Vec::with_capacity(n);
    for k in 0..n {
        let mut e = vec![Complex64::ZERO; n];
        e[k] = Complex64::ONE;
        let mut acc = vec![Complex64::ZERO; n];
        for j in 0..=m {
            let mut y = c.apply(&e);
            for _ in 0..j {
                y = s.apply(&y);
            }
            y = c.apply(&y);
            for _ in 0..j {
                y = sa.apply(&y);
            }
            let sign = if (m - j) % 2 == 0 { 1.0 } else { -1.0 };
            let coeff = sign * binomial(m, j) as f64;
            for (a, v) in acc.iter_mut().zip(&y) {
                *a += v * coeff;
            }
        }
        columns.push(acc);
    }
    Ok(ComplexMatrix::from_columns(n, &columns))
}

/// Zero test of the (m,C) defect.
pub fn check_mc_isometry(s: &ComplexMatrix, c: &Conjugation, m: u32, tol: &ToleranceConfig) -> Result<ZeroCheck> {
    check_order(m)?;
    let csc = conjugate_operator(c, s)?;
    let (d, scale) = defect_with_scale(&csc, &s.adjoint(), m);
    Ok(ZeroCheck::new(d.frobenius_norm(), scale, tol))
}

/// `S*CSC = I`.
pub fn is_1c_isometric(s: &ComplexMatrix, c: &Conjugation, tol: &ToleranceConfig) -> Result<bool> {
    Ok(check_mc_isometry(s, c, 1, tol)?.holds)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PropMcReport {
    pub is_mc: bool,
    pub is_1c: bool,
    pub mc_residual: f64,
    pub one_c_residual: f64,
}

impl PropMcReport {
    /// A power bounded (m,C)-isometry must be a (1,C)-isometry.
    pub fn consistent(&self) -> bool {
        !self.is_mc || self.is_1c
    }
}

/// Evaluates both predicates for a power bounded `S`.
pub fn verify_prop_mc(s: &ComplexMatrix, c: &Conjugation, m: u32, tol: &ToleranceConfig) -> Result<PropMcReport> {
    ensure_conj_dim(s, c)?;
    require_power_bounded(s, "S", tol)?;
    let mc = check_mc_isometry(s, c, m, tol)?;
    let one = check_mc_isometry(s, c, 1, tol)?;
    Ok(PropMcReport { is_mc: mc.holds, is_1c: one.holds, mc_residual: mc.residual, one_c_residual: one.residual })
}

/// `M(t) = [[cosh t, i sinh t], [−i sinh t, cosh t]]`: complex orthogonal,
/// hence a (1,C)-isometry for entrywise `C`, and not power bounded for
/// `t ≠ 0`.
pub fn hyperbolic_orthogonal_example(t: f64) -> ComplexMatrix {
    let (ch, sh) = (t.cosh(), t.sinh());
    ComplexMatrix::from_rows(&[
        vec![Complex64::new(ch, 0.0), Complex64::new(0.0, sh)],
        vec![Complex64::new(0.0, -sh), Complex64::new(ch, 0.0)],
    ])
    .expect("2x2 finite entries")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::c;
    use crate::metric::certify_power_bounded;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn flip(n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |i, j| if i + j == n - 1 { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    #[test]
    fn make_conjugation_examples() {
        assert!(make_conjugation(ComplexMatrix::identity(3), &tol()).is_ok());
        assert!(make_conjugation(flip(4), &tol()).is_ok());
        let anti = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [-1.0, 0.0]]).unwrap();
        let err = make_conjugation(anti, &tol()).unwrap_err();
        assert!(err.to_string().contains("symmetric"));
        let err = make_conjugation(ComplexMatrix::real_diagonal(&[2.0, 1.0]), &tol()).unwrap_err();
        assert!(err.to_string().contains("unitary"));
    }

    #[test]
    fn conjugate_operator_examples() {
        let cj = Conjugation::entrywise(2);
        let r = ComplexMatrix::from_real_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(conjugate_operator(&cj, &r).unwrap(), r);
        let ii = ComplexMatrix::identity(2).scale(c(0.0, 1.0));
        let out = conjugate_operator(&cj, &ii).unwrap();
        assert_eq!(out, ComplexMatrix::identity(2).scale(c(0.0, -1.0)));
    }

    #[test]
    fn conjugate_operator_matches_basis_action() {
        let cf = make_conjugation(flip(3), &tol()).unwrap();
        let s = ComplexMatrix::from_fn(3, 3, |i, j| c(i as f64 + 0.5, j as f64 - 1.0));
        let csc = conjugate_operator(&cf, &s).unwrap();
        for k in 0..3 {
            let mut e = vec![Complex64::ZERO; 3];
            e[k] = Complex64::ONE;
            let direct = cf.apply(&s.apply(&cf.apply(&e)));
            for (a, b) in direct.iter().zip(csc.column(k)) {
                assert!((a - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn mc_defect_examples() {
        let cj = Conjugation::entrywise(2);
        let (sn, cs) = 0.4f64.sin_cos();
        let rot = ComplexMatrix::from_real_rows(&[[cs, -sn], [sn, cs]]).unwrap();
        assert!(mc_isometry_defect(&rot, &cj, 1).unwrap().frobenius_norm() < 1e-15);

        let ii = ComplexMatrix::identity(2).scale(c(0.0, 1.0));
        let d = mc_isometry_defect(&ii, &cj, 1).unwrap();
        assert!((&d - &ComplexMatrix::identity(2).scale_real(-2.0)).frobenius_norm() < 1e-15);
        assert!(!is_1c_isometric(&ii, &cj, &tol()).unwrap());
        assert!(is_1c_isometric(&ComplexMatrix::identity(2), &cj, &tol()).unwrap());
        assert!(is_1c_isometric(&rot, &cj, &tol()).unwrap());
        assert!(mc_isometry_defect(&rot, &cj, 0).is_err());
    }

    #[test]
    fn direct_path_agrees() {
        let cf = make_conjugation(flip(3), &tol()).unwrap();
        let s = ComplexMatrix::from_fn(3, 3, |i, j| c(0.3 * i as f64 - 0.2, 0.1 * j as f64 + 0.05 * (i * j) as f64));
        for m in 1..=4 {
            let a = mc_isometry_defect(&s, &cf, m).unwrap();
            let b = mc_isometry_defect_direct(&s, &cf, m).unwrap();
            assert!((&a - &b).frobenius_norm() <= 1e-12 * a.frobenius_norm().max(1.0));
        }
    }

    #[test]
    fn hyperbolic_family() {
        assert!((&hyperbolic_orthogonal_example(0.0) - &ComplexMatrix::identity(2)).frobenius_norm() < 1e-15);
        let cj = Conjugation::entrywise(2);
        for t in [0.5, 1.0, 2.0] {
            let m = hyperbolic_orthogonal_example(t);
            let mt_m = &m.transpose() * &m;
            assert!((&mt_m - &ComplexMatrix::identity(2)).frobenius_norm() < 1e-12 * t.cosh().powi(2));
            assert!(check_mc_isometry(&m, &cj, 1, &tol()).unwrap().holds);
            assert!(!certify_power_bounded(&m, 64, &tol()).unwrap().bounded);
        }
    }

    #[test]
    fn prop_mc_examples() {
        let cj = Conjugation::entrywise(2);
        let rot = ComplexMatrix::from_real_rows(&[[0.0, -1.0], [1.0, 0.0]]).unwrap();
        let r = verify_prop_mc(&rot, &cj, 3, &tol()).unwrap();
        assert!(r.is_mc && r.is_1c && r.consistent());
        let r = verify_prop_mc(&ComplexMatrix::identity(2), &cj, 4, &tol()).unwrap();
        assert!(r.is_mc && r.is_1c);
        let j = ComplexMatrix::from_real_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(verify_prop_mc(&j, &cj, 3, &tol()), Err(OpsError::NotPowerBounded(_))));
    }

    #[test]
    fn jordan_is_strict_three_c_isometry() {
        let cj = Conjugation::entrywise(2);
        let j = ComplexMatrix::from_real_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(check_mc_isometry(&j, &cj, 3, &tol()).unwrap().holds);
        assert!(!check_mc_isometry(&j, &cj, 2, &tol()).unwrap().holds);
        assert!(!check_mc_isometry(&j, &cj, 1, &tol()).unwrap().holds);
    }

    #[test]
    fn json_is_validated() {
        let cf = make_conjugation(flip(2), &tol()).unwrap();
        let back = Conjugation::from_json(&cf.to_json()).unwrap();
        assert_eq!(back, cf);
        let bad = r#"{"J":{"rows":2,"cols":2,"data":[[0,0],[1,0],[-1,0],[0,0]]}}"#;
        assert!(Conjugation::from_json(bad).is_err());
    }
}
