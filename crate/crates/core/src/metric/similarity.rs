//! Invariant metrics `S*XS = X` and the similarity certificates built on them.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::power::{certify_power_bounded, require_power_bounded, DEFAULT_HORIZON};
use crate::error::{OpsError, Result};
use crate::matcore::{ensure_same_square, hermitian_eigen, psd_sqrt, ComplexMatrix, ToleranceConfig};
use crate::minv::{check_left_m_inverse, ZeroCheck};

/// Largest number of doublings in the Cesàro average (2^24 terms).
const CESARO_MAX_DOUBLINGS: u32 = 24;
const CESARO_STOP: f64 = 1e-7;

/// Orthonormal basis of the Hermitian `n×n` matrices as a real vector space
/// under `⟨X, Y⟩ = Re tr(X* Y)`.
fn hermitian_basis(n: usize) -> Vec<ComplexMatrix> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        let mut e = ComplexMatrix::zeros(n, n);
        e[(k, k)] = Complex64::ONE;
        out.push(e);
    }
    for k in 0..n {
        for l in (k + 1)..n {
            let mut e = ComplexMatrix::zeros(n, n);
            e[(k, l)] = Complex64::new(r, 0.0);
            e[(l, k)] = Complex64::new(r, 0.0);
            out.push(e);
            let mut e = ComplexMatrix::zeros(n, n);
            e[(k, l)] = Complex64::new(0.0, r);
            e[(l, k)] = Complex64::new(0.0, -r);
            out.push(e);
        }
    }
    out
}

fn coordinates(basis: &[ComplexMatrix], x: &ComplexMatrix) -> Vec<f64> {
    basis
        .iter()
        .map(|b| {
            b.as_dmatrix().iter().zip(x.as_dmatrix().iter()).map(|(p, q)| (p.conj() * q).re).sum()
        })
        .collect()
}

fn from_coordinates(basis: &[ComplexMatrix], coords: &[f64], n: usize) -> ComplexMatrix {
    basis
        .iter()
        .zip(coords)
        .fold(ComplexMatrix::zeros(n, n), |acc, (b, &w)| &acc + &b.scale_real(w))
}

fn metric_residual(s: &ComplexMatrix, x: &ComplexMatrix, tol: &ToleranceConfig) -> ZeroCheck {
    let moved = &(&s.adjoint() * x) * s;
    let scale = moved.frobenius_norm().max(x.frobenius_norm());
    ZeroCheck::new((&moved - x).frobenius_norm(), scale, tol)
}

/// A positive definite fixed point of `X ↦ S*XS` with diagnostics from both
/// construction routes.
#[derive(Clone, Debug)]
pub struct MetricSolution {
    /// Hermitian positive definite, unit operator norm.
    pub metric: ComplexMatrix,
    /// Real dimension of the Hermitian fixed-point space.
    pub kernel_dim: usize,
    /// Number of terms in the Cesàro average.
    pub cesaro_terms: u64,
    /// `‖X_cesaro − X‖_F / ‖X_cesaro‖_F` before normalization.
    pub cesaro_gap: f64,
    /// `‖S*XS − X‖_F`.
    pub residual: f64,
}

/// Solves `S*XS = X` for a positive definite `X` normalized to unit operator
/// norm. See [`invariant_metric_solution`].
pub fn invariant_metric(s: &ComplexMatrix, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    Ok(invariant_metric_solution(s, tol)?.metric)
}

/// Computes the invariant metric two ways and reconciles them: the Cesàro
/// averages `(1/N) Σ S*^n S^n` (summed by doubling) select a positive element,
/// which is then projected onto the exact Hermitian kernel of
/// `X ↦ S*XS − X` obtained from the vectorized map.
pub fn invariant_metric_solution(s: &ComplexMatrix, tol: &ToleranceConfig) -> Result<MetricSolution> {
    let n = s.dim()?;
    let report = certify_power_bounded(s, DEFAULT_HORIZON, tol)?;
    if !report.bounded {
        let why = report.witness.map(|w| w.describe()).unwrap_or_default();
        return Err(OpsError::NoPositiveDefiniteFixedPoint(format!(
            "S is not power bounded ({why}), so it is not similar to an isometry"
        )));
    }

    // Kernel route: the real n²×n² matrix of X ↦ S*XS − X on Hermitian X.
    let basis = hermitian_basis(n);
    let dim = basis.len();
    let sa = s.adjoint();
    let mut rep = DMatrix::<f64>::zeros(dim, dim);
    for (col, b) in basis.iter().enumerate() {
        let image = &(&(&sa * b) * s) - b;
        for (row, v) in coordinates(&basis, &image).into_iter().enumerate() {
            rep[(row, col)] = v;
        }
    }
    let svd = rep.svd(false, true);
    // Machine-precision cutoff relative to ‖S‖² + 1 ≥ ‖L‖.
    let cutoff = (s.operator_norm().powi(2) + 1.0) * 1e-14 * (dim as f64);
    let v = svd.v_t.expect("requested V").transpose();
    let kernel: Vec<usize> = (0..dim).filter(|&k| svd.singular_values[k] <= cutoff).collect();
    if kernel.is_empty() {
        return Err(OpsError::NoPositiveDefiniteFixedPoint(
            "the only fixed point of X -> S*XS is 0".into(),
        ));
    }

    // Cesàro route: A_{2N} = A_N + S*^N A_N S^N.
    let mut acc = ComplexMatrix::identity(n);
    let mut power = s.clone();
    let mut terms: u64 = 1;
    let mut prev_avg = acc.clone();
    for k in 1..=CESARO_MAX_DOUBLINGS {
        acc = &acc + &(&(&power.adjoint() * &acc) * &power);
        power = &power * &power;
        terms *= 2;
        let avg = acc.scale_real(1.0 / terms as f64);
        let change = (&avg - &prev_avg).frobenius_norm();
        let done = k >= 4 && change <= CESARO_STOP * avg.frobenius_norm();
        prev_avg = avg;
        if done {
            break;
        }
    }
    let cesaro = (&prev_avg + &prev_avg.adjoint()).scale_real(0.5);

    let coords = coordinates(&basis, &cesaro);
    let mut projected = vec![0.0; dim];
    for &k in &kernel {
        let w: f64 = (0..dim).map(|i| v[(i, k)] * coords[i]).sum();
        for i in 0..dim {
            projected[i] += w * v[(i, k)];
        }
    }
    let x = from_coordinates(&basis, &projected, n);
    let cesaro_gap = (&cesaro - &x).frobenius_norm() / cesaro.frobenius_norm();

    let (vals, _) = hermitian_eigen(&x)?;
    let (lo, hi) = (vals[0], vals[n - 1]);
    if !(hi > 0.0) || lo <= tol.rel_tol * hi {
        return Err(OpsError::NoPositiveDefiniteFixedPoint(format!(
            "the fixed-point space has dimension {} but its averaged element is singular \
             (smallest eigenvalue {:.3e})",
            kernel.len(),
            lo / hi.max(f64::MIN_POSITIVE)
        )));
    }
    let metric = x.scale_real(1.0 / hi);
    let residual = metric_residual(s, &metric, tol).residual;
    Ok(MetricSolution { metric, kernel_dim: kernel.len(), cesaro_terms: terms, cesaro_gap, residual })
}

fn require_positive_definite(p: &ComplexMatrix, tol: &ToleranceConfig) -> Result<()> {
    let residual = p.hermitian_residual();
    if !tol.is_zero(residual, p.frobenius_norm()) {
        return Err(OpsError::NotHermitian(residual));
    }
    let (vals, _) = hermitian_eigen(p)?;
    let hi = vals.last().copied().unwrap_or(0.0);
    let lo = vals.first().copied().unwrap_or(0.0);
    if !(lo > tol.rel_tol * hi.abs()) || lo <= 0.0 {
        return Err(OpsError::NotPositiveDefinite(lo));
    }
    Ok(())
}

/// `V = P S P⁻¹`, an isometry whenever `S*P²S = P²`.
pub fn extract_isometry(s: &ComplexMatrix, p: &ComplexMatrix, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    let n = ensure_same_square(s, p)?;
    require_positive_definite(p, tol)?;
    let metric = metric_residual(s, &(p * p), tol);
    if !metric.holds {
        return Err(OpsError::MetricResidual(metric.residual));
    }
    let v = &(p * s) * &p.inverse()?;
    let iso = isometry_check(&v, tol);
    if !iso.holds {
        return Err(OpsError::NotIsometry(iso.residual));
    }
    debug_assert_eq!(v.rows(), n);
    Ok(v)
}

pub(crate) fn isometry_check(v: &ComplexMatrix, tol: &ToleranceConfig) -> ZeroCheck {
    let id = ComplexMatrix::identity(v.cols());
    let gram = &v.adjoint() * v;
    ZeroCheck::new((&gram - &id).frobenius_norm(), gram.frobenius_norm().max(id.frobenius_norm()), tol)
}

/// Witness that `S = P⁻¹VP` with `P` positive definite and `V` an isometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "CertificateJson", try_from = "CertificateJson")]
pub struct SimilarityCertificate {
    pub p: ComplexMatrix,
    pub v: ComplexMatrix,
    /// `‖S*P²S − P²‖_F`.
    pub residual_metric: f64,
    /// `‖V*V − I‖_F`.
    pub residual_isometry: f64,
    /// `‖PS − VP‖_F`.
    pub residual_similarity: f64,
}

#[derive(Serialize, Deserialize)]
struct CertificateJson {
    #[serde(rename = "P")]
    p: ComplexMatrix,
    #[serde(rename = "V")]
    v: ComplexMatrix,
    residuals: ResidualsJson,
}

#[derive(Serialize, Deserialize)]
struct ResidualsJson {
    metric: f64,
    isometry: f64,
    similarity: f64,
}

impl From<SimilarityCertificate> for CertificateJson {
    fn from(c: SimilarityCertificate) -> Self {
        CertificateJson {
            p: c.p,
            v: c.v,
            residuals: ResidualsJson {
                metric: c.residual_metric,
                isometry: c.residual_isometry,
                similarity: c.residual_similarity,
            },
        }
    }
}

impl TryFrom<CertificateJson> for SimilarityCertificate {
    type Error = OpsError;
    fn try_from(c: CertificateJson) -> Result<Self> {
        ensure_same_square(&c.p, &c.v)?;
        Ok(SimilarityCertificate {
            p: c.p,
            v: c.v,
            residual_metric: c.residuals.metric,
            residual_isometry: c.residuals.isometry,
            residual_similarity: c.residuals.similarity,
        })
    }
}

impl SimilarityCertificate {
    /// Recomputes the three residuals against `s` and checks each one.
    pub fn verify(&self, s: &ComplexMatrix, tol: &ToleranceConfig) -> Result<[ZeroCheck; 3]> {
        ensure_same_square(s, &self.p)?;
        let metric = metric_residual(s, &(&self.p * &self.p), tol);
        let iso = isometry_check(&self.v, tol);
        let ps = &self.p * s;
        let vp = &self.v * &self.p;
        let sim = ZeroCheck::new(
            (&ps - &vp).frobenius_norm(),
            ps.frobenius_norm().max(vp.frobenius_norm()),
            tol,
        );
        Ok([metric, iso, sim])
    }
}

/// Builds `P = (invariant metric)^{1/2}` and `V = PSP⁻¹`.
pub fn certify_similarity(s: &ComplexMatrix, tol: &ToleranceConfig) -> Result<SimilarityCertificate> {
    let x = invariant_metric(s, tol)?;
    let p = psd_sqrt(&x, tol)?;
    let v = extract_isometry(s, &p, tol)?;
    let mut cert = SimilarityCertificate {
        p,
        v,
        residual_metric: 0.0,
        residual_isometry: 0.0,
        residual_similarity: 0.0,
    };
    let [metric, iso, sim] = cert.verify(s, tol)?;
    cert.residual_metric = metric.residual;
    cert.residual_isometry = iso.residual;
    cert.residual_similarity = sim.residual;
    Ok(cert)
}

/// `T = P⁻² S* P²`, the left m-inverse induced by an invariant metric `P²`.
pub fn canonical_left_m_inverse(
    s: &ComplexMatrix,
    p: &ComplexMatrix,
    m: u32,
    tol: &ToleranceConfig,
) -> Result<ComplexMatrix> {
    ensure_same_square(s, p)?;
    let x = p * p;
    let metric = metric_residual(s, &x, tol);
    if !metric.holds {
        return Err(OpsError::MetricResidual(metric.residual));
    }
    let pinv = p.inverse()?;
    let t = &(&(&(&pinv * &pinv) * &s.adjoint()) * p) * p;
    let check = check_left_m_inverse(s, &t, m, tol)?;
    if !check.holds {
        return Err(OpsError::NotLeftInverse { m, residual: check.residual });
    }
    require_power_bounded(&t, "T", tol)?;
    Ok(t)
}

/// Unitaries `U1 ~ S` and `U2 ~ T*` linked by one similarity.
///
/// `S = P1 U1 P1⁻¹`, `T* = P2⁻¹ U2 P2` and `U1 = P U2 P⁻¹` with `P = P1 P2⁻¹`.
#[derive(Clone, Debug)]
pub struct UnitarySimilarity {
    pub u1: ComplexMatrix,
    pub u2: ComplexMatrix,
    pub p: ComplexMatrix,
    pub p1: ComplexMatrix,
    pub p2: ComplexMatrix,
    /// `S − P1 U1 P1⁻¹`.
    pub check_s: ZeroCheck,
    /// `T* − P2⁻¹ U2 P2`.
    pub check_t: ZeroCheck,
    /// `U1 − P U2 P⁻¹`.
    pub check_link: ZeroCheck,
    /// `U1*U1 − I` and `U2*U2 − I`.
    pub check_unitary: [ZeroCheck; 2],
}

impl UnitarySimilarity {
    pub fn holds(&self) -> bool {
        self.check_s.holds
            && self.check_t.holds
            && self.check_link.holds
            && self.check_unitary.iter().all(|c| c.holds)
    }
}

fn difference(a: &ComplexMatrix, b: &ComplexMatrix, tol: &ToleranceConfig) -> ZeroCheck {
    ZeroCheck::new((a - b).frobenius_norm(), a.frobenius_norm().max(b.frobenius_norm()), tol)
}

/// For a power-bounded `S` with power-bounded left m-inverse `T`, produces
/// unitaries similar to `S` and `T*` together with the similarity linking
/// them. In finite dimension every left invertible matrix is invertible, so
/// the dense-range hypothesis is automatic.
pub fn similar_to_unitary(
    s: &ComplexMatrix,
    t: &ComplexMatrix,
    m: u32,
    tol: &ToleranceConfig,
) -> Result<UnitarySimilarity> {
    let check = check_left_m_inverse(s, t, m, tol)?;
    if !check.holds {
        return Err(OpsError::NotLeftInverse { m, residual: check.residual });
    }
    require_power_bounded(s, "S", tol)?;
    require_power_bounded(t, "T", tol)?;

    let q1 = psd_sqrt(&invariant_metric(s, tol)?, tol)?;
    let p1 = q1.inverse()?;
    let u1 = &(&q1 * s) * &p1;

    let ta = t.adjoint();
    let p2 = psd_sqrt(&invariant_metric(&ta, tol)?, tol)?;
    let p2inv = p2.inverse()?;
    let u2 = &(&p2 * &ta) * &p2inv;

    let p = &p1 * &p2inv;
    let pinv = &p2 * &q1;

    let check_s = difference(s, &(&(&p1 * &u1) * &q1), tol);
    let check_t = difference(&ta, &(&(&p2inv * &u2) * &p2), tol);
    let check_link = difference(&u1, &(&(&p * &u2) * &pinv), tol);
    let check_unitary = [isometry_check(&u1, tol), isometry_check(&u2, tol)];
    Ok(UnitarySimilarity { u1, u2, p, p1, p2, check_s, check_t, check_link, check_unitary })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn rot(theta: f64) -> ComplexMatrix {
        let (s, co) = theta.sin_cos();
        ComplexMatrix::from_real_rows(&[[co, -s], [s, co]]).unwrap()
    }

    fn p0() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[2.0, 0.5], [0.5, 1.0]]).unwrap()
    }

    fn similar(theta: f64) -> ComplexMatrix {
        let p = p0();
        &(&p.inverse().unwrap() * &rot(theta)) * &p
    }

    #[test]
    fn hermitian_basis_is_orthonormal() {
        let b = hermitian_basis(3);
        assert_eq!(b.len(), 9);
        for (i, x) in b.iter().enumerate() {
            let c = coordinates(&b, x);
            for (j, v) in c.iter().enumerate() {
                assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn unitary_metric_is_identity() {
        let x = invariant_metric(&rot(0.3), &tol()).unwrap();
        assert!((&x - &ComplexMatrix::identity(2)).frobenius_norm() < 1e-10);
    }

    #[test]
    fn similar_metric_is_fixed_and_positive() {
        let s = similar(0.7);
        let sol = invariant_metric_solution(&s, &tol()).unwrap();
        assert_eq!(sol.kernel_dim, 2);
        assert!(sol.residual < 1e-12);
        let (vals, _) = hermitian_eigen(&sol.metric).unwrap();
        assert!(vals[0] > 0.0 && (vals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contraction_has_no_metric() {
        let err = invariant_metric(&ComplexMatrix::real_diagonal(&[0.5]), &tol()).unwrap_err();
        assert!(err.to_string().contains("no positive definite fixed point"));
        let mixed = ComplexMatrix::real_diagonal(&[0.5, 1.0]);
        assert!(matches!(invariant_metric(&mixed, &tol()), Err(OpsError::NoPositiveDefiniteFixedPoint(_))));
        let j = ComplexMatrix::from_real_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(invariant_metric(&j, &tol()), Err(OpsError::NoPositiveDefiniteFixedPoint(_))));
    }

    #[test]
    fn extract_isometry_examples() {
        let u = rot(1.1);
        let v = extract_isometry(&u, &ComplexMatrix::identity(2), &tol()).unwrap();
        assert!((&v - &u).frobenius_norm() < 1e-14);

        let v = extract_isometry(&similar(1.1), &p0(), &tol()).unwrap();
        assert!((&v - &u).frobenius_norm() < 1e-13);

        let j = ComplexMatrix::from_real_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(
            extract_isometry(&j, &ComplexMatrix::identity(2), &tol()),
            Err(OpsError::MetricResidual(_))
        ));
        let indefinite = ComplexMatrix::real_diagonal(&[1.0, -1.0]);
        assert!(matches!(extract_isometry(&u, &indefinite, &tol()), Err(OpsError::NotPositiveDefinite(_))));
    }

    #[test]
    fn certificate_round_trip() {
        let s = similar(2.2);
        let cert = certify_similarity(&s, &tol()).unwrap();
        assert!(cert.residual_metric < 1e-12);
        assert!(cert.residual_isometry < 1e-12);
        assert!(cert.residual_similarity < 1e-12);
        let json = serde_json::to_value(&cert).unwrap();
        assert!(json["residuals"]["metric"].is_number());
        assert!(json["P"]["rows"] == 2);
        let back: SimilarityCertificate = serde_json::from_value(json).unwrap();
        assert_eq!(back, cert);
    }

    #[test]
    fn canonical_inverse_examples() {
        let u = rot(0.5);
        let t = canonical_left_m_inverse(&u, &ComplexMatrix::identity(2), 1, &tol()).unwrap();
        assert!((&t - &u.adjoint()).frobenius_norm() < 1e-14);

        let s = similar(0.5);
        for m in 1..=4 {
            let t = canonical_left_m_inverse(&s, &p0(), m, &tol()).unwrap();
            assert!((&(&t * &s) - &ComplexMatrix::identity(2)).frobenius_norm() < 1e-12);
        }
        assert!(matches!(
            canonical_left_m_inverse(&s, &ComplexMatrix::identity(2), 1, &tol()),
            Err(OpsError::MetricResidual(_))
        ));
    }

    #[test]
    fn similar_to_unitary_examples() {
        let u = rot(0.9);
        let r = similar_to_unitary(&u, &u.adjoint(), 1, &tol()).unwrap();
        assert!(r.holds());
        assert!((&r.u1 - &u).frobenius_norm() < 1e-10);

        let s = similar(0.9);
        let t = canonical_left_m_inverse(&s, &p0(), 2, &tol()).unwrap();
        let r = similar_to_unitary(&s, &t, 2, &tol()).unwrap();
        assert!(r.holds(), "{r:?}");
        assert!(r.check_link.residual < 1e-8);

        let j = ComplexMatrix::from_real_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(
            similar_to_unitary(&j, &j.adjoint(), 3, &tol()),
            Err(OpsError::NotPowerBounded(_))
        ));
    }
}
