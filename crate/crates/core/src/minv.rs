//! Left m-invertibility: defect polynomials, explicit left inverses of
//! powers, elementary operators on matrix space and their ascent.

use num_complex::Complex64;

use crate::error::{OpsError, Result};
use crate::matcore::{ensure_same_square, singular_values, ComplexMatrix, ToleranceConfig};

/// Exact binomial coefficient.
pub fn binomial(m: u32, j: u32) -> u64 {
    if j > m {
        return 0;
    }
    let j = j.min(m - j) as u128;
    let mut acc: u128 = 1;
    for i in 0..j {
        acc = acc * (m as u128 - i) / (i + 1);
    }
    u64::try_from(acc).expect("binomial coefficient overflows u64")
}

fn sign(m: u32, j: u32) -> f64 {
    if (m - j) % 2 == 0 { 1.0 } else { -1.0 }
}

/// A candidate left m-inverse `T` of `S`.
#[derive(Clone, Debug)]
pub struct LeftInvPair {
    s: ComplexMatrix,
    t: ComplexMatrix,
    m: u32,
}

impl LeftInvPair {
    pub fn new(s: ComplexMatrix, t: ComplexMatrix, m: u32) -> Result<Self> {
        ensure_same_square(&s, &t)?;
        if m == 0 {
            return Err(OpsError::InvalidArgument("m must be at least 1".into()));
        }
        Ok(LeftInvPair { s, t, m })
    }

    pub fn s(&self) -> &ComplexMatrix {
        &self.s
    }

    pub fn t(&self) -> &ComplexMatrix {
        &self.t
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn into_parts(self) -> (ComplexMatrix, ComplexMatrix, u32) {
        (self.s, self.t, self.m)
    }
}

/// Outcome of a "this combination vanishes" test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroCheck {
    pub holds: bool,
    /// Frobenius norm of the combination.
    pub residual: f64,
    /// Largest Frobenius norm among the summands.
    pub scale: f64,
}

impl ZeroCheck {
    pub(crate) fn new(residual: f64, scale: f64, tol: &ToleranceConfig) -> Self {
        ZeroCheck { holds: tol.is_zero(residual, scale), residual, scale }
    }
}

/// `Σ_{j=0}^m (−1)^{m−j} C(m,j) T^j S^j` together with the largest summand norm.
pub(crate) fn defect_with_scale(s: &ComplexMatrix, t: &ComplexMatrix, m: u32) -> (ComplexMatrix, f64) {
    let n = s.rows();
    let mut acc = ComplexMatrix::zeros(n, n);
    let mut scale: f64 = 0.0;
    for j in 0..=m {
        let term = &t.pow(j) * &s.pow(j);
        let coeff = sign(m, j) * binomial(m, j) as f64;
        scale = scale.max(coeff.abs() * term.frobenius_norm());
        acc = &acc + &term.scale_real(coeff);
    }
    (acc, scale)
}

/// The defect polynomial `P_m(S, T)`; zero exactly when `T` is a left
/// m-inverse of `S`.
pub fn defect(s: &ComplexMatrix, t: &ComplexMatrix, m: u32) -> Result<ComplexMatrix> {
    ensure_same_square(s, t)?;
    Ok(defect_with_scale(s, t, m).0)
}

pub fn check_left_m_inverse(
    s: &ComplexMatrix,
    t: &ComplexMatrix,
    m: u32,
    tol: &ToleranceConfig,
) -> Result<ZeroCheck> {
    ensure_same_square(s, t)?;
    let (d, scale) = defect_with_scale(s, t, m);
    Ok(ZeroCheck::new(d.frobenius_norm(), scale, tol))
}

/// Returns `(holds, residual)` for `P_m(S, T) = 0`.
pub fn is_left_m_inverse(pair: &LeftInvPair, tol: &ToleranceConfig) -> (bool, f64) {
    let (d, scale) = defect_with_scale(&pair.s, &pair.t, pair.m);
    let residual = d.frobenius_norm();
    (tol.is_zero(residual, scale), residual)
}

/// Smallest `m ≤ m_max` for which `T` is a left m-inverse of `S`.
pub fn minimal_defect_order(
    s: &ComplexMatrix,
    t: &ComplexMatrix,
    m_max: u32,
    tol: &ToleranceConfig,
) -> Result<Option<u32>> {
    ensure_same_square(s, t)?;
    for m in 1..=m_max {
        if check_left_m_inverse(s, t, m, tol)?.holds {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// `P_m(S^n, T^n)`.
pub fn power_defect(s: &ComplexMatrix, t: &ComplexMatrix, m: u32, n: u32) -> Result<ComplexMatrix> {
    ensure_same_square(s, t)?;
    if n == 0 {
        return Err(OpsError::InvalidArgument("power n must be at least 1".into()));
    }
    Ok(defect_with_scale(&s.pow(n), &t.pow(n), m).0)
}

/// Explicit left inverse of `S^n` built from a left m-inverse `T`:
/// `Z_n = (−1)^{m+1} Σ_{j=1}^m (−1)^{m−j} C(m,j) T^{nj} S^{n(j−1)}`.
///
/// The `j = 0` summand of the defect is the identity that ends up on the
/// right-hand side of `Z_n S^n = I`, so the sum starts at `j = 1`.
pub fn z_inverse(
    s: &ComplexMatrix,
    t: &ComplexMatrix,
    m: u32,
    n: u32,
    tol: &ToleranceConfig,
) -> Result<ComplexMatrix> {
    let check = check_left_m_inverse(s, t, m, tol)?;
    if !check.holds {
        return Err(OpsError::NotLeftInverse { m, residual: check.residual });
    }
    if n == 0 {
        return Err(OpsError::InvalidArgument("power n must be at least 1".into()));
    }
    let dim = s.rows();
    let outer = if (m + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for j in 1..=m {
        let term = &t.pow(n * j) * &s.pow(n * (j - 1));
        acc = &acc + &term.scale_real(outer * sign(m, j) * binomial(m, j) as f64);
    }
    Ok(acc)
}

/// Norm bound `2^m · M1²` for `Z_n` when every power of `S` and `T` has norm
/// at most `M1`.
pub fn z_norm_bound(m: u32, m1: f64) -> f64 {
    2f64.powi(m as i32) * m1 * m1
}

/// `Σ_{j=0}^m (−1)^{m−j} C(m,j) S*^j A S^j`; zero exactly when `S` is an
/// (A, m)-isometry.
pub fn a_m_isometry_defect(
    a: &ComplexMatrix,
    s: &ComplexMatrix,
    m: u32,
    tol: &ToleranceConfig,
) -> Result<ComplexMatrix> {
    ensure_same_square(a, s)?;
    let residual = a.hermitian_residual();
    if !tol.is_zero(residual, a.frobenius_norm()) {
        return Err(OpsError::NotHermitian(residual));
    }
    let sa = s.adjoint();
    let n = s.rows();
    let mut acc = ComplexMatrix::zeros(n, n);
    for j in 0..=m {
        let term = &(&sa.pow(j) * a) * &s.pow(j);
        acc = &acc + &term.scale_real(sign(m, j) * binomial(m, j) as f64);
    }
    Ok(acc)
}

/// Column-stacking `vec(X)`.
pub fn vectorize(x: &ComplexMatrix) -> Vec<Complex64> {
    x.as_dmatrix().iter().copied().collect()
}

/// Inverse of [`vectorize`] for an `n×n` matrix.
pub fn unvectorize(v: &[Complex64], n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| v[i + j * n])
}

/// A linear map on `n×n` matrices, stored as its `n²×n²` action on `vec(X)`.
#[derive(Clone, Debug)]
pub struct LinearMatrixMap {
    n: usize,
    rep: ComplexMatrix,
}

fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    ComplexMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

impl LinearMatrixMap {
    pub fn from_rep(n: usize, rep: ComplexMatrix) -> Result<Self> {
        if rep.rows() != n * n || rep.cols() != n * n {
            return Err(OpsError::DimensionMismatch(format!(
                "map on {n}x{n} matrices needs a {0}x{0} representation",
                n * n
            )));
        }
        Ok(LinearMatrixMap { n, rep })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn matrix_rep(&self) -> &ComplexMatrix {
        &self.rep
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.n || x.cols() != self.n {
            return Err(OpsError::DimensionMismatch(format!(
                "map acts on {0}x{0} matrices, got {1}x{2}",
                self.n,
                x.rows(),
                x.cols()
            )));
        }
        Ok(unvectorize(&self.rep.apply(&vectorize(x)), self.n))
    }

    pub fn compose(&self, other: &LinearMatrixMap) -> Result<LinearMatrixMap> {
        LinearMatrixMap::from_rep(self.n, self.rep.matmul(&other.rep)?)
    }

    /// Orthonormal (Frobenius) basis of the numerical kernel.
    pub fn kernel(&self, tol: &ToleranceConfig) -> Vec<ComplexMatrix> {
        let ns = crate::matcore::null_space(&self.rep, tol);
        (0..ns.cols()).map(|k| unvectorize(&ns.column(k), self.n)).collect()
    }
}

/// `Δ_{A,B}(X) = AXB − X`.
pub fn elementary_operator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<LinearMatrixMap> {
    let n = ensure_same_square(a, b)?;
    let rep = &kron(&b.transpose(), a) - &ComplexMatrix::identity(n * n);
    LinearMatrixMap::from_rep(n, rep)
}

/// `δ_{A,B}(X) = AX − XB`.
pub fn generalized_derivation(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<LinearMatrixMap> {
    let n = ensure_same_square(a, b)?;
    let id = ComplexMatrix::identity(n);
    let rep = &kron(&id, a) - &kron(&b.transpose(), &id);
    LinearMatrixMap::from_rep(n, rep)
}

/// Default cap for [`ascent`]: `n² + 1` for a map on `n×n` matrices.
pub fn default_ascent_cap(map: &LinearMatrixMap) -> u32 {
    (map.n * map.n + 1) as u32
}

/// Least `k ≤ max_k` with `rank(L^k) = rank(L^{k+1})`, or `None` if the
/// kernels have not stabilized by `max_k`. Ranks use a single cutoff,
/// `rel_tol · σ_max(L)`.
pub fn ascent(map: &LinearMatrixMap, max_k: u32, tol: &ToleranceConfig) -> Option<u32> {
    let big_n = map.n * map.n;
    let smax = singular_values(&map.rep).first().copied().unwrap_or(0.0);
    let cutoff = tol.rank_cutoff(smax);
    let rank = |m: &ComplexMatrix| {
        crate::matcore::singular_values(m).iter().filter(|&&s| s > cutoff).count()
    };
    let mut prev_rank = big_n;
    let mut power = map.rep.clone();
    for k in 0..=max_k {
        let r = rank(&power);
        if r == prev_rank {
            return Some(k);
        }
        if k == max_k {
            break;
        }
        prev_rank = r;
        power = &power * &map.rep;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::c;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn j2() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    fn rot(theta: f64) -> ComplexMatrix {
        let (s, co) = theta.sin_cos();
        ComplexMatrix::from_real_rows(&[[co, -s], [s, co]]).unwrap()
    }

    /// Independent route: iterate `X ↦ T X S − X` starting from `I`.
    fn defect_by_iteration(s: &ComplexMatrix, t: &ComplexMatrix, m: u32) -> ComplexMatrix {
        let mut x = ComplexMatrix::identity(s.rows());
        for _ in 0..m {
            x = &(&(t * &x) * s) - &x;
        }
        x
    }

    #[test]
    fn binomials_are_exact() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(60, 30), 118264581564861424);
    }

    #[test]
    fn defect_examples() {
        let id = ComplexMatrix::identity(3);
        for m in 1..6 {
            assert_eq!(defect(&id, &id, m).unwrap().frobenius_norm(), 0.0);
        }
        let d2 = defect(&j2(), &j2().adjoint(), 2).unwrap();
        assert_eq!(d2, ComplexMatrix::from_real_rows(&[[0.0, 0.0], [0.0, 2.0]]).unwrap());
        assert_eq!(defect(&j2(), &j2().adjoint(), 3).unwrap().frobenius_norm(), 0.0);
        assert!(defect(&j2(), &ComplexMatrix::identity(3), 1).is_err());
    }

    #[test]
    fn defect_matches_iteration_oracle() {
        let s = ComplexMatrix::from_rows(&[
            vec![c(0.3, 0.1), c(-0.7, 0.2)],
            vec![c(0.5, -0.4), c(0.9, 0.0)],
        ])
        .unwrap();
        let t = ComplexMatrix::from_rows(&[
            vec![c(1.1, 0.0), c(0.2, 0.3)],
            vec![c(-0.3, 0.6), c(0.4, -0.2)],
        ])
        .unwrap();
        for m in 1..=5 {
            let a = defect(&s, &t, m).unwrap();
            let b = defect_by_iteration(&s, &t, m);
            assert!((&a - &b).max_abs() < 1e-13, "m = {m}");
        }
    }

    #[test]
    fn left_m_inverse_examples() {
        let u = rot(0.7);
        let pair = LeftInvPair::new(u.clone(), u.adjoint(), 1).unwrap();
        let (ok, r) = is_left_m_inverse(&pair, &tol());
        assert!(ok && r < 1e-14);

        let pair = LeftInvPair::new(j2(), j2().adjoint(), 2).unwrap();
        let (ok, r) = is_left_m_inverse(&pair, &tol());
        assert!(!ok && (r - 2.0).abs() < 1e-14);

        assert!(LeftInvPair::new(u.clone(), u.adjoint(), 0).is_err());
    }

    #[test]
    fn minimal_order_examples() {
        let u = rot(1.3);
        assert_eq!(minimal_defect_order(&u, &u.adjoint(), 4, &tol()).unwrap(), Some(1));
        assert_eq!(minimal_defect_order(&j2(), &j2().adjoint(), 4, &tol()).unwrap(), Some(3));
        let half = ComplexMatrix::real_diagonal(&[0.5]);
        assert_eq!(minimal_defect_order(&half, &half, 4, &tol()).unwrap(), None);
    }

    #[test]
    fn power_defect_examples() {
        let p = power_defect(&j2(), &j2().adjoint(), 3, 2).unwrap();
        assert_eq!(p.frobenius_norm(), 0.0);
        let u = rot(0.4);
        for n in 1..5 {
            assert!(power_defect(&u, &u.adjoint(), 1, n).unwrap().frobenius_norm() < 1e-14);
        }
        assert!(power_defect(&u, &u, 1, 0).is_err());
    }

    #[test]
    fn z_inverse_examples() {
        let u = rot(0.9);
        let z = z_inverse(&u, &u.adjoint(), 1, 3, &tol()).unwrap();
        assert!((&z - &u.adjoint().pow(3)).frobenius_norm() < 1e-14);

        let s = j2();
        let t = s.adjoint();
        let z1 = z_inverse(&s, &t, 3, 1, &tol()).unwrap();
        let expected = &(&t.scale_real(3.0) - &(&t.pow(2) * &s).scale_real(3.0)) + &(&t.pow(3) * &s.pow(2));
        assert!((&z1 - &expected).frobenius_norm() < 1e-13);
        assert!((&(&z1 * &s) - &ComplexMatrix::identity(2)).frobenius_norm() < 1e-13);

        assert!(matches!(
            z_inverse(&s, &t, 2, 1, &tol()),
            Err(OpsError::NotLeftInverse { m: 2, .. })
        ));
    }

    #[test]
    fn z_norm_bound_examples() {
        assert_eq!(z_norm_bound(1, 1.0), 2.0);
        assert_eq!(z_norm_bound(3, 2.0), 32.0);
        let u = rot(2.0);
        let z = z_inverse(&u, &u.adjoint(), 1, 4, &tol()).unwrap();
        assert!(z.operator_norm() <= z_norm_bound(1, 1.0));
    }

    #[test]
    fn a_m_isometry_examples() {
        let s = j2();
        let with_identity = a_m_isometry_defect(&ComplexMatrix::identity(2), &s, 2, &tol()).unwrap();
        assert_eq!(with_identity, defect(&s, &s.adjoint(), 2).unwrap());
        assert_eq!(
            a_m_isometry_defect(&ComplexMatrix::identity(2), &s, 3, &tol()).unwrap().frobenius_norm(),
            0.0
        );
        assert!(matches!(
            a_m_isometry_defect(&j2(), &s, 1, &tol()),
            Err(OpsError::NotHermitian(_))
        ));
    }

    #[test]
    fn elementary_operator_matches_direct_action() {
        let a = ComplexMatrix::from_rows(&[vec![c(1.0, 2.0), c(0.5, 0.0)], vec![c(0.0, -1.0), c(3.0, 0.0)]])
            .unwrap();
        let b = ComplexMatrix::from_rows(&[vec![c(0.2, 0.0), c(1.0, 1.0)], vec![c(-2.0, 0.0), c(0.0, 0.7)]])
            .unwrap();
        let delta = elementary_operator(&a, &b).unwrap();
        let deriv = generalized_derivation(&a, &b).unwrap();
        for k in 0..4 {
            let mut x = ComplexMatrix::zeros(2, 2);
            x[(k % 2, k / 2)] = c(1.0, 0.0);
            let want = &(&(&a * &x) * &b) - &x;
            assert!((&delta.apply(&x).unwrap() - &want).max_abs() < 1e-14);
            let want = &(&a * &x) - &(&x * &b);
            assert!((&deriv.apply(&x).unwrap() - &want).max_abs() < 1e-14);
        }
    }

    #[test]
    fn elementary_operator_examples() {
        let id = ComplexMatrix::identity(2);
        let scaled = elementary_operator(&id.scale_real(2.0), &id).unwrap();
        assert!(scaled.kernel(&tol()).is_empty());
        let zero = elementary_operator(&id, &id).unwrap();
        assert_eq!(zero.matrix_rep().frobenius_norm(), 0.0);
        // UXU = X for U = diag(1, -1): X must be diagonal.
        let u = ComplexMatrix::real_diagonal(&[1.0, -1.0]);
        assert_eq!(elementary_operator(&u, &u).unwrap().kernel(&tol()).len(), 2);
    }

    #[test]
    fn derivation_examples() {
        let id = ComplexMatrix::identity(2);
        assert_eq!(generalized_derivation(&id, &id).unwrap().matrix_rep().frobenius_norm(), 0.0);
        let a = ComplexMatrix::real_diagonal(&[1.0, 2.0]);
        let b = ComplexMatrix::real_diagonal(&[3.0, 4.0]);
        assert!(generalized_derivation(&a, &b).unwrap().kernel(&tol()).is_empty());
        let j0 = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        let ker = generalized_derivation(&j0, &j0).unwrap().kernel(&tol());
        assert_eq!(ker.len(), 2);
        for x in &ker {
            assert!((&(&j0 * x) - &(x * &j0)).max_abs() < 1e-14);
        }
    }

    #[test]
    fn ascent_examples() {
        let id = ComplexMatrix::identity(2);
        let inj = elementary_operator(&id.scale_real(2.0), &id).unwrap();
        assert_eq!(ascent(&inj, default_ascent_cap(&inj), &tol()), Some(0));
        let zero = elementary_operator(&id, &id).unwrap();
        assert_eq!(ascent(&zero, 5, &tol()), Some(1));
        let j0 = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        let ad = generalized_derivation(&j0, &j0).unwrap();
        assert_eq!(ascent(&ad, 5, &tol()), Some(3));
        assert_eq!(ascent(&ad, 2, &tol()), None);
    }
}
