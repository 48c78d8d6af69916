//! Putnam–Fuglede property, ascent bounds and isometric rigidity.

use num_complex::Complex64;
use serde::Serialize;

use super::decomposition::c0_c1_decompose;
use super::power::require_power_bounded;
use super::similarity::isometry_check;
use crate::error::{OpsError, Result};
use crate::gen::{random_unitary, Seed};
use crate::matcore::{ensure_same_square, ComplexMatrix, ToleranceConfig};
use crate::minv::{
    ascent, check_left_m_inverse, default_ascent_cap, elementary_operator, generalized_derivation,
    LinearMatrixMap, ZeroCheck,
};

/// Seed of the random unitaries used by [`pf_property_check`].
pub const PF_SEED: Seed = Seed(0x5046_5F64);

/// `X` solves `A X V* = X` but not `A* X V = X`.
#[derive(Clone, Debug, Serialize)]
pub struct PfCounterexample {
    #[serde(rename = "V")]
    pub v: ComplexMatrix,
    #[serde(rename = "X")]
    pub x: ComplexMatrix,
    /// `‖Δ_{A,V*}(X)‖_F`.
    pub kernel_residual: f64,
    /// `‖Δ_{A*,V}(X)‖_F`.
    pub violation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PfReport {
    pub satisfies_pf: bool,
    /// `A` splits orthogonally as unitary ⊕ (spectral radius < 1).
    pub structural: bool,
    pub counterexample: Option<PfCounterexample>,
    pub unitaries_tested: usize,
    /// `satisfies_pf == structural`.
    pub agreement: bool,
    pub diagnostic: Option<String>,
}

/// Outcome of `ker L₁ ⊆ ker L₂` on an orthonormal kernel basis of `L₁`.
struct Inclusion {
    holds: bool,
    worst: Option<(ComplexMatrix, f64, f64)>,
}

fn kernel_inclusion(l1: &LinearMatrixMap, l2: &LinearMatrixMap, tol: &ToleranceConfig) -> Result<Inclusion> {
    let l2_norm = l2.matrix_rep().operator_norm();
    let mut worst: Option<(ComplexMatrix, f64, f64)> = None;
    let mut holds = true;
    for x in l1.kernel(tol) {
        let violation = l2.apply(&x)?.frobenius_norm();
        let check = ZeroCheck::new(violation, l2_norm * x.frobenius_norm(), tol);
        if !check.holds {
            holds = false;
            if worst.as_ref().map_or(true, |w| violation > w.2) {
                let r1 = l1.apply(&x)?.frobenius_norm();
                worst = Some((x, r1, violation));
            }
        }
    }
    Ok(Inclusion { holds, worst })
}

fn permutation(n: usize, f: impl Fn(usize) -> usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| if f(j) == i { Complex64::ONE } else { Complex64::ZERO })
}

/// Identity, flip and cyclic shift, scalar multiples `λI` for each distinct
/// unimodular eigenvalue of `a`, and the diagonal of those eigenvalues.
fn deterministic_unitaries(boundary: &[Complex64], n: usize) -> Vec<ComplexMatrix> {
    let mut out = vec![ComplexMatrix::identity(n)];
    if n > 1 {
        out.push(permutation(n, |j| n - 1 - j));
        out.push(permutation(n, |j| (j + 1) % n));
    }
    let mut distinct: Vec<Complex64> = Vec::new();
    for &z in boundary {
        if distinct.iter().all(|d| (d - z).norm() > 1e-6) {
            distinct.push(z);
        }
    }
    for &z in &distinct {
        let phase = z / z.norm();
        out.push(ComplexMatrix::identity(n).scale(phase));
    }
    if !boundary.is_empty() {
        let diag: Vec<Complex64> = (0..n)
            .map(|k| boundary.get(k).map_or(Complex64::ONE, |z| z / z.norm()))
            .collect();
        out.push(ComplexMatrix::diagonal(&diag));
    }
    out
}

/// Searches for a solution of `A X V* = X` with `A* X V ≠ X` over a fixed
/// set of unitaries plus `sample_count` random ones from [`PF_SEED`], and
/// compares the verdict with the structural criterion.
pub fn pf_property_check(a: &ComplexMatrix, sample_count: usize, tol: &ToleranceConfig) -> Result<PfReport> {
    pf_property_check_seeded(a, sample_count, PF_SEED, tol)
}

pub fn pf_property_check_seeded(
    a: &ComplexMatrix,
    sample_count: usize,
    seed: Seed,
    tol: &ToleranceConfig,
) -> Result<PfReport> {
    let n = a.dim()?;
    require_power_bounded(a, "A", tol)?;
    let dec = c0_c1_decompose(a, tol)?;
    let c1_unitary = dec.block_c1.as_ref().map_or(true, |b| isometry_check(b, tol).holds);
    let c0_stable = match &dec.block_c0 {
        Some(b) => b.spectral_radius()? < 1.0,
        None => true,
    };
    let structural = dec.orthogonal && c1_unitary && c0_stable;

    let boundary: Vec<Complex64> = dec
        .block_c1
        .as_ref()
        .map(|b| (0..b.rows()).map(|i| b[(i, i)]).collect())
        .unwrap_or_default();
    let mut candidates = deterministic_unitaries(&boundary, n);
    let mut rng = seed.rng();
    candidates.extend((0..sample_count).map(|_| random_unitary(n, &mut rng)));

    let aa = a.adjoint();
    let mut counterexample = None;
    for v in &candidates {
        let l1 = elementary_operator(a, &v.adjoint())?;
        let l2 = elementary_operator(&aa, v)?;
        let inc = kernel_inclusion(&l1, &l2, tol)?;
        if !inc.holds {
            let (x, kernel_residual, violation) = inc.worst.expect("violation recorded");
            counterexample = Some(PfCounterexample { v: v.clone(), x, kernel_residual, violation });
            break;
        }
    }
    let satisfies_pf = counterexample.is_none();
    let agreement = satisfies_pf == structural;
    let diagnostic = (!agreement).then(|| {
        format!(
            "search says PF {} but the structural criterion says {} \
             (orthogonal split: {}, unimodular block unitary: {})",
            if satisfies_pf { "holds" } else { "fails" },
            if structural { "holds" } else { "fails" },
            dec.orthogonal,
            c1_unitary
        )
    });
    Ok(PfReport { satisfies_pf, structural, counterexample, unitaries_tested: candidates.len(), agreement, diagnostic })
}

/// Kernel inclusion and ascent for one map family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AscentContract {
    pub inclusion: bool,
    pub ascent: u32,
}

impl AscentContract {
    /// Inclusion forces ascent at most one.
    pub fn holds(&self) -> bool {
        !self.inclusion || self.ascent <= 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AscentReport {
    /// `Δ_{A,V*}(X) = A X V* − X` against `Δ_{A*,V}`.
    pub elementary: AscentContract,
    /// `δ_{A,V*}(X) = A X − X V*` against `δ_{A*,V}`.
    pub derivation: AscentContract,
}

impl AscentReport {
    pub fn holds(&self) -> bool {
        self.elementary.holds() && self.derivation.holds()
    }
}

fn contract(l1: &LinearMatrixMap, l2: &LinearMatrixMap, tol: &ToleranceConfig) -> Result<AscentContract> {
    let inclusion = kernel_inclusion(l1, l2, tol)?.holds;
    let cap = default_ascent_cap(l1);
    let ascent = ascent(l1, cap, tol)
        .ok_or_else(|| OpsError::Numerical(format!("kernel chain did not stabilize within {cap} powers")))?;
    Ok(AscentContract { inclusion, ascent })
}

/// Checks that `ker d_{A,V*} ⊆ ker d_{A*,V}` implies ascent `≤ 1`, for both
/// the elementary operator and the generalized derivation.
pub fn ascent_bound_check(a: &ComplexMatrix, v: &ComplexMatrix, tol: &ToleranceConfig) -> Result<AscentReport> {
    ensure_same_square(a, v)?;
    let iso = isometry_check(v, tol);
    if !iso.holds {
        return Err(OpsError::NotIsometry(iso.residual));
    }
    let (aa, va) = (a.adjoint(), v.adjoint());
    let elementary = contract(&elementary_operator(a, &va)?, &elementary_operator(&aa, v)?, tol)?;
    let derivation = contract(&generalized_derivation(a, &va)?, &generalized_derivation(&aa, v)?, tol)?;
    Ok(AscentReport { elementary, derivation })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PropIsometricReport {
    pub is_m_isometric: bool,
    pub is_isometric: bool,
    pub is_unitary: bool,
    /// `‖P_m(S, S*)‖_F`.
    pub m_residual: f64,
    /// `‖S*S − I‖_F`.
    pub isometry_residual: f64,
}

impl PropIsometricReport {
    /// A power bounded m-isometry is an isometry, and an isometric matrix is
    /// unitary.
    pub fn consistent(&self) -> bool {
        (!self.is_m_isometric || self.is_isometric) && (!self.is_isometric || self.is_unitary)
    }
}

pub fn verify_prop_isometric(s: &ComplexMatrix, m: u32, tol: &ToleranceConfig) -> Result<PropIsometricReport> {
    let n = s.dim()?;
    require_power_bounded(s, "S", tol)?;
    let defect = check_left_m_inverse(s, &s.adjoint(), m, tol)?;
    let iso = isometry_check(s, tol);
    let id = ComplexMatrix::identity(n);
    let ssa = s * &s.adjoint();
    let co = ZeroCheck::new((&ssa - &id).frobenius_norm(), ssa.frobenius_norm().max(id.frobenius_norm()), tol);
    Ok(PropIsometricReport {
        is_m_isometric: defect.holds,
        is_isometric: iso.holds,
        is_unitary: iso.holds && co.holds,
        m_residual: defect.residual,
        isometry_residual: iso.residual,
    })
}
