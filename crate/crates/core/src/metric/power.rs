use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{OpsError, Result};
use crate::matcore::{eigenvalues, singular_values, ComplexMatrix, ToleranceConfig};
use crate::minv::{check_left_m_inverse, z_norm_bound};

/// Default number of powers sampled for the empirical `sup ‖S^n‖`.
pub const DEFAULT_HORIZON: u32 = 64;

/// Unimodular eigenvalues closer than this are treated as one cluster when
/// comparing algebraic and geometric multiplicity.
const CLUSTER_RADIUS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerBoundCriterion {
    pub spectral_radius: f64,
    pub unimodular_semisimple: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    OutsideUnitDisk,
    NotSemisimple,
}

/// Why a matrix fails to be power bounded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerBoundWitness {
    pub kind: WitnessKind,
    pub eigenvalue: Complex64,
    pub algebraic_multiplicity: usize,
    pub geometric_multiplicity: usize,
}

impl PowerBoundWitness {
    pub fn describe(&self) -> String {
        let z = self.eigenvalue;
        match self.kind {
            WitnessKind::OutsideUnitDisk => {
                format!("eigenvalue {} has modulus {:.6} > 1", fmt_complex(z), z.norm())
            }
            WitnessKind::NotSemisimple => format!(
                "unimodular eigenvalue {} not semisimple (algebraic multiplicity {}, geometric {})",
                fmt_complex(z),
                self.algebraic_multiplicity,
                self.geometric_multiplicity
            ),
        }
    }
}

pub(crate) fn fmt_complex(z: Complex64) -> String {
    let re = if z.re.abs() < 1e-12 { 0.0 } else { z.re };
    let im = if z.im.abs() < 1e-12 { 0.0 } else { z.im };
    if im == 0.0 {
        format!("{re}")
    } else {
        format!("{re}{im:+}i")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerBoundReport {
    pub bounded: bool,
    /// `max_{1 ≤ n ≤ N} ‖S^n‖`.
    pub m1_estimate: f64,
    pub criterion: PowerBoundCriterion,
    pub witness: Option<PowerBoundWitness>,
}

/// Decides power boundedness with the finite-dimensional criterion: spectral
/// radius at most one and every unimodular eigenvalue semisimple. The
/// empirical `max ‖S^n‖` over `horizon` powers is reported alongside.
pub fn certify_power_bounded(
    s: &ComplexMatrix,
    horizon: u32,
    tol: &ToleranceConfig,
) -> Result<PowerBoundReport> {
    let n = s.dim()?;
    let eig = eigenvalues(s)?;
    let rho = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let band = tol.unit_band(rho);

    let mut witness = eig
        .iter()
        .filter(|z| z.norm() > 1.0 + band)
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .map(|&z| PowerBoundWitness {
            kind: WitnessKind::OutsideUnitDisk,
            eigenvalue: z,
            algebraic_multiplicity: 1,
            geometric_multiplicity: 1,
        });

    let mut semisimple = true;
    let unimodular: Vec<Complex64> =
        eig.iter().copied().filter(|z| (1.0 - z.norm()).abs() <= band).collect();
    for cluster in clusters(&unimodular) {
        let alg = cluster.len();
        let center = cluster.iter().sum::<Complex64>() / alg as f64;
        let spread = cluster.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
        let shifted = s - &ComplexMatrix::identity(n).scale(center);
        let sv = singular_values(&shifted);
        let cutoff = tol.rank_cutoff(sv.first().copied().unwrap_or(0.0)).max(1e3 * spread);
        let geo = sv.iter().filter(|&&x| x <= cutoff).count();
        if geo < alg {
            semisimple = false;
            if witness.is_none() {
                witness = Some(PowerBoundWitness {
                    kind: WitnessKind::NotSemisimple,
                    eigenvalue: center,
                    algebraic_multiplicity: alg,
                    geometric_multiplicity: geo,
                });
            }
        }
    }

    let mut m1: f64 = 0.0;
    let mut power = ComplexMatrix::identity(n);
    for _ in 0..horizon {
        power = &power * s;
        m1 = m1.max(power.operator_norm());
    }

    let bounded = rho <= 1.0 + band && semisimple;
    Ok(PowerBoundReport {
        bounded,
        m1_estimate: m1,
        criterion: PowerBoundCriterion { spectral_radius: rho, unimodular_semisimple: semisimple },
        witness: if bounded { None } else { witness },
    })
}

fn clusters(values: &[Complex64]) -> Vec<Vec<Complex64>> {
    let mut assigned = vec![false; values.len()];
    let mut out = Vec::new();
    for i in 0..values.len() {
        if assigned[i] {
            continue;
        }
        assigned[i] = true;
        let mut group = vec![values[i]];
        let mut k = 0;
        while k < group.len() {
            let z = group[k];
            for j in 0..values.len() {
                if !assigned[j] && (values[j] - z).norm() <= CLUSTER_RADIUS {
                    assigned[j] = true;
                    group.push(values[j]);
                }
            }
            k += 1;
        }
        out.push(group);
    }
    out
}

pub(crate) fn require_power_bounded(s: &ComplexMatrix, what: &str, tol: &ToleranceConfig) -> Result<PowerBoundReport> {
    let report = certify_power_bounded(s, DEFAULT_HORIZON, tol)?;
    if !report.bounded {
        let why = report.witness.map(|w| w.describe()).unwrap_or_default();
        return Err(OpsError::NotPowerBounded(format!("{what}: {why}")));
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    /// `min_{n ≤ N} σ_min(S^n)`.
    pub lower: f64,
    /// `max_{n ≤ N} ‖S^n‖`.
    pub upper: f64,
    /// `max_{k ≤ N·m} {‖S^k‖, ‖T^k‖}`.
    pub m1: f64,
    /// `1 / (2^m M1²)`, the guaranteed lower frame bound.
    pub guaranteed_lower: f64,
}

/// Two-sided bounds `lower‖x‖ ≤ ‖S^n x‖ ≤ upper‖x‖` over `1 ≤ n ≤ horizon`
/// for a power-bounded `S` with a power-bounded left m-inverse `T`.
pub fn frame_bounds(
    s: &ComplexMatrix,
    t: &ComplexMatrix,
    m: u32,
    horizon: u32,
    tol: &ToleranceConfig,
) -> Result<FrameBounds> {
    let check = check_left_m_inverse(s, t, m, tol)?;
    if !check.holds {
        return Err(OpsError::NotLeftInverse { m, residual: check.residual });
    }
    require_power_bounded(s, "S", tol)?;
    require_power_bounded(t, "T", tol)?;
    if horizon == 0 {
        return Err(OpsError::InvalidArgument("horizon must be at least 1".into()));
    }

    let n = s.rows();
    let (mut lower, mut upper) = (f64::INFINITY, 0.0f64);
    let mut m1: f64 = 0.0;
    let (mut sp, mut tp) = (ComplexMatrix::identity(n), ComplexMatrix::identity(n));
    for k in 1..=horizon * m {
        sp = &sp * s;
        tp = &tp * t;
        let sv = singular_values(&sp);
        let top = sv.first().copied().unwrap_or(0.0);
        m1 = m1.max(top).max(tp.operator_norm());
        if k <= horizon {
            upper = upper.max(top);
            lower = lower.min(sv.last().copied().unwrap_or(0.0));
        }
    }
    let guaranteed_lower = 1.0 / z_norm_bound(m, m1);
    if lower < guaranteed_lower - tol.threshold(1.0) {
        return Err(OpsError::Numerical(format!(
            "lower frame bound {lower:.3e} below the guaranteed {guaranteed_lower:.3e}"
        )));
    }
    Ok(FrameBounds { lower, upper, m1, guaranteed_lower })
}
