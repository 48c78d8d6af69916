//! Seeded corpus sweeps over the main contracts of the library.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::conj::{check_mc_isometry, hyperbolic_orthogonal_example, verify_prop_mc, Conjugation};
use crate::error::{OpsError, Result};
use crate::gen::{
    gaussian_matrix, gen_1c_isometry, gen_conjugation, gen_jordan, gen_orthogonal_sum, gen_power_bounded,
    gen_similar_isometry, random_unitary, Seed,
};
use crate::matcore::{psd_sqrt, ComplexMatrix, ToleranceConfig};
use crate::metric::{
    ascent_bound_check, canonical_left_m_inverse, certify_power_bounded, douglas_factor, douglas_mu,
    extract_isometry, invariant_metric_solution, pf_property_check, similar_to_unitary, verify_prop_isometric,
    DEFAULT_HORIZON,
};
use crate::minv::{z_inverse, z_norm_bound};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteName {
    Thm24,
    Prop26,
    Prop28,
    Douglas,
    PfAscent,
}

impl SuiteName {
    pub const ALL: [SuiteName; 5] =
        [SuiteName::Thm24, SuiteName::Prop26, SuiteName::Prop28, SuiteName::Douglas, SuiteName::PfAscent];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Thm24 => "thm24",
            SuiteName::Prop26 => "prop26",
            SuiteName::Prop28 => "prop28",
            SuiteName::Douglas => "douglas",
            SuiteName::PfAscent => "pf-ascent",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteName {
    type Err = OpsError;
    fn from_str(s: &str) -> Result<Self> {
        SuiteName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| OpsError::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuiteParams {
    pub seed: u64,
    pub count: usize,
    pub dim_max: usize,
}

/// Pass/fail tally for one named check across all instances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CheckStats {
    pub passed: usize,
    pub failed: usize,
    /// Largest residual seen (passing or not).
    pub max_residual: f64,
}

impl CheckStats {
    pub fn pass(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub suite: SuiteName,
    pub params: SuiteParams,
    pub instances: usize,
    pub checks: BTreeMap<String, CheckStats>,
    /// One line per failing instance, capped at [`MAX_FAILURE_NOTES`].
    pub failures: Vec<String>,
}

pub const MAX_FAILURE_NOTES: usize = 20;

impl SuiteOutcome {
    pub fn violations(&self) -> usize {
        self.checks.values().map(|c| c.failed).sum()
    }

    pub fn pass(&self) -> bool {
        self.violations() == 0
    }
}

struct Recorder {
    checks: BTreeMap<String, CheckStats>,
    failures: Vec<String>,
}

impl Recorder {
    fn new() -> Self {
        Recorder { checks: BTreeMap::new(), failures: Vec::new() }
    }

    fn record(&mut self, name: &str, instance: usize, pass: bool, residual: f64) {
        let entry = self.checks.entry(name.to_string()).or_default();
        if pass {
            entry.passed += 1;
        } else {
            entry.failed += 1;
            if self.failures.len() < MAX_FAILURE_NOTES {
                self.failures.push(format!("instance {instance}: {name} failed (residual {residual:.3e})"));
            }
        }
        if residual.is_finite() {
            entry.max_residual = entry.max_residual.max(residual);
        }
    }

    fn error(&mut self, name: &str, instance: usize, err: &OpsError) {
        self.checks.entry(name.to_string()).or_default().failed += 1;
        if self.failures.len() < MAX_FAILURE_NOTES {
            self.failures.push(format!("instance {instance}: {name} errored: {err}"));
        }
    }

    fn finish(self, suite: SuiteName, params: SuiteParams, instances: usize) -> SuiteOutcome {
        SuiteOutcome { suite, params, instances, checks: self.checks, failures: self.failures }
    }
}

/// Dimension of instance `i` cycling through `lo..=hi`.
fn cycle_dim(i: usize, lo: usize, hi: usize) -> usize {
    lo + i % (hi - lo + 1)
}

pub fn run_suite(name: SuiteName, params: SuiteParams, tol: &ToleranceConfig) -> Result<SuiteOutcome> {
    if params.count == 0 || params.dim_max == 0 {
        return Err(OpsError::InvalidArgument("count and dim-max must be positive".into()));
    }
    match name {
        SuiteName::Thm24 => thm24(params, tol),
        SuiteName::Prop26 => prop26(params, tol),
        SuiteName::Prop28 => prop28(params, tol),
        SuiteName::Douglas => douglas(params, tol),
        SuiteName::PfAscent => pf_ascent(params, tol),
    }
}

fn rel_check(residual: f64, scale: f64, rel: f64) -> bool {
    residual <= rel * scale.max(1.0)
}

/// Metric, isometry, canonical inverse, unitary similarity and `Z_n` on
/// `S = P0⁻¹UP0`, plus `Z_n` on the Jordan 3-isometries.
fn thm24(params: SuiteParams, tol: &ToleranceConfig) -> Result<SuiteOutcome> {
    let root = Seed(params.seed);
    let mut rec = Recorder::new();
    for i in 0..params.count {
        let n = cycle_dim(i, 1, params.dim_max);
        let m = 1 + (i % 4) as u32;
        let g = gen_similar_isometry(n, root.derive(i as u64))?;
        thm24_instance(&mut rec, i, &g.s, m, tol);
    }
    for k in [1u32, 2, 3] {
        let theta = 0.7 * k as f64;
        let j = gen_jordan(2, Complex64::from_polar(1.0, theta))?;
        let i = params.count + k as usize;
        z_checks(&mut rec, i, &j, &j.adjoint(), 3, false, tol);
    }
    Ok(rec.finish(SuiteName::Thm24, params, params.count + 3))
}

fn thm24_instance(rec: &mut Recorder, i: usize, s: &ComplexMatrix, m: u32, tol: &ToleranceConfig) {
    let sol = match invariant_metric_solution(s, tol) {
        Ok(sol) => sol,
        Err(e) => return rec.error("metric", i, &e),
    };
    let x = &sol.metric;
    rec.record("metric", i, tol.is_zero(sol.residual, x.frobenius_norm()), sol.residual);
    let p = match psd_sqrt(x, tol) {
        Ok(p) => p,
        Err(e) => return rec.error("isometry", i, &e),
    };
    match extract_isometry(s, &p, tol) {
        Ok(v) => {
            let iso = (&(&v.adjoint() * &v) - &ComplexMatrix::identity(v.rows())).frobenius_norm();
            rec.record("isometry", i, tol.is_zero(iso, v.frobenius_norm()), iso);
            let ps = &p * s;
            let vp = &v * &p;
            let sim = (&ps - &vp).frobenius_norm();
            rec.record("similarity", i, tol.is_zero(sim, p.operator_norm() * s.operator_norm()), sim);
        }
        Err(e) => rec.error("isometry", i, &e),
    }
    let t = match canonical_left_m_inverse(s, &p, m, tol) {
        Ok(t) => t,
        Err(e) => return rec.error("canonical-inverse", i, &e),
    };
    let d = crate::minv::check_left_m_inverse(s, &t, m, tol).expect("same shape");
    rec.record("canonical-inverse", i, d.holds, d.residual);
    match similar_to_unitary(s, &t, m, tol) {
        Ok(u) => {
            rec.record("unitary-similarity", i, u.holds(), u.check_link.residual);
        }
        Err(e) => rec.error("unitary-similarity", i, &e),
    }
    z_checks(rec, i, s, &t, m, true, tol);
}

/// `Z_n S^n = I` for `n = 1..6`, and the norm bound when both are power bounded.
fn z_checks(rec: &mut Recorder, i: usize, s: &ComplexMatrix, t: &ComplexMatrix, m: u32, bounded: bool, tol: &ToleranceConfig) {
    let dim = s.rows();
    let m1 = (1..=6 * m)
        .map(|k| s.pow(k).operator_norm().max(t.pow(k).operator_norm()))
        .fold(0.0, f64::max);
    for n in 1..=6u32 {
        let z = match z_inverse(s, t, m, n, tol) {
            Ok(z) => z,
            Err(e) => return rec.error("z-left-inverse", i, &e),
        };
        let sn = s.pow(n);
        let zs = &z * &sn;
        let res = (&zs - &ComplexMatrix::identity(dim)).frobenius_norm();
        let scale = z.frobenius_norm() * sn.frobenius_norm();
        rec.record("z-left-inverse", i, tol.is_zero(res, scale), res);
        if bounded {
            let excess = z.operator_norm() - z_norm_bound(m, m1);
            rec.record("z-norm-bound", i, excess <= 1e-6, excess.max(0.0));
        }
    }
}

/// Power bounded sweep: no m-isometry (m ≤ 4) that is not an isometry.
fn prop26(params: SuiteParams, tol: &ToleranceConfig) -> Result<SuiteOutcome> {
    let root = Seed(params.seed);
    let mut rec = Recorder::new();
    let hi = params.dim_max.max(2);
    for i in 0..params.count {
        let n = cycle_dim(i, 2.min(hi), hi);
        let seed = root.derive(i as u64);
        // Every fifth instance is unitary.
        let s = if i % 5 == 0 { gen_orthogonal_sum(n, 0, seed)? } else { gen_power_bounded(n, seed)? };
        for m in 1..=4 {
            match verify_prop_isometric(&s, m, tol) {
                Ok(r) => {
                    let strict = r.is_m_isometric && r.isometry_residual > 1e-6;
                    rec.record("m-isometric-implies-isometric", i, r.consistent() && !strict, r.isometry_residual);
                    if r.is_m_isometric {
                        rec.record("m-isometric-found", i, true, r.m_residual);
                    }
                }
                Err(e) => rec.error("m-isometric-implies-isometric", i, &e),
            }
        }
    }
    Ok(rec.finish(SuiteName::Prop26, params, params.count))
}

/// Power bounded `(S, C)` sweep: no (m,C)-isometry that is not a
/// (1,C)-isometry; real orthogonal positives; hyperbolic negatives.
fn prop28(params: SuiteParams, tol: &ToleranceConfig) -> Result<SuiteOutcome> {
    let root = Seed(params.seed);
    let mut rec = Recorder::new();
    let hi = params.dim_max.max(2);
    for i in 0..params.count {
        let n = cycle_dim(i, 2.min(hi), hi);
        let seed = root.derive(i as u64);
        let positive = i % 5 == 0;
        let (s, c) = if positive {
            gen_1c_isometry(n, seed, None)?
        } else {
            (gen_power_bounded(n, seed)?, gen_conjugation(n, seed.derive(1))?)
        };
        for m in 1..=4 {
            match verify_prop_mc(&s, &c, m, tol) {
                Ok(r) => {
                    rec.record("mc-implies-1c", i, r.consistent(), r.one_c_residual);
                    if positive {
                        rec.record("orthogonal-positive", i, r.is_mc && r.is_1c, r.mc_residual);
                    }
                }
                Err(e) => rec.error("mc-implies-1c", i, &e),
            }
        }
    }
    let cj = Conjugation::entrywise(2);
    for (k, t) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let i = params.count + k;
        let h = hyperbolic_orthogonal_example(t);
        match (check_mc_isometry(&h, &cj, 1, tol), certify_power_bounded(&h, DEFAULT_HORIZON, tol)) {
            (Ok(one), Ok(pb)) => rec.record("hyperbolic-unbounded-1c", i, one.holds && !pb.bounded, one.residual),
            (Err(e), _) | (_, Err(e)) => rec.error("hyperbolic-unbounded-1c", i, &e),
        }
    }
    Ok(rec.finish(SuiteName::Prop28, params, params.count + 3))
}

/// `A = B C₀` with `B` of random shape, every other instance rank deficient.
fn douglas(params: SuiteParams, tol: &ToleranceConfig) -> Result<SuiteOutcome> {
    let root = Seed(params.seed);
    let mut rec = Recorder::new();
    for i in 0..params.count {
        let mut rng = root.derive(i as u64).rng();
        let rows = rng.random_range(1..=params.dim_max);
        let inner = rng.random_range(1..=params.dim_max);
        let cols = rng.random_range(1..=params.dim_max);
        let b = if i % 2 == 1 && rows.min(inner) > 1 {
            let r = rng.random_range(1..rows.min(inner));
            &gaussian_matrix(rows, r, &mut rng) * &gaussian_matrix(r, inner, &mut rng)
        } else {
            gaussian_matrix(rows, inner, &mut rng)
        };
        let c0 = gaussian_matrix(inner, cols, &mut rng);
        let a = &b * &c0;
        match douglas_factor(&a, &b, tol) {
            Ok(f) => {
                rec.record("factor-residual", i, f.residual <= 1e-8, f.residual);
                let c_norm2 = f.c.operator_norm().powi(2);
                let gap = (c_norm2 - f.mu2).abs();
                rec.record("mu-matches-norm", i, rel_check(gap, c_norm2.max(f.mu2), 1e-6), gap);
                rec.record("kernel-equality", i, f.kernels_agree, 0.0);
                rec.record("range-orthogonal", i, f.range_in_corange, 0.0);
                let excess = f.c.operator_norm() - c0.operator_norm();
                rec.record("minimal-norm", i, excess <= tol.threshold(c0.operator_norm()), excess.max(0.0));
                if let Ok(mu) = douglas_mu(&a, &b, tol) {
                    rec.record("mu-standalone", i, (mu - f.mu2).abs() <= tol.threshold(mu), (mu - f.mu2).abs());
                }
            }
            Err(e) => rec.error("factor-residual", i, &e),
        }
    }
    Ok(rec.finish(SuiteName::Douglas, params, params.count))
}

/// Structural and search verdicts of the PF check agree; inclusion forces
/// ascent at most one.
fn pf_ascent(params: SuiteParams, tol: &ToleranceConfig) -> Result<SuiteOutcome> {
    let root = Seed(params.seed);
    let mut rec = Recorder::new();
    let hi = params.dim_max.clamp(2, 5);
    for i in 0..params.count {
        let seed = root.derive(i as u64);
        let mut rng = seed.derive(7).rng();
        let n = cycle_dim(i, 2, hi);
        let a = if i % 2 == 0 {
            let k1 = rng.random_range(0..=n);
            gen_orthogonal_sum(k1, n - k1, seed)?
        } else {
            gen_power_bounded(n, seed)?
        };
        let report = match pf_property_check(&a, 4, tol) {
            Ok(r) => r,
            Err(e) => {
                rec.error("pf-agreement", i, &e);
                continue;
            }
        };
        rec.record("pf-agreement", i, report.agreement, 0.0);
        let witnessed = report.satisfies_pf || report.counterexample.is_some();
        rec.record("pf-counterexample", i, witnessed, 0.0);

        let mut unitaries = vec![ComplexMatrix::identity(n), random_unitary(n, &mut rng)];
        if let Ok(eigs) = crate::matcore::eigenvalues(&a) {
            for z in eigs.into_iter().filter(|z| (z.norm() - 1.0).abs() <= tol.unit_band(1.0)) {
                let phase = z / z.norm();
                unitaries.push(ComplexMatrix::identity(n).scale(phase));
                unitaries.push(ComplexMatrix::identity(n).scale(phase.conj()));
            }
        }
        if let Some(cx) = &report.counterexample {
            unitaries.push(cx.v.clone());
        }
        for v in &unitaries {
            match ascent_bound_check(&a, v, tol) {
                Ok(r) => {
                    rec.record("ascent-elementary", i, r.elementary.holds(), r.elementary.ascent as f64);
                    rec.record("ascent-derivation", i, r.derivation.holds(), r.derivation.ascent as f64);
                }
                Err(e) => rec.error("ascent-elementary", i, &e),
            }
        }
    }
    Ok(rec.finish(SuiteName::PfAscent, params, params.count))
}
