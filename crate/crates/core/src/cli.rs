//! The `opslab` command line.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use crate::conj::{check_mc_isometry, make_conjugation, mc_isometry_defect, mc_isometry_defect_direct, Conjugation};
use crate::error::{OpsError, Result};
use crate::gen::{
    gen_1c_isometry, gen_conjugation, gen_jordan, gen_left_m_pair, gen_power_bounded, gen_similar_isometry,
    Manifest, NamedMatrix, Seed,
};
use crate::matcore::{psd_sqrt, ComplexMatrix, ToleranceConfig};
use crate::metric::{
    canonical_left_m_inverse, certify_power_bounded, certify_similarity, douglas_factor, invariant_metric,
    invariant_metric_solution, pf_property_check_seeded, similar_to_unitary, DEFAULT_HORIZON,
};
use crate::minv::{check_left_m_inverse, minimal_defect_order};
use crate::report::Report;
use crate::suite::{run_suite, SuiteName, SuiteParams};

#[derive(Debug, Parser)]
#[command(name = "opslab", version, about = "Left m-inverses, m-isometries and similarity to isometries")]
pub struct Cli {
    /// Emit the machine-readable JSON report.
    #[arg(long, global = true)]
    pub json: bool,
    #[arg(long, global = true, default_value_t = ToleranceConfig::default().abs_tol)]
    pub abs_tol: f64,
    #[arg(long, global = true, default_value_t = ToleranceConfig::default().rel_tol)]
    pub rel_tol: f64,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify a property of the given matrices.
    Check(CheckArgs),
    /// Compute a certificate or factorization.
    Solve(SolveArgs),
    /// Write generated matrices.
    Generate(GenerateArgs),
    /// Run a seeded corpus sweep.
    Suite(SuiteArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    LeftMInverse,
    MIsometry,
    McIsometry,
    PowerBounded,
    PfProperty,
}

/// Inputs are JSON files; `path#name` selects a matrix from a manifest.
#[derive(Debug, Args)]
pub struct CheckArgs {
    pub kind: CheckKind,
    pub inputs: Vec<String>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    pub horizon: u32,
    /// Random unitaries tried by the PF search.
    #[arg(long, default_value_t = 16)]
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolveKind {
    InvariantMetric,
    Similarity,
    CanonicalInverse,
    Douglas,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub kind: SolveKind,
    pub inputs: Vec<String>,
    #[arg(long)]
    pub m: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GeneratorName {
    Jordan,
    SimilarIsometry,
    LeftMPair,
    PowerBounded,
    Conjugation,
    OneCIsometry,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub name: GeneratorName,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    /// Jordan block size.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Jordan eigenvalue, written `a+bi`.
    #[arg(long, default_value = "1+0i", value_parser = parse_complex)]
    pub lambda: Complex64,
    /// Return the hyperbolic `M(t)` instead of a real orthogonal matrix.
    #[arg(long)]
    pub hyperbolic: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Thm24,
    Prop26,
    Prop28,
    Douglas,
    PfAscent,
}

impl From<SuiteArg> for SuiteName {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Thm24 => SuiteName::Thm24,
            SuiteArg::Prop26 => SuiteName::Prop26,
            SuiteArg::Prop28 => SuiteName::Prop28,
            SuiteArg::Douglas => SuiteName::Douglas,
            SuiteArg::PfAscent => SuiteName::PfAscent,
        }
    }
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    pub name: SuiteArg,
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, default_value_t = 6)]
    pub dim_max: usize,
}

/// Parses `a+bi`, `a-bi`, `a`, `bi`, `i` and `-i` (no spaces).
pub fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let bad = || format!("expected a complex number like 1+0i, got {s:?}");
    let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex64::new(num(s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (num(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => num(t)?,
    };
    let z = Complex64::new(re, im);
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(bad());
    }
    Ok(z)
}

/// Reads a matrix from `path` or `path#name`.
pub fn load_matrix(spec: &str) -> Result<ComplexMatrix> {
    let (path, name) = split_spec(spec);
    let text = read(path)?;
    if let Some(name) = name {
        let manifest: Manifest = serde_json::from_str(&text)?;
        return manifest
            .get(name)
            .cloned()
            .ok_or_else(|| OpsError::InvalidArgument(format!("{path} has no matrix named {name:?}")));
    }
    match ComplexMatrix::from_json(&text) {
        Ok(m) => Ok(m),
        Err(err) => match serde_json::from_str::<Manifest>(&text) {
            Ok(man) if man.matrices.len() == 1 => Ok(man.matrices[0].matrix.clone()),
            Ok(man) => Err(OpsError::InvalidArgument(format!(
                "{path} holds {} matrices; select one with {path}#name",
                man.matrices.len()
            ))),
            Err(_) => Err(err),
        },
    }
}

/// Reads a conjugation from `{"J": ...}`, a bare matrix `J`, `path#name`, or
/// the keyword `entrywise` (needs the dimension).
pub fn load_conjugation(spec: &str, n: usize, tol: &ToleranceConfig) -> Result<Conjugation> {
    if spec == "entrywise" {
        return Ok(Conjugation::entrywise(n));
    }
    let (path, name) = split_spec(spec);
    if name.is_none() {
        let text = read(path)?;
        if let Ok(c) = Conjugation::from_json(&text) {
            return Ok(c);
        }
    }
    make_conjugation(load_matrix(spec)?, tol)
}

fn split_spec(spec: &str) -> (&str, Option<&str>) {
    match spec.rsplit_once('#') {
        Some((p, n)) if !n.is_empty() => (p, Some(n)),
        _ => (spec, None),
    }
}

fn read(path: &str) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| OpsError::InvalidArgument(format!("cannot read {path}: {e}")))
}

fn inputs<const N: usize>(given: &[String], what: [&str; N]) -> Result<[String; N]> {
    if given.len() != N {
        return Err(OpsError::InvalidArgument(format!(
            "expected {N} input(s) ({}), got {}",
            what.join(", "),
            given.len()
        )));
    }
    Ok(std::array::from_fn(|k| given[k].clone()))
}

fn require_m(m: Option<u32>) -> Result<u32> {
    match m {
        Some(0) => Err(OpsError::InvalidArgument("--m must be at least 1".into())),
        Some(m) => Ok(m),
        None => Err(OpsError::InvalidArgument("--m is required".into())),
    }
}

impl Cli {
    pub fn tolerances(&self) -> Result<ToleranceConfig> {
        ToleranceConfig::new(self.abs_tol, self.rel_tol)
    }

    fn command_name(&self) -> String {
        let (verb, kind) = match &self.command {
            Command::Check(a) => ("check", a.kind.to_possible_value()),
            Command::Solve(a) => ("solve", a.kind.to_possible_value()),
            Command::Generate(a) => ("generate", a.name.to_possible_value()),
            Command::Suite(a) => ("suite", a.name.to_possible_value()),
        };
        match kind {
            Some(k) => format!("{verb} {}", k.get_name()),
            None => verb.to_string(),
        }
    }

    /// Runs the command. Errors become reports with exit code 1 or 2.
    pub fn run(&self) -> Report {
        let name = self.command_name();
        let tol = match self.tolerances() {
            Ok(t) => t,
            Err(e) => return Report::from_error(name, ToleranceConfig::default(), &e),
        };
        let mut report = Report::new(name.clone(), tol);
        let outcome = match &self.command {
            Command::Check(a) => check(a, self.seed, &tol, &mut report),
            Command::Solve(a) => solve(a, &tol, &mut report),
            Command::Generate(a) => generate(a, self.seed, &mut report),
            Command::Suite(a) => suite(a, self.seed, &tol, &mut report),
        };
        match outcome {
            Ok(()) => report,
            Err(e) => Report::from_error(name, tol, &e),
        }
    }
}

fn check(a: &CheckArgs, seed: u64, tol: &ToleranceConfig, r: &mut Report) -> Result<()> {
    match a.kind {
        CheckKind::LeftMInverse => {
            let [s, t] = inputs(&a.inputs, ["S", "T"])?;
            let m = require_m(a.m)?;
            let (s, t) = (load_matrix(&s)?, load_matrix(&t)?);
            let c = check_left_m_inverse(&s, &t, m, tol)?;
            r.verdict("left-m-inverse", c.holds, c.residual);
            if let Some(order) = minimal_defect_order(&s, &t, m, tol)? {
                r.artifact("minimal_order", order);
            }
        }
        CheckKind::MIsometry => {
            let [s] = inputs(&a.inputs, ["S"])?;
            let m = require_m(a.m)?;
            let s = load_matrix(&s)?;
            let c = check_left_m_inverse(&s, &s.adjoint(), m, tol)?;
            r.verdict("m-isometry", c.holds, c.residual);
            if let Some(order) = minimal_defect_order(&s, &s.adjoint(), m, tol)? {
                r.artifact("minimal_order", order);
            }
        }
        CheckKind::McIsometry => {
            let [s, c] = inputs(&a.inputs, ["S", "C"])?;
            let m = require_m(a.m)?;
            let s = load_matrix(&s)?;
            let c = load_conjugation(&c, s.rows(), tol)?;
            let check = check_mc_isometry(&s, &c, m, tol)?;
            r.verdict("mc-isometry", check.holds, check.residual);
            let gap = (&mc_isometry_defect(&s, &c, m)? - &mc_isometry_defect_direct(&s, &c, m)?).frobenius_norm();
            r.verdict("antilinear-cross-check", tol.is_zero(gap, check.scale), gap);
        }
        CheckKind::PowerBounded => {
            let [s] = inputs(&a.inputs, ["S"])?;
            let s = load_matrix(&s)?;
            let rep = certify_power_bounded(&s, a.horizon, tol)?;
            r.verdict("power-bounded", rep.bounded, (rep.criterion.spectral_radius - 1.0).max(0.0));
            if let Some(w) = &rep.witness {
                r.note(w.describe());
            }
            r.artifact("report", &rep);
        }
        CheckKind::PfProperty => {
            let [s] = inputs(&a.inputs, ["A"])?;
            let s = load_matrix(&s)?;
            let rep = pf_property_check_seeded(&s, a.samples, Seed(seed), tol)?;
            let violation = rep.counterexample.as_ref().map_or(0.0, |c| c.violation);
            r.verdict("pf-property", rep.satisfies_pf, violation);
            r.verdict("structural-agreement", rep.agreement, 0.0);
            r.artifact("structural", rep.structural);
            r.artifact("unitaries_tested", rep.unitaries_tested);
            if let Some(cx) = &rep.counterexample {
                r.artifact("counterexample", cx);
            }
            if let Some(d) = &rep.diagnostic {
                r.note(d.clone());
            }
        }
    }
    Ok(())
}

fn solve(a: &SolveArgs, tol: &ToleranceConfig, r: &mut Report) -> Result<()> {
    match a.kind {
        SolveKind::InvariantMetric => {
            let [s] = inputs(&a.inputs, ["S"])?;
            let s = load_matrix(&s)?;
            let sol = invariant_metric_solution(&s, tol)?;
            r.verdict("metric", tol.is_zero(sol.residual, sol.metric.frobenius_norm()), sol.residual);
            let cert = certify_similarity(&s, tol)?;
            let [metric, iso, sim] = cert.verify(&s, tol)?;
            r.verdict("isometry", iso.holds, iso.residual);
            r.verdict("similarity", sim.holds, sim.residual);
            debug_assert!(metric.holds);
            r.artifact("X", &sol.metric);
            r.artifact("certificate", &cert);
            r.artifact("kernel_dim", sol.kernel_dim);
            r.artifact("cesaro_gap", sol.cesaro_gap);
        }
        SolveKind::Similarity => {
            let [s, t] = inputs(&a.inputs, ["S", "T"])?;
            let m = require_m(a.m)?;
            let (s, t) = (load_matrix(&s)?, load_matrix(&t)?);
            let u = similar_to_unitary(&s, &t, m, tol)?;
            r.verdict("s-similar-to-u1", u.check_s.holds, u.check_s.residual);
            r.verdict("t-adjoint-similar-to-u2", u.check_t.holds, u.check_t.residual);
            r.verdict("u1-equals-p-u2-pinv", u.check_link.holds, u.check_link.residual);
            r.verdict("u1-unitary", u.check_unitary[0].holds, u.check_unitary[0].residual);
            r.verdict("u2-unitary", u.check_unitary[1].holds, u.check_unitary[1].residual);
            r.artifact("U1", &u.u1);
            r.artifact("U2", &u.u2);
            r.artifact("P", &u.p);
        }
        SolveKind::CanonicalInverse => {
            let m = require_m(a.m.or(Some(1)))?;
            let (s, p) = match a.inputs.as_slice() {
                [s] => {
                    let s = load_matrix(s)?;
                    let p = psd_sqrt(&invariant_metric(&s, tol)?, tol)?;
                    (s, p)
                }
                [s, p] => (load_matrix(s)?, load_matrix(p)?),
                _ => return Err(OpsError::InvalidArgument("expected inputs S [P]".into())),
            };
            let t = canonical_left_m_inverse(&s, &p, m, tol)?;
            let c = check_left_m_inverse(&s, &t, m, tol)?;
            r.verdict("left-m-inverse", c.holds, c.residual);
            r.artifact("T", &t);
            r.artifact("P", &p);
        }
        SolveKind::Douglas => {
            let [a_in, b_in] = inputs(&a.inputs, ["A", "B"])?;
            let (am, bm) = (load_matrix(&a_in)?, load_matrix(&b_in)?);
            let f = douglas_factor(&am, &bm, tol)?;
            r.verdict("factor", tol.is_zero(f.residual, am.frobenius_norm()), f.residual);
            let c2 = f.c.operator_norm().powi(2);
            let gap = (c2 - f.mu2).abs();
            r.verdict("mu-matches-norm", tol.is_zero(gap, c2.max(f.mu2)), gap);
            r.verdict("kernel-equality", f.kernels_agree, 0.0);
            r.verdict("range-orthogonal", f.range_in_corange, 0.0);
            r.artifact("C", &f.c);
            r.artifact("mu2", f.mu2);
        }
    }
    Ok(())
}

fn named(name: &str, matrix: ComplexMatrix) -> NamedMatrix {
    NamedMatrix { name: name.into(), matrix }
}

fn generate(a: &GenerateArgs, seed: u64, r: &mut Report) -> Result<()> {
    let s = Seed(seed);
    let manifest = |generator: &str, parameters: serde_json::Value, matrices| Manifest {
        generator: generator.into(),
        parameters,
        seed,
        matrices,
    };
    let doc: serde_json::Value = match a.name {
        GeneratorName::Jordan => serde_json::to_value(gen_jordan(a.k, a.lambda)?)?,
        GeneratorName::PowerBounded => serde_json::to_value(gen_power_bounded(a.n, s)?)?,
        GeneratorName::Conjugation => serde_json::to_value(gen_conjugation(a.n, s)?)?,
        GeneratorName::SimilarIsometry => {
            let g = gen_similar_isometry(a.n, s)?;
            let m = manifest(
                "similar-isometry",
                json!({"n": a.n}),
                vec![named("S", g.s), named("P0", g.p0), named("U", g.u)],
            );
            serde_json::to_value(m)?
        }
        GeneratorName::LeftMPair => {
            let (sm, tm, m) = gen_left_m_pair(a.n, a.m, s)?.into_parts();
            let man = manifest("left-m-pair", json!({"n": a.n, "m": m}), vec![named("S", sm), named("T", tm)]);
            serde_json::to_value(man)?
        }
        GeneratorName::OneCIsometry => {
            let (sm, c) = gen_1c_isometry(a.n, s, a.hyperbolic)?;
            let man = manifest(
                "one-c-isometry",
                json!({"n": a.n, "hyperbolic": a.hyperbolic}),
                vec![named("S", sm), named("J", c.j().clone())],
            );
            serde_json::to_value(man)?
        }
    };
    r.artifact("generator", a.name.to_possible_value().map(|v| v.get_name().to_string()));
    r.artifact("seed", seed);
    match &a.out {
        Some(path) => {
            write_json(path, &doc)?;
            r.note(format!("wrote {}", path.display()));
        }
        None => {
            r.artifact("output", &doc);
        }
    }
    Ok(())
}

fn write_json(path: &Path, doc: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn suite(a: &SuiteArgs, seed: u64, tol: &ToleranceConfig, r: &mut Report) -> Result<()> {
    let params = SuiteParams { seed, count: a.count, dim_max: a.dim_max };
    let out = run_suite(a.name.into(), params, tol)?;
    for (name, stats) in &out.checks {
        r.verdict(name.clone(), stats.pass(), stats.max_residual);
    }
    r.artifact("instances", out.instances);
    r.artifact("violations", out.violations());
    r.artifact("checks", &out.checks);
    for f in &out.failures {
        r.note(f.clone());
    }
    Ok(())
}
