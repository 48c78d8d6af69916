//! Seeded generators for test corpora.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::conj::{hyperbolic_orthogonal_example, make_conjugation, mc_isometry_defect, Conjugation};
use crate::error::{OpsError, Result};
use crate::matcore::{hermitian_eigen, ComplexMatrix, ToleranceConfig};
use crate::metric::certify_power_bounded;
use crate::minv::{defect_with_scale, LeftInvPair};

/// Upper bound on the condition number of the generated similarities.
pub const MAX_CONDITION: f64 = 1e3;

/// Root of every random stream. Per-instance seeds come from [`Seed::derive`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed(pub u64);

impl Seed {
    /// Independent child seed, mixed with splitmix64.
    pub fn derive(self, index: u64) -> Seed {
        let mut z = self.0 ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Seed(z ^ (z >> 31))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn unit_phase(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| gaussian(rng)).collect();
    ComplexMatrix::new(rows, cols, data).expect("finite gaussian sample")
}

fn real_gaussian_matrix(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let data = (0..n * n).map(|_| Complex64::new(rng.sample(StandardNormal), 0.0)).collect();
    ComplexMatrix::new(n, n, data).expect("finite gaussian sample")
}

/// `Q` from the QR factorization of `g` with `R`'s diagonal made positive.
fn normalized_q(g: ComplexMatrix) -> ComplexMatrix {
    let n = g.rows();
    let qr = g.into_dmatrix().qr();
    let (q, r) = (qr.q(), qr.r());
    ComplexMatrix::from_fn(n, n, |i, j| {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::ONE };
        q[(i, j)] * phase
    })
}

/// Haar-like unitary: QR of a complex Gaussian sample with phase normalization.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    normalized_q(gaussian_matrix(n, n, rng))
}

pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    normalized_q(real_gaussian_matrix(n, rng))
}

/// Hermitian positive definite `GG*/n + 0.1 I` with its condition number
/// clipped below [`MAX_CONDITION`].
pub fn random_positive_definite(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = gaussian_matrix(n, n, rng);
    let gram = (&g * &g.adjoint()).scale_real(1.0 / n as f64);
    let h = &gram + &ComplexMatrix::identity(n).scale_real(0.1);
    let (vals, vecs) = hermitian_eigen(&h).expect("square");
    let top = vals[n - 1];
    let floor = top / (MAX_CONDITION - 1.0);
    let clipped: Vec<Complex64> = vals.iter().map(|&v| Complex64::new(v.max(floor), 0.0)).collect();
    let p = &(&vecs * &ComplexMatrix::diagonal(&clipped)) * &vecs.adjoint();
    (&p + &p.adjoint()).scale_real(0.5)
}

/// Invertible matrix `U₁ diag(σ) U₂` with `σ ∈ [1, 100]`.
fn random_invertible(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let u1 = random_unitary(n, rng);
    let u2 = random_unitary(n, rng);
    let sigma: Vec<f64> = (0..n).map(|_| 10f64.powf(2.0 * rng.random::<f64>())).collect();
    &(&u1 * &ComplexMatrix::real_diagonal(&sigma)) * &u2
}

fn require_dim(n: usize, min: usize, what: &str) -> Result<()> {
    if n < min {
        return Err(OpsError::InvalidArgument(format!("{what} needs n ≥ {min}, got {n}")));
    }
    Ok(())
}

/// The `k×k` Jordan block with eigenvalue `lambda`.
pub fn gen_jordan(k: usize, lambda: Complex64) -> Result<ComplexMatrix> {
    require_dim(k, 1, "gen_jordan")?;
    Ok(ComplexMatrix::from_fn(k, k, |i, j| {
        if i == j {
            lambda
        } else if j == i + 1 {
            Complex64::ONE
        } else {
            Complex64::ZERO
        }
    }))
}

/// `S = P0⁻¹ U P0` with `U` unitary and `P0` positive definite.
#[derive(Clone, Debug)]
pub struct SimilarIsometry {
    pub s: ComplexMatrix,
    pub p0: ComplexMatrix,
    pub u: ComplexMatrix,
}

pub fn gen_similar_isometry(n: usize, seed: Seed) -> Result<SimilarIsometry> {
    require_dim(n, 1, "gen_similar_isometry")?;
    let mut rng = seed.rng();
    let u = random_unitary(n, &mut rng);
    let p0 = random_positive_definite(n, &mut rng);
    let s = &(&p0.inverse()? * &u) * &p0;
    Ok(SimilarIsometry { s, p0, u })
}

/// `(S, T)` with `T = P0⁻² S* P0²`, a left m-inverse for every `m`.
pub fn gen_left_m_pair(n: usize, m: u32, seed: Seed) -> Result<LeftInvPair> {
    let SimilarIsometry { s, p0, .. } = gen_similar_isometry(n, seed)?;
    let q = &p0 * &p0;
    let qinv = q.inverse()?;
    let t = &(&qinv * &s.adjoint()) * &q;
    LeftInvPair::new(s, t, m)
}

/// `W (D₁ ⊕ D₀) W⁻¹` with the sizes of the unimodular block `D₁` and the
/// strict contraction block `D₀` drawn at random.
pub fn gen_power_bounded(n: usize, seed: Seed) -> Result<ComplexMatrix> {
    require_dim(n, 2, "gen_power_bounded")?;
    let mut rng = seed.rng();
    let k1 = rng.random_range(0..=n);
    gen_power_bounded_split(k1, n - k1, &mut rng)
}

/// Same family with explicit block sizes `(unimodular, contraction)`.
pub fn gen_power_bounded_split(k1: usize, k0: usize, rng: &mut impl Rng) -> Result<ComplexMatrix> {
    let n = k1 + k0;
    require_dim(n, 1, "gen_power_bounded")?;
    let d1 = ComplexMatrix::diagonal(&(0..k1).map(|_| unit_phase(rng)).collect::<Vec<_>>());
    let d0 = if k0 > 0 { Some(random_contraction(k0, rng)?) } else { None };
    let core = match (k1, d0) {
        (0, Some(d0)) => d0,
        (_, None) => d1,
        (_, Some(d0)) => d1.direct_sum(&d0),
    };
    let w = random_invertible(n, rng);
    Ok(&(&w * &core) * &w.inverse()?)
}

/// Gaussian matrix rescaled to spectral radius in `[0.1, 0.9]`.
fn random_contraction(k: usize, rng: &mut impl Rng) -> Result<ComplexMatrix> {
    let g = gaussian_matrix(k, k, rng);
    let rho = g.spectral_radius()?;
    let target = rng.random_range(0.1..=0.9);
    Ok(if rho > 0.0 { g.scale_real(target / rho) } else { g })
}

/// Orthogonal sum `Q (U ⊕ K) Q*` of a unitary and a strict contraction,
/// conjugated by a random unitary `Q`.
pub fn gen_orthogonal_sum(unimodular: usize, interior: usize, seed: Seed) -> Result<ComplexMatrix> {
    let n = unimodular + interior;
    require_dim(n, 1, "gen_orthogonal_sum")?;
    let mut rng = seed.rng();
    let u = (unimodular > 0).then(|| random_unitary(unimodular, &mut rng));
    let k = if interior > 0 { Some(random_contraction(interior, &mut rng)?) } else { None };
    let core = match (u, k) {
        (Some(u), Some(k)) => u.direct_sum(&k),
        (Some(u), None) => u,
        (None, Some(k)) => k,
        (None, None) => unreachable!("n ≥ 1"),
    };
    let q = random_unitary(n, &mut rng);
    Ok(&(&q * &core) * &q.adjoint())
}

/// `J = QQᵀ` for a random unitary `Q`.
pub fn gen_conjugation(n: usize, seed: Seed) -> Result<Conjugation> {
    require_dim(n, 1, "gen_conjugation")?;
    let q = random_unitary(n, &mut seed.rng());
    let j = &q * &q.transpose();
    make_conjugation((&j + &j.transpose()).scale_real(0.5), &ToleranceConfig::default())
}

/// A real orthogonal `S` paired with entrywise conjugation, or the hyperbolic
/// `M(t)` when `hyperbolic` is given (then `n` must be 2).
pub fn gen_1c_isometry(n: usize, seed: Seed, hyperbolic: Option<f64>) -> Result<(ComplexMatrix, Conjugation)> {
    if let Some(t) = hyperbolic {
        if n != 2 || !t.is_finite() {
            return Err(OpsError::InvalidArgument("the hyperbolic variant needs n = 2 and finite t".into()));
        }
        return Ok((hyperbolic_orthogonal_example(t), Conjugation::entrywise(2)));
    }
    require_dim(n, 1, "gen_1c_isometry")?;
    Ok((random_orthogonal(n, &mut seed.rng()), Conjugation::entrywise(n)))
}

/// A strict (m,C)-isometry found by [`search_strict_mc_isometries`].
#[derive(Clone, Debug)]
pub struct StrictMcCandidate {
    pub s: ComplexMatrix,
    pub c: Conjugation,
    /// Least `m` with vanishing (m,C) defect.
    pub order: u32,
    pub power_bounded: bool,
}

/// Exploration hook: scans Jordan blocks `J_k(λ)` (with `λ` on a grid of unit
/// roots) and their random unitary conjugates against entrywise and random
/// conjugations, keeping the candidates whose least vanishing (m,C) order is
/// at least 2.
pub fn search_strict_mc_isometries(
    max_dim: usize,
    max_order: u32,
    seed: Seed,
    tol: &ToleranceConfig,
) -> Result<Vec<StrictMcCandidate>> {
    let mut found = Vec::new();
    let mut index = 0u64;
    for k in 2..=max_dim.max(2) {
        for r in 0..4 {
            let lambda = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2 * r as f64);
            let jordan = gen_jordan(k, lambda)?;
            let q = random_unitary(k, &mut seed.derive(index).rng());
            let rotated = &(&q * &jordan) * &q.adjoint();
            for s in [jordan, rotated] {
                for c in [Conjugation::entrywise(k), gen_conjugation(k, seed.derive(index + 1))?] {
                    index += 2;
                    if let Some(order) = least_mc_order(&s, &c, max_order, tol)? {
                        if order >= 2 {
                            let power_bounded = certify_power_bounded(&s, 64, tol)?.bounded;
                            found.push(StrictMcCandidate { s: s.clone(), c, order, power_bounded });
                        }
                    }
                }
            }
        }
    }
    Ok(found)
}

fn least_mc_order(s: &ComplexMatrix, c: &Conjugation, max_order: u32, tol: &ToleranceConfig) -> Result<Option<u32>> {
    let csc = crate::conj::conjugate_operator(c, s)?;
    for m in 1..=max_order {
        let (d, scale) = defect_with_scale(&csc, &s.adjoint(), m);
        if tol.is_zero(d.frobenius_norm(), scale) {
            debug_assert!(mc_isometry_defect(s, c, m).is_ok());
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// A named matrix inside a [`Manifest`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedMatrix {
    pub name: String,
    pub matrix: ComplexMatrix,
}

/// Generator output plus the metadata needed to reproduce it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub generator: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub matrices: Vec<NamedMatrix>,
}

impl Manifest {
    pub fn get(&self, name: &str) -> Option<&ComplexMatrix> {
        self.matrices.iter().find(|m| m.name == name).map(|m| &m.matrix)
    }
}
