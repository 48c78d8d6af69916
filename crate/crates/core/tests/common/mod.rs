//! Reference computations written directly against nalgebra, independent of
//! the library's own routines.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use opslab::ComplexMatrix;

pub type M = DMatrix<Complex64>;

pub fn dm(m: &ComplexMatrix) -> M {
    m.as_dmatrix().clone()
}

pub fn fro(m: &M) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn eye(n: usize) -> M {
    M::identity(n, n)
}

pub fn binom(m: u32, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, k| acc * (m - k) as f64 / (k + 1) as f64).round()
}

/// `P_m(S,T)` by applying `X ↦ TXS − X` to the identity `m` times, together
/// with the largest summand norm `max_j C(m,j)‖TʲSʲ‖`.
pub fn horner_defect(s: &M, t: &M, m: u32) -> (M, f64) {
    let n = s.nrows();
    let mut x = eye(n);
    for _ in 0..m {
        x = t * &x * s - &x;
    }
    let mut scale: f64 = 0.0;
    let mut prod = eye(n);
    for j in 0..=m {
        scale = scale.max(binom(m, j) * fro(&prod));
        prod = t * &prod * s;
    }
    (x, scale)
}

/// `Σ_j (−1)^{m−j} C(m,j) S*ʲ C Sʲ C x` applied column by column with
/// `C x = J·conj(x)`.
pub fn mc_defect_antilinear(s: &M, j: &M, m: u32) -> (M, f64) {
    let n = s.nrows();
    let sa = s.adjoint();
    let cmap = |v: &M| j * v.map(|z| z.conj());
    let mut out = M::zeros(n, n);
    let mut scale: f64 = 0.0;
    for k in 0..=m {
        let sign = if (m - k) % 2 == 0 { 1.0 } else { -1.0 };
        let coeff = sign * binom(m, k);
        let mut term = M::zeros(n, n);
        for col in 0..n {
            let mut v = M::zeros(n, 1);
            v[(col, 0)] = Complex64::ONE;
            let mut y = cmap(&v);
            for _ in 0..k {
                y = s * y;
            }
            y = cmap(&y);
            for _ in 0..k {
                y = &sa * y;
            }
            term.set_column(col, &y.column(0));
        }
        scale = scale.max(coeff.abs() * fro(&term));
        out += term * Complex64::new(coeff, 0.0);
    }
    (out, scale)
}

/// Complex Cholesky; `true` iff every pivot is positive.
pub fn is_positive_definite(h: &M) -> bool {
    let n = h.nrows();
    let mut l = M::zeros(n, n);
    for i in 0..n {
        for k in 0..=i {
            let mut sum = h[(i, k)];
            for p in 0..k {
                sum -= l[(i, p)] * l[(k, p)].conj();
            }
            if i == k {
                if !(sum.re > 0.0) || sum.im.abs() > 1e-8 * sum.re {
                    return false;
                }
                l[(i, i)] = Complex64::new(sum.re.sqrt(), 0.0);
            } else {
                l[(i, k)] = sum / l[(k, k)];
            }
        }
    }
    true
}

pub fn kron(a: &M, b: &M) -> M {
    let (br, bc) = (b.nrows(), b.ncols());
    M::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn svd_rank(m: &M, cutoff: f64) -> usize {
    m.clone().svd(false, false).singular_values.iter().filter(|&&s| s > cutoff).count()
}

/// Least `k` with `rank Lᵏ = rank Lᵏ⁺¹`, ranks cut at `rel · σ_max(L)`.
pub fn ascent_oracle(l: &M, rel: f64) -> u32 {
    let smax = l.clone().svd(false, false).singular_values.max();
    let cutoff = rel * smax;
    let mut prev = l.nrows();
    let mut power = l.clone();
    for k in 0.. {
        let r = svd_rank(&power, cutoff);
        if r == prev {
            return k;
        }
        prev = r;
        power = &power * l;
    }
    unreachable!()
}

/// Gram–Schmidt rank of the columns, counting a column as new when its
/// residual exceeds `rel` times the largest column norm.
pub fn gram_schmidt_rank(m: &M, rel: f64) -> usize {
    let top = (0..m.ncols()).map(|j| m.column(j).norm()).fold(0.0, f64::max);
    let mut basis: Vec<M> = Vec::new();
    for j in 0..m.ncols() {
        let mut v = M::from_column_slice(m.nrows(), 1, m.column(j).as_slice());
        for _ in 0..2 {
            for q in &basis {
                let c = (q.adjoint() * &v)[(0, 0)];
                v -= q * c;
            }
        }
        let r = v.norm();
        if r > rel * top.max(f64::MIN_POSITIVE) {
            basis.push(v / Complex64::new(r, 0.0));
        }
    }
    basis.len()
}

/// Orthogonal projector onto the span of the rows of `b` (that is, onto
/// `ran B* = (ker B)^⊥`), built by Gram–Schmidt on the conjugated rows.
pub fn row_space_projector(b: &M, rel: f64) -> M {
    let rows = b.adjoint();
    let top = (0..rows.ncols()).map(|j| rows.column(j).norm()).fold(0.0, f64::max);
    let mut basis: Vec<M> = Vec::new();
    for j in 0..rows.ncols() {
        let mut v = M::from_column_slice(rows.nrows(), 1, rows.column(j).as_slice());
        for _ in 0..2 {
            for q in &basis {
                let c = (q.adjoint() * &v)[(0, 0)];
                v -= q * c;
            }
        }
        let r = v.norm();
        if r > rel * top.max(f64::MIN_POSITIVE) {
            basis.push(v / Complex64::new(r, 0.0));
        }
    }
    let n = b.ncols();
    basis.iter().fold(M::zeros(n, n), |acc, q| acc + q * q.adjoint())
}

pub fn op_norm(m: &M) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}
