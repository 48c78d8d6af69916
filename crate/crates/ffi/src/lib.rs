//! C ABI over `opslab`.
//!
//! Matrices and conjugations cross the boundary as opaque handles that the
//! caller releases with the matching `*_free` function. Every fallible call
//! returns an [`OpslabStatus`]; on failure the message is available from
//! [`opslab_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use opslab::conj::{make_conjugation, mc_isometry_defect, Conjugation};
use opslab::metric::{certify_power_bounded, certify_similarity, douglas_factor, invariant_metric};
use opslab::minv::{check_left_m_inverse, defect};
use opslab::{ComplexMatrix, OpsError, ToleranceConfig};

/// Opaque complex matrix.
pub struct OpslabMatrix {
    inner: ComplexMatrix,
}

/// Opaque conjugation `x ↦ J·conj(x)`.
pub struct OpslabConjugation {
    inner: Conjugation,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpslabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotPowerBounded = 4,
    NoFixedPoint = 5,
    NotLeftInverse = 6,
    RangeInclusion = 7,
    CertificateFailed = 8,
    NumericalFailure = 9,
    Json = 10,
    Panic = 11,
}

/// Absolute and relative tolerance. Pass `NULL` for the defaults
/// (`1e-10`, `1e-8`).
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct OpslabTolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(OpslabStatus, String);

impl From<OpsError> for Failure {
    fn from(e: OpsError) -> Self {
        let status = match &e {
            OpsError::DimensionMismatch(_) | OpsError::NotSquare { .. } => OpslabStatus::DimensionMismatch,
            OpsError::InvalidMatrix(_)
            | OpsError::InvalidArgument(_)
            | OpsError::InvalidConjugation(_)
            | OpsError::NotHermitian(_)
            | OpsError::NotPositiveSemidefinite(_)
            | OpsError::NotPositiveDefinite(_)
            | OpsError::Io(_) => OpslabStatus::InvalidArgument,
            OpsError::NotPowerBounded(_) | OpsError::OutsideUnitDisk { .. } => OpslabStatus::NotPowerBounded,
            OpsError::NoPositiveDefiniteFixedPoint(_) => OpslabStatus::NoFixedPoint,
            OpsError::NotLeftInverse { .. } => OpslabStatus::NotLeftInverse,
            OpsError::RangeInclusion { .. } => OpslabStatus::RangeInclusion,
            OpsError::MetricResidual(_) | OpsError::NotIsometry(_) => OpslabStatus::CertificateFailed,
            OpsError::Singular | OpsError::Numerical(_) => OpslabStatus::NumericalFailure,
            OpsError::Json(_) => OpslabStatus::Json,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(OpslabStatus::NullPointer, format!("{what} is NULL"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> OpslabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OpslabStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            OpslabStatus::Panic
        }
    }
}

unsafe fn matrix<'a>(p: *const OpslabMatrix, what: &str) -> Result<&'a ComplexMatrix, Failure> {
    p.as_ref().map(|m| &m.inner).ok_or_else(|| null(what))
}

unsafe fn tolerance(p: *const OpslabTolerance) -> Result<ToleranceConfig, Failure> {
    match p.as_ref() {
        None => Ok(ToleranceConfig::default()),
        Some(t) => Ok(ToleranceConfig::new(t.abs_tol, t.rel_tol)?),
    }
}

unsafe fn store<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed(m: ComplexMatrix) -> *mut OpslabMatrix {
    Box::into_raw(Box::new(OpslabMatrix { inner: m }))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn opslab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or `NULL`. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn opslab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a matrix from `2·rows·cols` doubles: row-major entries with real
/// and imaginary parts interleaved.
///
/// # Safety
/// `data` must point to `2·rows·cols` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opslab_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut OpslabMatrix,
) -> OpslabStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        let len = rows.checked_mul(cols).and_then(|n| n.checked_mul(2)).ok_or_else(|| {
            Failure(OpslabStatus::InvalidArgument, "matrix size overflows".into())
        })?;
        let raw = std::slice::from_raw_parts(data, len);
        let entries = raw.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        let m = ComplexMatrix::new(rows, cols, entries)?;
        store(out, boxed(m), "out")
    })
}

/// Parses `{"rows": r, "cols": c, "data": [[re, im], ...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opslab_matrix_from_json(json: *const c_char, out: *mut *mut OpslabMatrix) -> OpslabStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure(OpslabStatus::InvalidArgument, format!("json is not UTF-8: {e}")))?;
        store(out, boxed(ComplexMatrix::from_json(text)?), "out")
    })
}

/// Serializes to JSON. Release the string with [`opslab_string_free`].
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opslab_matrix_to_json(m: *const OpslabMatrix, out: *mut *mut c_char) -> OpslabStatus {
    guard(|| {
        let text = matrix(m, "m")?.to_json();
        let c = CString::new(text).expect("JSON has no NUL");
        store(out, c.into_raw(), "out")
    })
}

/// # Safety
/// `s` must come from this library or be `NULL`.
#[no_mangle]
pub unsafe extern "C" fn opslab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Row count, or 0 for `NULL`.
///
/// # Safety
/// `m` must be a live handle or `NULL`.
#[no_mangle]
pub unsafe extern "C" fn opslab_matrix_rows(m: *const OpslabMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.rows())
}

/// Column count, or 0 for `NULL`.
///
/// # Safety
/// `m` must be a live handle or `NULL`.
#[no_mangle]
pub unsafe extern "C" fn opslab_matrix_cols(m: *const OpslabMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.cols())
}

/// Copies the entries in the layout of [`opslab_matrix_new`]; `len` must be
/// at least `2·rows·cols`.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn opslab_matrix_copy_data(m: *const OpslabMatrix, buf: *mut f64, len: usize) -> OpslabStatus {
    guard(|| {
        let m = matrix(m, "m")?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let need = 2 * m.rows() * m.cols();
        if len < need {
            return Err(Failure(OpslabStatus::InvalidArgument, format!("buffer holds {len} doubles, need {need}")));
        }
        let dst = std::slice::from_raw_parts_mut(buf, need);
        for (k, z) in m.row_major().into_iter().enumerate() {
            dst[2 * k] = z.re;
            dst[2 * k + 1] = z.im;
        }
        Ok(())
    })
}

/// # Safety
/// `m` must come from this library or be `NULL`; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn opslab_matrix_free(m: *mut OpslabMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// `P_m(S, T) = Σ_{j=0}^m (−1)^{m−j} C(m,j) T^j S^j`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opslab_defect(
    s: *const OpslabMatrix,
    t: *const OpslabMatrix,
    m: u32,
    out: *mut *mut OpslabMatrix,
) -> OpslabStatus {
    guard(|| {
        let d = defect(matrix(s, "s")?, matrix(t, "t")?, m)?;
        store(out, boxed(d), "out")
    })
}

/// Whether `T` is a left m-inverse of `S`, with the defect residual.
///
/// # Safety
/// Handles must be live; `tol` may be `NULL`; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn opslab_is_left_m_inverse(
    s: *const OpslabMatrix,
    t: *const OpslabMatrix,
    m: u32,
    tol: *const OpslabTolerance,
    holds: *mut bool,
    residual: *mut f64,
) -> OpslabStatus {
    guard(|| {
        let c = check_left_m_inverse(matrix(s, "s")?, matrix(t, "t")?, m, &tolerance(tol)?)?;
        store(holds, c.holds, "holds")?;
        store(residual, c.residual, "residual")
    })
}

/// # Safety
/// `m` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opslab_operator_norm(m: *const OpslabMatrix, out: *mut f64) -> OpslabStatus {
    guard(|| store(out, matrix(m, "m")?.operator_norm(), "out"))
}

/// # Safety
/// `m` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opslab_spectral_radius(m: *const OpslabMatrix, out: *mut f64) -> OpslabStatus {
    guard(|| store(out, matrix(m, "m")?.spectral_radius()?, "out"))
}

/// Power boundedness by the spectral criterion, with `max_{n ≤ horizon} ‖Sⁿ‖`.
///
/// # Safety
/// `s` must be live; `tol` may be `NULL`; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn opslab_certify_power_bounded(
    s: *const OpslabMatrix,
    horizon: u32,
    tol: *const OpslabTolerance,
    bounded: *mut bool,
    m1_estimate: *mut f64,
) -> OpslabStatus {
    guard(|| {
        let r = certify_power_bounded(matrix(s, "s")?, horizon, &tolerance(tol)?)?;
        store(bounded, r.bounded, "bounded")?;
        store(m1_estimate, r.m1_estimate, "m1_estimate")
    })
}

/// Positive definite `X` with `S*XS = X` and unit operator norm.
///
/// # Safety
/// `s` must be live; `tol` may be `NULL`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opslab_invariant_metric(
    s: *const OpslabMatrix,
    tol: *const OpslabTolerance,
    out: *mut *mut OpslabMatrix,
) -> OpslabStatus {
    guard(|| {
        let x = invariant_metric(matrix(s, "s")?, &tolerance(tol)?)?;
        store(out, boxed(x), "out")
    })
}

/// `S = P⁻¹VP` with `P` positive definite and `V` an isometry. `residuals`
/// receives the metric, isometry and similarity residuals.
///
/// # Safety
/// `s` must be live; `tol` may be `NULL`; outputs must be writable and
/// `residuals` must hold 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn opslab_similarity_certificate(
    s: *const OpslabMatrix,
    tol: *const OpslabTolerance,
    p_out: *mut *mut OpslabMatrix,
    v_out: *mut *mut OpslabMatrix,
    residuals: *mut f64,
) -> OpslabStatus {
    guard(|| {
        if p_out.is_null() || v_out.is_null() || residuals.is_null() {
            return Err(null("output"));
        }
        let cert = certify_similarity(matrix(s, "s")?, &tolerance(tol)?)?;
        let r = std::slice::from_raw_parts_mut(residuals, 3);
        r.copy_from_slice(&[cert.residual_metric, cert.residual_isometry, cert.residual_similarity]);
        store(p_out, boxed(cert.p), "p_out")?;
        store(v_out, boxed(cert.v), "v_out")
    })
}

/// `A = BC` with `C = B⁺A` and `mu2 = inf{μ : AA* ≤ μBB*}`.
///
/// # Safety
/// Handles must be live; `tol` may be `NULL`; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn opslab_douglas_factor(
    a: *const OpslabMatrix,
    b: *const OpslabMatrix,
    tol: *const OpslabTolerance,
    c_out: *mut *mut OpslabMatrix,
    mu2: *mut f64,
) -> OpslabStatus {
    guard(|| {
        if c_out.is_null() || mu2.is_null() {
            return Err(null("output"));
        }
        let f = douglas_factor(matrix(a, "a")?, matrix(b, "b")?, &tolerance(tol)?)?;
        store(mu2, f.mu2, "mu2")?;
        store(c_out, boxed(f.c), "c_out")
    })
}

/// Validates `J` (unitary, symmetric) and returns the conjugation.
///
/// # Safety
/// `j` must be live; `tol` may be `NULL`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opslab_conjugation_new(
    j: *const OpslabMatrix,
    tol: *const OpslabTolerance,
    out: *mut *mut OpslabConjugation,
) -> OpslabStatus {
    guard(|| {
        let c = make_conjugation(matrix(j, "j")?.clone(), &tolerance(tol)?)?;
        store(out, Box::into_raw(Box::new(OpslabConjugation { inner: c })), "out")
    })
}

/// # Safety
/// `c` must come from this library or be `NULL`; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn opslab_conjugation_free(c: *mut OpslabConjugation) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// `Σ_{j=0}^m (−1)^{m−j} C(m,j) S*ʲ C Sʲ C`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn opslab_mc_isometry_defect(
    s: *const OpslabMatrix,
    c: *const OpslabConjugation,
    m: u32,
    out: *mut *mut OpslabMatrix,
) -> OpslabStatus {
    guard(|| {
        let c = c.as_ref().map(|c| &c.inner).ok_or_else(|| null("c"))?;
        let d = mc_isometry_defect(matrix(s, "s")?, c, m)?;
        store(out, boxed(d), "out")
    })
}
