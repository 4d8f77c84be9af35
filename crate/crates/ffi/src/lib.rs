//! C ABI over `chifield`.
//!
//! Every fallible function returns a [`ChifieldStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and can
//! be read with [`chifield_last_error_message`]. Spectra and chi-field
//! realizations are opaque handles owned by the caller and released with the
//! matching `_free` function. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use chifield::analytic::{
    ec_sum_product, hermite, inv_chi_constant, lk_sphere_circle, maxima_density_sphere, normal_radius,
    spherical_hessian_model, HessianModel2D, PowerSpectrum, SignVariant,
};
use chifield::critcount::{count_maxima_above, find_critical_points, realization, signed_euler_count};
use chifield::fieldsim::{ChiFieldSample, SphericalFieldSample};
use chifield::kacrice::{estimate_dk, expected_critical_points, expected_maxima, CountFormulaInput, HessianLaw, MCEstimate};
use chifield::rng::RngStream;
use chifield::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChifieldStatus {
    Ok = 0,
    NullPointer = 1,
    /// Argument outside the domain of the quantity, or an invalid option.
    InvalidArgument = 2,
    InvalidSpectrum = 3,
    Parse = 4,
    Degenerate = 5,
    NodalProximity = 6,
    Io = 7,
    /// An internal panic was caught.
    Internal = 8,
}

/// Selects between the corrected formulas and the printed ones.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChifieldSignVariant {
    Corrected = 0,
    PaperText = 1,
}

impl From<ChifieldSignVariant> for SignVariant {
    fn from(v: ChifieldSignVariant) -> Self {
        match v {
            ChifieldSignVariant::Corrected => SignVariant::Corrected,
            ChifieldSignVariant::PaperText => SignVariant::PaperText,
        }
    }
}

/// Monte Carlo estimate with its standard error.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ChifieldEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: u64,
}

impl From<MCEstimate> for ChifieldEstimate {
    fn from(e: MCEstimate) -> Self {
        Self { value: e.value, std_error: e.std_error, n: e.n }
    }
}

/// Critical-point tallies of one realization above a threshold.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChifieldCounts {
    /// Critical points with value `>= t`.
    pub above: u64,
    pub maxima: u64,
    /// `sum (-1)^index` over points with value `>= t`.
    pub signed_ec: i64,
}

/// Opaque angular power spectrum.
pub struct ChifieldSpectrum(PowerSpectrum);

/// Opaque chi field on the sphere: `k` independent realizations of a spectrum.
pub struct ChifieldChiField(ChiFieldSample<SphericalFieldSample>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ChifieldStatus {
    match e {
        Error::Domain(_) | Error::Config(_) => ChifieldStatus::InvalidArgument,
        Error::InvalidSpectrum(_) => ChifieldStatus::InvalidSpectrum,
        Error::Parse { .. } => ChifieldStatus::Parse,
        Error::Degenerate { .. } => ChifieldStatus::Degenerate,
        Error::NodalProximity(_) => ChifieldStatus::NodalProximity,
        Error::Io(_) => ChifieldStatus::Io,
    }
}

struct Fail(ChifieldStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(name: &str) -> Fail {
    Fail(ChifieldStatus::NullPointer, format!("{name} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ChifieldStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ChifieldStatus::Ok
        }
        Ok(Err(Fail(s, m))) => {
            set_error(m);
            s
        }
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {m}"));
            ChifieldStatus::Internal
        }
    }
}

/// # Safety
/// `p` must be null or valid for a write of `T`.
unsafe fn put<T>(p: *mut T, v: T, name: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(name));
    }
    p.write(v);
    Ok(())
}

fn model(sigma2: f64, c: f64) -> Result<HessianModel2D, Fail> {
    Ok(HessianModel2D::new(sigma2, c)?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn chifield_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn chifield_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Probabilists' Hermite polynomial `H_n(t)`.
#[no_mangle]
pub extern "C" fn chifield_hermite(n: u32, t: f64) -> f64 {
    hermite(n, t)
}

/// `E[chi_k^{-m}]`; fails when `k <= m`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn chifield_inv_chi_constant(k: u32, m: u32, out: *mut f64) -> ChifieldStatus {
    guard(|| put(out, inv_chi_constant(k, m)?, "out"))
}

/// Expected number of local maxima above `t` of a chi^2-dof field on the
/// sphere of radius `r`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn chifield_maxima_density_sphere(
    r: f64,
    t: f64,
    variant: ChifieldSignVariant,
    out: *mut f64,
) -> ChifieldStatus {
    guard(|| {
        if !(r > 0.0) {
            return Err(Fail(ChifieldStatus::InvalidArgument, format!("radius must be > 0 (got {r})")));
        }
        put(out, maxima_density_sphere(r, t, variant.into()), "out")
    })
}

/// Expected Euler characteristic of the excursion set above `t` of a chi
/// field with two degrees of freedom on the sphere of radius `r`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn chifield_ec_sum_product(r: f64, t: f64, out: *mut f64) -> ChifieldStatus {
    guard(|| {
        if !(r > 0.0) {
            return Err(Fail(ChifieldStatus::InvalidArgument, format!("radius must be > 0 (got {r})")));
        }
        put(out, ec_sum_product(&lk_sphere_circle(r), t), "out")
    })
}

/// Monte Carlo estimate of the maxima functional `D_k(t)` for the 2x2
/// Hessian model `(sigma2, c)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn chifield_estimate_dk(
    k: u32,
    t: f64,
    sigma2: f64,
    c: f64,
    n: u64,
    seed: u64,
    out: *mut ChifieldEstimate,
) -> ChifieldStatus {
    guard(|| {
        let law = HessianLaw::from_model(&model(sigma2, c)?)?;
        put(out, estimate_dk(k, t, &law, n, RngStream::new(seed, 0))?.into(), "out")
    })
}

/// Expected number of local maxima above `t` on a 2-manifold of the given
/// volume, for the Hessian model `(sigma2, c)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn chifield_expected_maxima(
    k: u32,
    t: f64,
    volume: f64,
    sigma2: f64,
    c: f64,
    n: u64,
    seed: u64,
    out: *mut ChifieldEstimate,
) -> ChifieldStatus {
    guard(|| {
        let input = CountFormulaInput::isotropic(k, t, volume, &model(sigma2, c)?)?;
        put(out, expected_maxima(&input, n, RngStream::new(seed, 0))?.into(), "out")
    })
}

/// Expected number of critical points above `t` (requires `k > 2`).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn chifield_expected_critical_points(
    k: u32,
    t: f64,
    volume: f64,
    sigma2: f64,
    c: f64,
    variant: ChifieldSignVariant,
    n: u64,
    seed: u64,
    out: *mut ChifieldEstimate,
) -> ChifieldStatus {
    guard(|| {
        let mut input = CountFormulaInput::isotropic(k, t, volume, &model(sigma2, c)?)?;
        input.variant = variant.into();
        put(out, expected_critical_points(&input, n, RngStream::new(seed, 0))?.into(), "out")
    })
}

/// Builds a spectrum from `n` pairs `(degrees[i], weights[i])`.
///
/// # Safety
/// `degrees` and `weights` must point to `n` readable elements; `out` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn chifield_spectrum_new(
    degrees: *const u32,
    weights: *const f64,
    n: usize,
    out: *mut *mut ChifieldSpectrum,
) -> ChifieldStatus {
    guard(|| {
        if degrees.is_null() {
            return Err(null("degrees"));
        }
        if weights.is_null() {
            return Err(null("weights"));
        }
        let l = std::slice::from_raw_parts(degrees, n);
        let w = std::slice::from_raw_parts(weights, n);
        let spec = PowerSpectrum::new(l.iter().copied().zip(w.iter().copied()).collect())?;
        put(out, Box::into_raw(Box::new(ChifieldSpectrum(spec))), "out")
    })
}

/// Parses a spectrum from text with one `l C_l` pair per line (`#` comments).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn chifield_spectrum_parse(text: *const c_char, out: *mut *mut ChifieldSpectrum) -> ChifieldStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| Fail(ChifieldStatus::Parse, format!("text is not UTF-8: {e}")))?;
        let spec = PowerSpectrum::parse(s)?;
        put(out, Box::into_raw(Box::new(ChifieldSpectrum(spec))), "out")
    })
}

/// Radius of the sphere on which a unit-variance field with this spectrum
/// has unit-variance gradient components.
///
/// # Safety
/// `spec` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn chifield_spectrum_radius(spec: *const ChifieldSpectrum, out: *mut f64) -> ChifieldStatus {
    guard(|| {
        let spec = spec.as_ref().ok_or_else(|| null("spec"))?;
        put(out, normal_radius(&spec.0), "out")
    })
}

/// Covariance parameters `(sigma2, c)` of the Hessian of a field with this spectrum.
///
/// # Safety
/// `spec` must be a live handle; `sigma2` and `c` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn chifield_spectrum_hessian_model(
    spec: *const ChifieldSpectrum,
    variant: ChifieldSignVariant,
    sigma2: *mut f64,
    c: *mut f64,
) -> ChifieldStatus {
    guard(|| {
        let spec = spec.as_ref().ok_or_else(|| null("spec"))?;
        if c.is_null() {
            return Err(null("c"));
        }
        let m = spherical_hessian_model(&spec.0, variant.into())?;
        put(sigma2, m.sigma2(), "sigma2")?;
        put(c, m.c(), "c")
    })
}

/// Releases a spectrum. Null is ignored.
///
/// # Safety
/// `spec` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn chifield_spectrum_free(spec: *mut ChifieldSpectrum) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Draws realization `index` of a chi field with `k` components. The same
/// `(seed, index)` always gives the same field.
///
/// # Safety
/// `spec` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn chifield_chi_field_new(
    spec: *const ChifieldSpectrum,
    k: u32,
    seed: u64,
    index: u64,
    out: *mut *mut ChifieldChiField,
) -> ChifieldStatus {
    guard(|| {
        let spec = spec.as_ref().ok_or_else(|| null("spec"))?;
        if k == 0 {
            return Err(Fail(ChifieldStatus::InvalidArgument, "k must be at least 1".into()));
        }
        let f = realization(&spec.0, k as usize, RngStream::new(seed, 0), index)?;
        put(out, Box::into_raw(Box::new(ChifieldChiField(f))), "out")
    })
}

/// Value of the chi field at the unit vector `p[0..3]` (normalized internally).
///
/// # Safety
/// `field` must be a live handle, `p` must point to three doubles and `out`
/// must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn chifield_chi_field_value(
    field: *const ChifieldChiField,
    p: *const f64,
    out: *mut f64,
) -> ChifieldStatus {
    guard(|| {
        let field = field.as_ref().ok_or_else(|| null("field"))?;
        if p.is_null() {
            return Err(null("p"));
        }
        let v = [*p, *p.add(1), *p.add(2)];
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Fail(ChifieldStatus::InvalidArgument, "p must be a non-zero finite vector".into()));
        }
        put(out, field.0.value(v.map(|x| x / norm)), "out")
    })
}

/// Finds the critical points of the field on an icosphere mesh of the given
/// depth and tallies those with value `>= t`.
///
/// # Safety
/// `field` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn chifield_chi_field_count(
    field: *const ChifieldChiField,
    t: f64,
    depth: u32,
    out: *mut ChifieldCounts,
) -> ChifieldStatus {
    guard(|| {
        let field = field.as_ref().ok_or_else(|| null("field"))?;
        if depth > 8 {
            return Err(Fail(ChifieldStatus::InvalidArgument, format!("depth {depth} > 8")));
        }
        let pts = find_critical_points(&field.0, t, depth)?;
        let counts = ChifieldCounts {
            above: pts.iter().filter(|p| p.value >= t).count() as u64,
            maxima: count_maxima_above(&pts, t) as u64,
            signed_ec: signed_euler_count(&pts, t)?,
        };
        put(out, counts, "out")
    })
}

/// Releases a chi field. Null is ignored.
///
/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn chifield_chi_field_free(field: *mut ChifieldChiField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}
