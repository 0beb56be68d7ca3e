//! C ABI over the `nbody` crate.
//!
//! Systems are opaque heap handles (`NbSystem*`) created by `nb_system_*`
//! constructors and released with `nb_system_free`. Every fallible call
//! returns an `NbStatus`; on failure `nb_last_error_message` describes the
//! most recent error on the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nbody::harness::{measure, BenchConfig};
use nbody::validation::{cross_validate, ValidationCase};
use nbody::{
    compute_accelerations, init_system, simulate_any, AccelerationBuffer, AnySystem, Columns, KernelVariant, Layout,
    MathForm, NbodyError, ParticleSystem, Precision, Real, Seed, SimParams,
};

pub const NB_PRECISION_SINGLE: i32 = 0;
pub const NB_PRECISION_DOUBLE: i32 = 1;
pub const NB_LAYOUT_AOS: i32 = 0;
pub const NB_LAYOUT_SOA: i32 = 1;
pub const NB_MATH_POW_THEN_DIVIDE: i32 = 0;
pub const NB_MATH_RECIPROCAL_MULTIPLY: i32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NbStatus {
    Ok = 0,
    InvalidArgument = 1,
    InvalidVariant = 2,
    LayoutMismatch = 3,
    NullPointer = 4,
    Io = 5,
    Parse = 6,
    Panic = 7,
}

/// Opaque particle system handle.
pub struct NbSystem {
    inner: AnySystem,
}

/// Physics constants; mirrors the Rust `SimParams`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NbParams {
    pub gravitational_constant: f64,
    pub dt: f64,
    pub softening_sq: f64,
    pub steps: u64,
}

/// Kernel variant. `block` 0 means unblocked.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NbVariant {
    pub layout: i32,
    pub math_form: i32,
    pub block: u64,
    pub threads: u64,
}

/// Summary of one `nb_measure` call. `status_ok` is 0 when the final
/// checksum was non-finite.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NbBenchSummary {
    pub best_time_s: f64,
    pub mean_time_s: f64,
    pub gflops_best: f64,
    pub gflops_mean: f64,
    pub checksum: f64,
    pub status_ok: i32,
}

/// Outcome of `nb_cross_validate` for one variant.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NbValidation {
    pub checksum: f64,
    pub reference_checksum: f64,
    pub checksum_deviation: f64,
    pub tolerance: f64,
    pub passed: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Failure {
    Core(NbodyError),
    Null(&'static str),
    Argument(String),
}

impl From<NbodyError> for Failure {
    fn from(e: NbodyError) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn status(&self) -> NbStatus {
        match self {
            Failure::Core(NbodyError::InvalidArgument(_)) => NbStatus::InvalidArgument,
            Failure::Core(NbodyError::InvalidVariant(_)) => NbStatus::InvalidVariant,
            Failure::Core(NbodyError::LayoutMismatch { .. }) => NbStatus::LayoutMismatch,
            Failure::Core(NbodyError::Io { .. }) => NbStatus::Io,
            Failure::Core(NbodyError::Parse { .. }) => NbStatus::Parse,
            Failure::Null(_) => NbStatus::NullPointer,
            Failure::Argument(_) => NbStatus::InvalidArgument,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Null(what) => format!("null pointer passed for `{what}`"),
            Failure::Argument(m) => m.clone(),
        }
    }
}

fn guard<F>(f: F) -> NbStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            NbStatus::Ok
        }
        Ok(Err(failure)) => {
            set_last_error(&failure.message());
            failure.status()
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            NbStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, what: &'static str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn precision_from(v: i32) -> Result<Precision, Failure> {
    match v {
        NB_PRECISION_SINGLE => Ok(Precision::Single),
        NB_PRECISION_DOUBLE => Ok(Precision::Double),
        other => Err(Failure::Argument(format!("unknown precision code {other}"))),
    }
}

fn precision_code(p: Precision) -> i32 {
    match p {
        Precision::Single => NB_PRECISION_SINGLE,
        Precision::Double => NB_PRECISION_DOUBLE,
    }
}

fn layout_from(v: i32) -> Result<Layout, Failure> {
    match v {
        NB_LAYOUT_AOS => Ok(Layout::Aos),
        NB_LAYOUT_SOA => Ok(Layout::Soa),
        other => Err(Failure::Argument(format!("unknown layout code {other}"))),
    }
}

fn layout_code(l: Layout) -> i32 {
    match l {
        Layout::Aos => NB_LAYOUT_AOS,
        Layout::Soa => NB_LAYOUT_SOA,
    }
}

impl NbParams {
    fn to_rust(self) -> Result<SimParams, Failure> {
        let steps = usize::try_from(self.steps).map_err(|_| Failure::Argument("steps out of range".into()))?;
        Ok(SimParams::new(self.gravitational_constant, self.dt, self.softening_sq, steps)?)
    }
}

impl NbVariant {
    fn to_rust(self) -> Result<KernelVariant, Failure> {
        let math_form = match self.math_form {
            NB_MATH_POW_THEN_DIVIDE => MathForm::PowThenDivide,
            NB_MATH_RECIPROCAL_MULTIPLY => MathForm::ReciprocalMultiply,
            other => return Err(Failure::Argument(format!("unknown math form code {other}"))),
        };
        let to_usize = |v: u64| usize::try_from(v).map_err(|_| Failure::Argument("value out of range".into()));
        let v = KernelVariant {
            layout: layout_from(self.layout)?,
            math_form,
            block: if self.block == 0 { None } else { Some(to_usize(self.block)?) },
            threads: to_usize(self.threads)?,
        };
        v.check()?;
        Ok(v)
    }
}

fn into_handle(sys: AnySystem, out: *mut *mut NbSystem) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    // SAFETY: `out` checked non-null; caller guarantees it is writable.
    unsafe { *out = Box::into_raw(Box::new(NbSystem { inner: sys })) };
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `nb_*` call on the same thread.
#[no_mangle]
pub extern "C" fn nb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// G = 1, dt = 0.01, softening_sq = 1e-9, steps = 100.
#[no_mangle]
pub extern "C" fn nb_params_default() -> NbParams {
    let p = SimParams::default();
    NbParams {
        gravitational_constant: p.gravitational_constant,
        dt: p.dt,
        softening_sq: p.softening_sq,
        steps: p.steps as u64,
    }
}

/// SoA, pow_then_divide, unblocked, one thread.
#[no_mangle]
pub extern "C" fn nb_variant_reference() -> NbVariant {
    NbVariant {
        layout: NB_LAYOUT_SOA,
        math_form: NB_MATH_POW_THEN_DIVIDE,
        block: 0,
        threads: 1,
    }
}

/// `20 · n² · steps / (seconds · 10⁹)`.
///
/// # Safety
/// `out` must be null or point to writable storage for one `double`.
#[no_mangle]
pub unsafe extern "C" fn nb_gflops(n: usize, steps: u64, seconds: f64, out: *mut f64) -> NbStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let steps = usize::try_from(steps).map_err(|_| Failure::Argument("steps out of range".into()))?;
        *out = nbody::gflops(n, steps, seconds)?;
        Ok(())
    })
}

/// Seeded initial conditions.
///
/// # Safety
/// `out` must be null or point to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn nb_system_init(
    n: usize,
    seed: u64,
    precision: i32,
    layout: i32,
    out: *mut *mut NbSystem,
) -> NbStatus {
    guard(|| {
        let sys = init_system(n, Seed(seed), precision_from(precision)?, layout_from(layout)?)?;
        into_handle(sys, out)
    })
}

/// System from caller-owned double arrays of length `n` (rounded when
/// `precision` is single). Inputs are copied.
///
/// # Safety
/// Each array pointer must be null or valid for `n` reads; `out` as in
/// `nb_system_init`.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn nb_system_from_arrays(
    n: usize,
    precision: i32,
    layout: i32,
    px: *const f64,
    py: *const f64,
    pz: *const f64,
    vx: *const f64,
    vy: *const f64,
    vz: *const f64,
    masses: *const f64,
    out: *mut *mut NbSystem,
) -> NbStatus {
    guard(|| {
        let read = |p: *const f64, what: &'static str| -> Result<&[f64], Failure> {
            if p.is_null() {
                return Err(Failure::Null(what));
            }
            Ok(std::slice::from_raw_parts(p, n))
        };
        let (px, py, pz) = (read(px, "px")?, read(py, "py")?, read(pz, "pz")?);
        let (vx, vy, vz) = (read(vx, "vx")?, read(vy, "vy")?, read(vz, "vz")?);
        let masses = read(masses, "masses")?;

        fn build<T: Real>(c: [&[f64]; 7]) -> Result<ParticleSystem<T>, NbodyError> {
            let conv = |s: &[f64]| s.iter().map(|&v| T::from_f64(v)).collect::<Vec<T>>();
            ParticleSystem::from_soa(
                Columns {
                    x: conv(c[0]),
                    y: conv(c[1]),
                    z: conv(c[2]),
                },
                Columns {
                    x: conv(c[3]),
                    y: conv(c[4]),
                    z: conv(c[5]),
                },
                conv(c[6]),
            )
        }
        let cols = [px, py, pz, vx, vy, vz, masses];
        let sys: AnySystem = match precision_from(precision)? {
            Precision::Single => build::<f32>(cols)?.into(),
            Precision::Double => build::<f64>(cols)?.into(),
        };
        into_handle(sys.to_layout(layout_from(layout)?), out)
    })
}

/// Releases a handle. Null is a no-op.
///
/// # Safety
/// `sys` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn nb_system_free(sys: *mut NbSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// # Safety
/// `sys` must be a live handle or null; `out` writable or null.
#[no_mangle]
pub unsafe extern "C" fn nb_system_len(sys: *const NbSystem, out: *mut usize) -> NbStatus {
    guard(|| {
        let s = deref(sys, "sys")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = s.inner.len();
        Ok(())
    })
}

/// Writes `NB_PRECISION_*`.
///
/// # Safety
/// As `nb_system_len`.
#[no_mangle]
pub unsafe extern "C" fn nb_system_precision(sys: *const NbSystem, out: *mut i32) -> NbStatus {
    guard(|| {
        let s = deref(sys, "sys")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = precision_code(s.inner.precision());
        Ok(())
    })
}

/// Writes `NB_LAYOUT_*`.
///
/// # Safety
/// As `nb_system_len`.
#[no_mangle]
pub unsafe extern "C" fn nb_system_layout(sys: *const NbSystem, out: *mut i32) -> NbStatus {
    guard(|| {
        let s = deref(sys, "sys")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = layout_code(s.inner.layout());
        Ok(())
    })
}

/// Sum of all position coordinates, accumulated in double in index order.
///
/// # Safety
/// As `nb_system_len`.
#[no_mangle]
pub unsafe extern "C" fn nb_system_checksum(sys: *const NbSystem, out: *mut f64) -> NbStatus {
    guard(|| {
        let s = deref(sys, "sys")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = s.inner.checksum();
        Ok(())
    })
}

/// New handle holding a bitwise copy of `sys` in `layout`.
///
/// # Safety
/// `sys` live handle; `out` as in `nb_system_init`.
#[no_mangle]
pub unsafe extern "C" fn nb_system_convert_layout(
    sys: *const NbSystem,
    layout: i32,
    out: *mut *mut NbSystem,
) -> NbStatus {
    guard(|| {
        let s = deref(sys, "sys")?;
        into_handle(s.inner.to_layout(layout_from(layout)?), out)
    })
}

/// Copies positions (widened to double) into three arrays of `len` entries.
///
/// # Safety
/// `x`, `y`, `z` must each be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn nb_system_positions(
    sys: *const NbSystem,
    x: *mut f64,
    y: *mut f64,
    z: *mut f64,
    len: usize,
) -> NbStatus {
    guard(|| copy_vectors(deref(sys, "sys")?, x, y, z, len, AnySystem::position_f64))
}

/// Copies velocities (widened to double).
///
/// # Safety
/// As `nb_system_positions`.
#[no_mangle]
pub unsafe extern "C" fn nb_system_velocities(
    sys: *const NbSystem,
    x: *mut f64,
    y: *mut f64,
    z: *mut f64,
    len: usize,
) -> NbStatus {
    guard(|| copy_vectors(deref(sys, "sys")?, x, y, z, len, AnySystem::velocity_f64))
}

unsafe fn copy_vectors(
    s: &NbSystem,
    x: *mut f64,
    y: *mut f64,
    z: *mut f64,
    len: usize,
    get: fn(&AnySystem, usize) -> [f64; 3],
) -> Result<(), Failure> {
    let n = s.inner.len();
    if len != n {
        return Err(Failure::Argument(format!("buffer length {len} does not match {n} bodies")));
    }
    let (x, y, z) = (out_slice(x, n, "x")?, out_slice(y, n, "y")?, out_slice(z, n, "z")?);
    for i in 0..n {
        let v = get(&s.inner, i);
        x[i] = v[0];
        y[i] = v[1];
        z[i] = v[2];
    }
    Ok(())
}

/// One acceleration evaluation, written (widened to double) into `ax`,
/// `ay`, `az` of `len` entries. The variant layout must match the system.
///
/// # Safety
/// Pointers as in `nb_system_positions`; `params`/`variant` readable.
#[no_mangle]
pub unsafe extern "C" fn nb_compute_accelerations(
    sys: *const NbSystem,
    params: *const NbParams,
    variant: *const NbVariant,
    ax: *mut f64,
    ay: *mut f64,
    az: *mut f64,
    len: usize,
) -> NbStatus {
    guard(|| {
        let s = deref(sys, "sys")?;
        let params = deref(params, "params")?.to_rust()?;
        let variant = deref(variant, "variant")?.to_rust()?;
        let n = s.inner.len();
        if len != n {
            return Err(Failure::Argument(format!("buffer length {len} does not match {n} bodies")));
        }
        let (ax, ay, az) = (out_slice(ax, n, "ax")?, out_slice(ay, n, "ay")?, out_slice(az, n, "az")?);

        fn run<T: Real>(
            sys: &ParticleSystem<T>,
            params: &SimParams,
            variant: &KernelVariant,
            out: [&mut [f64]; 3],
        ) -> Result<(), NbodyError> {
            let mut acc = AccelerationBuffer::new(sys.len());
            compute_accelerations(sys, params, variant, &mut acc)?;
            let [ox, oy, oz] = out;
            for i in 0..sys.len() {
                let a = acc.get(i);
                ox[i] = a[0].to_f64();
                oy[i] = a[1].to_f64();
                oz[i] = a[2].to_f64();
            }
            Ok(())
        }
        match &s.inner {
            AnySystem::Single(sys) => run(sys, &params, &variant, [ax, ay, az])?,
            AnySystem::Double(sys) => run(sys, &params, &variant, [ax, ay, az])?,
        }
        Ok(())
    })
}

/// Runs `params->steps` steps and returns the final state as a new handle;
/// `sys` is unchanged.
///
/// # Safety
/// `sys` live handle; `params`/`variant` readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nb_simulate(
    sys: *const NbSystem,
    params: *const NbParams,
    variant: *const NbVariant,
    out: *mut *mut NbSystem,
) -> NbStatus {
    guard(|| {
        let s = deref(sys, "sys")?;
        let params = deref(params, "params")?.to_rust()?;
        let variant = deref(variant, "variant")?.to_rust()?;
        into_handle(simulate_any(&s.inner, &params, &variant)?, out)
    })
}

/// Times `repetitions` simulations of a seeded system after `warmup`
/// unmeasured runs.
///
/// # Safety
/// `params`/`variant` readable; `out` writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn nb_measure(
    n: usize,
    seed: u64,
    precision: i32,
    params: *const NbParams,
    variant: *const NbVariant,
    repetitions: u64,
    warmup: u64,
    out: *mut NbBenchSummary,
) -> NbStatus {
    guard(|| {
        let params = deref(params, "params")?.to_rust()?;
        let variant = deref(variant, "variant")?.to_rust()?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let to_usize = |v: u64| usize::try_from(v).map_err(|_| Failure::Argument("value out of range".into()));
        let config = BenchConfig {
            n_bodies: n,
            params,
            variant,
            precision: precision_from(precision)?,
            seed: Seed(seed),
            repetitions: to_usize(repetitions)?,
            warmup_runs: to_usize(warmup)?,
        };
        let r = measure(&config)?;
        *out = NbBenchSummary {
            best_time_s: r.best_time_s,
            mean_time_s: r.mean_time_s,
            gflops_best: r.gflops_best,
            gflops_mean: r.gflops_mean,
            checksum: r.checksum,
            status_ok: i32::from(r.status.is_ok()),
        };
        Ok(())
    })
}

/// Checks one variant at `precision` against the double-precision oracle
/// from the seeded initial conditions.
///
/// # Safety
/// `params`/`variant` readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nb_cross_validate(
    n: usize,
    seed: u64,
    precision: i32,
    params: *const NbParams,
    variant: *const NbVariant,
    out: *mut NbValidation,
) -> NbStatus {
    guard(|| {
        let params = deref(params, "params")?.to_rust()?;
        let variant = deref(variant, "variant")?.to_rust()?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let case = ValidationCase::new(variant, precision_from(precision)?);
        let report = cross_validate(n, params.steps, Seed(seed), &params, &[case])?;
        let c = &report.cases[0];
        *out = NbValidation {
            checksum: c.checksum,
            reference_checksum: report.reference_checksum,
            checksum_deviation: c.checksum_deviation,
            tolerance: c.tolerance,
            passed: i32::from(c.passed),
        };
        Ok(())
    })
}
