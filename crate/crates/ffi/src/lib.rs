//! C interface to the `fdkp` solver.
//!
//! Every function returns an [`FdkpStatus`]; on failure the message is kept
//! per thread and read with [`fdkp_last_error`]. Handles are opaque and must
//! be released with the matching `_free` function. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fdkp::harness::{nondegeneracy_probe, run_sweep, zero_potential_eigenvalue};
use fdkp::lumps::{eval_zeta_star, kp_residual_exact, sample_lump};
use fdkp::reduction::{Reducer, SolverConfig, Wave};
use fdkp::symbols::dispersion_speed;
use fdkp::{Error, Field, Frame, Grid, SymbolParams};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FdkpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotConverged = 3,
    BufferTooSmall = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FdkpFrame {
    Physical = 0,
    KpScaled = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdkpParams {
    pub beta: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub theta: f64,
    pub sobolev_s: f64,
    pub ball_m: f64,
    pub epsilon_max: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdkpGrid {
    pub half_width_x: f64,
    pub half_width_y: f64,
    pub points_x: usize,
    pub points_y: usize,
}

/// Summary of one Newton solve.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FdkpSolveInfo {
    pub newton_steps: usize,
    pub reduced_residual: f64,
    pub full_relative_residual: f64,
    pub speed: f64,
    pub asymmetry: f64,
}

/// A sampled field.
pub struct FdkpField(Field);

/// An assembled solitary wave.
pub struct FdkpWave(Wave);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FdkpStatus {
    match e {
        Error::Newton { .. } | Error::FixedPoint { .. } | Error::Krylov { .. } | Error::Eigen(_) => {
            FdkpStatus::NotConverged
        }
        Error::Io(_) => FdkpStatus::Io,
        _ => FdkpStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), FdkpStatus>) -> FdkpStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FdkpStatus::Ok,
        Ok(Err(s)) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            FdkpStatus::Panic
        }
    }
}

fn lift<T>(r: fdkp::Result<T>) -> Result<T, FdkpStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn null() -> FdkpStatus {
    set_error("null pointer argument".into());
    FdkpStatus::NullPointer
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, FdkpStatus> {
    p.as_mut().ok_or_else(null)
}

unsafe fn arg<'a, T>(p: *const T) -> Result<&'a T, FdkpStatus> {
    p.as_ref().ok_or_else(null)
}

impl From<SymbolParams> for FdkpParams {
    fn from(p: SymbolParams) -> Self {
        Self {
            beta: p.beta,
            delta: p.delta,
            epsilon: p.epsilon,
            theta: p.theta,
            sobolev_s: p.sobolev_s,
            ball_m: p.ball_m,
            epsilon_max: p.epsilon_max,
        }
    }
}

impl FdkpParams {
    fn to_core(self) -> Result<SymbolParams, FdkpStatus> {
        let p = SymbolParams {
            beta: self.beta,
            delta: self.delta,
            epsilon: self.epsilon,
            theta: self.theta,
            sobolev_s: self.sobolev_s,
            ball_m: self.ball_m,
            epsilon_max: self.epsilon_max,
        };
        lift(p.validate())?;
        Ok(p)
    }
}

impl FdkpGrid {
    fn to_core(self) -> Result<Grid, FdkpStatus> {
        lift(Grid::new(self.half_width_x, self.half_width_y, self.points_x, self.points_y))
    }
}

fn frame_of(f: FdkpFrame) -> Frame {
    match f {
        FdkpFrame::Physical => Frame::Physical,
        FdkpFrame::KpScaled => Frame::KpScaled,
    }
}

/// Version string of the library; static, never freed.
#[no_mangle]
pub extern "C" fn fdkp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread, NUL-terminated, into `buf`.
/// `required` receives the buffer size needed including the terminator (1 when
/// there is no error).
///
/// # Safety
/// `buf` must be valid for `len` bytes or null with `len == 0`.
#[no_mangle]
pub unsafe extern "C" fn fdkp_last_error(buf: *mut c_char, len: usize, required: *mut usize) -> FdkpStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone()).unwrap_or_default();
    let bytes = msg.as_bytes_with_nul();
    if let Some(r) = required.as_mut() {
        *r = bytes.len();
    }
    if len < bytes.len() {
        return FdkpStatus::BufferTooSmall;
    }
    if buf.is_null() {
        return FdkpStatus::NullPointer;
    }
    ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, bytes.len());
    FdkpStatus::Ok
}

/// # Safety
/// `params` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn fdkp_params_default(params: *mut FdkpParams) -> FdkpStatus {
    guard(|| {
        *out(params)? = SymbolParams::default().into();
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn fdkp_grid_default(grid: *mut FdkpGrid) -> FdkpStatus {
    guard(|| {
        let g = Grid::default();
        *out(grid)? = FdkpGrid {
            half_width_x: g.half_width_x,
            half_width_y: g.half_width_y,
            points_x: g.points_x,
            points_y: g.points_y,
        };
        Ok(())
    })
}

/// Derivative `d_x^a d_y^b` of the lump `k` at `(x, y)`.
///
/// # Safety
/// `value` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn fdkp_lump_eval(k: usize, x: f64, y: f64, a: usize, b: usize, value: *mut f64) -> FdkpStatus {
    guard(|| {
        *out(value)? = lift(eval_zeta_star(k, x, y, a, b))?;
        Ok(())
    })
}

/// Pointwise residual of the normalised steady KP-I equation at the lump `k`.
///
/// # Safety
/// `value` must be null or point to writable memory.
#[no_mangle]
pub unsafe extern "C" fn fdkp_lump_residual(k: usize, x: f64, y: f64, value: *mut f64) -> FdkpStatus {
    guard(|| {
        *out(value)? = lift(kp_residual_exact(k, x, y))?;
        Ok(())
    })
}

/// Phase speed `c(k1)` along `k2 = 0`.
///
/// # Safety
/// `params` must be null or valid; `value` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn fdkp_dispersion_speed(k1: f64, params: *const FdkpParams, value: *mut f64) -> FdkpStatus {
    guard(|| {
        let p = arg(params)?.to_core()?;
        *out(value)? = dispersion_speed(k1, &p);
        Ok(())
    })
}

/// Samples the lump `k` onto `grid`; the handle is released with [`fdkp_field_free`].
///
/// # Safety
/// Pointer arguments must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn fdkp_field_sample_lump(
    grid: *const FdkpGrid,
    k: usize,
    frame: FdkpFrame,
    params: *const FdkpParams,
    field: *mut *mut FdkpField,
) -> FdkpStatus {
    guard(|| {
        let slot = out(field)?;
        let g = arg(grid)?.to_core()?;
        let p = arg(params)?.to_core()?;
        let (f, _) = lift(sample_lump(g, k, frame_of(frame), &p))?;
        *slot = Box::into_raw(Box::new(FdkpField(f)));
        Ok(())
    })
}

/// # Safety
/// `field` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fdkp_field_free(field: *mut FdkpField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// # Safety
/// Pointer arguments must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn fdkp_field_shape(field: *const FdkpField, nx: *mut usize, ny: *mut usize) -> FdkpStatus {
    guard(|| {
        let (a, b) = arg(field)?.0.grid().shape();
        *out(nx)? = a;
        *out(ny)? = b;
        Ok(())
    })
}

/// Copies the samples row-major, index `(ix, iy)` at `ix * ny + iy`.
///
/// # Safety
/// `buf` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fdkp_field_samples(field: *const FdkpField, buf: *mut f64, len: usize) -> FdkpStatus {
    guard(|| {
        let f = &arg(field)?.0;
        let s = f.samples();
        if len < s.len() {
            set_error(format!("buffer holds {len} values, field has {}", s.len()));
            return Err(FdkpStatus::BufferTooSmall);
        }
        if buf.is_null() {
            return Err(null());
        }
        for (i, v) in s.iter().enumerate() {
            *buf.add(i) = *v;
        }
        Ok(())
    })
}

/// # Safety
/// Pointer arguments must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn fdkp_field_asymmetry(field: *const FdkpField, value: *mut f64) -> FdkpStatus {
    guard(|| {
        *out(value)? = arg(field)?.0.asymmetry();
        Ok(())
    })
}

/// Newton solve of the reduced equation at `params.epsilon`, seeded with the
/// lump `k`, followed by reassembly. The wave is released with [`fdkp_wave_free`].
///
/// # Safety
/// Pointer arguments must be null or valid; `info` may be null.
#[no_mangle]
pub unsafe extern "C" fn fdkp_solve(
    grid: *const FdkpGrid,
    params: *const FdkpParams,
    k: usize,
    wave: *mut *mut FdkpWave,
    info: *mut FdkpSolveInfo,
) -> FdkpStatus {
    guard(|| {
        let slot = out(wave)?;
        let g = arg(grid)?.to_core()?;
        let p = arg(params)?.to_core()?;
        let red = lift(Reducer::new(g, p, SolverConfig::default()))?;
        let (seed, _) = lift(sample_lump(g, k, Frame::KpScaled, &p))?;
        let (zeta, diag) = lift(red.newton_solve(&seed))?;
        let w = lift(red.assemble_solution(&zeta))?;
        let full = lift(red.fdkp_residual(&w.profile, w.speed))?;
        if let Some(i) = info.as_mut() {
            *i = FdkpSolveInfo {
                newton_steps: diag.steps(),
                reduced_residual: diag.final_residual(),
                full_relative_residual: full.relative,
                speed: w.speed,
                asymmetry: w.profile.asymmetry(),
            };
        }
        *slot = Box::into_raw(Box::new(FdkpWave(w)));
        Ok(())
    })
}

/// # Safety
/// `wave` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fdkp_wave_free(wave: *mut FdkpWave) {
    if !wave.is_null() {
        drop(Box::from_raw(wave));
    }
}

/// Which component of a wave to extract.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FdkpComponent {
    Profile = 0,
    Low = 1,
    High = 2,
}

/// Copies one component of the scaled profile into a new field handle.
///
/// # Safety
/// Pointer arguments must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn fdkp_wave_component(
    wave: *const FdkpWave,
    component: FdkpComponent,
    field: *mut *mut FdkpField,
) -> FdkpStatus {
    guard(|| {
        let slot = out(field)?;
        let w = &arg(wave)?.0;
        let f = match component {
            FdkpComponent::Profile => &w.profile,
            FdkpComponent::Low => &w.low,
            FdkpComponent::High => &w.high,
        };
        *slot = Box::into_raw(Box::new(FdkpField(f.clone())));
        Ok(())
    })
}

/// # Safety
/// Pointer arguments must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn fdkp_wave_speed(wave: *const FdkpWave, speed: *mut f64) -> FdkpStatus {
    guard(|| {
        *out(speed)? = arg(wave)?.0.speed;
        Ok(())
    })
}

/// Runs an amplitude sweep and returns the report as a NUL-terminated JSON
/// string, released with [`fdkp_string_free`].
///
/// # Safety
/// `epsilons` must be valid for `count` doubles; other pointers null or valid.
#[no_mangle]
pub unsafe extern "C" fn fdkp_sweep_json(
    k: usize,
    epsilons: *const f64,
    count: usize,
    grid: *const FdkpGrid,
    params: *const FdkpParams,
    json: *mut *mut c_char,
) -> FdkpStatus {
    guard(|| {
        let slot = out(json)?;
        let eps: &[f64] = if count == 0 {
            &[]
        } else if epsilons.is_null() {
            return Err(null());
        } else {
            std::slice::from_raw_parts(epsilons, count)
        };
        let g = arg(grid)?.to_core()?;
        let p = arg(params)?.to_core()?;
        let report = lift(run_sweep(k, eps, g, &p, &SolverConfig::default()))?;
        let text = serde_json::to_string(&report).map_err(|e| {
            set_error(e.to_string());
            FdkpStatus::Io
        })?;
        *slot = CString::new(text).unwrap_or_default().into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fdkp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Smallest-magnitude symmetric eigenvalue of the linearised KP operator at
/// the lump `k`, on `grid` and its refinement. `relative_change` may be null.
///
/// # Safety
/// Pointer arguments must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn fdkp_probe(
    k: usize,
    grid: *const FdkpGrid,
    params: *const FdkpParams,
    eigenvalue: *mut f64,
    relative_change: *mut f64,
) -> FdkpStatus {
    guard(|| {
        let value = out(eigenvalue)?;
        let g = arg(grid)?.to_core()?;
        let p = arg(params)?.to_core()?;
        let r = lift(nondegeneracy_probe(k, &[g, g.refined()], &p))?;
        *value = r.levels.last().map_or(f64::NAN, |l| l.eigenvalue);
        if let Some(c) = relative_change.as_mut() {
            *c = r.refinement_deltas.first().copied().unwrap_or(f64::NAN);
        }
        Ok(())
    })
}

/// The probe iteration with the lump replaced by zero; returns exactly 1.
///
/// # Safety
/// Pointer arguments must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn fdkp_probe_control(grid: *const FdkpGrid, params: *const FdkpParams, eigenvalue: *mut f64) -> FdkpStatus {
    guard(|| {
        let value = out(eigenvalue)?;
        let g = arg(grid)?.to_core()?;
        let p = arg(params)?.to_core()?;
        *value = lift(zero_potential_eigenvalue(g, &p))?;
        Ok(())
    })
}
