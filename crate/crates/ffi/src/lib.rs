//! C ABI for the ellipse percolation laboratory.
//!
//! Conventions: opaque handles own heap state and are released with their
//! `_free` function; every fallible call returns an [`EpStatus`] and writes
//! results through out-pointers; string outputs are UTF-8, NUL-terminated,
//! and released with [`ep_string_free`]. The most recent error message per
//! thread is available through [`ep_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ellipseperc::events::Event;
use ellipseperc::geometry::{BoxSpec, GrainKind, Point};
use ellipseperc::montecarlo::{self, RunParams};
use ellipseperc::multiscale;
use ellipseperc::rng::substream;
use ellipseperc::sampling::{sample_hitting_process, sample_truncated_process, AxisLaw, Configuration};
use ellipseperc::ModelError;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EpStatus {
    /// Success.
    Ok = 0,
    /// A parameter violated a precondition.
    InvalidArgument = 1,
    /// The model refused the run (e.g. infinite hitting intensity).
    ModelError = 2,
    /// A null pointer was passed where a value is required.
    NullPointer = 3,
    /// Internal panic; state is unspecified but memory-safe.
    Panic = 4,
}

fn status_of(err: &ModelError) -> EpStatus {
    match err {
        ModelError::Domain(_) | ModelError::UnknownEvent(_) => EpStatus::InvalidArgument,
        _ => EpStatus::ModelError,
    }
}

fn guard<F: FnOnce() -> EpStatus>(f: F) -> EpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(msg);
            EpStatus::Panic
        }
    }
}

/// Grain shapes accepted by the samplers.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EpGrainKind {
    Ellipse = 0,
    Disk = 1,
}

impl From<EpGrainKind> for GrainKind {
    fn from(k: EpGrainKind) -> GrainKind {
        match k {
            EpGrainKind::Ellipse => GrainKind::Ellipse,
            EpGrainKind::Disk => GrainKind::Disk,
        }
    }
}

/// Opaque sampled configuration.
pub struct EpConfig {
    inner: Configuration,
}

/// Result record of a replicated estimate.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct EpEstimate {
    pub n: u64,
    pub successes: u64,
    pub phat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Result record of the recursion certification.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct EpRecursion {
    pub epsilon: f64,
    pub k0: u64,
    pub u0: f64,
    /// 1 when the decay envelope holds up to `k_max`.
    pub pass: i32,
}

/// Version string of the library; static storage, do not free.
#[no_mangle]
pub extern "C" fn ep_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Most recent error message on this thread, or NULL; static until the next
/// failing call, do not free.
#[no_mangle]
pub extern "C" fn ep_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map(|c| c.as_ptr())
            .unwrap_or(std::ptr::null())
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn ep_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn law_from_parts(alpha: f64, law_json: *const c_char) -> Result<AxisLaw, ModelError> {
    if law_json.is_null() {
        AxisLaw::pareto(alpha)
    } else {
        let text = CStr::from_ptr(law_json)
            .to_str()
            .map_err(|_| ModelError::domain("law string is not UTF-8"))?;
        serde_json::from_str::<serde_json::Value>(text)
            .map_err(|e| ModelError::domain(format!("law JSON: {e}")))
            .and_then(|v| parse_law_value(&v))
    }
}

fn parse_law_value(v: &serde_json::Value) -> Result<AxisLaw, ModelError> {
    let kind = v
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| ModelError::domain("law JSON needs a 'kind' field"))?;
    match kind {
        "pareto" => AxisLaw::pareto(
            v.get("alpha")
                .and_then(|a| a.as_f64())
                .ok_or_else(|| ModelError::domain("pareto law needs alpha"))?,
        ),
        "point_mass" => AxisLaw::point_mass(
            v.get("r")
                .and_then(|a| a.as_f64())
                .ok_or_else(|| ModelError::domain("point_mass law needs r"))?,
        ),
        "piecewise" => {
            let pieces = v
                .get("pieces")
                .and_then(|p| p.as_array())
                .ok_or_else(|| ModelError::domain("piecewise law needs pieces"))?
                .iter()
                .map(|pair| {
                    let arr = pair.as_array()?;
                    Some((arr.first()?.as_f64()?, arr.get(1)?.as_f64()?))
                })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| ModelError::domain("malformed pieces"))?;
            AxisLaw::piecewise(pieces)
        }
        other => Err(ModelError::domain(format!("unknown law kind {other}"))),
    }
}

/// Sample the exact hit process on the box of height `l` and width `k*l`.
/// Pass `law_json = NULL` to use `pareto(alpha)`; otherwise `alpha` is
/// ignored and the law comes from the JSON object (same schema as the
/// configuration files).
///
/// # Safety
/// `out` must be a valid pointer; `law_json`, when non-null, must be a valid
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ep_config_sample(
    alpha: f64,
    law_json: *const c_char,
    u: f64,
    l: f64,
    k: f64,
    grain: EpGrainKind,
    seed: u64,
    out: *mut *mut EpConfig,
) -> EpStatus {
    if out.is_null() {
        return EpStatus::NullPointer;
    }
    guard(|| {
        let law = match law_from_parts(alpha, law_json) {
            Ok(law) => law,
            Err(e) => {
                set_error(e.to_string());
                return status_of(&e);
            }
        };
        if !(l > 0.0 && k > 0.0) {
            set_error("window requires l > 0 and k > 0".into());
            return EpStatus::InvalidArgument;
        }
        let window = BoxSpec::new(l, k);
        let mut rng = substream(seed, 0);
        match sample_hitting_process(&window, u, &law, grain.into(), &mut rng, seed) {
            Ok(config) => {
                *out = Box::into_raw(Box::new(EpConfig { inner: config }));
                EpStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Truncated variant: homogeneous centers on a disk of `trunc_radius`.
///
/// # Safety
/// As [`ep_config_sample`]; `error_bound_out` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn ep_config_sample_truncated(
    alpha: f64,
    law_json: *const c_char,
    u: f64,
    l: f64,
    k: f64,
    grain: EpGrainKind,
    trunc_radius: f64,
    seed: u64,
    out: *mut *mut EpConfig,
    error_bound_out: *mut f64,
) -> EpStatus {
    if out.is_null() {
        return EpStatus::NullPointer;
    }
    guard(|| {
        let law = match law_from_parts(alpha, law_json) {
            Ok(law) => law,
            Err(e) => {
                set_error(e.to_string());
                return status_of(&e);
            }
        };
        if !(l > 0.0 && k > 0.0) {
            set_error("window requires l > 0 and k > 0".into());
            return EpStatus::InvalidArgument;
        }
        let window = BoxSpec::new(l, k);
        let mut rng = substream(seed, 0);
        match sample_truncated_process(&window, u, &law, grain.into(), trunc_radius, &mut rng, seed)
        {
            Ok((config, report)) => {
                if !error_bound_out.is_null() {
                    *error_bound_out = report.error_probability;
                }
                *out = Box::into_raw(Box::new(EpConfig { inner: config }));
                EpStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Parse a configuration from its JSON representation.
///
/// # Safety
/// `json` must be a valid NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ep_config_from_json(
    json: *const c_char,
    out: *mut *mut EpConfig,
) -> EpStatus {
    if json.is_null() || out.is_null() {
        return EpStatus::NullPointer;
    }
    guard(|| {
        let text = match CStr::from_ptr(json).to_str() {
            Ok(t) => t,
            Err(_) => {
                set_error("configuration JSON is not UTF-8".into());
                return EpStatus::InvalidArgument;
            }
        };
        match serde_json::from_str::<Configuration>(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(EpConfig { inner }));
                EpStatus::Ok
            }
            Err(e) => {
                set_error(format!("configuration JSON: {e}"));
                EpStatus::InvalidArgument
            }
        }
    })
}

/// Serialize a configuration to JSON (free with [`ep_string_free`]).
///
/// # Safety
/// `config` must be a live handle, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ep_config_to_json(
    config: *const EpConfig,
    out: *mut *mut c_char,
) -> EpStatus {
    if config.is_null() || out.is_null() {
        return EpStatus::NullPointer;
    }
    guard(|| {
        let text = serde_json::to_string_pretty(&(*config).inner).expect("serializable");
        *out = CString::new(text).expect("no NUL in JSON").into_raw();
        EpStatus::Ok
    })
}

/// Number of grains in the configuration.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ep_config_grain_count(config: *const EpConfig) -> u64 {
    if config.is_null() {
        return 0;
    }
    (*config).inner.grains.len() as u64
}

/// Release a configuration handle.
///
/// # Safety
/// `config` must come from this library and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn ep_config_free(config: *mut EpConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

unsafe fn event_from_parts(
    name: *const c_char,
    l: f64,
    k: f64,
    a: f64,
    eps: f64,
) -> Result<Event, ModelError> {
    let name = CStr::from_ptr(name)
        .to_str()
        .map_err(|_| ModelError::domain("event name is not UTF-8"))?;
    let opt = |v: f64| if v > 0.0 { Some(v) } else { None };
    match name {
        "covered_lr" => Ok(Event::CoveredLr(BoxSpec::new(l, k))),
        "covered_tb" => Ok(Event::CoveredTb(BoxSpec::new(l, k))),
        "vacant_lr" => Ok(Event::VacantLr(BoxSpec::new(l, k))),
        "one_ellipse_lr" => Ok(Event::OneEllipseLr(BoxSpec::new(l, k))),
        "circuit3" => {
            let a = opt(a).ok_or_else(|| ModelError::domain("circuit3 requires a > 0"))?;
            ellipseperc::events::CircuitSpec::new(a)?;
            Ok(Event::Circuit3 { a })
        }
        "point_covered" => Ok(Event::PointCovered {
            at: Point::new(0.0, 0.0),
        }),
        "disk_covered" => {
            if !(0.0..0.5).contains(&eps) {
                return Err(ModelError::domain("disk_covered needs 0 <= eps < 1/2"));
            }
            Ok(Event::DiskCovered {
                at: Point::new(0.0, 0.0),
                eps,
            })
        }
        "annulus_conn" => {
            if !(a > l && l > 0.0) {
                return Err(ModelError::domain("annulus_conn needs 0 < l < a"));
            }
            Ok(Event::AnnulusConn { r_in: l, r_out: a })
        }
        "vacant_annulus_circuit" => {
            if !(l > 0.0) {
                return Err(ModelError::domain("vacant_annulus_circuit needs l > 0"));
            }
            Ok(Event::VacantAnnulusCircuit { l })
        }
        other => Err(ModelError::UnknownEvent(other.to_string())),
    }
}

/// Evaluate a named event on a configuration (1 = occurred, 0 = not).
///
/// # Safety
/// `config` must be a live handle, `event` a valid NUL-terminated string,
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ep_event_eval(
    config: *const EpConfig,
    event: *const c_char,
    l: f64,
    k: f64,
    a: f64,
    eps: f64,
    out: *mut i32,
) -> EpStatus {
    if config.is_null() || event.is_null() || out.is_null() {
        return EpStatus::NullPointer;
    }
    guard(|| match event_from_parts(event, l, k, a, eps) {
        Ok(ev) => {
            *out = ev.eval(&(*config).inner) as i32;
            EpStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    })
}

/// Replicated probability estimate with a Wilson interval at `level`.
/// Grain kind, truncation (`trunc_radius <= 0` means the exact sampler) and
/// the event geometry mirror the CLI flags.
///
/// # Safety
/// `event` must be a valid NUL-terminated string, `out` a valid pointer.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn ep_estimate(
    event: *const c_char,
    alpha: f64,
    law_json: *const c_char,
    u: f64,
    l: f64,
    k: f64,
    a: f64,
    eps: f64,
    grain: EpGrainKind,
    trunc_radius: f64,
    n: u64,
    seed: u64,
    level: f64,
    out: *mut EpEstimate,
) -> EpStatus {
    if event.is_null() || out.is_null() {
        return EpStatus::NullPointer;
    }
    guard(|| {
        let law = match law_from_parts(alpha, law_json) {
            Ok(law) => law,
            Err(e) => {
                set_error(e.to_string());
                return status_of(&e);
            }
        };
        let ev = match event_from_parts(event, l, k, a, eps) {
            Ok(ev) => ev,
            Err(e) => {
                set_error(e.to_string());
                return status_of(&e);
            }
        };
        let mut params = RunParams::new(law, u, grain.into());
        if trunc_radius > 0.0 {
            params.trunc_radius = Some(trunc_radius);
            params.override_truncation_guard = true;
        }
        match montecarlo::estimate(&ev, &params, n, seed, level) {
            Ok(r) => {
                *out = EpEstimate {
                    n: r.n,
                    successes: r.successes,
                    phat: r.phat,
                    ci_lo: r.ci_lo,
                    ci_hi: r.ci_hi,
                };
                EpStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Certify the annulus-connection decay envelope: computes `(epsilon, k0,
/// u0)` for `(c7, alpha)` and checks `q_k <= exp(-epsilon k)` up to `k_max`
/// at intensity `u` (pass `u < 0` to check the computed `u0`).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ep_recursion_check(
    c7: f64,
    alpha: f64,
    u: f64,
    k_max: u64,
    out: *mut EpRecursion,
) -> EpStatus {
    if out.is_null() {
        return EpStatus::NullPointer;
    }
    guard(|| match multiscale::compute_k0_u0(c7, alpha) {
        Ok((epsilon, k0, u0)) => {
            let u_checked = if u < 0.0 { u0 } else { u };
            match multiscale::verify_qk_bound(c7, alpha, u_checked, epsilon, k0, k_max.max(k0)) {
                Ok(pass) => {
                    *out = EpRecursion {
                        epsilon,
                        k0,
                        u0,
                        pass: pass as i32,
                    };
                    EpStatus::Ok
                }
                Err(e) => {
                    set_error(e.to_string());
                    status_of(&e)
                }
            }
        }
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;
    use std::ptr;

    #[test]
    fn sample_eval_roundtrip() {
        let mut handle: *mut EpConfig = ptr::null_mut();
        let status = unsafe {
            ep_config_sample(
                2.0,
                ptr::null(),
                0.3,
                10.0,
                1.0,
                EpGrainKind::Ellipse,
                7,
                &mut handle,
            )
        };
        assert_eq!(status, EpStatus::Ok);
        assert!(!handle.is_null());
        let n = unsafe { ep_config_grain_count(handle) };
        assert!(n > 0);

        // JSON round trip through the C surface
        let mut json: *mut c_char = ptr::null_mut();
        assert_eq!(unsafe { ep_config_to_json(handle, &mut json) }, EpStatus::Ok);
        let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_string();
        let mut handle2: *mut EpConfig = ptr::null_mut();
        let cjson = CString::new(text.clone()).unwrap();
        assert_eq!(
            unsafe { ep_config_from_json(cjson.as_ptr(), &mut handle2) },
            EpStatus::Ok
        );
        assert_eq!(unsafe { ep_config_grain_count(handle2) }, n);
        let mut json2: *mut c_char = ptr::null_mut();
        assert_eq!(unsafe { ep_config_to_json(handle2, &mut json2) }, EpStatus::Ok);
        assert_eq!(text, unsafe { CStr::from_ptr(json2) }.to_str().unwrap());

        // event evaluation agrees with the core library
        let ev = CString::new("vacant_lr").unwrap();
        let mut flag = -1i32;
        assert_eq!(
            unsafe { ep_event_eval(handle, ev.as_ptr(), 10.0, 1.0, 0.0, 0.0, &mut flag) },
            EpStatus::Ok
        );
        let core = unsafe { &(*handle).inner };
        let expect = ellipseperc::events::vacant_lr_crossing(core, &BoxSpec::new(10.0, 1.0));
        assert_eq!(flag == 1, expect);

        unsafe {
            ep_string_free(json);
            ep_string_free(json2);
            ep_config_free(handle);
            ep_config_free(handle2);
        }
    }

    #[test]
    fn estimate_matches_core() {
        let ev = CString::new("covered_lr").unwrap();
        let mut out = EpEstimate {
            n: 0,
            successes: 0,
            phat: 0.0,
            ci_lo: 0.0,
            ci_hi: 0.0,
        };
        let status = unsafe {
            ep_estimate(
                ev.as_ptr(),
                2.0,
                ptr::null(),
                0.4,
                8.0,
                1.0,
                0.0,
                0.0,
                EpGrainKind::Ellipse,
                0.0,
                300,
                11,
                0.95,
                &mut out,
            )
        };
        assert_eq!(status, EpStatus::Ok);
        let params = RunParams::new(AxisLaw::pareto(2.0).unwrap(), 0.4, GrainKind::Ellipse);
        let core = montecarlo::estimate(
            &Event::CoveredLr(BoxSpec::new(8.0, 1.0)),
            &params,
            300,
            11,
            0.95,
        )
        .unwrap();
        assert_eq!(out.successes, core.successes);
        assert_eq!(out.n, core.n);
    }

    #[test]
    fn errors_set_messages() {
        let mut handle: *mut EpConfig = ptr::null_mut();
        // alpha <= 1 with ellipse grains: infinite hitting intensity
        let status = unsafe {
            ep_config_sample(
                0.8,
                ptr::null(),
                0.3,
                4.0,
                1.0,
                EpGrainKind::Ellipse,
                7,
                &mut handle,
            )
        };
        assert_eq!(status, EpStatus::ModelError);
        let msg = unsafe { CStr::from_ptr(ep_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("intensity"));

        let status =
            unsafe { ep_config_sample(2.0, ptr::null(), 0.3, 4.0, 1.0, EpGrainKind::Ellipse, 7, ptr::null_mut()) };
        assert_eq!(status, EpStatus::NullPointer);
    }

    #[test]
    fn recursion_check_via_ffi() {
        let mut out = EpRecursion {
            epsilon: 0.0,
            k0: 0,
            u0: 0.0,
            pass: 0,
        };
        assert_eq!(
            unsafe { ep_recursion_check(2.0, 3.0, -1.0, 500, &mut out) },
            EpStatus::Ok
        );
        assert_eq!(out.epsilon, 2.0);
        assert_eq!(out.pass, 1);
        assert!(out.u0 > 0.0);
        // invalid alpha
        assert_eq!(
            unsafe { ep_recursion_check(2.0, 1.5, -1.0, 500, &mut out) },
            EpStatus::InvalidArgument
        );
    }
}
