//! C ABI over the psrb library.
//!
//! Conventions: every fallible call returns a [`PsrbStatus`] and writes its
//! result through an out-pointer. On failure a message is available from
//! [`psrb_last_error`] on the same thread. Handles are opaque; free them with
//! the matching `_free` function. Strings returned by the library must be
//! released with [`psrb_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::c_char;

use psrb::experiment::{NamedProfile, ProfilesFile};
use psrb::governor::Governor;
use psrb::kb::{CaseBase, KbError};
use psrb::model::{CharacterProfile, Instruction};
use psrb::sim::{behaviour_id, run_episode, Scenario};
use psrb::utility::{self, GammaSpec, RiskMode};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsrbStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    NotFound = 3,
    ParseError = 4,
    RuntimeError = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsrbRiskMode {
    Harm = 0,
    Literal = 1,
}

impl From<PsrbRiskMode> for RiskMode {
    fn from(m: PsrbRiskMode) -> Self {
        match m {
            PsrbRiskMode::Harm => RiskMode::default(),
            PsrbRiskMode::Literal => RiskMode::Literal,
        }
    }
}

/// Opaque expert case base.
pub struct PsrbCaseBase(CaseBase);

/// Opaque character profile.
pub struct PsrbProfile(CharacterProfile);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

type FfiResult<T> = Result<T, (PsrbStatus, String)>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> PsrbStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PsrbStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PsrbStatus::Panic
        }
    }
}

fn null(what: &str) -> (PsrbStatus, String) {
    (PsrbStatus::NullArgument, format!("{what} is null"))
}

fn invalid(msg: impl ToString) -> (PsrbStatus, String) {
    (PsrbStatus::InvalidArgument, msg.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> FfiResult<()> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Message describing the last failure on this thread, or NULL. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn psrb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn psrb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a case-base file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psrb_case_base_load(
    path: *const c_char,
    out: *mut *mut PsrbCaseBase,
) -> PsrbStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let kb = CaseBase::load_path(path).map_err(|e| {
            let status = match e {
                KbError::NotFound(_) => PsrbStatus::NotFound,
                KbError::Io(_) => PsrbStatus::RuntimeError,
                _ => PsrbStatus::ParseError,
            };
            (status, e.to_string())
        })?;
        write_out(out, Box::into_raw(Box::new(PsrbCaseBase(kb))))
    })
}

/// An empty case base: the governor then follows the rules strictly.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psrb_case_base_empty(out: *mut *mut PsrbCaseBase) -> PsrbStatus {
    guard(|| write_out(out, Box::into_raw(Box::new(PsrbCaseBase(CaseBase::new())))))
}

/// Number of cases, or 0 for NULL.
///
/// # Safety
/// `kb` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn psrb_case_base_len(kb: *const PsrbCaseBase) -> usize {
    kb.as_ref().map_or(0, |k| k.0.len())
}

/// # Safety
/// `kb` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn psrb_case_base_free(kb: *mut PsrbCaseBase) {
    if !kb.is_null() {
        drop(Box::from_raw(kb));
    }
}

/// Creates a profile; each parameter must lie in [0, 10].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psrb_profile_new(
    c_w: f64,
    c_au: f64,
    c_rp: f64,
    out: *mut *mut PsrbProfile,
) -> PsrbStatus {
    guard(|| {
        let p = CharacterProfile::new(c_w, c_au, c_rp);
        p.validate().map_err(invalid)?;
        write_out(out, Box::into_raw(Box::new(PsrbProfile(p))))
    })
}

/// Looks a named profile up in a profiles TOML file.
///
/// # Safety
/// `path` and `name` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psrb_profile_load(
    path: *const c_char,
    name: *const c_char,
    out: *mut *mut PsrbProfile,
) -> PsrbStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let name = str_arg(name, "name")?;
        let pf = ProfilesFile::load(path.as_ref())
            .map_err(|e| (PsrbStatus::ParseError, e.to_string()))?;
        let NamedProfile { profile, .. } = pf
            .profiles
            .into_iter()
            .find(|p| p.name == name)
            .ok_or_else(|| (PsrbStatus::NotFound, format!("profile {name:?} not found")))?;
        write_out(out, Box::into_raw(Box::new(PsrbProfile(profile))))
    })
}

/// # Safety
/// `p` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn psrb_profile_free(p: *mut PsrbProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn parse_responses(s: &str) -> FfiResult<Vec<Instruction>> {
    s.split(',')
        .map(|t| match t.trim() {
            "SNOOZE" => Ok(Instruction::Snooze),
            "ACKNOWLEDGE" => Ok(Instruction::Acknowledge),
            other => Err(invalid(format!("unknown response {other:?}"))),
        })
        .collect()
}

/// Runs one episode. `responses` is a comma-separated cycle such as
/// `"SNOOZE,ACKNOWLEDGE"`; NULL selects that default. On success
/// `*out_json` receives the episode log (free with `psrb_string_free`) and
/// `*out_behaviour_id` its behaviour class. Either out-pointer may be NULL.
///
/// # Safety
/// Handles must be live; strings NUL-terminated; out-pointers NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn psrb_run_episode(
    kb: *const PsrbCaseBase,
    profile: *const PsrbProfile,
    epsilon_m: u8,
    d: u32,
    responses: *const c_char,
    takes_medication: bool,
    risk_mode: PsrbRiskMode,
    out_json: *mut *mut c_char,
    out_behaviour_id: *mut u32,
) -> PsrbStatus {
    guard(|| {
        let kb = kb.as_ref().ok_or_else(|| null("kb"))?;
        let profile = profile.as_ref().ok_or_else(|| null("profile"))?;
        let mut scenario = Scenario::new("ffi", epsilon_m, d);
        if !responses.is_null() {
            scenario.resident.responses = parse_responses(str_arg(responses, "responses")?)?;
        }
        scenario.resident.takes_medication = takes_medication;
        scenario.validate().map_err(invalid)?;
        let gov = Governor::new(&kb.0).with_risk_mode(risk_mode.into());
        let log = run_episode(&scenario, &profile.0, &gov)
            .map_err(|e| (PsrbStatus::RuntimeError, e.to_string()))?;
        if !out_behaviour_id.is_null() {
            out_behaviour_id.write(behaviour_id(&log));
        }
        if !out_json.is_null() {
            let json = serde_json::to_string(&log)
                .map_err(|e| (PsrbStatus::RuntimeError, e.to_string()))?;
            let c = CString::new(json).map_err(|e| (PsrbStatus::RuntimeError, e.to_string()))?;
            out_json.write(c.into_raw());
        }
        Ok(())
    })
}

fn spec(alpha: f64, beta: f64) -> FfiResult<GammaSpec> {
    GammaSpec::new(alpha, beta).map_err(invalid)
}

/// Shifted Gamma density (location -1) at `x`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psrb_gamma_pdf(
    x: f64,
    alpha: f64,
    beta: f64,
    out: *mut f64,
) -> PsrbStatus {
    guard(|| write_out(out, utility::gamma_pdf(x, &spec(alpha, beta)?)))
}

/// Most probable utility on the 0.05 grid over [-1, 1].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psrb_pmax_util(alpha: f64, beta: f64, out: *mut f64) -> PsrbStatus {
    guard(|| write_out(out, utility::pmax_util(&spec(alpha, beta)?)))
}

/// Risk figure of a wellbeing density.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psrb_behaviour_risk(
    alpha: f64,
    beta: f64,
    mode: PsrbRiskMode,
    out: *mut f64,
) -> PsrbStatus {
    guard(|| {
        write_out(
            out,
            utility::behaviour_risk(&spec(alpha, beta)?, mode.into()),
        )
    })
}

/// Shape parameter for medicine impact 1, 2 or 3.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psrb_shape_param(epsilon_m: u8, out: *mut f64) -> PsrbStatus {
    guard(|| write_out(out, utility::shape_param(epsilon_m).map_err(invalid)?))
}

#[no_mangle]
pub extern "C" fn psrb_scale_param(dose_count: f64) -> f64 {
    utility::scale_param(dose_count)
}

#[no_mangle]
pub extern "C" fn psrb_risk_threshold(c_rp: f64) -> f64 {
    psrb::evaluator::risk_threshold(c_rp)
}
