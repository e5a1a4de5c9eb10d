//! C ABI over the roamauth engine.
//!
//! Objects cross the boundary as opaque handles created by `ra_*_new` and
//! released by the matching `ra_*_free`. Every call returns an [`RaStatus`];
//! on anything but `RA_STATUS_OK` a description is available from
//! [`ra_last_error_message`] on the same thread. Strings handed out by the
//! library are NUL-terminated JSON and must be released with
//! [`ra_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use roamauth::attacks::{run_attack, AttackKind, AttackOptions};
use roamauth::crypto::{CurveProfile, Identity, Suite, SuiteConfig};
use roamauth::harness::{
    run_proposed, run_session, Outcome, ProposedWorld, Scenario, SchemeId, SessionRun,
};
use roamauth::proposed::MobileUser;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RaStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    /// The run finished and a party aborted; the JSON result is still set.
    ProtocolAbort = 3,
    AttackError = 4,
    Panic = 5,
}

/// Curve and algorithm choices.
pub struct RaSuite {
    suite: Suite,
}

/// CA, home agent and foreign agent of the proposed scheme.
pub struct RaDeployment {
    suite: Suite,
    world: ProposedWorld,
}

/// A registered mobile user: identity, password and card.
pub struct RaUser {
    user: MobileUser,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(RaStatus, String);

type Res<T> = Result<T, Fail>;

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(RaStatus::InvalidArgument, msg.into())
}

/// Runs `f`, turning errors and panics into a status plus thread-local message.
fn guard(f: impl FnOnce() -> Res<RaStatus>) -> RaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RaStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Res<&'a str> {
    if p.is_null() {
        return Err(Fail(RaStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn bytes<'a>(p: *const u8, len: usize, what: &str) -> Res<&'a [u8]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail(RaStatus::NullArgument, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Res<&'a T> {
    p.as_ref()
        .ok_or_else(|| Fail(RaStatus::NullArgument, format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Res<&'a mut T> {
    p.as_mut()
        .ok_or_else(|| Fail(RaStatus::NullArgument, format!("{what} is null")))
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no NUL").into_raw()
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> Res<T> {
    s.parse().map_err(invalid)
}

fn run_json(run: &SessionRun) -> String {
    serde_json::json!({
        "rounds": run.report.rounds,
        "mu_bits": run.report.mu_bits,
        "outcome": run.outcome,
        "transcript": run.transcript.entries,
    })
    .to_string()
}

fn run_status(run: &SessionRun) -> RaStatus {
    match &run.outcome {
        o if o.is_success() => RaStatus::Ok,
        Outcome::Aborted { reason, .. } => {
            set_error(reason);
            RaStatus::ProtocolAbort
        }
        _ => {
            set_error("session keys differ");
            RaStatus::ProtocolAbort
        }
    }
}

/// Creates a suite for `curve` ("toy" or "p256").
///
/// # Safety
/// `curve` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ra_suite_new(
    curve: *const c_char,
    out_suite: *mut *mut RaSuite,
) -> RaStatus {
    guard(|| {
        let slot = out(out_suite, "out_suite")?;
        let profile: CurveProfile = text(curve, "curve")?
            .parse()
            .map_err(|e| invalid(format!("{e}")))?;
        let suite =
            Suite::new(SuiteConfig::with_curve(profile)).map_err(|e| invalid(e.to_string()))?;
        *slot = Box::into_raw(Box::new(RaSuite { suite }));
        Ok(RaStatus::Ok)
    })
}

/// # Safety
/// `suite` must come from [`ra_suite_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn ra_suite_free(suite: *mut RaSuite) {
    if !suite.is_null() {
        drop(Box::from_raw(suite));
    }
}

/// Generates a deployment deterministically from `seed`.
///
/// # Safety
/// `suite` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ra_deployment_new(
    suite: *const RaSuite,
    seed: u64,
    out_deployment: *mut *mut RaDeployment,
) -> RaStatus {
    guard(|| {
        let suite = &handle(suite, "suite")?.suite;
        let slot = out(out_deployment, "out_deployment")?;
        let world = ProposedWorld::generate(suite, &mut ChaCha20Rng::seed_from_u64(seed));
        *slot = Box::into_raw(Box::new(RaDeployment {
            suite: suite.clone(),
            world,
        }));
        Ok(RaStatus::Ok)
    })
}

/// # Safety
/// `deployment` must come from [`ra_deployment_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn ra_deployment_free(deployment: *mut RaDeployment) {
    if !deployment.is_null() {
        drop(Box::from_raw(deployment));
    }
}

/// Registers `id` with the deployment's home agent.
///
/// # Safety
/// `id` must be NUL-terminated, `password` readable for `password_len`
/// bytes and `out_user` writable.
#[no_mangle]
pub unsafe extern "C" fn ra_register(
    deployment: *const RaDeployment,
    id: *const c_char,
    password: *const u8,
    password_len: usize,
    seed: u64,
    out_user: *mut *mut RaUser,
) -> RaStatus {
    guard(|| {
        let d = handle(deployment, "deployment")?;
        let id = Identity::from_label(text(id, "id")?).map_err(|e| invalid(e.to_string()))?;
        let pw = bytes(password, password_len, "password")?;
        let slot = out(out_user, "out_user")?;
        let user = d
            .world
            .register_quiet(&d.suite, id, pw, &mut ChaCha20Rng::seed_from_u64(seed));
        *slot = Box::into_raw(Box::new(RaUser { user }));
        Ok(RaStatus::Ok)
    })
}

/// Replaces the password the user types at login. The card is unchanged, so
/// a wrong value makes the next handshake fail locally.
///
/// # Safety
/// `user` must be a live handle and `password` readable for `password_len`.
#[no_mangle]
pub unsafe extern "C" fn ra_user_set_password(
    user: *mut RaUser,
    password: *const u8,
    password_len: usize,
) -> RaStatus {
    guard(|| {
        let pw = bytes(password, password_len, "password")?.to_vec();
        let u = user
            .as_mut()
            .ok_or_else(|| Fail(RaStatus::NullArgument, "user is null".into()))?;
        u.user.password = pw;
        Ok(RaStatus::Ok)
    })
}

/// The user's smart card as JSON.
///
/// # Safety
/// `user` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ra_user_card_json(
    user: *const RaUser,
    out_json: *mut *mut c_char,
) -> RaStatus {
    guard(|| {
        let u = handle(user, "user")?;
        *out(out_json, "out_json")? = to_c(u.user.card.to_json());
        Ok(RaStatus::Ok)
    })
}

/// # Safety
/// `user` must come from [`ra_register`] or be null.
#[no_mangle]
pub unsafe extern "C" fn ra_user_free(user: *mut RaUser) {
    if !user.is_null() {
        drop(Box::from_raw(user));
    }
}

/// Runs `scenario` of the proposed scheme for a registered user. The result
/// JSON (rounds, bits, outcome, transcript) is written even when a party
/// aborts, in which case `RA_STATUS_PROTOCOL_ABORT` is returned.
///
/// # Safety
/// Handles must be live; `scenario` NUL-terminated; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn ra_handshake(
    deployment: *const RaDeployment,
    user: *const RaUser,
    scenario: *const c_char,
    seed: u64,
    out_json: *mut *mut c_char,
) -> RaStatus {
    guard(|| {
        let d = handle(deployment, "deployment")?;
        let u = handle(user, "user")?;
        let sc: Scenario = parse(text(scenario, "scenario")?)?;
        if sc == Scenario::Registration {
            return Err(invalid("use ra_register for registration"));
        }
        let slot = out(out_json, "out_json")?;
        let run = run_proposed(
            &d.suite,
            &d.world,
            &u.user,
            sc,
            &mut ChaCha20Rng::seed_from_u64(seed),
            None,
        );
        *slot = to_c(run_json(&run));
        Ok(run_status(&run))
    })
}

/// Generates a deployment and user from `seed` and runs one scenario.
///
/// # Safety
/// `suite` must be live; strings NUL-terminated; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn ra_run_session(
    suite: *const RaSuite,
    scheme: *const c_char,
    scenario: *const c_char,
    seed: u64,
    out_json: *mut *mut c_char,
) -> RaStatus {
    guard(|| {
        let suite = &handle(suite, "suite")?.suite;
        let scheme: SchemeId = parse(text(scheme, "scheme")?)?;
        let sc: Scenario = parse(text(scenario, "scenario")?)?;
        let slot = out(out_json, "out_json")?;
        let run = run_session(
            suite,
            scheme,
            sc,
            &mut ChaCha20Rng::seed_from_u64(seed),
            None,
        )
        .map_err(|e| invalid(e.to_string()))?;
        *slot = to_c(run_json(&run));
        Ok(run_status(&run))
    })
}

/// Runs attack `attack` against `scheme`. `*out_succeeded` is 1 when the
/// attack succeeded with sound evidence, 0 otherwise.
///
/// # Safety
/// `suite` must be live; strings NUL-terminated; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn ra_run_attack(
    suite: *const RaSuite,
    scheme: *const c_char,
    attack: *const c_char,
    seed: u64,
    out_succeeded: *mut c_int,
    out_json: *mut *mut c_char,
) -> RaStatus {
    guard(|| {
        let suite = &handle(suite, "suite")?.suite;
        let scheme: SchemeId = parse(text(scheme, "scheme")?)?;
        let kind: AttackKind = parse(text(attack, "attack")?)?;
        let flag = out(out_succeeded, "out_succeeded")?;
        let slot = out(out_json, "out_json")?;
        let outcome = run_attack(
            suite,
            scheme,
            kind,
            &AttackOptions::default(),
            &mut ChaCha20Rng::seed_from_u64(seed),
        )
        .map_err(|e| Fail(RaStatus::AttackError, e.to_string()))?;
        *flag = c_int::from(outcome.succeeded && outcome.is_sound());
        *slot = to_c(outcome.to_json());
        Ok(RaStatus::Ok)
    })
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn ra_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread. Valid until the next
/// call into the library from the same thread; never null.
#[no_mangle]
pub extern "C" fn ra_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static.
#[no_mangle]
pub extern "C" fn ra_version() -> *const c_char {
    static V: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    V.as_ptr().cast()
}
