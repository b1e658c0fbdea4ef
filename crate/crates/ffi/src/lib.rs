//! C ABI over the fault-injection pipeline.
//!
//! The surface is deliberately small: create an opaque context (which runs
//! the fault-free pipeline once and keeps its recovery as the comparison
//! point), query the baseline numbers, inject single faults, free the
//! context. Everything else — sweeps, CSV, images — stays behind the Rust
//! API and the CLI; a C caller loops over `faultlab_inject` itself.
//!
//! Conventions, matching `include/ckks_faultlab.h`:
//!
//! * every function returns a [`FaultlabStatus`]; results travel through out
//!   pointers, written only on `FAULTLAB_OK`;
//! * enum-like inputs (backend, target, representation) arrive as `uint32_t`
//!   and are range-checked, so a junk value is an error, never UB;
//! * on failure, a thread-local message with the details is readable via
//!   [`faultlab_last_error_message`] until the next failure on that thread;
//! * panics are caught at the boundary and reported as
//!   `FAULTLAB_INTERNAL_ERROR` — they never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ckks_faultlab::campaign;
use ckks_faultlab::ckks::{Backend, CkksContext, Message, Params};
use ckks_faultlab::fault::{self, Baseline, FaultSpec, Outcome, Representation, Stage, Target};
use ckks_faultlab::rns::generate_prime_chain;

/// Opaque pipeline handle. C code only ever sees `*mut FaultlabContext`.
pub struct FaultlabContext {
    ctx: CkksContext,
    message: Message,
    baseline: Baseline,
    baseline_max_slot_error: f64,
}

/// Status code returned by every entry point.
#[repr(u32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultlabStatus {
    /// Success; out parameters are valid.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Parameters or fault address rejected by validation.
    InvalidArgument = 2,
    /// A panic was caught at the boundary — a bug, not a usage error.
    InternalError = 3,
}

/// Classification values written to `out_outcome` by [`faultlab_inject`].
pub const FAULTLAB_OUTCOME_BENIGN: u32 = 0;
pub const FAULTLAB_OUTCOME_SDC: u32 = 1;
pub const FAULTLAB_OUTCOME_DETECTED: u32 = 2;

/// Backend selectors for [`faultlab_context_new`].
pub const FAULTLAB_BACKEND_TEXTBOOK: u32 = 0;
pub const FAULTLAB_BACKEND_RNS_NTT: u32 = 1;

/// Fault targets: the encoded plaintext or either ciphertext half.
pub const FAULTLAB_TARGET_PLAINTEXT: u32 = 0;
pub const FAULTLAB_TARGET_C0: u32 = 1;
pub const FAULTLAB_TARGET_C1: u32 = 2;

/// Word representations a fault can address.
pub const FAULTLAB_REPR_BIG: u32 = 0;
pub const FAULTLAB_REPR_RNS_LIMB: u32 = 1;
pub const FAULTLAB_REPR_NTT_LIMB: u32 = 2;

/// The conventional BENIGN threshold, as a multiple of the baseline L2.
pub const FAULTLAB_DEFAULT_TAU_BENIGN: f64 = fault::DEFAULT_TAU_BENIGN;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: FaultlabStatus, message: impl Into<String>) -> FaultlabStatus {
    let text = message.into().replace('\0', "?");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).expect("nul bytes were replaced");
    });
    status
}

fn guard(body: impl FnOnce() -> FaultlabStatus) -> FaultlabStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(
            FaultlabStatus::InternalError,
            "panic caught at the FFI boundary",
        ),
    }
}

/// Message describing the most recent failure on this thread.
///
/// The pointer stays valid until the next failing call on the same thread;
/// before any failure it points at an empty string. Never null.
///
/// # Safety
///
/// The returned string must not be freed or written through.
#[no_mangle]
pub unsafe extern "C" fn faultlab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Crate version as a static nul-terminated string. Never null.
///
/// # Safety
///
/// The returned string must not be freed or written through.
#[no_mangle]
pub unsafe extern "C" fn faultlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Static name for a status code; unknown codes yield `"UNKNOWN"`.
///
/// # Safety
///
/// The returned string must not be freed or written through.
#[no_mangle]
pub unsafe extern "C" fn faultlab_status_name(status: u32) -> *const c_char {
    let name: &'static str = match status {
        0 => "OK\0",
        1 => "NULL_ARGUMENT\0",
        2 => "INVALID_ARGUMENT\0",
        3 => "INTERNAL_ERROR\0",
        _ => "UNKNOWN\0",
    };
    name.as_ptr().cast()
}

/// Static name for an outcome code; unknown codes yield `"UNKNOWN"`.
///
/// # Safety
///
/// The returned string must not be freed or written through.
#[no_mangle]
pub unsafe extern "C" fn faultlab_outcome_name(outcome: u32) -> *const c_char {
    let name: &'static str = match outcome {
        FAULTLAB_OUTCOME_BENIGN => "BENIGN\0",
        FAULTLAB_OUTCOME_SDC => "SDC\0",
        FAULTLAB_OUTCOME_DETECTED => "DETECTED\0",
        _ => "UNKNOWN\0",
    };
    name.as_ptr().cast()
}

/// Builds a pipeline context and runs the fault-free pipeline once: the ramp
/// message over N/2 slots is encoded, encrypted, decrypted and decoded under
/// `seed`, and the recovery is kept as the baseline every later injection is
/// classified against.
///
/// `backend` is one of the `FAULTLAB_BACKEND_*` constants; `levels` and
/// `prime_bits` shape the modulus chain (the desk-scale default is 3 × 59).
/// On success `*out_context` owns the context; release it with
/// [`faultlab_context_free`].
///
/// # Safety
///
/// `out_context` must be a valid pointer to writable memory for one
/// `*mut FaultlabContext`.
#[no_mangle]
pub unsafe extern "C" fn faultlab_context_new(
    n: usize,
    delta: u64,
    levels: usize,
    prime_bits: u32,
    sigma: f64,
    backend: u32,
    seed: u64,
    out_context: *mut *mut FaultlabContext,
) -> FaultlabStatus {
    guard(|| {
        if out_context.is_null() {
            return fail(FaultlabStatus::NullArgument, "out_context is null");
        }
        let backend = match backend {
            FAULTLAB_BACKEND_TEXTBOOK => Backend::Textbook,
            FAULTLAB_BACKEND_RNS_NTT => Backend::RnsNtt,
            other => {
                return fail(
                    FaultlabStatus::InvalidArgument,
                    format!("unknown backend code {other}"),
                )
            }
        };
        let built = generate_prime_chain(n, levels, prime_bits)
            .and_then(|chain| Params::new(n, delta, chain, sigma, backend, seed))
            .and_then(CkksContext::new)
            .and_then(|ctx| {
                let message = Message::ramp(ctx.params().slot_count());
                let baseline = fault::compute_baseline(&ctx, &message)?;
                let max_slot = campaign::max_slot_error(&baseline.recovered, &message)?;
                Ok(Box::new(FaultlabContext {
                    ctx,
                    message,
                    baseline,
                    baseline_max_slot_error: max_slot,
                }))
            });
        match built {
            Ok(boxed) => {
                *out_context = Box::into_raw(boxed);
                FaultlabStatus::Ok
            }
            Err(e) => fail(FaultlabStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Frees a context returned by [`faultlab_context_new`]. Null is a no-op.
///
/// # Safety
///
/// `context` must be null or a pointer obtained from
/// [`faultlab_context_new`] that has not been freed already; it must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn faultlab_context_free(context: *mut FaultlabContext) {
    if !context.is_null() {
        drop(Box::from_raw(context));
    }
}

/// Reports the fault-free recovery error: L2 distance and worst single-slot
/// distance between the decoded message and what was encoded. Either out
/// pointer may be null to skip that value.
///
/// # Safety
///
/// `context` must be a live pointer from [`faultlab_context_new`]; non-null
/// out pointers must be valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn faultlab_baseline(
    context: *const FaultlabContext,
    out_l2_error: *mut f64,
    out_max_slot_error: *mut f64,
) -> FaultlabStatus {
    guard(|| {
        let Some(handle) = context.as_ref() else {
            return fail(FaultlabStatus::NullArgument, "context is null");
        };
        if !out_l2_error.is_null() {
            *out_l2_error = handle.baseline.l2;
        }
        if !out_max_slot_error.is_null() {
            *out_max_slot_error = handle.baseline_max_slot_error;
        }
        FaultlabStatus::Ok
    })
}

/// Re-runs the pipeline under the context's seed with exactly one bit XORed
/// and classifies the result.
///
/// `target` and `representation` are `FAULTLAB_TARGET_*` /
/// `FAULTLAB_REPR_*` constants; `limb` is ignored for
/// `FAULTLAB_REPR_BIG`. A plaintext target flips after encoding, a
/// ciphertext target after encryption. `tau_benign` is the BENIGN threshold
/// as a multiple of the baseline L2 error (2.0 is the conventional default).
///
/// On success, `*out_outcome` holds a `FAULTLAB_OUTCOME_*` value and the
/// optional error outputs hold the L2 distance of the faulted recovery from
/// the original message resp. from the fault-free recovery — both `+inf`
/// when the fault was DETECTED and there is no recovery. Addresses that
/// don't exist (wrong backend, limb or bit out of range) come back as
/// `FAULTLAB_INVALID_ARGUMENT`.
///
/// # Safety
///
/// `context` must be a live pointer from [`faultlab_context_new`];
/// `out_outcome` must be valid for writing one `uint32_t`; non-null error
/// outputs must be valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn faultlab_inject(
    context: *const FaultlabContext,
    target: u32,
    representation: u32,
    limb: u32,
    coeff_index: u64,
    bit_index: u32,
    tau_benign: f64,
    out_outcome: *mut u32,
    out_l2_error: *mut f64,
    out_l2_vs_baseline: *mut f64,
) -> FaultlabStatus {
    guard(|| {
        let Some(handle) = context.as_ref() else {
            return fail(FaultlabStatus::NullArgument, "context is null");
        };
        if out_outcome.is_null() {
            return fail(FaultlabStatus::NullArgument, "out_outcome is null");
        }
        let target = match target {
            FAULTLAB_TARGET_PLAINTEXT => Target::Plaintext,
            FAULTLAB_TARGET_C0 => Target::C0,
            FAULTLAB_TARGET_C1 => Target::C1,
            other => {
                return fail(
                    FaultlabStatus::InvalidArgument,
                    format!("unknown target code {other}"),
                )
            }
        };
        let representation = match representation {
            FAULTLAB_REPR_BIG => Representation::Big,
            FAULTLAB_REPR_RNS_LIMB => Representation::RnsLimb(limb as usize),
            FAULTLAB_REPR_NTT_LIMB => Representation::NttLimb(limb as usize),
            other => {
                return fail(
                    FaultlabStatus::InvalidArgument,
                    format!("unknown representation code {other}"),
                )
            }
        };
        if !(tau_benign.is_finite() && tau_benign > 0.0) {
            return fail(
                FaultlabStatus::InvalidArgument,
                format!("tau_benign must be finite and positive, got {tau_benign}"),
            );
        }
        let Ok(coeff_index) = usize::try_from(coeff_index) else {
            return fail(
                FaultlabStatus::InvalidArgument,
                format!("coefficient index {coeff_index} does not fit this platform"),
            );
        };
        let spec = FaultSpec {
            stage: match target {
                Target::Plaintext => Stage::PostEncode,
                Target::C0 | Target::C1 => Stage::PostEncrypt,
            },
            target,
            representation,
            coeff_index,
            bit_index,
        };
        let result = fault::run_with_baseline(
            &handle.ctx,
            &handle.message,
            Some(&spec),
            &handle.baseline,
            tau_benign,
        );
        match result {
            Ok(r) => {
                *out_outcome = match r.outcome {
                    Outcome::Benign => FAULTLAB_OUTCOME_BENIGN,
                    Outcome::Sdc => FAULTLAB_OUTCOME_SDC,
                    Outcome::Detected => FAULTLAB_OUTCOME_DETECTED,
                };
                if !out_l2_error.is_null() {
                    *out_l2_error = r.l2_error;
                }
                if !out_l2_vs_baseline.is_null() {
                    *out_l2_vs_baseline = r.l2_vs_baseline;
                }
                FaultlabStatus::Ok
            }
            Err(e) => fail(FaultlabStatus::InvalidArgument, e.to_string()),
        }
    })
}
