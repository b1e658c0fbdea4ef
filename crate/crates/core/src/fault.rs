//! Single-bit fault injection into pipeline state.
//!
//! A fault is one transient bit flip in one addressed machine word, applied
//! between pipeline stages: either to the encoded plaintext (before
//! encryption) or to one half of the ciphertext (before decryption). The
//! address names the representation the word lives in:
//!
//! * `Big` — bit `j` of the arbitrary-precision coefficient `i` (textbook
//!   backend). The flip changes the integer by ±2^j.
//! * `RnsLimb(k)` — bit `j` of the 64-bit residue word `(k, i)` in the
//!   coefficient domain. By CRT reconstruction a ±2^j residue change moves
//!   the integer coefficient by `±2^j · (Q/q_k)^{-1}_{q_k} · (Q/q_k) mod Q` —
//!   typically a quantity on the order of Q itself.
//! * `NttLimb(k)` — the same word after the forward NTT. The inverse
//!   transform spreads a one-word flip across all N coefficients of limb k.
//!
//! Running the same seeded pipeline with and without the fault yields the
//! outcome taxonomy: DETECTED when decrypt/decode refuses the corrupted
//! representation (`residue >= q_k`, `coefficient >= Q`), BENIGN when the
//! recovered message error stays within `tau` times the fault-free error,
//! SDC (silent data corruption) otherwise.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::campaign::{l2_error, max_slot_error};
use crate::ckks::{
    self, Backend, BackendPoly, CkksContext, Message,
};
use crate::error::{Error, Result};

/// Pipeline stage after which the flip is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    PostEncode,
    PostEncrypt,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::PostEncode => "POST_ENCODE",
            Stage::PostEncrypt => "POST_ENCRYPT",
        }
    }
}

/// Which piece of state the flip lands in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Plaintext,
    C0,
    C1,
}

impl Target {
    pub fn as_str(self) -> &'static str {
        match self {
            Target::Plaintext => "PLAINTEXT",
            Target::C0 => "C0",
            Target::C1 => "C1",
        }
    }

    /// The only stage at which this target exists.
    pub fn stage(self) -> Stage {
        match self {
            Target::Plaintext => Stage::PostEncode,
            Target::C0 | Target::C1 => Stage::PostEncrypt,
        }
    }

    fn sort_rank(self) -> u8 {
        match self {
            Target::Plaintext => 0,
            Target::C0 => 1,
            Target::C1 => 2,
        }
    }
}

/// The word-level representation the bit index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Representation {
    /// Arbitrary-precision coefficient (textbook backend).
    Big,
    /// Coefficient-domain residue word of limb `k` (RNS backend).
    RnsLimb(usize),
    /// NTT-domain residue word of limb `k` (RNS backend).
    NttLimb(usize),
}

impl Representation {
    pub fn kind_str(self) -> &'static str {
        match self {
            Representation::Big => "BIG",
            Representation::RnsLimb(_) => "RNS_LIMB",
            Representation::NttLimb(_) => "NTT_LIMB",
        }
    }

    /// The limb index, when the representation has one.
    pub fn limb(self) -> Option<usize> {
        match self {
            Representation::Big => None,
            Representation::RnsLimb(k) | Representation::NttLimb(k) => Some(k),
        }
    }

    fn sort_rank(self) -> (u8, usize) {
        match self {
            Representation::Big => (0, 0),
            Representation::RnsLimb(k) => (1, k),
            Representation::NttLimb(k) => (2, k),
        }
    }
}

/// A fully addressed single-bit fault.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FaultSpec {
    pub stage: Stage,
    pub target: Target,
    pub representation: Representation,
    pub coeff_index: usize,
    pub bit_index: u32,
}

impl FaultSpec {
    /// Checks the address against the context: stage/target pairing,
    /// representation/backend pairing, and coefficient/limb/bit bounds.
    pub fn validate(&self, ctx: &CkksContext) -> Result<()> {
        let params = ctx.params();
        if self.target.stage() != self.stage {
            return Err(Error::InvalidParams(format!(
                "target {} exists at stage {}, not {}",
                self.target.as_str(),
                self.target.stage().as_str(),
                self.stage.as_str()
            )));
        }
        if self.coeff_index >= params.n {
            return Err(Error::AddressOutOfRange {
                what: "coefficient index",
                value: self.coeff_index as u64,
                bound: params.n as u64,
            });
        }
        match self.representation {
            Representation::Big => {
                if params.backend != Backend::Textbook {
                    return Err(Error::InvalidParams(
                        "BIG faults require the textbook backend".into(),
                    ));
                }
                let bits = params.modulus().bits();
                if u64::from(self.bit_index) >= bits {
                    return Err(Error::AddressOutOfRange {
                        what: "bit index",
                        value: u64::from(self.bit_index),
                        bound: bits,
                    });
                }
            }
            Representation::RnsLimb(k) | Representation::NttLimb(k) => {
                if params.backend != Backend::RnsNtt {
                    return Err(Error::InvalidParams(
                        "limb faults require the RNS backend".into(),
                    ));
                }
                if k >= params.chain.len() {
                    return Err(Error::AddressOutOfRange {
                        what: "limb index",
                        value: k as u64,
                        bound: params.chain.len() as u64,
                    });
                }
                if self.bit_index >= 64 {
                    return Err(Error::AddressOutOfRange {
                        what: "bit index",
                        value: u64::from(self.bit_index),
                        bound: 64,
                    });
                }
            }
        }
        Ok(())
    }

    /// Total order used to emit campaign rows deterministically:
    /// target, representation, limb, coefficient, bit.
    pub fn sort_key(&self) -> (u8, u8, usize, usize, u32) {
        let (repr, limb) = self.representation.sort_rank();
        (
            self.target.sort_rank(),
            repr,
            limb,
            self.coeff_index,
            self.bit_index,
        )
    }
}

/// How the run ended, relative to the fault-free run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Benign,
    Sdc,
    Detected,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Benign => "BENIGN",
            Outcome::Sdc => "SDC",
            Outcome::Detected => "DETECTED",
        }
    }
}

/// Benign threshold: a faulted run whose message-space error is within this
/// factor of the fault-free error is indistinguishable from noise.
pub const DEFAULT_TAU_BENIGN: f64 = 2.0;

/// Floor for the baseline in the benign comparison, so a degenerate setup
/// with zero fault-free error still classifies an exact recovery as benign.
pub const BENIGN_EPS: f64 = 1e-30;

/// `DETECTED` if the pipeline refused the representation; `BENIGN` if
/// `l2_error <= tau · max(baseline_l2, eps)`; `SDC` otherwise.
pub fn classify(l2_error: f64, baseline_l2: f64, detected: bool, tau: f64) -> Outcome {
    if detected {
        Outcome::Detected
    } else if l2_error <= tau * baseline_l2.max(BENIGN_EPS) {
        Outcome::Benign
    } else {
        Outcome::Sdc
    }
}

/// Everything observable from one injection run. Errors are measured in
/// message space: `l2_error` and `max_slot_error` against the original
/// message, `l2_vs_baseline` against the fault-free recovery (isolating the
/// fault's contribution from the scheme's own noise). All three are infinite
/// when the run was DETECTED and no message was recovered.
#[derive(Debug, Clone)]
pub struct InjectionResult {
    pub recovered: Option<Message>,
    pub outcome: Outcome,
    pub l2_error: f64,
    pub max_slot_error: f64,
    pub l2_vs_baseline: f64,
    pub baseline_l2: f64,
}

/// The fault-free run against which injections are judged.
#[derive(Debug, Clone)]
pub struct Baseline {
    pub recovered: Message,
    pub l2: f64,
}

/// Applies the flip to one polynomial, in the representation the address names.
/// The result is *not* validated — carrying a possibly out-of-range word
/// forward is exactly the behavior under study. A coefficient-domain flip on
/// NTT-domain state transforms back first (and leaves the state in the
/// coefficient domain, as a real implementation interrupted mid-layout
/// would); an NTT-domain flip transforms forward first if needed.
pub fn apply_fault(
    ctx: &CkksContext,
    poly: &BackendPoly,
    spec: &FaultSpec,
) -> Result<BackendPoly> {
    spec.validate(ctx)?;
    match (spec.representation, poly) {
        (Representation::Big, BackendPoly::Big(p)) => {
            let mut p = p.clone();
            let mut c = p.coeff(spec.coeff_index).clone();
            let bit = u64::from(spec.bit_index);
            c.set_bit(bit, !c.bit(bit));
            p.set_coeff_raw(spec.coeff_index, c);
            Ok(BackendPoly::Big(p))
        }
        (Representation::RnsLimb(k), BackendPoly::Rns(r)) => {
            let mut r = ctx.rns_to_coeff_domain(r);
            let word = r.limb(k)[spec.coeff_index] ^ (1u64 << spec.bit_index);
            r.set_word_raw(k, spec.coeff_index, word);
            Ok(BackendPoly::Rns(r))
        }
        (Representation::NttLimb(k), BackendPoly::Rns(r)) => {
            let mut r = ctx.rns_to_ntt_domain(r);
            let word = r.limb(k)[spec.coeff_index] ^ (1u64 << spec.bit_index);
            r.set_word_raw(k, spec.coeff_index, word);
            Ok(BackendPoly::Rns(r))
        }
        _ => Err(Error::InvalidParams(
            "fault representation does not match the polynomial's backend".into(),
        )),
    }
}

/// Runs the full pipeline (keygen → encode → encrypt → decrypt → decode)
/// from the context's seed, applying the fault at its stage if given.
/// Returns `None` when the corruption was caught by a representation check.
fn execute(ctx: &CkksContext, z: &Message, spec: Option<&FaultSpec>) -> Result<Option<Message>> {
    let mut rng = ChaCha20Rng::seed_from_u64(ctx.params().seed);
    let (sk, pk) = ckks::keygen(ctx, &mut rng)?;
    let mut pt = ckks::encode(ctx, z)?;
    if let Some(f) = spec {
        if f.stage == Stage::PostEncode {
            pt.poly = apply_fault(ctx, &pt.poly, f)?;
        }
    }
    let mut ct = ckks::encrypt(ctx, &pt, &pk, &mut rng)?;
    if let Some(f) = spec {
        if f.stage == Stage::PostEncrypt {
            match f.target {
                Target::C0 => ct.c0 = apply_fault(ctx, &ct.c0, f)?,
                Target::C1 => ct.c1 = apply_fault(ctx, &ct.c1, f)?,
                Target::Plaintext => unreachable!("stage/target pairing was validated"),
            }
        }
    }
    let m = match ckks::decrypt(ctx, &ct, &sk) {
        Ok(m) => m,
        Err(e) if e.is_detected() => return Ok(None),
        Err(e) => return Err(e),
    };
    match ckks::decode(ctx, &m) {
        Ok(rec) => Ok(Some(rec)),
        Err(e) if e.is_detected() => Ok(None),
        Err(e) => Err(e),
    }
}

/// Runs the pipeline fault-free and records the recovery it produces.
pub fn compute_baseline(ctx: &CkksContext, z: &Message) -> Result<Baseline> {
    match execute(ctx, z, None)? {
        Some(recovered) => {
            let l2 = l2_error(&recovered, z)?;
            Ok(Baseline { recovered, l2 })
        }
        None => Err(Error::InvalidParams(
            "fault-free pipeline failed its own representation checks".into(),
        )),
    }
}

/// One injection against a precomputed baseline — the workhorse for sweeps,
/// where the baseline is shared across thousands of addresses.
pub fn run_with_baseline(
    ctx: &CkksContext,
    z: &Message,
    spec: Option<&FaultSpec>,
    baseline: &Baseline,
    tau: f64,
) -> Result<InjectionResult> {
    if let Some(f) = spec {
        f.validate(ctx)?;
    }
    match execute(ctx, z, spec)? {
        None => Ok(InjectionResult {
            recovered: None,
            outcome: Outcome::Detected,
            l2_error: f64::INFINITY,
            max_slot_error: f64::INFINITY,
            l2_vs_baseline: f64::INFINITY,
            baseline_l2: baseline.l2,
        }),
        Some(rec) => {
            let l2 = l2_error(&rec, z)?;
            let max_err = max_slot_error(&rec, z)?;
            let vs_baseline = l2_error(&rec, &baseline.recovered)?;
            let outcome = classify(l2, baseline.l2, false, tau);
            Ok(InjectionResult {
                recovered: Some(rec),
                outcome,
                l2_error: l2,
                max_slot_error: max_err,
                l2_vs_baseline: vs_baseline,
                baseline_l2: baseline.l2,
            })
        }
    }
}

/// Single-shot convenience: computes the baseline, then runs the injection
/// with the default benign threshold.
pub fn run_pipeline_with_fault(
    ctx: &CkksContext,
    z: &Message,
    spec: Option<&FaultSpec>,
) -> Result<InjectionResult> {
    let baseline = compute_baseline(ctx, z)?;
    run_with_baseline(ctx, z, spec, &baseline, DEFAULT_TAU_BENIGN)
}
