//! Minimal CKKS: encode/decode through the canonical embedding, key
//! generation, public-key encryption, and decryption `m' = (c0 + c1·s) mod Q`
//! — with two interchangeable backends.
//!
//! * `Backend::Textbook` keeps every polynomial as a [`BigPoly`] and
//!   multiplies by the schoolbook rule.
//! * `Backend::RnsNtt` keeps plaintexts and ciphertext halves as RNS limbs in
//!   the NTT domain, so ring multiplication is coordinate-wise.
//!
//! All randomness is drawn once, in plain-integer form, and then lifted into
//! the active representation ([`ring`]'s samplers). Given equal seeds the two
//! backends therefore produce *integer-identical* keys, ciphertexts and
//! decryptions — the optimized path is tested against the textbook path as an
//! exact oracle, never statistically.
//!
//! The scheme is single-level (one fixed Q, no rescaling) and implements no
//! homomorphic operations; it exists to study how the encrypt→decrypt→decode
//! pipeline transforms single-bit state corruption. Decrypt and decode begin
//! with representation-validity checks (`residue < q_k`, `coefficient < Q`),
//! and those checks are the only source of the DETECTED fault outcome.
//!
//! Encoding convention: a message is N/2 complex slots. Slot `j` is the
//! polynomial evaluated at `ζ^(5^j mod 2N)` where `ζ = e^(iπ/N)`; encode is
//! the inverse map scaled by Δ and rounded. Δ is restricted to powers of two
//! so a flipped coefficient bit `j` moves a slot by exactly `2^j / Δ`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;

use crate::error::{Error, Result};
use crate::ntt::{ntt_forward, ntt_inverse, TwiddleTable};
use crate::ring::{
    self, centered_lift, poly_add, poly_negacyclic_mul, poly_sub, BigPoly, Modulus,
};
use crate::rns::{self, Domain, PrimeChain, RnsPoly};

/// Which arithmetic layer carries the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    Textbook,
    RnsNtt,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Textbook => "TEXTBOOK",
            Backend::RnsNtt => "RNS_NTT",
        }
    }
}

/// Extra headroom demanded between the scaled message and Q/2, so the
/// fault-free signal (message times Δ, plus noise) can never wrap.
const MESSAGE_MARGIN_BITS: u32 = 20;

/// Scheme parameters. `Q` is always the product of `chain`, for both
/// backends, so they share one ring exactly.
#[derive(Debug, Clone)]
pub struct Params {
    pub n: usize,
    /// Scale factor Δ, a power of two.
    pub delta: u64,
    pub chain: PrimeChain,
    /// Noise standard deviation; 0 is allowed for degenerate test setups.
    pub sigma: f64,
    pub backend: Backend,
    pub seed: u64,
}

impl Params {
    pub fn new(
        n: usize,
        delta: u64,
        chain: PrimeChain,
        sigma: f64,
        backend: Backend,
        seed: u64,
    ) -> Result<Self> {
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::InvalidParams(format!(
                "ring dimension must be a power of two >= 2, got {n}"
            )));
        }
        if delta < 2 || !delta.is_power_of_two() {
            return Err(Error::InvalidParams(format!(
                "scale factor must be a power of two >= 2, got {delta}"
            )));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "sigma must be finite and >= 0, got {sigma}"
            )));
        }
        if backend == Backend::RnsNtt {
            let two_n = 2 * n as u64;
            for &q in chain.primes() {
                if (q - 1) % two_n != 0 {
                    return Err(Error::NotNttFriendly { q, two_n });
                }
            }
        }
        Ok(Params {
            n,
            delta,
            chain,
            sigma,
            backend,
            seed,
        })
    }

    /// The desk-scale default: Δ = 2^40, σ = 3.2, three 59-bit primes
    /// (Q just below 2^177).
    pub fn desk_scale(n: usize, backend: Backend, seed: u64) -> Result<Self> {
        let chain = rns::generate_prime_chain(n, 3, 59)?;
        Params::new(n, 1 << 40, chain, 3.2, backend, seed)
    }

    pub fn slot_count(&self) -> usize {
        self.n / 2
    }

    pub fn modulus(&self) -> &Modulus {
        self.chain.modulus()
    }
}

/// N/2 complex slots — what the user of the scheme reads and writes.
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    slots: Vec<Complex64>,
}

impl Message {
    pub fn new(slots: Vec<Complex64>) -> Self {
        Message { slots }
    }

    pub fn from_reals(values: &[f64]) -> Self {
        Message {
            slots: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    /// The fixed, non-degenerate default used by sweeps: slot k holds
    /// `(k+1) / slot_count`, a gentle real-valued ramp in (0, 1].
    pub fn ramp(slot_count: usize) -> Self {
        Message {
            slots: (0..slot_count)
                .map(|k| Complex64::new((k + 1) as f64 / slot_count as f64, 0.0))
                .collect(),
        }
    }

    pub fn slots(&self) -> &[Complex64] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

/// A polynomial in whichever representation the active backend uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendPoly {
    Big(BigPoly),
    Rns(RnsPoly),
}

impl BackendPoly {
    pub fn n(&self) -> usize {
        match self {
            BackendPoly::Big(p) => p.n(),
            BackendPoly::Rns(r) => r.n(),
        }
    }
}

/// Encoded message: the scaled integer polynomial plus the scale it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct Plaintext {
    pub poly: BackendPoly,
    pub delta: u64,
}

#[derive(Debug, Clone)]
pub struct SecretKey {
    /// Ternary secret s; NTT-domain limbs under the RNS backend.
    pub s: BackendPoly,
}

#[derive(Debug, Clone)]
pub struct PublicKey {
    /// b = -a·s + e mod Q
    pub b: BackendPoly,
    /// uniform mod Q
    pub a: BackendPoly,
}

/// The encryption of a plaintext: `(c0, c1)` with
/// `c0 = b·u + e0 + p`, `c1 = a·u + e1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ciphertext {
    pub c0: BackendPoly,
    pub c1: BackendPoly,
    pub delta: u64,
}

/// Immutable per-parameter state: embedding tables and (for the RNS backend)
/// one twiddle table per limb prime. Safe to share across threads; all
/// operations below are pure given an explicit RNG.
pub struct CkksContext {
    params: Params,
    /// ζ^t for t in [0, 2N), ζ = e^(iπ/N) the primitive complex 2N-th root.
    zeta: Vec<Complex64>,
    /// σ_j = 5^j mod 2N for j < N/2 — the slot evaluation orbit.
    orbit: Vec<usize>,
    /// Twiddle tables per limb; empty for the textbook backend.
    tables: Vec<TwiddleTable>,
}

impl CkksContext {
    pub fn new(params: Params) -> Result<Self> {
        let n = params.n;
        let two_n = 2 * n;
        let zeta = (0..two_n)
            .map(|t| {
                let angle = std::f64::consts::PI * t as f64 / n as f64;
                Complex64::new(angle.cos(), angle.sin())
            })
            .collect();
        let mut orbit = Vec::with_capacity(n / 2);
        let mut sigma_j = 1usize;
        for _ in 0..n / 2 {
            orbit.push(sigma_j);
            sigma_j = (sigma_j * 5) % two_n;
        }
        let tables = match params.backend {
            Backend::Textbook => Vec::new(),
            Backend::RnsNtt => params
                .chain
                .primes()
                .iter()
                .map(|&q| TwiddleTable::new(q, n))
                .collect::<Result<_>>()?,
        };
        Ok(CkksContext {
            params,
            zeta,
            orbit,
            tables,
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    fn q(&self) -> &Modulus {
        self.params.modulus()
    }

    fn chain(&self) -> &PrimeChain {
        &self.params.chain
    }

    /// ζ raised to the power `e mod 2N` (table lookup; 2N is a power of two).
    fn zeta_pow(&self, e: usize) -> Complex64 {
        self.zeta[e & (2 * self.params.n - 1)]
    }

    /// Lifts an integer-form polynomial into the active representation
    /// (identity for the textbook backend; residues + forward NTT otherwise).
    pub fn to_backend(&self, p: &BigPoly) -> BackendPoly {
        match self.params.backend {
            Backend::Textbook => BackendPoly::Big(p.clone()),
            Backend::RnsNtt => {
                let coeff = rns::to_rns(p, self.chain());
                BackendPoly::Rns(self.rns_forward(&coeff))
            }
        }
    }

    fn rns_forward(&self, r: &RnsPoly) -> RnsPoly {
        debug_assert_eq!(r.domain(), Domain::Coefficient);
        let limbs = (0..r.l())
            .map(|k| ntt_forward(r.limb(k), &self.tables[k]).expect("limb length matches"))
            .collect();
        RnsPoly::from_raw(limbs, Domain::Ntt)
    }

    fn rns_backward(&self, r: &RnsPoly) -> RnsPoly {
        debug_assert_eq!(r.domain(), Domain::Ntt);
        let limbs = (0..r.l())
            .map(|k| ntt_inverse(r.limb(k), &self.tables[k]).expect("limb length matches"))
            .collect();
        RnsPoly::from_raw(limbs, Domain::Coefficient)
    }

    /// Ensures NTT domain, transforming if needed. Unreduced words (possible
    /// after a coefficient-domain fault) enter the butterflies reduced mod
    /// q_k — silently, by design: this is the SDC path, not the DETECTED one.
    pub(crate) fn rns_to_ntt_domain(&self, r: &RnsPoly) -> RnsPoly {
        match r.domain() {
            Domain::Ntt => r.clone(),
            Domain::Coefficient => self.rns_forward(r),
        }
    }

    pub(crate) fn rns_to_coeff_domain(&self, r: &RnsPoly) -> RnsPoly {
        match r.domain() {
            Domain::Coefficient => r.clone(),
            Domain::Ntt => self.rns_backward(r),
        }
    }

    /// Validates a backend polynomial's representation and returns its
    /// canonical integer form. This is the DETECTED checkpoint: any residue
    /// `>= q_k` or coefficient `>= Q` surfaces as a representation violation.
    pub fn integer_form(&self, poly: &BackendPoly) -> Result<BigPoly> {
        match poly {
            BackendPoly::Big(p) => {
                p.validate(self.q())?;
                Ok(p.clone())
            }
            BackendPoly::Rns(r) => {
                r.validate(self.chain())?;
                let coeff = self.rns_to_coeff_domain(r);
                rns::from_rns(&coeff, self.chain())
            }
        }
    }
}

/// Encodes N/2 complex slots into the scaled integer polynomial
/// `p = round(Δ · embedInverse(z))`, lifted to `[0, Q)`.
pub fn encode(ctx: &CkksContext, z: &Message) -> Result<Plaintext> {
    let params = ctx.params();
    let n = params.n;
    let slots = params.slot_count();
    if z.len() != slots {
        return Err(Error::DimensionMismatch {
            expected: slots,
            got: z.len(),
        });
    }

    // No-wrap margin: Δ · max|z| · 2^margin must stay below Q/2, and the
    // scaled coefficients must stay well inside f64's exact-integer range.
    let delta_f = params.delta as f64;
    let q_f = params.modulus().value().to_f64().unwrap_or(f64::INFINITY);
    let limit = (q_f / (2.0 * delta_f * (1u64 << MESSAGE_MARGIN_BITS) as f64))
        .min(2f64.powi(52) / delta_f);
    let max_mag = z.slots().iter().map(|s| s.norm()).fold(0.0, f64::max);
    if !(max_mag <= limit) {
        return Err(Error::InvalidParams(format!(
            "message magnitude {max_mag} exceeds the no-wrap limit {limit} for Δ = {}",
            params.delta
        )));
    }

    // p_i = (2Δ/N) · Re Σ_j z_j ζ^(-i·σ_j)
    let scale = 2.0 * delta_f / n as f64;
    let two_n = 2 * n;
    let values: Vec<i64> = (0..n)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &sigma_j) in ctx.orbit.iter().enumerate() {
                let idx = (i * sigma_j) & (two_n - 1);
                acc += z.slots()[j] * ctx.zeta_pow(two_n - idx);
            }
            (scale * acc.re).round() as i64
        })
        .collect();

    let integer = BigPoly::from_signed(&values, ctx.q());
    Ok(Plaintext {
        poly: ctx.to_backend(&integer),
        delta: params.delta,
    })
}

/// Decodes a plaintext: validate the representation (DETECTED checkpoint),
/// center the coefficients, divide by Δ, evaluate at the slot orbit.
pub fn decode(ctx: &CkksContext, pt: &Plaintext) -> Result<Message> {
    let params = ctx.params();
    if pt.poly.n() != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            got: pt.poly.n(),
        });
    }
    let integer = ctx.integer_form(&pt.poly)?;

    let delta_f = pt.delta as f64;
    let centered: Vec<f64> = integer
        .coeffs()
        .iter()
        .map(|c| {
            let v = centered_lift(c, ctx.q()).expect("validated above");
            big_int_to_f64(&v)
        })
        .collect();

    let two_n = 2 * params.n;
    let slots = ctx
        .orbit
        .iter()
        .map(|&sigma_j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &c) in centered.iter().enumerate() {
                acc += c * ctx.zeta_pow((i * sigma_j) & (two_n - 1));
            }
            acc / delta_f
        })
        .collect();
    Ok(Message::new(slots))
}

fn big_int_to_f64(v: &BigInt) -> f64 {
    v.to_f64().unwrap_or(if v.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

/// Key generation. Draw order is pinned (s, a, e) so both backends consume
/// the RNG identically: s ternary, a uniform mod Q, e rounded Gaussian;
/// b = e - a·s mod Q.
pub fn keygen<R: Rng>(ctx: &CkksContext, rng: &mut R) -> Result<(SecretKey, PublicKey)> {
    let params = ctx.params();
    let q = ctx.q();
    let s = ring::sample_ternary(params.n, q, rng);
    let a = ring::sample_uniform(params.n, q, rng);
    let e = ring::sample_gaussian(params.n, params.sigma, q, rng);

    let b = poly_sub(&e, &poly_negacyclic_mul(&a, &s, q)?, q)?;
    Ok((
        SecretKey {
            s: ctx.to_backend(&s),
        },
        PublicKey {
            b: ctx.to_backend(&b),
            a: ctx.to_backend(&a),
        },
    ))
}

/// Encryption with explicit randomness: `c0 = b·u + e0 + p`, `c1 = a·u + e1`.
/// Exposed so degenerate cases (u = 0, zero noise) are constructible in
/// tests; [`encrypt`] draws `u, e0, e1` and delegates here.
pub fn encrypt_with_components(
    ctx: &CkksContext,
    pt: &Plaintext,
    pk: &PublicKey,
    u: &BigPoly,
    e0: &BigPoly,
    e1: &BigPoly,
) -> Result<Ciphertext> {
    let params = ctx.params();
    let q = ctx.q();
    match (&pt.poly, &pk.b, &pk.a) {
        (BackendPoly::Big(p), BackendPoly::Big(b), BackendPoly::Big(a)) => {
            let c0 = poly_add(&poly_add(&poly_negacyclic_mul(b, u, q)?, e0, q)?, p, q)?;
            let c1 = poly_add(&poly_negacyclic_mul(a, u, q)?, e1, q)?;
            Ok(Ciphertext {
                c0: BackendPoly::Big(c0),
                c1: BackendPoly::Big(c1),
                delta: pt.delta,
            })
        }
        (BackendPoly::Rns(p), BackendPoly::Rns(b), BackendPoly::Rns(a)) => {
            let chain = ctx.chain();
            // A post-encode fault may have left the plaintext in the
            // coefficient domain (possibly with unreduced words); it is
            // carried forward mod q_k without any validity check here —
            // encryption is not a detection point.
            let p_ntt = ctx.rns_to_ntt_domain(p);
            let lift = |x: &BigPoly| -> RnsPoly {
                ctx.rns_forward(&rns::to_rns(x, chain))
            };
            let (u, e0, e1) = (lift(u), lift(e0), lift(e1));
            let c0 = rns::rns_add(
                &rns::rns_add(&rns::rns_mul_pointwise(b, &u, chain)?, &e0, chain)?,
                &p_ntt,
                chain,
            )?;
            let c1 = rns::rns_add(&rns::rns_mul_pointwise(a, &u, chain)?, &e1, chain)?;
            Ok(Ciphertext {
                c0: BackendPoly::Rns(c0),
                c1: BackendPoly::Rns(c1),
                delta: pt.delta,
            })
        }
        _ => Err(Error::InvalidParams(
            "plaintext and key representations do not match the backend".into(),
        )),
    }
    .map(|ct| {
        debug_assert_eq!(ct.c0.n(), params.n);
        ct
    })
}

/// Public-key encryption. Draw order pinned: u ternary, then Gaussians e0, e1.
pub fn encrypt<R: Rng>(
    ctx: &CkksContext,
    pt: &Plaintext,
    pk: &PublicKey,
    rng: &mut R,
) -> Result<Ciphertext> {
    let params = ctx.params();
    let q = ctx.q();
    let u = ring::sample_ternary(params.n, q, rng);
    let e0 = ring::sample_gaussian(params.n, params.sigma, q, rng);
    let e1 = ring::sample_gaussian(params.n, params.sigma, q, rng);
    encrypt_with_components(ctx, pt, pk, &u, &e0, &e1)
}

/// Decryption `m' = (c0 + c1·s) mod Q`.
///
/// Entry begins with the representation-validity check on both halves — the
/// analog of a production library's internal assertions. A raw word pushed
/// to or above its modulus by a fault is reported as a representation
/// violation here, which the fault harness classifies as DETECTED.
pub fn decrypt(ctx: &CkksContext, ct: &Ciphertext, sk: &SecretKey) -> Result<Plaintext> {
    let q = ctx.q();
    match (&ct.c0, &ct.c1, &sk.s) {
        (BackendPoly::Big(c0), BackendPoly::Big(c1), BackendPoly::Big(s)) => {
            c0.validate(q)?;
            c1.validate(q)?;
            let m = poly_add(c0, &poly_negacyclic_mul(c1, s, q)?, q)?;
            Ok(Plaintext {
                poly: BackendPoly::Big(m),
                delta: ct.delta,
            })
        }
        (BackendPoly::Rns(c0), BackendPoly::Rns(c1), BackendPoly::Rns(s)) => {
            let chain = ctx.chain();
            c0.validate(chain)?;
            c1.validate(chain)?;
            // Optimized path: pointwise multiply-and-add in the NTT domain,
            // then one inverse transform back to coefficients.
            let c0 = ctx.rns_to_ntt_domain(c0);
            let c1 = ctx.rns_to_ntt_domain(c1);
            let m_ntt = rns::rns_add(&c0, &rns::rns_mul_pointwise(&c1, s, chain)?, chain)?;
            Ok(Plaintext {
                poly: BackendPoly::Rns(ctx.rns_backward(&m_ntt)),
                delta: ct.delta,
            })
        }
        _ => Err(Error::InvalidParams(
            "ciphertext and key representations do not match".into(),
        )),
    }
}
