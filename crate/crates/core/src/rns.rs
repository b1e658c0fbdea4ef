//! Residue number system: big coefficients split across a chain of
//! word-sized primes, limb-wise arithmetic, and CRT reconstruction.
//!
//! A coefficient `p ∈ [0, Q)` with `Q = ∏ q_k` is held as its residues
//! `r_k = p mod q_k`, one 64-bit word per prime. Reconstruction computes
//!
//! ```text
//! p = ( Σ_k  r_k · [(1/Q_k) mod q_k] · Q_k ) mod Q,      Q_k = Q / q_k
//! ```
//!
//! which is also the lens for fault analysis: flipping bit `j` of residue
//! `r_k` (staying below `q_k`) moves the reconstructed coefficient by
//! `±2^j · inv_k · Q_k mod Q` — a low limb bit lands with a huge CRT weight.
//! Residues are stored as raw `u64` words on purpose: a flipped word may be
//! `>= q_k`, and whether that is caught is decided by [`RnsPoly::validate`]
//! at the decrypt/decode boundary, mirroring where a real library's
//! assertions would fire.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::ring::{BigPoly, Modulus};
use crate::zq;

/// Which basis the limb words currently live in. All limbs of one polynomial
/// share a single flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Coefficient,
    Ntt,
}

/// A chain of distinct word-sized primes with the CRT precomputation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeChain {
    primes: Vec<u64>,
    q: Modulus,
    /// Q_k = Q / q_k
    q_over: Vec<BigUint>,
    /// inv_k = (Q_k)^{-1} mod q_k
    inv: Vec<u64>,
}

impl PrimeChain {
    /// Builds a chain from explicit primes. Primality, distinctness and the
    /// word-size bound are enforced here; NTT-friendliness is *not* — it is
    /// a property of a (prime, ring dimension) pair and is checked where a
    /// transform table is built. That keeps chains like {5, 7} usable for
    /// pure CRT work.
    pub fn new(primes: Vec<u64>) -> Result<Self> {
        if primes.is_empty() {
            return Err(Error::InvalidParams("prime chain must not be empty".into()));
        }
        for &p in &primes {
            if p >= (1 << 62) {
                return Err(Error::InvalidParams(format!("prime {p} is >= 2^62")));
            }
            if !zq::is_prime(p) {
                return Err(Error::InvalidParams(format!("{p} is not prime")));
            }
        }
        let mut sorted = primes.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParams("chain primes must be distinct".into()));
        }

        let q_big: BigUint = primes.iter().map(|&p| BigUint::from(p)).product();
        let q_over: Vec<BigUint> = primes.iter().map(|&p| &q_big / BigUint::from(p)).collect();
        let inv: Vec<u64> = primes
            .iter()
            .zip(&q_over)
            .map(|(&p, qk)| {
                let qk_mod = (qk % BigUint::from(p))
                    .try_into()
                    .expect("residue fits u64");
                zq::inv_mod(qk_mod, p).expect("Q_k and q_k are coprime by construction")
            })
            .collect();
        Ok(PrimeChain {
            primes,
            q: Modulus::new(q_big)?,
            q_over,
            inv,
        })
    }

    /// Number of limbs L.
    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a constructed chain always has at least one prime
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn prime(&self, k: usize) -> u64 {
        self.primes[k]
    }

    /// The full modulus Q = ∏ q_k.
    pub fn modulus(&self) -> &Modulus {
        &self.q
    }

    /// Q_k = Q / q_k for limb k.
    pub fn q_over(&self, k: usize) -> &BigUint {
        &self.q_over[k]
    }

    /// (Q_k)^{-1} mod q_k for limb k.
    pub fn inv(&self, k: usize) -> u64 {
        self.inv[k]
    }
}

/// Deterministically picks the `l` largest primes of at most `bit_size` bits
/// that are ≡ 1 (mod 2n), scanning downward from `2^bit_size - 1`. The
/// congruence makes every chain prime NTT-friendly for ring dimension `n`.
pub fn generate_prime_chain(n: usize, l: usize, bit_size: u32) -> Result<PrimeChain> {
    if !(2..=62).contains(&bit_size) {
        return Err(Error::InvalidParams(format!(
            "prime bit size must be in [2, 62], got {bit_size}"
        )));
    }
    if l == 0 {
        return Err(Error::InvalidParams("chain length must be >= 1".into()));
    }
    if !n.is_power_of_two() {
        return Err(Error::InvalidParams(format!(
            "ring dimension must be a power of two, got {n}"
        )));
    }
    let two_n = 2 * n as u64;
    let hi = (1u64 << bit_size) - 1;
    if hi < two_n {
        return Err(Error::InvalidParams(format!(
            "no {bit_size}-bit candidates ≡ 1 mod {two_n}"
        )));
    }
    // Largest value <= hi that is ≡ 1 (mod 2n), then step down by 2n.
    let mut candidate = hi - ((hi - 1) % two_n);
    let mut primes = Vec::with_capacity(l);
    while primes.len() < l && candidate >= 2 {
        if zq::is_prime(candidate) {
            primes.push(candidate);
        }
        match candidate.checked_sub(two_n) {
            Some(next) => candidate = next,
            None => break,
        }
    }
    if primes.len() < l {
        return Err(Error::InvalidParams(format!(
            "only {} primes of <= {bit_size} bits are ≡ 1 mod {two_n}, need {l}",
            primes.len()
        )));
    }
    PrimeChain::new(primes)
}

/// L limbs of N raw 64-bit residues plus the shared domain flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RnsPoly {
    limbs: Vec<Vec<u64>>,
    domain: Domain,
}

impl RnsPoly {
    pub(crate) fn from_raw(limbs: Vec<Vec<u64>>, domain: Domain) -> Self {
        debug_assert!(!limbs.is_empty());
        debug_assert!(limbs.iter().all(|l| l.len() == limbs[0].len()));
        RnsPoly { limbs, domain }
    }

    pub fn zero(l: usize, n: usize, domain: Domain) -> Self {
        RnsPoly {
            limbs: vec![vec![0; n]; l],
            domain,
        }
    }

    pub fn n(&self) -> usize {
        self.limbs[0].len()
    }

    /// Number of limbs L.
    pub fn l(&self) -> usize {
        self.limbs.len()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn limb(&self, k: usize) -> &[u64] {
        &self.limbs[k]
    }

    pub fn word(&self, k: usize, i: usize) -> u64 {
        self.limbs[k][i]
    }

    /// Raw word write without any range check — the fault injection surface.
    pub fn set_word_raw(&mut self, k: usize, i: usize, value: u64) {
        self.limbs[k][i] = value;
    }

    /// The representation-validity predicate: every residue in `[0, q_k)`.
    /// This is what separates DETECTED faults from silent ones.
    pub fn validate(&self, chain: &PrimeChain) -> Result<()> {
        if self.l() != chain.len() {
            return Err(Error::ChainMismatch);
        }
        for (k, limb) in self.limbs.iter().enumerate() {
            let qk = chain.prime(k);
            for (i, &r) in limb.iter().enumerate() {
                if r >= qk {
                    return Err(Error::RepresentationViolation(format!(
                        "limb {k} residue {i} is {r} >= q_{k} = {qk}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Decomposes a big-coefficient polynomial into residues, limb k holding
/// `p[i] mod q_k`. Output is in the coefficient domain.
pub fn to_rns(p: &BigPoly, chain: &PrimeChain) -> RnsPoly {
    let limbs = chain
        .primes()
        .iter()
        .map(|&qk| {
            let qk_big = BigUint::from(qk);
            p.coeffs()
                .iter()
                .map(|c| (c % &qk_big).try_into().expect("residue fits u64"))
                .collect()
        })
        .collect();
    RnsPoly::from_raw(limbs, Domain::Coefficient)
}

/// CRT reconstruction: per coefficient, `p = (Σ_k r_k · inv_k · Q_k) mod Q`.
///
/// Requires the coefficient domain and fully valid residues; a residue
/// `>= q_k` is a representation violation (the DETECTED outcome), because a
/// flipped raw word must not silently masquerade as a valid smaller one.
pub fn from_rns(r: &RnsPoly, chain: &PrimeChain) -> Result<BigPoly> {
    if r.domain() != Domain::Coefficient {
        return Err(Error::DomainMismatch);
    }
    r.validate(chain)?;
    let n = r.n();
    let q = chain.modulus();
    let mut coeffs = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = BigUint::zero();
        for k in 0..chain.len() {
            // r_k · inv_k fits in u128 (both factors < 2^62).
            let scaled = r.word(k, i) as u128 * chain.inv(k) as u128;
            acc += BigUint::from(scaled) * chain.q_over(k);
        }
        coeffs.push(acc % q.value());
    }
    BigPoly::new(coeffs, q)
}

fn check_compatible(a: &RnsPoly, b: &RnsPoly, chain: &PrimeChain) -> Result<()> {
    if a.l() != chain.len() || b.l() != chain.len() {
        return Err(Error::ChainMismatch);
    }
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: b.n(),
        });
    }
    if a.domain() != b.domain() {
        return Err(Error::DomainMismatch);
    }
    Ok(())
}

/// Limb-wise addition mod q_k. Works in either domain (both are coordinate-wise).
pub fn rns_add(a: &RnsPoly, b: &RnsPoly, chain: &PrimeChain) -> Result<RnsPoly> {
    check_compatible(a, b, chain)?;
    let limbs = (0..chain.len())
        .map(|k| {
            let qk = chain.prime(k);
            a.limb(k)
                .iter()
                .zip(b.limb(k))
                .map(|(&x, &y)| zq::add_mod(x, y, qk))
                .collect()
        })
        .collect();
    Ok(RnsPoly::from_raw(limbs, a.domain()))
}

/// Limb-wise subtraction mod q_k.
pub fn rns_sub(a: &RnsPoly, b: &RnsPoly, chain: &PrimeChain) -> Result<RnsPoly> {
    check_compatible(a, b, chain)?;
    let limbs = (0..chain.len())
        .map(|k| {
            let qk = chain.prime(k);
            a.limb(k)
                .iter()
                .zip(b.limb(k))
                .map(|(&x, &y)| zq::sub_mod(x, y, qk))
                .collect()
        })
        .collect();
    Ok(RnsPoly::from_raw(limbs, a.domain()))
}

/// Coordinate-wise product mod q_k, via 128-bit intermediates. Only lawful
/// in the NTT domain, where pointwise multiplication *is* negacyclic
/// convolution of the underlying polynomials.
pub fn rns_mul_pointwise(a: &RnsPoly, b: &RnsPoly, chain: &PrimeChain) -> Result<RnsPoly> {
    check_compatible(a, b, chain)?;
    if a.domain() != Domain::Ntt {
        return Err(Error::DomainMismatch);
    }
    let limbs = (0..chain.len())
        .map(|k| {
            let qk = chain.prime(k);
            a.limb(k)
                .iter()
                .zip(b.limb(k))
                .map(|(&x, &y)| zq::mul_mod(x, y, qk))
                .collect()
        })
        .collect();
    Ok(RnsPoly::from_raw(limbs, Domain::Ntt))
}
