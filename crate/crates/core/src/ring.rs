//! Exact arithmetic in the negacyclic ring `Z_Q[X]/(X^N+1)` with
//! arbitrary-precision coefficients.
//!
//! This is the textbook backend and, just as importantly, the brute-force
//! oracle the optimized RNS/NTT path is tested against. Multiplication is
//! deliberately the schoolbook O(N²) rule — readable, unarguably correct,
//! and fast enough at desk scale because multiplications in this scheme
//! always pair a dense polynomial with a ternary one (secret keys and
//! encryption randomness have coefficients in {-1, 0, 1} mod Q), for which
//! the inner loop degenerates to big-integer add/sub.
//!
//! Coefficients are stored canonically in `[0, Q)`; the centered
//! representation exists only at the decode boundary ([`centered_lift`]).
//! A polynomial *can* temporarily hold a coefficient `>= Q` — that is the
//! whole point of the fault harness — so validity is an explicit check
//! ([`BigPoly::validate`]) at pipeline entry points, not a type invariant.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};

/// The ring modulus Q. In this crate Q is always the product of the active
/// RNS prime chain, even when only the textbook backend is in use, so both
/// backends share one ring and can be compared exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Modulus {
    q: BigUint,
}

impl Modulus {
    pub fn new(q: BigUint) -> Result<Self> {
        if q < BigUint::from(2u32) {
            return Err(Error::InvalidParams(format!("modulus must be >= 2, got {q}")));
        }
        Ok(Modulus { q })
    }

    pub fn value(&self) -> &BigUint {
        &self.q
    }

    /// Bit length of Q — the exclusive upper bound for big-representation
    /// fault bit indices.
    pub fn bits(&self) -> u64 {
        self.q.bits()
    }
}

/// Polynomial of degree < N over Z_Q, N a power of two.
///
/// N = 1 is allowed (the ring collapses to Z_Q itself, with X = -1); it keeps
/// single-coefficient arithmetic examples expressible. The encryption scheme
/// itself requires N >= 2 and enforces that in its own parameter validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigPoly {
    coeffs: Vec<BigUint>,
}

impl BigPoly {
    /// Builds a polynomial and checks every coefficient is in `[0, Q)`.
    pub fn new(coeffs: Vec<BigUint>, q: &Modulus) -> Result<Self> {
        if !coeffs.len().is_power_of_two() {
            return Err(Error::InvalidParams(format!(
                "ring dimension must be a power of two, got {}",
                coeffs.len()
            )));
        }
        let poly = BigPoly { coeffs };
        poly.validate(q)?;
        Ok(poly)
    }

    pub fn zero(n: usize) -> Self {
        assert!(n.is_power_of_two(), "ring dimension must be a power of two");
        BigPoly {
            coeffs: vec![BigUint::zero(); n],
        }
    }

    /// Lifts signed integers into `[0, Q)` (so -1 becomes Q-1).
    pub fn from_signed(values: &[i64], q: &Modulus) -> Self {
        assert!(values.len().is_power_of_two());
        let coeffs = values
            .iter()
            .map(|&v| {
                let m = BigUint::from(v.unsigned_abs()) % q.value();
                if v < 0 && !m.is_zero() {
                    q.value() - m
                } else {
                    m
                }
            })
            .collect();
        BigPoly { coeffs }
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &BigUint {
        &self.coeffs[i]
    }

    /// Raw coefficient write, *without* range checking. This is the fault
    /// harness's injection surface: a bit flip may push a coefficient to or
    /// above Q, and downstream validity checks are what should notice.
    pub fn set_coeff_raw(&mut self, i: usize, value: BigUint) {
        self.coeffs[i] = value;
    }

    /// The representation-validity predicate: every coefficient in `[0, Q)`.
    /// Decrypt/decode run this at entry and surface a violation as the
    /// DETECTED outcome.
    pub fn validate(&self, q: &Modulus) -> Result<()> {
        for (i, c) in self.coeffs.iter().enumerate() {
            if c >= q.value() {
                return Err(Error::RepresentationViolation(format!(
                    "coefficient {i} is {c} >= Q"
                )));
            }
        }
        Ok(())
    }
}

fn check_same_n(a: &BigPoly, b: &BigPoly) -> Result<usize> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: b.n(),
        });
    }
    Ok(a.n())
}

/// `(a + b) mod Q`, coefficient-wise.
pub fn poly_add(a: &BigPoly, b: &BigPoly, q: &Modulus) -> Result<BigPoly> {
    let n = check_same_n(a, b)?;
    let coeffs = (0..n)
        .map(|i| (&a.coeffs[i] + &b.coeffs[i]) % q.value())
        .collect();
    Ok(BigPoly { coeffs })
}

/// `(a - b) mod Q`, coefficient-wise.
pub fn poly_sub(a: &BigPoly, b: &BigPoly, q: &Modulus) -> Result<BigPoly> {
    let n = check_same_n(a, b)?;
    let coeffs = (0..n)
        .map(|i| {
            let bi = &b.coeffs[i] % q.value();
            let ai = &a.coeffs[i] % q.value();
            if ai >= bi {
                ai - bi
            } else {
                q.value() - bi + ai
            }
        })
        .collect();
    Ok(BigPoly { coeffs })
}

/// How a coefficient behaves as a multiplier. 0, 1 and Q-1 (= -1) need no
/// big-integer product at all, and they dominate in practice because key and
/// encryption randomness is ternary.
enum MulKind {
    Zero,
    One,
    MinusOne,
    General,
}

fn classify(c: &BigUint, q_minus_1: &BigUint) -> MulKind {
    if c.is_zero() {
        MulKind::Zero
    } else if c.is_one() {
        MulKind::One
    } else if c == q_minus_1 {
        MulKind::MinusOne
    } else {
        MulKind::General
    }
}

/// Schoolbook negacyclic product: `a · b mod (X^N + 1, Q)`.
///
/// A term landing on `X^{i+j}` with `i+j >= N` wraps to position `i+j-N`
/// with its sign negated (because `X^N = -1`). This function is the
/// reference oracle for the NTT path; keep it boring.
pub fn poly_negacyclic_mul(a: &BigPoly, b: &BigPoly, q: &Modulus) -> Result<BigPoly> {
    let n = check_same_n(a, b)?;
    let q_minus_1 = q.value() - BigUint::one();

    // Iterate over the operand with more trivial multipliers; the product is
    // commutative so this only affects speed.
    let trivial_count = |p: &BigPoly| {
        p.coeffs
            .iter()
            .filter(|c| !matches!(classify(c, &q_minus_1), MulKind::General))
            .count()
    };
    let (outer, inner) = if trivial_count(a) >= trivial_count(b) {
        (a, b)
    } else {
        (b, a)
    };

    // Positive and negative contributions are accumulated separately as
    // unsigned integers and combined once at the end.
    let mut pos = vec![BigUint::zero(); n];
    let mut neg = vec![BigUint::zero(); n];
    for i in 0..n {
        let kind = classify(&outer.coeffs[i], &q_minus_1);
        if matches!(kind, MulKind::Zero) {
            continue;
        }
        for j in 0..n {
            let wrapped = i + j >= n;
            let idx = if wrapped { i + j - n } else { i + j };
            let negative = match kind {
                MulKind::MinusOne => !wrapped,
                _ => wrapped,
            };
            let acc = if negative { &mut neg[idx] } else { &mut pos[idx] };
            match kind {
                MulKind::One | MulKind::MinusOne => *acc += &inner.coeffs[j],
                MulKind::General => *acc += &outer.coeffs[i] * &inner.coeffs[j],
                MulKind::Zero => unreachable!(),
            }
        }
    }

    let coeffs = (0..n)
        .map(|i| {
            let p = &pos[i] % q.value();
            let m = &neg[i] % q.value();
            if p >= m {
                p - m
            } else {
                q.value() - m + p
            }
        })
        .collect();
    Ok(BigPoly { coeffs })
}

/// Maps a canonical coefficient `c ∈ [0, Q)` to its centered representative
/// in `(-Q/2, Q/2]`: `c` itself when `c < Q/2`, else `c - Q`. Decode needs
/// the centered value before dividing by the scale factor.
pub fn centered_lift(c: &BigUint, q: &Modulus) -> Result<BigInt> {
    if c >= q.value() {
        return Err(Error::RepresentationViolation(format!(
            "coefficient {c} >= Q, cannot center"
        )));
    }
    let twice = c << 1u32;
    if twice < *q.value() {
        Ok(BigInt::from(c.clone()))
    } else {
        Ok(BigInt::from(c.clone()) - BigInt::from(q.value().clone()))
    }
}

// ---------------------------------------------------------------------------
// Sampling
//
// Every random polynomial in the scheme is drawn first as plain integers
// (`i8` symbols, rounded-Gaussian `i64`s, or a uniform big integer) and only
// then lifted into a backend representation. Both backends therefore consume
// *exactly the same* RNG stream, which is what makes seed-for-seed backend
// equivalence an exact integer property instead of a statistical one.
// ---------------------------------------------------------------------------

/// Uniform symbols from {-1, 0, 1}.
pub fn sample_ternary_symbols<R: Rng>(n: usize, rng: &mut R) -> Vec<i8> {
    (0..n).map(|_| rng.gen_range(0u8..3) as i8 - 1).collect()
}

/// Rounded continuous Gaussian with standard deviation `sigma` (Box–Muller;
/// two uniform draws per sample, cosine branch). `sigma = 0` yields zeros,
/// which keeps degenerate no-noise configurations expressible.
pub fn sample_gaussian_values<R: Rng>(n: usize, sigma: f64, rng: &mut R) -> Vec<i64> {
    assert!(sigma.is_finite() && sigma >= 0.0, "sigma must be finite and >= 0");
    (0..n)
        .map(|_| {
            // 1 - gen() lies in (0, 1], keeping the log finite.
            let u1: f64 = 1.0 - rng.gen::<f64>();
            let u2: f64 = rng.gen();
            let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
            (sigma * z).round() as i64
        })
        .collect()
}

/// Ternary polynomial lifted mod Q.
pub fn sample_ternary<R: Rng>(n: usize, q: &Modulus, rng: &mut R) -> BigPoly {
    let symbols = sample_ternary_symbols(n, rng);
    let values: Vec<i64> = symbols.iter().map(|&s| s as i64).collect();
    BigPoly::from_signed(&values, q)
}

/// Rounded-Gaussian polynomial lifted mod Q.
pub fn sample_gaussian<R: Rng>(n: usize, sigma: f64, q: &Modulus, rng: &mut R) -> BigPoly {
    let values = sample_gaussian_values(n, sigma, rng);
    BigPoly::from_signed(&values, q)
}

/// Coefficients uniform in `[0, Q)`.
pub fn sample_uniform<R: Rng>(n: usize, q: &Modulus, rng: &mut R) -> BigPoly {
    let coeffs = (0..n).map(|_| rng.gen_biguint_below(q.value())).collect();
    BigPoly { coeffs }
}
