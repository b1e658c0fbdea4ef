//! Negacyclic number theoretic transform over a single RNS limb prime.
//!
//! For a prime `q ≡ 1 (mod 2N)` and ψ a primitive 2N-th root of unity mod q,
//! the forward transform evaluates the polynomial at the odd powers of ψ.
//! Multiplying two transforms coordinate-wise and transforming back is then
//! exactly negacyclic convolution — multiplication in `Z_q[X]/(X^N+1)` — in
//! O(N log N) instead of O(N²).
//!
//! The implementation is the standard pair of iterative in-place kernels
//! with the negacyclic ψ-weighting merged into the twiddle factors:
//! Cooley–Tukey butterflies forward (natural input order, bit-reversed
//! output), Gentleman–Sande backward (bit-reversed input, natural output,
//! with a final N⁻¹ scaling). The output permutation is fixed and tested:
//!
//! ```text
//! ntt_forward(a)[i] = a(ψ^(2·bitrev(i)+1))        (bitrev over log2 N bits)
//! ```
//!
//! Exactness matters more than speed here: butterflies run on 128-bit
//! intermediates and return canonical values in `[0, q)`, and they tolerate
//! unreduced input words (a fault-flipped word simply enters the arithmetic
//! reduced mod q — *noticing* it is the validity checks' job).

use crate::error::{Error, Result};
use crate::zq::{add_mod, inv_mod, is_prime, mul_mod, pow_mod, sub_mod};

/// Precomputed twiddle factors for one (prime, ring dimension) pair.
#[derive(Debug, Clone)]
pub struct TwiddleTable {
    q: u64,
    n: usize,
    psi: u64,
    /// forward[i] = ψ^bitrev(i), indexed the way the CT network consumes it
    forward: Vec<u64>,
    /// inverse[i] = ψ^(-bitrev(i))
    inverse: Vec<u64>,
    n_inv: u64,
}

fn bitrev(i: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - bits)
    }
}

impl TwiddleTable {
    pub fn new(q: u64, n: usize) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(Error::InvalidParams(format!(
                "ring dimension must be a power of two, got {n}"
            )));
        }
        if !is_prime(q) {
            return Err(Error::InvalidParams(format!("{q} is not prime")));
        }
        let two_n = 2 * n as u64;
        let psi = find_primitive_root(q, two_n)?;
        debug_assert_eq!(pow_mod(psi, two_n, q), 1);
        debug_assert_eq!(pow_mod(psi, n as u64, q), q - 1);

        let psi_inv = inv_mod(psi, q).expect("psi is a unit");
        let bits = n.trailing_zeros();
        let forward = (0..n)
            .map(|i| pow_mod(psi, bitrev(i, bits) as u64, q))
            .collect();
        let inverse = (0..n)
            .map(|i| pow_mod(psi_inv, bitrev(i, bits) as u64, q))
            .collect();
        let n_inv = inv_mod(n as u64 % q, q).ok_or_else(|| {
            Error::InvalidParams(format!("N = {n} is not invertible mod {q}"))
        })?;
        Ok(TwiddleTable {
            q,
            n,
            psi,
            forward,
            inverse,
            n_inv,
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn psi(&self) -> u64 {
        self.psi
    }

    pub fn n_inv(&self) -> u64 {
        self.n_inv
    }
}

/// Finds an element of multiplicative order exactly `order` mod prime `q`,
/// for `order` an even power of two dividing `q - 1`. Scans candidate bases
/// deterministically, so the result is a pure function of `(q, order)`.
pub fn find_primitive_root(q: u64, order: u64) -> Result<u64> {
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::InvalidParams(format!(
            "root order must be an even power of two, got {order}"
        )));
    }
    if (q - 1) % order != 0 {
        return Err(Error::NotNttFriendly { q, two_n: order });
    }
    let cofactor = (q - 1) / order;
    for base in 2..q {
        let candidate = pow_mod(base, cofactor, q);
        // candidate^order = 1 by Fermat; its order is a power of two dividing
        // `order`, and it is exactly `order` iff candidate^(order/2) = -1.
        if pow_mod(candidate, order / 2, q) == q - 1 {
            return Ok(candidate);
        }
    }
    // Unreachable for prime q: the group is cyclic, so a generator exists.
    Err(Error::InvalidParams(format!(
        "no element of order {order} mod {q}"
    )))
}

/// The Cooley–Tukey butterfly: `(a, b) -> (a + w·b, a - w·b) mod q`.
#[inline]
pub fn butterfly(a: u64, b: u64, w: u64, q: u64) -> (u64, u64) {
    let wb = mul_mod(w, b, q);
    (add_mod(a, wb, q), sub_mod(a, wb, q))
}

/// Forward negacyclic NTT. Input in natural coefficient order; output in
/// bit-reversed evaluation order: `out[i] = a(ψ^(2·bitrev(i)+1))`.
pub fn ntt_forward(limb: &[u64], table: &TwiddleTable) -> Result<Vec<u64>> {
    let n = table.n;
    if limb.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: limb.len(),
        });
    }
    let q = table.q;
    let mut a = limb.to_vec();
    let mut t = n;
    let mut m = 1;
    while m < n {
        t /= 2;
        for i in 0..m {
            let w = table.forward[m + i];
            let base = 2 * i * t;
            for j in base..base + t {
                let (x, y) = butterfly(a[j], a[j + t], w, q);
                a[j] = x;
                a[j + t] = y;
            }
        }
        m *= 2;
    }
    Ok(a)
}

/// Inverse of [`ntt_forward`], Gentleman–Sande network plus the final N⁻¹
/// scaling: `ntt_inverse(ntt_forward(a)) == a` with all values canonical.
pub fn ntt_inverse(limb: &[u64], table: &TwiddleTable) -> Result<Vec<u64>> {
    let n = table.n;
    if limb.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: limb.len(),
        });
    }
    let q = table.q;
    let mut a = limb.to_vec();
    let mut t = 1;
    let mut m = n;
    while m > 1 {
        let h = m / 2;
        let mut j1 = 0;
        for i in 0..h {
            let w = table.inverse[h + i];
            for j in j1..j1 + t {
                let u = a[j];
                let v = a[j + t];
                a[j] = add_mod(u, v, q);
                a[j + t] = mul_mod(sub_mod(u, v, q), w, q);
            }
            j1 += 2 * t;
        }
        t *= 2;
        m = h;
    }
    for x in &mut a {
        *x = mul_mod(*x, table.n_inv, q);
    }
    Ok(a)
}
