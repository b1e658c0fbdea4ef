//! Arithmetic on 64-bit residues, plus deterministic primality testing.
//!
//! These helpers back the RNS limbs and the NTT butterflies. All of them go
//! through 128-bit intermediates, so they accept *unreduced* inputs (any u64
//! word) and still return a canonical value in `[0, q)`. That tolerance is
//! deliberate: the fault harness XORs raw words, and a flipped word `>= q`
//! must flow through arithmetic without tripping debug overflow — whether it
//! is *noticed* is the job of the explicit validity checks, not of these
//! functions.

/// `(a + b) mod q`, accepting unreduced operands.
#[inline]
pub fn add_mod(a: u64, b: u64, q: u64) -> u64 {
    debug_assert!(q >= 2);
    ((a as u128 + b as u128) % q as u128) as u64
}

/// `(a - b) mod q`, accepting unreduced operands.
#[inline]
pub fn sub_mod(a: u64, b: u64, q: u64) -> u64 {
    debug_assert!(q >= 2);
    let (a, b) = (a % q, b % q);
    if a >= b {
        a - b
    } else {
        a + (q - b)
    }
}

/// `(a * b) mod q` via a 128-bit product, accepting unreduced operands.
#[inline]
pub fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    debug_assert!(q >= 2);
    ((a as u128 * b as u128) % q as u128) as u64
}

/// `base^exp mod q` by square-and-multiply.
pub fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    debug_assert!(q >= 2);
    base %= q;
    let mut acc: u64 = 1 % q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, q);
        }
        base = mul_mod(base, base, q);
        exp >>= 1;
    }
    acc
}

/// Multiplicative inverse of `a` modulo `m` (extended Euclid), or `None`
/// when `gcd(a, m) != 1`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    debug_assert!(m >= 2);
    let a = (a % m) as i128;
    let m = m as i128;
    let (mut old_r, mut r) = (a, m);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m) as u64)
}

/// Deterministic Miller–Rabin. The fixed base set `{2, 3, 5, 7, 11, 13, 17,
/// 19, 23, 29, 31, 37}` is known to be exact for every 64-bit integer, so
/// this is a primality *proof*, not a probabilistic test.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    // n - 1 = d * 2^s with d odd
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
