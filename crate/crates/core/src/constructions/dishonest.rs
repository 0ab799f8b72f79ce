//! A permutation with finite cycles on the rows of the Cantor pairing.
//!
//! Row `k` is `⟨k,0⟩, ⟨k,1⟩, …` with `⟨k,i⟩ = (k+i)(k+i+1)/2 + i`. With
//! `p_k(u) = k(u^k + 1)` and `i*` the least `i` such that
//! `⟨k,i⟩ ≥ p_k(⟨k,0⟩)`, the permutation sends `⟨k,i⟩ ↦ ⟨k,i+1⟩` for
//! `i < i*`, closes the cycle with `⟨k,i*⟩ ↦ ⟨k,0⟩`, and fixes the rest of
//! the row. The closing points map far below themselves.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// `⟨k,i⟩`, saturating.
pub fn cantor_pair(k: u128, i: u128) -> u128 {
    let s = k.saturating_add(i);
    let tri = if s.is_multiple_of(2) {
        (s / 2).saturating_mul(s.saturating_add(1))
    } else {
        s.saturating_mul(s.saturating_add(1) / 2)
    };
    tri.saturating_add(i)
}

/// `(k, i)` with `⟨k,i⟩ = z`.
pub fn cantor_unpair(z: u128) -> (u128, u128) {
    // Largest s with s(s+1)/2 ≤ z.
    let mut s = (((8.0 * z as f64 + 1.0).sqrt() - 1.0) / 2.0) as u128;
    while s > 0 && triangle(s) > z {
        s -= 1;
    }
    while triangle(s + 1) <= z {
        s += 1;
    }
    let i = z - triangle(s);
    (s - i, i)
}

fn triangle(s: u128) -> u128 {
    cantor_pair(s, 0)
}

/// `p_k(u) = k(u^k + 1)`, saturating.
pub fn time_bound(k: u128, u: u128) -> u128 {
    let exp = u32::try_from(k).unwrap_or(u32::MAX);
    u.checked_pow(exp)
        .unwrap_or(u128::MAX)
        .saturating_add(1)
        .saturating_mul(k)
}

/// `p_k(⟨k,0⟩)`.
pub fn threshold(k: u128) -> u128 {
    time_bound(k, cantor_pair(k, 0))
}

/// `i*` for row `k`.
pub fn cycle_end(k: u128) -> u128 {
    let t = threshold(k);
    // ⟨k,i⟩ ≥ i, so i = t already qualifies.
    let (mut lo, mut hi) = (0u128, t);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if cantor_pair(k, mid) >= t {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

fn to_position(z: u128) -> u64 {
    u64::try_from(z).expect("dishonest permutation image beyond u64 positions")
}

pub fn forward(n: u64) -> u64 {
    let (k, i) = cantor_unpair(n as u128);
    let end = cycle_end(k);
    if i < end {
        to_position(cantor_pair(k, i + 1))
    } else if i == end {
        to_position(cantor_pair(k, 0))
    } else {
        n
    }
}

/// `S⁻¹(n)`, or `None` when the preimage lies beyond the `u64` positions
/// (the closing point of a long cycle; see [`inverse_exact`]).
pub fn checked_inverse(n: u64) -> Option<u64> {
    inverse_exact(&BigUint::from(n)).to_u64()
}

fn big_pair(k: &BigUint, i: &BigUint) -> BigUint {
    let s = k + i;
    (&s * (&s + 1u32)) / 2u32 + i
}

fn big_unpair(z: &BigUint) -> (BigUint, BigUint) {
    // Largest s with s(s+1)/2 ≤ z, from ⌊√(8z+1)⌋.
    let root = (z * 8u32 + 1u32).sqrt();
    let s = (root - 1u32) / 2u32;
    let i = z - (&s * (&s + 1u32)) / 2u32;
    (s - &i, i)
}

fn big_cycle_end(k: &BigUint) -> BigUint {
    let Some(exp) = k.to_u32() else {
        panic!("row index {k} too large");
    };
    let t = k * (big_pair(k, &BigUint::zero()).pow(exp) + 1u32);
    // ⟨k,i⟩ ≥ (k+i)²/2, so the least qualifying i is near √(2t) - k.
    let approx = (&t * 2u32).sqrt();
    let mut i = if approx > k + 2u32 { approx - k - 2u32 } else { BigUint::zero() };
    while big_pair(k, &i) < t {
        i += 1u32;
    }
    while !i.is_zero() && big_pair(k, &(&i - 1u32)) >= t {
        i -= 1u32;
    }
    i
}

/// `S(z)` on arbitrary naturals.
pub fn forward_exact(z: &BigUint) -> BigUint {
    let (k, i) = big_unpair(z);
    let end = big_cycle_end(&k);
    if i < end {
        big_pair(&k, &(i + 1u32))
    } else if i == end {
        big_pair(&k, &BigUint::zero())
    } else {
        z.clone()
    }
}

/// `S⁻¹(z)` on arbitrary naturals.
pub fn inverse_exact(z: &BigUint) -> BigUint {
    let (k, i) = big_unpair(z);
    if i.is_zero() {
        return big_pair(&k, &big_cycle_end(&k));
    }
    let end = big_cycle_end(&k);
    if i <= end {
        big_pair(&k, &(i - BigUint::one()))
    } else {
        z.clone()
    }
}

/// `S⁻¹(n)`.
///
/// # Panics
/// If the preimage does not fit a `u64`; see [`checked_inverse`].
pub fn inverse(n: u64) -> u64 {
    checked_inverse(n).expect("dishonest permutation preimage beyond u64 positions")
}

/// A position `n` with `p_k(S(n)) ≤ n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub k: u64,
    pub n: u64,
    pub image: u64,
    pub bound: String,
}

/// For each `k ≤ k_max`, the least `n < limit` with `p_k(S(n)) ≤ n`, or
/// `None` if the range holds none.
pub fn witnesses(k_max: u64, limit: u64) -> Vec<(u64, Option<Witness>)> {
    (0..=k_max)
        .map(|k| {
            let w = (0..limit).find_map(|n| {
                let image = forward(n);
                let bound = time_bound(k as u128, image as u128);
                (bound <= n as u128).then(|| Witness {
                    k,
                    n,
                    image,
                    bound: bound.to_string(),
                })
            });
            (k, w)
        })
        .collect()
}
