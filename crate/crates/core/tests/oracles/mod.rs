//! Brute-force reference computations written from first principles. They
//! use only `Martingale::value`, `ScanningFunction::query` and
//! `Permutation::forward`, never the library's derived operations.

#![allow(dead_code)]

use scanclosure::constructions::bpp::SyntheticBpp;
use scanclosure::{BitString, Martingale, Permutation, Rational, ScanningFunction};

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

pub fn bs(s: &str) -> BitString {
    s.parse().unwrap()
}

/// All strings of length `len`, lexicographic.
pub fn strings(len: usize) -> Vec<BitString> {
    (0..1u64 << len).map(|v| BitString::from_u64(v, len)).collect()
}

/// All strings of length `≤ len`, shortest first.
pub fn strings_upto(len: usize) -> Vec<BitString> {
    (0..=len).flat_map(strings).collect()
}

/// The positions queried along `alpha`, step by step.
pub fn query_list(v: &ScanningFunction, alpha: &BitString) -> Vec<u64> {
    (0..alpha.len())
        .map(|i| v.query(&alpha.prefix(i)).unwrap())
        .collect()
}

/// `α ∼_V w`: each answer of `α` at a query below `|w|` matches `w` there.
pub fn consistent(v: &ScanningFunction, alpha: &BitString, w: &BitString) -> bool {
    query_list(v, alpha)
        .into_iter()
        .enumerate()
        .all(|(j, x)| x as usize >= w.len() || w.bit(x as usize) == alpha.bit(j))
}

/// `2^(|w|-t) Σ_{|α|=t, α∼w} B(α)` over the full run space.
pub fn averaging(b: &Martingale, v: &ScanningFunction, w: &BitString, t: usize) -> Rational {
    let mut sum = Rational::zero();
    for alpha in strings(t) {
        if consistent(v, &alpha, w) {
            sum = sum + b.value(&alpha).unwrap();
        }
    }
    sum * Rational::pow2(w.len() as i64 - t as i64)
}

/// Least run length after which `V_S` has read every position below `n`,
/// found by reading `S(0), S(1), …` until covered.
pub fn least_filling_length(s: &Permutation, n: u64) -> u64 {
    let mut seen = vec![false; n as usize];
    let mut missing = n;
    let mut len = 0u64;
    while missing > 0 {
        let x = s.forward(len);
        if x < n && !seen[x as usize] {
            seen[x as usize] = true;
            missing -= 1;
        }
        len += 1;
    }
    len
}

pub fn parity(x: &BitString) -> bool {
    x.bits().iter().filter(|&&b| b).count() % 2 == 1
}

/// `Z ↾ 2k` for `Z(2n) = B(n)`, `Z(2n+1) = parity(Z ↾ 2n+1)`.
pub fn interleave_parity(b: &BitString, k: usize) -> BitString {
    let mut z = BitString::new();
    for n in 0..k {
        z.push(b.bit(n));
        let a = parity(&z);
        z.push(a);
    }
    z
}

/// The rearranged prefix drawn block by block: `p(n)` base bits, then
/// `Z(2n+1)`.
pub fn block_picture(p: &dyn Fn(u64) -> u64, b: &BitString, z: &BitString, blocks: u64) -> BitString {
    let mut out = BitString::new();
    let mut offset = 0usize;
    for n in 0..blocks {
        for m in 0..p(n) as usize {
            out.push(b.bit(offset + m));
        }
        offset += p(n) as usize;
        out.push(z.bit(2 * n as usize + 1));
    }
    out
}

/// The `y` of length `p(n)` on which `R` errs for some `x ∈ {0,1}^(2n+1)`,
/// with `A` = parity.
pub fn bad_strings_parity(alg: &SyntheticBpp, n: u64) -> Vec<BitString> {
    let bits = alg.p.eval(n) as usize;
    let xs = strings(2 * n as usize + 1);
    strings(bits)
        .into_iter()
        .filter(|y| xs.iter().any(|x| alg.evaluate(x, y).unwrap() != parity(x)))
        .collect()
}

/// Cantor pairing.
pub fn pair(k: u128, i: u128) -> u128 {
    (k + i) * (k + i + 1) / 2 + i
}

/// `k(u^k + 1)`, `None` on overflow.
pub fn time_bound(k: u32, u: u128) -> Option<u128> {
    u.checked_pow(k)?.checked_add(1)?.checked_mul(k as u128)
}
