//! A synthetic randomized decision procedure and the martingales built on it.
//!
//! `R(x, y)` decides `A(x)` for `|x| = 2n+1` using `p(n)` random bits `y`,
//! erring exactly on a configurable set of bad `y`. The bin martingale bets
//! on the base sequence that its random blocks are bad; the predictor bets
//! on the rearranged sequence that `R` is right.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bits::BitString;
use crate::constructions::rearrangement::BlockLayout;
use crate::error::{ensure_pow2_budget, Error, Result, DEFAULT_BUDGET};
use crate::poly::PolynomialNat;
use crate::rational::Rational;
use crate::scan::Permutation;
use crate::sequence::{SequenceOracle, TargetSet};

/// Longest random block supported, so that blocks fit a `u64`.
pub const MAX_RANDOM_BITS: u64 = 62;

/// Which random strings make `R` err.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BadRule {
    /// `R` never errs.
    None,
    /// `y` is bad for `x` iff it agrees with a key derived from `x` on its
    /// first `4n+2` bits, giving `2^(p(n)-4n-2)` bad strings per `x`.
    #[default]
    Keyed,
    /// The same `count` strings are bad for every `x` of the block.
    Shared { count: u64 },
}

/// `R(x, y) = A(x) XOR bad(x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticBpp {
    pub p: PolynomialNat,
    pub target: TargetSet,
    #[serde(default)]
    pub bad: BadRule,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SyntheticBpp {
    fn default() -> Self {
        SyntheticBpp {
            p: PolynomialNat {
                coefficients: vec![6, 4],
            },
            target: TargetSet::Parity,
            bad: BadRule::Keyed,
            seed: 0,
        }
    }
}

impl SyntheticBpp {
    pub fn validate(&self) -> Result<()> {
        self.p.validate()?;
        if self.p.eval(0) == 0 {
            return Err(Error::Descriptor(format!(
                "random-bit polynomial {} must be positive at 0",
                self.p
            )));
        }
        self.target.validate()
    }

    pub fn layout(&self) -> BlockLayout {
        BlockLayout::new(self.p.clone())
    }

    /// `p(n)`, bounded by [`MAX_RANDOM_BITS`].
    pub fn random_bits(&self, n: u64) -> Result<u64> {
        let bits = self.p.eval(n);
        if bits > MAX_RANDOM_BITS as u128 {
            return Err(Error::Precondition(format!(
                "p({n}) = {bits} random bits exceeds {MAX_RANDOM_BITS}"
            )));
        }
        Ok(bits as u64)
    }

    /// `A(x)`.
    pub fn target_bit(&self, x: &BitString) -> Result<bool> {
        self.target.contains(x)
    }

    /// `R(x, y)`.
    pub fn evaluate(&self, x: &BitString, y: &BitString) -> Result<bool> {
        let n = self.block_of_input(x)?;
        let bits = self.random_bits(n)?;
        if y.len() as u64 != bits {
            return Err(Error::Precondition(format!(
                "block {n} takes {bits} random bits, got {}",
                y.len()
            )));
        }
        let y = y.to_u64().expect("bounded by MAX_RANDOM_BITS");
        let key = self.key(n, x, bits);
        Ok(self.target_bit(x)? ^ self.bad_with_key(n, bits, key, y))
    }

    fn block_of_input(&self, x: &BitString) -> Result<u64> {
        if x.len().is_multiple_of(2) {
            return Err(Error::Precondition(format!(
                "inputs have odd length, got {}",
                x.len()
            )));
        }
        Ok((x.len() / 2) as u64)
    }

    fn key(&self, n: u64, x: &BitString, bits: u64) -> u64 {
        let mut h = Sha256::new();
        h.update(b"scanclosure.bpp");
        h.update(self.seed.to_le_bytes());
        h.update(n.to_le_bytes());
        if matches!(self.bad, BadRule::Keyed) {
            h.update(x.to_string().as_bytes());
        }
        let d = h.finalize();
        let word = u64::from_be_bytes(d[..8].try_into().expect("digest has 32 bytes"));
        if bits == 0 {
            0
        } else {
            word >> (64 - bits)
        }
    }

    fn bad_with_key(&self, n: u64, bits: u64, key: u64, y: u64) -> bool {
        match self.bad {
            BadRule::None => false,
            BadRule::Keyed => {
                let agree = 4 * n + 2;
                bits >= agree && (y ^ key) >> (bits - agree) == 0
            }
            BadRule::Shared { count } => (y ^ key) < count,
        }
    }

    /// Allowed number of bad `y` per `x` at block `n`: `⌊2^(p(n)-4n-2)⌋`.
    pub fn allowed_errors(&self, n: u64) -> Result<u64> {
        let bits = self.random_bits(n)?;
        Ok(if bits >= 4 * n + 2 {
            1u64 << (bits - 4 * n - 2)
        } else {
            0
        })
    }

    /// Exhaustively counts, for each `x` of length `2n+1`, the `y` with
    /// `R(x,y) ≠ A(x)`, and compares the worst count with the allowance.
    pub fn error_certificate(&self, n: u64, budget: u64) -> Result<CertificateReport> {
        let bits = self.random_bits(n)?;
        ensure_pow2_budget(bits + 2 * n + 1, budget, "evaluations")?;
        let allowed = self.allowed_errors(n)?;
        let mut worst = (0u64, BitString::zeros(2 * n as usize + 1));
        for x in BitString::all_of_length(2 * n as usize + 1) {
            let a = self.target_bit(&x)?;
            let key = self.key(n, &x, bits);
            let errors = (0..1u64 << bits)
                .filter(|&y| (a ^ self.bad_with_key(n, bits, key, y)) != a)
                .count() as u64;
            if errors > worst.0 {
                worst = (errors, x);
            }
        }
        Ok(CertificateReport {
            n,
            random_bits: bits,
            allowed,
            worst_errors: worst.0,
            worst_x: worst.1,
            ok: worst.0 <= allowed,
        })
    }

    /// The sorted `y` of length `p(n)` on which `R` errs for some `x`.
    pub fn bad_set(&self, n: u64, budget: u64) -> Result<Vec<u64>> {
        let bits = self.random_bits(n)?;
        ensure_pow2_budget(bits + 2 * n + 1, budget, "evaluations")?;
        let mut bad = vec![false; 1usize << bits];
        for x in BitString::all_of_length(2 * n as usize + 1) {
            let a = self.target_bit(&x)?;
            let key = self.key(n, &x, bits);
            for (y, slot) in bad.iter_mut().enumerate() {
                if !*slot && (a ^ self.bad_with_key(n, bits, key, y as u64)) != a {
                    *slot = true;
                }
            }
        }
        Ok(bad
            .into_iter()
            .enumerate()
            .filter_map(|(y, b)| b.then_some(y as u64))
            .collect())
    }

    /// Fraction of `y` of length `p(n)` that are bad for some `x`.
    pub fn bad_block_measure(&self, n: u64, budget: u64) -> Result<Rational> {
        let bits = self.random_bits(n)?;
        let count = self.bad_set(n, budget)?.len() as u64;
        Ok(Rational::from(count) * Rational::pow2(-(bits as i64)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub n: u64,
    pub random_bits: u64,
    pub allowed: u64,
    pub worst_errors: u64,
    pub worst_x: BitString,
    pub ok: bool,
}

#[derive(Clone, Default)]
struct BadSetCache(Arc<Mutex<HashMap<u64, Arc<Vec<u64>>>>>);

impl fmt::Debug for BadSetCache {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("BadSetCache")
    }
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

/// Bets on the base sequence that each random block is bad.
///
/// Bin `n` starts with `2^(-n-1)`. While block `n` is read it spreads its
/// capital evenly over the bad strings of the block; once the block is over
/// the bin is frozen. Bins of blocks not yet reached contribute `2^(-N)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BinMartingale {
    pub alg: SyntheticBpp,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(skip)]
    cache: BadSetCache,
}

impl PartialEq for BinMartingale {
    fn eq(&self, other: &Self) -> bool {
        self.alg == other.alg && self.budget == other.budget
    }
}

impl BinMartingale {
    pub fn new(alg: SyntheticBpp, budget: u64) -> Self {
        BinMartingale {
            alg,
            budget,
            cache: BadSetCache::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.alg.validate()
    }

    fn bad_set(&self, n: u64) -> Result<Arc<Vec<u64>>> {
        if let Some(set) = self.cache.0.lock().expect("cache lock").get(&n) {
            return Ok(set.clone());
        }
        let set = Arc::new(self.alg.bad_set(n, self.budget)?);
        self.cache
            .0
            .lock()
            .expect("cache lock")
            .insert(n, set.clone());
        Ok(set)
    }

    /// Capital of bin `n` after the block bits `u` (a prefix of block `n`).
    fn bin_value(&self, n: u64, u: &BitString) -> Result<Rational> {
        let initial = Rational::pow2(-(n as i64) - 1);
        let bad = self.bad_set(n)?;
        if bad.is_empty() || u.is_empty() {
            return Ok(initial);
        }
        let bits = self.alg.random_bits(n)?;
        let shift = bits - u.len() as u64;
        let u_val = u.to_u64().expect("bounded by MAX_RANDOM_BITS");
        let lo = bad.partition_point(|&y| y >> shift < u_val);
        let hi = bad.partition_point(|&y| y >> shift <= u_val);
        Ok(initial * Rational::pow2(u.len() as i64) * Rational::from((hi - lo) as u64)
            / Rational::from(bad.len() as u64))
    }

    /// Capital held in bin `n` after reading the base prefix `x`.
    pub fn bin_capital(&self, x: &BitString, n: u64) -> Result<Rational> {
        let layout = self.alg.layout();
        let start = layout.base_offset(n) as usize;
        let end = layout.base_offset(n + 1) as usize;
        let seen = x.slice(start.min(x.len()), end.min(x.len()));
        self.bin_value(n, &seen)
    }

    pub fn value(&self, x: &BitString) -> Result<Rational> {
        let mut total = Rational::zero();
        let mut n = 0u64;
        let mut start = 0usize;
        while start < x.len() {
            let len = self.alg.random_bits(n)? as usize;
            let end = (start + len).min(x.len());
            total = total + self.bin_value(n, &x.slice(start, end))?;
            start += len;
            n += 1;
        }
        Ok(total + Rational::pow2(-(n as i64)))
    }
}

/// Bets on the rearranged sequence: before each interleaved bit it
/// reconstructs `Z ↾ 2n+1` and the block's random bits from the history and
/// stakes half its capital on `R`'s answer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictorMartingale {
    pub alg: SyntheticBpp,
}

impl PredictorMartingale {
    pub fn new(alg: SyntheticBpp) -> Self {
        PredictorMartingale { alg }
    }

    pub fn validate(&self) -> Result<()> {
        self.alg.validate()
    }

    /// `R`'s prediction for the interleaved bit of block `n`, read from the
    /// rearranged prefix `zhat` (which must reach that bit's position).
    pub fn prediction(&self, zhat: &BitString, n: u64) -> Result<bool> {
        let layout = self.alg.layout();
        let slot = layout.target_slot(n) as usize;
        if zhat.len() < slot {
            return Err(Error::Precondition(format!(
                "block {n} needs a prefix of length {slot}"
            )));
        }
        let x = BitString::from_bits(
            (0..=2 * n)
                .map(|i| zhat.bit(layout.inverse(i) as usize))
                .collect(),
        );
        let y = zhat.slice(layout.block_start(n) as usize, slot);
        self.alg.evaluate(&x, &y)
    }

    pub fn value(&self, zhat: &BitString) -> Result<Rational> {
        let layout = self.alg.layout();
        let mut capital = Rational::one();
        let mut n = 0u64;
        while (layout.target_slot(n) as usize) < zhat.len() {
            let actual = zhat.bit(layout.target_slot(n) as usize);
            capital = capital * predictor_factor(self.prediction(zhat, n)? == actual);
            n += 1;
        }
        Ok(capital)
    }
}

/// `3/2` for a correct prediction, `1/2` for a wrong one.
pub fn predictor_factor(correct: bool) -> Rational {
    if correct {
        Rational::new(3, 2)
    } else {
        Rational::new(1, 2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub n: u64,
    /// `Z ↾ 2n+1`.
    pub x: BitString,
    /// The block's random bits.
    pub y: BitString,
    /// `R(x, y) ≠ A(x)` on the actual `x`.
    pub is_bad: bool,
    /// `y` makes `R` err on some `x` of length `2n+1`.
    pub bad_for_some_x: bool,
    pub h_factor: Rational,
    /// Bin `n` capital at the end of the block.
    pub bin_capital: Rational,
    /// `bin_capital / 2^(-n-1)`.
    pub bin_gain: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub blocks: Vec<BlockReport>,
    pub correct: u64,
    pub wrong: u64,
    /// `H` evaluated on the rearranged prefix through the last block.
    pub h_capital: Rational,
    /// `(3/2)^correct · (1/2)^wrong`.
    pub expected_h_capital: Rational,
    /// The bin martingale on the base prefix through the last block.
    pub bin_total: Rational,
}

/// The interleaved sequence of `alg`'s target with base `b`.
pub fn interleaved(alg: &SyntheticBpp, b: &SequenceOracle) -> SequenceOracle {
    SequenceOracle::Interleaved {
        target: alg.target.clone(),
        base: Box::new(b.clone()),
    }
}

/// The rearranged sequence `Ẑ(r) = Z(S(r))`.
pub fn rearranged(alg: &SyntheticBpp, b: &SequenceOracle) -> SequenceOracle {
    SequenceOracle::Rearranged {
        permutation: Permutation::BlockRearrangement { p: alg.p.clone() },
        base: Box::new(interleaved(alg, b)),
    }
}

/// Builds `Z` and `Ẑ` from `b`, then plays the predictor on `Ẑ` and the bin
/// martingale on `b` for the first `blocks` blocks.
pub fn pipeline(alg: &SyntheticBpp, b: &SequenceOracle, blocks: u64, budget: u64) -> Result<PipelineReport> {
    alg.validate()?;
    b.validate()?;
    let layout = alg.layout();
    let zhat_len = if blocks == 0 {
        0
    } else {
        layout.target_slot(blocks - 1) as usize + 1
    };
    let zhat = rearranged(alg, b).prefix(zhat_len)?;
    let z = interleaved(alg, b).prefix(2 * blocks as usize)?;
    let base = b.prefix(layout.base_offset(blocks) as usize)?;
    let h = PredictorMartingale::new(alg.clone());
    let bins = BinMartingale::new(alg.clone(), budget);

    let mut reports = Vec::with_capacity(blocks as usize);
    let mut correct = 0u64;
    for n in 0..blocks {
        let x = z.prefix(2 * n as usize + 1);
        let y = zhat.slice(layout.block_start(n) as usize, layout.target_slot(n) as usize);
        let is_bad = alg.evaluate(&x, &y)? != alg.target_bit(&x)?;
        let y_val = y.to_u64().expect("bounded by MAX_RANDOM_BITS");
        let bad_for_some_x = bins.bad_set(n)?.binary_search(&y_val).is_ok();
        let right = h.prediction(&zhat, n)? == zhat.bit(layout.target_slot(n) as usize);
        if right {
            correct += 1;
        }
        let bin_capital = bins.bin_capital(&base, n)?;
        let bin_gain = &bin_capital * Rational::pow2(n as i64 + 1);
        reports.push(BlockReport {
            n,
            x,
            y,
            is_bad,
            bad_for_some_x,
            h_factor: predictor_factor(right),
            bin_capital,
            bin_gain,
        });
    }
    let wrong = blocks - correct;
    Ok(PipelineReport {
        blocks: reports,
        correct,
        wrong,
        h_capital: h.value(&zhat)?,
        expected_h_capital: Rational::new(3, 2).pow(correct as u32)
            * Rational::new(1, 2).pow(wrong as u32),
        bin_total: bins.value(&base)?,
    })
}
