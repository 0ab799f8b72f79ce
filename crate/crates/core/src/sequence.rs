//! Infinite bit sequences given by deterministic position → bit rules.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bits::{bit01, BitString};
use crate::constructions::domination::leftmost_path;
use crate::error::{Error, Result};
use crate::martingale::Martingale;
use crate::scan::Permutation;

/// A set of strings queried at odd-length prefixes when interleaving.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TargetSet {
    /// `x ∈ A` iff `x` has an odd number of ones.
    Parity,
    Constant {
        #[serde(with = "bit01")]
        bit: bool,
    },
    /// `x ∈ A` iff `M(x1) < M(x0)`: the bit on which `M` does not gain.
    MartingaleDescent { martingale: Box<Martingale> },
}

impl TargetSet {
    pub fn contains(&self, x: &BitString) -> Result<bool> {
        match self {
            TargetSet::Parity => Ok(x.count_ones() % 2 == 1),
            TargetSet::Constant { bit } => Ok(*bit),
            TargetSet::MartingaleDescent { martingale } => {
                Ok(martingale.value(&x.child(true))? < martingale.value(&x.child(false))?)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TargetSet::MartingaleDescent { martingale } => martingale.validate(),
            _ => Ok(()),
        }
    }
}

/// A deterministic infinite bit sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SequenceOracle {
    /// `prefix` followed by `default` forever.
    ExplicitPrefix {
        prefix: BitString,
        #[serde(with = "bit01")]
        default: bool,
    },
    /// `pattern` repeated forever.
    Periodic { pattern: BitString },
    /// Bits drawn from SHA-256 of `(seed, chunk index)`.
    Pseudorandom { seed: u64 },
    /// `Z(2n) = base(n)`, `Z(2n+1) = target(Z ↾ 2n+1)`.
    Interleaved {
        target: TargetSet,
        base: Box<SequenceOracle>,
    },
    /// The leftmost non-ascending path of a martingale.
    LeftmostPath { martingale: Martingale },
    /// `Y(r) = base(S(r))`.
    Rearranged {
        permutation: Permutation,
        base: Box<SequenceOracle>,
    },
}

impl SequenceOracle {
    pub fn zeros() -> Self {
        SequenceOracle::ExplicitPrefix {
            prefix: BitString::new(),
            default: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SequenceOracle::Periodic { pattern } if pattern.is_empty() => {
                Err(Error::Descriptor("periodic pattern must be non-empty".into()))
            }
            SequenceOracle::Interleaved { target, base } => {
                target.validate()?;
                base.validate()
            }
            SequenceOracle::LeftmostPath { martingale } => martingale.validate(),
            SequenceOracle::Rearranged { permutation, base } => {
                permutation.validate()?;
                base.validate()
            }
            _ => Ok(()),
        }
    }

    /// `Z ↾ n`.
    pub fn prefix(&self, n: usize) -> Result<BitString> {
        match self {
            SequenceOracle::ExplicitPrefix { prefix, default } => Ok(BitString::from_bits(
                (0..n)
                    .map(|i| if i < prefix.len() { prefix.bit(i) } else { *default })
                    .collect(),
            )),
            SequenceOracle::Periodic { pattern } => {
                if pattern.is_empty() {
                    return Err(Error::Descriptor("periodic pattern must be non-empty".into()));
                }
                Ok(BitString::from_bits(
                    (0..n).map(|i| pattern.bit(i % pattern.len())).collect(),
                ))
            }
            SequenceOracle::Pseudorandom { seed } => Ok(BitString::from_bits(
                (0..n).map(|i| pseudorandom_bit(*seed, i as u64)).collect(),
            )),
            SequenceOracle::Interleaved { target, base } => {
                let b = base.prefix(n.div_ceil(2))?;
                let mut z = BitString::new();
                for i in 0..n {
                    let bit = if i % 2 == 0 {
                        b.bit(i / 2)
                    } else {
                        target.contains(&z)?
                    };
                    z.push(bit);
                }
                Ok(z)
            }
            SequenceOracle::LeftmostPath { martingale } => Ok(leftmost_path(martingale, n)?.bits),
            SequenceOracle::Rearranged { permutation, base } => {
                let images: Vec<u64> = (0..n as u64).map(|r| permutation.forward(r)).collect();
                let need = images.iter().max().map_or(0, |&m| m as usize + 1);
                let z = base.prefix(need)?;
                Ok(BitString::from_bits(images.iter().map(|&s| z.bit(s as usize)).collect()))
            }
        }
    }

    /// `Z(pos)`.
    pub fn bit(&self, pos: u64) -> Result<bool> {
        match self {
            SequenceOracle::Pseudorandom { seed } => Ok(pseudorandom_bit(*seed, pos)),
            SequenceOracle::ExplicitPrefix { prefix, default } => Ok(if (pos as usize) < prefix.len() {
                prefix.bit(pos as usize)
            } else {
                *default
            }),
            SequenceOracle::Periodic { pattern } if !pattern.is_empty() => {
                Ok(pattern.bit((pos % pattern.len() as u64) as usize))
            }
            SequenceOracle::Rearranged { permutation, base } => base.bit(permutation.forward(pos)),
            _ => Ok(self.prefix(pos as usize + 1)?.bit(pos as usize)),
        }
    }
}

fn pseudorandom_bit(seed: u64, pos: u64) -> bool {
    let mut h = Sha256::new();
    h.update(b"scanclosure.pseudorandom");
    h.update(seed.to_le_bytes());
    h.update((pos / 256).to_le_bytes());
    let digest = h.finalize();
    let within = (pos % 256) as usize;
    (digest[within / 8] >> (7 - within % 8)) & 1 == 1
}
