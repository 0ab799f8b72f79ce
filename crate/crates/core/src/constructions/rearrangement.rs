//! The block layout of the rearranged sequence.
//!
//! Block `n` holds `p(n)` base bits followed by one interleaved bit:
//! with `P(n) = Σ_{k<n} p(k)`, position `P(n) + n + m` (`m < p(n)`) maps to
//! `2(P(n) + m)` and position `P(n+1) + n` maps to `2n + 1`.

use serde::{Deserialize, Serialize};

use crate::poly::PolynomialNat;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLayout {
    pub p: PolynomialNat,
}

/// Where a position falls in the layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    /// The `m`-th base bit of block `n`.
    Base { n: u64, m: u64 },
    /// The interleaved bit closing block `n`.
    Target { n: u64 },
}

impl BlockLayout {
    pub fn new(p: PolynomialNat) -> Self {
        BlockLayout { p }
    }

    /// `P(n) = Σ_{k<n} p(k)`.
    pub fn base_offset(&self, n: u64) -> u64 {
        to_u64(self.p.prefix_sum(n))
    }

    /// First position of block `n`.
    pub fn block_start(&self, n: u64) -> u64 {
        self.base_offset(n) + n
    }

    /// Last position of block `n`, holding `Z(2n+1)`.
    pub fn target_slot(&self, n: u64) -> u64 {
        self.base_offset(n + 1) + n
    }

    pub fn block_len(&self, n: u64) -> u64 {
        to_u64(self.p.eval(n))
    }

    pub fn decode(&self, r: u64) -> Slot {
        let mut n = 0u64;
        let mut start = 0u64;
        loop {
            let len = self.block_len(n);
            if r < start + len {
                return Slot::Base { n, m: r - start };
            }
            if r == start + len {
                return Slot::Target { n };
            }
            start += len + 1;
            n += 1;
        }
    }

    /// The block holding base position `j`, with `j`'s offset in it.
    pub fn base_block(&self, j: u64) -> (u64, u64) {
        let mut n = 0u64;
        let mut offset = 0u64;
        loop {
            let len = self.block_len(n);
            if j < offset + len {
                return (n, j - offset);
            }
            offset += len;
            n += 1;
        }
    }

    /// `S(r)`.
    pub fn forward(&self, r: u64) -> u64 {
        match self.decode(r) {
            Slot::Base { n, m } => 2 * (self.base_offset(n) + m),
            Slot::Target { n } => 2 * n + 1,
        }
    }

    /// `S⁻¹(s)`.
    pub fn inverse(&self, s: u64) -> u64 {
        if s % 2 == 1 {
            self.target_slot(s / 2)
        } else {
            let (n, m) = self.base_block(s / 2);
            self.block_start(n) + m
        }
    }
}

fn to_u64(v: u128) -> u64 {
    u64::try_from(v).expect("block layout position beyond u64 positions")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout() -> BlockLayout {
        BlockLayout::new(PolynomialNat::linear(2, 1).unwrap())
    }

    #[test]
    fn small_images() {
        let l = layout();
        let images: Vec<u64> = (0..7).map(|r| l.forward(r)).collect();
        assert_eq!(images, vec![0, 2, 1, 4, 6, 8, 3]);
        assert_eq!(l.block_start(1), 3);
        assert_eq!(l.target_slot(0), 2);
        assert_eq!(l.target_slot(1), 6);
        assert_eq!(l.decode(6), Slot::Target { n: 1 });
        assert_eq!(l.decode(4), Slot::Base { n: 1, m: 1 });
    }

    #[test]
    fn small_preimages() {
        let l = layout();
        let pre: Vec<u64> = (0..11).map(|s| l.inverse(s)).collect();
        assert_eq!(pre, vec![0, 2, 1, 6, 3, 11, 4, 17, 5, 24, 7]);
    }

    #[test]
    fn bijective_on_prefix() {
        let l = layout();
        for r in 0..3000 {
            assert_eq!(l.inverse(l.forward(r)), r);
            assert_eq!(l.forward(l.inverse(r)), r);
        }
    }

    #[test]
    fn zero_length_blocks() {
        // p(n) = n: block 0 is just the interleaved slot.
        let l = BlockLayout::new(PolynomialNat::linear(0, 1).unwrap());
        assert_eq!(l.forward(0), 1);
        assert_eq!(l.forward(1), 0);
        assert_eq!(l.forward(2), 3);
        for r in 0..500 {
            assert_eq!(l.inverse(l.forward(r)), r);
        }
    }
}
