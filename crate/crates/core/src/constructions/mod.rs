//! Concrete sequences, permutations and martingales: delay points and the
//! leftmost non-ascending path, the dishonest permutation, the block
//! rearrangement, and the bin and predictor martingales.

pub mod bpp;
pub mod dishonest;
pub mod domination;
pub mod rearrangement;
