//! Random martingale descriptors for property tests and experiments.

use rand::Rng;

use crate::bits::BitString;
use crate::martingale::{Beyond, Martingale, StakeTable};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleConfig {
    /// Deepest stake table generated (at least 1).
    pub max_table_depth: usize,
    /// Deepest nesting of composition nodes.
    pub max_nesting: usize,
    pub max_delay: usize,
    pub max_children: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            max_table_depth: 6,
            max_nesting: 3,
            max_delay: 4,
            max_children: 3,
        }
    }
}

/// A factor `ρ = a/b` with `0 < ρ < 2`.
pub fn random_factor<R: Rng + ?Sized>(rng: &mut R) -> Rational {
    let b = [2i64, 3, 4, 5, 8][rng.random_range(0..5)];
    let a = rng.random_range(1..2 * b);
    Rational::new(a, b)
}

/// A fair stake table of the given depth, `M(ε) = 1`, with independent
/// random factors at every node. It stops betting past its depth.
pub fn fair_table<R: Rng + ?Sized>(rng: &mut R, depth: usize) -> StakeTable {
    let two = Rational::from_integer(2);
    let mut values = vec![Rational::one()];
    for idx in 0..(1usize << depth) - 1 {
        let rho = random_factor(rng);
        let v = values[idx].clone();
        values.push(&v * &rho);
        values.push(&v * (&two - &rho));
    }
    StakeTable::new(depth, values, Beyond::Hold).expect("layout matches depth")
}

/// A table that bets `factor` on each bit of `path` in turn.
pub fn path_doubler(path: &BitString, factor: &Rational) -> Martingale {
    Martingale::table(StakeTable::favor_path(path, factor).expect("factor in (0, 2)"))
}

/// A random leaf: a fair table, a favor-bit martingale or a constant.
pub fn random_leaf<R: Rng + ?Sized>(rng: &mut R, cfg: &SampleConfig) -> Martingale {
    match rng.random_range(0..6) {
        0 => Martingale::Constant {
            value: Rational::new(rng.random_range(1..9), rng.random_range(1..5)),
        },
        1 | 2 => Martingale::favor_bit(rng.random_bool(0.5), random_factor(rng))
            .expect("factor in (0, 2)"),
        _ => {
            let depth = rng.random_range(1..=cfg.max_table_depth.max(1));
            Martingale::table(fair_table(rng, depth))
        }
    }
}

/// A random descriptor tree of leaves combined by delay, weighted sum and
/// savings nodes.
pub fn random_martingale<R: Rng + ?Sized>(rng: &mut R, cfg: &SampleConfig) -> Martingale {
    random_tree(rng, cfg, cfg.max_nesting)
}

fn random_tree<R: Rng + ?Sized>(rng: &mut R, cfg: &SampleConfig, nesting: usize) -> Martingale {
    if nesting == 0 {
        return random_leaf(rng, cfg);
    }
    match rng.random_range(0..5) {
        0 => random_leaf(rng, cfg),
        1 => random_tree(rng, cfg, nesting - 1).delayed(rng.random_range(0..=cfg.max_delay)),
        2 => {
            let k = rng.random_range(1..=cfg.max_children.max(1));
            Martingale::weighted_sum((0..k).map(|_| random_tree(rng, cfg, nesting - 1)).collect())
                .expect("non-empty")
        }
        _ => random_tree(rng, cfg, nesting - 1).savings(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingale::fairness_check;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn factors_are_in_range() {
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..200 {
            let f = random_factor(&mut rng);
            assert!(f.is_positive() && f < Rational::from_integer(2));
        }
    }

    #[test]
    fn samples_are_fair() {
        let mut rng = StdRng::seed_from_u64(2);
        let cfg = SampleConfig::default();
        for _ in 0..20 {
            let m = random_martingale(&mut rng, &cfg);
            m.validate().unwrap();
            assert!(fairness_check(&m, 5).unwrap().ok);
        }
    }
}
