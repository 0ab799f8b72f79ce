//! Averaging martingales of non-monotonic betting strategies.
//!
//! For a strategy `G = (V, B)` with `V` g-filling and `t ≥ g(|w|)`,
//!
//! ```text
//!     D(w) = 2^(|w| - t) · Σ_{|α| = t, α ∼_V w} B(α)
//! ```
//!
//! i.e. the average of `B` over the runs of length `t` consistent with `w`.
//! `D` does not depend on `t`, is a martingale, and reaches `c` on `Z ↾ r`
//! whenever `B` is at least `c` on every extension of a prefix of `Z ∘ V`
//! whose queries all lie below `r`.

use serde::{Deserialize, Serialize};

use crate::bits::{BitString, Run};
use crate::error::{ensure_pow2_budget, Error, Result};
use crate::martingale::Martingale;
use crate::rational::Rational;
use crate::scan::{
    compose_with_scanner, filling_check, filling_table, permutation_to_scanner, queries, Filling,
    Permutation, ScanningFunction,
};
use crate::sequence::SequenceOracle;

/// A non-monotonic betting strategy `(V, B)` with a filling certificate
/// validated for every `n ≤ certified_depth`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BettingStrategy {
    pub certified_depth: usize,
    pub scanner: ScanningFunction,
    pub filling: Filling,
    pub martingale: Martingale,
}

impl BettingStrategy {
    pub fn new(
        scanner: ScanningFunction,
        martingale: Martingale,
        filling: Filling,
        certified_depth: usize,
        budget: u64,
    ) -> Result<Self> {
        let g = BettingStrategy {
            certified_depth,
            scanner,
            filling,
            martingale,
        };
        g.validate(budget)?;
        Ok(g)
    }

    /// The strategy `(V_S, B)` with the exact filling table of `S`.
    pub fn for_permutation(
        permutation: Permutation,
        martingale: Martingale,
        certified_depth: usize,
        budget: u64,
    ) -> Result<Self> {
        let filling = filling_table(&permutation, certified_depth)?;
        Self::new(
            permutation_to_scanner(permutation),
            martingale,
            filling,
            certified_depth,
            budget,
        )
    }

    /// Re-validates the descriptors and the filling certificate, including
    /// `g(n) ≥ n`.
    pub fn validate(&self, budget: u64) -> Result<()> {
        self.scanner.validate()?;
        self.martingale.validate()?;
        self.filling.validate()?;
        for n in 0..=self.certified_depth {
            let g = self.filling.at(n)?;
            if g < n {
                return Err(Error::Descriptor(format!(
                    "filling bound g({n}) = {g} is below {n}"
                )));
            }
            let report = filling_check(&self.scanner, &self.filling, n, budget)?;
            if !report.ok {
                return Err(Error::Descriptor(format!(
                    "scanner is not {g}-filling at n = {n}: run \"{}\" misses {}",
                    report.witness_run.unwrap_or_default(),
                    report.missed_position.unwrap_or_default()
                )));
            }
        }
        Ok(())
    }

    pub fn g(&self, n: usize) -> Result<usize> {
        if n > self.certified_depth {
            return Err(Error::Precondition(format!(
                "filling certificate covers n ≤ {}, asked for {n}",
                self.certified_depth
            )));
        }
        self.filling.at(n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragingReport {
    pub w: BitString,
    pub t: usize,
    pub value: Rational,
    /// Size of the run space `{0,1}^t` covered by the enumeration.
    pub runs_enumerated: u64,
    pub consistent_count: u64,
}

/// `D(w)` at `t` (default `g(|w|)`).
pub fn averaging_value(
    g: &BettingStrategy,
    w: &BitString,
    t: Option<usize>,
    budget: u64,
) -> Result<AveragingReport> {
    let min_t = g.g(w.len())?;
    let t = t.unwrap_or(min_t);
    if t < min_t {
        return Err(Error::Precondition(format!(
            "t = {t} is below g(|w|) = {min_t}"
        )));
    }
    ensure_pow2_budget(t as u64, budget, "runs")?;

    // Depth-first over runs of length t; answers to queries below |w| are
    // forced by w, which prunes exactly the inconsistent runs.
    fn walk(
        g: &BettingStrategy,
        w: &BitString,
        run: &mut Run,
        t: usize,
        sum: &mut Rational,
        count: &mut u64,
    ) -> Result<()> {
        if run.len() == t {
            *sum = &*sum + g.martingale.value(run)?;
            *count += 1;
            return Ok(());
        }
        let q = g.scanner.query(run)? as usize;
        let answers: &[bool] = if q < w.len() {
            if w.bit(q) {
                &[true]
            } else {
                &[false]
            }
        } else {
            &[false, true]
        };
        for &b in answers {
            run.push(b);
            let r = walk(g, w, run, t, sum, count);
            run.pop();
            r?;
        }
        Ok(())
    }

    let mut sum = Rational::zero();
    let mut count = 0u64;
    walk(g, w, &mut BitString::new(), t, &mut sum, &mut count)?;
    Ok(AveragingReport {
        w: w.clone(),
        t,
        value: sum * Rational::pow2(w.len() as i64 - t as i64),
        runs_enumerated: 1u64 << t,
        consistent_count: count,
    })
}

/// `D(w)` computed at `t1` and at `t2` agree exactly.
pub fn t_independence_check(
    g: &BettingStrategy,
    w: &BitString,
    t1: usize,
    t2: usize,
    budget: u64,
) -> Result<bool> {
    if t1 >= t2 {
        return Err(Error::Precondition(format!("need t1 < t2, got {t1} and {t2}")));
    }
    let a = averaging_value(g, w, Some(t1), budget)?;
    let b = averaging_value(g, w, Some(t2), budget)?;
    Ok(a.value == b.value)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaViolation {
    pub w: BitString,
    pub value: Rational,
    pub left: Rational,
    pub right: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub ok: bool,
    pub depth: usize,
    pub nodes_checked: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<LemmaViolation>,
}

/// `D(w0) + D(w1) = 2·D(w)` for every `|w| < depth`, breadth-first.
pub fn fairness_lemma_check(g: &BettingStrategy, depth: usize, budget: u64) -> Result<LemmaReport> {
    let mut level = vec![(BitString::new(), averaging_value(g, &BitString::new(), None, budget)?.value)];
    let mut checked = 0u64;
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * 2);
        for (w, d) in level {
            checked += 1;
            let w0 = w.child(false);
            let w1 = w.child(true);
            let d0 = averaging_value(g, &w0, None, budget)?.value;
            let d1 = averaging_value(g, &w1, None, budget)?.value;
            if &d0 + &d1 != Rational::from_integer(2) * &d {
                return Ok(LemmaReport {
                    ok: false,
                    depth,
                    nodes_checked: checked,
                    violation: Some(LemmaViolation {
                        w,
                        value: d,
                        left: d0,
                        right: d1,
                    }),
                });
            }
            next.push((w0, d0));
            next.push((w1, d1));
        }
        level = next;
    }
    Ok(LemmaReport {
        ok: true,
        depth,
        nodes_checked: checked,
        violation: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuccessConfig {
    /// Longest prefix of `Z ∘ V` tried as the anchor run `α`.
    pub max_prefix: usize,
    pub budget: u64,
}

impl Default for SuccessConfig {
    fn default() -> Self {
        SuccessConfig {
            max_prefix: 16,
            budget: crate::error::DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessReport {
    pub found: bool,
    pub threshold: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<BitString>,
    /// `1 + max` query of `α`; the demonstration evaluates `D(Z ↾ r)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_value: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reached: Option<bool>,
}

/// Searches the shortest prefix `α` of `Z ∘ V` such that `B(β) ≥ c` for
/// every `β ⊒ α` up to length `t = g(r)`, where `r = 1 + max` query of `α`;
/// then evaluates `D(Z ↾ r)`, which must be at least `c`.
///
/// This is a semi-decision: not finding `α` within `max_prefix` says nothing
/// about success in the limit.
pub fn success_transfer_demo(
    g: &BettingStrategy,
    z: &SequenceOracle,
    c: &Rational,
    cfg: SuccessConfig,
) -> Result<SuccessReport> {
    let miss = SuccessReport {
        found: false,
        threshold: c.clone(),
        alpha: None,
        r: None,
        t: None,
        d_value: None,
        reached: None,
    };
    let y = compose_with_scanner(z, &g.scanner, cfg.max_prefix)?;
    for len in 0..=cfg.max_prefix {
        let alpha = y.prefix(len);
        let r = queries(&g.scanner, &alpha)?
            .into_iter()
            .max()
            .map_or(0, |m| m as usize + 1);
        if r > g.certified_depth {
            break;
        }
        let t = g.g(r)?;
        if t < len {
            return Err(Error::Precondition(format!(
                "g({r}) = {t} is shorter than the run it must cover ({len})"
            )));
        }
        ensure_pow2_budget((t - len + 1) as u64, cfg.budget, "extensions")?;
        if !extensions_reach(&g.martingale, &alpha, t, c)? {
            continue;
        }
        let w = z.prefix(r)?;
        let d = averaging_value(g, &w, Some(t), cfg.budget)?.value;
        return Ok(SuccessReport {
            found: true,
            threshold: c.clone(),
            alpha: Some(alpha),
            r: Some(r),
            t: Some(t),
            reached: Some(&d >= c),
            d_value: Some(d),
        });
    }
    Ok(miss)
}

fn extensions_reach(b: &Martingale, alpha: &Run, t: usize, c: &Rational) -> Result<bool> {
    if &b.value(alpha)? < c {
        return Ok(false);
    }
    if alpha.len() == t {
        return Ok(true);
    }
    for bit in [false, true] {
        if !extensions_reach(b, &alpha.child(bit), t, c)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::martingale::{Beyond, StakeTable};
    use crate::poly::PolynomialNat;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    const BUDGET: u64 = 1 << 20;

    /// B(ε)=1, B(1·)=3/2, B(0·)=1/2 and no further bets.
    fn first_bit_bettor() -> Martingale {
        Martingale::table(StakeTable::new(1, vec![q(1, 1), q(1, 2), q(3, 2)], Beyond::Hold).unwrap())
    }

    fn pair_swap_strategy() -> BettingStrategy {
        BettingStrategy::new(
            ScanningFunction::pair_swap(),
            first_bit_bettor(),
            Filling::polynomial(vec![1, 1]).unwrap(),
            5,
            BUDGET,
        )
        .unwrap()
    }

    #[test]
    fn constant_b_averages_to_constant() {
        let g = BettingStrategy::for_permutation(Permutation::PairSwap, Martingale::one(), 4, BUDGET).unwrap();
        for len in 0..=4 {
            for w in BitString::all_of_length(len) {
                assert_eq!(averaging_value(&g, &w, None, BUDGET).unwrap().value, Rational::one());
            }
        }
    }

    #[test]
    fn pair_swap_example_values() {
        let g = pair_swap_strategy();
        let d1 = averaging_value(&g, &bs("1"), None, BUDGET).unwrap();
        assert_eq!(d1.value, q(1, 1));
        assert_eq!(d1.t, 2);
        assert_eq!(d1.consistent_count, 2);
        assert_eq!(averaging_value(&g, &bs("01"), None, BUDGET).unwrap().value, q(3, 2));
        assert_eq!(averaging_value(&g, &bs("0"), None, BUDGET).unwrap().value, q(1, 1));
        assert!(t_independence_check(&g, &bs("1"), 2, 3, BUDGET).unwrap());
        assert!(fairness_lemma_check(&g, 4, BUDGET).unwrap().ok);
    }

    #[test]
    fn identity_collapse() {
        let b = Martingale::favor_bit(true, q(5, 4)).unwrap().savings();
        let g = BettingStrategy::for_permutation(Permutation::Identity, b.clone(), 5, BUDGET).unwrap();
        for len in 0..=5 {
            for w in BitString::all_of_length(len) {
                assert_eq!(averaging_value(&g, &w, None, BUDGET).unwrap().value, b.value(&w).unwrap());
            }
        }
    }

    #[test]
    fn small_t_is_rejected() {
        let g = pair_swap_strategy();
        let err = averaging_value(&g, &bs("1"), Some(1), BUDGET).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        let err = averaging_value(&g, &bs("1"), Some(30), BUDGET).unwrap_err();
        assert!(err.is_budget());
    }

    #[test]
    fn certificate_is_enforced() {
        let bad = BettingStrategy::new(
            ScanningFunction::pair_swap(),
            Martingale::one(),
            Filling::polynomial(vec![0, 1]).unwrap(),
            3,
            BUDGET,
        );
        assert!(matches!(bad, Err(Error::Descriptor(_))));
        let g = pair_swap_strategy();
        assert!(averaging_value(&g, &bs("010101"), None, BUDGET).is_err());
    }

    #[test]
    fn block_rearrangement_lemma() {
        let p = PolynomialNat::linear(2, 1).unwrap();
        let b = Martingale::favor_bit(false, q(3, 2)).unwrap();
        let g = BettingStrategy::for_permutation(Permutation::BlockRearrangement { p }, b, 4, BUDGET).unwrap();
        assert!(fairness_lemma_check(&g, 3, BUDGET).unwrap().ok);
    }

    #[test]
    fn success_demo_constant_fails_within_budget() {
        let g = BettingStrategy::for_permutation(Permutation::PairSwap, Martingale::one(), 10, BUDGET).unwrap();
        let z = SequenceOracle::Pseudorandom { seed: 3 };
        let r = success_transfer_demo(&g, &z, &q(2, 1), SuccessConfig { max_prefix: 8, budget: BUDGET }).unwrap();
        assert!(!r.found);
    }

    #[test]
    fn success_demo_identity_savings() {
        let b = Martingale::favor_bit(false, q(3, 2)).unwrap().savings();
        let g = BettingStrategy::for_permutation(Permutation::Identity, b, 12, BUDGET).unwrap();
        let r = success_transfer_demo(&g, &SequenceOracle::zeros(), &q(2, 1), SuccessConfig::default()).unwrap();
        assert!(r.found);
        assert_eq!(r.reached, Some(true));
        assert!(r.r.unwrap() <= 6);
    }
}
