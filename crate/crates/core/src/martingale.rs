//! Martingale descriptors and their exact evaluation.
//!
//! A [`Martingale`] is a tree of node kinds evaluated at finite bit strings.
//! Every node is a capital function `M: {0,1}* → ℚ` meant to satisfy
//! `M(x) = (M(x0) + M(x1)) / 2`; [`fairness_check`] verifies this exactly to
//! any depth. Composition nodes (delay, weighted sum, savings) expect
//! strictly positive children and report the offending node otherwise.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bits::{bit01, BitString};
use crate::closure::{averaging_value, BettingStrategy};
use crate::constructions::bpp::{BinMartingale, PredictorMartingale};
use crate::error::{ensure_pow2_budget, Error, Result, DEFAULT_BUDGET};
use crate::rational::Rational;
use crate::sequence::SequenceOracle;

/// Deepest stake table accepted (the table holds `2^(depth+1) - 1` values).
pub const MAX_TABLE_DEPTH: usize = 24;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Beyond {
    /// Queries longer than the table depth are an error.
    #[default]
    Reject,
    /// The martingale stops betting after the table depth.
    Hold,
}

/// Explicit capital values for every string of length `≤ depth`, stored in
/// breadth-first order (`ε, 0, 1, 00, 01, …`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StakeTable {
    pub depth: usize,
    #[serde(default)]
    pub beyond: Beyond,
    pub values: Vec<Rational>,
}

impl StakeTable {
    pub fn new(depth: usize, values: Vec<Rational>, beyond: Beyond) -> Result<Self> {
        let t = StakeTable {
            depth,
            beyond,
            values,
        };
        t.validate()?;
        Ok(t)
    }

    /// Builds the table of `f` on all strings of length `≤ depth`.
    pub fn tabulate(
        depth: usize,
        beyond: Beyond,
        mut f: impl FnMut(&BitString) -> Rational,
    ) -> Result<Self> {
        if depth > MAX_TABLE_DEPTH {
            return Err(Error::Descriptor(format!(
                "stake table depth {depth} exceeds {MAX_TABLE_DEPTH}"
            )));
        }
        let values = (0..=depth)
            .flat_map(BitString::all_of_length)
            .map(|x| f(&x))
            .collect();
        Self::new(depth, values, beyond)
    }

    /// Bets `factor` on `path[j]` at every position `j < |path|` and stops
    /// afterwards. Depth equals `|path|`.
    pub fn favor_path(path: &BitString, factor: &Rational) -> Result<Self> {
        check_factor(factor)?;
        let other = Rational::from_integer(2) - factor;
        Self::tabulate(path.len(), Beyond::Hold, |x| {
            x.bits()
                .iter()
                .zip(path.bits())
                .fold(Rational::one(), |acc, (a, b)| {
                    if a == b {
                        acc * factor
                    } else {
                        acc * &other
                    }
                })
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth > MAX_TABLE_DEPTH {
            return Err(Error::Descriptor(format!(
                "stake table depth {} exceeds {MAX_TABLE_DEPTH}",
                self.depth
            )));
        }
        let expected = (1usize << (self.depth + 1)) - 1;
        if self.values.len() != expected {
            return Err(Error::Descriptor(format!(
                "stake table of depth {} needs {expected} values, found {}",
                self.depth,
                self.values.len()
            )));
        }
        Ok(())
    }

    pub fn value(&self, x: &BitString) -> Result<Rational> {
        let x = if x.len() > self.depth {
            match self.beyond {
                Beyond::Reject => {
                    return Err(Error::OutOfDepth {
                        node: "stake-table".into(),
                        depth: self.depth,
                        len: x.len(),
                    })
                }
                Beyond::Hold => x.prefix(self.depth),
            }
        } else {
            x.clone()
        };
        let idx = x.heap_index().expect("depth bounded by MAX_TABLE_DEPTH");
        self.values
            .get(idx)
            .cloned()
            .ok_or_else(|| Error::Descriptor("malformed stake table".into()))
    }
}

fn default_initial() -> Rational {
    Rational::one()
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

/// A martingale descriptor tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Martingale {
    Constant {
        value: Rational,
    },
    StakeTable(StakeTable),
    /// Bets on `bit` at every position: capital times `factor` when the
    /// bit appears, times `2 - factor` otherwise.
    FavorBit {
        #[serde(with = "bit01")]
        bit: bool,
        factor: Rational,
        #[serde(default = "default_initial")]
        initial: Rational,
    },
    /// Capital 1 up to length `delay`, then the child's betting factors:
    /// `child(x) / child(x ↾ delay)`.
    Delayed {
        delay: usize,
        child: Box<Martingale>,
    },
    /// `Σ_{r ≤ k} 2^-r · children[r](x) + 2^-k` with `k = children.len() - 1`.
    WeightedSum {
        children: Vec<Martingale>,
    },
    /// Savings-account transform of the child (see [`savings_accounts`]).
    Savings {
        child: Box<Martingale>,
    },
    /// The averaging martingale of a non-monotonic betting strategy.
    Averaging {
        #[serde(default = "default_budget")]
        budget: u64,
        strategy: Box<BettingStrategy>,
    },
    Bin(BinMartingale),
    Predictor(PredictorMartingale),
}

fn check_factor(factor: &Rational) -> Result<()> {
    if !factor.is_positive() || factor >= &Rational::from_integer(2) {
        return Err(Error::Descriptor(format!(
            "betting factor {factor} must lie strictly between 0 and 2"
        )));
    }
    Ok(())
}

impl Martingale {
    pub fn constant(value: Rational) -> Result<Self> {
        let m = Martingale::Constant { value };
        m.validate()?;
        Ok(m)
    }

    /// The constant-1 martingale.
    pub fn one() -> Self {
        Martingale::Constant {
            value: Rational::one(),
        }
    }

    pub fn favor_bit(bit: bool, factor: Rational) -> Result<Self> {
        check_factor(&factor)?;
        Ok(Martingale::FavorBit {
            bit,
            factor,
            initial: Rational::one(),
        })
    }

    pub fn table(table: StakeTable) -> Self {
        Martingale::StakeTable(table)
    }

    pub fn delayed(self, delay: usize) -> Self {
        Martingale::Delayed {
            delay,
            child: Box::new(self),
        }
    }

    pub fn weighted_sum(children: Vec<Martingale>) -> Result<Self> {
        let m = Martingale::WeightedSum { children };
        m.validate()?;
        Ok(m)
    }

    pub fn savings(self) -> Self {
        Martingale::Savings {
            child: Box::new(self),
        }
    }

    pub fn averaging(strategy: BettingStrategy) -> Self {
        Martingale::Averaging {
            budget: DEFAULT_BUDGET,
            strategy: Box::new(strategy),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Martingale::Constant { .. } => "constant",
            Martingale::StakeTable(_) => "stake-table",
            Martingale::FavorBit { .. } => "favor-bit",
            Martingale::Delayed { .. } => "delayed",
            Martingale::WeightedSum { .. } => "weighted-sum",
            Martingale::Savings { .. } => "savings",
            Martingale::Averaging { .. } => "averaging",
            Martingale::Bin(_) => "bin",
            Martingale::Predictor(_) => "predictor",
        }
    }

    /// Structural validation of the whole tree.
    pub fn validate(&self) -> Result<()> {
        match self {
            Martingale::Constant { value } => {
                if !value.is_positive() {
                    return Err(Error::Descriptor(format!(
                        "constant martingale must be positive, got {value}"
                    )));
                }
                Ok(())
            }
            Martingale::StakeTable(t) => t.validate(),
            Martingale::FavorBit { factor, initial, .. } => {
                check_factor(factor)?;
                if !initial.is_positive() {
                    return Err(Error::Descriptor(format!(
                        "initial capital must be positive, got {initial}"
                    )));
                }
                Ok(())
            }
            Martingale::Delayed { child, .. } | Martingale::Savings { child } => child.validate(),
            Martingale::WeightedSum { children } => {
                if children.is_empty() {
                    return Err(Error::Descriptor("weighted sum needs at least one child".into()));
                }
                children.iter().try_for_each(Martingale::validate)
            }
            Martingale::Averaging { budget, strategy } => strategy.validate(*budget),
            Martingale::Bin(b) => b.validate(),
            Martingale::Predictor(p) => p.validate(),
        }
    }

    /// `M(x)`, exact.
    pub fn value(&self, x: &BitString) -> Result<Rational> {
        match self {
            Martingale::Constant { value } => Ok(value.clone()),
            Martingale::StakeTable(t) => t.value(x),
            Martingale::FavorBit {
                bit,
                factor,
                initial,
            } => {
                let hits = x.bits().iter().filter(|&&b| b == *bit).count();
                let misses = x.len() - hits;
                let other = Rational::from_integer(2) - factor;
                Ok(initial * factor.pow(hits as u32) * other.pow(misses as u32))
            }
            Martingale::Delayed { delay, child } => {
                if x.len() <= *delay {
                    return Ok(Rational::one());
                }
                let num = child.value(x).map_err(|e| e.within("delayed"))?;
                let start = x.prefix(*delay);
                let den = child.value(&start).map_err(|e| e.within("delayed"))?;
                if !den.is_positive() {
                    return Err(Error::NonPositive {
                        node: format!("delayed/{}", child.kind()),
                        at: start.to_string(),
                        value: den.to_string(),
                    });
                }
                Ok(num / den)
            }
            Martingale::WeightedSum { children } => {
                let mut total = Rational::pow2(-(children.len() as i64 - 1));
                for (r, child) in children.iter().enumerate() {
                    let v = child
                        .value(x)
                        .map_err(|e| e.within(&format!("weighted-sum[{r}]")))?;
                    total = total + v * Rational::pow2(-(r as i64));
                }
                Ok(total)
            }
            Martingale::Savings { child } => {
                let (s, a) = savings_accounts(child, x).map_err(|e| e.within("savings"))?;
                Ok(s + a)
            }
            Martingale::Averaging { budget, strategy } => {
                Ok(averaging_value(strategy, x, None, *budget)?.value)
            }
            Martingale::Bin(b) => b.value(x),
            Martingale::Predictor(p) => p.value(x),
        }
    }

    /// `M(x ↾ n)` for `n = 0..=|x|`, sharing work between prefixes.
    pub fn prefix_values(&self, x: &BitString) -> Result<Vec<Rational>> {
        match self {
            Martingale::Constant { value } => Ok(vec![value.clone(); x.len() + 1]),
            Martingale::FavorBit {
                bit,
                factor,
                initial,
            } => {
                let other = Rational::from_integer(2) - factor;
                let mut out = Vec::with_capacity(x.len() + 1);
                out.push(initial.clone());
                for &b in x.bits() {
                    let last = out.last().expect("non-empty");
                    let next = if b == *bit { last * factor } else { last * &other };
                    out.push(next);
                }
                Ok(out)
            }
            Martingale::Delayed { delay, child } => {
                if x.len() <= *delay {
                    return Ok(vec![Rational::one(); x.len() + 1]);
                }
                let vals = child.prefix_values(x).map_err(|e| e.within("delayed"))?;
                let den = &vals[*delay];
                if !den.is_positive() {
                    return Err(Error::NonPositive {
                        node: format!("delayed/{}", child.kind()),
                        at: x.prefix(*delay).to_string(),
                        value: den.to_string(),
                    });
                }
                Ok(vals
                    .iter()
                    .enumerate()
                    .map(|(n, v)| if n <= *delay { Rational::one() } else { v / den })
                    .collect())
            }
            Martingale::WeightedSum { children } => {
                let tail = Rational::pow2(-(children.len() as i64 - 1));
                let mut out = vec![tail; x.len() + 1];
                for (r, child) in children.iter().enumerate() {
                    let vals = child
                        .prefix_values(x)
                        .map_err(|e| e.within(&format!("weighted-sum[{r}]")))?;
                    let w = Rational::pow2(-(r as i64));
                    for (o, v) in out.iter_mut().zip(vals) {
                        *o = &*o + v * &w;
                    }
                }
                Ok(out)
            }
            Martingale::Savings { child } => {
                let vals = child.prefix_values(x).map_err(|e| e.within("savings"))?;
                Ok(savings_trace(child, x, &vals)
                    .map_err(|e| e.within("savings"))?
                    .into_iter()
                    .map(|(s, a)| s + a)
                    .collect())
            }
            _ => (0..=x.len()).map(|n| self.value(&x.prefix(n))).collect(),
        }
    }
}

/// The two accounts `(s, a)` of the savings transform of `m` at `x`.
///
/// Starting from `s(ε) = 0`, `a(ε) = 1`, the betting account follows the
/// relative stakes of `m`: `a(xb) = a(x) · m(xb) / m(x)`. Whenever that
/// reaches 2 or more, everything above 1 moves to savings:
/// `s(xb) = s(x) + a(xb) - 1` and `a(xb) = 1`. Transfers preserve `s + a`,
/// `s` never decreases and `a < 2` after every step, so `s + a` is a
/// martingale that never drops more than 2 below an earlier value.
pub fn savings_accounts(m: &Martingale, x: &BitString) -> Result<(Rational, Rational)> {
    let vals = m.prefix_values(x)?;
    Ok(savings_trace(m, x, &vals)?.pop().expect("non-empty"))
}

/// The accounts `(s, a)` at every prefix of `x`, given `m` on those prefixes.
fn savings_trace(m: &Martingale, x: &BitString, vals: &[Rational]) -> Result<Vec<(Rational, Rational)>> {
    let two = Rational::from_integer(2);
    let mut saved = Rational::zero();
    let mut account = Rational::one();
    let mut out = Vec::with_capacity(vals.len());
    out.push((saved.clone(), account.clone()));
    for (n, pair) in vals.windows(2).enumerate() {
        let (prev, next) = (&pair[0], &pair[1]);
        if !prev.is_positive() {
            return Err(Error::NonPositive {
                node: m.kind().into(),
                at: x.prefix(n).to_string(),
                value: prev.to_string(),
            });
        }
        account = account * next / prev;
        if account >= two {
            saved = saved + &account - Rational::one();
            account = Rational::one();
        }
        out.push((saved.clone(), account.clone()));
    }
    Ok(out)
}

/// The first string at which a fairness check failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub at: BitString,
    /// `"unfair"` or `"non-positive"`.
    pub problem: String,
    pub value: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub left: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub ok: bool,
    pub depth: usize,
    pub nodes_checked: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<Violation>,
}

/// Checks `2·M(x) = M(x0) + M(x1)` for all `|x| < depth` and `M(x) > 0` for
/// all `|x| ≤ depth`, in breadth-first order; reports the first failure.
pub fn fairness_check(m: &Martingale, depth: usize) -> Result<FairnessReport> {
    fairness_check_with_budget(m, depth, DEFAULT_BUDGET)
}

pub fn fairness_check_with_budget(
    m: &Martingale,
    depth: usize,
    budget: u64,
) -> Result<FairnessReport> {
    ensure_pow2_budget(depth as u64, budget, "strings")?;
    let non_positive = |at: &BitString, value: &Rational| Violation {
        at: at.clone(),
        problem: "non-positive".into(),
        value: value.clone(),
        left: None,
        right: None,
    };
    let mut level: Vec<(BitString, Rational)> = vec![(BitString::new(), m.value(&BitString::new())?)];
    let mut checked = 0u64;
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * 2);
        for (x, v) in &level {
            checked += 1;
            if !v.is_positive() {
                return Ok(FairnessReport {
                    ok: false,
                    depth,
                    nodes_checked: checked,
                    violation: Some(non_positive(x, v)),
                });
            }
            let x0 = x.child(false);
            let x1 = x.child(true);
            let v0 = m.value(&x0)?;
            let v1 = m.value(&x1)?;
            if Rational::from_integer(2) * v != &v0 + &v1 {
                return Ok(FairnessReport {
                    ok: false,
                    depth,
                    nodes_checked: checked,
                    violation: Some(Violation {
                        at: x.clone(),
                        problem: "unfair".into(),
                        value: v.clone(),
                        left: Some(v0),
                        right: Some(v1),
                    }),
                });
            }
            next.push((x0, v0));
            next.push((x1, v1));
        }
        level = next;
    }
    for (x, v) in &level {
        checked += 1;
        if !v.is_positive() {
            return Ok(FairnessReport {
                ok: false,
                depth,
                nodes_checked: checked,
                violation: Some(non_positive(x, v)),
            });
        }
    }
    Ok(FairnessReport {
        ok: true,
        depth,
        nodes_checked: checked,
        violation: None,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TracePoint {
    pub step: usize,
    pub prefix: BitString,
    pub value: Rational,
}

/// `M(Z ↾ n)` for `n = 0..=steps`.
pub fn capital_trace(m: &Martingale, z: &SequenceOracle, steps: usize) -> Result<Vec<TracePoint>> {
    let bits = z.prefix(steps)?;
    Ok(m.prefix_values(&bits)?
        .into_iter()
        .enumerate()
        .map(|(n, value)| TracePoint {
            step: n,
            prefix: bits.prefix(n),
            value,
        })
        .collect())
}

/// Writes a trace as CSV with header `step,prefix,numerator,denominator`.
pub fn write_trace_csv<W: Write>(points: &[TracePoint], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "prefix", "numerator", "denominator"])?;
    for p in points {
        w.write_record([
            p.step.to_string(),
            p.prefix.to_string(),
            p.value.numer().to_string(),
            p.value.denom().to_string(),
        ])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn table(depth: usize, vals: &[(i64, i64)]) -> Martingale {
        let values = vals.iter().map(|&(n, d)| q(n, d)).collect();
        Martingale::table(StakeTable::new(depth, values, Beyond::Reject).unwrap())
    }

    #[test]
    fn constant_one_is_fair() {
        let r = fairness_check(&Martingale::one(), 6).unwrap();
        assert!(r.ok);
        assert_eq!(r.nodes_checked, 127);
    }

    #[test]
    fn fair_depth_one_table() {
        let m = table(1, &[(1, 1), (3, 2), (1, 2)]);
        assert!(fairness_check(&m, 1).unwrap().ok);
    }

    #[test]
    fn unfair_table_reports_root() {
        let m = table(1, &[(2, 1), (1, 1), (1, 1)]);
        let r = fairness_check(&m, 1).unwrap();
        assert!(!r.ok);
        let v = r.violation.unwrap();
        assert_eq!(v.at, BitString::new());
        assert_eq!(v.problem, "unfair");
    }

    #[test]
    fn non_positive_values_are_flagged() {
        let m = table(1, &[(1, 1), (2, 1), (0, 1)]);
        let r = fairness_check(&m, 1).unwrap();
        assert!(!r.ok);
        let v = r.violation.unwrap();
        assert_eq!(v.problem, "non-positive");
        assert_eq!(v.at, bs("1"));
    }

    #[test]
    fn table_rejects_out_of_depth_with_node_path() {
        let m = table(1, &[(1, 1), (3, 2), (1, 2)]).savings();
        let err = fairness_check(&m, 2).unwrap_err();
        match err {
            Error::OutOfDepth { node, depth, len } => {
                assert_eq!(node, "savings/stake-table");
                assert_eq!((depth, len), (1, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_table_is_rejected() {
        assert!(StakeTable::new(2, vec![Rational::one(); 3], Beyond::Reject).is_err());
    }

    #[test]
    fn factors_must_stay_inside_zero_two() {
        assert!(Martingale::favor_bit(false, q(2, 1)).is_err());
        assert!(Martingale::favor_bit(false, q(0, 1)).is_err());
        assert!(Martingale::favor_bit(false, q(199, 100)).is_ok());
    }

    #[test]
    fn delayed_ratio() {
        // B(ε)=1, B(0)=2, B(00)=4; only the ratio matters here.
        let b = table(2, &[(1, 1), (2, 1), (1, 2), (4, 1), (1, 1), (1, 1), (1, 1)]);
        let d = b.clone().delayed(1);
        assert_eq!(d.value(&bs("0")).unwrap(), q(1, 1));
        assert_eq!(d.value(&bs("00")).unwrap(), q(2, 1));
        let d0 = b.clone().delayed(0);
        for x in ["", "0", "1", "00", "01", "11"] {
            assert_eq!(d0.value(&bs(x)).unwrap(), b.value(&bs(x)).unwrap());
        }
    }

    #[test]
    fn delayed_favor_zero() {
        let d = Martingale::favor_bit(false, q(3, 2)).unwrap().delayed(2);
        assert_eq!(d.value(&bs("001")).unwrap(), q(1, 2));
        assert_eq!(d.value(&bs("01")).unwrap(), q(1, 1));
    }

    #[test]
    fn delayed_does_not_bet_before_delay() {
        let d = Martingale::favor_bit(true, q(5, 4)).unwrap().delayed(3);
        for len in 0..3 {
            for x in BitString::all_of_length(len) {
                assert_eq!(d.value(&x.child(false)).unwrap(), d.value(&x.child(true)).unwrap());
            }
        }
    }

    #[test]
    fn delayed_divides_by_positive_only() {
        let b = table(1, &[(0, 1), (1, 1), (1, 1)]);
        let err = b.delayed(0).value(&bs("1")).unwrap_err();
        assert!(matches!(err, Error::NonPositive { .. }));
    }

    #[test]
    fn weighted_sum_examples() {
        let two_ones = Martingale::weighted_sum(vec![Martingale::one(), Martingale::one()]).unwrap();
        assert_eq!(two_ones.value(&BitString::new()).unwrap(), q(2, 1));

        let b = Martingale::favor_bit(true, q(3, 2)).unwrap();
        let single = Martingale::weighted_sum(vec![b.clone()]).unwrap();
        for x in ["", "1", "10", "111"] {
            assert_eq!(
                single.value(&bs(x)).unwrap(),
                b.value(&bs(x)).unwrap() + Rational::one()
            );
        }
        assert!(Martingale::weighted_sum(vec![]).is_err());
    }

    #[test]
    fn weighted_sum_with_delayed_doubler() {
        // A depth-2 table that doubles on 0 (the factor-2 bet is not
        // expressible as a favor-bit node, whose factors stay below 2).
        let doubler = table(2, &[(1, 1), (2, 1), (1, 2), (4, 1), (1, 1), (1, 1), (1, 1)]);
        let l = Martingale::weighted_sum(vec![Martingale::one(), doubler.delayed(1)]).unwrap();
        assert_eq!(l.value(&bs("00")).unwrap(), q(5, 2));

        let l = Martingale::weighted_sum(vec![
            Martingale::one(),
            Martingale::favor_bit(false, q(3, 2)).unwrap().delayed(1),
        ])
        .unwrap();
        assert_eq!(l.value(&bs("00")).unwrap(), q(9, 4));
    }

    #[test]
    fn savings_of_constant() {
        let m = Martingale::one().savings();
        for len in 0..5 {
            for x in BitString::all_of_length(len) {
                let (s, a) = savings_accounts(&Martingale::one(), &x).unwrap();
                assert!(s.is_zero());
                assert_eq!(a, Rational::one());
                assert_eq!(m.value(&x).unwrap(), Rational::one());
            }
        }
    }

    #[test]
    fn savings_trace_by_hand() {
        let inner = Martingale::favor_bit(false, q(3, 2)).unwrap();
        let (s, a) = savings_accounts(&inner, &bs("00")).unwrap();
        assert_eq!((s.clone(), a.clone()), (q(5, 4), q(1, 1)));
        assert_eq!(inner.clone().savings().value(&bs("00")).unwrap(), q(9, 4));
        let (s, a) = savings_accounts(&inner, &bs("001")).unwrap();
        assert_eq!((s, a), (q(5, 4), q(1, 2)));
        let hat = inner.savings();
        let v = hat.value(&bs("001")).unwrap();
        assert_eq!(v, q(7, 4));
        assert!(v >= hat.value(&BitString::new()).unwrap() - q(2, 1));
    }

    #[test]
    fn capital_trace_examples() {
        let m = Martingale::favor_bit(false, q(3, 2)).unwrap();
        let zeros = SequenceOracle::ExplicitPrefix {
            prefix: BitString::new(),
            default: false,
        };
        let vals: Vec<Rational> = capital_trace(&m, &zeros, 3).unwrap().into_iter().map(|p| p.value).collect();
        assert_eq!(vals, [q(1, 1), q(3, 2), q(9, 4), q(27, 8)]);

        let alt = SequenceOracle::Periodic { pattern: bs("01") };
        let vals: Vec<Rational> = capital_trace(&m, &alt, 4).unwrap().into_iter().map(|p| p.value).collect();
        assert_eq!(vals, [q(1, 1), q(3, 2), q(3, 4), q(9, 8), q(9, 16)]);

        let ones: Vec<Rational> = capital_trace(&Martingale::one(), &alt, 5)
            .unwrap()
            .into_iter()
            .map(|p| p.value)
            .collect();
        assert_eq!(ones, vec![Rational::one(); 6]);
    }

    #[test]
    fn trace_csv_layout() {
        let m = Martingale::favor_bit(false, q(3, 2)).unwrap();
        let alt = SequenceOracle::Periodic { pattern: bs("01") };
        let pts = capital_trace(&m, &alt, 2).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&pts, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "step,prefix,numerator,denominator\n0,,1,1\n1,0,3,2\n2,01,3,4\n"
        );
    }
}
