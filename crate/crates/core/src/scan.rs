//! Permutations of positions, scanning functions and the filling property.
//!
//! A scanning function `V` maps a run `α` (the answers received so far) to
//! the next position to query, never repeating a position along a run.
//! `Z ∘ V` is the sequence `Y` with `Y(i) = Z(V(Y ↾ i))`. A permutation `S`
//! becomes the scanner `V_S(α) = S(|α|)`.

use serde::{Deserialize, Serialize};

use crate::bits::{BitString, Run};
use crate::constructions::{dishonest, rearrangement::BlockLayout};
use crate::error::{ensure_pow2_budget, Error, Result};
use crate::poly::PolynomialNat;
use crate::sequence::SequenceOracle;

/// A bijection of the naturals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Permutation {
    Identity,
    /// `2k ↔ 2k+1`.
    PairSwap,
    /// Blocks of `p(n)` base bits followed by one interleaved bit.
    BlockRearrangement { p: PolynomialNat },
    /// Finite cycles `⟨k,0⟩ → ⟨k,1⟩ → … → ⟨k,i*⟩ → ⟨k,0⟩` on Cantor rows.
    Dishonest,
    /// Explicit `n → S(n)` pairs on `[0, N)`, identity outside.
    Table { pairs: Vec<(u64, u64)> },
}

impl Permutation {
    /// Builds a table permutation from the images of `0..N`.
    pub fn table(images: Vec<u64>) -> Result<Self> {
        let p = Permutation::Table {
            pairs: images.into_iter().enumerate().map(|(i, s)| (i as u64, s)).collect(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Permutation::BlockRearrangement { p } => p.validate(),
            Permutation::Table { pairs } => {
                let n = pairs.len();
                let mut seen_key = vec![false; n];
                let mut seen_val = vec![false; n];
                for &(k, v) in pairs {
                    if k as usize >= n || v as usize >= n {
                        return Err(Error::Descriptor(format!(
                            "table pair {k} -> {v} leaves the domain [0, {n})"
                        )));
                    }
                    if std::mem::replace(&mut seen_key[k as usize], true) {
                        return Err(Error::Descriptor(format!("table maps {k} twice")));
                    }
                    if std::mem::replace(&mut seen_val[v as usize], true) {
                        return Err(Error::Descriptor(format!("table hits {v} twice")));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn forward(&self, n: u64) -> u64 {
        match self {
            Permutation::Identity => n,
            Permutation::PairSwap => n ^ 1,
            Permutation::BlockRearrangement { p } => BlockLayout::new(p.clone()).forward(n),
            Permutation::Dishonest => dishonest::forward(n),
            Permutation::Table { pairs } => pairs
                .iter()
                .find(|&&(k, _)| k == n)
                .map_or(n, |&(_, v)| v),
        }
    }

    /// `S⁻¹(n)`, or `None` when the preimage is not a `u64` position.
    pub fn checked_inverse(&self, n: u64) -> Option<u64> {
        match self {
            Permutation::Dishonest => dishonest::checked_inverse(n),
            _ => Some(self.inverse(n)),
        }
    }

    /// `S⁻¹(n)`.
    ///
    /// # Panics
    /// For the dishonest permutation when the preimage is not a `u64`
    /// position; see [`Permutation::checked_inverse`].
    pub fn inverse(&self, n: u64) -> u64 {
        match self {
            Permutation::Identity => n,
            Permutation::PairSwap => n ^ 1,
            Permutation::BlockRearrangement { p } => BlockLayout::new(p.clone()).inverse(n),
            Permutation::Dishonest => dishonest::inverse(n),
            Permutation::Table { pairs } => pairs
                .iter()
                .find(|&&(_, v)| v == n)
                .map_or(n, |&(k, _)| k),
        }
    }
}

/// Built-in adaptive scanning rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanRule {
    /// Reads positions in pairs `{2k, 2k+1}`. The first read of pair `k > 0`
    /// is `2k` if the last answer was 0 and `2k+1` if it was 1; the second
    /// read is the other member.
    AdaptivePairs,
}

impl ScanRule {
    fn query(&self, run: &Run) -> u64 {
        match self {
            ScanRule::AdaptivePairs => {
                let t = run.len() as u64;
                let pair = t / 2;
                let first = if run.last() == Some(true) && t.is_multiple_of(2) {
                    2 * pair + 1
                } else {
                    2 * pair
                };
                if t.is_multiple_of(2) {
                    first
                } else {
                    // Recover which member the previous step read.
                    let opened_with = if run.len() >= 2 && run.bit(run.len() - 2) {
                        2 * pair + 1
                    } else {
                        2 * pair
                    };
                    opened_with ^ 1
                }
            }
        }
    }

    /// Largest position queried by any run within its first `steps` queries.
    fn max_query(&self, steps: usize) -> u64 {
        match self {
            ScanRule::AdaptivePairs => {
                if steps == 0 {
                    0
                } else {
                    let last_pair = (steps as u64 - 1) / 2;
                    2 * last_pair + 1
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub run: BitString,
    pub query: u64,
}

/// A scanning function descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScanningFunction {
    /// `V(α) = S(|α|)`.
    FromPermutation { permutation: Permutation },
    /// Explicit queries for every run of length `< depth`.
    Table { depth: usize, entries: Vec<ScanEntry> },
    Rule { rule: ScanRule },
}

impl ScanningFunction {
    pub fn identity() -> Self {
        permutation_to_scanner(Permutation::Identity)
    }

    pub fn pair_swap() -> Self {
        permutation_to_scanner(Permutation::PairSwap)
    }

    /// Builds a table scanner from `f` on all runs shorter than `depth`.
    pub fn tabulate(depth: usize, mut f: impl FnMut(&Run) -> u64) -> Result<Self> {
        if depth > 20 {
            return Err(Error::Descriptor(format!("scanner table depth {depth} too large")));
        }
        let entries = (0..depth)
            .flat_map(BitString::all_of_length)
            .map(|run| ScanEntry {
                query: f(&run),
                run,
            })
            .collect();
        let v = ScanningFunction::Table { depth, entries };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ScanningFunction::FromPermutation { permutation } => permutation.validate(),
            ScanningFunction::Rule { .. } => Ok(()),
            ScanningFunction::Table { depth, entries } => {
                if *depth > 20 {
                    return Err(Error::Descriptor(format!("scanner table depth {depth} too large")));
                }
                let expected = (1usize << depth) - 1;
                let mut seen = vec![false; expected];
                for e in entries {
                    let idx = e.run.heap_index().filter(|&i| i < expected).ok_or_else(|| {
                        Error::Descriptor(format!("run \"{}\" is outside table depth {depth}", e.run))
                    })?;
                    if std::mem::replace(&mut seen[idx], true) {
                        return Err(Error::Descriptor(format!("run \"{}\" listed twice", e.run)));
                    }
                }
                if let Some(missing) = seen.iter().position(|s| !s) {
                    return Err(Error::Descriptor(format!(
                        "scanner table has no query for run #{missing} (breadth-first)"
                    )));
                }
                if *depth == 0 {
                    return Ok(());
                }
                if let Some(run) = find_repetition(self, depth - 1)? {
                    return Err(Error::Descriptor(format!(
                        "scanner table repeats a query along run \"{run}\""
                    )));
                }
                Ok(())
            }
        }
    }

    /// `V(α)`.
    pub fn query(&self, run: &Run) -> Result<u64> {
        match self {
            ScanningFunction::FromPermutation { permutation } => {
                Ok(permutation.forward(run.len() as u64))
            }
            ScanningFunction::Rule { rule } => Ok(rule.query(run)),
            ScanningFunction::Table { depth, entries } => {
                if run.len() >= *depth {
                    return Err(Error::OutOfDepth {
                        node: "scanner-table".into(),
                        depth: *depth,
                        len: run.len(),
                    });
                }
                let idx = run.heap_index().expect("table depth is bounded");
                match entries.get(idx) {
                    Some(e) if &e.run == run => Ok(e.query),
                    _ => entries
                        .iter()
                        .find(|e| &e.run == run)
                        .map(|e| e.query)
                        .ok_or_else(|| Error::Descriptor(format!("no query for run \"{run}\""))),
                }
            }
        }
    }

    /// Declared query budget: the largest position any run can query within
    /// its first `steps` queries.
    pub fn max_query(&self, steps: usize) -> Result<u64> {
        match self {
            ScanningFunction::FromPermutation { permutation } => {
                Ok((0..steps as u64).map(|i| permutation.forward(i)).max().unwrap_or(0))
            }
            ScanningFunction::Rule { rule } => Ok(rule.max_query(steps)),
            ScanningFunction::Table { depth, entries } => {
                if steps > *depth {
                    return Err(Error::OutOfDepth {
                        node: "scanner-table".into(),
                        depth: *depth,
                        len: steps,
                    });
                }
                Ok(entries
                    .iter()
                    .filter(|e| e.run.len() < steps)
                    .map(|e| e.query)
                    .max()
                    .unwrap_or(0))
            }
        }
    }
}

/// Queries `V(α ↾ i)` for `i < |α|`.
pub fn queries(v: &ScanningFunction, alpha: &Run) -> Result<Vec<u64>> {
    (0..alpha.len()).map(|i| v.query(&alpha.prefix(i))).collect()
}

/// A run of length `≤ depth` whose query repeats an earlier query, if any.
pub fn find_repetition(v: &ScanningFunction, depth: usize) -> Result<Option<Run>> {
    fn walk(v: &ScanningFunction, run: &mut Run, asked: &mut Vec<u64>, depth: usize) -> Result<Option<Run>> {
        let q = v.query(run)?;
        if asked.contains(&q) {
            return Ok(Some(run.clone()));
        }
        if run.len() == depth {
            return Ok(None);
        }
        asked.push(q);
        let mut found = None;
        for b in [false, true] {
            run.push(b);
            let r = walk(v, run, asked, depth);
            run.pop();
            found = r?;
            if found.is_some() {
                break;
            }
        }
        asked.pop();
        Ok(found)
    }
    walk(v, &mut BitString::new(), &mut Vec::new(), depth)
}

/// `V_S(α) = S(|α|)`.
pub fn permutation_to_scanner(permutation: Permutation) -> ScanningFunction {
    ScanningFunction::FromPermutation { permutation }
}

/// `(Z ∘ V) ↾ n`.
pub fn compose_with_scanner(z: &SequenceOracle, v: &ScanningFunction, n: usize) -> Result<BitString> {
    let reach = if n == 0 { 0 } else { v.max_query(n)? as usize + 1 };
    let zbits = z.prefix(reach)?;
    let mut y = BitString::new();
    for _ in 0..n {
        let q = v.query(&y)? as usize;
        if q >= zbits.len() {
            return Err(Error::Precondition(format!(
                "scanner queried {q} beyond its declared reach {reach}"
            )));
        }
        y.push(zbits.bit(q));
    }
    Ok(y)
}

/// `α ∼_V w`: every query of the run below `|w|` is answered as in `w`.
pub fn consistent(v: &ScanningFunction, alpha: &Run, w: &BitString) -> Result<bool> {
    for j in 0..alpha.len() {
        let x = v.query(&alpha.prefix(j))?;
        if (x as usize) < w.len() && w.bit(x as usize) != alpha.bit(j) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A filling bound `g`: runs of length `g(n)` have queried every `r < n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Filling {
    Polynomial(PolynomialNat),
    /// Explicit `g(0), g(1), …`; lengths beyond the table are unsupported.
    Table { values: Vec<u64> },
}

impl Filling {
    pub fn polynomial(coefficients: Vec<u64>) -> Result<Self> {
        Ok(Filling::Polynomial(PolynomialNat::new(coefficients)?))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Filling::Polynomial(p) => p.validate(),
            Filling::Table { .. } => Ok(()),
        }
    }

    pub fn at(&self, n: usize) -> Result<usize> {
        let g = match self {
            Filling::Polynomial(p) => p.eval(n as u64),
            Filling::Table { values } => *values.get(n).ok_or_else(|| {
                Error::Precondition(format!(
                    "filling table covers n < {}, asked for n = {n}",
                    values.len()
                ))
            })? as u128,
        };
        usize::try_from(g)
            .ok()
            .filter(|&g| g <= 64)
            .ok_or_else(|| Error::Budget {
                needed: format!("runs of length {g}"),
                budget: u64::MAX,
            })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillingReport {
    pub ok: bool,
    pub n: usize,
    pub run_length: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_run: Option<BitString>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub missed_position: Option<u64>,
}

/// Checks that every run of length `g(n)` queries all `r < n`.
pub fn filling_check(v: &ScanningFunction, g: &Filling, n: usize, budget: u64) -> Result<FillingReport> {
    filling_check_at(v, g.at(n)?, n, budget)
}

/// Checks that every run of length `run_length` queries all `r < n`. The
/// witness, if any, is the lexicographically least failing run together with
/// the least position it misses.
pub fn filling_check_at(v: &ScanningFunction, run_length: usize, n: usize, budget: u64) -> Result<FillingReport> {
    if let ScanningFunction::FromPermutation { permutation } = v {
        // Queries ignore the answers, so every run behaves like 0^run_length.
        let mut covered = vec![false; n];
        for i in 0..run_length as u64 {
            let q = permutation.forward(i);
            if (q as usize) < n {
                covered[q as usize] = true;
            }
        }
        let missed = covered.iter().position(|&c| !c);
        return Ok(FillingReport {
            ok: missed.is_none(),
            n,
            run_length,
            witness_run: missed.map(|_| BitString::zeros(run_length)),
            missed_position: missed.map(|m| m as u64),
        });
    }
    ensure_pow2_budget(run_length as u64, budget, "runs")?;
    fn walk(
        v: &ScanningFunction,
        run: &mut Run,
        covered: &mut Vec<u32>,
        missing: usize,
        run_length: usize,
    ) -> Result<Option<(Run, u64)>> {
        if missing == 0 {
            return Ok(None);
        }
        if run.len() == run_length {
            let missed = covered.iter().position(|&c| c == 0).expect("missing > 0") as u64;
            return Ok(Some((run.clone(), missed)));
        }
        let q = v.query(run)? as usize;
        let newly = q < covered.len() && covered[q] == 0;
        if q < covered.len() {
            covered[q] += 1;
        }
        let missing_after = missing - newly as usize;
        let mut found = Ok(None);
        for b in [false, true] {
            run.push(b);
            found = walk(v, run, covered, missing_after, run_length);
            run.pop();
            if !matches!(found, Ok(None)) {
                break;
            }
        }
        if q < covered.len() {
            covered[q] -= 1;
        }
        found
    }
    let mut covered = vec![0u32; n];
    let found = walk(v, &mut BitString::new(), &mut covered, n, run_length)?;
    Ok(match found {
        None => FillingReport {
            ok: true,
            n,
            run_length,
            witness_run: None,
            missed_position: None,
        },
        Some((run, missed)) => FillingReport {
            ok: false,
            n,
            run_length,
            witness_run: Some(run),
            missed_position: Some(missed),
        },
    })
}

/// `1 + max_{r<n} S⁻¹(r)` (0 for `n = 0`): the least run length after which
/// `V_S` has queried every position below `n`.
pub fn filling_bound(s: &Permutation, n: u64) -> Result<u64> {
    let mut g = 0;
    for r in 0..n {
        let pre = s.checked_inverse(r).ok_or_else(|| {
            Error::Precondition(format!("preimage of {r} lies beyond the u64 positions"))
        })?;
        g = g.max(pre + 1);
    }
    Ok(g)
}

/// The exact filling table `g(0..=max_n)` of `V_S`.
pub fn filling_table(s: &Permutation, max_n: usize) -> Result<Filling> {
    Ok(Filling::Table {
        values: (0..=max_n as u64)
            .map(|n| filling_bound(s, n))
            .collect::<Result<_>>()?,
    })
}
