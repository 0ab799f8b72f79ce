//! Delay points, the dominating weighted sum, and its leftmost
//! non-ascending path.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::martingale::Martingale;
use crate::poly::PolynomialNat;
use crate::rational::Rational;
use crate::scan::Permutation;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeftmostPath {
    pub bits: BitString,
    /// `L(Z ↾ m)` for `m = 0..=length`.
    pub trace: Vec<Rational>,
}

/// `Z ↾ length` where `Z(m) = 0` iff `L(Z↾m 0) ≤ L(Z↾m)`.
pub fn leftmost_path(l: &Martingale, length: usize) -> Result<LeftmostPath> {
    let mut bits = BitString::new();
    let mut current = l.value(&bits)?;
    let mut trace = Vec::with_capacity(length + 1);
    trace.push(current.clone());
    for _ in 0..length {
        let zero = l.value(&bits.child(false))?;
        if zero <= current {
            bits.push(false);
            current = zero;
        } else {
            bits.push(true);
            current = l.value(&bits)?;
        }
        trace.push(current.clone());
    }
    Ok(LeftmostPath { bits, trace })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelayPoints {
    /// `n_0 = 0, n_1, …` as far as the search got.
    pub points: Vec<u64>,
    /// The search for the next point ran past its limit.
    pub exhausted: bool,
}

/// `n_{k+1}` = least `n > n_k` with `q_k(S(n)+1) ≤ n`, for `k < k_max`,
/// searching `n < limit`.
pub fn delay_points(q: &[PolynomialNat], s: &Permutation, k_max: usize, limit: u64) -> Result<DelayPoints> {
    if q.len() < k_max {
        return Err(Error::Precondition(format!(
            "{k_max} delay points need {k_max} bounds, got {}",
            q.len()
        )));
    }
    for (k, qk) in q.iter().enumerate() {
        if !qk.dominates_successor_plus_one() {
            return Err(Error::Precondition(format!(
                "bound q_{k} = {qk} must satisfy q(n) ≥ n + 2"
            )));
        }
    }
    let mut points = vec![0u64];
    for qk in q.iter().take(k_max) {
        let prev = *points.last().expect("starts with n_0");
        match (prev + 1..limit).find(|&n| qk.eval(s.forward(n) + 1) <= n as u128) {
            Some(n) => points.push(n),
            None => {
                return Ok(DelayPoints {
                    points,
                    exhausted: true,
                })
            }
        }
    }
    Ok(DelayPoints {
        points,
        exhausted: false,
    })
}

/// `Σ_{r≤k} 2^(-r) B_{r, n_r} + 2^(-k)` for the given delay points.
pub fn dominating_sum(martingales: &[Martingale], points: &[u64]) -> Result<Martingale> {
    if martingales.len() != points.len() {
        return Err(Error::Precondition(format!(
            "{} martingales but {} delay points",
            martingales.len(),
            points.len()
        )));
    }
    Martingale::weighted_sum(
        martingales
            .iter()
            .zip(points)
            .map(|(b, &n)| b.clone().delayed(n as usize))
            .collect(),
    )
}

/// A finite family `B_k` with bounds `q_k`, scheduled against `S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationFamily {
    pub martingales: Vec<Martingale>,
    pub bounds: Vec<PolynomialNat>,
    pub permutation: Permutation,
    pub search_limit: u64,
}

impl DominationFamily {
    pub fn validate(&self) -> Result<()> {
        if self.martingales.is_empty() {
            return Err(Error::Descriptor("family has no martingales".into()));
        }
        for m in &self.martingales {
            m.validate()?;
        }
        for q in &self.bounds {
            q.validate()?;
        }
        self.permutation.validate()
    }

    /// The delay points and the weighted sum over the members that got one.
    pub fn build(&self) -> Result<(DelayPoints, Martingale)> {
        self.validate()?;
        let k_max = self.martingales.len() - 1;
        let dp = delay_points(&self.bounds, &self.permutation, k_max, self.search_limit)?;
        let used = &self.martingales[..dp.points.len()];
        let l = dominating_sum(used, &dp.points)?;
        Ok((dp, l))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn succ2() -> PolynomialNat {
        PolynomialNat::linear(2, 1).unwrap()
    }

    #[test]
    fn constant_goes_left() {
        let p = leftmost_path(&Martingale::one(), 6).unwrap();
        assert_eq!(p.bits.to_string(), "000000");
    }

    #[test]
    fn ascending_zero_goes_right() {
        let p = leftmost_path(&Martingale::favor_bit(false, q(3, 2)).unwrap(), 5).unwrap();
        assert_eq!(p.bits.to_string(), "11111");
        assert_eq!(p.trace.last().unwrap(), &q(1, 32));
    }

    #[test]
    fn weighted_path_is_non_ascending() {
        let l = Martingale::weighted_sum(vec![
            Martingale::favor_bit(false, q(3, 2)).unwrap(),
            Martingale::favor_bit(true, q(3, 2)).unwrap().delayed(2),
        ])
        .unwrap();
        let p = leftmost_path(&l, 4).unwrap();
        for w in p.trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
        // Root 1 + 1/2 + 1/2 = 2. Step 0: L(0) = 3/2 + 1 = 5/2 > 2, so 1:
        // L(1) = 1/2 + 1/2 + 1/2 = 3/2. Step 1: L(10) = 3/4 + 1 = 7/4 > 3/2,
        // so 1: L(11) = 1/4 + 1 = 5/4.
        assert_eq!(p.bits.prefix(2).to_string(), "11");
        assert_eq!(p.trace[2], q(5, 4));
    }

    #[test]
    fn delay_points_against_dishonest() {
        let dp = delay_points(&[succ2()], &Permutation::Dishonest, 1, 1000).unwrap();
        assert_eq!(dp.points, vec![0, 4]);
        assert!(!dp.exhausted);
    }

    #[test]
    fn delay_points_identity_exhausts() {
        let dp = delay_points(&[succ2()], &Permutation::Identity, 1, 1000).unwrap();
        assert_eq!(dp.points, vec![0]);
        assert!(dp.exhausted);
    }

    #[test]
    fn delay_points_table() {
        let mut images: Vec<u64> = (0..11).collect();
        images.swap(1, 10);
        let s = Permutation::table(images).unwrap();
        let dp = delay_points(&[succ2()], &s, 1, 1000).unwrap();
        assert_eq!(dp.points, vec![0, 10]);
    }

    #[test]
    fn weak_bounds_are_rejected() {
        let q1 = PolynomialNat::linear(1, 1).unwrap();
        assert!(matches!(
            delay_points(&[q1], &Permutation::Dishonest, 1, 10),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn family_build() {
        let fam = DominationFamily {
            martingales: vec![
                Martingale::favor_bit(false, q(3, 2)).unwrap(),
                Martingale::favor_bit(true, q(3, 2)).unwrap(),
            ],
            bounds: vec![succ2()],
            permutation: Permutation::Dishonest,
            search_limit: 1000,
        };
        let (dp, l) = fam.build().unwrap();
        assert_eq!(dp.points, vec![0, 4]);
        assert_eq!(l.value(&BitString::new()).unwrap(), q(2, 1));
        let x: BitString = "0000".parse().unwrap();
        // (3/2)^4 + 1/2 · 1 + 1/2
        assert_eq!(l.value(&x).unwrap(), q(81, 16) + q(1, 1));
    }
}
