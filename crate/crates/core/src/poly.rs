//! Polynomials with natural-number coefficients.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `Σ coefficients[j] · n^j`, non-constant, natural coefficients.
///
/// Evaluation is exact in `u128` and saturates at `u128::MAX`, which only
/// matters for comparisons far outside any enumerable range.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolynomialNat {
    pub coefficients: Vec<u64>,
}

impl PolynomialNat {
    pub fn new(coefficients: Vec<u64>) -> Result<Self> {
        let p = PolynomialNat { coefficients };
        p.validate()?;
        Ok(p)
    }

    /// `a + b·n`.
    pub fn linear(a: u64, b: u64) -> Result<Self> {
        Self::new(vec![a, b])
    }

    pub fn validate(&self) -> Result<()> {
        if self.coefficients.iter().skip(1).all(|&c| c == 0) {
            return Err(Error::Descriptor(format!(
                "polynomial {self} must be non-constant"
            )));
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.coefficients.iter().rposition(|&c| c != 0).unwrap_or(0)
    }

    pub fn eval(&self, n: u64) -> u128 {
        let n = n as u128;
        self.coefficients
            .iter()
            .rev()
            .fold(0u128, |acc, &c| acc.saturating_mul(n).saturating_add(c as u128))
    }

    /// `p(n)` as a `u64`, failing on overflow.
    pub fn eval_u64(&self, n: u64) -> Result<u64> {
        u64::try_from(self.eval(n))
            .map_err(|_| Error::Precondition(format!("{self} overflows at n = {n}")))
    }

    /// `Σ_{k<n} p(k)`, exact.
    pub fn prefix_sum(&self, n: u64) -> u128 {
        (0..n).fold(0u128, |acc, k| acc.saturating_add(self.eval(k)))
    }

    /// `p(n) ≥ n + 2` for every natural `n`.
    ///
    /// With natural coefficients and at least one non-constant term,
    /// `p(n) ≥ p(0) + n`, so the constant term decides it.
    pub fn dominates_successor_plus_one(&self) -> bool {
        self.validate().is_ok() && self.coefficients.first().copied().unwrap_or(0) >= 2
    }
}

impl fmt::Display for PolynomialNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, &c) in self.coefficients.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                f.write_str("+")?;
            }
            first = false;
            match (j, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => f.write_str("n")?,
                (1, c) => write!(f, "{c}n")?,
                (j, 1) => write!(f, "n^{j}")?,
                (j, c) => write!(f, "{c}n^{j}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}
