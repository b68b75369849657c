//! Exact backward induction over prefix lengths.
//!
//! For a prefix of length `k` the three probabilities that drive the optimal
//! strategy depend only on `k` (and, for the accept probability, on the prefix
//! ending in a left-to-right maximum), so the whole problem collapses to an
//! `s x n` table of rationals:
//!
//! * `q(j, k)`: win probability when accepting an eligible length-`k` prefix
//!   with `j` selections available;
//! * `qo(j, k)`: win probability when continuing optimally after deciding on
//!   position `k` with `j` selections still available;
//! * `qbar(j, k) = max(q, qo)`.
//!
//! A length-`(k-1)` prefix has `k` equally likely children of which exactly
//! one ends in a left-to-right maximum, which gives
//!
//! ```text
//! qo(j, k-1) = ((k-1) * qo(j, k) + qbar(j, k)) / k,   qo(j, n) = 0
//! q(j, k)    = k/n + qo(j-1, k),                      qo(0, .) = 0
//! ```
//!
//! The prefix-tree module certifies this compression against the explicit tree.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{serde_rational_rows, Rational};

/// Checks `0 <= k_1 <= ... <= k_s`.
pub fn check_monotone(ks: &[usize]) -> Result<()> {
    if ks.windows(2).all(|w| w[0] <= w[1]) {
        Ok(())
    } else {
        Err(Error::NonMonotoneThresholds)
    }
}

/// Selection thresholds of a positional s-threshold strategy.
///
/// Stored by remaining-selections index: `right_hand()[j-1]` is the number of
/// applicants to skip when `j` selections remain. The interview-order view
/// `(k_1, ..., k_s)` is the reverse of that sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ThresholdVector {
    n: usize,
    by_remaining: Vec<usize>,
}

impl ThresholdVector {
    /// Builds from `(k_1, ..., k_s)` in interview order.
    pub fn from_interview_order(n: usize, ks: &[usize]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if ks.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one threshold is required".into(),
            ));
        }
        check_monotone(ks)?;
        if let Some(&k) = ks.iter().find(|&&k| k > n) {
            return Err(Error::ThresholdExceedsN { k, n });
        }
        Ok(ThresholdVector {
            n,
            by_remaining: ks.iter().rev().copied().collect(),
        })
    }

    /// Builds from `(a_1, ..., a_s)`, the right-hand view.
    pub fn from_right_hand(n: usize, a: &[usize]) -> Result<Self> {
        let ks: Vec<usize> = a.iter().rev().copied().collect();
        Self::from_interview_order(n, &ks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.by_remaining.len()
    }

    /// `(k_1, ..., k_s)`.
    pub fn interview_order(&self) -> Vec<usize> {
        self.by_remaining.iter().rev().copied().collect()
    }

    /// `(a_1, ..., a_s)` with `a_j = k_{s+1-j}`.
    pub fn right_hand(&self) -> &[usize] {
        &self.by_remaining
    }

    /// Threshold of the `i`-th selection, 1-based.
    pub fn k(&self, i: usize) -> usize {
        self.by_remaining[self.s() - i]
    }

    /// Threshold used when `j` selections remain, 1-based.
    pub fn remaining(&self, j: usize) -> usize {
        self.by_remaining[j - 1]
    }
}

#[derive(Serialize, Deserialize)]
struct ThresholdVectorRepr {
    n: usize,
    s: usize,
    k: Vec<usize>,
    a: Vec<usize>,
}

impl Serialize for ThresholdVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ThresholdVectorRepr {
            n: self.n,
            s: self.s(),
            k: self.interview_order(),
            a: self.by_remaining.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ThresholdVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ThresholdVectorRepr::deserialize(d)?;
        let tv = ThresholdVector::from_interview_order(repr.n, &repr.k)
            .map_err(serde::de::Error::custom)?;
        if tv.s() != repr.s || tv.by_remaining != repr.a {
            return Err(serde::de::Error::custom(
                "`s` and `a` are inconsistent with `k`",
            ));
        }
        Ok(tv)
    }
}

/// Exact per-length probability table; rows are indexed by the number of
/// remaining selections `j = 1..=s`, columns by prefix length `k = 1..=n`.
///
/// Every entry of column `k` is stored as an integer numerator over the
/// shared denominator `n!/k!` (the number of permutations extending a
/// length-`k` prefix); in those units the recurrence is
///
/// ```text
/// QO(j, k-1) = (k-1) * QO(j, k) + QBAR(j, k)
/// Q(j, k)    = (n-1)!/(k-1)! + QO(j-1, k)
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    n: usize,
    s: usize,
    /// `den[k-1] = n!/k!`.
    den: Vec<BigInt>,
    q: Vec<Vec<BigInt>>,
    qo: Vec<Vec<BigInt>>,
}

impl QTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Shared denominator `n!/k!` of column `k`.
    pub fn denominator(&self, k: usize) -> &BigInt {
        &self.den[k - 1]
    }

    pub fn q_num(&self, j: usize, k: usize) -> &BigInt {
        &self.q[j - 1][k - 1]
    }

    pub fn qo_num(&self, j: usize, k: usize) -> &BigInt {
        &self.qo[j - 1][k - 1]
    }

    pub fn qbar_num(&self, j: usize, k: usize) -> &BigInt {
        std::cmp::max(self.q_num(j, k), self.qo_num(j, k))
    }

    pub fn q(&self, j: usize, k: usize) -> Rational {
        Rational::new(self.q_num(j, k).clone(), self.den[k - 1].clone())
    }

    pub fn qo(&self, j: usize, k: usize) -> Rational {
        Rational::new(self.qo_num(j, k).clone(), self.den[k - 1].clone())
    }

    pub fn qbar(&self, j: usize, k: usize) -> Rational {
        Rational::new(self.qbar_num(j, k).clone(), self.den[k - 1].clone())
    }

    /// Optimal win probability with `s` selections: `qbar(s, 1)`.
    pub fn optimal_value(&self) -> Rational {
        self.qbar(self.s, 1)
    }

    fn negative(&self, j: usize, k: usize) -> bool {
        self.q_num(j, k) < self.qo_num(j, k)
    }

    /// Largest `k` with `q(j, k) < qo(j, k)`, or 0 when every length is
    /// accept-positive. Ties count as accept.
    pub fn threshold(&self, j: usize) -> usize {
        (1..=self.n)
            .rev()
            .find(|&k| self.negative(j, k))
            .unwrap_or(0)
    }

    /// True when row `j` is negative on a prefix `1..=k*` and positive
    /// afterwards, i.e. there is a single sign change.
    pub fn has_single_sign_change(&self, j: usize) -> bool {
        let cut = self.threshold(j);
        (1..=self.n).all(|k| self.negative(j, k) == (k <= cut))
    }

    fn rows(&self, f: impl Fn(usize, usize) -> Rational) -> Vec<Vec<Rational>> {
        (1..=self.s)
            .map(|j| (1..=self.n).map(|k| f(j, k)).collect())
            .collect()
    }
}

/// Serialized form: rows of reduced fractions.
#[derive(Serialize, Deserialize)]
struct QTableRepr {
    n: usize,
    s: usize,
    #[serde(with = "serde_rational_rows")]
    q: Vec<Vec<Rational>>,
    #[serde(with = "serde_rational_rows")]
    qo: Vec<Vec<Rational>>,
    #[serde(with = "serde_rational_rows")]
    qbar: Vec<Vec<Rational>>,
}

impl Serialize for QTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        QTableRepr {
            n: self.n,
            s: self.s,
            q: self.rows(|j, k| self.q(j, k)),
            qo: self.rows(|j, k| self.qo(j, k)),
            qbar: self.rows(|j, k| self.qbar(j, k)),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QTable {
    /// Accepted only if it equals the table recomputed from `n` and `s`.
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = QTableRepr::deserialize(d)?;
        let table = compute_q_tables(repr.n, repr.s).map_err(serde::de::Error::custom)?;
        let same = repr.q == table.rows(|j, k| table.q(j, k))
            && repr.qo == table.rows(|j, k| table.qo(j, k))
            && repr.qbar == table.rows(|j, k| table.qbar(j, k));
        if !same {
            return Err(serde::de::Error::custom(
                "table entries do not match the recurrence",
            ));
        }
        Ok(table)
    }
}

/// Builds the exact table for `n` applicants and up to `s` selections.
pub fn compute_q_tables(n: usize, s: usize) -> Result<QTable> {
    if n == 0 || s == 0 {
        return Err(Error::InvalidParameter(format!(
            "n and s must be at least 1 (got n = {n}, s = {s})"
        )));
    }
    let mut den = vec![BigInt::one(); n];
    for k in (1..n).rev() {
        den[k - 1] = &den[k] * BigInt::from(k + 1);
    }
    let mut q = vec![vec![BigInt::zero(); n]; s];
    let mut qo = vec![vec![BigInt::zero(); n]; s];

    // win = (n-1)!/(k-1)!, built from k = n downwards.
    let mut win = BigInt::one();
    for k in (1..=n).rev() {
        if k < n {
            win *= BigInt::from(k);
        }
        for j in 0..s {
            if k < n {
                let next = std::cmp::max(&q[j][k], &qo[j][k]);
                qo[j][k - 1] = BigInt::from(k) * &qo[j][k] + next;
            }
            q[j][k - 1] = if j == 0 {
                win.clone()
            } else {
                &win + &qo[j - 1][k - 1]
            };
        }
    }

    Ok(QTable { n, s, den, q, qo })
}

/// Optimal `(k_1, ..., k_s)` read off the table.
pub fn optimal_thresholds(table: &QTable) -> ThresholdVector {
    let a: Vec<usize> = (1..=table.s()).map(|j| table.threshold(j)).collect();
    ThresholdVector::from_right_hand(table.n(), &a)
        .expect("thresholds read from a table are monotone and bounded by n")
}

/// `(a_1, ..., a_{s_max})`: the threshold for `j` remaining selections.
///
/// Tables are built independently for every `s = 1..=s_max` and their
/// threshold vectors must agree when aligned from the right.
pub fn right_hand_sequence(n: usize, s_max: usize) -> Result<Vec<usize>> {
    let full = optimal_thresholds(&compute_q_tables(n, s_max)?);
    for s in 1..s_max {
        let partial = optimal_thresholds(&compute_q_tables(n, s)?);
        if partial.right_hand() != &full.right_hand()[..s] {
            return Err(Error::RightHandMismatch {
                s_small: s,
                s_large: s_max,
            });
        }
    }
    Ok(full.right_hand().to_vec())
}
