//! Exact counts of choosable and winning permutations for a fixed
//! `(k_1, ..., k_s)`-strategy.
//!
//! `T_{r-1}(m, k_1..k_r)` counts permutations of length `m` on which the
//! strategy makes at most `r - 1` selections, and `W(m, k_1..k_r)` counts those
//! on which it selects the maximum. Both are evaluated with integer-only
//! recurrences; the nested-harmonic closed forms are evaluated separately in
//! exact rationals and compared against them.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_dp::{check_monotone, ThresholdVector};
use crate::rational::{factorial, ratio, serde_bigint, serde_rational, Rational};

/// `levels[r-1][m] = T_{r-1}(m, k_1..k_r)` for `r = 1..=ks.len()` and
/// `m = 0..=m_max`.
fn choosable_levels(m_max: usize, ks: &[usize]) -> Vec<Vec<BigInt>> {
    let facts: Vec<BigInt> = {
        let mut f = Vec::with_capacity(m_max + 1);
        f.push(BigInt::one());
        for i in 1..=m_max {
            let next = &f[i - 1] * BigInt::from(i);
            f.push(next);
        }
        f
    };

    let mut levels: Vec<Vec<BigInt>> = Vec::with_capacity(ks.len());
    for (idx, &kr) in ks.iter().enumerate() {
        let mut level = Vec::with_capacity(m_max + 1);
        // S(m) = sum_{i=k_r+1}^{m} T_{r-2}(i-1) * (m-1)!/(i-1)!, advanced as
        // S(m+1) = m * S(m) + T_{r-2}(m); T_{-1} is identically zero.
        let mut acc = BigInt::zero();
        for m in 0..=m_max {
            if m <= kr {
                level.push(facts[m].clone());
                continue;
            }
            let below = if idx == 0 {
                BigInt::zero()
            } else {
                levels[idx - 1][m - 1].clone()
            };
            acc = acc * BigInt::from(m - 1) + below;
            level.push(BigInt::from(kr) * &facts[m - 1] + &acc);
        }
        levels.push(level);
    }
    levels
}

/// `T_{r-1}(m, k_1..k_r)`: permutations of length `m` admitting at most
/// `r - 1` selections. Only the first `r` thresholds matter; if fewer than `r`
/// are given the strategy can never exceed `r - 1` selections and the count
/// is `m!`. `T_r(0, .) = 1` (the empty permutation).
pub fn t_count(r_minus_1: usize, m: usize, thresholds: &[usize]) -> Result<BigInt> {
    check_monotone(thresholds)?;
    let r = r_minus_1 + 1;
    if r > thresholds.len() {
        return Ok(factorial(m).into());
    }
    let levels = choosable_levels(m, &thresholds[..r]);
    Ok(levels[r - 1][m].clone())
}

/// `W(m, k_1..k_r)`: permutations of length `m` on which the strategy selects
/// the maximum.
pub fn w_count(m: usize, thresholds: &[usize]) -> Result<BigInt> {
    check_monotone(thresholds)?;
    if thresholds.is_empty() || m == 0 {
        return Ok(BigInt::zero());
    }
    let levels = choosable_levels(m, thresholds);
    // win[m'] for the current threshold prefix; the empty prefix never wins.
    let mut win = vec![BigInt::zero(); m + 1];
    for (idx, &kr) in thresholds.iter().enumerate() {
        let mut next = Vec::with_capacity(m + 1);
        for mm in 0..=m {
            if mm <= kr {
                next.push(win[mm].clone());
            } else {
                let v = &levels[idx][mm - 1] + BigInt::from(mm - 1) * &next[mm - 1];
                next.push(v);
            }
        }
        win = next;
    }
    Ok(win.swap_remove(m))
}

/// `sum_{i_1=L_1}^{upper} 1/i_1 sum_{i_2=L_2}^{i_1-1} 1/i_2 ... sum_{i_d=L_d}^{i_{d-1}-1} 1/i_d`.
/// Empty ranges contribute nothing. Every lower bound must be at least 1.
fn nested_harmonic(upper: usize, lowers: &[usize]) -> Rational {
    debug_assert!(lowers.iter().all(|&l| l >= 1));
    // inner[x] holds the value of the remaining inner sums with the enclosing
    // index's upper limit set to x - 1.
    let mut inner = vec![Rational::one(); upper + 2];
    for &lower in lowers.iter().rev() {
        let mut outer = Vec::with_capacity(upper + 2);
        let mut acc = Rational::zero();
        for (x, below) in inner.iter().enumerate() {
            outer.push(acc.clone());
            if x >= lower {
                acc += below / Rational::from_integer(BigInt::from(x));
            }
        }
        inner = outer;
    }
    inner.swap_remove(upper + 1)
}

/// Closed form of `T_{r-1}(m, k_1..k_r) / m!` as a nested harmonic sum.
/// Defined for `m >= k_r + 1` with every `k_i >= 1`.
pub fn t_closed_form(r_minus_1: usize, m: usize, thresholds: &[usize]) -> Result<Rational> {
    check_monotone(thresholds)?;
    let r = r_minus_1 + 1;
    if r > thresholds.len() {
        return Err(Error::InvalidParameter(format!(
            "T_{r_minus_1} needs at least {r} thresholds"
        )));
    }
    let ks = &thresholds[..r];
    if ks.contains(&0) || m < ks[r - 1] + 1 {
        return Err(Error::ClosedFormDomain);
    }
    let k = |i: usize| ks[i - 1];
    let mut total = Rational::from_integer(BigInt::from(k(r)));
    for d in 1..r {
        // lowers: k_r, k_{r-1}, ..., k_{r-d+1}
        let lowers: Vec<usize> = (0..d).map(|e| k(r - e)).collect();
        total += Rational::from_integer(BigInt::from(k(r - d))) * nested_harmonic(m - 1, &lowers);
    }
    Ok(total / Rational::from_integer(BigInt::from(m)))
}

/// Closed-form win probability together with its split by threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct WinDecomposition {
    pub total: Rational,
    /// `h[j-1] = H_j`, the terms whose coefficient is `a_j = k_{s+1-j}`.
    pub h: Vec<Rational>,
}

/// Closed form of `W(n, k_1..k_s) / n!`, defined for `n >= k_s + 1` with every
/// `k_i >= 1`.
///
/// Block `b` of the formula covers the stretch between `k_b` and
/// `k_{b+1} - 1` (with `k_{s+1} = n`); its `d`-th term carries coefficient
/// `k_{b-d}`. Grouping terms by coefficient yields `H_1, ..., H_s`.
pub fn w_closed_form(n: usize, thresholds: &[usize]) -> Result<WinDecomposition> {
    check_monotone(thresholds)?;
    let s = thresholds.len();
    if s == 0 {
        return Err(Error::InvalidParameter("at least one threshold is required".into()));
    }
    if thresholds.contains(&0) || n < thresholds[s - 1] + 1 {
        return Err(Error::ClosedFormDomain);
    }
    let k = |i: usize| if i == s + 1 { n } else { thresholds[i - 1] };
    let big = |v: usize| Rational::from_integer(BigInt::from(v));

    let mut h = vec![Rational::zero(); s];
    for b in 1..=s {
        let upper = k(b + 1) - 1;
        h[s - b] += big(k(b)) * nested_harmonic(upper, &[k(b)]);
        for d in 1..b {
            let mut lowers = vec![k(b) + 1, k(b)];
            lowers.extend((1..d).map(|e| k(b - e)));
            let c = b - d;
            h[s - c] += big(k(c)) * nested_harmonic(upper, &lowers);
        }
    }
    let inv_n = ratio(1, n as i64);
    let h: Vec<Rational> = h.into_iter().map(|v| v * &inv_n).collect();
    let total = h.iter().fold(Rational::zero(), |acc, v| acc + v);
    Ok(WinDecomposition { total, h })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvaluationPath {
    /// Only the recurrence applies (some `k_i = 0` or `n <= k_s`).
    Recurrence,
    /// Recurrence and closed form both evaluated and found equal.
    RecurrenceAndClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountResult {
    pub n: usize,
    pub thresholds: ThresholdVector,
    /// Number of winning permutations out of `n!`.
    #[serde(with = "serde_bigint")]
    pub w: BigInt,
    #[serde(with = "serde_rational")]
    pub probability: Rational,
    pub path: EvaluationPath,
}

/// Exact win probability of the `(k_1, ..., k_s)`-strategy with `n` applicants.
///
/// The recurrence is always evaluated; when the closed form is also defined
/// the two must agree exactly.
pub fn win_probability(n: usize, thresholds: &[usize]) -> Result<CountResult> {
    let tv = ThresholdVector::from_interview_order(n, thresholds)?;
    let w = w_count(n, thresholds)?;
    let probability = Rational::new(w.clone(), factorial(n).into());
    let path = match w_closed_form(n, thresholds) {
        Ok(closed) => {
            if closed.total != probability {
                return Err(Error::InternalDisagreement {
                    closed: crate::rational::fraction_string(&closed.total),
                    recurrence: crate::rational::fraction_string(&probability),
                });
            }
            EvaluationPath::RecurrenceAndClosedForm
        }
        Err(Error::ClosedFormDomain) => EvaluationPath::Recurrence,
        Err(e) => return Err(e),
    };
    Ok(CountResult {
        n,
        thresholds: tv,
        w,
        probability,
        path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: u64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn t0_examples() {
        assert_eq!(t_count(0, 5, &[2]).unwrap(), b(48));
        assert_eq!(t_count(0, 3, &[0]).unwrap(), b(0));
        // m <= k_r gives m!
        assert_eq!(t_count(1, 3, &[1, 4]).unwrap(), b(6));
        assert_eq!(t_count(2, 0, &[0, 0, 0]).unwrap(), b(1));
        // more selections allowed than thresholds exist
        assert_eq!(t_count(3, 4, &[0, 1]).unwrap(), b(24));
    }

    #[test]
    fn w_examples() {
        assert_eq!(w_count(4, &[0, 1]).unwrap(), b(17));
        assert_eq!(w_count(4, &[1]).unwrap(), b(11));
        assert_eq!(w_count(1, &[0]).unwrap(), b(1));
        assert_eq!(w_count(0, &[0]).unwrap(), b(0));
        assert_eq!(w_count(5, &[]).unwrap(), b(0));
    }

    #[test]
    fn rejects_non_monotone() {
        assert_eq!(t_count(0, 4, &[2, 1]), Err(Error::NonMonotoneThresholds));
        assert_eq!(w_count(4, &[2, 1]), Err(Error::NonMonotoneThresholds));
        assert_eq!(w_closed_form(4, &[2, 1]), Err(Error::NonMonotoneThresholds));
    }

    #[test]
    fn t_closed_form_examples() {
        assert_eq!(t_closed_form(0, 5, &[2]).unwrap(), ratio(2, 5));
        assert_eq!(
            t_closed_form(0, 5, &[2]).unwrap(),
            Rational::new(t_count(0, 5, &[2]).unwrap(), b(120))
        );
        assert_eq!(
            t_closed_form(1, 4, &[1, 1]).unwrap(),
            Rational::new(t_count(1, 4, &[1, 1]).unwrap(), b(24))
        );
        // m = k_2 + 1: single-term sums collapse
        let (k1, k2) = (2usize, 3usize);
        let expected = (ratio(k2 as i64, 1) + ratio(k1 as i64, k2 as i64)) * ratio(1, 4);
        assert_eq!(t_closed_form(1, k2 + 1, &[k1, k2]).unwrap(), expected);
        assert_eq!(t_closed_form(0, 3, &[0]), Err(Error::ClosedFormDomain));
        assert_eq!(t_closed_form(1, 3, &[1, 3]), Err(Error::ClosedFormDomain));
    }

    #[test]
    fn w_closed_form_classical() {
        let d = w_closed_form(4, &[1]).unwrap();
        assert_eq!(d.total, ratio(11, 24));
        assert_eq!(d.h, vec![ratio(11, 24)]);
        assert_eq!(w_closed_form(4, &[0, 1]), Err(Error::ClosedFormDomain));
        assert_eq!(w_closed_form(4, &[1, 4]), Err(Error::ClosedFormDomain));
    }

    #[test]
    fn w_closed_form_at_n_equal_last_threshold_plus_one() {
        // Only the first sum of the last block survives in H_1.
        let d = w_closed_form(4, &[3]).unwrap();
        assert_eq!(d.total, ratio(3, 4) * ratio(1, 3));
        let d = w_closed_form(5, &[2, 4]).unwrap();
        assert_eq!(d.h[0], ratio(4, 5) * ratio(1, 4));
        assert_eq!(d.total, Rational::new(w_count(5, &[2, 4]).unwrap(), b(120)));
    }

    #[test]
    fn equal_thresholds_match_recurrence() {
        for n in 2..=12 {
            for s in 1..=3 {
                for k in 1..n {
                    let ks = vec![k; s];
                    let closed = w_closed_form(n, &ks).unwrap().total;
                    let rec = Rational::new(w_count(n, &ks).unwrap(), factorial(n).into());
                    assert_eq!(closed, rec, "n={n} ks={ks:?}");
                }
            }
        }
    }

    #[test]
    fn win_probability_paths() {
        let r = win_probability(4, &[0, 1]).unwrap();
        assert_eq!(r.probability, ratio(17, 24));
        assert_eq!(r.path, EvaluationPath::Recurrence);
        let r = win_probability(4, &[1]).unwrap();
        assert_eq!(r.probability, ratio(11, 24));
        assert_eq!(r.w, b(11));
        assert_eq!(r.path, EvaluationPath::RecurrenceAndClosedForm);
        assert_eq!(
            win_probability(4, &[1, 0]).unwrap_err(),
            Error::NonMonotoneThresholds
        );
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["w"], "11");
        assert_eq!(v["probability"]["num"], "11");
        assert_eq!(v["probability"]["den"], "24");
    }

    #[test]
    fn nested_harmonic_small_cases() {
        // sum_{i=2}^{4} 1/i
        assert_eq!(nested_harmonic(4, &[2]), ratio(13, 12));
        // empty range
        assert_eq!(nested_harmonic(1, &[2]), Rational::zero());
        // sum_{i1=2}^{3} 1/i1 sum_{i2=1}^{i1-1} 1/i2 = 1/2 * 1 + 1/3 * 3/2
        assert_eq!(nested_harmonic(3, &[2, 1]), ratio(1, 1));
    }
}
