//! Brute-force ground truth: every permutation of `S_n` is run through the
//! strategy executor. Enumeration is split by the first applicant's rank,
//! so each partition holds `(n-1)!` permutations.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::counting::{t_count, win_probability};
use crate::error::{Error, Result};
use crate::exact_dp::{check_monotone, compute_q_tables, optimal_thresholds, ThresholdVector};
use crate::exec::Execution;
use crate::prefix_tree::{build_annotated_tree, extract_strike_set, verify_compression_with};
use crate::rational::{factorial, fraction_string, ratio, Rational};
use crate::simulator::{execute, TerminationModel};

pub const DEFAULT_COUNT_CAP: usize = 9;
pub const DEFAULT_SEARCH_CAP: usize = 8;

/// In-place lexicographic successor; false once `v` is the last permutation.
fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).expect("v[i+1] > v[i]");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Wins and the histogram of selections made, over all of `S_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Profile {
    wins: u64,
    made: Vec<u64>,
}

impl Profile {
    fn empty(s: usize) -> Self {
        Profile {
            wins: 0,
            made: vec![0; s + 1],
        }
    }

    fn merge(mut self, other: Profile) -> Profile {
        self.wins += other.wins;
        for (a, b) in self.made.iter_mut().zip(other.made) {
            *a += b;
        }
        self
    }
}

fn profile(exec: Execution, n: usize, ks: &[usize]) -> Profile {
    let s = ks.len();
    exec.map_reduce(
        n as u64,
        || Profile::empty(s),
        |first| {
            let first = first as usize + 1;
            let mut perm = Vec::with_capacity(n);
            perm.push(first);
            perm.extend((1..=n).filter(|&v| v != first));
            let mut acc = Profile::empty(s);
            loop {
                let trace = execute(&perm, ks, TerminationModel::Dowry, None);
                acc.wins += trace.won as u64;
                acc.made[trace.selections_made] += 1;
                if !next_permutation(&mut perm[1..]) {
                    break;
                }
            }
            acc
        },
        Profile::merge,
    )
}

/// Enumeration limits and execution mode shared by the oracle entry points.
#[derive(Debug, Clone, Copy)]
pub struct Oracle {
    /// Largest `n` for single-vector counts.
    pub count_cap: usize,
    /// Largest `n` for the exhaustive strategy search.
    pub search_cap: usize,
    pub exec: Execution,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            count_cap: DEFAULT_COUNT_CAP,
            search_cap: DEFAULT_SEARCH_CAP,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestStrategy {
    /// Lexicographically smallest maximiser.
    pub thresholds: ThresholdVector,
    #[serde(with = "crate::rational::serde_bigint")]
    pub wins: BigInt,
    /// More than one vector attains the maximum.
    pub tied: bool,
}

impl Oracle {
    fn validate(&self, n: usize, ks: &[usize], cap: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if n > cap {
            return Err(Error::TooLarge { n, cap });
        }
        check_monotone(ks)?;
        if let Some(&k) = ks.iter().find(|&&k| k > n) {
            return Err(Error::ThresholdExceedsN { k, n });
        }
        Ok(())
    }

    /// Permutations of `S_n` on which the strategy picks the maximum.
    pub fn win_count(&self, n: usize, thresholds: &[usize]) -> Result<BigInt> {
        self.validate(n, thresholds, self.count_cap)?;
        Ok(profile(self.exec, n, thresholds).wins.into())
    }

    /// Permutations of `S_n` on which the strategy makes at most `r`
    /// selections.
    pub fn choosable_count(&self, n: usize, r: usize, thresholds: &[usize]) -> Result<BigInt> {
        self.validate(n, thresholds, self.count_cap)?;
        let p = profile(self.exec, n, thresholds);
        Ok(p.made.iter().take(r + 1).sum::<u64>().into())
    }

    /// Best monotone vector of length `s` by exhaustive search.
    pub fn best_strategy(&self, n: usize, s: usize) -> Result<BestStrategy> {
        if s == 0 {
            return Err(Error::InvalidParameter("s must be at least 1".into()));
        }
        self.validate(n, &[], self.search_cap)?;
        let mut best: Option<(Vec<usize>, u64)> = None;
        let mut tied = false;
        for ks in monotone_vectors(n, s) {
            let wins = profile(self.exec, n, &ks).wins;
            match &best {
                Some((_, w)) if wins < *w => {}
                Some((_, w)) if wins == *w => tied = true,
                _ => {
                    best = Some((ks, wins));
                    tied = false;
                }
            }
        }
        let (ks, wins) = best.expect("at least one vector");
        Ok(BestStrategy {
            thresholds: ThresholdVector::from_interview_order(n, &ks)?,
            wins: wins.into(),
            tied,
        })
    }
}

pub fn exhaustive_win_count(n: usize, thresholds: &[usize]) -> Result<BigInt> {
    Oracle::default().win_count(n, thresholds)
}

pub fn exhaustive_choosable_count(n: usize, r: usize, thresholds: &[usize]) -> Result<BigInt> {
    Oracle::default().choosable_count(n, r, thresholds)
}

pub fn exhaustive_best_strategy(n: usize, s: usize) -> Result<BestStrategy> {
    Oracle::default().best_strategy(n, s)
}

/// All `0 <= k_1 <= ... <= k_s <= n` in lexicographic order.
pub fn monotone_vectors(n: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(s);
    fn rec(n: usize, s: usize, lo: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for k in lo..=n {
            cur.push(k);
            rec(n, s, k, cur, out);
            cur.pop();
        }
    }
    rec(n, s, 0, &mut cur, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub check: String,
    pub input: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub n: usize,
    pub s: usize,
    /// Comparisons performed, by check name.
    pub checked: BTreeMap<String, u64>,
    pub mismatches: Vec<Mismatch>,
    /// Fixed reference values compared, whether or not they matched.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub anchors: Vec<Anchor>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    pub input: String,
    pub expected: String,
    pub actual: String,
}

impl OracleReport {
    fn new(n: usize, s: usize) -> Self {
        OracleReport {
            n,
            s,
            checked: BTreeMap::new(),
            mismatches: Vec::new(),
            anchors: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    fn record(&mut self, check: &str, input: String, expected: String, actual: String) {
        *self.checked.entry(check.to_string()).or_default() += 1;
        if expected != actual {
            self.mismatches.push(Mismatch {
                check: check.to_string(),
                input,
                expected,
                actual,
            });
        }
    }
}

fn show(ks: &[usize]) -> String {
    let parts: Vec<String> = ks.iter().map(|k| k.to_string()).collect();
    format!("({})", parts.join(","))
}

/// Everything that can be checked exhaustively at one `(n, s)`:
///
/// * `win_count` / `choosable`: recurrences against enumeration for every
///   monotone vector of length `s` (`n <= count_cap`);
/// * `optimum`: backward-induction value and thresholds against the
///   exhaustive search (`n <= search_cap`);
/// * `compression` and `strike_value`: tree against table, strike-set value
///   against the optimum (`n <= search_cap`).
pub fn verify_instance(oracle: &Oracle, n: usize, s: usize) -> Result<OracleReport> {
    let mut report = OracleReport::new(n, s);
    let n_fact = BigInt::from(factorial(n));

    if n <= oracle.count_cap {
        for ks in monotone_vectors(n, s) {
            let p = profile(oracle.exec, n, &ks);
            let counted = win_probability(n, &ks);
            let actual = match &counted {
                Ok(c) => c.w.to_string(),
                Err(e) => format!("error: {e}"),
            };
            report.record("win_count", format!("n={n} k={}", show(&ks)), p.wins.to_string(), actual);
            for r in 1..=s {
                let expected: u64 = p.made.iter().take(r).sum();
                let actual = t_count(r - 1, n, &ks)
                    .map(|v| v.to_string())
                    .unwrap_or_else(|e| format!("error: {e}"));
                report.record(
                    "choosable",
                    format!("n={n} r={} k={}", r - 1, show(&ks)),
                    expected.to_string(),
                    actual,
                );
            }
        }
    }

    if n <= oracle.search_cap {
        let best = oracle.best_strategy(n, s)?;
        let table = compute_q_tables(n, s)?;
        let dp = optimal_thresholds(&table);
        let dp_value = table.optimal_value();
        let input = format!("n={n} s={s}");
        report.record(
            "optimum_value",
            input.clone(),
            fraction_string(&Rational::new(best.wins.clone(), n_fact.clone())),
            fraction_string(&dp_value),
        );
        // Thresholds are unique only without ties; otherwise the DP vector
        // must still attain the maximum.
        let dp_ks = dp.interview_order();
        let dp_wins = profile(oracle.exec, n, &dp_ks).wins;
        report.record(
            "optimum_attained",
            format!("{input} k={}", show(&dp_ks)),
            best.wins.to_string(),
            dp_wins.to_string(),
        );
        if !best.tied {
            report.record(
                "optimum_thresholds",
                input.clone(),
                show(&best.thresholds.interview_order()),
                show(&dp_ks),
            );
        }

        let tree = build_annotated_tree(n, s)?;
        let compression = verify_compression_with(oracle.exec, &tree);
        report.record(
            "compression",
            input.clone(),
            "pass".into(),
            match &compression.counterexample {
                None => "pass".into(),
                Some(cx) => format!(
                    "{} {} at {}: expected {} got {}",
                    cx.quantity, cx.length, cx.prefix, cx.expected, cx.actual
                ),
            },
        );
        for r in 1..=s {
            let strike = extract_strike_set(&tree, r)?;
            let value = strike.value(&tree);
            report.record(
                "strike_value",
                format!("n={n} s={r}"),
                fraction_string(&tree.optimal_value(r)),
                fraction_string(&value),
            );
            report.record(
                "strike_valid",
                format!("n={n} s={r}"),
                "valid".into(),
                match strike.validate(&tree) {
                    Ok(()) => "valid".into(),
                    Err(e) => e,
                },
            );
        }
    }
    Ok(report)
}

/// Known small-case anchors: `n = 4` gives `11/24` with one selection and
/// `17/24` with two.
pub fn anchor_report() -> Result<OracleReport> {
    let mut report = OracleReport::new(4, 2);
    for (s, expected) in [(1, ratio(11, 24)), (2, ratio(17, 24))] {
        let anchor = Anchor {
            input: format!("n=4 s={s}"),
            expected: fraction_string(&expected),
            actual: fraction_string(&compute_q_tables(4, s)?.optimal_value()),
        };
        report.record("anchor", anchor.input.clone(), anchor.expected.clone(), anchor.actual.clone());
        report.anchors.push(anchor);
    }
    Ok(report)
}

/// Runs `verify_instance` for every `1 <= n <= n_max`, `1 <= s <= s_max`,
/// followed by the anchors.
pub fn verify_all(oracle: &Oracle, n_max: usize, s_max: usize) -> Result<Vec<OracleReport>> {
    if n_max == 0 || s_max == 0 {
        return Err(Error::InvalidParameter("n-max and s-max must be at least 1".into()));
    }
    if n_max > oracle.count_cap.max(oracle.search_cap) {
        return Err(Error::TooLarge {
            n: n_max,
            cap: oracle.count_cap.max(oracle.search_cap),
        });
    }
    let mut reports = Vec::new();
    for n in 1..=n_max {
        for s in 1..=s_max {
            reports.push(verify_instance(oracle, n, s)?);
        }
    }
    reports.push(anchor_report()?);
    Ok(reports)
}
