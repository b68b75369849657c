//! Monte Carlo execution of `(k_1, ..., k_s)`-strategies under the Dowry and
//! query-based termination models.
//!
//! Both models make exactly the same selections and therefore win on exactly
//! the same permutations; they differ only in where the process stops:
//!
//! * **dowry**: at the `s`-th selection if it is made, otherwise at `n`
//!   (there is no feedback, so all selections are spent);
//! * **query**: at the selection that picked the maximum if it is one of the
//!   first `s - 1` (the expert confirms it), otherwise as in the dowry model
//!   (the `s`-th selection is final and never queried).
//!
//! Trial `t` draws its permutation from a ChaCha8 stream keyed by
//! `(seed, t)`, so results do not depend on the number of worker threads.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_dp::{check_monotone, compute_q_tables, optimal_thresholds, ThresholdVector};
use crate::exec::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TerminationModel {
    Dowry,
    Query,
}

impl TerminationModel {
    pub const ALL: [TerminationModel; 2] = [TerminationModel::Dowry, TerminationModel::Query];
}

impl fmt::Display for TerminationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TerminationModel::Dowry => f.write_str("dowry"),
            TerminationModel::Query => f.write_str("query"),
        }
    }
}

impl FromStr for TerminationModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dowry" => Ok(TerminationModel::Dowry),
            "query" => Ok(TerminationModel::Query),
            other => Err(Error::InvalidParameter(format!(
                "unknown model `{other}` (expected dowry or query)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub won: bool,
    /// 1-based position at which the process stops.
    pub stop_position: usize,
    pub selections_made: usize,
    /// 1-based, strictly increasing.
    pub selection_positions: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Trace {
    pub won: bool,
    pub stop_position: usize,
    pub selections_made: usize,
}

/// Hot-loop executor. `perm` must be a permutation of `1..=perm.len()` and
/// `ks` monotone; neither is checked.
pub(crate) fn execute(
    perm: &[usize],
    ks: &[usize],
    model: TerminationModel,
    mut positions: Option<&mut Vec<usize>>,
) -> Trace {
    let n = perm.len();
    let s = ks.len();
    let mut made = 0;
    let mut running_max = 0;
    let mut won = false;
    let mut stop = None;
    for (idx, &value) in perm.iter().enumerate() {
        let t = idx + 1;
        if value <= running_max {
            continue;
        }
        running_max = value;
        if made < s && t > ks[made] {
            made += 1;
            if let Some(p) = positions.as_deref_mut() {
                p.push(t);
            }
            let best = value == n;
            won |= best;
            if made == s || (best && model == TerminationModel::Query) {
                stop = Some(t);
                break;
            }
        }
    }
    Trace {
        won,
        stop_position: stop.unwrap_or(n),
        selections_made: made,
    }
}

pub(crate) fn check_permutation(perm: &[usize]) -> Result<()> {
    let n = perm.len();
    if n == 0 {
        return Err(Error::MalformedPermutation("empty".into()));
    }
    let mut seen = vec![false; n + 1];
    for &v in perm {
        if v == 0 || v > n {
            return Err(Error::MalformedPermutation(format!(
                "value {v} outside 1..={n}"
            )));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::MalformedPermutation(format!("value {v} repeated")));
        }
    }
    Ok(())
}

/// Runs the `(k_1, ..., k_s)`-strategy on one interview order. `perm[t-1]` is
/// the rank of the `t`-th applicant, `n` being the best.
pub fn run_strategy(perm: &[usize], thresholds: &[usize], model: TerminationModel) -> Result<Outcome> {
    check_permutation(perm)?;
    check_monotone(thresholds)?;
    let mut positions = Vec::with_capacity(thresholds.len());
    let trace = execute(perm, thresholds, model, Some(&mut positions));
    Ok(Outcome {
        won: trace.won,
        stop_position: trace.stop_position,
        selections_made: trace.selections_made,
        selection_positions: positions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub model: TerminationModel,
    pub n: usize,
    /// `(k_1, ..., k_s)`.
    pub thresholds: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub wins: u64,
    pub win_rate: f64,
    /// Standard error of `win_rate`.
    pub std_err: f64,
    /// Mean stop position divided by `n`.
    pub esr: f64,
    /// Standard error of `esr`.
    pub esr_std_err: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    wins: u64,
    stop_sum: u128,
    stop_sq_sum: u128,
}

impl Tally {
    fn merge(self, other: Tally) -> Tally {
        Tally {
            wins: self.wins + other.wins,
            stop_sum: self.stop_sum + other.stop_sum,
            stop_sq_sum: self.stop_sq_sum + other.stop_sq_sum,
        }
    }
}

/// The RNG for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn simulate(
    n: usize,
    thresholds: &ThresholdVector,
    model: TerminationModel,
    trials: u64,
    seed: u64,
) -> Result<SimStats> {
    simulate_with(Execution::default(), n, thresholds, model, trials, seed)
}

pub fn simulate_with(
    exec: Execution,
    n: usize,
    thresholds: &ThresholdVector,
    model: TerminationModel,
    trials: u64,
    seed: u64,
) -> Result<SimStats> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if thresholds.n() != n {
        return Err(Error::InvalidParameter(format!(
            "thresholds were built for n = {}, not {n}",
            thresholds.n()
        )));
    }
    let ks = thresholds.interview_order();
    let tally = exec.map_reduce(
        trials,
        Tally::default,
        |trial| {
            let mut rng = trial_rng(seed, trial);
            let mut perm: Vec<usize> = (1..=n).collect();
            perm.shuffle(&mut rng);
            let trace = execute(&perm, &ks, model, None);
            let stop = trace.stop_position as u128;
            Tally {
                wins: trace.won as u64,
                stop_sum: stop,
                stop_sq_sum: stop * stop,
            }
        },
        Tally::merge,
    );

    let t = trials as f64;
    let win_rate = tally.wins as f64 / t;
    let std_err = (win_rate * (1.0 - win_rate) / t).sqrt();
    let mean_stop = tally.stop_sum as f64 / t;
    let var_stop = if trials > 1 {
        let sum = tally.stop_sum as f64;
        ((tally.stop_sq_sum as f64 - sum * sum / t) / (t - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(SimStats {
        model,
        n,
        thresholds: ks,
        trials,
        seed,
        wins: tally.wins,
        win_rate,
        std_err,
        esr: mean_stop / n as f64,
        esr_std_err: (var_stop / t).sqrt() / n as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub s: usize,
    pub thresholds: ThresholdVector,
    pub dowry: SimStats,
    pub query: SimStats,
}

/// ESR of the optimal strategy for every `s = 1..=s_max` under both models.
/// Both models share the same seed, so they see the same permutations.
pub fn esr_sweep(n: usize, s_max: usize, trials: u64, seed: u64) -> Result<Vec<SweepRow>> {
    esr_sweep_with(Execution::default(), n, s_max, trials, seed)
}

pub fn esr_sweep_with(
    exec: Execution,
    n: usize,
    s_max: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let full = optimal_thresholds(&compute_q_tables(n, s_max)?);
    (1..=s_max)
        .map(|s| {
            let tv = ThresholdVector::from_right_hand(n, &full.right_hand()[..s])?;
            let dowry = simulate_with(exec, n, &tv, TerminationModel::Dowry, trials, seed)?;
            let query = simulate_with(exec, n, &tv, TerminationModel::Query, trials, seed)?;
            Ok(SweepRow {
                s,
                thresholds: tv,
                dowry,
                query,
            })
        })
        .collect()
}
