//! Optimal multi-selection stopping for the secretary problem with `s`
//! selections: exact finite-`n` thresholds and winning probabilities,
//! threshold-strategy counting, the explicit prefix tree for small `n`,
//! limiting thresholds as `n -> infinity`, Monte Carlo stopping behaviour and
//! a brute-force oracle.
//!
//! Thresholds follow two conventions. In interview order a strategy is
//! `(k_1, ..., k_s)` with `k_1 <= ... <= k_s`: the `i`-th selection is the
//! first left-to-right maximum after position `k_i` (and after the previous
//! selection). The backward-induction solver produces `a_j`, the cut-off used
//! when `j` selections remain, so `k_i = a_{s+1-i}`.

pub mod asymptotic;
pub mod counting;
pub mod error;
pub mod exact_dp;
pub mod exec;
pub mod oracle;
pub mod prefix_tree;
pub mod quadrature;
pub mod rational;
pub mod simulator;

pub use error::{Error, Result};
pub use exact_dp::{compute_q_tables, optimal_thresholds, right_hand_sequence, QTable, ThresholdVector};
pub use exec::Execution;
pub use rational::Rational;
pub use simulator::TerminationModel;
