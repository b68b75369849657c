//! Limiting threshold ratios `x_r = lim a_r / n` and limiting success
//! probabilities as `n -> infinity`.
//!
//! `I_{r-1}` is a sum of `r - 1` nested blocks. Block `d` (for `d = 1..r-1`)
//! has `d + 1` integration variables, each weighted by `1/t`:
//!
//! ```text
//! t_1 in [x_{r-d}, x_{r-d-1}],  t_j in [x_{r-d+j-2}, t_{j-1}]  (j = 2..d+1)
//! ```
//!
//! with `x_0 = 1`. Under `u = ln t` every weight becomes `du`, so each block is
//! evaluated inside-out: the innermost layer is `u - ln x_{r-1}` and every
//! further layer is a Chebyshev table of the running integral of the layer
//! below, fitted once and reused for all outer evaluations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_dp::{compute_q_tables, optimal_thresholds};
use crate::exec::Execution;
use crate::quadrature::{integrate, Chebyshev};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticResult {
    pub s: usize,
    /// `x[r-1] = x_r`, strictly decreasing.
    pub x: Vec<f64>,
    /// `p[r-1]`: limiting success probability with `r` selections.
    pub p: Vec<f64>,
    /// `i_values[r-1] = I_{r-1}`; `I_0 = 0`.
    pub i_values: Vec<f64>,
    pub tol: f64,
}

fn check_ratios(x: &[f64]) -> Result<()> {
    let mut prev = 1.0;
    for (i, &v) in x.iter().enumerate() {
        if !(v > 0.0 && v < prev) {
            return Err(Error::InvalidParameter(format!(
                "ratios must satisfy 0 < x_{} < x_{} (got {v})",
                i + 1,
                i
            )));
        }
        prev = v;
    }
    Ok(())
}

/// Block `d` of `I_{r-1}` where `x = (x_1, ..., x_{r-1})`.
fn block(x: &[f64], d: usize, tol: f64) -> Result<f64> {
    let r = x.len() + 1;
    let ln_x = |i: usize| if i == 0 { 0.0 } else { x[i - 1].ln() };
    let lower = ln_x(r - d);
    let upper = ln_x(r - d - 1);
    let innermost = ln_x(r - 1);

    let mut layer: Box<dyn Fn(f64) -> f64 + Sync> = Box::new(move |u| u - innermost);
    for j in (2..=d).rev() {
        let lj = ln_x(r - d + j - 2);
        let below = layer;
        let table = Chebyshev::fit(
            |u| integrate(&*below, lj, u, 1e-2 * tol).map(|(v, _)| v),
            lj,
            upper,
            1e-2 * tol,
        )?;
        layer = Box::new(move |u| table.eval(u));
    }
    integrate(&*layer, lower, upper, tol).map(|(v, _)| v)
}

/// `I_{r-1}` for `x = (x_1, ..., x_{r-1})`.
pub fn nested_integral(x: &[f64]) -> Result<f64> {
    nested_integral_with(Execution::default(), x, DEFAULT_TOLERANCE)
}

pub fn nested_integral_with(exec: Execution, x: &[f64], tol: f64) -> Result<f64> {
    check_ratios(x)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    if x.is_empty() {
        return Ok(0.0);
    }
    let blocks: Vec<usize> = (1..=x.len()).collect();
    let per_block = tol / blocks.len() as f64;
    let values = exec.map_slice(&blocks, |&d| block(x, d, per_block));
    // Summed in block order regardless of execution mode.
    values.into_iter().try_fold(0.0, |acc, v| Ok(acc + v?))
}

/// `x_r = x_{r-1} e^{I_{r-1} - 1}`.
pub fn next_ratio(x_prev: f64, i_val: f64) -> f64 {
    x_prev * (i_val - 1.0).exp()
}

/// `H_r'` at `x = (x_1, ..., x_r)`, given `I_{r-1}` for the first `r - 1`
/// ratios.
pub fn h_prime(x: &[f64], i_prev: f64) -> f64 {
    let r = x.len();
    let x_r = x[r - 1];
    let x_prev = if r == 1 { 1.0 } else { x[r - 2] };
    x_r * ((x_prev / x_r).ln() + i_prev)
}

pub fn asymptotic_chain(s: usize, tol: f64) -> Result<AsymptoticResult> {
    asymptotic_chain_with(Execution::default(), s, tol)
}

pub fn asymptotic_chain_with(exec: Execution, s: usize, tol: f64) -> Result<AsymptoticResult> {
    if s == 0 {
        return Err(Error::InvalidParameter("s must be at least 1".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let mut x: Vec<f64> = Vec::with_capacity(s);
    let mut p = Vec::with_capacity(s);
    let mut i_values = Vec::with_capacity(s);
    let mut total = 0.0;
    for _ in 0..s {
        let i_val = nested_integral_with(exec, &x, tol)?;
        let x_prev = x.last().copied().unwrap_or(1.0);
        x.push(next_ratio(x_prev, i_val));
        total += h_prime(&x, i_val);
        p.push(total);
        i_values.push(i_val);
    }
    Ok(AsymptoticResult {
        s,
        x,
        p,
        i_values,
        tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub j: usize,
    pub a: usize,
    pub ratio: f64,
    pub x: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub n: usize,
    pub s: usize,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn max_gap(&self) -> f64 {
        self.rows.iter().map(|r| r.gap).fold(0.0, f64::max)
    }
}

/// `|a_j / n - x_j|` for `j = 1..s`, using the exact finite thresholds.
pub fn finite_to_asymptotic_check(n: usize, s: usize) -> Result<ConvergenceReport> {
    let limits = asymptotic_chain(s, DEFAULT_TOLERANCE)?;
    let thresholds = optimal_thresholds(&compute_q_tables(n, s)?);
    let rows = (1..=s)
        .map(|j| {
            let a = thresholds.remaining(j);
            let ratio = a as f64 / n as f64;
            let x = limits.x[j - 1];
            ConvergenceRow {
                j,
                a,
                ratio,
                x,
                gap: (ratio - x).abs(),
            }
        })
        .collect();
    Ok(ConvergenceReport { n, s, rows })
}
