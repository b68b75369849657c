use clap::ValueEnum;
use serde_json::json;

use dowry_core::asymptotic::asymptotic_chain;
use dowry_core::counting::win_probability;
use dowry_core::oracle::{verify_all, Oracle};
use dowry_core::prefix_tree::{build_annotated_tree, export_tree};
use dowry_core::rational::{factorial, fraction_string, to_decimal};
use dowry_core::simulator;
use dowry_core::{compute_q_tables, optimal_thresholds, Error, Rational, TerminationModel, ThresholdVector};

use crate::render::{tuple, Format, Report};
use crate::Failure;

const DECIMAL_DIGITS: usize = 12;

fn fraction_json(r: &Rational) -> serde_json::Value {
    json!({ "fraction": fraction_string(r), "decimal": to_decimal(r, DECIMAL_DIGITS) })
}

fn optimal(n: usize, s: usize) -> Result<(ThresholdVector, Rational), Error> {
    let table = compute_q_tables(n, s)?;
    Ok((optimal_thresholds(&table), table.optimal_value()))
}

pub fn thresholds(n: usize, s: usize) -> Result<Report, Failure> {
    let (tv, value) = optimal(n, s)?;
    let counted = win_probability(n, &tv.interview_order())?;
    if counted.probability != value {
        return Err(Error::InternalDisagreement {
            closed: fraction_string(&counted.probability),
            recurrence: fraction_string(&value),
        }
        .into());
    }
    let mut report = Report::new(
        json!({
            "command": "thresholds",
            "n": n,
            "s": s,
            "k": tv.interview_order(),
            "a": tv.right_hand(),
            "probability": fraction_json(&value),
        }),
        vec!["n", "s", "k (interview order)", "a (a_1..a_s)", "probability", "decimal"],
    );
    report.row(vec![
        n.to_string(),
        s.to_string(),
        tuple(&tv.interview_order()),
        tuple(tv.right_hand()),
        fraction_string(&value),
        to_decimal(&value, DECIMAL_DIGITS),
    ]);
    Ok(report)
}

pub fn winprob(n: usize, k: &[usize]) -> Result<Report, Failure> {
    let result = win_probability(n, k)?;
    let total = factorial(n);
    let path = serde_json::to_value(result.path).expect("enum serializes");
    let mut report = Report::new(
        json!({
            "command": "winprob",
            "n": n,
            "k": k,
            "wins": result.w.to_string(),
            "permutations": total.to_string(),
            "probability": fraction_json(&result.probability),
            "path": path,
        }),
        vec!["n", "k", "wins", "permutations", "probability", "decimal", "path"],
    );
    report.row(vec![
        n.to_string(),
        tuple(k),
        result.w.to_string(),
        total.to_string(),
        fraction_string(&result.probability),
        to_decimal(&result.probability, DECIMAL_DIGITS),
        path.as_str().unwrap_or_default().to_string(),
    ]);
    Ok(report)
}

pub fn asymptotic(s: usize, tol: f64) -> Result<Report, Failure> {
    let res = asymptotic_chain(s, tol)?;
    let mut report = Report::new(
        json!({
            "command": "asymptotic",
            "s": s,
            "tol": tol,
            "x": res.x,
            "p": res.p,
            "i_values": res.i_values,
        }),
        vec!["r", "x_r", "P(r)", "I_(r-1)"],
    );
    for r in 0..s {
        report.row(vec![
            (r + 1).to_string(),
            format!("{:.10}", res.x[r]),
            format!("{:.10}", res.p[r]),
            format!("{:.10}", res.i_values[r]),
        ]);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelChoice {
    Dowry,
    Query,
    Both,
}

impl ModelChoice {
    fn models(self) -> Vec<TerminationModel> {
        match self {
            ModelChoice::Dowry => vec![TerminationModel::Dowry],
            ModelChoice::Query => vec![TerminationModel::Query],
            ModelChoice::Both => TerminationModel::ALL.to_vec(),
        }
    }
}

fn simulation_thresholds(n: usize, s: Option<usize>, k: Option<&[usize]>) -> Result<ThresholdVector, Error> {
    match (s, k) {
        (_, Some(k)) => ThresholdVector::from_interview_order(n, k),
        (Some(s), None) => Ok(optimal(n, s)?.0),
        (None, None) => Err(Error::InvalidParameter("either --s or --k is required".into())),
    }
}

pub fn simulate(
    n: usize,
    s: Option<usize>,
    k: Option<&[usize]>,
    model: ModelChoice,
    trials: u64,
    seed: u64,
) -> Result<Report, Failure> {
    let tv = simulation_thresholds(n, s, k)?;
    let stats = model
        .models()
        .into_iter()
        .map(|m| simulator::simulate(n, &tv, m, trials, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = Report::new(
        json!({
            "command": "simulate",
            "n": n,
            "k": tv.interview_order(),
            "trials": trials,
            "seed": seed,
            "results": stats,
        }),
        vec!["model", "n", "k", "trials", "seed", "wins", "win_rate", "std_err", "esr", "esr_std_err"],
    );
    for st in &stats {
        report.row(vec![
            st.model.to_string(),
            n.to_string(),
            tuple(&st.thresholds),
            trials.to_string(),
            seed.to_string(),
            st.wins.to_string(),
            format!("{:.6}", st.win_rate),
            format!("{:.6}", st.std_err),
            format!("{:.6}", st.esr),
            format!("{:.6}", st.esr_std_err),
        ]);
    }
    Ok(report)
}

pub fn esr_sweep(n: usize, s_max: usize, trials: u64, seed: u64) -> Result<Report, Failure> {
    let rows = simulator::esr_sweep(n, s_max, trials, seed)?;
    let mut report = Report::new(
        json!({
            "command": "esr-sweep",
            "n": n,
            "s_max": s_max,
            "trials": trials,
            "seed": seed,
            "rows": rows,
        }),
        vec![
            "s",
            "k",
            "dowry_esr",
            "dowry_esr_se",
            "dowry_win_rate",
            "query_esr",
            "query_esr_se",
            "query_win_rate",
        ],
    );
    for row in &rows {
        report.row(vec![
            row.s.to_string(),
            tuple(&row.thresholds.interview_order()),
            format!("{:.6}", row.dowry.esr),
            format!("{:.6}", row.dowry.esr_std_err),
            format!("{:.6}", row.dowry.win_rate),
            format!("{:.6}", row.query.esr),
            format!("{:.6}", row.query.esr_std_err),
            format!("{:.6}", row.query.win_rate),
        ]);
    }
    Ok(report)
}

pub fn tree(n: usize, s: usize, format: Format) -> Result<Vec<u8>, Failure> {
    let name = match format {
        Format::Dot => "dot",
        Format::Json => "json",
        Format::Table | Format::Csv => {
            return Err(Failure::Usage("tree supports --format dot or json".into()))
        }
    };
    let tree = build_annotated_tree(n, s)?;
    Ok(export_tree(&tree, name)?)
}

/// Report plus whether every comparison agreed.
pub fn verify(n_max: usize, s_max: usize) -> Result<(Report, bool), Failure> {
    let reports = verify_all(&Oracle::default(), n_max, s_max)?;
    let passed = reports.iter().all(|r| r.passed());
    let mut report = Report::new(
        json!({
            "command": "verify",
            "n_max": n_max,
            "s_max": s_max,
            "passed": passed,
            "reports": reports,
        }),
        vec!["n", "s", "checks", "comparisons", "mismatches"],
    );
    for r in &reports {
        let names: Vec<&str> = r.checked.keys().map(String::as_str).collect();
        report.row(vec![
            r.n.to_string(),
            r.s.to_string(),
            names.join(" "),
            r.checked.values().sum::<u64>().to_string(),
            r.mismatches.len().to_string(),
        ]);
        for a in &r.anchors {
            report
                .notes
                .push(format!("anchor {}: {} (expected {})", a.input, a.actual, a.expected));
        }
        for m in &r.mismatches {
            report.notes.push(format!(
                "mismatch in {} at {}: expected {}, got {}",
                m.check, m.input, m.expected, m.actual
            ));
        }
    }
    report.notes.push(if passed {
        "all checks passed".to_string()
    } else {
        "verification FAILED".to_string()
    });
    Ok((report, passed))
}
