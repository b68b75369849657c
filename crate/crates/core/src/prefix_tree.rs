//! Explicit prefix tree for small `n`, annotated with exact numerators of the
//! accept / continue probabilities at every prefix.
//!
//! Every node stores numerators over its own standard denominator
//! `sd = n!/k!` (the number of permutations of `S_n` with that prefix), so
//! the conservation laws are plain integer sums. Two interview histories with
//! the same relative order share a node.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::exact_dp::compute_q_tables;
use crate::exec::Execution;
use crate::rational::{factorial, fraction_string, Rational};

pub const DEFAULT_TREE_CAP: usize = 8;

/// Relative order of the first `k` applicants, values `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Prefix(Vec<u8>);

impl Prefix {
    pub fn root() -> Self {
        Prefix(Vec::new())
    }

    /// Validates that `values` is a permutation of `1..=values.len()`.
    pub fn new(values: Vec<u8>) -> Result<Self> {
        let as_usize: Vec<usize> = values.iter().map(|&v| v as usize).collect();
        if !as_usize.is_empty() {
            crate::simulator::check_permutation(&as_usize)?;
        }
        Ok(Prefix(values))
    }

    pub fn values(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The last applicant beats everyone seen before.
    pub fn ends_in_maximum(&self) -> bool {
        self.0.last().is_some_and(|&v| v as usize == self.0.len())
    }

    /// Ends in a left-to-right maximum or has full length `n`.
    pub fn is_eligible(&self, n: usize) -> bool {
        self.ends_in_maximum() || (!self.is_empty() && self.len() == n)
    }

    /// True when `self` is a prefix (relabelled) of `other`.
    pub fn is_prefix_of(&self, other: &Prefix) -> bool {
        self.len() <= other.len() && relabel(&other.0[..self.len()]) == self.0
    }
}

fn relabel(values: &[u8]) -> Vec<u8> {
    values
        .iter()
        .map(|&v| 1 + values.iter().filter(|&&w| w < v).count() as u8)
        .collect()
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.0.iter().any(|&v| v >= 10);
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "[{}]", parts.join(if wide { " " } else { "" }))
    }
}

/// `lambda_j(prefix)`: the extension by one applicant whose relative rank
/// among the first `len + 1` is `j`.
pub fn child(prefix: &Prefix, j: usize) -> Result<Prefix> {
    let len = prefix.len() + 1;
    if j == 0 || j > len {
        return Err(Error::ChildOutOfRange { j, len: prefix.len() });
    }
    if len > u8::MAX as usize {
        return Err(Error::InvalidParameter("prefix too long".into()));
    }
    let j8 = j as u8;
    let mut values: Vec<u8> = prefix
        .0
        .iter()
        .map(|&v| if v >= j8 { v + 1 } else { v })
        .collect();
    values.push(j8);
    Ok(Prefix(values))
}

#[derive(Debug, Clone)]
pub struct PrefixNode {
    pub prefix: Prefix,
    pub parent: Option<usize>,
    /// Children are stored contiguously, ordered by `j`.
    pub children: Range<usize>,
    pub eligible: bool,
    pub sd: BigInt,
    pub win: BigInt,
    /// `qnum[i-1]`: numerator of the accept probability with `i` selections.
    pub qnum: Vec<BigInt>,
    pub qonum: Vec<BigInt>,
    pub qbarnum: Vec<BigInt>,
}

impl PrefixNode {
    pub fn q(&self, i: usize) -> Rational {
        Rational::new(self.qnum[i - 1].clone(), self.sd.clone())
    }

    pub fn qo(&self, i: usize) -> Rational {
        Rational::new(self.qonum[i - 1].clone(), self.sd.clone())
    }

    pub fn qbar(&self, i: usize) -> Rational {
        Rational::new(self.qbarnum[i - 1].clone(), self.sd.clone())
    }

    /// `Q_i >= Q_i^o`.
    pub fn is_positive(&self, i: usize) -> bool {
        self.qnum[i - 1] >= self.qonum[i - 1]
    }
}

#[derive(Debug, Clone)]
pub struct AnnotatedTree {
    n: usize,
    s: usize,
    nodes: Vec<PrefixNode>,
    /// Node index range of every length `0..=n`.
    by_length: Vec<Range<usize>>,
}

impl AnnotatedTree {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn nodes(&self) -> &[PrefixNode] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> &PrefixNode {
        &self.nodes[idx]
    }

    pub fn root(&self) -> &PrefixNode {
        &self.nodes[0]
    }

    /// Node indices of all prefixes of length `k`.
    pub fn length_class(&self, k: usize) -> Range<usize> {
        self.by_length[k].clone()
    }

    pub fn find(&self, prefix: &Prefix) -> Option<usize> {
        let mut idx = 0;
        if prefix.len() > self.n {
            return None;
        }
        for k in 1..=prefix.len() {
            let j = *relabel(&prefix.values()[..k]).last()? as usize;
            idx = self.nodes[idx].children.start + (j - 1);
        }
        (self.nodes[idx].prefix == *prefix).then_some(idx)
    }

    /// Optimal win probability with `s` selections, read at the root.
    pub fn optimal_value(&self, s: usize) -> Rational {
        self.root().qo(s)
    }
}

pub fn build_annotated_tree(n: usize, s: usize) -> Result<AnnotatedTree> {
    build_annotated_tree_with_cap(n, s, DEFAULT_TREE_CAP)
}

pub fn build_annotated_tree_with_cap(n: usize, s: usize, cap: usize) -> Result<AnnotatedTree> {
    if n == 0 || s == 0 {
        return Err(Error::InvalidParameter(format!(
            "n and s must be at least 1 (got n = {n}, s = {s})"
        )));
    }
    if n > cap || n > u8::MAX as usize {
        return Err(Error::TreeTooLarge { n, cap });
    }
    let n_fact: BigInt = factorial(n).into();
    let empty = || vec![BigInt::zero(); s];

    let mut nodes = vec![PrefixNode {
        prefix: Prefix::root(),
        parent: None,
        children: 0..0,
        eligible: false,
        sd: n_fact.clone(),
        win: BigInt::zero(),
        qnum: empty(),
        qonum: empty(),
        qbarnum: empty(),
    }];
    let mut by_length: Vec<Range<usize>> = Vec::with_capacity(n + 1);
    by_length.push(0..1);

    // sd = n!/k! and, for prefixes ending in a maximum, win = (n-1)!/(k-1)!.
    let mut sd = n_fact.clone();
    for k in 1..=n {
        sd /= BigInt::from(k);
        let win_if_max: BigInt = (k..n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i));
        let parents = by_length[k - 1].clone();
        let start = nodes.len();
        for p in parents {
            let first = nodes.len();
            for j in 1..=k {
                let prefix = child(&nodes[p].prefix, j)?;
                let ends_max = j == k;
                nodes.push(PrefixNode {
                    eligible: prefix.is_eligible(n),
                    prefix,
                    parent: Some(p),
                    children: 0..0,
                    sd: sd.clone(),
                    win: if ends_max { win_if_max.clone() } else { BigInt::zero() },
                    qnum: empty(),
                    qonum: empty(),
                    qbarnum: empty(),
                });
            }
            nodes[p].children = first..nodes.len();
        }
        by_length.push(start..nodes.len());
    }

    // Backward induction over the tree, deepest nodes first.
    for idx in (0..nodes.len()).rev() {
        let children = nodes[idx].children.clone();
        let mut qonum = empty();
        for c in children {
            for (acc, v) in qonum.iter_mut().zip(&nodes[c].qbarnum) {
                *acc += v;
            }
        }
        let node = &mut nodes[idx];
        if idx == 0 {
            // Nothing to accept at the root.
            node.qbarnum = qonum.clone();
        } else {
            for i in 0..s {
                let mut q = node.win.clone();
                if i > 0 {
                    q += &qonum[i - 1];
                }
                node.qbarnum[i] = std::cmp::max(&q, &qonum[i]).clone();
                node.qnum[i] = q;
            }
        }
        node.qonum = qonum;
    }

    Ok(AnnotatedTree {
        n,
        s,
        nodes,
        by_length,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrikeMember {
    pub prefix: Prefix,
    pub node: usize,
    /// Selections available when this prefix is accepted.
    pub layer: usize,
}

/// Layered acceptance set of an optimal strategy with at most `s` selections.
///
/// Full-length prefixes that do not end in the maximum are always eligible
/// and trivially accept-positive, but carry zero value; they are counted in
/// `implicit_terminals` rather than listed as members.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrikeSet {
    pub n: usize,
    pub s: usize,
    /// Ordered by length, then lexicographically.
    pub members: Vec<StrikeMember>,
    pub implicit_terminals: usize,
}

impl StrikeSet {
    /// Members accepted with `i` selections available.
    pub fn layer(&self, i: usize) -> Vec<&Prefix> {
        self.members
            .iter()
            .filter(|m| m.layer == i)
            .map(|m| &m.prefix)
            .collect()
    }

    pub fn prefixes(&self) -> Vec<&Prefix> {
        self.members.iter().map(|m| &m.prefix).collect()
    }

    pub fn contains(&self, prefix: &Prefix) -> bool {
        self.members.iter().any(|m| &m.prefix == prefix)
    }

    /// `sum Q_1(sigma) * SD(sigma)` over members: the number of winning
    /// permutations of the strategy.
    pub fn value_numerator(&self, tree: &AnnotatedTree) -> BigInt {
        self.members
            .iter()
            .map(|m| tree.node(m.node).win.clone())
            .sum()
    }

    pub fn value(&self, tree: &AnnotatedTree) -> Rational {
        Rational::new(self.value_numerator(tree), factorial(self.n).into())
    }

    /// Checks eligibility, layer positivity, `s`-minimality, 1-minimality of
    /// each layer and that every permutation of `S_n` has a member as a
    /// prefix (zero-value full-length prefixes standing in for themselves).
    /// Returns a description of the first violation.
    pub fn validate(&self, tree: &AnnotatedTree) -> std::result::Result<(), String> {
        let mut is_member = vec![None; tree.nodes().len()];
        for m in &self.members {
            let node = tree.node(m.node);
            if !node.eligible {
                return Err(format!("{} is not eligible", m.prefix));
            }
            if !node.is_positive(m.layer) {
                return Err(format!("{} is not type-{} positive", m.prefix, m.layer));
            }
            is_member[m.node] = Some(m.layer);
        }
        for m in &self.members {
            let mut chain = 1;
            let mut cur = tree.node(m.node).parent;
            while let Some(p) = cur {
                if let Some(layer) = is_member[p] {
                    chain += 1;
                    if layer == m.layer {
                        return Err(format!(
                            "layer {} is not 1-minimal: {} lies under {}",
                            layer,
                            m.prefix,
                            tree.node(p).prefix
                        ));
                    }
                }
                cur = tree.node(p).parent;
            }
            if chain > self.s {
                return Err(format!("{} ends a chain of {} members", m.prefix, chain));
            }
        }
        let mut uncovered = 0;
        for idx in tree.length_class(tree.n()) {
            let mut cur = Some(idx);
            let mut covered = false;
            while let Some(c) = cur {
                if is_member[c].is_some() {
                    covered = true;
                    break;
                }
                cur = tree.node(c).parent;
            }
            if !covered {
                let leaf = tree.node(idx);
                if leaf.prefix.ends_in_maximum() {
                    return Err(format!("{} is not covered", leaf.prefix));
                }
                uncovered += 1;
            }
        }
        if uncovered > self.implicit_terminals {
            return Err(format!(
                "{} uncovered zero-value permutations but only {} implicit terminals",
                uncovered, self.implicit_terminals
            ));
        }
        Ok(())
    }
}

/// Layered strike set of the optimal strategy with `s` selections.
///
/// Starting at `[1]`, a prefix is taken into layer `i` when it is eligible
/// and type-`i` positive, after which its subtree is searched with `i - 1`
/// selections; otherwise its children are searched with `i` selections.
pub fn extract_strike_set(tree: &AnnotatedTree, s: usize) -> Result<StrikeSet> {
    if s == 0 || s > tree.s() {
        return Err(Error::InvalidParameter(format!(
            "s must be in 1..={} for this tree",
            tree.s()
        )));
    }
    let mut members = Vec::new();
    let mut implicit_terminals = 0;
    // (node, selections available)
    let mut stack = vec![(1usize, s)];
    while let Some((idx, i)) = stack.pop() {
        let node = tree.node(idx);
        if node.eligible && node.is_positive(i) {
            if node.prefix.len() == tree.n() && !node.prefix.ends_in_maximum() {
                implicit_terminals += 1;
                continue;
            }
            members.push(StrikeMember {
                prefix: node.prefix.clone(),
                node: idx,
                layer: i,
            });
            if i > 1 {
                stack.extend(node.children.clone().map(|c| (c, i - 1)));
            }
        } else {
            stack.extend(node.children.clone().map(|c| (c, i)));
        }
    }
    members.sort_by(|a, b| {
        (a.prefix.len(), &a.prefix).cmp(&(b.prefix.len(), &b.prefix))
    });
    Ok(StrikeSet {
        n: tree.n(),
        s,
        members,
        implicit_terminals,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub length: usize,
    pub prefix: String,
    /// e.g. `qo_2`.
    pub quantity: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub n: usize,
    pub s: usize,
    pub nodes_checked: usize,
    pub passed: bool,
    pub counterexample: Option<Counterexample>,
}

fn check_length_class(
    tree: &AnnotatedTree,
    table: &crate::exact_dp::QTable,
    k: usize,
) -> (usize, Option<Counterexample>) {
    let class = tree.length_class(k);
    let nodes = &tree.nodes()[class.clone()];
    let rep = &nodes[0];
    let rep_max = nodes.iter().find(|n| n.prefix.ends_in_maximum());
    let fail = |node: &PrefixNode, quantity: String, expected: String, actual: String| Counterexample {
        length: k,
        prefix: node.prefix.to_string(),
        quantity,
        expected,
        actual,
    };

    // Tree nodes and table column `k` share the denominator n!/k!, so
    // numerators compare directly.
    for node in nodes {
        for i in 1..=tree.s() {
            if node.qonum[i - 1] != rep.qonum[i - 1] {
                let cx = fail(
                    node,
                    format!("qo_{i}"),
                    fraction_string(&rep.qo(i)),
                    fraction_string(&node.qo(i)),
                );
                return (nodes.len(), Some(cx));
            }
            if let Some(rm) = rep_max {
                if node.prefix.ends_in_maximum() && node.qnum[i - 1] != rm.qnum[i - 1] {
                    let cx = fail(
                        node,
                        format!("q_{i}"),
                        fraction_string(&rm.q(i)),
                        fraction_string(&node.q(i)),
                    );
                    return (nodes.len(), Some(cx));
                }
            }
        }
    }
    for i in 1..=tree.s() {
        if rep.qonum[i - 1] != *table.qo_num(i, k) {
            let cx = fail(
                rep,
                format!("qo_{i} vs table"),
                fraction_string(&table.qo(i, k)),
                fraction_string(&rep.qo(i)),
            );
            return (nodes.len(), Some(cx));
        }
        if let Some(rm) = rep_max {
            if rm.qnum[i - 1] != *table.q_num(i, k) {
                let cx = fail(
                    rm,
                    format!("q_{i} vs table"),
                    fraction_string(&table.q(i, k)),
                    fraction_string(&rm.q(i)),
                );
                return (nodes.len(), Some(cx));
            }
        }
    }
    (nodes.len(), None)
}

/// Certifies that the per-length table is an exact compression of the tree:
/// continue-probabilities agree across every length class, accept
/// probabilities agree across prefixes ending in a maximum, and both equal
/// the table entries.
pub fn verify_compression(tree: &AnnotatedTree) -> CompressionReport {
    verify_compression_with(Execution::default(), tree)
}

pub fn verify_compression_with(exec: Execution, tree: &AnnotatedTree) -> CompressionReport {
    let table = compute_q_tables(tree.n(), tree.s()).expect("tree parameters are valid");
    let lengths: Vec<usize> = (1..=tree.n()).collect();
    let results = exec.map_slice(&lengths, |&k| check_length_class(tree, &table, k));
    let nodes_checked = results.iter().map(|(c, _)| c).sum();
    let counterexample = results.into_iter().find_map(|(_, cx)| cx);
    CompressionReport {
        n: tree.n(),
        s: tree.s(),
        nodes_checked,
        passed: counterexample.is_none(),
        counterexample,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Json,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(ExportFormat::Dot),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// DOT graph or JSON document of the tree; strike-set members of the optimal
/// `s`-selection strategy are boxed (DOT) or flagged (JSON).
pub fn export_tree(tree: &AnnotatedTree, format: &str) -> Result<Vec<u8>> {
    let format: ExportFormat = format.parse()?;
    let strike = extract_strike_set(tree, tree.s())?;
    let mut layer_of = vec![None; tree.nodes().len()];
    for m in &strike.members {
        layer_of[m.node] = Some(m.layer);
    }
    match format {
        ExportFormat::Json => Ok(export_json(tree, &strike, &layer_of)),
        ExportFormat::Dot => Ok(export_dot(tree, &layer_of)),
    }
}

fn export_json(tree: &AnnotatedTree, strike: &StrikeSet, layer_of: &[Option<usize>]) -> Vec<u8> {
    let s = tree.s();
    let fractions = |f: &dyn Fn(usize) -> Rational| -> Vec<String> {
        (1..=s).map(|i| fraction_string(&f(i))).collect()
    };
    let nodes: Vec<serde_json::Value> = tree
        .nodes()
        .iter()
        .enumerate()
        .map(|(id, node)| {
            json!({
                "id": id,
                "prefix": node.prefix.to_string(),
                "parent": node.parent,
                "length": node.prefix.len(),
                "eligible": node.eligible,
                "sd": node.sd.to_string(),
                "win": node.win.to_string(),
                "q": fractions(&|i| node.q(i)),
                "qo": fractions(&|i| node.qo(i)),
                "qbar": fractions(&|i| node.qbar(i)),
                "strike": layer_of[id].is_some(),
                "layer": layer_of[id],
            })
        })
        .collect();
    let doc = json!({
        "n": tree.n(),
        "s": s,
        "optimal": fraction_string(&tree.optimal_value(s)),
        "strike_set": strike.members.iter().map(|m| m.prefix.to_string()).collect::<Vec<_>>(),
        "implicit_terminals": strike.implicit_terminals,
        "nodes": nodes,
    });
    let mut out = serde_json::to_vec_pretty(&doc).expect("json values always serialize");
    out.push(b'\n');
    out
}

fn export_dot(tree: &AnnotatedTree, layer_of: &[Option<usize>]) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("digraph prefix_tree {\n");
    out.push_str("  rankdir=TB;\n  node [fontname=\"monospace\", fontsize=10];\n");
    for (id, node) in tree.nodes().iter().enumerate() {
        if id == 0 {
            out.push_str("  n0 [label=\"root\", shape=circle];\n");
            continue;
        }
        let mut label = node.prefix.to_string();
        for i in 1..=tree.s() {
            label.push_str(&format!(
                "\\nQ{i}={} Qo{i}={}",
                fraction_string(&node.q(i)),
                fraction_string(&node.qo(i))
            ));
        }
        let shape = if layer_of[id].is_some() { "box" } else { "plaintext" };
        out.push_str(&format!("  n{id} [label=\"{label}\", shape={shape}];\n"));
    }
    for (id, node) in tree.nodes().iter().enumerate() {
        if let Some(p) = node.parent {
            out.push_str(&format!("  n{p} -> n{id};\n"));
        }
    }
    out.push_str("}\n");
    out.into_bytes()
}
