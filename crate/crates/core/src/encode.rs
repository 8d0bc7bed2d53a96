//! Turning group states into an abstract diagram under one of three
//! encoding schemes.
//!
//! All schemes share the same topology: one column per step, one node per
//! cluster, one edge per (cluster, next-step cluster) pair that some agent
//! follows. They differ in how nodes are labelled and styled:
//!
//! * [`Scheme::Symbols`] gives every membership set its own letter.
//! * [`Scheme::Counts`] labels a node with its member count.
//! * [`Scheme::Boxes`] drops labels in favour of shading (cluster size) and
//!   border weight (the step's first independent value), and omits edges
//!   unless asked for.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{transition_counts, GroupState};
use crate::model::Experiment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(into = "u8")]
pub enum Scheme {
    Symbols,
    Counts,
    Boxes,
}

impl From<Scheme> for u8 {
    fn from(s: Scheme) -> u8 {
        match s {
            Scheme::Symbols => 1,
            Scheme::Counts => 2,
            Scheme::Boxes => 3,
        }
    }
}

impl TryFrom<u8> for Scheme {
    type Error = Error;

    fn try_from(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Scheme::Symbols),
            2 => Ok(Scheme::Counts),
            3 => Ok(Scheme::Boxes),
            _ => Err(Error::Usage(format!("scheme must be 1, 2 or 3, got {n}"))),
        }
    }
}

/// Experiment-level context a diagram needs beyond the group states.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagramMeta {
    pub agents: Vec<String>,
    pub independent_names: Vec<String>,
    /// Independent values of every step of the experiment, by step index.
    pub step_independents: Vec<Vec<f64>>,
    pub axis_names: Vec<String>,
    pub reduced: bool,
}

impl DiagramMeta {
    pub fn from_experiment(exp: &Experiment) -> Self {
        DiagramMeta {
            agents: exp.agents().to_vec(),
            independent_names: exp.independents().to_vec(),
            step_independents: exp
                .steps()
                .iter()
                .map(|s| s.independent_values.clone())
                .collect(),
            axis_names: exp.outcomes().to_vec(),
            reduced: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisMeta {
    pub names: Vec<String>,
    /// True when the axes are principal components rather than raw outcomes.
    pub reduced: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeStyle {
    /// Cluster size over `M`, in (0, 1].
    pub intensity: f64,
    /// Step's first independent value mapped onto [0.25, 1].
    pub border_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Node {
    /// Cluster id within the step.
    pub id: usize,
    pub members: Vec<usize>,
    pub centroid: Vec<f64>,
    pub label: String,
    pub size: usize,
    /// Vertical slot within the column, 0 at the top.
    pub position: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub style: Option<NodeStyle>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub step_index: usize,
    pub independent_values: Vec<f64>,
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub from_step: usize,
    pub from_node: usize,
    pub to_step: usize,
    pub to_node: usize,
    pub agent_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagramModel {
    pub scheme: Scheme,
    pub agents: Vec<String>,
    pub independent_names: Vec<String>,
    pub axis_meta: AxisMeta,
    pub columns: Vec<Column>,
    pub edges: Vec<Edge>,
}

impl DiagramModel {
    pub fn num_nodes(&self) -> usize {
        self.columns.iter().map(|c| c.nodes.len()).sum()
    }

    /// Column of a step, if present.
    pub fn column(&self, step_index: usize) -> Option<&Column> {
        self.columns.iter().find(|c| c.step_index == step_index)
    }

    /// Node labels per column, top-to-bottom in id order.
    pub fn labels(&self) -> Vec<Vec<String>> {
        self.columns
            .iter()
            .map(|c| c.nodes.iter().map(|n| n.label.clone()).collect())
            .collect()
    }

    /// Verifies the structural invariants; a failure is an internal error.
    pub fn check(&self) -> Result<()> {
        let m = self.agents.len();
        for col in &self.columns {
            let mut seen = vec![false; m];
            for node in &col.nodes {
                if node.size != node.members.len() || node.members.is_empty() {
                    return Err(Error::Internal(format!(
                        "step {} node {}: size does not match members",
                        col.step_index, node.id
                    )));
                }
                for &j in &node.members {
                    if j >= m || std::mem::replace(&mut seen[j], true) {
                        return Err(Error::Internal(format!(
                            "step {}: agent {j} appears twice or is out of range",
                            col.step_index
                        )));
                    }
                }
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::Internal(format!(
                    "step {}: nodes do not cover every agent",
                    col.step_index
                )));
            }
        }
        if !self.edges.is_empty() {
            for w in self.columns.windows(2) {
                let flow: usize = self
                    .edges
                    .iter()
                    .filter(|e| e.from_step == w[0].step_index && e.to_step == w[1].step_index)
                    .map(|e| e.agent_count)
                    .sum();
                if flow != m {
                    return Err(Error::Internal(format!(
                        "edges from step {} carry {flow} agents, expected {m}",
                        w[0].step_index
                    )));
                }
            }
        }
        if self.scheme == Scheme::Symbols {
            let mut by_set: HashMap<&[usize], &str> = HashMap::new();
            let mut by_label: HashMap<&str, &[usize]> = HashMap::new();
            for node in self.columns.iter().flat_map(|c| &c.nodes) {
                let set = node.members.as_slice();
                if *by_set.entry(set).or_insert(&node.label) != node.label
                    || *by_label.entry(&node.label).or_insert(set) != set
                {
                    return Err(Error::Internal(format!(
                        "label '{}' is not a bijection with membership sets",
                        node.label
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Bijective base-26 label: 0 -> "a", 25 -> "z", 26 -> "aa", 701 -> "zz".
pub fn symbol(index: usize) -> String {
    let mut n = index + 1;
    let mut out = Vec::new();
    while n > 0 {
        n -= 1;
        out.push(b'a' + (n % 26) as u8);
        n /= 26;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

/// Largest agent count for which every non-empty subset gets a reserved
/// symbol within 'a'..'zz'.
pub const MAX_CANONICAL_AGENTS: usize = 9;

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Position of `members` (sorted, non-empty) among all non-empty subsets of
/// `m` agents ordered by size, then lexicographically.
pub fn subset_rank(members: &[usize], m: usize) -> usize {
    let size = members.len();
    let mut rank: usize = (1..size).map(|s| binomial(m, s)).sum();
    let mut next = 0;
    for (i, &c) in members.iter().enumerate() {
        for v in next..c {
            rank += binomial(m - 1 - v, size - 1 - i);
        }
        next = c + 1;
    }
    rank
}

/// Symbol of a membership set under the canonical enumeration, when `m` is
/// small enough for one.
pub fn canonical_symbol(members: &[usize], m: usize) -> Option<String> {
    (m <= MAX_CANONICAL_AGENTS && !members.is_empty()).then(|| symbol(subset_rank(members, m)))
}

fn build(
    gs: &[GroupState],
    meta: &DiagramMeta,
    scheme: Scheme,
    draw_edges: bool,
) -> Result<DiagramModel> {
    let Some(first) = gs.first() else {
        return Err(Error::Usage("no group states to encode".into()));
    };
    let m = first.matrix.len();
    if meta.agents.len() != m {
        return Err(Error::Usage(format!(
            "metadata names {} agents, group states have {m}",
            meta.agents.len()
        )));
    }
    let mut edges = Vec::new();
    for w in gs.windows(2) {
        for t in transition_counts(&w[0], &w[1])? {
            edges.push(Edge {
                from_step: w[0].step_index,
                from_node: t.from,
                to_step: w[1].step_index,
                to_node: t.to,
                agent_count: t.count,
            });
        }
    }
    if !draw_edges {
        edges.clear();
    }

    let independents_of = |t: usize| -> Result<&Vec<f64>> {
        meta.step_independents.get(t).ok_or_else(|| {
            Error::Usage(format!("no independent values recorded for step {t}"))
        })
    };

    let border_of = {
        let firsts: Vec<f64> = meta
            .step_independents
            .iter()
            .filter_map(|v| v.first().copied())
            .collect();
        let lo = firsts.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = firsts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        move |v: f64| {
            if hi > lo {
                0.25 + 0.75 * (v - lo) / (hi - lo)
            } else {
                1.0
            }
        }
    };

    let mut lazy: HashMap<Vec<usize>, String> = HashMap::new();
    let mut columns = Vec::with_capacity(gs.len());
    for g in gs {
        let ivs = independents_of(g.step_index)?;
        let clusters = &g.partition.clusters;
        let mut order: Vec<usize> = (0..clusters.len()).collect();
        order.sort_by(|&a, &b| {
            let ka = clusters[a].centroid.first().copied().unwrap_or(0.0);
            let kb = clusters[b].centroid.first().copied().unwrap_or(0.0);
            kb.total_cmp(&ka).then(a.cmp(&b))
        });
        let mut position = vec![0; clusters.len()];
        for (slot, &id) in order.iter().enumerate() {
            position[id] = slot;
        }

        let nodes = clusters
            .iter()
            .enumerate()
            .map(|(id, c)| {
                let label = match scheme {
                    Scheme::Symbols => canonical_symbol(&c.members, m).unwrap_or_else(|| {
                        let next = lazy.len();
                        lazy.entry(c.members.clone())
                            .or_insert_with(|| symbol(next))
                            .clone()
                    }),
                    Scheme::Counts => c.members.len().to_string(),
                    Scheme::Boxes => String::new(),
                };
                let style = (scheme == Scheme::Boxes).then(|| NodeStyle {
                    intensity: c.members.len() as f64 / m as f64,
                    border_weight: border_of(ivs.first().copied().unwrap_or(0.0)),
                });
                Node {
                    id,
                    members: c.members.clone(),
                    centroid: c.centroid.clone(),
                    label,
                    size: c.members.len(),
                    position: position[id],
                    style,
                }
            })
            .collect();
        columns.push(Column {
            step_index: g.step_index,
            independent_values: ivs.clone(),
            nodes,
        });
    }

    Ok(DiagramModel {
        scheme,
        agents: meta.agents.clone(),
        independent_names: meta.independent_names.clone(),
        axis_meta: AxisMeta {
            names: meta.axis_names.clone(),
            reduced: meta.reduced,
        },
        columns,
        edges,
    })
}

/// Unique symbol per membership set.
pub fn encode_scheme1(gs: &[GroupState], meta: &DiagramMeta) -> Result<DiagramModel> {
    build(gs, meta, Scheme::Symbols, true)
}

/// Member count per node.
pub fn encode_scheme2(gs: &[GroupState], meta: &DiagramMeta) -> Result<DiagramModel> {
    build(gs, meta, Scheme::Counts, true)
}

/// Shaded boxes; edges only when `draw_edges` is set.
pub fn encode_scheme3(
    gs: &[GroupState],
    meta: &DiagramMeta,
    draw_edges: bool,
) -> Result<DiagramModel> {
    build(gs, meta, Scheme::Boxes, draw_edges)
}

/// Dispatches on `scheme`. `draw_edges` only affects scheme 3.
pub fn encode(
    gs: &[GroupState],
    meta: &DiagramMeta,
    scheme: Scheme,
    draw_edges: bool,
) -> Result<DiagramModel> {
    match scheme {
        Scheme::Symbols => encode_scheme1(gs, meta),
        Scheme::Counts => encode_scheme2(gs, meta),
        Scheme::Boxes => encode_scheme3(gs, meta, draw_edges),
    }
}
