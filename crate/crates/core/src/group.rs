//! Group cognitive states (centroid substitution) and the moves between them.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cluster::ClusterPartition;
use crate::error::{Error, Result};
use crate::model::AgentState;

/// The `M x N` matrix in which each agent's row is replaced by its cluster
/// centroid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupState {
    pub step_index: usize,
    pub matrix: Vec<Vec<f64>>,
    pub partition: ClusterPartition,
}

/// One agent's transition between consecutive group states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupMove {
    pub agent_index: usize,
    pub from_step: usize,
    pub to_step: usize,
    pub from_row: Vec<f64>,
    pub to_row: Vec<f64>,
    pub from_membership: Vec<usize>,
    pub to_membership: Vec<usize>,
}

/// Number of agents flowing from cluster `from` at step t to cluster `to` at
/// step t + 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub count: usize,
}

/// Applies the centroid mapping to one step.
pub fn group_state(partition: &ClusterPartition, states: &[AgentState]) -> Result<GroupState> {
    if states.len() != partition.assignments.len() {
        return Err(Error::Usage(format!(
            "partition covers {} agents but {} states were given",
            partition.assignments.len(),
            states.len()
        )));
    }
    for (j, s) in states.iter().enumerate() {
        if s.step_index != partition.step_index || s.agent_index != j {
            return Err(Error::Usage(format!(
                "state ({}, step {}) does not match partition step {} position {j}",
                s.agent_index, s.step_index, partition.step_index
            )));
        }
    }
    let matrix = partition
        .assignments
        .iter()
        .map(|&c| partition.clusters[c].centroid.clone())
        .collect();
    Ok(GroupState {
        step_index: partition.step_index,
        matrix,
        partition: partition.clone(),
    })
}

fn check_consecutive(a: &GroupState, b: &GroupState) -> Result<()> {
    if b.step_index != a.step_index + 1 {
        return Err(Error::Usage(format!(
            "group states for steps {} and {} are not consecutive",
            a.step_index, b.step_index
        )));
    }
    if a.matrix.len() != b.matrix.len() {
        return Err(Error::Usage("group states cover different agent sets".into()));
    }
    Ok(())
}

/// Per-agent group moves, agent-major: all moves of agent 0 first.
pub fn group_moves(gs: &[GroupState]) -> Result<Vec<GroupMove>> {
    for w in gs.windows(2) {
        check_consecutive(&w[0], &w[1])?;
    }
    let m = gs.first().map_or(0, |g| g.matrix.len());
    let mut moves = Vec::with_capacity(m * gs.len().saturating_sub(1));
    for j in 0..m {
        for w in gs.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            moves.push(GroupMove {
                agent_index: j,
                from_step: a.step_index,
                to_step: b.step_index,
                from_row: a.matrix[j].clone(),
                to_row: b.matrix[j].clone(),
                from_membership: a.partition.clusters[a.partition.assignments[j]].members.clone(),
                to_membership: b.partition.clusters[b.partition.assignments[j]].members.clone(),
            });
        }
    }
    Ok(moves)
}

/// Cluster-to-cluster flow between two consecutive steps, in `(from, to)`
/// order.
pub fn transition_counts(from: &GroupState, to: &GroupState) -> Result<Vec<Transition>> {
    check_consecutive(from, to)?;
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&a, &b) in from
        .partition
        .assignments
        .iter()
        .zip(&to.partition.assignments)
    {
        *counts.entry((a, b)).or_default() += 1;
    }
    Ok(counts
        .into_iter()
        .map(|((from, to), count)| Transition { from, to, count })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{cluster_step, ClusterConfig};
    use crate::fixtures::memory_experiment;
    use crate::model::agent_states;

    fn memory_group_states() -> Vec<GroupState> {
        let exp = memory_experiment();
        (0..3)
            .map(|t| {
                let s = agent_states(&exp, t).unwrap();
                let p = cluster_step(&s, &ClusterConfig::default()).unwrap();
                group_state(&p, &s).unwrap()
            })
            .collect()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 5e-6)
    }

    #[test]
    fn memory_group_state_rows() {
        let gs = memory_group_states();
        assert!(close(&gs[0].matrix[0], &[0.225, 0.50]));
        assert_eq!(gs[0].matrix[0], gs[0].matrix[1]);
        assert_eq!(gs[0].matrix[2], vec![0.45, 0.70]);
        for row in &gs[1].matrix {
            assert!(close(row, &[0.71667, 0.71667]));
            assert_eq!(row, &gs[1].matrix[0]);
        }
        assert_eq!(gs[2].matrix, memory_experiment().steps()[2].measurements);
    }

    #[test]
    fn memory_moves() {
        let moves = group_moves(&memory_group_states()).unwrap();
        assert_eq!(moves.len(), 6);
        let a1: Vec<_> = moves.iter().filter(|m| m.agent_index == 0).collect();
        assert!(close(&a1[0].from_row, &[0.225, 0.50]));
        assert!(close(&a1[0].to_row, &[0.71667, 0.71667]));
        assert_eq!(a1[1].to_row, vec![0.25, 1.00]);
        assert_eq!(a1[0].from_membership, vec![0, 1]);
        assert_eq!(a1[0].to_membership, vec![0, 1, 2]);
        let a3: Vec<_> = moves.iter().filter(|m| m.agent_index == 2).collect();
        assert_eq!(a3[0].from_row, vec![0.45, 0.70]);
        assert_eq!(a3[1].to_row, vec![0.75, 0.55]);
        assert_eq!(a3[1].to_membership, vec![2]);
        assert!(group_moves(&memory_group_states()[..1]).unwrap().is_empty());
    }

    #[test]
    fn memory_transitions() {
        let gs = memory_group_states();
        let t01 = transition_counts(&gs[0], &gs[1]).unwrap();
        let as_tuples = |v: Vec<Transition>| v.into_iter().map(|t| (t.from, t.to, t.count)).collect::<Vec<_>>();
        assert_eq!(as_tuples(t01), vec![(0, 0, 2), (1, 0, 1)]);
        let t12 = transition_counts(&gs[1], &gs[2]).unwrap();
        assert_eq!(as_tuples(t12), vec![(0, 0, 1), (0, 1, 1), (0, 2, 1)]);
    }

    #[test]
    fn identity_partition_pair() {
        let gs = memory_group_states();
        let mut next = gs[0].clone();
        next.step_index = 1;
        next.partition.step_index = 1;
        let t = transition_counts(&gs[0], &next).unwrap();
        assert_eq!(t, vec![Transition { from: 0, to: 0, count: 2 }, Transition { from: 1, to: 1, count: 1 }]);
    }

    #[test]
    fn non_consecutive_rejected() {
        let gs = memory_group_states();
        assert!(matches!(transition_counts(&gs[0], &gs[2]), Err(Error::Usage(_))));
        assert!(matches!(group_moves(&[gs[0].clone(), gs[2].clone()]), Err(Error::Usage(_))));
    }

    #[test]
    fn mismatched_states_rejected() {
        let gs = memory_group_states();
        let s1 = agent_states(&memory_experiment(), 1).unwrap();
        assert!(matches!(group_state(&gs[0].partition, &s1), Err(Error::Usage(_))));
    }

    #[test]
    fn idempotent_on_own_rows() {
        for g in memory_group_states() {
            let states: Vec<AgentState> = g
                .matrix
                .iter()
                .enumerate()
                .map(|(j, r)| AgentState { agent_index: j, step_index: g.step_index, values: r.clone() })
                .collect();
            let rebuilt = ClusterPartition::from_groups(g.step_index, g.partition.groups(), &g.matrix).unwrap();
            assert_eq!(group_state(&rebuilt, &states).unwrap().matrix, g.matrix);
        }
    }
}
