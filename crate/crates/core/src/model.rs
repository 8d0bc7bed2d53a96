//! Experiment records and agent-level cognitive states and moves.
//!
//! An [`Experiment`] holds `T` steps; each step carries the `K` independent
//! values that define its scenario and an `M x N` measurement matrix whose
//! row `j` is agent `j`'s reading of every outcome variable. All indices are
//! 0-based, and agent order is the order the agents were supplied in.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};

/// One scenario step of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Step {
    pub index: usize,
    pub independent_values: Vec<f64>,
    /// Row `j` holds agent `j`'s outcome readings.
    pub measurements: Vec<Vec<f64>>,
}

/// A validated multi-agent, multi-step measurement record.
///
/// Construct through [`Experiment::new`]; fields are read-only afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    agents: Vec<String>,
    outcomes: Vec<String>,
    independents: Vec<String>,
    steps: Vec<Step>,
}

/// Agent `j`'s outcome vector at step `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentState {
    pub agent_index: usize,
    pub step_index: usize,
    pub values: Vec<f64>,
}

/// Transition of one agent's state from step `t` to step `t + 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentMove {
    pub agent_index: usize,
    pub from_step: usize,
    pub to_step: usize,
    pub from_values: Vec<f64>,
    pub to_values: Vec<f64>,
}

fn check_unique(kind: &str, names: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for name in names {
        if !seen.insert(name.as_str()) {
            return Err(Error::Validation(format!("duplicate {kind} name '{name}'")));
        }
    }
    Ok(())
}

impl Experiment {
    /// Validates and builds an experiment. `steps[t]` becomes step `t`.
    pub fn new(
        agents: Vec<String>,
        outcomes: Vec<String>,
        independents: Vec<String>,
        steps: Vec<(Vec<f64>, Vec<Vec<f64>>)>,
    ) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::Validation("at least one agent is required".into()));
        }
        if outcomes.is_empty() {
            return Err(Error::Validation("at least one outcome is required".into()));
        }
        if independents.is_empty() {
            return Err(Error::Validation(
                "at least one independent variable is required".into(),
            ));
        }
        if steps.is_empty() {
            return Err(Error::Validation("at least one step is required".into()));
        }
        check_unique("agent", &agents)?;
        check_unique("outcome", &outcomes)?;
        check_unique("independent", &independents)?;

        let (m, n, k) = (agents.len(), outcomes.len(), independents.len());
        let mut out = Vec::with_capacity(steps.len());
        for (t, (ivs, rows)) in steps.into_iter().enumerate() {
            if ivs.len() != k {
                return Err(Error::Validation(format!(
                    "step {t}: expected {k} independent values, found {}",
                    ivs.len()
                )));
            }
            if let Some((i, v)) = ivs.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "step {t}: independent '{}' has non-finite value {v}",
                    independents[i]
                )));
            }
            if rows.len() != m {
                return Err(Error::Validation(format!(
                    "step {t}: expected {m} measurement rows, found {}",
                    rows.len()
                )));
            }
            for (j, row) in rows.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::Validation(format!(
                        "step {t}: row for agent '{}' has {} values, expected {n}",
                        agents[j],
                        row.len()
                    )));
                }
                if let Some((i, v)) = row.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                    return Err(Error::Validation(format!(
                        "step {t}: agent '{}', outcome '{}' has non-finite value {v}",
                        agents[j], outcomes[i]
                    )));
                }
            }
            out.push(Step {
                index: t,
                independent_values: ivs,
                measurements: rows,
            });
        }
        Ok(Experiment {
            agents,
            outcomes,
            independents,
            steps: out,
        })
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn independents(&self) -> &[String] {
        &self.independents
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// `M`
    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    /// `N`
    pub fn num_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    /// `K`
    pub fn num_independents(&self) -> usize {
        self.independents.len()
    }

    /// `T`
    pub fn num_steps(&self) -> usize {
        self.steps.len()
    }

    /// All agent states of every step stacked into one `(M*T) x N` matrix,
    /// step-major.
    pub fn pooled_states(&self) -> Vec<Vec<f64>> {
        self.steps
            .iter()
            .flat_map(|s| s.measurements.iter().cloned())
            .collect()
    }
}

/// Agent cognitive states at step `t`, in agent order.
pub fn agent_states(exp: &Experiment, t: usize) -> Result<Vec<AgentState>> {
    let step = exp.steps.get(t).ok_or_else(|| {
        Error::Index(format!(
            "step {t} out of range; valid steps are 0..{}",
            exp.num_steps()
        ))
    })?;
    Ok(step
        .measurements
        .iter()
        .enumerate()
        .map(|(j, row)| AgentState {
            agent_index: j,
            step_index: t,
            values: row.clone(),
        })
        .collect())
}

/// Agent cognitive moves of agent `j`: `T - 1` transitions in step order.
pub fn agent_moves(exp: &Experiment, j: usize) -> Result<Vec<AgentMove>> {
    if j >= exp.num_agents() {
        return Err(Error::Index(format!(
            "agent {j} out of range; valid agents are 0..{}",
            exp.num_agents()
        )));
    }
    Ok(exp
        .steps
        .windows(2)
        .map(|w| AgentMove {
            agent_index: j,
            from_step: w[0].index,
            to_step: w[1].index,
            from_values: w[0].measurements[j].clone(),
            to_values: w[1].measurements[j].clone(),
        })
        .collect())
}
