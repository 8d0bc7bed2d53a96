//! End-to-end composition: optional reduction, per-step clustering, group
//! states and diagram metadata.

use crate::cluster::{cluster_step, ClusterConfig};
use crate::error::{Error, Result};
use crate::group::{group_state, GroupState};
use crate::model::{agent_states, Experiment};
use crate::reduce::{fit_pca, project, PcaModel};
use crate::encode::DiagramMeta;

/// When to run PCA ahead of clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduce {
    /// Two components whenever there are more than `limit` outcomes.
    Auto { limit: usize },
    Never,
    Pca { components: usize },
}

impl Default for Reduce {
    fn default() -> Self {
        Reduce::Auto { limit: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineConfig {
    pub cluster: ClusterConfig,
    pub reduce: Reduce,
}

/// Everything derived from one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    /// The experiment actually clustered; component scores when reduced.
    pub experiment: Experiment,
    pub pca: Option<PcaModel>,
    pub group_states: Vec<GroupState>,
    pub meta: DiagramMeta,
}

/// Clusters every step with one config and builds its group state.
pub fn group_states(exp: &Experiment, cfg: &ClusterConfig) -> Result<Vec<GroupState>> {
    (0..exp.num_steps())
        .map(|t| {
            let states = agent_states(exp, t)?;
            let partition = cluster_step(&states, cfg)?;
            group_state(&partition, &states)
        })
        .collect()
}

/// Replaces the outcomes of `exp` by its scores on the model's components,
/// named `PC1`, `PC2`, ...
pub fn reduce_experiment(exp: &Experiment, model: &PcaModel) -> Result<Experiment> {
    let steps = exp
        .steps()
        .iter()
        .map(|s| Ok((s.independent_values.clone(), project(model, &s.measurements)?)))
        .collect::<Result<Vec<_>>>()?;
    Experiment::new(
        exp.agents().to_vec(),
        (1..=model.num_components()).map(|i| format!("PC{i}")).collect(),
        exp.independents().to_vec(),
        steps,
    )
}

pub fn analyze(exp: &Experiment, cfg: &PipelineConfig) -> Result<Analysis> {
    let pooled_rows = exp.num_agents() * exp.num_steps();
    let components = match cfg.reduce {
        Reduce::Never => None,
        Reduce::Auto { limit } if exp.num_outcomes() > limit && pooled_rows >= 2 => Some(2),
        Reduce::Auto { .. } => None,
        Reduce::Pca { components: 0 } => {
            return Err(Error::Config("components must be at least 1".into()))
        }
        Reduce::Pca { components } => Some(components),
    };
    let (experiment, pca) = match components {
        Some(k) => {
            let model = fit_pca(&exp.pooled_states(), k)?;
            (reduce_experiment(exp, &model)?, Some(model))
        }
        None => (exp.clone(), None),
    };
    let group_states = group_states(&experiment, &cfg.cluster)?;
    let mut meta = DiagramMeta::from_experiment(&experiment);
    meta.reduced = pca.is_some();
    Ok(Analysis {
        experiment,
        pca,
        group_states,
        meta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::memory_experiment;

    fn wide() -> Experiment {
        let rows = |o: f64| {
            (0..4)
                .map(|j| (0..5).map(|i| o + (j * 5 + i) as f64 * 0.01).collect())
                .collect()
        };
        Experiment::new(
            (0..4).map(|j| format!("a{j}")).collect(),
            (0..5).map(|i| format!("y{i}")).collect(),
            vec!["v".into()],
            vec![(vec![0.0], rows(0.0)), (vec![1.0], rows(0.5))],
        )
        .unwrap()
    }

    #[test]
    fn memory_is_not_reduced() {
        let a = analyze(&memory_experiment(), &PipelineConfig::default()).unwrap();
        assert!(a.pca.is_none());
        assert!(!a.meta.reduced);
        assert_eq!(a.meta.axis_names, ["recall", "association"]);
        assert_eq!(a.group_states.len(), 3);
    }

    #[test]
    fn wide_experiment_auto_reduces() {
        let a = analyze(&wide(), &PipelineConfig::default()).unwrap();
        assert_eq!(a.pca.as_ref().unwrap().num_components(), 2);
        assert_eq!(a.meta.axis_names, ["PC1", "PC2"]);
        assert!(a.meta.reduced);
        let never = PipelineConfig { reduce: Reduce::Never, ..Default::default() };
        assert!(analyze(&wide(), &never).unwrap().pca.is_none());
    }

    #[test]
    fn explicit_components() {
        let cfg = PipelineConfig { reduce: Reduce::Pca { components: 1 }, ..Default::default() };
        let a = analyze(&memory_experiment(), &cfg).unwrap();
        assert_eq!(a.experiment.outcomes(), ["PC1"]);
        let bad = PipelineConfig { reduce: Reduce::Pca { components: 0 }, ..Default::default() };
        assert!(matches!(analyze(&memory_experiment(), &bad), Err(Error::Config(_))));
    }
}
