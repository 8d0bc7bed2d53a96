//! Reference data sets bundled with the library.

use crate::model::Experiment;

/// Weapons-noise memory study: three agents, outcomes `recall` and
/// `association`, one independent variable `noise_hours` taking 0, 1, 2.
pub fn memory_experiment() -> Experiment {
    Experiment::new(
        vec!["A1".into(), "A2".into(), "A3".into()],
        vec!["recall".into(), "association".into()],
        vec!["noise_hours".into()],
        vec![
            (
                vec![0.0],
                vec![vec![0.20, 0.50], vec![0.25, 0.50], vec![0.45, 0.70]],
            ),
            (
                vec![1.0],
                vec![vec![0.70, 0.70], vec![0.75, 0.70], vec![0.70, 0.75]],
            ),
            (
                vec![2.0],
                vec![vec![0.25, 1.00], vec![0.50, 0.60], vec![0.75, 0.55]],
            ),
        ],
    )
    .expect("memory fixture is valid")
}

/// Three participants whose states stay far apart at every step, so every
/// cluster is a singleton. Values are illustrative, not measured data.
pub fn singleton_experiment() -> Experiment {
    Experiment::new(
        vec!["P1".into(), "P2".into(), "P3".into()],
        vec!["allocation".into(), "deviation".into()],
        vec!["reliability_framing".into()],
        vec![
            (
                vec![0.0],
                vec![vec![0.10, 0.80], vec![0.50, 0.20], vec![0.90, 0.55]],
            ),
            (
                vec![1.0],
                vec![vec![0.30, 0.60], vec![0.85, 0.10], vec![0.60, 0.95]],
            ),
            (
                vec![2.0],
                vec![vec![0.05, 0.40], vec![0.45, 0.90], vec![0.95, 0.30]],
            ),
        ],
    )
    .expect("singleton fixture is valid")
}
