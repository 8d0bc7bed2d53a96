//! Cognitive move diagrams.
//!
//! Measurements of `M` agents on `N` outcome variables, taken over `T`
//! scenario steps, become a diagram of how the group's cognitive state moves:
//!
//! 1. [`model`]: agent states (one row of a step's matrix) and agent moves.
//! 2. [`cluster`]: agents with similar states are grouped per step.
//! 3. [`group`]: each agent's row is replaced by its cluster centroid,
//!    giving the group state; consecutive group states give group moves.
//! 4. [`encode`]: group states become a [`encode::DiagramModel`] under one of
//!    three encoding schemes.
//! 5. [`render`]: the model is written as SVG or DOT.
//!
//! [`reduce`] projects wide outcome spaces onto principal components first,
//! [`ingest`] reads and writes experiment files, [`synth`] plants known
//! structure for testing, and [`pipeline`] chains the steps.
//!
//! ```
//! use cmdviz::{cluster::ClusterConfig, encode, fixtures, pipeline};
//!
//! let exp = fixtures::memory_experiment();
//! let gs = pipeline::group_states(&exp, &ClusterConfig::default()).unwrap();
//! let dm = encode::encode_scheme1(&gs, &encode::DiagramMeta::from_experiment(&exp)).unwrap();
//! assert_eq!(dm.labels(), vec![vec!["d", "c"], vec!["g"], vec!["a", "b", "c"]]);
//! ```

pub mod cli;
pub mod cluster;
pub mod encode;
pub mod error;
pub mod fixtures;
pub mod group;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod reduce;
pub mod render;
pub mod synth;

pub use error::{Error, Result};
