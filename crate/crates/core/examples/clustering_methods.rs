//! Agglomerative linkages and seeded k-means on the same step.
//!
//! ```text
//! cargo run --example clustering_methods
//! ```

use cmdviz::cluster::{cluster_step, ClusterConfig, Linkage, Metric};
use cmdviz::model::agent_states;
use cmdviz::synth::{generate, SynthSpec};

fn main() -> cmdviz::Result<()> {
    let spec = SynthSpec::random_planted(10, 2, 1, 3, 1.0, 0.15, 4);
    let exp = generate(&spec)?;
    let states = agent_states(&exp, 0)?;
    println!("planted: {:?}", spec.planted_partitions[0]);

    for threshold in [0.3, 0.6, 1.2] {
        for linkage in [Linkage::Single, Linkage::Complete, Linkage::Average] {
            let p = cluster_step(&states, &ClusterConfig::agglomerative(linkage, threshold))?;
            println!("{linkage:?} @ {threshold}: {:?}", p.groups());
        }
    }
    let manhattan = ClusterConfig {
        metric: Metric::Manhattan,
        ..ClusterConfig::agglomerative(Linkage::Complete, 0.6)
    };
    println!("Complete/manhattan @ 0.6: {:?}", cluster_step(&states, &manhattan)?.groups());

    for seed in 0..3 {
        let p = cluster_step(&states, &ClusterConfig::kmeans(3, seed))?;
        println!("k-means k=3 seed {seed}: {:?}", p.groups());
    }
    Ok(())
}
