//! Projecting a six-outcome experiment onto two principal components before
//! clustering, as the pipeline does automatically for wide data.
//!
//! ```text
//! cargo run --example pca_reduction
//! ```

use cmdviz::encode::encode_scheme2;
use cmdviz::pipeline::{analyze, PipelineConfig};
use cmdviz::reduce::fit_pca;
use cmdviz::synth::{generate, SynthSpec};

fn main() -> cmdviz::Result<()> {
    let spec = SynthSpec::random_planted(16, 6, 4, 3, 1.0, 0.03, 9);
    let exp = generate(&spec)?;
    println!(
        "{} agents x {} outcomes x {} steps",
        exp.num_agents(),
        exp.num_outcomes(),
        exp.num_steps()
    );

    let full = fit_pca(&exp.pooled_states(), exp.num_outcomes())?;
    let total: f64 = full.explained_variance.iter().sum();
    println!("explained variance by component:");
    for (i, v) in full.explained_variance.iter().enumerate() {
        println!("  PC{}: {v:.4} ({:.1}%)", i + 1, 100.0 * v / total);
    }

    let analysis = analyze(&exp, &PipelineConfig::default())?;
    println!("\naxes after reduction: {:?}", analysis.meta.axis_names);
    let dm = encode_scheme2(&analysis.group_states, &analysis.meta)?;
    for (t, labels) in dm.labels().iter().enumerate() {
        println!("  t={t}: cluster sizes {labels:?}");
    }
    Ok(())
}
