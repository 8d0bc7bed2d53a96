//! The same group states under the three encoding schemes.
//!
//! ```text
//! cargo run --example encoding_schemes
//! ```

use cmdviz::cluster::ClusterConfig;
use cmdviz::encode::{canonical_symbol, encode_scheme1, encode_scheme2, encode_scheme3, DiagramMeta};
use cmdviz::fixtures::memory_experiment;
use cmdviz::pipeline::group_states;

fn main() -> cmdviz::Result<()> {
    let exp = memory_experiment();
    let gs = group_states(&exp, &ClusterConfig::default())?;
    let meta = DiagramMeta::from_experiment(&exp);

    println!("Symbol table for three agents:");
    let sets: [&[usize]; 7] = [&[0], &[1], &[2], &[0, 1], &[0, 2], &[1, 2], &[0, 1, 2]];
    for set in sets {
        let names: Vec<&str> = set.iter().map(|&j| exp.agents()[j].as_str()).collect();
        println!("  {{{}}} -> {}", names.join(","), canonical_symbol(set, 3).unwrap());
    }

    let s1 = encode_scheme1(&gs, &meta)?;
    let s2 = encode_scheme2(&gs, &meta)?;
    println!("\nScheme 1 labels per column: {:?}", s1.labels());
    println!("Scheme 2 labels per column: {:?}", s2.labels());
    println!("Transitions:");
    for e in &s1.edges {
        let from = &s1.column(e.from_step).unwrap().nodes[e.from_node].label;
        let to = &s1.column(e.to_step).unwrap().nodes[e.to_node].label;
        println!("  t={} {from} -> t={} {to}  ({} agent(s))", e.from_step, e.to_step, e.agent_count);
    }

    let s3 = encode_scheme3(&gs, &meta, false)?;
    println!("\nScheme 3 styles (edges: {}):", s3.edges.len());
    for col in &s3.columns {
        for node in &col.nodes {
            let style = node.style.unwrap();
            println!(
                "  t={} cluster {:?}: intensity {:.3}, border {:.3}",
                col.step_index, node.members, style.intensity, style.border_weight
            );
        }
    }
    Ok(())
}
