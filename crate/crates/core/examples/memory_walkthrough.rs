//! Agent states, agent moves, group states and group moves for the
//! three-person weapons-noise memory study.
//!
//! ```text
//! cargo run --example memory_walkthrough
//! ```

use cmdviz::cluster::ClusterConfig;
use cmdviz::fixtures::memory_experiment;
use cmdviz::group::group_moves;
use cmdviz::model::{agent_moves, agent_states};
use cmdviz::pipeline::group_states;

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2}")).collect();
    format!("[{}]", parts.join(" "))
}

fn main() -> cmdviz::Result<()> {
    let exp = memory_experiment();
    let agents = exp.agents();

    println!("Agent cognitive states");
    for t in 0..exp.num_steps() {
        let row: Vec<String> = agent_states(&exp, t)?
            .iter()
            .map(|s| format!("{} = {}", agents[s.agent_index], fmt(&s.values)))
            .collect();
        println!("  t={t}: {}", row.join("; "));
    }

    println!("\nAgent cognitive moves");
    for (j, name) in agents.iter().enumerate() {
        let moves: Vec<String> = agent_moves(&exp, j)?
            .iter()
            .map(|m| format!("{} -> {}", fmt(&m.from_values), fmt(&m.to_values)))
            .collect();
        println!("  {name}: {}", moves.join(", then "));
    }

    let gs = group_states(&exp, &ClusterConfig::default())?;
    println!("\nGroup cognitive states (centroid substitution)");
    for g in &gs {
        let rows: Vec<String> = g.matrix.iter().map(|r| fmt(r)).collect();
        println!("  t={}: {}   clusters {:?}", g.step_index, rows.join("; "), g.partition.groups());
    }

    println!("\nGroup cognitive moves");
    let gm = group_moves(&gs)?;
    for (j, name) in agents.iter().enumerate() {
        let moves: Vec<String> = gm
            .iter()
            .filter(|m| m.agent_index == j)
            .map(|m| format!("{} -> {}", fmt(&m.from_row), fmt(&m.to_row)))
            .collect();
        println!("  {name}: {}", moves.join(", then "));
    }
    Ok(())
}
