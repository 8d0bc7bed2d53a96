//! Writes SVG and DOT diagrams for every scheme.
//!
//! ```text
//! cargo run --example render_diagrams -- [output-dir]
//! ```
//!
//! The output directory defaults to `target/cmd-diagrams`.

use std::path::PathBuf;

use cmdviz::cluster::ClusterConfig;
use cmdviz::encode::{encode, DiagramMeta, Scheme};
use cmdviz::fixtures::{memory_experiment, singleton_experiment};
use cmdviz::pipeline::group_states;
use cmdviz::render::{render_dot, render_svg, RenderConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("target/cmd-diagrams"));
    std::fs::create_dir_all(&dir)?;

    let cfg = RenderConfig::default();
    for (name, exp) in [("memory", memory_experiment()), ("singletons", singleton_experiment())] {
        let gs = group_states(&exp, &ClusterConfig::default())?;
        let meta = DiagramMeta::from_experiment(&exp);
        for (n, scheme) in [(1, Scheme::Symbols), (2, Scheme::Counts), (3, Scheme::Boxes)] {
            let dm = encode(&gs, &meta, scheme, false)?;
            let svg = dir.join(format!("{name}_scheme{n}.svg"));
            let dot = dir.join(format!("{name}_scheme{n}.dot"));
            std::fs::write(&svg, render_svg(&dm, &cfg))?;
            std::fs::write(&dot, render_dot(&dm))?;
            println!("{} nodes, {} edges -> {}", dm.num_nodes(), dm.edges.len(), svg.display());
        }
    }
    Ok(())
}
