//! Reading the long-form CSV format, writing canonical JSON, and what
//! validation failures look like.
//!
//! ```text
//! cargo run --example ingest_formats
//! ```

use cmdviz::ingest::{parse_csv, parse_json, write_json};

const MEMORY_CSV: &str = include_str!("../data/memory.csv");

fn main() -> cmdviz::Result<()> {
    let report = parse_csv(MEMORY_CSV.as_bytes())?;
    let exp = &report.experiment;
    println!(
        "parsed CSV: agents {:?}, outcomes {:?}, independents {:?}, {} steps",
        exp.agents(),
        exp.outcomes(),
        exp.independents(),
        exp.num_steps()
    );
    let json = write_json(exp);
    assert_eq!(&parse_json(&json)?.experiment, exp);
    println!("{}", String::from_utf8_lossy(&json));

    let broken = [
        ("missing cell", MEMORY_CSV.lines().take(18).collect::<Vec<_>>().join("\n")),
        (
            "inconsistent schedule",
            "step,agent,outcome,value,iv:noise\n0,A1,recall,0.2,0\n0,A2,recall,0.3,1\n".to_string(),
        ),
        ("bad number", "step,agent,outcome,value,iv:noise\n0,A1,recall,\"0,2\",0\n".to_string()),
    ];
    for (what, text) in broken {
        match parse_csv(text.as_bytes()) {
            Ok(_) => println!("{what}: unexpectedly accepted"),
            Err(e) => println!("{what}: error: {}: {}", e.category(), e.detail()),
        }
    }
    Ok(())
}
