//! Reading and writing experiment files.
//!
//! Two formats are supported. The JSON document has the shape
//!
//! ```text
//! { "agents": [..], "outcomes": [..], "independents": [..],
//!   "steps": [ { "independent_values": [..], "measurements": [[..], ..] }, .. ],
//!   "clustering": { .. } }          // optional
//! ```
//!
//! The CSV format is long-form with header `step,agent,outcome,value` plus
//! one `iv:<name>` column per independent variable; every
//! `(step, agent, outcome)` cell must appear exactly once.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterConfig;
use crate::error::{Error, Result};
use crate::model::Experiment;

/// A parsed experiment plus non-fatal diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestReport {
    pub experiment: Experiment,
    pub warnings: Vec<String>,
    /// Clustering settings carried by the file, if any (JSON only).
    pub clustering: Option<ClusterConfig>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentDoc {
    agents: Vec<String>,
    outcomes: Vec<String>,
    independents: Vec<String>,
    steps: Vec<StepDoc>,
    #[serde(default)]
    clustering: Option<ClusterConfig>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StepDoc {
    independent_values: Vec<f64>,
    measurements: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct ExperimentOut<'a> {
    agents: &'a [String],
    outcomes: &'a [String],
    independents: &'a [String],
    steps: Vec<StepOut<'a>>,
}

#[derive(Serialize)]
struct StepOut<'a> {
    independent_values: &'a [f64],
    measurements: &'a [Vec<f64>],
}

fn constant_column_warnings(exp: &Experiment) -> Vec<String> {
    let mut warnings = Vec::new();
    if exp.num_agents() < 2 {
        return warnings;
    }
    for step in exp.steps() {
        for (i, name) in exp.outcomes().iter().enumerate() {
            let first = step.measurements[0][i];
            if step.measurements.iter().all(|row| row[i] == first) {
                warnings.push(format!(
                    "step {}: outcome '{name}' is constant across agents",
                    step.index
                ));
            }
        }
    }
    warnings
}

/// Parses the JSON experiment format.
pub fn parse_json(text: &[u8]) -> Result<IngestReport> {
    let text = std::str::from_utf8(text)
        .map_err(|e| Error::Parse(format!("input is not UTF-8: {e}")))?;
    let doc: ExperimentDoc = serde_json::from_str(text).map_err(|e| {
        Error::Parse(format!(
            "{} (line {}, column {})",
            e,
            e.line(),
            e.column()
        ))
    })?;
    let steps = doc
        .steps
        .into_iter()
        .map(|s| (s.independent_values, s.measurements))
        .collect();
    let experiment = Experiment::new(doc.agents, doc.outcomes, doc.independents, steps)?;
    if let Some(cfg) = &doc.clustering {
        cfg.validate()?;
    }
    Ok(IngestReport {
        warnings: constant_column_warnings(&experiment),
        experiment,
        clustering: doc.clustering,
    })
}

/// Canonical JSON form of an experiment. Floats use the shortest
/// representation that parses back to the same bits.
pub fn write_json(exp: &Experiment) -> Vec<u8> {
    let doc = ExperimentOut {
        agents: exp.agents(),
        outcomes: exp.outcomes(),
        independents: exp.independents(),
        steps: exp
            .steps()
            .iter()
            .map(|s| StepOut {
                independent_values: &s.independent_values,
                measurements: &s.measurements,
            })
            .collect(),
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("experiment serializes");
    out.push(b'\n');
    out
}

/// Accepts plain decimal numbers (optional sign, digits, point, exponent).
/// Rejects `inf`, `NaN`, locale separators and anything else `f64::from_str`
/// would otherwise tolerate.
fn parse_decimal(s: &str) -> Option<f64> {
    let ok = !s.is_empty()
        && s.bytes().any(|b| b.is_ascii_digit())
        && s
            .bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+' | b'e' | b'E'));
    if !ok {
        return None;
    }
    s.parse::<f64>().ok()
}

/// Parses the long-form CSV experiment format.
pub fn parse_csv(text: &[u8]) -> Result<IngestReport> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text);
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse(format!("cannot read header: {e}")))?
        .clone();

    let mut col = HashMap::new();
    let mut iv_cols = Vec::new();
    let mut independents = Vec::new();
    for (i, h) in headers.iter().enumerate() {
        match h {
            "step" | "agent" | "outcome" | "value" => {
                if col.insert(h.to_string(), i).is_some() {
                    return Err(Error::Validation(format!("duplicate column '{h}'")));
                }
            }
            _ => match h.strip_prefix("iv:") {
                Some(name) if !name.is_empty() => {
                    iv_cols.push(i);
                    independents.push(name.to_string());
                }
                _ => return Err(Error::Validation(format!("unexpected column '{h}'"))),
            },
        }
    }
    for required in ["step", "agent", "outcome", "value"] {
        if !col.contains_key(required) {
            return Err(Error::Validation(format!("missing column '{required}'")));
        }
    }
    if iv_cols.is_empty() {
        return Err(Error::Validation(
            "at least one 'iv:<name>' column is required".into(),
        ));
    }
    let (c_step, c_agent, c_outcome, c_value) =
        (col["step"], col["agent"], col["outcome"], col["value"]);

    let mut agents: Vec<String> = Vec::new();
    let mut agent_ix: HashMap<String, usize> = HashMap::new();
    let mut outcomes: Vec<String> = Vec::new();
    let mut outcome_ix: HashMap<String, usize> = HashMap::new();
    let mut step_ivs: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut cells: HashMap<(usize, usize, usize), f64> = HashMap::new();

    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| record.get(i).unwrap_or("");

        let step: usize = field(c_step).parse().map_err(|_| {
            Error::Validation(format!(
                "line {line}: step '{}' is not a non-negative integer",
                field(c_step)
            ))
        })?;
        let agent = field(c_agent).to_string();
        let outcome = field(c_outcome).to_string();
        if agent.is_empty() || outcome.is_empty() {
            return Err(Error::Validation(format!(
                "line {line}: empty agent or outcome"
            )));
        }
        let value = parse_decimal(field(c_value)).ok_or_else(|| {
            Error::Validation(format!(
                "line {line}: value '{}' for agent '{agent}', outcome '{outcome}', step {step} is not a decimal number",
                field(c_value)
            ))
        })?;
        if !value.is_finite() {
            return Err(Error::Validation(format!(
                "line {line}: non-finite value for agent '{agent}', outcome '{outcome}', step {step}"
            )));
        }
        let ivs = iv_cols
            .iter()
            .zip(&independents)
            .map(|(&c, name)| {
                parse_decimal(field(c))
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        Error::Validation(format!(
                            "line {line}: independent '{name}' value '{}' is not a finite decimal number",
                            field(c)
                        ))
                    })
            })
            .collect::<Result<Vec<f64>>>()?;

        let j = *agent_ix.entry(agent.clone()).or_insert_with(|| {
            agents.push(agent.clone());
            agents.len() - 1
        });
        let i = *outcome_ix.entry(outcome.clone()).or_insert_with(|| {
            outcomes.push(outcome.clone());
            outcomes.len() - 1
        });

        match step_ivs.get(&step) {
            Some(prev) if *prev != ivs => {
                return Err(Error::Validation(format!(
                    "line {line}: step {step} has inconsistent independent values {prev:?} vs {ivs:?}"
                )));
            }
            Some(_) => {}
            None => {
                step_ivs.insert(step, ivs);
            }
        }
        if cells.insert((step, j, i), value).is_some() {
            return Err(Error::Validation(format!(
                "line {line}: duplicate cell (step {step}, agent '{agent}', outcome '{outcome}')"
            )));
        }
    }

    if step_ivs.is_empty() {
        return Err(Error::Validation("no data rows".into()));
    }
    let num_steps = step_ivs.len();
    if let Some((&last, _)) = step_ivs.iter().next_back() {
        if last + 1 != num_steps {
            return Err(Error::Validation(format!(
                "steps must be numbered 0..{num_steps} without gaps, found {:?}",
                step_ivs.keys().collect::<Vec<_>>()
            )));
        }
    }

    let mut missing = Vec::new();
    let mut missing_total = 0usize;
    for t in 0..num_steps {
        for (j, a) in agents.iter().enumerate() {
            for (i, o) in outcomes.iter().enumerate() {
                if !cells.contains_key(&(t, j, i)) {
                    missing_total += 1;
                    if missing.len() < 10 {
                        missing.push(format!("(step {t}, {a}, {o})"));
                    }
                }
            }
        }
    }
    if missing_total > 0 {
        return Err(Error::Validation(format!(
            "{missing_total} missing cell(s): {}{}",
            missing.join(", "),
            if missing_total > missing.len() { ", ..." } else { "" }
        )));
    }

    let steps = step_ivs
        .into_iter()
        .map(|(t, ivs)| {
            let rows = (0..agents.len())
                .map(|j| (0..outcomes.len()).map(|i| cells[&(t, j, i)]).collect())
                .collect();
            (ivs, rows)
        })
        .collect();
    let experiment = Experiment::new(agents, outcomes, independents, steps)?;
    Ok(IngestReport {
        warnings: constant_column_warnings(&experiment),
        experiment,
        clustering: None,
    })
}

/// Long-form CSV rendering, step-major then agent then outcome.
pub fn write_csv(exp: &Experiment) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["step".to_string(), "agent".into(), "outcome".into(), "value".into()];
    header.extend(exp.independents().iter().map(|n| format!("iv:{n}")));
    w.write_record(&header).expect("in-memory write");
    for step in exp.steps() {
        for (j, agent) in exp.agents().iter().enumerate() {
            for (i, outcome) in exp.outcomes().iter().enumerate() {
                let mut rec = vec![
                    step.index.to_string(),
                    agent.clone(),
                    outcome.clone(),
                    format!("{:?}", step.measurements[j][i]),
                ];
                rec.extend(step.independent_values.iter().map(|v| format!("{v:?}")));
                w.write_record(&rec).expect("in-memory write");
            }
        }
    }
    w.into_inner().expect("in-memory flush")
}
