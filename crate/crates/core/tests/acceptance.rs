//! Exit-gate checks. Each criterion prints one PASS/FAIL line; the process
//! fails if any criterion fails.

use std::process::Command;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cmdviz::cluster::{cluster_step, ClusterConfig, ClusterPartition};
use cmdviz::encode::{encode_scheme1, encode_scheme2, DiagramMeta};
use cmdviz::group::{group_moves, GroupState};
use cmdviz::ingest::parse_json;
use cmdviz::model::{agent_states, Experiment};
use cmdviz::pipeline::group_states;
use cmdviz::reduce::{fit_pca, project};
use cmdviz::synth::{generate, SynthSpec};

type Outcome = Result<(), String>;

const MEMORY_JSON: &str = include_str!("../data/memory.json");

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn memory() -> Experiment {
    parse_json(MEMORY_JSON.as_bytes()).expect("memory fixture parses").experiment
}

fn memory_group_states() -> Vec<GroupState> {
    group_states(&memory(), &ClusterConfig::default()).expect("memory pipeline")
}

/// Round half up to two decimals, done in exact rational arithmetic on the
/// value's binary expansion.
fn round_2dp(x: f64) -> String {
    let r = BigRational::from_f64(x).unwrap() * BigRational::from_integer(BigInt::from(100));
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let hundredths = (r + half).floor().to_integer();
    let sign = if hundredths.is_negative() { "-" } else { "" };
    let a = hundredths.abs();
    let whole = &a / BigInt::from(100);
    let frac = (&a % BigInt::from(100)).to_u32().unwrap();
    format!("{sign}{whole}.{frac:02}")
}

/// Exact mean of decimal literals such as "0.70".
fn decimal_mean(lits: &[&str]) -> BigRational {
    let parse = |s: &str| {
        let (i, f) = s.split_once('.').unwrap_or((s, ""));
        let num: BigInt = format!("{i}{f}").parse().unwrap();
        BigRational::new(num, BigInt::from(10u32).pow(f.len() as u32))
    };
    let sum = lits.iter().fold(BigRational::zero(), |acc, s| acc + parse(s));
    sum / BigRational::from_integer(BigInt::from(lits.len()))
}

fn round_rational_2dp(r: &BigRational) -> String {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let h = (r * BigRational::from_integer(BigInt::from(100)) + half).floor().to_integer();
    format!("{}.{:02}", &h / BigInt::from(100), (&h % BigInt::from(100)).to_u32().unwrap())
}

fn c1_cluster_reproduction() -> Outcome {
    let gs = memory_group_states();
    let got: Vec<Vec<Vec<usize>>> = gs.iter().map(|g| g.partition.groups()).collect();
    let want = vec![
        vec![vec![0, 1], vec![2]],
        vec![vec![0, 1, 2]],
        vec![vec![0], vec![1], vec![2]],
    ];
    ensure(got == want, || format!("partitions {got:?}, expected {want:?}"))
}

fn c2_centroid_reproduction() -> Outcome {
    let gs = memory_group_states();
    let exp = memory();
    let tol = 1e-12;
    let close = |a: &[f64], b: &BigRational, c: &BigRational| {
        (a[0] - b.to_f64().unwrap()).abs() < tol && (a[1] - c.to_f64().unwrap()).abs() < tol
    };
    // exact routes from the printed decimals
    let pair_recall = decimal_mean(&["0.20", "0.25"]);
    let pair_assoc = decimal_mean(&["0.50", "0.50"]);
    let all_recall = decimal_mean(&["0.70", "0.75", "0.70"]);
    let all_assoc = decimal_mean(&["0.70", "0.70", "0.75"]);

    let m0 = &gs[0].matrix;
    ensure(close(&m0[0], &pair_recall, &pair_assoc) && m0[0] == m0[1], || format!("t=0 pair rows {m0:?}"))?;
    ensure(m0[2] == vec![0.45, 0.70], || format!("t=0 row 3 {:?}", m0[2]))?;
    let m1 = &gs[1].matrix;
    ensure(m1.iter().all(|r| close(r, &all_recall, &all_assoc) && r == &m1[0]), || format!("t=1 rows {m1:?}"))?;
    ensure(
        m1[0].iter().all(|v| format!("{v:.5}") == "0.71667"),
        || format!("t=1 centroid {:?} is not 0.71667 to 5 places", m1[0]),
    )?;
    ensure(gs[2].matrix == exp.steps()[2].measurements, || "t=2 rows differ from raw states".into())?;

    // printed digits: [0.23 0.50] and [0.72 0.72]
    let printed = [
        (round_2dp(m0[0][0]), round_rational_2dp(&pair_recall), "0.23"),
        (round_2dp(m0[0][1]), round_rational_2dp(&pair_assoc), "0.50"),
        (round_2dp(m1[0][0]), round_rational_2dp(&all_recall), "0.72"),
        (round_2dp(m1[0][1]), round_rational_2dp(&all_assoc), "0.72"),
    ];
    for (computed, exact, paper) in printed {
        ensure(computed == paper && exact == paper, || {
            format!("rounded {computed} / exact {exact}, printed {paper}")
        })?;
    }
    Ok(())
}

fn c3_gcm_reproduction() -> Outcome {
    let moves = group_moves(&memory_group_states()).map_err(|e| e.to_string())?;
    let pair = [0.225, 0.50];
    let all = [2.15 / 3.0, 2.15 / 3.0];
    let expected: [(usize, [f64; 2], [f64; 2]); 6] = [
        (0, pair, all),
        (0, all, [0.25, 1.00]),
        (1, pair, all),
        (1, all, [0.50, 0.60]),
        (2, [0.45, 0.70], all),
        (2, all, [0.75, 0.55]),
    ];
    ensure(moves.len() == 6, || format!("{} moves", moves.len()))?;
    for (mv, (agent, from, to)) in moves.iter().zip(expected) {
        let near = |a: &[f64], b: &[f64; 2]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12);
        ensure(
            mv.agent_index == agent && near(&mv.from_row, &from) && near(&mv.to_row, &to),
            || format!("agent {} move {:?} -> {:?}, expected {from:?} -> {to:?}", mv.agent_index + 1, mv.from_row, mv.to_row),
        )?;
    }
    Ok(())
}

fn c4_scheme1_labels() -> Outcome {
    let exp = memory();
    let dm = encode_scheme1(&memory_group_states(), &DiagramMeta::from_experiment(&exp))
        .map_err(|e| e.to_string())?;
    let labels = dm.labels();
    ensure(labels == vec![vec!["d", "c"], vec!["g"], vec!["a", "b", "c"]], || format!("{labels:?}"))
}

fn random_spec(rng: &mut ChaCha8Rng, case: u64) -> SynthSpec {
    let m = rng.random_range(1..=20);
    let n = rng.random_range(1..=4);
    let t = rng.random_range(1..=10);
    let groups = rng.random_range(1..=6);
    let sigma = rng.random_range(0.0..0.2);
    SynthSpec::random_planted(m, n, t, groups, 0.3, sigma, case)
}

fn c5_scheme2_conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..200 {
        let spec = random_spec(&mut rng, case);
        let exp = generate(&spec).map_err(|e| e.to_string())?;
        let gs = group_states(&exp, &ClusterConfig::default()).map_err(|e| e.to_string())?;
        let dm = encode_scheme2(&gs, &DiagramMeta::from_experiment(&exp)).map_err(|e| e.to_string())?;
        let m = exp.num_agents();
        for col in &dm.columns {
            let sum: usize = col.nodes.iter().map(|n| n.label.parse::<usize>().unwrap()).sum();
            ensure(sum == m, || format!("case {case} step {}: labels sum {sum} != {m}", col.step_index))?;
        }
        for t in 0..exp.num_steps().saturating_sub(1) {
            let flow: usize = dm.edges.iter().filter(|e| e.from_step == t).map(|e| e.agent_count).sum();
            ensure(flow == m, || format!("case {case} step {t}: edges carry {flow} != {m}"))?;
        }
    }
    Ok(())
}

/// Independent route: covariance from all pairwise differences (no means),
/// eigenvalues from nalgebra's symmetric QR solver.
fn oracle_eigenvalues(data: &[Vec<f64>]) -> Vec<f64> {
    let p = data.len();
    let n = data[0].len();
    let mut cov = DMatrix::<f64>::zeros(n, n);
    for a in 0..p {
        for b in 0..p {
            for i in 0..n {
                for j in 0..n {
                    cov[(i, j)] += (data[a][i] - data[b][i]) * (data[a][j] - data[b][j]);
                }
            }
        }
    }
    cov /= 2.0 * (p * (p - 1)) as f64;
    let mut ev: Vec<f64> = cov.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

fn c6_pca_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..100 {
        let n = rng.random_range(1..=6);
        let p = rng.random_range(n.max(2)..=30);
        let data: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let model = fit_pca(&data, n).map_err(|e| e.to_string())?;
        let oracle = oracle_eigenvalues(&data);
        for (i, (got, want)) in model.explained_variance.iter().zip(&oracle).enumerate() {
            ensure((got - want.max(0.0)).abs() <= 1e-8, || {
                format!("case {case}: eigenvalue {i} = {got}, oracle {want}")
            })?;
        }
        let proj = project(&model, &data).map_err(|e| e.to_string())?;
        for a in 0..p {
            for b in a + 1..p {
                let d = |rows: &[Vec<f64>]| {
                    rows[a].iter().zip(&rows[b]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
                };
                let (orig, red) = (d(&data), d(&proj));
                ensure((orig - red).abs() <= 1e-9, || {
                    format!("case {case}: distance {orig} became {red}")
                })?;
            }
        }
    }
    Ok(())
}

fn c7_planted_recovery() -> Outcome {
    let mut recovered = 0;
    let mut ratio_min = f64::INFINITY;
    for seed in 0..100 {
        // lattice pitch 1.0 keeps every gap >= 1; sigma puts the gap at 4.5
        // noise radii
        let sigma = 1.0 / (4.5 * 3.0 * 3f64.sqrt());
        let spec = SynthSpec::random_planted(12, 3, 4, 4, 1.0, sigma, seed);
        ratio_min = ratio_min.min(spec.separation_ratio());
        if spec.separation_ratio() <= 4.0 {
            return Err(format!("seed {seed}: separation ratio {} not above 4", spec.separation_ratio()));
        }
        let exp = generate(&spec).map_err(|e| e.to_string())?;
        let cfg = ClusterConfig::agglomerative(cmdviz::cluster::Linkage::Complete, spec.recovery_threshold());
        let mut exact = true;
        for t in 0..spec.t {
            let states = agent_states(&exp, t).map_err(|e| e.to_string())?;
            let got = cluster_step(&states, &cfg).map_err(|e| e.to_string())?;
            let values: Vec<Vec<f64>> = states.iter().map(|s| s.values.clone()).collect();
            let planted = ClusterPartition::from_groups(t, spec.planted_partitions[t].clone(), &values)
                .map_err(|e| e.to_string())?;
            exact &= got.groups() == planted.groups();
        }
        recovered += usize::from(exact);
    }
    println!("    planted recovery: {recovered}/100 seeds (min separation ratio {ratio_min:.2})");
    ensure(recovered >= 99, || format!("only {recovered}/100 seeds recovered"))
}

fn c8_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = concat!(env!("CARGO_MANIFEST_DIR"), "/data/memory.json");
    let mut outputs = Vec::new();
    for format in ["svg", "dot"] {
        let mut runs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("cmd{run}.{format}"));
            let status = Command::new(env!("CARGO_BIN_EXE_cmdviz"))
                .args(["diagram", "--input", input, "--scheme", "1", "--format", format, "--output"])
                .arg(&out)
                .status()
                .map_err(|e| e.to_string())?;
            ensure(status.success(), || format!("{format} run {run} exited {status}"))?;
            runs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        ensure(runs[0] == runs[1] && !runs[0].is_empty(), || format!("{format} outputs differ"))?;
        outputs.push(runs.remove(0));
    }
    let svg = String::from_utf8(outputs.remove(0)).map_err(|e| e.to_string())?;
    ensure(svg.matches(r#"<circle class="node""#).count() == 6, || "svg node census".into())
}

fn c9_singleton_shape() -> Outcome {
    let exp = cmdviz::fixtures::singleton_experiment();
    let gs = group_states(&exp, &ClusterConfig::default()).map_err(|e| e.to_string())?;
    let dm = encode_scheme1(&gs, &DiagramMeta::from_experiment(&exp)).map_err(|e| e.to_string())?;
    for (t, col) in dm.labels().iter().enumerate() {
        ensure(col == &["a", "b", "c"], || format!("step {t} labels {col:?}"))?;
    }
    ensure(dm.edges.len() == 2 * 3, || format!("{} edges", dm.edges.len()))?;
    for e in &dm.edges {
        let label = |step: usize, id: usize| dm.column(step).unwrap().nodes[id].label.clone();
        ensure(label(e.from_step, e.from_node) == label(e.to_step, e.to_node), || {
            format!("edge {e:?} changes label")
        })?;
    }
    Ok(())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 cluster reproduction (memory example)", c1_cluster_reproduction),
        ("2 centroid reproduction and printed rounding", c2_centroid_reproduction),
        ("3 group cognitive moves", c3_gcm_reproduction),
        ("4 scheme-1 labels d,c | g | a,b,c", c4_scheme1_labels),
        ("5 scheme-2 conservation on 200 synthetic experiments", c5_scheme2_conservation),
        ("6 PCA vs independent eigen oracle; full-rank isometry", c6_pca_oracle),
        ("7 planted-cluster recovery >= 99/100", c7_planted_recovery),
        ("8 diagram subcommand byte-identical SVG and DOT", c8_determinism),
        ("9 singleton-cluster case-study shape", c9_singleton_shape),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(()) => println!("PASS  criterion {name}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name}: {why}");
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
