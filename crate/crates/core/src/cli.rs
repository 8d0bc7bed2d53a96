//! Command-line driver.
//!
//! Subcommands: `validate`, `diagram`, `emit`, `synth`. Every failure ends
//! with a single stderr line `error: <category>: <detail>`. Exit codes:
//! 0 success, 2 invalid data, 64 usage or configuration, 70 internal
//! invariant breach, 74 I/O.

use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cluster::{ClusterConfig, Linkage, Method, Metric};
use crate::encode::{encode, DiagramModel, Scheme};
use crate::error::{Error, Result};
use crate::group::{group_moves, transition_counts, Transition};
use crate::ingest::{parse_csv, parse_json, write_csv, write_json, IngestReport};
use crate::model::agent_moves;
use crate::pipeline::{analyze, Analysis, PipelineConfig, Reduce};
use crate::render::{render_dot, render_svg, RenderConfig};
use crate::synth::{generate, SynthSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INTERNAL: i32 = 70;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Parser)]
#[command(name = "cmdviz", version, about = "Cognitive move diagrams from multi-agent experiment data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check an experiment file; diagnostics go to stderr.
    Validate {
        file: PathBuf,
    },
    /// Render a cognitive move diagram.
    Diagram {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
        scheme: u8,
        #[arg(long, value_enum, default_value_t = OutputFormat::Svg)]
        format: OutputFormat,
        /// Destination file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Draw transition arrows under scheme 3.
        #[arg(long)]
        edges: bool,
        #[command(flatten)]
        render: RenderArgs,
        #[command(flatten)]
        cluster: ClusterArgs,
        #[command(flatten)]
        reduce: ReduceArgs,
    },
    /// Write an intermediate result as JSON.
    Emit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        emit: Selector,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
        scheme: u8,
        #[arg(long)]
        edges: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        cluster: ClusterArgs,
        #[command(flatten)]
        reduce: ReduceArgs,
    },
    /// Generate a synthetic experiment from a JSON spec.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = DataFormat::Json)]
        format: DataFormat,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Svg,
    Dot,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DataFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Selector {
    Diagram,
    GroupStates,
    Clusters,
    Acm,
    Gcm,
    Pca,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReduceMode {
    Auto,
    Pca,
    None,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long, value_enum)]
    linkage: Option<LinkageArg>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iterations: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Agglomerative,
    Kmeans,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LinkageArg {
    Single,
    Complete,
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Euclidean,
    Manhattan,
}

#[derive(Debug, Args)]
struct ReduceArgs {
    #[arg(long, value_enum, default_value_t = ReduceMode::Auto)]
    reduce: ReduceMode,
    /// Number of principal components with `--reduce pca`.
    #[arg(long, default_value_t = 2)]
    components: usize,
    /// Outcome count above which `--reduce auto` projects to two components.
    #[arg(long, default_value_t = 3)]
    reduce_limit: usize,
}

#[derive(Debug, Args)]
struct RenderArgs {
    #[arg(long, default_value_t = 960)]
    width: u32,
    #[arg(long, default_value_t = 540)]
    height: u32,
    #[arg(long, default_value_t = 12.0)]
    font_size: f64,
    /// Base hue (degrees) for scheme-3 boxes.
    #[arg(long, default_value_t = 210.0)]
    hue: f64,
}

impl ClusterArgs {
    fn apply(&self, base: Option<ClusterConfig>) -> Result<ClusterConfig> {
        let mut cfg = base.unwrap_or_default();
        if let Some(m) = self.method {
            cfg.method = match m {
                MethodArg::Agglomerative => Method::Agglomerative,
                MethodArg::Kmeans => Method::Kmeans,
            };
        }
        if let Some(l) = self.linkage {
            cfg.linkage = match l {
                LinkageArg::Single => Linkage::Single,
                LinkageArg::Complete => Linkage::Complete,
                LinkageArg::Average => Linkage::Average,
            };
        }
        if let Some(m) = self.metric {
            cfg.metric = match m {
                MetricArg::Euclidean => Metric::Euclidean,
                MetricArg::Manhattan => Metric::Manhattan,
            };
        }
        if let Some(t) = self.threshold {
            cfg.threshold = t;
        }
        if self.k.is_some() {
            cfg.k = self.k;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(i) = self.max_iterations {
            cfg.max_iterations = i;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ReduceArgs {
    fn mode(&self) -> Reduce {
        match self.reduce {
            ReduceMode::Auto => Reduce::Auto { limit: self.reduce_limit },
            ReduceMode::None => Reduce::Never,
            ReduceMode::Pca => Reduce::Pca { components: self.components },
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Validation(_) => EXIT_DATA,
        Error::Usage(_) | Error::Config(_) => EXIT_USAGE,
        Error::Io(_) => EXIT_IO,
        Error::Index(_) | Error::Internal(_) => EXIT_INTERNAL,
    }
}

fn read_experiment(path: &Path) -> Result<IngestReport> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    let is_csv = path
        .extension()
        .is_some_and(|x| x.eq_ignore_ascii_case("csv"));
    if is_csv {
        parse_csv(&bytes)
    } else {
        parse_json(&bytes)
    }
}

/// Writes to a sibling temp file and renames it into place, so a failed run
/// never leaves a partial file behind.
fn write_output(path: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<()> {
    let Some(path) = path else {
        stdout.write_all(bytes)?;
        return Ok(());
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| Error::Io(format!("cannot create file in {}: {e}", dir.display())))?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path)
        .map_err(|e| Error::Io(format!("cannot write {}: {}", path.display(), e.error)))?;
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn prepare(
    input: &Path,
    cluster: &ClusterArgs,
    reduce: &ReduceArgs,
    stderr: &mut dyn Write,
) -> Result<(IngestReport, Analysis)> {
    let report = read_experiment(input)?;
    for w in &report.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let cfg = PipelineConfig {
        cluster: cluster.apply(report.clustering.clone())?,
        reduce: reduce.mode(),
    };
    let analysis = analyze(&report.experiment, &cfg)?;
    if let Some(pca) = &analysis.pca {
        for w in &pca.warnings {
            let _ = writeln!(stderr, "warning: {w}");
        }
    }
    for g in &analysis.group_states {
        g.partition.check(report.experiment.num_agents())?;
    }
    Ok((report, analysis))
}

fn diagram(analysis: &Analysis, scheme: u8, edges: bool) -> Result<DiagramModel> {
    let dm = encode(&analysis.group_states, &analysis.meta, Scheme::try_from(scheme)?, edges)?;
    dm.check()?;
    Ok(dm)
}

#[derive(Serialize)]
struct StepFlow {
    from_step: usize,
    to_step: usize,
    counts: Vec<Transition>,
}

fn emit_payload(sel: Selector, report: &IngestReport, a: &Analysis, scheme: u8, edges: bool) -> Result<Vec<u8>> {
    let agents = report.experiment.agents();
    match sel {
        Selector::Diagram => to_json(&diagram(a, scheme, edges)?),
        Selector::Clusters => {
            let partitions: Vec<_> = a.group_states.iter().map(|g| &g.partition).collect();
            to_json(&serde_json::json!({ "agents": agents, "partitions": partitions }))
        }
        Selector::GroupStates => {
            let flows = a
                .group_states
                .windows(2)
                .map(|w| {
                    Ok(StepFlow {
                        from_step: w[0].step_index,
                        to_step: w[1].step_index,
                        counts: transition_counts(&w[0], &w[1])?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            to_json(&serde_json::json!({
                "agents": agents,
                "axes": a.meta.axis_names,
                "reduced": a.meta.reduced,
                "group_states": a.group_states,
                "transitions": flows,
            }))
        }
        Selector::Acm => {
            let moves = (0..report.experiment.num_agents())
                .map(|j| agent_moves(&report.experiment, j))
                .collect::<Result<Vec<_>>>()?
                .concat();
            to_json(&serde_json::json!({
                "agents": agents,
                "outcomes": report.experiment.outcomes(),
                "moves": moves,
            }))
        }
        Selector::Gcm => to_json(&serde_json::json!({
            "agents": agents,
            "axes": a.meta.axis_names,
            "moves": group_moves(&a.group_states)?,
        })),
        Selector::Pca => to_json(&serde_json::json!({ "pca": a.pca })),
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Validate { file } => {
            let report = read_experiment(&file)?;
            for w in &report.warnings {
                let _ = writeln!(stderr, "warning: {w}");
            }
            let e = &report.experiment;
            writeln!(
                stdout,
                "ok: {} agents, {} outcomes, {} independents, {} steps",
                e.num_agents(),
                e.num_outcomes(),
                e.num_independents(),
                e.num_steps()
            )?;
            Ok(())
        }
        Command::Diagram { input, scheme, format, output, edges, render, cluster, reduce } => {
            let rcfg = RenderConfig {
                width_px: render.width,
                height_px: render.height,
                font_size_pt: render.font_size,
                hue: render.hue,
                ..Default::default()
            };
            rcfg.validate()?;
            let (_, analysis) = prepare(&input, &cluster, &reduce, stderr)?;
            let dm = diagram(&analysis, scheme, edges)?;
            let bytes = match format {
                OutputFormat::Svg => render_svg(&dm, &rcfg),
                OutputFormat::Dot => render_dot(&dm),
                OutputFormat::Json => to_json(&dm)?,
            };
            write_output(output.as_deref(), &bytes, stdout)
        }
        Command::Emit { input, emit, scheme, edges, output, cluster, reduce } => {
            let (report, analysis) = prepare(&input, &cluster, &reduce, stderr)?;
            let bytes = emit_payload(emit, &report, &analysis, scheme, edges)?;
            write_output(output.as_deref(), &bytes, stdout)
        }
        Command::Synth { spec, output, format } => {
            let text = std::fs::read(&spec)
                .map_err(|e| Error::Io(format!("cannot read {}: {e}", spec.display())))?;
            let spec: SynthSpec = serde_json::from_slice(&text).map_err(|e| {
                Error::Parse(format!("{e} (line {}, column {})", e.line(), e.column()))
            })?;
            let exp = generate(&spec)?;
            let bytes = match format {
                DataFormat::Json => write_json(&exp),
                DataFormat::Csv => write_csv(&exp),
            };
            write_output(output.as_deref(), &bytes, stdout)
        }
    }
}

fn report_error(stderr: &mut dyn Write, color: bool, category: &str, detail: &str) {
    let detail = detail.replace('\n', " ");
    if color {
        let _ = writeln!(stderr, "\x1b[31merror\x1b[0m: {category}: {detail}");
    } else {
        let _ = writeln!(stderr, "error: {category}: {detail}");
    }
}

/// Runs the CLI against the given streams and returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                let _ = write!(stderr, "{e}");
                report_error(stderr, color, "usage", "missing subcommand");
                return EXIT_USAGE;
            }
            let rendered = e.to_string();
            let _ = write!(stderr, "{rendered}");
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            report_error(stderr, color, "usage", first.trim_start_matches("error: "));
            return EXIT_USAGE;
        }
    };
    match execute(cli, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            report_error(stderr, color, e.category(), e.detail());
            exit_code(&e)
        }
    }
}

/// Runs the CLI on the process's standard streams. Diagnostics are coloured
/// when stderr is a terminal and `CMDVIZ_NO_COLOR` is unset.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let color = std::env::var_os("CMDVIZ_NO_COLOR").is_none() && std::io::stderr().is_terminal();
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    let code = run_with(args, &mut out, &mut err, color);
    let _ = out.flush();
    code
}
