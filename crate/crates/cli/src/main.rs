//! `ibnet`: interior-boundary analytics over edge-list graphs.
//!
//! Every command reads TAB-separated node/edge files, computes one report,
//! and emits deterministic JSON (stdout or `--out`). Exit code 0 means a
//! fully defined report, 2 means the report contains mathematically
//! undefined entries (serialized as null values with reasons), and 1 means
//! an input or computation error.

mod io;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use ibnet::assort::{profile_categorical, profile_scalar, AssortError};
use ibnet::collapse::{collapse_decomposition, sign_conditions, CollapseError, CollapseMode};
use ibnet::genlab::{chain_sweep, fixture, sbm, FixtureId, GenError, SbmSpec, SweepResult};
use ibnet::graph::{Directedness, GraphError};
use ibnet::sis::{endemic_equilibrium, implication_chain, integrate, SisError, SisParams};
use ibnet::spectral::{cheeger_check, spectral_proxy, SpectralError, WalkSpec};
use ibnet::stratify::{
    classify_roles, participation, stratify_arcs, Direction, Partition, StratifyError,
};
use ibnet::Graph;
use report::{Envelope, InputStamp, MaybeValue};

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Io(#[from] io::IoError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Stratify(#[from] StratifyError),
    #[error(transparent)]
    Assort(#[from] AssortError),
    #[error(transparent)]
    Collapse(#[from] CollapseError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Sis(#[from] SisError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("{0}")]
    Invalid(String),
    #[error("failed to serialize report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("failed to write {path}: {source}")]
    WriteOut { path: String, source: std::io::Error },
}

/// Report emitted successfully; distinguishes fully defined reports from
/// ones containing undefined-but-valid entries.
enum Outcome {
    Clean,
    Undefined,
}

impl Outcome {
    fn from_flag(undefined: bool) -> Self {
        if undefined {
            Outcome::Undefined
        } else {
            Outcome::Clean
        }
    }
}

#[derive(Parser)]
#[command(name = "ibnet", version, about = "Interior-boundary graph analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Weighted,
    Counts,
}

#[derive(Clone, Copy, ValueEnum)]
enum RemedyArg {
    None,
    Lazy,
    Teleport,
}

#[derive(Subcommand)]
enum Command {
    /// Roles, stratum masses, assortativity profile and participation table.
    Profile {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        attribute: Option<PathBuf>,
        #[arg(long, conflicts_with = "attribute")]
        attribute_categorical: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact decomposition of pooled intra-group assortativity.
    Collapse {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        attribute: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sufficient conditions for a negative boundary-to-interior component.
    Signcheck {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        attribute: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stationary distribution, directed Laplacian spectrum and conductance.
    Spectral {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        /// Ergodicity remedy; defaults to lazy on strongly connected graphs
        /// and teleport otherwise.
        #[arg(long, value_enum)]
        remedy: Option<RemedyArg>,
        #[arg(long, default_value_t = 0.85)]
        alpha: f64,
        /// Also compute the exact Cheeger constant (n <= 18).
        #[arg(long)]
        cheeger_exact: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncated spectral proxy with its tail bound.
    Proxy {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// SIS endemic equilibrium (optionally with a trajectory).
    Sis {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        delta: f64,
        /// Integrate the dynamics up to this horizon from the all-0.5 state.
        #[arg(long)]
        integrate: Option<f64>,
        /// Step size for --integrate (defaults to the stability heuristic).
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full conductance -> equilibrium -> dominance -> sign pipeline.
    Chain {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a named fixture or an SBM draw as edge-list and partition files.
    Gen {
        #[arg(long, conflicts_with = "sbm")]
        fixture: Option<String>,
        /// Key=value tokens: sizes=30,30 p=0.4 q=0.01 seed=1 [weight=1]
        /// [directed=true]
        #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
        sbm: Option<Vec<String>>,
        /// Output path prefix.
        #[arg(long, default_value = "ibnet-gen")]
        out: PathBuf,
    },
    /// Implication-chain sweep over an SBM family.
    Sweep {
        #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
        sbm: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        q_list: Vec<f64>,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1)]
        replicates: usize,
        /// Worker threads; defaults to $IBNET_JOBS or 1.
        #[arg(long)]
        jobs: Option<usize>,
        /// Output path prefix for the JSON and CSV reports.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Undefined) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn emit<P: Serialize>(envelope: &Envelope<P>, out: Option<&Path>) -> Result<(), CliError> {
    let bytes = report::to_json_bytes(envelope)?;
    match out {
        Some(path) => std::fs::write(path, &bytes)
            .map_err(|source| CliError::WriteOut { path: path.display().to_string(), source }),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|source| CliError::WriteOut { path: "<stdout>".into(), source })
        }
    }
}

fn load_graph_partition(
    graph_path: &Path,
    partition_path: &Path,
) -> Result<(Graph, Partition, io::LabelMap, Vec<InputStamp>), CliError> {
    let graph = io::parse_edge_list(graph_path)?;
    let (partition, mapping) = io::parse_partition(partition_path, graph.n())?;
    let inputs = vec![InputStamp::new(graph_path)?, InputStamp::new(partition_path)?];
    Ok((graph, partition, mapping, inputs))
}

fn run(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Profile { graph, partition, attribute, attribute_categorical, out } => {
            cmd_profile(&graph, &partition, attribute.as_deref(), attribute_categorical.as_deref(), out.as_deref())
        }
        Command::Collapse { graph, partition, attribute, mode, out } => {
            cmd_collapse(&graph, &partition, &attribute, mode, out.as_deref())
        }
        Command::Signcheck { graph, partition, attribute, out } => {
            cmd_signcheck(&graph, &partition, &attribute, out.as_deref())
        }
        Command::Spectral { graph, partition, remedy, alpha, cheeger_exact, out } => {
            cmd_spectral(&graph, &partition, remedy, alpha, cheeger_exact, out.as_deref())
        }
        Command::Proxy { graph, k, out } => cmd_proxy(&graph, k, out.as_deref()),
        Command::Sis { graph, partition, beta, delta, integrate, dt, out } => {
            cmd_sis(&graph, &partition, beta, delta, integrate, dt, out.as_deref())
        }
        Command::Chain { graph, partition, beta, delta, out } => {
            cmd_chain(&graph, &partition, beta, delta, out.as_deref())
        }
        Command::Gen { fixture, sbm, out } => cmd_gen(fixture.as_deref(), sbm.as_deref(), &out),
        Command::Sweep { sbm, q_list, beta, delta, replicates, jobs, out } => {
            cmd_sweep(&sbm, &q_list, beta, delta, replicates, jobs, out.as_deref())
        }
    }
}

#[derive(Serialize)]
struct StratumMassJson {
    stratum: &'static str,
    arc_count: usize,
    mass: f64,
}

#[derive(Serialize)]
struct ParticipationJson {
    node: usize,
    out: MaybeValue,
    r#in: MaybeValue,
}

#[derive(Serialize)]
struct ProfilePayload {
    n: usize,
    directedness: &'static str,
    arc_count: usize,
    total_mass: f64,
    block_count: usize,
    label_mapping: Vec<report::LabelMapJson>,
    interior: Vec<usize>,
    boundary: Vec<usize>,
    strata: Vec<StratumMassJson>,
    attribute_kind: Option<&'static str>,
    attribute_labels: Option<Vec<report::LabelMapJson>>,
    profile: Option<Vec<report::ProfileEntryJson>>,
    participation: Vec<ParticipationJson>,
}

fn cmd_profile(
    graph_path: &Path,
    partition_path: &Path,
    attribute: Option<&Path>,
    attribute_categorical: Option<&Path>,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let (graph, partition, mapping, mut inputs) = load_graph_partition(graph_path, partition_path)?;
    let roles = classify_roles(&graph, &partition)?;
    let strat = stratify_arcs(&graph, &partition, &roles)?;

    let mut undefined = false;
    let (attribute_kind, attribute_labels, profile) = if let Some(path) = attribute {
        let x = io::parse_attribute_scalar(path, graph.n())?;
        inputs.push(InputStamp::new(path)?);
        let p = profile_scalar(&strat, &x)?;
        undefined |= report::profile_has_undefined(&p);
        (Some("scalar"), None, Some(report::profile_json(&p)))
    } else if let Some(path) = attribute_categorical {
        let (labels, label_mapping) = io::parse_attribute_categorical(path, graph.n())?;
        inputs.push(InputStamp::new(path)?);
        let p = profile_categorical(&strat, &labels)?;
        undefined |= report::profile_has_undefined(&p);
        (Some("categorical"), Some(report::label_map_json(&label_mapping)), Some(report::profile_json(&p)))
    } else {
        (None, None, None)
    };

    let participation_rows: Vec<ParticipationJson> = (0..graph.n())
        .map(|v| -> Result<ParticipationJson, CliError> {
            let as_value = |p: Option<f64>| {
                p.map(MaybeValue::defined).unwrap_or_else(|| MaybeValue::undefined("zero_strength"))
            };
            let out_p = participation(&graph, &partition, v, Direction::Out)?;
            let in_p = participation(&graph, &partition, v, Direction::In)?;
            Ok(ParticipationJson { node: v, out: as_value(out_p), r#in: as_value(in_p) })
        })
        .collect::<Result<_, _>>()?;
    undefined |= participation_rows.iter().any(|r| r.out.is_undefined() || r.r#in.is_undefined());

    let strengths = graph.strengths();
    let payload = ProfilePayload {
        n: graph.n(),
        directedness: match graph.directedness() {
            Directedness::Directed => "directed",
            Directedness::Undirected => "undirected",
        },
        arc_count: graph.arc_count(),
        total_mass: strengths.total_mass,
        block_count: partition.block_count(),
        label_mapping: report::label_map_json(&mapping),
        interior: roles.interior_nodes(),
        boundary: roles.boundary_nodes(),
        strata: strat
            .strata()
            .iter()
            .map(|&s| StratumMassJson {
                stratum: s.label(graph.directedness()),
                arc_count: strat.count(s),
                mass: strat.mass(s),
            })
            .collect(),
        attribute_kind,
        attribute_labels,
        profile,
        participation: participation_rows,
    };
    emit(&Envelope::new("profile", inputs, payload), out)?;
    Ok(Outcome::from_flag(undefined))
}

fn cmd_collapse(
    graph_path: &Path,
    partition_path: &Path,
    attribute_path: &Path,
    mode: Option<ModeArg>,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let (graph, partition, _, mut inputs) = load_graph_partition(graph_path, partition_path)?;
    let x = io::parse_attribute_scalar(attribute_path, graph.n())?;
    inputs.push(InputStamp::new(attribute_path)?);
    let roles = classify_roles(&graph, &partition)?;
    let strat = stratify_arcs(&graph, &partition, &roles)?;
    let mode = match mode {
        Some(ModeArg::Weighted) => CollapseMode::Weighted,
        Some(ModeArg::Counts) => CollapseMode::UnweightedCounts,
        None => CollapseMode::default_for(&strat),
    };
    let report_core = collapse_decomposition(&strat, &x, mode)?;
    let undefined = report_core.r_in.is_err()
        || report_core.corr_residual.is_none()
        || report_core.strata.iter().any(|s| s.correlation.is_err());
    let payload = report::collapse_json(&report_core, graph.directedness());
    emit(&Envelope::new("collapse", inputs, payload), out)?;
    Ok(Outcome::from_flag(undefined))
}

fn cmd_signcheck(
    graph_path: &Path,
    partition_path: &Path,
    attribute_path: &Path,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let (graph, partition, _, mut inputs) = load_graph_partition(graph_path, partition_path)?;
    let x = io::parse_attribute_scalar(attribute_path, graph.n())?;
    inputs.push(InputStamp::new(attribute_path)?);
    let roles = classify_roles(&graph, &partition)?;
    let strat = stratify_arcs(&graph, &partition, &roles)?;
    let report_core = sign_conditions(&graph, &partition, &strat, &x)?;
    let undefined = report::sign_is_undefined(&report_core);
    let payload = report::sign_json(&report_core);
    emit(&Envelope::new("signcheck", inputs, payload), out)?;
    Ok(Outcome::from_flag(undefined))
}

fn cmd_spectral(
    graph_path: &Path,
    partition_path: &Path,
    remedy: Option<RemedyArg>,
    alpha: f64,
    cheeger_exact: bool,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let (graph, partition, _, inputs) = load_graph_partition(graph_path, partition_path)?;
    let walk = match remedy {
        None => WalkSpec::auto(&graph),
        Some(RemedyArg::None) => WalkSpec::none(),
        Some(RemedyArg::Lazy) => WalkSpec::lazy(),
        Some(RemedyArg::Teleport) => WalkSpec::teleport(alpha, None),
    };
    let n_max = if cheeger_exact { 18 } else { 0 };
    let report_core = cheeger_check(&graph, Some(&partition), &walk, n_max)?;
    let undefined = report_core
        .phi_blocks
        .as_ref()
        .map(|blocks| blocks.iter().any(Option::is_none))
        .unwrap_or(false)
        || report_core.phi_max.is_none();
    let payload = report::spectral_json(&report_core);
    emit(&Envelope::new("spectral", inputs, payload), out)?;
    Ok(Outcome::from_flag(undefined))
}

#[derive(Serialize)]
struct ProxyPayload {
    n: usize,
    k: usize,
    projected_from_directed: bool,
    tail_bound: f64,
    eigenvalues: Vec<f64>,
    s_k: Vec<f64>,
    s_inf: Vec<f64>,
}

fn cmd_proxy(graph_path: &Path, k: usize, out: Option<&Path>) -> Result<Outcome, CliError> {
    let graph = io::parse_edge_list(graph_path)?;
    let inputs = vec![InputStamp::new(graph_path)?];
    let (undirected, projected) = match graph.directedness() {
        Directedness::Undirected => (graph, false),
        Directedness::Directed => (graph.undirected_projection(), true),
    };
    let proxy = spectral_proxy(&undirected, k)?;
    let payload = ProxyPayload {
        n: undirected.n(),
        k,
        projected_from_directed: projected,
        tail_bound: proxy.tail_bound,
        eigenvalues: proxy.eigenvalues,
        s_k: proxy.s_k,
        s_inf: proxy.s_inf,
    };
    let mut envelope = Envelope::new("proxy", inputs, payload);
    if projected {
        envelope
            .warnings
            .push("directed input projected to its undirected skeleton".to_string());
    }
    emit(&envelope, out)?;
    Ok(Outcome::Clean)
}

#[derive(Serialize)]
struct IntegrationJson {
    horizon: f64,
    dt: f64,
    steps: usize,
    final_time: f64,
    final_state: Vec<f64>,
    trajectory_csv: Option<String>,
}

#[derive(Serialize)]
struct SisPayload {
    beta: f64,
    delta: f64,
    equilibrium: report::EquilibriumJson,
    integration: Option<IntegrationJson>,
}

fn cmd_sis(
    graph_path: &Path,
    partition_path: &Path,
    beta: f64,
    delta: f64,
    horizon: Option<f64>,
    dt: Option<f64>,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let (graph, _partition, _, inputs) = load_graph_partition(graph_path, partition_path)?;
    let params = SisParams::new(beta, delta)?;
    let eq = endemic_equilibrium(&graph, &params, 1e-10)?;

    let mut warnings = Vec::new();
    let integration = match horizon {
        None => None,
        Some(horizon) => {
            let dt = dt.unwrap_or_else(|| ibnet::sis::default_dt(&params, &graph));
            let x0 = vec![0.5; graph.n()];
            let trajectory = integrate(&x0, &params, &graph, horizon, dt)?;
            let trajectory_csv = match out {
                Some(path) => {
                    let csv_path = path.with_extension("trajectory.csv");
                    io::write_trajectory_csv(&csv_path, &trajectory)?;
                    Some(csv_path.display().to_string())
                }
                None => {
                    warnings.push("trajectory CSV omitted: pass --out to write it".to_string());
                    None
                }
            };
            Some(IntegrationJson {
                horizon,
                dt,
                steps: trajectory.states.len() - 1,
                final_time: *trajectory.times.last().expect("nonempty trajectory"),
                final_state: trajectory.last().to_vec(),
                trajectory_csv,
            })
        }
    };

    let payload = SisPayload { beta, delta, equilibrium: report::equilibrium_json(&eq), integration };
    let mut envelope = Envelope::new("sis", inputs, payload);
    envelope.warnings = warnings;
    emit(&envelope, out)?;
    Ok(Outcome::Clean)
}

fn cmd_chain(
    graph_path: &Path,
    partition_path: &Path,
    beta: f64,
    delta: f64,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let (graph, partition, _, inputs) = load_graph_partition(graph_path, partition_path)?;
    let params = SisParams::new(beta, delta)?;
    let walk = WalkSpec::auto(&graph);
    let chain = implication_chain(&graph, &partition, &params, &walk)?;
    let undefined = report::profile_has_undefined(&chain.profile)
        || chain.sign.is_none()
        || chain.sign.as_ref().map(report::sign_is_undefined).unwrap_or(false)
        || chain.dominance.iter().any(|d| d.skipped.is_some());
    let payload = report::chain_json(&chain);
    emit(&Envelope::new("chain", inputs, payload), out)?;
    Ok(Outcome::from_flag(undefined))
}

#[derive(Serialize)]
struct GenPayload {
    source: String,
    n: usize,
    arc_count: usize,
    directedness: &'static str,
    files: Vec<String>,
}

fn parse_sbm_tokens(tokens: &[String]) -> Result<SbmSpec, CliError> {
    let mut sizes: Option<Vec<usize>> = None;
    let mut p: Option<f64> = None;
    let mut q: Option<f64> = None;
    let mut seed: Option<u64> = None;
    let mut weight = 1.0f64;
    let mut directed = true;
    for token in tokens {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| CliError::Invalid(format!("expected key=value, got `{token}`")))?;
        let bad = |what: &str| CliError::Invalid(format!("bad {what} `{value}`"));
        match key {
            "sizes" => {
                sizes = Some(
                    value
                        .split(',')
                        .map(|v| v.parse::<usize>().map_err(|_| bad("size")))
                        .collect::<Result<_, _>>()?,
                )
            }
            "p" => p = Some(value.parse().map_err(|_| bad("probability"))?),
            "q" => q = Some(value.parse().map_err(|_| bad("probability"))?),
            "seed" => seed = Some(value.parse().map_err(|_| bad("seed"))?),
            "weight" => weight = value.parse().map_err(|_| bad("weight"))?,
            "directed" => directed = value.parse().map_err(|_| bad("flag"))?,
            other => return Err(CliError::Invalid(format!("unknown sbm key `{other}`"))),
        }
    }
    Ok(SbmSpec {
        block_sizes: sizes.ok_or_else(|| CliError::Invalid("sbm needs sizes=".into()))?,
        p_within: p.ok_or_else(|| CliError::Invalid("sbm needs p=".into()))?,
        q_between: q.ok_or_else(|| CliError::Invalid("sbm needs q=".into()))?,
        weight,
        directedness: if directed { Directedness::Directed } else { Directedness::Undirected },
        seed: seed.ok_or_else(|| CliError::Invalid("sbm needs seed=".into()))?,
    })
}

fn prefixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(suffix);
    prefix.with_file_name(name)
}

fn cmd_gen(
    fixture_name: Option<&str>,
    sbm_tokens: Option<&[String]>,
    prefix: &Path,
) -> Result<Outcome, CliError> {
    let (source, graph, partition, attributes) = match (fixture_name, sbm_tokens) {
        (Some(name), None) => {
            let id: FixtureId = name.parse()?;
            let f = fixture(&id)?;
            (f.name, f.graph, f.partition, f.attributes)
        }
        (None, Some(tokens)) => {
            let spec = parse_sbm_tokens(tokens)?;
            let (graph, partition) = sbm(&spec)?;
            (format!("{spec:?}"), graph, Some(partition), Vec::new())
        }
        _ => return Err(CliError::Invalid("pass exactly one of --fixture or --sbm".into())),
    };

    let mut files = Vec::new();
    let edges_path = prefixed(prefix, ".edges.tsv");
    io::write_edge_list(&edges_path, &graph)?;
    files.push(edges_path.display().to_string());
    if let Some(p) = &partition {
        let partition_path = prefixed(prefix, ".partition.tsv");
        io::write_partition(&partition_path, p)?;
        files.push(partition_path.display().to_string());
    }
    for (name, values) in &attributes {
        let attr_path = prefixed(prefix, &format!(".attribute-{name}.tsv"));
        io::write_attribute(&attr_path, values)?;
        files.push(attr_path.display().to_string());
    }

    let payload = GenPayload {
        source,
        n: graph.n(),
        arc_count: graph.arc_count(),
        directedness: match graph.directedness() {
            Directedness::Directed => "directed",
            Directedness::Undirected => "undirected",
        },
        files,
    };
    emit(&Envelope::new("gen", Vec::new(), payload), None)?;
    Ok(Outcome::Clean)
}

#[derive(Serialize)]
struct SweepRecordJson {
    q: f64,
    replicate: usize,
    seed: u64,
    phi_max: MaybeValue,
    min_gap: MaybeValue,
    r_b_to_i: MaybeValue,
    verdict: String,
}

#[derive(Serialize)]
struct SweepSummaryJson {
    q: f64,
    replicates: usize,
    dominance_fraction: f64,
    negative_fraction: f64,
}

#[derive(Serialize)]
struct SweepPayload {
    beta: f64,
    delta: f64,
    replicates: usize,
    jobs: usize,
    records: Vec<SweepRecordJson>,
    summaries: Vec<SweepSummaryJson>,
    csv: Option<String>,
}

fn sweep_payload(sweep: &SweepResult, beta: f64, delta: f64, replicates: usize, jobs: usize) -> SweepPayload {
    let maybe = |v: Option<f64>, reason: &'static str| {
        v.map(MaybeValue::defined).unwrap_or_else(|| MaybeValue::undefined(reason))
    };
    SweepPayload {
        beta,
        delta,
        replicates,
        jobs,
        records: sweep
            .records
            .iter()
            .map(|r| SweepRecordJson {
                q: r.q,
                replicate: r.replicate,
                seed: r.seed,
                phi_max: maybe(r.phi_max, "no_proper_block"),
                min_gap: maybe(r.min_gap, "no_evaluable_group"),
                r_b_to_i: maybe(r.r_b_to_i, "undefined"),
                verdict: r.verdict.clone(),
            })
            .collect(),
        summaries: sweep
            .summaries
            .iter()
            .map(|s| SweepSummaryJson {
                q: s.q,
                replicates: s.replicates,
                dominance_fraction: s.dominance_fraction,
                negative_fraction: s.negative_fraction,
            })
            .collect(),
        csv: None,
    }
}

fn cmd_sweep(
    sbm_tokens: &[String],
    q_list: &[f64],
    beta: f64,
    delta: f64,
    replicates: usize,
    jobs: Option<usize>,
    out: Option<&Path>,
) -> Result<Outcome, CliError> {
    let spec = parse_sbm_tokens(sbm_tokens)?;
    let params = SisParams::new(beta, delta)?;
    let jobs = jobs
        .or_else(|| std::env::var("IBNET_JOBS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1);
    let sweep = chain_sweep(&spec, q_list, &params, replicates, jobs)?;
    let mut payload = sweep_payload(&sweep, beta, delta, replicates, jobs);
    let json_out = match out {
        Some(prefix) => {
            let csv_path = prefixed(prefix, ".csv");
            io::write_sweep_csv(&csv_path, &sweep)?;
            payload.csv = Some(csv_path.display().to_string());
            Some(prefixed(prefix, ".json"))
        }
        None => None,
    };
    emit(&Envelope::new("sweep", Vec::new(), payload), json_out.as_deref())?;
    Ok(Outcome::Clean)
}
