//! Edge-list, partition and attribute file formats.
//!
//! Edge lists are UTF-8 text with TAB-separated `tail head [weight]` lines,
//! `#` comments, blank lines, and `%` directives (`%directed`,
//! `%undirected`, `%n=<N>`). Partitions and attributes are `node value`
//! lines; non-numeric labels are mapped to contiguous ids in order of first
//! appearance and the mapping is echoed in the report.

use std::fmt::Write as _;
use std::path::Path;

use ibnet::graph::Directedness;
use ibnet::stratify::Partition;
use ibnet::Graph;
use thiserror::Error;

/// Token-to-id mapping in first-appearance order.
pub type LabelMap = Vec<(String, usize)>;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}:{line}: parse error: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("{path}:{line}: negative weight")]
    NegativeWeight { path: String, line: usize },
    #[error("{path}: node {node} missing")]
    MissingNode { path: String, node: usize },
    #[error("{path}:{line}: duplicate entry for node {node}")]
    DuplicateNode { path: String, line: usize, node: usize },
    #[error("failed to read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("failed to write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

fn read(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path)
        .map_err(|source| IoError::Read { path: path.display().to_string(), source })
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse { path: path.display().to_string(), line, message: message.into() }
}

/// FNV-1a 64-bit content hash, hex encoded; echoed in report envelopes.
pub fn fnv1a64_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xCBF29CE484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001B3);
    }
    format!("{hash:016x}")
}

pub fn hash_file(path: &Path) -> Result<String, IoError> {
    let bytes = std::fs::read(path)
        .map_err(|source| IoError::Read { path: path.display().to_string(), source })?;
    Ok(fnv1a64_hex(&bytes))
}

pub fn parse_edge_list(path: &Path) -> Result<Graph, IoError> {
    let text = read(path)?;
    let mut directedness = Directedness::Directed;
    let mut declared_n: Option<usize> = None;
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut max_id = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(directive) = line.strip_prefix('%') {
            match directive.trim() {
                "directed" => directedness = Directedness::Directed,
                "undirected" => directedness = Directedness::Undirected,
                other => {
                    if let Some(value) = other.strip_prefix("n=") {
                        declared_n = Some(value.parse().map_err(|_| {
                            parse_err(path, lineno, format!("bad node count `{value}`"))
                        })?);
                    } else {
                        return Err(parse_err(path, lineno, format!("unknown directive `%{other}`")));
                    }
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 && fields.len() != 3 {
            return Err(parse_err(path, lineno, "expected `tail<TAB>head[<TAB>weight]`"));
        }
        let tail: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad node id `{}`", fields[0])))?;
        let head: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad node id `{}`", fields[1])))?;
        let weight: f64 = match fields.get(2) {
            None => 1.0,
            Some(w) => w
                .parse()
                .map_err(|_| parse_err(path, lineno, format!("bad weight `{w}`")))?,
        };
        // Negated comparison also rejects NaN weights.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(weight >= 0.0) {
            return Err(IoError::NegativeWeight { path: path.display().to_string(), line: lineno });
        }
        max_id = max_id.max(tail).max(head);
        edges.push((tail, head, weight));
    }
    let n = declared_n.unwrap_or(if edges.is_empty() { 0 } else { max_id + 1 });
    Graph::build(n, &edges, directedness)
        .map_err(|e| IoError::Invalid { path: path.display().to_string(), message: e.to_string() })
}

/// Parses `node<TAB>value` lines into per-node tokens; `%default=<v>` fills
/// omitted nodes. Returns the token per node.
fn parse_node_values(path: &Path, n: usize) -> Result<Vec<String>, IoError> {
    let text = read(path)?;
    let mut values: Vec<Option<String>> = vec![None; n];
    let mut default: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(directive) = line.strip_prefix('%') {
            if let Some(value) = directive.trim().strip_prefix("default=") {
                default = Some(value.to_string());
            } else {
                return Err(parse_err(path, lineno, format!("unknown directive `%{directive}`")));
            }
            continue;
        }
        let (node, value) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(path, lineno, "expected `node<TAB>value`"))?;
        let node: usize = node
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad node id `{node}`")))?;
        if node >= n {
            return Err(parse_err(path, lineno, format!("node {node} out of range for n = {n}")));
        }
        if values[node].is_some() {
            return Err(IoError::DuplicateNode {
                path: path.display().to_string(),
                line: lineno,
                node,
            });
        }
        values[node] = Some(value.to_string());
    }
    values
        .into_iter()
        .enumerate()
        .map(|(node, v)| {
            v.or_else(|| default.clone()).ok_or(IoError::MissingNode {
                path: path.display().to_string(),
                node,
            })
        })
        .collect()
}

/// Maps tokens to contiguous ids in first-appearance order.
fn label_ids(tokens: &[String]) -> (Vec<usize>, LabelMap) {
    let mut mapping: Vec<(String, usize)> = Vec::new();
    let ids = tokens
        .iter()
        .map(|t| match mapping.iter().find(|(label, _)| label == t) {
            Some(&(_, id)) => id,
            None => {
                let id = mapping.len();
                mapping.push((t.clone(), id));
                id
            }
        })
        .collect();
    (ids, mapping)
}

/// Partition file: every node must be present exactly once (no default).
pub fn parse_partition(
    path: &Path,
    n: usize,
) -> Result<(Partition, LabelMap), IoError> {
    let tokens = parse_node_values(path, n)?;
    let (ids, mapping) = label_ids(&tokens);
    let partition = Partition::new(ids)
        .map_err(|e| IoError::Invalid { path: path.display().to_string(), message: e.to_string() })?;
    Ok((partition, mapping))
}

pub fn parse_attribute_scalar(path: &Path, n: usize) -> Result<Vec<f64>, IoError> {
    let tokens = parse_node_values(path, n)?;
    tokens
        .iter()
        .enumerate()
        .map(|(node, t)| {
            t.parse::<f64>().map_err(|_| IoError::Invalid {
                path: path.display().to_string(),
                message: format!("node {node}: `{t}` is not a number"),
            })
        })
        .collect()
}

pub fn parse_attribute_categorical(
    path: &Path,
    n: usize,
) -> Result<(Vec<usize>, LabelMap), IoError> {
    let tokens = parse_node_values(path, n)?;
    Ok(label_ids(&tokens))
}

fn write_file(path: &Path, content: &str) -> Result<(), IoError> {
    std::fs::write(path, content)
        .map_err(|source| IoError::Write { path: path.display().to_string(), source })
}

pub fn write_edge_list(path: &Path, graph: &Graph) -> Result<(), IoError> {
    let mut out = String::new();
    let mode = match graph.directedness() {
        Directedness::Directed => "%directed",
        Directedness::Undirected => "%undirected",
    };
    let _ = writeln!(out, "{mode}");
    let _ = writeln!(out, "%n={}", graph.n());
    for arc in graph.arcs() {
        let _ = writeln!(out, "{}\t{}\t{}", arc.tail, arc.head, arc.weight);
    }
    write_file(path, &out)
}

pub fn write_partition(path: &Path, partition: &Partition) -> Result<(), IoError> {
    let mut out = String::new();
    for (node, block) in partition.assignments().iter().enumerate() {
        let _ = writeln!(out, "{node}\t{block}");
    }
    write_file(path, &out)
}

pub fn write_attribute(path: &Path, values: &[f64]) -> Result<(), IoError> {
    let mut out = String::new();
    for (node, value) in values.iter().enumerate() {
        let _ = writeln!(out, "{node}\t{value}");
    }
    write_file(path, &out)
}

pub fn write_trajectory_csv(
    path: &Path,
    trajectory: &ibnet::sis::Trajectory<f64>,
) -> Result<(), IoError> {
    let n = trajectory.states.first().map_or(0, Vec::len);
    let mut out = String::from("time");
    for v in 0..n {
        let _ = write!(out, ",x{v}");
    }
    out.push('\n');
    for (t, state) in trajectory.times.iter().zip(&trajectory.states) {
        let _ = write!(out, "{t}");
        for value in state {
            let _ = write!(out, ",{value}");
        }
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn write_sweep_csv(path: &Path, sweep: &ibnet::genlab::SweepResult) -> Result<(), IoError> {
    let mut out = String::from("q,replicate,seed,phi_max,min_gap,r_b_to_i,verdict\n");
    for r in &sweep.records {
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.q,
            r.replicate,
            r.seed,
            fmt(r.phi_max),
            fmt(r.min_gap),
            fmt(r.r_b_to_i),
            r.verdict
        );
    }
    write_file(path, &out)
}
