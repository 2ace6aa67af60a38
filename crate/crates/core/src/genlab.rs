//! Deterministic fixtures, seeded random generators, and the sweep harness.
//!
//! Everything here is byte-reproducible: the generator is SplitMix64 with a
//! documented substream-derivation rule, and candidate edges are always
//! drawn in a fixed order (one draw per candidate pair, row-major), so a
//! fixed seed yields an identical arc list on any platform.

use std::collections::BTreeSet;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::assort::{profile_scalar, AssortError, AssortProfile};
use crate::collapse::{collapse_decomposition, CollapseError, CollapseMode};
use crate::graph::{Directedness, GraphError};
use crate::sis::{implication_chain, SisError, SisParams};
use crate::spectral::{SpectralError, WalkSpec};
use crate::stratify::{classify_roles, stratify_arcs, Partition, StratifyError};

type Graph = crate::graph::Graph<f64>;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("unknown fixture: {0}")]
    UnknownFixture(String),
    #[error("invalid generator specification: {0}")]
    InvalidSpec(String),
    #[error("fixture construction search failed: {0}")]
    SearchFailed(String),
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
}

/// SplitMix64 generator.
///
/// `next_u64` advances the state by the golden-ratio increment
/// `0x9E3779B97F4A7C15` and applies the finalizer
/// `z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
///  z *= 0x94D049BB133111EB; z ^= z >> 31` (wrapping arithmetic).
/// `next_f64` maps the top 53 bits to `[0, 1)`. Substream `i` of seed `s`
/// starts from `mix64(s + (i + 1) * 0x9E3779B97F4A7C15)`, which keeps
/// replicate streams independent and portable across languages.
#[derive(Clone, Debug)]
pub struct Rng64 {
    state: u64,
}

const GOLDEN: u64 = 0x9E3779B97F4A7C15;

fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58476D1CE4E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

impl Rng64 {
    pub fn new(seed: u64) -> Self {
        Rng64 { state: seed }
    }

    /// Derived seed of substream `index` of `seed`.
    pub fn substream_seed(seed: u64, index: u64) -> u64 {
        mix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    pub fn substream(seed: u64, index: u64) -> Self {
        Rng64::new(Self::substream_seed(seed, index))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform integer in `[0, bound)`.
    pub fn next_below(&mut self, bound: usize) -> usize {
        (self.next_f64() * bound as f64) as usize % bound.max(1)
    }
}

/// Named fixture identifiers; the parenthesized forms carry parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum FixtureId {
    TwoTriangleBridge,
    TwoTriangleBridgeDirected,
    DirCycle(usize),
    K22,
    Regular { n: usize, d: usize },
    Amplified { p: f64, q: f64, sizes: Vec<usize>, seed: u64 },
    CorollaryPair,
}

impl FromStr for FixtureId {
    type Err = GenError;

    /// Accepts `two_triangle_bridge`, `two_triangle_bridge_directed`, `k22`,
    /// `corollary_pair`, `dir_cycle(N)`, `regular(N,D)`, and
    /// `amplified(P,Q,S1-S2-...,SEED)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "two_triangle_bridge" => return Ok(FixtureId::TwoTriangleBridge),
            "two_triangle_bridge_directed" => return Ok(FixtureId::TwoTriangleBridgeDirected),
            "k22" => return Ok(FixtureId::K22),
            "corollary_pair" => return Ok(FixtureId::CorollaryPair),
            _ => {}
        }
        let (name, args) = s
            .strip_suffix(')')
            .and_then(|rest| rest.split_once('('))
            .ok_or_else(|| GenError::UnknownFixture(s.to_string()))?;
        let args: Vec<&str> = args.split(',').map(str::trim).collect();
        let parse_usize = |v: &str| {
            v.parse::<usize>().map_err(|_| GenError::InvalidSpec(format!("bad integer `{v}`")))
        };
        let parse_f64 = |v: &str| {
            v.parse::<f64>().map_err(|_| GenError::InvalidSpec(format!("bad number `{v}`")))
        };
        match name {
            "dir_cycle" if args.len() == 1 => Ok(FixtureId::DirCycle(parse_usize(args[0])?)),
            "regular" if args.len() == 2 => {
                Ok(FixtureId::Regular { n: parse_usize(args[0])?, d: parse_usize(args[1])? })
            }
            "amplified" if args.len() == 4 => {
                let sizes = args[2]
                    .split('-')
                    .map(parse_usize)
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(FixtureId::Amplified {
                    p: parse_f64(args[0])?,
                    q: parse_f64(args[1])?,
                    sizes,
                    seed: args[3]
                        .parse::<u64>()
                        .map_err(|_| GenError::InvalidSpec(format!("bad seed `{}`", args[3])))?,
                })
            }
            _ => Err(GenError::UnknownFixture(s.to_string())),
        }
    }
}

impl std::fmt::Display for FixtureId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FixtureId::TwoTriangleBridge => write!(f, "two_triangle_bridge"),
            FixtureId::TwoTriangleBridgeDirected => write!(f, "two_triangle_bridge_directed"),
            FixtureId::DirCycle(n) => write!(f, "dir_cycle({n})"),
            FixtureId::K22 => write!(f, "k22"),
            FixtureId::Regular { n, d } => write!(f, "regular({n},{d})"),
            FixtureId::Amplified { p, q, sizes, seed } => {
                let sizes: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
                write!(f, "amplified({p},{q},{},{seed})", sizes.join("-"))
            }
            FixtureId::CorollaryPair => write!(f, "corollary_pair"),
        }
    }
}

/// A generated graph with its partition and named attributes (if any).
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub graph: Graph,
    pub partition: Option<Partition>,
    pub attributes: Vec<(String, Vec<f64>)>,
}

fn bridge_edges() -> [(usize, usize, f64); 7] {
    [
        (0, 1, 1.0),
        (0, 2, 1.0),
        (1, 2, 1.0),
        (3, 4, 1.0),
        (3, 5, 1.0),
        (4, 5, 1.0),
        (2, 3, 1.0),
    ]
}

fn bridge_partition() -> Partition {
    Partition::new(vec![0, 0, 0, 1, 1, 1]).expect("valid partition")
}

/// Builds a named deterministic fixture; claimed witness properties are
/// asserted at generation time.
pub fn fixture(id: &FixtureId) -> Result<Fixture, GenError> {
    match id {
        FixtureId::TwoTriangleBridge => {
            let graph = Graph::build(6, &bridge_edges(), Directedness::Undirected)?;
            let s = graph.strengths();
            assert_eq!(s.out_strength, vec![2.0, 2.0, 3.0, 3.0, 2.0, 2.0]);
            assert_eq!(s.total_mass, 7.0);
            Ok(Fixture {
                name: id.to_string(),
                graph,
                partition: Some(bridge_partition()),
                attributes: Vec::new(),
            })
        }
        FixtureId::TwoTriangleBridgeDirected => {
            let edges = [
                (0, 1, 1.0),
                (1, 2, 1.0),
                (2, 0, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
                (5, 3, 1.0),
                (2, 3, 1.0),
            ];
            let graph = Graph::build(6, &edges, Directedness::Directed)?;
            assert_eq!(graph.strengths().total_mass, 7.0);
            Ok(Fixture {
                name: id.to_string(),
                graph,
                partition: Some(bridge_partition()),
                attributes: Vec::new(),
            })
        }
        FixtureId::DirCycle(n) => {
            if *n < 2 {
                return Err(GenError::InvalidSpec("dir_cycle needs n >= 2".into()));
            }
            let edges: Vec<_> = (0..*n).map(|i| (i, (i + 1) % n, 1.0)).collect();
            let graph = Graph::build(*n, &edges, Directedness::Directed)?;
            assert!(graph.is_strongly_connected());
            Ok(Fixture { name: id.to_string(), graph, partition: None, attributes: Vec::new() })
        }
        FixtureId::K22 => {
            let edges = [(0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0)];
            let graph = Graph::build(4, &edges, Directedness::Undirected)?;
            let partition = Partition::new(vec![0, 0, 1, 1])?;
            let roles = classify_roles(&graph, &partition)?;
            assert!(roles.interior_nodes().is_empty());
            Ok(Fixture {
                name: id.to_string(),
                graph,
                partition: Some(partition),
                attributes: Vec::new(),
            })
        }
        FixtureId::Regular { n, d } => {
            if *d == 0 || *d >= *n {
                return Err(GenError::InvalidSpec(format!(
                    "regular needs 1 <= d < n, got n={n}, d={d}"
                )));
            }
            // Directed circulant: i -> i+1, ..., i+d (mod n).
            let mut edges = Vec::with_capacity(n * d);
            for i in 0..*n {
                for j in 1..=*d {
                    edges.push((i, (i + j) % n, 1.0));
                }
            }
            let graph = Graph::build(*n, &edges, Directedness::Directed)?;
            let s = graph.strengths();
            assert!(s.out_strength.iter().all(|&k| k == *d as f64));
            assert!(s.in_strength.iter().all(|&k| k == *d as f64));
            Ok(Fixture { name: id.to_string(), graph, partition: None, attributes: Vec::new() })
        }
        FixtureId::Amplified { p, q, sizes, seed } => {
            let (graph, partition) = amplified(*p, *q, sizes, *seed)?;
            Ok(Fixture {
                name: id.to_string(),
                graph,
                partition: Some(partition),
                attributes: Vec::new(),
            })
        }
        FixtureId::CorollaryPair => corollary_pair(),
    }
}

/// Planted multi-block graph with an amplified boundary interface.
///
/// Each block is a seeded near-regular circulant at density `p`: every node
/// sends arcs along a local band of offsets `1..=round(0.8 d)` plus random
/// distinct long-range offsets, `d = max(1, round(p (s-1)))` in total, so
/// in- and out-degrees are exactly `d` (the large internal spectral gap the
/// boundary-amplification mechanism presumes). The interface between
/// consecutive blocks is a designated contiguous run of
/// `clamp(round(s (q/p)^(1/4)), 1, s)` nodes per block, completely linked in
/// both directions with unit weight: `q` is the coupling knob that widens the
/// interface from a single mutual gateway pair (`q -> 0`) to full bipartite
/// coupling with no bottleneck (`q = p`). Cross inflow is equal across the
/// designated run, so infection amplification is uniform on the boundary,
/// and the graph is strongly connected for every `q`.
pub fn amplified(
    p: f64,
    q: f64,
    sizes: &[usize],
    seed: u64,
) -> Result<(Graph, Partition), GenError> {
    if sizes.len() < 2 || sizes.iter().any(|&s| s < 3) {
        return Err(GenError::InvalidSpec("amplified needs >= 2 blocks of size >= 3".into()));
    }
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) || p == 0.0 {
        return Err(GenError::InvalidSpec("need p in (0, 1] and q in [0, 1]".into()));
    }
    let n: usize = sizes.iter().sum();
    let mut block_of = Vec::with_capacity(n);
    let mut starts = Vec::with_capacity(sizes.len());
    let mut start = 0;
    for (b, &size) in sizes.iter().enumerate() {
        starts.push(start);
        block_of.extend(std::iter::repeat_n(b, size));
        start += size;
    }

    let mut rng = Rng64::new(seed);
    let mut arcs: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (b, &size) in sizes.iter().enumerate() {
        let d = ((size - 1) as f64 * p).round().max(1.0) as usize;
        let band = ((d as f64) * 0.8).round().max(1.0) as usize;
        let mut offs: BTreeSet<usize> = (1..=band.min(d)).collect();
        while offs.len() < d.min(size - 1) {
            offs.insert(1 + rng.next_below(size - 1));
        }
        for i in 0..size {
            for &o in &offs {
                arcs.insert((starts[b] + i, starts[b] + (i + o) % size));
            }
        }
    }
    // Designated interface runs, completely and mutually linked.
    let ratio = (q / p).min(1.0);
    let width = |s: usize| ((s as f64) * ratio.powf(0.25)).round().clamp(1.0, s as f64) as usize;
    for b in 0..sizes.len() - 1 {
        let wa = width(sizes[b]);
        let wb = width(sizes[b + 1]);
        for i in 0..wa {
            for j in 0..wb {
                arcs.insert((starts[b] + i, starts[b + 1] + j));
                arcs.insert((starts[b + 1] + j, starts[b] + i));
            }
        }
    }

    let edges: Vec<(usize, usize, f64)> = arcs.into_iter().map(|(u, v)| (u, v, 1.0)).collect();
    let graph = Graph::build(n, &edges, Directedness::Directed)?;
    let partition = Partition::new(block_of)?;
    assert!(graph.is_strongly_connected());
    let roles = classify_roles(&graph, &partition)?;
    for block in partition.blocks() {
        assert!(block.iter().any(|&v| roles.boundary_nodes().contains(&v)));
    }
    Ok((graph, partition))
}

/// Profile components over strata where both profiles are defined.
fn profile_gap(a: &AssortProfile<f64>, b: &AssortProfile<f64>) -> f64 {
    let mut gap = 0.0f64;
    for (ea, eb) in a.entries.iter().zip(&b.entries) {
        if let (Ok(va), Ok(vb)) = (&ea.coefficient, &eb.coefficient) {
            gap = gap.max((va - vb).abs());
        }
    }
    gap
}

/// Grid search over small integer attributes on the two-triangle bridge for
/// a pair with equal pooled intra-group correlation but different profiles.
fn corollary_pair() -> Result<Fixture, GenError> {
    let graph = Graph::build(6, &bridge_edges(), Directedness::Undirected)?;
    let partition = bridge_partition();
    let roles = classify_roles(&graph, &partition)?;
    let strat = stratify_arcs(&graph, &partition, &roles)?;

    for alphabet in [3usize, 4] {
        // Candidates whose pooled covariance vanishes: their r_in values are
        // all equal (to zero) to within roundoff.
        let mut candidates: Vec<(Vec<f64>, AssortProfile<f64>)> = Vec::new();
        let total = alphabet.pow(6);
        for code in 0..total {
            let mut rest = code;
            let mut x = [0.0f64; 6];
            for slot in x.iter_mut() {
                *slot = (rest % alphabet) as f64;
                rest /= alphabet;
            }
            let report = match collapse_decomposition(&strat, &x, CollapseMode::UnweightedCounts) {
                Ok(r) => r,
                Err(_) => continue,
            };
            if report.r_in.is_err() {
                continue;
            }
            let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if report.cov_in.abs() > 1e-12 * scale * scale {
                continue;
            }
            if report.sd_tail_in * report.sd_head_in < 0.05 * scale * scale {
                continue;
            }
            let profile = profile_scalar(&strat, &x)?;
            candidates.push((x.to_vec(), profile));
        }
        for i in 0..candidates.len() {
            for j in (i + 1)..candidates.len() {
                if profile_gap(&candidates[i].1, &candidates[j].1) > 0.1 {
                    let a = candidates[i].0.clone();
                    let b = candidates[j].0.clone();
                    // Witness checks.
                    let ra = collapse_decomposition(&strat, &a, CollapseMode::UnweightedCounts)?
                        .r_in
                        .expect("candidate has defined r_in");
                    let rb = collapse_decomposition(&strat, &b, CollapseMode::UnweightedCounts)?
                        .r_in
                        .expect("candidate has defined r_in");
                    assert!((ra - rb).abs() < 1e-10);
                    return Ok(Fixture {
                        name: "corollary_pair".to_string(),
                        graph,
                        partition: Some(partition),
                        attributes: vec![("a".to_string(), a), ("b".to_string(), b)],
                    });
                }
            }
        }
    }
    Err(GenError::SearchFailed(
        "no attribute pair with equal r_in and profile gap > 0.1".into(),
    ))
}

/// Stochastic block model specification.
#[derive(Clone, Debug)]
pub struct SbmSpec {
    pub block_sizes: Vec<usize>,
    pub p_within: f64,
    pub q_between: f64,
    pub weight: f64,
    pub directedness: Directedness,
    pub seed: u64,
}

impl SbmSpec {
    fn validate(&self) -> Result<(), GenError> {
        if self.block_sizes.is_empty() || self.block_sizes.contains(&0) {
            return Err(GenError::InvalidSpec("block sizes must all be >= 1".into()));
        }
        for (name, p) in [("p_within", self.p_within), ("q_between", self.q_between)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(GenError::InvalidSpec(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if !(self.weight > 0.0 && self.weight.is_finite()) {
            return Err(GenError::InvalidSpec(format!("weight = {} must be positive", self.weight)));
        }
        Ok(())
    }
}

/// Planted-partition draw: every ordered (directed) or unordered
/// (undirected) cross-node pair realized independently with the within or
/// between probability, in row-major order with one draw per candidate.
pub fn sbm(spec: &SbmSpec) -> Result<(Graph, Partition), GenError> {
    spec.validate()?;
    let n: usize = spec.block_sizes.iter().sum();
    let mut block_of = Vec::with_capacity(n);
    for (b, &size) in spec.block_sizes.iter().enumerate() {
        block_of.extend(std::iter::repeat_n(b, size));
    }
    let mut rng = Rng64::new(spec.seed);
    let mut edges = Vec::new();
    for u in 0..n {
        let v_start = match spec.directedness {
            Directedness::Directed => 0,
            Directedness::Undirected => u + 1,
        };
        for v in v_start..n {
            if u == v {
                continue;
            }
            let p = if block_of[u] == block_of[v] { spec.p_within } else { spec.q_between };
            if rng.bernoulli(p) {
                edges.push((u, v, spec.weight));
            }
        }
    }
    let graph = Graph::build(n, &edges, spec.directedness)?;
    let partition = Partition::new(block_of)?;
    Ok((graph, partition))
}

/// One point of a conductance/dominance/sign sweep.
#[derive(Clone, Debug)]
pub struct SweepRecord {
    pub q: f64,
    pub replicate: usize,
    pub seed: u64,
    pub phi_max: Option<f64>,
    /// Smallest dominance gap over evaluable groups.
    pub min_gap: Option<f64>,
    pub r_b_to_i: Option<f64>,
    pub verdict: String,
}

/// Per-q aggregate over replicates.
#[derive(Clone, Debug)]
pub struct SweepSummary {
    pub q: f64,
    pub replicates: usize,
    /// Fraction of replicates where every evaluable group is dominant.
    pub dominance_fraction: f64,
    /// Fraction with a defined negative B->I component.
    pub negative_fraction: f64,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    /// Sorted by `q` ascending, then replicate.
    pub records: Vec<SweepRecord>,
    pub summaries: Vec<SweepSummary>,
}

fn sweep_task(base: &SbmSpec, q: f64, seed: u64, params: &SisParams<f64>) -> SweepRecord {
    let spec = SbmSpec { q_between: q, seed, ..base.clone() };
    let outcome = sbm(&spec).and_then(|(graph, partition)| {
        let walk = WalkSpec::auto(&graph);
        implication_chain(&graph, &partition, params, &walk).map_err(GenError::from)
    });
    match outcome {
        Ok(report) => {
            let min_gap = report
                .dominance
                .iter()
                .filter_map(|d| d.gap)
                .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
            let r_b_to_i = report.profile.b_to_i().and_then(|e| e.coefficient.ok());
            let verdict = if report.verdict.disease_free {
                "disease_free"
            } else if report.sign.is_none() {
                "no_b_to_i_arcs"
            } else if report.verdict.chain_holds {
                "chain_holds"
            } else if report.verdict.premises_hold {
                "conclusion_fails"
            } else {
                "premises_fail"
            };
            SweepRecord {
                q,
                replicate: 0,
                seed,
                phi_max: report.phi_max,
                min_gap,
                r_b_to_i,
                verdict: verdict.to_string(),
            }
        }
        Err(e) => SweepRecord {
            q,
            replicate: 0,
            seed,
            phi_max: None,
            min_gap: None,
            r_b_to_i: None,
            verdict: format!("error: {e}"),
        },
    }
}

/// Runs the implication chain over an SBM family for every `q` and
/// replicate; tasks may run concurrently (`jobs > 1`) without affecting the
/// output, which is ordered by `q` then replicate.
pub fn chain_sweep(
    base: &SbmSpec,
    q_values: &[f64],
    params: &SisParams<f64>,
    replicates: usize,
    jobs: usize,
) -> Result<SweepResult, GenError> {
    base.validate()?;
    if replicates == 0 {
        return Err(GenError::InvalidSpec("replicates must be >= 1".into()));
    }
    let mut qs: Vec<f64> = q_values.to_vec();
    if qs.is_empty() {
        return Err(GenError::InvalidSpec("q list must be nonempty".into()));
    }
    if qs.iter().any(|q| !(0.0..=1.0).contains(q)) {
        return Err(GenError::InvalidSpec("q values must lie in [0, 1]".into()));
    }
    qs.sort_by(|a, b| a.partial_cmp(b).expect("finite q"));

    let tasks: Vec<(usize, f64, usize, u64)> = qs
        .iter()
        .enumerate()
        .flat_map(|(qi, &q)| {
            (0..replicates).map(move |rep| {
                let index = (qi * replicates + rep) as u64;
                (qi, q, rep, Rng64::substream_seed(base.seed, index))
            })
        })
        .collect();

    let records = Mutex::new(vec![None; tasks.len()]);
    let cursor = AtomicUsize::new(0);
    let workers = jobs.max(1).min(tasks.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= tasks.len() {
                    break;
                }
                let (_, q, rep, seed) = tasks[i];
                let mut record = sweep_task(base, q, seed, params);
                record.replicate = rep;
                records.lock().expect("sweep mutex")[i] = Some(record);
            });
        }
    });
    let records: Vec<SweepRecord> = records
        .into_inner()
        .expect("sweep mutex")
        .into_iter()
        .map(|r| r.expect("every task ran"))
        .collect();

    let summaries = qs
        .iter()
        .map(|&q| {
            let group: Vec<&SweepRecord> = records.iter().filter(|r| r.q == q).collect();
            let dominated = group
                .iter()
                .filter(|r| r.verdict == "chain_holds" || r.verdict == "conclusion_fails")
                .count();
            let negative =
                group.iter().filter(|r| r.r_b_to_i.map(|v| v < 0.0).unwrap_or(false)).count();
            SweepSummary {
                q,
                replicates,
                dominance_fraction: dominated as f64 / group.len() as f64,
                negative_fraction: negative as f64 / group.len() as f64,
            }
        })
        .collect();

    Ok(SweepResult { records, summaries })
}
