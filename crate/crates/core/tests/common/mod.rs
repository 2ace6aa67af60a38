//! Shared test oracles and seeded instance generators.
//!
//! Every oracle here is deliberately a different computation route from the
//! library: correlations run over explicit pair lists with one-pass moment
//! sums, modularity is the O(n^2) double loop, mixing matrices are built
//! from a dense adjacency with roles re-derived from the definition.
#![allow(dead_code)] // each test binary uses a different subset

use ibnet::genlab::Rng64;
use ibnet::graph::Directedness;
use ibnet::stratify::{Partition, Stratification, Stratum};

pub type Graph = ibnet::Graph;

/// Weighted Pearson correlation over an explicit `(x, y, weight)` pair list,
/// using one-pass raw moments (the implementation uses two-pass centered
/// moments over strength vectors).
pub fn pair_pearson(pairs: &[(f64, f64, f64)]) -> Option<f64> {
    let total: f64 = pairs.iter().map(|p| p.2).sum();
    if total <= 0.0 {
        return None;
    }
    let mut ex = 0.0;
    let mut ey = 0.0;
    let mut exx = 0.0;
    let mut eyy = 0.0;
    let mut exy = 0.0;
    let mut scale = 0.0f64;
    for &(x, y, w) in pairs {
        ex += w * x;
        ey += w * y;
        exx += w * x * x;
        eyy += w * y * y;
        exy += w * x * y;
        scale = scale.max(x.abs()).max(y.abs());
    }
    ex /= total;
    ey /= total;
    let vx = exx / total - ex * ex;
    let vy = eyy / total - ey * ey;
    let floor = 1e-14 * scale * scale;
    if vx <= floor || vy <= floor {
        return None;
    }
    Some((exy / total - ex * ey) / (vx * vy).sqrt())
}

/// Weighted covariance (and means) over a pair list.
pub fn pair_covariance(pairs: &[(f64, f64, f64)]) -> Option<(f64, f64, f64)> {
    let total: f64 = pairs.iter().map(|p| p.2).sum();
    if total <= 0.0 {
        return None;
    }
    let ex: f64 = pairs.iter().map(|&(x, _, w)| w * x).sum::<f64>() / total;
    let ey: f64 = pairs.iter().map(|&(_, y, w)| w * y).sum::<f64>() / total;
    let exy: f64 = pairs.iter().map(|&(x, y, w)| w * x * y).sum::<f64>() / total;
    Some((exy - ex * ey, ex, ey))
}

/// Pair list of one stratum's matrix entries under an attribute.
pub fn stratum_pairs(strat: &Stratification<f64>, stratum: Stratum, x: &[f64]) -> Vec<(f64, f64, f64)> {
    strat
        .matrix_entries_of(stratum)
        .map(|(i, j, w)| (x[i], x[j], w))
        .collect()
}

/// Pair list of the full graph's matrix entries.
pub fn graph_pairs(g: &Graph, x: &[f64]) -> Vec<(f64, f64, f64)> {
    g.matrix_entries().map(|(i, j, w)| (x[i], x[j], w)).collect()
}

/// Dense adjacency matrix.
pub fn dense_adjacency(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.n();
    let mut a = vec![vec![0.0; n]; n];
    for (i, j, w) in g.matrix_entries() {
        a[i][j] += w;
    }
    a
}

/// O(n^2) modularity evaluation straight from the definition.
pub fn brute_modularity(g: &Graph, p: &Partition, gamma: f64) -> f64 {
    let a = dense_adjacency(g);
    let n = g.n();
    let m: f64 = a.iter().flatten().sum();
    let kout: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let kin: Vec<f64> = (0..n).map(|j| (0..n).map(|i| a[i][j]).sum()).collect();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if p.block_of(i) == p.block_of(j) {
                q += a[i][j] - gamma * kout[i] * kin[j] / m;
            }
        }
    }
    q / m
}

/// Interior/boundary roles straight from the definition on the dense matrix.
pub fn brute_roles(g: &Graph, p: &Partition) -> Vec<bool> {
    // true = interior
    let a = dense_adjacency(g);
    let n = g.n();
    (0..n)
        .map(|v| {
            (0..n)
                .filter(|&u| u != v && (a[v][u] > 0.0 || a[u][v] > 0.0))
                .all(|u| p.block_of(u) == p.block_of(v))
        })
        .collect()
}

/// Categorical mixing coefficient of one stratum via a dense double loop with
/// definition-derived roles; returns `None` when undefined.
pub fn brute_stratum_categorical(
    g: &Graph,
    p: &Partition,
    stratum: Stratum,
    labels: &[usize],
) -> Option<f64> {
    let a = dense_adjacency(g);
    let interior = brute_roles(g, p);
    let n = g.n();
    let undirected = g.directedness() == Directedness::Undirected;
    let in_stratum = |i: usize, j: usize| -> bool {
        let key = match (interior[i], interior[j]) {
            (true, true) => Stratum::InteriorInterior,
            (true, false) => Stratum::InteriorBoundary,
            (false, true) => {
                if undirected {
                    Stratum::InteriorBoundary
                } else {
                    Stratum::BoundaryInterior
                }
            }
            (false, false) => Stratum::BoundaryBoundary,
        };
        key == stratum
    };
    let l = labels.iter().max().map_or(0, |&k| k + 1);
    let mut e = vec![vec![0.0; l]; l];
    let mut mass = 0.0;
    for i in 0..n {
        for j in 0..n {
            if a[i][j] > 0.0 && in_stratum(i, j) {
                e[labels[i]][labels[j]] += a[i][j];
                mass += a[i][j];
            }
        }
    }
    if mass <= 0.0 {
        return None;
    }
    let mut trace = 0.0;
    let mut ab = 0.0;
    for p_idx in 0..l {
        trace += e[p_idx][p_idx] / mass;
        let ap: f64 = (0..l).map(|q| e[p_idx][q]).sum::<f64>() / mass;
        let bp: f64 = (0..l).map(|q| e[q][p_idx]).sum::<f64>() / mass;
        ab += ap * bp;
    }
    if 1.0 - ab <= 1e-14 {
        return None;
    }
    Some((trace - ab) / (1.0 - ab))
}

/// Random graph: each candidate pair kept with probability `density`.
pub fn rand_graph(
    rng: &mut Rng64,
    n: usize,
    density: f64,
    directedness: Directedness,
    weighted: bool,
) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        let start = match directedness {
            Directedness::Directed => 0,
            Directedness::Undirected => u + 1,
        };
        for v in start..n {
            if u == v {
                continue;
            }
            if rng.bernoulli(density) {
                let w = if weighted { 0.25 + 2.0 * rng.next_f64() } else { 1.0 };
                edges.push((u, v, w));
            }
        }
    }
    Graph::build(n, &edges, directedness).expect("random graph is valid")
}

/// Random digraph made strongly connected by a Hamiltonian cycle overlay.
pub fn strongly_connected_digraph(rng: &mut Rng64, n: usize, density: f64, weighted: bool) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.bernoulli(density) {
                let w = if weighted { 0.25 + 2.0 * rng.next_f64() } else { 1.0 };
                edges.push((u, v, w));
            }
        }
    }
    for u in 0..n {
        edges.push((u, (u + 1) % n, 1.0));
    }
    Graph::build(n, &edges, Directedness::Directed).expect("valid digraph")
}

/// Random connected undirected graph: random spanning tree plus extras.
pub fn connected_undirected(rng: &mut Rng64, n: usize, extra_density: f64) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        let parent = rng.next_below(v);
        edges.push((parent, v, 1.0));
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.bernoulli(extra_density) {
                edges.push((u, v, 1.0));
            }
        }
    }
    Graph::build(n, &edges, Directedness::Undirected).expect("valid graph")
}

/// Random partition into at most `max_k` nonempty contiguous blocks.
pub fn rand_partition(rng: &mut Rng64, n: usize, max_k: usize) -> Partition {
    let k = 1 + rng.next_below(max_k.min(n));
    let mut assignment: Vec<usize> = (0..n).map(|v| if v < k { v } else { rng.next_below(k) }).collect();
    // Shuffle so the forced representatives are not always the low ids.
    for i in (1..n).rev() {
        let j = rng.next_below(i + 1);
        assignment.swap(i, j);
    }
    // Re-force nonemptiness after the shuffle (shuffle preserves content, so
    // all k block labels are still present), then normalize to contiguous.
    let mut seen = vec![usize::MAX; k];
    let mut next = 0;
    for b in assignment.iter_mut() {
        if seen[*b] == usize::MAX {
            seen[*b] = next;
            next += 1;
        }
        *b = seen[*b];
    }
    Partition::new(assignment).expect("valid partition")
}

/// Random attribute; `style % 3`: continuous, small integers, or binary.
pub fn rand_attribute(rng: &mut Rng64, n: usize, style: u64) -> Vec<f64> {
    (0..n)
        .map(|_| match style % 3 {
            0 => rng.next_f64() * 4.0 - 2.0,
            1 => rng.next_below(3) as f64,
            _ => rng.next_below(2) as f64,
        })
        .collect()
}
