//! Directed weighted graph representation.
//!
//! The [`Graph`] is the single source of truth for all masses and degrees.
//! Every formula downstream is stated in terms of the adjacency matrix
//! `A = (A_ij)`; the helper [`Graph::matrix_entries`] iterates the nonzero
//! entries of that matrix in both storage modes, so an undirected edge
//! `{u, v}` (stored once with `tail <= head`) contributes both `(u, v)` and
//! `(v, u)` while a self-loop contributes a single diagonal entry.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::num::{real, Real};

/// Storage and interpretation mode of a graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Directedness {
    Directed,
    Undirected,
}

/// One stored arc (directed) or edge (undirected, canonicalized `tail <= head`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc<T> {
    pub tail: usize,
    pub head: usize,
    pub weight: T,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("negative or NaN weight {weight} on arc ({tail}, {head})")]
    NegativeWeight { tail: usize, head: usize, weight: f64 },
    #[error("non-finite weight on arc ({tail}, {head})")]
    NonFiniteWeight { tail: usize, head: usize },
    #[error("node id {id} out of range for n = {n}")]
    NodeIdOutOfRange { id: usize, n: usize },
    #[error("graph has no arcs")]
    EmptyGraph,
    #[error("power iteration did not converge within {max_iters} iterations (best estimate {best})")]
    NonConvergence { max_iters: usize, best: f64 },
}

/// Per-node out/in strengths and the total edge mass `m`.
///
/// `total_mass` carries the 1/2 factor in the undirected case, so that `m`
/// counts each edge once.
#[derive(Clone, Debug)]
pub struct StrengthVectors<T> {
    pub out_strength: Vec<T>,
    pub in_strength: Vec<T>,
    pub total_mass: T,
}

/// Result of the dominant-eigenvalue power iteration.
///
/// `degraded` is set when the graph is not strongly connected, in which case
/// Perron-Frobenius uniqueness does not apply and the estimate may be less
/// reliable.
#[derive(Clone, Debug)]
pub struct SpectralRadiusEstimate<T> {
    pub value: T,
    pub iterations: usize,
    pub degraded: bool,
}

const POWER_ITER_CAP: usize = 100_000;

#[derive(Clone, Debug)]
pub struct Graph<T: Real> {
    n: usize,
    directedness: Directedness,
    arcs: Vec<Arc<T>>,
    /// Row `v` of the adjacency matrix: `(j, A_vj)`, sorted by `j`.
    rows: Vec<Vec<(usize, T)>>,
    /// Column `v` of the adjacency matrix: `(i, A_iv)`, sorted by `i`.
    cols: Vec<Vec<(usize, T)>>,
}

impl<T: Real> Graph<T> {
    /// Builds a graph from an edge list.
    ///
    /// Parallel entries are merged by weight summation, undirected edges are
    /// canonicalized to `tail <= head`, and zero-weight entries (after
    /// merging) are dropped.
    pub fn build(
        n: usize,
        edges: &[(usize, usize, T)],
        directedness: Directedness,
    ) -> Result<Self, GraphError> {
        let mut merged: BTreeMap<(usize, usize), T> = BTreeMap::new();
        for &(tail, head, weight) in edges {
            // Negated comparison also rejects NaN weights.
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(weight >= T::zero()) {
                return Err(GraphError::NegativeWeight {
                    tail,
                    head,
                    weight: weight.to_f64().unwrap_or(f64::NAN),
                });
            }
            if !weight.is_finite() {
                return Err(GraphError::NonFiniteWeight { tail, head });
            }
            if tail >= n {
                return Err(GraphError::NodeIdOutOfRange { id: tail, n });
            }
            if head >= n {
                return Err(GraphError::NodeIdOutOfRange { id: head, n });
            }
            let key = match directedness {
                Directedness::Directed => (tail, head),
                Directedness::Undirected => (tail.min(head), tail.max(head)),
            };
            *merged.entry(key).or_insert_with(T::zero) += weight;
        }
        let arcs: Vec<Arc<T>> = merged
            .into_iter()
            .filter(|&(_, w)| w > T::zero())
            .map(|((tail, head), weight)| Arc { tail, head, weight })
            .collect();

        let mut rows = vec![Vec::new(); n];
        let mut cols = vec![Vec::new(); n];
        for arc in &arcs {
            rows[arc.tail].push((arc.head, arc.weight));
            cols[arc.head].push((arc.tail, arc.weight));
            if directedness == Directedness::Undirected && arc.tail != arc.head {
                rows[arc.head].push((arc.tail, arc.weight));
                cols[arc.tail].push((arc.head, arc.weight));
            }
        }
        for v in 0..n {
            rows[v].sort_unstable_by_key(|&(j, _)| j);
            cols[v].sort_unstable_by_key(|&(i, _)| i);
        }

        Ok(Graph { n, directedness, arcs, rows, cols })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directedness(&self) -> Directedness {
        self.directedness
    }

    pub fn is_directed(&self) -> bool {
        self.directedness == Directedness::Directed
    }

    /// Stored arcs (directed) or edges (undirected, `tail <= head`).
    pub fn arcs(&self) -> &[Arc<T>] {
        &self.arcs
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    /// True when every stored weight equals 1.
    pub fn is_unweighted(&self) -> bool {
        self.arcs.iter().all(|a| a.weight == T::one())
    }

    /// Row `v` of the adjacency matrix as `(j, A_vj)` pairs.
    pub fn out_row(&self, v: usize) -> &[(usize, T)] {
        &self.rows[v]
    }

    /// Column `v` of the adjacency matrix as `(i, A_iv)` pairs.
    pub fn in_col(&self, v: usize) -> &[(usize, T)] {
        &self.cols[v]
    }

    /// All nonzero entries `(i, j, A_ij)` of the adjacency matrix in row-major
    /// order. Undirected edges appear in both orientations.
    pub fn matrix_entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, w)| (i, j, w)))
    }

    /// Total matrix mass `sum_ij A_ij`.
    pub fn matrix_mass(&self) -> T {
        self.matrix_entries().map(|(_, _, w)| w).sum()
    }

    /// Out/in strengths `k_i^out = sum_j A_ij`, `k_j^in = sum_i A_ij` and the
    /// total mass `m` (with the 1/2 factor iff undirected).
    pub fn strengths(&self) -> StrengthVectors<T> {
        let out_strength: Vec<T> = (0..self.n)
            .map(|v| self.rows[v].iter().map(|&(_, w)| w).sum())
            .collect();
        let in_strength: Vec<T> = (0..self.n)
            .map(|v| self.cols[v].iter().map(|&(_, w)| w).sum())
            .collect();
        let full: T = self.matrix_mass();
        let total_mass = match self.directedness {
            Directedness::Directed => full,
            Directedness::Undirected => full / real::<T>(2.0),
        };
        StrengthVectors { out_strength, in_strength, total_mass }
    }

    /// Distinct neighbors of `v` over in- and out-arcs, excluding `v` itself.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut nbrs: Vec<usize> = self.rows[v]
            .iter()
            .chain(self.cols[v].iter())
            .map(|&(u, _)| u)
            .filter(|&u| u != v)
            .collect();
        nbrs.sort_unstable();
        nbrs.dedup();
        nbrs
    }

    /// Spectral radius of the adjacency matrix by power iteration with the
    /// deterministic all-ones start vector.
    ///
    /// Iterates on `A + sI` (`s` = mean strength) so that periodic structure
    /// (cycles, bipartite graphs) cannot stall convergence.
    pub fn spectral_radius(&self, tol: T) -> Result<SpectralRadiusEstimate<T>, GraphError> {
        self.perron(tol).map(|(est, _)| est)
    }

    /// Spectral radius together with the (right) dominant eigenvector,
    /// normalized to unit infinity norm.
    pub fn perron_vector(&self, tol: T) -> Result<(SpectralRadiusEstimate<T>, Vec<T>), GraphError> {
        self.perron(tol)
    }

    fn perron(&self, tol: T) -> Result<(SpectralRadiusEstimate<T>, Vec<T>), GraphError> {
        if self.arcs.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let n = self.n;
        let shift = self.matrix_mass() / real::<T>(n as f64);
        let degraded = !self.is_strongly_connected();

        // Nilpotent adjacency (DAGs): A^n annihilates every vector, and the
        // shifted iteration below would stall on the defective eigenvalue.
        let mut probe = vec![T::one(); n];
        for step in 1..=n {
            let mut next = vec![T::zero(); n];
            for (i, row) in self.rows.iter().enumerate() {
                for &(j, w) in row {
                    next[i] += w * probe[j];
                }
            }
            let norm: T = next.iter().copied().sum();
            if norm == T::zero() {
                let est =
                    SpectralRadiusEstimate { value: T::zero(), iterations: step, degraded };
                return Ok((est, vec![T::one(); n]));
            }
            for v in next.iter_mut() {
                *v /= norm;
            }
            probe = next;
        }

        let mut x = vec![T::one() / real::<T>(n as f64); n];
        let mut estimate = T::zero();
        for iter in 1..=POWER_ITER_CAP {
            // y = (A + shift I) x
            let mut y = vec![T::zero(); n];
            for (i, row) in self.rows.iter().enumerate() {
                let mut acc = shift * x[i];
                for &(j, w) in row {
                    acc += w * x[j];
                }
                y[i] = acc;
            }
            // Rayleigh-style estimate on the shifted matrix.
            let xx: T = x.iter().map(|&v| v * v).sum();
            let xy: T = x.iter().zip(&y).map(|(&a, &b)| a * b).sum();
            let mu = xy / xx;
            estimate = mu - shift;

            let mut resid = T::zero();
            let mut xmax = T::zero();
            for i in 0..n {
                resid = resid.max((y[i] - mu * x[i]).abs());
                xmax = xmax.max(x[i].abs());
            }
            let norm: T = y.iter().copied().sum();
            for i in 0..n {
                x[i] = y[i] / norm;
            }
            if resid <= tol * xmax * T::one().max(estimate.abs()) {
                let scale: T = x.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
                let vector = x.iter().map(|&v| v / scale).collect();
                return Ok((
                    SpectralRadiusEstimate { value: estimate, iterations: iter, degraded },
                    vector,
                ));
            }
        }
        Err(GraphError::NonConvergence {
            max_iters: POWER_ITER_CAP,
            best: estimate.to_f64().unwrap_or(f64::NAN),
        })
    }

    /// Strong connectivity (ordinary connectivity for undirected graphs) by
    /// forward and backward reachability from node 0.
    pub fn is_strongly_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let forward = self.reach(0, false);
        if forward.iter().any(|&r| !r) {
            return false;
        }
        if self.directedness == Directedness::Undirected {
            return true;
        }
        let backward = self.reach(0, true);
        backward.iter().all(|&r| r)
    }

    fn reach(&self, start: usize, reversed: bool) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            let adjacent = if reversed { &self.cols[v] } else { &self.rows[v] };
            for &(u, _) in adjacent {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }

    /// Graph with every arc reversed (the adjacency transpose). Undirected
    /// graphs are returned unchanged.
    pub fn transpose(&self) -> Graph<T> {
        if self.directedness == Directedness::Undirected {
            return self.clone();
        }
        let edges: Vec<(usize, usize, T)> =
            self.arcs.iter().map(|a| (a.head, a.tail, a.weight)).collect();
        Graph::build(self.n, &edges, Directedness::Directed)
            .expect("transpose of a valid graph is valid")
    }

    /// Undirected projection `A'_uv = A_uv + A_vu` for `u != v`; self-loops
    /// are dropped.
    pub fn undirected_projection(&self) -> Graph<T> {
        let mut acc: BTreeMap<(usize, usize), T> = BTreeMap::new();
        for (i, j, w) in self.matrix_entries() {
            if i == j {
                continue;
            }
            *acc.entry((i.min(j), i.max(j))).or_insert_with(T::zero) += w;
        }
        let edges: Vec<(usize, usize, T)> =
            acc.into_iter().map(|((u, v), w)| (u, v, w)).collect();
        Graph::build(self.n, &edges, Directedness::Undirected)
            .expect("projection of a valid graph is valid")
    }
}
