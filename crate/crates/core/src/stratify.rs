//! Partitions, interior/boundary roles, and the canonical arc stratification.
//!
//! A node is interior when every in- and out-neighbor (other than itself)
//! lies in its own block; otherwise it is boundary. Arcs then fall into the
//! strata I->I, I->B, B->I, B->B (directed) or II, IB, BB (undirected). The
//! first three directed strata are necessarily intra-group; B->B may cross
//! groups.

use ndarray::Array2;
use thiserror::Error;

use crate::graph::{Directedness, Graph};
use crate::num::Real;

#[derive(Debug, Error)]
pub enum StratifyError {
    #[error("partition covers {got} nodes but the graph has {expected}")]
    PartitionSizeMismatch { expected: usize, got: usize },
    #[error("block indices are not contiguous: block {block} is empty (K = {block_count})")]
    EmptyBlock { block: usize, block_count: usize },
    #[error("partition of an empty node set")]
    EmptyPartition,
    #[error("roles were not derived from this graph and partition")]
    RoleMismatch,
    #[error("attribute/vector length {got} does not match node count {expected}")]
    SizeMismatch { expected: usize, got: usize },
}

/// Block membership for every node; block indices are contiguous `0..K` and
/// every block is nonempty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    block_of: Vec<usize>,
    block_count: usize,
}

impl Partition {
    pub fn new(block_of: Vec<usize>) -> Result<Self, StratifyError> {
        if block_of.is_empty() {
            return Err(StratifyError::EmptyPartition);
        }
        let block_count = block_of.iter().max().copied().unwrap_or(0) + 1;
        let mut seen = vec![false; block_count];
        for &b in &block_of {
            seen[b] = true;
        }
        if let Some(block) = seen.iter().position(|&s| !s) {
            return Err(StratifyError::EmptyBlock { block, block_count });
        }
        Ok(Partition { block_of, block_count })
    }

    /// Builds a partition from explicit block node lists.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self, StratifyError> {
        let mut block_of = vec![usize::MAX; n];
        for (b, nodes) in blocks.iter().enumerate() {
            for &v in nodes {
                block_of[v] = b;
            }
        }
        if block_of.contains(&usize::MAX) {
            return Err(StratifyError::PartitionSizeMismatch {
                expected: n,
                got: block_of.iter().filter(|&&b| b != usize::MAX).count(),
            });
        }
        Partition::new(block_of)
    }

    pub fn len(&self) -> usize {
        self.block_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block_of.is_empty()
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn block_of(&self, v: usize) -> usize {
        self.block_of[v]
    }

    pub fn assignments(&self) -> &[usize] {
        &self.block_of
    }

    /// Node lists per block, each sorted ascending.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.block_count];
        for (v, &b) in self.block_of.iter().enumerate() {
            blocks[b].push(v);
        }
        blocks
    }

    /// Applies a permutation of block indices (`perm[old] = new`).
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self, StratifyError> {
        Partition::new(self.block_of.iter().map(|&b| perm[b]).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Interior,
    Boundary,
}

/// Interior/boundary classification of every node for a fixed partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeRoles {
    role_of: Vec<Role>,
}

impl NodeRoles {
    pub fn role_of(&self, v: usize) -> Role {
        self.role_of[v]
    }

    pub fn roles(&self) -> &[Role] {
        &self.role_of
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        self.nodes_with(Role::Interior)
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        self.nodes_with(Role::Boundary)
    }

    fn nodes_with(&self, role: Role) -> Vec<usize> {
        self.role_of
            .iter()
            .enumerate()
            .filter(|&(_, &r)| r == role)
            .map(|(v, _)| v)
            .collect()
    }
}

/// Arc stratum by endpoint roles. Undirected graphs use only
/// `InteriorInterior`, `InteriorBoundary` and `BoundaryBoundary`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stratum {
    InteriorInterior,
    InteriorBoundary,
    BoundaryInterior,
    BoundaryBoundary,
}

impl Stratum {
    pub const DIRECTED: [Stratum; 4] = [
        Stratum::InteriorInterior,
        Stratum::InteriorBoundary,
        Stratum::BoundaryInterior,
        Stratum::BoundaryBoundary,
    ];
    pub const UNDIRECTED: [Stratum; 3] = [
        Stratum::InteriorInterior,
        Stratum::InteriorBoundary,
        Stratum::BoundaryBoundary,
    ];

    pub fn all(directedness: Directedness) -> &'static [Stratum] {
        match directedness {
            Directedness::Directed => &Self::DIRECTED,
            Directedness::Undirected => &Self::UNDIRECTED,
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Stratum::InteriorInterior => 0,
            Stratum::InteriorBoundary => 1,
            Stratum::BoundaryInterior => 2,
            Stratum::BoundaryBoundary => 3,
        }
    }

    pub fn label(self, directedness: Directedness) -> &'static str {
        match (directedness, self) {
            (Directedness::Directed, Stratum::InteriorInterior) => "I->I",
            (Directedness::Directed, Stratum::InteriorBoundary) => "I->B",
            (Directedness::Directed, Stratum::BoundaryInterior) => "B->I",
            (Directedness::Directed, Stratum::BoundaryBoundary) => "B->B",
            (Directedness::Undirected, Stratum::InteriorInterior) => "II",
            (Directedness::Undirected, Stratum::InteriorBoundary) => "IB",
            (Directedness::Undirected, Stratum::BoundaryInterior) => "IB",
            (Directedness::Undirected, Stratum::BoundaryBoundary) => "BB",
        }
    }
}

/// Per-arc stratum labels together with per-stratum masses and
/// type-restricted strengths. Self-contained: carries copies of the arcs,
/// roles and block assignments it was derived from.
#[derive(Clone, Debug)]
pub struct Stratification<T> {
    directedness: Directedness,
    n: usize,
    block_of: Vec<usize>,
    block_count: usize,
    roles: Vec<Role>,
    /// `(tail, head, weight, stratum)` per stored arc.
    arcs: Vec<(usize, usize, T, Stratum)>,
    /// Matrix mass `sum_ij A^(T)_ij` per stratum (index by `Stratum::index`).
    masses: [T; 4],
    /// Stored-arc counts `|E_T|` per stratum.
    counts: [usize; 4],
    /// `k_i^{out,T}` per stratum.
    out_strength: [Vec<T>; 4],
    /// `k_j^{in,T}` per stratum.
    in_strength: [Vec<T>; 4],
}

impl<T: Real> Stratification<T> {
    pub fn directedness(&self) -> Directedness {
        self.directedness
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn strata(&self) -> &'static [Stratum] {
        Stratum::all(self.directedness)
    }

    pub fn block_of(&self) -> &[usize] {
        &self.block_of
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn stratum_of_arc(&self, arc_index: usize) -> Stratum {
        self.arcs[arc_index].3
    }

    pub fn arcs(&self) -> &[(usize, usize, T, Stratum)] {
        &self.arcs
    }

    /// Matrix mass `m_T = sum_ij A^(T)_ij`. Summed over all strata this
    /// equals the full matrix mass (2m for undirected graphs).
    pub fn mass(&self, stratum: Stratum) -> T {
        self.masses[stratum.index()]
    }

    /// Number of stored arcs (edges) in the stratum.
    pub fn count(&self, stratum: Stratum) -> usize {
        self.counts[stratum.index()]
    }

    pub fn out_strength(&self, stratum: Stratum) -> &[T] {
        &self.out_strength[stratum.index()]
    }

    pub fn in_strength(&self, stratum: Stratum) -> &[T] {
        &self.in_strength[stratum.index()]
    }

    pub fn is_unweighted(&self) -> bool {
        self.arcs.iter().all(|&(_, _, w, _)| w == T::one())
    }

    /// Nonzero entries of the type-restricted adjacency matrix `A^(T)`.
    /// Undirected off-diagonal edges yield both orientations.
    pub fn matrix_entries_of(&self, stratum: Stratum) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        let undirected = self.directedness == Directedness::Undirected;
        self.arcs
            .iter()
            .filter(move |&&(_, _, _, s)| s == stratum)
            .flat_map(move |&(t, h, w, _)| {
                let mirrored = undirected && t != h;
                std::iter::once((t, h, w)).chain(mirrored.then_some((h, t, w)))
            })
    }
}

fn check_sizes<T: Real>(g: &Graph<T>, p: &Partition) -> Result<(), StratifyError> {
    if p.len() != g.n() {
        return Err(StratifyError::PartitionSizeMismatch { expected: g.n(), got: p.len() });
    }
    Ok(())
}

/// Classifies every node as interior or boundary. Isolated nodes are
/// interior (the condition is vacuous), and a self-loop never makes a node
/// boundary.
pub fn classify_roles<T: Real>(g: &Graph<T>, p: &Partition) -> Result<NodeRoles, StratifyError> {
    check_sizes(g, p)?;
    let role_of = (0..g.n())
        .map(|v| {
            let home = p.block_of(v);
            if g.neighbors(v).iter().all(|&u| p.block_of(u) == home) {
                Role::Interior
            } else {
                Role::Boundary
            }
        })
        .collect();
    Ok(NodeRoles { role_of })
}

fn stratum_for<T: Real>(
    g: &Graph<T>,
    roles: &NodeRoles,
    tail: usize,
    head: usize,
) -> Stratum {
    match (roles.role_of(tail), roles.role_of(head)) {
        (Role::Interior, Role::Interior) => Stratum::InteriorInterior,
        (Role::Interior, Role::Boundary) => Stratum::InteriorBoundary,
        (Role::Boundary, Role::Interior) => match g.directedness() {
            Directedness::Directed => Stratum::BoundaryInterior,
            // Undirected edges have no orientation; one interior endpoint
            // means IB.
            Directedness::Undirected => Stratum::InteriorBoundary,
        },
        (Role::Boundary, Role::Boundary) => Stratum::BoundaryBoundary,
    }
}

/// Labels every arc with its stratum and accumulates per-stratum masses and
/// type-restricted strengths.
pub fn stratify_arcs<T: Real>(
    g: &Graph<T>,
    p: &Partition,
    roles: &NodeRoles,
) -> Result<Stratification<T>, StratifyError> {
    check_sizes(g, p)?;
    if *roles != classify_roles(g, p)? {
        return Err(StratifyError::RoleMismatch);
    }
    let n = g.n();
    let undirected = g.directedness() == Directedness::Undirected;
    let mut arcs = Vec::with_capacity(g.arc_count());
    let mut masses = [T::zero(); 4];
    let mut counts = [0usize; 4];
    let mut out_strength: [Vec<T>; 4] = std::array::from_fn(|_| vec![T::zero(); n]);
    let mut in_strength: [Vec<T>; 4] = std::array::from_fn(|_| vec![T::zero(); n]);

    for arc in g.arcs() {
        let s = stratum_for(g, roles, arc.tail, arc.head);
        let idx = s.index();
        arcs.push((arc.tail, arc.head, arc.weight, s));
        counts[idx] += 1;
        masses[idx] += arc.weight;
        out_strength[idx][arc.tail] += arc.weight;
        in_strength[idx][arc.head] += arc.weight;
        if undirected && arc.tail != arc.head {
            masses[idx] += arc.weight;
            out_strength[idx][arc.head] += arc.weight;
            in_strength[idx][arc.tail] += arc.weight;
        }
    }

    Ok(Stratification {
        directedness: g.directedness(),
        n,
        block_of: p.assignments().to_vec(),
        block_count: p.block_count(),
        roles: roles.roles().to_vec(),
        arcs,
        masses,
        counts,
        out_strength,
        in_strength,
    })
}

/// Type-label masses `m_T^{rs}`: the edge weight within stratum `T` flowing
/// from label `r` to label `s` of the attribute-induced partition `Q`.
#[derive(Clone, Debug)]
pub struct RefinementMasses<T> {
    directedness: Directedness,
    /// L x L table per stratum, indexed by `Stratum::index`.
    tables: [Array2<T>; 4],
}

impl<T: Real> RefinementMasses<T> {
    pub fn table(&self, stratum: Stratum) -> &Array2<T> {
        &self.tables[stratum.index()]
    }

    /// Marginal `sum_rs m_T^{rs}`, equal to the stratum mass `m_T`.
    pub fn total(&self, stratum: Stratum) -> T {
        self.tables[stratum.index()].iter().copied().sum()
    }

    pub fn strata(&self) -> &'static [Stratum] {
        Stratum::all(self.directedness)
    }
}

/// Computes the refinement masses `m_T^{rs}` of the stratifying partition `P`
/// against a second partition `Q`.
pub fn refinement_masses<T: Real>(
    g: &Graph<T>,
    p: &Partition,
    q: &Partition,
) -> Result<RefinementMasses<T>, StratifyError> {
    check_sizes(g, p)?;
    check_sizes(g, q)?;
    let roles = classify_roles(g, p)?;
    let strat = stratify_arcs(g, p, &roles)?;
    let l = q.block_count();
    let mut tables: [Array2<T>; 4] = std::array::from_fn(|_| Array2::zeros((l, l)));
    for &stratum in strat.strata() {
        for (i, j, w) in strat.matrix_entries_of(stratum) {
            tables[stratum.index()][(q.block_of(i), q.block_of(j))] += w;
        }
    }
    Ok(RefinementMasses { directedness: g.directedness(), tables })
}

/// Strength direction selector for participation coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
}

/// Guimera-Amaral participation coefficient of node `v`:
/// `1 - sum_k (k_{v,V_k} / k_v)^2`. `None` when the total strength vanishes.
pub fn participation<T: Real>(
    g: &Graph<T>,
    p: &Partition,
    v: usize,
    direction: Direction,
) -> Result<Option<T>, StratifyError> {
    check_sizes(g, p)?;
    let entries = match direction {
        Direction::Out => g.out_row(v),
        Direction::In => g.in_col(v),
    };
    let mut per_block = vec![T::zero(); p.block_count()];
    let mut total = T::zero();
    for &(u, w) in entries {
        per_block[p.block_of(u)] += w;
        total += w;
    }
    if total <= T::zero() {
        return Ok(None);
    }
    let sum_sq: T = per_block.iter().map(|&s| (s / total) * (s / total)).sum();
    Ok(Some(T::one() - sum_sq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Directedness;

    fn bridge() -> (Graph<f64>, Partition) {
        let edges = [
            (0, 1, 1.0),
            (0, 2, 1.0),
            (1, 2, 1.0),
            (3, 4, 1.0),
            (3, 5, 1.0),
            (4, 5, 1.0),
            (2, 3, 1.0),
        ];
        let g = Graph::<f64>::build(6, &edges, Directedness::Undirected).unwrap();
        let p = Partition::new(vec![0, 0, 0, 1, 1, 1]).unwrap();
        (g, p)
    }

    fn bridge_directed() -> (Graph<f64>, Partition) {
        let edges = [
            (0, 1, 1.0),
            (1, 2, 1.0),
            (2, 0, 1.0),
            (3, 4, 1.0),
            (4, 5, 1.0),
            (5, 3, 1.0),
            (2, 3, 1.0),
        ];
        let g = Graph::<f64>::build(6, &edges, Directedness::Directed).unwrap();
        let p = Partition::new(vec![0, 0, 0, 1, 1, 1]).unwrap();
        (g, p)
    }

    #[test]
    fn partition_rejects_gaps() {
        assert!(matches!(
            Partition::new(vec![0, 2, 2]),
            Err(StratifyError::EmptyBlock { block: 1, .. })
        ));
    }

    #[test]
    fn roles_on_bridge() {
        let (g, p) = bridge();
        let roles = classify_roles(&g, &p).unwrap();
        assert_eq!(roles.interior_nodes(), vec![0, 1, 4, 5]);
        assert_eq!(roles.boundary_nodes(), vec![2, 3]);
    }

    #[test]
    fn roles_k22_all_boundary() {
        let edges = [(0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0)];
        let g = Graph::<f64>::build(4, &edges, Directedness::Undirected).unwrap();
        let p = Partition::new(vec![0, 0, 1, 1]).unwrap();
        let roles = classify_roles(&g, &p).unwrap();
        assert_eq!(roles.boundary_nodes(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn isolated_node_is_interior() {
        let g = Graph::<f64>::build(1, &[], Directedness::Directed).unwrap();
        let p = Partition::new(vec![0]).unwrap();
        let roles = classify_roles(&g, &p).unwrap();
        assert_eq!(roles.role_of(0), Role::Interior);
    }

    #[test]
    fn self_loop_does_not_force_boundary() {
        let g = Graph::<f64>::build(2, &[(0, 0, 1.0), (0, 1, 1.0)], Directedness::Directed).unwrap();
        let p = Partition::new(vec![0, 1]).unwrap();
        let roles = classify_roles(&g, &p).unwrap();
        // 0 is boundary via the cross arc, not the self-loop.
        assert_eq!(roles.role_of(0), Role::Boundary);
        let g2 = Graph::<f64>::build(2, &[(0, 0, 1.0)], Directedness::Directed).unwrap();
        let p2 = Partition::new(vec![0, 0]).unwrap();
        let roles2 = classify_roles(&g2, &p2).unwrap();
        assert_eq!(roles2.role_of(0), Role::Interior);
    }

    #[test]
    fn stratify_bridge_counts() {
        let (g, p) = bridge();
        let roles = classify_roles(&g, &p).unwrap();
        let s = stratify_arcs(&g, &p, &roles).unwrap();
        assert_eq!(s.count(Stratum::InteriorInterior), 2);
        assert_eq!(s.count(Stratum::InteriorBoundary), 4);
        assert_eq!(s.count(Stratum::BoundaryBoundary), 1);
        let total_mass: f64 = s.strata().iter().map(|&t| s.mass(t)).sum();
        assert_eq!(total_mass, 14.0); // 2m, each edge in both orientations
    }

    #[test]
    fn stratify_k22_all_bb() {
        let edges = [(0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0)];
        let g = Graph::<f64>::build(4, &edges, Directedness::Undirected).unwrap();
        let p = Partition::new(vec![0, 0, 1, 1]).unwrap();
        let roles = classify_roles(&g, &p).unwrap();
        let s = stratify_arcs(&g, &p, &roles).unwrap();
        assert_eq!(s.count(Stratum::InteriorInterior), 0);
        assert_eq!(s.count(Stratum::InteriorBoundary), 0);
        assert_eq!(s.count(Stratum::BoundaryBoundary), 4);
    }

    #[test]
    fn stratify_bridge_directed() {
        let (g, p) = bridge_directed();
        let roles = classify_roles(&g, &p).unwrap();
        let s = stratify_arcs(&g, &p, &roles).unwrap();
        assert_eq!(s.mass(Stratum::BoundaryBoundary), 1.0);
        assert_eq!(s.mass(Stratum::InteriorBoundary), 2.0);
        assert_eq!(s.mass(Stratum::BoundaryInterior), 2.0);
        assert_eq!(s.mass(Stratum::InteriorInterior), 2.0);
        let total: f64 = s.strata().iter().map(|&t| s.mass(t)).sum();
        assert_eq!(total, 7.0);
    }

    #[test]
    fn stratify_rejects_foreign_roles() {
        let (g, p) = bridge();
        let other = Partition::new(vec![0, 0, 0, 0, 0, 1]).unwrap();
        let foreign = classify_roles(&g, &other).unwrap();
        assert!(matches!(stratify_arcs(&g, &p, &foreign), Err(StratifyError::RoleMismatch)));
    }

    #[test]
    fn refinement_marginals_match_masses() {
        let (g, p) = bridge();
        let q = Partition::new(vec![0, 0, 0, 0, 1, 1]).unwrap();
        let roles = classify_roles(&g, &p).unwrap();
        let s = stratify_arcs(&g, &p, &roles).unwrap();
        let r = refinement_masses(&g, &p, &q).unwrap();
        for &t in s.strata() {
            assert_eq!(r.total(t), s.mass(t));
        }
    }

    #[test]
    fn refinement_q_equals_p_is_diagonal_on_intra_strata() {
        let (g, p) = bridge_directed();
        let r = refinement_masses(&g, &p, &p).unwrap();
        for &t in &[Stratum::InteriorInterior, Stratum::InteriorBoundary, Stratum::BoundaryInterior]
        {
            let tbl = r.table(t);
            for ((i, j), &v) in tbl.indexed_iter() {
                if i != j {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn refinement_single_block_collapses() {
        let (g, p) = bridge();
        let q = Partition::new(vec![0; 6]).unwrap();
        let roles = classify_roles(&g, &p).unwrap();
        let s = stratify_arcs(&g, &p, &roles).unwrap();
        let r = refinement_masses(&g, &p, &q).unwrap();
        for &t in s.strata() {
            assert_eq!(r.table(t)[(0, 0)], s.mass(t));
        }
    }

    #[test]
    fn participation_examples() {
        let (g, p) = bridge();
        // Bridge node 2: strength 2 inside its block, 1 across.
        let p2 = participation(&g, &p, 2, Direction::Out).unwrap().unwrap();
        assert!((p2 - 4.0 / 9.0).abs() < 1e-15);
        // Interior node 0: everything inside one block.
        let p0 = participation(&g, &p, 0, Direction::Out).unwrap().unwrap();
        assert_eq!(p0, 0.0);
        // Zero-strength node.
        let g2 = Graph::<f64>::build(2, &[(0, 1, 1.0)], Directedness::Directed).unwrap();
        let pp = Partition::new(vec![0, 1]).unwrap();
        assert_eq!(participation(&g2, &pp, 0, Direction::In).unwrap(), None);
    }

    #[test]
    fn participation_equal_split() {
        // Node 0 sends unit weight to each of 3 blocks.
        let edges = [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)];
        let g = Graph::<f64>::build(4, &edges, Directedness::Directed).unwrap();
        let p = Partition::new(vec![0, 0, 1, 2]).unwrap();
        // Out-strengths to blocks: (1, 1, 1) -> P = 1 - 3*(1/3)^2 = 2/3.
        let v = participation(&g, &p, 0, Direction::Out).unwrap().unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn relabeling_leaves_roles_unchanged() {
        let (g, p) = bridge_directed();
        let roles = classify_roles(&g, &p).unwrap();
        let swapped = p.relabeled(&[1, 0]).unwrap();
        let roles_swapped = classify_roles(&g, &swapped).unwrap();
        assert_eq!(roles, roles_swapped);
        let s1 = stratify_arcs(&g, &p, &roles).unwrap();
        let s2 = stratify_arcs(&g, &swapped, &roles_swapped).unwrap();
        for &t in s1.strata() {
            assert_eq!(s1.mass(t), s2.mass(t));
            assert_eq!(s1.count(t), s2.count(t));
        }
    }
}
