//! Assortativity coefficients: scalar (Pearson / adjacency form), categorical
//! (mixing-matrix form), directed modularity, and the interior-boundary
//! assortativity profiles.
//!
//! Undefined coefficients are first-class values carrying a reason, so the
//! conventions for empty strata and degenerate attributes survive
//! serialization. Variances use the two-pass formula (mean first, then
//! centered moments); a quantity counts as zero below
//! `1e-14 * (attribute scale)^2`.

use ndarray::Array2;
use thiserror::Error;

use crate::graph::{Directedness, Graph};
use crate::num::{real, Real};
use crate::stratify::{Partition, Stratification, Stratum};

/// Why a coefficient is undefined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UndefinedReason {
    EmptyStratum,
    ZeroVariance,
    ZeroDenominator,
}

impl UndefinedReason {
    pub fn as_str(self) -> &'static str {
        match self {
            UndefinedReason::EmptyStratum => "empty_stratum",
            UndefinedReason::ZeroVariance => "zero_variance",
            UndefinedReason::ZeroDenominator => "zero_denominator",
        }
    }
}

impl std::fmt::Display for UndefinedReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A coefficient that is either defined or undefined with a reason.
pub type Coefficient<T> = Result<T, UndefinedReason>;

#[derive(Debug, Error)]
pub enum AssortError {
    #[error("graph has no arcs")]
    EmptyGraph,
    #[error("attribute variance is zero on one endpoint")]
    ZeroVariance,
    #[error("mixing-matrix denominator 1 - sum_p a_p b_p vanishes")]
    ZeroDenominator,
    #[error("marginals are degenerate: sum of squares equals 1")]
    DegenerateMarginals,
    #[error("invalid marginal vector: {0}")]
    InvalidMarginals(String),
    #[error("resolution parameter must be positive, got {0}")]
    InvalidResolution(f64),
    #[error("vector length {got} does not match node count {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("coefficient {value} outside [-1, 1] beyond tolerance; numerical defect")]
    CoefficientOutOfRange { value: f64 },
}

/// Relative zero threshold for variances.
const ZERO_EPS: f64 = 1e-14;
/// Zero threshold for mixing-matrix denominators. Set above the roundoff
/// a degenerate `1 - sum_p a_p b_p = 0` accumulates over desk-scale sums, so
/// noise-dominated coefficients are reported undefined rather than garbage.
const ZERO_DENOM_EPS: f64 = 1e-12;
/// Permitted floating-point excursion of a coefficient beyond [-1, 1].
const RANGE_SLACK: f64 = 1e-12;

fn check_len<T>(n: usize, v: &[T]) -> Result<(), AssortError> {
    if v.len() != n {
        return Err(AssortError::SizeMismatch { expected: n, got: v.len() });
    }
    Ok(())
}

fn check_range<T: Real>(rho: T) -> Result<T, AssortError> {
    let slack = real::<T>(RANGE_SLACK);
    if rho.abs() > T::one() + slack {
        return Err(AssortError::CoefficientOutOfRange {
            value: rho.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(rho)
}

/// Scalar coefficient from type-restricted strengths and matrix entries.
///
/// `mass` is `sum_ij A_ij` over the entry set; `kout`/`kin` are the matching
/// row/column sums. Returns `Err` only on numerical range violations.
pub(crate) fn scalar_coefficient<T: Real, I>(
    mass: T,
    kout: &[T],
    kin: &[T],
    x: &[T],
    entries: I,
) -> Result<Coefficient<T>, AssortError>
where
    I: Iterator<Item = (usize, usize, T)>,
{
    let n = x.len();
    let mut scale = T::zero();
    for i in 0..n {
        if kout[i] > T::zero() || kin[i] > T::zero() {
            scale = scale.max(x[i].abs());
        }
    }
    let mut mu_out = T::zero();
    let mut mu_in = T::zero();
    for i in 0..n {
        mu_out += kout[i] * x[i];
        mu_in += kin[i] * x[i];
    }
    mu_out /= mass;
    mu_in /= mass;

    let mut var_out = T::zero();
    let mut var_in = T::zero();
    for i in 0..n {
        let d_out = x[i] - mu_out;
        let d_in = x[i] - mu_in;
        var_out += kout[i] * d_out * d_out;
        var_in += kin[i] * d_in * d_in;
    }
    var_out /= mass;
    var_in /= mass;

    let threshold = real::<T>(ZERO_EPS) * scale * scale;
    if var_out <= threshold || var_in <= threshold {
        return Ok(Err(UndefinedReason::ZeroVariance));
    }

    let mut cov = T::zero();
    for (i, j, w) in entries {
        cov += w * (x[i] - mu_out) * (x[j] - mu_in);
    }
    cov /= mass;

    let rho = cov / (var_out.sqrt() * var_in.sqrt());
    check_range(rho).map(Ok)
}

/// Edge-mass distribution over ordered label pairs with its marginals.
#[derive(Clone, Debug)]
pub struct MixingMatrix<T> {
    pub e: Array2<T>,
    pub a: Vec<T>,
    pub b: Vec<T>,
}

impl<T: Real> MixingMatrix<T> {
    pub fn label_count(&self) -> usize {
        self.a.len()
    }

    pub fn trace(&self) -> T {
        (0..self.label_count()).map(|p| self.e[(p, p)]).sum()
    }

    pub fn marginal_product(&self) -> T {
        self.a.iter().zip(&self.b).map(|(&a, &b)| a * b).sum()
    }
}

fn infer_label_count(labels: &[usize]) -> usize {
    labels.iter().max().map_or(0, |&k| k + 1)
}

pub(crate) fn mixing_from_entries<T: Real, I>(
    mass: T,
    labels: &[usize],
    label_count: usize,
    entries: I,
) -> MixingMatrix<T>
where
    I: Iterator<Item = (usize, usize, T)>,
{
    let mut e = Array2::zeros((label_count, label_count));
    for (i, j, w) in entries {
        e[(labels[i], labels[j])] += w / mass;
    }
    let a: Vec<T> = (0..label_count).map(|p| (0..label_count).map(|q| e[(p, q)]).sum()).collect();
    let b: Vec<T> = (0..label_count).map(|q| (0..label_count).map(|p| e[(p, q)]).sum()).collect();
    MixingMatrix { e, a, b }
}

pub(crate) fn categorical_coefficient<T: Real>(
    mixing: &MixingMatrix<T>,
) -> Result<Coefficient<T>, AssortError> {
    let ab = mixing.marginal_product();
    let denom = T::one() - ab;
    if denom <= real::<T>(ZERO_DENOM_EPS) {
        return Ok(Err(UndefinedReason::ZeroDenominator));
    }
    let rho = (mixing.trace() - ab) / denom;
    check_range(rho).map(Ok)
}

/// Newman's assortativity of a scalar attribute (adjacency-matrix form, which
/// coincides with the Pearson form over the weighted arc sample).
pub fn rho_scalar<T: Real>(g: &Graph<T>, x: &[T]) -> Result<T, AssortError> {
    check_len(g.n(), x)?;
    if g.arc_count() == 0 {
        return Err(AssortError::EmptyGraph);
    }
    let s = g.strengths();
    let mass = g.matrix_mass();
    match scalar_coefficient(mass, &s.out_strength, &s.in_strength, x, g.matrix_entries())? {
        Ok(rho) => Ok(rho),
        Err(UndefinedReason::ZeroVariance) => Err(AssortError::ZeroVariance),
        Err(_) => unreachable!("scalar kernel only reports zero variance"),
    }
}

/// Mixing-matrix assortativity of a categorical attribute; the mixing matrix
/// is returned alongside even when the coefficient is undefined.
pub fn rho_categorical<T: Real>(
    g: &Graph<T>,
    labels: &[usize],
) -> Result<(Coefficient<T>, MixingMatrix<T>), AssortError> {
    check_len(g.n(), labels)?;
    if g.arc_count() == 0 {
        return Err(AssortError::EmptyGraph);
    }
    let mass = g.matrix_mass();
    let mixing = mixing_from_entries(mass, labels, infer_label_count(labels), g.matrix_entries());
    let rho = categorical_coefficient(&mixing)?;
    Ok((rho, mixing))
}

/// Leicht-Newman directed modularity with resolution `gamma`; reduces to
/// Newman-Girvan modularity on undirected graphs.
pub fn directed_modularity<T: Real>(
    g: &Graph<T>,
    p: &Partition,
    gamma: T,
) -> Result<T, AssortError> {
    check_len(g.n(), p.assignments())?;
    if gamma <= T::zero() {
        return Err(AssortError::InvalidResolution(gamma.to_f64().unwrap_or(f64::NAN)));
    }
    if g.arc_count() == 0 {
        return Err(AssortError::EmptyGraph);
    }
    let mass = g.matrix_mass();
    let s = g.strengths();
    let mut within = T::zero();
    for (i, j, w) in g.matrix_entries() {
        if p.block_of(i) == p.block_of(j) {
            within += w;
        }
    }
    let mut null = T::zero();
    for block in p.blocks() {
        let kout: T = block.iter().map(|&v| s.out_strength[v]).sum();
        let kin: T = block.iter().map(|&v| s.in_strength[v]).sum();
        null += kout * kin;
    }
    Ok((within - gamma * null / mass) / mass)
}

/// Assortativity of the partition labels, the directed modularity at
/// `gamma = 1`, and the normalization `1 - sum_p a_p b_p` tying them together.
#[derive(Clone, Debug)]
pub struct ModularityConsistency<T> {
    pub rho: T,
    pub modularity: T,
    pub denominator: T,
    /// `|rho - Q / denominator|`.
    pub residual: T,
}

pub fn rho_modularity_consistency<T: Real>(
    g: &Graph<T>,
    p: &Partition,
) -> Result<ModularityConsistency<T>, AssortError> {
    let (rho, mixing) = rho_categorical(g, p.assignments())?;
    let rho = match rho {
        Ok(v) => v,
        Err(UndefinedReason::ZeroDenominator) => return Err(AssortError::ZeroDenominator),
        Err(_) => unreachable!("categorical kernel only reports zero denominator"),
    };
    let modularity = directed_modularity(g, p, T::one())?;
    let denominator = T::one() - mixing.marginal_product();
    let residual = (rho - modularity / denominator).abs();
    Ok(ModularityConsistency { rho, modularity, denominator, residual })
}

/// One stratum of an assortativity profile.
#[derive(Clone, Debug)]
pub struct ProfileEntry<T> {
    pub stratum: Stratum,
    /// Matrix mass `m_T` (auditability echo).
    pub mass: T,
    /// Stored-arc count `|E_T|`.
    pub arc_count: usize,
    pub coefficient: Coefficient<T>,
}

/// Interior-boundary assortativity profile: one entry per stratum of the
/// graph's directedness mode.
#[derive(Clone, Debug)]
pub struct AssortProfile<T> {
    directedness: Directedness,
    pub entries: Vec<ProfileEntry<T>>,
}

impl<T: Real> AssortProfile<T> {
    pub fn directedness(&self) -> Directedness {
        self.directedness
    }

    pub fn get(&self, stratum: Stratum) -> Option<&ProfileEntry<T>> {
        self.entries.iter().find(|e| e.stratum == stratum)
    }

    /// The boundary-to-interior component (directed graphs only).
    pub fn b_to_i(&self) -> Option<&ProfileEntry<T>> {
        self.get(Stratum::BoundaryInterior)
    }
}

/// Per-stratum scalar assortativity via the type-restricted adjacency
/// formula.
pub fn profile_scalar<T: Real>(
    strat: &Stratification<T>,
    x: &[T],
) -> Result<AssortProfile<T>, AssortError> {
    check_len(strat.n(), x)?;
    let mut entries = Vec::new();
    for &stratum in strat.strata() {
        let mass = strat.mass(stratum);
        let coefficient = if mass <= T::zero() {
            Err(UndefinedReason::EmptyStratum)
        } else {
            scalar_coefficient(
                mass,
                strat.out_strength(stratum),
                strat.in_strength(stratum),
                x,
                strat.matrix_entries_of(stratum),
            )?
        };
        entries.push(ProfileEntry { stratum, mass, arc_count: strat.count(stratum), coefficient });
    }
    Ok(AssortProfile { directedness: strat.directedness(), entries })
}

/// Per-stratum categorical assortativity via type-restricted mixing matrices.
pub fn profile_categorical<T: Real>(
    strat: &Stratification<T>,
    labels: &[usize],
) -> Result<AssortProfile<T>, AssortError> {
    check_len(strat.n(), labels)?;
    let label_count = infer_label_count(labels);
    let mut entries = Vec::new();
    for &stratum in strat.strata() {
        let mass = strat.mass(stratum);
        let coefficient = if mass <= T::zero() {
            Err(UndefinedReason::EmptyStratum)
        } else {
            let mixing = mixing_from_entries(
                mass,
                labels,
                label_count,
                strat.matrix_entries_of(stratum),
            );
            categorical_coefficient(&mixing)?
        };
        entries.push(ProfileEntry { stratum, mass, arc_count: strat.count(stratum), coefficient });
    }
    Ok(AssortProfile { directedness: strat.directedness(), entries })
}

/// Closed-form assortativity of a multipartite graph from its edge-end
/// fractions: `-sum a_p^2 / (1 - sum a_p^2)`.
pub fn multipartite_rho<T: Real>(a: &[T], tol: T) -> Result<T, AssortError> {
    if a.iter().any(|&v| v < T::zero()) {
        return Err(AssortError::InvalidMarginals("negative entry".into()));
    }
    let total: T = a.iter().copied().sum();
    if (total - T::one()).abs() > tol {
        return Err(AssortError::InvalidMarginals(format!(
            "entries sum to {}, expected 1",
            total
        )));
    }
    let sum_sq: T = a.iter().map(|&v| v * v).sum();
    if T::one() - sum_sq <= real::<T>(ZERO_DENOM_EPS) {
        return Err(AssortError::DegenerateMarginals);
    }
    Ok(-sum_sq / (T::one() - sum_sq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Directedness;
    use crate::stratify::{classify_roles, stratify_arcs};

    fn k22() -> (Graph<f64>, Partition) {
        let edges = [(0, 2, 1.0), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0)];
        let g = Graph::<f64>::build(4, &edges, Directedness::Undirected).unwrap();
        let p = Partition::new(vec![0, 0, 1, 1]).unwrap();
        (g, p)
    }

    #[test]
    fn rho_scalar_constant_is_zero_variance() {
        let (g, _) = k22();
        assert!(matches!(rho_scalar(&g, &[3.0; 4]), Err(AssortError::ZeroVariance)));
    }

    #[test]
    fn rho_scalar_k22_indicator_is_minus_one() {
        let (g, _) = k22();
        let rho = rho_scalar(&g, &[0.0, 0.0, 1.0, 1.0]).unwrap();
        assert!((rho + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rho_scalar_directed_cycle_matches_hand_value() {
        let edges: Vec<_> = (0..4).map(|i| (i, (i + 1) % 4, 1.0)).collect();
        let g = Graph::<f64>::build(4, &edges, Directedness::Directed).unwrap();
        let rho = rho_scalar(&g, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        // Pairs (1,2),(2,3),(3,4),(4,1): cov = -0.25, var = 1.25 each side.
        assert!((rho + 0.2).abs() < 1e-14);
    }

    #[test]
    fn rho_categorical_k22_sides() {
        let (g, p) = k22();
        let (rho, mixing) = rho_categorical(&g, p.assignments()).unwrap();
        assert!((rho.unwrap() + 1.0).abs() < 1e-14);
        assert!((mixing.trace()).abs() < 1e-14);
        assert!((mixing.marginal_product() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rho_categorical_all_within_is_one() {
        let edges = [(0, 1, 1.0), (2, 3, 2.0)];
        let g = Graph::<f64>::build(4, &edges, Directedness::Directed).unwrap();
        let (rho, _) = rho_categorical(&g, &[0, 0, 1, 1]).unwrap();
        assert!((rho.unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rho_categorical_single_class_undefined() {
        let edges = [(0, 1, 1.0)];
        let g = Graph::<f64>::build(2, &edges, Directedness::Directed).unwrap();
        let (rho, _) = rho_categorical(&g, &[0, 0]).unwrap();
        assert_eq!(rho, Err(UndefinedReason::ZeroDenominator));
    }

    #[test]
    fn modularity_single_block_is_zero() {
        let edges = [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)];
        let g = Graph::<f64>::build(3, &edges, Directedness::Directed).unwrap();
        let p = Partition::new(vec![0, 0, 0]).unwrap();
        let q = directed_modularity(&g, &p, 1.0).unwrap();
        assert!(q.abs() < 1e-14);
    }

    #[test]
    fn modularity_k22_sides() {
        let (g, p) = k22();
        let q = directed_modularity(&g, &p, 1.0).unwrap();
        assert!((q + 0.5).abs() < 1e-14);
    }

    #[test]
    fn consistency_k22() {
        let (g, p) = k22();
        let c = rho_modularity_consistency(&g, &p).unwrap();
        assert!((c.rho + 1.0).abs() < 1e-12);
        assert!((c.modularity + 0.5).abs() < 1e-12);
        assert!((c.denominator - 0.5).abs() < 1e-12);
        assert!(c.residual < 1e-12);
    }

    #[test]
    fn consistency_single_block_is_zero_denominator() {
        let edges = [(0, 1, 1.0), (1, 0, 1.0)];
        let g = Graph::<f64>::build(2, &edges, Directedness::Directed).unwrap();
        let p = Partition::new(vec![0, 0]).unwrap();
        assert!(matches!(
            rho_modularity_consistency(&g, &p),
            Err(AssortError::ZeroDenominator)
        ));
    }

    #[test]
    fn profile_k22_collapses_to_bb() {
        let (g, p) = k22();
        let roles = classify_roles(&g, &p).unwrap();
        let s = stratify_arcs(&g, &p, &roles).unwrap();
        let x = [0.0, 0.0, 1.0, 1.0];
        let profile = profile_scalar(&s, &x).unwrap();
        assert_eq!(
            profile.get(Stratum::InteriorInterior).unwrap().coefficient,
            Err(UndefinedReason::EmptyStratum)
        );
        assert_eq!(
            profile.get(Stratum::InteriorBoundary).unwrap().coefficient,
            Err(UndefinedReason::EmptyStratum)
        );
        let bb = profile.get(Stratum::BoundaryBoundary).unwrap().coefficient.unwrap();
        let global = rho_scalar(&g, &x).unwrap();
        assert!((bb - global).abs() < 1e-14);
        assert!((bb + 1.0).abs() < 1e-12);
    }

    #[test]
    fn profile_single_arc_stratum_zero_variance() {
        // A single directed arc inside one block gives a one-point sample.
        let g = Graph::<f64>::build(2, &[(0, 1, 1.0)], Directedness::Directed).unwrap();
        let p = Partition::new(vec![0, 0]).unwrap();
        let roles = classify_roles(&g, &p).unwrap();
        let s = stratify_arcs(&g, &p, &roles).unwrap();
        let profile = profile_scalar(&s, &[0.0, 5.0]).unwrap();
        assert_eq!(
            profile.get(Stratum::InteriorInterior).unwrap().coefficient,
            Err(UndefinedReason::ZeroVariance)
        );
    }

    #[test]
    fn profile_categorical_k22() {
        let (g, p) = k22();
        let roles = classify_roles(&g, &p).unwrap();
        let s = stratify_arcs(&g, &p, &roles).unwrap();
        let profile = profile_categorical(&s, p.assignments()).unwrap();
        let bb = profile.get(Stratum::BoundaryBoundary).unwrap().coefficient.unwrap();
        assert!((bb + 1.0).abs() < 1e-12);
        assert_eq!(
            profile.get(Stratum::InteriorInterior).unwrap().coefficient,
            Err(UndefinedReason::EmptyStratum)
        );
    }

    #[test]
    fn profile_categorical_constant_labels() {
        let (g, p) = k22();
        let roles = classify_roles(&g, &p).unwrap();
        let s = stratify_arcs(&g, &p, &roles).unwrap();
        let profile = profile_categorical(&s, &[0, 0, 0, 0]).unwrap();
        assert_eq!(
            profile.get(Stratum::BoundaryBoundary).unwrap().coefficient,
            Err(UndefinedReason::ZeroDenominator)
        );
    }

    #[test]
    fn multipartite_closed_form() {
        assert!((multipartite_rho(&[0.5f64, 0.5], 1e-12).unwrap() + 1.0).abs() < 1e-15);
        let third = 1.0f64 / 3.0;
        assert!((multipartite_rho(&[third, third, third], 1e-12).unwrap() + 0.5).abs() < 1e-12);
        assert!(matches!(
            multipartite_rho(&[1.0, 0.0], 1e-12),
            Err(AssortError::DegenerateMarginals)
        ));
        assert!(matches!(
            multipartite_rho(&[0.7, 0.7], 1e-12),
            Err(AssortError::InvalidMarginals(_))
        ));
    }

    #[test]
    fn multipartite_matches_k22_categorical() {
        let (g, p) = k22();
        let (rho, mixing) = rho_categorical(&g, p.assignments()).unwrap();
        let closed = multipartite_rho(&mixing.a, 1e-12).unwrap();
        assert!((rho.unwrap() - closed).abs() < 1e-12);
    }

    #[test]
    fn affine_invariance_spot_check() {
        let edges = [(0, 1, 1.0), (1, 2, 2.0), (2, 0, 1.5), (0, 2, 0.5)];
        let g = Graph::<f64>::build(3, &edges, Directedness::Directed).unwrap();
        let x = [0.3, -1.2, 2.5];
        let y: Vec<f64> = x.iter().map(|&v| -3.0 * v + 7.0).collect();
        let r1 = rho_scalar(&g, &x).unwrap();
        let r2 = rho_scalar(&g, &y).unwrap();
        assert!((r1 - r2).abs() < 1e-10);
    }
}
