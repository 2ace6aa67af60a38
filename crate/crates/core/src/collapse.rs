//! The profile-collapse decomposition and the sign-condition checker.
//!
//! Pooling the intra-group strata (I->I, I->B, B->I directed; II, IB
//! undirected) into one paired endpoint sample, the pooled covariance splits
//! exactly into the stratum-share-weighted sum of per-stratum covariances
//! plus a between-type mean-shift term:
//!
//! `Cov_in = sum_T pi_T Cov_T + sum_T pi_T (mu_XT - mu_X)(mu_YT - mu_Y)`
//!
//! and the analogous correlation identity whenever all standard deviations
//! are positive. The checker evaluates five empirically checkable conditions
//! under which the boundary-to-interior component must be strictly negative.

use thiserror::Error;

use crate::assort::{profile_scalar, AssortError, Coefficient, UndefinedReason};
use crate::graph::{Directedness, Graph};
use crate::num::{real, Real};
use crate::stratify::{Partition, Role, Stratification, Stratum};

#[derive(Debug, Error)]
pub enum CollapseError {
    #[error("every intra-group stratum is empty")]
    EmptyIntraGroupStrata,
    #[error("no boundary-to-interior arcs")]
    NoBtoIArcs,
    #[error("group {0} lacks interior or boundary nodes required by the conditions")]
    MissingInteriorOrBoundary(usize),
    #[error("vector length {got} does not match node count {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("stratification was not derived from this graph and partition")]
    StratificationMismatch,
    #[error(transparent)]
    Assort(#[from] AssortError),
}

/// Measure placed on the paired endpoint sample: arc weights, or one unit
/// per arc. The two coincide on unweighted graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CollapseMode {
    Weighted,
    UnweightedCounts,
}

impl CollapseMode {
    /// Counts on unweighted graphs, weights otherwise.
    pub fn default_for<T: Real>(strat: &Stratification<T>) -> Self {
        if strat.is_unweighted() {
            CollapseMode::UnweightedCounts
        } else {
            CollapseMode::Weighted
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CollapseMode::Weighted => "weighted",
            CollapseMode::UnweightedCounts => "counts",
        }
    }
}

const ZERO_EPS: f64 = 1e-14;
const STRICT_EPS: f64 = 1e-12;

/// Endpoint moments of one stratum's paired sample.
#[derive(Clone, Debug)]
pub struct StratumMoments<T> {
    pub stratum: Stratum,
    /// Share `pi_T` of the intra-group measure.
    pub pi: T,
    /// Sample measure of the stratum (weight or count, by mode).
    pub measure: T,
    pub mean_tail: T,
    pub mean_head: T,
    pub sd_tail: T,
    pub sd_head: T,
    pub covariance: T,
    pub correlation: Coefficient<T>,
}

/// Exact decomposition of the pooled intra-group covariance.
#[derive(Clone, Debug)]
pub struct CollapseReport<T> {
    pub mode: CollapseMode,
    /// Nonempty intra-group strata.
    pub strata: Vec<StratumMoments<T>>,
    pub empty_strata: Vec<Stratum>,
    pub cov_between: T,
    pub cov_in: T,
    pub mean_tail_in: T,
    pub mean_head_in: T,
    pub sd_tail_in: T,
    pub sd_head_in: T,
    pub r_in: Coefficient<T>,
    /// `|cov_in - sum_T pi_T cov_T - cov_between|`, both sides computed
    /// independently.
    pub decomp_residual: T,
    /// Residual of the correlation identity; present when every standard
    /// deviation involved is positive.
    pub corr_residual: Option<T>,
}

fn intra_group_strata(directedness: Directedness) -> &'static [Stratum] {
    match directedness {
        Directedness::Directed => &[
            Stratum::InteriorInterior,
            Stratum::InteriorBoundary,
            Stratum::BoundaryInterior,
        ],
        Directedness::Undirected => &[Stratum::InteriorInterior, Stratum::InteriorBoundary],
    }
}

struct PairMoments<T> {
    measure: T,
    mean_tail: T,
    mean_head: T,
    var_tail: T,
    var_head: T,
    covariance: T,
}

/// Two-pass moments of a paired sample `(x[i], x[j])` with per-entry measure.
fn pair_moments<T: Real>(entries: &[(usize, usize, T)], x: &[T]) -> Option<PairMoments<T>> {
    let measure: T = entries.iter().map(|&(_, _, w)| w).sum();
    if measure <= T::zero() {
        return None;
    }
    let mut mean_tail = T::zero();
    let mut mean_head = T::zero();
    for &(i, j, w) in entries {
        mean_tail += w * x[i];
        mean_head += w * x[j];
    }
    mean_tail /= measure;
    mean_head /= measure;
    let mut var_tail = T::zero();
    let mut var_head = T::zero();
    let mut covariance = T::zero();
    for &(i, j, w) in entries {
        let dt = x[i] - mean_tail;
        let dh = x[j] - mean_head;
        var_tail += w * dt * dt;
        var_head += w * dh * dh;
        covariance += w * dt * dh;
    }
    var_tail /= measure;
    var_head /= measure;
    covariance /= measure;
    Some(PairMoments { measure, mean_tail, mean_head, var_tail, var_head, covariance })
}

fn attribute_scale<T: Real>(entries: &[(usize, usize, T)], x: &[T]) -> T {
    entries
        .iter()
        .fold(T::zero(), |m, &(i, j, _)| m.max(x[i].abs()).max(x[j].abs()))
}

fn measured_entries<T: Real>(
    strat: &Stratification<T>,
    stratum: Stratum,
    mode: CollapseMode,
) -> Vec<(usize, usize, T)> {
    strat
        .matrix_entries_of(stratum)
        .map(|(i, j, w)| match mode {
            CollapseMode::Weighted => (i, j, w),
            CollapseMode::UnweightedCounts => (i, j, T::one()),
        })
        .collect()
}

/// Evaluates the collapse decomposition on the intra-group strata.
pub fn collapse_decomposition<T: Real>(
    strat: &Stratification<T>,
    x: &[T],
    mode: CollapseMode,
) -> Result<CollapseReport<T>, CollapseError> {
    if x.len() != strat.n() {
        return Err(CollapseError::SizeMismatch { expected: strat.n(), got: x.len() });
    }

    let mut per_stratum: Vec<(Stratum, Vec<(usize, usize, T)>)> = Vec::new();
    let mut pooled: Vec<(usize, usize, T)> = Vec::new();
    let mut empty_strata = Vec::new();
    for &stratum in intra_group_strata(strat.directedness()) {
        let entries = measured_entries(strat, stratum, mode);
        if entries.is_empty() {
            empty_strata.push(stratum);
        } else {
            pooled.extend_from_slice(&entries);
            per_stratum.push((stratum, entries));
        }
    }
    let pooled_moments = pair_moments(&pooled, x).ok_or(CollapseError::EmptyIntraGroupStrata)?;
    let scale = attribute_scale(&pooled, x);
    let var_threshold = real::<T>(ZERO_EPS) * scale * scale;

    let correlation_of = |m: &PairMoments<T>| -> Coefficient<T> {
        if m.var_tail <= var_threshold || m.var_head <= var_threshold {
            Err(UndefinedReason::ZeroVariance)
        } else {
            Ok(m.covariance / (m.var_tail.sqrt() * m.var_head.sqrt()))
        }
    };

    let mut strata = Vec::new();
    let mut weighted_cov_sum = T::zero();
    let mut cov_between = T::zero();
    let mut corr_numerator = T::zero();
    let mut corr_defined = true;
    for (stratum, entries) in &per_stratum {
        let m = pair_moments(entries, x).expect("nonempty stratum");
        let pi = m.measure / pooled_moments.measure;
        weighted_cov_sum += pi * m.covariance;
        cov_between +=
            pi * (m.mean_tail - pooled_moments.mean_tail) * (m.mean_head - pooled_moments.mean_head);
        let sd_tail = m.var_tail.sqrt();
        let sd_head = m.var_head.sqrt();
        let correlation = correlation_of(&m);
        match correlation {
            Ok(r) => corr_numerator += pi * sd_tail * sd_head * r,
            Err(_) => corr_defined = false,
        }
        strata.push(StratumMoments {
            stratum: *stratum,
            pi,
            measure: m.measure,
            mean_tail: m.mean_tail,
            mean_head: m.mean_head,
            sd_tail,
            sd_head,
            covariance: m.covariance,
            correlation,
        });
    }

    let r_in = correlation_of(&pooled_moments);
    let decomp_residual = (pooled_moments.covariance - weighted_cov_sum - cov_between).abs();
    let corr_residual = match (&r_in, corr_defined) {
        (Ok(r), true) => {
            let sd_prod = pooled_moments.var_tail.sqrt() * pooled_moments.var_head.sqrt();
            Some((*r - (corr_numerator + cov_between) / sd_prod).abs())
        }
        _ => None,
    };

    Ok(CollapseReport {
        mode,
        strata,
        empty_strata,
        cov_between,
        cov_in: pooled_moments.covariance,
        mean_tail_in: pooled_moments.mean_tail,
        mean_head_in: pooled_moments.mean_head,
        sd_tail_in: pooled_moments.var_tail.sqrt(),
        sd_head_in: pooled_moments.var_head.sqrt(),
        r_in,
        decomp_residual,
        corr_residual,
    })
}

/// Per-group statistics entering the sign conditions.
#[derive(Clone, Debug)]
pub struct GroupSignStats<T> {
    pub group: usize,
    /// B->I sample measure within the group.
    pub measure: T,
    pub pi: T,
    /// Node means of the attribute over interior/boundary nodes; `None` when
    /// the group has none of that role.
    pub interior_mean: Option<T>,
    pub boundary_mean: Option<T>,
    /// Arc-endpoint means over the group's B->I arcs (when any).
    pub tail_mean: Option<T>,
    pub head_mean: Option<T>,
    pub covariance: Option<T>,
}

#[derive(Clone, Copy, Debug)]
pub struct ConditionCheck<T> {
    pub holds: bool,
    /// Nonnegative iff the condition holds; the distance to violation.
    pub margin: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignVerdict {
    /// All five conditions hold with numerical strictness; the coefficient
    /// must be negative.
    PredictedNegative,
    /// Some condition fails or strictness is below resolution; no prediction.
    NoPrediction,
    /// Degenerate sample (condition iii fails); the coefficient is undefined.
    NotApplicable,
}

impl SignVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            SignVerdict::PredictedNegative => "predicted_negative",
            SignVerdict::NoPrediction => "no_prediction",
            SignVerdict::NotApplicable => "not_applicable",
        }
    }
}

/// Literal evaluation of the five sufficient conditions for a negative
/// boundary-to-interior component, plus the independently computed observed
/// coefficient.
#[derive(Clone, Debug)]
pub struct SignConditionsReport<T> {
    /// Arc-weighted means were used (graph is weighted); otherwise counts.
    pub weighted: bool,
    pub groups: Vec<GroupSignStats<T>>,
    pub tail_mean: T,
    pub head_mean: T,
    pub tail_sd: T,
    pub head_sd: T,
    /// Pooled covariance over all B->I arcs.
    pub covariance: T,
    /// `sum_k pi_k (Xbar_k - Xbar)(Ybar_k - Ybar)`.
    pub between_term: T,
    /// Conditions (i)..(v) in order.
    pub conditions: [ConditionCheck<T>; 5],
    /// Numerical strictness: the reconstructed covariance bound clears the
    /// strictness threshold.
    pub strict: bool,
    pub verdict: SignVerdict,
    /// B->I profile component, computed via the type-restricted adjacency
    /// formula rather than from the grouped sample above.
    pub observed: Coefficient<T>,
}

/// Checks the sufficient conditions for `r_{B->I}(x) < 0` on a directed
/// stratified graph.
pub fn sign_conditions<T: Real>(
    g: &Graph<T>,
    p: &Partition,
    strat: &Stratification<T>,
    x: &[T],
) -> Result<SignConditionsReport<T>, CollapseError> {
    if x.len() != g.n() {
        return Err(CollapseError::SizeMismatch { expected: g.n(), got: x.len() });
    }
    if p.assignments() != strat.block_of() || g.n() != strat.n() {
        return Err(CollapseError::StratificationMismatch);
    }
    if g.directedness() == Directedness::Undirected
        || strat.count(Stratum::BoundaryInterior) == 0
    {
        return Err(CollapseError::NoBtoIArcs);
    }

    let weighted = !strat.is_unweighted();
    let mode = if weighted { CollapseMode::Weighted } else { CollapseMode::UnweightedCounts };
    let entries = measured_entries(strat, Stratum::BoundaryInterior, mode);
    let pooled = pair_moments(&entries, x).expect("B->I stratum nonempty");
    let scale = attribute_scale(&entries, x);
    let var_threshold = real::<T>(ZERO_EPS) * scale * scale;
    let strict_threshold = real::<T>(STRICT_EPS) * T::one().max(scale * scale);

    let block_count = strat.block_count();
    let mut group_entries: Vec<Vec<(usize, usize, T)>> = vec![Vec::new(); block_count];
    for &(i, j, w) in &entries {
        debug_assert_eq!(strat.block_of()[i], strat.block_of()[j]);
        group_entries[strat.block_of()[i]].push((i, j, w));
    }

    // Node means per group and role.
    let mut interior_sum = vec![T::zero(); block_count];
    let mut interior_count = vec![0usize; block_count];
    let mut boundary_sum = vec![T::zero(); block_count];
    let mut boundary_count = vec![0usize; block_count];
    for v in 0..strat.n() {
        let b = strat.block_of()[v];
        match strat.roles()[v] {
            Role::Interior => {
                interior_sum[b] += x[v];
                interior_count[b] += 1;
            }
            Role::Boundary => {
                boundary_sum[b] += x[v];
                boundary_count[b] += 1;
            }
        }
    }

    let mut groups = Vec::new();
    let mut margin_i: Option<T> = None;
    let mut margin_ii: Option<T> = None;
    let mut max_group_cov: Option<T> = None;
    let mut between_term = T::zero();
    for k in 0..block_count {
        let interior_mean = (interior_count[k] > 0)
            .then(|| interior_sum[k] / real::<T>(interior_count[k] as f64));
        let boundary_mean = (boundary_count[k] > 0)
            .then(|| boundary_sum[k] / real::<T>(boundary_count[k] as f64));
        // Condition (i) ranges over every group with both roles present.
        if let (Some(mu_i), Some(mu_b)) = (interior_mean, boundary_mean) {
            let gap = mu_b - mu_i;
            margin_i = Some(margin_i.map_or(gap, |m: T| m.min(gap)));
        }
        let moments = pair_moments(&group_entries[k], x);
        let (measure, pi, tail_mean, head_mean, covariance) = match &moments {
            Some(m) => {
                let (mu_i, mu_b) = match (interior_mean, boundary_mean) {
                    (Some(i), Some(b)) => (i, b),
                    // A group with B->I arcs necessarily has both roles.
                    _ => return Err(CollapseError::MissingInteriorOrBoundary(k)),
                };
                let m_tail = m.mean_tail - mu_b;
                let m_head = mu_i - m.mean_head;
                let local = m_tail.min(m_head);
                margin_ii = Some(margin_ii.map_or(local, |v: T| v.min(local)));
                max_group_cov =
                    Some(max_group_cov.map_or(m.covariance, |v: T| v.max(m.covariance)));
                let pi = m.measure / pooled.measure;
                between_term +=
                    pi * (m.mean_tail - pooled.mean_tail) * (m.mean_head - pooled.mean_head);
                (m.measure, pi, Some(m.mean_tail), Some(m.mean_head), Some(m.covariance))
            }
            None => (T::zero(), T::zero(), None, None, None),
        };
        groups.push(GroupSignStats {
            group: k,
            measure,
            pi,
            interior_mean,
            boundary_mean,
            tail_mean,
            head_mean,
            covariance,
        });
    }

    let margin_i = margin_i.unwrap_or(T::zero());
    let margin_ii = margin_ii.expect("at least one group has B->I arcs");
    let min_var = pooled.var_tail.min(pooled.var_head);
    let max_group_cov = max_group_cov.expect("at least one group has B->I arcs");

    let cond_i = ConditionCheck { holds: margin_i > T::zero(), margin: margin_i };
    let cond_ii = ConditionCheck { holds: margin_ii >= T::zero(), margin: margin_ii };
    let cond_iii =
        ConditionCheck { holds: min_var > var_threshold, margin: min_var - var_threshold };
    let cond_iv = ConditionCheck { holds: max_group_cov <= T::zero(), margin: -max_group_cov };
    let cond_v = ConditionCheck { holds: between_term <= T::zero(), margin: -between_term };

    // The sign argument bounds Cov_{B->I} by this reconstruction; strictness
    // is measured on it so that a predicted sign survives roundoff.
    let reconstructed: T = groups
        .iter()
        .filter_map(|g| g.covariance.map(|c| g.pi * c))
        .sum::<T>()
        + between_term;
    let strict = reconstructed <= -strict_threshold;

    let verdict = if !cond_iii.holds {
        SignVerdict::NotApplicable
    } else if cond_i.holds && cond_ii.holds && cond_iv.holds && cond_v.holds && strict {
        SignVerdict::PredictedNegative
    } else {
        SignVerdict::NoPrediction
    };

    let profile = profile_scalar(strat, x)?;
    let observed = profile
        .b_to_i()
        .map(|e| e.coefficient)
        .unwrap_or(Err(UndefinedReason::EmptyStratum));

    if verdict == SignVerdict::PredictedNegative {
        debug_assert!(matches!(observed, Ok(r) if r < T::zero()));
    }

    Ok(SignConditionsReport {
        weighted,
        groups,
        tail_mean: pooled.mean_tail,
        head_mean: pooled.mean_head,
        tail_sd: pooled.var_tail.sqrt(),
        head_sd: pooled.var_head.sqrt(),
        covariance: pooled.covariance,
        between_term,
        conditions: [cond_i, cond_ii, cond_iii, cond_iv, cond_v],
        strict,
        verdict,
        observed,
    })
}
