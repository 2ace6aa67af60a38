//! Mean-field SIS dynamics on a directed weighted graph.
//!
//! The state `x_i(t)` is the infection probability of node `i`:
//!
//! `dx_i/dt = -delta x_i + (1 - x_i) beta sum_j A_ji x_j`
//!
//! Note the index convention: `A_ji` is transmission from `j` to `i`, so the
//! sum runs over in-neighbors of `i` in the graph's arc orientation
//! (arcs point transmitter -> receiver).
//!
//! Above the threshold `beta rho(A) / delta > 1` the system has a unique
//! endemic equilibrium `x*`, computed here by fixed-point iteration on
//! `x_i <- beta s_i / (delta + beta s_i)` and cross-checkable against the
//! long-horizon ODE limit. The equilibrium serves as an endogenous node
//! attribute for the interior-boundary profile machinery.

use thiserror::Error;

use crate::assort::{profile_scalar, AssortError, AssortProfile};
use crate::collapse::{sign_conditions, CollapseError, SignConditionsReport};
use crate::graph::{Directedness, Graph, GraphError};
use crate::num::{real, Real};
use crate::spectral::{
    directed_conductance, stationary, transition_matrix, SpectralError, WalkSpec,
};
use crate::stratify::{classify_roles, stratify_arcs, NodeRoles, Partition, Role, StratifyError, Stratum};

#[derive(Debug, Error)]
pub enum SisError {
    #[error("invalid SIS parameters: {0}")]
    InvalidParams(String),
    #[error("vector length {got} does not match node count {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("state component {node} = {value} outside [0, 1]")]
    StateOutOfRange { node: usize, value: f64 },
    #[error("forward invariance violated at step {step}, node {node} (value {value}); reduce dt")]
    InvarianceViolation { step: usize, node: usize, value: f64 },
    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),
    #[error("below the epidemic threshold; no endemic equilibrium")]
    BelowThreshold,
    #[error("iteration did not converge: residual {residual} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Stratify(#[from] StratifyError),
    #[error(transparent)]
    Assort(#[from] AssortError),
    #[error(transparent)]
    Collapse(#[from] CollapseError),
}

/// Infection rate `beta` and recovery rate `delta`, both positive.
#[derive(Clone, Copy, Debug)]
pub struct SisParams<T> {
    beta: T,
    delta: T,
}

impl<T: Real> SisParams<T> {
    pub fn new(beta: T, delta: T) -> Result<Self, SisError> {
        if !(beta > T::zero() && beta.is_finite()) {
            return Err(SisError::InvalidParams(format!("beta must be positive, got {}", beta)));
        }
        if !(delta > T::zero() && delta.is_finite()) {
            return Err(SisError::InvalidParams(format!("delta must be positive, got {}", delta)));
        }
        Ok(SisParams { beta, delta })
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn delta(&self) -> T {
        self.delta
    }
}

/// Tolerated excursion outside [0, 1] for sampled states.
const STATE_SLACK: f64 = 1e-9;
const EQUILIBRIUM_ITER_CAP: usize = 1_000_000;

fn check_state<T: Real>(x: &[T], n: usize) -> Result<(), SisError> {
    if x.len() != n {
        return Err(SisError::SizeMismatch { expected: n, got: x.len() });
    }
    let slack = real::<T>(STATE_SLACK);
    for (node, &value) in x.iter().enumerate() {
        if !(value >= -slack && value <= T::one() + slack) {
            return Err(SisError::StateOutOfRange {
                node,
                value: value.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(())
}

/// In-strength weighted infection pressure `s_i = sum_j A_ji x_j`.
fn pressure<T: Real>(g: &Graph<T>, x: &[T]) -> Vec<T> {
    (0..g.n())
        .map(|i| g.in_col(i).iter().map(|&(j, w)| w * x[j]).sum())
        .collect()
}

fn rhs_unchecked<T: Real>(g: &Graph<T>, params: &SisParams<T>, x: &[T]) -> Vec<T> {
    let s = pressure(g, x);
    (0..g.n())
        .map(|i| -params.delta * x[i] + (T::one() - x[i]) * params.beta * s[i])
        .collect()
}

/// Right-hand side of the SIS vector field; the state must lie in `[0, 1]^n`
/// up to the sampling slack.
pub fn sis_rhs<T: Real>(
    x: &[T],
    params: &SisParams<T>,
    g: &Graph<T>,
) -> Result<Vec<T>, SisError> {
    check_state(x, g.n())?;
    Ok(rhs_unchecked(g, params, x))
}

/// Largest in-strength; enters the step-size heuristic.
pub fn max_in_strength<T: Real>(g: &Graph<T>) -> T {
    g.strengths().in_strength.iter().copied().fold(T::zero(), |a, b| a.max(b))
}

/// Default explicit step `0.01 / (delta + beta * max_i k_i^in)`.
pub fn default_dt<T: Real>(params: &SisParams<T>, g: &Graph<T>) -> T {
    real::<T>(0.01) / (params.delta + params.beta * max_in_strength(g))
}

/// Sampled trajectory; `states[0]` is the initial condition.
#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Vec<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &[T] {
        self.states.last().expect("trajectory contains the initial state")
    }
}

fn rk4_step<T: Real>(g: &Graph<T>, params: &SisParams<T>, x: &[T], dt: T) -> Vec<T> {
    let half = real::<T>(0.5);
    let sixth = T::one() / real::<T>(6.0);
    let two = real::<T>(2.0);
    let k1 = rhs_unchecked(g, params, x);
    let x2: Vec<T> = x.iter().zip(&k1).map(|(&x, &k)| x + half * dt * k).collect();
    let k2 = rhs_unchecked(g, params, &x2);
    let x3: Vec<T> = x.iter().zip(&k2).map(|(&x, &k)| x + half * dt * k).collect();
    let k3 = rhs_unchecked(g, params, &x3);
    let x4: Vec<T> = x.iter().zip(&k3).map(|(&x, &k)| x + dt * k).collect();
    let k4 = rhs_unchecked(g, params, &x4);
    (0..x.len())
        .map(|i| x[i] + dt * sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]))
        .collect()
}

/// Classical 4th-order integration with per-step invariance checks; a state
/// leaving `[0, 1]^n` beyond the slack aborts (the step size is too large).
pub fn integrate<T: Real>(
    x0: &[T],
    params: &SisParams<T>,
    g: &Graph<T>,
    horizon: T,
    dt: T,
) -> Result<Trajectory<T>, SisError> {
    check_state(x0, g.n())?;
    // Negated comparison also rejects NaN steps.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(SisError::InvalidTimeStep(dt.to_f64().unwrap_or(f64::NAN)));
    }
    let slack = real::<T>(STATE_SLACK);
    let mut times = vec![T::zero()];
    let mut states = vec![x0.to_vec()];
    let mut x = x0.to_vec();
    let mut t = T::zero();
    let mut step = 0usize;
    while t < horizon {
        x = rk4_step(g, params, &x, dt);
        t += dt;
        step += 1;
        for (node, &value) in x.iter().enumerate() {
            if !(value >= -slack && value <= T::one() + slack) {
                return Err(SisError::InvarianceViolation {
                    step,
                    node,
                    value: value.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        times.push(t);
        states.push(x.clone());
    }
    Ok(Trajectory { times, states })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquilibriumMethod {
    FixedPoint,
    OdeLimit,
}

impl EquilibriumMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            EquilibriumMethod::FixedPoint => "fixed_point",
            EquilibriumMethod::OdeLimit => "ode_limit",
        }
    }
}

/// Endemic equilibrium (or the disease-free state below threshold).
#[derive(Clone, Debug)]
pub struct EquilibriumResult<T> {
    pub x_star: Vec<T>,
    /// `||map(x*) - x*||_inf` of the fixed-point map at the returned state.
    pub residual: T,
    pub iterations: usize,
    /// `beta rho(A) / delta - 1`.
    pub threshold_margin: T,
    pub method: EquilibriumMethod,
    /// Graph is not strongly connected; uniqueness is not guaranteed.
    pub degraded: bool,
}

fn fixed_point_map<T: Real>(g: &Graph<T>, params: &SisParams<T>, x: &[T]) -> Vec<T> {
    pressure(g, x)
        .into_iter()
        .map(|s| {
            let bs = params.beta * s;
            bs / (params.delta + bs)
        })
        .collect()
}

fn inf_norm_diff<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).fold(T::zero(), |m, v| m.max(v))
}

fn threshold_margin<T: Real>(g: &Graph<T>, params: &SisParams<T>) -> Result<(T, bool), SisError> {
    let est = g.spectral_radius(real(1e-12))?;
    Ok((params.beta * est.value / params.delta - T::one(), est.degraded))
}

/// Tolerance tightened so the vector-field residual lands within `10 * tol`.
fn effective_tol<T: Real>(g: &Graph<T>, params: &SisParams<T>, tol: T) -> T {
    let rate = params.delta + params.beta * max_in_strength(g);
    tol * T::one().min(real::<T>(10.0) / rate)
}

/// Damped fixed-point solve from the all-0.5 start. Below threshold the
/// disease-free state is returned with a nonpositive margin.
pub fn endemic_equilibrium<T: Real>(
    g: &Graph<T>,
    params: &SisParams<T>,
    tol: T,
) -> Result<EquilibriumResult<T>, SisError> {
    let (margin, degraded) = threshold_margin(g, params)?;
    let n = g.n();
    if margin <= T::zero() {
        return Ok(EquilibriumResult {
            x_star: vec![T::zero(); n],
            residual: T::zero(),
            iterations: 0,
            threshold_margin: margin,
            method: EquilibriumMethod::FixedPoint,
            degraded,
        });
    }
    let eff_tol = effective_tol(g, params, tol);
    let mut x = vec![real::<T>(0.5); n];
    let mut damping = T::one();
    let min_damping = real::<T>(1.0 / 64.0);
    let mut prev_step = T::infinity();
    let mut best_residual = T::infinity();
    for iteration in 1..=EQUILIBRIUM_ITER_CAP {
        let fx = fixed_point_map(g, params, &x);
        let step = inf_norm_diff(&fx, &x);
        best_residual = best_residual.min(step);
        if step <= eff_tol {
            let candidate = fx;
            let residual = inf_norm_diff(&fixed_point_map(g, params, &candidate), &candidate);
            if residual <= eff_tol {
                return Ok(EquilibriumResult {
                    x_star: candidate,
                    residual,
                    iterations: iteration,
                    threshold_margin: margin,
                    method: EquilibriumMethod::FixedPoint,
                    degraded,
                });
            }
            x = candidate;
            prev_step = residual;
            continue;
        }
        if step > prev_step && damping > min_damping {
            damping *= real::<T>(0.5);
        }
        for i in 0..n {
            let delta = fx[i] - x[i];
            x[i] += damping * delta;
        }
        prev_step = step;
    }
    Err(SisError::NonConvergence {
        residual: best_residual.to_f64().unwrap_or(f64::NAN),
        iterations: EQUILIBRIUM_ITER_CAP,
    })
}

/// ODE-limit equilibrium: integrates from the all-0.5 start until the
/// fixed-point residual reaches `tol` (or `max_time` elapses).
pub fn endemic_equilibrium_ode<T: Real>(
    g: &Graph<T>,
    params: &SisParams<T>,
    tol: T,
    max_time: T,
) -> Result<EquilibriumResult<T>, SisError> {
    let (margin, degraded) = threshold_margin(g, params)?;
    let n = g.n();
    if margin <= T::zero() {
        return Ok(EquilibriumResult {
            x_star: vec![T::zero(); n],
            residual: T::zero(),
            iterations: 0,
            threshold_margin: margin,
            method: EquilibriumMethod::OdeLimit,
            degraded,
        });
    }
    let eff_tol = effective_tol(g, params, tol);
    let dt = default_dt(params, g);
    let slack = real::<T>(STATE_SLACK);
    let mut x = vec![real::<T>(0.5); n];
    let mut t = T::zero();
    let mut step = 0usize;
    let mut residual = T::infinity();
    while t < max_time {
        x = rk4_step(g, params, &x, dt);
        t += dt;
        step += 1;
        for (node, &value) in x.iter().enumerate() {
            if !(value >= -slack && value <= T::one() + slack) {
                return Err(SisError::InvarianceViolation {
                    step,
                    node,
                    value: value.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        if step.is_multiple_of(16) {
            residual = inf_norm_diff(&fixed_point_map(g, params, &x), &x);
            if residual <= eff_tol {
                return Ok(EquilibriumResult {
                    x_star: x,
                    residual,
                    iterations: step,
                    threshold_margin: margin,
                    method: EquilibriumMethod::OdeLimit,
                    degraded,
                });
            }
        }
    }
    Err(SisError::NonConvergence {
        residual: residual.to_f64().unwrap_or(f64::NAN),
        iterations: step,
    })
}

/// Fixed-point iterates climbing from a sub-equilibrium start just above the
/// disease-free state (which is itself a fixed point). The start is
/// `eps * u` with `u` the Perron vector, shrunk until `map(x0) >= x0`
/// entrywise; by monotonicity of the map the sequence is nondecreasing.
pub fn monotone_lower_iterates<T: Real>(
    g: &Graph<T>,
    params: &SisParams<T>,
    tol: T,
    max_iters: usize,
) -> Result<Vec<Vec<T>>, SisError> {
    // The map linearizes to (beta/delta) A^T at zero, so the sub-equilibrium
    // direction is the transpose's Perron vector.
    let (est, perron) = g.transpose().perron_vector(real(1e-12))?;
    let margin = params.beta * est.value / params.delta - T::one();
    if margin <= T::zero() {
        return Err(SisError::BelowThreshold);
    }
    let mut eps = real::<T>(1e-4);
    let mut x0: Vec<T> = perron.iter().map(|&u| eps * u).collect();
    let mut tries = 0;
    loop {
        let fx = fixed_point_map(g, params, &x0);
        if fx.iter().zip(&x0).all(|(&f, &x)| f >= x) {
            break;
        }
        eps *= real::<T>(0.5);
        tries += 1;
        if tries > 200 {
            return Err(SisError::NonConvergence { residual: f64::NAN, iterations: tries });
        }
        x0 = perron.iter().map(|&u| eps * u).collect();
    }
    let mut iterates = vec![x0.clone()];
    let mut x = x0;
    for iteration in 1..=max_iters {
        let fx = fixed_point_map(g, params, &x);
        let step = inf_norm_diff(&fx, &x);
        iterates.push(fx.clone());
        x = fx;
        if step <= tol {
            return Ok(iterates);
        }
        let _ = iteration;
    }
    Err(SisError::NonConvergence { residual: f64::NAN, iterations: max_iters })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkipReason {
    EmptyInterior,
    EmptyBoundary,
}

impl SkipReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::EmptyInterior => "empty_interior",
            SkipReason::EmptyBoundary => "empty_boundary",
        }
    }
}

/// Boundary-minus-interior attribute mean gap of one group.
#[derive(Clone, Debug)]
pub struct DominanceGap<T> {
    pub group: usize,
    pub boundary_mean: Option<T>,
    pub interior_mean: Option<T>,
    pub gap: Option<T>,
    pub dominant: Option<bool>,
    pub skipped: Option<SkipReason>,
}

/// Per-group boundary dominance of an attribute (typically `x*`).
pub fn boundary_dominance<T: Real>(
    g: &Graph<T>,
    p: &Partition,
    roles: &NodeRoles,
    x_star: &[T],
) -> Result<Vec<DominanceGap<T>>, SisError> {
    if p.len() != g.n() {
        return Err(SisError::SizeMismatch { expected: g.n(), got: p.len() });
    }
    if x_star.len() != g.n() {
        return Err(SisError::SizeMismatch { expected: g.n(), got: x_star.len() });
    }
    let k = p.block_count();
    let mut sums = vec![[T::zero(); 2]; k];
    let mut counts = vec![[0usize; 2]; k];
    for v in 0..g.n() {
        let b = p.block_of(v);
        let r = match roles.role_of(v) {
            Role::Interior => 0,
            Role::Boundary => 1,
        };
        sums[b][r] += x_star[v];
        counts[b][r] += 1;
    }
    Ok((0..k)
        .map(|group| {
            let interior_mean =
                (counts[group][0] > 0).then(|| sums[group][0] / real::<T>(counts[group][0] as f64));
            let boundary_mean =
                (counts[group][1] > 0).then(|| sums[group][1] / real::<T>(counts[group][1] as f64));
            match (boundary_mean, interior_mean) {
                (Some(b), Some(i)) => DominanceGap {
                    group,
                    boundary_mean,
                    interior_mean,
                    gap: Some(b - i),
                    dominant: Some(b > i),
                    skipped: None,
                },
                (None, _) => DominanceGap {
                    group,
                    boundary_mean,
                    interior_mean,
                    gap: None,
                    dominant: None,
                    skipped: Some(SkipReason::EmptyBoundary),
                },
                (_, None) => DominanceGap {
                    group,
                    boundary_mean,
                    interior_mean,
                    gap: None,
                    dominant: None,
                    skipped: Some(SkipReason::EmptyInterior),
                },
            }
        })
        .collect())
}

/// Outcome flags of the implication-chain evaluation.
#[derive(Clone, Debug)]
pub struct ChainVerdict {
    pub disease_free: bool,
    /// `Some(true)` iff every evaluable group is boundary-dominant; `None`
    /// when no group has both roles.
    pub dominance_all_groups: Option<bool>,
    /// Dominance established on a nontrivial equilibrium with B->I arcs
    /// present.
    pub premises_hold: bool,
    pub observed_negative: Option<bool>,
    pub chain_holds: bool,
    pub notes: Vec<String>,
}

/// Full pipeline: conductance diagnostics, endemic equilibrium, dominance
/// gaps, equilibrium profile, and the sign-condition check.
#[derive(Clone, Debug)]
pub struct ChainReport<T> {
    pub walk: WalkSpec<T>,
    pub phi_blocks: Vec<Option<T>>,
    pub phi_max: Option<T>,
    pub equilibrium: EquilibriumResult<T>,
    pub dominance: Vec<DominanceGap<T>>,
    pub profile: AssortProfile<T>,
    pub sign: Option<SignConditionsReport<T>>,
    pub verdict: ChainVerdict,
}

const CHAIN_EQ_TOL: f64 = 1e-10;

pub fn implication_chain<T: Real>(
    g: &Graph<T>,
    p: &Partition,
    params: &SisParams<T>,
    walk: &WalkSpec<T>,
) -> Result<ChainReport<T>, SisError> {
    let pmat = transition_matrix(g, walk)?;
    let st = stationary(&pmat, real(1e-13))?;
    let mut phi_blocks = Vec::new();
    for block in p.blocks() {
        let value = match directed_conductance(&st.phi, &pmat, &block) {
            Ok(v) => Some(v),
            Err(SpectralError::TrivialSet) | Err(SpectralError::ZeroMass) => None,
            Err(e) => return Err(e.into()),
        };
        phi_blocks.push(value);
    }
    let phi_max = phi_blocks
        .iter()
        .flatten()
        .copied()
        .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.max(v))));

    let equilibrium = endemic_equilibrium(g, params, real(CHAIN_EQ_TOL))?;
    let roles = classify_roles(g, p)?;
    let strat = stratify_arcs(g, p, &roles)?;
    let dominance = boundary_dominance(g, p, &roles, &equilibrium.x_star)?;
    let profile = profile_scalar(&strat, &equilibrium.x_star)?;

    let mut notes = Vec::new();
    let disease_free = equilibrium.threshold_margin <= T::zero();
    if disease_free {
        notes.push("disease-free: parameters at or below the epidemic threshold".to_string());
    }
    let has_b_to_i = g.directedness() == Directedness::Directed
        && strat.count(Stratum::BoundaryInterior) > 0;
    let sign = if has_b_to_i {
        Some(sign_conditions(g, p, &strat, &equilibrium.x_star)?)
    } else {
        notes.push("no boundary-to-interior arcs; sign conditions not evaluated".to_string());
        None
    };
    for gap in &dominance {
        if let Some(reason) = gap.skipped {
            notes.push(format!("group {} skipped: {}", gap.group, reason.as_str()));
        }
    }

    let evaluable: Vec<&DominanceGap<T>> =
        dominance.iter().filter(|d| d.dominant.is_some()).collect();
    let dominance_all_groups = if evaluable.is_empty() {
        None
    } else {
        Some(evaluable.iter().all(|d| d.dominant == Some(true)))
    };
    let observed_negative = profile
        .b_to_i()
        .and_then(|e| e.coefficient.as_ref().ok().copied())
        .map(|r| r < T::zero());
    let premises_hold = !disease_free && dominance_all_groups == Some(true) && has_b_to_i;
    let chain_holds = premises_hold && observed_negative == Some(true);

    Ok(ChainReport {
        walk: walk.clone(),
        phi_blocks,
        phi_max,
        equilibrium,
        dominance,
        profile,
        sign,
        verdict: ChainVerdict {
            disease_free,
            dominance_all_groups,
            premises_hold,
            observed_negative,
            chain_holds,
            notes,
        },
    })
}
