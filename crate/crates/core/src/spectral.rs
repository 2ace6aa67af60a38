//! Directed random-walk machinery: transition matrices with ergodicity
//! remedies, stationary distributions, directed conductance and the exact
//! Cheeger constant, the directed normalized Laplacian with its eigenvalue
//! sandwich, and the truncated spectral proxy for undirected graphs.

use ndarray::Array2;
use thiserror::Error;

use crate::graph::{Directedness, Graph};
use crate::num::{real, Real};
use crate::stratify::Partition;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("matrix is not square: {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid walk specification: {0}")]
    InvalidWalk(String),
    #[error("power iteration did not reach residual {target} within {iterations} iterations (best {best})")]
    NonConvergence { target: f64, best: f64, iterations: usize },
    #[error("subset must be a nonempty proper subset of the nodes")]
    TrivialSet,
    #[error("subset or complement carries no stationary mass")]
    ZeroMass,
    #[error("n = {n} exceeds the brute-force cap {n_max}")]
    TooLarge { n: usize, n_max: usize },
    #[error("stationary mass at node {0} is below the positivity floor")]
    ZeroStationaryMass(usize),
    #[error("matrix is not symmetric (max asymmetry {0})")]
    NotSymmetric(f64),
    #[error("Jacobi eigensolver failed to converge")]
    EigenNoConvergence,
    #[error("operation requires an undirected graph")]
    NotUndirected,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("k = {k} out of range for n = {n}")]
    InvalidK { k: usize, n: usize },
}

/// Ergodicity remedy applied to the base walk.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Remedy {
    None,
    Lazy,
    Teleport,
}

impl Remedy {
    pub fn as_str(self) -> &'static str {
        match self {
            Remedy::None => "none",
            Remedy::Lazy => "lazy",
            Remedy::Teleport => "teleport",
        }
    }
}

/// Random-walk specification: base walk plus an optional remedy.
#[derive(Clone, Debug)]
pub struct WalkSpec<T> {
    pub remedy: Remedy,
    /// Teleport damping; ignored unless `remedy == Teleport`.
    pub alpha: T,
    /// Teleport target distribution; uniform when `None`.
    pub pi0: Option<Vec<T>>,
}

impl<T: Real> WalkSpec<T> {
    pub fn none() -> Self {
        WalkSpec { remedy: Remedy::None, alpha: T::one(), pi0: None }
    }

    pub fn lazy() -> Self {
        WalkSpec { remedy: Remedy::Lazy, alpha: T::one(), pi0: None }
    }

    pub fn teleport(alpha: T, pi0: Option<Vec<T>>) -> Self {
        WalkSpec { remedy: Remedy::Teleport, alpha, pi0 }
    }

    /// Lazy walk for strongly connected graphs (kills periodicity), teleport
    /// with the conventional damping 0.85 otherwise.
    pub fn auto(g: &Graph<T>) -> Self {
        if g.is_strongly_connected() {
            WalkSpec::lazy()
        } else {
            WalkSpec::teleport(real(0.85), None)
        }
    }

    fn teleport_target(&self, n: usize) -> Result<Vec<T>, SpectralError> {
        match &self.pi0 {
            None => Ok(vec![T::one() / real::<T>(n as f64); n]),
            Some(pi0) => {
                if pi0.len() != n {
                    return Err(SpectralError::InvalidWalk(format!(
                        "pi0 has length {}, expected {}",
                        pi0.len(),
                        n
                    )));
                }
                if pi0.iter().any(|&v| v < T::zero()) {
                    return Err(SpectralError::InvalidWalk("pi0 has negative entries".into()));
                }
                let total: T = pi0.iter().copied().sum();
                if (total - T::one()).abs() > real::<T>(1e-12) {
                    return Err(SpectralError::InvalidWalk(format!(
                        "pi0 sums to {}, expected 1",
                        total
                    )));
                }
                Ok(pi0.clone())
            }
        }
    }

    fn validate(&self, n: usize) -> Result<(), SpectralError> {
        if self.remedy == Remedy::Teleport {
            if !(self.alpha > T::zero() && self.alpha < T::one()) {
                return Err(SpectralError::InvalidWalk(format!(
                    "teleport damping must lie in (0, 1), got {}",
                    self.alpha
                )));
            }
            self.teleport_target(n)?;
        }
        Ok(())
    }
}

/// Row-stochastic transition matrix of the walk.
///
/// Base walk: `P(u, v) = w_uv / sum_z w_uz`, with all-zero rows kept for
/// nodes without out-arcs. Lazy: `(I + P) / 2`. Teleport: zero rows are
/// first replaced by the target distribution, then
/// `P_a = a P + (1 - a) 1 pi0^T`.
pub fn transition_matrix<T: Real>(
    g: &Graph<T>,
    spec: &WalkSpec<T>,
) -> Result<Array2<T>, SpectralError> {
    let n = g.n();
    spec.validate(n)?;
    let mut p = Array2::zeros((n, n));
    for u in 0..n {
        let row = g.out_row(u);
        let total: T = row.iter().map(|&(_, w)| w).sum();
        if total > T::zero() {
            for &(v, w) in row {
                p[(u, v)] = w / total;
            }
        }
    }
    match spec.remedy {
        Remedy::None => {}
        Remedy::Lazy => {
            let half = real::<T>(0.5);
            p.mapv_inplace(|v| v * half);
            for u in 0..n {
                p[(u, u)] += half;
            }
        }
        Remedy::Teleport => {
            let pi0 = spec.teleport_target(n)?;
            for u in 0..n {
                let total: T = (0..n).map(|v| p[(u, v)]).sum();
                if total <= T::zero() {
                    for v in 0..n {
                        p[(u, v)] = pi0[v];
                    }
                }
            }
            let alpha = spec.alpha;
            let rest = T::one() - alpha;
            for u in 0..n {
                for v in 0..n {
                    p[(u, v)] = alpha * p[(u, v)] + rest * pi0[v];
                }
            }
        }
    }
    Ok(p)
}

/// Stationary distribution estimate with its L1 stationarity residual.
#[derive(Clone, Debug)]
pub struct StationaryResult<T> {
    pub phi: Vec<T>,
    /// `||phi^T P - phi^T||_1` of the returned vector.
    pub residual: T,
    pub iterations: usize,
    /// Negative roundoff entries were clamped to zero and renormalized.
    pub clamped: bool,
}

const STATIONARY_ITER_CAP: usize = 1_000_000;

/// Left power iteration from the uniform start until the L1 residual drops
/// below `tol`.
pub fn stationary<T: Real>(
    pmat: &Array2<T>,
    tol: T,
) -> Result<StationaryResult<T>, SpectralError> {
    let (rows, cols) = pmat.dim();
    if rows != cols {
        return Err(SpectralError::NotSquare { rows, cols });
    }
    let n = rows;
    let mut phi = vec![T::one() / real::<T>(n as f64); n];
    let mut clamped = false;
    let mut residual = T::infinity();
    for iteration in 1..=STATIONARY_ITER_CAP {
        let mut next = vec![T::zero(); n];
        for i in 0..n {
            let pi = phi[i];
            if pi == T::zero() {
                continue;
            }
            for j in 0..n {
                next[j] += pi * pmat[(i, j)];
            }
        }
        residual = phi.iter().zip(&next).map(|(&a, &b)| (a - b).abs()).sum();
        if residual <= tol {
            return Ok(StationaryResult { phi, residual, iterations: iteration - 1, clamped });
        }
        let mut negative = false;
        for v in next.iter_mut() {
            if *v < T::zero() {
                *v = T::zero();
                negative = true;
            }
        }
        if negative {
            clamped = true;
        }
        let total: T = next.iter().copied().sum();
        if total > T::zero() {
            for v in next.iter_mut() {
                *v /= total;
            }
        }
        phi = next;
    }
    Err(SpectralError::NonConvergence {
        target: tol.to_f64().unwrap_or(f64::NAN),
        best: residual.to_f64().unwrap_or(f64::NAN),
        iterations: STATIONARY_ITER_CAP,
    })
}

fn check_phi_dim<T>(phi: &[T], pmat: &Array2<T>) -> Result<usize, SpectralError> {
    let (rows, cols) = pmat.dim();
    if rows != cols {
        return Err(SpectralError::NotSquare { rows, cols });
    }
    if phi.len() != rows {
        return Err(SpectralError::DimensionMismatch(format!(
            "phi has length {}, matrix is {} x {}",
            phi.len(),
            rows,
            cols
        )));
    }
    Ok(rows)
}

/// Directed conductance `Phi(S) = F(d+ S) / min(phi(S), phi(V \ S))` with
/// stationary flow `F(u, v) = phi(u) P(u, v)`.
pub fn directed_conductance<T: Real>(
    phi: &[T],
    pmat: &Array2<T>,
    subset: &[usize],
) -> Result<T, SpectralError> {
    let n = check_phi_dim(phi, pmat)?;
    let mut in_set = vec![false; n];
    for &v in subset {
        if v >= n {
            return Err(SpectralError::DimensionMismatch(format!(
                "subset node {} out of range for n = {}",
                v, n
            )));
        }
        in_set[v] = true;
    }
    let size = in_set.iter().filter(|&&b| b).count();
    if size == 0 || size == n {
        return Err(SpectralError::TrivialSet);
    }
    conductance_of_mask(phi, pmat, &in_set).ok_or(SpectralError::ZeroMass)
}

fn conductance_of_mask<T: Real>(phi: &[T], pmat: &Array2<T>, in_set: &[bool]) -> Option<T> {
    let n = phi.len();
    let mut mass_in = T::zero();
    let mut mass_out = T::zero();
    for v in 0..n {
        if in_set[v] {
            mass_in += phi[v];
        } else {
            mass_out += phi[v];
        }
    }
    let denom = mass_in.min(mass_out);
    if denom <= T::zero() {
        return None;
    }
    let mut flow = T::zero();
    for u in 0..n {
        if !in_set[u] || phi[u] == T::zero() {
            continue;
        }
        for v in 0..n {
            if !in_set[v] {
                flow += phi[u] * pmat[(u, v)];
            }
        }
    }
    Some(flow / denom)
}

/// Exact directed Cheeger constant by enumeration of all proper subsets.
pub fn cheeger_constant_bruteforce<T: Real>(
    phi: &[T],
    pmat: &Array2<T>,
    n_max: usize,
) -> Result<T, SpectralError> {
    let n = check_phi_dim(phi, pmat)?;
    if n > n_max {
        return Err(SpectralError::TooLarge { n, n_max });
    }
    if n < 2 {
        return Err(SpectralError::TrivialSet);
    }
    let mut best: Option<T> = None;
    let full: u64 = (1u64 << n) - 1;
    let mut in_set = vec![false; n];
    for mask in 1..full {
        for (v, flag) in in_set.iter_mut().enumerate() {
            *flag = mask & (1 << v) != 0;
        }
        if let Some(value) = conductance_of_mask(phi, pmat, &in_set) {
            best = Some(best.map_or(value, |b: T| b.min(value)));
        }
    }
    best.ok_or(SpectralError::ZeroMass)
}

const PHI_FLOOR: f64 = 1e-15;

/// Directed normalized Laplacian
/// `L = I - (Phi^{1/2} P Phi^{-1/2} + Phi^{-1/2} P^T Phi^{1/2}) / 2`,
/// assembled symmetrically.
pub fn chung_laplacian<T: Real>(
    phi: &[T],
    pmat: &Array2<T>,
) -> Result<Array2<T>, SpectralError> {
    let n = check_phi_dim(phi, pmat)?;
    let floor = real::<T>(PHI_FLOOR);
    if let Some(v) = phi.iter().position(|&p| p < floor) {
        return Err(SpectralError::ZeroStationaryMass(v));
    }
    let sqrt_phi: Vec<T> = phi.iter().map(|&p| p.sqrt()).collect();
    let half = real::<T>(0.5);
    let mut l = Array2::zeros((n, n));
    for i in 0..n {
        l[(i, i)] = T::one() - pmat[(i, i)];
        for j in (i + 1)..n {
            let forward = sqrt_phi[i] * pmat[(i, j)] / sqrt_phi[j];
            let backward = sqrt_phi[j] * pmat[(j, i)] / sqrt_phi[i];
            let value = -half * (forward + backward);
            l[(i, j)] = value;
            l[(j, i)] = value;
        }
    }
    Ok(l)
}

/// Full symmetric eigendecomposition, eigenvalues ascending with orthonormal
/// eigenvector columns.
#[derive(Clone, Debug)]
pub struct SymEigen<T> {
    pub values: Vec<T>,
    /// Column `i` is the eigenvector of `values[i]`.
    pub vectors: Array2<T>,
}

const JACOBI_SWEEP_CAP: usize = 100;

/// Cyclic Jacobi eigensolver for symmetric matrices.
pub fn eigen_sym<T: Real>(m: &Array2<T>) -> Result<SymEigen<T>, SpectralError> {
    let (rows, cols) = m.dim();
    if rows != cols {
        return Err(SpectralError::NotSquare { rows, cols });
    }
    let n = rows;
    let scale = m.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()));
    let sym_tol = real::<T>(1e-10) * T::one().max(scale);
    let mut asym = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if asym > sym_tol {
        return Err(SpectralError::NotSymmetric(asym.to_f64().unwrap_or(f64::NAN)));
    }

    let half = real::<T>(0.5);
    let mut a = m.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = half * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let mut v: Array2<T> = Array2::eye(n);

    if n > 1 {
        let hundred = real::<T>(100.0);
        let mut converged = false;
        for sweep in 0..JACOBI_SWEEP_CAP {
            let mut off = T::zero();
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)].abs();
                }
            }
            if off == T::zero() {
                converged = true;
                break;
            }
            let threshold = if sweep < 3 {
                real::<T>(0.2) * off / real::<T>((n * n) as f64)
            } else {
                T::zero()
            };
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    let g = hundred * apq.abs();
                    if sweep > 3
                        && a[(p, p)].abs() + g == a[(p, p)].abs()
                        && a[(q, q)].abs() + g == a[(q, q)].abs()
                    {
                        a[(p, q)] = T::zero();
                        a[(q, p)] = T::zero();
                        continue;
                    }
                    if apq.abs() <= threshold {
                        continue;
                    }
                    let h = a[(q, q)] - a[(p, p)];
                    let t = if h.abs() + g == h.abs() {
                        apq / h
                    } else {
                        let theta = half * h / apq;
                        let mut t = T::one() / (theta.abs() + (T::one() + theta * theta).sqrt());
                        if theta < T::zero() {
                            t = -t;
                        }
                        t
                    };
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = t * c;
                    let tau = s / (T::one() + c);
                    let h = t * apq;
                    a[(p, p)] -= h;
                    a[(q, q)] += h;
                    a[(p, q)] = T::zero();
                    a[(q, p)] = T::zero();
                    let rotate = |mat: &mut Array2<T>, i: usize, j: usize, k: usize, l: usize| {
                        let g = mat[(i, j)];
                        let hh = mat[(k, l)];
                        mat[(i, j)] = g - s * (hh + g * tau);
                        mat[(k, l)] = hh + s * (g - hh * tau);
                    };
                    for j in 0..p {
                        rotate(&mut a, j, p, j, q);
                        a[(p, j)] = a[(j, p)];
                        a[(q, j)] = a[(j, q)];
                    }
                    for j in (p + 1)..q {
                        rotate(&mut a, p, j, j, q);
                        a[(j, p)] = a[(p, j)];
                        a[(q, j)] = a[(j, q)];
                    }
                    for j in (q + 1)..n {
                        rotate(&mut a, p, j, q, j);
                        a[(j, p)] = a[(p, j)];
                        a[(j, q)] = a[(q, j)];
                    }
                    for j in 0..n {
                        rotate(&mut v, j, p, j, q);
                    }
                }
            }
        }
        if !converged {
            // One final check: the threshold strategy zeroes tiny elements,
            // so exact zero is reachable; anything left means failure.
            let mut off = T::zero();
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)].abs();
                }
            }
            if off > real::<T>(1e-12) * T::one().max(scale) {
                return Err(SpectralError::EigenNoConvergence);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(i, i)].partial_cmp(&a[(j, j)]).unwrap_or(std::cmp::Ordering::Equal)
    });
    let values: Vec<T> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, new_col)] = v[(row, old_col)];
        }
    }
    Ok(SymEigen { values, vectors })
}

/// Cheeger sandwich evaluation `h^2/2 <= lambda_2 <= 2h`.
#[derive(Clone, Copy, Debug)]
pub struct SandwichCheck<T> {
    pub lower: T,
    pub lambda2: T,
    pub upper: T,
    pub holds: bool,
}

/// Full spectral diagnostics of a graph under a walk specification.
#[derive(Clone, Debug)]
pub struct SpectralReport<T> {
    pub walk: WalkSpec<T>,
    pub stationary: StationaryResult<T>,
    /// Ascending eigenvalues of the directed normalized Laplacian.
    pub eigenvalues: Vec<T>,
    /// Exact Cheeger constant (only when `n <= n_max`).
    pub h_exact: Option<T>,
    /// Per-block directed conductance; `None` for blocks where it is
    /// undefined (single-block partitions).
    pub phi_blocks: Option<Vec<Option<T>>>,
    /// `Phi_max(P) = max_k Phi(V_k)`.
    pub phi_max: Option<T>,
    pub sandwich: Option<SandwichCheck<T>>,
}

const STATIONARY_TOL: f64 = 1e-13;
const SANDWICH_SLACK: f64 = 1e-8;

/// Runs the walk pipeline and checks the directed Cheeger inequality against
/// the brute-force constant where feasible.
pub fn cheeger_check<T: Real>(
    g: &Graph<T>,
    partition: Option<&Partition>,
    spec: &WalkSpec<T>,
    n_max: usize,
) -> Result<SpectralReport<T>, SpectralError> {
    let pmat = transition_matrix(g, spec)?;
    let st = stationary(&pmat, real(STATIONARY_TOL))?;
    let lap = chung_laplacian(&st.phi, &pmat)?;
    let eig = eigen_sym(&lap)?;

    let h_exact = if g.n() >= 2 && g.n() <= n_max {
        Some(cheeger_constant_bruteforce(&st.phi, &pmat, n_max)?)
    } else {
        None
    };

    let (phi_blocks, phi_max) = match partition {
        Some(p) => {
            let mut values = Vec::new();
            for block in p.blocks() {
                let value = match directed_conductance(&st.phi, &pmat, &block) {
                    Ok(v) => Some(v),
                    Err(SpectralError::TrivialSet) | Err(SpectralError::ZeroMass) => None,
                    Err(e) => return Err(e),
                };
                values.push(value);
            }
            let max = values.iter().flatten().copied().fold(None, |acc: Option<T>, v| {
                Some(acc.map_or(v, |a| a.max(v)))
            });
            (Some(values), max)
        }
        None => (None, None),
    };

    let sandwich = h_exact.map(|h| {
        let lambda2 = eig.values[1];
        let lower = h * h / real::<T>(2.0);
        let upper = real::<T>(2.0) * h;
        let eps = real::<T>(SANDWICH_SLACK);
        SandwichCheck {
            lower,
            lambda2,
            upper,
            holds: lower - eps <= lambda2 && lambda2 <= upper + eps,
        }
    });

    Ok(SpectralReport {
        walk: spec.clone(),
        stationary: st,
        eigenvalues: eig.values,
        h_exact,
        phi_blocks,
        phi_max,
        sandwich,
    })
}

/// Truncated spectral proxy `s_k(v) = sum_{i=2}^{k+1} u_i(v)^2 / lambda_i`
/// of the normalized Laplacian, with the tail bound `1 / lambda_{k+2}`.
#[derive(Clone, Debug)]
pub struct SpectralProxy<T> {
    pub k: usize,
    pub s_k: Vec<T>,
    pub s_inf: Vec<T>,
    /// Upper bound on `s_inf(v) - s_k(v)`; zero when the sum is complete.
    pub tail_bound: T,
    pub eigenvalues: Vec<T>,
}

pub fn spectral_proxy<T: Real>(g: &Graph<T>, k: usize) -> Result<SpectralProxy<T>, SpectralError> {
    if g.directedness() != Directedness::Undirected {
        return Err(SpectralError::NotUndirected);
    }
    let n = g.n();
    if n < 2 || !g.is_strongly_connected() {
        return Err(SpectralError::Disconnected);
    }
    if k > n - 1 {
        return Err(SpectralError::InvalidK { k, n });
    }
    let strengths = g.strengths();
    let inv_sqrt_deg: Vec<T> = strengths
        .out_strength
        .iter()
        .map(|&d| T::one() / d.sqrt())
        .collect();
    let mut lap = Array2::eye(n);
    for (i, j, w) in g.matrix_entries() {
        lap[(i, j)] -= w * inv_sqrt_deg[i] * inv_sqrt_deg[j];
    }
    let eig = eigen_sym(&lap)?;
    if eig.values[1] <= real::<T>(1e-12) {
        return Err(SpectralError::Disconnected);
    }
    let partial = |count: usize| -> Vec<T> {
        (0..n)
            .map(|v| {
                let mut acc = T::zero();
                for i in 1..=count {
                    let u = eig.vectors[(v, i)];
                    acc += u * u / eig.values[i];
                }
                acc
            })
            .collect()
    };
    let s_k = partial(k);
    let s_inf = partial(n - 1);
    let tail_bound = if k < n - 1 { T::one() / eig.values[k + 1] } else { T::zero() };
    Ok(SpectralProxy { k, s_k, s_inf, tail_bound, eigenvalues: eig.values })
}
