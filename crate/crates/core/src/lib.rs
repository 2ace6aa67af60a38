//! Interior-boundary analytics for directed weighted graphs.
//!
//! Given a graph and a fixed node partition, this crate classifies nodes as
//! interior or boundary, stratifies arcs by endpoint roles, and computes
//! assortativity coefficients per stratum alongside the exact decomposition
//! that relates the pooled coefficient to the per-stratum ones. On top of the
//! structural layer it provides directed random-walk diagnostics
//! (stationary distributions, conductance, the directed normalized Laplacian
//! and its Cheeger bounds) and mean-field SIS epidemic dynamics whose endemic
//! equilibrium serves as an endogenous node attribute.
//!
//! All numeric kernels are generic over the scalar type via [`num::Real`]
//! (`f32` or `f64`); the type aliases at the crate root fix `f64`, which is
//! what the command-line tool and the generators use.

pub mod assort;
pub mod collapse;
pub mod genlab;
pub mod graph;
pub mod num;
pub mod sis;
pub mod spectral;
pub mod stratify;

pub use graph::Directedness;
pub use stratify::{Direction, NodeRoles, Partition, Role, Stratum};

/// `f64` graph, the concrete type used by the CLI and generators.
pub type Graph = graph::Graph<f64>;
pub type StrengthVectors = graph::StrengthVectors<f64>;
pub type Stratification = stratify::Stratification<f64>;
pub type MixingMatrix = assort::MixingMatrix<f64>;
pub type AssortProfile = assort::AssortProfile<f64>;
pub type CollapseReport = collapse::CollapseReport<f64>;
pub type SignConditionsReport = collapse::SignConditionsReport<f64>;
pub type WalkSpec = spectral::WalkSpec<f64>;
pub type StationaryResult = spectral::StationaryResult<f64>;
pub type SpectralReport = spectral::SpectralReport<f64>;
pub type SisParams = sis::SisParams<f64>;
pub type EquilibriumResult = sis::EquilibriumResult<f64>;
pub type ChainReport = sis::ChainReport<f64>;
