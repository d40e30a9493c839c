//! Welfare-optimal, revenue-adequate retail electricity tariffs.
//!
//! A regulated retailer buys energy at a stochastic wholesale price `λ` and
//! sells it to customers under an ex-ante tariff `T(q) = A + πᵀq`. Given a
//! linear-quadratic consumer model with aggregate demand `D(π, Ω) = Ω − Gπ`,
//! this crate computes
//!
//! * the optimal two-part tariff (dynamic price plus connection charge),
//! * the optimal linear tariff via the Ramsey number,
//! * the monopoly price and the feasibility frontier for linear tariffs,
//! * flat and fixed-charge comparison tariffs,
//!
//! and sweeps a revenue target `F` to build Pareto fronts of consumer and
//! retailer surplus gains. Brute-force grid and settlement oracles live in
//! [`oracle`], CSV ingestion and demand calibration in [`ingest`].

pub mod checks;
pub mod ingest;
pub mod model;
pub mod numdiff;
pub mod oracle;
pub mod pareto;
pub mod scenario;
pub mod solvers;
pub mod tariff;

pub use model::{
    elasticity_matrix, DemandResponse, ElasticityMatrix, LinearDemandModel, ModelError,
};
pub use scenario::{Scenario, ScenarioSet};
pub use solvers::{RamseySolution, SolveError, SolverConfig};
pub use tariff::{welfare_gains, Tariff, TariffFamily, WelfareReport};

/// Column vector of per-period values (prices in $/kWh, energy in kWh).
pub type Vector = nalgebra::DVector<f64>;
/// Dense `N × N` matrix.
pub type Matrix = nalgebra::DMatrix<f64>;
