//! Optimal tariff solvers.
//!
//! Every solver comes in two flavours. The plain functions take a
//! [`LinearDemandModel`] and use its closed forms (`π* = λ̄`,
//! `π† = λ̄ + s(π° − λ̄)`). The `*_generic` functions take any
//! [`DemandResponse`] and solve the first-order conditions by damped
//! fixed-point iteration; on linear demand both must agree.
//!
//! Whenever two prices meet a revenue target the lower-markup one is
//! returned; the other branch is Pareto-dominated.

mod assumption;
mod flat;
mod planner;
mod ramsey;
mod two_part;

pub use assumption::{check_assumption1, Assumption1Report, AssumptionSample, AssumptionVerdict};
pub use flat::{flat_rate_range, solve_adjusted_flat, solve_flat_linear, FlatRateRange};
pub use planner::{
    planner_bound_gain, planner_gap, PlannerBound, INDEPENDENCE_CORRELATION_THRESHOLD,
};
pub use ramsey::{
    linear_target_range, monopoly_price, monopoly_price_generic, solve_fixed_charge_two_part,
    solve_linear, solve_linear_generic, TargetRange,
};
pub use two_part::{solve_two_part, solve_two_part_generic, two_part_price_generic};

use log::warn;
use thiserror::Error;

use crate::model::{DemandResponse, LinearDemandModel, ModelError};
use crate::{Matrix, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Convergence threshold on the max-norm of a fixed-point update.
    pub fixed_point_tolerance: f64,
    pub max_iterations: usize,
    /// Initial relaxation in `(0, 1]`; halved whenever the iteration oscillates.
    pub damping: f64,
    /// Revenue tolerance factor: `|r̄s − F| ≤ bisection_tolerance · max(1, |F|)`.
    pub bisection_tolerance: f64,
    /// Relative finite-difference step for first derivatives.
    pub fd_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            fixed_point_tolerance: 1e-10,
            max_iterations: 200,
            damping: 1.0,
            bisection_tolerance: 1e-8,
            fd_step: crate::numdiff::GRADIENT_STEP,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        let positive = [
            self.fixed_point_tolerance,
            self.bisection_tolerance,
            self.fd_step,
        ];
        if positive.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(SolveError::InvalidConfig(
                "tolerances must be positive".into(),
            ));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(SolveError::InvalidConfig(
                "damping must lie in (0, 1]".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(SolveError::InvalidConfig(
                "max_iterations must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn revenue_tolerance(&self, target: f64) -> f64 {
        self.bisection_tolerance * target.abs().max(1.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("expected demand Jacobian is numerically singular")]
    SingularJacobian,
    #[error("revenue target {target} is infeasible; attainable range is [{min}, {max}]")]
    InfeasibleTarget { target: f64, min: f64, max: f64 },
    #[error("revenue target {target} is below the two-part margin {min}; linear tariffs need F >= {min}")]
    InvalidRegime { target: f64, min: f64 },
    #[error("model has no customers to carry a connection charge")]
    NoCustomers,
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Optimal linear tariff price and its Lagrange diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RamseySolution {
    pub prices: Vector,
    /// Ramsey number `ρ = (γ − 1)/γ ∈ [0, 1]`.
    pub ramsey_number: f64,
    /// Lagrange multiplier `γ ≥ 1` of the revenue constraint (infinite at the monopoly price).
    pub multiplier: f64,
    /// Markup fraction `s = ρ/(1 + ρ) ∈ [0, ½]`.
    pub markup_fraction: f64,
    pub target: f64,
    pub achieved_rs: f64,
}

impl RamseySolution {
    fn from_markup_fraction(prices: Vector, s: f64, target: f64, achieved_rs: f64) -> Self {
        let ramsey_number = (s / (1.0 - s)).clamp(0.0, 1.0);
        let multiplier = if ramsey_number >= 1.0 {
            f64::INFINITY
        } else {
            1.0 / (1.0 - ramsey_number)
        };
        Self {
            prices,
            ramsey_number,
            multiplier,
            markup_fraction: s,
            target,
            achieved_rs,
        }
    }

    /// Inverse-elasticity residual `max_k |Σ_t −ε̄_kt(π†)(π†_t − π*_t)/π†_t − ρ|`.
    pub fn elasticity_residual(
        &self,
        model: &LinearDemandModel,
        two_part_price: &Vector,
    ) -> Result<f64, ModelError> {
        let e = crate::model::elasticity_matrix(model, &self.prices)?;
        let n = self.prices.len();
        let mut worst = 0.0_f64;
        for k in 0..n {
            let lhs: f64 = (0..n)
                .map(|t| -e.values[(k, t)] * (self.prices[t] - two_part_price[t]) / self.prices[t])
                .sum();
            worst = worst.max((lhs - self.ramsey_number).abs());
        }
        Ok(worst)
    }
}

/// Model-validity conditions the solvers flag but do not enforce.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidityWarning {
    NegativePrice { period: usize, value: f64 },
    NegativeDemand { period: usize, value: f64 },
}

impl std::fmt::Display for ValidityWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidityWarning::NegativePrice { period, value } => {
                write!(f, "price in period {period} is negative ({value})")
            }
            ValidityWarning::NegativeDemand { period, value } => {
                write!(
                    f,
                    "expected demand in period {period} is negative ({value})"
                )
            }
        }
    }
}

pub fn validity_warnings<D: DemandResponse>(demand: &D, prices: &Vector) -> Vec<ValidityWarning> {
    let mut out: Vec<ValidityWarning> = prices
        .iter()
        .enumerate()
        .filter(|(_, &p)| p < 0.0)
        .map(|(period, &value)| ValidityWarning::NegativePrice { period, value })
        .collect();
    out.extend(
        demand
            .mean_demand(prices)
            .iter()
            .enumerate()
            .filter(|(_, &d)| d < 0.0)
            .map(|(period, &value)| ValidityWarning::NegativeDemand { period, value }),
    );
    out
}

fn log_validity<D: DemandResponse>(demand: &D, prices: &Vector) {
    for w in validity_warnings(demand, prices) {
        warn!("{w}");
    }
}

fn solve_jacobian(jacobian: Matrix, rhs: &Vector) -> Result<Vector, SolveError> {
    let scale = jacobian.amax();
    let lu = jacobian.full_piv_lu();
    let min_pivot = lu
        .u()
        .diagonal()
        .iter()
        .fold(f64::INFINITY, |m, d| m.min(d.abs()));
    if !(scale > 0.0) || min_pivot <= 1e-13 * scale {
        return Err(SolveError::SingularJacobian);
    }
    lu.solve(rhs).ok_or(SolveError::SingularJacobian)
}

/// Damped iteration `x ← x + θ(T(x) − x)`. `θ` starts at `config.damping` and
/// is halved when an update reverses direction without at least halving in size.
fn damped_fixed_point<T>(start: Vector, map: T, config: &SolverConfig) -> Result<Vector, SolveError>
where
    T: Fn(&Vector) -> Result<Vector, SolveError>,
{
    let mut x = start;
    let mut damping = config.damping;
    let mut previous: Option<Vector> = None;
    let mut norm = f64::INFINITY;
    for _ in 0..config.max_iterations {
        let image = map(&x)?;
        let update = &image - &x;
        norm = update.amax();
        if !norm.is_finite() {
            break;
        }
        if norm <= config.fixed_point_tolerance {
            return Ok(image);
        }
        if let Some(prev) = &previous {
            if update.dot(prev) < 0.0 && norm > 0.5 * prev.amax() {
                damping *= 0.5;
            }
        }
        x += &update * damping;
        previous = Some(update);
    }
    Err(SolveError::NonConvergence {
        iterations: config.max_iterations,
        residual: norm,
    })
}

/// Bisection on an increasing function over `[lo, hi]` down to machine
/// resolution. Returns the midpoint of the final bracket.
fn bisect_increasing<F>(
    mut lo: f64,
    mut hi: f64,
    target: f64,
    f: F,
    max_iterations: usize,
) -> Result<f64, SolveError>
where
    F: Fn(f64) -> Result<f64, SolveError>,
{
    for _ in 0..max_iterations.max(200) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if f(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
