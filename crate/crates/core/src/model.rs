//! Demand models and the welfare functionals built on them.

use nalgebra::linalg::Cholesky;
use nalgebra::Dyn;
use thiserror::Error;

use crate::scenario::ScenarioSet;
use crate::{Matrix, Vector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("scenario set is empty")]
    EmptyScenarioSet,
    #[error("vectors must have at least one period")]
    NoPeriods,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("negative wholesale price {value} in scenario {scenario}, period {period}")]
    NegativePrice {
        scenario: usize,
        period: usize,
        value: f64,
    },
    #[error("G is not symmetric (max asymmetry {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },
    #[error("G is not positive definite")]
    NotPositiveDefinite,
    #[error("expected demand in period {period} is {value}, elasticities undefined")]
    ZeroExpectedDemand { period: usize, value: f64 },
    #[error("tariff invariant violated: {0}")]
    InvalidTariff(String),
}

/// Expectation-level view of a demand function `D(π, ω)` facing an affine
/// tariff with volumetric price `π`.
///
/// The generic solvers work against this trait; [`LinearDemandModel`]
/// provides closed forms for all of it.
pub trait DemandResponse {
    fn periods(&self) -> usize;

    /// `λ̄`
    fn mean_price(&self) -> &Vector;

    /// `E[D(π, ω)]`
    fn mean_demand(&self, price: &Vector) -> Vector;

    /// `E[∇π D(π, ω)]`, entry `(k, t)` is `∂D_k/∂π_t`.
    fn mean_jacobian(&self, price: &Vector) -> Matrix;

    /// `E[∇π D(π, ω) (λ − λ̄)]`; zero when the price sensitivity of demand
    /// is uncorrelated with wholesale prices.
    fn jacobian_price_comovement(&self, price: &Vector) -> Vector;

    /// `φ̄(π) = E[(π − λ)ᵀ D(π, ω)]`
    fn volumetric_margin(&self, price: &Vector) -> f64;

    /// `g(π) = E[∇π D(π, ω)(π − λ)]`, whose Jacobian must be negative definite
    /// for the first-order conditions to characterize unique optima.
    fn margin_map(&self, price: &Vector) -> Vector {
        let markup = price - self.mean_price();
        self.mean_jacobian(price) * markup - self.jacobian_price_comovement(price)
    }
}

/// Aggregate linear demand `D(π, Ω_j) = Ω_j − Gπ` over an equiprobable scenario set.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearDemandModel {
    g: Matrix,
    scenarios: ScenarioSet,
    customers: u64,
    satiation_price: Vector,
}

impl LinearDemandModel {
    pub fn new(g: Matrix, scenarios: ScenarioSet, customers: u64) -> Result<Self, ModelError> {
        let n = scenarios.periods();
        if g.nrows() != n || g.ncols() != n {
            return Err(ModelError::DimensionMismatch {
                expected: n,
                found: if g.nrows() != n { g.nrows() } else { g.ncols() },
            });
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(ModelError::NonFinite("G".into()));
        }
        check_symmetric(&g)?;
        let cholesky = Cholesky::new(g.clone()).ok_or(ModelError::NotPositiveDefinite)?;
        let satiation_price = cholesky.solve(scenarios.mean_state());
        Ok(Self {
            g,
            scenarios,
            customers,
            satiation_price,
        })
    }

    pub fn g(&self) -> &Matrix {
        &self.g
    }

    pub fn scenarios(&self) -> &ScenarioSet {
        &self.scenarios
    }

    pub fn customers(&self) -> u64 {
        self.customers
    }

    pub fn periods(&self) -> usize {
        self.scenarios.periods()
    }

    /// `π° = G⁻¹Ω̄`, the price at which expected demand vanishes.
    pub fn satiation_price(&self) -> &Vector {
        &self.satiation_price
    }

    pub fn cholesky(&self) -> Cholesky<f64, Dyn> {
        // Cannot fail: checked in `new`.
        Cholesky::new(self.g.clone()).expect("G validated positive definite")
    }

    pub fn check_dimension(&self, price: &Vector) -> Result<(), ModelError> {
        if price.len() != self.periods() {
            return Err(ModelError::DimensionMismatch {
                expected: self.periods(),
                found: price.len(),
            });
        }
        if price.iter().any(|x| !x.is_finite()) {
            return Err(ModelError::NonFinite("price vector".into()));
        }
        Ok(())
    }

    /// `E[D(π, Ω)] = Ω̄ − Gπ`
    pub fn expected_demand(&self, price: &Vector) -> Result<Vector, ModelError> {
        self.check_dimension(price)?;
        Ok(self.mean_demand(price))
    }

    /// `φ̄(π) = (π − λ̄)ᵀ(Ω̄ − Gπ) − tr Σ_{λ,Ω}`
    ///
    /// For linear demand `cov(λ, D) = cov(λ, Ω)` because `G` is deterministic.
    pub fn phi_bar(&self, price: &Vector) -> Result<f64, ModelError> {
        self.check_dimension(price)?;
        Ok(self.volumetric_margin(price))
    }

    /// Expected retailer surplus `φ̄(π) + M·A`.
    pub fn retailer_surplus(
        &self,
        price: &Vector,
        connection_charge: f64,
    ) -> Result<f64, ModelError> {
        Ok(self.phi_bar(price)? + self.customers as f64 * connection_charge)
    }

    /// Expected consumer surplus up to the unknown benefit constant `Σ δ(ω)`:
    /// `½πᵀGπ − πᵀΩ̄ − M·A`. Only differences of this quantity are meaningful.
    pub fn consumer_surplus_offset(
        &self,
        price: &Vector,
        connection_charge: f64,
    ) -> Result<f64, ModelError> {
        self.check_dimension(price)?;
        Ok(0.5 * price.dot(&(&self.g * price))
            - price.dot(self.scenarios.mean_state())
            - self.customers as f64 * connection_charge)
    }

    /// Expected total surplus up to the same constant; independent of `A`.
    pub fn social_welfare_offset(&self, price: &Vector) -> Result<f64, ModelError> {
        Ok(self.consumer_surplus_offset(price, 0.0)? + self.phi_bar(price)?)
    }
}

impl DemandResponse for LinearDemandModel {
    fn periods(&self) -> usize {
        self.scenarios.periods()
    }

    fn mean_price(&self) -> &Vector {
        self.scenarios.mean_price()
    }

    fn mean_demand(&self, price: &Vector) -> Vector {
        self.scenarios.mean_state() - &self.g * price
    }

    fn mean_jacobian(&self, _price: &Vector) -> Matrix {
        -&self.g
    }

    fn jacobian_price_comovement(&self, _price: &Vector) -> Vector {
        Vector::zeros(self.periods())
    }

    fn volumetric_margin(&self, price: &Vector) -> f64 {
        let markup = price - self.scenarios.mean_price();
        markup.dot(&self.mean_demand(price)) - self.scenarios.covariance_trace()
    }
}

fn check_symmetric(g: &Matrix) -> Result<(), ModelError> {
    let scale = g.amax().max(1.0);
    let max_asymmetry = (g - g.transpose()).amax();
    if max_asymmetry > 1e-12 * scale {
        return Err(ModelError::NotSymmetric { max_asymmetry });
    }
    Ok(())
}

/// Price elasticities of expected demand, `ε̄_kt(π) = (∂D_k/∂π_t) · π_t / E[D_k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticityMatrix {
    pub price: Vector,
    pub expected_demand: Vector,
    pub values: Matrix,
}

impl ElasticityMatrix {
    pub fn own(&self, period: usize) -> f64 {
        self.values[(period, period)]
    }

    /// Elasticity of total expected consumption with respect to a uniform
    /// proportional price change: `Σ_k E[D_k] Σ_t ε̄_kt / Σ_k E[D_k]`.
    ///
    /// At a flat price `1p` this is `−p·1ᵀG1 / 1ᵀE[D]`.
    pub fn load_weighted_mean(&self) -> f64 {
        let total: f64 = self.expected_demand.sum();
        let weighted: f64 = (0..self.values.nrows())
            .map(|k| self.expected_demand[k] * self.values.row(k).sum())
            .sum();
        weighted / total
    }
}

/// Elasticity matrix of a linear model: `ε̄_kt = −G_kt π_t / E[D_k]`.
pub fn elasticity_matrix(
    model: &LinearDemandModel,
    price: &Vector,
) -> Result<ElasticityMatrix, ModelError> {
    let demand = model.expected_demand(price)?;
    let tol = 1e-12 * model.scenarios().mean_state().amax().max(1.0);
    if let Some(k) = demand.iter().position(|&d| d <= tol) {
        return Err(ModelError::ZeroExpectedDemand {
            period: k,
            value: demand[k],
        });
    }
    let n = model.periods();
    let g = model.g();
    let values = Matrix::from_fn(n, n, |k, t| -g[(k, t)] * price[t] / demand[k]);
    Ok(ElasticityMatrix {
        price: price.clone(),
        expected_demand: demand,
        values,
    })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::scenario::Scenario;

    pub fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    pub fn g2() -> Matrix {
        Matrix::from_row_slice(2, 2, &[2.0, -0.5, -0.5, 1.0])
    }

    /// Deterministic `λ = (1, 2)`, `Ω = (10, 8)`.
    pub fn i2() -> LinearDemandModel {
        let set = ScenarioSet::deterministic(v(&[1.0, 2.0]), v(&[10.0, 8.0])).unwrap();
        LinearDemandModel::new(g2(), set, 1).unwrap()
    }

    /// Two paired scenarios with `tr Σ = 1` (population).
    pub fn i2_cov() -> LinearDemandModel {
        let set = ScenarioSet::new(vec![
            Scenario::new(v(&[1.5, 2.5]), v(&[11.0, 9.0])),
            Scenario::new(v(&[0.5, 1.5]), v(&[9.0, 7.0])),
        ])
        .unwrap();
        LinearDemandModel::new(g2(), set, 1).unwrap()
    }
}
