use super::{damped_fixed_point, log_validity, solve_jacobian, SolveError, SolverConfig};
use crate::model::{DemandResponse, LinearDemandModel};
use crate::tariff::{Tariff, TariffFamily};
use crate::Vector;

/// Optimal two-part tariff for linear demand.
///
/// `G` is deterministic, so the price sensitivity of demand is uncorrelated
/// with `λ` and the optimal price is the expected wholesale price. The
/// connection charge spreads `F − φ̄(λ̄) = F + tr Σ_{λ,Ω}` evenly over customers.
pub fn solve_two_part(
    model: &LinearDemandModel,
    target: f64,
    config: &SolverConfig,
) -> Result<Tariff, SolveError> {
    config.validate()?;
    let price = model.scenarios().mean_price().clone();
    let margin = model.phi_bar(&price)?;
    finish(model, price, margin, model.customers(), target)
}

/// Solves `π = λ̄ + E[∇D(π)]⁻¹ E[∇D(π)(λ − λ̄)]` by damped fixed-point iteration.
pub fn two_part_price_generic<D: DemandResponse>(
    demand: &D,
    config: &SolverConfig,
) -> Result<Vector, SolveError> {
    config.validate()?;
    let mean_price = demand.mean_price().clone();
    damped_fixed_point(
        mean_price.clone(),
        |price| {
            let correction = solve_jacobian(
                demand.mean_jacobian(price),
                &demand.jacobian_price_comovement(price),
            )?;
            Ok(&mean_price + correction)
        },
        config,
    )
}

pub fn solve_two_part_generic<D: DemandResponse>(
    demand: &D,
    customers: u64,
    target: f64,
    config: &SolverConfig,
) -> Result<Tariff, SolveError> {
    let price = two_part_price_generic(demand, config)?;
    let margin = demand.volumetric_margin(&price);
    finish(demand, price, margin, customers, target)
}

fn finish<D: DemandResponse>(
    demand: &D,
    price: Vector,
    margin: f64,
    customers: u64,
    target: f64,
) -> Result<Tariff, SolveError> {
    if customers == 0 {
        return Err(SolveError::NoCustomers);
    }
    log_validity(demand, &price);
    let charge = (target - margin) / customers as f64;
    Ok(Tariff::new(charge, price, TariffFamily::TwoPartOptimal)?)
}
