use super::{
    bisect_increasing, damped_fixed_point, log_validity, solve_jacobian, two_part_price_generic,
    RamseySolution, SolveError, SolverConfig,
};
use crate::model::{DemandResponse, LinearDemandModel};
use crate::tariff::{Tariff, TariffFamily};
use crate::Vector;

/// Revenue targets attainable by the optimal linear tariff:
/// `[φ̄(π*), φ̄(π^M)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetRange {
    pub min: f64,
    pub max: f64,
}

impl TargetRange {
    fn classify(&self, target: f64, tol: f64) -> Result<(), SolveError> {
        if target > self.max + tol {
            return Err(SolveError::InfeasibleTarget {
                target,
                min: self.min,
                max: self.max,
            });
        }
        if target < self.min - tol {
            return Err(SolveError::InvalidRegime {
                target,
                min: self.min,
            });
        }
        Ok(())
    }
}

/// Price along the linear-demand Ramsey path, `λ̄ + s(π° − λ̄)`.
fn ramsey_path(model: &LinearDemandModel, s: f64) -> Vector {
    let mean_price = model.scenarios().mean_price();
    mean_price + (model.satiation_price() - mean_price) * s
}

/// Unregulated monopoly price `π^M = ½(π° + λ̄)`, the maximizer of `φ̄`.
pub fn monopoly_price(
    model: &LinearDemandModel,
    config: &SolverConfig,
) -> Result<Vector, SolveError> {
    config.validate()?;
    Ok(ramsey_path(model, 0.5))
}

pub fn linear_target_range(
    model: &LinearDemandModel,
    config: &SolverConfig,
) -> Result<TargetRange, SolveError> {
    let min = model.phi_bar(model.scenarios().mean_price())?;
    let max = model.phi_bar(&monopoly_price(model, config)?)?;
    Ok(TargetRange { min, max })
}

/// Optimal linear tariff for linear demand.
///
/// Bisects the markup fraction `s ∈ [0, ½]` so that `φ̄(λ̄ + s(π° − λ̄)) = F`;
/// along this path `φ̄` is increasing, so the root is the low-markup branch.
pub fn solve_linear(
    model: &LinearDemandModel,
    target: f64,
    config: &SolverConfig,
) -> Result<RamseySolution, SolveError> {
    config.validate()?;
    let range = linear_target_range(model, config)?;
    let tol = config.revenue_tolerance(target);
    range.classify(target, tol)?;

    let s = if target <= range.min {
        0.0
    } else if target >= range.max {
        0.5
    } else {
        bisect_increasing(
            0.0,
            0.5,
            target,
            |s| Ok(model.volumetric_margin(&ramsey_path(model, s))),
            config.max_iterations,
        )?
    };
    let prices = ramsey_path(model, s);
    let achieved = model.phi_bar(&prices)?;
    if (achieved - target).abs() > tol {
        return Err(SolveError::NonConvergence {
            iterations: config.max_iterations,
            residual: achieved - target,
        });
    }
    log_validity(model, &prices);
    Ok(RamseySolution::from_markup_fraction(
        prices, s, target, achieved,
    ))
}

/// Fixed point of `π = π* − ρ E[∇D(π)]⁻¹ E[D(π)]`.
fn ramsey_price_generic<D: DemandResponse>(
    demand: &D,
    two_part_price: &Vector,
    ramsey_number: f64,
    start: Vector,
    config: &SolverConfig,
) -> Result<Vector, SolveError> {
    damped_fixed_point(
        start,
        |price| {
            let step = solve_jacobian(demand.mean_jacobian(price), &demand.mean_demand(price))?;
            Ok(two_part_price - step * ramsey_number)
        },
        config,
    )
}

/// Monopoly price of a general demand model: the Ramsey fixed point at `ρ = 1`.
pub fn monopoly_price_generic<D: DemandResponse>(
    demand: &D,
    config: &SolverConfig,
) -> Result<Vector, SolveError> {
    let two_part = two_part_price_generic(demand, config)?;
    ramsey_price_generic(demand, &two_part, 1.0, two_part.clone(), config)
}

/// Optimal linear tariff of a general demand model: outer bisection on
/// `s = ρ/(1+ρ)` against `φ̄ − F`, inner damped fixed point at each `ρ`.
pub fn solve_linear_generic<D: DemandResponse>(
    demand: &D,
    target: f64,
    config: &SolverConfig,
) -> Result<RamseySolution, SolveError> {
    config.validate()?;
    let two_part = two_part_price_generic(demand, config)?;
    let monopoly = ramsey_price_generic(demand, &two_part, 1.0, two_part.clone(), config)?;
    let range = TargetRange {
        min: demand.volumetric_margin(&two_part),
        max: demand.volumetric_margin(&monopoly),
    };
    let tol = config.revenue_tolerance(target);
    range.classify(target, tol)?;

    let price_at = |s: f64| -> Result<Vector, SolveError> {
        if s <= 0.0 {
            return Ok(two_part.clone());
        }
        let rho = s / (1.0 - s);
        ramsey_price_generic(demand, &two_part, rho, two_part.clone(), config)
    };
    let s = if target <= range.min {
        0.0
    } else if target >= range.max {
        0.5
    } else {
        bisect_increasing(
            0.0,
            0.5,
            target,
            |s| Ok(demand.volumetric_margin(&price_at(s)?)),
            config.max_iterations,
        )?
    };
    let prices = if s >= 0.5 { monopoly } else { price_at(s)? };
    let achieved = demand.volumetric_margin(&prices);
    if (achieved - target).abs() > tol {
        return Err(SolveError::NonConvergence {
            iterations: config.max_iterations,
            residual: achieved - target,
        });
    }
    log_validity(demand, &prices);
    Ok(RamseySolution::from_markup_fraction(
        prices, s, target, achieved,
    ))
}

/// Two-part tariff with a prescribed connection charge: the Ramsey price that
/// raises the residual target `F − M·A_fixed` volumetrically.
pub fn solve_fixed_charge_two_part(
    model: &LinearDemandModel,
    target: f64,
    fixed_charge: f64,
    config: &SolverConfig,
) -> Result<(Tariff, RamseySolution), SolveError> {
    let residual = target - model.customers() as f64 * fixed_charge;
    let solution = solve_linear(model, residual, config)?;
    let tariff = Tariff::new(
        fixed_charge,
        solution.prices.clone(),
        TariffFamily::FixedChargeTwoPart,
    )?;
    Ok((tariff, solution))
}
