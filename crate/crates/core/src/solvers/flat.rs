use super::{log_validity, SolveError, SolverConfig};
use crate::model::LinearDemandModel;
use crate::tariff::{Tariff, TariffFamily};
use crate::Vector;

/// `φ̄(1p) = −a p² + b p + c` as a function of a single flat rate `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct FlatMargin {
    a: f64,
    b: f64,
    c: f64,
}

impl FlatMargin {
    fn of(model: &LinearDemandModel) -> Self {
        let ones = Vector::repeat(model.periods(), 1.0);
        let g1 = model.g() * &ones;
        let lbar = model.scenarios().mean_price();
        let wbar = model.scenarios().mean_state();
        Self {
            a: ones.dot(&g1),
            b: wbar.sum() + lbar.dot(&g1),
            c: -lbar.dot(wbar) - model.scenarios().covariance_trace(),
        }
    }

    fn eval(&self, p: f64) -> f64 {
        (-self.a * p + self.b) * p + self.c
    }

    fn peak(&self) -> f64 {
        self.b / (2.0 * self.a)
    }

    /// Smaller root of `φ̄(1p) = target`, assuming `target` does not exceed the peak.
    fn low_root(&self, target: f64) -> f64 {
        let k = target - self.c;
        let disc = (self.b * self.b - 4.0 * self.a * k).max(0.0).sqrt();
        if self.b > 0.0 {
            2.0 * k / (self.b + disc)
        } else {
            (self.b - disc) / (2.0 * self.a)
        }
    }
}

/// Flat rate maximizing `φ̄(1p)` and the corresponding margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatRateRange {
    pub peak_rate: f64,
    pub max_margin: f64,
}

pub fn flat_rate_range(model: &LinearDemandModel) -> FlatRateRange {
    let m = FlatMargin::of(model);
    let peak_rate = m.peak();
    FlatRateRange {
        peak_rate,
        max_margin: m.eval(peak_rate),
    }
}

fn flat_rate_for(model: &LinearDemandModel, margin: f64, tol: f64) -> Result<f64, SolveError> {
    let m = FlatMargin::of(model);
    let peak = m.peak();
    let max = m.eval(peak);
    if margin > max + tol {
        return Err(SolveError::InfeasibleTarget {
            target: margin,
            min: f64::NEG_INFINITY,
            max,
        });
    }
    let p = if margin >= max {
        peak
    } else {
        m.low_root(margin).min(peak)
    };
    let achieved = m.eval(p);
    if (achieved - margin).abs() > tol {
        return Err(SolveError::NonConvergence {
            iterations: 0,
            residual: achieved - margin,
        });
    }
    Ok(p)
}

/// Single volumetric rate `p` with `φ̄(1p) = F` on the low-markup branch, `A = 0`.
pub fn solve_flat_linear(
    model: &LinearDemandModel,
    target: f64,
    config: &SolverConfig,
) -> Result<Tariff, SolveError> {
    config.validate()?;
    let p = flat_rate_for(model, target, config.revenue_tolerance(target))?;
    let tariff = Tariff::flat(0.0, p, model.periods(), TariffFamily::FlatLinear)?;
    log_validity(model, tariff.prices());
    Ok(tariff)
}

/// Flat rate `base_rate + Δ` on top of a fixed connection charge, with `Δ`
/// chosen so that `φ̄(1(base_rate + Δ)) + M·A_fixed = F`.
///
/// When the base rate already meets the target on the low branch the
/// returned rate is `base_rate` itself (`Δ = 0` exactly).
pub fn solve_adjusted_flat(
    model: &LinearDemandModel,
    target: f64,
    base_rate: f64,
    fixed_charge: f64,
    config: &SolverConfig,
) -> Result<Tariff, SolveError> {
    config.validate()?;
    let residual = target - model.customers() as f64 * fixed_charge;
    let tol = config.revenue_tolerance(target);
    let m = FlatMargin::of(model);
    let rate = if base_rate <= m.peak() && (m.eval(base_rate) - residual).abs() <= tol {
        base_rate
    } else {
        flat_rate_for(model, residual, tol)?
    };
    let tariff = Tariff::flat(
        fixed_charge,
        rate,
        model.periods(),
        TariffFamily::AdjustedFlat,
    )?;
    log_validity(model, tariff.prices());
    Ok(tariff)
}
