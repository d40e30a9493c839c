use nalgebra::SymmetricEigen;

use super::{IngestError, RawSeries, SeriesKind};
use crate::model::{elasticity_matrix, LinearDemandModel};
use crate::scenario::{Scenario, ScenarioSet};
use crate::tariff::{Tariff, TariffFamily};
use crate::{Matrix, Vector};

/// Per-day scenarios of `(λ_j, x_j)` with the unbiased cross-covariance
/// estimate alongside. The scenario set itself keeps population moments.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub scenarios: ScenarioSet,
    /// `Σ_{λ,x}` with `1/(J − 1)` normalization.
    pub sample_cross_covariance: Matrix,
}

pub fn estimate_moments(
    load: &RawSeries,
    prices: &RawSeries,
) -> Result<MomentEstimate, IngestError> {
    if load.kind != SeriesKind::Load || !matches!(prices.kind, SeriesKind::Price(_)) {
        return Err(IngestError::AlignmentMismatch(
            "expected a load series and a price series".into(),
        ));
    }
    if load.periods != prices.periods {
        return Err(IngestError::AlignmentMismatch(format!(
            "load has {} periods per day, prices have {}",
            load.periods, prices.periods
        )));
    }
    if load.day_labels != prices.day_labels {
        return Err(IngestError::AlignmentMismatch(format!(
            "load covers {} days, prices cover {} days, or their day labels differ",
            load.len(),
            prices.len()
        )));
    }
    let scenarios = ScenarioSet::new(
        prices
            .days
            .iter()
            .zip(&load.days)
            .map(|(p, x)| Scenario::new(p.clone(), x.clone()))
            .collect(),
    )?;
    let sample_cross_covariance = scenarios
        .sample_cross_covariance()
        .ok_or(IngestError::SingleScenario)?;
    Ok(MomentEstimate {
        scenarios,
        sample_cross_covariance,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationConfig {
    /// Flat rate `π^CE` in $/kWh under which the consumption data was observed.
    pub flat_rate: f64,
    /// Target load-weighted mean own-price elasticity at `1π^CE` (negative).
    pub elasticity: f64,
    /// Decay of the Toeplitz kernel `α^{|k−t|}`.
    pub alpha: f64,
    pub customers: u64,
    /// Connection charge `A^CE` in $/customer/cycle.
    pub connection_charge: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            flat_rate: 0.172,
            elasticity: -0.3,
            alpha: 0.2,
            customers: 2_200_000,
            connection_charge: 0.52,
        }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        if !self.elasticity.is_finite() {
            return Err(IngestError::InvalidConfig(
                "elasticity must be finite".into(),
            ));
        }
        if self.elasticity >= 0.0 {
            return Err(IngestError::ScaleNonPositive(self.elasticity));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(IngestError::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.flat_rate > 0.0 && self.flat_rate.is_finite()) {
            return Err(IngestError::InvalidConfig(format!(
                "flat rate must be positive, got {}",
                self.flat_rate
            )));
        }
        if self.customers == 0 {
            return Err(IngestError::InvalidConfig(
                "customer count must be at least 1".into(),
            ));
        }
        if !self.connection_charge.is_finite() {
            return Err(IngestError::InvalidConfig(
                "connection charge must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Kac–Murdock–Szegő matrix `G₀[k, t] = α^{|k−t|}`.
pub fn kernel(periods: usize, alpha: f64) -> Matrix {
    Matrix::from_fn(periods, periods, |k, t| alpha.powi(k.abs_diff(t) as i32))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub model: LinearDemandModel,
    /// Scale `c` in `G = c·G₀`.
    pub scale: f64,
    pub realized_elasticity: f64,
    /// Smallest and largest eigenvalue of `G`.
    pub g_eigenvalue_range: (f64, f64),
}

/// Fits `G = c·G₀` so that the load-weighted mean elasticity at the flat rate
/// hits the target, then recovers demand states `Ω_j = x_j + G1π^CE`.
pub fn calibrate_demand(
    consumption: &ScenarioSet,
    config: &CalibrationConfig,
) -> Result<Calibration, IngestError> {
    config.validate()?;
    let n = consumption.periods();
    let total = consumption.mean_state().sum();
    if !(total > 0.0) {
        return Err(IngestError::NonPositiveLoad(total));
    }
    let g0 = kernel(n, config.alpha);
    let ones = Vector::repeat(n, 1.0);
    let scale = -config.elasticity * total / (config.flat_rate * ones.dot(&(&g0 * &ones)));
    let g = g0 * scale;

    let shift = &g * &ones * config.flat_rate;
    let states = consumption.with_shifted_states(&shift)?;
    let model = LinearDemandModel::new(g, states, config.customers)?;

    let flat = Vector::repeat(n, config.flat_rate);
    let realized = elasticity_matrix(&model, &flat)?.load_weighted_mean();
    if (realized - config.elasticity).abs() > 1e-9 {
        return Err(IngestError::CalibrationMismatch {
            realized,
            target: config.elasticity,
        });
    }
    let eig = SymmetricEigen::new(model.g().clone()).eigenvalues;
    Ok(Calibration {
        scale,
        realized_elasticity: realized,
        g_eigenvalue_range: (eig.min(), eig.max()),
        model,
    })
}

/// The incumbent tariff `T^CE`: connection charge `A^CE` and flat rate `π^CE`.
pub fn baseline_tariff(
    flat_rate: f64,
    connection_charge: f64,
    periods: usize,
) -> Result<Tariff, IngestError> {
    Ok(Tariff::flat(
        connection_charge,
        flat_rate,
        periods,
        TariffFamily::AdjustedFlat,
    )?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevenueBaseline {
    /// `E[D(1π^CE, Ω)]ᵀ1·π^CE + M·A^CE`
    pub gross: f64,
    /// `r̄s(T^CE) = φ̄(1π^CE) + M·A^CE`
    pub net: f64,
}

pub fn revenue_baseline(
    model: &LinearDemandModel,
    config: &CalibrationConfig,
) -> Result<RevenueBaseline, IngestError> {
    let flat = Vector::repeat(model.periods(), config.flat_rate);
    let fixed = model.customers() as f64 * config.connection_charge;
    Ok(RevenueBaseline {
        gross: model.expected_demand(&flat)?.sum() * config.flat_rate + fixed,
        net: model.retailer_surplus(&flat, config.connection_charge)?,
    })
}
