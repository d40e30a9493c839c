//! Revenue-target sweeps and the Pareto fronts of consumer and retailer
//! surplus gains they trace out.

use rayon::prelude::*;
use thiserror::Error;

use crate::model::LinearDemandModel;
use crate::solvers::{
    linear_target_range, solve_adjusted_flat, solve_fixed_charge_two_part, solve_flat_linear,
    solve_linear, solve_two_part, RamseySolution, SolveError, SolverConfig,
};
use crate::tariff::{welfare_gains, Tariff, TariffFamily, WelfareReport};

pub const DEFAULT_TARGET_COUNT: usize = 41;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParetoError {
    #[error("slope report needs at least 3 feasible points, front has {0}")]
    TooFewPoints(usize),
}

/// Family parameters that are pinned by the baseline tariff: the connection
/// charge of the fixed-charge families and the base rate of the adjusted flat tariff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyInputs {
    pub fixed_charge: f64,
    pub base_rate: f64,
}

impl FamilyInputs {
    pub fn from_baseline(baseline: &Tariff) -> Self {
        let prices = baseline.prices();
        let base_rate = if prices.iter().all(|&p| p == prices[0]) {
            prices[0]
        } else {
            prices.sum() / prices.len() as f64
        };
        Self {
            fixed_charge: baseline.connection_charge(),
            base_rate,
        }
    }
}

/// A solved tariff and, for Ramsey-priced families, its multiplier diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySolution {
    pub tariff: Tariff,
    pub ramsey: Option<RamseySolution>,
}

pub fn solve_family(
    model: &LinearDemandModel,
    family: TariffFamily,
    target: f64,
    inputs: &FamilyInputs,
    config: &SolverConfig,
) -> Result<FamilySolution, SolveError> {
    let (tariff, ramsey) = match family {
        TariffFamily::TwoPartOptimal => (solve_two_part(model, target, config)?, None),
        TariffFamily::LinearOptimal => {
            let sol = solve_linear(model, target, config)?;
            (Tariff::new(0.0, sol.prices.clone(), family)?, Some(sol))
        }
        TariffFamily::FlatLinear => (solve_flat_linear(model, target, config)?, None),
        TariffFamily::FixedChargeTwoPart => {
            let (t, sol) = solve_fixed_charge_two_part(model, target, inputs.fixed_charge, config)?;
            (t, Some(sol))
        }
        TariffFamily::AdjustedFlat => (
            solve_adjusted_flat(model, target, inputs.base_rate, inputs.fixed_charge, config)?,
            None,
        ),
    };
    Ok(FamilySolution { tariff, ramsey })
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointOutcome {
    Feasible {
        solution: FamilySolution,
        gains: WelfareReport,
    },
    Infeasible(SolveError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontPoint {
    pub target: f64,
    pub outcome: PointOutcome,
}

impl FrontPoint {
    pub fn gains(&self) -> Option<&WelfareReport> {
        match &self.outcome {
            PointOutcome::Feasible { gains, .. } => Some(gains),
            PointOutcome::Infeasible(_) => None,
        }
    }

    pub fn tariff(&self) -> Option<&Tariff> {
        match &self.outcome {
            PointOutcome::Feasible { solution, .. } => Some(&solution.tariff),
            PointOutcome::Infeasible(_) => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.gains().is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoFront {
    pub family: TariffFamily,
    pub baseline: Tariff,
    /// Sorted by target ascending.
    pub points: Vec<FrontPoint>,
}

impl ParetoFront {
    pub fn feasible(&self) -> impl Iterator<Item = (f64, &WelfareReport)> {
        self.points
            .iter()
            .filter_map(|p| p.gains().map(|g| (p.target, g)))
    }
}

/// `count` evenly spaced targets spanning the linear-tariff range `[φ̄(π*), φ̄(π^M)]`.
pub fn default_targets(
    model: &LinearDemandModel,
    count: usize,
    config: &SolverConfig,
) -> Result<Vec<f64>, SolveError> {
    let range = linear_target_range(model, config)?;
    Ok(linspace(range.min, range.max, count))
}

pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| {
                if i + 1 == count {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

/// Solves every family at every target and evaluates gains against `baseline`.
/// Targets a family cannot meet are kept as infeasible points.
pub fn sweep(
    model: &LinearDemandModel,
    baseline: &Tariff,
    families: &[TariffFamily],
    targets: &[f64],
    config: &SolverConfig,
) -> Vec<ParetoFront> {
    let mut sorted = targets.to_vec();
    sorted.sort_by(f64::total_cmp);
    let inputs = FamilyInputs::from_baseline(baseline);
    let jobs: Vec<(usize, f64)> = (0..families.len())
        .flat_map(|f| sorted.iter().map(move |&t| (f, t)))
        .collect();
    let outcomes: Vec<FrontPoint> = jobs
        .par_iter()
        .map(|&(f, target)| {
            let outcome =
                solve_family(model, families[f], target, &inputs, config).and_then(|solution| {
                    let gains = welfare_gains(model, &solution.tariff, baseline)?;
                    Ok(PointOutcome::Feasible { solution, gains })
                });
            FrontPoint {
                target,
                outcome: outcome.unwrap_or_else(PointOutcome::Infeasible),
            }
        })
        .collect();

    let mut outcomes = outcomes.into_iter();
    families
        .iter()
        .map(|&family| ParetoFront {
            family,
            baseline: baseline.clone(),
            points: outcomes.by_ref().take(sorted.len()).collect(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeRow {
    pub target: f64,
    /// `dΔr̄s/dΔc̄s` over the segment ending at this point.
    pub slope: f64,
    /// `Δc̄s(F_{i+1}) − 2Δc̄s(F_i) + Δc̄s(F_{i−1})`; absent at the last point.
    pub second_difference: Option<f64>,
}

/// Segment slopes and concavity diagnostics of a front's feasible points.
pub fn front_slope_report(front: &ParetoFront) -> Result<Vec<SlopeRow>, ParetoError> {
    let pts: Vec<(f64, f64, f64)> = front
        .feasible()
        .map(|(f, g)| (f, g.delta_cs, g.delta_rs))
        .collect();
    if pts.len() < 3 {
        return Err(ParetoError::TooFewPoints(pts.len()));
    }
    Ok((1..pts.len())
        .map(|i| {
            let (f, cs, rs) = pts[i];
            let (_, cs0, rs0) = pts[i - 1];
            SlopeRow {
                target: f,
                slope: (rs - rs0) / (cs - cs0),
                second_difference: pts.get(i + 1).map(|&(_, cs1, _)| cs1 - 2.0 * cs + cs0),
            }
        })
        .collect())
}
