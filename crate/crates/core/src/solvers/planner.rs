use log::warn;

use crate::model::{LinearDemandModel, ModelError};
use crate::tariff::{welfare_gains, Tariff, TariffFamily};

/// Scenario sets whose largest absolute `λ`–`Ω` correlation exceeds this are
/// treated as violating independence, and the planner bound is only advisory.
pub const INDEPENDENCE_CORRELATION_THRESHOLD: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerBound {
    /// Social welfare gain of pricing at `λ̄`, relative to the baseline.
    pub gain: f64,
    pub max_abs_correlation: f64,
    pub independence_violated: bool,
}

/// Upper bound on the welfare gain of any tariff when wholesale prices and
/// demand states are independent: the planner's optimum consumes `D(λ̄, ω)`,
/// which the two-part tariff at `π = λ̄` implements.
pub fn planner_bound_gain(
    model: &LinearDemandModel,
    baseline: &Tariff,
) -> Result<PlannerBound, ModelError> {
    let at_mean = Tariff::new(
        baseline.connection_charge(),
        model.scenarios().mean_price().clone(),
        TariffFamily::TwoPartOptimal,
    )?;
    let gain = welfare_gains(model, &at_mean, baseline)?.delta_sw;
    let max_abs_correlation = model.scenarios().max_abs_cross_correlation();
    let independence_violated = max_abs_correlation > INDEPENDENCE_CORRELATION_THRESHOLD;
    if independence_violated {
        warn!(
            "wholesale prices and demand states are correlated (max |corr| = {max_abs_correlation:.3}); \
             the planner bound need not be attainable"
        );
    }
    Ok(PlannerBound {
        gain,
        max_abs_correlation,
        independence_violated,
    })
}

/// `planner bound − Δs̄w(tariff)`, both relative to `baseline`.
pub fn planner_gap(
    model: &LinearDemandModel,
    tariff: &Tariff,
    baseline: &Tariff,
) -> Result<f64, ModelError> {
    let bound = planner_bound_gain(model, baseline)?;
    Ok(bound.gain - welfare_gains(model, tariff, baseline)?.delta_sw)
}
