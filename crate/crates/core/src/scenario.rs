//! Equiprobable empirical joint distribution of wholesale prices and demand states.

use crate::model::ModelError;
use crate::{Matrix, Vector};

/// One sampled billing cycle: wholesale prices `λ_j` and demand state `Ω_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub price: Vector,
    pub state: Vector,
}

impl Scenario {
    pub fn new(price: Vector, state: Vector) -> Self {
        Self { price, state }
    }
}

/// A set of equally likely scenarios together with their first and second
/// moments.
///
/// `cross_covariance()[(k, t)]` is the population (1/J) covariance of `λ_k`
/// with `Ω_t`. Welfare functionals use this convention so that closed-form
/// expectations agree exactly with per-scenario averages. The unbiased
/// 1/(J−1) estimate is available from [`ScenarioSet::sample_cross_covariance`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    scenarios: Vec<Scenario>,
    mean_price: Vector,
    mean_state: Vector,
    cross_covariance: Matrix,
}

impl ScenarioSet {
    pub fn new(scenarios: Vec<Scenario>) -> Result<Self, ModelError> {
        let first = scenarios.first().ok_or(ModelError::EmptyScenarioSet)?;
        let periods = first.price.len();
        if periods == 0 {
            return Err(ModelError::NoPeriods);
        }
        for (j, s) in scenarios.iter().enumerate() {
            for v in [&s.price, &s.state] {
                if v.len() != periods {
                    return Err(ModelError::DimensionMismatch {
                        expected: periods,
                        found: v.len(),
                    });
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(ModelError::NonFinite(format!("scenario {j}")));
                }
            }
            if let Some(k) = s.price.iter().position(|&p| p < 0.0) {
                return Err(ModelError::NegativePrice {
                    scenario: j,
                    period: k,
                    value: s.price[k],
                });
            }
        }

        let count = scenarios.len() as f64;
        let mut mean_price = Vector::zeros(periods);
        let mut mean_state = Vector::zeros(periods);
        for s in &scenarios {
            mean_price += &s.price;
            mean_state += &s.state;
        }
        mean_price /= count;
        mean_state /= count;

        let mut cross_covariance = Matrix::zeros(periods, periods);
        for s in &scenarios {
            let dp = &s.price - &mean_price;
            let ds = &s.state - &mean_state;
            cross_covariance += dp * ds.transpose();
        }
        cross_covariance /= count;

        Ok(Self {
            scenarios,
            mean_price,
            mean_state,
            cross_covariance,
        })
    }

    /// Single scenario with deterministic price and demand state.
    pub fn deterministic(price: Vector, state: Vector) -> Result<Self, ModelError> {
        Self::new(vec![Scenario::new(price, state)])
    }

    pub fn periods(&self) -> usize {
        self.mean_price.len()
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    /// `λ̄`
    pub fn mean_price(&self) -> &Vector {
        &self.mean_price
    }

    /// `Ω̄`
    pub fn mean_state(&self) -> &Vector {
        &self.mean_state
    }

    /// Population cross-covariance `Σ_{λ,Ω}` (1/J normalization).
    pub fn cross_covariance(&self) -> &Matrix {
        &self.cross_covariance
    }

    /// `tr Σ_{λ,Ω}`: the expected wholesale cost in excess of `λ̄ᵀΩ̄`.
    pub fn covariance_trace(&self) -> f64 {
        self.cross_covariance.trace()
    }

    /// Unbiased sample cross-covariance (1/(J−1)); `None` for a single scenario.
    pub fn sample_cross_covariance(&self) -> Option<Matrix> {
        let j = self.scenarios.len();
        if j < 2 {
            return None;
        }
        Some(&self.cross_covariance * (j as f64 / (j - 1) as f64))
    }

    /// Largest absolute sample correlation between any `λ_k` and any `Ω_t`.
    /// Components with zero variance contribute zero.
    pub fn max_abs_cross_correlation(&self) -> f64 {
        let n = self.periods();
        let count = self.scenarios.len() as f64;
        let mut var_p = Vector::zeros(n);
        let mut var_s = Vector::zeros(n);
        for s in &self.scenarios {
            var_p += (&s.price - &self.mean_price).map(|x| x * x);
            var_s += (&s.state - &self.mean_state).map(|x| x * x);
        }
        var_p /= count;
        var_s /= count;

        let mut worst = 0.0_f64;
        for k in 0..n {
            for t in 0..n {
                let denom = (var_p[k] * var_s[t]).sqrt();
                if denom > 0.0 {
                    worst = worst.max((self.cross_covariance[(k, t)] / denom).abs());
                }
            }
        }
        worst.min(1.0)
    }

    /// Same prices, every demand state shifted by `shift`.
    pub fn with_shifted_states(&self, shift: &Vector) -> Result<Self, ModelError> {
        if shift.len() != self.periods() {
            return Err(ModelError::DimensionMismatch {
                expected: self.periods(),
                found: shift.len(),
            });
        }
        let scenarios = self
            .scenarios
            .iter()
            .map(|s| Scenario::new(s.price.clone(), &s.state + shift))
            .collect();
        Self::new(scenarios)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn paired_two_scenarios() -> ScenarioSet {
        ScenarioSet::new(vec![
            Scenario::new(v(&[1.5, 2.5]), v(&[11.0, 9.0])),
            Scenario::new(v(&[0.5, 1.5]), v(&[9.0, 7.0])),
        ])
        .unwrap()
    }

    #[test]
    fn moments_of_paired_scenarios() {
        let set = paired_two_scenarios();
        assert_eq!(set.mean_price(), &v(&[1.0, 2.0]));
        assert_eq!(set.mean_state(), &v(&[10.0, 8.0]));
        assert_relative_eq!(set.covariance_trace(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(set.cross_covariance()[(0, 1)], 0.5, epsilon = 1e-15);
        let sample = set.sample_cross_covariance().unwrap();
        assert_relative_eq!(sample.trace(), 2.0, epsilon = 1e-15);
        assert_relative_eq!(set.max_abs_cross_correlation(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_scenario_has_zero_covariance() {
        let set = ScenarioSet::deterministic(v(&[1.0, 2.0]), v(&[10.0, 8.0])).unwrap();
        assert_eq!(set.covariance_trace(), 0.0);
        assert!(set.sample_cross_covariance().is_none());
        assert_eq!(set.max_abs_cross_correlation(), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            ScenarioSet::new(vec![]),
            Err(ModelError::EmptyScenarioSet)
        ));
        let neg = ScenarioSet::deterministic(v(&[1.0, -0.1]), v(&[1.0, 1.0]));
        assert!(matches!(
            neg,
            Err(ModelError::NegativePrice { period: 1, .. })
        ));
        let ragged = ScenarioSet::new(vec![
            Scenario::new(v(&[1.0, 2.0]), v(&[1.0, 1.0])),
            Scenario::new(v(&[1.0]), v(&[1.0])),
        ]);
        assert!(matches!(ragged, Err(ModelError::DimensionMismatch { .. })));
        let nan = ScenarioSet::deterministic(v(&[1.0, f64::NAN]), v(&[1.0, 1.0]));
        assert!(matches!(nan, Err(ModelError::NonFinite(_))));
    }

    #[test]
    fn shifting_states_keeps_covariance() {
        let set = paired_two_scenarios();
        let shifted = set.with_shifted_states(&v(&[3.0, -1.0])).unwrap();
        assert_eq!(shifted.mean_state(), &v(&[13.0, 7.0]));
        assert_relative_eq!(
            shifted.cross_covariance(),
            set.cross_covariance(),
            epsilon = 1e-14
        );
    }
}
