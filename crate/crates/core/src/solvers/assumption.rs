use super::{SolveError, SolverConfig};
use crate::model::DemandResponse;
use crate::numdiff::{central_jacobian, symmetric_part_eigenvalues};
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssumptionVerdict {
    Pass,
    Fail,
    /// No sample points were supplied, so nothing was checked.
    Vacuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionSample {
    pub price: Vector,
    /// Eigenvalues of the symmetric part of `∇g(π)`, ascending.
    pub eigenvalues: Vec<f64>,
}

impl AssumptionSample {
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .last()
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assumption1Report {
    pub samples: Vec<AssumptionSample>,
    pub verdict: AssumptionVerdict,
}

impl Assumption1Report {
    pub fn passed(&self) -> bool {
        self.verdict != AssumptionVerdict::Fail
    }

    pub fn worst_eigenvalue(&self) -> Option<f64> {
        self.samples
            .iter()
            .map(AssumptionSample::max_eigenvalue)
            .reduce(f64::max)
    }
}

/// Negative definiteness of `∇g(π)`, with `g(π) = E[∇D(π, ω)(π − λ)]`,
/// estimated by central differences at each sample price.
pub fn check_assumption1<D: DemandResponse>(
    demand: &D,
    samples: &[Vector],
    config: &SolverConfig,
) -> Result<Assumption1Report, SolveError> {
    config.validate()?;
    let mut out = Vec::with_capacity(samples.len());
    for price in samples {
        if price.len() != demand.periods() {
            return Err(crate::model::ModelError::DimensionMismatch {
                expected: demand.periods(),
                found: price.len(),
            }
            .into());
        }
        let jac = central_jacobian(|p| demand.margin_map(p), price, config.fd_step);
        out.push(AssumptionSample {
            price: price.clone(),
            eigenvalues: symmetric_part_eigenvalues(&jac),
        });
    }
    let verdict = if out.is_empty() {
        AssumptionVerdict::Vacuous
    } else if out.iter().all(|s| s.max_eigenvalue() < 0.0) {
        AssumptionVerdict::Pass
    } else {
        AssumptionVerdict::Fail
    };
    Ok(Assumption1Report {
        samples: out,
        verdict,
    })
}
