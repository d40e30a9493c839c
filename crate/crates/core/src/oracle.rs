//! Brute-force verifiers: exhaustive grid search for welfare maximizers and
//! per-scenario settlement accounting. Neither uses the solvers.

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{LinearDemandModel, ModelError};
use crate::tariff::Tariff;
use crate::Vector;

pub const MAX_GRID_DIMENSIONS: usize = 3;
pub const DEFAULT_GRID_STEPS: usize = 400;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("grid oracle supports at most {MAX_GRID_DIMENSIONS} periods, model has {0}")]
    TooManyDimensions(usize),
    #[error("invalid grid axis {axis}: need lo < hi and at least 2 steps")]
    InvalidAxis { axis: usize },
    #[error("no grid point satisfies the constraint")]
    EmptyFeasibleSet,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl GridAxis {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Self {
        Self { lo, hi, steps }
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.steps - 1) as f64
    }

    fn value(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            self.hi
        } else {
            self.lo + i as f64 * self.spacing()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<GridAxis>,
}

impl GridSpec {
    /// Same axis in every dimension.
    pub fn square(periods: usize, lo: f64, hi: f64, steps: usize) -> Self {
        Self {
            axes: vec![GridAxis::new(lo, hi, steps); periods],
        }
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if self.axes.len() > MAX_GRID_DIMENSIONS {
            return Err(OracleError::TooManyDimensions(self.axes.len()));
        }
        for (axis, a) in self.axes.iter().enumerate() {
            if !(a.lo < a.hi) || a.steps < 2 || !a.lo.is_finite() || !a.hi.is_finite() {
                return Err(OracleError::InvalidAxis { axis });
            }
        }
        Ok(())
    }

    /// Largest spacing over all axes.
    pub fn step(&self) -> f64 {
        self.axes.iter().map(GridAxis::spacing).fold(0.0, f64::max)
    }

    fn node_count(&self) -> usize {
        self.axes.iter().map(|a| a.steps).product()
    }

    fn unravel(&self, mut flat: usize, idx: &mut [usize]) {
        for d in (0..self.axes.len()).rev() {
            idx[d] = flat % self.axes[d].steps;
            flat /= self.axes[d].steps;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RevenueConstraint {
    None,
    /// Keep grid nodes with `|r̄s − F| ≤ band`.
    Band {
        target: f64,
        band: f64,
    },
    /// Search the level set `r̄s = F` at its linearly interpolated crossings
    /// of grid edges instead of at the nodes.
    LevelSet {
        target: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConstraint {
    pub revenue: RevenueConstraint,
    /// Connection charge entering `r̄s = φ̄(π) + M·A`.
    pub connection_charge: f64,
    /// Restrict to flat prices `π = 1p`, with `p` on the first axis.
    pub flat: bool,
}

impl GridConstraint {
    pub fn unconstrained() -> Self {
        Self {
            revenue: RevenueConstraint::None,
            connection_charge: 0.0,
            flat: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOptimum {
    pub price: Vector,
    pub delta_sw: f64,
    /// Largest grid spacing, the resolution of `price`.
    pub step: f64,
}

struct Candidate {
    price: Point,
    value: f64,
}

fn better(a: Candidate, b: Candidate) -> Candidate {
    if a.value > b.value {
        return a;
    }
    if b.value > a.value {
        return b;
    }
    let a_first = a
        .price
        .iter()
        .zip(&b.price)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .is_none_or(|o| o.is_lt());
    if a_first {
        a
    } else {
        b
    }
}

/// Exhaustive maximization of the welfare gain over `grid` under `constraint`.
/// Ties go to the lexicographically smallest price.
pub fn grid_argmax_welfare(
    model: &LinearDemandModel,
    baseline: &Tariff,
    constraint: &GridConstraint,
    grid: &GridSpec,
) -> Result<GridOptimum, OracleError> {
    let n = model.periods();
    if n > MAX_GRID_DIMENSIONS {
        return Err(OracleError::TooManyDimensions(n));
    }
    model.check_dimension(baseline.prices())?;
    let grid = if constraint.flat {
        GridSpec {
            axes: vec![grid
                .axes
                .first()
                .copied()
                .ok_or(OracleError::InvalidAxis { axis: 0 })?],
        }
    } else {
        if grid.axes.len() != n {
            return Err(ModelError::DimensionMismatch {
                expected: n,
                found: grid.axes.len(),
            }
            .into());
        }
        grid.clone()
    };
    grid.validate()?;

    let surface = Surface::new(model, constraint.connection_charge, constraint.flat);
    let base_sw = model.social_welfare_offset(baseline.prices())?;
    let dims = grid.axes.len();
    let sw = |coords: &Point| surface.welfare(coords) - base_sw;
    let gap = |coords: &Point, target: f64| surface.revenue(coords) - target;

    let best = (0..grid.node_count())
        .into_par_iter()
        .fold(
            || None::<Candidate>,
            |mut acc, flat| {
                let mut idx = [0usize; MAX_GRID_DIMENSIONS];
                grid.unravel(flat, &mut idx[..dims]);
                let mut coords: Point = [0.0; MAX_GRID_DIMENSIONS];
                for d in 0..dims {
                    coords[d] = grid.axes[d].value(idx[d]);
                }
                let mut offer = |price: Point, value: f64| {
                    let c = Candidate { price, value };
                    acc = Some(match acc.take() {
                        Some(a) => better(a, c),
                        None => c,
                    });
                };
                match constraint.revenue {
                    RevenueConstraint::None => offer(coords, sw(&coords)),
                    RevenueConstraint::Band { target, band } => {
                        if gap(&coords, target).abs() <= band {
                            offer(coords, sw(&coords));
                        }
                    }
                    RevenueConstraint::LevelSet { target } => {
                        let h0 = gap(&coords, target);
                        if h0 == 0.0 {
                            offer(coords, sw(&coords));
                        }
                        for d in 0..dims {
                            if idx[d] + 1 >= grid.axes[d].steps {
                                continue;
                            }
                            let mut next = coords;
                            next[d] = grid.axes[d].value(idx[d] + 1);
                            let h1 = gap(&next, target);
                            if h0 != 0.0 && h1 != 0.0 && (h0 < 0.0) != (h1 < 0.0) {
                                let t = h0 / (h0 - h1);
                                let mut cross = coords;
                                cross[d] += t * (next[d] - coords[d]);
                                offer(cross, sw(&cross));
                            }
                        }
                    }
                }
                acc
            },
        )
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(a), Some(b)) => Some(better(a, b)),
                (a, None) => a,
                (None, b) => b,
            },
        )
        .ok_or(OracleError::EmptyFeasibleSet)?;

    let price = if constraint.flat {
        Vector::repeat(n, best.price[0])
    } else {
        Vector::from_column_slice(&best.price[..n])
    };
    Ok(GridOptimum {
        price,
        delta_sw: best.value,
        step: grid.step(),
    })
}

type Point = [f64; MAX_GRID_DIMENSIONS];

/// Allocation-free evaluation of `r̄s` and `s̄w` (up to the benefit constant)
/// straight from the moments, for small `N`.
struct Surface {
    n: usize,
    flat: bool,
    g: [[f64; MAX_GRID_DIMENSIONS]; MAX_GRID_DIMENSIONS],
    mean_price: Point,
    mean_state: Point,
    covariance_trace: f64,
    fixed_revenue: f64,
}

impl Surface {
    fn new(model: &LinearDemandModel, connection_charge: f64, flat: bool) -> Self {
        let n = model.periods();
        let mut s = Self {
            n,
            flat,
            g: [[0.0; MAX_GRID_DIMENSIONS]; MAX_GRID_DIMENSIONS],
            mean_price: [0.0; MAX_GRID_DIMENSIONS],
            mean_state: [0.0; MAX_GRID_DIMENSIONS],
            covariance_trace: model.scenarios().covariance_trace(),
            fixed_revenue: model.customers() as f64 * connection_charge,
        };
        for k in 0..n {
            s.mean_price[k] = model.scenarios().mean_price()[k];
            s.mean_state[k] = model.scenarios().mean_state()[k];
            for t in 0..n {
                s.g[k][t] = model.g()[(k, t)];
            }
        }
        s
    }

    fn expand(&self, coords: &Point) -> Point {
        if self.flat {
            [coords[0]; MAX_GRID_DIMENSIONS]
        } else {
            *coords
        }
    }

    /// Returns `(Gπ, π)`.
    fn load(&self, coords: &Point) -> (Point, Point) {
        let p = self.expand(coords);
        let mut gp = [0.0; MAX_GRID_DIMENSIONS];
        for k in 0..self.n {
            gp[k] = (0..self.n).map(|t| self.g[k][t] * p[t]).sum();
        }
        (gp, p)
    }

    fn margin(&self, p: &Point, gp: &Point) -> f64 {
        (0..self.n)
            .map(|k| (p[k] - self.mean_price[k]) * (self.mean_state[k] - gp[k]))
            .sum::<f64>()
            - self.covariance_trace
    }

    fn revenue(&self, coords: &Point) -> f64 {
        let (gp, p) = self.load(coords);
        self.margin(&p, &gp) + self.fixed_revenue
    }

    fn welfare(&self, coords: &Point) -> f64 {
        let (gp, p) = self.load(coords);
        let consumer: f64 = (0..self.n)
            .map(|k| p[k] * (0.5 * gp[k] - self.mean_state[k]))
            .sum();
        consumer + self.margin(&p, &gp)
    }
}

/// One scenario's settlement under a tariff. Money in $/cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSettlement {
    pub demand: Vector,
    /// `M·A + πᵀD_j`
    pub revenue: f64,
    /// `λ_jᵀD_j`
    pub wholesale_cost: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SettlementLedger {
    pub scenarios: Vec<ScenarioSettlement>,
    pub mean_revenue: f64,
    pub mean_cost: f64,
    /// Equals `r̄s = φ̄(π) + M·A`.
    pub mean_margin: f64,
}

/// Settles every scenario of the model under `tariff` and averages.
pub fn settle_scenarios(
    model: &LinearDemandModel,
    tariff: &Tariff,
) -> Result<SettlementLedger, ModelError> {
    let price = tariff.prices();
    model.check_dimension(price)?;
    let fixed = model.customers() as f64 * tariff.connection_charge();
    let load = model.g() * price;
    let scenarios: Vec<ScenarioSettlement> = model
        .scenarios()
        .scenarios()
        .iter()
        .map(|s| {
            let demand = &s.state - &load;
            let revenue = fixed + price.dot(&demand);
            let wholesale_cost = s.price.dot(&demand);
            ScenarioSettlement {
                margin: revenue - wholesale_cost,
                demand,
                revenue,
                wholesale_cost,
            }
        })
        .collect();
    let j = scenarios.len() as f64;
    let mean = |f: fn(&ScenarioSettlement) -> f64| scenarios.iter().map(f).sum::<f64>() / j;
    Ok(SettlementLedger {
        mean_revenue: mean(|s| s.revenue),
        mean_cost: mean(|s| s.wholesale_cost),
        mean_margin: mean(|s| s.margin),
        scenarios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::tariff::TariffFamily;
    use crate::{Scenario, ScenarioSet};
    use approx::assert_relative_eq;

    fn base() -> Tariff {
        Tariff::new(0.0, v(&[1.0, 2.0]), TariffFamily::TwoPartOptimal).unwrap()
    }

    fn grid() -> GridSpec {
        GridSpec::square(2, 0.0, 10.0, DEFAULT_GRID_STEPS)
    }

    #[test]
    fn unconstrained_argmax_near_mean_price() {
        let g = grid();
        let opt =
            grid_argmax_welfare(&i2(), &base(), &GridConstraint::unconstrained(), &g).unwrap();
        assert!((&opt.price - v(&[1.0, 2.0])).amax() <= g.step());
        assert!(opt.delta_sw <= 0.0);
    }

    #[test]
    fn infinite_band_matches_unconstrained() {
        let g = grid();
        let free =
            grid_argmax_welfare(&i2(), &base(), &GridConstraint::unconstrained(), &g).unwrap();
        let banded = GridConstraint {
            revenue: RevenueConstraint::Band {
                target: 24.0,
                band: f64::INFINITY,
            },
            ..GridConstraint::unconstrained()
        };
        assert_eq!(
            grid_argmax_welfare(&i2(), &base(), &banded, &g).unwrap(),
            free
        );
    }

    #[test]
    fn revenue_constrained_argmax_near_ramsey_price() {
        let g = grid();
        for revenue in [
            RevenueConstraint::LevelSet { target: 24.0 },
            RevenueConstraint::Band {
                target: 24.0,
                band: 0.05,
            },
        ] {
            let c = GridConstraint {
                revenue,
                ..GridConstraint::unconstrained()
            };
            let opt = grid_argmax_welfare(&i2(), &base(), &c, &g).unwrap();
            // Band filtering is coarse; the level set is tight.
            let tol = match revenue {
                RevenueConstraint::LevelSet { .. } => g.step(),
                _ => 40.0 * g.step(),
            };
            assert!(
                (&opt.price - v(&[2.75, 4.5])).amax() <= tol,
                "{revenue:?}: {}",
                opt.price
            );
        }
    }

    #[test]
    fn empty_band_reported() {
        let c = GridConstraint {
            revenue: RevenueConstraint::Band {
                target: 24.123,
                band: 0.0,
            },
            ..GridConstraint::unconstrained()
        };
        assert_eq!(
            grid_argmax_welfare(&i2(), &base(), &c, &GridSpec::square(2, 0.0, 10.0, 7)),
            Err(OracleError::EmptyFeasibleSet)
        );
    }

    #[test]
    fn flat_constraint_searches_diagonal() {
        let c = GridConstraint {
            revenue: RevenueConstraint::LevelSet { target: 0.0 },
            connection_charge: 0.0,
            flat: true,
        };
        let g = grid();
        let opt = grid_argmax_welfare(&i2(), &base(), &c, &g).unwrap();
        assert_eq!(opt.price[0], opt.price[1]);
        assert!((opt.price[0] - 1.4827994289166337).abs() <= g.step());
    }

    #[test]
    fn grid_validation() {
        let bad = GridSpec::square(2, 1.0, 1.0, 10);
        assert!(matches!(
            bad.validate(),
            Err(OracleError::InvalidAxis { axis: 0 })
        ));
        assert!(matches!(
            GridSpec::square(4, 0.0, 1.0, 10).validate(),
            Err(OracleError::TooManyDimensions(4))
        ));
    }

    #[test]
    fn settlement_examples() {
        let single = ScenarioSet::deterministic(v(&[1.0, 2.0]), v(&[10.0, 8.0])).unwrap();
        let m = LinearDemandModel::new(g2(), single, 3).unwrap();
        let t = Tariff::new(5.0, v(&[1.0, 2.0]), TariffFamily::TwoPartOptimal).unwrap();
        let l = settle_scenarios(&m, &t).unwrap();
        assert_eq!(l.mean_margin, 15.0);

        let t = Tariff::new(0.0, v(&[1.0, 2.0]), TariffFamily::TwoPartOptimal).unwrap();
        let l = settle_scenarios(&i2_cov(), &t).unwrap();
        assert_relative_eq!(l.mean_margin, -1.0, epsilon = 1e-12);
        assert_eq!(l.scenarios.len(), 2);
        assert_relative_eq!(l.mean_revenue - l.mean_cost, l.mean_margin, epsilon = 1e-12);
    }

    #[test]
    fn settlement_matches_phi_bar() {
        let set = ScenarioSet::new(vec![
            Scenario::new(v(&[0.3, 2.0]), v(&[10.0, 8.0])),
            Scenario::new(v(&[1.4, 0.1]), v(&[6.0, 9.5])),
            Scenario::new(v(&[2.0, 1.0]), v(&[12.0, 7.0])),
        ])
        .unwrap();
        let m = LinearDemandModel::new(g2(), set, 4).unwrap();
        let t = Tariff::new(1.25, v(&[3.0, 1.5]), TariffFamily::TwoPartOptimal).unwrap();
        let l = settle_scenarios(&m, &t).unwrap();
        let analytic = m.retailer_surplus(t.prices(), 1.25).unwrap();
        assert_relative_eq!(l.mean_margin, analytic, max_relative = 1e-12);
    }
}
