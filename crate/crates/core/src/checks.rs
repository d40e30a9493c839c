//! Named diagnostics run against a model file: structural checks on `G`,
//! the curvature condition, derivative identities, settlement and grid
//! oracles, and the planner-bound gap.

use std::fmt;

use nalgebra::SymmetricEigen;

use crate::ingest::ModelFile;
use crate::model::{DemandResponse, LinearDemandModel};
use crate::numdiff::{central_gradient, central_hessian, symmetric_part_eigenvalues, HESSIAN_STEP};
use crate::oracle::{
    grid_argmax_welfare, settle_scenarios, GridAxis, GridConstraint, GridSpec, RevenueConstraint,
};
use crate::solvers::{
    check_assumption1, linear_target_range, monopoly_price, planner_gap, solve_linear,
    solve_two_part, AssumptionVerdict, SolverConfig, INDEPENDENCE_CORRELATION_THRESHOLD,
};
use crate::tariff::{Tariff, TariffFamily};
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Warn,
    Fail,
    Skipped,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Warn => "WARN",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "SKIP",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CheckReport {
    pub results: Vec<CheckResult>,
}

impl CheckReport {
    pub fn failures(&self) -> Vec<&CheckResult> {
        self.results
            .iter()
            .filter(|r| r.status == CheckStatus::Fail)
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.results.iter().find(|r| r.name == name)
    }

    fn push(&mut self, name: &'static str, ok: bool, detail: String) {
        let status = if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        self.results.push(CheckResult {
            name,
            status,
            detail,
        });
    }

    fn skip(&mut self, names: &[&'static str], why: &str) {
        for &name in names {
            self.results.push(CheckResult {
                name,
                status: CheckStatus::Skipped,
                detail: why.to_string(),
            });
        }
    }
}

pub const CHECK_NAMES: [&str; 9] = [
    "G-symmetric",
    "G-positive-definite",
    "model-consistency",
    "assumption-1",
    "gradient-identity",
    "hessian-identity",
    "settlement-agreement",
    "oracle-agreement",
    "planner-gap",
];

/// Runs every check. Checks that need a valid model are skipped when the
/// structural ones fail.
pub fn run_checks(
    file: &ModelFile,
    baseline: Option<&Tariff>,
    config: &SolverConfig,
) -> CheckReport {
    let mut report = CheckReport::default();
    let g = file.g_matrix();
    let scale = g.amax().max(1.0);
    let asym = (&g - g.transpose()).amax();
    let symmetric = asym <= 1e-12 * scale;
    report.push(
        "G-symmetric",
        symmetric,
        format!("max |G - Gᵀ| = {asym:.3e}"),
    );

    let min_eig = SymmetricEigen::new((&g + g.transpose()) * 0.5)
        .eigenvalues
        .min();
    let pd = min_eig > 0.0 && g.clone().cholesky().is_some();
    report.push(
        "G-positive-definite",
        pd,
        format!("smallest eigenvalue {min_eig:.6e}"),
    );
    if !(symmetric && pd) {
        report.skip(&CHECK_NAMES[2..], "G is not a valid demand slope");
        return report;
    }

    let model = match file.to_model() {
        Ok(m) => {
            report.push("model-consistency", true, "moments match scenarios".into());
            m
        }
        Err(e) => {
            report.push("model-consistency", false, e.to_string());
            report.skip(&CHECK_NAMES[3..], "model could not be built");
            return report;
        }
    };
    let samples = sample_prices(&model, config);

    match check_assumption1(&model, &samples, config) {
        Ok(r) => report.push(
            "assumption-1",
            r.verdict != AssumptionVerdict::Fail,
            format!(
                "largest eigenvalue of sym(∇g) over {} points: {:.6e}",
                r.samples.len(),
                r.worst_eigenvalue().unwrap_or(f64::NAN)
            ),
        ),
        Err(e) => report.push("assumption-1", false, e.to_string()),
    }

    let mut worst_grad = 0.0_f64;
    for p in &samples {
        let fd = central_gradient(
            |x| model.consumer_surplus_offset(x, 0.0).expect("dimension"),
            p,
            config.fd_step,
        );
        let demand = model.mean_demand(p);
        let err = (fd + &demand).amax() / demand.amax().max(1.0);
        worst_grad = worst_grad.max(err);
    }
    report.push(
        "gradient-identity",
        worst_grad <= 1e-6,
        format!("max relative error of ∇c̄s + E[D]: {worst_grad:.3e}"),
    );

    let mut worst_hess = 0.0_f64;
    let mut top_eig = f64::NEG_INFINITY;
    for p in &samples {
        let h = central_hessian(
            |x| model.retailer_surplus(x, 0.0).expect("dimension"),
            p,
            HESSIAN_STEP,
        );
        worst_hess = worst_hess.max((&h + model.g() * 2.0).amax() / scale);
        top_eig = top_eig.max(*symmetric_part_eigenvalues(&h).last().unwrap_or(&f64::NAN));
    }
    report.push(
        "hessian-identity",
        worst_hess <= 1e-5 && top_eig < 0.0,
        format!(
            "max |∇²r̄s + 2G| / max(1, |G|) = {worst_hess:.3e}, largest eigenvalue {top_eig:.3e}"
        ),
    );

    let mut worst_settle = 0.0_f64;
    for p in &samples {
        let t = Tariff::new(0.0, p.clone(), TariffFamily::TwoPartOptimal).expect("finite sample");
        let ledger = settle_scenarios(&model, &t).expect("dimension");
        let analytic = model.phi_bar(p).expect("dimension");
        let size = ledger.mean_revenue.abs().max(analytic.abs()).max(1.0);
        worst_settle = worst_settle.max((ledger.mean_margin - analytic).abs() / size);
    }
    report.push(
        "settlement-agreement",
        worst_settle <= 1e-10,
        format!("max relative gap between settled and analytic φ̄: {worst_settle:.3e}"),
    );

    if model.periods() <= 3 {
        match oracle_agreement(&model, config) {
            Ok((ok, detail)) => report.push("oracle-agreement", ok, detail),
            Err(detail) => report.push("oracle-agreement", false, detail),
        }
    } else {
        report.skip(&["oracle-agreement"], "grid oracle limited to N <= 3");
    }

    let fallback;
    let baseline = match baseline {
        Some(b) => b,
        None => {
            fallback = Tariff::new(
                0.0,
                model.scenarios().mean_price().clone(),
                TariffFamily::TwoPartOptimal,
            )
            .expect("finite mean price");
            &fallback
        }
    };
    let corr = model.scenarios().max_abs_cross_correlation();
    let gap = solve_two_part(&model, 0.0, config)
        .map_err(|e| e.to_string())
        .and_then(|t| planner_gap(&model, &t, baseline).map_err(|e| e.to_string()));
    match gap {
        Ok(gap) => {
            let detail = format!("s̄w(planner) - s̄w(T*) = {gap:.6e}; max |corr(λ, Ω)| = {corr:.3}");
            let status = if corr > INDEPENDENCE_CORRELATION_THRESHOLD {
                CheckStatus::Warn
            } else if gap.abs() <= 1e-9 * scale.max(model.scenarios().mean_state().amax()) {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            };
            report.results.push(CheckResult {
                name: "planner-gap",
                status,
                detail,
            });
        }
        Err(e) => report.push("planner-gap", false, e),
    }
    report
}

/// `λ̄ + t(π° − λ̄)` for `t ∈ {0, 1/8, …, 1/2}`: from the two-part price to the monopoly price.
fn sample_prices(model: &LinearDemandModel, config: &SolverConfig) -> Vec<Vector> {
    let lbar = model.scenarios().mean_price();
    let pm = monopoly_price(model, config).expect("valid default config");
    (0..5)
        .map(|i| lbar + (&pm - lbar) * (i as f64 / 4.0))
        .collect()
}

fn oracle_agreement(
    model: &LinearDemandModel,
    config: &SolverConfig,
) -> Result<(bool, String), String> {
    let lbar = model.scenarios().mean_price().clone();
    let pm = monopoly_price(model, config).map_err(|e| e.to_string())?;
    let width = (&pm - &lbar).amax().max(1e-3);
    let steps = if model.periods() <= 2 { 400 } else { 120 };
    let grid = GridSpec {
        axes: (0..model.periods())
            .map(|k| {
                GridAxis::new(
                    lbar[k].min(pm[k]) - 0.25 * width,
                    lbar[k].max(pm[k]) + 0.25 * width,
                    steps,
                )
            })
            .collect(),
    };
    let baseline =
        Tariff::new(0.0, lbar.clone(), TariffFamily::TwoPartOptimal).map_err(|e| e.to_string())?;
    let step = grid.step();

    let free = grid_argmax_welfare(model, &baseline, &GridConstraint::unconstrained(), &grid)
        .map_err(|e| e.to_string())?;
    let two_part = solve_two_part(model, 0.0, config).map_err(|e| e.to_string())?;
    let e1 = (&free.price - two_part.prices()).amax();

    let range = linear_target_range(model, config).map_err(|e| e.to_string())?;
    let target = 0.5 * (range.min + range.max);
    let constrained = GridConstraint {
        revenue: RevenueConstraint::LevelSet { target },
        ..GridConstraint::unconstrained()
    };
    let grid_linear =
        grid_argmax_welfare(model, &baseline, &constrained, &grid).map_err(|e| e.to_string())?;
    let linear = solve_linear(model, target, config).map_err(|e| e.to_string())?;
    let e2 = (&grid_linear.price - &linear.prices).amax();

    Ok((
        e1 <= step && e2 <= step,
        format!(
            "two-part {:.2} steps, linear at mid target {:.2} steps (step {step:.3e})",
            e1 / step,
            e2 / step
        ),
    ))
}
