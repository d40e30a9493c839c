//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use tarifflab::ingest::{
    baseline_tariff, calibrate_demand, estimate_moments, parse_csv, revenue_baseline,
    CalibrationConfig, PriceUnit, SeriesKind,
};
use tarifflab::numdiff::{
    central_gradient, central_hessian, symmetric_part_eigenvalues, GRADIENT_STEP, HESSIAN_STEP,
};
use tarifflab::oracle::{
    grid_argmax_welfare, GridConstraint, GridSpec, RevenueConstraint, DEFAULT_GRID_STEPS,
};
use tarifflab::pareto::{front_slope_report, linspace, solve_family, sweep, FamilyInputs};
use tarifflab::solvers::{linear_target_range, planner_bound_gain, solve_linear, solve_two_part};
use tarifflab::{
    welfare_gains, DemandResponse, LinearDemandModel, Matrix, Scenario, ScenarioSet, SolveError,
    SolverConfig, Tariff, TariffFamily, Vector,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

fn g2() -> Matrix {
    Matrix::from_row_slice(2, 2, &[2.0, -0.5, -0.5, 1.0])
}

fn i2() -> LinearDemandModel {
    let set = ScenarioSet::deterministic(v(&[1.0, 2.0]), v(&[10.0, 8.0])).unwrap();
    LinearDemandModel::new(g2(), set, 1).unwrap()
}

fn i2_cov() -> LinearDemandModel {
    let set = ScenarioSet::new(vec![
        Scenario::new(v(&[1.5, 2.5]), v(&[11.0, 9.0])),
        Scenario::new(v(&[0.5, 1.5]), v(&[9.0, 7.0])),
    ])
    .unwrap();
    LinearDemandModel::new(g2(), set, 1).unwrap()
}

fn mean_price_baseline(model: &LinearDemandModel) -> Tariff {
    Tariff::new(
        0.0,
        model.scenarios().mean_price().clone(),
        TariffFamily::TwoPartOptimal,
    )
    .unwrap()
}

/// Random SPD `G` and scenario set with positive expected demand near `λ̄`.
fn random_model(rng: &mut ChaCha20Rng, n: usize, j: usize, customers: u64) -> LinearDemandModel {
    let l = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let g = &l * l.transpose() + Matrix::identity(n, n) * 0.5;
    let scenarios = (0..j)
        .map(|_| {
            let price = Vector::from_fn(n, |_, _| rng.random_range(0.0..3.0));
            let state = Vector::from_fn(n, |_, _| rng.random_range(20.0..40.0));
            Scenario::new(price, state)
        })
        .collect();
    LinearDemandModel::new(g, ScenarioSet::new(scenarios).unwrap(), customers).unwrap()
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic")
}

fn synthetic_scenarios() -> ScenarioSet {
    let dir = data_dir();
    let load = parse_csv(&dir.join("load.csv"), SeriesKind::Load).unwrap();
    let prices = parse_csv(&dir.join("prices.csv"), SeriesKind::Price(PriceUnit::Mwh)).unwrap();
    estimate_moments(&load, &prices).unwrap().scenarios
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: f64) -> bool {
    elapsed.as_secs_f64() < limit
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let mut models = vec![i2(), i2_cov()];
    for (n, j, m) in [(3, 5, 10), (6, 12, 1000), (24, 30, 2_200_000)] {
        models.push(random_model(&mut rng, n, j, m));
    }
    let config = SolverConfig::default();
    let start = Instant::now();
    let (mut price_err, mut charge_err) = (0.0_f64, 0.0_f64);
    for m in &models {
        for f in [-5.0, 0.0, 24.0, 1e4] {
            let t = solve_two_part(m, f, &config).unwrap();
            price_err = price_err.max((t.prices() - m.scenarios().mean_price()).amax());
            let expected = (f + m.scenarios().covariance_trace()) / m.customers() as f64;
            charge_err = charge_err
                .max((t.connection_charge() - expected).abs() / expected.abs().max(1e-300));
        }
    }
    let elapsed = start.elapsed();
    check(
        price_err <= 1e-10 && charge_err <= 1e-10 && within(elapsed, 1.0),
        format!(
            "max |π* − λ̄| = {price_err:.1e} (≤ 1e-10), max rel err A* = {charge_err:.1e} (≤ 1e-10), {} models, {:.3}s (< 1s)",
            models.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Outcome {
    let m = i2();
    let config = SolverConfig::default();
    let range = linear_target_range(&m, &config).unwrap();
    let targets = linspace(range.min, range.max, 41);
    let fronts = sweep(
        &m,
        &mean_price_baseline(&m),
        &[TariffFamily::TwoPartOptimal],
        &targets,
        &config,
    );
    let sw: Vec<f64> = fronts[0].feasible().map(|(_, g)| g.delta_sw).collect();
    let (lo, hi) = sw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    let spread = (hi - lo) / hi.abs().max(lo.abs()).max(1.0);
    let rows = front_slope_report(&fronts[0]).unwrap();
    let slope_err = rows
        .iter()
        .map(|r| (r.slope + 1.0).abs())
        .fold(0.0, f64::max);
    check(
        sw.len() == 41 && spread < 1e-9 && slope_err <= 1e-9,
        format!(
            "Δs̄w spread {spread:.1e} (< 1e-9) over {} points, max |slope + 1| = {slope_err:.1e} (≤ 1e-9) over {} segments",
            sw.len(),
            rows.len()
        ),
    )
}

fn criterion_3() -> Outcome {
    let m = i2();
    let config = SolverConfig::default();
    let start = Instant::now();
    let sol = solve_linear(&m, 24.0, &config).unwrap();
    let star = solve_two_part(&m, 24.0, &config).unwrap();
    let price_err = (&sol.prices - v(&[2.75, 4.5])).amax();
    let rho_err = (sol.ramsey_number - 1.0 / 3.0).abs();
    let residual = sol.elasticity_residual(&m, star.prices()).unwrap();
    let top = solve_linear(&m, 32.0, &config).unwrap();
    let pm_err = (&top.prices - v(&[4.5, 7.0])).amax();
    let infeasible = matches!(
        solve_linear(&m, 32.5, &config),
        Err(SolveError::InfeasibleTarget { .. })
    );
    let elapsed = start.elapsed();
    check(
        price_err <= 1e-8 && rho_err <= 1e-8 && residual <= 1e-6 && pm_err <= 1e-6 && infeasible && within(elapsed, 1.0),
        format!(
            "|π† − (2.75, 4.5)| = {price_err:.1e}, |ρ − 1/3| = {rho_err:.1e} (≤ 1e-8), inverse-elasticity residual {residual:.1e} (≤ 1e-6), \
             |π(32) − π^M| = {pm_err:.1e} (≤ 1e-6), F=32.5 infeasible: {infeasible}, {:.3}s (< 1s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_4() -> Outcome {
    let m = i2();
    let config = SolverConfig::default();
    let targets = linspace(0.0, 32.0, 41);
    let fronts = sweep(
        &m,
        &mean_price_baseline(&m),
        &[TariffFamily::LinearOptimal],
        &targets,
        &config,
    );
    let pts: Vec<(f64, f64)> = fronts[0]
        .feasible()
        .map(|(_, g)| (g.delta_cs, g.delta_sw))
        .collect();
    let scale = pts
        .iter()
        .map(|(c, s)| c.abs().max(s.abs()))
        .fold(1.0, f64::max);
    let tol = 1e-7 * scale;
    let mut worst_rise = f64::NEG_INFINITY;
    let mut worst_d2 = f64::NEG_INFINITY;
    for w in pts.windows(2) {
        worst_rise = worst_rise.max(w[1].0 - w[0].0).max(w[1].1 - w[0].1);
    }
    for w in pts.windows(3) {
        worst_d2 = worst_d2
            .max(w[2].0 - 2.0 * w[1].0 + w[0].0)
            .max(w[2].1 - 2.0 * w[1].1 + w[0].1);
    }
    check(
        pts.len() == 41 && worst_rise <= tol && worst_d2 <= tol,
        format!(
            "{} points, largest increase {worst_rise:.2e}, largest second difference {worst_d2:.2e} (≤ {tol:.1e})",
            pts.len()
        ),
    )
}

fn criterion_5() -> Outcome {
    let config = SolverConfig::default();
    let grid = GridSpec::square(2, 0.0, 10.0, DEFAULT_GRID_STEPS);
    let step = grid.step();
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut count = 0;
    for m in [i2(), i2_cov()] {
        let baseline = Tariff::flat(2.0, 1.5, 2, TariffFamily::AdjustedFlat).unwrap();
        let inputs = FamilyInputs::from_baseline(&baseline);
        for f in [8.0, 16.0, 24.0] {
            for family in TariffFamily::ALL {
                let solved = solve_family(&m, family, f, &inputs, &config)
                    .unwrap()
                    .tariff;
                let constraint = match family {
                    TariffFamily::TwoPartOptimal => GridConstraint::unconstrained(),
                    _ => GridConstraint {
                        revenue: RevenueConstraint::LevelSet { target: f },
                        connection_charge: solved.connection_charge(),
                        flat: family.requires_flat_price(),
                    },
                };
                let opt = grid_argmax_welfare(&m, &baseline, &constraint, &grid).unwrap();
                worst = worst.max((&opt.price - solved.prices()).amax() / step);
                count += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        worst <= 1.0 && within(elapsed, 30.0),
        format!(
            "{count} solver/oracle pairs, worst distance {worst:.3} grid steps (≤ 1), step {step:.4}, {:.2}s (< 30s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let mut models = vec![i2(), i2_cov()];
    models.push(random_model(&mut rng, 4, 7, 3));
    let (mut grad_err, mut hess_err, mut top_eig) = (0.0_f64, 0.0_f64, f64::NEG_INFINITY);
    for m in &models {
        let n = m.periods();
        let scale = m.g().amax().max(1.0);
        for _ in 0..10 {
            let p = Vector::from_fn(n, |_, _| rng.random_range(0.0..6.0));
            let fd = central_gradient(
                |x| m.consumer_surplus_offset(x, 1.0).unwrap(),
                &p,
                GRADIENT_STEP,
            );
            let demand = m.mean_demand(&p);
            grad_err = grad_err.max((fd + &demand).amax() / demand.amax().max(1.0));
            let h = central_hessian(|x| m.retailer_surplus(x, 1.0).unwrap(), &p, HESSIAN_STEP);
            hess_err = hess_err.max((&h + m.g() * 2.0).amax() / scale);
            top_eig = top_eig.max(*symmetric_part_eigenvalues(&h).last().unwrap());
        }
    }
    check(
        grad_err <= 1e-6 && hess_err <= 1e-5 && top_eig < 0.0,
        format!(
            "∇Δc̄s vs −E[D] rel err {grad_err:.1e} (≤ 1e-6), ∇²r̄s vs −2G err {hess_err:.1e} (≤ 1e-5), largest eigenvalue {top_eig:.3} (< 0), 30 points"
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let scenarios = (0..400)
        .map(|_| {
            let price = v(&[rng.random_range(0.5..1.5), rng.random_range(1.0..3.0)]);
            let state = v(&[rng.random_range(8.0..12.0), rng.random_range(6.0..10.0)]);
            Scenario::new(price, state)
        })
        .collect();
    let independent =
        LinearDemandModel::new(g2(), ScenarioSet::new(scenarios).unwrap(), 1).unwrap();
    let config = SolverConfig::default();
    let mut worst_gap = 0.0_f64;
    let mut flagged_independent = false;
    for baseline in [
        Tariff::flat(0.0, 1.5, 2, TariffFamily::FlatLinear).unwrap(),
        Tariff::new(0.0, v(&[2.75, 4.5]), TariffFamily::LinearOptimal).unwrap(),
    ] {
        let bound = planner_bound_gain(&independent, &baseline).unwrap();
        flagged_independent |= bound.independence_violated;
        let t = solve_two_part(&independent, 10.0, &config).unwrap();
        let sw = welfare_gains(&independent, &t, &baseline).unwrap().delta_sw;
        worst_gap = worst_gap.max((sw - bound.gain).abs());
    }
    let dep = i2_cov();
    let base = Tariff::new(0.0, v(&[2.75, 4.5]), TariffFamily::LinearOptimal).unwrap();
    let bound = planner_bound_gain(&dep, &base).unwrap();
    let t = solve_two_part(&dep, 10.0, &config).unwrap();
    let gap = bound.gain - welfare_gains(&dep, &t, &base).unwrap().delta_sw;
    check(
        worst_gap <= 1e-9 && !flagged_independent && bound.independence_violated,
        format!(
            "independent set: |Δs̄w(T*) − bound| = {worst_gap:.1e} (≤ 1e-9), no warning: {}; dependent set: gap {gap:.3e}, \
             max |corr| {:.2}, warning fired: {}",
            !flagged_independent, bound.max_abs_correlation, bound.independence_violated
        ),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let config = CalibrationConfig::default();
    let cal = calibrate_demand(&synthetic_scenarios(), &config).unwrap();
    let m = &cal.model;
    let revenue = revenue_baseline(m, &config).unwrap();
    let baseline =
        baseline_tariff(config.flat_rate, config.connection_charge, m.periods()).unwrap();
    let f = revenue.net;
    let inputs = FamilyInputs::from_baseline(&baseline);
    let solver = SolverConfig::default();
    let cs = |family| {
        let sol = solve_family(m, family, f, &inputs, &solver).unwrap();
        let g = welfare_gains(m, &sol.tariff, &baseline).unwrap();
        (g.delta_cs, sol.tariff.connection_charge())
    };
    let (flat, _) = cs(TariffFamily::FlatLinear);
    let (linear, _) = cs(TariffFamily::LinearOptimal);
    let (adjusted, _) = cs(TariffFamily::AdjustedFlat);
    let (fixed, _) = cs(TariffFamily::FixedChargeTwoPart);
    let (two_part, a_star) = cs(TariffFamily::TwoPartOptimal);
    let elapsed = start.elapsed();

    let links = [
        ("flat < linear", flat < linear),
        ("linear < 0", linear < 0.0),
        ("0 < adjusted-flat", 0.0 < adjusted),
        ("adjusted-flat < fixed-A", adjusted < fixed),
        ("fixed-A < two-part", fixed < two_part),
    ];
    let broken: Vec<&str> = links
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| *name)
        .collect();
    let pct = |x: f64| 100.0 * x / revenue.gross;
    let detail = format!(
        "Δc̄s as % of ${:.3}M gross: flat {:+.2}%, linear {:+.2}%, adjusted-flat {:+.2}% ({adjusted:e} $), fixed-A {:+.2}%, \
         two-part {:+.2}%; A* = {a_star:.3} $/day (in [0.5, 10]); {:.2}s (< 60s); violated: [{}]",
        revenue.gross / 1e6,
        pct(flat),
        pct(linear),
        pct(adjusted),
        pct(fixed),
        pct(two_part),
        elapsed.as_secs_f64(),
        broken.join(", ")
    );
    check(
        broken.is_empty() && (0.5..=10.0).contains(&a_star) && within(elapsed, 60.0),
        detail,
    )
}

fn criterion_9() -> Outcome {
    let scenarios = synthetic_scenarios();
    let mut worst = 0.0_f64;
    let mut min_eig = f64::INFINITY;
    let mut cholesky_ok = true;
    for alpha in [0.05, 0.2, 0.8] {
        let config = CalibrationConfig {
            alpha,
            ..CalibrationConfig::default()
        };
        let cal = calibrate_demand(&scenarios, &config).unwrap();
        worst = worst.max((cal.realized_elasticity - config.elasticity).abs());
        cholesky_ok &= cal.model.g().clone().cholesky().is_some();
        min_eig = min_eig.min(cal.g_eigenvalue_range.0);
    }
    check(
        worst <= 1e-9 && cholesky_ok && min_eig > 0.0,
        format!(
            "α ∈ {{0.05, 0.2, 0.8}}: max |ε̄ − target| = {worst:.1e} (≤ 1e-9), Cholesky ok: {cholesky_ok}, smallest eigenvalue {min_eig:.4e}"
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("two-part price and connection charge", criterion_1),
        ("two-part welfare independent of F", criterion_2),
        ("linear tariff on the two-period instance", criterion_3),
        ("linear front decreasing and concave", criterion_4),
        ("solvers agree with grid oracle", criterion_5),
        ("gradient and Hessian identities", criterion_6),
        ("planner bound", criterion_7),
        ("synthetic dataset ordering", criterion_8),
        ("calibration round trip", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
