mod manifest;
mod report;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use thiserror::Error;

use tarifflab::checks::run_checks;
use tarifflab::ingest::{
    baseline_tariff, calibrate_demand, estimate_moments, parse_csv, revenue_baseline,
    CalibrationConfig, IngestError, ModelFile, PriceUnit, Provenance, SeriesKind,
};
use tarifflab::pareto::{
    default_targets, linspace, solve_family, sweep, FamilyInputs, DEFAULT_TARGET_COUNT,
};
use tarifflab::{welfare_gains, LinearDemandModel, SolveError, SolverConfig, Tariff, TariffFamily};

use manifest::{write_file, RunManifest};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("failed checks: {}", .0.join(", "))]
    ChecksFailed(Vec<String>),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::ChecksFailed(_) => 4,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::InfeasibleTarget { .. } | SolveError::InvalidRegime { .. } => {
                CliError::Infeasible(e.to_string())
            }
            SolveError::Model(_) | SolveError::InvalidConfig(_) => CliError::Input(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

fn input_error(path: &Path, e: IngestError) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

#[derive(Parser)]
#[command(
    name = "tarifflab",
    version,
    about = "Revenue-adequate retail electricity tariffs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate moments from load and price CSVs and calibrate a demand model.
    Fit(FitArgs),
    /// Solve one tariff family at a revenue target.
    Solve(SolveArgs),
    /// Sweep revenue targets and write Pareto fronts.
    Pareto(ParetoArgs),
    /// Run model diagnostics.
    Check(CheckArgs),
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    load: PathBuf,
    #[arg(long)]
    prices: PathBuf,
    #[arg(long, default_value = "kwh")]
    price_unit: PriceUnit,
    /// Incumbent flat rate in $/kWh.
    #[arg(long, default_value_t = 0.172)]
    flat_rate: f64,
    /// Target mean own-price elasticity at the flat rate.
    #[arg(long, default_value_t = -0.3, allow_negative_numbers = true)]
    elasticity: f64,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[arg(long, default_value_t = 2_200_000)]
    customers: u64,
    /// Incumbent connection charge in $/customer/day.
    #[arg(long, default_value_t = 0.52, allow_negative_numbers = true)]
    connection_charge: f64,
    #[arg(long)]
    out: PathBuf,
}

/// Baseline overrides. Without them the baseline is the incumbent tariff
/// recorded in the model file, or `A = 0` at the expected wholesale price.
#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    flat_rate: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    connection_charge: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    family: TariffFamily,
    /// Revenue target in $/day, or `baseline` for the baseline tariff's retailer surplus.
    #[arg(long, allow_negative_numbers = true)]
    target_rs: String,
    #[command(flatten)]
    baseline: BaselineArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ParetoArgs {
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated family tags, or `all`.
    #[arg(long, default_value = "all")]
    families: String,
    #[arg(long, allow_negative_numbers = true)]
    f_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    f_max: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_TARGET_COUNT)]
    steps: usize,
    #[command(flatten)]
    baseline: BaselineArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    baseline: BaselineArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Pareto(a) => cmd_pareto(a),
        Command::Check(a) => cmd_check(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("TARIFFLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Input(format!(
            "TARIFFLAB_THREADS must be a positive integer, got `{value}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}

fn cmd_fit(a: FitArgs) -> Result<(), CliError> {
    let config = CalibrationConfig {
        flat_rate: a.flat_rate,
        elasticity: a.elasticity,
        alpha: a.alpha,
        customers: a.customers,
        connection_charge: a.connection_charge,
    };
    config
        .validate()
        .map_err(|e| CliError::Input(e.to_string()))?;
    let load = parse_csv(&a.load, SeriesKind::Load).map_err(|e| input_error(&a.load, e))?;
    let prices = parse_csv(&a.prices, SeriesKind::Price(a.price_unit))
        .map_err(|e| input_error(&a.prices, e))?;
    let moments = estimate_moments(&load, &prices).map_err(|e| CliError::Input(e.to_string()))?;
    let cal = calibrate_demand(&moments.scenarios, &config)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let revenue =
        revenue_baseline(&cal.model, &config).map_err(|e| CliError::Input(e.to_string()))?;

    let provenance = Provenance {
        flat_rate: config.flat_rate,
        elasticity: config.elasticity,
        alpha: config.alpha,
        connection_charge: config.connection_charge,
        kernel_scale: cal.scale,
        realized_elasticity: cal.realized_elasticity,
        price_unit: match a.price_unit {
            PriceUnit::Kwh => "kwh",
            PriceUnit::Mwh => "mwh",
        }
        .into(),
    };
    let file = ModelFile::from_model(&cal.model, Some(provenance));
    let text = file
        .to_toml()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    write_file(&a.out, text.as_bytes())?;

    let mut m = RunManifest::new("fit");
    m.set(
        "price_unit",
        file.provenance
            .as_ref()
            .map_or("", |p| p.price_unit.as_str()),
    )
    .set("flat_rate", config.flat_rate)
    .set("elasticity", config.elasticity)
    .set("alpha", config.alpha)
    .set("customers", config.customers)
    .set("connection_charge", config.connection_charge);
    m.input(&a.load)?.input(&a.prices)?;
    m.write_beside(&a.out)?;

    let set = cal.model.scenarios();
    println!("days                     {}", set.len());
    println!("periods                  {}", set.periods());
    println!("realized elasticity      {}", cal.realized_elasticity);
    println!("kernel scale             {}", cal.scale);
    println!(
        "G eigenvalue range       [{}, {}]",
        report::sig(cal.g_eigenvalue_range.0, 4),
        report::sig(cal.g_eigenvalue_range.1, 4)
    );
    println!(
        "tr cov(lambda, x)        {} (1/J), {} (1/(J-1))",
        set.covariance_trace(),
        moments.sample_cross_covariance.trace()
    );
    println!(
        "gross revenue            {} $/day",
        report::sig(revenue.gross, 4)
    );
    println!(
        "net retailer surplus     {} $/day",
        report::sig(revenue.net, 4)
    );
    println!("wrote {}", a.out.display());
    Ok(())
}

fn load_model(path: &Path) -> Result<(ModelFile, LinearDemandModel), CliError> {
    let file = ModelFile::read(path).map_err(|e| input_error(path, e))?;
    let model = file.to_model().map_err(|e| input_error(path, e))?;
    Ok((file, model))
}

fn resolve_baseline(
    file: &ModelFile,
    model: &LinearDemandModel,
    args: &BaselineArgs,
) -> Result<Tariff, CliError> {
    let recorded = file.provenance.as_ref();
    let rate = args.flat_rate.or(recorded.map(|p| p.flat_rate));
    let charge = args
        .connection_charge
        .or(recorded.map(|p| p.connection_charge))
        .unwrap_or(0.0);
    match rate {
        Some(rate) => baseline_tariff(rate, charge, model.periods())
            .map_err(|e| CliError::Input(e.to_string())),
        None => Tariff::new(
            charge,
            model.scenarios().mean_price().clone(),
            TariffFamily::TwoPartOptimal,
        )
        .map_err(|e| CliError::Input(e.to_string())),
    }
}

fn record_baseline(m: &mut RunManifest, baseline: &Tariff) {
    m.set("baseline", report::describe_baseline(baseline));
}

fn cmd_solve(a: SolveArgs) -> Result<(), CliError> {
    let (file, model) = load_model(&a.model)?;
    let baseline = resolve_baseline(&file, &model, &a.baseline)?;
    let target = if a.target_rs == "baseline" {
        model
            .retailer_surplus(baseline.prices(), baseline.connection_charge())
            .map_err(|e| CliError::Input(e.to_string()))?
    } else {
        a.target_rs
            .parse::<f64>()
            .ok()
            .filter(|f| f.is_finite())
            .ok_or_else(|| {
                CliError::Input(format!(
                    "--target-rs must be a number or `baseline`, got `{}`",
                    a.target_rs
                ))
            })?
    };
    let config = SolverConfig::default();
    let solution = solve_family(
        &model,
        a.family,
        target,
        &FamilyInputs::from_baseline(&baseline),
        &config,
    )?;
    let gains = welfare_gains(&model, &solution.tariff, &baseline)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let text = report::solve_report(target, &solution, &gains);
    print!("{text}");
    if let Some(out) = &a.out {
        write_file(out, text.as_bytes())?;
        let mut m = RunManifest::new("solve");
        m.set("family", a.family)
            .set("target_rs", &a.target_rs)
            .set("target_resolved", target);
        record_baseline(&mut m, &baseline);
        m.input(&a.model)?;
        m.write_beside(out)?;
    }
    Ok(())
}

fn parse_families(list: &str) -> Result<Vec<TariffFamily>, CliError> {
    let list = list.trim();
    if list.eq_ignore_ascii_case("all") {
        return Ok(TariffFamily::ALL.to_vec());
    }
    let families: Vec<TariffFamily> = list
        .split(',')
        .filter(|s| !s.trim().is_empty() && !s.trim().eq_ignore_ascii_case("none"))
        .map(|s| s.trim().parse::<TariffFamily>().map_err(CliError::Input))
        .collect::<Result<_, _>>()?;
    if families.is_empty() {
        return Err(CliError::Input(
            "--families selects no tariff family".into(),
        ));
    }
    Ok(families)
}

fn cmd_pareto(a: ParetoArgs) -> Result<(), CliError> {
    let families = parse_families(&a.families)?;
    if a.steps == 0 {
        return Err(CliError::Input("--steps must be positive".into()));
    }
    let (file, model) = load_model(&a.model)?;
    let baseline = resolve_baseline(&file, &model, &a.baseline)?;
    let config = SolverConfig::default();
    let defaults = default_targets(&model, 2, &config)?;
    let lo = a.f_min.unwrap_or(defaults[0]);
    let hi = a.f_max.unwrap_or(defaults[1]);
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(CliError::Input(format!(
            "need finite --f-min <= --f-max, got {lo} and {hi}"
        )));
    }
    let targets = linspace(lo, hi, a.steps);
    info!(
        "sweeping {} families over {} targets",
        families.len(),
        targets.len()
    );
    let fronts = sweep(&model, &baseline, &families, &targets, &config);

    let csv = report::fronts_csv(&fronts, model.periods())?;
    write_file(&a.out, csv.as_bytes())?;
    let mut m = RunManifest::new("pareto");
    m.set(
        "families",
        families
            .iter()
            .map(|f| f.tag())
            .collect::<Vec<_>>()
            .join(","),
    )
    .set("f_min", lo)
    .set("f_max", hi)
    .set("steps", a.steps);
    record_baseline(&mut m, &baseline);
    m.input(&a.model)?;
    m.write_beside(&a.out)?;
    println!("wrote {}", a.out.display());

    if let Some(svg_path) = &a.svg {
        let rs_base = model
            .retailer_surplus(baseline.prices(), baseline.connection_charge())
            .map_err(|e| CliError::Internal(e.to_string()))?;
        write_file(svg_path, svg::render(&fronts, rs_base).as_bytes())?;
        m.write_beside(svg_path)?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

fn cmd_check(a: CheckArgs) -> Result<(), CliError> {
    let file = ModelFile::read(&a.model).map_err(|e| input_error(&a.model, e))?;
    let baseline = match file.to_model() {
        Ok(model) => Some(resolve_baseline(&file, &model, &a.baseline)?),
        Err(_) => None,
    };
    let report = run_checks(&file, baseline.as_ref(), &SolverConfig::default());
    let text = report::check_text(&report);
    print!("{text}");
    if let Some(out) = &a.out {
        write_file(out, text.as_bytes())?;
        let mut m = RunManifest::new("check");
        if let Some(b) = &baseline {
            record_baseline(&mut m, b);
        }
        m.input(&a.model)?;
        m.write_beside(out)?;
    }
    let failed: Vec<String> = report
        .failures()
        .iter()
        .map(|r| r.name.to_string())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(failed))
    }
}
