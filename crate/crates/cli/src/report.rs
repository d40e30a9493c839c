use std::fmt::Write as _;

use tarifflab::checks::CheckReport;
use tarifflab::pareto::{FamilySolution, ParetoFront, PointOutcome};
use tarifflab::{Tariff, WelfareReport};

use crate::CliError;

/// `x` rounded to `digits` significant figures, without exponent notation.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = digits as i64 - 1 - magnitude;
    if decimals >= 0 {
        format!("{x:.*}", decimals as usize)
    } else {
        let unit = 10f64.powi((-decimals) as i32);
        format!("{:.0}", (x / unit).round() * unit)
    }
}

pub fn describe_baseline(baseline: &Tariff) -> String {
    let p = baseline.prices();
    if p.iter().all(|&x| x == p[0]) {
        format!(
            "A = {} $/customer, flat rate {} $/kWh",
            baseline.connection_charge(),
            p[0]
        )
    } else {
        format!(
            "A = {} $/customer, price = expected wholesale price",
            baseline.connection_charge()
        )
    }
}

pub fn solve_report(target: f64, solution: &FamilySolution, gains: &WelfareReport) -> String {
    let t = &solution.tariff;
    let mut out = String::new();
    writeln!(out, "family             {}", t.family()).unwrap();
    writeln!(
        out,
        "target F           {} $/day ({})",
        sig(target, 4),
        target
    )
    .unwrap();
    writeln!(
        out,
        "connection charge  {} $/customer/day ({})",
        sig(t.connection_charge(), 4),
        t.connection_charge()
    )
    .unwrap();
    writeln!(out, "prices").unwrap();
    writeln!(out, "  period  $/kWh").unwrap();
    for (k, p) in t.prices().iter().enumerate() {
        writeln!(out, "  {k:>6}  {p}").unwrap();
    }
    if let Some(r) = &solution.ramsey {
        writeln!(out, "ramsey").unwrap();
        writeln!(out, "  rho              {}", r.ramsey_number).unwrap();
        writeln!(out, "  gamma            {}", r.multiplier).unwrap();
        writeln!(out, "  markup fraction  {}", r.markup_fraction).unwrap();
        writeln!(out, "  achieved rs      {}", r.achieved_rs).unwrap();
    }
    writeln!(
        out,
        "welfare vs baseline ({})",
        describe_baseline(&gains.baseline)
    )
    .unwrap();
    for (name, v) in [
        ("delta_cs", gains.delta_cs),
        ("delta_rs", gains.delta_rs),
        ("delta_sw", gains.delta_sw),
        ("rs", gains.rs_absolute),
    ] {
        writeln!(out, "  {name:<9} {:>14} $/day  ({v})", sig(v, 4)).unwrap();
    }
    out
}

pub fn fronts_csv(fronts: &[ParetoFront], periods: usize) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "family",
        "F",
        "delta_cs",
        "delta_rs",
        "delta_sw",
        "feasible",
        "connection_charge",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((0..periods).map(|k| format!("pi_{k}")));
    let csv_err = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for front in fronts {
        for p in &front.points {
            let mut row = vec![front.family.tag().to_string(), p.target.to_string()];
            match &p.outcome {
                PointOutcome::Feasible { solution, gains } => {
                    row.extend(
                        [gains.delta_cs, gains.delta_rs, gains.delta_sw].map(|x| x.to_string()),
                    );
                    row.push("true".into());
                    row.push(solution.tariff.connection_charge().to_string());
                    row.extend(solution.tariff.prices().iter().map(|x| x.to_string()));
                }
                PointOutcome::Infeasible(_) => {
                    row.extend(std::iter::repeat_n(String::new(), 3));
                    row.push("false".into());
                    row.extend(std::iter::repeat_n(String::new(), 1 + periods));
                }
            }
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

pub fn check_text(report: &CheckReport) -> String {
    let mut out = String::new();
    for r in &report.results {
        writeln!(out, "{:<22} {}  {}", r.name, r.status, r.detail).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_figures() {
        assert_eq!(sig(1234567.0, 4), "1235000");
        assert_eq!(sig(-0.00123456, 4), "-0.001235");
        assert_eq!(sig(2.5, 4), "2.500");
        assert_eq!(sig(0.0, 4), "0");
    }
}
