//! Minimal SVG rendering of Pareto fronts: Δc̄s on x, Δr̄s on y.
//!
//! Infeasible targets have no Δc̄s, so they are drawn as hollow markers on
//! the left edge of the plot at the Δr̄s they would have delivered.

use std::fmt::Write as _;

use tarifflab::pareto::ParetoFront;
use tarifflab::TariffFamily;

use crate::report::sig;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

fn colour(family: TariffFamily) -> &'static str {
    match family {
        TariffFamily::TwoPartOptimal => "#1f77b4",
        TariffFamily::LinearOptimal => "#d62728",
        TariffFamily::FlatLinear => "#7f7f7f",
        TariffFamily::FixedChargeTwoPart => "#2ca02c",
        TariffFamily::AdjustedFlat => "#9467bd",
    }
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let pad = if hi > lo {
        0.05 * (hi - lo)
    } else {
        lo.abs().max(1.0) * 0.05
    };
    (lo - pad, hi + pad)
}

/// `baseline_rs` is `r̄s` of the baseline tariff, used to place infeasible targets.
pub fn render(fronts: &[ParetoFront], baseline_rs: f64) -> String {
    let (x0, x1) = span(
        fronts
            .iter()
            .flat_map(|f| f.feasible().map(|(_, g)| g.delta_cs)),
    );
    let (y0, y1) = span(
        fronts
            .iter()
            .flat_map(|f| f.points.iter().map(|p| p.target - baseline_rs)),
    );
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * plot_h;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    if x0 < 0.0 && x1 > 0.0 {
        let x = sx(0.0);
        writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ccc"/>"##,
            TOP + plot_h
        )
        .unwrap();
    }
    if y0 < 0.0 && y1 > 0.0 {
        let y = sy(0.0);
        writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ccc"/>"##,
            LEFT + plot_w
        )
        .unwrap();
    }
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            sx(fx),
            TOP + plot_h + 18.0,
            sig(fx, 3)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            sy(fy) + 4.0,
            sig(fy, 3)
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">consumer surplus gain ($/day)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">retailer surplus gain ($/day)</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    )
    .unwrap();

    for (i, front) in fronts.iter().enumerate() {
        let c = colour(front.family);
        let pts: Vec<String> = front
            .feasible()
            .map(|(_, g)| format!("{:.2},{:.2}", sx(g.delta_cs), sy(g.delta_rs)))
            .collect();
        if pts.len() > 1 {
            writeln!(
                s,
                r#"<polyline fill="none" stroke="{c}" stroke-width="2" points="{}"/>"#,
                pts.join(" ")
            )
            .unwrap();
        }
        for p in &front.points {
            match p.gains() {
                Some(g) => writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{c}"/>"#,
                    sx(g.delta_cs),
                    sy(g.delta_rs)
                ),
                None => writeln!(
                    s,
                    r#"<circle cx="{LEFT:.2}" cy="{:.2}" r="4" fill="none" stroke="{c}" stroke-width="1.5"/>"#,
                    sy(p.target - baseline_rs)
                ),
            }
            .unwrap();
        }
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{c}" stroke-width="2"/>"#,
            lx + 20.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            front.family
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
