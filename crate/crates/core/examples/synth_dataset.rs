//! Generates the bundled 92-day synthetic dataset.
//!
//! Usage: `cargo run -p tarifflab --example synth_dataset -- [out_dir] [seed]`
//!
//! Each day draws one weather shock `t ~ N(0, 1)` that raises afternoon load
//! (cooling) and lifts the whole day-ahead price curve, so prices co-move
//! with load as in a summer peaking system. Hourly noise is added on top.
//! Load is rescaled so the mean daily total is 35.15 GWh, which at
//! 17.2 ¢/kWh plus 0.52 $/day over 2.2 million customers gives a gross
//! revenue near $7.19M per day.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

const DAYS: usize = 92;
const HOURS: usize = 24;
const MEAN_DAILY_KWH: f64 = 35.15e6;

fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "data/synthetic".into()));
    let seed: u64 = args
        .next()
        .map_or(7, |s| s.parse().expect("seed must be an integer"));
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    let hour = |h: usize| h as f64;
    let shape: Vec<f64> = (0..HOURS)
        .map(|h| {
            0.75 + 0.25 * ((hour(h) - 9.0) / 24.0 * 2.0 * PI).sin()
                + 0.15 * (-((hour(h) - 19.0) / 2.5).powi(2)).exp()
        })
        .collect();
    let cooling: Vec<f64> = (0..HOURS)
        .map(|h| ((hour(h) - 8.0) / 24.0 * 2.0 * PI).sin().max(0.0) + 0.3)
        .collect();
    let cooling_peak = cooling.iter().cloned().fold(f64::MIN, f64::max);
    let price_shape: Vec<f64> = (0..HOURS)
        .map(|h| 25.0 + 20.0 * (-((hour(h) - 16.0) / 4.0).powi(2)).exp())
        .collect();

    let mut load = vec![[0.0; HOURS]; DAYS];
    let mut price = vec![[0.0; HOURS]; DAYS];
    for d in 0..DAYS {
        let shock: f64 = rng.sample(StandardNormal);
        for h in 0..HOURS {
            let noise: f64 = rng.sample(StandardNormal);
            load[d][h] = shape[h] * (1.0 + 0.18 * shock * cooling[h] / cooling_peak) + 0.03 * noise;
        }
        for h in 0..HOURS {
            let noise: f64 = rng.sample(StandardNormal);
            price[d][h] = (price_shape[h] * (1.0 + 0.35 * shock) + 3.0 * noise).max(5.0);
        }
    }
    let mean_total = load.iter().map(|day| day.iter().sum::<f64>()).sum::<f64>() / DAYS as f64;
    let scale = MEAN_DAILY_KWH / mean_total;

    std::fs::create_dir_all(&out)?;
    let write = |name: &str, rows: &[[f64; HOURS]], factor: f64, digits: usize| {
        let mut text = String::from("day,hour,value\n");
        for (d, day) in rows.iter().enumerate() {
            for (h, v) in day.iter().enumerate() {
                writeln!(text, "{d},{h},{:.*}", digits, v * factor).unwrap();
            }
        }
        std::fs::write(out.join(name), text)
    };
    write("load.csv", &load, scale, 1)?;
    write("prices.csv", &price, 1.0, 3)?;
    println!("wrote {DAYS} days x {HOURS} hours to {}", out.display());
    Ok(())
}
