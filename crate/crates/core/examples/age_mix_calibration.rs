//! How the default bed-seeker age mix is chosen, and what it does to the bed queue.
//!
//! The default comes from offered-load arithmetic (`age_mix_for_bed_renege`).
//! This sweeps the mix around it and prints the simulated bed statistics so the
//! choice can be checked against a target renege rate.
//!
//!     cargo run --release --example age_mix_calibration [-- --reps 40]

use shelter_core::config::{age_mix_for_bed_renege, StayAttributes};
use shelter_core::{run_scenario, ScenarioConfig};

fn main() {
    let reps = std::env::args()
        .skip_while(|a| a != "--reps")
        .nth(1)
        .and_then(|v| v.parse().ok())
        .unwrap_or(40);
    let base = ScenarioConfig {
        replications: reps,
        ..ScenarioConfig::default()
    };
    let stay = StayAttributes::default();
    for target in [0.20, 0.253, 0.30] {
        let mix = age_mix_for_bed_renege(
            target,
            base.bed_capacity,
            base.annual_arrivals,
            base.bsy_fraction,
            &stay,
        );
        println!(
            "target renege {:4.1}% -> 16-20 share {mix:.4}",
            100.0 * target
        );
    }
    println!("\n16-20 share   bed renege %   bed wait (d)   bed utilization");
    for mix in [0.75, 0.80, 0.85, 0.88, base.age_16_20_fraction, 0.95] {
        let c = ScenarioConfig {
            age_16_20_fraction: mix,
            ..base.clone()
        };
        let s = run_scenario(&c).expect("scenario runs");
        let bed = s.resource("bed").expect("bed row");
        let get =
            |m: &Option<shelter_core::experiment::Metric>| m.as_ref().map_or(f64::NAN, |m| m.mean);
        println!(
            "{mix:>11.4}   {:>12.1}   {:>12.2}   {:>14.1}%",
            get(&bed.renege_pct),
            get(&bed.avg_wait),
            100.0 * get(&bed.utilization)
        );
    }
}
