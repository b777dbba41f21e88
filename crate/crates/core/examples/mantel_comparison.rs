//! Mantel tests with bootstrap intervals between app, badge and true
//! networks.

use proxnet::estimate::{build_detection_grid, weighted_network, Universe, WeightMode};
use proxnet::model::{Source, WeightedNetwork};
use proxnet::sim::{simulate, SimConfig};
use proxnet::stats::mantel_with_ci;

fn network(out: &proxnet::sim::SimOutput, source: Source) -> proxnet::Result<WeightedNetwork> {
    let log = if source == Source::App { &out.app_log } else { &out.badge_log };
    let grid = build_detection_grid(log, &out.grid, &out.roster, source)?;
    weighted_network(&grid, None, WeightMode::TimeFraction, Universe::AllOfficeBins)
}

fn main() -> proxnet::Result<()> {
    let out = simulate(&SimConfig::field_study(5))?;
    let app = network(&out, Source::App)?;
    let badge = network(&out, Source::Badge)?;
    let truth = &out.truth.true_weights;
    for (label, a, b) in [("app vs badge", &app, &badge), ("app vs truth", &app, truth), ("badge vs truth", &badge, truth)] {
        let m = mantel_with_ci(a, b, 10_000, 1_000, 0.95, 42)?;
        println!(
            "{label:<15} rho={:.3} p={:.4} 95% CI [{:.3}, {:.3}]",
            m.rho,
            m.p_value,
            m.ci_low.unwrap_or(f64::NAN),
            m.ci_high.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
