//! Weighted networks from simulated app and badge logs under both weighting
//! schemes and all three time universes.

use proxnet::backbone::density;
use proxnet::estimate::{build_detection_grid, weighted_network, Universe, WeightMode};
use proxnet::ingest::activity_timelines;
use proxnet::model::Source;
use proxnet::sim::{simulate, SimConfig};
use proxnet::stats::mantel;

fn main() -> proxnet::Result<()> {
    let out = simulate(&SimConfig::field_study(7))?;
    println!("true density {:.4}", density(&out.truth.true_weights));
    for (source, log) in [(Source::App, &out.app_log), (Source::Badge, &out.badge_log)] {
        let grid = build_detection_grid(log, &out.grid, &out.roster, source)?;
        let timelines = activity_timelines(log, &out.grid, &out.roster, source, 0)?;
        for mode in [WeightMode::ScanNormalized, WeightMode::TimeFraction] {
            for universe in [Universe::AllOfficeBins, Universe::CoactiveBins, Universe::SampledBins] {
                let w = weighted_network(&grid, Some(&timelines), mode, universe)?;
                let rho = mantel(&w, &out.truth.true_weights, 0, 0)?.rho;
                println!(
                    "{source:<5} {:<15} {:<14} density {:.4}  rho vs truth {rho:.3}",
                    format!("{mode:?}"),
                    format!("{universe:?}"),
                    density(&w)
                );
            }
        }
    }
    Ok(())
}
