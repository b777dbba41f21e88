//! Cross-tabulate app and badge detections per dyad and bin, and compute
//! phi, chi-squared, marginal odds, sensitivity and specificity.

use proxnet::estimate::{build_detection_grid, Universe};
use proxnet::ingest::activity_timelines;
use proxnet::model::{ContingencyTable, Source};
use proxnet::sim::{simulate, SimConfig};
use proxnet::stats::{contingency, table_stats, CoactiveRule, PairedTimelines};

fn show(label: &str, t: &ContingencyTable) {
    match table_stats(t) {
        Ok(s) => println!(
            "{label:<22} a={:<6} b={:<6} c={:<6} d={:<7} phi={:.3} chi2={:.1} p={:.2e} odds app={:.2}% badge={:.2}% sens={:.3} spec={:.4}",
            t.a, t.b, t.c, t.d, s.phi, s.chi2, s.p_value,
            100.0 * s.odds_a, 100.0 * s.odds_b, s.sensitivity, s.specificity
        ),
        Err(e) => println!("{label:<22} {e}"),
    }
}

fn main() -> proxnet::Result<()> {
    // Published counts for all office hours and for co-active bins.
    show("published, all bins", &ContingencyTable::new(191, 6448, 264, 227270));
    show("published, co-active", &ContingencyTable::new(191, 2327, 214, 29252));

    let out = simulate(&SimConfig::field_study(3))?;
    let app = build_detection_grid(&out.app_log, &out.grid, &out.roster, Source::App)?;
    let badge = build_detection_grid(&out.badge_log, &out.grid, &out.roster, Source::Badge)?;
    let ta = activity_timelines(&out.app_log, &out.grid, &out.roster, Source::App, 0)?;
    let tb = activity_timelines(&out.badge_log, &out.grid, &out.roster, Source::Badge, 0)?;

    show("simulated, all bins", &contingency(&app, &badge, Universe::AllOfficeBins, None)?);
    show("simulated, app scans", &contingency(&app, &badge, Universe::SampledBins, None)?);
    for (label, rule) in [("simulated, all four on", CoactiveRule::AllFour), ("simulated, apps on", CoactiveRule::SourceAPair)] {
        let paired = PairedTimelines { a: &ta, b: &tb, rule };
        show(label, &contingency(&app, &badge, Universe::CoactiveBins, Some(paired))?);
    }
    Ok(())
}
