//! How the correlation with the true network depends on the number of
//! scans per participant, when one platform scans far less than the other.

use proxnet::estimate::build_detection_grid;
use proxnet::model::Source;
use proxnet::sim::{simulate, SimConfig};
use proxnet::stats::{resampling_curve, Reference};

fn main() -> proxnet::Result<()> {
    let out = simulate(&SimConfig::platform_skew(11))?;
    let grid = build_detection_grid(&out.app_log, &out.grid, &out.roster, Source::App)?;
    let refs = [Reference { label: "truth".into(), network: &out.truth.true_weights }];
    let curve = resampling_curve(&grid, &refs, &[10, 25, 50, 100, 250, 500], 500, 1)?;
    println!("{:>4} {:>6} {:>7} {:>17}", "S", "roster", "rho", "99% band");
    for p in &curve.points {
        let b = &p.bands[0];
        match (b.mean, b.low, b.high) {
            (Some(m), Some(lo), Some(hi)) => {
                println!("{:>4} {:>6} {:>7.3} [{lo:.3}, {hi:.3}]", p.samples, p.roster_n, m)
            }
            _ => println!("{:>4} {:>6}  too few participants", p.samples, p.roster_n),
        }
    }
    Ok(())
}
