//! Simulate the four-week field study and report what the simulator
//! knows: activity, scanning rates and the true contact network.
//!
//! `cargo run --release --example simulate_study [seed] [out_dir]`

use std::fs::File;
use std::path::PathBuf;

use proxnet::backbone::density;
use proxnet::export::write_matrix;
use proxnet::ingest::{write_roster, write_scan_log};
use proxnet::sim::{simulate, SimConfig};

fn main() -> proxnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let config = SimConfig::field_study(seed);
    let out = simulate(&config)?;
    let truth = &out.truth;

    println!("{} participants, {} bins", out.roster.len(), out.grid.total_bins());
    println!("app log {} rows, badge log {} rows", out.app_log.len(), out.badge_log.len());
    println!("{:<5} {:<11} {:>8} {:>9} {:>8}", "who", "platform", "app on", "scans/hr", "badge");
    for (i, p) in out.roster.participants().iter().enumerate() {
        println!(
            "{:<5} {:<11} {:>7.1}% {:>9.2} {:>7.1}%",
            p.name,
            p.platform.as_str(),
            100.0 * truth.app_activity_fraction(i),
            truth.scans_per_active_hour(i, &out.grid),
            100.0 * truth.badge_activity_fraction(i),
        );
    }
    println!("true network density {:.4}", density(&truth.true_weights));

    if let Some(dir) = args.next().map(PathBuf::from) {
        std::fs::create_dir_all(&dir).expect("create output dir");
        let create = |name: &str| File::create(dir.join(name)).expect("create output file");
        write_roster(create("roster.csv"), &out.roster)?;
        write_scan_log(create("app_log.csv"), &out.app_log)?;
        write_scan_log(create("badge_log.csv"), &out.badge_log)?;
        write_matrix(create("truth.csv"), &truth.true_weights)?;
        println!("wrote logs to {}", dir.display());
    }
    Ok(())
}
