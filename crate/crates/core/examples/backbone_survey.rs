//! Compare density-matched disparity backbones against a nomination survey.
//! The survey is synthesized from the true network: each participant names
//! up to five strongest contacts.

use std::io::Write;

use proxnet::backbone::{density, density_matched_backbone, edge_alphas, symmetrize};
use proxnet::estimate::{build_detection_grid, weighted_network, Universe, WeightMode};
use proxnet::export::write_graphml;
use proxnet::ingest::{read_survey, NameMap};
use proxnet::model::Source;
use proxnet::sim::{simulate, SimConfig};
use proxnet::stats::edge_match_count;

fn main() -> proxnet::Result<()> {
    let out = simulate(&SimConfig::field_study(2))?;
    let names = out.roster.names();
    let truth = &out.truth.true_weights;

    let mut csv = String::from("respondent,nominee1,nominee2,nominee3,nominee4,nominee5\n");
    for i in 0..truth.n() {
        let mut others: Vec<usize> = (0..truth.n()).filter(|&j| j != i && truth.weight(i, j) > 0.05).collect();
        others.sort_by(|&a, &b| truth.weight(i, b).total_cmp(&truth.weight(i, a)));
        others.truncate(2 + i % 4);
        let mut row = vec![names[i].clone()];
        row.extend(others.iter().map(|&j| names[j].clone()));
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    let survey = symmetrize(&read_survey(csv.as_bytes(), &names, &NameMap::new(), "survey")?.network);
    println!("survey: {} edges, density {:.3}", survey.edge_count(), density(&survey));

    for source in [Source::App, Source::Badge] {
        let log = if source == Source::App { &out.app_log } else { &out.badge_log };
        let grid = build_detection_grid(log, &out.grid, &out.roster, source)?;
        let w = weighted_network(&grid, None, WeightMode::TimeFraction, Universe::AllOfficeBins)?;
        let available = edge_alphas(&w).len();
        match density_matched_backbone(&w, density(&survey)) {
            Ok(b) => {
                let m = edge_match_count(&b.network, &survey)?;
                println!(
                    "{source}: {available} weighted edges, backbone keeps {} (alpha <= {:.3}), {} of {} survey edges matched",
                    b.network.edge_count(), b.threshold, m.matched, m.total
                );
                if source == Source::App {
                    let mut g = Vec::new();
                    write_graphml(&mut g, &b.network, Some(&w))?;
                    std::io::stdout().write_all(&g[..g.len().min(400)]).ok();
                    println!("...");
                }
            }
            Err(e) => println!("{source}: {e}"),
        }
    }
    Ok(())
}
