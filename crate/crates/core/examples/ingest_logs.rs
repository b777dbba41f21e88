//! Parse raw scan logs (CSV and JSON lines), hash device ids, and derive
//! activity timelines with and without gap bridging.

use proxnet::ingest::{activity_timelines, hash_id, read_scan_log, LogFormat};
use proxnet::model::{Participant, Platform, Roster, Source, TimeGrid};

fn main() -> proxnet::Result<()> {
    let salt = "example-salt";
    let ann = hash_id("AC:DE:48:00:11:22", salt)?;
    let ben = hash_id("ac-de-48-00-11-33", salt)?;
    println!("ann -> {}...", &ann.as_str()[..16]);

    let roster = Roster::new(vec![
        Participant { name: "ann".into(), app_id: Some(ann.clone()), badge_id: None, platform: Platform::PlatformA },
        Participant { name: "ben".into(), app_id: Some(ben.clone()), badge_id: None, platform: Platform::PlatformB },
    ])?;

    // Monday 17 August 2015, 09:00-09:30 in Sydney (UTC+10).
    let csv = format!(
        "ts,source,kind,scanner,observed\n\
         2015-08-16T23:00:05Z,app,scan,{ann},\n\
         2015-08-16T23:00:06Z,app,detect,{ann},{ben}\n\
         2015-08-16T23:00:06Z,app,detect,{ann},{ben}\n\
         2015-08-16T23:15:00Z,app,scan,{ann},\n\
         2015-08-16T23:16:00Z,app,detect,{ann},\n\
         yesterday,app,scan,{ann},\n"
    );
    let parsed = read_scan_log(csv.as_bytes(), LogFormat::Csv, Source::App, "inline.csv")?;
    println!("{} events, {} duplicate(s) dropped", parsed.events.len(), parsed.duplicates);
    for r in &parsed.rejections {
        println!("  rejected line {}: {}", r.line, r.reason);
    }

    let jsonl = format!(
        "{{\"ts\":\"2015-08-16T23:25:00Z\",\"source\":\"app\",\"kind\":\"telemetry\",\"scanner\":\"{ben}\",\"observed\":null}}\n"
    );
    let more = read_scan_log(jsonl.as_bytes(), LogFormat::JsonLines, Source::App, "inline.jsonl")?;
    let mut events = parsed.events;
    events.extend(more.events);
    events.sort();

    let grid = TimeGrid::study();
    for gap in [0, 3] {
        let timelines = activity_timelines(&events, &grid, &roster, Source::App, gap)?;
        for (p, t) in roster.participants().iter().zip(&timelines) {
            let bins: Vec<usize> = t.active_bins().ones().collect();
            println!("gap {gap}: {} active in bins {:?}", p.name, bins);
        }
    }
    Ok(())
}
