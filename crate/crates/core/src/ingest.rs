//! Parsing of scan logs, rosters, name maps and survey nominations, device-id
//! hashing, and per-device activity timelines.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, SecondsFormat, Utc};
use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{
    ActivityTimeline, DeviceId, DirectedSurveyNetwork, EventKind, Participant, Roster, ScanEvent,
    Source, TimeGrid, MAX_NOMINATIONS,
};

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Salted one-way digest of a raw hardware identifier.
///
/// Separators (`:`, `-`, `.`, whitespace) are stripped and the identifier
/// lowercased first, so `AA:BB:CC:DD:EE:FF` and `aabbccddeeff` hash alike.
/// The digest is `SHA-256(salt || 0x00 || normalized)`.
pub fn hash_id(raw: &str, salt: &str) -> Result<DeviceId> {
    let normalized: String = raw
        .chars()
        .filter(|c| !matches!(c, ':' | '-' | '.') && !c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect();
    if normalized.is_empty() {
        return Err(Error::Validation("cannot hash an empty identifier".into()));
    }
    let mut hasher = Sha256::new();
    hasher.update(salt.as_bytes());
    hasher.update([0u8]);
    hasher.update(normalized.as_bytes());
    DeviceId::parse(&hex::encode(hasher.finalize()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    Csv,
    JsonLines,
}

impl LogFormat {
    /// `.jsonl`/`.ndjson`/`.json` are JSON lines; everything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl" | "ndjson" | "json") => LogFormat::JsonLines,
            _ => LogFormat::Csv,
        }
    }
}

/// One log row before validation.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RawLogRecord {
    pub ts: String,
    pub source: String,
    pub kind: String,
    pub scanner: String,
    #[serde(default)]
    pub observed: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub line: u64,
    pub reason: String,
}

/// Parsed events plus everything that did not make it through.
#[derive(Debug, Clone, Default)]
pub struct ParsedLog {
    /// Sorted by timestamp (ties broken by the remaining fields), deduplicated.
    pub events: Vec<ScanEvent>,
    pub rejections: Vec<Rejection>,
    pub duplicates: usize,
    pub origin: String,
}

impl ParsedLog {
    /// Turn the first rejection, if any, into a parse error.
    pub fn into_strict(self) -> Result<Self> {
        match self.rejections.first() {
            Some(r) => Err(Error::Parse {
                path: self.origin.clone(),
                line: r.line,
                message: r.reason.clone(),
            }),
            None => Ok(self),
        }
    }
}

fn parse_timestamp(s: &str) -> Result<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(t.and_utc());
        }
    }
    Err(Error::Validation(format!("unparseable timestamp {s:?}")))
}

fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

impl RawLogRecord {
    fn into_event(self, expected: Source) -> Result<ScanEvent> {
        let timestamp = parse_timestamp(&self.ts)?;
        let source: Source = self.source.parse()?;
        if source != expected {
            return Err(Error::Validation(format!(
                "row source {source} in a {expected} log"
            )));
        }
        let kind: EventKind = self.kind.parse()?;
        let scanner = DeviceId::parse(&self.scanner)?;
        let observed = match self.observed.as_deref().map(str::trim) {
            None | Some("") => None,
            Some(o) => Some(DeviceId::parse(o)?),
        };
        ScanEvent::new(timestamp, source, kind, scanner, observed)
    }

    fn from_event(e: &ScanEvent) -> Self {
        RawLogRecord {
            ts: format_timestamp(&e.timestamp),
            source: e.source.as_str().to_string(),
            kind: e.kind.as_str().to_string(),
            scanner: e.scanner.to_string(),
            observed: e.observed.as_ref().map(|o| o.to_string()),
        }
    }
}

fn finish(origin: &str, mut events: Vec<ScanEvent>, rejections: Vec<Rejection>) -> ParsedLog {
    events.sort();
    let before = events.len();
    events.dedup();
    ParsedLog {
        duplicates: before - events.len(),
        events,
        rejections,
        origin: origin.to_string(),
    }
}

/// Parse a scan log from any reader. `origin` labels error messages.
pub fn read_scan_log<R: Read>(
    reader: R,
    format: LogFormat,
    source: Source,
    origin: &str,
) -> Result<ParsedLog> {
    let mut events = Vec::new();
    let mut rejections = Vec::new();
    match format {
        LogFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
            let headers = rdr.headers()?.clone();
            for required in ["ts", "source", "kind", "scanner", "observed"] {
                if !headers.iter().any(|h| h == required) {
                    return Err(Error::Parse {
                        path: origin.to_string(),
                        line: 1,
                        message: format!("missing column {required:?}"),
                    });
                }
            }
            for row in rdr.records() {
                let (line, parsed) = match row {
                    Ok(rec) => {
                        let line = rec.position().map_or(0, |p| p.line());
                        let parsed = rec
                            .deserialize::<RawLogRecord>(Some(&headers))
                            .map_err(Error::from)
                            .and_then(|r| r.into_event(source));
                        (line, parsed)
                    }
                    Err(e) => (e.position().map_or(0, |p| p.line()), Err(Error::from(e))),
                };
                match parsed {
                    Ok(ev) => events.push(ev),
                    Err(e) => rejections.push(Rejection {
                        line,
                        reason: e.to_string(),
                    }),
                }
            }
        }
        LogFormat::JsonLines => {
            for (idx, line) in BufReader::new(reader).lines().enumerate() {
                let line_no = idx as u64 + 1;
                let line = line.map_err(|e| Error::io(origin, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let parsed = serde_json::from_str::<RawLogRecord>(&line)
                    .map_err(Error::from)
                    .and_then(|r| r.into_event(source));
                match parsed {
                    Ok(ev) => events.push(ev),
                    Err(e) => rejections.push(Rejection {
                        line: line_no,
                        reason: e.to_string(),
                    }),
                }
            }
        }
    }
    Ok(finish(origin, events, rejections))
}

/// Parse a scan log file; the format follows the file extension.
pub fn parse_scan_log(path: impl AsRef<Path>, source: Source) -> Result<ParsedLog> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_scan_log(
        file,
        LogFormat::from_path(path),
        source,
        &path.display().to_string(),
    )
}

/// Write events as a CSV scan log (`ts,source,kind,scanner,observed`).
pub fn write_scan_log<W: Write>(writer: W, events: &[ScanEvent]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["ts", "source", "kind", "scanner", "observed"])?;
    for e in events {
        let r = RawLogRecord::from_event(e);
        wtr.write_record([
            r.ts.as_str(),
            r.source.as_str(),
            r.kind.as_str(),
            r.scanner.as_str(),
            r.observed.as_deref().unwrap_or(""),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Write events as JSON lines.
pub fn write_scan_log_jsonl<W: Write>(mut writer: W, events: &[ScanEvent]) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut writer, &RawLogRecord::from_event(e))?;
        writer
            .write_all(b"\n")
            .map_err(|e| Error::io("<jsonl writer>", e))?;
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
struct RosterRow {
    participant: String,
    #[serde(default)]
    app_id: Option<String>,
    #[serde(default)]
    badge_id: Option<String>,
    platform: String,
}

fn optional_id(s: Option<String>) -> Result<Option<DeviceId>> {
    match s.as_deref().map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => DeviceId::parse(v).map(Some),
    }
}

/// Roster CSV: `participant,app_id,badge_id,platform`.
pub fn read_roster<R: Read>(reader: R, origin: &str) -> Result<Roster> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut participants = Vec::new();
    for row in rdr.deserialize::<RosterRow>() {
        let row = row?;
        let wrap = |e: Error| Error::Parse {
            path: origin.to_string(),
            line: participants.len() as u64 + 2,
            message: e.to_string(),
        };
        participants.push(Participant {
            name: row.participant,
            app_id: optional_id(row.app_id).map_err(wrap)?,
            badge_id: optional_id(row.badge_id).map_err(wrap)?,
            platform: row.platform.parse().map_err(wrap)?,
        });
    }
    Roster::new(participants)
}

pub fn parse_roster(path: impl AsRef<Path>) -> Result<Roster> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_roster(file, &path.display().to_string())
}

pub fn write_roster<W: Write>(writer: W, roster: &Roster) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["participant", "app_id", "badge_id", "platform"])?;
    for p in roster.participants() {
        wtr.write_record([
            p.name.as_str(),
            p.app_id.as_ref().map_or("", |d| d.as_str()),
            p.badge_id.as_ref().map_or("", |d| d.as_str()),
            p.platform.as_str(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Explicit free-text name to roster participant mapping (`name,participant`).
#[derive(Debug, Clone, Default)]
pub struct NameMap {
    map: HashMap<String, String>,
}

impl NameMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, participant: impl Into<String>) {
        self.map.insert(name.into().trim().to_string(), participant.into());
    }

    /// Mapped participant, or the name itself when it names a roster entry.
    fn resolve(&self, name: &str, roster: &[String]) -> Option<usize> {
        let name = name.trim();
        let target = self.map.get(name).map_or(name, String::as_str);
        roster.iter().position(|r| r == target)
    }
}

pub fn read_name_map<R: Read>(reader: R) -> Result<NameMap> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut names = NameMap::new();
    for row in rdr.records() {
        let row = row?;
        if let (Some(name), Some(p)) = (row.get(0), row.get(1)) {
            names.insert(name, p);
        }
    }
    Ok(names)
}

pub fn parse_name_map(path: impl AsRef<Path>) -> Result<NameMap> {
    let path = path.as_ref();
    read_name_map(File::open(path).map_err(|e| Error::io(path, e))?)
}

/// One respondent's resolved nominations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurveyResponse {
    pub respondent: usize,
    /// Distinct roster positions, never the respondent.
    pub nominees: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurveyWarning {
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct SurveyParse {
    pub network: DirectedSurveyNetwork,
    pub responses: Vec<SurveyResponse>,
    /// Unresolved names and self-nominations; these never become edges.
    pub warnings: Vec<SurveyWarning>,
}

/// Survey CSV: `respondent,nominee1..nominee5` with blank cells allowed.
pub fn read_survey<R: Read>(
    reader: R,
    roster: &[String],
    names: &NameMap,
    origin: &str,
) -> Result<SurveyParse> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let n = roster.len();
    let mut adjacency = vec![false; n * n];
    let mut seen = BTreeSet::new();
    let mut responses = Vec::new();
    let mut warnings = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let parse_err = |message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let Some(respondent_name) = row.get(0).filter(|s| !s.is_empty()) else {
            continue;
        };
        let respondent = names
            .resolve(respondent_name, roster)
            .ok_or_else(|| parse_err(format!("respondent {respondent_name:?} not in roster")))?;
        if !seen.insert(respondent) {
            return Err(parse_err(format!("respondent {respondent_name:?} answered twice")));
        }
        let named: Vec<&str> = row.iter().skip(1).filter(|s| !s.is_empty()).collect();
        if named.len() > MAX_NOMINATIONS {
            return Err(parse_err(format!(
                "{respondent_name:?} nominated {} colleagues (max {MAX_NOMINATIONS})",
                named.len()
            )));
        }
        let mut nominees = Vec::new();
        for name in named {
            match names.resolve(name, roster) {
                Some(j) if j == respondent => warnings.push(SurveyWarning {
                    line,
                    message: format!("{respondent_name:?} nominated themselves"),
                }),
                Some(j) => {
                    if !nominees.contains(&j) {
                        nominees.push(j);
                        adjacency[respondent * n + j] = true;
                    }
                }
                None => warnings.push(SurveyWarning {
                    line,
                    message: format!("unresolved nominee {name:?}"),
                }),
            }
        }
        responses.push(SurveyResponse {
            respondent,
            nominees,
        });
    }
    Ok(SurveyParse {
        network: DirectedSurveyNetwork::new(roster.to_vec(), adjacency)?,
        responses,
        warnings,
    })
}

pub fn parse_survey(
    path: impl AsRef<Path>,
    roster: &[String],
    names: &NameMap,
) -> Result<SurveyParse> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_survey(file, roster, names, &path.display().to_string())
}

/// Mark inactive runs of at most `gap` bins lying between two active bins.
fn bridge_gaps(active: &mut FixedBitSet, gap: usize) {
    if gap == 0 {
        return;
    }
    let ones: Vec<usize> = active.ones().collect();
    for w in ones.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo - 1 <= gap {
            active.insert_range(lo + 1..hi);
        }
    }
}

/// Activity timeline of one device.
///
/// A bin is active when it holds any event issued by the device (scan,
/// detection or telemetry) or any detection of the device by a peer.
/// Events outside office hours are ignored. With `gap_tolerance > 0`, short
/// inactive runs between active bins are filled in.
pub fn compute_activity(
    device: &DeviceId,
    own_events: &[ScanEvent],
    peer_detections: &[ScanEvent],
    grid: &TimeGrid,
    gap_tolerance: usize,
) -> ActivityTimeline {
    let mut active = FixedBitSet::with_capacity(grid.total_bins());
    let own = own_events.iter().filter(|e| e.scanner == *device);
    let peer = peer_detections
        .iter()
        .filter(|e| e.kind == EventKind::Detect && e.observed.as_ref() == Some(device));
    for e in own.chain(peer) {
        if let Some(bin) = grid.bin_of(e.timestamp) {
            active.insert(bin);
        }
    }
    bridge_gaps(&mut active, gap_tolerance);
    ActivityTimeline::new(device.clone(), active)
}

/// Activity timelines for every roster participant on one source, in roster
/// order. Every participant must have a device registered for `source`.
pub fn activity_timelines(
    events: &[ScanEvent],
    grid: &TimeGrid,
    roster: &Roster,
    source: Source,
    gap_tolerance: usize,
) -> Result<Vec<ActivityTimeline>> {
    let mut bits: Vec<FixedBitSet> = (0..roster.len())
        .map(|_| FixedBitSet::with_capacity(grid.total_bins()))
        .collect();
    for e in events.iter().filter(|e| e.source == source) {
        let Some(bin) = grid.bin_of(e.timestamp) else {
            continue;
        };
        if let Some(i) = roster.index_of(source, &e.scanner) {
            bits[i].insert(bin);
        }
        if let Some(j) = e.observed.as_ref().and_then(|o| roster.index_of(source, o)) {
            bits[j].insert(bin);
        }
    }
    roster
        .participants()
        .iter()
        .zip(bits)
        .map(|(p, mut active)| {
            let device = p.device(source).cloned().ok_or_else(|| {
                Error::DataIntegrity(format!("{} has no {source} device", p.name))
            })?;
            bridge_gaps(&mut active, gap_tolerance);
            Ok(ActivityTimeline::new(device, active))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Duration;
    use proptest::prelude::*;

    fn id(s: &str) -> DeviceId {
        DeviceId::parse(s).unwrap()
    }

    #[test]
    fn sha256_reference_vectors() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(
            sha256_hex(b"abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"),
            "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1"
        );
    }

    #[test]
    fn hash_normalizes_separators_and_case() {
        let a = hash_id("AA:BB:CC:DD:EE:FF", "s").unwrap();
        let b = hash_id("aabbccddeeff", "s").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.as_str().len(), 64);
        assert_ne!(a, hash_id("aabbccddeeff", "t").unwrap());
        assert!(hash_id(" : ", "s").is_err());
    }

    #[test]
    fn hash_matches_manual_digest() {
        let expected = sha256_hex(b"salt\x00aabbccddeeff");
        assert_eq!(hash_id("aa-bb-cc-dd-ee-ff", "salt").unwrap().as_str(), expected);
    }

    #[test]
    fn empty_log_with_header() {
        let log = read_scan_log(
            "ts,source,kind,scanner,observed\n".as_bytes(),
            LogFormat::Csv,
            Source::App,
            "mem",
        )
        .unwrap();
        assert!(log.events.is_empty());
        assert!(log.rejections.is_empty());
    }

    #[test]
    fn detect_without_observed_is_rejected_with_line() {
        let text = "ts,source,kind,scanner,observed\n\
                    2015-08-17T00:00:00Z,app,scan,aa,\n\
                    2015-08-17T00:00:01Z,app,detect,aa,\n\
                    2015-08-17T00:00:02Z,app,wave,aa,\n";
        let log = read_scan_log(text.as_bytes(), LogFormat::Csv, Source::App, "mem").unwrap();
        assert_eq!(log.events.len(), 1);
        assert_eq!(log.rejections.len(), 2);
        assert_eq!(log.rejections[0].line, 3);
        assert_eq!(log.rejections[1].line, 4);
        let err = log.into_strict().unwrap_err();
        assert!(err.to_string().starts_with("mem:3:"), "{err}");
    }

    #[test]
    fn wrong_source_row_is_rejected() {
        let text = "ts,source,kind,scanner,observed\n2015-08-17T00:00:00Z,badge,scan,aa,\n";
        let log = read_scan_log(text.as_bytes(), LogFormat::Csv, Source::App, "mem").unwrap();
        assert_eq!(log.rejections.len(), 1);
    }

    #[test]
    fn shuffled_rows_come_back_sorted_and_deduplicated() {
        let t0: DateTime<Utc> = "2015-08-17T00:00:00Z".parse().unwrap();
        let mut rows: Vec<String> = (0..50)
            .map(|k| format!("{},app,scan,aa,", format_timestamp(&(t0 + Duration::seconds(k)))))
            .collect();
        // Fixed permutation: stride 7 over 50 (coprime) visits every row once.
        let shuffled: Vec<String> = (0..50).map(|k| rows[(k * 7) % 50].clone()).collect();
        rows = shuffled;
        rows.push(rows[0].clone());
        let text = format!("ts,source,kind,scanner,observed\n{}\n", rows.join("\n"));
        let log = read_scan_log(text.as_bytes(), LogFormat::Csv, Source::App, "mem").unwrap();
        assert_eq!(log.events.len(), 50);
        assert_eq!(log.duplicates, 1);
        assert!(log.events.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
    }

    #[test]
    fn jsonl_accepts_null_observed() {
        let text = "{\"ts\":\"2015-08-17T00:00:00Z\",\"source\":\"app\",\"kind\":\"scan\",\"scanner\":\"aa\",\"observed\":null}\n\
                    \n\
                    {\"ts\":\"2015-08-17T00:00:01Z\",\"source\":\"app\",\"kind\":\"detect\",\"scanner\":\"aa\",\"observed\":\"bb\"}\n";
        let log = read_scan_log(text.as_bytes(), LogFormat::JsonLines, Source::App, "mem").unwrap();
        assert_eq!(log.events.len(), 2);
        assert_eq!(log.events[1].observed, Some(id("bb")));
    }

    fn arb_event() -> impl Strategy<Value = ScanEvent> {
        (
            0i64..10_000_000,
            0u32..1000,
            prop::bool::ANY,
            0usize..3,
            0u8..6,
            0u8..6,
        )
            .prop_map(|(secs, ms, badge, kind, s, o)| {
                let ts = DateTime::from_timestamp(1_439_700_000 + secs, ms * 1_000_000).unwrap();
                let source = if badge { Source::Badge } else { Source::App };
                let scanner = id(&format!("a{s}"));
                let (kind, observed) = match kind {
                    0 => (EventKind::Scan, None),
                    1 => (EventKind::Telemetry, None),
                    _ => (
                        EventKind::Detect,
                        Some(id(&format!("b{o}"))),
                    ),
                };
                ScanEvent::new(ts, source, kind, scanner, observed).unwrap()
            })
    }

    proptest! {
        #[test]
        fn csv_and_jsonl_round_trip(events in prop::collection::vec(arb_event(), 0..40)) {
            let events: Vec<ScanEvent> = events.into_iter().map(|mut e| { e.source = Source::App; e }).collect();
            let canonical = finish("x", events.clone(), vec![]).events;

            let mut buf = Vec::new();
            write_scan_log(&mut buf, &canonical).unwrap();
            let back = read_scan_log(buf.as_slice(), LogFormat::Csv, Source::App, "x").unwrap();
            prop_assert!(back.rejections.is_empty());
            prop_assert_eq!(&back.events, &canonical);

            let mut buf = Vec::new();
            write_scan_log_jsonl(&mut buf, &canonical).unwrap();
            let back = read_scan_log(buf.as_slice(), LogFormat::JsonLines, Source::App, "x").unwrap();
            prop_assert_eq!(&back.events, &canonical);
        }

        #[test]
        fn adding_evidence_never_deactivates(
            base in prop::collection::vec(0usize..96, 0..30),
            extra in prop::collection::vec(0usize..96, 0..30),
            gap in 0usize..4,
        ) {
            let mut spec = crate::model::GridSpec::study();
            spec.end_date = spec.start_date;
            let grid = TimeGrid::new(spec).unwrap();
            let dev = id("aa");
            let mk = |bins: &[usize]| -> Vec<ScanEvent> {
                bins.iter().map(|&b| ScanEvent::new(grid.bin_start(b), Source::App, EventKind::Telemetry, dev.clone(), None).unwrap()).collect()
            };
            let small = compute_activity(&dev, &mk(&base), &[], &grid, gap);
            let all: Vec<usize> = base.iter().chain(extra.iter()).copied().collect();
            let big = compute_activity(&dev, &mk(&all), &[], &grid, gap);
            prop_assert!(small.active_bins().is_subset(big.active_bins()));
        }
    }

    fn roster5() -> Vec<String> {
        ["ann", "bob", "cat", "dan", "eve", "fay", "gus"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    #[test]
    fn survey_rows_resolve_through_name_map() {
        let mut names = NameMap::new();
        names.insert("Robert", "bob");
        let text = "respondent,nominee1,nominee2,nominee3,nominee4,nominee5\n\
                    ann,Robert,cat,,,\n\
                    bob,,,,,\n\
                    cat,ann,bob,dan,eve,fay\n\
                    dan,Zed,dan,,,\n";
        let s = read_survey(text.as_bytes(), &roster5(), &names, "mem").unwrap();
        assert!(s.network.nominates(0, 1) && s.network.nominates(0, 2));
        assert_eq!(s.network.out_degree(1), 0);
        assert_eq!(s.network.out_degree(2), 5);
        assert_eq!(s.network.out_degree(3), 0);
        assert_eq!(s.warnings.len(), 2);
    }

    #[test]
    fn survey_errors() {
        let names = NameMap::new();
        let too_many = "respondent,n1,n2,n3,n4,n5,n6\nann,bob,cat,dan,eve,fay,gus\n";
        assert!(read_survey(too_many.as_bytes(), &roster5(), &names, "m").is_err());
        let stranger = "respondent,n1\nzed,bob\n";
        assert!(read_survey(stranger.as_bytes(), &roster5(), &names, "m").is_err());
    }

    #[test]
    fn roster_csv_round_trip() {
        let text = "participant,app_id,badge_id,platform\np1,aa,ba,platform_A\np2,ab,,platform_B\n";
        let roster = read_roster(text.as_bytes(), "mem").unwrap();
        assert_eq!(roster.len(), 2);
        assert_eq!(roster.index_of(Source::App, &id("ab")), Some(1));
        assert_eq!(roster.index_of(Source::Badge, &id("ab")), None);
        let mut out = Vec::new();
        write_roster(&mut out, &roster).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn activity_edge_cases() {
        let mut spec = crate::model::GridSpec::study();
        spec.end_date = spec.start_date;
        let grid = TimeGrid::new(spec).unwrap();
        let dev = id("aa");
        let none = compute_activity(&dev, &[], &[], &grid, 0);
        assert_eq!(none.active_fraction(), 0.0);

        let beats: Vec<ScanEvent> = (0..grid.total_bins())
            .map(|b| {
                ScanEvent::new(grid.bin_start(b), Source::App, EventKind::Telemetry, dev.clone(), None)
                    .unwrap()
            })
            .collect();
        assert_eq!(compute_activity(&dev, &beats, &[], &grid, 0).active_fraction(), 1.0);

        let peer = vec![ScanEvent::new(
            grid.bin_start(5),
            Source::App,
            EventKind::Detect,
            id("bb"),
            Some(dev.clone()),
        )
        .unwrap()];
        let t = compute_activity(&dev, &[], &peer, &grid, 0);
        assert!(t.is_active(5));
        assert_eq!(t.active_count(), 1);
    }

    #[test]
    fn gap_tolerance_bridges_short_runs_only() {
        let mut bits = FixedBitSet::with_capacity(20);
        for b in [1, 3, 10] {
            bits.insert(b);
        }
        bridge_gaps(&mut bits, 2);
        assert_eq!(bits.ones().collect::<Vec<_>>(), vec![1, 2, 3, 10]);
    }

    #[test]
    fn targeted_activity_fraction_within_one_bin() {
        // 791 of 1000 bins carry telemetry, spread evenly (Bresenham selection).
        let mut spec = crate::model::GridSpec::study();
        spec.end_date = spec.start_date.succ_opt().unwrap();
        spec.daily_end = chrono::NaiveTime::from_hms_opt(17, 20, 0).unwrap();
        spec.bin_seconds = 60;
        let grid = TimeGrid::new(spec).unwrap();
        assert_eq!(grid.total_bins(), 1000);
        let dev = id("aa");
        let events: Vec<ScanEvent> = (0..1000usize)
            .filter(|b| (b + 1) * 791 / 1000 > b * 791 / 1000)
            .map(|b| ScanEvent::new(grid.bin_start(b), Source::App, EventKind::Telemetry, dev.clone(), None).unwrap())
            .collect();
        let frac = compute_activity(&dev, &events, &[], &grid, 0).active_fraction();
        assert!((frac - 0.791).abs() <= 1.0 / 1000.0, "{frac}");
    }
}
