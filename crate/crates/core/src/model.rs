//! Core domain types shared by every stage of the pipeline: the office-hours
//! time grid, device identifiers, scan events, activity timelines, the three
//! network flavours and the containers for validation statistics.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Duration, LocalResult, NaiveDate, NaiveTime, TimeZone, Utc, Weekday};
use chrono_tz::Tz;
use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BIN_SECONDS: u32 = 300;

/// Maximum number of colleagues a survey respondent may name.
pub const MAX_NOMINATIONS: usize = 5;

fn default_bin_seconds() -> u32 {
    DEFAULT_BIN_SECONDS
}

/// Serializable description of a [`TimeGrid`], as found in grid JSON files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start_date: NaiveDate,
    /// Inclusive.
    pub end_date: NaiveDate,
    pub days_of_week: Vec<Weekday>,
    pub daily_start: NaiveTime,
    pub daily_end: NaiveTime,
    /// IANA zone name, e.g. `Australia/Sydney`.
    pub timezone: String,
    #[serde(default = "default_bin_seconds")]
    pub bin_seconds: u32,
}

impl GridSpec {
    /// Four working weeks of office hours (Mon-Fri, 09:00-17:00 Sydney time)
    /// starting 17 August 2015, in five-minute bins.
    pub fn study() -> Self {
        GridSpec {
            start_date: NaiveDate::from_ymd_opt(2015, 8, 17).unwrap(),
            end_date: NaiveDate::from_ymd_opt(2015, 9, 11).unwrap(),
            days_of_week: vec![
                Weekday::Mon,
                Weekday::Tue,
                Weekday::Wed,
                Weekday::Thu,
                Weekday::Fri,
            ],
            daily_start: NaiveTime::from_hms_opt(9, 0, 0).unwrap(),
            daily_end: NaiveTime::from_hms_opt(17, 0, 0).unwrap(),
            timezone: "Australia/Sydney".to_string(),
            bin_seconds: DEFAULT_BIN_SECONDS,
        }
    }
}

/// Office-hours bin structure.
///
/// Bins are half-open `[t, t + bin_seconds)` intervals of local time inside
/// each included day, numbered globally in chronological order. Logs are
/// stored in UTC and converted to the grid's zone at binning time.
#[derive(Debug, Clone)]
pub struct TimeGrid {
    spec: GridSpec,
    tz: Tz,
    days: Vec<NaiveDate>,
    daily_bins: usize,
}

impl TimeGrid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        let tz: Tz = spec
            .timezone
            .parse()
            .map_err(|_| Error::Config(format!("unknown timezone {:?}", spec.timezone)))?;
        if spec.bin_seconds == 0 {
            return Err(Error::Config("bin_seconds must be positive".into()));
        }
        if spec.daily_end <= spec.daily_start {
            return Err(Error::Config(format!(
                "daily_end {} must be after daily_start {}",
                spec.daily_end, spec.daily_start
            )));
        }
        let window = (spec.daily_end - spec.daily_start).num_seconds();
        if window % i64::from(spec.bin_seconds) != 0 {
            return Err(Error::Config(format!(
                "bin_seconds {} does not divide the {window} s daily window",
                spec.bin_seconds
            )));
        }
        if spec.end_date < spec.start_date {
            return Err(Error::Config(format!(
                "end_date {} precedes start_date {}",
                spec.end_date, spec.start_date
            )));
        }
        let days = spec
            .start_date
            .iter_days()
            .take_while(|d| *d <= spec.end_date)
            .filter(|d| spec.days_of_week.contains(&chrono::Datelike::weekday(d)))
            .collect();
        let daily_bins = (window / i64::from(spec.bin_seconds)) as usize;
        Ok(TimeGrid {
            spec,
            tz,
            days,
            daily_bins,
        })
    }

    pub fn study() -> Self {
        TimeGrid::new(GridSpec::study()).expect("study grid is valid")
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn timezone(&self) -> Tz {
        self.tz
    }

    pub fn bin_seconds(&self) -> u32 {
        self.spec.bin_seconds
    }

    pub fn days(&self) -> &[NaiveDate] {
        &self.days
    }

    pub fn daily_bins(&self) -> usize {
        self.daily_bins
    }

    pub fn total_bins(&self) -> usize {
        self.days.len() * self.daily_bins
    }

    /// Fraction of an hour covered by one bin.
    pub fn bin_hours(&self) -> f64 {
        f64::from(self.spec.bin_seconds) / 3600.0
    }

    /// Global bin index of an instant, or `None` outside office hours.
    pub fn bin_of(&self, ts: DateTime<Utc>) -> Option<usize> {
        let local = ts.with_timezone(&self.tz);
        let day = self.days.binary_search(&local.date_naive()).ok()?;
        let time = local.time();
        if time < self.spec.daily_start || time >= self.spec.daily_end {
            return None;
        }
        let secs = (time - self.spec.daily_start).num_seconds();
        let slot = (secs / i64::from(self.spec.bin_seconds)) as usize;
        Some(day * self.daily_bins + slot)
    }

    /// Day index (into [`TimeGrid::days`]) a bin belongs to.
    pub fn day_of_bin(&self, bin: usize) -> usize {
        bin / self.daily_bins
    }

    /// UTC start instant of a bin.
    pub fn bin_start(&self, bin: usize) -> DateTime<Utc> {
        assert!(bin < self.total_bins(), "bin {bin} out of range");
        let day = self.days[bin / self.daily_bins];
        let slot = (bin % self.daily_bins) as i64;
        let naive = day.and_time(self.spec.daily_start)
            + Duration::seconds(slot * i64::from(self.spec.bin_seconds));
        match self.tz.from_local_datetime(&naive) {
            LocalResult::Single(t) | LocalResult::Ambiguous(t, _) => t.with_timezone(&Utc),
            // Inside a spring-forward gap: the wall-clock instant does not exist,
            // so take the first valid instant after it.
            LocalResult::None => {
                let mut probe = naive;
                loop {
                    probe += Duration::minutes(1);
                    if let Some(t) = self.tz.from_local_datetime(&probe).earliest() {
                        break t.with_timezone(&Utc);
                    }
                }
            }
        }
    }

    /// Half-open UTC interval `[start, end)` of a bin.
    pub fn bin_interval(&self, bin: usize) -> (DateTime<Utc>, DateTime<Utc>) {
        let start = self.bin_start(bin);
        (start, start + Duration::seconds(i64::from(self.spec.bin_seconds)))
    }
}

/// Hashed device identifier: a lowercase hexadecimal digest.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DeviceId(String);

impl DeviceId {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Validation("empty device id".into()));
        }
        if !s.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(Error::Validation(format!(
                "device id {s:?} is not a hexadecimal digest"
            )));
        }
        Ok(DeviceId(s.to_ascii_lowercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for DeviceId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        DeviceId::parse(&s)
    }
}

impl From<DeviceId> for String {
    fn from(d: DeviceId) -> String {
        d.0
    }
}

/// Handset family. `PlatformA` scans like an Android phone (frequent
/// background scans), `PlatformB` like an iPhone (rare background scans).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Platform {
    #[serde(rename = "platform_A")]
    PlatformA,
    #[serde(rename = "platform_B")]
    PlatformB,
    #[serde(rename = "badge")]
    Badge,
}

impl Platform {
    pub fn as_str(self) -> &'static str {
        match self {
            Platform::PlatformA => "platform_A",
            Platform::PlatformB => "platform_B",
            Platform::Badge => "badge",
        }
    }
}

impl FromStr for Platform {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "platform_a" | "a" | "android" => Ok(Platform::PlatformA),
            "platform_b" | "b" | "ios" => Ok(Platform::PlatformB),
            "badge" => Ok(Platform::Badge),
            other => Err(Error::Validation(format!("unknown platform {other:?}"))),
        }
    }
}

/// Sensing source of a log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    App,
    Badge,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::App => "app",
            Source::Badge => "badge",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "app" => Ok(Source::App),
            "badge" => Ok(Source::Badge),
            other => Err(Error::Validation(format!("unknown source {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Scan,
    Detect,
    Telemetry,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Scan => "scan",
            EventKind::Detect => "detect",
            EventKind::Telemetry => "telemetry",
        }
    }
}

impl FromStr for EventKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "scan" => Ok(EventKind::Scan),
            "detect" => Ok(EventKind::Detect),
            "telemetry" => Ok(EventKind::Telemetry),
            other => Err(Error::Validation(format!("unknown event kind {other:?}"))),
        }
    }
}

/// One log record: a discovery scan attempt, a detection of another device,
/// or a telemetry heartbeat.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScanEvent {
    pub timestamp: DateTime<Utc>,
    pub source: Source,
    pub kind: EventKind,
    pub scanner: DeviceId,
    pub observed: Option<DeviceId>,
}

impl ScanEvent {
    pub fn new(
        timestamp: DateTime<Utc>,
        source: Source,
        kind: EventKind,
        scanner: DeviceId,
        observed: Option<DeviceId>,
    ) -> Result<Self> {
        let event = ScanEvent {
            timestamp,
            source,
            kind,
            scanner,
            observed,
        };
        event.validate()?;
        Ok(event)
    }

    /// `observed` must be present iff the event is a detection, and a device
    /// never observes itself.
    pub fn validate(&self) -> Result<()> {
        match (&self.kind, &self.observed) {
            (EventKind::Detect, None) => {
                Err(Error::Validation("detect event without observed device".into()))
            }
            (EventKind::Detect, Some(o)) if *o == self.scanner => Err(Error::Validation(
                format!("device {} observed itself", self.scanner),
            )),
            (EventKind::Scan | EventKind::Telemetry, Some(_)) => Err(Error::Validation(format!(
                "{} event must not carry an observed device",
                self.kind.as_str()
            ))),
            _ => Ok(()),
        }
    }
}

/// A study participant and the devices registered for them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Participant {
    pub name: String,
    pub app_id: Option<DeviceId>,
    pub badge_id: Option<DeviceId>,
    pub platform: Platform,
}

impl Participant {
    pub fn device(&self, source: Source) -> Option<&DeviceId> {
        match source {
            Source::App => self.app_id.as_ref(),
            Source::Badge => self.badge_id.as_ref(),
        }
    }
}

/// Ordered participant list with reverse lookup from device id.
#[derive(Debug, Clone)]
pub struct Roster {
    participants: Vec<Participant>,
    by_device: HashMap<DeviceId, (Source, usize)>,
}

impl Roster {
    /// Fails if a participant name repeats or a device id is registered twice.
    pub fn new(participants: Vec<Participant>) -> Result<Self> {
        let mut by_device = HashMap::new();
        let mut names = HashMap::new();
        for (idx, p) in participants.iter().enumerate() {
            if names.insert(p.name.clone(), idx).is_some() {
                return Err(Error::DataIntegrity(format!(
                    "participant {:?} listed twice",
                    p.name
                )));
            }
            for source in [Source::App, Source::Badge] {
                if let Some(id) = p.device(source) {
                    if let Some((_, other)) = by_device.insert(id.clone(), (source, idx)) {
                        return Err(Error::DataIntegrity(format!(
                            "device id {id} registered to both {:?} and {:?}",
                            participants[other].name, p.name
                        )));
                    }
                }
            }
        }
        Ok(Roster {
            participants,
            by_device,
        })
    }

    pub fn len(&self) -> usize {
        self.participants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.participants.is_empty()
    }

    pub fn participants(&self) -> &[Participant] {
        &self.participants
    }

    pub fn names(&self) -> Vec<String> {
        self.participants.iter().map(|p| p.name.clone()).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.participants.iter().position(|p| p.name == name)
    }

    /// Roster index of the participant owning `id` on `source`.
    pub fn index_of(&self, source: Source, id: &DeviceId) -> Option<usize> {
        match self.by_device.get(id) {
            Some(&(s, idx)) if s == source => Some(idx),
            _ => None,
        }
    }
}

/// Per-device, per-bin activity flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityTimeline {
    pub device: DeviceId,
    active: FixedBitSet,
}

impl ActivityTimeline {
    pub fn new(device: DeviceId, active: FixedBitSet) -> Self {
        ActivityTimeline { device, active }
    }

    pub fn from_flags(device: DeviceId, flags: &[bool]) -> Self {
        let mut active = FixedBitSet::with_capacity(flags.len());
        for (i, _) in flags.iter().enumerate().filter(|(_, f)| **f) {
            active.insert(i);
        }
        ActivityTimeline { device, active }
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.len() == 0
    }

    pub fn is_active(&self, bin: usize) -> bool {
        self.active.contains(bin)
    }

    pub fn active_bins(&self) -> &FixedBitSet {
        &self.active
    }

    pub fn active_count(&self) -> usize {
        self.active.count_ones(..)
    }

    pub fn active_fraction(&self) -> f64 {
        if self.active.is_empty() {
            0.0
        } else {
            self.active_count() as f64 / self.active.len() as f64
        }
    }
}

/// Read access shared by the square network types.
pub trait Adjacency {
    fn roster(&self) -> &[String];
    fn value(&self, i: usize, j: usize) -> f64;

    fn size(&self) -> usize {
        self.roster().len()
    }

    /// Upper-triangle entries in row-major order `(0,1), (0,2), ..., (n-2,n-1)`.
    fn upper_triangle(&self) -> Vec<f64> {
        let n = self.size();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(self.value(i, j));
            }
        }
        out
    }
}

fn check_roster(roster: &[String], cells: usize) -> Result<usize> {
    let n = roster.len();
    if n * n != cells {
        return Err(Error::Validation(format!(
            "matrix has {cells} cells but roster has {n} participants"
        )));
    }
    Ok(n)
}

/// Symmetric weighted proximity network with weights in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedNetwork {
    roster: Vec<String>,
    weights: Vec<f64>,
}

impl WeightedNetwork {
    /// `weights` is row-major `n × n`.
    pub fn new(roster: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        let n = check_roster(&roster, weights.len())?;
        for i in 0..n {
            if weights[i * n + i] != 0.0 {
                return Err(Error::Validation(format!("non-zero diagonal at {i}")));
            }
            for j in i + 1..n {
                let w = weights[i * n + j];
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::Validation(format!(
                        "weight {w} at ({i},{j}) outside [0,1]"
                    )));
                }
                if w != weights[j * n + i] {
                    return Err(Error::Validation(format!("asymmetric weight at ({i},{j})")));
                }
            }
        }
        Ok(WeightedNetwork { roster, weights })
    }

    /// Build from a function evaluated on the upper triangle only.
    pub fn from_upper(roster: Vec<String>, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let n = roster.len();
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let w = f(i, j);
                weights[i * n + j] = w;
                weights[j * n + i] = w;
            }
        }
        WeightedNetwork::new(roster, weights)
    }

    pub fn zeros(roster: Vec<String>) -> Self {
        let n = roster.len();
        WeightedNetwork {
            roster,
            weights: vec![0.0; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.roster.len()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n() + j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sub-network on the given roster positions, in the given order.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let roster = keep.iter().map(|&i| self.roster[i].clone()).collect();
        let m = keep.len();
        let mut weights = vec![0.0; m * m];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                weights[a * m + b] = self.weight(i, j);
            }
        }
        WeightedNetwork { roster, weights }
    }
}

impl Adjacency for WeightedNetwork {
    fn roster(&self) -> &[String] {
        &self.roster
    }
    fn value(&self, i: usize, j: usize) -> f64 {
        self.weight(i, j)
    }
}

/// Symmetric unweighted network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryNetwork {
    roster: Vec<String>,
    adjacency: Vec<bool>,
}

impl BinaryNetwork {
    pub fn new(roster: Vec<String>, adjacency: Vec<bool>) -> Result<Self> {
        let n = check_roster(&roster, adjacency.len())?;
        for i in 0..n {
            if adjacency[i * n + i] {
                return Err(Error::Validation(format!("self-loop at {i}")));
            }
            for j in i + 1..n {
                if adjacency[i * n + j] != adjacency[j * n + i] {
                    return Err(Error::Validation(format!("asymmetric edge at ({i},{j})")));
                }
            }
        }
        Ok(BinaryNetwork { roster, adjacency })
    }

    pub fn empty(roster: Vec<String>) -> Self {
        let n = roster.len();
        BinaryNetwork {
            roster,
            adjacency: vec![false; n * n],
        }
    }

    /// Undirected network from `(i, j)` pairs; loops are rejected.
    pub fn from_edges(roster: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let mut net = BinaryNetwork::empty(roster);
        let n = net.n();
        for &(i, j) in edges {
            if i == j || i >= n || j >= n {
                return Err(Error::Validation(format!("invalid edge ({i},{j})")));
            }
            net.adjacency[i * n + j] = true;
            net.adjacency[j * n + i] = true;
        }
        Ok(net)
    }

    pub fn n(&self) -> usize {
        self.roster.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.n() + j]
    }

    /// Edges as `(i, j)` with `i < j`, lexicographically ordered.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.has_edge(i, j))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }
}

impl Adjacency for BinaryNetwork {
    fn roster(&self) -> &[String] {
        &self.roster
    }
    fn value(&self, i: usize, j: usize) -> f64 {
        if self.has_edge(i, j) {
            1.0
        } else {
            0.0
        }
    }
}

/// Directed nomination network; row `i` holds the colleagues `i` named.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedSurveyNetwork {
    roster: Vec<String>,
    adjacency: Vec<bool>,
}

impl DirectedSurveyNetwork {
    pub fn new(roster: Vec<String>, adjacency: Vec<bool>) -> Result<Self> {
        let n = check_roster(&roster, adjacency.len())?;
        for i in 0..n {
            if adjacency[i * n + i] {
                return Err(Error::Validation(format!("self-nomination at {i}")));
            }
            let out = adjacency[i * n..(i + 1) * n].iter().filter(|x| **x).count();
            if out > MAX_NOMINATIONS {
                return Err(Error::Validation(format!(
                    "{} nominated {out} colleagues (max {MAX_NOMINATIONS})",
                    roster[i]
                )));
            }
        }
        Ok(DirectedSurveyNetwork { roster, adjacency })
    }

    pub fn roster(&self) -> &[String] {
        &self.roster
    }

    pub fn n(&self) -> usize {
        self.roster.len()
    }

    pub fn nominates(&self, from: usize, to: usize) -> bool {
        self.adjacency[from * self.n() + to]
    }

    pub fn out_degree(&self, i: usize) -> usize {
        let n = self.n();
        self.adjacency[i * n..(i + 1) * n].iter().filter(|x| **x).count()
    }
}

/// Pooled 2×2 table of dyad-bin detections by two sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ContingencyTable {
    /// Both sources detected the dyad.
    pub a: u64,
    /// Source A only.
    pub b: u64,
    /// Source B only.
    pub c: u64,
    /// Neither.
    pub d: u64,
}

impl ContingencyTable {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        ContingencyTable { a, b, c, d }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableStats {
    pub phi: f64,
    pub chi2: f64,
    pub p_value: f64,
    /// Hits over misses for source A.
    pub odds_a: f64,
    pub odds_b: f64,
    /// `a / (a + c)`: source A detecting given source B detected.
    pub sensitivity: f64,
    /// `d / (b + d)`: source A missing given source B missed.
    pub specificity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MantelResult {
    pub rho: f64,
    pub p_value: f64,
    pub n_permutations: usize,
    /// True when every relabeling was enumerated instead of sampled.
    pub exact: bool,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}
