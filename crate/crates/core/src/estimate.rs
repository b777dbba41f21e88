//! Detection grids and weighted proximity networks.
//!
//! A [`DetectionGrid`] records, per source, which ordered device pairs saw
//! each other in which bins, and how many scans each device issued per bin.
//! Weighted networks are derived from it under two weighting schemes
//! ([`WeightMode`]) and three time universes ([`Universe`]).

use std::str::FromStr;

use fixedbitset::FixedBitSet;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    ActivityTimeline, EventKind, Roster, ScanEvent, Source, TimeGrid, WeightedNetwork,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Mutual detections over scans issued by both devices.
    ScanNormalized,
    /// Share of universe bins in which the dyad was detected.
    TimeFraction,
}

impl FromStr for WeightMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "scan_normalized" => Ok(WeightMode::ScanNormalized),
            "time_fraction" => Ok(WeightMode::TimeFraction),
            other => Err(Error::Config(format!("unknown weight mode {other:?}"))),
        }
    }
}

/// Which bins count for a dyad.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Universe {
    AllOfficeBins,
    /// Bins in which both devices of the dyad were active.
    CoactiveBins,
    /// Bins in which at least one member of the dyad scanned.
    SampledBins,
}

impl FromStr for Universe {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "all" | "all_office_bins" => Ok(Universe::AllOfficeBins),
            "coactive" | "coactive_bins" => Ok(Universe::CoactiveBins),
            "sampled" | "sampled_bins" => Ok(Universe::SampledBins),
            other => Err(Error::Config(format!("unknown universe {other:?}"))),
        }
    }
}

/// Per-source dyad-by-bin detections and per-device scan counts.
#[derive(Debug, Clone)]
pub struct DetectionGrid {
    source: Source,
    roster: Vec<String>,
    n_bins: usize,
    has_scan_stats: bool,
    /// `scans[i][t]`: scan events issued by device `i` in bin `t`.
    scans: Vec<Vec<u32>>,
    scan_bins: Vec<FixedBitSet>,
    /// Indexed `i * n + j`: bins in which `i` detected `j`.
    directed: Vec<FixedBitSet>,
    /// Indexed `i * n + j`: sorted `(bin, detect events)` pairs.
    directed_counts: Vec<Vec<(u32, u32)>>,
}

/// Collect the detections of one source into a grid.
///
/// Events of other sources, outside office hours, or involving devices not
/// on the roster are skipped.
pub fn build_detection_grid(
    events: &[ScanEvent],
    grid: &TimeGrid,
    roster: &Roster,
    source: Source,
) -> Result<DetectionGrid> {
    let n = roster.len();
    let n_bins = grid.total_bins();
    let mut scans = vec![vec![0u32; n_bins]; n];
    let mut scan_bins = vec![FixedBitSet::with_capacity(n_bins); n];
    let mut directed = vec![FixedBitSet::with_capacity(n_bins); n * n];
    let mut raw_counts: Vec<Vec<u32>> = vec![Vec::new(); n * n];
    let mut has_scan_stats = false;

    for e in events.iter().filter(|e| e.source == source) {
        let Some(bin) = grid.bin_of(e.timestamp) else {
            continue;
        };
        let Some(i) = roster.index_of(source, &e.scanner) else {
            continue;
        };
        match e.kind {
            EventKind::Scan => {
                has_scan_stats = true;
                scans[i][bin] += 1;
                scan_bins[i].insert(bin);
            }
            EventKind::Detect => {
                let Some(j) = e.observed.as_ref().and_then(|o| roster.index_of(source, o)) else {
                    continue;
                };
                if i == j {
                    continue;
                }
                directed[i * n + j].insert(bin);
                raw_counts[i * n + j].push(bin as u32);
            }
            EventKind::Telemetry => {}
        }
    }

    let directed_counts = raw_counts
        .into_iter()
        .map(|mut bins| {
            bins.sort_unstable();
            let mut out: Vec<(u32, u32)> = Vec::new();
            for b in bins {
                match out.last_mut() {
                    Some((last, c)) if *last == b => *c += 1,
                    _ => out.push((b, 1)),
                }
            }
            out
        })
        .collect();

    Ok(DetectionGrid {
        source,
        roster: roster.names(),
        n_bins,
        has_scan_stats,
        scans,
        scan_bins,
        directed,
        directed_counts,
    })
}

impl DetectionGrid {
    pub fn source(&self) -> Source {
        self.source
    }

    pub fn roster(&self) -> &[String] {
        &self.roster
    }

    pub fn n(&self) -> usize {
        self.roster.len()
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    /// Whether the source logged explicit scan attempts.
    pub fn has_scan_stats(&self) -> bool {
        self.has_scan_stats
    }

    pub fn scans(&self, i: usize, bin: usize) -> u32 {
        self.scans[i][bin]
    }

    pub fn total_scans(&self, i: usize) -> u64 {
        self.scans[i].iter().map(|&c| u64::from(c)).sum()
    }

    /// Bins with at least one scan by `i`.
    pub fn scan_bins(&self, i: usize) -> &FixedBitSet {
        &self.scan_bins[i]
    }

    /// Bins in which `i` detected `j`.
    pub fn directed_bins(&self, i: usize, j: usize) -> &FixedBitSet {
        &self.directed[i * self.n() + j]
    }

    /// Detect events `i -> j` summed over `bins`.
    pub fn directed_count_in(&self, i: usize, j: usize, bins: &FixedBitSet) -> u64 {
        self.directed_counts[i * self.n() + j]
            .iter()
            .filter(|(b, _)| bins.contains(*b as usize))
            .map(|&(_, c)| u64::from(c))
            .sum()
    }

    /// Bins in which either member detected the other.
    pub fn detected_bins(&self, i: usize, j: usize) -> FixedBitSet {
        let mut out = self.directed_bins(i, j).clone();
        out.union_with(self.directed_bins(j, i));
        out
    }

    pub fn detected(&self, i: usize, j: usize, bin: usize) -> bool {
        self.directed_bins(i, j).contains(bin) || self.directed_bins(j, i).contains(bin)
    }

    fn scans_in(&self, i: usize, bins: &FixedBitSet) -> u64 {
        bins.ones().map(|t| u64::from(self.scans[i][t])).sum()
    }

    /// Scans issued by `i` per hour of activity.
    pub fn scans_per_active_hour(&self, i: usize, timeline: &ActivityTimeline, grid: &TimeGrid) -> f64 {
        let hours = timeline.active_count() as f64 * grid.bin_hours();
        if hours == 0.0 {
            0.0
        } else {
            self.total_scans(i) as f64 / hours
        }
    }
}

fn check_timelines(grid: &DetectionGrid, timelines: &[ActivityTimeline]) -> Result<()> {
    if timelines.len() != grid.n() {
        return Err(Error::RosterMismatch(format!(
            "{} timelines for a roster of {}",
            timelines.len(),
            grid.n()
        )));
    }
    if let Some(t) = timelines.iter().find(|t| t.len() != grid.n_bins()) {
        return Err(Error::Validation(format!(
            "timeline of {} has {} bins, grid has {}",
            t.device,
            t.len(),
            grid.n_bins()
        )));
    }
    Ok(())
}

/// Bins in which both timelines are active.
pub fn coactive_bins(a: &ActivityTimeline, b: &ActivityTimeline) -> Result<FixedBitSet> {
    if a.len() != b.len() {
        return Err(Error::Validation(format!(
            "timeline lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let mut out = a.active_bins().clone();
    out.intersect_with(b.active_bins());
    Ok(out)
}

/// Share of all bins in which both devices were active.
pub fn simultaneous_fraction(a: &ActivityTimeline, b: &ActivityTimeline) -> Result<f64> {
    let both = coactive_bins(a, b)?;
    Ok(if a.is_empty() {
        0.0
    } else {
        both.count_ones(..) as f64 / a.len() as f64
    })
}

/// Bins forming the universe of dyad `(i, j)`.
///
/// For sources without scan statistics the sampled universe falls back to
/// bins where either device was active.
pub fn dyad_universe(
    grid: &DetectionGrid,
    timelines: Option<&[ActivityTimeline]>,
    i: usize,
    j: usize,
    universe: Universe,
) -> Result<FixedBitSet> {
    let need = |what: &str| {
        timelines.ok_or_else(|| {
            Error::Config(format!("the {what} universe needs activity timelines"))
        })
    };
    match universe {
        Universe::AllOfficeBins => {
            let mut all = FixedBitSet::with_capacity(grid.n_bins());
            all.insert_range(..);
            Ok(all)
        }
        Universe::CoactiveBins => {
            let t = need("coactive")?;
            coactive_bins(&t[i], &t[j])
        }
        Universe::SampledBins if grid.has_scan_stats() => {
            let mut u = grid.scan_bins(i).clone();
            u.union_with(grid.scan_bins(j));
            Ok(u)
        }
        Universe::SampledBins => {
            let t = need("sampled")?;
            let mut u = t[i].active_bins().clone();
            u.union_with(t[j].active_bins());
            Ok(u)
        }
    }
}

/// Average connection strength `(n_ij + n_ji) / (n_i + n_j)`.
///
/// `n_ij` counts scans of `i` that detected `j`, `n_i` all scans of `i`.
/// Zero when neither device scanned.
pub fn connection_strength(n_ij: u64, n_ji: u64, n_i: u64, n_j: u64) -> Result<f64> {
    if n_ij > n_i || n_ji > n_j {
        return Err(Error::DataIntegrity(format!(
            "more detections than scans: n_ij={n_ij} n_i={n_i} n_ji={n_ji} n_j={n_j}"
        )));
    }
    let scans = n_i + n_j;
    if scans == 0 {
        return Ok(0.0);
    }
    Ok((n_ij + n_ji) as f64 / scans as f64)
}

/// Weighted network for one source.
///
/// Sources without scan statistics (badges) use active-bin counts in place
/// of scan counts under [`WeightMode::ScanNormalized`], which requires
/// timelines.
pub fn weighted_network(
    grid: &DetectionGrid,
    timelines: Option<&[ActivityTimeline]>,
    mode: WeightMode,
    universe: Universe,
) -> Result<WeightedNetwork> {
    if grid.n() == 0 {
        return Err(Error::EmptyRoster("no participants in detection grid".into()));
    }
    if let Some(t) = timelines {
        check_timelines(grid, t)?;
    }
    if mode == WeightMode::ScanNormalized && !grid.has_scan_stats() && timelines.is_none() {
        return Err(Error::Config(
            "scan-normalized weights for a source without scan logs need activity timelines"
                .into(),
        ));
    }
    let n = grid.n();
    let mut weights = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let u = dyad_universe(grid, timelines, i, j, universe)?;
            let w = match mode {
                WeightMode::TimeFraction => {
                    let size = u.count_ones(..);
                    if size == 0 {
                        0.0
                    } else {
                        grid.detected_bins(i, j).intersection_count(&u) as f64 / size as f64
                    }
                }
                WeightMode::ScanNormalized if grid.has_scan_stats() => connection_strength(
                    grid.directed_count_in(i, j, &u),
                    grid.directed_count_in(j, i, &u),
                    grid.scans_in(i, &u),
                    grid.scans_in(j, &u),
                )?,
                WeightMode::ScanNormalized => {
                    let t = timelines.expect("checked above");
                    connection_strength(
                        grid.directed_bins(i, j).intersection_count(&u) as u64,
                        grid.directed_bins(j, i).intersection_count(&u) as u64,
                        t[i].active_bins().intersection_count(&u) as u64,
                        t[j].active_bins().intersection_count(&u) as u64,
                    )?
                }
            };
            weights[i * n + j] = w;
            weights[j * n + i] = w;
        }
    }
    WeightedNetwork::new(grid.roster().to_vec(), weights)
}

/// Network re-estimated from a fixed number of scan-bins per participant.
#[derive(Debug, Clone)]
pub struct Resampled {
    pub network: WeightedNetwork,
    /// Positions in the grid roster of the retained participants.
    pub retained: Vec<usize>,
}

/// Draws fixed-size samples of scan-bins; reusable across repeats.
#[derive(Debug)]
pub struct Resampler<'a> {
    grid: &'a DetectionGrid,
    scan_bins: Vec<Vec<usize>>,
}

impl<'a> Resampler<'a> {
    pub fn new(grid: &'a DetectionGrid) -> Self {
        let scan_bins = (0..grid.n()).map(|i| grid.scan_bins(i).ones().collect()).collect();
        Resampler { grid, scan_bins }
    }

    /// Participants with at least `samples` scan-bins.
    pub fn eligible(&self, samples: usize) -> Vec<usize> {
        (0..self.grid.n())
            .filter(|&i| self.scan_bins[i].len() >= samples)
            .collect()
    }

    /// Each retained participant contributes exactly `samples` scan-bins,
    /// drawn without replacement from its own RNG stream. A dyad's weight is
    /// the share of the pooled drawn bins in which the drawing member
    /// detected the other.
    pub fn resample(&self, samples: usize, seed: u64) -> Result<Resampled> {
        if samples == 0 {
            return Err(Error::Validation("sample size must be at least 1".into()));
        }
        let retained = self.eligible(samples);
        if retained.is_empty() {
            return Err(Error::EmptyRoster(format!(
                "no participant has {samples} scan-bins"
            )));
        }
        let n_bins = self.grid.n_bins();
        let drawn: Vec<FixedBitSet> = retained
            .iter()
            .map(|&i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let pool = &self.scan_bins[i];
                let mut set = FixedBitSet::with_capacity(n_bins);
                for k in index::sample(&mut rng, pool.len(), samples) {
                    set.insert(pool[k]);
                }
                set
            })
            .collect();
        let roster = retained.iter().map(|&i| self.grid.roster()[i].clone()).collect();
        let network = WeightedNetwork::from_upper(roster, |a, b| {
            let (i, j) = (retained[a], retained[b]);
            let mut hits_i = drawn[a].clone();
            hits_i.intersect_with(self.grid.directed_bins(i, j));
            let mut hits_j = drawn[b].clone();
            hits_j.intersect_with(self.grid.directed_bins(j, i));
            let hits = hits_i.union_count(&hits_j);
            hits as f64 / drawn[a].union_count(&drawn[b]) as f64
        })?;
        Ok(Resampled { network, retained })
    }
}

pub fn resample_network(grid: &DetectionGrid, samples: usize, seed: u64) -> Result<Resampled> {
    Resampler::new(grid).resample(samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DeviceId, GridSpec, Participant, Platform};
    use proptest::prelude::*;

    fn id(i: usize) -> DeviceId {
        DeviceId::parse(&format!("a{i:02x}")).unwrap()
    }

    fn roster(n: usize) -> Roster {
        Roster::new(
            (0..n)
                .map(|i| Participant {
                    name: format!("p{i}"),
                    app_id: Some(id(i)),
                    badge_id: None,
                    platform: Platform::PlatformA,
                })
                .collect(),
        )
        .unwrap()
    }

    fn one_day() -> TimeGrid {
        let mut spec = GridSpec::study();
        spec.end_date = spec.start_date;
        TimeGrid::new(spec).unwrap()
    }

    fn ev(grid: &TimeGrid, bin: usize, kind: EventKind, i: usize, j: Option<usize>) -> ScanEvent {
        ScanEvent::new(grid.bin_start(bin), Source::App, kind, id(i), j.map(id)).unwrap()
    }

    #[test]
    fn connection_strength_reference_cases() {
        assert_eq!(connection_strength(0, 0, 10, 10).unwrap(), 0.0);
        assert_eq!(connection_strength(10, 10, 10, 10).unwrap(), 1.0);
        assert_eq!(connection_strength(3, 1, 10, 10).unwrap(), 0.2);
        assert_eq!(connection_strength(0, 0, 0, 0).unwrap(), 0.0);
        assert!(matches!(
            connection_strength(11, 0, 10, 10),
            Err(Error::DataIntegrity(_))
        ));
    }

    proptest! {
        #[test]
        fn connection_strength_bounded_and_monotone(n_i in 0u64..200, n_j in 0u64..200, a in 0u64..200, b in 0u64..200) {
            let n_ij = a.min(n_i);
            let n_ji = b.min(n_j);
            let w = connection_strength(n_ij, n_ji, n_i, n_j).unwrap();
            prop_assert!((0.0..=1.0).contains(&w));
            if n_ij < n_i {
                let w2 = connection_strength(n_ij + 1, n_ji, n_i, n_j).unwrap();
                prop_assert!(w2 >= w);
            }
        }
    }

    #[test]
    fn single_detection_marks_one_dyad_bin() {
        let grid = one_day();
        let r = roster(3);
        let events = vec![ev(&grid, 7, EventKind::Scan, 0, None), ev(&grid, 7, EventKind::Detect, 0, Some(1))];
        let g = build_detection_grid(&events, &grid, &r, Source::App).unwrap();
        assert!(g.detected(0, 1, 7) && g.detected(1, 0, 7));
        assert_eq!(g.detected_bins(0, 1).count_ones(..), 1);
        assert_eq!(g.detected_bins(0, 2).count_ones(..), 0);
        assert_eq!(g.scans(0, 7), 1);
    }

    #[test]
    fn non_participant_detections_are_dropped() {
        let grid = one_day();
        let r = roster(2);
        let stranger = DeviceId::parse("ffff").unwrap();
        let e = ScanEvent::new(grid.bin_start(3), Source::App, EventKind::Detect, id(0), Some(stranger)).unwrap();
        let g = build_detection_grid(&[e], &grid, &r, Source::App).unwrap();
        assert_eq!(g.detected_bins(0, 1).count_ones(..), 0);
    }

    #[test]
    fn empty_grid_gives_zero_network() {
        let grid = one_day();
        let g = build_detection_grid(&[], &grid, &roster(4), Source::App).unwrap();
        let w = weighted_network(&g, None, WeightMode::TimeFraction, Universe::AllOfficeBins).unwrap();
        assert!(w.weights().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn fully_detected_coactive_dyad_has_weight_one() {
        let grid = one_day();
        let r = roster(2);
        let mut events = Vec::new();
        for bin in 10..20 {
            events.push(ev(&grid, bin, EventKind::Scan, 0, None));
            events.push(ev(&grid, bin, EventKind::Detect, 0, Some(1)));
        }
        let g = build_detection_grid(&events, &grid, &r, Source::App).unwrap();
        let tl = crate::ingest::activity_timelines(&events, &grid, &r, Source::App, 0).unwrap();
        let co = weighted_network(&g, Some(&tl), WeightMode::TimeFraction, Universe::CoactiveBins).unwrap();
        assert_eq!(co.weight(0, 1), 1.0);
        let all = weighted_network(&g, Some(&tl), WeightMode::TimeFraction, Universe::AllOfficeBins).unwrap();
        assert_eq!(all.weight(0, 1), 10.0 / 96.0);
        let scan_norm = weighted_network(&g, Some(&tl), WeightMode::ScanNormalized, Universe::AllOfficeBins).unwrap();
        assert_eq!(scan_norm.weight(0, 1), 1.0);
    }

    #[test]
    fn detections_without_scans_are_inconsistent() {
        let grid = one_day();
        let r = roster(2);
        let events = vec![
            ev(&grid, 1, EventKind::Scan, 1, None),
            ev(&grid, 1, EventKind::Detect, 0, Some(1)),
        ];
        let g = build_detection_grid(&events, &grid, &r, Source::App).unwrap();
        assert!(matches!(
            weighted_network(&g, None, WeightMode::ScanNormalized, Universe::AllOfficeBins),
            Err(Error::DataIntegrity(_))
        ));
    }

    #[test]
    fn coactive_needs_timelines_and_equal_lengths() {
        let grid = one_day();
        let g = build_detection_grid(&[], &grid, &roster(2), Source::App).unwrap();
        assert!(weighted_network(&g, None, WeightMode::TimeFraction, Universe::CoactiveBins).is_err());
        let a = ActivityTimeline::from_flags(id(0), &[true, true, false]);
        let b = ActivityTimeline::from_flags(id(1), &[true, false]);
        assert!(coactive_bins(&a, &b).is_err());
        let c = ActivityTimeline::from_flags(id(1), &[false, false, true]);
        assert_eq!(coactive_bins(&a, &c).unwrap().count_ones(..), 0);
        assert_eq!(coactive_bins(&a, &a).unwrap().count_ones(..), 2);
    }

    #[test]
    fn resampling_edge_cases() {
        let grid = one_day();
        let r = roster(2);
        let events = vec![
            ev(&grid, 4, EventKind::Scan, 0, None),
            ev(&grid, 4, EventKind::Detect, 0, Some(1)),
            ev(&grid, 6, EventKind::Scan, 1, None),
        ];
        let g = build_detection_grid(&events, &grid, &r, Source::App).unwrap();
        let res = resample_network(&g, 1, 9).unwrap();
        assert_eq!(res.retained, vec![0, 1]);
        assert_eq!(res.network.weight(0, 1), 0.5);
        assert!(matches!(resample_network(&g, 2, 9), Err(Error::EmptyRoster(_))));
        assert!(resample_network(&g, 0, 9).is_err());
    }

    fn random_events(grid: &TimeGrid, n: usize, seed: u64) -> Vec<ScanEvent> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut events = Vec::new();
        for bin in 0..grid.total_bins() {
            for i in 0..n {
                if rng.random_bool(0.6) {
                    events.push(ev(grid, bin, EventKind::Scan, i, None));
                    for j in 0..n {
                        if j != i && rng.random_bool(0.15) {
                            events.push(ev(grid, bin, EventKind::Detect, i, Some(j)));
                        }
                    }
                } else if rng.random_bool(0.3) {
                    events.push(ev(grid, bin, EventKind::Telemetry, i, None));
                }
            }
        }
        events
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn networks_valid_and_coactive_never_lower(seed in 0u64..10_000) {
            let grid = one_day();
            let r = roster(5);
            let events = random_events(&grid, 5, seed);
            let g = build_detection_grid(&events, &grid, &r, Source::App).unwrap();
            let tl = crate::ingest::activity_timelines(&events, &grid, &r, Source::App, 0).unwrap();
            let all = weighted_network(&g, Some(&tl), WeightMode::TimeFraction, Universe::AllOfficeBins).unwrap();
            let co = weighted_network(&g, Some(&tl), WeightMode::TimeFraction, Universe::CoactiveBins).unwrap();
            let sampled = weighted_network(&g, Some(&tl), WeightMode::TimeFraction, Universe::SampledBins).unwrap();
            let scan_norm = weighted_network(&g, Some(&tl), WeightMode::ScanNormalized, Universe::SampledBins).unwrap();
            for i in 0..5 {
                for j in 0..5 {
                    prop_assert!(co.weight(i, j) >= all.weight(i, j));
                    prop_assert!(sampled.weight(i, j) >= all.weight(i, j));
                    prop_assert!((0.0..=1.0).contains(&scan_norm.weight(i, j)));
                }
            }
            let a = resample_network(&g, 20, seed).unwrap();
            let b = resample_network(&g, 20, seed).unwrap();
            prop_assert_eq!(a.network, b.network);
        }
    }

    #[test]
    fn resampling_every_scan_bin_reproduces_sampled_universe() {
        let grid = one_day();
        let r = roster(4);
        // Every device scans in every bin, so each owns all 96 scan-bins.
        let mut events = random_events(&grid, 4, 3);
        for bin in 0..grid.total_bins() {
            for i in 0..4 {
                events.push(ev(&grid, bin, EventKind::Scan, i, None));
            }
        }
        let g = build_detection_grid(&events, &grid, &r, Source::App).unwrap();
        let full = weighted_network(&g, None, WeightMode::TimeFraction, Universe::SampledBins).unwrap();
        let res = resample_network(&g, grid.total_bins(), 1).unwrap();
        assert_eq!(res.network, full);
    }
}
