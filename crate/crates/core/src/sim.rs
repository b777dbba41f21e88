//! Ground-truth generator for co-location and device scanning.
//!
//! Each dyad's contact follows a two-state Markov chain over bins. Phones
//! scan once per scheduled slot with a platform-specific adherence while
//! their app is running, and detect co-located peers with probability
//! `q_det` (or room neighbours with `q_spur`). Badges behave the same on
//! days they are worn. The output logs are valid ingest-format streams.
//!
//! Randomness is split into independent ChaCha streams per mechanism, and
//! every draw is made whether or not its outcome matters. Changing one
//! probability therefore leaves all other mechanisms untouched and couples
//! runs monotonically (e.g. lower adherence only removes scans).

use chrono::Duration;
use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::hash_id;
use crate::model::{
    EventKind, GridSpec, Participant, Platform, Roster, ScanEvent, Source, TimeGrid,
    WeightedNetwork,
};

/// Per-bin transition probabilities of the contact chain, drawn uniformly
/// per dyad from `[min, max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactModel {
    /// P(no contact -> contact).
    pub on_rate: [f64; 2],
    /// P(contact -> no contact).
    pub off_rate: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppProfile {
    /// Probability that a scheduled scan actually runs.
    pub adherence: f64,
    /// Daily probability that the app stops for a while.
    pub off_window_prob: f64,
    /// Length of such a stop, in bins, drawn uniformly from `[min, max]`.
    pub off_window_bins: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadgeProfile {
    /// Daily probability the badge is worn (for the whole office day).
    pub wear_prob: f64,
    pub adherence: f64,
    pub q_det: f64,
    pub q_spur: f64,
    /// Emit one telemetry record per worn bin (the badge's data stream).
    pub telemetry: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_participants: usize,
    /// The first `platform_a_count` participants use platform A, the rest B.
    pub platform_a_count: usize,
    pub grid: GridSpec,
    pub contact: ContactModel,
    pub platform_a: AppProfile,
    pub platform_b: AppProfile,
    /// Scheduled scans per bin (one per five minutes is 12 per hour).
    pub scans_per_bin: u32,
    pub q_det: f64,
    pub q_spur: f64,
    /// Share of dyads that are room neighbours (spurious detections).
    pub adjacency_fraction: f64,
    pub badge: BadgeProfile,
    pub salt: String,
    pub seed: u64,
}

impl SimConfig {
    /// Perfect sensing: every scan runs and sees exactly the true contacts.
    pub fn noiseless(n_participants: usize, grid: GridSpec, seed: u64) -> Self {
        let perfect = AppProfile {
            adherence: 1.0,
            off_window_prob: 0.0,
            off_window_bins: [0, 0],
        };
        SimConfig {
            n_participants,
            platform_a_count: n_participants / 2,
            grid,
            contact: ContactModel {
                on_rate: [0.0005, 0.02],
                off_rate: [0.05, 0.3],
            },
            platform_a: perfect.clone(),
            platform_b: perfect,
            scans_per_bin: 1,
            q_det: 1.0,
            q_spur: 0.0,
            adjacency_fraction: 0.0,
            badge: BadgeProfile {
                wear_prob: 1.0,
                adherence: 1.0,
                q_det: 1.0,
                q_spur: 0.0,
                telemetry: true,
            },
            salt: "proxnet-sim".into(),
            seed,
        }
    }

    /// A 21-person, four-week cohort with the platform asymmetry of the
    /// field study: 9 frequent scanners (about 5.6 scans per active hour),
    /// 12 rare scanners (about 1.1 per hour), badges worn on 37% of days.
    pub fn field_study(seed: u64) -> Self {
        SimConfig {
            n_participants: 21,
            platform_a_count: 9,
            grid: GridSpec::study(),
            contact: ContactModel {
                on_rate: [0.0005, 0.02],
                off_rate: [0.05, 0.3],
            },
            platform_a: AppProfile {
                adherence: 0.47,
                off_window_prob: 0.5,
                off_window_bins: [30, 96],
            },
            platform_b: AppProfile {
                adherence: 0.09,
                off_window_prob: 0.25,
                off_window_bins: [20, 80],
            },
            scans_per_bin: 1,
            q_det: 0.8,
            q_spur: 0.05,
            adjacency_fraction: 0.1,
            badge: BadgeProfile {
                wear_prob: 0.37,
                adherence: 0.9,
                q_det: 0.5,
                q_spur: 0.0,
                telemetry: true,
            },
            salt: "proxnet-sim".into(),
            seed,
        }
    }

    /// The field-study cohort with adherence as the only sensing defect:
    /// no app off-windows and no spurious detections.
    pub fn platform_skew(seed: u64) -> Self {
        let mut c = SimConfig::field_study(seed);
        c.platform_a.off_window_prob = 0.0;
        c.platform_b.off_window_prob = 0.0;
        c.q_spur = 0.0;
        c
    }

    pub fn profile(&self, i: usize) -> &AppProfile {
        if i < self.platform_a_count {
            &self.platform_a
        } else {
            &self.platform_b
        }
    }

    pub fn platform(&self, i: usize) -> Platform {
        if i < self.platform_a_count {
            Platform::PlatformA
        } else {
            Platform::PlatformB
        }
    }

    pub fn validate(&self) -> Result<TimeGrid> {
        let grid = TimeGrid::new(self.grid.clone())?;
        let bad = |what: String| Err(Error::Config(what));
        if self.n_participants < 2 {
            return bad(format!("need at least 2 participants, got {}", self.n_participants));
        }
        if self.platform_a_count > self.n_participants {
            return bad("platform_a_count exceeds n_participants".into());
        }
        if grid.total_bins() == 0 {
            return bad("grid has no bins".into());
        }
        if self.scans_per_bin == 0 || grid.bin_seconds() / self.scans_per_bin < 12 {
            return bad(format!(
                "scans_per_bin {} must be in 1..={}",
                self.scans_per_bin,
                grid.bin_seconds() / 12
            ));
        }
        let probs = [
            ("q_det", self.q_det),
            ("q_spur", self.q_spur),
            ("adjacency_fraction", self.adjacency_fraction),
            ("platform_a.adherence", self.platform_a.adherence),
            ("platform_a.off_window_prob", self.platform_a.off_window_prob),
            ("platform_b.adherence", self.platform_b.adherence),
            ("platform_b.off_window_prob", self.platform_b.off_window_prob),
            ("badge.wear_prob", self.badge.wear_prob),
            ("badge.adherence", self.badge.adherence),
            ("badge.q_det", self.badge.q_det),
            ("badge.q_spur", self.badge.q_spur),
            ("contact.on_rate min", self.contact.on_rate[0]),
            ("contact.on_rate max", self.contact.on_rate[1]),
            ("contact.off_rate min", self.contact.off_rate[0]),
            ("contact.off_rate max", self.contact.off_rate[1]),
        ];
        if let Some((name, p)) = probs.iter().find(|(_, p)| !(0.0..=1.0).contains(p)) {
            return bad(format!("{name} = {p} is not a probability"));
        }
        if self.contact.on_rate[0] > self.contact.on_rate[1]
            || self.contact.off_rate[0] > self.contact.off_rate[1]
        {
            return bad("contact rate ranges must have min <= max".into());
        }
        for (name, p) in [("platform_a", &self.platform_a), ("platform_b", &self.platform_b)] {
            let [lo, hi] = p.off_window_bins;
            if lo > hi || hi > grid.daily_bins() {
                return bad(format!(
                    "{name}.off_window_bins [{lo}, {hi}] must be ordered and fit in {} daily bins",
                    grid.daily_bins()
                ));
            }
        }
        Ok(grid)
    }
}

/// The simulator's own record of what happened.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    n: usize,
    n_bins: usize,
    /// Upper-triangle dyad order.
    contact: Vec<FixedBitSet>,
    pub true_weights: WeightedNetwork,
    /// Stationary contact probability `on / (on + off)` per dyad.
    pub stationary: Vec<f64>,
    pub adjacent: Vec<bool>,
    /// Bins in which each app was running.
    pub app_active: Vec<FixedBitSet>,
    /// Executed scans per device per bin.
    pub app_scans: Vec<Vec<u32>>,
    pub badge_worn: Vec<FixedBitSet>,
}

fn dyad_pos(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

impl GroundTruth {
    pub fn contact(&self, i: usize, j: usize, bin: usize) -> bool {
        i != j && self.contact[dyad_pos(self.n, i, j)].contains(bin)
    }

    pub fn contact_bins(&self, i: usize, j: usize) -> &FixedBitSet {
        &self.contact[dyad_pos(self.n, i, j)]
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn app_activity_fraction(&self, i: usize) -> f64 {
        self.app_active[i].count_ones(..) as f64 / self.n_bins as f64
    }

    pub fn badge_activity_fraction(&self, i: usize) -> f64 {
        self.badge_worn[i].count_ones(..) as f64 / self.n_bins as f64
    }

    /// Executed scans per hour during which the app was running.
    pub fn scans_per_active_hour(&self, i: usize, grid: &TimeGrid) -> f64 {
        let hours = self.app_active[i].count_ones(..) as f64 * grid.bin_hours();
        let scans: u64 = self.app_scans[i].iter().map(|&c| u64::from(c)).sum();
        if hours == 0.0 {
            0.0
        } else {
            scans as f64 / hours
        }
    }
}

pub fn truth_network(truth: &GroundTruth) -> WeightedNetwork {
    truth.true_weights.clone()
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub roster: Roster,
    pub grid: TimeGrid,
    pub app_log: Vec<ScanEvent>,
    pub badge_log: Vec<ScanEvent>,
    pub truth: GroundTruth,
}

// One stream per mechanism.
const STREAM_DYADS: u64 = 0;
const STREAM_CONTACT: u64 = 1;
const STREAM_OFF_WINDOWS: u64 = 2;
const STREAM_APP_SCANS: u64 = 3;
const STREAM_APP_DETECT: u64 = 4;
const STREAM_BADGE_WEAR: u64 = 5;
const STREAM_BADGE_SCANS: u64 = 6;
const STREAM_BADGE_DETECT: u64 = 7;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn uniform_in(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn participant_label(i: usize, n: usize) -> String {
    let width = n.to_string().len().max(2);
    format!("p{:0width$}", i + 1)
}

fn raw_mac(prefix: u8, i: usize) -> String {
    format!(
        "{prefix:02x}:00:00:00:{:02x}:{:02x}",
        (i >> 8) & 0xff,
        i & 0xff
    )
}

#[allow(clippy::needless_range_loop)]
pub fn simulate(config: &SimConfig) -> Result<SimOutput> {
    let grid = config.validate()?;
    let n = config.n_participants;
    let n_bins = grid.total_bins();
    let daily = grid.daily_bins();
    let n_days = grid.days().len();
    let seed = config.seed;

    let participants = (0..n)
        .map(|i| {
            Ok(Participant {
                name: participant_label(i, n),
                app_id: Some(hash_id(&raw_mac(0x02, i), &config.salt)?),
                badge_id: Some(hash_id(&raw_mac(0x0b, i), &config.salt)?),
                platform: config.platform(i),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let roster = Roster::new(participants)?;
    let app_ids: Vec<_> = roster.participants().iter().map(|p| p.app_id.clone().unwrap()).collect();
    let badge_ids: Vec<_> = roster.participants().iter().map(|p| p.badge_id.clone().unwrap()).collect();

    // Dyad parameters.
    let n_dyads = n * (n - 1) / 2;
    let mut rng = stream(seed, STREAM_DYADS);
    let mut rates = Vec::with_capacity(n_dyads);
    let mut adjacent = Vec::with_capacity(n_dyads);
    for _ in 0..n_dyads {
        let on = uniform_in(&mut rng, config.contact.on_rate);
        let off = uniform_in(&mut rng, config.contact.off_rate);
        rates.push((on, off));
        adjacent.push(rng.random::<f64>() < config.adjacency_fraction);
    }
    let stationary: Vec<f64> = rates
        .iter()
        .map(|&(on, off)| if on + off > 0.0 { on / (on + off) } else { 0.0 })
        .collect();

    // Contact chains.
    let mut rng = stream(seed, STREAM_CONTACT);
    let mut contact = vec![FixedBitSet::with_capacity(n_bins); n_dyads];
    let mut state: Vec<bool> = stationary.iter().map(|&p| rng.random::<f64>() < p).collect();
    for t in 0..n_bins {
        for d in 0..n_dyads {
            let u = rng.random::<f64>();
            if t > 0 {
                let (on, off) = rates[d];
                state[d] = if state[d] { u >= off } else { u < on };
            }
            if state[d] {
                contact[d].insert(t);
            }
        }
    }

    // App off-windows.
    let mut rng = stream(seed, STREAM_OFF_WINDOWS);
    let mut app_active = vec![FixedBitSet::with_capacity(n_bins); n];
    for (i, active) in app_active.iter_mut().enumerate() {
        active.insert_range(..);
        let profile = config.profile(i);
        for day in 0..n_days {
            let happens = rng.random::<f64>() < profile.off_window_prob;
            let [lo, hi] = profile.off_window_bins;
            let len = lo + ((hi - lo + 1) as f64 * rng.random::<f64>()) as usize;
            let len = len.min(hi);
            let start = ((daily - len + 1) as f64 * rng.random::<f64>()) as usize;
            let start = start.min(daily - len);
            if happens && len > 0 {
                let base = day * daily + start;
                active.remove_range(base..base + len);
            }
        }
    }

    // Badge wear.
    let mut rng = stream(seed, STREAM_BADGE_WEAR);
    let mut badge_worn = vec![FixedBitSet::with_capacity(n_bins); n];
    for worn in badge_worn.iter_mut() {
        for day in 0..n_days {
            if rng.random::<f64>() < config.badge.wear_prob {
                worn.insert_range(day * daily..(day + 1) * daily);
            }
        }
    }

    let slot_secs = i64::from(grid.bin_seconds() / config.scans_per_bin);
    let at = |bin: usize, secs: i64| grid.bin_start(bin) + Duration::seconds(secs);
    let mut app_log = Vec::new();
    let mut badge_log = Vec::new();
    let mut app_scans = vec![vec![0u32; n_bins]; n];

    let mut scan_rng = stream(seed, STREAM_APP_SCANS);
    let mut det_rng = stream(seed, STREAM_APP_DETECT);
    let mut bscan_rng = stream(seed, STREAM_BADGE_SCANS);
    let mut bdet_rng = stream(seed, STREAM_BADGE_DETECT);
    let last_second = i64::from(grid.bin_seconds()) - 1;

    for t in 0..n_bins {
        for i in 0..n {
            if app_active[i].contains(t) {
                app_log.push(ScanEvent {
                    timestamp: at(t, last_second),
                    source: Source::App,
                    kind: EventKind::Telemetry,
                    scanner: app_ids[i].clone(),
                    observed: None,
                });
            }
            for k in 0..i64::from(config.scans_per_bin) {
                let executed = scan_rng.random::<f64>() < config.profile(i).adherence
                    && app_active[i].contains(t);
                let scan_ts = at(t, k * slot_secs + (i as i64 * 7) % (slot_secs / 2));
                if executed {
                    app_scans[i][t] += 1;
                    app_log.push(ScanEvent {
                        timestamp: scan_ts,
                        source: Source::App,
                        kind: EventKind::Scan,
                        scanner: app_ids[i].clone(),
                        observed: None,
                    });
                }
                for j in (0..n).filter(|&j| j != i) {
                    let u = det_rng.random::<f64>();
                    if !executed || !app_active[j].contains(t) {
                        continue;
                    }
                    let d = dyad_pos(n, i, j);
                    let p = if contact[d].contains(t) {
                        config.q_det
                    } else if adjacent[d] {
                        config.q_spur
                    } else {
                        0.0
                    };
                    if u < p {
                        app_log.push(ScanEvent {
                            timestamp: scan_ts + Duration::seconds(1 + (j as i64 % 5)),
                            source: Source::App,
                            kind: EventKind::Detect,
                            scanner: app_ids[i].clone(),
                            observed: Some(app_ids[j].clone()),
                        });
                    }
                }
            }

            // Badges report no scan attempts, only what they saw.
            let worn = badge_worn[i].contains(t);
            if worn && config.badge.telemetry {
                badge_log.push(ScanEvent {
                    timestamp: at(t, last_second),
                    source: Source::Badge,
                    kind: EventKind::Telemetry,
                    scanner: badge_ids[i].clone(),
                    observed: None,
                });
            }
            let scanned = bscan_rng.random::<f64>() < config.badge.adherence && worn;
            let scan_ts = at(t, (i as i64 * 11) % (last_second / 2));
            for j in (0..n).filter(|&j| j != i) {
                let u = bdet_rng.random::<f64>();
                if !scanned || !badge_worn[j].contains(t) {
                    continue;
                }
                let d = dyad_pos(n, i, j);
                let p = if contact[d].contains(t) {
                    config.badge.q_det
                } else if adjacent[d] {
                    config.badge.q_spur
                } else {
                    0.0
                };
                if u < p {
                    badge_log.push(ScanEvent {
                        timestamp: scan_ts + Duration::seconds(1 + (j as i64 % 5)),
                        source: Source::Badge,
                        kind: EventKind::Detect,
                        scanner: badge_ids[i].clone(),
                        observed: Some(badge_ids[j].clone()),
                    });
                }
            }
        }
    }
    app_log.sort();
    badge_log.sort();

    let true_weights = WeightedNetwork::from_upper(roster.names(), |i, j| {
        contact[dyad_pos(n, i, j)].count_ones(..) as f64 / n_bins as f64
    })?;

    Ok(SimOutput {
        roster,
        grid,
        app_log,
        badge_log,
        truth: GroundTruth {
            n,
            n_bins,
            contact,
            true_weights,
            stationary,
            adjacent,
            app_active,
            app_scans,
            badge_worn,
        },
    })
}
