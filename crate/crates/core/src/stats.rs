//! Validation statistics: pooled dyad-bin contingency tables, the Mantel
//! permutation test on Spearman correlation, bootstrap intervals, edge
//! matching between binary networks, and the resampling-bias curve.
//!
//! Every randomized routine draws task `k` from ChaCha stream `k` of the
//! caller's seed, so results do not depend on the number of threads.

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{dyad_universe, DetectionGrid, Resampler, Universe};
use crate::model::{
    ActivityTimeline, Adjacency, BinaryNetwork, ContingencyTable, MantelResult, TableStats,
};

pub const DEFAULT_PERMUTATIONS: usize = 10_000;
pub const DEFAULT_BOOTSTRAP: usize = 1_000;
const BOOTSTRAP_RETRIES: usize = 100;

fn task_rng(seed: u64, task: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

/// Mix a base seed with task coordinates (splitmix64 finalizer).
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut z = base;
    for &p in parts {
        z = z.wrapping_add(p.wrapping_add(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

/// Which devices must be active for a bin to count under the coactive
/// universe of a two-source table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoactiveRule {
    /// Both members' devices on both sources.
    #[default]
    AllFour,
    /// Both members' devices on source A only.
    SourceAPair,
}

/// Timelines for both sources, in roster order.
#[derive(Debug, Clone, Copy)]
pub struct PairedTimelines<'a> {
    pub a: &'a [ActivityTimeline],
    pub b: &'a [ActivityTimeline],
    pub rule: CoactiveRule,
}

fn same_roster(a: &[String], b: &[String]) -> Result<()> {
    if a != b {
        return Err(Error::RosterMismatch(format!(
            "rosters differ ({} vs {} participants)",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Pool every (dyad, bin) of the universe into a 2×2 table.
///
/// The sampled universe is taken from source A's scans.
pub fn contingency(
    grid_a: &DetectionGrid,
    grid_b: &DetectionGrid,
    universe: Universe,
    timelines: Option<PairedTimelines<'_>>,
) -> Result<ContingencyTable> {
    same_roster(grid_a.roster(), grid_b.roster())?;
    if grid_a.n_bins() != grid_b.n_bins() {
        return Err(Error::RosterMismatch(format!(
            "grids cover {} and {} bins",
            grid_a.n_bins(),
            grid_b.n_bins()
        )));
    }
    let n = grid_a.n();
    let mut table = ContingencyTable::default();
    for i in 0..n {
        for j in i + 1..n {
            let u: FixedBitSet = match universe {
                Universe::CoactiveBins => {
                    let t = timelines.ok_or_else(|| {
                        Error::Config("the coactive universe needs activity timelines".into())
                    })?;
                    let mut u = dyad_universe(grid_a, Some(t.a), i, j, universe)?;
                    if t.rule == CoactiveRule::AllFour {
                        u.intersect_with(&dyad_universe(grid_b, Some(t.b), i, j, universe)?);
                    }
                    u
                }
                _ => dyad_universe(grid_a, timelines.map(|t| t.a), i, j, universe)?,
            };
            let mut hit_a = grid_a.detected_bins(i, j);
            hit_a.intersect_with(&u);
            let mut hit_b = grid_b.detected_bins(i, j);
            hit_b.intersect_with(&u);
            let both = hit_a.intersection_count(&hit_b) as u64;
            let only_a = hit_a.count_ones(..) as u64 - both;
            let only_b = hit_b.count_ones(..) as u64 - both;
            table.a += both;
            table.b += only_a;
            table.c += only_b;
            table.d += u.count_ones(..) as u64 - both - only_a - only_b;
        }
    }
    Ok(table)
}

/// Upper-tail probability of a chi-squared variate with one degree of freedom.
pub fn chi2_sf_1df(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        libm::erfc((x / 2.0).sqrt())
    }
}

/// Phi, chi-squared (no continuity correction), marginal odds,
/// sensitivity and specificity of a table.
pub fn table_stats(t: &ContingencyTable) -> Result<TableStats> {
    let (a, b, c, d) = (t.a as f64, t.b as f64, t.c as f64, t.d as f64);
    let margins = [
        ("source A hits (a+b)", t.a + t.b),
        ("source A misses (c+d)", t.c + t.d),
        ("source B hits (a+c)", t.a + t.c),
        ("source B misses (b+d)", t.b + t.d),
    ];
    if let Some((name, _)) = margins.iter().find(|(_, m)| *m == 0) {
        return Err(Error::UndefinedStatistic(format!("zero margin: {name}")));
    }
    let total = a + b + c + d;
    let phi = ((a * d - b * c) / ((a + b) * (c + d) * (a + c) * (b + d)).sqrt()).clamp(-1.0, 1.0);
    let chi2 = total * phi * phi;
    Ok(TableStats {
        phi,
        chi2,
        p_value: chi2_sf_1df(chi2),
        odds_a: (a + b) / (c + d),
        odds_b: (a + c) / (b + d),
        sensitivity: a / (a + c),
        specificity: d / (b + d),
    })
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&x, &y| values[x].total_cmp(&values[y]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation; `None` if either side is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation with average ranks on ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&average_ranks(x), &average_ranks(y))
}

fn check_pair<A: Adjacency + ?Sized, B: Adjacency + ?Sized>(a: &A, b: &B) -> Result<()> {
    if a.size() != b.size() {
        return Err(Error::RosterMismatch(format!(
            "matrix sizes differ: {} vs {}",
            a.size(),
            b.size()
        )));
    }
    same_roster(a.roster(), b.roster())?;
    if a.size() < 3 {
        return Err(Error::Validation(format!(
            "Mantel test needs at least 3 nodes, got {}",
            a.size()
        )));
    }
    Ok(())
}

fn dyad_index(n: usize) -> Vec<usize> {
    // index[i * n + j] for i < j, mirrored for j < i
    let mut idx = vec![usize::MAX; n * n];
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            idx[i * n + j] = k;
            idx[j * n + i] = k;
            k += 1;
        }
    }
    idx
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = p.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = p.iter().rposition(|&x| x > p[i]).expect("pivot has a successor");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// Mantel test on the upper triangles of two square matrices.
///
/// `rho` is the Spearman correlation; the one-tailed p-value is
/// `(1 + #{rho* >= rho}) / (1 + permutations)` where each permutation
/// relabels the nodes of `b`. When `n! - 1 <= n_permutations` every
/// relabeling is enumerated instead and the result is exact.
pub fn mantel<A: Adjacency + ?Sized, B: Adjacency + ?Sized>(
    a: &A,
    b: &B,
    n_permutations: usize,
    seed: u64,
) -> Result<MantelResult> {
    check_pair(a, b)?;
    let n = a.size();
    let ra = average_ranks(&a.upper_triangle());
    let rb = average_ranks(&b.upper_triangle());
    let rho = pearson(&ra, &rb)
        .ok_or_else(|| Error::UndefinedStatistic("constant matrix, rho undefined".into()))?;
    let idx = dyad_index(n);

    // Ranks are multiples of 1/2, so these dot products are exact and rho
    // is a monotone function of them.
    let dot = |perm: &[usize]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += ra[idx[i * n + j]] * rb[idx[perm[i] * n + perm[j]]];
            }
        }
        s
    };
    let identity: Vec<usize> = (0..n).collect();
    let observed = dot(&identity);

    let n_factorial = (1..=n).try_fold(1usize, |acc, k| acc.checked_mul(k));
    let (exceed, performed, exact) = match n_factorial {
        Some(f) if f - 1 <= n_permutations => {
            let mut perm = identity.clone();
            let mut exceed = 0;
            while next_permutation(&mut perm) {
                if dot(&perm) >= observed {
                    exceed += 1;
                }
            }
            (exceed, f - 1, true)
        }
        _ => {
            let exceed = (0..n_permutations)
                .into_par_iter()
                .filter(|&k| {
                    let mut rng = task_rng(seed, k as u64);
                    let mut perm = identity.clone();
                    rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
                    dot(&perm) >= observed
                })
                .count();
            (exceed, n_permutations, false)
        }
    };
    Ok(MantelResult {
        rho,
        p_value: (1 + exceed) as f64 / (1 + performed) as f64,
        n_permutations: performed,
        exact,
        ci_low: None,
        ci_high: None,
    })
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Percentile bootstrap interval for the Spearman correlation of two
/// matrices, resampling upper-triangle dyads with replacement.
///
/// A replicate whose resample is constant on either side is redrawn, up to
/// a fixed number of retries.
pub fn mantel_bootstrap_ci<A: Adjacency + ?Sized, B: Adjacency + ?Sized>(
    a: &A,
    b: &B,
    n_boot: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    check_pair(a, b)?;
    if !(0.0 < level && level < 1.0) || n_boot == 0 {
        return Err(Error::Config(format!(
            "bootstrap needs 0 < level < 1 and at least one replicate (level {level}, n_boot {n_boot})"
        )));
    }
    let xa = a.upper_triangle();
    let xb = b.upper_triangle();
    let m = xa.len();
    let replicates: Vec<Option<f64>> = (0..n_boot)
        .into_par_iter()
        .map(|k| {
            let mut rng = task_rng(seed, k as u64);
            let mut sa = vec![0.0; m];
            let mut sb = vec![0.0; m];
            for _ in 0..BOOTSTRAP_RETRIES {
                for slot in 0..m {
                    let d = rng.random_range(0..m);
                    sa[slot] = xa[d];
                    sb[slot] = xb[d];
                }
                if let Some(r) = spearman(&sa, &sb) {
                    return Some(r);
                }
            }
            None
        })
        .collect();
    let mut values: Vec<f64> = replicates.into_iter().collect::<Option<_>>().ok_or_else(|| {
        Error::UndefinedStatistic(format!(
            "bootstrap resamples stayed constant after {BOOTSTRAP_RETRIES} retries"
        ))
    })?;
    values.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    Ok((quantile_sorted(&values, tail), quantile_sorted(&values, 1.0 - tail)))
}

/// Mantel test plus bootstrap interval in one result.
pub fn mantel_with_ci<A: Adjacency + ?Sized, B: Adjacency + ?Sized>(
    a: &A,
    b: &B,
    n_permutations: usize,
    n_boot: usize,
    level: f64,
    seed: u64,
) -> Result<MantelResult> {
    let mut res = mantel(a, b, n_permutations, seed)?;
    let (lo, hi) = mantel_bootstrap_ci(a, b, n_boot, level, derive_seed(seed, &[1]))?;
    res.ci_low = Some(lo);
    res.ci_high = Some(hi);
    Ok(res)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeMatch {
    pub matched: usize,
    /// Edge count of the reference network.
    pub total: usize,
}

/// Edges of `x` also present in the reference `y`.
pub fn edge_match_count(x: &BinaryNetwork, y: &BinaryNetwork) -> Result<EdgeMatch> {
    same_roster(x.roster(), y.roster())?;
    let reference = y.edges();
    Ok(EdgeMatch {
        matched: reference.iter().filter(|&&(i, j)| x.has_edge(i, j)).count(),
        total: reference.len(),
    })
}

/// A network the resampled networks are correlated against.
pub struct Reference<'a> {
    pub label: String,
    pub network: &'a dyn Adjacency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub label: String,
    pub mean: Option<f64>,
    pub low: Option<f64>,
    pub high: Option<f64>,
    /// Repeats with a defined correlation.
    pub valid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub samples: usize,
    pub roster_n: usize,
    pub repeats: usize,
    /// Set when fewer than three participants remain; no correlation computed.
    pub flagged: bool,
    pub bands: Vec<Band>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResamplingCurve {
    pub points: Vec<CurvePoint>,
}

pub const CURVE_LOW_QUANTILE: f64 = 0.005;
pub const CURVE_HIGH_QUANTILE: f64 = 0.995;

/// Correlation of fixed-sample-size networks against reference networks,
/// for each sample size. Bands are the empirical 0.5% and 99.5% quantiles.
pub fn resampling_curve(
    grid: &DetectionGrid,
    references: &[Reference<'_>],
    sample_sizes: &[usize],
    repeats: usize,
    seed: u64,
) -> Result<ResamplingCurve> {
    if sample_sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("sample sizes must be sorted ascending".into()));
    }
    if sample_sizes.first() == Some(&0) {
        return Err(Error::Config("sample sizes must be positive".into()));
    }
    // Reference positions for each grid participant, by name.
    let maps: Vec<Vec<usize>> = references
        .iter()
        .map(|r| {
            grid.roster()
                .iter()
                .map(|name| {
                    r.network.roster().iter().position(|x| x == name).ok_or_else(|| {
                        Error::RosterMismatch(format!("{name} missing from reference {}", r.label))
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let resampler = Resampler::new(grid);

    let mut points = Vec::with_capacity(sample_sizes.len());
    for (s_idx, &samples) in sample_sizes.iter().enumerate() {
        let retained = resampler.eligible(samples);
        if retained.len() < 3 {
            points.push(CurvePoint {
                samples,
                roster_n: retained.len(),
                repeats,
                flagged: true,
                bands: references
                    .iter()
                    .map(|r| Band {
                        label: r.label.clone(),
                        mean: None,
                        low: None,
                        high: None,
                        valid: 0,
                    })
                    .collect(),
            });
            continue;
        }
        let ref_vectors: Vec<Vec<f64>> = references
            .iter()
            .zip(&maps)
            .map(|(r, map)| {
                let mut v = Vec::new();
                for (a, &i) in retained.iter().enumerate() {
                    for &j in &retained[a + 1..] {
                        v.push(r.network.value(map[i], map[j]));
                    }
                }
                v
            })
            .collect();
        let per_repeat: Vec<Vec<Option<f64>>> = (0..repeats)
            .into_par_iter()
            .map(|r| {
                let s = derive_seed(seed, &[s_idx as u64, r as u64]);
                let res = resampler.resample(samples, s)?;
                let upper = res.network.upper_triangle();
                Ok(ref_vectors.iter().map(|rv| spearman(&upper, rv)).collect())
            })
            .collect::<Result<_>>()?;
        let bands = references
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let mut vals: Vec<f64> = per_repeat.iter().filter_map(|v| v[k]).collect();
                vals.sort_by(f64::total_cmp);
                let (mean, low, high) = if vals.is_empty() {
                    (None, None, None)
                } else {
                    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                    let low = quantile_sorted(&vals, CURVE_LOW_QUANTILE).min(mean);
                    let high = quantile_sorted(&vals, CURVE_HIGH_QUANTILE).max(mean);
                    (Some(mean), Some(low), Some(high))
                };
                Band {
                    label: r.label.clone(),
                    mean,
                    low,
                    high,
                    valid: vals.len(),
                }
            })
            .collect();
        points.push(CurvePoint {
            samples,
            roster_n: retained.len(),
            repeats,
            flagged: false,
            bands,
        });
    }
    Ok(ResamplingCurve { points })
}
