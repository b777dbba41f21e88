//! Reduction of weighted and directed networks to comparable undirected
//! binary networks: survey symmetrization, the disparity filter, and
//! backbones matched to a target density.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Adjacency, BinaryNetwork, DirectedSurveyNetwork, WeightedNetwork};

/// Undirected edge wherever either member nominated the other.
pub fn symmetrize(d: &DirectedSurveyNetwork) -> BinaryNetwork {
    let n = d.n();
    let edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| d.nominates(i, j) || d.nominates(j, i))
        .collect();
    BinaryNetwork::from_edges(d.roster().to_vec(), &edges).expect("edges are in range")
}

/// Disparity-filter significance of one positive-weight edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSignificance {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
    pub alpha_from_i: f64,
    pub alpha_from_j: f64,
    /// `min(alpha_from_i, alpha_from_j)`.
    pub alpha: f64,
}

/// Significance of `w` relative to a node of strength `s` and degree `k`:
/// `(1 - w/s)^(k-1)`, or 1 for a node with a single edge.
fn endpoint_alpha(w: f64, strength: f64, degree: usize) -> f64 {
    if degree < 2 {
        return 1.0;
    }
    (1.0 - w / strength).max(0.0).powi(degree as i32 - 1)
}

/// Alphas for every positive-weight edge, ordered by `(i, j)` with `i < j`.
pub fn edge_alphas(w: &WeightedNetwork) -> Vec<EdgeSignificance> {
    let n = w.n();
    let mut strength = vec![0.0; n];
    let mut degree = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            let x = w.weight(i, j);
            if x > 0.0 {
                strength[i] += x;
                degree[i] += 1;
            }
        }
    }
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let x = w.weight(i, j);
            if x <= 0.0 {
                continue;
            }
            let alpha_from_i = endpoint_alpha(x, strength[i], degree[i]);
            let alpha_from_j = endpoint_alpha(x, strength[j], degree[j]);
            out.push(EdgeSignificance {
                i,
                j,
                weight: x,
                alpha_from_i,
                alpha_from_j,
                alpha: alpha_from_i.min(alpha_from_j),
            });
        }
    }
    out
}

/// Edges significant at `alpha < threshold` from either endpoint.
pub fn backbone_extract(w: &WeightedNetwork, threshold: f64) -> BinaryNetwork {
    let edges: Vec<(usize, usize)> = edge_alphas(w)
        .into_iter()
        .filter(|e| e.alpha < threshold)
        .map(|e| (e.i, e.j))
        .collect();
    BinaryNetwork::from_edges(w.roster().to_vec(), &edges).expect("edges are in range")
}

/// A backbone with a prescribed edge count.
#[derive(Debug, Clone, PartialEq)]
pub struct Backbone {
    pub network: BinaryNetwork,
    /// Alpha of the last kept edge (0 when nothing was kept).
    pub threshold: f64,
    /// Kept edges in selection order.
    pub edges: Vec<EdgeSignificance>,
}

/// Selection order: alpha ascending, then weight descending, then node pair.
fn selection_order(a: &EdgeSignificance, b: &EdgeSignificance) -> Ordering {
    a.alpha
        .total_cmp(&b.alpha)
        .then(b.weight.total_cmp(&a.weight))
        .then((a.i, a.j).cmp(&(b.i, b.j)))
}

/// Keep exactly `round(target_density * n(n-1)/2)` edges, the most
/// significant first.
pub fn density_matched_backbone(w: &WeightedNetwork, target_density: f64) -> Result<Backbone> {
    if !(target_density > 0.0 && target_density <= 1.0) {
        return Err(Error::Config(format!(
            "target density {target_density} outside (0, 1]"
        )));
    }
    let n = w.n();
    let pairs = n * n.saturating_sub(1) / 2;
    let wanted = (target_density * pairs as f64).round() as usize;
    backbone_with_edge_count(w, wanted)
}

/// Keep exactly `wanted` edges, the most significant first.
pub fn backbone_with_edge_count(w: &WeightedNetwork, wanted: usize) -> Result<Backbone> {
    let mut candidates = edge_alphas(w);
    if wanted > candidates.len() {
        return Err(Error::InsufficientEdges {
            needed: wanted,
            available: candidates.len(),
        });
    }
    candidates.sort_by(selection_order);
    candidates.truncate(wanted);
    let network = BinaryNetwork::from_edges(
        w.roster().to_vec(),
        &candidates.iter().map(|e| (e.i, e.j)).collect::<Vec<_>>(),
    )?;
    Ok(Backbone {
        network,
        threshold: candidates.last().map_or(0.0, |e| e.alpha),
        edges: candidates,
    })
}

/// Binary: edges over possible pairs. Weighted: mean upper-triangle weight.
pub fn density<N: Adjacency + ?Sized>(net: &N) -> f64 {
    let upper = net.upper_triangle();
    if upper.is_empty() {
        0.0
    } else {
        upper.iter().sum::<f64>() / upper.len() as f64
    }
}
