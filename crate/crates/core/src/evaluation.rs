//! Probe-to-gallery matching and CMC scoring.

use thiserror::Error;

use crate::descriptor::Descriptor;
use crate::distance::{self, DistanceError, DistanceMeasure, DistanceValue};

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error("probe {0:?} has no gallery entry with its identity")]
    TrueMatchMissing(String),
    #[error("no rank results to accumulate")]
    EmptyResults,
    #[error("rank {rank} outside gallery size {gallery_size}")]
    RankOutOfRange { rank: usize, gallery_size: usize },
    #[error("empty gallery")]
    EmptyGallery,
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

/// A descriptor tagged with the identity it belongs to.
#[derive(Debug, Clone)]
pub struct LabeledDescriptor {
    pub person_id: String,
    pub descriptor: Descriptor,
}

/// Full ranking of the gallery for one probe, distances ascending, ties
/// broken by gallery order.
#[derive(Debug, Clone, PartialEq)]
pub struct RankResult {
    pub probe_id: String,
    pub ranked_gallery: Vec<(String, DistanceValue)>,
    /// 1-based rank of the probe's true identity; 1 means re-identified.
    pub true_match_rank: usize,
}

/// Ranks precomputed probe-to-gallery distances. The sort is stable, so
/// equal distances keep their gallery order.
pub fn rank_from_distances(
    probe_id: &str,
    distances: Vec<(String, DistanceValue)>,
) -> Result<RankResult, EvaluationError> {
    if distances.is_empty() {
        return Err(EvaluationError::EmptyGallery);
    }
    let mut ranked = distances;
    ranked.sort_by(|a, b| a.1 .0.total_cmp(&b.1 .0));
    let true_match_rank = ranked
        .iter()
        .position(|(id, _)| id == probe_id)
        .map(|p| p + 1)
        .ok_or_else(|| EvaluationError::TrueMatchMissing(probe_id.to_string()))?;
    Ok(RankResult {
        probe_id: probe_id.to_string(),
        ranked_gallery: ranked,
        true_match_rank,
    })
}

/// Compares a probe against every gallery descriptor and ranks the gallery
/// by ascending distance.
///
/// Cells that involve an empty histogram and have no bounded worst case
/// (KL, Mahalanobis) are charged the maximum finite cell distance observed
/// across the whole probe-gallery pair set, keeping rankings total and
/// finite.
pub fn match_probe(
    probe: &LabeledDescriptor,
    gallery: &[LabeledDescriptor],
    measure: &DistanceMeasure,
) -> Result<RankResult, EvaluationError> {
    if gallery.is_empty() {
        return Err(EvaluationError::EmptyGallery);
    }
    let mut all_cells = Vec::with_capacity(gallery.len());
    for entry in gallery {
        all_cells.push(distance::descriptor_cells(
            &probe.descriptor,
            &entry.descriptor,
            measure,
        )?);
    }
    let sentinel = all_cells
        .iter()
        .filter_map(|cells| distance::max_finite_value(cells))
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
        .unwrap_or(distance::EMPTY_SENTINEL);

    let distances: Vec<(String, DistanceValue)> = gallery
        .iter()
        .zip(&all_cells)
        .map(|(entry, cells)| {
            (
                entry.person_id.clone(),
                DistanceValue(distance::mean_with_sentinel(cells, sentinel)),
            )
        })
        .collect();
    rank_from_distances(&probe.person_id, distances)
}

/// Cumulative match characteristic over gallery ranks, with its normalized
/// area (the mean of the curve, 1 for a perfect matcher).
#[derive(Debug, Clone, PartialEq)]
pub struct CmcCurve {
    pub values: Vec<f64>,
    pub area: f64,
}

impl CmcCurve {
    /// Fraction of probes whose true match appears at rank 1.
    pub fn rank1(&self) -> f64 {
        self.values[0]
    }
}

/// Accumulates true-match ranks into the CMC curve: values[k-1] is the
/// fraction of probes matched within the top k, and the area is the mean
/// over all gallery ranks.
pub fn compute_cmc(results: &[RankResult], gallery_size: usize) -> Result<CmcCurve, EvaluationError> {
    if results.is_empty() {
        return Err(EvaluationError::EmptyResults);
    }
    let mut counts = vec![0usize; gallery_size];
    for r in results {
        if r.true_match_rank == 0 || r.true_match_rank > gallery_size {
            return Err(EvaluationError::RankOutOfRange {
                rank: r.true_match_rank,
                gallery_size,
            });
        }
        counts[r.true_match_rank - 1] += 1;
    }
    let probe_count = results.len() as f64;
    let mut values = Vec::with_capacity(gallery_size);
    let mut cumulative = 0usize;
    for c in counts {
        cumulative += c;
        values.push(cumulative as f64 / probe_count);
    }
    let area = values.iter().sum::<f64>() / gallery_size as f64;
    Ok(CmcCurve { values, area })
}
