//! Link-prediction metrics and edge overlap.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::generator::ScoreMatrix;
use crate::graph::Graph;
use crate::split::Edge;

fn check_lists(positives: &[Edge], negatives: &[Edge]) -> Result<()> {
    if positives.is_empty() {
        return Err(Error::param("positives", "must be non-empty"));
    }
    if negatives.is_empty() {
        return Err(Error::param("negatives", "must be non-empty"));
    }
    Ok(())
}

fn scored(scores: &ScoreMatrix, pairs: &[Edge]) -> Vec<f64> {
    pairs.iter().map(|&(u, v)| scores.score(u, v)).collect()
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Pairs missing from the matrix score 0.
pub fn roc_auc(scores: &ScoreMatrix, positives: &[Edge], negatives: &[Edge]) -> Result<f64> {
    check_lists(positives, negatives)?;
    Ok(roc_auc_from_scores(
        &scored(scores, positives),
        &scored(scores, negatives),
    ))
}

/// Mann-Whitney U over raw scores, normalized by `|pos| * |neg|`.
pub fn roc_auc_from_scores(pos: &[f64], neg: &[f64]) -> f64 {
    let mut all: Vec<(f64, bool)> = pos
        .iter()
        .map(|&s| (s, true))
        .chain(neg.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    // U counts wins as 1 and ties as 1/2; every partial sum is a multiple of
    // 1/2 and stays exact in f64
    let mut u = 0.0;
    let mut neg_below = 0usize;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        let (mut p, mut q) = (0usize, 0usize);
        while j < all.len() && all[j].0 == all[i].0 {
            if all[j].1 {
                p += 1;
            } else {
                q += 1;
            }
            j += 1;
        }
        u += (p * neg_below) as f64 + 0.5 * (p * q) as f64;
        neg_below += q;
        i = j;
    }
    u / (pos.len() * neg.len()) as f64
}

/// Step-wise area under the precision-recall curve,
/// `sum_k (R_k - R_{k-1}) P_k`, over positives and negatives ranked by
/// descending score. Equal scores are ordered by ascending `(min, max)` pair.
pub fn average_precision(scores: &ScoreMatrix, positives: &[Edge], negatives: &[Edge]) -> Result<f64> {
    check_lists(positives, negatives)?;
    let mut items: Vec<(f64, Edge, bool)> = positives
        .iter()
        .map(|&e| (e, true))
        .chain(negatives.iter().map(|&e| (e, false)))
        .map(|((u, v), pos)| (scores.score(u, v), (u.min(v), u.max(v)), pos))
        .collect();
    items.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let labels: Vec<bool> = items.iter().map(|i| i.2).collect();
    Ok(average_precision_ranked(&labels))
}

/// Average precision of an already ranked label list (true = positive).
pub fn average_precision_ranked(labels: &[bool]) -> f64 {
    let total_pos = labels.iter().filter(|&&l| l).count();
    if total_pos == 0 {
        return 0.0;
    }
    // every recall step is exactly 1 / total_pos, so the step sum is the
    // mean precision at the positives; dividing once keeps a perfect ranking
    // at exactly 1
    let mut precision_sum = 0.0;
    let mut tp = 0usize;
    for (k, &is_pos) in labels.iter().enumerate() {
        if is_pos {
            tp += 1;
            precision_sum += tp as f64 / (k + 1) as f64;
        }
    }
    precision_sum / total_pos as f64
}

/// Share of the reference edges present in `assembled`.
pub fn edge_overlap(assembled: &Graph, reference: &Graph) -> Result<f64> {
    if assembled.num_vertices() != reference.num_vertices() {
        return Err(Error::param(
            "assembled",
            format!(
                "has {} vertices, reference has {}",
                assembled.num_vertices(),
                reference.num_vertices()
            ),
        ));
    }
    if reference.num_edges() == 0 {
        return Err(Error::param("reference", "has no edges"));
    }
    let ours: HashSet<Edge> = assembled.edge_pairs().into_iter().collect();
    let shared = reference.edge_pairs().iter().filter(|e| ours.contains(e)).count();
    Ok(shared as f64 / reference.num_edges() as f64)
}
