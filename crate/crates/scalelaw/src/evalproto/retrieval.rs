//! Recall@K over cosine-ranked candidates.

use crate::embedding::{l2_norm, EmbeddingMatrix, TruthMap};
use crate::error::{Error, Result};

/// Fraction of queries (in percent) whose top-k candidates by cosine score
/// contain a true candidate.
///
/// Ranking is by descending cosine score with ties broken by lower candidate
/// index. Every query row must have at least one true candidate in `truth`.
/// A `k` larger than the candidate count is clamped to it, not an error.
pub fn recall_at_k(
    queries: &EmbeddingMatrix,
    candidates: &EmbeddingMatrix,
    truth: &TruthMap,
    k: usize,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::Range("k must be >= 1".into()));
    }
    if queries.dim() != candidates.dim() {
        return Err(Error::Shape(format!(
            "query dim {} != candidate dim {}",
            queries.dim(),
            candidates.dim()
        )));
    }
    if queries.rows() == 0 {
        return Err(Error::Shape("no queries".into()));
    }
    if candidates.rows() == 0 {
        return Err(Error::Shape("no candidates".into()));
    }
    for (&q, cands) in truth.queries() {
        if q >= queries.rows() {
            return Err(Error::Range(format!("truth query index {q} out of range")));
        }
        if let Some(&c) = cands.iter().find(|&&c| c >= candidates.rows()) {
            return Err(Error::Range(format!(
                "truth candidate index {c} out of range"
            )));
        }
    }
    let k = k.min(candidates.rows());
    let mut hits = 0usize;
    for q in 0..queries.rows() {
        let true_set = truth
            .get(q)
            .ok_or_else(|| Error::Range(format!("query {q} has no true candidate")))?;
        let top = top_k_by_cosine(queries, candidates, q, k);
        if top.iter().any(|i| true_set.contains(i)) {
            hits += 1;
        }
    }
    Ok(100.0 * hits as f64 / queries.rows() as f64)
}

/// Cosine score between one query row and one candidate row; rows with zero
/// norm score 0.
pub fn cosine_score(queries: &EmbeddingMatrix, candidates: &EmbeddingMatrix, q: usize, c: usize) -> f64 {
    let qn = l2_norm(queries.row(q));
    let cn = l2_norm(candidates.row(c));
    if qn == 0.0 || cn == 0.0 {
        return 0.0;
    }
    queries.row(q).dot(&candidates.row(c)) / (qn * cn)
}

fn top_k_by_cosine(
    queries: &EmbeddingMatrix,
    candidates: &EmbeddingMatrix,
    q: usize,
    k: usize,
) -> Vec<usize> {
    let mut scored: Vec<(usize, f64)> = (0..candidates.rows())
        .map(|c| (c, cosine_score(queries, candidates, q, c)))
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("finite scores")
            .then(a.0.cmp(&b.0))
    });
    scored.truncate(k);
    scored.into_iter().map(|(c, _)| c).collect()
}
