//! External clustering metrics (purity, NMI) and planted-subspace recovery
//! scoring.

use std::collections::HashMap;

use crate::error::{CraftError, Result};

/// Cross-tabulation of predicted clusters against true labels.
#[derive(Debug, Clone)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<usize>>,
    pub row_totals: Vec<usize>,
    pub col_totals: Vec<usize>,
    pub n: usize,
}

impl ContingencyTable {
    pub fn new(pred: &[usize], truth: &[u32]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(CraftError::LengthMismatch {
                left: pred.len(),
                right: truth.len(),
            });
        }
        let mut pred_ids: HashMap<usize, usize> = HashMap::new();
        let mut truth_ids: HashMap<u32, usize> = HashMap::new();
        let mut cells: HashMap<(usize, usize), usize> = HashMap::new();
        for (&p, &t) in pred.iter().zip(truth) {
            let next = pred_ids.len();
            let i = *pred_ids.entry(p).or_insert(next);
            let next = truth_ids.len();
            let j = *truth_ids.entry(t).or_insert(next);
            *cells.entry((i, j)).or_insert(0) += 1;
        }
        let (rows, cols) = (pred_ids.len(), truth_ids.len());
        let mut counts = vec![vec![0usize; cols]; rows];
        for ((i, j), c) in cells {
            counts[i][j] = c;
        }
        let row_totals: Vec<usize> = counts.iter().map(|r| r.iter().sum()).collect();
        let mut col_totals = vec![0usize; cols];
        for row in &counts {
            for (t, &c) in col_totals.iter_mut().zip(row) {
                *t += c;
            }
        }
        Ok(ContingencyTable {
            counts,
            row_totals,
            col_totals,
            n: pred.len(),
        })
    }
}

/// Fraction of points belonging to the majority true label of their
/// predicted cluster.
pub fn purity(pred: &[usize], truth: &[u32]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    let hits: usize = table
        .counts
        .iter()
        .map(|row| row.iter().copied().max().unwrap_or(0))
        .sum();
    Ok(hits as f64 / table.n as f64)
}

fn entropy(totals: &[usize], n: f64) -> f64 {
    totals
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information normalized by sqrt(H(pred) * H(truth)), natural logs.
/// When both entropies are zero the partitions are trivially identical and
/// the score is 1; when exactly one is zero the score is 0.
pub fn nmi(pred: &[usize], truth: &[u32]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    let n = table.n as f64;
    let h_pred = entropy(&table.row_totals, n);
    let h_truth = entropy(&table.col_totals, n);
    if h_pred == 0.0 && h_truth == 0.0 {
        return Ok(1.0);
    }
    if h_pred == 0.0 || h_truth == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let p_ij = c as f64 / n;
                let p_i = table.row_totals[i] as f64 / n;
                let p_j = table.col_totals[j] as f64 / n;
                mi += p_ij * (p_ij / (p_i * p_j)).ln();
            }
        }
    }
    Ok((mi / (h_pred * h_truth).sqrt()).clamp(0.0, 1.0))
}

fn jaccard(a: &[bool], b: &[bool]) -> f64 {
    let mut inter = 0usize;
    let mut union = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        inter += usize::from(x && y);
        union += usize::from(x || y);
    }
    if union == 0 {
        1.0 // two empty masks are identical
    } else {
        inter as f64 / union as f64
    }
}

/// Best-matching mean Jaccard similarity between planted and recovered mask
/// sets. Clusters are matched injectively (exhaustive over the smaller side,
/// feasible for the small K used here); clusters left unmatched contribute 0,
/// with the mean taken over max(K, K').
pub fn mask_recovery(planted: &[Vec<bool>], recovered: &[Vec<bool>]) -> f64 {
    if planted.is_empty() || recovered.is_empty() {
        return 0.0;
    }
    let d = planted[0].len();
    assert!(
        planted.iter().chain(recovered).all(|m| m.len() == d),
        "mask width mismatch"
    );
    // orient so the bitmask runs over the smaller side
    let (small, large) = if planted.len() <= recovered.len() {
        (planted, recovered)
    } else {
        (recovered, planted)
    };
    let a = small.len();
    assert!(a <= 20, "exhaustive matching limited to small cluster counts");
    let sim: Vec<Vec<f64>> = large
        .iter()
        .map(|lm| small.iter().map(|sm| jaccard(lm, sm)).collect())
        .collect();
    // dp[mask] = best total over the first `processed` large clusters using
    // exactly the small clusters in `mask` (or skipping)
    let full = 1usize << a;
    let mut dp = vec![f64::NEG_INFINITY; full];
    dp[0] = 0.0;
    for row in &sim {
        let mut next = dp.clone(); // skipping this large cluster is allowed
        for (mask, &cur) in dp.iter().enumerate() {
            if cur == f64::NEG_INFINITY {
                continue;
            }
            for (s, &score) in row.iter().enumerate() {
                if mask & (1 << s) == 0 {
                    let m2 = mask | (1 << s);
                    if cur + score > next[m2] {
                        next[m2] = cur + score;
                    }
                }
            }
        }
        dp = next;
    }
    let best = dp.iter().cloned().fold(0.0f64, f64::max);
    best / planted.len().max(recovered.len()) as f64
}
