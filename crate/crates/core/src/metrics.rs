//! Ranking and threshold metrics for sign prediction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Sign;

/// Scores at or above this value predict a positive sign.
pub const DECISION_THRESHOLD: f64 = 0.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positive: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    pub false_negative: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.true_positive + self.false_positive + self.true_negative + self.false_negative
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub auc: f64,
    pub macro_f1: f64,
    /// F1 with `+1` as the target class.
    pub f1_positive: f64,
    /// F1 with `−1` as the target class.
    pub f1_negative: f64,
    pub confusion: Confusion,
}

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    if tp == 0 {
        return 0.0;
    }
    2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
}

/// Area under the ROC curve from the Mann–Whitney statistic with tied scores
/// sharing their average rank.
pub fn auc(scores: &[f64], signs: &[Sign]) -> Result<f64> {
    if scores.len() != signs.len() {
        return Err(Error::shape("auc", format!("{} signs", scores.len()), format!("{}", signs.len())));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidParameter("auc received a NaN score".into()));
    }
    let n_pos = signs.iter().filter(|&&s| s == Sign::Positive).count();
    let n_neg = signs.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks are 1-based; the tie group i..=j shares the mean rank.
        let mean_rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            if signs[k] == Sign::Positive {
                rank_sum_pos += mean_rank;
            }
        }
        i = j + 1;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

pub fn confusion(scores: &[f64], signs: &[Sign]) -> Result<Confusion> {
    if scores.len() != signs.len() {
        return Err(Error::shape("confusion", format!("{} signs", scores.len()), format!("{}", signs.len())));
    }
    let mut c = Confusion::default();
    for (&s, &sign) in scores.iter().zip(signs) {
        match (s >= DECISION_THRESHOLD, sign) {
            (true, Sign::Positive) => c.true_positive += 1,
            (true, Sign::Negative) => c.false_positive += 1,
            (false, Sign::Negative) => c.true_negative += 1,
            (false, Sign::Positive) => c.false_negative += 1,
        }
    }
    Ok(c)
}

/// AUC plus macro-F1 over the two sign classes.
pub fn evaluate(scores: &[f64], signs: &[Sign]) -> Result<Metrics> {
    let auc = auc(scores, signs)?;
    let c = confusion(scores, signs)?;
    let f1_positive = f1(c.true_positive, c.false_positive, c.false_negative);
    let f1_negative = f1(c.true_negative, c.false_negative, c.false_positive);
    Ok(Metrics {
        auc,
        macro_f1: (f1_positive + f1_negative) / 2.0,
        f1_positive,
        f1_negative,
        confusion: c,
    })
}
