use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Binary confusion counts and the scores derived from them. A prediction
/// of `None` (unparseable response) counts as wrong: a false negative when
/// the truth is positive, a false positive otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub total: u64,
    pub unparseable: u64,
    /// Scores whose denominator was zero and were reported as 0.
    pub undefined: Vec<String>,
}

fn ratio(num: u64, den: u64, name: &str, undefined: &mut Vec<String>) -> f64 {
    if den == 0 {
        undefined.push(name.to_string());
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

pub fn compute_metrics(predictions: &[(Option<bool>, bool)]) -> Result<Metrics, EvalError> {
    if predictions.is_empty() {
        return Err(EvalError::EmptyPredictions);
    }
    let (mut tp, mut fp, mut tn, mut fn_, mut unparseable) = (0, 0, 0, 0, 0);
    for &(pred, truth) in predictions {
        if pred.is_none() {
            unparseable += 1;
        }
        match (pred, truth) {
            (Some(true), true) => tp += 1,
            (Some(true), false) => fp += 1,
            (Some(false), false) => tn += 1,
            (Some(false), true) => fn_ += 1,
            (None, true) => fn_ += 1,
            (None, false) => fp += 1,
        }
    }
    Ok(from_counts(tp, fp, tn, fn_, unparseable))
}

pub fn from_counts(tp: u64, fp: u64, tn: u64, fn_: u64, unparseable: u64) -> Metrics {
    let mut undefined = Vec::new();
    let total = tp + fp + tn + fn_;
    let precision = ratio(tp, tp + fp, "precision", &mut undefined);
    let recall = ratio(tp, tp + fn_, "recall", &mut undefined);
    if precision + recall == 0.0 {
        undefined.push("f1".into());
    }
    let f1 = f1_score(precision, recall);
    let accuracy = ratio(tp + tn, total, "accuracy", &mut undefined);
    Metrics {
        precision,
        recall,
        f1,
        accuracy,
        tp,
        fp,
        tn,
        fn_,
        total,
        unparseable,
        undefined,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassTally {
    pub correct: u64,
    pub total: u64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub correct: u64,
    pub total: u64,
    pub unparseable: u64,
    /// Accuracy restricted to samples of each true class.
    pub per_class: BTreeMap<String, ClassTally>,
}

pub fn compute_classification(predictions: &[(Option<String>, String)]) -> Result<ClassificationMetrics, EvalError> {
    if predictions.is_empty() {
        return Err(EvalError::EmptyPredictions);
    }
    let mut per: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    let mut unparseable = 0;
    for (pred, truth) in predictions {
        if pred.is_none() {
            unparseable += 1;
        }
        let slot = per.entry(truth.clone()).or_default();
        slot.1 += 1;
        if pred.as_ref() == Some(truth) {
            slot.0 += 1;
        }
    }
    let correct = per.values().map(|(c, _)| c).sum();
    let total = predictions.len() as u64;
    Ok(ClassificationMetrics {
        accuracy: correct as f64 / total as f64,
        correct,
        total,
        unparseable,
        per_class: per
            .into_iter()
            .map(|(k, (c, t))| {
                (
                    k,
                    ClassTally {
                        correct: c,
                        total: t,
                        accuracy: c as f64 / t as f64,
                    },
                )
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn half_right() {
        let m = compute_metrics(&[(Some(true), true), (Some(true), false), (Some(false), true), (Some(false), false)]).unwrap();
        assert_eq!((m.precision, m.recall, m.f1, m.accuracy), (0.5, 0.5, 0.5, 0.5));
    }

    #[test]
    fn all_correct_and_guards() {
        let m = compute_metrics(&[(Some(true), true), (Some(false), false)]).unwrap();
        assert_eq!((m.precision, m.recall, m.f1, m.accuracy), (1.0, 1.0, 1.0, 1.0));
        let none = compute_metrics(&[(Some(false), false)]).unwrap();
        assert_eq!(none.precision, 0.0);
        assert!(none.undefined.contains(&"precision".to_string()));
        assert!(compute_metrics(&[]).is_err());
    }

    #[test]
    fn unparseable_is_wrong() {
        let m = compute_metrics(&[(None, true), (None, false)]).unwrap();
        assert_eq!((m.tp, m.fp, m.tn, m.fn_, m.unparseable), (0, 1, 0, 1, 2));
    }

    #[test]
    fn classification() {
        let p = |x: Option<&str>, t: &str| (x.map(String::from), t.to_string());
        let m = compute_classification(&[p(Some("A"), "A"), p(Some("B"), "A"), p(None, "B"), p(Some("B"), "B")]).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert_eq!(m.per_class["A"].correct, 1);
        assert_eq!(m.unparseable, 1);
    }

    proptest! {
        #[test]
        fn matches_brute_force_recount(preds in proptest::collection::vec((proptest::option::of(any::<bool>()), any::<bool>()), 1..200)) {
            let m = compute_metrics(&preds).unwrap();
            let count = |f: &dyn Fn(&(Option<bool>, bool)) -> bool| preds.iter().filter(|p| f(p)).count() as u64;
            let tp = count(&|p| p.0 == Some(true) && p.1);
            let tn = count(&|p| p.0 == Some(false) && !p.1);
            prop_assert_eq!(m.tp, tp);
            prop_assert_eq!(m.tn, tn);
            prop_assert_eq!(m.tp + m.fp + m.tn + m.fn_, preds.len() as u64);
            prop_assert!((m.accuracy - (tp + tn) as f64 / preds.len() as f64).abs() < 1e-12);
            let mut shuffled = preds.clone();
            shuffled.reverse();
            prop_assert_eq!(compute_metrics(&shuffled).unwrap(), m);
        }
    }
}
