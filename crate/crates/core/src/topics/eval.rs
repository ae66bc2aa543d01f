use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiLabelReport {
    pub accuracy: f64,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub hamming_loss: f64,
    pub subset_accuracy: f64,
}

fn ratio(num: usize, den: usize, both_empty: bool) -> f64 {
    if den == 0 {
        if both_empty {
            1.0
        } else {
            0.0
        }
    } else {
        num as f64 / den as f64
    }
}

/// Example-based multi-label metrics of `predicted` against `truth`.
///
/// Per-item terms with an empty denominator score 1 when both sets are empty
/// and 0 otherwise.
pub fn evaluate_multilabel(
    predicted: &BTreeMap<String, BTreeSet<String>>,
    truth: &BTreeMap<String, BTreeSet<String>>,
    label_universe: &BTreeSet<String>,
) -> Result<MultiLabelReport> {
    if truth.is_empty() && predicted.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    if !predicted.keys().eq(truth.keys()) {
        let missing = truth
            .keys()
            .find(|k| !predicted.contains_key(*k))
            .or_else(|| predicted.keys().find(|k| !truth.contains_key(*k)))
            .expect("key sets differ");
        return Err(Error::ItemMismatch(format!("item {missing:?} is not in both sets")));
    }
    for (item, labels) in predicted.iter().chain(truth) {
        if let Some(l) = labels.iter().find(|l| !label_universe.contains(*l)) {
            return Err(Error::ItemMismatch(format!(
                "label {l:?} of item {item:?} is outside the label universe"
            )));
        }
    }
    if label_universe.is_empty() {
        return Err(Error::InvalidParameter("label universe is empty".into()));
    }

    let n = truth.len();
    let mut acc = 0.0;
    let mut prec = 0.0;
    let mut rec = 0.0;
    let mut f1 = 0.0;
    let mut sym_diff = 0usize;
    let mut exact = 0usize;
    for (item, y) in truth {
        let z = &predicted[item];
        let inter = y.intersection(z).count();
        let union = y.len() + z.len() - inter;
        let both_empty = y.is_empty() && z.is_empty();
        acc += ratio(inter, union, both_empty);
        prec += ratio(inter, z.len(), both_empty);
        rec += ratio(inter, y.len(), both_empty);
        f1 += ratio(2 * inter, y.len() + z.len(), both_empty);
        sym_diff += union - inter;
        exact += usize::from(y == z);
    }
    let n_f = n as f64;
    Ok(MultiLabelReport {
        accuracy: acc / n_f,
        recall: rec / n_f,
        precision: prec / n_f,
        f1: f1 / n_f,
        hamming_loss: sym_diff as f64 / (n_f * label_universe.len() as f64),
        subset_accuracy: exact as f64 / n_f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(items: &[(&str, &[&str])]) -> BTreeMap<String, BTreeSet<String>> {
        items
            .iter()
            .map(|(i, ls)| (i.to_string(), ls.iter().map(|s| s.to_string()).collect()))
            .collect()
    }

    fn universe(ls: &[&str]) -> BTreeSet<String> {
        ls.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn two_item_example() {
        let truth = labels(&[("1", &["a"]), ("2", &["b", "c"])]);
        let pred = labels(&[("1", &["a", "b"]), ("2", &["b"])]);
        let r = evaluate_multilabel(&pred, &truth, &universe(&["a", "b", "c"])).unwrap();
        assert!((r.accuracy - 0.5).abs() < 1e-12);
        assert!((r.precision - 0.75).abs() < 1e-12);
        assert!((r.recall - 0.75).abs() < 1e-12);
        assert!((r.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.hamming_loss - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.subset_accuracy, 0.0);
    }

    #[test]
    fn perfect_and_symmetric() {
        let u = universe(&["a", "b", "c"]);
        let truth = labels(&[("1", &["a"]), ("2", &[]), ("3", &["b", "c"])]);
        let r = evaluate_multilabel(&truth, &truth, &u).unwrap();
        assert_eq!(
            (r.accuracy, r.recall, r.precision, r.f1, r.hamming_loss, r.subset_accuracy),
            (1.0, 1.0, 1.0, 1.0, 0.0, 1.0)
        );
        let pred = labels(&[("1", &["b"]), ("2", &["c"]), ("3", &["c"])]);
        let ab = evaluate_multilabel(&pred, &truth, &u).unwrap();
        let ba = evaluate_multilabel(&truth, &pred, &u).unwrap();
        assert_eq!(ab.hamming_loss, ba.hamming_loss);
        assert_eq!(ab.precision, ba.recall);
    }

    #[test]
    fn empty_predictions() {
        let u = universe(&["a", "b", "c", "d"]);
        let truth = labels(&[("1", &["a"]), ("2", &["b", "c"])]);
        let pred = labels(&[("1", &[]), ("2", &[])]);
        let r = evaluate_multilabel(&pred, &truth, &u).unwrap();
        assert_eq!(r.precision, 0.0);
        assert_eq!(r.recall, 0.0);
        assert_eq!(r.hamming_loss, 3.0 / 8.0);
    }

    #[test]
    fn errors() {
        let u = universe(&["a"]);
        let empty = labels(&[]);
        assert!(matches!(evaluate_multilabel(&empty, &empty, &u), Err(Error::EmptyEvaluation)));
        let one = labels(&[("1", &["a"])]);
        let other = labels(&[("2", &["a"])]);
        assert!(evaluate_multilabel(&one, &other, &u).is_err());
        let outside = labels(&[("1", &["z"])]);
        assert!(evaluate_multilabel(&outside, &one, &u).is_err());
    }
}
