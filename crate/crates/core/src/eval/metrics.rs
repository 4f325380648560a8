use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{Classifier, EvalError};
use crate::dataset::SplitData;

pub const DEFAULT_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prediction {
    pub true_class: usize,
    pub pred_class: usize,
    pub snr_db: i16,
}

/// Classifier output over a whole split, in record order.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub n_classes: usize,
    pub items: Vec<Prediction>,
}

impl Predictions {
    pub fn new(n_classes: usize, items: Vec<Prediction>) -> Result<Self, EvalError> {
        for p in &items {
            for label in [p.true_class, p.pred_class] {
                if label >= n_classes {
                    return Err(EvalError::LabelOutOfRange { label, n_classes });
                }
            }
        }
        Ok(Self { n_classes, items })
    }

    /// Distinct SNR values, ascending.
    pub fn snr_values(&self) -> Vec<i16> {
        let mut v: Vec<i16> = self.items.iter().map(|p| p.snr_db).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn accuracy(&self) -> f64 {
        let hits = self.items.iter().filter(|p| p.true_class == p.pred_class).count();
        hits as f64 / self.items.len().max(1) as f64
    }
}

/// Run `classifier` over every record of `split`.
pub fn predict_split<C: Classifier + ?Sized>(classifier: &C, split: &SplitData) -> Result<Predictions, EvalError> {
    if split.is_empty() {
        return Err(EvalError::EmptySplit);
    }
    let n_classes = split.n_classes;
    if classifier.n_classes() != n_classes {
        return Err(EvalError::ClassCount {
            classifier: classifier.n_classes(),
            split: n_classes,
        });
    }
    let items = split
        .examples
        .par_iter()
        .map(|ex| {
            Ok(Prediction {
                true_class: ex.class_index as usize,
                pred_class: classifier.classify(ex)?,
                snr_db: ex.snr_db,
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Predictions::new(n_classes, items)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Overall,
    Class(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub snr_db: i16,
    pub accuracy: f64,
    pub n_examples: usize,
}

/// Accuracy per SNR, ascending in SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyCurve {
    pub scope: Scope,
    pub points: Vec<CurvePoint>,
}

impl AccuracyCurve {
    pub fn at(&self, snr_db: i16) -> Option<f64> {
        self.points.iter().find(|p| p.snr_db == snr_db).map(|p| p.accuracy)
    }
}

/// Overall curve followed by one curve per class. Points are reported for
/// every SNR in `grid`; a (scope, SNR) cell without examples is left out
/// with a warning.
pub fn accuracy_by_snr(preds: &Predictions, grid: &[i16]) -> (AccuracyCurve, Vec<AccuracyCurve>) {
    // (hits, total) per SNR, overall and per class.
    let mut overall: BTreeMap<i16, (usize, usize)> = BTreeMap::new();
    let mut per_class: Vec<BTreeMap<i16, (usize, usize)>> = vec![BTreeMap::new(); preds.n_classes];
    for p in &preds.items {
        let hit = usize::from(p.true_class == p.pred_class);
        for cell in [
            overall.entry(p.snr_db).or_default(),
            per_class[p.true_class].entry(p.snr_db).or_default(),
        ] {
            cell.0 += hit;
            cell.1 += 1;
        }
    }
    let mut grid: Vec<i16> = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let curve = |scope: Scope, cells: &BTreeMap<i16, (usize, usize)>| {
        let points = grid
            .iter()
            .filter_map(|&snr| match cells.get(&snr) {
                Some(&(hits, total)) if total > 0 => Some(CurvePoint {
                    snr_db: snr,
                    accuracy: hits as f64 / total as f64,
                    n_examples: total,
                }),
                _ => {
                    log::warn!("no examples for {scope:?} at {snr} dB; point omitted");
                    None
                }
            })
            .collect();
        AccuracyCurve { scope, points }
    };
    let classes = per_class
        .iter()
        .enumerate()
        .map(|(c, cells)| curve(Scope::Class(c), cells))
        .collect();
    (curve(Scope::Overall, &overall), classes)
}

/// Smallest SNR from which the curve stays at or above `threshold` at every
/// higher point. `None` when the highest point is already below it.
pub fn sensitivity(curve: &AccuracyCurve, threshold: f64) -> Option<i16> {
    let mut points = curve.points.clone();
    points.sort_by_key(|p| p.snr_db);
    let mut best = None;
    for p in points.iter().rev() {
        if p.accuracy >= threshold {
            best = Some(p.snr_db);
        } else {
            break;
        }
    }
    best
}

/// Square count matrix; row = true class, column = predicted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub snr_db: i16,
    pub n_classes: usize,
    pub counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn get(&self, true_class: usize, pred_class: usize) -> u64 {
        self.counts[true_class * self.n_classes + pred_class]
    }

    pub fn row_sum(&self, true_class: usize) -> u64 {
        self.counts[true_class * self.n_classes..(true_class + 1) * self.n_classes]
            .iter()
            .sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes).map(|i| self.get(i, i)).sum()
    }

    /// Diagonal over total.
    pub fn accuracy(&self) -> f64 {
        self.trace() as f64 / self.total().max(1) as f64
    }
}

pub fn confusion_matrix(preds: &Predictions, snr_db: i16) -> Result<ConfusionMatrix, EvalError> {
    let n = preds.n_classes;
    let mut counts = vec![0u64; n * n];
    let mut seen = false;
    for p in preds.items.iter().filter(|p| p.snr_db == snr_db) {
        counts[p.true_class * n + p.pred_class] += 1;
        seen = true;
    }
    if !seen {
        return Err(EvalError::MissingSnr(snr_db));
    }
    Ok(ConfusionMatrix {
        snr_db,
        n_classes: n,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(points: &[(i16, f64)]) -> AccuracyCurve {
        AccuracyCurve {
            scope: Scope::Overall,
            points: points
                .iter()
                .map(|&(snr_db, accuracy)| CurvePoint {
                    snr_db,
                    accuracy,
                    n_examples: 1,
                })
                .collect(),
        }
    }

    #[test]
    fn sensitivity_constructed_cases() {
        let c = curve(&[(-2, 0.85), (0, 0.91), (2, 0.95), (4, 0.97), (6, 0.99)]);
        assert_eq!(sensitivity(&c, 0.9), Some(0));
        let c = curve(&[(-2, 0.5), (0, 0.6), (2, 0.89)]);
        assert_eq!(sensitivity(&c, 0.9), None);
        let c = curve(&[(-4, 0.92), (-2, 0.88), (0, 0.95), (2, 0.96)]);
        assert_eq!(sensitivity(&c, 0.9), Some(0));
        let c = curve(&[(-4, 0.92), (-2, 0.93)]);
        assert_eq!(sensitivity(&c, 0.9), Some(-4));
        assert_eq!(sensitivity(&curve(&[(10, 0.9)]), 0.9), Some(10));
    }

    #[test]
    fn sensitivity_monotone_under_improvement() {
        let base = [0.3, 0.95, 0.7, 0.92, 0.88, 0.97, 0.99];
        let grid: Vec<i16> = (0..7).map(|i| -6 + 2 * i).collect();
        let mk = |acc: &[f64]| curve(&grid.iter().copied().zip(acc.iter().copied()).collect::<Vec<_>>());
        let s0 = sensitivity(&mk(&base), 0.9);
        for i in 0..base.len() {
            let mut up = base;
            up[i] = 1.0;
            let s1 = sensitivity(&mk(&up), 0.9);
            match (s0, s1) {
                (Some(a), Some(b)) => assert!(b <= a),
                (Some(_), None) => panic!("improvement lost sensitivity"),
                _ => {}
            }
        }
    }

    #[test]
    fn curves_and_confusion_agree() {
        let items: Vec<Prediction> = (0..60)
            .map(|i| Prediction {
                true_class: i % 3,
                pred_class: (i * 7 / 5) % 3,
                snr_db: if i % 2 == 0 { 0 } else { 10 },
            })
            .collect();
        let preds = Predictions::new(3, items).unwrap();
        let (overall, classes) = accuracy_by_snr(&preds, &[0, 10, 20]);
        assert_eq!(overall.points.len(), 2);
        for snr in [0i16, 10] {
            let cm = confusion_matrix(&preds, snr).unwrap();
            assert_eq!(cm.accuracy(), overall.at(snr).unwrap());
            for (c, curve) in classes.iter().enumerate() {
                assert_eq!(curve.at(snr).unwrap(), cm.get(c, c) as f64 / cm.row_sum(c) as f64);
                assert_eq!(cm.row_sum(c), 10);
            }
        }
        assert!(matches!(confusion_matrix(&preds, 20), Err(EvalError::MissingSnr(20))));
    }

    #[test]
    fn out_of_range_labels_rejected() {
        let p = Prediction {
            true_class: 0,
            pred_class: 4,
            snr_db: 0,
        };
        assert!(Predictions::new(3, vec![p]).is_err());
    }
}
