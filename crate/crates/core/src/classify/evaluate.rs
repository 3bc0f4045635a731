use super::{ClassifierKind, Model, Prediction};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    /// `None` for classes absent from the test set.
    pub per_class_accuracy: Vec<Option<f64>>,
    /// `confusion[i][j]`: samples of class `i + 1` predicted as `j + 1`.
    pub confusion: Vec<Vec<usize>>,
    /// In the dataset's canonical column order.
    pub predictions: Vec<Prediction>,
}

impl Evaluation {
    /// Tallies `(true, predicted)` 1-based label pairs over `classes` classes.
    pub fn from_labels(
        truth: &[usize],
        predictions: Vec<Prediction>,
        classes: usize,
    ) -> Result<Self> {
        if truth.len() != predictions.len() {
            return Err(Error::ShapeMismatch {
                what: "prediction count",
                expected: truth.len(),
                found: predictions.len(),
            });
        }
        let mut confusion = vec![vec![0usize; classes]; classes];
        for (&t, p) in truth.iter().zip(&predictions) {
            if t == 0 || t > classes || p.label == 0 || p.label > classes {
                return Err(Error::LabelMismatch(format!(
                    "label pair ({t}, {}) outside 1..={classes}",
                    p.label
                )));
            }
            confusion[t - 1][p.label - 1] += 1;
        }
        let correct: usize = (0..classes).map(|i| confusion[i][i]).sum();
        let total = truth.len();
        let per_class_accuracy = confusion
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let n: usize = row.iter().sum();
                (n > 0).then(|| row[i] as f64 / n as f64)
            })
            .collect();
        Ok(Self {
            accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
            per_class_accuracy,
            confusion,
            predictions,
        })
    }
}

pub fn evaluate(model: &Model, test: &LabeledDataset, kind: ClassifierKind) -> Result<Evaluation> {
    if test.dim() != model.dictionary().dim() {
        return Err(Error::ShapeMismatch {
            what: "feature dimension M",
            expected: model.dictionary().dim(),
            found: test.dim(),
        });
    }
    if test.num_classes() > model.num_classes() {
        return Err(Error::LabelMismatch(format!(
            "test set has {} classes, model has {}",
            test.num_classes(),
            model.num_classes()
        )));
    }
    let predictions = model.predict(test.features(), kind)?;
    Evaluation::from_labels(test.labels(), predictions, model.num_classes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn pred(label: usize) -> Prediction {
        Prediction {
            label,
            scores: vec![],
            code: DVector::zeros(0),
        }
    }

    #[test]
    fn perfect_predictions() {
        let truth = [1, 2, 2, 3];
        let e = Evaluation::from_labels(&truth, truth.iter().map(|&l| pred(l)).collect(), 3).unwrap();
        assert_eq!(e.accuracy, 1.0);
        assert_eq!(e.confusion, vec![vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, 1]]);
        assert!(e.per_class_accuracy.iter().all(|a| *a == Some(1.0)));
    }

    #[test]
    fn everything_predicted_as_class_one() {
        let truth = [1, 2, 3, 3];
        let e = Evaluation::from_labels(&truth, vec![pred(1); 4], 3).unwrap();
        assert_eq!(e.accuracy, 0.25);
        for row in &e.confusion {
            assert_eq!(row[1..].iter().sum::<usize>(), 0);
        }
        assert_eq!(e.confusion.iter().map(|r| r[0]).sum::<usize>(), 4);
        assert_eq!(e.per_class_accuracy, vec![Some(1.0), Some(0.0), Some(0.0)]);
    }

    #[test]
    fn label_errors() {
        assert!(Evaluation::from_labels(&[1, 4], vec![pred(1), pred(1)], 3).is_err());
        assert!(Evaluation::from_labels(&[1], vec![pred(1), pred(1)], 3).is_err());
    }
}
