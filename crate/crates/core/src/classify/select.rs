//! Stratified k-fold comparison of the two classifiers, and grid search
//! over `(β, λ, γ)` on top of it. A fresh dictionary is trained for every
//! fold; both classifiers are scored against the same fold model.

use super::{evaluate, ClassifierKind, Model};
use crate::dataset::{split, LabeledDataset, SplitMode, SplitSpec};
use crate::dictionary::LabelLayout;
use crate::error::Result;
use crate::learning::{train, Hyperparameters};

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    /// Per-fold `(gcc, lcc)` accuracies.
    pub folds: Vec<(f64, f64)>,
    pub gcc_mean: f64,
    pub lcc_mean: f64,
    /// Higher mean accuracy; GCC on ties.
    pub selected: ClassifierKind,
}

impl SelectionReport {
    pub fn from_folds(folds: Vec<(f64, f64)>) -> Self {
        let n = folds.len().max(1) as f64;
        let gcc_mean = folds.iter().map(|f| f.0).sum::<f64>() / n;
        let lcc_mean = folds.iter().map(|f| f.1).sum::<f64>() / n;
        let selected = if lcc_mean > gcc_mean {
            ClassifierKind::Lcc
        } else {
            ClassifierKind::Gcc
        };
        Self {
            folds,
            gcc_mean,
            lcc_mean,
            selected,
        }
    }

    pub fn best_accuracy(&self) -> f64 {
        self.gcc_mean.max(self.lcc_mean)
    }
}

/// Runs k-fold cross-validation and reports both classifiers per fold.
pub fn cross_validate(
    data: &LabeledDataset,
    layout: &LabelLayout,
    hp: &Hyperparameters,
    folds: usize,
) -> Result<SelectionReport> {
    let parts = split(data, &SplitSpec::new(SplitMode::KFold(folds), hp.seed))?;
    let mut scores = Vec::with_capacity(parts.len());
    for part in &parts {
        let state = train(&part.train, layout, hp)?;
        let model = Model::from_training(&state, hp, ClassifierKind::Gcc)?;
        let gcc = evaluate(&model, &part.test, ClassifierKind::Gcc)?.accuracy;
        let lcc = evaluate(&model, &part.test, ClassifierKind::Lcc)?.accuracy;
        scores.push((gcc, lcc));
    }
    Ok(SelectionReport::from_folds(scores))
}

pub fn select_classifier(
    data: &LabeledDataset,
    layout: &LabelLayout,
    hp: &Hyperparameters,
    folds: usize,
) -> Result<ClassifierKind> {
    Ok(cross_validate(data, layout, hp, folds)?.selected)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub beta: f64,
    pub lambda: f64,
    pub gamma: f64,
}

impl GridPoint {
    pub fn apply(&self, base: &Hyperparameters) -> Hyperparameters {
        Hyperparameters {
            beta: self.beta,
            lambda: self.lambda,
            gamma: self.gamma,
            ..base.clone()
        }
    }

    /// Cartesian product, β outermost.
    pub fn product(betas: &[f64], lambdas: &[f64], gammas: &[f64]) -> Vec<GridPoint> {
        let mut out = Vec::with_capacity(betas.len() * lambdas.len() * gammas.len());
        for &beta in betas {
            for &lambda in lambdas {
                for &gamma in gammas {
                    out.push(GridPoint { beta, lambda, gamma });
                }
            }
        }
        out
    }
}

/// `{2e-1, 2, 2e1, 2e2, 2e3}`.
pub fn default_lambda_grid() -> Vec<f64> {
    vec![2e-1, 2.0, 2e1, 2e2, 2e3]
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearch {
    pub results: Vec<(GridPoint, SelectionReport)>,
    pub best: usize,
}

impl GridSearch {
    pub fn best_point(&self) -> GridPoint {
        self.results[self.best].0
    }

    pub fn best_classifier(&self) -> ClassifierKind {
        self.results[self.best].1.selected
    }
}

/// Cross-validates every grid point. The best point has the highest
/// accuracy under its own selected classifier; earlier points win ties.
pub fn grid_search(
    data: &LabeledDataset,
    layout: &LabelLayout,
    base: &Hyperparameters,
    grid: &[GridPoint],
    folds: usize,
) -> Result<GridSearch> {
    assert!(!grid.is_empty(), "grid must not be empty");
    let mut results = Vec::with_capacity(grid.len());
    let mut best = 0;
    for (i, point) in grid.iter().enumerate() {
        let report = cross_validate(data, layout, &point.apply(base), folds)?;
        if i > 0 && report.best_accuracy() > results_best(&results, best) {
            best = i;
        }
        results.push((*point, report));
    }
    Ok(GridSearch { results, best })
}

fn results_best(results: &[(GridPoint, SelectionReport)], best: usize) -> f64 {
    results[best].1.best_accuracy()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_select_gcc() {
        let r = SelectionReport::from_folds(vec![(0.8, 0.8), (0.9, 0.9)]);
        assert_eq!(r.selected, ClassifierKind::Gcc);
        let r = SelectionReport::from_folds(vec![(0.8, 0.9), (0.9, 0.9)]);
        assert_eq!(r.selected, ClassifierKind::Lcc);
    }

    #[test]
    fn grid_product_order() {
        let g = GridPoint::product(&[1.0, 2.0], &[3.0], &[4.0, 5.0]);
        assert_eq!(g.len(), 4);
        assert_eq!(g[1], GridPoint { beta: 1.0, lambda: 3.0, gamma: 5.0 });
        assert_eq!(g[2].beta, 2.0);
        assert_eq!(default_lambda_grid(), vec![0.2, 2.0, 20.0, 200.0, 2000.0]);
    }
}
