//! Coding-based classifiers over a learned dictionary.
//!
//! * **GCC** codes the query once over the whole dictionary with a ridge
//!   penalty, then scores class `c` by the residual left by the shared and
//!   class-`c` atoms divided by the ℓ1 mass of their coefficients.
//! * **LCC** codes the query separately over each `[D⁰, D^c]` and scores
//!   class `c` by that reconstruction residual.
//!
//! Lower scores win; ties go to the smallest class index. The normal-matrix
//! factorizations are built on first use and cached inside the [`Model`],
//! so a model can be shared across threads once constructed.

mod evaluate;
mod select;

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, DVectorView};

use crate::dictionary::StructuredDictionary;
use crate::error::{Error, Result};
use crate::learning::{Hyperparameters, TrainState};
use crate::linalg::{ridge_gram, spd_factor, SpdFactor};

pub use evaluate::{evaluate, Evaluation};
pub use select::{
    cross_validate, default_lambda_grid, grid_search, select_classifier, GridPoint, GridSearch,
    SelectionReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ClassifierKind {
    #[default]
    Gcc,
    Lcc,
}

impl ClassifierKind {
    pub fn tag(self) -> u8 {
        match self {
            ClassifierKind::Gcc => 0,
            ClassifierKind::Lcc => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(ClassifierKind::Gcc),
            1 => Some(ClassifierKind::Lcc),
            _ => None,
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierKind::Gcc => "gcc",
            ClassifierKind::Lcc => "lcc",
        })
    }
}

impl FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gcc" => Ok(ClassifierKind::Gcc),
            "lcc" => Ok(ClassifierKind::Lcc),
            other => Err(format!("unknown classifier `{other}` (expected gcc or lcc)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Predicted class, 1-based.
    pub label: usize,
    /// Per-class scores; lower is better. GCC blocks without coefficient
    /// mass score `+∞`.
    pub scores: Vec<f64>,
    /// GCC: the code over the whole dictionary. LCC: the code of the winning
    /// class over `[D⁰, D^c]`.
    pub code: DVector<f64>,
}

struct LocalCoder {
    part: DMatrix<f64>,
    factor: SpdFactor,
}

/// A trained dictionary plus the weights it was trained with and the
/// classifier to use by default.
pub struct Model {
    dictionary: StructuredDictionary,
    beta: f64,
    lambda: f64,
    gamma: f64,
    classifier: ClassifierKind,
    global: OnceLock<std::result::Result<SpdFactor, String>>,
    local: OnceLock<std::result::Result<Vec<LocalCoder>, String>>,
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Model")
            .field("dictionary", &self.dictionary)
            .field("beta", &self.beta)
            .field("lambda", &self.lambda)
            .field("gamma", &self.gamma)
            .field("classifier", &self.classifier)
            .finish_non_exhaustive()
    }
}

impl Clone for Model {
    fn clone(&self) -> Self {
        Self {
            dictionary: self.dictionary.clone(),
            beta: self.beta,
            lambda: self.lambda,
            gamma: self.gamma,
            classifier: self.classifier,
            global: OnceLock::new(),
            local: OnceLock::new(),
        }
    }
}

impl Model {
    pub fn new(
        dictionary: StructuredDictionary,
        beta: f64,
        lambda: f64,
        gamma: f64,
        classifier: ClassifierKind,
    ) -> Result<Self> {
        let hp = Hyperparameters {
            beta,
            lambda,
            gamma,
            ..Default::default()
        };
        hp.validate()?;
        Ok(Self {
            dictionary,
            beta,
            lambda,
            gamma,
            classifier,
            global: OnceLock::new(),
            local: OnceLock::new(),
        })
    }

    pub fn from_training(
        state: &TrainState,
        hp: &Hyperparameters,
        classifier: ClassifierKind,
    ) -> Result<Self> {
        Self::new(state.dictionary.clone(), hp.beta, hp.lambda, hp.gamma, classifier)
    }

    pub fn dictionary(&self) -> &StructuredDictionary {
        &self.dictionary
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn classifier(&self) -> ClassifierKind {
        self.classifier
    }

    pub fn set_classifier(&mut self, kind: ClassifierKind) {
        self.classifier = kind;
    }

    pub fn num_classes(&self) -> usize {
        self.dictionary.layout().num_classes()
    }

    /// Builds both cached factorizations now instead of on first query.
    pub fn prepare(&self) -> Result<()> {
        self.global_factor()?;
        self.local_coders()?;
        Ok(())
    }

    fn global_factor(&self) -> Result<&SpdFactor> {
        self.global
            .get_or_init(|| {
                spd_factor(ridge_gram(self.dictionary.atoms(), self.beta), || {
                    "global coding matrix".into()
                })
                .map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|context| Error::Factorization {
                context: context.clone(),
            })
    }

    fn local_coders(&self) -> Result<&[LocalCoder]> {
        self.local
            .get_or_init(|| {
                (1..=self.num_classes())
                    .map(|c| {
                        let part = self
                            .dictionary
                            .combined_part_dictionary(c)
                            .map_err(|e| e.to_string())?;
                        let factor = spd_factor(ridge_gram(&part, self.beta), || {
                            format!("local coding matrix of class {c}")
                        })
                        .map_err(|e| e.to_string())?;
                        Ok(LocalCoder { part, factor })
                    })
                    .collect()
            })
            .as_deref()
            .map_err(|context| Error::Factorization {
                context: context.clone(),
            })
    }

    fn check_query(&self, y: &DVectorView<'_, f64>) -> Result<()> {
        if y.len() != self.dictionary.dim() {
            return Err(Error::ShapeMismatch {
                what: "query feature dimension",
                expected: self.dictionary.dim(),
                found: y.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("query"));
        }
        Ok(())
    }

    /// `(DᵀD + βI)⁻¹ Dᵀ y`.
    pub fn gcc_code(&self, y: DVectorView<'_, f64>) -> Result<DVector<f64>> {
        self.check_query(&y)?;
        let mut code = self.dictionary.atoms().tr_mul(&y);
        self.global_factor()?.solve_mut(&mut code);
        Ok(code)
    }

    pub fn gcc_classify(&self, y: DVectorView<'_, f64>) -> Result<Prediction> {
        let code = self.gcc_code(y)?;
        let d = self.dictionary.atoms();
        let layout = self.dictionary.layout();

        let mut shared_part = y.clone_owned();
        let mut shared_mass = 0.0;
        for k in layout.shared_range() {
            shared_part.axpy(-code[k], &d.column(k), 1.0);
            shared_mass += code[k].abs();
        }
        let scores: Vec<f64> = (1..=layout.num_classes())
            .map(|c| {
                let mut r = shared_part.clone();
                let mut mass = shared_mass;
                for k in layout.block_range(c) {
                    r.axpy(-code[k], &d.column(k), 1.0);
                    mass += code[k].abs();
                }
                if mass == 0.0 {
                    f64::INFINITY
                } else {
                    r.norm_squared() / mass
                }
            })
            .collect();
        if scores.iter().all(|s| s.is_infinite()) {
            return Err(Error::Unclassifiable);
        }
        Ok(Prediction {
            label: argmin(&scores),
            scores,
            code,
        })
    }

    pub fn lcc_classify(&self, y: DVectorView<'_, f64>) -> Result<Prediction> {
        self.check_query(&y)?;
        let mut best: Option<(usize, DVector<f64>)> = None;
        let mut scores = Vec::with_capacity(self.num_classes());
        for (c, coder) in self.local_coders()?.iter().enumerate() {
            let mut code = coder.part.tr_mul(&y);
            coder.factor.solve_mut(&mut code);
            let score = (y - &coder.part * &code).norm_squared();
            if best.is_none() || score < scores[best.as_ref().unwrap().0] {
                best = Some((c, code));
            }
            scores.push(score);
        }
        let (c, code) = best.expect("at least one class");
        Ok(Prediction {
            label: c + 1,
            scores,
            code,
        })
    }

    pub fn classify_with(&self, kind: ClassifierKind, y: DVectorView<'_, f64>) -> Result<Prediction> {
        match kind {
            ClassifierKind::Gcc => self.gcc_classify(y),
            ClassifierKind::Lcc => self.lcc_classify(y),
        }
    }

    /// Classifies with the model's default classifier.
    pub fn classify(&self, y: DVectorView<'_, f64>) -> Result<Prediction> {
        self.classify_with(self.classifier, y)
    }

    /// Classifies every column of `features`.
    pub fn predict(&self, features: &DMatrix<f64>, kind: ClassifierKind) -> Result<Vec<Prediction>> {
        features
            .column_iter()
            .map(|col| self.classify_with(kind, col))
            .collect()
    }
}

/// 1-based index of the smallest score; the first one wins ties.
fn argmin(scores: &[f64]) -> usize {
    let mut best = 0;
    for (c, &s) in scores.iter().enumerate() {
        if s < scores[best] {
            best = c;
        }
    }
    best + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::LabelLayout;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn orthonormal(m: usize, layout: LabelLayout) -> StructuredDictionary {
        let k = layout.num_atoms();
        StructuredDictionary::new(DMatrix::identity(m, k), layout).unwrap()
    }

    fn random_model(seed: u64, m: usize, layout: LabelLayout, beta: f64) -> Model {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = DMatrix::from_fn(m, layout.num_atoms(), |_, _| rng.random::<f64>() - 0.5);
        let d = StructuredDictionary::from_unnormalized(raw, layout).unwrap();
        Model::new(d, beta, 0.0, 0.0, ClassifierKind::Gcc).unwrap()
    }

    #[test]
    fn kind_round_trips() {
        for kind in [ClassifierKind::Gcc, ClassifierKind::Lcc] {
            assert_eq!(ClassifierKind::from_tag(kind.tag()), Some(kind));
            assert_eq!(kind.to_string().parse::<ClassifierKind>().unwrap(), kind);
        }
        assert!(ClassifierKind::from_tag(2).is_none());
        assert!("svm".parse::<ClassifierKind>().is_err());
    }

    #[test]
    fn gcc_code_on_orthonormal_atoms() {
        let model = Model::new(orthonormal(4, LabelLayout::uniform(2, 1, 1).unwrap()), 1.0, 0.0, 0.0, ClassifierKind::Gcc).unwrap();
        let y = DVector::from_column_slice(&[1.0, 0.0, 0.0, 0.0]);
        let x = model.gcc_code(y.as_view()).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15);
        assert_eq!((x[1], x[2]), (0.0, 0.0));
    }

    #[test]
    fn gcc_code_shrinkage_limit() {
        let model = random_model(1, 6, LabelLayout::uniform(2, 2, 1).unwrap(), 1e6);
        let y = DVector::from_fn(6, |i, _| i as f64 - 2.0);
        let x = model.gcc_code(y.as_view()).unwrap();
        let limit = model.dictionary().atoms().tr_mul(&y) / 1e6;
        for (a, b) in x.iter().zip(limit.iter()) {
            assert!((a - b).abs() <= 1e-4 * b.abs());
        }
    }

    #[test]
    fn gcc_code_satisfies_normal_equations() {
        let model = random_model(2, 8, LabelLayout::uniform(3, 2, 2).unwrap(), 0.05);
        let d = model.dictionary().atoms();
        let y = DVector::from_fn(8, |i, _| (i as f64).sin());
        let x = model.gcc_code(y.as_view()).unwrap();
        let resid = ridge_gram(d, 0.05) * &x - d.tr_mul(&y);
        assert!(resid.norm() < 1e-10);
    }

    #[test]
    fn gcc_single_class_always_one() {
        let model = random_model(3, 5, LabelLayout::uniform(1, 3, 0).unwrap(), 0.1);
        let y = DVector::from_fn(5, |i, _| i as f64 + 1.0);
        let p = model.gcc_classify(y.as_view()).unwrap();
        assert_eq!(p.label, 1);
        assert!(p.scores[0].is_finite());
    }

    #[test]
    fn gcc_orthonormal_block_wins() {
        let layout = LabelLayout::uniform(3, 2, 0).unwrap();
        let model = Model::new(orthonormal(6, layout), 1e-6, 0.0, 0.0, ClassifierKind::Gcc).unwrap();
        let mut y = DVector::zeros(6);
        y[3] = 1.0; // atom 3 belongs to class 2
        let p = model.gcc_classify(y.as_view()).unwrap();
        assert_eq!(p.label, 2);
        assert!(p.scores[0].is_infinite() && p.scores[2].is_infinite());
        // closed form: code 1/(1+β) on atom 3; residual (β/(1+β))², mass 1/(1+β)
        let beta: f64 = 1e-6;
        let expect = (beta / (1.0 + beta)).powi(2) * (1.0 + beta);
        assert!((p.scores[1] - expect).abs() < 1e-18);
    }

    #[test]
    fn gcc_zero_query_is_unclassifiable() {
        let model = random_model(4, 5, LabelLayout::uniform(2, 2, 0).unwrap(), 0.1);
        let y = DVector::zeros(5);
        assert!(matches!(model.gcc_classify(y.as_view()), Err(Error::Unclassifiable)));
    }

    #[test]
    fn lcc_exact_span() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let model = random_model(6, 10, LabelLayout::uniform(3, 2, 1).unwrap(), 1e-10);
        let part = model.dictionary().combined_part_dictionary(2).unwrap();
        let coef = DVector::from_fn(3, |_, _| rng.random::<f64>() + 0.5);
        let y = &part * coef;
        let p = model.lcc_classify(y.as_view()).unwrap();
        assert_eq!(p.label, 2);
        assert!(p.scores[1] < 1e-12);
    }

    #[test]
    fn lcc_orthonormal_scores() {
        let layout = LabelLayout::uniform(3, 2, 0).unwrap();
        let beta = 0.25;
        let model = Model::new(orthonormal(6, layout), beta, 0.0, 0.0, ClassifierKind::Lcc).unwrap();
        let mut y = DVector::zeros(6);
        y[1] = 2.0;
        let p = model.lcc_classify(y.as_view()).unwrap();
        assert_eq!(p.label, 1);
        let shrink = (beta / (1.0 + beta)).powi(2) * 4.0;
        assert!((p.scores[0] - shrink).abs() < 1e-14);
        assert!((p.scores[1] - 4.0).abs() < 1e-14);
        assert!((p.scores[2] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn ties_go_to_the_smallest_class() {
        assert_eq!(argmin(&[1.0, 1.0, 2.0]), 1);
        assert_eq!(argmin(&[3.0, 1.0, 1.0]), 2);
        assert_eq!(argmin(&[f64::INFINITY, f64::INFINITY, 0.5]), 3);
        // zero query: every LCC score is 0, class 1 wins
        let model = random_model(7, 4, LabelLayout::uniform(3, 1, 0).unwrap(), 0.1);
        let p = model.lcc_classify(DVector::zeros(4).as_view()).unwrap();
        assert_eq!(p.label, 1);
    }

    #[test]
    fn query_validation() {
        let model = random_model(8, 4, LabelLayout::uniform(2, 1, 0).unwrap(), 0.1);
        let short = DVector::zeros(3);
        assert!(matches!(model.gcc_classify(short.as_view()), Err(Error::ShapeMismatch { .. })));
        let mut bad = DVector::zeros(4);
        bad[0] = f64::INFINITY;
        assert!(matches!(model.lcc_classify(bad.as_view()), Err(Error::NonFinite(_))));
    }

    #[test]
    fn scale_invariance_and_lcc_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let model = random_model(10, 12, LabelLayout::uniform(4, 2, 2).unwrap(), 0.02);
        for _ in 0..100 {
            let y = DVector::from_fn(12, |_, _| rng.random::<f64>() - 0.5);
            let g = model.gcc_classify(y.as_view()).unwrap().label;
            let l = model.lcc_classify(y.as_view()).unwrap();
            for s in [0.1, 1.0, 10.0] {
                let ys = &y * s;
                assert_eq!(model.gcc_classify(ys.as_view()).unwrap().label, g);
                assert_eq!(model.lcc_classify(ys.as_view()).unwrap().label, l.label);
            }
            let energy = y.norm_squared();
            assert!(l.scores.iter().all(|&s| (0.0..=energy).contains(&s)));
        }
    }

    #[test]
    fn cached_and_fresh_models_agree() {
        let model = random_model(11, 7, LabelLayout::uniform(2, 2, 1).unwrap(), 0.1);
        model.prepare().unwrap();
        let fresh = model.clone();
        let y = DVector::from_fn(7, |i, _| (i as f64).cos());
        assert_eq!(model.gcc_classify(y.as_view()).unwrap(), fresh.gcc_classify(y.as_view()).unwrap());
        assert_eq!(model.lcc_classify(y.as_view()).unwrap(), fresh.lcc_classify(y.as_view()).unwrap());
    }
}
