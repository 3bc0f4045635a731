//! Structured dictionary learning for classification.
//!
//! A dictionary is split into atoms owned by one class and atoms shared by
//! all of them. Training alternates closed-form ridge coding, with a
//! penalty on coefficients that land on other classes' atoms and a graph
//! term pulling same-class codes together, and K-SVD-style atom updates.
//! Queries are then labeled by either a global or a per-class local coder.
//!
//! ```
//! use nalgebra::DMatrix;
//! use structdict::{classify::{ClassifierKind, Model}, dataset::LabeledDataset,
//!                  dictionary::LabelLayout, learning::{train, Hyperparameters}};
//!
//! let y = DMatrix::from_fn(4, 6, |i, j| if i == j / 3 { 1.0 } else { 0.1 * (i + j) as f64 });
//! let data = LabeledDataset::new(y, vec![1, 1, 1, 2, 2, 2], 2)?.normalize_columns()?;
//! let layout = LabelLayout::uniform(2, 2, 0)?;
//! let hp = Hyperparameters { max_iters: 5, ..Default::default() };
//! let state = train(&data, &layout, &hp)?;
//! let model = Model::from_training(&state, &hp, ClassifierKind::Gcc)?;
//! assert_eq!(model.classify(data.features().column(0).into())?.label, 1);
//! # Ok::<(), structdict::Error>(())
//! ```

pub mod classify;
pub mod dataset;
pub mod dictionary;
pub mod error;
pub mod inspect;
pub mod laplacian;
pub mod learning;
pub mod linalg;
pub mod model_io;

pub use error::{Error, Result};

// The guide's code listings run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/datasets.md")]
    mod datasets {}
    #[doc = include_str!("../../../book/src/dictionary.md")]
    mod dictionary {}
    #[doc = include_str!("../../../book/src/laplacian.md")]
    mod laplacian {}
    #[doc = include_str!("../../../book/src/learning.md")]
    mod learning {}
    #[doc = include_str!("../../../book/src/classification.md")]
    mod classification {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/file_formats.md")]
    mod file_formats {}
}
