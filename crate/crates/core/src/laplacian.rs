//! Normalized Laplacians of per-class complete graphs.
//!
//! Every class forms a complete subgraph with unit edge weights, so its
//! normalized Laplacian has `1` on the diagonal and `-1/(n-1)` everywhere
//! else. Only those two scalars are stored; all products run in `O(n)` per
//! row. A single-vertex class has no edges and its Laplacian is the zero
//! operator.

use std::ops::Range;

use nalgebra::{DMatrix, DMatrixView};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassLaplacian {
    size: usize,
}

impl ClassLaplacian {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::ShapeMismatch {
                what: "class Laplacian size",
                expected: 1,
                found: 0,
            });
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Diagonal entry: 1, or 0 for a single vertex.
    pub fn diag(&self) -> f64 {
        if self.size > 1 {
            1.0
        } else {
            0.0
        }
    }

    /// Off-diagonal entry `-1/(n-1)`; zero for a single vertex.
    pub fn off_diag(&self) -> f64 {
        if self.size > 1 {
            -1.0 / (self.size - 1) as f64
        } else {
            0.0
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag()
        } else {
            self.off_diag()
        }
    }

    /// `fᵀ L f`, evaluated as `n/(n-1) · Σ (f_i - mean)²`.
    pub fn quad_form(&self, f: &[f64]) -> Result<f64> {
        if f.len() != self.size {
            return Err(Error::ShapeMismatch {
                what: "quadratic form argument length",
                expected: self.size,
                found: f.len(),
            });
        }
        if self.size == 1 {
            return Ok(0.0);
        }
        let n = self.size as f64;
        let mean = f.iter().sum::<f64>() / n;
        let centered: f64 = f.iter().map(|v| (v - mean) * (v - mean)).sum();
        Ok(n / (n - 1.0) * centered)
    }

    /// `tr(X L Xᵀ)` for a class block with one column per vertex.
    pub fn block_variation(&self, block: DMatrixView<'_, f64>) -> Result<f64> {
        self.check_cols(block.ncols())?;
        if self.size == 1 {
            return Ok(0.0);
        }
        let n = self.size as f64;
        let mean = block.column_mean();
        let centered: f64 = block
            .column_iter()
            .map(|col| (col - &mean).norm_squared())
            .sum();
        Ok(n / (n - 1.0) * centered)
    }

    /// `X (L - I)`: column `j` is `-1/(n-1) · Σ_{i≠j} x_i`, or `-X` when `n = 1`.
    pub fn rhs_term(&self, block: DMatrixView<'_, f64>) -> Result<DMatrix<f64>> {
        self.check_cols(block.ncols())?;
        if self.size == 1 {
            return Ok(-block.clone_owned());
        }
        let sum = block.column_sum();
        let scale = self.off_diag();
        let mut out = DMatrix::zeros(block.nrows(), block.ncols());
        for (j, mut col) in out.column_iter_mut().enumerate() {
            col.copy_from(&((&sum - block.column(j)) * scale));
        }
        Ok(out)
    }

    fn check_cols(&self, cols: usize) -> Result<()> {
        if cols != self.size {
            return Err(Error::ShapeMismatch {
                what: "class block column count",
                expected: self.size,
                found: cols,
            });
        }
        Ok(())
    }
}

/// Block-diagonal Laplacian over all training samples, one block per class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLaplacian {
    blocks: Vec<ClassLaplacian>,
}

impl BlockLaplacian {
    pub fn from_class_sizes(sizes: &[usize]) -> Result<Self> {
        let blocks = sizes
            .iter()
            .map(|&n| ClassLaplacian::new(n))
            .collect::<Result<_>>()?;
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[ClassLaplacian] {
        &self.blocks
    }

    /// Total vertex count `N`.
    pub fn size(&self) -> usize {
        self.blocks.iter().map(|b| b.size).sum()
    }

    pub fn ranges(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.blocks
            .iter()
            .map(|b| {
                let r = start..start + b.size;
                start = r.end;
                r
            })
            .collect()
    }

    /// `tr(X L Xᵀ)`, the total variation of all code rows over the graph.
    pub fn total_variation(&self, codes: &DMatrix<f64>) -> Result<f64> {
        if codes.ncols() != self.size() {
            return Err(Error::ShapeMismatch {
                what: "code matrix column count",
                expected: self.size(),
                found: codes.ncols(),
            });
        }
        self.blocks
            .iter()
            .zip(self.ranges())
            .map(|(b, r)| b.block_variation(codes.columns(r.start, r.len())))
            .sum()
    }
}
