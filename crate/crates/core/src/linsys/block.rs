use nalgebra::{DMatrix, DMatrixView};

use super::LinsysError;
use crate::real::Real;

/// Square-block CSR matrix: row `i` stores blocks `(i, col_idx[k])` for
/// `k in row_ptr[i]..row_ptr[i + 1]`, each dense and row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSparseMatrix<T> {
    block_size: usize,
    n_block_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> BlockSparseMatrix<T> {
    /// Assemble from `(row, col, block)` triplets; repeated positions are
    /// summed.
    pub fn from_blocks<I>(
        n_block_rows: usize,
        n_block_cols: usize,
        block_size: usize,
        blocks: I,
    ) -> Self
    where
        I: IntoIterator<Item = (usize, usize, DMatrix<T>)>,
    {
        let mut rows: Vec<Vec<(usize, DMatrix<T>)>> = vec![Vec::new(); n_block_rows];
        for (i, j, b) in blocks {
            assert!(
                i < n_block_rows && j < n_block_cols,
                "block ({i}, {j}) out of range"
            );
            assert_eq!(
                b.shape(),
                (block_size, block_size),
                "block ({i}, {j}) has wrong shape"
            );
            match rows[i].iter_mut().find(|(c, _)| *c == j) {
                Some((_, acc)) => *acc += b,
                None => rows[i].push((j, b)),
            }
        }
        let bs2 = block_size * block_size;
        let mut row_ptr = Vec::with_capacity(n_block_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|(c, _)| *c);
            for (c, b) in row {
                col_idx.push(c);
                values.reserve(bs2);
                for r in 0..block_size {
                    for k in 0..block_size {
                        values.push(b[(r, k)]);
                    }
                }
            }
            row_ptr.push(col_idx.len());
        }
        BlockSparseMatrix {
            block_size,
            n_block_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Block-diagonal identity.
    pub fn identity(n_blocks: usize, block_size: usize) -> Self {
        Self::from_blocks(
            n_blocks,
            n_blocks,
            block_size,
            (0..n_blocks).map(|i| (i, i, DMatrix::identity(block_size, block_size))),
        )
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn n_block_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn n_block_cols(&self) -> usize {
        self.n_block_cols
    }

    pub fn nrows(&self) -> usize {
        self.n_block_rows() * self.block_size
    }

    pub fn ncols(&self) -> usize {
        self.n_block_cols * self.block_size
    }

    pub fn n_blocks(&self) -> usize {
        self.col_idx.len()
    }

    /// Column indices of the blocks stored in block row `i`.
    pub fn row_columns(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn max_blocks_per_row(&self) -> usize {
        (0..self.n_block_rows())
            .map(|i| self.row_columns(i).len())
            .max()
            .unwrap_or(0)
    }

    fn block_at(&self, k: usize) -> DMatrixView<'_, T> {
        let bs = self.block_size;
        // stored row-major, nalgebra views are column-major: view the transpose
        DMatrixView::from_slice(&self.values[k * bs * bs..(k + 1) * bs * bs], bs, bs)
    }

    /// Copy of block `(i, j)`, if stored.
    pub fn block(&self, i: usize, j: usize) -> Option<DMatrix<T>> {
        let start = self.row_ptr[i];
        self.row_columns(i)
            .iter()
            .position(|&c| c == j)
            .map(|p| self.block_at(start + p).transpose())
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>, LinsysError> {
        let mut y = vec![T::zero(); self.nrows()];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    pub fn matvec_into(&self, x: &[T], y: &mut [T]) -> Result<(), LinsysError> {
        if x.len() != self.ncols() {
            return Err(LinsysError::Dimension {
                expected: self.ncols(),
                got: x.len(),
            });
        }
        if y.len() != self.nrows() {
            return Err(LinsysError::Dimension {
                expected: self.nrows(),
                got: y.len(),
            });
        }
        let bs = self.block_size;
        for i in 0..self.n_block_rows() {
            let yi = &mut y[i * bs..(i + 1) * bs];
            yi.iter_mut().for_each(|v| *v = T::zero());
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let xj = &x[self.col_idx[k] * bs..(self.col_idx[k] + 1) * bs];
                let blk = &self.values[k * bs * bs..(k + 1) * bs * bs];
                for (r, out) in yi.iter_mut().enumerate() {
                    let row = &blk[r * bs..(r + 1) * bs];
                    let mut acc = T::zero();
                    for (a, b) in row.iter().zip(xj) {
                        acc += *a * *b;
                    }
                    *out += acc;
                }
            }
        }
        Ok(())
    }

    /// Dense copy, for tests and small oracles.
    pub fn to_dense(&self) -> DMatrix<T> {
        let bs = self.block_size;
        let mut m = DMatrix::zeros(self.nrows(), self.ncols());
        for i in 0..self.n_block_rows() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let b = self.block_at(k).transpose();
                m.view_mut((i * bs, j * bs), (bs, bs)).copy_from(&b);
            }
        }
        m
    }

    /// Largest `|A(i,j) - A(j,i)|` over stored blocks (missing mirror blocks
    /// count as zero).
    pub fn symmetry_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n_block_rows() {
            for &j in self.row_columns(i) {
                let a = self.block(i, j).unwrap();
                let b = self
                    .block(j, i)
                    .unwrap_or_else(|| DMatrix::zeros(self.block_size, self.block_size));
                worst = worst.max((a - b.transpose()).amax());
            }
        }
        worst
    }

    /// Diagonal blocks, zero where none is stored.
    pub fn diagonal_blocks(&self) -> Vec<DMatrix<T>> {
        (0..self.n_block_rows())
            .map(|i| {
                self.block(i, i)
                    .unwrap_or_else(|| DMatrix::zeros(self.block_size, self.block_size))
            })
            .collect()
    }
}
