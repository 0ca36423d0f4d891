//! Dense matrices over `F_q`, differentials and their normal form.
//!
//! Elimination always pivots on the first nonzero entry in column order, so
//! kernel and image bases (and with them every [`NormalForm`]) depend only on
//! the input matrix.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::finite_field::{FieldElement, FieldError, FieldSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {left_rows}x{left_cols} against {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("operands live over different fields")]
    FieldMismatch,
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("matrix does not square to zero")]
    NotADifferential,
    #[error("matrix is singular")]
    Singular,
    #[error("entry list has length {got}, expected {expected}")]
    BadShape { expected: usize, got: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A dense row-major matrix over `F_q`.
#[derive(Clone, PartialEq, Eq)]
pub struct MatrixGF {
    rows: usize,
    cols: usize,
    entries: Vec<FieldElement>,
    spec: FieldSpec,
}

impl MatrixGF {
    pub fn zeros(spec: &FieldSpec, rows: usize, cols: usize) -> Self {
        MatrixGF {
            rows,
            cols,
            entries: vec![FieldElement::ZERO; rows * cols],
            spec: spec.clone(),
        }
    }

    pub fn identity(spec: &FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(spec, n, n);
        for i in 0..n {
            m.set(i, i, FieldElement::ONE);
        }
        m
    }

    pub fn from_entries(
        spec: &FieldSpec,
        rows: usize,
        cols: usize,
        entries: Vec<FieldElement>,
    ) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::BadShape {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        if entries.iter().any(|a| a.index() >= spec.order()) {
            return Err(LinalgError::Field(FieldError::InvalidElement(
                entries.iter().map(|a| a.index()).collect(),
            )));
        }
        Ok(MatrixGF {
            rows,
            cols,
            entries,
            spec: spec.clone(),
        })
    }

    /// Builds a matrix over the prime subfield from integer rows.
    pub fn from_int_rows(spec: &FieldSpec, rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        let entries = rows
            .iter()
            .flat_map(|r| r.iter().map(|&v| spec.from_int(v)))
            .collect();
        MatrixGF {
            rows: rows.len(),
            cols,
            entries,
            spec: spec.clone(),
        }
    }

    /// Matrix whose columns are the given vectors (each of length `rows`).
    pub fn from_columns(spec: &FieldSpec, rows: usize, columns: &[Vec<FieldElement>]) -> Self {
        let mut m = Self::zeros(spec, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, &a) in col.iter().enumerate() {
                m.set(i, j, a);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.entries
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: FieldElement) {
        self.entries[i * self.cols + j] = value;
    }

    pub fn column(&self, j: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|a| a.is_zero())
    }

    pub fn mul(&self, other: &MatrixGF) -> Result<MatrixGF, LinalgError> {
        if self.spec != other.spec {
            return Err(LinalgError::FieldMismatch);
        }
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let f = &self.spec;
        let mut out = MatrixGF::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * out.cols + j;
                    out.entries[idx] = f.add(out.entries[idx], f.mul(a, other.get(k, j)));
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(v.len(), self.cols);
        let f = &self.spec;
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(FieldElement::ZERO, |acc, k| {
                    f.add(acc, f.mul(self.get(i, k), v[k]))
                })
            })
            .collect()
    }

    /// Reduced row echelon form together with its pivot columns.
    pub fn echelon(&self) -> Echelon {
        let f = &self.spec;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(found) = (row..m.rows).find(|&i| !m.get(i, col).is_zero()) else {
                continue;
            };
            m.swap_rows(row, found);
            let scale = f.inv(m.get(row, col)).expect("pivot is nonzero");
            m.scale_row(row, scale);
            for i in 0..m.rows {
                let factor = m.get(i, col);
                if i != row && !factor.is_zero() {
                    m.add_row_multiple(i, row, f.neg(factor));
                }
            }
            pivots.push(col);
            row += 1;
        }
        Echelon { reduced: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.echelon().pivots.len()
    }

    /// `cols - rank` vectors spanning the right kernel, one per free column.
    pub fn kernel_basis(&self) -> Vec<Vec<FieldElement>> {
        let f = &self.spec;
        let Echelon { reduced, pivots } = self.echelon();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        (0..self.cols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![FieldElement::ZERO; self.cols];
                v[free] = FieldElement::ONE;
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(reduced.get(row, free));
                }
                v
            })
            .collect()
    }

    /// The pivot columns of the matrix itself; they form a basis of the image.
    pub fn image_basis(&self) -> Vec<Vec<FieldElement>> {
        self.echelon()
            .pivots
            .iter()
            .map(|&c| self.column(c))
            .collect()
    }

    pub fn inverse(&self) -> Result<MatrixGF, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare(self.rows, self.cols));
        }
        let n = self.rows;
        let mut aug = MatrixGF::zeros(&self.spec, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, n + i, FieldElement::ONE);
        }
        let Echelon { reduced, pivots } = aug.echelon();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(LinalgError::Singular);
        }
        let mut inv = MatrixGF::zeros(&self.spec, n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, reduced.get(i, n + j));
            }
        }
        Ok(inv)
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// Selects columns in the given order.
    pub fn permute_columns(&self, order: &[usize]) -> MatrixGF {
        let mut out = MatrixGF::zeros(&self.spec, self.rows, order.len());
        for (dst, &src) in order.iter().enumerate() {
            for i in 0..self.rows {
                out.set(i, dst, self.get(i, src));
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.entries.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn scale_row(&mut self, row: usize, by: FieldElement) {
        for j in 0..self.cols {
            let idx = row * self.cols + j;
            self.entries[idx] = self.spec.mul(self.entries[idx], by);
        }
    }

    // row[target] += by * row[source]
    fn add_row_multiple(&mut self, target: usize, source: usize, by: FieldElement) {
        for j in 0..self.cols {
            let s = self.entries[source * self.cols + j];
            if s.is_zero() {
                continue;
            }
            let idx = target * self.cols + j;
            self.entries[idx] = self.spec.add(self.entries[idx], self.spec.mul(by, s));
        }
    }
}

impl fmt::Debug for MatrixGF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MatrixGF {}x{} over {}", self.rows, self.cols, self.spec)?;
        for i in 0..self.rows {
            let row: Vec<u32> = (0..self.cols).map(|j| self.get(i, j).index()).collect();
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    spec: FieldSpec,
    entries: Vec<Vec<u32>>,
}

impl Serialize for MatrixGF {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows,
            cols: self.cols,
            spec: self.spec.clone(),
            entries: self.entries.iter().map(|&a| self.spec.coeffs(a)).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MatrixGF {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        let entries = repr
            .entries
            .iter()
            .map(|c| repr.spec.from_coeffs(c))
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        MatrixGF::from_entries(&repr.spec, repr.rows, repr.cols, entries)
            .map_err(serde::de::Error::custom)
    }
}

/// Result of Gauss-Jordan elimination.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub reduced: MatrixGF,
    pub pivots: Vec<usize>,
}

/// A square matrix `D` with `D^2 = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Differential {
    matrix: MatrixGF,
    rank: usize,
}

impl Differential {
    pub fn new(matrix: MatrixGF) -> Result<Self, LinalgError> {
        if !matrix.is_square() {
            return Err(LinalgError::NotSquare(matrix.rows, matrix.cols));
        }
        if !matrix.mul(&matrix)?.is_zero() {
            return Err(LinalgError::NotADifferential);
        }
        let rank = matrix.rank();
        debug_assert!(2 * rank <= matrix.rows);
        Ok(Differential { matrix, rank })
    }

    /// The zero-padded single-block differential: identity `I_m` in the
    /// top-right corner of a `(2m + r)`-square matrix, zero elsewhere. In the
    /// basis order (image, homology complement, preimages) every differential
    /// with `m`-dimensional image is conjugate to this one.
    pub fn canonical(spec: &FieldSpec, m: usize, r: usize) -> Self {
        let n = 2 * m + r;
        let mut matrix = MatrixGF::zeros(spec, n, n);
        for i in 0..m {
            matrix.set(i, m + r + i, FieldElement::ONE);
        }
        Differential { matrix, rank: m }
    }

    pub fn matrix(&self) -> &MatrixGF {
        &self.matrix
    }

    pub fn into_matrix(self) -> MatrixGF {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Dimension of `ker D / im D`, i.e. `n - 2 rank(D)`.
    pub fn homology_dim(&self) -> usize {
        self.dim() - 2 * self.rank
    }

    pub fn normal_form(&self) -> NormalForm {
        normal_form(self)
    }
}

impl Serialize for Differential {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.matrix.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Differential {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let matrix = MatrixGF::deserialize(deserializer)?;
        Differential::new(matrix).map_err(serde::de::Error::custom)
    }
}

/// Column order used by [`NormalForm::basis`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockLayout {
    /// `e_1..e_m, f_1..f_r, e'_1..e'_m`: image basis, homology complement,
    /// preimages. The differential becomes a single top-right identity block.
    ImageHomologyPreimage,
    /// `e_1, e'_1, ..., e_m, e'_m, f_1..f_r`: `m` upper 2x2 Jordan blocks
    /// followed by `r` zero 1x1 blocks.
    Jordan,
}

/// Change of basis bringing a differential to its canonical block shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalForm {
    pub r: usize,
    pub m: usize,
    /// Columns are the new basis vectors written in the old basis.
    pub basis: MatrixGF,
    pub layout: BlockLayout,
}

impl NormalForm {
    /// The canonical matrix this normal form conjugates to.
    pub fn target(&self) -> MatrixGF {
        let spec = self.basis.spec();
        match self.layout {
            BlockLayout::ImageHomologyPreimage => {
                Differential::canonical(spec, self.m, self.r).into_matrix()
            }
            BlockLayout::Jordan => jordan_matrix(spec, self.m, self.r),
        }
    }

    /// The same basis reordered into the 2x2 Jordan-block layout.
    pub fn to_jordan_layout(&self) -> NormalForm {
        let order = match self.layout {
            BlockLayout::Jordan => (0..self.basis.cols()).collect(),
            BlockLayout::ImageHomologyPreimage => jordan_layout_permutation(self.m, self.r),
        };
        NormalForm {
            r: self.r,
            m: self.m,
            basis: self.basis.permute_columns(&order),
            layout: BlockLayout::Jordan,
        }
    }

    /// Checks `P^{-1} D P == target` exactly.
    pub fn conjugates(&self, d: &Differential) -> bool {
        let Ok(inv) = self.basis.inverse() else {
            return false;
        };
        inv.mul(d.matrix())
            .and_then(|x| x.mul(&self.basis))
            .map(|x| x == self.target())
            .unwrap_or(false)
    }
}

/// Positions, in the image/homology/preimage layout, of the basis vectors
/// listed in Jordan order `e_1, e'_1, ..., e_m, e'_m, f_1, ..., f_r`.
pub fn jordan_layout_permutation(m: usize, r: usize) -> Vec<usize> {
    (0..m)
        .flat_map(|i| [i, m + r + i])
        .chain(m..m + r)
        .collect()
}

fn jordan_matrix(spec: &FieldSpec, m: usize, r: usize) -> MatrixGF {
    let n = 2 * m + r;
    let mut out = MatrixGF::zeros(spec, n, n);
    for i in 0..m {
        out.set(2 * i, 2 * i + 1, FieldElement::ONE);
    }
    out
}

/// Builds the basis `e_1..e_m, f_1..f_r, e'_1..e'_m` of a differential.
///
/// The `e_i` are the pivot columns `D u_{j_i}` of `D`, so the standard basis
/// vectors `u_{j_i}` already solve `D e'_i = e_i` and no second solve is
/// needed. The `f_j` are the kernel vectors that stay independent when
/// appended after the `e_i`.
pub fn normal_form(d: &Differential) -> NormalForm {
    let a = d.matrix();
    let spec = a.spec();
    let n = d.dim();
    let pivots = a.echelon().pivots;
    let m = pivots.len();

    let image: Vec<Vec<FieldElement>> = pivots.iter().map(|&c| a.column(c)).collect();
    let preimages: Vec<Vec<FieldElement>> = pivots
        .iter()
        .map(|&c| {
            let mut u = vec![FieldElement::ZERO; n];
            u[c] = FieldElement::ONE;
            u
        })
        .collect();

    let kernel = a.kernel_basis();
    let mut stacked = image.clone();
    stacked.extend(kernel.iter().cloned());
    let chosen = MatrixGF::from_columns(spec, n, &stacked).echelon().pivots;
    // image vectors are independent, so they are exactly the first m pivots
    debug_assert!(chosen.iter().take(m).copied().eq(0..m));
    let complement: Vec<Vec<FieldElement>> =
        chosen[m..].iter().map(|&c| stacked[c].clone()).collect();
    let r = complement.len();
    debug_assert_eq!(2 * m + r, n);

    let columns: Vec<Vec<FieldElement>> = image
        .into_iter()
        .chain(complement)
        .chain(preimages)
        .collect();
    NormalForm {
        r,
        m,
        basis: MatrixGF::from_columns(spec, n, &columns),
        layout: BlockLayout::ImageHomologyPreimage,
    }
}
