use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::ops::{Index, IndexMut};
use std::path::Path;

use crate::error::{dim_err, Error, Result};

/// Real matrix stored column-major.
///
/// Constructors taking external data reject non-finite entries. Results of
/// arithmetic are not re-checked.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Whether an operand enters a product as-is or transposed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    N,
    T,
}

impl DenseMatrix {
    /// Builds a matrix from column-major data.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(dim_err(
                "DenseMatrix::new",
                format!("{} entries for a {rows}x{cols} matrix", data.len()),
            ));
        }
        let m = Self { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    /// Builds a matrix from row slices, which must all have the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.as_ref().len());
        let mut out = Self::zeros(m, n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(dim_err(
                    "DenseMatrix::from_rows",
                    format!("row {i} has {} entries, expected {n}", row.len()),
                ));
            }
            for (j, &v) in row.iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out.check_finite()?;
        Ok(out)
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_raw(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// `rows × cols` matrix with the leading diagonal set to `diag`.
    pub fn from_diag_rect(rows: usize, cols: usize, diag: &[f64]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, &d) in diag.iter().enumerate().take(rows.min(cols)) {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        Self::from_diag_rect(diag.len(), diag.len(), diag)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self::from_raw(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Column-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Mutable access to two distinct columns.
    pub(crate) fn col_pair_mut(&mut self, i: usize, j: usize) -> (&mut [f64], &mut [f64]) {
        assert!(i < j);
        let m = self.rows;
        let (head, tail) = self.data.split_at_mut(j * m);
        (&mut head[i * m..(i + 1) * m], &mut tail[..m])
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(idx) => Err(Error::NonFinite {
                row: idx % self.rows.max(1),
                col: idx / self.rows.max(1),
            }),
            None => Ok(()),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Columns `start..end` as a new matrix.
    pub fn columns(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.cols, "column range out of bounds");
        Self::from_raw(
            self.rows,
            end - start,
            self.data[start * self.rows..end * self.rows].to_vec(),
        )
    }

    /// Rows `start..end` as a new matrix.
    pub fn row_block(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.rows, "row range out of bounds");
        Self::from_fn(end - start, self.cols, |i, j| self[(start + i, j)])
    }

    /// Horizontal concatenation `[M_1 M_2 … M_k]`.
    pub fn hcat(blocks: &[&DenseMatrix]) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Ok(Self::zeros(0, 0));
        };
        let rows = first.rows;
        let mut data = Vec::new();
        let mut cols = 0;
        for b in blocks {
            if b.rows != rows {
                return Err(dim_err(
                    "DenseMatrix::hcat",
                    format!("block with {} rows, expected {rows}", b.rows),
                ));
            }
            data.extend_from_slice(&b.data);
            cols += b.cols;
        }
        Ok(Self::from_raw(rows, cols, data))
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| self.col(j).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|v| alpha * v).collect())
    }

    pub fn scale_mut(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    /// `self += alpha * x`.
    pub fn axpy(&mut self, alpha: f64, x: &DenseMatrix) {
        assert_eq!(self.dims(), x.dims(), "axpy dimension mismatch");
        for (y, &xv) in self.data.iter_mut().zip(&x.data) {
            *y += alpha * xv;
        }
    }

    pub fn add(&self, other: &DenseMatrix) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &DenseMatrix) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// `Σ coeffs[i] · terms[i]`. All terms must share dimensions.
    pub fn linear_combination(coeffs: &[f64], terms: &[DenseMatrix]) -> Result<Self> {
        if coeffs.len() != terms.len() || terms.is_empty() {
            return Err(dim_err(
                "linear_combination",
                format!("{} coefficients for {} terms", coeffs.len(), terms.len()),
            ));
        }
        let (m, n) = terms[0].dims();
        let mut out = Self::zeros(m, n);
        for (c, t) in coeffs.iter().zip(terms) {
            if t.dims() != (m, n) {
                return Err(dim_err(
                    "linear_combination",
                    format!("term is {:?}, expected {:?}", t.dims(), (m, n)),
                ));
            }
            out.axpy(*c, t);
        }
        Ok(out)
    }

    /// `self · rhs`. Panics on inner-dimension mismatch.
    pub fn matmul(&self, rhs: &DenseMatrix) -> Self {
        product(self, Op::N, rhs, Op::N)
    }

    /// `selfᵀ · rhs` without forming the transpose.
    pub fn t_matmul(&self, rhs: &DenseMatrix) -> Self {
        product(self, Op::T, rhs, Op::N)
    }

    /// `self · rhsᵀ` without forming the transpose.
    pub fn matmul_t(&self, rhs: &DenseMatrix) -> Self {
        product(self, Op::N, rhs, Op::T)
    }

    /// Writes the matrix as CSV, one matrix row per line. Values use the
    /// shortest representation that parses back to the identical `f64`.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::with_capacity(self.data.len() * 24);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if j > 0 {
                    s.push(',');
                }
                write!(s, "{:?}", self[(i, j)]).expect("writing to a String");
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }

    /// Parses the CSV format written by [`DenseMatrix::to_csv_string`].
    /// Blank lines and lines starting with `#` are ignored.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let row = trimmed
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: idx + 1,
                        message: format!("{tok:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::Parse {
                        line: idx + 1,
                        message: format!("{} columns, expected {}", row.len(), first.len()),
                    });
                }
            }
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i + j * self.rows]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i + j * self.rows]
    }
}

fn op_dims(a: &DenseMatrix, op: Op) -> (usize, usize) {
    match op {
        Op::N => (a.rows, a.cols),
        Op::T => (a.cols, a.rows),
    }
}

fn op_strides(a: &DenseMatrix, op: Op) -> (isize, isize) {
    let ld = a.rows as isize;
    match op {
        Op::N => (1, ld),
        Op::T => (ld, 1),
    }
}

/// `op(a) · op(b)` as a new matrix.
pub fn product(a: &DenseMatrix, opa: Op, b: &DenseMatrix, opb: Op) -> DenseMatrix {
    let (m, _) = op_dims(a, opa);
    let (_, n) = op_dims(b, opb);
    let mut c = DenseMatrix::zeros(m, n);
    gemm(1.0, a, opa, b, opb, 0.0, &mut c);
    c
}

/// `c ← alpha · op(a) · op(b) + beta · c`.
pub fn gemm(alpha: f64, a: &DenseMatrix, opa: Op, b: &DenseMatrix, opb: Op, beta: f64, c: &mut DenseMatrix) {
    let (m, k) = op_dims(a, opa);
    let (kb, n) = op_dims(b, opb);
    assert_eq!(k, kb, "inner dimensions differ: {k} vs {kb}");
    assert_eq!(c.dims(), (m, n), "output has the wrong shape");
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        c.scale_mut(beta);
        return;
    }
    let (rsa, csa) = op_strides(a, opa);
    let (rsb, csb) = op_strides(b, opb);
    // SAFETY: pointers and strides describe the full extents of `a`, `b` and
    // `c`, which are owned, correctly sized and non-aliasing (`c` is &mut).
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.data.as_ptr(),
            rsa,
            csa,
            b.data.as_ptr(),
            rsb,
            csb,
            beta,
            c.data.as_mut_ptr(),
            1,
            m as isize,
        );
    }
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
