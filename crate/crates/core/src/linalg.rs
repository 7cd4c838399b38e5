//! Dense small-matrix linear algebra.
//!
//! Matrices here are tiny (rarely above 12×12), so everything is a plain
//! row-major `Vec<f64>` with value semantics. The routines favour robustness
//! over speed: cyclic Jacobi for symmetric spectra, partial pivoting for
//! solves and determinants.

use std::fmt;
use std::ops::{Deref, Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

/// Monotonic vector norms admitted throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

impl NormKind {
    pub const ALL: [NormKind; 3] = [NormKind::L1, NormKind::L2, NormKind::Linf];

    pub fn as_str(self) -> &'static str {
        match self {
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
            NormKind::Linf => "linf",
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l1" => Ok(NormKind::L1),
            "l2" => Ok(NormKind::L2),
            "linf" | "l-inf" | "inf" => Ok(NormKind::Linf),
            other => Err(Error::InvalidInput(format!(
                "unknown norm `{other}` (expected l1, l2 or linf)"
            ))),
        }
    }
}

/// A finite real vector.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    /// Builds a vector, rejecting empty input and non-finite entries.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("vector must be non-empty".into()));
        }
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "vector entry {i} is not finite"
            )));
        }
        Ok(Self(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    /// Canonical basis vector `e_i` (0-based `i`).
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Self(v)
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<f64>) -> Self {
        Self(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        vector_norm(&self.0, kind)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Deref for DenseVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for DenseVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl From<DenseVector> for Vec<f64> {
    fn from(v: DenseVector) -> Self {
        v.0
    }
}

/// A finite real matrix in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "matrix entry ({}, {}) is not finite",
                i / cols,
                i % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|row| row.len() != c) {
            return Err(Error::InvalidInput(format!(
                "row {bad} has {} entries, expected {c}",
                rows[bad].len()
            )));
        }
        Self::new(r, c, rows.concat())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[&[f64]]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, |v| v.len());
        if cols.iter().any(|v| v.len() != r) {
            return Err(Error::InvalidInput("columns have unequal lengths".into()));
        }
        let mut m = Self::zeros(r.max(1), c.max(1));
        if r == 0 || c == 0 {
            return Err(Error::InvalidInput(
                "matrix dimensions must be positive".into(),
            ));
        }
        for (j, col) in cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        if !m.is_finite() {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(l, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(A + Aᵀ) / 2`.
    pub fn symmetric_part(&self) -> Result<Self> {
        require_square(self)?;
        Ok(Self::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self[(i, j)] + self[(j, i)])
        }))
    }

    /// Submatrix picking the given (0-based) rows and columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

fn require_square(a: &DenseMatrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            a.rows, a.cols
        )))
    }
}

pub fn vector_norm(v: &[f64], kind: NormKind) -> f64 {
    match kind {
        NormKind::L1 => v.iter().map(|x| x.abs()).sum(),
        NormKind::L2 => {
            // scaled to avoid overflow for huge entries
            let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if scale == 0.0 || !scale.is_finite() {
                return scale;
            }
            scale * v.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt()
        }
        NormKind::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, column `i` pairs with `values[i]`.
    pub vectors: DenseMatrix,
}

pub fn sym_eigen(a: &DenseMatrix) -> Result<SymEigen> {
    require_square(a)?;
    let n = a.rows;
    let norm = a.frobenius();
    let asym = DenseMatrix::from_fn(n, n, |i, j| a[(i, j)] - a[(j, i)]).frobenius();
    if asym > tol::SYMMETRY * norm.max(f64::MIN_POSITIVE) && asym > 0.0 {
        return Err(Error::InvalidInput(format!(
            "matrix is not symmetric (|A - A^T|_F = {asym:e})"
        )));
    }
    let mut m = a.symmetric_part()?;
    let mut v = DenseMatrix::identity(n);
    let threshold = tol::JACOBI_OFF_DIAGONAL * norm;

    for _ in 0..tol::JACOBI_MAX_SWEEPS {
        let off = off_diagonal_norm(&m);
        if off <= threshold || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut m, &mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymEigen { values, vectors })
}

fn off_diagonal_norm(m: &DenseMatrix) -> f64 {
    let n = m.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)] * m[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Applies the Jacobi rotation `Jᵀ M J` annihilating `m[p][q]` and accumulates `V J`.
fn rotate(m: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let n = m.rows;
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn sym_eigenvalues(a: &DenseMatrix) -> Result<DenseVector> {
    Ok(DenseVector(sym_eigen(a)?.values))
}

/// Matrix measure (logarithmic norm) induced by `kind`.
///
/// The L2 measure is the top eigenvalue of the symmetric part.
pub fn matrix_measure(a: &DenseMatrix, kind: NormKind) -> Result<f64> {
    require_square(a)?;
    let n = a.rows;
    Ok(match kind {
        NormKind::L1 => (0..n)
            .map(|j| {
                a[(j, j)]
                    + (0..n)
                        .filter(|&i| i != j)
                        .map(|i| a[(i, j)].abs())
                        .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max),
        NormKind::Linf => (0..n)
            .map(|i| {
                a[(i, i)]
                    + (0..n)
                        .filter(|&j| j != i)
                        .map(|j| a[(i, j)].abs())
                        .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max),
        NormKind::L2 => {
            let values = sym_eigen(&a.symmetric_part()?)?.values;
            values[values.len() - 1]
        }
    })
}

/// Operator norm `max |Ay| / |y|` induced by `kind`; `A` may be rectangular.
pub fn induced_norm(a: &DenseMatrix, kind: NormKind) -> Result<f64> {
    Ok(match kind {
        NormKind::L1 => (0..a.cols)
            .map(|j| (0..a.rows).map(|i| a[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max),
        NormKind::Linf => (0..a.rows)
            .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max),
        NormKind::L2 => {
            let gram = a.transpose().matmul(a)?;
            let top = *sym_eigen(&gram)?.values.last().unwrap_or(&0.0);
            top.max(0.0).sqrt()
        }
    })
}

/// Lower norm-equivalence constant `min |Ay| / |y|` of a square matrix,
/// i.e. `1 / |A⁻¹|`; zero when `A` is singular.
pub fn lower_bound_constant(a: &DenseMatrix, kind: NormKind) -> Result<f64> {
    require_square(a)?;
    match kind {
        NormKind::L2 => {
            let gram = a.transpose().matmul(a)?;
            let low = sym_eigen(&gram)?.values[0];
            Ok(low.max(0.0).sqrt())
        }
        _ => match inverse(a) {
            Ok(inv) => Ok(1.0 / induced_norm(&inv, kind)?),
            Err(Error::SingularMatrix) => Ok(0.0),
            Err(e) => Err(e),
        },
    }
}

struct Lu {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

fn lu_decompose(a: &DenseMatrix) -> Result<Lu> {
    require_square(a)?;
    let n = a.rows;
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let scales: Vec<f64> = (0..n)
        .map(|i| lu.row(i).iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .collect();
    for col in 0..n {
        let (piv, piv_abs) =
            (col..n)
                .map(|r| (r, lu[(r, col)].abs()))
                .fold(
                    (col, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        let scale = scales[perm[piv]];
        if scale == 0.0 || piv_abs / scale < tol::SINGULAR_PIVOT {
            return Err(Error::SingularMatrix);
        }
        if piv != col {
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(piv, j)];
                lu[(piv, j)] = tmp;
            }
            perm.swap(col, piv);
        }
        let p = lu[(col, col)];
        for r in col + 1..n {
            let factor = lu[(r, col)] / p;
            lu[(r, col)] = factor;
            if factor != 0.0 {
                for j in col + 1..n {
                    lu[(r, j)] -= factor * lu[(col, j)];
                }
            }
        }
    }
    Ok(Lu { lu, perm })
}

impl Lu {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] -= self.lu[(i, j)] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= self.lu[(i, j)] * y[j];
            }
            y[i] /= self.lu[(i, i)];
        }
        y
    }
}

/// Solves `A x = b` by partial-pivoting elimination.
pub fn solve_small(a: &DenseMatrix, b: &[f64]) -> Result<DenseVector> {
    require_square(a)?;
    if b.len() != a.rows {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has length {}, matrix is {}x{}",
            b.len(),
            a.rows,
            a.cols
        )));
    }
    let x = lu_decompose(a)?.solve(b);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix);
    }
    Ok(DenseVector(x))
}

pub fn inverse(a: &DenseMatrix) -> Result<DenseMatrix> {
    let lu = lu_decompose(a)?;
    let n = a.rows;
    let mut inv = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        for (i, v) in lu.solve(&e).into_iter().enumerate() {
            inv[(i, j)] = v;
        }
    }
    if !inv.is_finite() {
        return Err(Error::SingularMatrix);
    }
    Ok(inv)
}

/// Determinant by partial-pivoting elimination; exact zero columns give 0.
pub fn determinant(a: &DenseMatrix) -> Result<f64> {
    require_square(a)?;
    let n = a.rows;
    let mut m = a.clone();
    let mut det = 1.0;
    for col in 0..n {
        let (piv, piv_abs) =
            (col..n)
                .map(|r| (r, m[(r, col)].abs()))
                .fold(
                    (col, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if piv_abs == 0.0 {
            return Ok(0.0);
        }
        if piv != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(piv, j)];
                m[(piv, j)] = tmp;
            }
            det = -det;
        }
        let p = m[(col, col)];
        det *= p;
        for r in col + 1..n {
            let factor = m[(r, col)] / p;
            if factor != 0.0 {
                for j in col + 1..n {
                    m[(r, j)] -= factor * m[(col, j)];
                }
            }
        }
    }
    Ok(det)
}

/// Numerical rank by full-pivoting elimination with a relative pivot threshold.
pub fn numerical_rank(a: &DenseMatrix, threshold: f64) -> usize {
    let mut m = a.clone();
    let (rows, cols) = (m.rows, m.cols);
    let scale = m.max_abs();
    if scale == 0.0 {
        return 0;
    }
    let mut rank = 0;
    let mut used_rows = vec![false; rows];
    let mut used_cols = vec![false; cols];
    for _ in 0..rows.min(cols) {
        let mut best = (0, 0, 0.0);
        for i in (0..rows).filter(|&i| !used_rows[i]) {
            for j in (0..cols).filter(|&j| !used_cols[j]) {
                if m[(i, j)].abs() > best.2 {
                    best = (i, j, m[(i, j)].abs());
                }
            }
        }
        if best.2 <= threshold * scale {
            break;
        }
        let (pi, pj, _) = best;
        used_rows[pi] = true;
        used_cols[pj] = true;
        rank += 1;
        for i in (0..rows).filter(|&i| !used_rows[i]) {
            let factor = m[(i, pj)] / m[(pi, pj)];
            for j in 0..cols {
                m[(i, j)] -= factor * m[(pi, j)];
            }
        }
    }
    rank
}
