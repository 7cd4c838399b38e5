//! Multiplicative and additive compound matrices, wedge products and k-volumes.
//!
//! Rows and columns of a k-th compound are indexed by the increasing k-subsets
//! of `[1, n]` in lexicographic order. [`IndexSet::rank`] and
//! [`IndexSet::unrank`] are the single source of truth for that ordering.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{determinant, vector_norm, DenseMatrix, DenseVector, NormKind};
use crate::tol;

/// `C(n, k)` via Pascal's rule, with an overflow check.
pub fn binomial(n: usize, k: usize) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    if n > tol::MAX_COMPOUND_DIM {
        return Err(Error::InvalidInput(format!(
            "dimension {n} exceeds the supported maximum {}",
            tol::MAX_COMPOUND_DIM
        )));
    }
    let mut row = vec![0u64; k + 1];
    row[0] = 1;
    for i in 1..=n {
        for j in (1..=k.min(i)).rev() {
            row[j] = row[j]
                .checked_add(row[j - 1])
                .ok_or_else(|| Error::InvalidInput(format!("C({n}, {k}) overflows")))?;
        }
    }
    Ok(row[k])
}

fn binom_usize(n: usize, k: usize) -> usize {
    // callers have validated n <= MAX_COMPOUND_DIM
    binomial(n, k).unwrap_or(0) as usize
}

fn check_order(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "order k={k} must satisfy 1 <= k <= {n}"
        )));
    }
    if n > tol::MAX_COMPOUND_DIM {
        return Err(Error::InvalidInput(format!(
            "dimension {n} exceeds the supported maximum {}",
            tol::MAX_COMPOUND_DIM
        )));
    }
    Ok(())
}

/// An increasing k-subset of `[1, n]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexSet {
    n: usize,
    members: Vec<usize>,
}

impl IndexSet {
    /// Validates 1-based, strictly increasing members.
    pub fn new(n: usize, members: Vec<usize>) -> Result<Self> {
        check_order(members.len(), n)?;
        if members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "members {members:?} are not strictly increasing"
            )));
        }
        if members[0] < 1 || members[members.len() - 1] > n {
            return Err(Error::InvalidInput(format!(
                "members {members:?} must lie in [1, {n}]"
            )));
        }
        Ok(Self { n, members })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.members.len()
    }

    /// 1-based members.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// 1-based lexicographic rank in `[1, C(n, k)]`.
    pub fn rank(&self) -> usize {
        let zero: Vec<usize> = self.members.iter().map(|m| m - 1).collect();
        rank0(self.n, &zero) + 1
    }

    /// Inverse of [`IndexSet::rank`].
    pub fn unrank(n: usize, k: usize, rank: usize) -> Result<Self> {
        check_order(k, n)?;
        let total = binom_usize(n, k);
        if rank < 1 || rank > total {
            return Err(Error::InvalidInput(format!(
                "rank {rank} outside [1, {total}]"
            )));
        }
        let mut remaining = rank - 1;
        let mut members = Vec::with_capacity(k);
        let mut next = 0;
        for i in 0..k {
            let mut v = next;
            loop {
                // sets whose i-th member is v
                let count = binom_usize(n - v - 1, k - i - 1);
                if remaining < count {
                    break;
                }
                remaining -= count;
                v += 1;
            }
            members.push(v + 1);
            next = v + 1;
        }
        Ok(Self { n, members })
    }
}

/// 0-based lexicographic rank of a 0-based increasing subset of `[0, n)`.
fn rank0(n: usize, set: &[usize]) -> usize {
    let k = set.len();
    let mut r = 0;
    let mut start = 0;
    for (i, &c) in set.iter().enumerate() {
        for v in start..c {
            r += binom_usize(n - v - 1, k - i - 1);
        }
        start = c + 1;
    }
    r
}

/// Iterator over 0-based increasing k-subsets of `[0, n)` in lexicographic order.
struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            current: if k <= n { Some((0..k).collect()) } else { None },
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

/// All k-subsets of `[1, n]` in lexicographic order.
pub fn lex_index_sets(k: usize, n: usize) -> Result<Vec<IndexSet>> {
    check_order(k, n)?;
    Ok(Combinations::new(n, k)
        .map(|c| IndexSet {
            n,
            members: c.into_iter().map(|m| m + 1).collect(),
        })
        .collect())
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Determinant of a small square block.
///
/// Orders 1 and 2 use the closed forms. Larger blocks go through pivoted
/// elimination on whichever of `S`, `Sᵀ` is lexicographically smaller, so
/// minors of `A` and `Aᵀ` agree bit for bit.
fn minor(s: &DenseMatrix) -> f64 {
    match s.rows() {
        1 => s[(0, 0)],
        2 => s[(0, 0)] * s[(1, 1)] - s[(0, 1)] * s[(1, 0)],
        _ => {
            let t = s.transpose();
            let canon = if lex_cmp(t.as_slice(), s.as_slice()).is_lt() {
                &t
            } else {
                s
            };
            determinant(canon).unwrap_or(0.0)
        }
    }
}

/// k-th multiplicative compound: all order-k minors of `A`, lexicographically indexed.
pub fn mult_compound(a: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    let (n, m) = (a.rows(), a.cols());
    check_order(k, n.min(m))?;
    check_order(k, n.max(m))?;
    if k == 1 {
        return Ok(a.clone());
    }
    let row_sets: Vec<Vec<usize>> = Combinations::new(n, k).collect();
    let col_sets: Vec<Vec<usize>> = Combinations::new(m, k).collect();
    let mut out = DenseMatrix::zeros(row_sets.len(), col_sets.len());
    for (i, rs) in row_sets.iter().enumerate() {
        for (j, cs) in col_sets.iter().enumerate() {
            out[(i, j)] = minor(&a.select(rs, cs));
        }
    }
    Ok(out)
}

/// k-th additive compound, built entrywise.
///
/// Diagonal entry for `κ`: the sum of `a_ll` over `l ∈ κ`. When the row set
/// differs from the column set only by `l` being replaced with `m`, the entry is
/// `(-1)^s a_lm` where `s` counts the shared members strictly between `l` and
/// `m`. All other entries vanish.
pub fn add_compound(a: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "additive compound needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    check_order(k, n)?;
    if k == 1 {
        return Ok(a.clone());
    }
    let r = binom_usize(n, k);
    let mut out = DenseMatrix::zeros(r, r);
    let mut in_set = vec![false; n];
    for (i, set) in Combinations::new(n, k).enumerate() {
        in_set.iter_mut().for_each(|b| *b = false);
        for &l in &set {
            in_set[l] = true;
        }
        out[(i, i)] = set.iter().map(|&l| a[(l, l)]).sum();
        for (pos, &l) in set.iter().enumerate() {
            for m in (0..n).filter(|&m| !in_set[m]) {
                let coef = a[(l, m)];
                if coef == 0.0 {
                    continue;
                }
                let (lo, hi) = if l < m { (l, m) } else { (m, l) };
                let between = set.iter().filter(|&&v| v > lo && v < hi).count();
                let mut col_set = set.clone();
                col_set.remove(pos);
                let ins = col_set.partition_point(|&v| v < m);
                col_set.insert(ins, m);
                let j = rank0(n, &col_set);
                out[(i, j)] = if between % 2 == 0 { coef } else { -coef };
            }
        }
    }
    Ok(out)
}

/// A grade-k element of the exterior algebra over `R^n`, stored in lexicographic coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WedgeVector {
    pub n: usize,
    pub k: usize,
    pub coeffs: DenseVector,
}

impl WedgeVector {
    pub fn norm(&self, kind: NormKind) -> f64 {
        vector_norm(&self.coeffs, kind)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }
}

fn validate_vectors<V: AsRef<[f64]>>(vectors: &[V]) -> Result<(usize, usize)> {
    let k = vectors.len();
    let n = vectors.first().map_or(0, |v| v.as_ref().len());
    if k == 0 || n == 0 {
        return Err(Error::InvalidInput(
            "wedge needs at least one non-empty vector".into(),
        ));
    }
    if let Some(bad) = vectors.iter().position(|v| v.as_ref().len() != n) {
        return Err(Error::InvalidInput(format!(
            "vector {bad} has dimension {}, expected {n}",
            vectors[bad].as_ref().len()
        )));
    }
    if vectors
        .iter()
        .any(|v| v.as_ref().iter().any(|x| !x.is_finite()))
    {
        return Err(Error::InvalidInput("wedge inputs must be finite".into()));
    }
    check_order(k, n)?;
    Ok((k, n))
}

/// `a¹ ∧ … ∧ aᵏ`, the column of order-k minors of `[a¹ … aᵏ]`.
pub fn wedge<V: AsRef<[f64]>>(vectors: &[V]) -> Result<WedgeVector> {
    let (k, n) = validate_vectors(vectors)?;
    // Sort the factors so that permuting them changes only the sign, exactly.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| lex_cmp(vectors[i].as_ref(), vectors[j].as_ref()));
    let mut parity = false;
    let mut seen = vec![false; k];
    for start in 0..k {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = order[i];
            len += 1;
        }
        if len % 2 == 0 {
            parity = !parity;
        }
    }
    let cols: Vec<&[f64]> = order.iter().map(|&i| vectors[i].as_ref()).collect();
    let mat = DenseMatrix::from_columns(&cols)?;
    let all: Vec<usize> = (0..k).collect();
    let coeffs = Combinations::new(n, k)
        .map(|rows| {
            let m = minor(&mat.select(&rows, &all));
            if parity {
                -m
            } else {
                m
            }
        })
        .collect();
    Ok(WedgeVector {
        n,
        k,
        coeffs: DenseVector::from_vec_unchecked(coeffs),
    })
}

/// Volume of the parallelotope spanned by the vectors: `|a¹ ∧ … ∧ aᵏ|₂`.
pub fn k_volume<V: AsRef<[f64]>>(vectors: &[V]) -> Result<f64> {
    Ok(wedge(vectors)?.norm(NormKind::L2))
}
