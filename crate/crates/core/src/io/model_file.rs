use serde::{Deserialize, Serialize};

use crate::dynamics::{DomainSpec, SystemModel};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::systems::{linear, linear_invariant};

/// Largest state dimension accepted from a file.
pub const MAX_DIM: usize = 30;
const DEFAULT_HALF_WIDTH: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxBounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

/// A linear model `ẋ = Ax` read from JSON, optionally with a constant
/// splitting `(H, Q)` whose `span Q` is flow-invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n: usize,
    /// Row-major.
    #[serde(rename = "A", alias = "a")]
    pub a: Vec<Vec<f64>>,
    #[serde(
        rename = "H",
        alias = "h",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub h: Option<Vec<Vec<f64>>>,
    #[serde(
        rename = "Q",
        alias = "q",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<BoxBounds>,
}

fn check_matrix(field: &str, m: &[Vec<f64>], rows: usize, cols: Option<usize>) -> Result<usize> {
    if m.len() != rows {
        return Err(Error::Config(format!(
            "model file: `{field}` must have {rows} rows, got {}",
            m.len()
        )));
    }
    let width = cols.unwrap_or_else(|| m.first().map_or(0, Vec::len));
    for (i, row) in m.iter().enumerate() {
        if row.len() != width {
            return Err(Error::Config(format!(
                "model file: `{field}` row {} must have {width} entries, got {}",
                i + 1,
                row.len()
            )));
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!(
                "model file: `{field}[{}][{}]` is not finite",
                i + 1,
                j + 1
            )));
        }
    }
    Ok(width)
}

fn check_bound(field: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::Config(format!(
            "model file: `{field}` must have {n} entries, got {}",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config(format!(
            "model file: `{field}` has a non-finite entry"
        )));
    }
    Ok(())
}

impl ModelFile {
    /// Shape and finiteness checks; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 || n > MAX_DIM {
            return Err(Error::Config(format!(
                "model file: `n` must lie in [1, {MAX_DIM}], got {n}"
            )));
        }
        check_matrix("A", &self.a, n, Some(n))?;
        match (&self.h, &self.q) {
            (None, None) => {}
            (Some(h), Some(q)) => {
                let hc = check_matrix("H", h, n, None)?;
                let qc = check_matrix("Q", q, n, None)?;
                if hc == 0 || hc + qc != n {
                    return Err(Error::Config(format!(
                        "model file: `H` and `Q` must have column counts summing to n={n} with H nonempty, got {hc} and {qc}"
                    )));
                }
            }
            _ => {
                return Err(Error::Config(
                    "model file: `H` and `Q` must be given together".into(),
                ))
            }
        }
        if let Some(d) = &self.domain {
            check_bound("domain.lo", &d.lo, n)?;
            check_bound("domain.hi", &d.hi, n)?;
            if let Some(i) = (0..n).find(|&i| d.lo[i] >= d.hi[i]) {
                return Err(Error::Config(format!(
                    "model file: `domain` needs lo < hi, violated in coordinate {}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Builds `linear-invariant` when `H`, `Q` are present and `linear` otherwise.
    pub fn build(&self) -> Result<SystemModel> {
        self.validate()?;
        let a = DenseMatrix::from_rows(&self.a)?;
        let domain = match &self.domain {
            Some(d) => DomainSpec::new_box(d.lo.clone(), d.hi.clone())?,
            None => DomainSpec::cube(self.n, DEFAULT_HALF_WIDTH)?,
        };
        match (&self.h, &self.q) {
            (Some(h), Some(q)) => linear_invariant(
                a,
                DenseMatrix::from_rows(h)?,
                DenseMatrix::from_rows(q)?,
                Some(domain),
            ),
            _ => linear(a, domain),
        }
    }
}

/// Parses and validates a model file.
pub fn parse_model_file(text: &str) -> Result<ModelFile> {
    let mf: ModelFile =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("model file: {e}")))?;
    mf.validate()?;
    Ok(mf)
}
