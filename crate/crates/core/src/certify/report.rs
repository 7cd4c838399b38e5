use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::NormKind;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Certified,
    Falsified,
    Inconclusive,
}

impl Verdict {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Certified => 0,
            Self::Falsified => 4,
            Self::Inconclusive => 5,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Certified => "Certified",
            Self::Falsified => "Falsified",
            Self::Inconclusive => "Inconclusive",
        })
    }
}

/// Outcome of a checker, relative to the sample set it was run on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub check_name: String,
    pub verdict: Verdict,
    pub constants: BTreeMap<String, f64>,
    pub residuals: BTreeMap<String, f64>,
    pub samples_used: usize,
    pub norm: NormKind,
    /// Point at which a stated inequality failed, when there is one.
    pub witness: Option<Vec<f64>>,
    pub notes: String,
}

impl CertificateReport {
    pub fn new(check_name: &str, norm: NormKind) -> Self {
        Self {
            check_name: check_name.to_string(),
            verdict: Verdict::Inconclusive,
            constants: BTreeMap::new(),
            residuals: BTreeMap::new(),
            samples_used: 0,
            norm,
            witness: None,
            notes: String::new(),
        }
    }

    pub fn constant(&mut self, name: &str, value: f64) {
        self.constants.insert(name.to_string(), value);
    }

    pub fn residual(&mut self, name: &str, value: f64) {
        self.residuals.insert(name.to_string(), value);
    }

    pub fn note(&mut self, text: impl AsRef<str>) {
        if !self.notes.is_empty() {
            self.notes.push('\n');
        }
        self.notes.push_str(text.as_ref());
    }

    pub fn falsify(&mut self, witness: Vec<f64>, why: impl AsRef<str>) {
        self.verdict = Verdict::Falsified;
        self.note(format!("witness {witness:?}: {}", why.as_ref()));
        self.witness = Some(witness);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Least-squares line through `(t, ln value)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    /// In-window samples skipped for being at or below the underflow floor.
    pub floor_hits: usize,
    pub samples: usize,
}

/// `[(1 − fraction)·t_end, t_end]`.
pub fn trailing_window(t_end: f64, fraction: f64) -> (f64, f64) {
    (t_end * (1.0 - fraction), t_end)
}

/// Fits `ln value ≈ intercept + rate·t` over samples with `t` inside `window`.
pub fn fit_decay(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    let (lo, hi) = window;
    let eps = 1e-9 * hi.abs().max(1.0);
    let mut floor_hits = 0;
    let mut pts = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t < lo - eps || t > hi + eps {
            continue;
        }
        if v.is_finite() && v > tol::DECAY_FLOOR {
            pts.push((t, v.ln()));
        } else {
            floor_hits += 1;
        }
    }
    if pts.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: pts.len(),
        });
    }
    let m = pts.len() as f64;
    let t_mean = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let y_mean = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let stt: f64 = pts.iter().map(|p| (p.0 - t_mean).powi(2)).sum();
    if stt <= 0.0 {
        return Err(Error::InsufficientData { needed: 2, got: 1 });
    }
    let sty: f64 = pts.iter().map(|p| (p.0 - t_mean) * (p.1 - y_mean)).sum();
    let rate = sty / stt;
    let intercept = y_mean - rate * t_mean;
    let syy: f64 = pts.iter().map(|p| (p.1 - y_mean).powi(2)).sum();
    let sse: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - rate * p.0).powi(2))
        .sum();
    // A flat series (up to rounding of the mean) is fitted exactly by a zero slope.
    let flat = syy <= (f64::EPSILON * y_mean.abs().max(1.0)).powi(2) * m * 16.0;
    let r_squared = if flat {
        1.0
    } else {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    };
    Ok(DecayFit {
        rate,
        intercept,
        r_squared,
        window,
        floor_hits,
        samples: pts.len(),
    })
}
