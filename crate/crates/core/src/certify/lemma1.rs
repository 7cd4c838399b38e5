use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::compound::{k_volume, wedge};
use crate::error::{Error, Result};
use crate::linalg::{vector_norm, NormKind};

use super::{fit_decay, CertificateReport, Verdict};

/// Slack on the pointwise hypotheses and bound, relative to the bound itself.
const HYPOTHESIS_SLACK: f64 = 1e-9;
const RATE_TOLERANCE: f64 = 1e-2;

/// `k` time-indexed vectors in `R^n`, the first `ell` of which decay.
pub trait VectorFamily {
    fn dim(&self) -> usize;
    fn k(&self) -> usize;
    fn ell(&self) -> usize;
    fn eval(&self, t: f64) -> Vec<Vec<f64>>;
}

/// Hypotheses: `|aʲ(t)| ≤ γ1 e^{−βt}|aʲ(0)|` for the first `ell` vectors and
/// `|aʲ(t)| ≤ γ2 |aʲ(0)|` for the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaParams {
    pub k: usize,
    pub n: usize,
    pub ell: usize,
    pub beta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl LemmaParams {
    pub fn validate(&self) -> Result<()> {
        let Self {
            k,
            n,
            ell,
            beta,
            gamma1,
            gamma2,
        } = *self;
        if k == 0 || k > n {
            return Err(Error::InvalidInput(format!(
                "need 1 <= k <= n, got k={k}, n={n}"
            )));
        }
        if ell == 0 || ell > k {
            return Err(Error::InvalidInput(format!(
                "ell must lie in [1, k={k}], got {ell}"
            )));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "beta must be positive, got {beta}"
            )));
        }
        if !(gamma1 >= 1.0 && gamma2 >= 1.0 && gamma1.is_finite() && gamma2.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "gamma1 and gamma2 must be at least 1, got ({gamma1}, {gamma2})"
            )));
        }
        Ok(())
    }

    /// Guaranteed decay rate of the wedge: `ell·β`.
    pub fn beta_bar(&self) -> f64 {
        self.ell as f64 * self.beta
    }
}

/// `aʲ(t) = sⱼ(t) R(t) aʲ(0)` with `sⱼ = e^{−βt}(1 + α sin ωⱼt)` for decaying
/// vectors and `1 + α sin ωⱼt` otherwise; `R(t)` rotates one coordinate plane.
#[derive(Debug, Clone)]
pub struct SyntheticFamily {
    params: LemmaParams,
    a0: Vec<Vec<f64>>,
    alpha: f64,
    omegas: Vec<f64>,
    rotation: Option<(usize, usize, f64)>,
}

impl SyntheticFamily {
    pub fn new(params: LemmaParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let LemmaParams {
            k,
            n,
            gamma1,
            gamma2,
            ..
        } = params;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gmin = gamma1.min(gamma2);
        let alpha = rng.gen_range(0.0..=0.02f64).min(gmin - 1.0).max(0.0);
        // A plane rotation can inflate L1 and L-inf norms by up to sqrt(2).
        let rotation = if n >= 2 && gmin >= std::f64::consts::SQRT_2 * (1.0 + alpha) {
            let i = rng.gen_range(0..n);
            let j = (i + rng.gen_range(1..n)) % n;
            Some((i, j, rng.gen_range(4.0..8.0)))
        } else {
            None
        };
        let omegas = (0..k).map(|_| rng.gen_range(4.0..8.0)).collect();
        for _ in 0..1000 {
            let a0: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            if k_volume(&a0)? >= 0.05 {
                return Ok(Self {
                    params,
                    a0,
                    alpha,
                    omegas,
                    rotation,
                });
            }
        }
        Err(Error::InvalidInput(
            "could not draw independent initial vectors".into(),
        ))
    }

    pub fn params(&self) -> &LemmaParams {
        &self.params
    }
}

impl VectorFamily for SyntheticFamily {
    fn dim(&self) -> usize {
        self.params.n
    }

    fn k(&self) -> usize {
        self.params.k
    }

    fn ell(&self) -> usize {
        self.params.ell
    }

    fn eval(&self, t: f64) -> Vec<Vec<f64>> {
        self.a0
            .iter()
            .enumerate()
            .map(|(j, a)| {
                let wobble = 1.0 + self.alpha * (self.omegas[j] * t).sin();
                let s = if j < self.params.ell {
                    (-self.params.beta * t).exp() * wobble
                } else {
                    wobble
                };
                let mut v: Vec<f64> = a.iter().map(|x| s * x).collect();
                if let Some((p, q, w)) = self.rotation {
                    let (c, sn) = ((w * t).cos(), (w * t).sin());
                    let (vp, vq) = (v[p], v[q]);
                    v[p] = c * vp - sn * vq;
                    v[q] = sn * vp + c * vq;
                }
                v
            })
            .collect()
    }
}

/// `t = 0, 0.05, …, 20`.
pub fn default_grid() -> Vec<f64> {
    (0..=400).map(|i| i as f64 * 0.05).collect()
}

/// Evaluates `|∧ aʲ(t)|` on `t_grid` and checks it against
/// `γ̄ e^{−β̄t} |∧ aʲ(0)|` with `β̄ = ℓβ` and `γ̄ = n^{k−1} γ1^ℓ γ2^{k−ℓ} γ3`,
/// `γ3 = ∏|aʲ(0)| / |∧ aʲ(0)|`; also fits the decay rate of the wedge norm.
pub fn verify_lemma1(
    family: &dyn VectorFamily,
    params: &LemmaParams,
    norm: NormKind,
    t_grid: &[f64],
) -> Result<CertificateReport> {
    params.validate()?;
    let LemmaParams {
        k,
        n,
        ell,
        beta,
        gamma1,
        gamma2,
    } = *params;
    if family.k() != k || family.dim() != n || family.ell() != ell {
        return Err(Error::DimensionMismatch(format!(
            "family has (k, n, ell) = ({}, {}, {}), parameters say ({k}, {n}, {ell})",
            family.k(),
            family.dim(),
            family.ell()
        )));
    }
    if t_grid.len() < 3 || t_grid[0] != 0.0 || t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "time grid must start at 0 and increase, with at least 3 points".into(),
        ));
    }
    let a0 = family.eval(0.0);
    let norms0: Vec<f64> = a0.iter().map(|a| vector_norm(a, norm)).collect();
    let w0 = wedge(&a0)?.norm(norm);
    if w0.is_nan() || w0 <= 1e-300 {
        return Err(Error::InvalidInput(
            "initial wedge is zero; no relative bound exists".into(),
        ));
    }
    let gamma3 = norms0.iter().product::<f64>() / w0;
    let beta_bar = params.beta_bar();
    let gamma_bar = (n as f64).powi(k as i32 - 1)
        * gamma1.powi(ell as i32)
        * gamma2.powi((k - ell) as i32)
        * gamma3;

    let mut values = Vec::with_capacity(t_grid.len());
    let mut worst_ratio = 0.0f64;
    let mut report = CertificateReport::new("lemma1", norm);
    for &t in t_grid {
        let vs = family.eval(t);
        for (j, v) in vs.iter().enumerate() {
            let cap = if j < ell {
                gamma1 * (-beta * t).exp()
            } else {
                gamma2
            } * norms0[j];
            if vector_norm(v, norm) > cap * (1.0 + HYPOTHESIS_SLACK) {
                return Err(Error::InvalidInput(format!(
                    "vector {} violates its growth hypothesis at t={t}",
                    j + 1
                )));
            }
        }
        let w = wedge(&vs)?.norm(norm);
        worst_ratio = worst_ratio.max(w / (gamma_bar * (-beta_bar * t).exp() * w0));
        values.push(w);
    }
    let t_end = t_grid[t_grid.len() - 1];
    let fit = fit_decay(t_grid, &values, (0.0, t_end))?;
    report.samples_used = t_grid.len();
    for (name, v) in [
        ("k", k as f64),
        ("n", n as f64),
        ("ell", ell as f64),
        ("beta", beta),
        ("gamma1", gamma1),
        ("gamma2", gamma2),
        ("gamma3", gamma3),
        ("gamma_bar", gamma_bar),
        ("beta_bar", beta_bar),
        ("rate", fit.rate),
        ("r_squared", fit.r_squared),
        ("expected_rate", -beta_bar),
    ] {
        report.constant(name, v);
    }
    report.residual("bound_ratio_max", worst_ratio);

    let bound_ok = worst_ratio <= 1.0 + HYPOTHESIS_SLACK;
    let rate_ok = fit.rate <= -beta + RATE_TOLERANCE && fit.rate <= -beta_bar + RATE_TOLERANCE;
    if bound_ok && rate_ok {
        report.verdict = Verdict::Certified;
        report.note(format!(
            "|wedge| <= gamma_bar exp(-{beta_bar} t) |wedge(0)| on the grid; fitted rate {:.6e}",
            fit.rate
        ));
    } else if !bound_ok {
        let t_bad = t_grid
            .iter()
            .zip(&values)
            .find(|(t, w)| {
                **w > gamma_bar * (-beta_bar * **t).exp() * w0 * (1.0 + HYPOTHESIS_SLACK)
            })
            .map_or(0.0, |(t, _)| *t);
        report.falsify(
            vec![t_bad],
            "the wedge norm exceeds the decay bound at this time",
        );
    } else {
        report.note(format!(
            "fitted rate {:.6e} is slower than the guaranteed {:.6e} (tolerance {RATE_TOLERANCE})",
            fit.rate, -beta_bar
        ));
    }
    Ok(report)
}
