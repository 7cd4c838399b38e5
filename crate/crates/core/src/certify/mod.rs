//! Sampling-based checkers for k-contraction, partial contraction, horizontal
//! contraction, the conditions bridging them, and the wedge decay lemma.
//!
//! Every verdict is relative to the declared sample set and margin.

mod flow_invariant;
mod horizontal;
mod kcontraction;
mod lemma1;
mod partial;
mod report;
mod theorems;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use flow_invariant::check_flow_invariant_subspace;
pub use horizontal::{check_horizontal_decay, horizontal_component};
pub use kcontraction::{
    check_k_contraction_empirical, check_k_contraction_pointwise, compound_norm_series,
};
pub use lemma1::{default_grid, verify_lemma1, LemmaParams, SyntheticFamily, VectorFamily};
pub use partial::check_partial_contraction;
pub use report::{fit_decay, trailing_window, CertificateReport, DecayFit, Verdict};
pub use theorems::{check_theorem1_conditions, check_theorem2_conditions};

use crate::dynamics::{integrate, SystemModel, Trajectory};
use crate::error::{Error, Result};
use crate::sampling::sample_domain;
use crate::tol;

/// Tunable thresholds shared by the checkers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub margin: f64,
    pub r2_min: f64,
    /// Explicit fitting window; defaults to the trailing `window_fraction` of the horizon.
    pub window: Option<(f64, f64)>,
    pub window_fraction: f64,
    pub dt: f64,
    /// Trajectories simulated by checkers that need them.
    pub n_traj: usize,
    pub traj_t_end: f64,
    pub seed: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            margin: tol::MARGIN,
            r2_min: tol::R2_MIN,
            window: None,
            window_fraction: tol::WINDOW_FRACTION,
            dt: tol::DEFAULT_DT,
            n_traj: 10,
            traj_t_end: 10.0,
            seed: 0,
        }
    }
}

impl CheckOptions {
    pub fn window_for(&self, t_end: f64) -> (f64, f64) {
        self.window
            .unwrap_or_else(|| trailing_window(t_end, self.window_fraction))
    }
}

fn jacobian_note(model: &SystemModel, report: &mut CertificateReport) {
    if !model.has_analytic_jacobian() {
        report.note("Jacobian approximated by central differences");
    }
}

/// Integrates trajectories from `count` seeded domain samples; escaping runs
/// contribute their partial trajectory and are flagged in the second element.
fn seeded_trajectories(
    model: &SystemModel,
    count: usize,
    seed: u64,
    t_end: f64,
    dt: f64,
) -> Result<Vec<(Trajectory, bool)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts = sample_domain(&model.domain, count, &mut rng)?;
    starts
        .iter()
        .map(|a| match integrate(model, a, t_end, dt) {
            Ok(tr) => Ok((tr, false)),
            Err(Error::DomainEscape { partial, .. }) => Ok((*partial, true)),
            Err(e) => Err(e),
        })
        .collect()
}

/// Witness vector `[t, x...]`.
fn witness(t: f64, x: &[f64]) -> Vec<f64> {
    std::iter::once(t).chain(x.iter().copied()).collect()
}
