use crate::compound::{add_compound, wedge};
use crate::dynamics::{integrate_compound, SystemModel, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{matrix_measure, vector_norm, NormKind};
use crate::sampling::{sample_states, SampleSpec};

use super::{fit_decay, jacobian_note, witness, CertificateReport, CheckOptions, Verdict};

/// Sup of `μ(J^[k](t, x))` over the samples; negative values certify k-contraction.
pub fn check_k_contraction_pointwise(
    model: &SystemModel,
    k: usize,
    norm: NormKind,
    samples: &SampleSpec,
    opts: &CheckOptions,
) -> Result<CertificateReport> {
    let n = model.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "order k={k} must satisfy 1 <= k <= {n}"
        )));
    }
    let pts = sample_states(model, samples, opts.dt)?;
    let mut report = CertificateReport::new("k-contraction-pointwise", norm);
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    let mut arg = witness(0.0, &[]);
    for s in &pts {
        let mu = matrix_measure(&add_compound(&model.jacobian(s.t, &s.x), k)?, norm)?;
        if mu > sup {
            sup = mu;
            arg = witness(s.t, &s.x);
        }
        inf = inf.min(mu);
    }
    report.samples_used = pts.len();
    report.constant("k", k as f64);
    report.constant("mu_sup", sup);
    report.constant("mu_inf", inf);
    jacobian_note(model, &mut report);
    if sup <= -opts.margin {
        report.verdict = Verdict::Certified;
        report.note(format!(
            "mu(J^[{k}]) <= {sup:.6e} on all {} samples; k-volumes contract at least at that rate",
            pts.len()
        ));
    } else if sup >= opts.margin {
        report.falsify(
            arg,
            format!("mu(J^[{k}]) = {sup:.6e} > 0 here; the measure-based sufficient condition fails, which alone does not refute {k}-contraction"),
        );
    } else {
        report.note(format!(
            "mu_sup = {sup:.3e} lies within the margin {:.1e}",
            opts.margin
        ));
    }
    Ok(report)
}

/// Integrates the compound equation from the wedge of `deltas` and returns the
/// trajectory with `|y(t)|` at every step.
pub fn compound_norm_series(
    model: &SystemModel,
    a: &[f64],
    deltas: &[Vec<f64>],
    t_end: f64,
    dt: f64,
    norm: NormKind,
) -> Result<(Trajectory, Vec<f64>)> {
    let k = deltas.len();
    let y0 = wedge(deltas)?;
    if y0.is_zero() {
        return Err(Error::InvalidInput(
            "displacements are linearly dependent (their wedge product is zero)".into(),
        ));
    }
    let traj = integrate_compound(model, a, k, &y0.coeffs, t_end, dt)?;
    let values = traj
        .compound_state
        .as_ref()
        .map(|ys| ys.iter().map(|y| vector_norm(y, norm)).collect())
        .unwrap_or_default();
    Ok((traj, values))
}

/// Integrates the compound equation for every `(initial condition, displacement set)`
/// pair and fits the decay of `|y(t)|`.
pub fn check_k_contraction_empirical(
    model: &SystemModel,
    k: usize,
    norm: NormKind,
    initial_conditions: &[Vec<f64>],
    delta_sets: &[Vec<Vec<f64>>],
    t_end: f64,
    opts: &CheckOptions,
) -> Result<CertificateReport> {
    if initial_conditions.is_empty() || delta_sets.is_empty() {
        return Err(Error::InvalidInput(
            "need at least one initial condition and one displacement set".into(),
        ));
    }
    if let Some(bad) = delta_sets.iter().find(|d| d.len() != k) {
        return Err(Error::InvalidInput(format!(
            "each displacement set needs k={k} vectors, got {}",
            bad.len()
        )));
    }
    let window = opts.window_for(t_end);
    let mut report = CertificateReport::new("k-contraction-empirical", norm);
    let mut worst = f64::NEG_INFINITY;
    let mut best = f64::INFINITY;
    let mut min_r2 = f64::INFINITY;
    let mut implied_c: f64 = 0.0;
    let mut worst_run = Vec::new();
    let mut runs = 0;
    for a in initial_conditions {
        for deltas in delta_sets {
            let (traj, values) = compound_norm_series(model, a, deltas, t_end, opts.dt, norm)?;
            let fit = fit_decay(&traj.times, &values, window)?;
            let y0 = values[0];
            let c = traj
                .times
                .iter()
                .zip(&values)
                .map(|(t, v)| v * (-fit.rate * t).exp() / y0)
                .fold(0.0, f64::max);
            implied_c = implied_c.max(c);
            if fit.rate > worst {
                worst = fit.rate;
                worst_run = a.clone();
            }
            best = best.min(fit.rate);
            min_r2 = min_r2.min(fit.r_squared);
            runs += 1;
        }
    }
    report.samples_used = runs;
    report.constant("k", k as f64);
    report.constant("worst_rate", worst);
    report.constant("best_rate", best);
    report.constant("min_r_squared", min_r2);
    report.constant("implied_c", implied_c);
    report.constant("window_start", window.0);
    report.constant("window_end", window.1);
    jacobian_note(model, &mut report);
    if worst <= -opts.margin && min_r2 >= opts.r2_min {
        report.verdict = Verdict::Certified;
        report.note(format!(
            "|y(t)| decays at rate <= {worst:.6e} in all {runs} runs over [{}, {}]",
            window.0, window.1
        ));
    } else if worst >= opts.margin && min_r2 >= opts.r2_min {
        report.falsify(
            worst_run,
            format!("{k}-volume grows at fitted rate {worst:.6e} from this initial condition"),
        );
    } else {
        report.note(format!(
            "worst rate {worst:.3e} with min r^2 {min_r2:.4} does not meet margin {:.1e} and r^2 >= {}",
            opts.margin, opts.r2_min
        ));
    }
    Ok(report)
}
