use crate::dynamics::{integrate_variational, HorizontalFrame, SystemModel};
use crate::error::{Error, Result};
use crate::linalg::{solve_small, vector_norm, DenseVector, NormKind};

use super::{fit_decay, jacobian_note, CertificateReport, CheckOptions, Verdict};

/// Coordinates of the horizontal part of `δx`: the solution of `HᵀH z = Hᵀδx`.
pub fn horizontal_component(frame: &HorizontalFrame, x: &[f64], dx: &[f64]) -> Result<DenseVector> {
    let h = (frame.h)(x);
    let ht = h.transpose();
    solve_small(&ht.matmul(&h)?, &ht.matvec(dx)?)
}

/// Integrates one displacement along the trajectory from `a` and fits the decay
/// of its horizontal part.
pub fn check_horizontal_decay(
    model: &SystemModel,
    norm: NormKind,
    a: &[f64],
    delta: &[f64],
    t_end: f64,
    opts: &CheckOptions,
) -> Result<CertificateReport> {
    let frame = model
        .frame
        .as_ref()
        .ok_or_else(|| Error::MissingStructure {
            model: model.name.clone(),
            what: "a horizontal frame H(x), Q(x)",
        })?;
    let traj = integrate_variational(model, a, &[delta.to_vec()], t_end, opts.dt)?;
    let var = traj
        .var_states
        .as_ref()
        .expect("variational run records displacements");
    let mut values = Vec::with_capacity(traj.len());
    for ((t, x), dx) in traj.times.iter().zip(&traj.states).zip(var) {
        let z = horizontal_component(frame, x, &dx[0]).map_err(|e| match e {
            Error::SingularMatrix => Error::DegenerateFrame { t: *t },
            other => other,
        })?;
        values.push(vector_norm(&z, norm));
    }
    let mut report = CertificateReport::new("horizontal", norm);
    report.samples_used = values.len();
    let sup = values.iter().copied().fold(0.0, f64::max);
    report.constant("dxh_initial", values[0]);
    report.constant("dxh_final", values[values.len() - 1]);
    report.constant("dxh_sup", sup);
    jacobian_note(model, &mut report);

    let scale = vector_norm(delta, norm).max(f64::MIN_POSITIVE);
    if sup <= 1e-9 * scale {
        report.note("the horizontal component is zero along the whole run; no decay rate to fit");
        return Ok(report);
    }
    let window = opts.window_for(t_end);
    let fit = fit_decay(&traj.times, &values, window)?;
    report.constant("rate", fit.rate);
    report.constant("intercept", fit.intercept);
    report.constant("r_squared", fit.r_squared);
    report.constant("window_start", window.0);
    report.constant("window_end", window.1);
    if fit.rate <= -opts.margin && fit.r_squared >= opts.r2_min {
        report.verdict = Verdict::Certified;
        report.note(format!("|dx_h| decays at rate {:.6e}", fit.rate));
    } else if fit.rate >= opts.margin && fit.r_squared >= opts.r2_min {
        let mut w = a.to_vec();
        w.extend_from_slice(delta);
        report.falsify(
            w,
            format!("|dx_h| grows at rate {:.6e} from this (a, delta)", fit.rate),
        );
    } else {
        report.note(format!(
            "rate {:.3e} with r^2 {:.4} does not meet margin {:.1e} and r^2 >= {}",
            fit.rate, fit.r_squared, opts.margin, opts.r2_min
        ));
    }
    Ok(report)
}
