use crate::compound::mult_compound;
use crate::dynamics::{HorizontalFrame, SystemModel};
use crate::error::{Error, Result};
use crate::linalg::{
    induced_norm, lower_bound_constant, matrix_measure, numerical_rank, vector_norm, DenseMatrix,
    NormKind,
};
use crate::sampling::{sample_states, SampleSpec};
use crate::tol;

use super::{
    fit_decay, jacobian_note, seeded_trajectories, witness, CertificateReport, CheckOptions,
    Verdict,
};

fn require_frame(model: &SystemModel) -> Result<&HorizontalFrame> {
    model.frame.as_ref().ok_or_else(|| Error::MissingStructure {
        model: model.name.clone(),
        what: "a horizontal frame H(x), Q(x)",
    })
}

/// `[H Q]` must be invertible and `HᵀQ` must vanish; returns `‖HᵀQ‖_F`.
fn frame_orthogonality(frame: &HorizontalFrame, t: f64, x: &[f64]) -> Result<f64> {
    let h = (frame.h)(x);
    let q = (frame.q)(x);
    let n = h.rows();
    if q.cols() == 0 {
        return Ok(0.0);
    }
    let joined = DenseMatrix::from_fn(n, n, |i, j| {
        if j < h.cols() {
            h[(i, j)]
        } else {
            q[(i, j - h.cols())]
        }
    });
    if numerical_rank(&joined, tol::RANK) < n {
        return Err(Error::DegenerateFrame { t });
    }
    Ok(h.transpose().matmul(&q)?.frobenius())
}

/// Derivative of `H` along `f` by central differences in time.
fn h_along_flow(model: &SystemModel, frame: &HorizontalFrame, t: f64, x: &[f64]) -> DenseMatrix {
    let f = model.eval(t, x);
    let h = tol::FD_STEP;
    let xp: Vec<f64> = x.iter().zip(&f).map(|(a, b)| a + h * b).collect();
    let xm: Vec<f64> = x.iter().zip(&f).map(|(a, b)| a - h * b).collect();
    (frame.h)(&xp)
        .sub(&(frame.h)(&xm))
        .expect("frame shape is fixed")
        .scale(0.5 / h)
}

/// Checks `H_fᵀ + HᵀJ = J_ξ(t, p(x), x) Hᵀ` on samples and bounds `HᵀH` above and below.
pub fn check_theorem1_conditions(
    model: &SystemModel,
    norm: NormKind,
    samples: &SampleSpec,
    opts: &CheckOptions,
) -> Result<CertificateReport> {
    let fac = model
        .factorization
        .as_ref()
        .ok_or_else(|| Error::MissingStructure {
            model: model.name.clone(),
            what: "a factorization f(t, x) = g(t, p(x), x)",
        })?;
    let frame = require_frame(model)?;
    if fac.ell != frame.ell {
        return Err(Error::DimensionMismatch(format!(
            "factorization has ell={} but the frame has ell={}",
            fac.ell, frame.ell
        )));
    }
    let pts = sample_states(model, samples, opts.dt)?;
    let mut report = CertificateReport::new("theorem1", norm);
    let (mut worst, mut worst_at) = (0.0f64, Vec::new());
    let (mut worst_orth, mut orth_at) = (0.0f64, Vec::new());
    let (mut d6, mut d6_at) = (f64::INFINITY, Vec::new());
    let mut d7 = 0.0f64;
    for s in &pts {
        let h = (frame.h)(&s.x);
        let ht = h.transpose();
        let h_f = match &frame.h_f {
            Some(hf) => hf(s.t, &s.x),
            None => h_along_flow(model, frame, s.t, &s.x),
        };
        let xi = (fac.p)(&s.x);
        let j_xi = (fac.j_xi)(s.t, &xi, &s.x);
        let r = h_f
            .transpose()
            .add(&ht.matmul(&model.jacobian(s.t, &s.x))?)?
            .sub(&j_xi.matmul(&ht)?)?
            .frobenius();
        if r > worst {
            worst = r;
            worst_at = witness(s.t, &s.x);
        }
        let o = frame_orthogonality(frame, s.t, &s.x)?;
        if o > worst_orth {
            worst_orth = o;
            orth_at = witness(s.t, &s.x);
        }
        let hth = ht.matmul(&h)?;
        let lower = lower_bound_constant(&hth, norm)?;
        if lower < d6 {
            d6 = lower;
            d6_at = witness(s.t, &s.x);
        }
        d7 = d7.max(induced_norm(&hth, norm)?);
    }
    report.samples_used = pts.len();
    report.residual("bridge_max", worst);
    report.residual("frame_orthogonality", worst_orth);
    report.constant("d6", d6);
    report.constant("d7", d7);
    jacobian_note(model, &mut report);
    if frame.h_f.is_none() {
        report.note("H_f approximated by central differences of H along f (step 1e-6)");
    }
    if worst_orth > tol::FRAME {
        report.falsify(
            orth_at,
            format!("|H^T Q| = {worst_orth:.3e}: the frame is not orthogonal"),
        );
    } else if worst > tol::BRIDGE_RESIDUAL {
        report.falsify(
            worst_at,
            format!("|H_f^T + H^T J - J_xi H^T| = {worst:.3e}: the bridging identity fails"),
        );
    } else if d6 < tol::CONSTANT_MIN {
        report.falsify(d6_at, format!("H^T H is not bounded below (d6 = {d6:.3e})"));
    } else {
        report.verdict = Verdict::Certified;
        report.note(format!(
            "bridging identity holds to {worst:.3e} with {d6:.6e} |y| <= |H^T H y| <= {d7:.6e} |y|; partial contraction transfers to horizontal contraction"
        ));
    }
    Ok(report)
}

/// Bounds `HᵀH`, `M = [Hᵀ; Qᵀ]` and `M^(k)` and looks for evidence of uniform
/// boundedness from sampled trajectory pairs.
pub fn check_theorem2_conditions(
    model: &SystemModel,
    k: usize,
    norm: NormKind,
    samples: &SampleSpec,
    opts: &CheckOptions,
) -> Result<CertificateReport> {
    let frame = require_frame(model)?;
    let n = model.dim();
    if k == 0 || k > n || frame.ell != n - k + 1 {
        return Err(Error::DimensionMismatch(format!(
            "need ell = n - k + 1 = {}, but the frame has ell = {} (n = {n}, k = {k})",
            (n + 1).saturating_sub(k),
            frame.ell
        )));
    }
    let pts = sample_states(model, samples, opts.dt)?;
    let mut report = CertificateReport::new("theorem2", norm);
    let mut lower = [f64::INFINITY; 3];
    let mut lower_at = vec![Vec::new(); 3];
    let mut upper = [0.0f64; 3];
    for s in &pts {
        frame_orthogonality(frame, s.t, &s.x)?;
        let h = (frame.h)(&s.x);
        let q = (frame.q)(&s.x);
        let ht = h.transpose();
        let m = DenseMatrix::from_fn(n, n, |i, j| {
            if i < frame.ell {
                h[(j, i)]
            } else {
                q[(j, i - frame.ell)]
            }
        });
        let mats = [ht.matmul(&h)?, m.clone(), mult_compound(&m, k)?];
        for (i, mat) in mats.iter().enumerate() {
            let lo = lower_bound_constant(mat, norm)?;
            if lo < lower[i] {
                lower[i] = lo;
                lower_at[i] = witness(s.t, &s.x);
            }
            upper[i] = upper[i].max(induced_norm(mat, norm)?);
        }
    }
    report.samples_used = pts.len();
    for (i, name) in ["c1", "c3", "c5"].iter().enumerate() {
        report.constant(name, lower[i]);
    }
    for (i, name) in ["c2", "c4", "c6"].iter().enumerate() {
        report.constant(name, upper[i]);
    }

    // Uniform boundedness, probed with independent trajectory pairs.
    let runs = seeded_trajectories(
        model,
        2 * opts.n_traj,
        samples.seed.wrapping_add(2),
        opts.traj_t_end,
        opts.dt,
    )?;
    let window = opts.window_for(opts.traj_t_end);
    let mut ratio_sup = 0.0f64;
    let mut late_rate = f64::NEG_INFINITY;
    let escaped = runs.iter().filter(|(_, e)| *e).count();
    let mut coppel = f64::NEG_INFINITY;
    for pair in runs.chunks(2) {
        let (a, b) = (&pair[0].0, &pair[1].0);
        let len = a.len().min(b.len());
        let sep: Vec<f64> = (0..len)
            .map(|i| {
                let d: Vec<f64> = a.states[i]
                    .iter()
                    .zip(b.states[i].iter())
                    .map(|(u, v)| u - v)
                    .collect();
                vector_norm(&d, norm)
            })
            .collect();
        if sep[0] > 0.0 {
            ratio_sup = sep.iter().map(|s| s / sep[0]).fold(ratio_sup, f64::max);
            if let Ok(fit) = fit_decay(&a.times[..len], &sep, window) {
                late_rate = late_rate.max(fit.rate);
            }
        }
    }
    for (traj, _) in &runs {
        let mut integral = 0.0;
        let mut prev: Option<f64> = None;
        for (i, (t, x)) in traj.times.iter().zip(&traj.states).enumerate() {
            let mu = matrix_measure(&model.jacobian(*t, x), norm)?;
            if let Some(p) = prev {
                integral += 0.5 * (traj.times[i] - traj.times[i - 1]) * (p + mu);
            }
            prev = Some(mu);
            coppel = coppel.max(integral);
        }
    }
    report.constant("separation_ratio_sup", ratio_sup);
    if late_rate.is_finite() {
        report.constant("separation_late_rate", late_rate);
    }
    report.constant("coppel_integral_max", coppel);
    report.constant("trajectory_pairs", opts.n_traj as f64);
    report.note(format!(
        "uniform boundedness is checked only on {} sampled trajectory pairs over [0, {}]",
        opts.n_traj, opts.traj_t_end
    ));
    jacobian_note(model, &mut report);

    let names = ["c1", "c3", "c5"];
    if let Some(i) = (0..3)
        .find(|&i| (lower[i].is_nan() || lower[i] < tol::CONSTANT_MIN) || !upper[i].is_finite())
    {
        report.falsify(
            lower_at[i].clone(),
            format!(
                "{} = {:.3e}: the transformation is not uniformly invertible",
                names[i], lower[i]
            ),
        );
        return Ok(report);
    }
    let growing = late_rate > tol::GROWTH_RATE;
    let huge = ratio_sup > tol::SEPARATION_CAP;
    if escaped > 0 || growing || huge {
        report.note(format!(
            "no evidence of uniform boundedness: {escaped} runs escaped the domain, separation ratio sup {ratio_sup:.3e}, late separation rate {late_rate:.3e}; k-contraction may still hold with volume decay outpacing growth, which this check does not certify"
        ));
    } else {
        report.verdict = Verdict::Certified;
        report.note(format!(
            "constants positive and separations bounded by {ratio_sup:.3e}; k-contraction in the transformed coordinates carries over"
        ));
    }
    Ok(report)
}
