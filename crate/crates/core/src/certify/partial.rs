use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::SystemModel;
use crate::error::{Error, Result};
use crate::linalg::{matrix_measure, vector_norm, NormKind};
use crate::sampling::{sample_states, SampleSpec};
use crate::tol;

use super::{fit_decay, seeded_trajectories, witness, CertificateReport, CheckOptions, Verdict};

/// Checks that the virtual system `ξ̇ = (∂p/∂x) g(t, ξ, x)` is contracting in `ξ`
/// and, when a target manifold `m` is known, that `|p(x(t)) − m(x(t))|` obeys the
/// implied exponential bound along simulated trajectories.
pub fn check_partial_contraction(
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
    let pts = sample_states(model, samples, opts.dt)?;
    let mut report = CertificateReport::new("partial", norm);

    let mut worst = 0.0;
    let mut worst_x = Vec::new();
    let mut xis = Vec::with_capacity(pts.len());
    for s in &pts {
        let xi = (fac.p)(&s.x);
        let g = (fac.g)(s.t, &xi, &s.x);
        let f = model.eval(s.t, &s.x);
        let scale = f.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let r = g
            .iter()
            .zip(&f)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / scale;
        if r > worst {
            worst = r;
            worst_x = s.x.clone();
        }
        xis.push(xi);
    }
    if worst > tol::FACTORIZATION {
        return Err(Error::FactorizationMismatch {
            residual: worst,
            witness: worst_x,
        });
    }
    report.residual("factorization", worst);

    // ξ is drawn both from p(samples) and from a box inflated by 50% around them.
    let ell = fac.ell;
    let (mut lo, mut hi) = (vec![f64::INFINITY; ell], vec![f64::NEG_INFINITY; ell]);
    for xi in &xis {
        for j in 0..ell {
            lo[j] = lo[j].min(xi[j]);
            hi[j] = hi[j].max(xi[j]);
        }
    }
    for j in 0..ell {
        let pad = if hi[j] > lo[j] {
            0.5 * (hi[j] - lo[j])
        } else {
            0.5 * hi[j].abs().max(1.0)
        };
        lo[j] -= pad;
        hi[j] += pad;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(samples.seed ^ 0x5bd1_e995);
    let mut sup = f64::NEG_INFINITY;
    let mut arg = Vec::new();
    for (s, xi) in pts.iter().zip(&xis) {
        let drawn: Vec<f64> = (0..ell).map(|j| rng.gen_range(lo[j]..=hi[j])).collect();
        for candidate in [xi, &drawn] {
            let mu = matrix_measure(&(fac.j_xi)(s.t, candidate, &s.x), norm)?;
            if mu > sup {
                sup = mu;
                arg = witness(s.t, &s.x);
            }
        }
    }
    report.samples_used = pts.len();
    report.constant("mu_sup", sup);
    for j in 0..ell {
        report.constant(&format!("xi_lo_{}", j + 1), lo[j]);
        report.constant(&format!("xi_hi_{}", j + 1), hi[j]);
    }

    let mut bound_ok = true;
    if let Some(m) = &fac.m {
        let runs = seeded_trajectories(
            model,
            opts.n_traj,
            samples.seed.wrapping_add(1),
            opts.traj_t_end,
            opts.dt,
        )?;
        let window = opts.window_for(opts.traj_t_end);
        let mut worst_excess = f64::NEG_INFINITY;
        let mut manifold_rate = f64::NEG_INFINITY;
        let mut escaped = 0;
        for (traj, esc) in &runs {
            escaped += usize::from(*esc);
            let dist: Vec<f64> = traj
                .states
                .iter()
                .map(|x| {
                    let d: Vec<f64> = (fac.p)(x).iter().zip(m(x)).map(|(a, b)| a - b).collect();
                    vector_norm(&d, norm)
                })
                .collect();
            for (i, (&t, &d)) in traj.times.iter().zip(&dist).enumerate() {
                let excess = d - (sup * t).exp() * dist[0] - tol::POINTWISE_SLACK;
                if excess > worst_excess {
                    worst_excess = excess;
                }
                if excess > 0.0 && bound_ok {
                    bound_ok = false;
                    report.falsify(
                        witness(t, &traj.states[i]),
                        format!("|p - m| = {d:.6e} exceeds exp(mu_sup t)|p(a) - m(a)| + slack"),
                    );
                }
            }
            if let Ok(fit) = fit_decay(&traj.times, &dist, window) {
                manifold_rate = manifold_rate.max(fit.rate);
            }
        }
        report.constant("trajectories", runs.len() as f64);
        report.residual("pointwise_bound_excess", worst_excess);
        if manifold_rate.is_finite() {
            report.constant("manifold_rate_worst", manifold_rate);
        }
        if escaped > 0 {
            report.note(format!(
                "{escaped} trajectories left the domain; their partial runs were used"
            ));
        }
    }

    if !bound_ok {
        return Ok(report);
    }
    if sup <= -opts.margin {
        report.verdict = Verdict::Certified;
        report.note(format!("mu(J_xi) <= {sup:.6e} over all sampled (t, xi, x)"));
    } else if sup >= opts.margin {
        report.falsify(
            arg,
            format!("mu(J_xi) = {sup:.6e} > 0; the virtual system is not contracting here"),
        );
    } else {
        report.note(format!(
            "mu_sup = {sup:.3e} lies within the margin {:.1e}",
            opts.margin
        ));
    }
    Ok(report)
}
