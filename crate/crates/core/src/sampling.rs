//! Deterministic state sampling for the certificate checkers.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, DomainSpec, SystemModel};
use crate::error::{Error, Result};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SampleScheme {
    /// Independent points drawn from the domain. Every eighth point lies on the
    /// outer boundary layer (box vertex or inner circle), the next on a face
    /// (or outer circle), so suprema attained on the boundary are hit exactly.
    UniformDomain,
    /// States visited by trajectories started at domain samples.
    AlongTrajectories { n_traj: usize, t_end: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub count: usize,
    pub seed: u64,
    pub scheme: SampleScheme,
    /// Sample times are drawn from `[0, time_span]`.
    pub time_span: f64,
}

impl SampleSpec {
    pub fn uniform(count: usize, seed: u64) -> Self {
        Self {
            count,
            seed,
            scheme: SampleScheme::UniformDomain,
            time_span: 10.0,
        }
    }
}

/// A sampled `(t, x)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSample {
    pub t: f64,
    pub x: Vec<f64>,
}

/// Draws `count` points from the domain.
pub fn sample_domain(
    domain: &DomainSpec,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>> {
    (0..count).map(|i| sample_point(domain, i, rng)).collect()
}

fn sample_point(domain: &DomainSpec, i: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    match domain {
        DomainSpec::Box { lo, hi } => {
            let n = lo.dim();
            Ok(match i % 8 {
                0 => (0..n)
                    .map(|j| if rng.gen::<bool>() { lo[j] } else { hi[j] })
                    .collect(),
                1 => {
                    let face = rng.gen_range(0..n);
                    let upper = rng.gen::<bool>();
                    (0..n)
                        .map(|j| match (j == face, upper) {
                            (true, true) => hi[j],
                            (true, false) => lo[j],
                            _ => rng.gen_range(lo[j]..=hi[j]),
                        })
                        .collect()
                }
                _ => (0..n).map(|j| rng.gen_range(lo[j]..=hi[j])).collect(),
            })
        }
        DomainSpec::Annulus2D { gamma1, gamma2 } => {
            let r2 = match i % 8 {
                0 => *gamma1,
                1 => *gamma2,
                // uniform by area
                _ => rng.gen_range(*gamma1..=*gamma2),
            };
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = r2.sqrt();
            Ok(vec![r * angle.cos(), r * angle.sin()])
        }
        DomainSpec::Predicate { contains, lo, hi } => {
            for _ in 0..10_000 {
                let x: Vec<f64> = (0..lo.dim())
                    .map(|j| rng.gen_range(lo[j]..=hi[j]))
                    .collect();
                if contains(&x) {
                    return Ok(x);
                }
            }
            Err(Error::InsufficientData { needed: 1, got: 0 })
        }
    }
}

/// Samples `(t, x)` pairs according to `spec`.
pub fn sample_states(model: &SystemModel, spec: &SampleSpec, dt: f64) -> Result<Vec<StateSample>> {
    if spec.count == 0 {
        return Err(Error::InvalidInput("sample count must be positive".into()));
    }
    if !(spec.time_span >= 0.0 && spec.time_span.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "invalid time span {}",
            spec.time_span
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.scheme {
        SampleScheme::UniformDomain => {
            let points = sample_domain(&model.domain, spec.count, &mut rng)?;
            Ok(points
                .into_iter()
                .map(|x| StateSample {
                    t: if spec.time_span > 0.0 {
                        rng.gen_range(0.0..=spec.time_span)
                    } else {
                        0.0
                    },
                    x,
                })
                .collect())
        }
        SampleScheme::AlongTrajectories { n_traj, t_end } => {
            if n_traj == 0 {
                return Err(Error::InvalidInput("need at least one trajectory".into()));
            }
            let starts = sample_domain(&model.domain, n_traj, &mut rng)?;
            let mut visited = Vec::new();
            for a in starts {
                let traj = match integrate(model, &a, t_end, dt) {
                    Ok(tr) => tr,
                    Err(Error::DomainEscape { partial, .. }) => *partial,
                    Err(e) => return Err(e),
                };
                visited.extend(
                    traj.times
                        .iter()
                        .zip(&traj.states)
                        .filter(|(_, x)| model.domain.contains(x))
                        .map(|(&t, x)| StateSample { t, x: x.to_vec() }),
                );
            }
            if visited.is_empty() {
                return Err(Error::InsufficientData { needed: 1, got: 0 });
            }
            let stride = visited.len() as f64 / spec.count as f64;
            Ok((0..spec.count)
                .map(|i| visited[((i as f64 * stride) as usize).min(visited.len() - 1)].clone())
                .collect())
        }
    }
}

/// Random unit vectors (L2) for constant estimation.
pub fn random_unit_vectors(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > tol::CONSTANT_MIN {
            out.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    out
}
