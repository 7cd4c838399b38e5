use std::fs::File;
use std::io::{self, BufWriter, Write};

use kcontract::certify::{
    check_flow_invariant_subspace, check_horizontal_decay, check_k_contraction_empirical,
    check_k_contraction_pointwise, check_partial_contraction, check_theorem1_conditions,
    check_theorem2_conditions, compound_norm_series, default_grid, fit_decay, trailing_window,
    verify_lemma1, CertificateReport, CheckOptions, LemmaParams, SyntheticFamily,
};
use kcontract::dynamics::{integrate, SystemModel, Trajectory};
use kcontract::io::{
    format_real, parse_model_file, write_series_csv, write_trajectory_csv, RunConfig,
};
use kcontract::linalg::{vector_norm, NormKind};
use kcontract::sampling::{sample_domain, SampleSpec};
use kcontract::systems::{by_name, default_initial_condition};
use kcontract::{tol, Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{CheckName, EXIT_ESCAPE};

const SIMULATE_T_END: f64 = 20.0;
const VOLUME_T_END: f64 = 20.0;
/// The radial part of a Hopf displacement reaches rounding level near t = 18.
const HORIZONTAL_T_END: f64 = 12.0;
const DEFAULT_SAMPLES: usize = 500;
const DEFAULT_EMPIRICAL_ICS: usize = 5;
const LEMMA_GRID_STEP: f64 = 0.05;

fn open_output(cfg: &RunConfig) -> Result<Box<dyn Write>> {
    match cfg.out.as_deref().unwrap_or("-") {
        "-" => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        path => {
            let f = File::create(path)
                .map_err(|e| Error::Config(format!("--out: cannot create {path}: {e}")))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

fn io_err(e: io::Error) -> Error {
    Error::Config(format!("write failed: {e}"))
}

fn load_model(cfg: &RunConfig) -> Result<SystemModel> {
    match (&cfg.model, &cfg.model_file) {
        (Some(name), _) => by_name(name, &cfg.params),
        (None, Some(path)) => {
            if !cfg.params.is_empty() {
                return Err(Error::Config(
                    "--params applies to built-in models only, not --model-file".into(),
                ));
            }
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("--model-file: cannot read {path}: {e}")))?;
            parse_model_file(&text)
                .map_err(|e| Error::Config(format!("--model-file {path}: {e}")))?
                .build()
        }
        (None, None) => Err(Error::Config(
            "one of --model or --model-file is required".into(),
        )),
    }
}

fn initial_condition(cfg: &RunConfig, model: &SystemModel) -> Result<Vec<f64>> {
    let ic = cfg
        .ic
        .clone()
        .unwrap_or_else(|| default_initial_condition(model));
    if ic.len() != model.dim() {
        return Err(Error::Config(format!(
            "--ic: model `{}` has dimension {}, got {} values",
            model.name,
            model.dim(),
            ic.len()
        )));
    }
    Ok(ic)
}

fn displacements(cfg: &RunConfig, n: usize, k: usize) -> Result<Vec<Vec<f64>>> {
    if k == 0 || k > n {
        return Err(Error::Config(format!("--k: need 1 <= k <= {n}, got {k}")));
    }
    let ds = cfg.deltas.clone().unwrap_or_else(|| {
        (0..k)
            .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
            .collect()
    });
    if ds.len() != k || ds.iter().any(|d| d.len() != n) {
        return Err(Error::Config(format!(
            "--deltas: expected {k} vectors of length {n}, got {} vectors of length {}",
            ds.len(),
            ds[0].len()
        )));
    }
    Ok(ds)
}

fn report_escape(quiet: bool, t: f64) {
    if !quiet {
        eprintln!("state left the domain at t={t}; partial output written");
    }
}

pub fn simulate(cfg: &RunConfig, quiet: bool) -> Result<u8> {
    let model = load_model(cfg)?;
    let ic = initial_condition(cfg, &model)?;
    let t_end = cfg.t_end.unwrap_or(SIMULATE_T_END);
    let dt = cfg.dt.unwrap_or(tol::DEFAULT_DT);
    let stride = cfg.stride.unwrap_or(tol::DEFAULT_STRIDE);
    let (traj, escaped_at) = match integrate(&model, &ic, t_end, dt) {
        Ok(tr) => (tr, None),
        Err(Error::DomainEscape { t, partial }) => (*partial, Some(t)),
        Err(e) => return Err(e),
    };
    let mut out = open_output(cfg)?;
    write_trajectory_csv(&mut out, &traj, stride).map_err(io_err)?;
    if let Some(t) = escaped_at {
        writeln!(out, "# escaped at t={}", format_real(t)).map_err(io_err)?;
    }
    out.flush().map_err(io_err)?;
    match escaped_at {
        Some(t) => {
            report_escape(quiet, t);
            Ok(EXIT_ESCAPE)
        }
        None => {
            if !quiet && traj.domain_violations > 0 {
                eprintln!(
                    "{} samples lie slightly outside the domain",
                    traj.domain_violations
                );
            }
            Ok(0)
        }
    }
}

fn norms_of(traj: &Trajectory, norm: NormKind) -> Vec<f64> {
    traj.compound_state
        .as_ref()
        .map(|ys| ys.iter().map(|y| vector_norm(y, norm)).collect())
        .unwrap_or_default()
}

pub fn volume(cfg: &RunConfig, quiet: bool) -> Result<u8> {
    let model = load_model(cfg)?;
    let ic = initial_condition(cfg, &model)?;
    let k = cfg.k.unwrap_or(2);
    let deltas = displacements(cfg, model.dim(), k)?;
    let t_end = cfg.t_end.unwrap_or(VOLUME_T_END);
    let dt = cfg.dt.unwrap_or(tol::DEFAULT_DT);
    let norm = cfg.norm.unwrap_or(NormKind::L2);
    let (traj, values, escaped_at) =
        match compound_norm_series(&model, &ic, &deltas, t_end, dt, norm) {
            Ok((tr, v)) => (tr, v, None),
            Err(Error::DomainEscape { t, partial }) => {
                let v = norms_of(&partial, norm);
                (*partial, v, Some(t))
            }
            Err(e) => return Err(e),
        };
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let mut out = open_output(cfg)?;
    write_series_csv(
        &mut out,
        &["t", "norm_y", "ln_norm_y"],
        &[&traj.times, &values, &logs],
        cfg.stride.unwrap_or(tol::DEFAULT_STRIDE),
    )
    .map_err(io_err)?;
    if let Some(t) = escaped_at {
        writeln!(out, "# escaped at t={}", format_real(t)).map_err(io_err)?;
        out.flush().map_err(io_err)?;
        report_escape(quiet, t);
        return Ok(EXIT_ESCAPE);
    }
    out.flush().map_err(io_err)?;
    drop(out);
    let window = cfg
        .window
        .unwrap_or_else(|| trailing_window(t_end, tol::WINDOW_FRACTION));
    let fit = fit_decay(&traj.times, &values, window)?;
    println!(
        "rate={} r2={}",
        format_real(fit.rate),
        format_real(fit.r_squared)
    );
    Ok(0)
}

fn write_report(cfg: &RunConfig, report: &CertificateReport, quiet: bool) -> Result<u8> {
    let mut out = open_output(cfg)?;
    writeln!(out, "{}", report.to_json()).map_err(io_err)?;
    out.flush().map_err(io_err)?;
    if !quiet {
        eprintln!("{}: {}", report.check_name, report.verdict);
    }
    Ok(report.verdict.exit_code() as u8)
}

pub fn certify(cfg: &RunConfig, check: CheckName, quiet: bool) -> Result<u8> {
    let model = load_model(cfg)?;
    let n = model.dim();
    let seed = cfg.seed.unwrap_or(0);
    let norm = cfg.norm.unwrap_or(NormKind::L2);
    let k = cfg.k.unwrap_or(2);
    let opts = CheckOptions {
        window: cfg.window,
        dt: cfg.dt.unwrap_or(tol::DEFAULT_DT),
        n_traj: cfg.pairs.unwrap_or(CheckOptions::default().n_traj),
        traj_t_end: cfg.t_end.unwrap_or(CheckOptions::default().traj_t_end),
        seed,
        ..CheckOptions::default()
    };
    let spec = SampleSpec::uniform(cfg.samples.unwrap_or(DEFAULT_SAMPLES), seed);
    let report = match check {
        CheckName::KContractionPointwise => {
            check_k_contraction_pointwise(&model, k, norm, &spec, &opts)?
        }
        CheckName::KContractionEmpirical => {
            let deltas = displacements(cfg, n, k)?;
            let ics = match &cfg.ic {
                Some(_) => vec![initial_condition(cfg, &model)?],
                None => {
                    let count = cfg.pairs.unwrap_or(DEFAULT_EMPIRICAL_ICS);
                    sample_domain(&model.domain, count, &mut ChaCha8Rng::seed_from_u64(seed))?
                }
            };
            let t_end = cfg.t_end.unwrap_or(VOLUME_T_END);
            check_k_contraction_empirical(&model, k, norm, &ics, &[deltas], t_end, &opts)?
        }
        CheckName::Partial => check_partial_contraction(&model, norm, &spec, &opts)?,
        CheckName::Horizontal => {
            let ic = initial_condition(cfg, &model)?;
            let delta = displacements(cfg, n, 1)?.remove(0);
            let t_end = cfg.t_end.unwrap_or(HORIZONTAL_T_END);
            check_horizontal_decay(&model, norm, &ic, &delta, t_end, &opts)?
        }
        CheckName::Theorem1 => check_theorem1_conditions(&model, norm, &spec, &opts)?,
        CheckName::Theorem2 => check_theorem2_conditions(&model, k, norm, &spec, &opts)?,
        CheckName::FlowInvariant => {
            let frame = model
                .frame
                .as_ref()
                .ok_or_else(|| Error::MissingStructure {
                    model: model.name.clone(),
                    what: "a horizontal/vertical splitting (H, Q)",
                })?;
            let x = model.domain.representative_point();
            let (h, q) = ((frame.h)(&x), (frame.q)(&x));
            let mut report = check_flow_invariant_subspace(&h, &q, &model, &spec, &opts)?;
            report.note("H and Q taken at the domain's representative point");
            report
        }
    };
    write_report(cfg, &report, quiet)
}

pub fn lemma1(cfg: &RunConfig, quiet: bool) -> Result<u8> {
    let params = LemmaParams {
        k: cfg.k.unwrap_or(3),
        n: cfg.n.unwrap_or(5),
        ell: cfg.ell.unwrap_or(2),
        beta: cfg.beta.unwrap_or(1.0),
        gamma1: cfg.gamma1.unwrap_or(1.5),
        gamma2: cfg.gamma2.unwrap_or(1.5),
    };
    params
        .validate()
        .map_err(|e| Error::Config(format!("lemma1: {e}")))?;
    let family = SyntheticFamily::new(params, cfg.seed.unwrap_or(0))?;
    let grid = match cfg.t_end {
        Some(t_end) => {
            let steps = (t_end / LEMMA_GRID_STEP).round().max(2.0) as usize;
            (0..=steps).map(|i| i as f64 * LEMMA_GRID_STEP).collect()
        }
        None => default_grid(),
    };
    let report = verify_lemma1(&family, &params, cfg.norm.unwrap_or(NormKind::L2), &grid)?;
    write_report(cfg, &report, quiet)
}
