//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use kcontract::certify::{
    check_horizontal_decay, check_k_contraction_pointwise, check_partial_contraction,
    check_theorem1_conditions, check_theorem2_conditions, compound_norm_series, default_grid,
    fit_decay, verify_lemma1, CheckOptions, LemmaParams, SyntheticFamily, Verdict,
};
use kcontract::compound::{add_compound, binomial, mult_compound, wedge};
use kcontract::dynamics::{integrate, integrate_compound, integrate_variational, SystemModel};
use kcontract::linalg::{DenseMatrix, NormKind};
use kcontract::sampling::{sample_domain, SampleSpec};
use kcontract::systems::{
    duffing, hopf, triangular2d, DuffingParams, HopfParams, TriangularParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned tolerances and budgets.
const AC1_REL: f64 = 1e-10;
const AC1_BUDGET: f64 = 5.0;
const AC2_ADDITIVITY: f64 = 1e-12;
const AC2_TRIANGULAR: f64 = 1e-12;
/// Log-symmetric about 10: first order gives ~10, zeroth ~1, second ~100.
const AC2_FD_RATIO: (f64, f64) = (4.0, 25.0);
const AC2_FD_ABS: f64 = 1e-4;
/// For k = 1 the difference quotient is exact, leaving only rounding.
const AC2_FD_K1: f64 = 1e-8;
const AC2_BUDGET: f64 = 5.0;
const AC3_RATE: f64 = -0.3;
const AC3_TOL: f64 = 1e-3;
const AC3_BUDGET: f64 = 10.0;
const AC4_MU: f64 = 1e-9;
const AC4_POINTWISE_SLACK: f64 = 1e-6;
const AC4_BRIDGE: f64 = 1e-8;
const AC4_HORIZONTAL: f64 = 0.05;
const AC4_CONST: f64 = 1e-9;
const AC4_COPPEL: f64 = 6.0 + 1e-3;
const AC4_COMPOUND: f64 = 0.02;
const AC4_BUDGET: f64 = 30.0;
const AC5_TOL: f64 = 1e-4;
const AC6_RATE_SLACK: f64 = 1e-2;
const AC6_BUDGET: f64 = 10.0;
const AC7_REL: f64 = 1e-5;
const AC7_LIOUVILLE: f64 = 1e-6;
const AC7_BUDGET: f64 = 10.0;

type Check = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: f64) -> Result<Duration, String> {
    let el = start.elapsed();
    ensure(el.as_secs_f64() < budget, || {
        format!("runtime {:.2} s exceeds {budget} s", el.as_secs_f64())
    })?;
    Ok(el)
}

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DenseMatrix {
    DenseMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
}

fn max_abs_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.sub(b).unwrap().max_abs()
}

fn ac1() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let (n, p, m) = (
            rng.gen_range(1..=6),
            rng.gen_range(1..=6),
            rng.gen_range(1..=6),
        );
        let k = rng.gen_range(1..=n.min(p).min(m));
        let a = random_matrix(&mut rng, n, p);
        let b = random_matrix(&mut rng, p, m);
        let lhs = mult_compound(&a.matmul(&b).unwrap(), k).unwrap();
        let rhs = mult_compound(&a, k)
            .unwrap()
            .matmul(&mult_compound(&b, k).unwrap())
            .unwrap();
        worst = worst.max(max_abs_diff(&lhs, &rhs) / rhs.max_abs().max(1e-300));
    }
    ensure(worst <= AC1_REL, || {
        format!("max relative error {worst:.3e} > {AC1_REL:e}")
    })?;
    let el = within_budget(start, AC1_BUDGET)?;
    Ok(format!(
        "500 triples, max relative error {worst:.3e} (tol {AC1_REL:e}), {:.2} s",
        el.as_secs_f64()
    ))
}

/// `|((I + εA)^(k) − I)/ε − A^[k]|_max`.
fn fd_error(a: &DenseMatrix, k: usize, eps: f64) -> f64 {
    let n = a.rows();
    let r = binomial(n, k).unwrap() as usize;
    let m = mult_compound(&DenseMatrix::identity(n).add(&a.scale(eps)).unwrap(), k).unwrap();
    let fd = m.sub(&DenseMatrix::identity(r)).unwrap().scale(1.0 / eps);
    max_abs_diff(&fd, &add_compound(a, k).unwrap())
}

fn ac2() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut additivity, mut tri) = (0.0f64, 0.0f64);
    let (mut ratio_lo, mut ratio_hi, mut fd_worst, mut k1_worst) =
        (f64::INFINITY, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..200 {
        let n = rng.gen_range(2..=6);
        let k = rng.gen_range(1..=n);
        let a = random_matrix(&mut rng, n, n);
        let b = random_matrix(&mut rng, n, n);
        let sum = add_compound(&a.add(&b).unwrap(), k).unwrap();
        let parts = add_compound(&a, k)
            .unwrap()
            .add(&add_compound(&b, k).unwrap())
            .unwrap();
        additivity = additivity.max(max_abs_diff(&sum, &parts));

        let e6 = fd_error(&a, k, 1e-6);
        let e7 = fd_error(&a, k, 1e-7);
        if k == 1 {
            k1_worst = k1_worst.max(e6).max(e7);
        } else {
            fd_worst = fd_worst.max(e6);
            ratio_lo = ratio_lo.min(e6 / e7);
            ratio_hi = ratio_hi.max(e6 / e7);
        }

        // upper-triangular: compound is upper-triangular with diagonal = sums of k eigenvalues
        let u = DenseMatrix::from_fn(n, n, |i, j| if i <= j { a[(i, j)] } else { 0.0 });
        let c = add_compound(&u, k).unwrap();
        let sets: Vec<Vec<usize>> = subsets(n, k);
        for (row, set) in sets.iter().enumerate() {
            let eig_sum: f64 = set.iter().map(|&i| u[(i, i)]).sum();
            tri = tri.max((c[(row, row)] - eig_sum).abs());
            for col in 0..row {
                tri = tri.max(c[(row, col)].abs());
            }
        }
    }
    ensure(additivity <= AC2_ADDITIVITY, || {
        format!("additivity error {additivity:.3e}")
    })?;
    ensure(tri <= AC2_TRIANGULAR, || {
        format!("triangular eigenvalue-sum error {tri:.3e}")
    })?;
    ensure(k1_worst <= AC2_FD_K1, || {
        format!("k = 1 finite-difference error {k1_worst:.3e}")
    })?;
    ensure(fd_worst <= AC2_FD_ABS, || {
        format!("finite-difference error {fd_worst:.3e} at eps=1e-6")
    })?;
    ensure(
        ratio_lo >= AC2_FD_RATIO.0 && ratio_hi <= AC2_FD_RATIO.1,
        || {
            format!("error ratio eps=1e-6 vs 1e-7 in [{ratio_lo:.2}, {ratio_hi:.2}], expected within {AC2_FD_RATIO:?}")
        },
    )?;
    let el = within_budget(start, AC2_BUDGET)?;
    Ok(format!(
        "additivity {additivity:.1e}, triangular {tri:.1e}, FD error ratio in [{ratio_lo:.2}, {ratio_hi:.2}], {:.2} s",
        el.as_secs_f64()
    ))
}

/// Lexicographic 0-based k-subsets of `0..n`, written independently of the library's ranking.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn extend(from: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in from..n {
            cur.push(i);
            extend(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    extend(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Seeded starts in `[−1.5, 1.5]²`, inside the region the forced Duffing flow keeps within its box.
fn duffing_starts(rng: &mut ChaCha8Rng, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| vec![rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)])
        .collect()
}

fn unit_deltas(n: usize, k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn ac3() -> Check {
    let start = Instant::now();
    let m = duffing(DuffingParams::default()).map_err(|e| e.to_string())?;
    let ics = duffing_starts(&mut ChaCha8Rng::seed_from_u64(3), 5);
    let mut rates = Vec::new();
    for a in &ics {
        let (tr, ys) = compound_norm_series(&m, a, &unit_deltas(2, 2), 50.0, 1e-3, NormKind::L2)
            .map_err(|e| e.to_string())?;
        let fit = fit_decay(&tr.times, &ys, (0.0, 50.0)).map_err(|e| e.to_string())?;
        ensure((fit.rate - AC3_RATE).abs() <= AC3_TOL, || {
            format!("rate {} from {a:?}", fit.rate)
        })?;
        rates.push(fit.rate);
    }
    let el = within_budget(start, AC3_BUDGET)?;
    let spread = rates
        .iter()
        .map(|r| (r - AC3_RATE).abs())
        .fold(0.0, f64::max);
    Ok(format!(
        "5 initial conditions, max |rate + 0.3| = {spread:.2e} (tol {AC3_TOL:e}), {:.2} s",
        el.as_secs_f64()
    ))
}

fn constant(rep: &kcontract::certify::CertificateReport, name: &str) -> Result<f64, String> {
    rep.constants
        .get(name)
        .copied()
        .ok_or_else(|| format!("report `{}` lacks `{name}`", rep.check_name))
}

fn residual(rep: &kcontract::certify::CertificateReport, name: &str) -> Result<f64, String> {
    rep.residuals
        .get(name)
        .copied()
        .ok_or_else(|| format!("report `{}` lacks residual `{name}`", rep.check_name))
}

fn hopf_pointwise_bound(m: &SystemModel) -> Result<f64, String> {
    // |r² − 1| ≤ e^{−t/2}|r0² − 1| on 10 seeded trajectories, evaluated independently of the checker
    let starts = sample_domain(&m.domain, 10, &mut ChaCha8Rng::seed_from_u64(41))
        .map_err(|e| e.to_string())?;
    let mut worst = f64::NEG_INFINITY;
    for a in &starts {
        let tr = integrate(m, a, 10.0, 1e-3).map_err(|e| e.to_string())?;
        let p0 = (a[0] * a[0] + a[1] * a[1] - 1.0).abs();
        for (t, x) in tr.times.iter().zip(&tr.states) {
            let p = (x[0] * x[0] + x[1] * x[1] - 1.0).abs();
            worst = worst.max(p - (-0.5 * t).exp() * p0);
        }
    }
    Ok(worst)
}

fn ac4() -> Check {
    let start = Instant::now();
    let e = |e: kcontract::Error| e.to_string();
    let m = hopf(HopfParams::default()).map_err(e)?;
    let opts = CheckOptions::default();

    let part = check_partial_contraction(&m, NormKind::L2, &SampleSpec::uniform(2000, 40), &opts)
        .map_err(e)?;
    ensure(part.verdict == Verdict::Certified, || {
        format!("partial: {} ({})", part.verdict, part.notes)
    })?;
    let mu = constant(&part, "mu_sup")?;
    ensure((mu + 0.5).abs() <= AC4_MU, || {
        format!("partial mu_sup {mu}")
    })?;
    let excess = hopf_pointwise_bound(&m)?;
    ensure(excess <= AC4_POINTWISE_SLACK, || {
        format!("pointwise bound exceeded by {excess:.3e}")
    })?;

    let t1 = check_theorem1_conditions(&m, NormKind::L2, &SampleSpec::uniform(2000, 7), &opts)
        .map_err(e)?;
    let bridge = residual(&t1, "bridge_max")?;
    ensure(
        t1.verdict == Verdict::Certified && bridge <= AC4_BRIDGE,
        || format!("theorem1 {} residual {bridge:.3e}", t1.verdict),
    )?;
    let hz = check_horizontal_decay(&m, NormKind::L2, &[2.0, 0.0], &[1.0, 0.0], 12.0, &opts)
        .map_err(e)?;
    let hrate = constant(&hz, "rate")?;
    ensure((hrate + 2.0).abs() <= AC4_HORIZONTAL, || {
        format!("horizontal rate {hrate}")
    })?;

    let t2 = check_theorem2_conditions(&m, 2, NormKind::L2, &SampleSpec::uniform(2000, 11), &opts)
        .map_err(e)?;
    let (c5, c6, coppel) = (
        constant(&t2, "c5")?,
        constant(&t2, "c6")?,
        constant(&t2, "coppel_integral_max")?,
    );
    ensure(
        (c5 - 0.25).abs() <= AC4_CONST && (c6 - 4.0).abs() <= AC4_CONST,
        || format!("c5 = {c5}, c6 = {c6}"),
    )?;
    ensure(coppel <= AC4_COPPEL, || format!("Coppel integral {coppel}"))?;
    let (tr, ys) = compound_norm_series(
        &m,
        &[2.0, 0.0],
        &unit_deltas(2, 2),
        40.0,
        1e-3,
        NormKind::L2,
    )
    .map_err(e)?;
    let crate_ = fit_decay(&tr.times, &ys, (20.0, 40.0)).map_err(e)?.rate;
    ensure((crate_ + 2.0).abs() <= AC4_COMPOUND, || {
        format!("2-compound rate {crate_}")
    })?;

    let el = within_budget(start, AC4_BUDGET)?;
    Ok(format!(
        "mu_sup {mu}, pointwise excess {excess:.1e}, bridge {bridge:.1e}, horizontal rate {hrate:.4}, \
         c5 {c5}, c6 {c6}, Coppel {coppel:.4}, compound rate {crate_:.6}, {:.2} s",
        el.as_secs_f64()
    ))
}

fn ac5() -> Check {
    let e = |e: kcontract::Error| e.to_string();
    let opts = CheckOptions::default();
    let a = triangular2d(TriangularParams { c1: 0.5, c2: 1.0 }).map_err(e)?;
    let rep =
        check_k_contraction_pointwise(&a, 2, NormKind::L2, &SampleSpec::uniform(500, 5), &opts)
            .map_err(e)?;
    let mu = constant(&rep, "mu_sup")?;
    ensure(
        rep.verdict == Verdict::Certified && (mu + 0.5).abs() <= AC5_TOL,
        || format!("2-contraction {} at {mu}", rep.verdict),
    )?;
    let tr = integrate(&a, &[1.0, 0.0], 4.0, 1e-3).map_err(e)?;
    let x1_end = tr.states.last().unwrap()[0];
    ensure(
        x1_end.abs() > 1.0 && (x1_end - 2f64.exp()).abs() < 1e-9,
        || format!("x1(4) = {x1_end}"),
    )?;

    let b = triangular2d(TriangularParams { c1: 1.0, c2: 0.5 }).map_err(e)?;
    let hz = check_horizontal_decay(&b, NormKind::L2, &[0.0, 0.0], &[1.0, 1.0], 10.0, &opts)
        .map_err(e)?;
    let hrate = constant(&hz, "rate")?;
    ensure((hrate + 0.5).abs() <= AC5_TOL, || {
        format!("horizontal rate {hrate}")
    })?;
    let (tr, ys) = compound_norm_series(
        &b,
        &[0.0, 0.0],
        &unit_deltas(2, 2),
        10.0,
        1e-3,
        NormKind::L2,
    )
    .map_err(e)?;
    let grow = fit_decay(&tr.times, &ys, (0.0, 10.0)).map_err(e)?.rate;
    ensure((grow - 0.5).abs() <= AC5_TOL, || {
        format!("2-compound rate {grow}")
    })?;
    Ok(format!(
        "(0.5, 1): 2-contraction at {mu}, witness x1(4) = {x1_end:.6} from (1, 0); \
         (1, 0.5): horizontal rate {hrate:.6}, 2-compound rate {grow:+.6}"
    ))
}

fn ac6() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let grid = default_grid();
    let (mut worst_margin, mut top_cases) = (f64::NEG_INFINITY, 0);
    for seed in 0..100u64 {
        let k = rng.gen_range(2..=4);
        let n = rng.gen_range(k.max(3)..=6);
        let params = LemmaParams {
            k,
            n,
            ell: rng.gen_range(1..k),
            beta: rng.gen_range(0.2..2.0),
            gamma1: rng.gen_range(1.0..2.0),
            gamma2: rng.gen_range(1.0..2.0),
        };
        let fam = SyntheticFamily::new(params, seed).map_err(|e| e.to_string())?;
        let rep = verify_lemma1(&fam, &params, NormKind::L2, &grid).map_err(|e| e.to_string())?;
        let rate = constant(&rep, "rate")?;
        ensure(rate <= -params.beta + AC6_RATE_SLACK, || {
            format!("{params:?}: rate {rate}")
        })?;
        if params.ell == k - 1 {
            top_cases += 1;
            let bound = -((k - 1) as f64) * params.beta;
            ensure(rate <= bound + AC6_RATE_SLACK, || {
                format!("{params:?}: rate {rate} vs {bound}")
            })?;
        }
        ensure(rep.verdict == Verdict::Certified, || {
            format!("{params:?}: {}", rep.notes)
        })?;
        worst_margin = worst_margin.max(rate + params.ell as f64 * params.beta);
    }
    let el = within_budget(start, AC6_BUDGET)?;
    Ok(format!(
        "100 families ({top_cases} with ell = k-1), max (rate + ell·beta) = {worst_margin:.2e}, {:.2} s",
        el.as_secs_f64()
    ))
}

/// Exact `det Φ(t)`: `e^{−0.3t}` for Duffing; for Hopf, `e^{2t}/(r0²e^{2t} + 1 − r0²)²`.
fn liouville_oracle(model: &str, a: &[f64], t: f64) -> f64 {
    match model {
        "duffing" => (-0.3 * t).exp(),
        _ => {
            let r2 = a[0] * a[0] + a[1] * a[1];
            (2.0 * t).exp() / (r2 * (2.0 * t).exp() + 1.0 - r2).powi(2)
        }
    }
}

fn ac7() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut consistency, mut liouville) = (0.0f64, 0.0f64);
    for m in [
        hopf(HopfParams::default()).unwrap(),
        duffing(DuffingParams::default()).unwrap(),
    ] {
        let starts = match m.name.as_str() {
            "duffing" => duffing_starts(&mut rng, 3),
            _ => sample_domain(&m.domain, 3, &mut rng).map_err(|e| e.to_string())?,
        };
        for a in &starts {
            let deltas: Vec<Vec<f64>> = (0..2)
                .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect();
            let y0 = wedge(&deltas).unwrap();
            let var =
                integrate_variational(&m, a, &deltas, 5.0, 1e-3).map_err(|e| e.to_string())?;
            let comp =
                integrate_compound(&m, a, 2, &y0.coeffs, 5.0, 1e-3).map_err(|e| e.to_string())?;
            let (vs, ys) = (var.var_states.unwrap(), comp.compound_state.unwrap());
            for (i, (d, y)) in vs.iter().zip(&ys).enumerate() {
                let w = wedge(d).unwrap().coeffs[0];
                consistency = consistency.max((w - y[0]).abs() / y[0].abs());
                let det = y0.coeffs[0] * liouville_oracle(&m.name, a, comp.times[i]);
                liouville = liouville.max((y[0] - det).abs() / det.abs());
            }
        }
    }
    ensure(consistency <= AC7_REL, || {
        format!("wedge vs compound {consistency:.3e}")
    })?;
    ensure(liouville <= AC7_LIOUVILLE, || {
        format!("Liouville {liouville:.3e}")
    })?;
    let el = within_budget(start, AC7_BUDGET)?;
    Ok(format!(
        "wedge vs compound {consistency:.2e} (tol {AC7_REL:e}), Liouville {liouville:.2e} (tol {AC7_LIOUVILLE:e}), {:.2} s",
        el.as_secs_f64()
    ))
}

fn ac8() -> Check {
    let commands: [&[&str]; 6] = [
        &[
            "simulate", "--model", "hopf", "--ic", "2,0", "--t-end", "20",
        ],
        &[
            "simulate", "--model", "duffing", "--ic", "1,0", "--t-end", "100",
        ],
        &[
            "volume", "--model", "hopf", "--k", "2", "--t-end", "40", "--window", "20,40",
        ],
        &[
            "certify",
            "--model",
            "hopf",
            "--check",
            "theorem1",
            "--samples",
            "2000",
            "--seed",
            "7",
        ],
        &[
            "certify", "--model", "hopf", "--check", "theorem2", "--seed", "3",
        ],
        &[
            "lemma1", "--k", "3", "--n", "5", "--ell", "2", "--beta", "1", "--seed", "9",
        ],
    ];
    let exe = env!("CARGO_BIN_EXE_kcontract");
    let mut bytes = 0;
    for args in commands {
        let run = || {
            Command::new(exe)
                .args(args)
                .arg("--quiet")
                .output()
                .map_err(|e| e.to_string())
        };
        let (a, b) = (run()?, run()?);
        ensure(
            a.status.code() == b.status.code() && a.stdout == b.stdout,
            || format!("outputs differ for {args:?}"),
        )?;
        ensure(!a.stdout.is_empty(), || format!("no output for {args:?}"))?;
        bytes += a.stdout.len();
    }
    Ok(format!("6 commands run twice, {bytes} bytes identical"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("AC1", "Cauchy-Binet for multiplicative compounds", ac1),
        ("AC2", "additive compound identities", ac2),
        ("AC3", "Duffing 2-compound decay", ac3),
        ("AC4", "Hopf oscillator on the annulus", ac4),
        ("AC5", "triangular separations", ac5),
        ("AC6", "wedge decay on synthetic families", ac6),
        ("AC7", "compound/variational consistency", ac7),
        ("AC8", "CLI determinism", ac8),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        match std::panic::catch_unwind(f) {
            Ok(Ok(detail)) => println!("PASS {id} {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL {id} {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {id} {name}: panicked");
            }
        }
    }
    println!(
        "{}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
