//! Built-in models: the Andronov-Hopf oscillator, the forced Duffing oscillator,
//! a triangular linear system and linear systems with a flow-invariant subspace.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{DomainSpec, Factorization, HorizontalFrame, SystemModel};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::tol;

pub const MODEL_NAMES: [&str; 4] = ["hopf", "duffing", "triangular2d", "linear-invariant"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfParams {
    pub gamma1: f64,
    pub gamma2: f64,
}

impl Default for HopfParams {
    fn default() -> Self {
        Self {
            gamma1: 0.25,
            gamma2: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuffingParams {
    pub theta: [f64; 5],
}

impl Default for DuffingParams {
    fn default() -> Self {
        Self {
            theta: [1.0, 1.0, 0.3, 0.37, 1.2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangularParams {
    pub c1: f64,
    pub c2: f64,
}

impl Default for TriangularParams {
    fn default() -> Self {
        Self { c1: 0.5, c2: 1.0 }
    }
}

fn col(v: &[f64]) -> DenseMatrix {
    DenseMatrix::from_fn(v.len(), 1, |i, _| v[i])
}

/// `ẋ1 = −x2 − x1(r² − 1)`, `ẋ2 = x1 − x2(r² − 1)` on the annulus `γ1 ≤ r² ≤ γ2`.
///
/// Carries the factorization `p = r² − 1` (virtual system `ξ̇ = −2r²ξ`) and the
/// frame `H = x/r²`, `Q = (−x2, x1)/r²`.
pub fn hopf(params: HopfParams) -> Result<SystemModel> {
    let domain = DomainSpec::annulus(params.gamma1, params.gamma2)?;
    let f = Arc::new(|_t: f64, x: &[f64]| {
        let s = x[0] * x[0] + x[1] * x[1] - 1.0;
        vec![-x[1] - x[0] * s, x[0] - x[1] * s]
    });
    let jac = Arc::new(|_t: f64, x: &[f64]| {
        let (a, b) = (x[0], x[1]);
        DenseMatrix::from_rows(&[
            vec![1.0 - 3.0 * a * a - b * b, -2.0 * a * b - 1.0],
            vec![-2.0 * a * b + 1.0, 1.0 - a * a - 3.0 * b * b],
        ])
        .expect("2x2 literal")
    });
    let fac = Factorization {
        ell: 1,
        p: Arc::new(|x: &[f64]| vec![x[0] * x[0] + x[1] * x[1] - 1.0]),
        dp: Arc::new(|x: &[f64]| DenseMatrix::from_fn(1, 2, |_, j| 2.0 * x[j])),
        g: Arc::new(|_t: f64, xi: &[f64], x: &[f64]| {
            vec![-x[1] - x[0] * xi[0], x[0] - x[1] * xi[0]]
        }),
        j_xi: Arc::new(|_t: f64, _xi: &[f64], x: &[f64]| {
            DenseMatrix::diag(&[-2.0 * (x[0] * x[0] + x[1] * x[1])])
        }),
        m: Some(Arc::new(|_x: &[f64]| vec![0.0])),
    };
    let frame = HorizontalFrame {
        ell: 1,
        h: Arc::new(|x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            col(&[x[0] / r2, x[1] / r2])
        }),
        q: Arc::new(|x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            col(&[-x[1] / r2, x[0] / r2])
        }),
        // d/dt (x / r²) along the flow = (Rx + (r² − 1)x) / r² with R the quarter rotation
        h_f: Some(Arc::new(|_t: f64, x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            let s = r2 - 1.0;
            col(&[(-x[1] + s * x[0]) / r2, (x[0] + s * x[1]) / r2])
        })),
    };
    SystemModel::new("hopf", 2, f, domain)?
        .with_jacobian(jac)?
        .with_factorization(fac)?
        .with_frame(frame)
}

/// `ẋ1 = x2`, `ẋ2 = θ1 x1 − θ2 x1³ − θ3 x2 + θ4 cos(θ5 t)` on `[−3, 3]²`.
pub fn duffing(params: DuffingParams) -> Result<SystemModel> {
    if let Some(i) = params
        .theta
        .iter()
        .position(|&v| !(v > 0.0 && v.is_finite()))
    {
        return Err(Error::InvalidInput(format!(
            "theta{} must be positive, got {}",
            i + 1,
            params.theta[i]
        )));
    }
    let [t1, t2, t3, t4, t5] = params.theta;
    let f = Arc::new(move |t: f64, x: &[f64]| {
        vec![
            x[1],
            t1 * x[0] - t2 * x[0].powi(3) - t3 * x[1] + t4 * (t5 * t).cos(),
        ]
    });
    let jac = Arc::new(move |_t: f64, x: &[f64]| {
        DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![t1 - 3.0 * t2 * x[0] * x[0], -t3]])
            .expect("2x2 literal")
    });
    SystemModel::new("duffing", 2, f, DomainSpec::cube(2, 3.0)?)?.with_jacobian(jac)
}

/// `ẋ1 = c1 x1 + x2`, `ẋ2 = −c2 x2` on `[−10, 10]²` with the constant frame `H = e2`, `Q = e1`.
pub fn triangular2d(params: TriangularParams) -> Result<SystemModel> {
    let TriangularParams { c1, c2 } = params;
    if !(c1 > 0.0 && c2 > 0.0 && c1.is_finite() && c2.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "c1 and c2 must be positive, got ({c1}, {c2})"
        )));
    }
    let a = DenseMatrix::from_rows(&[vec![c1, 1.0], vec![0.0, -c2]])?;
    let frame = HorizontalFrame {
        ell: 1,
        h: Arc::new(|_x: &[f64]| col(&[0.0, 1.0])),
        q: Arc::new(|_x: &[f64]| col(&[1.0, 0.0])),
        h_f: Some(Arc::new(|_t: f64, _x: &[f64]| DenseMatrix::zeros(2, 1))),
    };
    linear_with_name("triangular2d", a, DomainSpec::cube(2, 10.0)?)?.with_frame(frame)
}

/// Plain linear model `ẋ = Ax`.
pub fn linear(a: DenseMatrix, domain: DomainSpec) -> Result<SystemModel> {
    linear_with_name("linear", a, domain)
}

fn linear_with_name(name: &str, a: DenseMatrix, domain: DomainSpec) -> Result<SystemModel> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "A must be square, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let af = a.clone();
    let aj = a;
    SystemModel::new(
        name,
        n,
        Arc::new(move |_t, x| af.matvec(x).expect("dimension checked")),
        domain,
    )?
    .with_jacobian(Arc::new(move |_t, _x| aj.clone()))
}

/// Residuals of the orthonormal decomposition `R^n = span H ⊕ span Q`:
/// `‖HᵀH − I‖`, `‖QᵀQ − I‖`, `‖HᵀQ‖`, `‖HHᵀ + QQᵀ − I‖` (Frobenius).
pub fn orthonormality_residuals(h: &DenseMatrix, q: &DenseMatrix) -> Result<[f64; 4]> {
    let n = h.rows();
    if q.rows() != n || h.cols() + q.cols() != n || h.cols() == 0 {
        return Err(Error::InvalidInput(format!(
            "H is {}x{} and Q is {}x{}; need n x l and n x (n-l) with 1 <= l <= n",
            h.rows(),
            h.cols(),
            q.rows(),
            q.cols()
        )));
    }
    let ht = h.transpose();
    let qt = q.transpose();
    let hh = ht
        .matmul(h)?
        .sub(&DenseMatrix::identity(h.cols()))?
        .frobenius();
    let qq = if q.cols() == 0 {
        0.0
    } else {
        qt.matmul(q)?
            .sub(&DenseMatrix::identity(q.cols()))?
            .frobenius()
    };
    let hq = if q.cols() == 0 {
        0.0
    } else {
        ht.matmul(q)?.frobenius()
    };
    let mut proj = h.matmul(&ht)?;
    if q.cols() > 0 {
        proj = proj.add(&q.matmul(&qt)?)?;
    }
    let complete = proj.sub(&DenseMatrix::identity(n))?.frobenius();
    Ok([hh, qq, hq, complete])
}

/// `ẋ = Ax` where `span Q` is invariant under `A`, with factorization `p = Hᵀx`,
/// `g = A(Hξ + QQᵀx)` and the constant frame `(H, Q)`.
pub fn linear_invariant(
    a: DenseMatrix,
    h: DenseMatrix,
    q: DenseMatrix,
    domain: Option<DomainSpec>,
) -> Result<SystemModel> {
    let n = a.rows();
    if !a.is_square() || h.rows() != n {
        return Err(Error::InvalidInput(format!(
            "A is {}x{} and H has {} rows",
            a.rows(),
            a.cols(),
            h.rows()
        )));
    }
    let res = orthonormality_residuals(&h, &q)?;
    if let Some(worst) = res.iter().copied().find(|r| *r > tol::ORTHONORMAL) {
        return Err(Error::InvalidInput(format!(
            "H and Q must be orthonormal and complementary (residual {worst:e})"
        )));
    }
    let ht = h.transpose();
    let coupling = if q.cols() == 0 {
        0.0
    } else {
        ht.matmul(&a)?.matmul(&q)?.frobenius()
    };
    if coupling > tol::ORTHONORMAL {
        return Err(Error::NotFlowInvariant { residual: coupling });
    }
    let ell = h.cols();
    let j_xi = ht.matmul(&a)?.matmul(&h)?;
    let qqt = q.matmul(&q.transpose())?;
    let domain = match domain {
        Some(d) => d,
        None => DomainSpec::cube(n, 10.0)?,
    };

    let (hp, hd, hg, ag) = (ht.clone(), ht.clone(), h.clone(), a.clone());
    let fac = Factorization {
        ell,
        p: Arc::new(move |x: &[f64]| hp.matvec(x).expect("dimension checked")),
        dp: Arc::new(move |_x: &[f64]| hd.clone()),
        g: Arc::new(move |_t: f64, xi: &[f64], x: &[f64]| {
            let hx = hg.matvec(xi).expect("dimension checked");
            let qx = qqt.matvec(x).expect("dimension checked");
            let z: Vec<f64> = hx.iter().zip(&qx).map(|(a, b)| a + b).collect();
            ag.matvec(&z).expect("dimension checked")
        }),
        j_xi: Arc::new(move |_t: f64, _xi: &[f64], _x: &[f64]| j_xi.clone()),
        m: Some(Arc::new(move |_x: &[f64]| vec![0.0; ell])),
    };
    let (hf, qf) = (h.clone(), q.clone());
    let frame = HorizontalFrame {
        ell,
        h: Arc::new(move |_x: &[f64]| hf.clone()),
        q: Arc::new(move |_x: &[f64]| qf.clone()),
        h_f: Some(Arc::new(move |_t: f64, _x: &[f64]| {
            DenseMatrix::zeros(n, ell)
        })),
    };
    linear_with_name("linear-invariant", a, domain)?
        .with_factorization(fac)?
        .with_frame(frame)
}

/// The two-dimensional example shipped under the name `linear-invariant`:
/// `A = [[−1, 0], [1, −0.5]]`, `H = e1`, `Q = e2`.
pub fn default_linear_invariant() -> Result<SystemModel> {
    let a = DenseMatrix::from_rows(&[vec![-1.0, 0.0], vec![1.0, -0.5]])?;
    let h = DenseMatrix::from_rows(&[vec![1.0], vec![0.0]])?;
    let q = DenseMatrix::from_rows(&[vec![0.0], vec![1.0]])?;
    linear_invariant(a, h, q, None)
}

fn take_params<const N: usize>(
    model: &str,
    names: [&str; N],
    defaults: [f64; N],
    params: &BTreeMap<String, f64>,
) -> Result<[f64; N]> {
    if let Some(unknown) = params.keys().find(|k| !names.contains(&k.as_str())) {
        return Err(Error::Config(format!(
            "unknown parameter `{unknown}` for model `{model}` (accepted: {})",
            if N == 0 {
                "none".to_string()
            } else {
                names.join(", ")
            }
        )));
    }
    let mut out = defaults;
    for (slot, name) in out.iter_mut().zip(names) {
        if let Some(v) = params.get(name) {
            *slot = *v;
        }
    }
    Ok(out)
}

/// Looks up a built-in model by name, overriding default parameters from `params`.
pub fn by_name(name: &str, params: &BTreeMap<String, f64>) -> Result<SystemModel> {
    match name {
        "hopf" => {
            let d = HopfParams::default();
            let [gamma1, gamma2] =
                take_params(name, ["gamma1", "gamma2"], [d.gamma1, d.gamma2], params)?;
            hopf(HopfParams { gamma1, gamma2 })
        }
        "duffing" => {
            let theta = take_params(
                name,
                ["theta1", "theta2", "theta3", "theta4", "theta5"],
                DuffingParams::default().theta,
                params,
            )?;
            duffing(DuffingParams { theta })
        }
        "triangular2d" => {
            let d = TriangularParams::default();
            let [c1, c2] = take_params(name, ["c1", "c2"], [d.c1, d.c2], params)?;
            triangular2d(TriangularParams { c1, c2 })
        }
        "linear-invariant" => {
            take_params::<0>(name, [], [], params)?;
            default_linear_invariant()
        }
        other => Err(Error::Config(format!(
            "unknown model `{other}` (available: {})",
            MODEL_NAMES.join(", ")
        ))),
    }
}

/// Default initial condition used by the command-line tool.
pub fn default_initial_condition(model: &SystemModel) -> Vec<f64> {
    match model.name.as_str() {
        "hopf" => vec![2.0, 0.0],
        "duffing" => vec![1.0, 0.0],
        "triangular2d" => vec![0.0, 0.0],
        _ => model.domain.representative_point(),
    }
}
