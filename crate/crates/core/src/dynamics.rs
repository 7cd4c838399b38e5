//! System models and fixed-step RK4 integration of the state, variational and
//! compound equations.

use std::fmt;
use std::sync::Arc;

use crate::compound::{add_compound, binomial};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, DenseVector};
use crate::tol;

pub type VectorField = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(f64, &[f64]) -> DenseMatrix + Send + Sync>;
pub type StateVectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type StateMatrixFn = Arc<dyn Fn(&[f64]) -> DenseMatrix + Send + Sync>;
/// `(t, ξ, x) -> R^n`
pub type VirtualField = Arc<dyn Fn(f64, &[f64], &[f64]) -> Vec<f64> + Send + Sync>;
/// `(t, ξ, x) -> R^{ℓ×ℓ}`
pub type VirtualJacobian = Arc<dyn Fn(f64, &[f64], &[f64]) -> DenseMatrix + Send + Sync>;
pub type MembershipFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Region of state space on which a model is studied.
#[derive(Clone)]
pub enum DomainSpec {
    Box {
        lo: DenseVector,
        hi: DenseVector,
    },
    /// `γ1 ≤ x1² + x2² ≤ γ2`
    Annulus2D {
        gamma1: f64,
        gamma2: f64,
    },
    Predicate {
        contains: MembershipFn,
        lo: DenseVector,
        hi: DenseVector,
    },
}

impl fmt::Debug for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Box { lo, hi } => write!(f, "Box({:?}, {:?})", lo.as_slice(), hi.as_slice()),
            Self::Annulus2D { gamma1, gamma2 } => write!(f, "Annulus2D({gamma1}, {gamma2})"),
            Self::Predicate { lo, hi, .. } => {
                write!(
                    f,
                    "Predicate(bounding {:?}, {:?})",
                    lo.as_slice(),
                    hi.as_slice()
                )
            }
        }
    }
}

fn check_bounds(lo: &[f64], hi: &[f64]) -> Result<()> {
    if lo.is_empty() || lo.len() != hi.len() {
        return Err(Error::InvalidInput(format!(
            "box bounds have dimensions {} and {}",
            lo.len(),
            hi.len()
        )));
    }
    if let Some(i) = (0..lo.len()).find(|&i| lo[i].is_nan() || hi[i].is_nan() || lo[i] >= hi[i]) {
        return Err(Error::InvalidInput(format!(
            "box needs lo < hi in every coordinate; coordinate {} has [{}, {}]",
            i + 1,
            lo[i],
            hi[i]
        )));
    }
    Ok(())
}

impl DomainSpec {
    pub fn new_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_bounds(&lo, &hi)?;
        Ok(Self::Box {
            lo: DenseVector::new(lo)?,
            hi: DenseVector::new(hi)?,
        })
    }

    /// Symmetric box `[-half_width, half_width]^n`.
    pub fn cube(n: usize, half_width: f64) -> Result<Self> {
        Self::new_box(vec![-half_width; n], vec![half_width; n])
    }

    pub fn annulus(gamma1: f64, gamma2: f64) -> Result<Self> {
        if !(gamma1 > 0.0 && gamma1 < 1.0 && gamma2 > 1.0 && gamma2.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "annulus needs 0 < gamma1 < 1 < gamma2, got ({gamma1}, {gamma2})"
            )));
        }
        Ok(Self::Annulus2D { gamma1, gamma2 })
    }

    pub fn predicate(contains: MembershipFn, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_bounds(&lo, &hi)?;
        Ok(Self::Predicate {
            contains,
            lo: DenseVector::new(lo)?,
            hi: DenseVector::new(hi)?,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Box { lo, .. } | Self::Predicate { lo, .. } => lo.dim(),
            Self::Annulus2D { .. } => 2,
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Self::Box { lo, hi } | Self::Predicate { lo, hi, .. } => (lo.to_vec(), hi.to_vec()),
            Self::Annulus2D { gamma2, .. } => {
                let r = gamma2.sqrt();
                (vec![-r, -r], vec![r, r])
            }
        }
    }

    /// Euclidean diameter of the bounding box.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        lo.iter()
            .zip(&hi)
            .map(|(l, h)| (h - l) * (h - l))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let s = tol::DOMAIN_SLACK;
        match self {
            Self::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi.iter()))
                .all(|(v, (l, h))| *v >= l - s && *v <= h + s),
            Self::Annulus2D { gamma1, gamma2 } => {
                let r2 = x[0] * x[0] + x[1] * x[1];
                r2 >= gamma1 - s && r2 <= gamma2 + s
            }
            Self::Predicate { contains, .. } => contains(x),
        }
    }

    /// True once `x` is further than `ESCAPE_FRACTION` of the diameter outside the bounding box.
    pub fn escaped(&self, x: &[f64]) -> bool {
        let (lo, hi) = self.bounding_box();
        let allowance = tol::ESCAPE_FRACTION * self.diameter();
        x.iter()
            .zip(lo.iter().zip(&hi))
            .any(|(v, (l, h))| *v < l - allowance || *v > h + allowance)
    }

    /// A deterministic point inside the domain, used for shape checks.
    pub fn representative_point(&self) -> Vec<f64> {
        match self {
            Self::Annulus2D { gamma1, gamma2 } => vec![(0.5 * (gamma1 + gamma2)).sqrt(), 0.0],
            _ => {
                let (lo, hi) = self.bounding_box();
                lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect()
            }
        }
    }
}

/// Splits `f(t, x) = g(t, p(x), x)` so that the virtual system in `ξ` can be studied.
#[derive(Clone)]
pub struct Factorization {
    pub ell: usize,
    pub p: StateVectorFn,
    /// `∂p/∂x`, `ℓ×n`.
    pub dp: StateMatrixFn,
    pub g: VirtualField,
    /// Jacobian of `f_ξ = (∂p/∂x) g` with respect to `ξ`, `ℓ×ℓ`.
    pub j_xi: VirtualJacobian,
    /// Particular solution whose level set is the attracting manifold.
    pub m: Option<StateVectorFn>,
}

impl fmt::Debug for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Factorization")
            .field("ell", &self.ell)
            .field("has_m", &self.m.is_some())
            .finish()
    }
}

/// Complementary distributions `H(x)` (horizontal) and `Q(x)` (vertical).
#[derive(Clone)]
pub struct HorizontalFrame {
    pub ell: usize,
    /// `n×ℓ`
    pub h: StateMatrixFn,
    /// `n×(n−ℓ)`
    pub q: StateMatrixFn,
    /// Derivative of `H` along the flow, `n×ℓ`.
    pub h_f: Option<JacobianFn>,
}

impl fmt::Debug for HorizontalFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HorizontalFrame")
            .field("ell", &self.ell)
            .field("has_h_f", &self.h_f.is_some())
            .finish()
    }
}

#[derive(Clone)]
pub struct SystemModel {
    pub name: String,
    dim: usize,
    f: VectorField,
    jacobian: Option<JacobianFn>,
    pub domain: DomainSpec,
    pub factorization: Option<Factorization>,
    pub frame: Option<HorizontalFrame>,
}

impl fmt::Debug for SystemModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemModel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .field("domain", &self.domain)
            .field("factorization", &self.factorization)
            .field("frame", &self.frame)
            .finish()
    }
}

impl SystemModel {
    /// Builds a model and checks that `f` returns vectors of length `dim`.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        f: VectorField,
        domain: DomainSpec,
    ) -> Result<Self> {
        let name = name.into();
        if dim == 0 {
            return Err(Error::InvalidInput(
                "model dimension must be positive".into(),
            ));
        }
        if domain.dim() != dim {
            return Err(Error::DimensionMismatch(format!(
                "model `{name}` has dimension {dim} but its domain has dimension {}",
                domain.dim()
            )));
        }
        let x = domain.representative_point();
        let got = f(0.0, &x).len();
        if got != dim {
            return Err(Error::DimensionMismatch(format!(
                "vector field of `{name}` returned {got} components, expected {dim}"
            )));
        }
        Ok(Self {
            name,
            dim,
            f,
            jacobian: None,
            domain,
            factorization: None,
            frame: None,
        })
    }

    pub fn with_jacobian(mut self, jacobian: JacobianFn) -> Result<Self> {
        let x = self.domain.representative_point();
        let j = jacobian(0.0, &x);
        if (j.rows(), j.cols()) != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch(format!(
                "Jacobian of `{}` is {}x{}, expected {n}x{n}",
                self.name,
                j.rows(),
                j.cols(),
                n = self.dim
            )));
        }
        self.jacobian = Some(jacobian);
        Ok(self)
    }

    pub fn with_factorization(mut self, fac: Factorization) -> Result<Self> {
        let n = self.dim;
        if fac.ell == 0 || fac.ell > n {
            return Err(Error::DimensionMismatch(format!(
                "factorization order {} must lie in [1, {n}]",
                fac.ell
            )));
        }
        let x = self.domain.representative_point();
        let xi = (fac.p)(&x);
        let dp = (fac.dp)(&x);
        let jx = (fac.j_xi)(0.0, &xi, &x);
        if xi.len() != fac.ell
            || (dp.rows(), dp.cols()) != (fac.ell, n)
            || (fac.g)(0.0, &xi, &x).len() != n
            || (jx.rows(), jx.cols()) != (fac.ell, fac.ell)
        {
            return Err(Error::DimensionMismatch(format!(
                "factorization of `{}` has inconsistent shapes for ell={}",
                self.name, fac.ell
            )));
        }
        self.factorization = Some(fac);
        Ok(self)
    }

    pub fn with_frame(mut self, frame: HorizontalFrame) -> Result<Self> {
        let n = self.dim;
        if frame.ell == 0 || frame.ell > n {
            return Err(Error::DimensionMismatch(format!(
                "frame order {} must lie in [1, {n}]",
                frame.ell
            )));
        }
        let x = self.domain.representative_point();
        let h = (frame.h)(&x);
        let q = (frame.q)(&x);
        if (h.rows(), h.cols()) != (n, frame.ell) || (q.rows(), q.cols()) != (n, n - frame.ell) {
            return Err(Error::DimensionMismatch(format!(
                "frame of `{}` has H {}x{} and Q {}x{} for n={n}, ell={}",
                self.name,
                h.rows(),
                h.cols(),
                q.rows(),
                q.cols(),
                frame.ell
            )));
        }
        self.frame = Some(frame);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Vec<f64> {
        (self.f)(t, x)
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    /// Analytic Jacobian when available, central differences otherwise.
    pub fn jacobian(&self, t: f64, x: &[f64]) -> DenseMatrix {
        match &self.jacobian {
            Some(j) => j(t, x),
            None => numerical_jacobian(self, t, x),
        }
    }
}

/// Central-difference Jacobian with step `1e-6·max(1, |x_i|)`.
pub fn numerical_jacobian(model: &SystemModel, t: f64, x: &[f64]) -> DenseMatrix {
    let n = model.dim();
    let mut jac = DenseMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let h = tol::FD_STEP * x[j].abs().max(1.0);
        xp[j] = x[j] + h;
        let fp = model.eval(t, &xp);
        xp[j] = x[j] - h;
        let fm = model.eval(t, &xp);
        xp[j] = x[j];
        for i in 0..n {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

/// Sampled solution on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DenseVector>,
    /// Per time: the transported displacement vectors.
    pub var_states: Option<Vec<Vec<DenseVector>>>,
    /// Per time: the wedge state of length `C(n, k)`.
    pub compound_state: Option<Vec<DenseVector>>,
    pub k: Option<usize>,
    /// Number of samples outside the domain (but within the escape allowance).
    pub domain_violations: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map_or(&[], |s| s.as_slice())
    }
}

struct RawRun {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    extras: Vec<Vec<f64>>,
    violations: usize,
    failure: Option<Error>,
}

fn check_run_args(model: &SystemModel, a: &[f64], t_end: f64, dt: f64) -> Result<usize> {
    if a.len() != model.dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial condition has {} components, model `{}` has dimension {}",
            a.len(),
            model.name,
            model.dim()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "initial condition must be finite".into(),
        ));
    }
    if !model.domain.contains(a) {
        return Err(Error::InvalidInput(format!(
            "initial condition {a:?} lies outside the domain {:?}",
            model.domain
        )));
    }
    if !(dt > 0.0 && dt.is_finite() && t_end.is_finite() && dt <= t_end) {
        return Err(Error::InvalidInput(format!(
            "need 0 < dt <= t_end, got dt={dt}, t_end={t_end}"
        )));
    }
    Ok((t_end / dt).round() as usize)
}

/// Classical RK4 on the joint state `(x, e)` with `ẋ = f(t, x)`, `ė = rhs(t, x, e)`.
fn run_joint<R>(
    model: &SystemModel,
    a: &[f64],
    extra0: Vec<f64>,
    t_end: f64,
    dt: f64,
    rhs: R,
) -> Result<RawRun>
where
    R: Fn(f64, &[f64], &[f64]) -> Vec<f64>,
{
    let steps = check_run_args(model, a, t_end, dt)?;
    let n = model.dim();
    let m = extra0.len();
    let eval = |t: f64, z: &[f64]| -> Vec<f64> {
        let (x, e) = z.split_at(n);
        let mut dz = model.eval(t, x);
        dz.extend(rhs(t, x, e));
        dz
    };
    let axpy = |z: &[f64], k: &[f64], h: f64| -> Vec<f64> {
        z.iter().zip(k).map(|(a, b)| a + h * b).collect()
    };

    let mut run = RawRun {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        extras: Vec::with_capacity(if m > 0 { steps + 1 } else { 0 }),
        violations: 0,
        failure: None,
    };
    let mut z: Vec<f64> = a.iter().copied().chain(extra0).collect();
    let push = |run: &mut RawRun, t: f64, z: &[f64]| {
        run.times.push(t);
        run.states.push(z[..n].to_vec());
        if m > 0 {
            run.extras.push(z[n..].to_vec());
        }
    };
    push(&mut run, 0.0, &z);
    for i in 0..steps {
        let t = i as f64 * dt;
        let k1 = eval(t, &z);
        let k2 = eval(t + 0.5 * dt, &axpy(&z, &k1, 0.5 * dt));
        let k3 = eval(t + 0.5 * dt, &axpy(&z, &k2, 0.5 * dt));
        let k4 = eval(t + dt, &axpy(&z, &k3, dt));
        for j in 0..z.len() {
            z[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let t_next = (i + 1) as f64 * dt;
        if z.iter().any(|v| !v.is_finite()) {
            run.failure = Some(Error::NonFinite { t: t_next });
            break;
        }
        push(&mut run, t_next, &z);
        let x = &z[..n];
        if model.domain.escaped(x) {
            return Ok(escape_marker(run, t_next));
        }
        if !model.domain.contains(x) {
            run.violations += 1;
        }
    }
    Ok(run)
}

/// Records an escape; [`finish`] replaces the empty trajectory with the partial one.
fn escape_marker(mut run: RawRun, t: f64) -> RawRun {
    run.failure = Some(Error::DomainEscape {
        t,
        partial: Box::new(Trajectory {
            times: Vec::new(),
            states: Vec::new(),
            var_states: None,
            compound_state: None,
            k: None,
            domain_violations: 0,
        }),
    });
    run
}

/// Converts a raw run into a trajectory, turning a recorded failure into an error that
/// carries everything integrated so far.
fn finish(run: RawRun, shape: impl Fn(&mut Trajectory, Vec<Vec<f64>>)) -> Result<Trajectory> {
    let mut traj = Trajectory {
        times: run.times,
        states: run
            .states
            .into_iter()
            .map(DenseVector::from_vec_unchecked)
            .collect(),
        var_states: None,
        compound_state: None,
        k: None,
        domain_violations: run.violations,
    };
    shape(&mut traj, run.extras);
    match run.failure {
        None => Ok(traj),
        Some(Error::DomainEscape { t, .. }) => Err(Error::DomainEscape {
            t,
            partial: Box::new(traj),
        }),
        Some(e) => Err(e),
    }
}

/// Integrates `ẋ = f(t, x)` from `a` with fixed-step RK4, sampling every step.
pub fn integrate(model: &SystemModel, a: &[f64], t_end: f64, dt: f64) -> Result<Trajectory> {
    let run = run_joint(model, a, Vec::new(), t_end, dt, |_, _, _| Vec::new())?;
    finish(run, |_, _| {})
}

/// Integrates the state together with `δẋⁱ = J(t, x) δxⁱ` for each displacement.
pub fn integrate_variational(
    model: &SystemModel,
    a: &[f64],
    deltas: &[Vec<f64>],
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    let n = model.dim();
    if deltas.is_empty() {
        return Err(Error::InvalidInput(
            "at least one displacement is required".into(),
        ));
    }
    if let Some(i) = deltas.iter().position(|d| d.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "displacement {} has {} components, expected {n}",
            i + 1,
            deltas[i].len()
        )));
    }
    if deltas.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("displacements must be finite".into()));
    }
    let count = deltas.len();
    let extra0: Vec<f64> = deltas.iter().flatten().copied().collect();
    let run = run_joint(model, a, extra0, t_end, dt, |t, x, e| {
        let j = model.jacobian(t, x);
        e.chunks(n)
            .flat_map(|d| j.matvec(d).unwrap_or_else(|_| vec![f64::NAN; n]))
            .collect()
    })?;
    finish(run, |traj, extras| {
        traj.var_states = Some(
            extras
                .into_iter()
                .map(|e| {
                    e.chunks(n)
                        .map(|c| DenseVector::from_vec_unchecked(c.to_vec()))
                        .collect()
                })
                .collect(),
        );
        traj.k = Some(count);
    })
}

/// Integrates the state together with the k-th compound equation `ẏ = J^[k](t, x) y`.
pub fn integrate_compound(
    model: &SystemModel,
    a: &[f64],
    k: usize,
    y0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    let n = model.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "order k={k} must satisfy 1 <= k <= {n}"
        )));
    }
    let r = binomial(n, k)? as usize;
    if y0.len() != r {
        return Err(Error::DimensionMismatch(format!(
            "compound state has {} components, expected C({n}, {k}) = {r}",
            y0.len()
        )));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "compound initial state must be finite".into(),
        ));
    }
    let run = run_joint(model, a, y0.to_vec(), t_end, dt, |t, x, y| {
        let j = model.jacobian(t, x);
        add_compound(&j, k)
            .and_then(|c| c.matvec(y))
            .unwrap_or_else(|_| vec![f64::NAN; r])
    })?;
    finish(run, |traj, extras| {
        traj.compound_state = Some(
            extras
                .into_iter()
                .map(DenseVector::from_vec_unchecked)
                .collect(),
        );
        traj.k = Some(k);
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay_1d() -> SystemModel {
        SystemModel::new(
            "decay",
            1,
            Arc::new(|_, x| vec![-x[0]]),
            DomainSpec::cube(1, 2.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn scalar_decay_accuracy() {
        let tr = integrate(&decay_1d(), &[1.0], 1.0, 1e-3).unwrap();
        assert_eq!(tr.len(), 1001);
        assert!((tr.final_time() - 1.0).abs() < 1e-12);
        assert!((tr.final_state()[0] - (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let exact = (-1.0f64).exp();
        let e1 = (integrate(&decay_1d(), &[1.0], 1.0, 0.1)
            .unwrap()
            .final_state()[0]
            - exact)
            .abs();
        let e2 = (integrate(&decay_1d(), &[1.0], 1.0, 0.05)
            .unwrap()
            .final_state()[0]
            - exact)
            .abs();
        let ratio = e1 / e2;
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn argument_validation() {
        let m = decay_1d();
        assert!(integrate(&m, &[1.0, 0.0], 1.0, 1e-3).is_err());
        assert!(integrate(&m, &[5.0], 1.0, 1e-3).is_err());
        assert!(integrate(&m, &[1.0], 1.0, 0.0).is_err());
        assert!(integrate(&m, &[1.0], 1.0, 2.0).is_err());
        assert!(integrate_compound(&m, &[1.0], 2, &[1.0], 1.0, 1e-2).is_err());
        assert!(integrate_compound(&m, &[1.0], 1, &[1.0, 2.0], 1.0, 1e-2).is_err());
        assert!(integrate_variational(&m, &[1.0], &[], 1.0, 1e-2).is_err());
    }

    #[test]
    fn escape_carries_partial_trajectory() {
        let grow = SystemModel::new(
            "grow",
            1,
            Arc::new(|_, x| vec![x[0]]),
            DomainSpec::cube(1, 2.0).unwrap(),
        )
        .unwrap();
        match integrate(&grow, &[1.0], 5.0, 1e-3) {
            Err(Error::DomainEscape { t, partial }) => {
                // bound 2 + 0.1 * 4 = 2.4 reached at t = ln 2.4
                assert!((t - 2.4f64.ln()).abs() < 2e-3, "t = {t}");
                assert_eq!(partial.final_time(), t);
                assert!(partial.final_state()[0] > 2.4);
                assert!(partial.domain_violations > 0);
            }
            other => panic!("expected escape, got {other:?}"),
        }
    }

    #[test]
    fn numerical_jacobian_of_linear_field() {
        let a = DenseMatrix::from_rows(&[vec![1.0, -2.0], vec![0.5, 3.0]]).unwrap();
        let ac = a.clone();
        let m = SystemModel::new(
            "lin",
            2,
            Arc::new(move |_, x| ac.matvec(x).unwrap()),
            DomainSpec::cube(2, 1.0).unwrap(),
        )
        .unwrap();
        let j = numerical_jacobian(&m, 0.0, &[0.3, -0.7]);
        assert!(j.sub(&a).unwrap().max_abs() < 1e-8);
        assert!(!m.has_analytic_jacobian());
    }

    #[test]
    fn shape_checks() {
        let bad = SystemModel::new(
            "bad",
            2,
            Arc::new(|_, _| vec![0.0]),
            DomainSpec::cube(2, 1.0).unwrap(),
        );
        assert!(matches!(bad, Err(Error::DimensionMismatch(_))));
        assert!(DomainSpec::new_box(vec![1.0], vec![0.0]).is_err());
        assert!(DomainSpec::annulus(1.5, 4.0).is_err());
        let m = decay_1d();
        assert!(m
            .with_jacobian(Arc::new(|_, _| DenseMatrix::zeros(2, 2)))
            .is_err());
    }

    #[test]
    fn domain_membership() {
        let d = DomainSpec::annulus(0.25, 4.0).unwrap();
        assert!(d.contains(&[0.5, 0.0]));
        assert!(d.contains(&[2.0, 0.0]));
        assert!(!d.contains(&[0.1, 0.1]));
        assert!(!d.escaped(&[2.5, 0.0]));
        assert!(d.escaped(&[2.7, 0.0]));
        let (lo, hi) = d.bounding_box();
        assert_eq!((lo, hi), (vec![-2.0, -2.0], vec![2.0, 2.0]));
    }
}
