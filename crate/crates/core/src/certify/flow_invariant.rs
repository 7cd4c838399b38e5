use crate::dynamics::SystemModel;
use crate::error::{Error, Result};
use crate::linalg::{vector_norm, DenseMatrix, NormKind};
use crate::sampling::{sample_states, SampleSpec};
use crate::systems::orthonormality_residuals;
use crate::tol;

use super::{jacobian_note, witness, CertificateReport, CheckOptions, Verdict};

/// Checks that `(H, Q)` is an orthonormal splitting and that `span Q` is
/// invariant under the flow: `Hᵀ f(t, q) = 0` for `q ∈ span Q`, and the
/// sufficient condition `HᵀJQ = 0`.
pub fn check_flow_invariant_subspace(
    h: &DenseMatrix,
    q: &DenseMatrix,
    model: &SystemModel,
    samples: &SampleSpec,
    opts: &CheckOptions,
) -> Result<CertificateReport> {
    let n = model.dim();
    if h.rows() != n || q.rows() != n || h.cols() + q.cols() != n {
        return Err(Error::InvalidInput(format!(
            "H is {}x{} and Q is {}x{}, incompatible with a model of dimension {n}",
            h.rows(),
            h.cols(),
            q.rows(),
            q.cols()
        )));
    }
    let [hh, qq, hq, complete] = orthonormality_residuals(h, q)?;
    let mut report = CertificateReport::new("flow-invariant", NormKind::L2);
    report.residual("hth_minus_i", hh);
    report.residual("qtq_minus_i", qq);
    report.residual("htq", hq);
    report.residual("completeness", complete);

    let pts = sample_states(model, samples, opts.dt)?;
    let ht = h.transpose();
    let proj = q.matmul(&q.transpose())?;
    let (mut flow, mut flow_at) = (0.0f64, Vec::new());
    let (mut suff, mut suff_at) = (0.0f64, Vec::new());
    for s in &pts {
        let z = proj.matvec(&s.x)?;
        let r = vector_norm(&ht.matvec(&model.eval(s.t, &z))?, NormKind::L2);
        if r > flow {
            flow = r;
            flow_at = witness(s.t, &z);
        }
        let c = ht
            .matmul(&model.jacobian(s.t, &s.x))?
            .matmul(q)?
            .frobenius();
        if c > suff {
            suff = c;
            suff_at = witness(s.t, &s.x);
        }
    }
    report.samples_used = pts.len();
    report.residual("flow_invariance", flow);
    report.residual("htjq", suff);
    jacobian_note(model, &mut report);

    let worst_ortho = hh.max(qq).max(hq).max(complete);
    if worst_ortho > tol::ORTHONORMAL {
        report.falsify(
            vec![hh, qq, hq, complete],
            format!("H and Q are not an orthonormal splitting (residual {worst_ortho:.3e})"),
        );
    } else if flow > tol::FACTORIZATION {
        report.falsify(
            flow_at,
            format!("|H^T f(t, q)| = {flow:.3e} for q in span Q: the subspace is not invariant"),
        );
    } else if suff > tol::FACTORIZATION {
        report.falsify(
            suff_at,
            format!("|H^T J Q| = {suff:.3e}: the sufficient condition fails"),
        );
    } else {
        report.verdict = Verdict::Certified;
        report.note("span Q is flow-invariant on all samples");
    }
    Ok(report)
}
