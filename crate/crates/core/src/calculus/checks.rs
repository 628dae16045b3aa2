//! Per-check summaries over sample points.

use super::connection::{
    a_curvature, compatibility_tensor_covariant, compatibility_tensor_frame, dual_a_connection,
    tau_intertwine_residual, InducedConnection,
};
use super::metric::{
    generalized_residuals, killing_residual_frame, killing_residual_sym, koszul_delta_residual, structure_residual,
    StructureKind,
};
use super::CalcError;
use crate::exprjet::{eval_jet, Expr, Jet};
use crate::model::{AlgebroidSpec, CheckReport, Mode, PointJets};
use crate::par::{map_points, Execution};

pub const CARTAN_TOL: f64 = 1e-9;
pub const KILLING_FRAME_TOL: f64 = 1e-7;
/// Half the frame tolerance, since the frame residual is twice the symmetrised one.
pub const KILLING_SYM_TOL: f64 = 0.5 * KILLING_FRAME_TOL;
pub const CURVATURE_TOL: f64 = 1e-7;
pub const INTERTWINE_TOL: f64 = 1e-10;
pub const DUAL_TOL: f64 = 1e-12;
pub const BILINEAR_TOL: f64 = 1e-9;
pub const KOSZUL_TOL: f64 = 1e-9;
pub const FLAT_FRAME_TOL: f64 = 1e-6;

/// Evaluates `f` on order-2 jets at every point and summarises.
pub fn summarize<F>(
    name: &str,
    tolerance: f64,
    spec: &AlgebroidSpec,
    points: &[Vec<f64>],
    f: F,
) -> Result<CheckReport, CalcError>
where
    F: Fn(&PointJets) -> Result<f64, CalcError> + Sync + Send,
{
    let values = map_points(Execution::current(), points, |p| {
        let j = PointJets::new(spec, p, 2)?;
        f(&j)
    })
    .into_iter()
    .collect::<Result<Vec<f64>, _>>()?;
    Ok(CheckReport::from_residuals(name, tolerance, points, &values))
}

fn require_lie(spec: &AlgebroidSpec) -> Result<(), CalcError> {
    if spec.mode == Mode::Lie {
        Ok(())
    } else {
        Err(CalcError::NotLie)
    }
}

pub fn check_cartan(spec: &AlgebroidSpec, points: &[Vec<f64>], tol: f64) -> Result<CheckReport, CalcError> {
    require_lie(spec)?;
    summarize("cartan", tol, spec, points, |j| Ok(compatibility_tensor_frame(j).max_abs()))
}

pub fn check_s_formula_agreement(
    spec: &AlgebroidSpec,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<CheckReport, CalcError> {
    require_lie(spec)?;
    summarize("s_formula_agreement", tol, spec, points, |j| {
        Ok(compatibility_tensor_frame(j).max_abs_diff(&compatibility_tensor_covariant(j)))
    })
}

pub fn check_killing_frame(spec: &AlgebroidSpec, points: &[Vec<f64>], tol: f64) -> Result<CheckReport, CalcError> {
    summarize("killing_frame", tol, spec, points, |j| Ok(killing_residual_frame(j)?.max_abs()))
}

pub fn check_killing_sym(spec: &AlgebroidSpec, points: &[Vec<f64>], tol: f64) -> Result<CheckReport, CalcError> {
    summarize("killing_sym", tol, spec, points, |j| Ok(killing_residual_sym(j)?.max_abs()))
}

/// Max componentwise gap in `K = 2 Sym(nabla rho_bar)`.
pub fn check_killing_equivalence(
    spec: &AlgebroidSpec,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<CheckReport, CalcError> {
    summarize("killing_equivalence", tol, spec, points, |j| {
        let frame = killing_residual_frame(j)?;
        Ok(frame.max_abs_diff(&killing_residual_sym(j)?.scaled(2.0)))
    })
}

pub fn check_a_curvature(
    spec: &AlgebroidSpec,
    points: &[Vec<f64>],
    which: InducedConnection,
    tol: f64,
) -> Result<CheckReport, CalcError> {
    require_lie(spec)?;
    let name = match which {
        InducedConnection::Alpha => "alpha_curvature",
        InducedConnection::Tau => "tau_curvature",
    };
    summarize(name, tol, spec, points, |j| Ok(a_curvature(j, which).max_abs()))
}

pub fn check_tau_intertwine(spec: &AlgebroidSpec, points: &[Vec<f64>], tol: f64) -> Result<CheckReport, CalcError> {
    require_lie(spec)?;
    summarize("tau_intertwine", tol, spec, points, |j| Ok(tau_intertwine_residual(j)))
}

/// Reflexivity of dualisation and the opposite-torsion identity.
pub fn check_dual_identities(spec: &AlgebroidSpec, points: &[Vec<f64>], tol: f64) -> Result<CheckReport, CalcError> {
    require_lie(spec)?;
    summarize("dual_identities", tol, spec, points, |j| {
        let d = dual_a_connection(j);
        Ok(d.reflexivity_defect.max(d.torsion_defect))
    })
}

pub fn check_generalized(spec: &AlgebroidSpec, points: &[Vec<f64>], tol: f64) -> Result<[CheckReport; 2], CalcError> {
    let sym = summarize("generalized_sym", tol, spec, points, |j| Ok(generalized_residuals(j)?.sym.max_abs()))?;
    let skew = summarize("generalized_skew", tol, spec, points, |j| Ok(generalized_residuals(j)?.skew.max_abs()))?;
    Ok([sym, skew])
}

pub fn check_structure(
    spec: &AlgebroidSpec,
    points: &[Vec<f64>],
    kind: StructureKind,
    tol: f64,
) -> Result<CheckReport, CalcError> {
    let name = match kind {
        StructureKind::Symplectic => "symplectic",
        StructureKind::Poisson => "poisson",
    };
    summarize(name, tol, spec, points, |j| Ok(structure_residual(j, kind)?.max_abs()))
}

pub fn check_koszul(
    spec: &AlgebroidSpec,
    psi: &[Vec<Vec<Expr>>],
    points: &[Vec<f64>],
    tol: f64,
) -> Result<CheckReport, CalcError> {
    summarize("koszul_delta", tol, spec, points, |j| {
        let jets: Vec<Vec<Vec<Jet>>> = psi
            .iter()
            .map(|row| row.iter().map(|form| form.iter().map(|e| eval_jet(e, &j.point, 0)).collect()).collect())
            .collect::<Result<_, _>>()?;
        koszul_delta_residual(j, &jets)
    })
}
