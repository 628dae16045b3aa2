use nalgebra::DMatrix;

use super::jets::PointJets;
use super::report::{run_check, CheckReport};
use super::spec::{AlgebroidSpec, Mode};
use crate::exprjet::{DomainError, Jet};

/// Default tolerance for residuals built from values and first derivatives.
pub const ALGEBRAIC_TOL: f64 = 1e-9;

/// Floor below which a leading minor or determinant counts as degenerate.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

/// `max_{a<b,i} |[rho_a, rho_b]^i - C^c_{ab} rho_c^i|` at one point.
pub fn anchor_morphism_residual(j: &PointJets) -> f64 {
    let (n, r) = (j.dim, j.rank);
    let mut worst = 0.0f64;
    for a in 0..r {
        for b in a + 1..r {
            for i in 0..n {
                let mut v = 0.0;
                for k in 0..n {
                    v += j.anchor[a][k].value() * j.anchor[b][i].d1(k) - j.anchor[b][k].value() * j.anchor[a][i].d1(k);
                }
                for c in 0..r {
                    v -= j.structure[a][b][c].value() * j.anchor[c][i].value();
                }
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

/// Component `d` of the Jacobiator of `(e_a, e_b, e_c)` from structure functions.
pub fn jacobiator_component(j: &PointJets, a: usize, b: usize, c: usize, d: usize) -> f64 {
    let term = |a: usize, b: usize, c: usize| {
        // d-component of [e_a, [e_b, e_c]]
        let mut v = 0.0;
        for k in 0..j.dim {
            v += j.anchor[a][k].value() * j.structure[b][c][d].d1(k);
        }
        for e in 0..j.rank {
            v += j.structure[b][c][e].value() * j.structure[a][e][d].value();
        }
        v
    };
    term(a, b, c) + term(b, c, a) + term(c, a, b)
}

pub fn jacobi_residual(j: &PointJets) -> f64 {
    let r = j.rank;
    let mut worst = 0.0f64;
    for a in 0..r {
        for b in a + 1..r {
            for c in b + 1..r {
                for d in 0..r {
                    worst = worst.max(jacobiator_component(j, a, b, c, d).abs());
                }
            }
        }
    }
    worst
}

pub fn check_anchor_morphism(spec: &AlgebroidSpec, points: &[Vec<f64>]) -> Result<CheckReport, DomainError> {
    run_check("anchor_morphism", ALGEBRAIC_TOL, points, |p| Ok(anchor_morphism_residual(&PointJets::new(spec, p, 1)?)))
}

pub fn check_jacobi(spec: &AlgebroidSpec, points: &[Vec<f64>]) -> Result<CheckReport, DomainError> {
    run_check("jacobi", ALGEBRAIC_TOL, points, |p| Ok(jacobi_residual(&PointJets::new(spec, p, 1)?)))
}

fn values(m: &[Vec<Jet>]) -> DMatrix<f64> {
    let n = m.len();
    DMatrix::from_fn(n, n, |i, k| m[i][k].value())
}

/// Smallest leading principal minor of a symmetric matrix.
pub fn min_leading_minor(m: &DMatrix<f64>) -> f64 {
    (1..=m.nrows()).map(|k| m.view((0, 0), (k, k)).into_owned().determinant()).fold(f64::INFINITY, f64::min)
}

/// `max_{i<j<k} |P^{il} d_l P^{jk} + cyclic|`.
pub fn poisson_jacobi_residual(p: &[Vec<Jet>]) -> f64 {
    let n = p.len();
    let jac = |i: usize, j: usize, k: usize| -> f64 { (0..n).map(|l| p[i][l].value() * p[j][k].d1(l)).sum() };
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                worst = worst.max((jac(i, j, k) + jac(j, k, i) + jac(k, i, j)).abs());
            }
        }
    }
    worst
}

/// `max_{i<j<k} |d_i W_{jk} + d_j W_{ki} + d_k W_{ij}|`.
pub fn closedness_residual(w: &[Vec<Jet>]) -> f64 {
    let n = w.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let v = w[j][k].d1(i) + w[k][i].d1(j) + w[i][j].d1(k);
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

fn antisymmetry_defect(m: &[Vec<Jet>]) -> f64 {
    let n = m.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[i][j].value() + m[j][i].value()).abs());
        }
    }
    worst
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ValidateOptions {
    /// Also require the Poisson bivector to be nondegenerate.
    pub poisson_nondegenerate: bool,
}

/// Evaluates one validation residual; domain errors become a failed report.
fn validation<F>(name: &str, tol: f64, points: &[Vec<f64>], f: F) -> CheckReport
where
    F: Fn(&[f64]) -> Result<f64, DomainError> + Sync + Send,
{
    run_check(name, tol, points, f).unwrap_or_else(|err| {
        let at = vec![err.point.clone()];
        CheckReport::from_residuals(name, tol, &at, &[f64::INFINITY]).with_note(err.to_string())
    })
}

/// Runs every structural and axiom check that applies to the spec.
pub fn validate_spec(spec: &AlgebroidSpec, points: &[Vec<f64>], options: ValidateOptions) -> Vec<CheckReport> {
    let jets = |p: &[f64]| PointJets::new(spec, p, 1);
    let mut out = Vec::new();
    out.push(validation("structure_antisymmetric", 0.0, points, |p| {
        let j = jets(p)?;
        let r = j.rank;
        let mut worst = 0.0f64;
        for a in 0..r {
            for b in 0..r {
                for c in 0..r {
                    let v = j.structure[a][b][c].value() + j.structure[b][a][c].value();
                    worst = worst.max(v.abs());
                }
            }
        }
        Ok(worst)
    }));
    if spec.metric.is_some() {
        out.push(validation("metric_symmetric", 0.0, points, |p| {
            let g = values(jets(p)?.metric.as_ref().expect("metric"));
            Ok((&g - g.transpose()).amax())
        }));
        out.push(validation("metric_positive_definite", 0.0, points, |p| {
            let j = jets(p)?;
            let m = min_leading_minor(&values(j.metric.as_ref().expect("metric")));
            Ok((DEGENERACY_FLOOR - m).max(0.0))
        }));
    }
    if spec.two_form.is_some() {
        out.push(validation("two_form_antisymmetric", 0.0, points, |p| {
            Ok(antisymmetry_defect(jets(p)?.two_form.as_ref().expect("two_form")))
        }));
    }
    if spec.symplectic.is_some() {
        out.push(validation("symplectic_antisymmetric", 0.0, points, |p| {
            Ok(antisymmetry_defect(jets(p)?.symplectic.as_ref().expect("symplectic")))
        }));
        out.push(validation("symplectic_nondegenerate", 0.0, points, |p| {
            let det = values(jets(p)?.symplectic.as_ref().expect("symplectic")).determinant();
            Ok((DEGENERACY_FLOOR - det.abs()).max(0.0))
        }));
        out.push(validation("symplectic_closed", ALGEBRAIC_TOL, points, |p| {
            Ok(closedness_residual(jets(p)?.symplectic.as_ref().expect("symplectic")))
        }));
    }
    if spec.poisson.is_some() {
        out.push(validation("poisson_antisymmetric", 0.0, points, |p| {
            Ok(antisymmetry_defect(jets(p)?.poisson.as_ref().expect("poisson")))
        }));
        out.push(validation("poisson_jacobi", ALGEBRAIC_TOL, points, |p| {
            Ok(poisson_jacobi_residual(jets(p)?.poisson.as_ref().expect("poisson")))
        }));
        if options.poisson_nondegenerate {
            out.push(validation("poisson_nondegenerate", 0.0, points, |p| {
                let det = values(jets(p)?.poisson.as_ref().expect("poisson")).determinant();
                Ok((DEGENERACY_FLOOR - det.abs()).max(0.0))
            }));
        }
    }
    if spec.mode == Mode::Lie {
        out.push(validation("anchor_morphism", ALGEBRAIC_TOL, points, |p| Ok(anchor_morphism_residual(&jets(p)?))));
        out.push(validation("jacobi", ALGEBRAIC_TOL, points, |p| Ok(jacobi_residual(&jets(p)?))));
    }
    out
}
