//! Residuals coupling the frame data to a metric, a two-form or a bivector on the base.

use super::connection::christoffel;
use super::tensor::{Slot, TensorSample};
use super::CalcError;
use crate::exprjet::Jet;
use crate::model::PointJets;

use Slot::{CoordDown, CoordUp, FrameDown};

/// `(L_v h)_{ij} = v^k d_k h_{ij} + d_i v^k h_{kj} + d_j v^k h_{ik}` for a covariant 2-tensor.
fn lie_covariant(v: &[Jet], h: &[Vec<Jet>], i: usize, j: usize) -> f64 {
    let n = v.len();
    (0..n).map(|k| v[k].value() * h[i][j].d1(k) + v[k].d1(i) * h[k][j].value() + v[k].d1(j) * h[i][k].value()).sum()
}

/// `(iota_{rho_b} h)_j = rho_b^k h_{kj}` for every frame index, as values `[b][j]`.
fn contract_anchor(jets: &PointJets, h: &[Vec<Jet>]) -> Vec<Vec<f64>> {
    let n = jets.dim;
    (0..jets.rank)
        .map(|b| (0..n).map(|j| (0..n).map(|k| jets.anchor[b][k].value() * h[k][j].value()).sum()).collect())
        .collect()
}

/// `sum_b theta^b_{a,i} beta_{b,j}` for a frame-indexed family of 1-forms `theta`.
fn pair(theta: &[Vec<Vec<Jet>>], beta: &[Vec<f64>], a: usize, i: usize, j: usize) -> f64 {
    beta.iter().enumerate().map(|(b, row)| theta[a][b][i].value() * row[j]).sum()
}

fn metric(j: &PointJets) -> Result<&Vec<Vec<Jet>>, CalcError> {
    j.metric.as_ref().ok_or(CalcError::Missing("metric"))
}

/// Frame Killing residual `K_{a,ij} = (L_{rho_a} g)_{ij} - omega_a^b v iota_{rho_b} g`,
/// slots `[a, i, j]`.
pub fn killing_residual_frame(j: &PointJets) -> Result<TensorSample, CalcError> {
    let g = metric(j)?;
    Ok(symmetric_part(j, g, None))
}

/// The symmetric generalized residual; with `extra = None` it is the frame Killing residual.
/// Both paths share one evaluation order so that a vanishing two-form and
/// `psi` reproduce the frame residual bitwise.
/// `psi` coefficients and two-form values entering the generalized residual.
type Shift<'a> = (&'a [Vec<Vec<Jet>>], &'a [Vec<f64>]);

fn symmetric_part(j: &PointJets, g: &[Vec<Jet>], extra: Option<Shift<'_>>) -> TensorSample {
    let (n, r) = (j.dim, j.rank);
    let rho_bar = contract_anchor(j, g);
    let mut out = TensorSample::zeros(&[FrameDown, CoordDown, CoordDown], r, n, &j.point);
    for a in 0..r {
        for i in 0..n {
            for k in i..n {
                let mut v = lie_covariant(&j.anchor[a], g, i, k)
                    - pair(&j.connection, &rho_bar, a, i, k)
                    - pair(&j.connection, &rho_bar, a, k, i);
                if let Some((psi, beta)) = extra {
                    v = v - pair(psi, beta, a, i, k) - pair(psi, beta, a, k, i);
                }
                out.set(&[a, i, k], v);
                out.set(&[a, k, i], v);
            }
        }
    }
    out
}

/// `M_{a,ij} = d_i rho_bar_{a,j} - Gamma^k_{ij} rho_bar_{a,k} - omega^b_{a,i} rho_bar_{b,j}`,
/// the covariant derivative of `rho_bar_a = g(rho_a, .)`, slots `[a, i, j]`.
pub fn rho_bar_derivative(j: &PointJets) -> Result<TensorSample, CalcError> {
    let g = metric(j)?;
    let gamma = christoffel(j)?;
    let (n, r) = (j.dim, j.rank);
    let rho_bar: Vec<Vec<Jet>> = (0..r)
        .map(|a| (0..n).map(|jj| (0..n).fold(j.zero(), |acc, k| acc + &g[jj][k] * &j.anchor[a][k])).collect())
        .collect();
    let mut out = TensorSample::zeros(&[FrameDown, CoordDown, CoordDown], r, n, &j.point);
    for a in 0..r {
        for i in 0..n {
            for jj in 0..n {
                let mut v = rho_bar[a][jj].d1(i);
                for k in 0..n {
                    v -= gamma.get(&[k, i, jj]) * rho_bar[a][k].value();
                }
                for b in 0..r {
                    v -= j.connection[a][b][i].value() * rho_bar[b][jj].value();
                }
                out.set(&[a, i, jj], v);
            }
        }
    }
    Ok(out)
}

/// `Sym(M)` for the tensor of [`rho_bar_derivative`], slots `[a, i, j]`.
pub fn killing_residual_sym(j: &PointJets) -> Result<TensorSample, CalcError> {
    let m = rho_bar_derivative(j)?;
    let (n, r) = (j.dim, j.rank);
    let mut out = m.clone();
    for a in 0..r {
        for i in 0..n {
            for k in 0..n {
                out.set(&[a, i, k], 0.5 * (m.get(&[a, i, k]) + m.get(&[a, k, i])));
            }
        }
    }
    Ok(out)
}

/// Symmetric and skew residuals of the combined bilinear form `g + B`.
#[derive(Clone, Debug)]
pub struct GeneralizedResiduals {
    /// Slots `[a, i, j]`, symmetric in `i, j`.
    pub sym: TensorSample,
    /// Slots `[a, i, j]`, antisymmetric in `i, j`.
    pub skew: TensorSample,
}

/// Requires a metric and a two-form; an absent `psi` counts as zero.
pub fn generalized_residuals(j: &PointJets) -> Result<GeneralizedResiduals, CalcError> {
    let g = metric(j)?;
    let b = j.two_form.as_ref().ok_or(CalcError::Missing("two_form"))?;
    let (n, r) = (j.dim, j.rank);
    let zero_psi;
    let psi: &[Vec<Vec<Jet>>] = match &j.psi {
        Some(p) => p,
        None => {
            zero_psi = vec![vec![vec![j.zero(); n]; r]; r];
            &zero_psi
        }
    };
    let rho_bar = contract_anchor(j, g);
    let beta = contract_anchor(j, b);
    let sym = symmetric_part(j, g, Some((psi, &beta)));
    let mut skew = TensorSample::zeros(&[FrameDown, CoordDown, CoordDown], r, n, &j.point);
    for a in 0..r {
        for i in 0..n {
            for k in i + 1..n {
                let v = lie_covariant(&j.anchor[a], b, i, k)
                    - (pair(&j.connection, &beta, a, i, k) - pair(&j.connection, &beta, a, k, i))
                    - (pair(psi, &rho_bar, a, i, k) - pair(psi, &rho_bar, a, k, i));
                skew.set(&[a, i, k], v);
                skew.set(&[a, k, i], -v);
            }
        }
    }
    Ok(GeneralizedResiduals { sym, skew })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructureKind {
    Symplectic,
    Poisson,
}

/// `tau-nabla` applied to the symplectic form (slots `[a, i, j]` covariant)
/// or to the Poisson bivector (slots `[a, i, j]` contravariant).
pub fn structure_residual(j: &PointJets, kind: StructureKind) -> Result<TensorSample, CalcError> {
    let (n, r) = (j.dim, j.rank);
    match kind {
        StructureKind::Symplectic => {
            let w = j.symplectic.as_ref().ok_or(CalcError::Missing("symplectic"))?;
            let beta = contract_anchor(j, w);
            let mut out = TensorSample::zeros(&[FrameDown, CoordDown, CoordDown], r, n, &j.point);
            for a in 0..r {
                for i in 0..n {
                    for k in 0..n {
                        let v = lie_covariant(&j.anchor[a], w, i, k)
                            - (pair(&j.connection, &beta, a, i, k) - pair(&j.connection, &beta, a, k, i));
                        out.set(&[a, i, k], v);
                    }
                }
            }
            Ok(out)
        }
        StructureKind::Poisson => {
            let p = j.poisson.as_ref().ok_or(CalcError::Missing("poisson"))?;
            let rho = |b: usize, i: usize| j.anchor[b][i].value();
            let w = |a: usize, b: usize, k: usize| j.connection[a][b][k].value();
            let mut out = TensorSample::zeros(&[FrameDown, CoordUp, CoordUp], r, n, &j.point);
            for a in 0..r {
                let v = &j.anchor[a];
                for i in 0..n {
                    for jj in 0..n {
                        // (L_v P)^{ij} = v^k d_k P^{ij} - d_k v^i P^{kj} - d_k v^j P^{ik}
                        let mut val = 0.0;
                        for k in 0..n {
                            val += v[k].value() * p[i][jj].d1(k)
                                - v[i].d1(k) * p[k][jj].value()
                                - v[jj].d1(k) * p[i][k].value();
                        }
                        // left and right placement of rho_b omega^b_a(.)
                        for b in 0..r {
                            for k in 0..n {
                                val += rho(b, i) * w(a, b, k) * p[k][jj].value()
                                    + p[i][k].value() * w(a, b, k) * rho(b, jj);
                            }
                        }
                        out.set(&[a, i, jj], val);
                    }
                }
            }
            Ok(out)
        }
    }
}

/// `max |1/2 (psi^b_{a,i} rho_bar_{b,j} + psi^b_{a,j} rho_bar_{b,i})|` at one point.
pub fn koszul_delta_residual(j: &PointJets, psi: &[Vec<Vec<Jet>>]) -> Result<f64, CalcError> {
    let g = metric(j)?;
    let (n, r) = (j.dim, j.rank);
    if psi.len() != r || psi.iter().any(|row| row.len() != r || row.iter().any(|f| f.len() != n)) {
        return Err(CalcError::Shape(format!("psi must be {r}x{r}x{n}")));
    }
    let rho_bar = contract_anchor(j, g);
    let mut worst = 0.0f64;
    for a in 0..r {
        for i in 0..n {
            for k in i..n {
                let v = 0.5 * (pair(psi, &rho_bar, a, i, k) + pair(psi, &rho_bar, a, k, i));
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}
