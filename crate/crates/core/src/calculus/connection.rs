//! Tensors built from the anchor, the structure functions and the connection.

use nalgebra::DMatrix;

use super::tensor::{Slot, TensorSample};
use super::CalcError;
use crate::exprjet::Jet;
use crate::model::{min_leading_minor, PointJets, DEGENERACY_FLOOR};

use Slot::{CoordDown, CoordUp, FrameDown, FrameUp};

/// Christoffel symbols `Gamma^k_{ij}` of the Levi-Civita connection, slots `[k, i, j]`.
pub fn christoffel(j: &PointJets) -> Result<TensorSample, CalcError> {
    let g = j.metric.as_ref().ok_or(CalcError::Missing("metric"))?;
    let n = j.dim;
    let gm = DMatrix::from_fn(n, n, |a, b| g[a][b].value());
    if min_leading_minor(&gm) < DEGENERACY_FLOOR {
        return Err(CalcError::SingularMetric { point: j.point.clone() });
    }
    let inv = gm.try_inverse().ok_or(CalcError::SingularMetric { point: j.point.clone() })?;
    let mut out = TensorSample::zeros(&[CoordUp, CoordDown, CoordDown], j.rank, n, &j.point);
    for k in 0..n {
        for a in 0..n {
            for b in a..n {
                let mut v = 0.0;
                for l in 0..n {
                    v += inv[(k, l)] * (g[b][l].d1(a) + g[a][l].d1(b) - g[a][b].d1(l));
                }
                out.set(&[k, a, b], 0.5 * v);
                out.set(&[k, b, a], 0.5 * v);
            }
        }
    }
    Ok(out)
}

/// Jets of the A-torsion `T^c_{ab} = rho_a(omega^c_b) - rho_b(omega^c_a) - C^c_{ab}`,
/// indexed `[a][b][c]`.
pub fn a_torsion_jets(j: &PointJets) -> Vec<Vec<Vec<Jet>>> {
    let (n, r) = (j.dim, j.rank);
    let contract =
        |a: usize, b: usize, c: usize| (0..n).fold(j.zero(), |acc, i| acc + &j.anchor[a][i] * &j.connection[b][c][i]);
    (0..r)
        .map(|a| {
            (0..r)
                .map(|b| (0..r).map(|c| contract(a, b, c) - contract(b, a, c) - &j.structure[a][b][c]).collect())
                .collect()
        })
        .collect()
}

/// A-torsion, slots `[c, a, b]`.
pub fn a_torsion(j: &PointJets) -> TensorSample {
    let r = j.rank;
    let t = a_torsion_jets(j);
    let mut out = TensorSample::zeros(&[FrameUp, FrameDown, FrameDown], r, j.dim, &j.point);
    for a in 0..r {
        for b in 0..r {
            for c in 0..r {
                out.set(&[c, a, b], t[a][b][c].value());
            }
        }
    }
    out
}

/// Curvature of the connection, `F^b_{a,ij}` with slots `[b, a, i, j]`.
pub fn connection_curvature(j: &PointJets) -> TensorSample {
    let (n, r) = (j.dim, j.rank);
    let w = &j.connection;
    let mut out = TensorSample::zeros(&[FrameUp, FrameDown, CoordDown, CoordDown], r, n, &j.point);
    for a in 0..r {
        for b in 0..r {
            for i in 0..n {
                for k in 0..n {
                    let mut v = w[a][b][k].d1(i) - w[a][b][i].d1(k);
                    for c in 0..r {
                        v += w[a][c][k].value() * w[c][b][i].value() - w[a][c][i].value() * w[c][b][k].value();
                    }
                    out.set(&[b, a, i, k], v);
                }
            }
        }
    }
    out
}

/// `(L_{rho_a} omega_b^c)_i = rho_a^k d_k omega^c_{b,i} + omega^c_{b,k} d_i rho_a^k`.
fn lie_of_form(j: &PointJets, a: usize, b: usize, c: usize, i: usize) -> f64 {
    (0..j.dim)
        .map(|k| {
            j.anchor[a][k].value() * j.connection[b][c][i].d1(k) + j.connection[b][c][k].value() * j.anchor[a][k].d1(i)
        })
        .sum()
}

/// `iota_{rho_q} omega_b^c`.
fn contract(j: &PointJets, q: usize, b: usize, c: usize) -> f64 {
    (0..j.dim).map(|k| j.anchor[q][k].value() * j.connection[b][c][k].value()).sum()
}

/// Compatibility tensor from the frame expansion, slots `[c, a, b, i]`.
pub fn compatibility_tensor_frame(j: &PointJets) -> TensorSample {
    let (n, r) = (j.dim, j.rank);
    let w = |a: usize, b: usize, i: usize| j.connection[a][b][i].value();
    let cs = |a: usize, b: usize, c: usize| j.structure[a][b][c].value();
    // iota_{rho_q} omega_b^c, indexed [(q * r + b) * r + c]
    let mut iota = vec![0.0; r * r * r];
    for q in 0..r {
        for b in 0..r {
            for c in 0..r {
                iota[(q * r + b) * r + c] = contract(j, q, b, c);
            }
        }
    }
    let iota = |q: usize, b: usize, c: usize| iota[(q * r + b) * r + c];
    let mut out = TensorSample::zeros(&[FrameUp, FrameDown, FrameDown, CoordDown], r, n, &j.point);
    for a in 0..r {
        for b in 0..r {
            for c in 0..r {
                for i in 0..n {
                    let mut v = lie_of_form(j, a, b, c, i) - lie_of_form(j, b, a, c, i);
                    for q in 0..r {
                        v += -iota(q, b, c) * w(a, q, i) + iota(q, a, c) * w(b, q, i);
                        v += w(b, q, i) * cs(a, q, c) - w(a, q, i) * cs(b, q, c);
                        v -= cs(a, b, q) * w(q, c, i);
                    }
                    v -= j.structure[a][b][c].d1(i);
                    out.set(&[c, a, b, i], v);
                }
            }
        }
    }
    out
}

/// Compatibility tensor from `nabla(T) + iota_{rho} F` differences, slots `[c, a, b, i]`.
pub fn compatibility_tensor_covariant(j: &PointJets) -> TensorSample {
    let (n, r) = (j.dim, j.rank);
    let t = a_torsion_jets(j);
    let f = connection_curvature(j);
    let w = |a: usize, b: usize, i: usize| j.connection[a][b][i].value();
    let mut out = TensorSample::zeros(&[FrameUp, FrameDown, FrameDown, CoordDown], r, n, &j.point);
    for a in 0..r {
        for b in 0..r {
            for c in 0..r {
                for i in 0..n {
                    let mut v = t[a][b][c].d1(i);
                    for q in 0..r {
                        v += w(q, c, i) * t[a][b][q].value()
                            - w(a, q, i) * t[q][b][c].value()
                            - w(b, q, i) * t[a][q][c].value();
                    }
                    for k in 0..n {
                        v += j.anchor[a][k].value() * f.get(&[c, b, k, i])
                            - j.anchor[b][k].value() * f.get(&[c, a, k, i]);
                    }
                    out.set(&[c, a, b, i], v);
                }
            }
        }
    }
    out
}

/// Coefficients `D^c_{ab}` of the dual A-connection and its two algebraic identities.
#[derive(Clone, Debug)]
pub struct DualConnection {
    /// Slots `[c, a, b]`.
    pub coefficients: TensorSample,
    /// Max difference between the twice-dualised connection and `nabla_{rho(.)}`.
    pub reflexivity_defect: f64,
    /// Max difference between the torsion of the dual and minus the A-torsion.
    pub torsion_defect: f64,
}

/// Dual of an A-connection with coefficients `x[a][b][c]`: `C^c_{ab} + x^c_{ba}`.
fn dualize(j: &PointJets, x: &[Vec<Vec<Jet>>]) -> Vec<Vec<Vec<Jet>>> {
    let r = j.rank;
    (0..r).map(|a| (0..r).map(|b| (0..r).map(|c| &j.structure[a][b][c] + &x[b][a][c]).collect()).collect()).collect()
}

/// `nabla_{rho_a} e_b = rho_a^k omega^c_{b,k} e_c`, indexed `[a][b][c]`.
fn induced_coefficients(j: &PointJets) -> Vec<Vec<Vec<Jet>>> {
    let r = j.rank;
    (0..r)
        .map(|a| {
            (0..r)
                .map(|b| {
                    (0..r)
                        .map(|c| (0..j.dim).fold(j.zero(), |acc, k| acc + &j.anchor[a][k] * &j.connection[b][c][k]))
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Jets of `D^c_{ab}`, indexed `[a][b][c]`.
pub fn dual_coefficient_jets(j: &PointJets) -> Vec<Vec<Vec<Jet>>> {
    dualize(j, &induced_coefficients(j))
}

pub fn dual_a_connection(j: &PointJets) -> DualConnection {
    let r = j.rank;
    let induced = induced_coefficients(j);
    let dual = dualize(j, &induced);
    let back = dualize(j, &dual);
    let torsion = a_torsion_jets(j);
    let mut coefficients = TensorSample::zeros(&[FrameUp, FrameDown, FrameDown], r, j.dim, &j.point);
    let (mut refl, mut tors) = (0.0f64, 0.0f64);
    for a in 0..r {
        for b in 0..r {
            for c in 0..r {
                coefficients.set(&[c, a, b], dual[a][b][c].value());
                refl = refl.max((back[a][b][c].value() - induced[a][b][c].value()).abs());
                let dual_torsion = dual[a][b][c].value() - dual[b][a][c].value() - j.structure[a][b][c].value();
                tors = tors.max((dual_torsion + torsion[a][b][c].value()).abs());
            }
        }
    }
    DualConnection { coefficients, reflexivity_defect: refl, torsion_defect: tors }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InducedConnection {
    /// The dual A-connection on `A`.
    Alpha,
    /// The A-connection on `TM`, `[rho_a, X] + rho(nabla_X e_a)`.
    Tau,
}

/// Jets of `tau-nabla_{e_a} d_j = T^i_{aj} d_i` with
/// `T^i_{aj} = -d_j rho_a^i + omega^b_{a,j} rho_b^i`, indexed `[a][j][i]`.
/// One order below the anchor jets.
pub fn tau_coefficient_jets(j: &PointJets) -> Vec<Vec<Vec<Jet>>> {
    let (n, r) = (j.dim, j.rank);
    (0..r)
        .map(|a| {
            (0..n)
                .map(|k| {
                    (0..n)
                        .map(|i| {
                            let mut v = -j.anchor[a][i].partial(k);
                            for b in 0..r {
                                v = v + &j.connection[a][b][k] * &j.anchor[b][i];
                            }
                            v
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Curvature of an induced A-connection.
///
/// Alpha: slots `[d, a, b, c]` for `R(e_a, e_b) e_c = R^d_{abc} e_d`.
/// Tau: slots `[i, a, b, j]` for `R(e_a, e_b) d_j = R^i_{abj} d_i`; needs
/// anchor jets of order 2.
pub fn a_curvature(j: &PointJets, which: InducedConnection) -> TensorSample {
    let (n, r) = (j.dim, j.rank);
    let cs = |a: usize, b: usize, c: usize| j.structure[a][b][c].value();
    match which {
        InducedConnection::Alpha => {
            let d = dual_coefficient_jets(j);
            let rho_d = |a: usize, x: &Jet| -> f64 { (0..n).map(|k| j.anchor[a][k].value() * x.d1(k)).sum() };
            let mut out = TensorSample::zeros(&[FrameUp, FrameDown, FrameDown, FrameDown], r, n, &j.point);
            for a in 0..r {
                for b in 0..r {
                    for c in 0..r {
                        for dd in 0..r {
                            let mut v = rho_d(a, &d[b][c][dd]) - rho_d(b, &d[a][c][dd]);
                            for e in 0..r {
                                v += d[b][c][e].value() * d[a][e][dd].value()
                                    - d[a][c][e].value() * d[b][e][dd].value()
                                    - cs(a, b, e) * d[e][c][dd].value();
                            }
                            out.set(&[dd, a, b, c], v);
                        }
                    }
                }
            }
            out
        }
        InducedConnection::Tau => {
            assert!(j.order >= 2, "tau curvature needs second derivatives of the anchor");
            let t = tau_coefficient_jets(j);
            let rho_d = |a: usize, x: &Jet| -> f64 { (0..n).map(|k| j.anchor[a][k].value() * x.d1(k)).sum() };
            let mut out = TensorSample::zeros(&[CoordUp, FrameDown, FrameDown, CoordDown], r, n, &j.point);
            for a in 0..r {
                for b in 0..r {
                    for jj in 0..n {
                        for i in 0..n {
                            let mut v = rho_d(a, &t[b][jj][i]) - rho_d(b, &t[a][jj][i]);
                            for k in 0..n {
                                v +=
                                    t[b][jj][k].value() * t[a][k][i].value() - t[a][jj][k].value() * t[b][k][i].value();
                            }
                            for e in 0..r {
                                v -= cs(a, b, e) * t[e][jj][i].value();
                            }
                            out.set(&[i, a, b, jj], v);
                        }
                    }
                }
            }
            out
        }
    }
}

/// `max_{a,b,i} |(tau-nabla_{e_a} rho(e_b))^i - (rho(alpha-nabla_{e_a} e_b))^i|`.
pub fn tau_intertwine_residual(j: &PointJets) -> f64 {
    let (n, r) = (j.dim, j.rank);
    let t = tau_coefficient_jets(j);
    let d = dual_coefficient_jets(j);
    let mut worst = 0.0f64;
    for a in 0..r {
        for b in 0..r {
            for i in 0..n {
                // tau-nabla_a (rho_b^k d_k) = rho_a(rho_b^i) d_i + rho_b^k T^i_{ak} d_i
                let mut lhs = 0.0;
                for k in 0..n {
                    lhs += j.anchor[a][k].value() * j.anchor[b][i].d1(k) + j.anchor[b][k].value() * t[a][k][i].value();
                }
                let rhs: f64 = (0..r).map(|c| d[a][b][c].value() * j.anchor[c][i].value()).sum();
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    worst
}
