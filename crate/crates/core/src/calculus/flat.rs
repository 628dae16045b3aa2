//! Parallel transport of the frame and the flat-frame probe.

use nalgebra::DMatrix;

use super::connection::{a_torsion, connection_curvature};
use super::metric::killing_residual_frame;
use super::CalcError;
use crate::exprjet::{eval_jet, eval_value, DomainError};
use crate::model::{AlgebroidSpec, CheckReport, PointJets};
use crate::par::{map_items, Execution};

/// Frame transport matrix: `e~_a = U[a][b] e_b`.
pub type Frame = DMatrix<f64>;

/// `omega^c_{b,i}` at a point, indexed `[b][c][i]`.
pub fn connection_values(spec: &AlgebroidSpec, p: &[f64]) -> Result<Vec<Vec<Vec<f64>>>, DomainError> {
    spec.connection
        .iter()
        .map(|row| row.iter().map(|form| form.iter().map(|e| eval_value(e, p)).collect()).collect())
        .collect()
}

/// `-U W` with `W[b][c] = omega^c_{b,i} v^i`.
pub fn transport_rate(omega: &[Vec<Vec<f64>>], u: &Frame, v: &[f64]) -> Frame {
    let r = u.nrows();
    let w = DMatrix::from_fn(r, r, |b, c| omega[b][c].iter().zip(v).map(|(o, vi)| o * vi).sum::<f64>());
    -(u * w)
}

/// Transports `u` along the straight segment `from -> to` with `steps` RK4 steps.
pub fn transport_segment(
    spec: &AlgebroidSpec,
    u: &Frame,
    from: &[f64],
    to: &[f64],
    steps: usize,
) -> Result<Frame, DomainError> {
    let vel: Vec<f64> = to.iter().zip(from).map(|(b, a)| b - a).collect();
    let at = |t: f64| -> Vec<f64> { from.iter().zip(&vel).map(|(a, d)| a + t * d).collect() };
    let h = 1.0 / steps as f64;
    let mut u = u.clone();
    for s in 0..steps {
        let t = s as f64 * h;
        let k1 = transport_rate(&connection_values(spec, &at(t))?, &u, &vel);
        let k2 = transport_rate(&connection_values(spec, &at(t + 0.5 * h))?, &(&u + &k1 * (0.5 * h)), &vel);
        let k3 = transport_rate(&connection_values(spec, &at(t + 0.5 * h))?, &(&u + &k2 * (0.5 * h)), &vel);
        let k4 = transport_rate(&connection_values(spec, &at(t + h))?, &(&u + &k3 * h), &vel);
        u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    Ok(u)
}

/// Grid layout for the flat-frame probe.
#[derive(Clone, Debug)]
pub struct ProbeConfig {
    pub basepoint: Vec<f64>,
    /// Grid points per axis on each side of the basepoint.
    pub grid_steps: usize,
    /// Grid spacing per axis.
    pub spacing: Vec<f64>,
    /// RK4 steps per grid spacing.
    pub substeps: usize,
    pub flatness_tol: f64,
    pub killing_gate_tol: f64,
    pub tolerance: f64,
}

impl ProbeConfig {
    /// Grid centred in the chart domain, covering half of each interval.
    pub fn centered(spec: &AlgebroidSpec, grid_steps: usize) -> ProbeConfig {
        let steps = grid_steps.max(1);
        ProbeConfig {
            basepoint: spec.chart.domain.iter().map(|[lo, hi]| 0.5 * (lo + hi)).collect(),
            grid_steps: steps,
            spacing: spec.chart.domain.iter().map(|[lo, hi]| (hi - lo) / (4.0 * steps as f64)).collect(),
            substeps: 20,
            flatness_tol: 1e-7,
            killing_gate_tol: 1e-7,
            tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FrameSample {
    pub point: Vec<f64>,
    pub frame: Frame,
}

#[derive(Clone, Debug)]
pub struct FlatFrameProbe {
    pub frames: Vec<FrameSample>,
    /// Curvature of the connection over the grid (the gate).
    pub flatness: CheckReport,
    /// Deviation of the transported structure functions from their basepoint values.
    pub structure_constancy: CheckReport,
    /// Difference between transports along two axis orderings.
    pub path_independence: CheckReport,
    /// `L_{rho(e~_a)} g` for the flat sections, when a metric is present and
    /// the frame Killing check passes on the grid.
    pub killing: Option<CheckReport>,
    pub killing_skipped: Option<String>,
}

impl FlatFrameProbe {
    pub fn reports(&self) -> Vec<CheckReport> {
        let mut out = vec![self.flatness.clone(), self.structure_constancy.clone(), self.path_independence.clone()];
        out.extend(self.killing.clone());
        out
    }
}

fn grid(config: &ProbeConfig) -> Vec<Vec<i64>> {
    let n = config.basepoint.len();
    let m = config.grid_steps as i64;
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|idx: Vec<i64>| {
                (-m..=m).map(move |k| {
                    let mut next = idx.clone();
                    next.push(k);
                    next
                })
            })
            .collect();
    }
    out
}

fn grid_point(config: &ProbeConfig, idx: &[i64]) -> Vec<f64> {
    config.basepoint.iter().zip(&config.spacing).zip(idx).map(|((x, h), &k)| x + h * k as f64).collect()
}

/// Transport from the basepoint along axis-aligned legs, visiting axes in `order`.
fn transport_to(
    spec: &AlgebroidSpec,
    config: &ProbeConfig,
    idx: &[i64],
    order: &[usize],
) -> Result<Frame, DomainError> {
    let r = spec.rank;
    let mut u = Frame::identity(r, r);
    let mut here = config.basepoint.clone();
    for &axis in order {
        let k = idx[axis];
        let dir = k.signum() as f64;
        for _ in 0..k.unsigned_abs() {
            let mut next = here.clone();
            next[axis] += dir * config.spacing[axis];
            u = transport_segment(spec, &u, &here, &next, config.substeps)?;
            here = next;
        }
    }
    Ok(u)
}

/// Structure functions of the transported frame,
/// `C~^c_{ab} = -(U^-1)_s^c U_a^p U_b^q T^s_{pq}`, flattened `[a][b][c]`.
fn transported_structure(j: &PointJets, u: &Frame) -> Result<Vec<f64>, CalcError> {
    let r = j.rank;
    let t = a_torsion(j);
    let inv = u.clone().try_inverse().ok_or(CalcError::Shape("transported frame degenerated".into()))?;
    let mut out = vec![0.0; r * r * r];
    for a in 0..r {
        for b in 0..r {
            for c in 0..r {
                let mut v = 0.0;
                for p in 0..r {
                    for q in 0..r {
                        for s in 0..r {
                            v -= u[(a, p)] * u[(b, q)] * t.get(&[s, p, q]) * inv[(s, c)];
                        }
                    }
                }
                out[(a * r + b) * r + c] = v;
            }
        }
    }
    Ok(out)
}

/// `max_{a,ij} |L_{V_a} g|` for `V_a = U_a^p rho_p`, with `dU` from short transports.
fn flat_section_killing(spec: &AlgebroidSpec, p: &[f64], u: &Frame, delta: f64) -> Result<f64, CalcError> {
    let (n, r) = (spec.dim(), spec.rank);
    let g = spec.metric.as_ref().ok_or(CalcError::Missing("metric"))?;
    let mut du = Vec::with_capacity(n);
    for i in 0..n {
        let (mut plus, mut minus) = (p.to_vec(), p.to_vec());
        plus[i] += delta;
        minus[i] -= delta;
        let up = transport_segment(spec, u, p, &plus, 1)?;
        let um = transport_segment(spec, u, p, &minus, 1)?;
        du.push((up - um) / (2.0 * delta));
    }
    let rho: Vec<Vec<crate::exprjet::Jet>> =
        spec.anchor.iter().map(|row| row.iter().map(|e| eval_jet(e, p, 1)).collect()).collect::<Result<_, _>>()?;
    let gj: Vec<Vec<crate::exprjet::Jet>> =
        (0..n).map(|i| (0..n).map(|k| eval_jet(g.get(i, k), p, 1)).collect()).collect::<Result<_, _>>()?;
    let mut worst = 0.0f64;
    for a in 0..r {
        let v: Vec<f64> = (0..n).map(|k| (0..r).map(|q| u[(a, q)] * rho[q][k].value()).sum()).collect();
        // dv[i][k] = d_i V^k
        let dv: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| (0..r).map(|q| du[i][(a, q)] * rho[q][k].value() + u[(a, q)] * rho[q][k].d1(i)).sum())
                    .collect()
            })
            .collect();
        for i in 0..n {
            for jj in i..n {
                let mut val = 0.0;
                for k in 0..n {
                    val += v[k] * gj[i][jj].d1(k) + dv[i][k] * gj[k][jj].value() + dv[jj][k] * gj[i][k].value();
                }
                worst = worst.max(val.abs());
            }
        }
    }
    Ok(worst)
}

/// Builds a covariantly constant frame on a grid around the basepoint and
/// tests what flatness implies for it.
pub fn flat_frame_probe(spec: &AlgebroidSpec, config: &ProbeConfig) -> Result<FlatFrameProbe, CalcError> {
    let n = spec.dim();
    let exec = Execution::current();
    let indices = grid(config);
    let points: Vec<Vec<f64>> = indices.iter().map(|idx| grid_point(config, idx)).collect();
    if let Some(p) = points.iter().find(|p| !spec.chart.contains(p)) {
        return Err(CalcError::OutsideDomain { point: p.clone() });
    }

    let jets: Vec<PointJets> =
        map_items(exec, &points, |p| PointJets::new(spec, p, 1)).into_iter().collect::<Result<_, _>>()?;
    let curvature: Vec<f64> = jets.iter().map(|j| connection_curvature(j).max_abs()).collect();
    let flatness = CheckReport::from_residuals("flat_frame_flatness", config.flatness_tol, &points, &curvature);
    if !flatness.pass {
        return Err(CalcError::NotFlat {
            max: flatness.max_residual,
            tolerance: config.flatness_tol,
            point: flatness.worst_point.clone().unwrap_or_default(),
        });
    }

    let forward: Vec<usize> = (0..n).collect();
    let backward: Vec<usize> = (0..n).rev().collect();
    let frames: Vec<Frame> = map_items(exec, &indices, |idx| transport_to(spec, config, idx, &forward))
        .into_iter()
        .collect::<Result<_, _>>()?;
    let others: Vec<Frame> = map_items(exec, &indices, |idx| transport_to(spec, config, idx, &backward))
        .into_iter()
        .collect::<Result<_, _>>()?;
    let path: Vec<f64> = frames.iter().zip(&others).map(|(a, b)| (a - b).amax()).collect();
    let path_independence =
        CheckReport::from_residuals("flat_frame_path_independence", config.tolerance, &points, &path);

    let center = indices.iter().position(|idx| idx.iter().all(|&k| k == 0)).expect("basepoint in grid");
    let structures: Vec<Vec<f64>> =
        jets.iter().zip(&frames).map(|(j, u)| transported_structure(j, u)).collect::<Result<_, _>>()?;
    let deviation: Vec<f64> = structures
        .iter()
        .map(|c| c.iter().zip(&structures[center]).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
        .collect();
    let structure_constancy =
        CheckReport::from_residuals("flat_frame_structure_constancy", config.tolerance, &points, &deviation);

    let (killing, killing_skipped) = if spec.metric.is_none() {
        (None, Some("no metric".to_string()))
    } else {
        let gate = jets
            .iter()
            .map(|j| killing_residual_frame(j).map(|t| t.max_abs()))
            .collect::<Result<Vec<f64>, _>>()?
            .into_iter()
            .fold(0.0, f64::max);
        if gate > config.killing_gate_tol {
            (None, Some(format!("frame Killing residual {gate:e} exceeds {:e}", config.killing_gate_tol)))
        } else {
            let items: Vec<(Vec<f64>, Frame)> = points.iter().cloned().zip(frames.iter().cloned()).collect();
            let values: Vec<f64> = map_items(exec, &items, |(p, u)| flat_section_killing(spec, p, u, 1e-4))
                .into_iter()
                .collect::<Result<_, _>>()?;
            (Some(CheckReport::from_residuals("flat_frame_killing", config.tolerance, &points, &values)), None)
        }
    };

    Ok(FlatFrameProbe {
        frames: points.into_iter().zip(frames).map(|(point, frame)| FrameSample { point, frame }).collect(),
        flatness,
        structure_constancy,
        path_independence,
        killing,
        killing_skipped,
    })
}
