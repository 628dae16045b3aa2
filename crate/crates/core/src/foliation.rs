//! Geodesics and the orthogonality of their velocity to the anchor distribution.
//!
//! Geodesics are integrated with classical fixed-step RK4 together with a
//! frame parallel-transported along the curve. When the frame satisfies the
//! Killing equations, `g(gamma', rho(e~_a))` for the transported frame `e~_a`
//! is a conserved quantity, so geodesics starting orthogonal to the leaves stay
//! orthogonal. Otherwise only the raw distance of `gamma'` from the orthogonal
//! complement of the anchor image is monitored, and reports say so.

use std::io::Write;

use nalgebra::DMatrix;
use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::Serialize;
use thiserror::Error;

use crate::calculus::{christoffel, killing_residual_frame, CalcError, KILLING_FRAME_TOL};
use crate::exprjet::DomainError;
use crate::model::{AlgebroidSpec, CheckReport, PointJets};
use crate::par::{map_items, Execution};

/// Rank cutoff when orthogonalising against the anchor image.
pub const GRAM_SCHMIDT_TOL: f64 = 1e-10;

/// Initial position and velocity of a geodesic.
pub type Start = (Vec<f64>, Vec<f64>);
pub const ORTHOGONALITY_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum FoliationError {
    #[error("spec has no metric")]
    MissingMetric,
    #[error("initial point {0:?} lies outside the chart domain")]
    OutsideDomain(Vec<f64>),
    #[error("step size must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("expected {expected} components, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Calc(#[from] CalcError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("writing trace: {0}")]
    Csv(#[from] csv::Error),
}

/// A sampled geodesic with per-step diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct GeodesicTrace {
    pub h: f64,
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    /// `g(gamma', gamma')`.
    pub energy: Vec<f64>,
    /// `g(gamma', rho_a(gamma))` per frame index.
    pub orthogonality: Vec<Vec<f64>>,
    /// Parallel-transported frame, `frames[t][a * r + b]` is the `e_b` component of `e~_a`.
    pub frames: Vec<Vec<f64>>,
    /// Set when the next step would have left the chart; the trace stops before it.
    pub exit_time: Option<f64>,
}

impl GeodesicTrace {
    pub fn truncated(&self) -> bool {
        self.exit_time.is_some()
    }

    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        self.energy.iter().fold(0.0, |m, e| m.max((e - e0).abs()))
    }
}

struct Local {
    metric: DMatrix<f64>,
    /// `[k][i][j]` flattened
    gamma: Vec<f64>,
    /// `[a][i]`
    anchor: Vec<Vec<f64>>,
    /// `[a][b][i]`
    omega: Vec<Vec<Vec<f64>>>,
}

fn local(spec: &AlgebroidSpec, x: &[f64]) -> Result<Local, FoliationError> {
    let j = PointJets::new(spec, x, 1)?;
    let g = j.metric.as_ref().ok_or(FoliationError::MissingMetric)?;
    let n = j.dim;
    let metric = DMatrix::from_fn(n, n, |i, k| g[i][k].value());
    let gamma = christoffel(&j)?.data;
    let anchor = j.anchor.iter().map(|row| row.iter().map(|v| v.value()).collect()).collect();
    let omega =
        j.connection.iter().map(|row| row.iter().map(|f| f.iter().map(|v| v.value()).collect()).collect()).collect();
    Ok(Local { metric, gamma, anchor, omega })
}

fn inner(g: &DMatrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    let n = u.len();
    let mut s = 0.0;
    for i in 0..n {
        for k in 0..n {
            s += g[(i, k)] * u[i] * v[k];
        }
    }
    s
}

/// `(v', a, U')` for the state `(x, v, U)`.
fn rate(spec: &AlgebroidSpec, x: &[f64], v: &[f64], u: &[f64]) -> Result<Vec<f64>, FoliationError> {
    let (n, r) = (x.len(), spec.rank);
    let l = local(spec, x)?;
    let mut out = Vec::with_capacity(2 * n + r * r);
    out.extend_from_slice(v);
    for k in 0..n {
        let mut acc = 0.0;
        for i in 0..n {
            for jj in 0..n {
                acc -= l.gamma[(k * n + i) * n + jj] * v[i] * v[jj];
            }
        }
        out.push(acc);
    }
    // dU/dt = -U W, W[b][c] = omega^c_b(v)
    let w: Vec<f64> = (0..r * r).map(|bc| (0..n).map(|i| l.omega[bc / r][bc % r][i] * v[i]).sum()).collect();
    for a in 0..r {
        for c in 0..r {
            out.push(-(0..r).map(|b| u[a * r + b] * w[b * r + c]).sum::<f64>());
        }
    }
    Ok(out)
}

fn axpy(y: &[f64], s: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + s * b).collect()
}

/// Integrates `x'' + Gamma(x', x') = 0` from `(x0, v0)` up to `t_max` with RK4.
pub fn geodesic_integrate(
    spec: &AlgebroidSpec,
    x0: &[f64],
    v0: &[f64],
    t_max: f64,
    h: f64,
) -> Result<GeodesicTrace, FoliationError> {
    let (n, r) = (spec.dim(), spec.rank);
    if spec.metric.is_none() {
        return Err(FoliationError::MissingMetric);
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(FoliationError::BadStep(h));
    }
    for got in [x0.len(), v0.len()] {
        if got != n {
            return Err(FoliationError::Dimension { expected: n, got });
        }
    }
    if !spec.chart.contains(x0) {
        return Err(FoliationError::OutsideDomain(x0.to_vec()));
    }
    let mut y: Vec<f64> = x0.iter().chain(v0).copied().collect();
    y.extend((0..r * r).map(|k| if k / r == k % r { 1.0 } else { 0.0 }));
    let steps = (t_max / h).round() as usize;
    let mut trace = GeodesicTrace {
        h,
        times: Vec::with_capacity(steps + 1),
        positions: Vec::new(),
        velocities: Vec::new(),
        energy: Vec::new(),
        orthogonality: Vec::new(),
        frames: Vec::new(),
        exit_time: None,
    };
    let record = |trace: &mut GeodesicTrace, t: f64, y: &[f64]| -> Result<(), FoliationError> {
        let (x, v) = (&y[..n], &y[n..2 * n]);
        let l = local(spec, x)?;
        trace.times.push(t);
        trace.positions.push(x.to_vec());
        trace.velocities.push(v.to_vec());
        trace.energy.push(inner(&l.metric, v, v));
        trace.orthogonality.push(l.anchor.iter().map(|rho| inner(&l.metric, v, rho)).collect());
        trace.frames.push(y[2 * n..].to_vec());
        Ok(())
    };
    record(&mut trace, 0.0, &y)?;
    let split = |y: &[f64]| (y[..n].to_vec(), y[n..2 * n].to_vec(), y[2 * n..].to_vec());
    for step in 1..=steps {
        let f = |y: &[f64]| {
            let (x, v, u) = split(y);
            rate(spec, &x, &v, &u)
        };
        let k1 = f(&y)?;
        let k2 = f(&axpy(&y, 0.5 * h, &k1))?;
        let k3 = f(&axpy(&y, 0.5 * h, &k2))?;
        let k4 = f(&axpy(&y, h, &k3))?;
        let next: Vec<f64> =
            (0..y.len()).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
        let t = step as f64 * h;
        if !spec.chart.contains(&next[..n]) {
            trace.exit_time = Some(t);
            break;
        }
        y = next;
        record(&mut trace, t, &y)?;
    }
    Ok(trace)
}

/// Orthonormal basis (for `g`) of the realised anchor image at `x`.
fn anchor_span(g: &DMatrix<f64>, anchor: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for rho in anchor {
        let mut w = rho.clone();
        for e in &basis {
            let c = inner(g, &w, e);
            w = axpy(&w, -c, e);
        }
        let norm = inner(g, &w, &w).max(0.0).sqrt();
        if norm > GRAM_SCHMIDT_TOL * inner(g, rho, rho).sqrt().max(1.0) {
            basis.push(w.iter().map(|c| c / norm).collect());
        }
    }
    basis
}

/// `g`-norm of the component of `v` along the anchor image at `x`.
fn tangential_part(g: &DMatrix<f64>, anchor: &[Vec<f64>], v: &[f64]) -> f64 {
    anchor_span(g, anchor).iter().map(|e| inner(g, v, e).powi(2)).sum::<f64>().sqrt()
}

/// Removes from `v` its component along the anchor image at `x`.
pub fn orthogonalize(spec: &AlgebroidSpec, x: &[f64], v: &[f64]) -> Result<Vec<f64>, FoliationError> {
    let l = local(spec, x)?;
    let mut w = v.to_vec();
    for e in anchor_span(&l.metric, &l.anchor) {
        let c = inner(&l.metric, &w, &e);
        w = axpy(&w, -c, &e);
    }
    Ok(w)
}

/// Initial conditions with velocity of `g`-norm `speed` orthogonal to the anchor
/// image. Base points are drawn from the middle half of the domain; points where
/// the anchor spans everything yield no start and are skipped.
pub fn orthogonal_starts(
    spec: &AlgebroidSpec,
    count: usize,
    seed: u64,
    speed: f64,
) -> Result<Vec<Start>, FoliationError> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut unit = move || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let mut out = Vec::new();
    let attempts = 20 * count.max(1);
    for _ in 0..attempts {
        if out.len() == count {
            break;
        }
        let x: Vec<f64> = spec
            .chart
            .domain
            .iter()
            .map(|[lo, hi]| {
                let (c, w) = (0.5 * (lo + hi), 0.25 * (hi - lo));
                c - w + 2.0 * w * unit()
            })
            .collect();
        let v: Vec<f64> = (0..spec.dim()).map(|_| 2.0 * unit() - 1.0).collect();
        let w = orthogonalize(spec, &x, &v)?;
        let l = local(spec, &x)?;
        let norm = inner(&l.metric, &w, &w).max(0.0).sqrt();
        if norm > GRAM_SCHMIDT_TOL {
            out.push((x, w.iter().map(|c| speed * c / norm).collect()));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MonitorKind {
    /// `g(gamma', rho(e~_a))` for the parallel-transported frame; conserved for Killing data.
    TransportedFrame,
    /// Distance of `gamma'` from the orthogonal complement of the anchor image; a
    /// surrogate used when the Killing check fails.
    RawSpan,
}

/// Max frame Killing residual at the trace positions.
pub fn killing_along(spec: &AlgebroidSpec, trace: &GeodesicTrace) -> Result<f64, FoliationError> {
    let mut worst = 0.0f64;
    for x in &trace.positions {
        let j = PointJets::new(spec, x, 1)?;
        worst = worst.max(killing_residual_frame(&j)?.max_abs());
    }
    Ok(worst)
}

/// Drift of the monitored orthogonality quantity along the trace.
pub fn orthogonality_monitor(
    spec: &AlgebroidSpec,
    trace: &GeodesicTrace,
) -> Result<(MonitorKind, CheckReport), FoliationError> {
    let r = spec.rank;
    let killing = killing_along(spec, trace)?;
    let kind = if killing <= KILLING_FRAME_TOL { MonitorKind::TransportedFrame } else { MonitorKind::RawSpan };
    let values: Vec<f64> = match kind {
        MonitorKind::TransportedFrame => {
            let monitored = |t: usize| -> Vec<f64> {
                let u = &trace.frames[t];
                (0..r).map(|a| (0..r).map(|b| u[a * r + b] * trace.orthogonality[t][b]).sum()).collect()
            };
            let m0 = monitored(0);
            (0..trace.times.len())
                .map(|t| monitored(t).iter().zip(&m0).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())))
                .collect()
        }
        MonitorKind::RawSpan => {
            let parts = trace
                .positions
                .iter()
                .zip(&trace.velocities)
                .map(|(x, v)| local(spec, x).map(|l| tangential_part(&l.metric, &l.anchor, v)))
                .collect::<Result<Vec<f64>, _>>()?;
            let p0 = parts[0];
            parts.iter().map(|p| (p - p0).abs()).collect()
        }
    };
    let report = CheckReport::from_residuals("orthogonality_drift", ORTHOGONALITY_TOL, &trace.positions, &values);
    let note = match kind {
        MonitorKind::TransportedFrame => "transported flat-frame monitor".to_string(),
        MonitorKind::RawSpan => format!("raw span surrogate: frame Killing residual {killing:e} along the path"),
    };
    let note = match trace.exit_time {
        Some(t) => format!("{note}; left the chart at t = {t}"),
        None => note,
    };
    Ok((kind, report.with_note(note)))
}

/// Runs the monitor over several starts in parallel and keeps the worst.
pub fn orthogonality_sweep(
    spec: &AlgebroidSpec,
    starts: &[Start],
    t_max: f64,
    h: f64,
) -> Result<Vec<(MonitorKind, CheckReport)>, FoliationError> {
    map_items(Execution::current(), starts, |(x0, v0)| {
        let trace = geodesic_integrate(spec, x0, v0, t_max, h)?;
        orthogonality_monitor(spec, &trace)
    })
    .into_iter()
    .collect()
}

/// CSV dump with columns `t, x^i, v^i, energy, orth_1..orth_r`.
pub fn write_csv<W: Write>(spec: &AlgebroidSpec, trace: &GeodesicTrace, out: W) -> Result<(), FoliationError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend(spec.chart.coords.iter().cloned());
    header.extend(spec.chart.coords.iter().map(|c| format!("v_{c}")));
    header.push("energy".into());
    header.extend((1..=spec.rank).map(|a| format!("orth_{a}")));
    w.write_record(&header)?;
    for t in 0..trace.times.len() {
        let mut row = vec![trace.times[t]];
        row.extend(&trace.positions[t]);
        row.extend(&trace.velocities[t]);
        row.push(trace.energy[t]);
        row.extend(&trace.orthogonality[t]);
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
