use nalgebra::DMatrix;
use serde::Serialize;

use super::extend::{FreeMode, FreeTruncation};
use super::sections::{apply, basis, bracket, bracket_extension, covariant, Section};
use super::FreeError;
use crate::calculus::{compatibility_tensor_frame, killing_residual_frame};
use crate::exprjet::{eval_jet, Expr};
use crate::model::{CheckReport, PointJets};
use crate::par::{map_points, Execution};

pub const FREE_CARTAN_TOL: f64 = 1e-8;
pub const FREE_JACOBI_TOL: f64 = 1e-8;
pub const FREE_ANCHOR_TOL: f64 = 1e-8;
pub const F_LINEARITY_TOL: f64 = 1e-9;
pub const PROPAGATION_TOL: f64 = 1e-7;
/// Relative singular-value cutoff for anchor ranks.
pub const RANK_TOL: f64 = 1e-10;

fn over_points<F>(
    name: &str,
    tol: f64,
    free: &FreeTruncation,
    points: &[Vec<f64>],
    order: usize,
    f: F,
) -> Result<CheckReport, FreeError>
where
    F: Fn(&PointJets) -> f64 + Sync + Send,
{
    let values = map_points(Execution::current(), points, |p| PointJets::new(&free.extended, p, order).map(|j| f(&j)))
        .into_iter()
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(CheckReport::from_residuals(name, tol, points, &values))
}

/// Pairs `(a, b)`, `a < b`, whose bracket lies inside the truncation.
fn pairs(free: &FreeTruncation) -> Vec<(usize, usize)> {
    let n = free.rank();
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|&(a, b)| free.in_range(a, b)).collect()
}

/// Max `|S|` over in-range pairs, using the frame formula on the extended data.
pub fn cartan_check_extended(free: &FreeTruncation, points: &[Vec<f64>], tol: f64) -> Result<CheckReport, FreeError> {
    let pairs = pairs(free);
    let (r, n) = (free.rank(), free.base.dim());
    over_points("free_cartan", tol, free, points, 1, |j| {
        let s = compatibility_tensor_frame(j);
        let mut worst = 0.0f64;
        for &(a, b) in &pairs {
            for c in 0..r {
                for i in 0..n {
                    worst = worst.max(s.get(&[c, a, b, i]).abs());
                }
            }
        }
        worst
    })
}

/// `[rho_a, rho_b] - C^c_{ab} rho_c` over in-range pairs.
pub fn anchor_morphism_extended(
    free: &FreeTruncation,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<CheckReport, FreeError> {
    let pairs = pairs(free);
    over_points("free_anchor_morphism", tol, free, points, 1, |j| {
        let mut worst = 0.0f64;
        for &(a, b) in &pairs {
            for i in 0..j.dim {
                let mut v = 0.0;
                for k in 0..j.dim {
                    v += j.anchor[a][k].value() * j.anchor[b][i].d1(k) - j.anchor[b][k].value() * j.anchor[a][i].d1(k);
                }
                for &(c, x) in &free.brackets[a][b] {
                    v -= x * j.anchor[c][i].value();
                }
                worst = worst.max(v.abs());
            }
        }
        worst
    })
}

/// Jacobiator coefficients `Jac(e_a, e_b, e_c)` as a basis expansion;
/// empty outside the truncation.
pub fn jacobiator(free: &FreeTruncation, a: usize, b: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; free.rank()];
    if free.degrees[a] + free.degrees[b] + free.degrees[c] > free.degree {
        return out;
    }
    for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
        for &(q, s) in &free.brackets[y][z] {
            for &(w, t) in &free.brackets[x][q] {
                out[w] += s * t;
            }
        }
    }
    out
}

/// Largest Jacobiator coefficient over in-range triples; zero in quotient mode.
pub fn jacobiator_defect(free: &FreeTruncation) -> f64 {
    let n = free.rank();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                worst = jacobiator(free, a, b, c).iter().fold(worst, |m, x| m.max(x.abs()));
            }
        }
    }
    worst
}

/// Covariant constancy of the Jacobiator as a map from `Lambda^3` to the bundle.
pub fn jacobiator_check(free: &FreeTruncation, points: &[Vec<f64>], tol: f64) -> Result<CheckReport, FreeError> {
    if free.mode != FreeMode::Almost {
        return Err(FreeError::Precondition("the Jacobiator check needs almost mode".into()));
    }
    if free.degree < 3 {
        return Err(FreeError::Precondition("the Jacobiator check needs degree at least 3".into()));
    }
    let n = free.rank();
    let mut triples = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if free.degrees[a] + free.degrees[b] + free.degrees[c] <= free.degree {
                    triples.push((a, b, c));
                }
            }
        }
    }
    // the correction terms need Jac with arbitrary argument order
    let jac = |a: usize, b: usize, c: usize| jacobiator(free, a, b, c);
    let table: Vec<((usize, usize, usize), Vec<f64>)> = triples.iter().map(|&t| (t, jac(t.0, t.1, t.2))).collect();
    over_points("free_jacobiator_constancy", tol, free, points, 0, |j| {
        let w = |a: usize, c: usize, i: usize| j.connection[a][c][i].value();
        let mut worst = 0.0f64;
        for ((a, b, c), jabc) in &table {
            let (a, b, c) = (*a, *b, *c);
            for i in 0..j.dim {
                let mut res = vec![0.0; n];
                for (q, &jq) in jabc.iter().enumerate() {
                    if jq != 0.0 {
                        for (d, slot) in res.iter_mut().enumerate() {
                            *slot += jq * w(q, d, i);
                        }
                    }
                }
                for q in 0..n {
                    let (wa, wb, wc) = (w(a, q, i), w(b, q, i), w(c, q, i));
                    if wa != 0.0 {
                        jac(q, b, c).iter().zip(res.iter_mut()).for_each(|(x, s)| *s -= wa * x);
                    }
                    if wb != 0.0 {
                        jac(a, q, c).iter().zip(res.iter_mut()).for_each(|(x, s)| *s -= wb * x);
                    }
                    if wc != 0.0 {
                        jac(a, b, q).iter().zip(res.iter_mut()).for_each(|(x, s)| *s -= wc * x);
                    }
                }
                worst = res.iter().fold(worst, |m, x| m.max(x.abs()));
            }
        }
        worst
    })
}

/// Extended Killing residuals, one report per degree, after checking the generators.
pub fn propagate_compatibility(
    free: &FreeTruncation,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<Vec<CheckReport>, FreeError> {
    if free.base.metric.is_none() {
        return Err(FreeError::Precondition("a metric is required".into()));
    }
    let generator = crate::calculus::check_killing_frame(&free.base, points, tol)?;
    if !generator.pass {
        return Err(FreeError::GeneratorNotKilling { residual: generator.max_residual, tolerance: tol });
    }
    let per_point = map_points(Execution::current(), points, |p| -> Result<Vec<f64>, FreeError> {
        let j = PointJets::new(&free.extended, p, 1)?;
        let k = killing_residual_frame(&j)?;
        let mut by_degree = vec![0.0f64; free.degree];
        let n = j.dim;
        for w in 0..free.rank() {
            let slot = &mut by_degree[free.degrees[w] - 1];
            for i in 0..n {
                for jj in 0..n {
                    *slot = slot.max(k.get(&[w, i, jj]).abs());
                }
            }
        }
        Ok(by_degree)
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    Ok((0..free.degree)
        .map(|d| {
            let values: Vec<f64> = per_point.iter().map(|v| v[d]).collect();
            CheckReport::from_residuals(format!("free_killing_degree_{}", d + 1), tol, points, &values)
        })
        .collect())
}

/// `[s, f t]` and `f [s, t] + rho(s)(f) t` fed through the extension formula
/// and through the extended connection, over generator `s` and basis `t`.
pub fn f_linearity_check(
    free: &FreeTruncation,
    f: &Expr,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<CheckReport, FreeError> {
    let r = free.rank();
    let gens = free.base.rank;
    let values = map_points(Execution::current(), points, |p| -> Result<f64, FreeError> {
        let j = PointJets::new(&free.extended, p, 2)?;
        let fj = eval_jet(f, p, 2)?;
        let mut worst = 0.0f64;
        for a in 0..gens {
            for b in 0..r {
                if !free.in_range(a, b) {
                    continue;
                }
                let s = basis(&j, a);
                let t = basis(&j, b);
                let ft: Section = t.iter().map(|x| x * &fj).collect();
                let lhs = bracket_extension(&j, &s, &ft);
                let st = bracket(&j, &s, &t);
                let rho_f = apply(&super::sections::anchor_of(&j, &s), &fj);
                let combined: Section = st.iter().zip(&t).map(|(x, y)| &(x * &fj) + &(y * &rho_f)).collect();
                let rhs = covariant(&j, &combined);
                for (l, rr) in lhs.iter().zip(&rhs) {
                    for (x, y) in l.iter().zip(rr) {
                        worst = worst.max((x.value() - y.value()).abs());
                    }
                }
            }
        }
        Ok(worst)
    })
    .into_iter()
    .collect::<Result<Vec<f64>, _>>()?;
    Ok(CheckReport::from_residuals("free_f_linearity", tol, points, &values))
}

/// The extension formula applied to basis pairs, against `nabla [e_a, e_b]`
/// from the extended connection. Equivalent to the Cartan condition.
pub fn extension_consistency(free: &FreeTruncation, points: &[Vec<f64>], tol: f64) -> Result<CheckReport, FreeError> {
    let pairs = pairs(free);
    over_points("free_extension_consistency", tol, free, points, 2, |j| {
        let mut worst = 0.0f64;
        for &(a, b) in &pairs {
            let (s, t) = (basis(j, a), basis(j, b));
            let lhs = bracket_extension(j, &s, &t);
            let rhs = covariant(j, &bracket(j, &s, &t));
            for (l, rr) in lhs.iter().zip(&rhs) {
                for (x, y) in l.iter().zip(rr) {
                    worst = worst.max((x.value() - y.value()).abs());
                }
            }
        }
        worst
    })
}

/// Ranks of the anchor image spanned by words of degree `<= k`, for each `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankSample {
    pub point: Vec<f64>,
    pub ranks: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankProfile {
    pub samples: Vec<RankSample>,
    /// Rank of the input anchor never exceeds that of the extended one.
    pub contains_input: bool,
    /// The top degree adds no directions at any sample point.
    pub closed_at_top: bool,
}

pub fn anchor_rank_profile(free: &FreeTruncation, points: &[Vec<f64>]) -> Result<RankProfile, FreeError> {
    let n = free.base.dim();
    let samples = map_points(Execution::current(), points, |p| -> Result<RankSample, FreeError> {
        let j = PointJets::new(&free.extended, p, 0)?;
        let ranks = (1..=free.degree)
            .map(|k| {
                let cols: Vec<usize> = (0..free.rank()).filter(|&w| free.degrees[w] <= k).collect();
                let m = DMatrix::from_fn(n, cols.len(), |i, c| j.anchor[cols[c]][i].value());
                numeric_rank(&m)
            })
            .collect();
        Ok(RankSample { point: p.to_vec(), ranks })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let contains_input = samples.iter().all(|s| s.ranks.windows(2).all(|w| w[0] <= w[1]));
    let closed_at_top =
        samples.iter().all(|s| s.ranks.len() < 2 || s.ranks[s.ranks.len() - 1] == s.ranks[s.ranks.len() - 2]);
    Ok(RankProfile { samples, contains_input, closed_at_top })
}

fn numeric_rank(m: &DMatrix<f64>) -> usize {
    if m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * top.max(1.0)).count()
}
