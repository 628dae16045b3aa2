use serde::Serialize;

use super::words::{HallWord, WordTable, MAX_DEGREE};
use super::FreeError;
use crate::exprjet::{add, eval_value, mul, sub, Expr};
use crate::model::{sample_points, AlgebroidSpec, Mode, StructureFunctions};

/// Pivot magnitude above which a column is accepted as independent.
pub const PIVOT_ACCEPT: f64 = 1e-8;
/// Pivot magnitude below which a column is treated as dependent.
pub const PIVOT_REJECT: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FreeMode {
    /// Antisymmetry only: the free almost Lie algebroid.
    Almost,
    /// Quotient by the Jacobi ideal: the free Lie algebroid.
    Quotient,
}

#[derive(Clone, Debug)]
pub struct FreeOptions {
    /// Where relations are first verified; defaults to the domain center.
    pub reference: Option<Vec<f64>>,
    /// Number of further points at which every relation is re-verified.
    pub aux_points: usize,
    pub seed: u64,
}

impl Default for FreeOptions {
    fn default() -> Self {
        FreeOptions { reference: None, aux_points: 20, seed: 42 }
    }
}

/// Degree-truncated free (almost) Lie algebroid over an anchored bundle with connection.
///
/// All data lives in the frame of basis words. Bracket coefficients are
/// constants in that frame; anchors and connection coefficients are
/// expressions in the base coordinates.
#[derive(Clone, Debug)]
pub struct FreeTruncation {
    pub base: AlgebroidSpec,
    pub degree: usize,
    pub mode: FreeMode,
    pub basis: Vec<HallWord>,
    pub degrees: Vec<usize>,
    /// `Some((u, v))` when basis word `w` is `[u, v]`.
    pub parts: Vec<Option<(usize, usize)>>,
    /// `brackets[u][v]`: expansion of `[u, v]` in the basis, empty when it
    /// vanishes or when `deg u + deg v > degree`.
    pub brackets: Vec<Vec<Vec<(usize, f64)>>>,
    /// `anchor_ext[w][i]`.
    pub anchor_ext: Vec<Vec<Expr>>,
    /// `conn_ext[w][c][i] = omega^c_{w,i}`; zero unless `deg c <= deg w`.
    pub conn_ext: Vec<Vec<Vec<Expr>>>,
    /// Number of independent Jacobi relations per degree `1..=degree`.
    pub relations: Vec<usize>,
    /// The extended data as a spec of rank `basis.len()`. Brackets beyond
    /// the truncation are absent (zero), so only in-range components of
    /// derived tensors are meaningful.
    pub extended: AlgebroidSpec,
}

impl FreeTruncation {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn in_range(&self, u: usize, v: usize) -> bool {
        self.degrees[u] + self.degrees[v] <= self.degree
    }

    pub fn counts(&self) -> Vec<usize> {
        (1..=self.degree).map(|k| self.degrees.iter().filter(|&&x| x == k).count()).collect()
    }

    pub fn bracket_coefficient(&self, u: usize, v: usize, c: usize) -> f64 {
        coefficient(&self.brackets[u][v], c)
    }
}

/// `[X, Y]^i = X^k d_k Y^i - Y^k d_k X^i`.
pub fn vector_commutator(x: &[Expr], y: &[Expr]) -> Vec<Expr> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut acc = Expr::zero();
            for k in 0..n {
                acc = add(acc, mul(x[k].clone(), y[i].diff(k)));
                acc = sub(acc, mul(y[k].clone(), x[i].diff(k)));
            }
            acc
        })
        .collect()
}

/// `(L_X theta)_i = X^k d_k theta_i + theta_k d_i X^k`.
fn lie_one_form(x: &[Expr], theta: &[Expr]) -> Vec<Expr> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut acc = Expr::zero();
            for k in 0..n {
                acc = add(acc, mul(x[k].clone(), theta[i].diff(k)));
                acc = add(acc, mul(theta[k].clone(), x[k].diff(i)));
            }
            acc
        })
        .collect()
}

/// `theta(X) = theta_k X^k`.
fn pairing(theta: &[Expr], x: &[Expr]) -> Expr {
    theta.iter().zip(x).fold(Expr::zero(), |acc, (t, v)| add(acc, mul(t.clone(), v.clone())))
}

type Dense = Vec<f64>;

fn magma_bracket(t: &WordTable, x: &Dense, y: &Dense) -> Dense {
    let mut out = vec![0.0; t.len()];
    for (u, &xu) in x.iter().enumerate() {
        if xu == 0.0 {
            continue;
        }
        for (v, &yv) in y.iter().enumerate() {
            if yv == 0.0 {
                continue;
            }
            if let Some((s, w)) = t.bracket(u, v) {
                out[w] += s * xu * yv;
            }
        }
    }
    out
}

fn unit(len: usize, i: usize) -> Dense {
    let mut v = vec![0.0; len];
    v[i] = 1.0;
    v
}

/// Row reduction in a prescribed column order with a three-way pivot decision.
/// Returns the reduced rows (pivot entry 1) and their pivot columns.
fn reduce(mut rows: Vec<Dense>, columns: &[usize], degree: usize) -> Result<Vec<(usize, Dense)>, FreeError> {
    let mut done: Vec<(usize, Dense)> = Vec::new();
    for &col in columns {
        let best = rows
            .iter()
            .enumerate()
            .max_by(|a, b| a.1[col].abs().total_cmp(&b.1[col].abs()))
            .map(|(i, r)| (i, r[col].abs()));
        let Some((at, size)) = best else { break };
        if size <= PIVOT_REJECT {
            continue;
        }
        if size <= PIVOT_ACCEPT {
            return Err(FreeError::Indeterminate { degree, pivot: size });
        }
        let mut pivot = rows.swap_remove(at);
        let scale = pivot[col];
        pivot.iter_mut().for_each(|x| *x /= scale);
        for r in rows.iter_mut().chain(done.iter_mut().map(|(_, r)| r)) {
            let f = r[col];
            if f != 0.0 {
                r.iter_mut().zip(&pivot).for_each(|(x, p)| *x -= f * p);
            }
        }
        done.push((col, pivot));
    }
    Ok(done)
}

/// Expansion of every magma word in Hall words, and independent relation counts.
struct Quotient {
    /// `[magma index] -> [(hall index, coefficient)]`
    expansion: Vec<Vec<(usize, f64)>>,
    relations: Vec<usize>,
    /// Reduced relations as dense magma vectors, for verification.
    rows: Vec<Dense>,
}

fn quotient(magma: &WordTable, hall_to_magma: &[usize], d: usize) -> Result<Quotient, FreeError> {
    let m = magma.len();
    let mut magma_to_hall = vec![None; m];
    for (h, &w) in hall_to_magma.iter().enumerate() {
        magma_to_hall[w] = Some(h);
    }
    let mut ideal: Vec<Vec<Dense>> = vec![Vec::new(); d + 1];
    let mut expansion: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    let mut relations = vec![0; d];
    let mut all_rows = Vec::new();
    for k in 1..=d {
        let of_degree: Vec<usize> = (0..m).filter(|&w| magma.degrees[w] == k).collect();
        let mut rows = Vec::new();
        for x in 0..m {
            for y in 0..x {
                for z in 0..y {
                    if magma.degrees[x] + magma.degrees[y] + magma.degrees[z] != k {
                        continue;
                    }
                    let (ex, ey, ez) = (unit(m, x), unit(m, y), unit(m, z));
                    let mut jac = magma_bracket(magma, &ex, &magma_bracket(magma, &ey, &ez));
                    let t2 = magma_bracket(magma, &ey, &magma_bracket(magma, &ez, &ex));
                    let t3 = magma_bracket(magma, &ez, &magma_bracket(magma, &ex, &ey));
                    jac.iter_mut().zip(t2.iter().zip(&t3)).for_each(|(a, (b, c))| *a += b + c);
                    rows.push(jac);
                }
            }
        }
        for w in 0..m {
            let low = k.saturating_sub(magma.degrees[w]);
            if low == 0 {
                continue;
            }
            for r in &ideal[low] {
                rows.push(magma_bracket(magma, &unit(m, w), r));
            }
        }
        rows.retain(|r| r.iter().any(|x| x.abs() > PIVOT_REJECT));
        // eliminate non-Hall words first so that Hall words remain as representatives
        let mut columns: Vec<usize> = of_degree.iter().copied().filter(|w| magma_to_hall[*w].is_none()).collect();
        columns.extend(of_degree.iter().copied().filter(|w| magma_to_hall[*w].is_some()));
        let reduced = reduce(rows, &columns, k)?;
        relations[k - 1] = reduced.len();
        let pivots: Vec<usize> = reduced.iter().map(|(c, _)| *c).collect();
        if pivots.iter().any(|c| magma_to_hall[*c].is_some())
            || of_degree.iter().any(|w| magma_to_hall[*w].is_none() && !pivots.contains(w))
        {
            return Err(FreeError::Basis(k));
        }
        for &w in &of_degree {
            expansion[w] = match magma_to_hall[w] {
                Some(h) => vec![(h, 1.0)],
                None => {
                    let (_, row) = reduced.iter().find(|(c, _)| *c == w).expect("pivot row");
                    row.iter()
                        .enumerate()
                        .filter(|&(c, x)| c != w && *x != 0.0)
                        .map(|(c, x)| (magma_to_hall[c].expect("free column is a Hall word"), -x))
                        .collect()
                }
            };
        }
        let dense: Vec<Dense> = reduced.into_iter().map(|(_, r)| r).collect();
        all_rows.extend(dense.iter().cloned());
        ideal[k] = dense;
    }
    Ok(Quotient { expansion, relations, rows: all_rows })
}

/// Builds the degree-`d` truncation of the free (almost) Lie algebroid
/// generated by the frame of `spec`. Structure functions of `spec` are ignored.
pub fn free_extend(
    spec: &AlgebroidSpec,
    d: usize,
    mode: FreeMode,
    options: &FreeOptions,
) -> Result<FreeTruncation, FreeError> {
    let r = spec.rank;
    if r == 0 || !(1..=MAX_DEGREE).contains(&d) {
        return Err(FreeError::Degree(format!("degree {d} outside 1..={MAX_DEGREE}")));
    }
    let n = spec.dim();
    let magma = WordTable::magma(r, d);
    let magma_anchor = {
        let mut out: Vec<Vec<Expr>> = spec.anchor.clone();
        for w in r..magma.len() {
            let (u, v) = magma.parts[w].expect("compound word");
            out.push(vector_commutator(&out[u], &out[v]));
        }
        out
    };

    let (table, brackets_of, relations) = match mode {
        FreeMode::Almost => {
            let table = magma.clone();
            let br: Vec<Vec<Vec<(usize, f64)>>> = (0..table.len())
                .map(|u| {
                    (0..table.len())
                        .map(|v| table.bracket(u, v).map(|(s, w)| vec![(w, s)]).unwrap_or_default())
                        .collect()
                })
                .collect();
            (table, br, vec![0; d])
        }
        FreeMode::Quotient => {
            let hall = WordTable::hall(r, d);
            let mut to_magma: Vec<usize> = (0..r).collect();
            for h in r..hall.len() {
                let (u, v) = hall.parts[h].expect("compound word");
                to_magma.push(magma.index_of(to_magma[u], to_magma[v]).expect("Hall word is a magma word"));
            }
            let q = quotient(&magma, &to_magma, d)?;
            verify_relations(spec, &magma_anchor, &q.rows, options)?;
            let br: Vec<Vec<Vec<(usize, f64)>>> = (0..hall.len())
                .map(|u| {
                    (0..hall.len())
                        .map(|v| match magma.bracket(to_magma[u], to_magma[v]) {
                            None => Vec::new(),
                            Some((s, w)) => q.expansion[w].iter().map(|&(h, x)| (h, s * x)).collect(),
                        })
                        .collect()
                })
                .collect();
            (hall, br, q.relations)
        }
    };

    let len = table.len();
    let mut anchor_ext: Vec<Vec<Expr>> = spec.anchor.clone();
    for w in r..len {
        let (u, v) = table.parts[w].expect("compound word");
        anchor_ext.push(vector_commutator(&anchor_ext[u], &anchor_ext[v]));
    }

    let zero_form = || vec![Expr::zero(); n];
    let mut conn: Vec<Vec<Vec<Expr>>> = vec![vec![zero_form(); len]; len];
    for a in 0..r {
        for b in 0..r {
            conn[a][b] = spec.connection[a][b].clone();
        }
    }
    for w in r..len {
        let (u, v) = table.parts[w].expect("compound word");
        for c in 0..len {
            if table.degrees[c] > table.degrees[w] {
                continue;
            }
            // omega^c_w = L_{rho_u} omega^c_v - L_{rho_v} omega^c_u
            //   + sum_b (omega^b_v C^c_{ub} - omega^b_u C^c_{vb})
            //   - sum_b omega^b_u (rho_b . omega^c_v) + sum_b omega^b_v (rho_b . omega^c_u)
            let mut form: Vec<Expr> = lie_one_form(&anchor_ext[u], &conn[v][c])
                .into_iter()
                .zip(lie_one_form(&anchor_ext[v], &conn[u][c]))
                .map(|(x, y)| sub(x, y))
                .collect();
            for b in 0..len {
                let cub = coefficient(&brackets_of[u][b], c);
                let cvb = coefficient(&brackets_of[v][b], c);
                let tv = pairing(&conn[v][c], &anchor_ext[b]);
                let tu = pairing(&conn[u][c], &anchor_ext[b]);
                for (i, slot) in form.iter_mut().enumerate() {
                    let mut acc = slot.clone();
                    if cub != 0.0 {
                        acc = add(acc, mul(Expr::Num(cub), conn[v][b][i].clone()));
                    }
                    if cvb != 0.0 {
                        acc = sub(acc, mul(Expr::Num(cvb), conn[u][b][i].clone()));
                    }
                    acc = sub(acc, mul(conn[u][b][i].clone(), tv.clone()));
                    acc = add(acc, mul(conn[v][b][i].clone(), tu.clone()));
                    *slot = acc;
                }
            }
            conn[w][c] = form;
        }
    }

    let mut structure = StructureFunctions::zero(len);
    for u in 0..len {
        for v in u + 1..len {
            for &(c, x) in &brackets_of[u][v] {
                structure.set(u, v, c, Expr::Num(x));
            }
        }
    }
    let extended = AlgebroidSpec {
        chart: spec.chart.clone(),
        rank: len,
        mode: match mode {
            FreeMode::Almost => Mode::Anchored,
            FreeMode::Quotient => Mode::Lie,
        },
        anchor: anchor_ext.clone(),
        structure,
        connection: conn.clone(),
        metric: spec.metric.clone(),
        two_form: None,
        psi: None,
        symplectic: None,
        poisson: None,
    };
    Ok(FreeTruncation {
        base: spec.clone(),
        degree: d,
        mode,
        basis: (0..len).map(|w| table.word(w)).collect(),
        degrees: table.degrees.clone(),
        parts: table.parts.clone(),
        brackets: brackets_of,
        anchor_ext,
        conn_ext: conn,
        relations,
        extended,
    })
}

fn coefficient(expansion: &[(usize, f64)], c: usize) -> f64 {
    expansion.iter().find(|(w, _)| *w == c).map_or(0.0, |(_, x)| *x)
}

/// Every relation must be annihilated by the anchor at the reference point
/// and at the auxiliary points; a failure anywhere means the relations are
/// not those of a locally free module over the chart.
fn verify_relations(
    spec: &AlgebroidSpec,
    anchors: &[Vec<Expr>],
    rows: &[Dense],
    options: &FreeOptions,
) -> Result<(), FreeError> {
    if rows.is_empty() {
        return Ok(());
    }
    let center: Vec<f64> = spec.chart.domain.iter().map(|[lo, hi]| 0.5 * (lo + hi)).collect();
    let mut points = vec![options.reference.clone().unwrap_or(center)];
    points.extend(sample_points(&spec.chart, options.aux_points, options.seed));
    for p in &points {
        let values: Vec<Vec<f64>> = anchors
            .iter()
            .map(|v| v.iter().map(|e| eval_value(e, p)).collect::<Result<Vec<f64>, _>>())
            .collect::<Result<_, _>>()?;
        for row in rows {
            for i in 0..spec.dim() {
                let (mut total, mut scale) = (0.0, 1.0f64);
                for (w, &c) in row.iter().enumerate() {
                    if c != 0.0 {
                        total += c * values[w][i];
                        scale = scale.max((c * values[w][i]).abs());
                    }
                }
                if total.abs() > PIVOT_ACCEPT * scale {
                    return Err(FreeError::NonLocallyFree { point: p.clone(), residual: total.abs() });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn pivot_decision_has_three_bands() {
        let clear = reduce(vec![vec![0.5, 1.0]], &[0], 2).unwrap();
        assert_eq!(clear.len(), 1);
        let negligible = reduce(vec![vec![1e-13, 1.0]], &[0], 2).unwrap();
        assert!(negligible.is_empty());
        let err = reduce(vec![vec![1e-10, 1.0]], &[0], 3).unwrap_err();
        assert_eq!(err, FreeError::Indeterminate { degree: 3, pivot: 1e-10 });
        assert!(err.to_string().contains("degree 3"), "{err}");
    }

    #[test]
    fn broken_relation_is_located() {
        let spec = fixtures::load(fixtures::FX_FOLIATION_FLAT);
        let x = vec![Expr::Var(0), Expr::zero()];
        let y = vec![Expr::Var(1), Expr::zero()];
        // x d_x - y d_x vanishes at the chart center but not elsewhere
        let rows = vec![vec![1.0, -1.0]];
        let quiet = FreeOptions { aux_points: 0, ..FreeOptions::default() };
        assert!(verify_relations(&spec, &[x.clone(), y.clone()], &rows, &quiet).is_ok());
        let err = verify_relations(&spec, &[x.clone(), y.clone()], &rows, &FreeOptions::default()).unwrap_err();
        let FreeError::NonLocallyFree { point, residual } = &err else { panic!("{err:?}") };
        assert!((point[0] - point[1]).abs() == *residual && *residual > 0.0);
        assert!(err.to_string().starts_with("non-locally-free locus detected at"));
        let off = FreeOptions { reference: Some(vec![0.5, 0.25]), aux_points: 0, ..FreeOptions::default() };
        let err = verify_relations(&spec, &[x, y], &rows, &off).unwrap_err();
        assert_eq!(err, FreeError::NonLocallyFree { point: vec![0.5, 0.25], residual: 0.25 });
    }

    #[test]
    fn genuine_jacobi_relations_pass_verification() {
        let spec = fixtures::load(fixtures::FX_FREE_JACOBI_R3);
        let free = free_extend(&spec, 3, FreeMode::Quotient, &FreeOptions::default()).unwrap();
        assert_eq!(free.relations, vec![0, 0, 1]);
    }
}
