use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use super::sampling::sample_points;
use super::spec::{AlgebroidSpec, AntisymmetricField, ChartSpec, Mode, StructureFunctions, SymmetricField};
use crate::exprjet::{eval_value, parse_expr, Expr, ParseError};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Schema(String),
    #[error("in `{path}`: {source}")]
    Expr {
        path: String,
        #[source]
        source: ParseError,
    },
}

fn schema<T>(msg: impl Into<String>) -> Result<T, SpecError> {
    Err(SpecError::Schema(msg.into()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChart {
    coords: Vec<String>,
    domain: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStructure {
    a: usize,
    b: usize,
    c: usize,
    expr: String,
}

type Matrix = Vec<Vec<String>>;
type Block = Vec<Vec<Vec<String>>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(default)]
    #[allow(dead_code)]
    description: Option<String>,
    chart: RawChart,
    rank: usize,
    mode: Mode,
    anchor: Matrix,
    #[serde(default)]
    structure: Vec<RawStructure>,
    connection: Block,
    metric: Option<Matrix>,
    two_form: Option<Matrix>,
    psi: Option<Block>,
    symplectic: Option<Matrix>,
    poisson: Option<Matrix>,
}

struct Ctx<'a> {
    coords: &'a [String],
    chart: &'a ChartSpec,
}

impl Ctx<'_> {
    fn expr(&self, path: String, text: &str) -> Result<Expr, SpecError> {
        parse_expr(text, self.coords).map_err(|source| SpecError::Expr { path, source })
    }

    fn matrix(&self, field: &str, m: &Matrix) -> Result<Vec<Vec<Expr>>, SpecError> {
        let n = self.coords.len();
        if m.len() != n || m.iter().any(|row| row.len() != n) {
            return schema(format!("{field} must be a {n}x{n} array"));
        }
        m.iter()
            .enumerate()
            .map(|(i, row)| row.iter().enumerate().map(|(j, t)| self.expr(format!("{field}[{i}][{j}]"), t)).collect())
            .collect()
    }

    fn block(&self, field: &str, r: usize, b: &Block) -> Result<Vec<Vec<Vec<Expr>>>, SpecError> {
        let n = self.coords.len();
        if b.len() != r || b.iter().any(|row| row.len() != r || row.iter().any(|f| f.len() != n)) {
            return schema(format!("{field} must be an {r}x{r}x{n} array"));
        }
        b.iter()
            .enumerate()
            .map(|(a, row)| {
                row.iter()
                    .enumerate()
                    .map(|(c, form)| {
                        form.iter().enumerate().map(|(i, t)| self.expr(format!("{field}[{a}][{c}][{i}]"), t)).collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// Whether two parsed entries denote the same function, first
    /// structurally and then by value at a handful of chart points.
    fn same_function(&self, a: &Expr, b: &Expr) -> bool {
        if canonical(a) == canonical(b) {
            return true;
        }
        sample_points(self.chart, 16, 0x5eed).iter().all(|p| match (eval_value(a, p), eval_value(b, p)) {
            (Ok(x), Ok(y)) => (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs())),
            _ => false,
        })
    }

    fn symmetric(&self, field: &str, m: &Matrix) -> Result<SymmetricField, SpecError> {
        let full = self.matrix(field, m)?;
        let n = full.len();
        for i in 0..n {
            for j in i + 1..n {
                if !self.same_function(&full[i][j], &full[j][i]) {
                    return schema(format!(
                        "{field} not symmetric: entries ({}, {}) and ({}, {}) differ",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    ));
                }
            }
        }
        Ok(SymmetricField::from_upper(n, |i, j| full[i][j].clone()))
    }

    fn antisymmetric(&self, field: &str, m: &Matrix) -> Result<AntisymmetricField, SpecError> {
        let full = self.matrix(field, m)?;
        let n = full.len();
        for i in 0..n {
            if !self.same_function(&full[i][i], &Expr::zero()) {
                return schema(format!("{field} not antisymmetric: diagonal entry {} is nonzero", i + 1));
            }
            for j in i + 1..n {
                let mirrored = crate::exprjet::neg(full[j][i].clone());
                if !self.same_function(&full[i][j], &mirrored) {
                    return schema(format!(
                        "{field} not antisymmetric: entries ({}, {}) and ({}, {})",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    ));
                }
            }
        }
        Ok(AntisymmetricField::from_upper(n, |i, j| full[i][j].clone()))
    }
}

/// Folds literal signs so that `-1` and `Num(-1)` compare equal.
fn canonical(e: &Expr) -> Expr {
    let b = |x: &Expr| Box::new(canonical(x));
    match e {
        Expr::Neg(inner) => match canonical(inner) {
            Expr::Num(v) => Expr::Num(-v),
            Expr::Neg(x) => *x,
            other => Expr::Neg(Box::new(other)),
        },
        Expr::Num(v) => Expr::Num(*v),
        Expr::Var(i) => Expr::Var(*i),
        Expr::Add(x, y) => Expr::Add(b(x), b(y)),
        Expr::Sub(x, y) => Expr::Sub(b(x), b(y)),
        Expr::Mul(x, y) => Expr::Mul(b(x), b(y)),
        Expr::Div(x, y) => Expr::Div(b(x), b(y)),
        Expr::Pow(x, y) => Expr::Pow(b(x), b(y)),
        Expr::Call(f, x) => Expr::Call(*f, b(x)),
    }
}

fn build(raw: RawSpec) -> Result<AlgebroidSpec, SpecError> {
    let RawChart { coords, domain } = raw.chart;
    if coords.is_empty() {
        return schema("chart.coords must not be empty");
    }
    for (k, c) in coords.iter().enumerate() {
        if coords[..k].contains(c) {
            return schema(format!("duplicate coordinate `{c}`"));
        }
        if crate::exprjet::Func::from_name(c).is_some() {
            return schema(format!("coordinate `{c}` shadows a function name"));
        }
        let valid = c.chars().next().is_some_and(|h| h.is_ascii_alphabetic() || h == '_')
            && c.chars().all(|h| h.is_ascii_alphanumeric() || h == '_');
        if !valid {
            return schema(format!("coordinate `{c}` is not an identifier"));
        }
    }
    if domain.len() != coords.len() {
        return schema(format!("chart.domain has {} intervals for {} coordinates", domain.len(), coords.len()));
    }
    if let Some((k, _)) =
        domain.iter().enumerate().find(|(_, [lo, hi])| lo.partial_cmp(hi) != Some(std::cmp::Ordering::Less))
    {
        return schema(format!("chart.domain[{k}] must satisfy lower < upper"));
    }
    let chart = ChartSpec { coords, domain };
    let n = chart.dim();
    let r = raw.rank;
    if r == 0 {
        return schema("rank must be at least 1");
    }
    let ctx = Ctx { coords: &chart.coords, chart: &chart };

    if raw.anchor.len() != r || raw.anchor.iter().any(|row| row.len() != n) {
        return schema(format!("anchor must be an {r}x{n} array"));
    }
    let anchor = raw
        .anchor
        .iter()
        .enumerate()
        .map(|(a, row)| row.iter().enumerate().map(|(i, t)| ctx.expr(format!("anchor[{a}][{i}]"), t)).collect())
        .collect::<Result<Vec<Vec<Expr>>, _>>()?;

    let mut structure = StructureFunctions::zero(r);
    let mut seen = std::collections::BTreeSet::new();
    for (k, s) in raw.structure.iter().enumerate() {
        if !(1 <= s.a && s.a < s.b && s.b <= r && 1 <= s.c && s.c <= r) {
            return schema(format!("structure[{k}]: indices must satisfy 1 <= a < b <= {r} and 1 <= c <= {r}"));
        }
        if !seen.insert((s.a, s.b, s.c)) {
            return schema(format!("structure[{k}]: duplicate entry ({}, {}, {})", s.a, s.b, s.c));
        }
        let e = ctx.expr(format!("structure[{k}].expr"), &s.expr)?;
        structure.set(s.a - 1, s.b - 1, s.c - 1, e);
    }

    let connection = ctx.block("connection", r, &raw.connection)?;
    let psi = raw.psi.as_ref().map(|b| ctx.block("psi", r, b)).transpose()?;
    let metric = raw.metric.as_ref().map(|m| ctx.symmetric("metric", m)).transpose()?;
    let two_form = raw.two_form.as_ref().map(|m| ctx.antisymmetric("two_form", m)).transpose()?;
    let symplectic = raw.symplectic.as_ref().map(|m| ctx.antisymmetric("symplectic", m)).transpose()?;
    let poisson = raw.poisson.as_ref().map(|m| ctx.antisymmetric("poisson", m)).transpose()?;

    Ok(AlgebroidSpec {
        chart,
        rank: r,
        mode: raw.mode,
        anchor,
        structure,
        connection,
        metric,
        two_form,
        psi,
        symplectic,
        poisson,
    })
}

/// Parses a spec document.
pub fn load_spec(document: &str) -> Result<AlgebroidSpec, SpecError> {
    let raw: RawSpec = serde_json::from_str(document)?;
    build(raw)
}

pub fn load_spec_file(path: &Path) -> Result<AlgebroidSpec, SpecError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| SpecError::Io { path: path.display().to_string(), source })?;
    load_spec(&text)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawPsi {
    Wrapped { psi: Block },
    Bare(Block),
}

/// Parses a standalone `psi` block (either `{"psi": [...]}` or the bare array)
/// against the chart and rank of `spec`.
pub fn load_psi(document: &str, spec: &AlgebroidSpec) -> Result<Vec<Vec<Vec<Expr>>>, SpecError> {
    let raw: RawPsi = serde_json::from_str(document)?;
    let block = match raw {
        RawPsi::Wrapped { psi } | RawPsi::Bare(psi) => psi,
    };
    let ctx = Ctx { coords: &spec.chart.coords, chart: &spec.chart };
    ctx.block("psi", spec.rank, &block)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "chart": {"coords": ["x", "y"], "domain": [[-2, 2], [-2, 2]]},
        "rank": 1, "mode": "lie",
        "anchor": [["-y", "x"]],
        "connection": [[["0", "0"]]],
        "metric": METRIC
    }"#;

    fn with_metric(m: &str) -> String {
        BASE.replace("METRIC", m)
    }

    #[test]
    fn loads_rotation() {
        let spec = load_spec(&with_metric(r#"[["1","0"],["0","1"]]"#)).unwrap();
        assert_eq!(spec.rank, 1);
        assert_eq!(spec.anchor[0][0], Expr::Neg(Box::new(Expr::Var(1))));
        assert!(spec.two_form.is_none());
    }

    #[test]
    fn asymmetric_metric_rejected() {
        let err = load_spec(&with_metric(r#"[["1","x"],["0","1"]]"#)).unwrap_err();
        assert!(err.to_string().contains("metric not symmetric"), "{err}");
    }

    #[test]
    fn numerically_symmetric_metric_accepted() {
        assert!(load_spec(&with_metric(r#"[["1","x*y"],["y*x","1"]]"#)).is_ok());
    }

    #[test]
    fn expression_errors_carry_path() {
        let err = load_spec(&with_metric(r#"[["1","z"],["z","1"]]"#)).unwrap_err();
        assert_eq!(err.to_string(), "in `metric[0][1]`: undeclared identifier `z` at byte 0");
    }

    #[test]
    fn shape_mismatch() {
        let err = load_spec(&with_metric(r#"[["1","0"]]"#)).unwrap_err();
        assert!(matches!(err, SpecError::Schema(_)));
    }
}
