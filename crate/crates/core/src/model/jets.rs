use super::spec::{AlgebroidSpec, AntisymmetricField, SymmetricField};
use crate::exprjet::{eval_jet, DomainError, Expr, Jet};

/// Every component of a spec evaluated as a jet at one point.
///
/// Antisymmetric blocks are expanded in full by exact negation, so
/// `structure[b][a][c] == -structure[a][b][c]` holds bitwise.
#[derive(Clone, Debug)]
pub struct PointJets {
    pub point: Vec<f64>,
    pub dim: usize,
    pub rank: usize,
    pub order: usize,
    /// `[a][i]`
    pub anchor: Vec<Vec<Jet>>,
    /// `[a][b][c]` for `C^c_{ab}`
    pub structure: Vec<Vec<Vec<Jet>>>,
    /// `[a][b][i]` for `omega^b_{a,i}`
    pub connection: Vec<Vec<Vec<Jet>>>,
    pub metric: Option<Vec<Vec<Jet>>>,
    pub two_form: Option<Vec<Vec<Jet>>>,
    pub psi: Option<Vec<Vec<Vec<Jet>>>>,
    pub symplectic: Option<Vec<Vec<Jet>>>,
    pub poisson: Option<Vec<Vec<Jet>>>,
}

fn block(b: &[Vec<Vec<Expr>>], p: &[f64], k: usize) -> Result<Vec<Vec<Vec<Jet>>>, DomainError> {
    b.iter().map(|row| row.iter().map(|form| form.iter().map(|e| eval_jet(e, p, k)).collect()).collect()).collect()
}

fn symmetric(m: &SymmetricField, p: &[f64], k: usize) -> Result<Vec<Vec<Jet>>, DomainError> {
    let n = m.dim();
    let mut out = vec![vec![Jet::zero(p.len(), k); n]; n];
    for i in 0..n {
        for j in i..n {
            let v = eval_jet(m.get(i, j), p, k)?;
            out[j][i] = v.clone();
            out[i][j] = v;
        }
    }
    Ok(out)
}

fn antisymmetric(m: &AntisymmetricField, p: &[f64], k: usize) -> Result<Vec<Vec<Jet>>, DomainError> {
    let n = m.dim();
    let mut out = vec![vec![Jet::zero(p.len(), k); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let (_, e) = m.entry(i, j).expect("off-diagonal entry");
            let v = eval_jet(e, p, k)?;
            out[j][i] = -&v;
            out[i][j] = v;
        }
    }
    Ok(out)
}

impl PointJets {
    pub fn new(spec: &AlgebroidSpec, p: &[f64], order: usize) -> Result<PointJets, DomainError> {
        let (n, r) = (spec.dim(), spec.rank);
        let anchor = spec
            .anchor
            .iter()
            .map(|row| row.iter().map(|e| eval_jet(e, p, order)).collect())
            .collect::<Result<Vec<Vec<Jet>>, _>>()?;
        let mut structure = vec![vec![vec![Jet::zero(n, order); r]; r]; r];
        for a in 0..r {
            for b in a + 1..r {
                for c in 0..r {
                    let (_, e) = spec.structure.entry(a, b, c).expect("a < b");
                    if e.is_zero() {
                        continue;
                    }
                    let v = eval_jet(e, p, order)?;
                    structure[b][a][c] = -&v;
                    structure[a][b][c] = v;
                }
            }
        }
        Ok(PointJets {
            point: p.to_vec(),
            dim: n,
            rank: r,
            order,
            anchor,
            structure,
            connection: block(&spec.connection, p, order)?,
            metric: spec.metric.as_ref().map(|m| symmetric(m, p, order)).transpose()?,
            two_form: spec.two_form.as_ref().map(|m| antisymmetric(m, p, order)).transpose()?,
            psi: spec.psi.as_ref().map(|b| block(b, p, order)).transpose()?,
            symplectic: spec.symplectic.as_ref().map(|m| antisymmetric(m, p, order)).transpose()?,
            poisson: spec.poisson.as_ref().map(|m| antisymmetric(m, p, order)).transpose()?,
        })
    }

    pub fn zero(&self) -> Jet {
        Jet::zero(self.dim, self.order)
    }

    /// `rho_a(f) = rho_a^i d_i f`, one order below the lower of the two jets.
    pub fn rho_apply(&self, a: usize, f: &Jet) -> Jet {
        let order = f.order().min(self.order).saturating_sub(1);
        (0..self.dim).fold(Jet::zero(self.dim, order), |acc, i| acc + &self.anchor[a][i] * &f.partial(i))
    }
}
