use crate::exprjet::{neg, Expr};

/// Whether the structure functions are part of the data being checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Anchored,
    Lie,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartSpec {
    pub coords: Vec<String>,
    /// Closed sampling interval per coordinate.
    pub domain: Vec<[f64; 2]>,
}

impl ChartSpec {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().zip(&self.domain).all(|(x, [lo, hi])| *x >= *lo && *x <= *hi)
    }
}

/// Symmetric `n x n` field of expressions; only `i <= j` is stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricField {
    n: usize,
    upper: Vec<Expr>,
}

impl SymmetricField {
    pub fn from_upper(n: usize, mut entry: impl FnMut(usize, usize) -> Expr) -> Self {
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                upper.push(entry(i, j));
            }
        }
        SymmetricField { n, upper }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        &self.upper[i * self.n - i * (i + 1) / 2 + j]
    }
}

/// Antisymmetric `n x n` field; only `i < j` is stored and the diagonal is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct AntisymmetricField {
    n: usize,
    upper: Vec<Expr>,
}

impl AntisymmetricField {
    pub fn from_upper(n: usize, mut entry: impl FnMut(usize, usize) -> Expr) -> Self {
        let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                upper.push(entry(i, j));
            }
        }
        AntisymmetricField { n, upper }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        // row i holds n - i - 1 entries
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    /// The stored entry for `i < j`, with the sign needed to read `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> Option<(f64, &Expr)> {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Less => Some((1.0, &self.upper[self.slot(i, j)])),
            std::cmp::Ordering::Greater => Some((-1.0, &self.upper[self.slot(j, i)])),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Expr {
        match self.entry(i, j) {
            None => Expr::zero(),
            Some((s, e)) if s > 0.0 => e.clone(),
            Some((_, e)) => neg(e.clone()),
        }
    }
}

/// Structure functions `C^c_{ab}` of the frame bracket, stored for `a < b`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureFunctions {
    r: usize,
    // index (a * r + b) * r + c, populated for a < b only
    table: Vec<Expr>,
}

impl StructureFunctions {
    pub fn zero(r: usize) -> Self {
        StructureFunctions { r, table: vec![Expr::zero(); r * r * r] }
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    /// Sets `C^c_{ab}` (and implicitly `C^c_{ba} = -C^c_{ab}`); `a != b`.
    pub fn set(&mut self, a: usize, b: usize, c: usize, e: Expr) {
        assert_ne!(a, b, "structure functions vanish on the diagonal");
        let r = self.r;
        if a < b {
            self.table[(a * r + b) * r + c] = e;
        } else {
            self.table[(b * r + a) * r + c] = neg(e);
        }
    }

    pub fn entry(&self, a: usize, b: usize, c: usize) -> Option<(f64, &Expr)> {
        let r = self.r;
        match a.cmp(&b) {
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Less => Some((1.0, &self.table[(a * r + b) * r + c])),
            std::cmp::Ordering::Greater => Some((-1.0, &self.table[(b * r + a) * r + c])),
        }
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> Expr {
        match self.entry(a, b, c) {
            None => Expr::zero(),
            Some((s, e)) if s > 0.0 => e.clone(),
            Some((_, e)) => neg(e.clone()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(Expr::is_zero)
    }
}

/// An anchored bundle or Lie algebroid in a local frame over one chart,
/// together with a connection and optional geometric structures on the base.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebroidSpec {
    pub chart: ChartSpec,
    pub rank: usize,
    pub mode: Mode,
    /// `anchor[a][i] = rho_a^i`.
    pub anchor: Vec<Vec<Expr>>,
    pub structure: StructureFunctions,
    /// `connection[a][b][i] = omega^b_{a,i}`, meaning `nabla e_a = omega_a^b e_b`.
    pub connection: Vec<Vec<Vec<Expr>>>,
    pub metric: Option<SymmetricField>,
    pub two_form: Option<AntisymmetricField>,
    /// Same index layout as `connection`.
    pub psi: Option<Vec<Vec<Vec<Expr>>>>,
    pub symplectic: Option<AntisymmetricField>,
    pub poisson: Option<AntisymmetricField>,
}

impl AlgebroidSpec {
    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// Relabels the frame: new index `k` is old index `perm[k]`.
    pub fn permute_frame(&self, perm: &[usize]) -> AlgebroidSpec {
        let r = self.rank;
        assert_eq!(perm.len(), r);
        let mut structure = StructureFunctions::zero(r);
        for a in 0..r {
            for b in a + 1..r {
                for c in 0..r {
                    structure.set(a, b, c, self.structure.get(perm[a], perm[b], perm[c]));
                }
            }
        }
        let block = |src: &Vec<Vec<Vec<Expr>>>| {
            (0..r).map(|a| (0..r).map(|b| src[perm[a]][perm[b]].clone()).collect()).collect::<Vec<Vec<Vec<Expr>>>>()
        };
        AlgebroidSpec {
            chart: self.chart.clone(),
            rank: r,
            mode: self.mode,
            anchor: perm.iter().map(|&p| self.anchor[p].clone()).collect(),
            structure,
            connection: block(&self.connection),
            metric: self.metric.clone(),
            two_form: self.two_form.clone(),
            psi: self.psi.as_ref().map(block),
            symplectic: self.symplectic.clone(),
            poisson: self.poisson.clone(),
        }
    }

    /// The same spec with connection `omega + psi`.
    pub fn with_shifted_connection(&self, psi: &[Vec<Vec<Expr>>]) -> AlgebroidSpec {
        let mut out = self.clone();
        for (a, row) in out.connection.iter_mut().enumerate() {
            for (b, form) in row.iter_mut().enumerate() {
                for (i, e) in form.iter_mut().enumerate() {
                    *e = crate::exprjet::add(e.clone(), psi[a][b][i].clone());
                }
            }
        }
        out
    }
}
