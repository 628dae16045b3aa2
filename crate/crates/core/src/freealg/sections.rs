//! Pointwise calculus on sections with jet coefficients, used to evaluate the
//! bracket extension formula for arbitrary sections.

use crate::exprjet::Jet;
use crate::model::PointJets;

/// Coefficients of a section in the frame, `s = s^a e_a`.
pub type Section = Vec<Jet>;

/// `rho(s)^i = s^a rho_a^i`.
pub fn anchor_of(j: &PointJets, s: &[Jet]) -> Vec<Jet> {
    (0..j.dim).map(|i| s.iter().enumerate().fold(j.zero(), |acc, (a, c)| acc + c * &j.anchor[a][i])).collect()
}

/// `X(f) = X^k d_k f`.
pub fn apply(x: &[Jet], f: &Jet) -> Jet {
    x.iter().enumerate().fold(f.partial(0).scale(0.0), |acc, (k, xk)| acc + xk * &f.partial(k))
}

/// `nabla_i s` for every coordinate direction, `[i][c]`.
pub fn covariant(j: &PointJets, s: &[Jet]) -> Vec<Section> {
    let r = s.len();
    (0..j.dim)
        .map(|i| {
            (0..r)
                .map(|c| {
                    let mut acc = s[c].partial(i);
                    for (a, sa) in s.iter().enumerate() {
                        acc = acc + sa * &j.connection[a][c][i];
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// `[s, t] = s^a t^b C^c_{ab} e_c + rho(s)(t^b) e_b - rho(t)(s^a) e_a`.
pub fn bracket(j: &PointJets, s: &[Jet], t: &[Jet]) -> Section {
    let r = s.len();
    let (rs, rt) = (anchor_of(j, s), anchor_of(j, t));
    (0..r)
        .map(|c| {
            let mut acc = apply(&rs, &t[c]) - apply(&rt, &s[c]);
            for a in 0..r {
                for b in 0..r {
                    acc = acc + &(&s[a] * &t[b]) * &j.structure[a][b][c];
                }
            }
            acc
        })
        .collect()
}

fn axpy(acc: &mut Section, f: &Jet, x: &[Jet]) {
    for (a, xa) in acc.iter_mut().zip(x) {
        *a = &*a + &(f * xa);
    }
}

/// `(L_s(nabla t))_j = d_j rho(s)^i nabla_i t + [s, nabla_j t]`.
fn lie_of_covariant(j: &PointJets, s: &[Jet], nt: &[Section]) -> Vec<Section> {
    let rs = anchor_of(j, s);
    (0..j.dim)
        .map(|jj| {
            let mut out = bracket(j, s, &nt[jj]);
            for (i, ni) in nt.iter().enumerate() {
                axpy(&mut out, &rs[i].partial(jj), ni);
            }
            out
        })
        .collect()
}

/// Right-hand side of the connection extension on brackets,
/// `L_s(nabla t) - L_t(nabla s) - nabla_{rho(nabla s)} t + nabla_{rho(nabla t)} s`,
/// as components `[j][c]`. Loses two derivative orders.
pub fn bracket_extension(j: &PointJets, s: &[Jet], t: &[Jet]) -> Vec<Section> {
    let (ns, nt) = (covariant(j, s), covariant(j, t));
    let ls = lie_of_covariant(j, s, &nt);
    let lt = lie_of_covariant(j, t, &ns);
    (0..j.dim)
        .map(|jj| {
            let mut out: Section = ls[jj].iter().zip(&lt[jj]).map(|(a, b)| a - b).collect();
            let (ras, rat) = (anchor_of(j, &ns[jj]), anchor_of(j, &nt[jj]));
            for k in 0..j.dim {
                axpy(&mut out, &-&ras[k], &nt[k]);
                axpy(&mut out, &rat[k], &ns[k]);
            }
            out
        })
        .collect()
}

/// The basis section `e_a` as constant jets.
pub fn basis(j: &PointJets, a: usize) -> Section {
    let r = j.rank;
    (0..r).map(|c| if c == a { Jet::constant(j.dim, j.order, 1.0) } else { j.zero() }).collect()
}
