//! Truncated multivariate Taylor data.
//!
//! A [`Jet`] stores the value of a scalar function at a point together with
//! all of its partial derivatives up to a fixed order `k <= 3`. Derivatives
//! are stored densely (full `n^m` arrays for order `m`), so the symmetric
//! slots are duplicated; this keeps indexing trivial and the closure of the
//! arithmetic under the chain rule easy to read.

use std::ops::{Add, Mul, Neg, Sub};

/// Highest derivative order a jet may carry.
pub const MAX_ORDER: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    dim: usize,
    order: usize,
    data: Vec<f64>,
}

fn len_for(dim: usize, order: usize) -> usize {
    let mut len = 1;
    let mut block = 1;
    for _ in 0..order {
        block *= dim;
        len += block;
    }
    len
}

impl Jet {
    pub fn constant(dim: usize, order: usize, value: f64) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        let mut data = vec![0.0; len_for(dim, order)];
        data[0] = value;
        Jet { dim, order, data }
    }

    /// The coordinate function `x^i` evaluated at `value`.
    pub fn variable(dim: usize, order: usize, index: usize, value: f64) -> Self {
        let mut jet = Self::constant(dim, order, value);
        if order >= 1 {
            jet.data[1 + index] = 1.0;
        }
        jet
    }

    pub fn zero(dim: usize, order: usize) -> Self {
        Self::constant(dim, order, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.data[0]
    }

    fn off1(&self) -> usize {
        1
    }

    fn off2(&self) -> usize {
        1 + self.dim
    }

    fn off3(&self) -> usize {
        1 + self.dim + self.dim * self.dim
    }

    /// First partial `d_i`. Panics if the jet has order 0.
    pub fn d1(&self, i: usize) -> f64 {
        assert!(self.order >= 1);
        self.data[self.off1() + i]
    }

    pub fn d2(&self, i: usize, j: usize) -> f64 {
        assert!(self.order >= 2);
        self.data[self.off2() + i * self.dim + j]
    }

    pub fn d3(&self, i: usize, j: usize, k: usize) -> f64 {
        assert!(self.order >= 3);
        self.data[self.off3() + (i * self.dim + j) * self.dim + k]
    }

    pub fn gradient(&self) -> &[f64] {
        if self.order == 0 {
            return &[];
        }
        &self.data[1..1 + self.dim]
    }

    /// Dense Hessian (row-major), empty below order 2.
    pub fn hessian(&self) -> &[f64] {
        if self.order < 2 {
            return &[];
        }
        &self.data[self.off2()..self.off3()]
    }

    pub fn third(&self) -> &[f64] {
        if self.order < 3 {
            return &[];
        }
        &self.data[self.off3()..]
    }

    /// Drops all slots above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        Jet { dim: self.dim, order, data: self.data[..len_for(self.dim, order)].to_vec() }
    }

    /// The jet of `d_i f`, one order lower.
    pub fn partial(&self, i: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let n = self.dim;
        let order = self.order - 1;
        let mut out = Jet::zero(n, order);
        out.data[0] = self.d1(i);
        if order >= 1 {
            for j in 0..n {
                out.data[1 + j] = self.d2(i, j);
            }
        }
        if order >= 2 {
            let o2 = out.off2();
            for j in 0..n {
                for k in 0..n {
                    out.data[o2 + j * n + k] = self.d3(i, j, k);
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { dim: self.dim, order: self.order, data: self.data.iter().map(|v| v * s).collect() }
    }

    fn common_order(&self, other: &Jet) -> usize {
        assert_eq!(self.dim, other.dim, "jets over charts of different dimension");
        self.order.min(other.order)
    }

    /// Applies a univariate function given its derivatives `[phi, phi', phi'', phi''']`
    /// at the value of `self` (Faa di Bruno up to third order).
    pub fn compose(&self, phi: [f64; 4]) -> Jet {
        let n = self.dim;
        let mut out = Jet::zero(n, self.order);
        out.data[0] = phi[0];
        if self.order >= 1 {
            for i in 0..n {
                out.data[1 + i] = phi[1] * self.d1(i);
            }
        }
        if self.order >= 2 {
            let o2 = out.off2();
            for i in 0..n {
                for j in 0..n {
                    out.data[o2 + i * n + j] = phi[2] * self.d1(i) * self.d1(j) + phi[1] * self.d2(i, j);
                }
            }
        }
        if self.order >= 3 {
            let o3 = out.off3();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let (fi, fj, fk) = (self.d1(i), self.d1(j), self.d1(k));
                        out.data[o3 + (i * n + j) * n + k] = phi[3] * fi * fj * fk
                            + phi[2] * (self.d2(i, j) * fk + self.d2(i, k) * fj + self.d2(j, k) * fi)
                            + phi[1] * self.d3(i, j, k);
                    }
                }
            }
        }
        out
    }

    /// `1 / self`; the caller guarantees a nonzero value.
    pub fn recip(&self) -> Jet {
        let t = self.value();
        let r = 1.0 / t;
        self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    /// `self^n` by binary exponentiation over jet products.
    pub fn powi(&self, n: u32) -> Jet {
        let mut result = Jet::constant(self.dim, self.order, 1.0);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Largest absolute difference over the slots both jets carry.
    pub fn max_abs_diff(&self, other: &Jet) -> f64 {
        let order = self.common_order(other);
        let len = len_for(self.dim, order);
        self.data[..len].iter().zip(&other.data[..len]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let order = self.common_order(rhs);
        let len = len_for(self.dim, order);
        Jet { dim: self.dim, order, data: self.data[..len].iter().zip(&rhs.data[..len]).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let order = self.common_order(rhs);
        let len = len_for(self.dim, order);
        Jet { dim: self.dim, order, data: self.data[..len].iter().zip(&rhs.data[..len]).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, g: &Jet) -> Jet {
        let f = self;
        let order = f.common_order(g);
        let n = f.dim;
        let mut out = Jet::zero(n, order);
        let (f0, g0) = (f.value(), g.value());
        out.data[0] = f0 * g0;
        if order >= 1 {
            for i in 0..n {
                out.data[1 + i] = f.d1(i) * g0 + f0 * g.d1(i);
            }
        }
        if order >= 2 {
            let o2 = out.off2();
            for i in 0..n {
                for j in 0..n {
                    out.data[o2 + i * n + j] =
                        f.d2(i, j) * g0 + f.d1(i) * g.d1(j) + f.d1(j) * g.d1(i) + f0 * g.d2(i, j);
                }
            }
        }
        if order >= 3 {
            let o3 = out.off3();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        out.data[o3 + (i * n + j) * n + k] = f.d3(i, j, k) * g0
                            + f.d2(i, j) * g.d1(k)
                            + f.d2(i, k) * g.d1(j)
                            + f.d2(j, k) * g.d1(i)
                            + f.d1(i) * g.d2(j, k)
                            + f.d1(j) * g.d2(i, k)
                            + f.d1(k) * g.d2(i, j)
                            + f0 * g.d3(i, j, k);
                    }
                }
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Sum of an iterator of jets; `zero` fixes dimension and order for empty input.
pub fn sum<I: IntoIterator<Item = Jet>>(zero: Jet, items: I) -> Jet {
    items.into_iter().fold(zero, |acc, j| &acc + &j)
}
