use std::fmt;

/// Elementary functions admitted by the expression grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Tanh,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

/// Scalar expression over the coordinates of a chart.
///
/// Coordinates are referenced by their position in the chart's coordinate
/// list; names are only needed for parsing and rendering.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Num(0.0)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    fn is_one(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 1.0)
    }

    /// Value of the expression when it contains no coordinate.
    pub fn constant_value(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            Expr::Var(_) => None,
            Expr::Neg(a) => a.constant_value().map(|v| -v),
            Expr::Add(a, b) => Some(a.constant_value()? + b.constant_value()?),
            Expr::Sub(a, b) => Some(a.constant_value()? - b.constant_value()?),
            Expr::Mul(a, b) => Some(a.constant_value()? * b.constant_value()?),
            Expr::Div(a, b) => Some(a.constant_value()? / b.constant_value()?),
            Expr::Pow(a, b) => Some(a.constant_value()?.powf(b.constant_value()?)),
            Expr::Call(f, a) => {
                let v = a.constant_value()?;
                Some(match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Tan => v.tan(),
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln(),
                    Func::Sqrt => v.sqrt(),
                    Func::Tanh => v.tanh(),
                    Func::Abs => v.abs(),
                })
            }
        }
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Call(_, a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, None) => x,
                    (None, y) => y,
                }
            }
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Call(_, a) => 1 + a.size(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }

    /// Symbolic partial derivative with respect to coordinate `var`.
    ///
    /// The result is built with the folding constructors below, so products
    /// with literal zeros and ones do not accumulate.
    pub fn diff(&self, var: usize) -> Expr {
        match self {
            Expr::Num(_) => Expr::zero(),
            Expr::Var(i) => Expr::Num(if *i == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.diff(var)),
            Expr::Add(a, b) => add(a.diff(var), b.diff(var)),
            Expr::Sub(a, b) => sub(a.diff(var), b.diff(var)),
            Expr::Mul(a, b) => add(mul(a.diff(var), (**b).clone()), mul((**a).clone(), b.diff(var))),
            Expr::Div(a, b) => {
                // (a'b - ab') / b^2
                let num = sub(mul(a.diff(var), (**b).clone()), mul((**a).clone(), b.diff(var)));
                if num.is_zero() {
                    return Expr::zero();
                }
                div(num, pow((**b).clone(), Expr::Num(2.0)))
            }
            Expr::Pow(a, b) => {
                let da = a.diff(var);
                let db = b.diff(var);
                if db.is_zero() {
                    // c * a^(c-1) * a'
                    if da.is_zero() {
                        return Expr::zero();
                    }
                    let lowered = match b.constant_value() {
                        Some(c) => pow((**a).clone(), Expr::Num(c - 1.0)),
                        None => pow((**a).clone(), sub((**b).clone(), Expr::Num(1.0))),
                    };
                    mul(mul((**b).clone(), lowered), da)
                } else {
                    // a^b * (b' ln a + b a'/a)
                    let inner = add(mul(db, call(Func::Ln, (**a).clone())), div(mul((**b).clone(), da), (**a).clone()));
                    mul(self.clone(), inner)
                }
            }
            Expr::Call(f, a) => {
                let da = a.diff(var);
                if da.is_zero() {
                    return Expr::zero();
                }
                let u = (**a).clone();
                let outer = match f {
                    Func::Sin => call(Func::Cos, u),
                    Func::Cos => neg(call(Func::Sin, u)),
                    Func::Tan => add(Expr::Num(1.0), pow(call(Func::Tan, u), Expr::Num(2.0))),
                    Func::Exp => call(Func::Exp, u),
                    Func::Ln => div(Expr::Num(1.0), u),
                    Func::Sqrt => div(Expr::Num(1.0), mul(Expr::Num(2.0), call(Func::Sqrt, u))),
                    Func::Tanh => sub(Expr::Num(1.0), pow(call(Func::Tanh, u), Expr::Num(2.0))),
                    Func::Abs => div(u.clone(), call(Func::Abs, u)),
                };
                mul(outer, da)
            }
        }
    }

    /// Renders the expression with the given coordinate names.
    pub fn display<'a>(&'a self, names: &'a [String]) -> Rendered<'a> {
        Rendered { expr: self, names }
    }

    pub fn render(&self, names: &[String]) -> String {
        self.display(names).to_string()
    }
}

// Folding constructors. They only remove literal identities; nothing is
// reordered or collected.

pub fn add(a: Expr, b: Expr) -> Expr {
    match (a.constant_value_literal(), b.constant_value_literal()) {
        (Some(x), Some(y)) => Expr::Num(x + y),
        (Some(0.0), _) => b,
        (_, Some(0.0)) => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    match (a.constant_value_literal(), b.constant_value_literal()) {
        (Some(x), Some(y)) => Expr::Num(x - y),
        (Some(0.0), _) => neg(b),
        (_, Some(0.0)) => a,
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    match (a.constant_value_literal(), b.constant_value_literal()) {
        (Some(x), Some(y)) => Expr::Num(x * y),
        (Some(0.0), _) | (_, Some(0.0)) => Expr::zero(),
        (Some(1.0), _) => b,
        (_, Some(1.0)) => a,
        (Some(-1.0), _) => neg(b),
        (_, Some(-1.0)) => neg(a),
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

pub fn div(a: Expr, b: Expr) -> Expr {
    if a.is_zero() {
        return Expr::zero();
    }
    if b.is_one() {
        return a;
    }
    Expr::Div(Box::new(a), Box::new(b))
}

pub fn pow(a: Expr, b: Expr) -> Expr {
    match b.constant_value_literal() {
        Some(0.0) => Expr::Num(1.0),
        Some(1.0) => a,
        _ => Expr::Pow(Box::new(a), Box::new(b)),
    }
}

pub fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

pub fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

/// `sum_k coeff_k * e_k`, skipping zero coefficients.
pub fn linear_combination<'a, I>(terms: I) -> Expr
where
    I: IntoIterator<Item = (f64, &'a Expr)>,
{
    terms
        .into_iter()
        .filter(|(c, e)| *c != 0.0 && !e.is_zero())
        .fold(Expr::zero(), |acc, (c, e)| add(acc, mul(Expr::Num(c), e.clone())))
}

impl Expr {
    fn constant_value_literal(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }
}

// Binding strength used by the renderer: higher binds tighter.
fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        Expr::Num(v) if *v < 0.0 => 3,
        Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => 5,
    }
}

pub struct Rendered<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl Rendered<'_> {
    fn child<'b>(&'b self, e: &'b Expr) -> Rendered<'b> {
        Rendered { expr: e, names: self.names }
    }

    fn wrap(&self, f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({})", self.child(e))
        } else {
            write!(f, "{}", self.child(e))
        }
    }
}

impl fmt::Display for Rendered<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expr {
            Expr::Num(v) => {
                if *v < 0.0 {
                    write!(f, "-{}", -v)
                } else {
                    write!(f, "{v}")
                }
            }
            Expr::Var(i) => match self.names.get(*i) {
                Some(name) => write!(f, "{name}"),
                None => write!(f, "x{i}"),
            },
            Expr::Neg(a) => {
                write!(f, "-")?;
                // unary minus applies to a power or an atom without parentheses
                self.wrap(f, a, precedence(a) < 4)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let op = if matches!(self.expr, Expr::Add(..)) { "+" } else { "-" };
                self.wrap(f, a, precedence(a) < 1)?;
                write!(f, " {op} ")?;
                self.wrap(f, b, precedence(b) <= 1)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                let op = if matches!(self.expr, Expr::Mul(..)) { "*" } else { "/" };
                self.wrap(f, a, precedence(a) < 2)?;
                write!(f, " {op} ")?;
                self.wrap(f, b, precedence(b) <= 2)
            }
            Expr::Pow(a, b) => {
                // right-associative; the base must be an atom or call
                self.wrap(f, a, precedence(a) < 5)?;
                write!(f, "^")?;
                self.wrap(f, b, precedence(b) < 3)
            }
            Expr::Call(func, a) => write!(f, "{}({})", func.name(), self.child(a)),
        }
    }
}
