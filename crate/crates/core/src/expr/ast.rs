use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Lattice site relative to the reference point `(n, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    U00,
    U10,
    U01,
    U11,
}

impl Site {
    /// Sites allowed on the right-hand side of an explicit equation.
    pub const RHS: [Site; 3] = [Site::U00, Site::U10, Site::U01];
    pub const ALL: [Site; 4] = [Site::U00, Site::U10, Site::U01, Site::U11];

    /// Position of the site in an evaluation point `[u00, u10, u01, u11]`.
    pub fn index(self) -> usize {
        match self {
            Site::U00 => 0,
            Site::U10 => 1,
            Site::U01 => 2,
            Site::U11 => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Site::U00 => "u00",
            Site::U10 => "u10",
            Site::U01 => "u01",
            Site::U11 => "u11",
        }
    }

    pub fn from_name(name: &str) -> Option<Site> {
        Site::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An exact rational literal together with its nearest `f64`.
#[derive(Clone, Debug)]
pub struct Constant {
    exact: BigRational,
    approx: f64,
}

impl Constant {
    pub fn new(exact: BigRational) -> Self {
        let approx = exact.to_f64().unwrap_or(f64::NAN);
        Constant { exact, approx }
    }

    pub fn from_integer(value: i64) -> Self {
        Constant::new(BigRational::from_integer(BigInt::from(value)))
    }

    pub fn exact(&self) -> &BigRational {
        &self.exact
    }

    pub fn approx(&self) -> f64 {
        self.approx
    }

    pub fn is_integer(&self) -> bool {
        self.exact.is_integer()
    }

    /// The value as a machine integer, when it is one and fits.
    pub fn as_i64(&self) -> Option<i64> {
        if self.exact.is_integer() {
            self.exact.to_integer().to_i64()
        } else {
            None
        }
    }
}

impl PartialEq for Constant {
    fn eq(&self, other: &Self) -> bool {
        self.exact == other.exact
    }
}

impl fmt::Display for Constant {
    /// Finite decimals print as decimals so they parse back to the same
    /// literal; negative values are parenthesized.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match decimal_string(&self.exact.abs()) {
            Some(s) => s,
            None => format!("{}/{}", self.exact.numer().abs(), self.exact.denom()),
        };
        let needs_parens = self.exact.is_negative() || !self.exact.is_integer() && text.contains('/');
        if needs_parens {
            let sign = if self.exact.is_negative() { "-" } else { "" };
            write!(f, "({sign}{text})")
        } else {
            f.write_str(&text)
        }
    }
}

/// Exact decimal expansion of a non-negative rational, if it terminates.
fn decimal_string(value: &BigRational) -> Option<String> {
    let mut den = value.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    let digits = twos.max(fives);
    let scaled = value * BigRational::from_integer(num_traits::pow(BigInt::from(10), digits));
    let mut s = scaled.to_integer().to_string();
    if digits > 0 {
        if s.len() <= digits {
            s = format!("{}{}", "0".repeat(digits + 1 - s.len()), s);
        }
        s.insert(s.len() - digits, '.');
    }
    Some(s)
}

/// Node kinds, used to label evaluation errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Var,
    Const,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow,
    Exp,
    Log,
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NodeKind::Var => "Var",
            NodeKind::Const => "Const",
            NodeKind::Add => "Add",
            NodeKind::Sub => "Sub",
            NodeKind::Mul => "Mul",
            NodeKind::Div => "Div",
            NodeKind::Neg => "Neg",
            NodeKind::Pow => "Pow",
            NodeKind::Exp => "Exp",
            NodeKind::Log => "Log",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Var(Site),
    Const(Constant),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    /// Power with a constant rational exponent.
    Pow(Box<Node>, Constant),
    Exp(Box<Node>),
    Log(Box<Node>),
}

impl Node {
    pub fn kind(&self) -> NodeKind {
        match self {
            Node::Var(_) => NodeKind::Var,
            Node::Const(_) => NodeKind::Const,
            Node::Add(..) => NodeKind::Add,
            Node::Sub(..) => NodeKind::Sub,
            Node::Mul(..) => NodeKind::Mul,
            Node::Div(..) => NodeKind::Div,
            Node::Neg(_) => NodeKind::Neg,
            Node::Pow(..) => NodeKind::Pow,
            Node::Exp(_) => NodeKind::Exp,
            Node::Log(_) => NodeKind::Log,
        }
    }

    pub fn children(&self) -> Vec<&Node> {
        match self {
            Node::Var(_) | Node::Const(_) => vec![],
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => vec![a, b],
            Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) | Node::Log(a) => vec![a],
        }
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Node)) {
        f(self);
        for child in self.children() {
            child.visit(f);
        }
    }
}

impl fmt::Display for Node {
    /// Fully parenthesized form; parsing it gives back the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Var(s) => write!(f, "{s}"),
            Node::Const(c) => write!(f, "{c}"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Neg(a) => write!(f, "(-({a}))"),
            Node::Pow(a, e) => {
                let exp = e.exact();
                if exp.is_integer() && !exp.is_negative() {
                    write!(f, "({a}^{})", exp.numer())
                } else if exp.is_integer() {
                    write!(f, "({a}^(-{}))", exp.numer().abs())
                } else {
                    let sign = if exp.is_negative() { "-" } else { "" };
                    write!(f, "({a}^({sign}{}/{}))", exp.numer().abs(), exp.denom())
                }
            }
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Log(a) => write!(f, "log({a})"),
        }
    }
}

/// Whether an expression stays inside the field of rational functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rationality {
    Rational,
    NonRational,
}

/// A parsed scalar formula over lattice-site variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    root: Node,
}

impl Expression {
    pub fn new(root: Node) -> Self {
        Expression { root }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Sites referenced anywhere in the tree, in `u00, u10, u01, u11` order.
    pub fn sites(&self) -> Vec<Site> {
        let mut seen = [false; 4];
        self.root.visit(&mut |n| {
            if let Node::Var(s) = n {
                seen[s.index()] = true;
            }
        });
        Site::ALL.into_iter().filter(|s| seen[s.index()]).collect()
    }

    pub fn references(&self, site: Site) -> bool {
        self.sites().contains(&site)
    }

    pub fn node_count(&self) -> usize {
        let mut count = 0;
        self.root.visit(&mut |_| count += 1);
        count
    }

    /// Number of non-leaf nodes.
    pub fn interior_node_count(&self) -> usize {
        let mut count = 0;
        self.root.visit(&mut |n| {
            if !n.children().is_empty() {
                count += 1;
            }
        });
        count
    }

    /// Rational iff no `exp`/`log` appears and every exponent is an integer.
    /// No simplification is attempted.
    pub fn classify_rational(&self) -> Rationality {
        let mut rational = true;
        self.root.visit(&mut |n| match n {
            Node::Exp(_) | Node::Log(_) => rational = false,
            Node::Pow(_, e) if !e.is_integer() => rational = false,
            _ => {}
        });
        if rational {
            Rationality::Rational
        } else {
            Rationality::NonRational
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}
