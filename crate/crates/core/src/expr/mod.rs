//! The function language used by problem definitions.
//!
//! Variables are `x1..xn` (decision), `v1..vq` (scenario) and, for
//! directional-derivative formulas, `d1..dn`. All indices are 1-based in text
//! and 0-based in the AST.

mod eval;
mod parse;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use eval::Program;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X(usize),
    V(usize),
    D(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Abs,
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Var(Var),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, u32),
    Call(Func, Box<Node>),
    Norm2(Vec<Node>),
}

/// Declared variable dimensions. `nd` is the number of direction variables
/// (zero for plain value formulas).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dims {
    pub n: usize,
    pub q: usize,
    pub nd: usize,
}

impl Dims {
    pub fn new(n: usize, q: usize) -> Self {
        Dims { n, q, nd: 0 }
    }

    pub fn with_direction(n: usize, q: usize) -> Self {
        Dims { n, q, nd: n }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParseError {
    Syntax { offset: usize, message: &'static str },
    UnknownIdentifier { name: String, offset: usize },
    IndexOutOfRange { var: String, offset: usize },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax { offset, message } => {
                write!(f, "syntax error at byte {offset}: {message}")
            }
            ParseError::UnknownIdentifier { name, offset } => {
                write!(f, "unknown identifier `{name}` at byte {offset}")
            }
            ParseError::IndexOutOfRange { var, offset } => {
                write!(f, "variable `{var}` at byte {offset} is out of range")
            }
        }
    }
}

impl core::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
pub enum EvalError {
    /// Square root of a negative number or division by zero; carries the
    /// offending subexpression.
    Domain { node: String },
    Arity { expected: Dims, x: usize, v: usize, d: usize },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::Domain { node } => write!(f, "domain error in `{node}`"),
            EvalError::Arity { expected, x, v, d } => write!(
                f,
                "argument sizes x={x} v={v} d={d} do not match declared n={} q={}",
                expected.n, expected.q
            ),
        }
    }
}

impl core::error::Error for EvalError {}

/// A parsed, compiled expression. Immutable and cheap to evaluate.
#[derive(Clone, Debug)]
pub struct Expression {
    root: Node,
    dims: Dims,
    program: Program,
}

impl Expression {
    pub fn parse(source: &str, dims: Dims) -> Result<Self, ParseError> {
        let root = parse::parse(source, dims)?;
        Ok(Self::from_node(root, dims))
    }

    /// Build from an AST. Variable indices must lie within `dims`.
    pub fn from_node(root: Node, dims: Dims) -> Self {
        let program = Program::compile(&root);
        Expression { root, dims, program }
    }

    pub fn constant(c: f64, dims: Dims) -> Self {
        Self::from_node(Node::Const(c), dims)
    }

    pub fn node(&self) -> &Node {
        &self.root
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn eval(&self, x: &[f64], v: &[f64]) -> Result<f64, EvalError> {
        self.eval_dir(x, v, &[])
    }

    pub fn eval_dir(&self, x: &[f64], v: &[f64], d: &[f64]) -> Result<f64, EvalError> {
        if x.len() < self.dims.n || v.len() < self.dims.q || d.len() < self.dims.nd {
            return Err(EvalError::Arity { expected: self.dims, x: x.len(), v: v.len(), d: d.len() });
        }
        self.program.run(x, v, d)
    }

    pub fn references_direction(&self) -> bool {
        fn walk(n: &Node) -> bool {
            match n {
                Node::Var(Var::D(_)) => true,
                Node::Const(_) | Node::Var(_) => false,
                Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => walk(a),
                Node::Bin(_, a, b) => walk(a) || walk(b),
                Node::Norm2(xs) => xs.iter().any(walk),
            }
        }
        walk(&self.root)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.root, f)
    }
}

const P_ADD: u8 = 1;
const P_MUL: u8 = 2;
const P_NEG: u8 = 3;
const P_POW: u8 = 4;
const P_ATOM: u8 = 5;

impl Node {
    fn prec(&self) -> u8 {
        match self {
            Node::Bin(BinOp::Add | BinOp::Sub, ..) => P_ADD,
            Node::Bin(BinOp::Mul | BinOp::Div, ..) => P_MUL,
            Node::Neg(_) => P_NEG,
            Node::Pow(..) => P_POW,
            _ => P_ATOM,
        }
    }
}

fn wrap(f: &mut fmt::Formatter<'_>, n: &Node, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({n})")
    } else {
        write!(f, "{n}")
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => write!(f, "{c:?}"),
            Node::Var(Var::X(i)) => write!(f, "x{}", i + 1),
            Node::Var(Var::V(i)) => write!(f, "v{}", i + 1),
            Node::Var(Var::D(i)) => write!(f, "d{}", i + 1),
            Node::Neg(a) => {
                f.write_str("-")?;
                wrap(f, a, a.prec() < P_NEG)
            }
            Node::Pow(a, k) => {
                wrap(f, a, a.prec() < P_ATOM)?;
                write!(f, "^{k}")
            }
            Node::Bin(op @ (BinOp::Min | BinOp::Max), a, b) => {
                let name = if *op == BinOp::Min { "min" } else { "max" };
                write!(f, "{name}({a}, {b})")
            }
            Node::Bin(op, a, b) => {
                let (p, sym) = match op {
                    BinOp::Add => (P_ADD, " + "),
                    BinOp::Sub => (P_ADD, " - "),
                    BinOp::Mul => (P_MUL, " * "),
                    _ => (P_MUL, " / "),
                };
                wrap(f, a, a.prec() < p)?;
                f.write_str(sym)?;
                wrap(f, b, b.prec() <= p)
            }
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
            Node::Norm2(args) => {
                f.write_str("norm2(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
