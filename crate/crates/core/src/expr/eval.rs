use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{BinOp, EvalError, Func, Node, Var};

#[derive(Clone, Copy, Debug)]
enum Op {
    Const(f64),
    X(usize),
    V(usize),
    D(usize),
    Neg,
    Add,
    Sub,
    Mul,
    /// Index into the label table for domain errors.
    Div(usize),
    Min,
    Max,
    Pow(u32),
    Abs,
    Sin,
    Cos,
    Exp,
    Sqrt(usize),
    Norm2(usize),
}

/// Postfix form of an expression tree, evaluated on a small stack.
#[derive(Clone, Debug)]
pub struct Program {
    ops: Vec<Op>,
    labels: Vec<String>,
    depth: usize,
}

const INLINE_STACK: usize = 32;

impl Program {
    pub(super) fn compile(root: &Node) -> Self {
        let mut p = Program { ops: Vec::new(), labels: Vec::new(), depth: 0 };
        let mut cur = 0;
        p.emit(root, &mut cur);
        p
    }

    fn push(&mut self, op: Op, cur: &mut usize, delta: isize) {
        self.ops.push(op);
        *cur = (*cur as isize + delta) as usize;
        self.depth = self.depth.max(*cur);
    }

    fn emit(&mut self, n: &Node, cur: &mut usize) {
        match n {
            Node::Const(c) => self.push(Op::Const(*c), cur, 1),
            Node::Var(Var::X(i)) => self.push(Op::X(*i), cur, 1),
            Node::Var(Var::V(i)) => self.push(Op::V(*i), cur, 1),
            Node::Var(Var::D(i)) => self.push(Op::D(*i), cur, 1),
            Node::Neg(a) => {
                self.emit(a, cur);
                self.push(Op::Neg, cur, 0);
            }
            Node::Pow(a, k) => {
                self.emit(a, cur);
                self.push(Op::Pow(*k), cur, 0);
            }
            Node::Call(f, a) => {
                self.emit(a, cur);
                let op = match f {
                    Func::Abs => Op::Abs,
                    Func::Sin => Op::Sin,
                    Func::Cos => Op::Cos,
                    Func::Exp => Op::Exp,
                    Func::Sqrt => {
                        self.labels.push(n.to_string());
                        Op::Sqrt(self.labels.len() - 1)
                    }
                };
                self.push(op, cur, 0);
            }
            Node::Bin(op, a, b) => {
                self.emit(a, cur);
                self.emit(b, cur);
                let op = match op {
                    BinOp::Add => Op::Add,
                    BinOp::Sub => Op::Sub,
                    BinOp::Mul => Op::Mul,
                    BinOp::Min => Op::Min,
                    BinOp::Max => Op::Max,
                    BinOp::Div => {
                        self.labels.push(n.to_string());
                        Op::Div(self.labels.len() - 1)
                    }
                };
                self.push(op, cur, -1);
            }
            Node::Norm2(args) => {
                for a in args {
                    self.emit(a, cur);
                }
                self.push(Op::Norm2(args.len()), cur, 1 - args.len() as isize);
            }
        }
    }

    pub(super) fn run(&self, x: &[f64], v: &[f64], d: &[f64]) -> Result<f64, EvalError> {
        if self.depth <= INLINE_STACK {
            let mut buf = [0.0f64; INLINE_STACK];
            self.exec(&mut buf, x, v, d)
        } else {
            let mut buf = alloc::vec![0.0f64; self.depth];
            self.exec(&mut buf, x, v, d)
        }
    }

    fn domain(&self, label: usize) -> EvalError {
        EvalError::Domain { node: self.labels[label].clone() }
    }

    fn exec(&self, st: &mut [f64], x: &[f64], v: &[f64], d: &[f64]) -> Result<f64, EvalError> {
        let mut sp = 0usize;
        for op in &self.ops {
            match *op {
                Op::Const(c) => {
                    st[sp] = c;
                    sp += 1;
                }
                Op::X(i) => {
                    st[sp] = x[i];
                    sp += 1;
                }
                Op::V(i) => {
                    st[sp] = v[i];
                    sp += 1;
                }
                Op::D(i) => {
                    st[sp] = d[i];
                    sp += 1;
                }
                Op::Neg => st[sp - 1] = -st[sp - 1],
                Op::Abs => st[sp - 1] = libm::fabs(st[sp - 1]),
                Op::Sin => st[sp - 1] = libm::sin(st[sp - 1]),
                Op::Cos => st[sp - 1] = libm::cos(st[sp - 1]),
                Op::Exp => st[sp - 1] = libm::exp(st[sp - 1]),
                Op::Sqrt(l) => {
                    let a = st[sp - 1];
                    if a < 0.0 {
                        return Err(self.domain(l));
                    }
                    st[sp - 1] = libm::sqrt(a);
                }
                Op::Pow(k) => st[sp - 1] = powi(st[sp - 1], k),
                Op::Add | Op::Sub | Op::Mul | Op::Div(_) | Op::Min | Op::Max => {
                    sp -= 1;
                    let b = st[sp];
                    let a = st[sp - 1];
                    st[sp - 1] = match *op {
                        Op::Add => a + b,
                        Op::Sub => a - b,
                        Op::Mul => a * b,
                        Op::Div(l) => {
                            if b == 0.0 {
                                return Err(self.domain(l));
                            }
                            a / b
                        }
                        Op::Min => a.min(b),
                        _ => a.max(b),
                    };
                }
                Op::Norm2(k) => {
                    let mut s = 0.0;
                    for &t in &st[sp - k..sp] {
                        s += t * t;
                    }
                    sp -= k;
                    st[sp] = libm::sqrt(s);
                    sp += 1;
                }
            }
        }
        Ok(st[0])
    }
}

/// Integer power by repeated squaring; `powi(_, 0) == 1`.
fn powi(mut b: f64, mut k: u32) -> f64 {
    let mut acc = 1.0;
    while k > 0 {
        if k & 1 == 1 {
            acc *= b;
        }
        b *= b;
        k >>= 1;
    }
    acc
}
