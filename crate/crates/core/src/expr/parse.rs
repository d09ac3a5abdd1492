use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{BinOp, Dims, Func, Node, ParseError, Var};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    Sym(u8),
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() || c == b'.' {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self
                .src
                .get(self.pos)
                .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
            {
                self.pos += 1;
            }
            let s = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
            return Ok((Tok::Ident(s.to_string()), start));
        }
        if b"+-*/^(),".contains(&c) {
            self.pos += 1;
            return Ok((Tok::Sym(c), start));
        }
        Err(ParseError::Syntax { offset: start, message: "unexpected character" })
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ParseError> {
        let s = self.src;
        let digits = |p: &mut usize| {
            let b = *p;
            while s.get(*p).is_some_and(u8::is_ascii_digit) {
                *p += 1;
            }
            *p > b
        };
        let mut p = self.pos;
        let int = digits(&mut p);
        let mut integral = true;
        if s.get(p) == Some(&b'.') {
            p += 1;
            integral = false;
            if !digits(&mut p) && !int {
                return Err(ParseError::Syntax { offset: start, message: "malformed number" });
            }
        }
        if matches!(s.get(p), Some(b'e' | b'E')) {
            let mut q = p + 1;
            if matches!(s.get(q), Some(b'+' | b'-')) {
                q += 1;
            }
            if digits(&mut q) {
                p = q;
                integral = false;
            }
        }
        self.pos = p;
        let text = core::str::from_utf8(&s[start..p]).unwrap_or_default();
        match text.parse::<f64>() {
            Ok(v) => Ok((Tok::Num(v, integral), start)),
            Err(_) => Err(ParseError::Syntax { offset: start, message: "malformed number" }),
        }
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    src: &'a str,
    tok: Tok,
    at: usize,
    dims: Dims,
}

pub(super) fn parse(source: &str, dims: Dims) -> Result<Node, ParseError> {
    let mut lex = Lexer { src: source.as_bytes(), pos: 0 };
    let (tok, at) = lex.next()?;
    let mut p = Parser { lex, src: source, tok, at, dims };
    let node = p.expr()?;
    if p.tok != Tok::End {
        return Err(ParseError::Syntax { offset: p.at, message: "unexpected trailing input" });
    }
    Ok(node)
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(), ParseError> {
        let (t, at) = self.lex.next()?;
        self.tok = t;
        self.at = at;
        Ok(())
    }

    fn expect(&mut self, c: u8, message: &'static str) -> Result<(), ParseError> {
        if self.tok == Tok::Sym(c) {
            self.bump()
        } else {
            Err(ParseError::Syntax { offset: self.at, message })
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Sym(b'+') => BinOp::Add,
                Tok::Sym(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Sym(b'*') => BinOp::Mul,
                Tok::Sym(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.tok == Tok::Sym(b'-') {
            self.bump()?;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let mut base = self.primary()?;
        while self.tok == Tok::Sym(b'^') {
            self.bump()?;
            let k = match self.tok {
                Tok::Num(v, true) if v <= u32::MAX as f64 => v as u32,
                _ => {
                    return Err(ParseError::Syntax {
                        offset: self.at,
                        message: "exponent must be a nonnegative integer literal",
                    })
                }
            };
            self.bump()?;
            base = Node::Pow(Box::new(base), k);
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let at = self.at;
        match core::mem::replace(&mut self.tok, Tok::End) {
            Tok::Num(v, _) => {
                self.bump()?;
                Ok(Node::Const(v))
            }
            Tok::Sym(b'(') => {
                self.bump()?;
                let e = self.expr()?;
                self.expect(b')', "expected `)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump()?;
                if self.tok == Tok::Sym(b'(') {
                    self.bump()?;
                    self.call(&name, at)
                } else {
                    self.ident(&name, at)
                }
            }
            other => {
                self.tok = other;
                Err(ParseError::Syntax { offset: at, message: "expected an operand" })
            }
        }
    }

    fn ident(&self, name: &str, at: usize) -> Result<Node, ParseError> {
        if name == "pi" {
            return Ok(Node::Const(core::f64::consts::PI));
        }
        let unknown = || ParseError::UnknownIdentifier { name: name.to_string(), offset: at };
        let (head, idx) = name.split_at(1);
        if idx.is_empty() || !idx.bytes().all(|b| b.is_ascii_digit()) {
            return Err(unknown());
        }
        let (limit, make): (usize, fn(usize) -> Var) = match head {
            "x" => (self.dims.n, Var::X),
            "v" => (self.dims.q, Var::V),
            "d" if self.dims.nd > 0 => (self.dims.nd, Var::D),
            _ => return Err(unknown()),
        };
        match idx.parse::<usize>() {
            Ok(i) if i >= 1 && i <= limit => Ok(Node::Var(make(i - 1))),
            _ => Err(ParseError::IndexOutOfRange { var: name.to_string(), offset: at }),
        }
    }

    fn call(&mut self, name: &str, at: usize) -> Result<Node, ParseError> {
        let mut args = Vec::new();
        if self.tok != Tok::Sym(b')') {
            loop {
                args.extend(self.argument(name == "norm2")?);
                if self.tok == Tok::Sym(b',') {
                    self.bump()?;
                } else {
                    break;
                }
            }
        }
        self.expect(b')', "expected `,` or `)`")?;
        let arity = |k: usize| {
            if args.len() == k {
                Ok(())
            } else {
                Err(ParseError::Syntax { offset: at, message: "wrong number of arguments" })
            }
        };
        let func = match name {
            "abs" => Func::Abs,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "min" | "max" => {
                arity(2)?;
                let b = args.pop().unwrap();
                let a = args.pop().unwrap();
                let op = if name == "min" { BinOp::Min } else { BinOp::Max };
                return Ok(Node::Bin(op, Box::new(a), Box::new(b)));
            }
            "norm2" => {
                if args.is_empty() {
                    return Err(ParseError::Syntax { offset: at, message: "wrong number of arguments" });
                }
                return Ok(Node::Norm2(args));
            }
            _ => return Err(ParseError::UnknownIdentifier { name: name.to_string(), offset: at }),
        };
        arity(1)?;
        Ok(Node::Call(func, Box::new(args.pop().unwrap())))
    }

    /// One call argument. Inside `norm2` a bare `x`, `v` or `d` expands to the
    /// whole vector.
    fn argument(&mut self, vector_ok: bool) -> Result<Vec<Node>, ParseError> {
        if vector_ok {
            if let Tok::Ident(name) = &self.tok {
                let expand = match name.as_str() {
                    "x" => Some((self.dims.n, Var::X as fn(usize) -> Var)),
                    "v" => Some((self.dims.q, Var::V as fn(usize) -> Var)),
                    "d" if self.dims.nd > 0 => Some((self.dims.nd, Var::D as fn(usize) -> Var)),
                    _ => None,
                };
                if let Some((len, make)) = expand {
                    let at = self.at;
                    let rest = self.src[self.lex.pos..].trim_start();
                    if rest.starts_with(',') || rest.starts_with(')') {
                        if len == 0 {
                            return Err(ParseError::IndexOutOfRange { var: name.clone(), offset: at });
                        }
                        self.bump()?;
                        return Ok((0..len).map(|i| Node::Var(make(i))).collect());
                    }
                }
            }
        }
        Ok(alloc::vec![self.expr()?])
    }
}
