//! Plain-text `.body` files.
//!
//! A file is a `body dim=<n>` header followed by one item. Items nest:
//!
//! ```text
//! body dim=2
//! sum 1
//!   vertices 2
//!     -1 0
//!     1 0
//!   ball 0.5 0 0
//! ```
//!
//! Leaf items are `vertices <k>` (then `k` coordinate lines), `ball <r> <c..>`
//! and `segment <a..> <b..>`. Composite items are `sum <sign>` (two
//! children), `hull <k>` (`k` children), and `enlarge <eps>`, `capped <cap>`,
//! `scaled <t>` (one child each). Indentation is cosmetic; `#` starts a
//! comment.

use std::fmt::{self, Write as _};

use tancone_core::convgeo::{ConvexBody, Shape};

use crate::report::num;

#[derive(Clone, Debug, PartialEq)]
pub enum BodyError {
    Syntax { line: usize, message: String },
    /// A support-only body without a stored vertex approximation.
    NotSerializable(String),
    Empty { line: usize },
}

impl fmt::Display for BodyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyError::Syntax { line, message } => write!(f, "line {line}: {message}"),
            BodyError::NotSerializable(s) => write!(f, "cannot serialize body: {s}"),
            BodyError::Empty { line } => write!(f, "line {line}: body has no points"),
        }
    }
}

impl std::error::Error for BodyError {}

pub fn write_body(body: &ConvexBody) -> Result<String, BodyError> {
    let mut out = format!("body dim={}\n", body.dim());
    item(body, 0, &mut out)?;
    Ok(out)
}

fn coords(p: &[f64]) -> String {
    p.iter().map(|&c| num(c)).collect::<Vec<_>>().join(" ")
}

fn item(body: &ConvexBody, depth: usize, out: &mut String) -> Result<(), BodyError> {
    let pad = "  ".repeat(depth);
    let vertices = |out: &mut String, vs: &[Vec<f64>]| {
        let _ = writeln!(out, "{pad}vertices {}", vs.len());
        for v in vs {
            let _ = writeln!(out, "{pad}  {}", coords(v));
        }
    };
    if let Some(vs) = body.vertices() {
        vertices(out, vs);
        return Ok(());
    }
    match body.shape() {
        Shape::Points(vs) => vertices(out, vs),
        Shape::Ball { center, radius } => {
            let _ = writeln!(out, "{pad}ball {} {}", num(*radius), coords(center));
        }
        Shape::Sum(a, b, s) => {
            let _ = writeln!(out, "{pad}sum {}", num(*s));
            item(a, depth + 1, out)?;
            item(b, depth + 1, out)?;
        }
        Shape::Hull(bs) => {
            let _ = writeln!(out, "{pad}hull {}", bs.len());
            for b in bs {
                item(b, depth + 1, out)?;
            }
        }
        Shape::Enlarge(a, e) => {
            let _ = writeln!(out, "{pad}enlarge {}", num(*e));
            item(a, depth + 1, out)?;
        }
        Shape::Capped(a, c) => {
            let _ = writeln!(out, "{pad}capped {}", num(*c));
            item(a, depth + 1, out)?;
        }
        Shape::Scaled(a, t) => {
            let _ = writeln!(out, "{pad}scaled {}", num(*t));
            item(a, depth + 1, out)?;
        }
        Shape::Oracle(_) => match body.approx_vertices() {
            Some(vs) => {
                let _ = writeln!(out, "{pad}# polygonal approximation, support deviation {}", num(body.provenance().approx_bound));
                vertices(out, vs);
            }
            None => return Err(BodyError::NotSerializable("support oracle without a vertex approximation".into())),
        },
    }
    Ok(())
}

struct Reader<'a> {
    lines: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
    dim: usize,
}

impl<'a> Reader<'a> {
    fn next(&mut self) -> Result<(usize, Vec<&'a str>), BodyError> {
        let last = self.lines.last().map_or(1, |l| l.0);
        let l = self.lines.get(self.pos).cloned().ok_or(BodyError::Syntax { line: last, message: "unexpected end of file".into() })?;
        self.pos += 1;
        Ok(l)
    }

    fn reals(&self, line: usize, words: &[&str]) -> Result<Vec<f64>, BodyError> {
        words
            .iter()
            .map(|w| w.parse::<f64>().map_err(|_| BodyError::Syntax { line, message: format!("`{w}` is not a number") }))
            .collect()
    }

    fn scalar(&self, line: usize, words: &[&str]) -> Result<f64, BodyError> {
        match self.reals(line, words)?.as_slice() {
            [x] => Ok(*x),
            _ => Err(BodyError::Syntax { line, message: format!("`{}` takes one number", words.join(" ")) }),
        }
    }

    fn point(&self, line: usize, words: &[&str]) -> Result<Vec<f64>, BodyError> {
        let p = self.reals(line, words)?;
        if p.len() != self.dim {
            return Err(BodyError::Syntax { line, message: format!("expected {} coordinates, got {}", self.dim, p.len()) });
        }
        Ok(p)
    }

    fn item(&mut self) -> Result<ConvexBody, BodyError> {
        let (line, words) = self.next()?;
        let args = &words[1..];
        let syntax = |message: String| BodyError::Syntax { line, message };
        let geom = |e: tancone_core::convgeo::GeomError| syntax(e.to_string());
        Ok(match words[0] {
            "vertices" => {
                let k = args.first().and_then(|w| w.parse::<usize>().ok()).ok_or_else(|| syntax("`vertices` needs a count".into()))?;
                if k == 0 {
                    return Err(BodyError::Empty { line });
                }
                let mut pts = Vec::with_capacity(k);
                for _ in 0..k {
                    let (l, w) = self.next()?;
                    pts.push(self.point(l, &w)?);
                }
                ConvexBody::from_points(self.dim, pts).map_err(geom)?
            }
            "ball" => {
                let v = self.reals(line, args)?;
                if v.len() != self.dim + 1 {
                    return Err(syntax(format!("`ball` takes a radius and {} center coordinates", self.dim)));
                }
                ConvexBody::ball(&v[1..], v[0])
            }
            "segment" => {
                let v = self.reals(line, args)?;
                if v.len() != 2 * self.dim {
                    return Err(syntax(format!("`segment` takes {} numbers", 2 * self.dim)));
                }
                ConvexBody::segment(&v[..self.dim], &v[self.dim..])
            }
            "sum" => {
                let s = self.scalar(line, args)?;
                let a = self.item()?;
                let b = self.item()?;
                ConvexBody::minkowski(&a, &b, s).map_err(geom)?
            }
            "hull" => {
                let k = args.first().and_then(|w| w.parse::<usize>().ok()).ok_or_else(|| syntax("`hull` needs a count".into()))?;
                if k == 0 {
                    return Err(BodyError::Empty { line });
                }
                let bs = (0..k).map(|_| self.item()).collect::<Result<Vec<_>, _>>()?;
                ConvexBody::hull_union(&bs).map_err(geom)?
            }
            "enlarge" => {
                let e = self.scalar(line, args)?;
                ConvexBody::ball_enlarge(&self.item()?, e)
            }
            "capped" => {
                let c = self.scalar(line, args)?;
                ConvexBody::capped(&self.item()?, c)
            }
            "scaled" => {
                let t = self.scalar(line, args)?;
                ConvexBody::scaled(&self.item()?, t)
            }
            other => return Err(syntax(format!("unknown item `{other}`"))),
        })
    }
}

pub fn read_body(text: &str) -> Result<ConvexBody, BodyError> {
    let lines: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").split_whitespace().collect::<Vec<_>>()))
        .filter(|(_, w)| !w.is_empty())
        .collect();
    let (line, header) = lines.first().cloned().ok_or(BodyError::Syntax { line: 1, message: "empty file".into() })?;
    let dim = match header.as_slice() {
        ["body", d] => d.strip_prefix("dim=").and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0),
        _ => None,
    }
    .ok_or(BodyError::Syntax { line, message: "expected header `body dim=<n>`".into() })?;
    let mut r = Reader { lines, pos: 1, dim };
    let body = r.item()?;
    if let Some((l, _)) = r.lines.get(r.pos) {
        return Err(BodyError::Syntax { line: *l, message: "trailing content after the body".into() });
    }
    Ok(body)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn supports_agree(a: &ConvexBody, b: &ConvexBody) {
        for k in 0..72 {
            let t = k as f64 * std::f64::consts::TAU / 72.0;
            let d = [t.cos(), t.sin()];
            assert!((a.support(&d) - b.support(&d)).abs() < 1e-9, "angle {t}");
        }
    }

    #[test]
    fn composite_round_trip() {
        let seg = ConvexBody::segment(&[-1.0, 0.0], &[1.0, 0.0]);
        let ball = ConvexBody::ball(&[0.0, -1.0], 1.0);
        let body = ConvexBody::minkowski(&ConvexBody::capped(&seg, 2.0), &ConvexBody::ball_enlarge(&ball, 0.25), -1.0).unwrap();
        let text = write_body(&body).unwrap();
        supports_agree(&body, &read_body(&text).unwrap());
    }

    #[test]
    fn hand_written_file() {
        let text = "# translated disk\nbody dim=2\nsum 1\n  ball 1 0 0\n  vertices 1\n    0 -1\n";
        let b = read_body(text).unwrap();
        assert!(b.support(&[0.0, 1.0]).abs() < 1e-12);
    }

    #[test]
    fn malformed_files() {
        assert!(matches!(read_body("body dim=2\nvertices 0\n"), Err(BodyError::Empty { line: 2 })));
        assert!(matches!(read_body("body dim=2\nball 1 0\n"), Err(BodyError::Syntax { line: 2, .. })));
        assert!(matches!(read_body("body dim=2\nvertices 2\n0 0\n"), Err(BodyError::Syntax { .. })));
        assert!(matches!(read_body("shape\n"), Err(BodyError::Syntax { line: 1, .. })));
    }
}
