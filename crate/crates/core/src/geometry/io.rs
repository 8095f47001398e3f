//! `wgmesh 1` text format.

use std::fmt::Write as _;
use std::path::Path;

use super::{EdgeShape, Mesh, Point2, SignedEdge};
use crate::error::{Error, Result};
use crate::testcases::lookup_curve;

/// 17 significant digits; parses back to the identical `f64`.
fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_mesh_string(mesh: &Mesh) -> String {
    let (vertices, edges, loops) = mesh.parts();
    let mut s = String::new();
    s.push_str("wgmesh 1\n");
    let _ = writeln!(s, "vertices {}", vertices.len());
    for (i, v) in vertices.iter().enumerate() {
        let _ = writeln!(s, "{i} {} {}", real(v.x), real(v.y));
    }
    let _ = writeln!(s, "edges {}", edges.len());
    for (i, (v0, v1, shape)) in edges.iter().enumerate() {
        match shape {
            EdgeShape::Line => {
                let _ = writeln!(s, "{i} {v0} {v1} line");
            }
            EdgeShape::Arc {
                center,
                radius,
                theta0,
                theta1,
            } => {
                let _ = writeln!(
                    s,
                    "{i} {v0} {v1} arc {} {} {} {} {}",
                    real(center.x),
                    real(center.y),
                    real(*radius),
                    real(*theta0),
                    real(*theta1)
                );
            }
            EdgeShape::Graph { curve, x0, x1 } => {
                let _ = writeln!(s, "{i} {v0} {v1} graph {} {} {}", curve.name, real(*x0), real(*x1));
            }
        }
    }
    let _ = writeln!(s, "elements {}", loops.len());
    for (i, lp) in loops.iter().enumerate() {
        let _ = write!(s, "{i} {}", lp.len());
        for se in lp {
            let _ = write!(s, " {}{}", if se.forward { '+' } else { '-' }, se.edge);
        }
        s.push('\n');
    }
    s
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_mesh_string(mesh))?;
    Ok(())
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)?;
    read_mesh_str(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank line with comments stripped, as (line number, tokens).
    fn next(&mut self) -> Result<(usize, Vec<&'a str>)> {
        for (i, raw) in self.inner.by_ref() {
            self.last = i + 1;
            let body = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = body.split_whitespace().collect();
            if !toks.is_empty() {
                return Ok((i + 1, toks));
            }
        }
        Err(Error::Parse {
            line: self.last + 1,
            msg: "unexpected end of file".into(),
        })
    }
}

fn parse<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid {what} `{tok}`"),
    })
}

fn header(lines: &mut Lines<'_>, keyword: &str) -> Result<usize> {
    let (ln, toks) = lines.next()?;
    if toks.len() != 2 || toks[0] != keyword {
        return Err(Error::Parse {
            line: ln,
            msg: format!("expected `{keyword} <count>`"),
        });
    }
    parse(toks[1], ln, "count")
}

fn expect_id(tok: &str, want: usize, line: usize) -> Result<()> {
    let id: usize = parse(tok, line, "id")?;
    if id != want {
        return Err(Error::Parse {
            line,
            msg: format!("expected id {want}, found {id}"),
        });
    }
    Ok(())
}

fn arity(toks: &[&str], n: usize, line: usize) -> Result<()> {
    if toks.len() != n {
        return Err(Error::Parse {
            line,
            msg: format!("expected {n} fields, found {}", toks.len()),
        });
    }
    Ok(())
}

pub fn read_mesh_str(text: &str) -> Result<Mesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (ln, toks) = lines.next()?;
    if toks != ["wgmesh", "1"] {
        return Err(Error::Parse {
            line: ln,
            msg: "expected `wgmesh 1` header".into(),
        });
    }

    let nv = header(&mut lines, "vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for i in 0..nv {
        let (ln, t) = lines.next()?;
        arity(&t, 3, ln)?;
        expect_id(t[0], i, ln)?;
        vertices.push(Point2::new(parse(t[1], ln, "real")?, parse(t[2], ln, "real")?));
    }

    let ne = header(&mut lines, "edges")?;
    let mut edges = Vec::with_capacity(ne);
    for i in 0..ne {
        let (ln, t) = lines.next()?;
        if t.len() < 4 {
            return Err(Error::Parse {
                line: ln,
                msg: "edge needs `<id> <v0> <v1> <kind> ...`".into(),
            });
        }
        expect_id(t[0], i, ln)?;
        let v0: usize = parse(t[1], ln, "vertex id")?;
        let v1: usize = parse(t[2], ln, "vertex id")?;
        for v in [v0, v1] {
            if v >= nv {
                return Err(Error::DanglingReference(format!(
                    "line {ln}: edge {i} references vertex {v} of {nv}"
                )));
            }
        }
        let shape = match t[3] {
            "line" => {
                arity(&t, 4, ln)?;
                EdgeShape::Line
            }
            "arc" => {
                arity(&t, 9, ln)?;
                EdgeShape::Arc {
                    center: Point2::new(parse(t[4], ln, "real")?, parse(t[5], ln, "real")?),
                    radius: parse(t[6], ln, "real")?,
                    theta0: parse(t[7], ln, "real")?,
                    theta1: parse(t[8], ln, "real")?,
                }
            }
            "graph" => {
                arity(&t, 7, ln)?;
                let curve = lookup_curve(t[4]).ok_or_else(|| Error::UnknownCurve(t[4].to_string()))?;
                EdgeShape::Graph {
                    curve,
                    x0: parse(t[5], ln, "real")?,
                    x1: parse(t[6], ln, "real")?,
                }
            }
            other => {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("unknown edge kind `{other}`"),
                })
            }
        };
        edges.push((v0, v1, shape));
    }

    let nel = header(&mut lines, "elements")?;
    let mut loops = Vec::with_capacity(nel);
    for i in 0..nel {
        let (ln, t) = lines.next()?;
        if t.len() < 2 {
            return Err(Error::Parse {
                line: ln,
                msg: "element needs `<id> <ne> <edges...>`".into(),
            });
        }
        expect_id(t[0], i, ln)?;
        let n: usize = parse(t[1], ln, "edge count")?;
        arity(&t, n + 2, ln)?;
        let mut lp = Vec::with_capacity(n);
        for tok in &t[2..] {
            let (forward, digits) = match tok.as_bytes().first() {
                Some(b'-') => (false, &tok[1..]),
                Some(b'+') => (true, &tok[1..]),
                _ => (true, *tok),
            };
            let edge: usize = parse(digits, ln, "edge reference")?;
            if edge >= ne {
                return Err(Error::DanglingReference(format!(
                    "line {ln}: element {i} references edge {edge} of {ne}"
                )));
            }
            lp.push(SignedEdge::new(edge, forward));
        }
        loops.push(lp);
    }
    Mesh::new(vertices, edges, loops)
}
