//! Plain-text polyhedral mesh format.
//!
//! ```text
//! polymesh 1
//! vertices N
//! x y z            (N lines)
//! faces M
//! n v0 v1 ...      (M lines, loop counter-clockwise about the face normal)
//! cells P
//! n ±f0 ±f1 ...    (P lines, '-' marks a face whose normal points inward)
//! boundary B
//! f0 f1 ...        (B indices, any line layout)
//! neumann C        (optional)
//! f0 f1 ...        (C boundary faces with a flux condition)
//! ```
//!
//! Boundary faces not listed under `neumann` carry Dirichlet data.
//!
//! Blank lines and text after `#` are ignored.

use super::PolyMesh;
use crate::error::{Result, VemError};
use nalgebra::Vector3;
use std::fmt::Write as _;
use std::path::Path;

struct Lines<'a> {
    inner: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let inner = text
            .lines()
            .enumerate()
            .filter_map(|(i, l)| {
                let l = l.split('#').next().unwrap_or("");
                let toks: Vec<&str> = l.split_whitespace().collect();
                (!toks.is_empty()).then_some((i + 1, toks))
            })
            .collect();
        Lines { inner, pos: 0 }
    }

    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        let last = self.inner.last().map_or(0, |l| l.0);
        let item = self.inner.get(self.pos).cloned().ok_or_else(|| VemError::Parse {
            line: last,
            message: format!("unexpected end of file, expected {what}"),
        })?;
        self.pos += 1;
        Ok(item)
    }

    fn peek_is(&self, key: &str) -> bool {
        self.inner.get(self.pos).is_some_and(|(_, t)| t[0] == key)
    }

    fn header(&mut self, key: &str) -> Result<usize> {
        let (line, t) = self.next(key)?;
        if t.len() != 2 || t[0] != key {
            return Err(VemError::Parse {
                line,
                message: format!("expected '{key} <count>' but found '{}'", t.join(" ")),
            });
        }
        parse_num(t[1], line)
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| VemError::Parse {
        line,
        message: format!("invalid number '{tok}'"),
    })
}

pub fn parse_mesh(text: &str) -> Result<PolyMesh> {
    let mut lines = Lines::new(text);
    let (line, t) = lines.next("header")?;
    if t != ["polymesh", "1"] {
        return Err(VemError::Parse {
            line,
            message: "expected header 'polymesh 1'".into(),
        });
    }

    let nv = lines.header("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, t) = lines.next("vertex")?;
        if t.len() != 3 {
            return Err(VemError::Parse {
                line,
                message: format!("vertex needs 3 coordinates, found {}", t.len()),
            });
        }
        vertices.push(Vector3::new(
            parse_num(t[0], line)?,
            parse_num(t[1], line)?,
            parse_num(t[2], line)?,
        ));
    }

    let nf = lines.header("faces")?;
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, t) = lines.next("face")?;
        let n: usize = parse_num(t[0], line)?;
        if t.len() != n + 1 || n < 3 {
            return Err(VemError::Parse {
                line,
                message: format!("face declares {n} vertices but lists {}", t.len() - 1),
            });
        }
        faces.push(
            t[1..]
                .iter()
                .map(|s| parse_num(s, line))
                .collect::<Result<Vec<usize>>>()?,
        );
    }

    let nc = lines.header("cells")?;
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (line, t) = lines.next("cell")?;
        let n: usize = parse_num(t[0], line)?;
        if t.len() != n + 1 || n < 4 {
            return Err(VemError::Parse {
                line,
                message: format!("cell declares {n} faces but lists {}", t.len() - 1),
            });
        }
        let mut cf = Vec::with_capacity(n);
        for s in &t[1..] {
            // sign is read from the text so that "-0" is an inward face 0
            let (outward, digits) = match s.strip_prefix('-') {
                Some(rest) => (false, rest),
                None => (true, s.strip_prefix('+').unwrap_or(s)),
            };
            cf.push((parse_num::<usize>(digits, line)?, outward));
        }
        cells.push(cf);
    }

    let boundary = index_list(&mut lines, "boundary")?;
    let neumann = match lines.peek_is("neumann") {
        true => Some(index_list(&mut lines, "neumann")?),
        false => None,
    };
    if let Ok((line, _)) = lines.next("") {
        return Err(VemError::Parse {
            line,
            message: "trailing content after the last section".into(),
        });
    }
    let mesh = PolyMesh::new(vertices, faces, cells, Some(boundary))?;
    match neumann {
        Some(list) => mesh.with_neumann(&list),
        None => Ok(mesh),
    }
}

fn index_list(lines: &mut Lines<'_>, section: &str) -> Result<Vec<usize>> {
    let n = lines.header(section)?;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let (line, t) = lines.next("face index")?;
        for s in t {
            out.push(parse_num(s, line)?);
        }
    }
    if out.len() != n {
        return Err(VemError::Parse {
            line: 0,
            message: format!("{section} declares {n} faces but lists {}", out.len()),
        });
    }
    Ok(out)
}

pub fn load_mesh(path: &Path) -> Result<PolyMesh> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text)
}

/// Serialize with shortest round-trip float formatting.
pub fn write_mesh(mesh: &PolyMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "polymesh 1");
    let _ = writeln!(s, "vertices {}", mesh.num_vertices());
    for v in mesh.vertices() {
        let _ = writeln!(s, "{} {} {}", v.x, v.y, v.z);
    }
    let _ = writeln!(s, "faces {}", mesh.num_faces());
    for f in mesh.faces() {
        let _ = write!(s, "{}", f.vertices.len());
        for v in &f.vertices {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "cells {}", mesh.num_cells());
    for c in mesh.cells() {
        let _ = write!(s, "{}", c.faces.len());
        for (f, sg) in c.faces.iter().zip(&c.signs) {
            let _ = write!(s, " {}{f}", if *sg < 0.0 { "-" } else { "" });
        }
        s.push('\n');
    }
    write_list(&mut s, "boundary", &mesh.boundary_faces());
    let n = mesh.neumann_faces();
    if !n.is_empty() {
        write_list(&mut s, "neumann", &n);
    }
    s
}

fn write_list(s: &mut String, section: &str, list: &[usize]) {
    let _ = writeln!(s, "{section} {}", list.len());
    for chunk in list.chunks(16) {
        let line: Vec<String> = chunk.iter().map(|f| f.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
}
