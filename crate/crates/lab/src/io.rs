//! Graph and disorder files.
//!
//! Graph files are plain text: a line `n m b`, then `m` lines `u v`, then `b`
//! lines naming the boundary vertices. Blank lines and `#` comments are
//! ignored. Disorder files are CSV with header `edge_index,u,v,J`.

use std::io::{BufRead, Write};

use ea_core::disorder::Disorder;
use ea_core::lattice::{LatticeGraph, VertexSet};

use crate::record::fmt_f64;
use crate::{LabError, Result};

pub fn write_graph<W: Write>(g: &LatticeGraph, mut out: W) -> Result<()> {
    let io = |e| LabError::io("graph", e);
    writeln!(out, "{} {} {}", g.n_vertices(), g.n_edges(), g.boundary().len()).map_err(io)?;
    for &(u, v) in g.edges() {
        writeln!(out, "{u} {v}").map_err(io)?;
    }
    for b in g.boundary().iter() {
        writeln!(out, "{b}").map_err(io)?;
    }
    Ok(())
}

pub fn read_graph<R: BufRead>(input: R, name: &str) -> Result<LatticeGraph> {
    let mut lines = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line.map_err(|e| LabError::io(name, e))?;
        let body = line.split('#').next().unwrap_or("").trim().to_string();
        if !body.is_empty() {
            lines.push((k + 1, body));
        }
    }
    let fail = |line: usize, message: String| LabError::Format { path: name.into(), line, message };
    let numbers = |(line, body): &(usize, String), want: usize| -> Result<Vec<usize>> {
        let parsed: Vec<usize> = body
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| fail(*line, format!("`{t}` is not a count"))))
            .collect::<Result<_>>()?;
        if parsed.len() != want {
            return Err(fail(*line, format!("expected {want} numbers, found {}", parsed.len())));
        }
        Ok(parsed)
    };
    let first = lines.first().ok_or_else(|| fail(1, "empty graph file".into()))?;
    let head = numbers(first, 3)?;
    let (n, m, b) = (head[0], head[1], head[2]);
    if lines.len() != 1 + m + b {
        return Err(fail(first.0, format!("expected {} data lines, found {}", m + b, lines.len() - 1)));
    }
    let edges: Vec<(usize, usize)> = lines[1..=m]
        .iter()
        .map(|l| numbers(l, 2).map(|x| (x[0], x[1])))
        .collect::<Result<_>>()?;
    let boundary: Vec<usize> = lines[m + 1..].iter().map(|l| numbers(l, 1).map(|x| x[0])).collect::<Result<_>>()?;
    Ok(LatticeGraph::explicit(n, &edges, VertexSet::new(boundary))?)
}

pub fn write_disorder<W: Write>(g: &LatticeGraph, j: &Disorder, out: W) -> Result<()> {
    j.check_graph(g)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["edge_index", "u", "v", "J"])?;
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        w.write_record([e.to_string(), u.to_string(), v.to_string(), fmt_f64(j.get(e))])?;
    }
    w.flush().map_err(|e| LabError::io("disorder", e))?;
    Ok(())
}

/// Reads couplings and checks every row against the edge list of `g`.
pub fn read_disorder<R: std::io::Read>(g: &LatticeGraph, input: R, name: &str) -> Result<Disorder> {
    let mut reader = csv::Reader::from_reader(input);
    let mut couplings = vec![f64::NAN; g.n_edges()];
    let mut seen = vec![false; g.n_edges()];
    for (k, row) in reader.deserialize::<(usize, usize, usize, f64)>().enumerate() {
        let line = k + 2;
        let fail = |message: String| LabError::Format { path: name.into(), line, message };
        let (e, u, v, w) = row.map_err(|err| fail(err.to_string()))?;
        if e >= g.n_edges() || g.edge(e) != (u.min(v), u.max(v)) {
            return Err(fail(format!("edge {e} = {{{u},{v}}} is not in the graph")));
        }
        if std::mem::replace(&mut seen[e], true) {
            return Err(fail(format!("edge {e} listed twice")));
        }
        couplings[e] = w;
    }
    if let Some(e) = seen.iter().position(|&s| !s) {
        return Err(LabError::Format { path: name.into(), line: 0, message: format!("edge {e} has no coupling") });
    }
    Ok(Disorder::from_couplings(couplings)?)
}
