//! Line-oriented text format for attributed graphs.
//!
//! ```text
//! graph <num_vertices> <num_edges> <d_v> <d_e>
//! v <id> <a_1> ... <a_dv>
//! e <id1> <id2> <b_1> ... <b_de>
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Floats are written
//! with Rust's shortest round-trip representation, so `load(save(g)) == g`
//! bit for bit.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{AttributedGraph, VertexId};
use crate::error::{Error, Result};

pub fn load_graph(path: impl AsRef<Path>) -> Result<AttributedGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_graph(&text, path)
}

pub fn save_graph(graph: &AttributedGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_graph(graph)).map_err(|e| Error::io(path, e))
}

pub fn format_graph(graph: &AttributedGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "graph {} {} {} {}",
        graph.num_vertices(),
        graph.num_edges(),
        graph.vertex_dim(),
        graph.edge_dim()
    );
    for i in 0..graph.num_vertices() {
        let _ = write!(out, "v {}", graph.id(i));
        for x in graph.vertex_attr(i) {
            let _ = write!(out, " {x}");
        }
        out.push('\n');
    }
    for (e, &(a, b)) in graph.edges().iter().enumerate() {
        let _ = write!(out, "e {} {}", graph.id(a), graph.id(b));
        for x in graph.edge_attr(e) {
            let _ = write!(out, " {x}");
        }
        out.push('\n');
    }
    out
}

/// Parses the text format; `origin` is only used in error messages.
pub fn parse_graph(text: &str, origin: &Path) -> Result<AttributedGraph> {
    let err = |line: usize, msg: String| Error::Parse {
        path: PathBuf::from(origin),
        line,
        msg,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines
        .next()
        .ok_or_else(|| err(1, "missing `graph` header".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "graph" {
        return Err(err(
            hline,
            "header must be `graph <num_vertices> <num_edges> <d_v> <d_e>`".into(),
        ));
    }
    let mut counts = [0usize; 4];
    for (slot, (name, raw)) in counts.iter_mut().zip(
        ["num_vertices", "num_edges", "d_v", "d_e"]
            .iter()
            .zip(&fields[1..]),
    ) {
        *slot = raw
            .parse()
            .map_err(|_| err(hline, format!("{name}: `{raw}` is not a non-negative integer")))?;
    }
    let [nv, ne, dv, de] = counts;
    if dv == 0 {
        return Err(err(hline, "d_v must be at least 1".into()));
    }

    let mut vertices = Vec::with_capacity(nv);
    let mut edges = Vec::with_capacity(ne);
    let mut vertex_lines = std::collections::HashMap::with_capacity(nv);
    for (lineno, line) in lines {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                if !edges.is_empty() {
                    return Err(err(lineno, "vertex line after edge lines".into()));
                }
                let id = parse_id(tok.next(), lineno, "vertex id", &err)?;
                let attr = parse_floats(tok, dv, lineno, "vertex attribute", &err)?;
                if vertex_lines.insert(id, lineno).is_some() {
                    return Err(err(lineno, format!("duplicate vertex id {id}")));
                }
                vertices.push((id, attr));
            }
            Some("e") => {
                let a = parse_id(tok.next(), lineno, "edge endpoint", &err)?;
                let b = parse_id(tok.next(), lineno, "edge endpoint", &err)?;
                for id in [a, b] {
                    if !vertex_lines.contains_key(&id) {
                        return Err(err(
                            lineno,
                            format!("edge endpoint {id} is not a declared vertex"),
                        ));
                    }
                }
                let attr = parse_floats(tok, de, lineno, "edge attribute", &err)?;
                edges.push((a, b, attr, lineno));
            }
            Some(other) => return Err(err(lineno, format!("unknown record type `{other}`"))),
            None => unreachable!("blank lines are filtered"),
        }
    }
    if vertices.len() != nv {
        return Err(err(
            hline,
            format!("header declares {nv} vertices, file has {}", vertices.len()),
        ));
    }
    if edges.len() != ne {
        return Err(err(
            hline,
            format!("header declares {ne} edges, file has {}", edges.len()),
        ));
    }
    let mut seen = std::collections::HashSet::with_capacity(ne);
    for (a, b, _, lineno) in &edges {
        if a == b {
            return Err(err(*lineno, format!("self-loop on vertex {a}")));
        }
        if !seen.insert(((*a).min(*b), (*a).max(*b))) {
            return Err(err(*lineno, format!("duplicate edge {a}-{b}")));
        }
    }
    let edges = edges.into_iter().map(|(a, b, attr, _)| (a, b, attr)).collect();
    AttributedGraph::new(dv, de, vertices, edges).map_err(|e| err(hline, e.to_string()))
}

fn parse_id(
    raw: Option<&str>,
    line: usize,
    what: &str,
    err: &impl Fn(usize, String) -> Error,
) -> Result<VertexId> {
    let raw = raw.ok_or_else(|| err(line, format!("missing {what}")))?;
    raw.parse()
        .map_err(|_| err(line, format!("{what}: `{raw}` is not a vertex id")))
}

fn parse_floats<'a>(
    tok: impl Iterator<Item = &'a str>,
    expected: usize,
    line: usize,
    what: &str,
    err: &impl Fn(usize, String) -> Error,
) -> Result<Vec<f64>> {
    let values = tok
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| err(line, format!("{what}: `{t}` is not a finite decimal")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != expected {
        return Err(err(
            line,
            format!("{what}: expected {expected} values, found {}", values.len()),
        ));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<AttributedGraph> {
        parse_graph(text, Path::new("test.graph"))
    }

    #[test]
    fn single_vertex_round_trip() {
        let g = AttributedGraph::new(1, 0, vec![(3, vec![0.25])], vec![]).unwrap();
        assert_eq!(parse(&format_graph(&g)).unwrap(), g);
    }

    #[test]
    fn awkward_floats_round_trip() {
        let g = AttributedGraph::new(
            2,
            1,
            vec![(0, vec![0.1 + 0.2, -1e-300]), (1, vec![f64::MAX, 5e-324])],
            vec![(1, 0, vec![std::f64::consts::PI])],
        )
        .unwrap();
        let back = parse(&format_graph(&g)).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.vertex_attr(0)[0].to_bits(), (0.1f64 + 0.2).to_bits());
    }

    #[test]
    fn dangling_edge_names_line() {
        let e = parse("graph 1 1 1 0\nv 0 1\ne 0 4\n").unwrap_err();
        match e {
            Error::Parse { line, msg, .. } => {
                assert_eq!(line, 3);
                assert!(msg.contains("4"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse("").is_err());
        assert!(parse("graph 1 0 1\nv 0 1\n").is_err());
        assert!(parse("graph 1 0 1 0\nv 0 1 2\n").is_err());
        assert!(parse("graph 2 0 1 0\nv 0 1\n").is_err());
        assert!(parse("graph 1 0 1 0\nv 0 nan\n").is_err());
        assert!(parse("graph 2 1 1 0\nv 0 1\nv 1 1\ne 0 1 7\n").is_err());
        assert!(parse("graph 2 1 1 0\nv 0 1\nv 1 1\nx 0 1\n").is_err());
        assert!(parse("graph 2 2 1 0\nv 0 1\nv 1 1\ne 0 1\ne 1 0\n").is_err());
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let g = parse("# grid\ngraph 2 1 1 2\n\nv 0 1\nv 1 0.5\ne 0 1 1 0\n").unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.edge_attr(0), &[1.0, 0.0]);
    }
}
