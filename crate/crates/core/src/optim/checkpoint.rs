//! Text checkpoints: a versioned header with the model shape, then one
//! weight per line. Floats are written in shortest round-trip form, so a
//! loaded model equals the saved one exactly.

use std::path::Path;

use crate::error::{Error, Result};
use crate::layers::Theta;
use crate::model::{Model, ModelConfig};

const MAGIC: &str = "matchconv-checkpoint";
const VERSION: u32 = 1;

pub fn format_checkpoint(model: &Model) -> String {
    let c = model.config();
    let mut out = format!("{MAGIC} {VERSION}\n");
    let filters: Vec<String> = c.filters.iter().map(|f| f.to_string()).collect();
    out += &format!("filters {}\n", filters.join(" "));
    out += &format!("filter_vertices {}\n", c.filter_vertices);
    out += &format!("hops {}\n", c.hops);
    out += &format!("theta {}\n", c.theta);
    out += &format!("edge_matching {}\n", c.edge_matching);
    out += &format!("activation {}\n", c.activation);
    out += &format!("input_vertex_dim {}\n", c.input_vertex_dim);
    out += &format!("input_edge_dim {}\n", c.input_edge_dim);
    out += &format!("num_classes {}\n", c.num_classes);
    let params = model.params();
    out += &format!("params {}\n", params.len());
    for p in params {
        out += &format!("{p}\n");
    }
    out
}

pub fn save_checkpoint(model: &Model, path: &Path) -> Result<()> {
    std::fs::write(path, format_checkpoint(model)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_checkpoint(&text, path)
}

pub fn parse_checkpoint(text: &str, origin: &Path) -> Result<Model> {
    let mut lines = text.lines().enumerate();
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line: line + 1,
        msg,
    };
    let mut field = |key: &str| -> Result<(usize, String)> {
        let (n, line) = lines
            .next()
            .ok_or_else(|| err(text.lines().count(), format!("missing `{key}`")))?;
        let rest = line
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| err(n, format!("expected `{key} ...`")))?;
        Ok((n, rest.to_string()))
    };
    fn value<T: std::str::FromStr>(
        (n, s): (usize, String),
        err: &dyn Fn(usize, String) -> Error,
    ) -> Result<T> {
        s.trim().parse().map_err(|_| err(n, format!("bad value `{s}`")))
    }

    let (n, version) = field(MAGIC)?;
    if version != VERSION.to_string() {
        return Err(err(n, format!("unsupported checkpoint version {version}")));
    }
    let (n, filters) = field("filters")?;
    let filters = filters
        .split_whitespace()
        .map(|f| {
            f.parse::<usize>()
                .map_err(|_| err(n, format!("bad filter count `{f}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let config = ModelConfig {
        filters,
        filter_vertices: value(field("filter_vertices")?, &err)?,
        hops: value(field("hops")?, &err)?,
        theta: {
            let (n, s) = field("theta")?;
            s.parse::<Theta>().map_err(|e| err(n, e.to_string()))?
        },
        edge_matching: value(field("edge_matching")?, &err)?,
        activation: value(field("activation")?, &err)?,
        input_vertex_dim: value(field("input_vertex_dim")?, &err)?,
        input_edge_dim: value(field("input_edge_dim")?, &err)?,
        num_classes: value(field("num_classes")?, &err)?,
    };
    let (n, count) = field("params")?;
    let count: usize = value((n, count), &err)?;
    let mut params = Vec::with_capacity(count);
    for (n, line) in lines.by_ref() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let p: f64 = line.parse().map_err(|_| err(n, format!("bad weight `{line}`")))?;
        if !p.is_finite() {
            return Err(err(n, "non-finite weight".into()));
        }
        params.push(p);
    }
    let mut model = Model::new(config).map_err(|e| err(0, e.to_string()))?;
    if params.len() != count || count != model.num_params() {
        return Err(err(
            text.lines().count(),
            format!(
                "checkpoint lists {} weights (header says {count}), model needs {}",
                params.len(),
                model.num_params()
            ),
        ));
    }
    model.set_params(&params)?;
    Ok(model)
}
