//! Superpixel region adjacency graphs stored as graph files.
//!
//! Layout: `<dir>/<index>.graph` per example plus `<dir>/labels.txt` with
//! lines `<index> <label>`.

use std::collections::BTreeMap;
use std::path::Path;

use super::{Dataset, Example, Split};
use crate::error::{Error, Result};
use crate::graph::io::load_graph;

pub fn load_rag_dataset(dir: &Path, split: Split) -> Result<Dataset> {
    let labels_path = dir.join("labels.txt");
    let text = std::fs::read_to_string(&labels_path).map_err(|e| Error::io(&labels_path, e))?;
    let mut labels = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |msg: &str| Error::Parse {
            path: labels_path.clone(),
            line: n + 1,
            msg: msg.to_string(),
        };
        let mut parts = line.split_whitespace();
        let (Some(index), Some(label), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_err("expected `<index> <label>`"));
        };
        let index: u64 = index.parse().map_err(|_| parse_err("bad index"))?;
        let label: usize = label.parse().map_err(|_| parse_err("bad label"))?;
        if labels.insert(index, label).is_some() {
            return Err(parse_err("duplicate index"));
        }
    }

    let mut files = BTreeMap::new();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|s| s.to_str()) != Some("graph") {
            continue;
        }
        let index = path
            .file_stem()
            .and_then(|s| s.to_str())
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| Error::Data(format!("{}: file name is not an index", path.display())))?;
        files.insert(index, path);
    }
    if files.is_empty() {
        return Err(Error::Data(format!("no graph files in {}", dir.display())));
    }

    let mut examples = Vec::with_capacity(files.len());
    for (index, path) in files {
        let label = *labels
            .get(&index)
            .ok_or_else(|| Error::Data(format!("no label for graph {index}")))?;
        examples.push(Example {
            graph: load_graph(&path)?,
            label,
        });
    }
    let num_classes = examples.iter().map(|e| e.label).max().map_or(0, |m| m + 1).max(2);
    Dataset::new(examples, num_classes, split)
}
