pub mod evaluate;
pub mod interleave;
pub mod recommend;
pub mod report;
pub mod sample;
pub mod stats;
pub mod synth;

use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;

use fedrec::io::write_atomic;
use fedrec::{load_edge_list, DirectedGraph};

use crate::error::{data, runtime, CliError};

pub fn read_graph(path: &Path) -> Result<DirectedGraph, CliError> {
    let file =
        File::open(path).map_err(|e| data(format!("cannot open {}: {e}", path.display())))?;
    let (g, _) = load_edge_list(BufReader::new(file))
        .map_err(|e| data(format!("{}: {e}", path.display())))?;
    Ok(g)
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| data(format!("cannot read {}: {e}", path.display())))
}

/// Visited keys from a sample manifest (`visited` array) or a plain list
/// with one key per line.
pub fn read_visited(path: &Path) -> Result<Vec<String>, CliError> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('{') {
        let doc: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| data(format!("{}: {e}", path.display())))?;
        let list = doc
            .get("visited")
            .and_then(|v| v.as_array())
            .ok_or_else(|| data(format!("{}: no `visited` array", path.display())))?;
        list.iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_owned)
                    .ok_or_else(|| data(format!("{}: non-string visited key", path.display())))
            })
            .collect()
    } else {
        Ok(text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_owned)
            .collect())
    }
}

/// Loads a graph and, when given, restricts its visited flags.
pub fn read_graph_visited(path: &Path, visited: Option<&Path>) -> Result<DirectedGraph, CliError> {
    let g = read_graph(path)?;
    match visited {
        None => Ok(g),
        Some(v) => {
            let keys = read_visited(v)?;
            Ok(g.with_visited(keys.iter().map(String::as_str)))
        }
    }
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| runtime(format!("cannot create {}: {e}", dir.display())))?;
    }
    write_atomic(path, contents)
        .map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

pub fn json_pretty<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

pub fn edge_list_bytes(g: &DirectedGraph) -> Vec<u8> {
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf).expect("writing to memory");
    buf
}
