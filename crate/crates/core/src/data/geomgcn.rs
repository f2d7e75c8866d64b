//! Reader and writer for the two-file tab-separated dataset layout.
//!
//! `out1_graph_edges.txt`: a header line, then `src<TAB>dst` per line.
//!
//! `out1_node_feature_label.txt`: a header line, then
//! `id<TAB>f1,f2,...<TAB>label` per line. Feature fields are either a dense
//! vector of values or, for some datasets, a list of active feature indices
//! that expands to a multi-hot row.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{Dataset, FeatureTable};
use crate::error::{Error, Result};
use crate::graph::{Graph, LabelVector};

pub const EDGE_FILE: &str = "out1_graph_edges.txt";
pub const NODE_FILE: &str = "out1_node_feature_label.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeatureEncoding {
    /// Dense when every row has the same length, index lists otherwise.
    #[default]
    Auto,
    Dense,
    /// Index lists expanded to multi-hot rows of width `max index + 1`.
    Indices,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

/// Data lines with their 1-based line numbers; the header and blank lines
/// are skipped and `\r` is tolerated.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn parse_num<T: std::str::FromStr>(path: &Path, line: usize, field: &str, what: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, line, format!("cannot parse {what} from {field:?}")))
}

pub fn load_geomgcn_format(edge_file: &Path, node_file: &Path, encoding: FeatureEncoding) -> Result<Dataset> {
    let node_text = read_text(node_file)?;
    let mut rows: Vec<(usize, usize, Vec<&str>, usize)> = Vec::new();
    for (line, text) in data_lines(&node_text) {
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(node_file, line, format!("expected 3 tab-separated fields, found {}", fields.len())));
        }
        let id: usize = parse_num(node_file, line, fields[0], "node id")?;
        let label: usize = parse_num(node_file, line, fields[2], "label")?;
        let feats: Vec<&str> = if fields[1].trim().is_empty() {
            Vec::new()
        } else {
            fields[1].split(',').collect()
        };
        rows.push((line, id, feats, label));
    }
    let n = rows.len();
    let mut seen: Vec<Option<usize>> = vec![None; n];
    for &(line, id, _, _) in &rows {
        if id >= n {
            return Err(Error::parse(node_file, line, format!("node id {id} outside [0, {n}); ids must be 0..n-1")));
        }
        if let Some(prev) = seen[id].replace(line) {
            return Err(Error::parse(node_file, line, format!("node id {id} already defined on line {prev}")));
        }
    }

    let dense = match encoding {
        FeatureEncoding::Dense => true,
        FeatureEncoding::Indices => false,
        FeatureEncoding::Auto => {
            let first = rows.first().map_or(0, |r| r.2.len());
            rows.iter().all(|r| r.2.len() == first)
        }
    };
    let dim = if dense {
        rows.first().map_or(0, |r| r.2.len())
    } else {
        let mut max_index = None;
        for (line, _, feats, _) in &rows {
            for f in feats {
                let idx: usize = parse_num(node_file, *line, f, "feature index")?;
                max_index = max_index.max(Some(idx));
            }
        }
        max_index.map_or(0, |m| m + 1)
    };
    if dim == 0 {
        return Err(Error::Config(format!("{}: no feature columns", node_file.display())));
    }
    let mut values = vec![0f32; n * dim];
    let mut labels = vec![0usize; n];
    for (line, id, feats, label) in &rows {
        let row = &mut values[id * dim..(id + 1) * dim];
        if dense {
            if feats.len() != dim {
                return Err(Error::parse(node_file, *line, format!("expected {dim} features, found {}", feats.len())));
            }
            for (slot, f) in row.iter_mut().zip(feats) {
                *slot = parse_num(node_file, *line, f, "feature value")?;
            }
        } else {
            for f in feats {
                let idx: usize = parse_num(node_file, *line, f, "feature index")?;
                row[idx] = 1.0;
            }
        }
        labels[*id] = *label;
    }

    let edge_text = read_text(edge_file)?;
    let mut edges = Vec::new();
    for (line, text) in data_lines(&edge_text) {
        let mut fields = text.split('\t');
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::parse(edge_file, line, "expected 2 tab-separated fields"));
        };
        let src: usize = parse_num(edge_file, line, a, "source id")?;
        let dst: usize = parse_num(edge_file, line, b, "target id")?;
        if src >= n || dst >= n {
            return Err(Error::parse(
                edge_file,
                line,
                format!("edge ({src}, {dst}) refers to a node outside [0, {n}) (node count mismatch)"),
            ));
        }
        edges.push((src, dst));
    }

    let name = node_file
        .parent()
        .and_then(Path::file_name)
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Dataset::new(
        name,
        Graph::from_edges(&edges, n)?,
        FeatureTable::new(n, dim, values)?,
        LabelVector::from_labels(labels)?,
    )
}

/// Loads `<dir>/out1_graph_edges.txt` and `<dir>/out1_node_feature_label.txt`.
pub fn load_dataset_dir(dir: &Path, encoding: FeatureEncoding) -> Result<Dataset> {
    let mut ds = load_geomgcn_format(&dir.join(EDGE_FILE), &dir.join(NODE_FILE), encoding)?;
    if let Some(name) = dir.file_name() {
        ds.name = name.to_string_lossy().into_owned();
    }
    Ok(ds)
}

/// Writes a dataset in the dense layout; reloading it gives an equal dataset.
pub fn write_geomgcn_format(ds: &Dataset, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let edge_path = dir.join(EDGE_FILE);
    let node_path = dir.join(NODE_FILE);

    let mut out = String::from("node_id\tnode_id\n");
    for (u, v) in ds.graph.edges() {
        out.push_str(&format!("{u}\t{v}\n"));
    }
    write_file(&edge_path, out.as_bytes())?;

    let mut out = String::from("node_id\tfeature\tlabel\n");
    for v in 0..ds.num_nodes() {
        let feats: Vec<String> = ds.features.row(v).iter().map(|x| x.to_string()).collect();
        out.push_str(&format!("{v}\t{}\t{}\n", feats.join(","), ds.labels.get(v)));
    }
    write_file(&node_path, out.as_bytes())?;
    Ok((edge_path, node_path))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    f.write_all(bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}
