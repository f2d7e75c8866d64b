//! Converters from public citation-network mirrors into [`Dataset`].
//!
//! Supported inputs:
//! * LINQS text (`<name>.content` + `<name>.cites`, Cora / Citeseer),
//! * the Pubmed-Diabetes tab files (`*.NODE.paper.tab` + `*.DIRECTED.cites.tab`),
//! * a plain JSON object `{"features": [[..]], "labels": [..], "edges": [[u, v], ..]}`.
//!
//! Node ids are assigned in file order. String class names are mapped to
//! class ids in sorted order. Citations that mention unknown papers are
//! dropped.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::Deserialize;

use super::{Dataset, FeatureTable};
use crate::error::{Error, Result};
use crate::graph::{Graph, LabelVector};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

fn class_ids(names: &[String]) -> Vec<usize> {
    let sorted: BTreeSet<&String> = names.iter().collect();
    let index: HashMap<&String, usize> = sorted.into_iter().enumerate().map(|(i, s)| (s, i)).collect();
    names.iter().map(|n| index[n]).collect()
}

fn finish(name: &str, rows: Vec<Vec<f64>>, class_names: Vec<String>, edges: Vec<(usize, usize)>) -> Result<Dataset> {
    let n = rows.len();
    Dataset::new(
        name.to_string(),
        Graph::from_edges(&edges, n)?,
        FeatureTable::from_rows(&rows)?,
        LabelVector::from_labels(class_ids(&class_names))?,
    )
}

pub fn convert_linqs(content: &Path, cites: &Path, name: &str) -> Result<Dataset> {
    let text = read(content)?;
    let mut ids = HashMap::new();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut dim = None;
    for (i, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() < 3 {
            return Err(Error::parse(content, i + 1, "expected `<id> <features...> <label>`"));
        }
        let feats = &fields[1..fields.len() - 1];
        if *dim.get_or_insert(feats.len()) != feats.len() {
            return Err(Error::parse(content, i + 1, format!("expected {} features, found {}", dim.unwrap(), feats.len())));
        }
        let row = feats
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| Error::parse(content, i + 1, format!("bad feature {f:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if ids.insert(fields[0].to_string(), rows.len()).is_some() {
            return Err(Error::parse(content, i + 1, format!("duplicate paper id {}", fields[0])));
        }
        rows.push(row);
        labels.push(fields[fields.len() - 1].to_string());
    }
    let text = read(cites)?;
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            [] => continue,
            [a, b] => {
                if let (Some(&u), Some(&v)) = (ids.get(*a), ids.get(*b)) {
                    edges.push((u, v));
                }
            }
            _ => return Err(Error::parse(cites, i + 1, "expected `<cited> <citing>`")),
        }
    }
    finish(name, rows, labels, edges)
}

pub fn convert_pubmed_tab(nodes: &Path, cites: &Path, name: &str) -> Result<Dataset> {
    let text = read(nodes)?;
    let mut lines = text.lines().enumerate();
    lines.next();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(nodes, 2, "missing feature header line"))?;
    let mut columns = HashMap::new();
    for field in header.split('\t').skip(1) {
        // "numeric:w-rat:0.0"
        let mut parts = field.split(':');
        if let (Some("numeric"), Some(feature)) = (parts.next(), parts.next()) {
            let next = columns.len();
            columns.entry(feature.to_string()).or_insert(next);
        }
    }
    let dim = columns.len();
    let mut ids = HashMap::new();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in lines {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 || fields[0].trim().is_empty() {
            continue;
        }
        let mut row = vec![0.0; dim];
        let mut label = None;
        for field in &fields[1..] {
            let Some((key, value)) = field.split_once('=') else { continue };
            if key == "label" {
                label = Some(value.to_string());
            } else if let Some(&col) = columns.get(key) {
                row[col] = value
                    .parse()
                    .map_err(|_| Error::parse(nodes, i + 1, format!("bad value for {key}: {value:?}")))?;
            }
        }
        let label = label.ok_or_else(|| Error::parse(nodes, i + 1, "missing label= field"))?;
        ids.insert(fields[0].to_string(), rows.len());
        rows.push(row);
        labels.push(label);
    }
    let text = read(cites)?;
    let mut edges = Vec::new();
    for line in text.lines().skip(2) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 4 {
            continue;
        }
        let a = fields[1].trim_start_matches("paper:");
        let b = fields[3].trim_start_matches("paper:");
        if let (Some(&u), Some(&v)) = (ids.get(a), ids.get(b)) {
            edges.push((u, v));
        }
    }
    finish(name, rows, labels, edges)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonLabel {
    Id(usize),
    Name(String),
}

#[derive(Deserialize)]
struct JsonDataset {
    features: Vec<Vec<f64>>,
    labels: Vec<JsonLabel>,
    edges: Vec<(usize, usize)>,
}

pub fn convert_json(path: &Path, name: &str) -> Result<Dataset> {
    let text = read(path)?;
    let parsed: JsonDataset = serde_json::from_str(&text)
        .map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
    let numeric = parsed.labels.iter().all(|l| matches!(l, JsonLabel::Id(_)));
    let n = parsed.features.len();
    if let Some(&(u, v)) = parsed.edges.iter().find(|&&(u, v)| u >= n || v >= n) {
        return Err(Error::EdgeOutOfRange { src: u, dst: v, num_nodes: n });
    }
    if numeric {
        let labels = parsed
            .labels
            .iter()
            .map(|l| match l {
                JsonLabel::Id(i) => *i,
                JsonLabel::Name(_) => unreachable!(),
            })
            .collect();
        Dataset::new(
            name.to_string(),
            Graph::from_edges(&parsed.edges, n)?,
            FeatureTable::from_rows(&parsed.features)?,
            LabelVector::from_labels(labels)?,
        )
    } else {
        let names = parsed
            .labels
            .iter()
            .map(|l| match l {
                JsonLabel::Id(i) => i.to_string(),
                JsonLabel::Name(s) => s.clone(),
            })
            .collect();
        finish(name, parsed.features, names, parsed.edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linqs_text() {
        let tmp = tempfile::tempdir().unwrap();
        let content = tmp.path().join("toy.content");
        let cites = tmp.path().join("toy.cites");
        std::fs::write(&content, "p10 1 0 1 Theory\np7 0 0 1 AI\np3 1 1 0 Theory\n").unwrap();
        std::fs::write(&cites, "p10 p7\np7 p10\np3 p99\np3 p10\n").unwrap();
        let ds = convert_linqs(&content, &cites, "toy").unwrap();
        assert_eq!(ds.num_nodes(), 3);
        assert_eq!(ds.graph.num_edges(), 2);
        assert_eq!(ds.labels.labels(), &[1, 0, 1]);
        assert_eq!(ds.features.row(2), &[1.0, 1.0, 0.0]);
    }

    #[test]
    fn pubmed_tab() {
        let tmp = tempfile::tempdir().unwrap();
        let nodes = tmp.path().join("nodes.tab");
        let cites = tmp.path().join("cites.tab");
        std::fs::write(
            &nodes,
            "NODE\tpaper\ncat=1,2,3:label\tnumeric:w-a:0.0\tnumeric:w-b:0.0\tstring:summary\n\
             11\tlabel=2\tw-b=0.5\tsummary=w-b\n22\tlabel=1\tw-a=0.25\tw-b=0.1\tsummary=w-a,w-b\n",
        )
        .unwrap();
        std::fs::write(&cites, "DIRECTED\tcites\nNO_FEATURES\n1\tpaper:11\t|\tpaper:22\n").unwrap();
        let ds = convert_pubmed_tab(&nodes, &cites, "pm").unwrap();
        assert_eq!(ds.features.dim(), 2);
        assert_eq!(ds.features.row(0), &[0.0, 0.5]);
        assert_eq!(ds.labels.labels(), &[1, 0]);
        assert_eq!(ds.graph.num_edges(), 1);
    }

    #[test]
    fn json_mirror() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("g.json");
        std::fs::write(&path, r#"{"features": [[1, 0], [0, 1], [1, 1]], "labels": [0, 1, 1], "edges": [[0, 1], [2, 1]]}"#).unwrap();
        let ds = convert_json(&path, "g").unwrap();
        assert_eq!(ds.graph.num_edges(), 2);
        assert_eq!(ds.num_classes(), 2);
        std::fs::write(&path, r#"{"features": [[1], [0]], "labels": ["b", "a"], "edges": [[0, 5]]}"#).unwrap();
        assert!(convert_json(&path, "g").is_err());
    }
}
