//! Datasets: loading, writing, stratified splits and summary statistics.

mod convert;
mod features;
mod geomgcn;
mod split;

pub use convert::{convert_json, convert_linqs, convert_pubmed_tab};
pub use features::FeatureTable;
pub use geomgcn::{
    load_dataset_dir, load_geomgcn_format, write_geomgcn_format, FeatureEncoding, EDGE_FILE, NODE_FILE,
};
pub use split::{make_split, SplitFractions, SplitSpec};

use crate::error::{Error, Result};
use crate::graph::{homophily_ratio, Graph, LabelVector};

/// Graph, raw node features and labels of one benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub graph: Graph,
    pub features: FeatureTable,
    pub labels: LabelVector,
}

impl Dataset {
    pub fn new(name: String, graph: Graph, features: FeatureTable, labels: LabelVector) -> Result<Self> {
        let n = graph.num_nodes();
        if features.num_rows() != n {
            return Err(Error::LengthMismatch {
                what: "feature rows",
                expected: n,
                actual: features.num_rows(),
            });
        }
        if labels.len() != n {
            return Err(Error::LengthMismatch {
                what: "labels",
                expected: n,
                actual: labels.len(),
            });
        }
        if features.dim() == 0 {
            return Err(Error::Config("datasets need at least one feature column".into()));
        }
        Ok(Dataset {
            name,
            graph,
            features,
            labels,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    pub fn num_classes(&self) -> usize {
        self.labels.num_classes()
    }
}

/// Summary statistics in the layout of the usual dataset table.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub name: String,
    pub num_nodes: usize,
    pub num_edges: usize,
    pub num_features: usize,
    pub num_classes: usize,
    pub homophily: f64,
}

pub fn dataset_report(ds: &Dataset) -> Result<DatasetStats> {
    Ok(DatasetStats {
        name: ds.name.clone(),
        num_nodes: ds.num_nodes(),
        num_edges: ds.graph.num_edges(),
        num_features: ds.features.dim(),
        num_classes: ds.num_classes(),
        homophily: homophily_ratio(&ds.graph, &ds.labels)?,
    })
}

impl DatasetStats {
    pub const HEADER: &'static str = "dataset\tnodes\tedges\tfeatures\tclasses\thomophily";

    pub fn to_row(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{:.2}",
            self.name, self.num_nodes, self.num_edges, self.num_features, self.num_classes, self.homophily
        )
    }
}
