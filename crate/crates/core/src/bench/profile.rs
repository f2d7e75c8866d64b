use rand::Rng;

use crate::error::{Error, Result};
use crate::model::Preset;

/// Everything about one training run that is not the feature configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper {
    pub num_layers: usize,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub dropout: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub patience: usize,
}

/// Canonical dataset name: lowercase, with `film` folded into `actor`.
pub fn canonical_name(name: &str) -> String {
    let lower = name.trim().to_ascii_lowercase();
    match lower.as_str() {
        "film" => "actor".to_string(),
        _ => lower,
    }
}

/// Final settings used for the benchmark tables.
///
/// Hidden units: 32 for Cora, Pubmed and Chameleon, 64 for Citeseer and
/// WebKB, 256 for Actor. Two SAGE layers for Cora, Citeseer and Actor, one
/// elsewhere. `lr = 1e-4`, patience 50, 500 epochs, weight decay `1e-6`.
/// Dropout 0.4 for Cora, Chameleon and Pubmed, 0.2 otherwise. The MLP
/// (M6) trains without dropout and with at most 128 hidden units.
pub fn default_profile(dataset: &str, preset: Preset) -> Hyper {
    let name = canonical_name(dataset);
    let hidden_dim = match name.as_str() {
        "cora" | "pubmed" | "chameleon" => 32,
        "actor" => 256,
        _ => 64,
    };
    let num_layers = match name.as_str() {
        "cora" | "citeseer" | "actor" => 2,
        _ => 1,
    };
    let dropout = match name.as_str() {
        "cora" | "chameleon" | "pubmed" => 0.4,
        _ => 0.2,
    };
    let mut hyper = Hyper {
        num_layers,
        hidden_dim,
        learning_rate: 1e-4,
        dropout,
        weight_decay: 1e-6,
        max_epochs: 500,
        patience: 50,
    };
    if preset == Preset::M6 {
        hyper.dropout = 0.0;
        hyper.hidden_dim = hyper.hidden_dim.min(128);
    }
    hyper
}

/// Random-search space. Learning rate is drawn log-uniformly, dropout
/// uniformly, the rest from their lists.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub num_layers: Vec<usize>,
    pub hidden_dim: Vec<usize>,
    pub learning_rate: (f64, f64),
    pub dropout: (f64, f64),
    pub weight_decay: Vec<f64>,
    pub max_epochs: usize,
    pub patience: usize,
}

impl SearchSpace {
    pub fn sage() -> Self {
        SearchSpace {
            num_layers: vec![1, 2, 3],
            hidden_dim: vec![32, 64, 128, 256],
            learning_rate: (1e-5, 1e-3),
            dropout: (0.1, 0.9),
            weight_decay: vec![1e-6, 1e-5, 5e-5],
            max_epochs: 500,
            patience: 50,
        }
    }

    /// MLP space: no dropout and at most 128 hidden units.
    pub fn mlp() -> Self {
        SearchSpace {
            num_layers: vec![1],
            hidden_dim: vec![32, 64, 128],
            dropout: (0.0, 0.0),
            ..Self::sage()
        }
    }

    pub fn for_preset(preset: Preset) -> Self {
        if preset == Preset::M6 {
            Self::mlp()
        } else {
            Self::sage()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.learning_rate;
        if self.num_layers.is_empty() || self.hidden_dim.is_empty() || self.weight_decay.is_empty() {
            return Err(Error::Config("search space has an empty choice list".into()));
        }
        if !(lo > 0.0 && lo <= hi) || !(0.0 <= self.dropout.0 && self.dropout.0 <= self.dropout.1 && self.dropout.1 < 1.0) {
            return Err(Error::Config("search space ranges are invalid".into()));
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Hyper {
        let (lo, hi) = self.learning_rate;
        let learning_rate = if lo == hi {
            lo
        } else {
            (rng.random_range(lo.ln()..hi.ln())).exp()
        };
        let dropout = if self.dropout.0 == self.dropout.1 {
            self.dropout.0
        } else {
            rng.random_range(self.dropout.0..self.dropout.1)
        };
        Hyper {
            num_layers: self.num_layers[rng.random_range(0..self.num_layers.len())],
            hidden_dim: self.hidden_dim[rng.random_range(0..self.hidden_dim.len())],
            learning_rate,
            dropout,
            weight_decay: self.weight_decay[rng.random_range(0..self.weight_decay.len())],
            max_epochs: self.max_epochs,
            patience: self.patience,
        }
    }

    pub fn contains(&self, h: &Hyper) -> bool {
        self.num_layers.contains(&h.num_layers)
            && self.hidden_dim.contains(&h.hidden_dim)
            && (self.learning_rate.0..=self.learning_rate.1).contains(&h.learning_rate)
            && (self.dropout.0..=self.dropout.1).contains(&h.dropout)
            && self.weight_decay.contains(&h.weight_decay)
    }
}
