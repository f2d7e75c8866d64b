use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::profile::{default_profile, Hyper, SearchSpace};
use crate::data::{make_split, Dataset, SplitFractions, SplitSpec};
use crate::error::{Error, Result};
use crate::features::DeVariant;
use crate::model::{ModelConfig, Network, NodeClassification, Preset, SampleCache};
use crate::nn::{train, Objective, TrainConfig};

pub const DEFAULT_SEARCH_BUDGET: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// Fixed per-dataset settings, no search.
    Default,
    /// Random search with this many trials on the first seed's split.
    Search { budget: usize },
    /// Caller-supplied settings.
    Fixed(Hyper),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub dataset: String,
    pub preset: Preset,
    pub de: Option<DeVariant>,
    pub k: Option<usize>,
    pub hops: Option<usize>,
    pub num_seeds: usize,
    pub base_seed: u64,
    pub profile: Profile,
    /// Overrides the epoch cap of whichever profile is used.
    pub max_epochs: Option<usize>,
    /// Runs seeds concurrently. Results do not depend on this.
    pub parallel: bool,
}

impl ExperimentPlan {
    pub fn new(dataset: &str, preset: Preset, de: Option<DeVariant>) -> Self {
        ExperimentPlan {
            dataset: dataset.to_string(),
            preset,
            de,
            k: None,
            hops: None,
            num_seeds: 10,
            base_seed: 0,
            profile: Profile::Default,
            max_epochs: None,
            parallel: true,
        }
    }

    /// Table label such as `M2-SPD`.
    pub fn model_label(&self) -> String {
        self.preset.label(self.de)
    }

    /// Feature configuration combined with the layer and width settings of `hyper`.
    pub fn model_config(&self, hyper: &Hyper) -> Result<ModelConfig> {
        let mut cfg = ModelConfig::preset(self.preset, self.de)?;
        if let Some(k) = self.k {
            cfg = cfg.with_k(k)?;
        }
        cfg.num_layers = hyper.num_layers;
        cfg.hidden_dim = hyper.hidden_dim;
        cfg.subgraph_hops = self.hops;
        cfg.validate()?;
        Ok(cfg)
    }

    fn train_config(&self, hyper: &Hyper, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: hyper.learning_rate,
            max_epochs: hyper.max_epochs,
            patience: hyper.patience.min(hyper.max_epochs),
            dropout: hyper.dropout,
            weight_decay: hyper.weight_decay,
            seed,
        }
    }

    fn with_epoch_cap(&self, mut hyper: Hyper) -> Hyper {
        if let Some(e) = self.max_epochs {
            hyper.max_epochs = e;
            hyper.patience = hyper.patience.min(e);
        }
        hyper
    }
}

/// Outcome of one training run on one split.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub test_accuracy: f64,
    pub val_accuracy: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub wall_clock_secs: f64,
    /// Per-epoch training log.
    pub log: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub hyper: Hyper,
    /// `Err` holds the failure message of a diverged trial.
    pub val_accuracy: std::result::Result<f64, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub dataset: String,
    pub model: String,
    pub k: Option<usize>,
    pub hops: usize,
    pub hyper: Hyper,
    pub profile: String,
    pub search_budget: usize,
    pub trials: Vec<TrialRecord>,
    pub runs: Vec<RunRecord>,
    pub mean: f64,
    pub stdev: f64,
}

/// Mean and population standard deviation.
pub fn mean_stdev(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Trains one model on one split and evaluates the best-validation snapshot.
pub fn train_once(
    ds: &Dataset,
    split: &SplitSpec,
    config: &ModelConfig,
    hyper: &Hyper,
    plan: &ExperimentPlan,
    seed: u64,
    cache: &SampleCache,
) -> Result<RunRecord> {
    let start = Instant::now();
    let samples = cache.get(&ds.graph, config)?;
    let (network, params) = Network::new(*config, ds.features.dim(), ds.num_classes(), seed)?;
    let objective = NodeClassification::new(&network, &ds.features, &ds.labels, &samples, hyper.dropout)?;
    let outcome = train(&objective, params, &split.train, &split.val, &plan.train_config(hyper, seed))?;
    let test_accuracy = objective.accuracy(&outcome.params, &split.test)?;
    let mut log = String::new();
    let _ = writeln!(log, "# dataset={} model={} seed={seed}", ds.name, plan.model_label());
    let _ = writeln!(log, "# {hyper:?}");
    let _ = writeln!(log, "epoch\ttrain_loss\tval_accuracy");
    for r in &outcome.history {
        let _ = writeln!(log, "{}\t{:.6}\t{:.4}", r.epoch, r.train_loss, r.val_accuracy);
    }
    let wall_clock_secs = start.elapsed().as_secs_f64();
    let _ = writeln!(
        log,
        "# best_epoch={} val_accuracy={:.4} test_accuracy={:.4} wall_clock={:.2}s",
        outcome.best_epoch, outcome.best_val_accuracy, test_accuracy, wall_clock_secs
    );
    Ok(RunRecord {
        seed,
        test_accuracy,
        val_accuracy: outcome.best_val_accuracy,
        best_epoch: outcome.best_epoch,
        epochs_run: outcome.history.len(),
        wall_clock_secs,
        log,
    })
}

/// Random search over `space`, evaluated on `split`'s validation set.
///
/// Trials are drawn from a generator seeded with `search_seed`; the first
/// trial with the highest validation accuracy wins.
pub fn hyperparameter_search(
    plan: &ExperimentPlan,
    ds: &Dataset,
    split: &SplitSpec,
    space: &SearchSpace,
    budget: usize,
    search_seed: u64,
    cache: &SampleCache,
) -> Result<(Hyper, Vec<TrialRecord>)> {
    space.validate()?;
    if budget == 0 {
        return Err(Error::Config("search budget must be at least 1".into()));
    }
    if split.val.is_empty() {
        return Err(Error::Config("hyper-parameter search needs a validation set".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(search_seed);
    let candidates: Vec<Hyper> = (0..budget).map(|_| plan.with_epoch_cap(space.sample(&mut rng))).collect();
    let eval = |hyper: &Hyper| -> TrialRecord {
        let outcome = plan
            .model_config(hyper)
            .and_then(|cfg| train_once(ds, split, &cfg, hyper, plan, search_seed, cache));
        TrialRecord {
            hyper: *hyper,
            val_accuracy: outcome.map(|r| r.val_accuracy).map_err(|e| e.to_string()),
        }
    };
    let trials: Vec<TrialRecord> = if plan.parallel {
        candidates.par_iter().map(eval).collect()
    } else {
        candidates.iter().map(eval).collect()
    };
    let mut best: Option<(f64, Hyper)> = None;
    for t in &trials {
        if let Ok(acc) = t.val_accuracy {
            if best.is_none_or(|(b, _)| acc > b) {
                best = Some((acc, t.hyper));
            }
        }
    }
    match best {
        Some((_, hyper)) => Ok((hyper, trials)),
        None => {
            let mut msg = String::new();
            for (i, t) in trials.iter().enumerate() {
                let _ = write!(msg, "\n  trial {i} {:?}: {}", t.hyper, t.val_accuracy.as_ref().unwrap_err());
            }
            Err(Error::AllTrialsDiverged(msg))
        }
    }
}

/// Runs the plan: one fresh split per seed (`base_seed + i`), training with
/// early stopping, test accuracy of the best-validation snapshot.
///
/// Per-target samples come from `cache` and are shared read-only by every
/// seed and every trial. `on_run` sees each finished run as soon as it
/// completes, so callers can persist partial results if a later seed fails.
pub fn run_benchmark(
    plan: &ExperimentPlan,
    ds: &Dataset,
    cache: &SampleCache,
    on_run: &(dyn Fn(&RunRecord) + Sync),
) -> Result<ExperimentResult> {
    if plan.num_seeds == 0 {
        return Err(Error::Config("need at least one seed".into()));
    }
    let seeds: Vec<u64> = (0..plan.num_seeds as u64).map(|i| plan.base_seed + i).collect();
    let splits = seeds
        .iter()
        .map(|&s| make_split(&ds.labels, SplitFractions::default(), s))
        .collect::<Result<Vec<_>>>()?;

    let (hyper, trials, profile_name, budget) = match &plan.profile {
        Profile::Default => (plan.with_epoch_cap(default_profile(&ds.name, plan.preset)), Vec::new(), "default", 0),
        Profile::Fixed(h) => (plan.with_epoch_cap(*h), Vec::new(), "fixed", 0),
        Profile::Search { budget } => {
            let space = SearchSpace::for_preset(plan.preset);
            let (h, t) = hyperparameter_search(plan, ds, &splits[0], &space, *budget, seeds[0], cache)?;
            (h, t, "search", *budget)
        }
    };
    let config = plan.model_config(&hyper)?;
    let run = |(seed, split): (&u64, &SplitSpec)| {
        let record = train_once(ds, split, &config, &hyper, plan, *seed, cache)?;
        on_run(&record);
        Ok(record)
    };
    let runs: Vec<RunRecord> = if plan.parallel {
        seeds.par_iter().zip(splits.par_iter()).map(run).collect::<Result<_>>()?
    } else {
        seeds.iter().zip(splits.iter()).map(run).collect::<Result<_>>()?
    };
    let accs: Vec<f64> = runs.iter().map(|r| r.test_accuracy).collect();
    let (mean, stdev) = mean_stdev(&accs);
    Ok(ExperimentResult {
        dataset: ds.name.clone(),
        model: plan.model_label(),
        k: config.de.map(|d| d.k),
        hops: config.hops(),
        hyper,
        profile: profile_name.to_string(),
        search_budget: budget,
        trials,
        runs,
        mean,
        stdev,
    })
}
