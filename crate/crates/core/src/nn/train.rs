use super::params::{adam_step, AdamConfig, Params};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub dropout: f64,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            max_epochs: 500,
            patience: 50,
            dropout: 0.2,
            weight_decay: 1e-6,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be >= 0", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout {} must lie in [0, 1)", self.dropout)));
        }
        if self.weight_decay < 0.0 {
            return Err(Error::Config(format!("weight decay {} must be >= 0", self.weight_decay)));
        }
        if self.max_epochs == 0 || self.patience == 0 || self.patience > self.max_epochs {
            return Err(Error::Config(format!(
                "need 1 <= patience ({}) <= max_epochs ({})",
                self.patience, self.max_epochs
            )));
        }
        Ok(())
    }
}

/// A supervised problem the training loop can drive.
pub trait Objective {
    /// Adds the gradient of the mean training loss over `nodes` to the
    /// gradient buffers of `params` and returns that mean loss.
    ///
    /// `epoch` and `seed` determine every random draw (e.g. dropout masks).
    fn accumulate_gradients(&self, params: &mut Params, nodes: &[usize], epoch: usize, seed: u64) -> Result<f64>;

    /// Eval-mode predicted class for each node.
    fn predict(&self, params: &Params, nodes: &[usize]) -> Result<Vec<usize>>;

    fn label(&self, node: usize) -> usize;

    fn accuracy(&self, params: &Params, nodes: &[usize]) -> Result<f64> {
        if nodes.is_empty() {
            return Ok(0.0);
        }
        let pred = self.predict(params, nodes)?;
        let hits = nodes
            .iter()
            .zip(&pred)
            .filter(|(&v, &p)| self.label(v) == p)
            .count();
        Ok(hits as f64 / nodes.len() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Snapshot taken at the epoch with the best validation accuracy.
    pub params: Params,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    pub history: Vec<EpochRecord>,
}

/// Full-batch training with Adam and early stopping on validation accuracy.
///
/// Epochs are numbered from 1. A snapshot is kept whenever validation
/// accuracy strictly improves; training stops once `patience` consecutive
/// epochs pass without improvement, or at `max_epochs`.
pub fn train<O: Objective + ?Sized>(
    objective: &O,
    mut params: Params,
    train_nodes: &[usize],
    val_nodes: &[usize],
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_nodes.is_empty() || val_nodes.is_empty() {
        return Err(Error::Config("training and validation sets must be non-empty".into()));
    }
    let adam = AdamConfig::new(cfg.learning_rate, cfg.weight_decay);
    let mut best: Option<(usize, f64, Params)> = None;
    let mut stale = 0;
    let mut history = Vec::new();
    for epoch in 1..=cfg.max_epochs {
        params.zero_grad();
        let loss = objective.accumulate_gradients(&mut params, train_nodes, epoch, cfg.seed)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch,
                layer: params.first_non_finite().unwrap_or("<loss>").to_string(),
            });
        }
        adam_step(&mut params, &adam);
        if let Some(name) = params.first_non_finite() {
            return Err(Error::NonFiniteLoss {
                epoch,
                layer: name.to_string(),
            });
        }
        let val_accuracy = objective.accuracy(&params, val_nodes)?;
        history.push(EpochRecord {
            epoch,
            train_loss: loss,
            val_accuracy,
        });
        match &best {
            Some((_, acc, _)) if val_accuracy <= *acc => {
                stale += 1;
                if stale >= cfg.patience {
                    break;
                }
            }
            _ => {
                best = Some((epoch, val_accuracy, params.clone()));
                stale = 0;
            }
        }
    }
    let (best_epoch, best_val_accuracy, params) = best.expect("at least one epoch runs");
    Ok(TrainOutcome {
        params,
        best_epoch,
        best_val_accuracy,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::cell::RefCell;

    /// Scripted objective: fixed loss, gradient 1 on every entry, and a
    /// validation accuracy read from a list.
    struct Scripted {
        val: RefCell<std::vec::IntoIter<f64>>,
    }

    impl Objective for Scripted {
        fn accumulate_gradients(&self, params: &mut Params, _: &[usize], _: usize, _: u64) -> Result<f64> {
            for id in params.ids().collect::<Vec<_>>() {
                params.grad_mut(id).fill(1.0);
            }
            Ok(1.0)
        }
        fn predict(&self, _: &Params, nodes: &[usize]) -> Result<Vec<usize>> {
            Ok(vec![0; nodes.len()])
        }
        fn label(&self, _: usize) -> usize {
            0
        }
        fn accuracy(&self, _: &Params, _: &[usize]) -> Result<f64> {
            Ok(self.val.borrow_mut().next().unwrap_or(0.0))
        }
    }

    fn params() -> Params {
        let mut p = Params::new();
        p.add("w", array![[1.0, 2.0]]);
        p
    }

    #[test]
    fn patience_one_stops_after_two_epochs() {
        let obj = Scripted {
            val: RefCell::new(vec![0.9, 0.5, 0.4, 0.3].into_iter()),
        };
        let cfg = TrainConfig {
            patience: 1,
            max_epochs: 10,
            ..TrainConfig::default()
        };
        let out = train(&obj, params(), &[0], &[1], &cfg).unwrap();
        assert_eq!(out.history.len(), 2);
        assert_eq!(out.best_epoch, 1);
    }

    #[test]
    fn zero_learning_rate_keeps_params() {
        let obj = Scripted {
            val: RefCell::new(vec![0.1, 0.2, 0.3].into_iter()),
        };
        let cfg = TrainConfig {
            learning_rate: 0.0,
            max_epochs: 3,
            patience: 3,
            ..TrainConfig::default()
        };
        let out = train(&obj, params(), &[0], &[1], &cfg).unwrap();
        assert_eq!(out.params.tensors()[0].value, array![[1.0, 2.0]]);
        assert_eq!(out.best_epoch, 3);
    }

    #[test]
    fn snapshot_is_best_epoch() {
        let obj = Scripted {
            val: RefCell::new(vec![0.1, 0.8, 0.2, 0.2].into_iter()),
        };
        let cfg = TrainConfig {
            learning_rate: 0.1,
            weight_decay: 0.0,
            max_epochs: 4,
            patience: 4,
            ..TrainConfig::default()
        };
        let out = train(&obj, params(), &[0], &[1], &cfg).unwrap();
        assert_eq!(out.best_epoch, 2);
        // two Adam steps of size ~lr against a constant unit gradient
        let w = &out.params.tensors()[0].value;
        assert!((w[[0, 0]] - 0.8).abs() < 1e-6, "{w}");
    }

    #[test]
    fn rejects_bad_config_and_empty_sets() {
        let obj = Scripted {
            val: RefCell::new(vec![].into_iter()),
        };
        let bad = TrainConfig {
            patience: 600,
            ..TrainConfig::default()
        };
        assert!(train(&obj, params(), &[0], &[1], &bad).is_err());
        assert!(train(&obj, params(), &[], &[1], &TrainConfig::default()).is_err());
        let bad = TrainConfig {
            dropout: 1.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    struct Exploding;

    impl Objective for Exploding {
        fn accumulate_gradients(&self, params: &mut Params, _: &[usize], epoch: usize, _: u64) -> Result<f64> {
            if epoch == 3 {
                let id = params.ids().next().unwrap();
                params.grad_mut(id)[[0, 1]] = f64::NAN;
                return Ok(f64::NAN);
            }
            Ok(0.5)
        }
        fn predict(&self, _: &Params, nodes: &[usize]) -> Result<Vec<usize>> {
            Ok(vec![0; nodes.len()])
        }
        fn label(&self, _: usize) -> usize {
            0
        }
    }

    #[test]
    fn non_finite_loss_names_epoch_and_tensor() {
        let err = train(&Exploding, params(), &[0], &[1], &TrainConfig::default()).unwrap_err();
        match err {
            Error::NonFiniteLoss { epoch, layer } => {
                assert_eq!(epoch, 3);
                assert_eq!(layer, "w");
            }
            other => panic!("unexpected {other}"),
        }
    }
}
