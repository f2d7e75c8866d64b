use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use degnn::bench::{results_csv, run_benchmark, ExperimentPlan, Hyper, Profile};
use degnn::features::DeVariant;
use degnn::model::{build_samples, ModelConfig, Network, NodeClassification, Preset, SampleCache};
use degnn::nn::{train, Objective, TrainConfig};
use degnn::selftest::synthetic;

fn fixed(lr: f64, epochs: usize) -> Profile {
    Profile::Fixed(Hyper {
        num_layers: 2,
        hidden_dim: 16,
        learning_rate: lr,
        dropout: 0.0,
        weight_decay: 1e-6,
        max_epochs: epochs,
        patience: epochs,
    })
}

#[test]
fn small_graph_is_memorised() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ds = synthetic::random_dataset(20, 0.2, 6, 3, &mut rng);
    let mut cfg = ModelConfig::preset(Preset::M1, Some(DeVariant::Rw)).unwrap();
    cfg.num_layers = 2;
    cfg.hidden_dim = 32;
    let (net, params) = Network::new(cfg, 6, 3, 0).unwrap();
    let samples = build_samples(&ds.graph, &cfg).unwrap();
    let obj = NodeClassification::new(&net, &ds.features, &ds.labels, &samples, 0.0).unwrap();
    let all: Vec<usize> = (0..20).collect();
    let tc = TrainConfig {
        learning_rate: 1e-2,
        max_epochs: 400,
        patience: 400,
        dropout: 0.0,
        weight_decay: 0.0,
        seed: 0,
    };
    let out = train(&obj, params, &all, &all, &tc).unwrap();
    let last = out.history.last().unwrap().train_loss;
    assert!(last < 0.01, "final training loss {last}");
    assert_eq!(obj.accuracy(&out.params, &all).unwrap(), 1.0);
}

#[test]
fn degree_alone_separates_hub_sizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ds = synthetic::degree_labeled_dataset(6, &mut rng);
    let mut plan = ExperimentPlan::new("degree-labeled", Preset::M4, None);
    plan.num_seeds = 3;
    plan.profile = fixed(1e-2, 300);
    let r = run_benchmark(&plan, &ds, &SampleCache::new(true), &|_| {}).unwrap();
    assert_eq!(r.mean, 1.0, "{:?}", r.runs.iter().map(|x| x.test_accuracy).collect::<Vec<_>>());
}

#[test]
fn mlp_results_ignore_the_graph() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ds = synthetic::planted_partition_dataset(60, 0.15, 0.03, &mut rng);
    let mut rewired = ds.clone();
    rewired.graph = synthetic::rewire(&ds.graph, &mut rng);
    let mut plan = ExperimentPlan::new("planted", Preset::M6, None);
    plan.num_seeds = 2;
    plan.profile = fixed(5e-3, 40);
    let csv = |d| results_csv(&[run_benchmark(&plan, d, &SampleCache::new(false), &|_| {}).unwrap()]).unwrap();
    assert_eq!(csv(&ds), csv(&rewired));
}

#[test]
fn hyperparameter_search_stays_in_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ds = synthetic::planted_partition_dataset(60, 0.15, 0.03, &mut rng);
    let mut plan = ExperimentPlan::new("planted", Preset::M5, None);
    plan.num_seeds = 2;
    plan.max_epochs = Some(10);
    plan.profile = Profile::Search { budget: 4 };
    let r = run_benchmark(&plan, &ds, &SampleCache::new(true), &|_| {}).unwrap();
    assert_eq!(r.trials.len(), 4);
    assert_eq!(r.search_budget, 4);
    let space = degnn::bench::SearchSpace::for_preset(Preset::M5);
    let best = r.trials.iter().filter_map(|t| t.val_accuracy.as_ref().ok()).fold(f64::MIN, |a, &b| a.max(b));
    let chosen = r.trials.iter().find(|t| t.val_accuracy.as_ref().ok() == Some(&best)).unwrap();
    assert_eq!(chosen.hyper, r.hyper);
    for t in &r.trials {
        let mut h = t.hyper;
        h.max_epochs = space.max_epochs;
        h.patience = space.patience;
        assert!(space.contains(&h), "{h:?}");
    }
}
