//! Oracle, gradient and invariance checks that need no external data.
//!
//! Every check returns a [`CheckOutcome`]; `bench selftest` prints them and
//! the integration tests assert on them.

pub mod gradcheck;
pub mod oracles;
pub mod synthetic;

use std::time::Instant;

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bench::{results_csv, run_benchmark, ExperimentPlan, Hyper, Profile};
use crate::data::Dataset;
use crate::error::Result;
use crate::features::{rw_landing_probabilities, spd_onehot, DeVariant};
use crate::graph::{permute_nodes, Graph};
use crate::model::{build_samples, ModelConfig, Network, Preset, SampleCache};
use crate::nn::argmax;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckOutcome {
            name: name.to_string(),
            passed,
            detail,
        }
    }

    fn from_result(name: &str, r: Result<CheckOutcome>) -> Self {
        r.unwrap_or_else(|e| CheckOutcome::new(name, false, format!("error: {e}")))
    }

    /// `PASS name: detail` / `FAIL name: detail`.
    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// RW encoding against walk enumeration on random connected graphs with
/// 1 to 8 nodes, every target, `k` in `1..=4`. Also checks that each step's
/// probabilities sum to one on graphs with an edge.
pub fn check_rw_oracle(num_graphs: usize, seed: u64) -> CheckOutcome {
    let name = "RW distance encoding vs walk enumeration";
    CheckOutcome::from_result(name, (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut max_err = 0.0f64;
        let mut max_mass_err = 0.0f64;
        let mut cases = 0;
        for _ in 0..num_graphs {
            let n = rng.random_range(1..=8);
            let p = rng.random_range(0.0..0.6);
            let g = synthetic::random_connected_graph(n, p, &mut rng);
            let k = rng.random_range(1..=4);
            for t in 0..n {
                let got = rw_landing_probabilities(&g, t, k)?;
                let want = oracles::rw_by_walk_enumeration(&g, t, k);
                for (a, b) in got.iter().zip(want.iter()) {
                    max_err = max_err.max((a - b).abs());
                }
                if n > 1 {
                    for col in got.columns() {
                        max_mass_err = max_mass_err.max((col.sum() - 1.0).abs());
                    }
                }
                cases += 1;
            }
        }
        let passed = max_err <= 1e-12 && max_mass_err <= 1e-12;
        Ok(CheckOutcome::new(
            name,
            passed,
            format!("{num_graphs} graphs, {cases} targets, max abs err {max_err:.2e}, max mass err {max_mass_err:.2e}"),
        ))
    })())
}

/// SPD encoding against Floyd-Warshall distances on random 64-node graphs,
/// including disconnected ones; must match exactly.
pub fn check_spd_oracle(num_graphs: usize, seed: u64) -> CheckOutcome {
    let name = "SPD distance encoding vs reference distances";
    CheckOutcome::from_result(name, (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mismatches = 0;
        let mut cases = 0;
        for _ in 0..num_graphs {
            let p = rng.random_range(0.01..0.08);
            let g = synthetic::random_graph(64, p, &mut rng);
            let k = rng.random_range(1..=5);
            let dist = oracles::all_pairs_hops(&g);
            for t in 0..64 {
                let got = spd_onehot(&g, t, k)?;
                let mut want = ndarray::Array2::<f64>::zeros((64, k + 2));
                for (v, d) in dist[t].iter().enumerate() {
                    want[[v, d.filter(|&d| d <= k).unwrap_or(k + 1)]] = 1.0;
                }
                if got != want {
                    mismatches += 1;
                }
                cases += 1;
            }
        }
        Ok(CheckOutcome::new(
            name,
            mismatches == 0,
            format!("{num_graphs} graphs, {cases} targets, {mismatches} mismatches"),
        ))
    })())
}

fn cycle(n: usize) -> Graph {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_edges(&edges, n).expect("cycle edges in range")
}

/// Third RW entry of the target's own row: 0.25 on a triangle, 0 on a hexagon.
pub fn check_cycle_distinguishability() -> CheckOutcome {
    let name = "C3/C6 return probabilities";
    CheckOutcome::from_result(name, (|| {
        let c3 = rw_landing_probabilities(&cycle(3), 0, 3)?;
        let c6 = rw_landing_probabilities(&cycle(6), 0, 3)?;
        let (a, b) = (c3[[0, 2]], c6[[0, 2]]);
        Ok(CheckOutcome::new(name, a == 0.25 && b == 0.0, format!("C3 {a}, C6 {b}")))
    })())
}

pub fn check_gradients(seed: u64) -> CheckOutcome {
    let name = "finite-difference gradients";
    CheckOutcome::from_result(name, (|| {
        let r = gradcheck::check_all(seed)?;
        Ok(CheckOutcome::new(
            name,
            r.passed(),
            format!(
                "{} entries, {} over tolerance, max rel err {:.2e} ({})",
                r.checked, r.failed, r.max_rel_err, r.worst
            ),
        ))
    })())
}

fn all_logits(net: &Network, params: &crate::nn::Params, ds: &Dataset, cfg: &ModelConfig) -> Result<Vec<Array1<f64>>> {
    let samples = build_samples(&ds.graph, cfg)?;
    let proj = net.project_all(params, &ds.features)?;
    samples.iter().map(|s| net.logits(params, &proj, s)).collect()
}

fn preset_config(p: Preset, layers: usize) -> Result<ModelConfig> {
    let mut cfg = ModelConfig::preset(p, p.uses_de().then_some(DeVariant::Rw))?;
    cfg.num_layers = layers;
    cfg.hidden_dim = 8;
    Ok(cfg)
}

/// Raw-feature independence of M3/M4, DE-setting independence of M5/M6,
/// graph independence of M6 and relabelling invariance of every preset.
pub fn check_isolation(seed: u64) -> CheckOutcome {
    let name = "configuration isolation";
    CheckOutcome::from_result(name, (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut problems = Vec::new();
        let ds = synthetic::random_dataset(30, 0.12, 6, 3, &mut rng);
        let other_features = synthetic::random_features(30, 6, 0.5, &mut rng);
        let mut swapped = ds.clone();
        swapped.features = other_features;

        for p in [Preset::M3, Preset::M4] {
            let cfg = preset_config(p, 2)?;
            let (net, params) = Network::new(cfg, 6, 3, seed)?;
            if all_logits(&net, &params, &ds, &cfg)? != all_logits(&net, &params, &swapped, &cfg)? {
                problems.push(format!("{p} logits depend on raw features"));
            }
        }

        for p in [Preset::M5, Preset::M6] {
            let base = preset_config(p, 2)?;
            let (net, params) = Network::new(base, 6, 3, seed)?;
            let reference = all_logits(&net, &params, &ds, &base)?;
            for (k, hops) in [(1, None), (2, Some(2)), (4, Some(4)), (6, Some(5))] {
                let cfg = ModelConfig {
                    subgraph_hops: hops,
                    ..base.with_k(k)?
                };
                if all_logits(&net, &params, &ds, &cfg)? != reference {
                    problems.push(format!("{p} logits change with k={k}, hops={hops:?}"));
                }
            }
        }

        let cfg = preset_config(Preset::M6, 1)?;
        let (net, params) = Network::new(cfg, 6, 3, seed)?;
        let mut rewired = ds.clone();
        rewired.graph = synthetic::rewire(&ds.graph, &mut rng);
        if all_logits(&net, &params, &ds, &cfg)? != all_logits(&net, &params, &rewired, &cfg)? {
            problems.push("M6 logits change under rewiring".into());
        }

        let perm = synthetic::random_permutation(30, &mut rng);
        let permuted = Dataset::new(
            ds.name.clone(),
            permute_nodes(&ds.graph, &perm)?,
            ds.features.permute_rows(&perm)?,
            crate::graph::LabelVector::new(
                {
                    let mut l = vec![0; 30];
                    for (v, &y) in ds.labels.labels().iter().enumerate() {
                        l[perm[v]] = y;
                    }
                    l
                },
                3,
            )?,
        )?;
        let mut max_dev = 0.0f64;
        for p in Preset::ALL {
            for de in if p.uses_de() { vec![Some(DeVariant::Spd), Some(DeVariant::Rw)] } else { vec![None] } {
                let mut cfg = ModelConfig::preset(p, de)?;
                cfg.num_layers = 2;
                cfg.hidden_dim = 8;
                let (net, params) = Network::new(cfg, 6, 3, seed)?;
                let a = all_logits(&net, &params, &ds, &cfg)?;
                let b = all_logits(&net, &params, &permuted, &cfg)?;
                for v in 0..30 {
                    let (la, lb) = (&a[v], &b[perm[v]]);
                    max_dev = la.iter().zip(lb).fold(max_dev, |m, (x, y)| m.max((x - y).abs()));
                    if argmax(la.view()) != argmax(lb.view()) {
                        problems.push(format!("{} prediction of node {v} changes under relabelling", p.label(de)));
                    }
                }
            }
        }
        if max_dev > 1e-9 {
            problems.push(format!("logits move by {max_dev:.2e} under relabelling"));
        }
        Ok(CheckOutcome::new(
            name,
            problems.is_empty(),
            if problems.is_empty() {
                format!("all invariances hold (relabelling logit drift {max_dev:.1e})")
            } else {
                problems.join("; ")
            },
        ))
    })())
}

/// Two identical benchmark invocations on a synthetic dataset give the same
/// CSV, and so do serial execution and a disabled sample cache.
pub fn check_determinism(seed: u64) -> CheckOutcome {
    let name = "benchmark determinism";
    CheckOutcome::from_result(name, (|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ds = synthetic::planted_partition_dataset(60, 0.15, 0.03, &mut rng);
        let mut plan = ExperimentPlan::new("planted", Preset::M1, Some(DeVariant::Rw));
        plan.num_seeds = 3;
        plan.base_seed = seed;
        plan.profile = Profile::Fixed(Hyper {
            num_layers: 2,
            hidden_dim: 16,
            learning_rate: 5e-3,
            dropout: 0.3,
            weight_decay: 1e-5,
            max_epochs: 30,
            patience: 10,
        });
        let quiet = |_: &crate::bench::RunRecord| {};
        let run = |plan: &ExperimentPlan, cache: bool| -> Result<String> {
            results_csv(&[run_benchmark(plan, &ds, &SampleCache::new(cache), &quiet)?])
        };
        let first = run(&plan, true)?;
        let second = run(&plan, true)?;
        let uncached = run(&plan, false)?;
        let mut serial_plan = plan.clone();
        serial_plan.parallel = false;
        let serial = run(&serial_plan, true)?;
        let mut search_plan = plan.clone();
        search_plan.profile = Profile::Search { budget: 3 };
        search_plan.max_epochs = Some(15);
        let s1 = run(&search_plan, true)?;
        let s2 = run(&search_plan, true)?;
        let checks = [
            ("repeat", first == second),
            ("cache off", first == uncached),
            ("serial", first == serial),
            ("search repeat", s1 == s2),
        ];
        let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
        Ok(CheckOutcome::new(
            name,
            failed.is_empty(),
            if failed.is_empty() {
                "identical results.csv across repeat, cache off, serial and search runs".into()
            } else {
                format!("results differ: {}", failed.join(", "))
            },
        ))
    })())
}

/// Every data-free check, with its wall-clock time appended.
pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    let checks: Vec<Box<dyn Fn() -> CheckOutcome>> = vec![
        Box::new(move || check_rw_oracle(250, seed)),
        Box::new(move || check_spd_oracle(200, seed)),
        Box::new(check_cycle_distinguishability),
        Box::new(move || check_gradients(seed)),
        Box::new(move || check_isolation(seed)),
        Box::new(move || check_determinism(seed)),
    ];
    checks
        .into_iter()
        .map(|c| {
            let start = Instant::now();
            let mut out = c();
            out.detail = format!("{} [{:.2}s]", out.detail, start.elapsed().as_secs_f64());
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_oracle_runs_pass() {
        assert!(check_rw_oracle(20, 1).passed);
        assert!(check_spd_oracle(5, 1).passed);
        assert!(check_cycle_distinguishability().passed);
    }
}
