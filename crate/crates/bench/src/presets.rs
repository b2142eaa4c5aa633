//! Built-in experiment specs.
//!
//! `table4` and the largest `fig5` point are scaled down unless `full_scale` is
//! set. `fig2` and `fig3` run the ℓ2,0 solver with the theory budget
//! `⌊(M + rank(Y) − 1)/2⌋`; the other presets use `s = K + 2`.

use jointsparse::Backend;

use crate::error::{BenchError, Result};
use crate::experiment::{ExperimentSpec, GridTemplate, SolverSpec, SparsityPolicy, DEFAULT_TRIALS};

pub const PRESET_NAMES: [&str; 7] = ["table2", "table3", "table4", "fig2", "fig3", "fig4", "fig5"];

#[derive(Debug, Clone, Copy, Default)]
pub struct PresetOptions {
    pub full_scale: bool,
}

pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "table2" => "exact regime, criterion off: N=500 M=150 K=50 J=10, 10 trials",
        "table3" => "criterion off vs on at the table2 point, 10 trials",
        "table4" => "Plain vs SMW backend at N=2000 M=600 K=200 J=10 (full scale: N=5000)",
        "fig2" => "row sparsity sweep K=25..150 at N=500 M=150 J=10, all solvers",
        "fig3" => "measurement sweep M in {312,156,104,78,62} at N=500 K=50 J=10, all solvers",
        "fig4" => "sensor sweep J in {1,2,4,8,16,32} at N=500 M=150 K=50, all solvers",
        "fig5" => "dimension sweep N in {100,500,1000,1500} with M=N/3 K=N/10 J=10 (full scale adds 3000)",
        _ => return None,
    })
}

fn k_plus_two(criterion: bool) -> SolverSpec {
    SolverSpec::admm_l20(SparsityPolicy::default(), Backend::Plain, criterion)
}

fn with_baselines(l20: SolverSpec) -> Vec<SolverSpec> {
    vec![l20, SolverSpec::admm_l21(), SolverSpec::somp(), SolverSpec::sniht()]
}

fn spec(name: &str, grid: Vec<GridTemplate>, solvers: Vec<SolverSpec>, trials: usize) -> ExperimentSpec {
    ExperimentSpec {
        name: name.to_string(),
        grid,
        solvers,
        trials,
        base_seed: 0,
        success_threshold: 1e-5,
    }
}

pub fn preset(name: &str, opts: PresetOptions) -> Result<ExperimentSpec> {
    let table_point = || vec![GridTemplate::single(500, 150, 50, 10)];
    Ok(match name {
        "table2" => spec(name, table_point(), vec![k_plus_two(false)], 10),
        "table3" => spec(
            name,
            table_point(),
            vec![k_plus_two(false).with_label("admm-l20-nocrit"), k_plus_two(true)],
            10,
        ),
        "table4" => {
            let (n, m, k) = if opts.full_scale { (5000, 1500, 500) } else { (2000, 600, 200) };
            spec(
                name,
                vec![GridTemplate::single(n, m, k, 10)],
                vec![
                    k_plus_two(true),
                    SolverSpec::admm_l20(SparsityPolicy::default(), Backend::Smw, true),
                ],
                10,
            )
        }
        "fig2" => spec(
            name,
            vec![GridTemplate {
                n: vec![500],
                m: vec![150],
                k: (25..=150).step_by(25).collect(),
                j: vec![10],
            }],
            with_baselines(SolverSpec::admm_l20(SparsityPolicy::Theory, Backend::Plain, true)),
            DEFAULT_TRIALS,
        ),
        "fig3" => spec(
            name,
            vec![GridTemplate {
                n: vec![500],
                m: vec![312, 156, 104, 78, 62],
                k: vec![50],
                j: vec![10],
            }],
            with_baselines(SolverSpec::admm_l20(SparsityPolicy::Theory, Backend::Plain, true)),
            DEFAULT_TRIALS,
        ),
        "fig4" => spec(
            name,
            vec![GridTemplate {
                n: vec![500],
                m: vec![150],
                k: vec![50],
                j: vec![1, 2, 4, 8, 16, 32],
            }],
            with_baselines(k_plus_two(true)),
            DEFAULT_TRIALS,
        ),
        "fig5" => {
            let mut sizes = vec![100, 500, 1000, 1500];
            if opts.full_scale {
                sizes.push(3000);
            }
            spec(
                name,
                sizes
                    .into_iter()
                    .map(|n| GridTemplate::single(n, n / 3, n / 10, 10))
                    .collect(),
                with_baselines(k_plus_two(true)),
                DEFAULT_TRIALS,
            )
        }
        _ => {
            return Err(BenchError::UnknownPreset {
                name: name.to_string(),
                available: PRESET_NAMES.join(", "),
            })
        }
    })
}
