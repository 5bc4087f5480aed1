//! Linear bandits: OSSB against linear Thompson sampling and GLM-UCB.
//!
//! 20 unit arms in R³ with `φ` uniform in `[0.2, 0.4]³`. OSSB runs with
//! `ε = γ = 0`. The defaults are small enough for a laptop; pass larger
//! values for the full experiment (10 instances, 20 trials, T = 10⁴).
//! Writes `aggregate.csv` to the given directory.
//!
//! ```text
//! cargo run --release --example linear_experiment -- [instances] [trials] [horizon] [out_dir]
//! ```

use std::fs::File;
use std::io::BufWriter;

use ossb::bound::{solve, SolverOptions};
use ossb::harness::{run_monte_carlo, write_aggregates, Checkpoints, GeneratorSpec, LinearParams, MonteCarloConfig};
use ossb::policy::PolicySpec;

fn main() -> ossb::Result<()> {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(3);
    let trials: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(2);
    let horizon: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(2_000);
    let out_dir = args.next().unwrap_or_else(|| "out".into());

    let generator = GeneratorSpec::Linear(LinearParams {
        dim: 3,
        arms: 20,
        phi_low: 0.2,
        phi_high: 0.4,
    });
    let instances = (0..count as u64).map(|i| generator.generate(1 + i)).collect::<ossb::Result<Vec<_>>>()?;

    let opts = SolverOptions::default();
    let log_t = (horizon as f64).ln();
    for (i, inst) in instances.iter().enumerate() {
        let b = solve(&inst.structure, inst.model, inst.theta.means(), &opts, None)?;
        println!("instance {i}: C(θ) = {:.2}, C(θ) ln T = {:.1}", b.value, b.value * log_t);
    }

    let mc = MonteCarloConfig {
        horizon,
        n_trials: trials,
        base_seed: 7,
        parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
        checkpoints: Checkpoints::Geometric,
        allow_epsilon_zero: true,
    };
    let policies = [
        PolicySpec::Ossb {
            epsilon: Some(0.0),
            gamma: 0.0,
            c_max: 1e6,
            resolve_period: 1,
            use_projection: None,
        },
        PolicySpec::lin_thompson(),
        PolicySpec::GlmUcb,
    ];
    let mut results = Vec::new();
    for p in &policies {
        let started = std::time::Instant::now();
        let r = run_monte_carlo(&instances, p, &mc)?;
        let a = &r.aggregate;
        let last = a.rounds.len() - 1;
        println!(
            "{:<13} R(T) = {:>8.1} ± {:<7.1} ({} failed, {:.1?})",
            r.policy,
            a.mean[last],
            a.ci95[last],
            r.failures.len(),
            started.elapsed()
        );
        results.push(r);
    }

    std::fs::create_dir_all(&out_dir)?;
    let path = std::path::Path::new(&out_dir).join("aggregate.csv");
    write_aggregates(BufWriter::new(File::create(&path)?), &results)?;
    println!("wrote {}", path.display());
    Ok(())
}
