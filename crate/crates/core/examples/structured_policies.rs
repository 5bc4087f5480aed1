//! OSSB against KL-UCB on unimodal, Lipschitz and dueling instances.
//!
//! KL-UCB ignores the structure, so the gap between the two columns shows
//! what the structure is worth at this horizon.
//!
//! ```text
//! cargo run --release --example structured_policies -- [trials] [horizon]
//! ```

use ossb::bound::{solve, SolverOptions};
use ossb::harness::{
    run_monte_carlo, Checkpoints, DuelingParams, GeneratorSpec, LipschitzParams, MonteCarloConfig,
    UnimodalParams,
};
use ossb::observation::ObservationModel;
use ossb::policy::PolicySpec;

fn main() -> ossb::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(10);
    let horizon: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(5_000);

    let generators = [
        (
            "unimodal",
            GeneratorSpec::Unimodal(UnimodalParams {
                arms: 10,
                model: ObservationModel::Bernoulli,
                low: 0.1,
                high: 0.9,
                min_gap: 0.05,
            }),
        ),
        (
            "lipschitz",
            GeneratorSpec::Lipschitz(LipschitzParams {
                arms: 8,
                model: ObservationModel::Bernoulli,
                lipschitz: 1.0,
                low: 0.1,
                high: 0.9,
                min_gap: 0.05,
            }),
        ),
        (
            "dueling",
            GeneratorSpec::Dueling(DuelingParams {
                items: 3,
                margin: 0.1,
            }),
        ),
    ];
    let mc = MonteCarloConfig {
        horizon,
        n_trials: trials,
        base_seed: 11,
        parallelism: std::thread::available_parallelism().map_or(1, |n| n.get()),
        checkpoints: Checkpoints::Geometric,
        allow_epsilon_zero: false,
    };

    println!("{:<10} {:>10} {:>12} {:>12}", "structure", "C ln T", "ossb", "klucb");
    for (name, generator) in &generators {
        let inst = generator.generate(3)?;
        let bound = solve(&inst.structure, inst.model, inst.theta.means(), &SolverOptions::default(), None)?;
        let instances = [inst];
        let mut row = Vec::new();
        for policy in [PolicySpec::ossb(), PolicySpec::Klucb] {
            let r = run_monte_carlo(&instances, &policy, &mc)?;
            let last = r.aggregate.rounds.len() - 1;
            row.push(format!("{:.1}±{:.1}", r.aggregate.mean[last], r.aggregate.ci95[last]));
        }
        println!(
            "{:<10} {:>10.1} {:>12} {:>12}",
            name,
            bound.value * (horizon as f64).ln(),
            row[0],
            row[1]
        );
    }
    Ok(())
}
