//! One OSSB run on a two-armed Bernoulli bandit.
//!
//! Prints the phase tallies and `R(t) / ln t` against the lower bound `C(θ)`.
//!
//! ```text
//! cargo run --release --example ossb_classical -- [horizon] [seed]
//! ```

use ossb::bound::{solve, SolverOptions};
use ossb::harness::{run_episode, BanditInstance, Checkpoints};
use ossb::observation::ObservationModel;
use ossb::policy::{Ossb, OssbConfig, Policy};
use ossb::structures::Structure;

fn main() -> ossb::Result<()> {
    let mut args = std::env::args().skip(1);
    let horizon: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(100_000);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);

    let structure = Structure::Classical { arms: 2 };
    let model = ObservationModel::Bernoulli;
    let inst = BanditInstance::new(structure.clone(), model, vec![0.5, 0.6])?;
    let bound = solve(&structure, model, inst.theta.means(), &SolverOptions::default(), None)?;
    println!("C(θ) = {:.4}", bound.value);

    let config = OssbConfig::for_structure(&structure);
    let mut policy = Ossb::new(structure, model, config);
    let checkpoints = Checkpoints::Geometric.resolve(horizon);
    let trace = run_episode(&inst, &mut policy, horizon, seed, 0, &checkpoints)?;

    println!("{:>8} {:>10} {:>10}", "t", "R(t)", "R/ln t");
    for (t, r) in trace.checkpoints.iter().zip(&trace.cum_regret) {
        if *t >= 10 {
            println!("{:>8} {:>10.1} {:>10.3}", t, r, r / (*t as f64).ln());
        }
    }
    if let Some(pc) = policy.phase_counts() {
        println!(
            "phases: init {} exploit {} estimate {} explore {}",
            pc.init, pc.exploit, pc.estimate, pc.explore
        );
    }
    println!("pulls: {:?}", trace.final_counts);
    Ok(())
}
