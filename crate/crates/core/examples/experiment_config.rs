//! Run an experiment described by a JSON config, as `ossb run` does.
//!
//! ```text
//! cargo run --release --example experiment_config -- crates/core/configs/classical.json
//! ```

use ossb::cli::summary_table;
use ossb::config::ExperimentConfig;
use ossb::harness::run_monte_carlo;

fn main() -> ossb::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/classical.json").into());
    let cfg = ExperimentConfig::load(path.as_ref())?;
    let instances = cfg.instances()?;
    println!("{} instances, {} trials each, T = {}", instances.len(), cfg.n_trials, cfg.horizon);

    let mc = cfg.monte_carlo();
    let results = cfg
        .policies
        .iter()
        .map(|p| run_monte_carlo(&instances, p, &mc))
        .collect::<ossb::Result<Vec<_>>>()?;
    print!("{}", summary_table(&results));
    for r in &results {
        if let Some(pc) = &r.phase_counts {
            println!("{} phases: {:?}", r.policy, pc);
        }
    }
    Ok(())
}
