//! Compare every structure-specific solver with the grid oracle.
//!
//! The oracle enumerates confusing parameters on a grid and solves one LP,
//! so it approaches `C(θ)` from below as the grid is refined.
//!
//! ```text
//! cargo run --release --example oracle_cross_check
//! ```

use ossb::bound::{solve, solve_generic_oracle, SolverOptions};
use ossb::selfcheck::{bundled_instances, relative_gap};

fn main() -> ossb::Result<()> {
    let opts = SolverOptions::default();
    println!("{:<24} {:>10} {:>10} {:>8} {:>6}", "instance", "solver", "oracle", "gap", "tol");
    for b in bundled_instances() {
        let inst = &b.instance;
        let theta = inst.theta.means();
        let exact = solve(&inst.structure, inst.model, theta, &opts, None)?;
        let grid = solve_generic_oracle(&inst.structure, inst.model, theta, &opts)?;
        let gap = relative_gap(exact.value, grid.value);
        println!(
            "{:<24} {:>10.4} {:>10.4} {:>7.2}% {:>5.0}%{}",
            b.name,
            exact.value,
            grid.value,
            100.0 * gap,
            100.0 * b.tolerance,
            if gap <= b.tolerance { "" } else { "  <-- outside tolerance" }
        );
    }
    Ok(())
}
