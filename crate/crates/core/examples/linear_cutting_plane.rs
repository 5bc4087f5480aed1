//! Linear lower bound by cutting planes, with a warm start.
//!
//! With arms `e1`, `e2` and `φ = (1, 0.5)` the bound is `C = 4` and the
//! suboptimal arm's rate is `8 = 2 / Δ²`. Perturbing `φ` and passing the
//! previous solution back in seeds the LP with its active cuts; the iteration
//! counts of both runs are printed side by side.
//!
//! ```text
//! cargo run --example linear_cutting_plane
//! ```

use ossb::bound::{solve, SolverOptions};
use ossb::harness::{generate_linear_instance, LinearParams};
use ossb::observation::ObservationModel;
use ossb::structures::Structure;

fn main() -> ossb::Result<()> {
    let opts = SolverOptions::default();
    let axes = Structure::Linear {
        features: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
    };
    let s = solve(&axes, ObservationModel::Gaussian, &[1.0, 0.5], &opts, None)?;
    println!("axes: C = {:.6}, c = {:?}, {} cuts", s.value, s.rates, s.iterations);

    // 20 unit arms in R³; the reduced space is 2-D, so several cuts are needed
    let inst = generate_linear_instance(
        &LinearParams {
            dim: 3,
            arms: 20,
            phi_low: 0.2,
            phi_high: 0.4,
        },
        5,
    )?;
    let fan = inst.structure;
    let model = ObservationModel::Gaussian;

    let mut prev = None;
    for step in 0..5 {
        let phi = [0.3, 0.3, 0.2 + 0.01 * step as f64];
        let theta = fan.linear_means(&phi)?.into_inner();
        let cold = solve(&fan, model, &theta, &opts, None)?;
        let warm = solve(&fan, model, &theta, &opts, prev.as_ref())?;
        println!(
            "phi = {:.2?}: C = {:.4} (cold {} iterations, warm {}), max violation {:.1e}",
            phi, warm.value, cold.iterations, warm.iterations, warm.max_violation
        );
        prev = Some(warm);
    }
    Ok(())
}
