//! The lower bound `C(θ)` and rates `c(x, θ)` for one instance of each structure.
//!
//! ```text
//! cargo run --example lower_bounds
//! ```

use ossb::bound::{solve, SolverOptions};
use ossb::observation::ObservationModel;
use ossb::structures::Structure;

fn line(points: &[f64], slope: f64) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|a| points.iter().map(|b| slope * (a - b).abs()).collect())
        .collect()
}

fn main() -> ossb::Result<()> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let cases: Vec<(&str, Structure, ObservationModel, Vec<f64>)> = vec![
        (
            "classical",
            Structure::Classical { arms: 3 },
            ObservationModel::Bernoulli,
            vec![0.2, 0.5, 0.45],
        ),
        (
            "unimodal",
            Structure::Unimodal { arms: 5 },
            ObservationModel::Gaussian,
            vec![0.1, 0.2, 0.3, 0.2, 0.0],
        ),
        (
            "lipschitz",
            Structure::Lipschitz {
                distances: line(&[0.0, 0.1, 0.25, 0.4], 1.0),
            },
            ObservationModel::Bernoulli,
            vec![0.3, 0.35, 0.45, 0.5],
        ),
        (
            "linear",
            Structure::Linear {
                features: vec![vec![1.0, 0.0], vec![h, h], vec![0.0, 1.0]],
            },
            ObservationModel::Gaussian,
            vec![1.0, h, 0.0],
        ),
        (
            // item 0 beats item 1 with probability 0.6
            "dueling",
            Structure::Dueling { items: 2 },
            ObservationModel::Bernoulli,
            vec![0.5, 0.6, 0.4, 0.5],
        ),
    ];

    let opts = SolverOptions::default();
    for (name, structure, model, theta) in &cases {
        let sol = solve(structure, *model, theta, &opts, None)?;
        println!("{name:<10} C = {:<10.4} status {:?}", sol.value, sol.status);
        let rates: Vec<String> = sol.rates.iter().map(|r| format!("{r:.3}")).collect();
        println!("           c = [{}]  x* = {}", rates.join(", "), sol.optimal_arm);
    }

    // A classical instance without structure, for comparison with the
    // Lipschitz one above: structure can only lower the bound.
    let plain = solve(
        &Structure::Classical { arms: 4 },
        ObservationModel::Bernoulli,
        &[0.3, 0.35, 0.45, 0.5],
        &opts,
        None,
    )?;
    println!("same means, no structure: C = {:.4}", plain.value);
    Ok(())
}
