//! Built-in consistency checks.
//!
//! Every structure-specific solver is compared with the generic grid oracle
//! on a set of small bundled instances, then a handful of invariants are
//! exercised on short simulations.

use std::time::{Duration, Instant};

use crate::bound::{solve, solve_generic_oracle, SolverOptions};
use crate::error::Result;
use crate::harness::{run_episode, run_monte_carlo, BanditInstance, Checkpoints, MonteCarloConfig};
use crate::observation::ObservationModel;
use crate::policy::PolicySpec;
use crate::structures::Structure;

/// A small instance and the relative tolerance its solver must meet against
/// the oracle.
#[derive(Debug, Clone)]
pub struct Bundled {
    pub name: &'static str,
    pub instance: BanditInstance,
    pub tolerance: f64,
}

fn line_distances(pos: &[f64], slope: f64) -> Vec<Vec<f64>> {
    pos.iter()
        .map(|a| pos.iter().map(|b| slope * (a - b).abs()).collect())
        .collect()
}

fn preference(items: usize, wins: &[(usize, usize, f64)]) -> Vec<f64> {
    let mut t = vec![0.5; items * items];
    for &(i, j, p) in wins {
        t[i * items + j] = p;
        t[j * items + i] = 1.0 - p;
    }
    t
}

fn linear_theta(features: &[Vec<f64>], phi: &[f64]) -> Vec<f64> {
    features
        .iter()
        .map(|f| f.iter().zip(phi).map(|(a, b)| a * b).sum())
        .collect()
}

/// Instances with at most 6 arms and dimension at most 3. The oracle grid is
/// exact in the binding coordinate for classical and Lipschitz structures,
/// hence the tighter tolerance there.
pub fn bundled_instances() -> Vec<Bundled> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plane = vec![vec![1.0, 0.0], vec![h, h], vec![0.0, 1.0]];
    let space = vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![0.6, 0.8, 0.0],
        vec![0.0, 0.6, 0.8],
    ];
    let tilted = vec![
        vec![1.0, 0.0, 0.0],
        vec![0.8, 0.6, 0.0],
        vec![0.0, 0.8, 0.6],
        vec![0.0, 0.0, 1.0],
        vec![0.6, 0.0, 0.8],
        vec![-0.6, 0.8, 0.0],
    ];
    let mk = |name, structure, model, theta: Vec<f64>, tolerance| Bundled {
        name,
        instance: BanditInstance::new(structure, model, theta).expect("bundled instance is valid"),
        tolerance,
    };
    vec![
        mk(
            "classical/bernoulli",
            Structure::Classical { arms: 3 },
            ObservationModel::Bernoulli,
            vec![0.2, 0.5, 0.45],
            0.02,
        ),
        mk(
            "classical/gaussian",
            Structure::Classical { arms: 4 },
            ObservationModel::Gaussian,
            vec![0.0, 0.5, 1.0, 0.8],
            0.02,
        ),
        mk(
            "lipschitz/three-points",
            Structure::Lipschitz {
                distances: line_distances(&[0.0, 1.0, 2.0], 0.2),
            },
            ObservationModel::Bernoulli,
            vec![0.3, 0.4, 0.5],
            0.02,
        ),
        mk(
            "lipschitz/four-points",
            Structure::Lipschitz {
                distances: line_distances(&[0.0, 0.1, 0.25, 0.4], 1.0),
            },
            ObservationModel::Bernoulli,
            vec![0.3, 0.35, 0.45, 0.5],
            0.02,
        ),
        mk(
            "lipschitz/gaussian",
            Structure::Lipschitz {
                distances: line_distances(&[0.0, 0.5, 1.0, 1.5, 2.0], 1.0),
            },
            ObservationModel::Gaussian,
            vec![0.0, 0.4, 0.8, 0.5, 0.1],
            0.02,
        ),
        mk(
            "unimodal/gaussian",
            Structure::Unimodal { arms: 5 },
            ObservationModel::Gaussian,
            vec![0.1, 0.2, 0.3, 0.2, 0.0],
            0.05,
        ),
        mk(
            "unimodal/bernoulli",
            Structure::Unimodal { arms: 6 },
            ObservationModel::Bernoulli,
            vec![0.1, 0.3, 0.5, 0.6, 0.4, 0.2],
            0.05,
        ),
        mk(
            "dueling/two-items",
            Structure::Dueling { items: 2 },
            ObservationModel::Bernoulli,
            preference(2, &[(1, 0, 0.4)]),
            0.05,
        ),
        mk(
            "linear/plane",
            Structure::Linear {
                features: plane.clone(),
            },
            ObservationModel::Gaussian,
            linear_theta(&plane, &[1.0, 0.0]),
            0.05,
        ),
        mk(
            "linear/space",
            Structure::Linear {
                features: space.clone(),
            },
            ObservationModel::Gaussian,
            linear_theta(&space, &[0.9, 0.3, 0.2]),
            0.05,
        ),
        mk(
            "linear/tilted",
            Structure::Linear {
                features: tilted.clone(),
            },
            ObservationModel::Gaussian,
            linear_theta(&tilted, &[0.4, 0.3, 0.2]),
            0.05,
        ),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfcheckOptions {
    /// Multiplies every cross-validation tolerance. Anything below one makes
    /// checks stricter; zero should make most of them fail.
    pub tolerance_scale: f64,
    pub grid_resolution: usize,
}

impl Default for SelfcheckOptions {
    fn default() -> Self {
        SelfcheckOptions {
            tolerance_scale: 1.0,
            grid_resolution: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

fn timed(name: impl Into<String>, f: impl FnOnce() -> Result<(bool, String)>) -> CheckOutcome {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckOutcome {
        name: name.into(),
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

/// Relative difference, with `0/0 = 0`.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn run_selfcheck(opts: &SelfcheckOptions) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let solver = SolverOptions {
        grid_resolution: opts.grid_resolution,
        ..SolverOptions::default()
    };
    for b in bundled_instances() {
        let inst = &b.instance;
        let theta = inst.theta.means();
        out.push(timed(format!("oracle/{}", b.name), || {
            let s = solve(&inst.structure, inst.model, theta, &solver, None)?;
            let o = solve_generic_oracle(&inst.structure, inst.model, theta, &solver)?;
            let gap = relative_gap(s.value, o.value);
            let tol = b.tolerance * opts.tolerance_scale;
            Ok((
                gap <= tol,
                format!("solver {:.6} oracle {:.6} rel {:.2e} tol {:.0e}", s.value, o.value, gap, tol),
            ))
        }));
        out.push(timed(format!("feasibility/{}", b.name), || {
            let s = solve(&inst.structure, inst.model, theta, &solver, None)?;
            let tol = 1e-6 * opts.tolerance_scale;
            Ok((
                s.max_violation <= tol,
                format!("max violation {:.2e} tol {:.0e}", s.max_violation, tol),
            ))
        }));
    }

    out.push(timed("linear/hand-computed", || {
        let f = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let theta = linear_theta(&f, &[1.0, 0.5]);
        let s = solve(&Structure::Linear { features: f }, ObservationModel::Gaussian, &theta, &solver, None)?;
        let tol = 1e-3 * opts.tolerance_scale;
        Ok((
            (s.value - 4.0).abs() <= tol && (s.rates[1] - 8.0).abs() <= tol,
            format!("C {:.9} (4), rate {:.9} (8)", s.value, s.rates[1]),
        ))
    }));

    out.push(timed("kl/properties", || {
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let mut worst = 0.0f64;
        for model in [ObservationModel::Bernoulli, ObservationModel::Gaussian] {
            for &p in &grid {
                worst = worst.max(model.kl_unchecked(p, p).abs());
                for &q in &grid {
                    let d = model.kl_unchecked(p, q);
                    if d.is_nan() || d < 0.0 {
                        return Ok((false, format!("{} d({p}, {q}) = {d}", model.name())));
                    }
                }
            }
        }
        let g = ObservationModel::Gaussian.kl_unchecked(0.3, 1.1);
        let symmetric = g == ObservationModel::Gaussian.kl_unchecked(1.1, 0.3);
        let tol = 1e-15 * opts.tolerance_scale;
        Ok((
            worst <= tol && symmetric,
            format!("max |d(p, p)| {worst:.1e}, gaussian symmetric {symmetric}"),
        ))
    }));

    out.push(timed("ossb/accounting", || {
        let inst = BanditInstance::new(
            Structure::Classical { arms: 3 },
            ObservationModel::Bernoulli,
            vec![0.3, 0.5, 0.6],
        )?;
        let mut p = PolicySpec::ossb().build(&inst.structure, inst.model, false)?;
        let horizon = 2000;
        let tr = run_episode(&inst, p.as_mut(), horizon, 1, 0, &[horizon])?;
        let phases = tr.phase_counts.map(|c| c.total()).unwrap_or(0);
        let identity = tr.regret_from_counts(&inst.gaps.gaps);
        let rel = relative_gap(identity, tr.final_regret);
        let tol = 1e-9 * opts.tolerance_scale;
        Ok((
            phases == horizon && rel <= tol,
            format!("phases {phases}/{horizon}, regret identity rel {rel:.1e}"),
        ))
    }));

    out.push(timed("harness/determinism", || {
        let instances = vec![
            BanditInstance::new(
                Structure::Classical { arms: 3 },
                ObservationModel::Bernoulli,
                vec![0.3, 0.5, 0.6],
            )?,
            BanditInstance::new(
                Structure::Unimodal { arms: 4 },
                ObservationModel::Gaussian,
                vec![0.0, 0.5, 1.0, 0.2],
            )?,
        ];
        let mut cfg = MonteCarloConfig {
            horizon: 500,
            n_trials: 3,
            base_seed: 42,
            parallelism: 1,
            checkpoints: Checkpoints::Auto,
            allow_epsilon_zero: false,
        };
        let a = run_monte_carlo(&instances, &PolicySpec::ossb(), &cfg)?;
        cfg.parallelism = 4;
        let b = run_monte_carlo(&instances, &PolicySpec::ossb(), &cfg)?;
        let same = a.aggregate == b.aggregate && a.episodes == b.episodes;
        Ok((same, format!("workers 1 vs 4 identical: {same}")))
    }));
    out
}

/// One line per check, then a summary line.
pub fn format_report(outcomes: &[CheckOutcome]) -> String {
    let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for o in outcomes {
        s.push_str(&format!(
            "{} {:width$}  {:>9.3} ms  {}\n",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.elapsed.as_secs_f64() * 1e3,
            o.detail,
        ));
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    s.push_str(&format!("{} checks, {} failed\n", outcomes.len(), failed));
    s
}
