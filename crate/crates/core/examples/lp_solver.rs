//! The dense simplex solver on its own.
//!
//! ```text
//! cargo run --example lp_solver
//! ```

use ossb::lp::{LpProblem, LpStatus, Relation};

fn main() {
    // minimize 2x + 3y  s.t.  x + y ≥ 4,  x + 3y ≥ 6,  x ≤ 3
    let mut lp = LpProblem::new(vec![2.0, 3.0]);
    lp.add(vec![1.0, 1.0], Relation::Ge, 4.0);
    lp.add(vec![1.0, 3.0], Relation::Ge, 6.0);
    lp.add(vec![1.0, 0.0], Relation::Le, 3.0);
    let sol = lp.solve();
    assert_eq!(sol.status, LpStatus::Optimal);
    println!("x = {:?}, objective = {}", sol.x, sol.objective);
    println!("duals = {:?}", sol.duals);
    println!("max violation = {:.1e}", lp.max_violation(&sol.x));

    let mut bad = LpProblem::new(vec![1.0]);
    bad.add(vec![1.0], Relation::Ge, 2.0);
    bad.add(vec![1.0], Relation::Le, 1.0);
    println!("contradictory bounds: {:?}", bad.solve().status);

    let mut open = LpProblem::new(vec![-1.0]);
    open.add(vec![1.0], Relation::Ge, 1.0);
    println!("nothing caps x: {:?}", open.solve().status);
}
