//! The bounded-variable simplex on a small production-planning problem.
//!
//! ```text
//! cargo run --example lp_solver
//! ```

use narp::lp::{LinearProgram, Relation};

fn main() {
    // maximize 3x + 5y  s.t.  x ≤ 4,  2y ≤ 12,  3x + 2y ≤ 18,  x, y ≥ 0
    let mut lp = LinearProgram::new();
    let x = lp.add_var(0.0, 4.0, -3.0);
    let y = lp.add_var(0.0, f64::INFINITY, -5.0);
    lp.add_row(&[(y, 2.0)], Relation::Le, 12.0);
    lp.add_row(&[(x, 3.0), (y, 2.0)], Relation::Le, 18.0);
    let sol = lp.solve().expect("feasible and bounded");
    println!("x = {}, y = {}, objective {} after {} pivots", sol.value(x), sol.value(y), -sol.objective, sol.pivots);
    println!("largest constraint violation {:.1e}", lp.max_violation(&sol.values));

    let mut bad = LinearProgram::new();
    let z = bad.add_var(0.0, 1.0, 1.0);
    bad.add_row(&[(z, 1.0)], Relation::Ge, 2.0);
    println!("z ≤ 1 and z ≥ 2: {:?}", bad.solve().unwrap_err());
}
