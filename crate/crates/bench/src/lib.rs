//! Fixtures shared by the criterion benchmarks.

use gronwall_core::oracle::{generate_coefficients, RandomInstanceSpec};
use gronwall_core::{BoundProblem, Grid};

/// Seeded smooth problem on `[0, 1]` with `n` nodes.
pub fn smooth_problem(n: usize) -> BoundProblem {
    let spec = RandomInstanceSpec {
        count: 1,
        smooth: true,
        ..Default::default()
    };
    let grid = Grid::new(0.0, 1.0, n).expect("valid grid");
    generate_coefficients(&spec)[0].problem(grid)
}
