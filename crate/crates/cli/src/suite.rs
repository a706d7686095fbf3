//! Oracle-backed property suites behind the `verify-suite` mode.

use std::thread;

use gronwall_core::linsys::norm_envelope;
use gronwall_core::oracle::{
    equality_case, generate_coefficients, generate_systems, RandomInstanceSpec,
};
use gronwall_core::riccati::{
    build_comparison, check_comparison_hypotheses_with, riccati_residual, verify_comparison,
    SquaredDifference,
};
use gronwall_core::{classic_bound, general_bound, two_sided_envelope, BoundProblem, Grid, Signal};

/// Pass counts of one suite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
}

impl SuiteResult {
    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

/// Default node counts per suite, overridable as a whole.
#[derive(Debug, Clone, Copy)]
pub struct SuiteGrids {
    pub bound: usize,
    pub envelope: usize,
    pub comparison: usize,
    pub linsys: usize,
}

impl Default for SuiteGrids {
    fn default() -> Self {
        Self {
            bound: 2001,
            envelope: 10001,
            comparison: 40001,
            linsys: 2001,
        }
    }
}

impl SuiteGrids {
    pub fn uniform(n: usize) -> Self {
        Self {
            bound: n,
            envelope: n,
            comparison: n,
            linsys: n,
        }
    }
}

fn rel(x: f64) -> f64 {
    1.0 + x.abs()
}

fn instances(seed: u64, count: usize, n: usize, smooth: bool) -> Vec<BoundProblem> {
    let spec = RandomInstanceSpec {
        seed,
        count,
        n,
        smooth,
        ..Default::default()
    };
    let grid = Grid::new(0.0, spec.horizon, n).expect("suite grid");
    generate_coefficients(&spec)
        .iter()
        .map(|c| c.problem(grid))
        .collect()
}

fn tally(name: &'static str, outcomes: impl Iterator<Item = bool>) -> SuiteResult {
    let (mut passed, mut total) = (0, 0);
    for ok in outcomes {
        total += 1;
        passed += ok as usize;
    }
    SuiteResult {
        name,
        passed,
        total,
    }
}

fn bound_tightness(seed: u64, count: usize, n: usize) -> SuiteResult {
    tally(
        "general_bound matches equality case (1e-4 rel)",
        instances(seed, count, n, false).iter().map(|p| {
            let (Ok(b), Ok(u)) = (general_bound(p), equality_case(p)) else {
                return false;
            };
            b.iter()
                .zip(&u.values)
                .all(|(b, u)| (b - u).abs() <= 1e-4 * u.abs())
        }),
    )
}

fn bound_reduction(seed: u64, count: usize, n: usize) -> SuiteResult {
    tally(
        "general_bound reduces to classic_bound when f = 0",
        instances(seed.wrapping_add(1), count, n, false)
            .into_iter()
            .map(|mut p| {
                p.f = Signal::constant(0.0);
                let (Ok(a), Ok(b)) = (classic_bound(&p), general_bound(&p)) else {
                    return false;
                };
                a.iter()
                    .zip(&b)
                    .all(|(a, b)| (a - b).abs() <= 1e-12 * rel(*a))
            }),
    )
}

fn envelope_containment(seed: u64, count: usize, n: usize) -> SuiteResult {
    tally(
        "equality case inside two-sided envelope (1e-7 rel)",
        instances(seed.wrapping_add(2), count, n, false)
            .iter()
            .map(|p| {
                let (Ok(e), Ok(u)) = (
                    two_sided_envelope(p.c, &p.v, &p.f, &p.grid),
                    equality_case(p),
                ) else {
                    return false;
                };
                e.contains(&u.values, |x| 1e-7 * rel(x))
            }),
    )
}

fn comparison_pipeline(seed: u64, count: usize, n: usize) -> SuiteResult {
    tally(
        "comparison construction and hypotheses",
        instances(seed.wrapping_add(3), count, n, true)
            .iter()
            .map(|p| {
                let Ok(u) = equality_case(p) else {
                    return false;
                };
                let Ok(u) = Signal::sampled(p.grid, u.values) else {
                    return false;
                };
                let Ok(cmp) = build_comparison(p, &u) else {
                    return false;
                };
                let residuals_ok = [
                    riccati_residual(&cmp.riccati, &cmp.y),
                    riccati_residual(&cmp.linear, &cmp.x),
                ]
                .into_iter()
                .all(|r| r.map(|r| r.satisfies_equation()).unwrap_or(false));
                let hypotheses_ok = [SquaredDifference::AsPrinted, SquaredDifference::Linear]
                    .into_iter()
                    .all(|mode| {
                        check_comparison_hypotheses_with(&cmp.setup(), &p.grid, mode)
                            .map(|r| r.condition_holds)
                            .unwrap_or(false)
                    });
                let comparison_ok = verify_comparison(&cmp.y, &cmp.x)
                    .map(|r| r.holds)
                    .unwrap_or(false);
                cmp.min_quadratic() >= -1e-9 && residuals_ok && hypotheses_ok && comparison_ok
            }),
    )
}

fn linsys_containment(seed: u64, count: usize, n: usize) -> SuiteResult {
    let grid = Grid::new(0.0, 1.0, n).expect("suite grid");
    let systems = generate_systems(seed.wrapping_add(4), count, 3, grid).unwrap_or_default();
    let mut result = tally(
        "linear system norm inside envelope",
        systems
            .iter()
            .map(|s| norm_envelope(s).map(|r| r.contained).unwrap_or(false)),
    );
    result.total = count;
    result
}

/// Runs every suite on `count` seeded instances each. Suites run on
/// separate threads; results come back in a fixed order.
pub fn run_all(seed: u64, count: usize, grids: SuiteGrids) -> Vec<SuiteResult> {
    thread::scope(|s| {
        let handles = [
            s.spawn(move || bound_tightness(seed, count, grids.bound)),
            s.spawn(move || bound_reduction(seed, count, grids.bound)),
            s.spawn(move || envelope_containment(seed, count, grids.envelope)),
            s.spawn(move || comparison_pipeline(seed, count, grids.comparison)),
            s.spawn(move || linsys_containment(seed, count, grids.linsys)),
        ];
        handles
            .into_iter()
            .map(|h| h.join().expect("suite thread panicked"))
            .collect()
    })
}
