//! Reference trajectories and seeded random instances.
//!
//! [`equality_case`] integrates `u' = v u + f`, `u(t0) = c` by RK4 on a grid
//! four times finer than the problem's. That trajectory turns the integral
//! inequality into an equality, so the forced bound must reproduce it.
//!
//! Random instances use ChaCha8 seeded with `seed`, one stream per instance
//! index, so instance `k` does not depend on how many others are drawn.
//! Trigonometric polynomial coefficients are drawn uniformly from `[-1, 1]`
//! in the order `a0, a1, b1, a2, b2, ...`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::gronwall::BoundProblem;
use crate::linsys::LinearSystem;
use crate::ode::rk4_step;
use crate::riccati::Trajectory;
use crate::signal::{Grid, Signal};

/// Resolution multiplier of oracle trajectories.
pub const ORACLE_REFINEMENT: usize = 4;

/// `a0 + Σ_k (a_k cos(k t) + b_k sin(k t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    pub constant: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl TrigPoly {
    fn random(rng: &mut ChaCha8Rng, degree: usize) -> Self {
        let constant = rng.gen_range(-1.0..=1.0);
        let mut cos = Vec::with_capacity(degree);
        let mut sin = Vec::with_capacity(degree);
        for _ in 0..degree {
            cos.push(rng.gen_range(-1.0..=1.0));
            sin.push(rng.gen_range(-1.0..=1.0));
        }
        Self { constant, cos, sin }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.cos
            .iter()
            .zip(&self.sin)
            .enumerate()
            .fold(self.constant, |acc, (k, (a, b))| {
                let w = (k + 1) as f64 * t;
                acc + a * w.cos() + b * w.sin()
            })
    }

    /// Shifts the constant term by the sum of all coefficient magnitudes, so
    /// the polynomial is nonnegative everywhere.
    pub fn lifted(&self) -> Self {
        let mass = self.constant.abs()
            + self.cos.iter().map(|x| x.abs()).sum::<f64>()
            + self.sin.iter().map(|x| x.abs()).sum::<f64>();
        Self {
            constant: self.constant + mass,
            ..self.clone()
        }
    }

    pub fn signal(&self) -> Signal {
        let p = self.clone();
        Signal::from_fn(move |t| p.eval(t))
    }

    /// `|p(t)|`.
    pub fn abs_signal(&self) -> Signal {
        let p = self.clone();
        Signal::from_fn(move |t| p.eval(t).abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomInstanceSpec {
    pub seed: u64,
    pub count: usize,
    pub c_range: (f64, f64),
    pub coefficient_degree: usize,
    pub horizon: f64,
    pub n: usize,
    /// Lift the polynomials before taking absolute values, making `v` and
    /// `f` smooth and free of kinks.
    pub smooth: bool,
}

impl Default for RandomInstanceSpec {
    fn default() -> Self {
        Self {
            seed: 42,
            count: 50,
            c_range: (0.1, 10.0),
            coefficient_degree: 3,
            horizon: 1.0,
            n: 2001,
            smooth: false,
        }
    }
}

/// Coefficients of one generated problem; `v = |v_poly|`, `f = |f_poly|`.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceCoefficients {
    pub c: f64,
    pub v_poly: TrigPoly,
    pub f_poly: TrigPoly,
}

impl InstanceCoefficients {
    pub fn problem(&self, grid: Grid) -> BoundProblem {
        BoundProblem::new(
            self.c,
            self.v_poly.abs_signal(),
            self.f_poly.abs_signal(),
            grid,
        )
    }
}

fn instance_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn generate_coefficients(spec: &RandomInstanceSpec) -> Vec<InstanceCoefficients> {
    (0..spec.count)
        .map(|k| {
            let mut rng = instance_rng(spec.seed, k);
            let (lo, hi) = spec.c_range;
            let c = if lo < hi { rng.gen_range(lo..=hi) } else { lo };
            let mut v_poly = TrigPoly::random(&mut rng, spec.coefficient_degree);
            let mut f_poly = TrigPoly::random(&mut rng, spec.coefficient_degree);
            if spec.smooth {
                v_poly = v_poly.lifted();
                f_poly = f_poly.lifted();
            }
            InstanceCoefficients { c, v_poly, f_poly }
        })
        .collect()
}

/// Seeded problems on `[0, horizon]` with `n` nodes, nonnegative by construction.
pub fn generate_instances(spec: &RandomInstanceSpec) -> Result<Vec<BoundProblem>> {
    let grid = Grid::new(0.0, spec.horizon, spec.n)?;
    Ok(generate_coefficients(spec)
        .iter()
        .map(|c| c.problem(grid))
        .collect())
}

/// RK4 solution of `u' = v u + f`, `u(t0) = c`, computed on a grid
/// [`ORACLE_REFINEMENT`] times finer and read back at the problem's nodes.
pub fn equality_case(p: &BoundProblem) -> Result<Trajectory> {
    p.validate()?;
    saturating_trajectory(p.c, &p.v, &p.f, &p.grid)
}

/// [`equality_case`] without the hypothesis checks, for any initial value.
pub fn saturating_trajectory(u0: f64, v: &Signal, f: &Signal, grid: &Grid) -> Result<Trajectory> {
    let fine = grid.refine(ORACLE_REFINEMENT);
    let h = fine.step();
    let rhs = |t: f64, u: f64| v.eval(t) * u + f.eval(t);
    let mut values = Vec::with_capacity(grid.len());
    values.push(u0);
    let mut u = u0;
    for i in 0..fine.len() - 1 {
        u = rk4_step(&rhs, fine.node(i), u, h);
        if (i + 1) % ORACLE_REFINEMENT == 0 {
            values.push(u);
        }
    }
    Trajectory::complete(*grid, values)
}

/// Seeded linear systems with dimension in `2..=4`; matrix and forcing
/// entries are trigonometric polynomials, `Y0` uniform in `[-1, 1]ⁿ`.
pub fn generate_systems(
    seed: u64,
    count: usize,
    degree: usize,
    grid: Grid,
) -> Result<Vec<LinearSystem>> {
    (0..count)
        .map(|k| {
            let mut rng = instance_rng(seed, k);
            let dim = rng.gen_range(2..=4usize);
            let matrix = (0..dim * dim)
                .map(|_| TrigPoly::random(&mut rng, degree).signal())
                .collect();
            let forcing = (0..dim)
                .map(|_| TrigPoly::random(&mut rng, degree).signal())
                .collect();
            let y0 = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            LinearSystem::new(matrix, forcing, y0, grid)
        })
        .collect()
}

/// `A = λ I` of dimension `dim`, no forcing.
pub fn scaled_identity_system(lambda: f64, y0: Vec<f64>, grid: Grid) -> Result<LinearSystem> {
    let dim = y0.len();
    let a = DMatrix::identity(dim, dim) * lambda;
    LinearSystem::constant(&a, &vec![0.0; dim], y0, grid)
}
