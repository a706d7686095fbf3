//! Scalar Riccati equations `y' + f y² + g y + h = 0`, the comparison
//! hypothesis check for a pair of them, and the Riccati/linear pair built
//! from a forced Gronwall problem.
//!
//! All equations are stored in the `y' + f y² + g y + h = 0` form. An
//! equation written as `y' + A y² = v y + v F` is therefore held as the
//! coefficients `(A, -v, -v F)`.

use crate::error::{Error, Result};
use crate::gronwall::{require_nonnegative, BoundProblem};
use crate::ode::rk4_step;
use crate::signal::{cumulative_samples, trapezoid_error_estimate, Grid, Signal};

/// Magnitude beyond which a Riccati trajectory is treated as escaped.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

/// Relative tolerance for hypothesis, comparison and validation checks.
pub const RELATIVE_SLACK: f64 = 1e-7;

pub(crate) fn relative_slack(magnitude: f64) -> f64 {
    RELATIVE_SLACK * (1.0 + magnitude.abs())
}

/// Coefficients `(f, g, h)` of `y' + f y² + g y + h = 0`.
#[derive(Debug, Clone)]
pub struct RiccatiCoeffs {
    pub f: Signal,
    pub g: Signal,
    pub h: Signal,
}

impl RiccatiCoeffs {
    pub fn new(f: impl Into<Signal>, g: impl Into<Signal>, h: impl Into<Signal>) -> Self {
        Self {
            f: f.into(),
            g: g.into(),
            h: h.into(),
        }
    }

    /// Right-hand side of the equation solved for `y'`.
    pub fn rate(&self, t: f64, y: f64) -> f64 {
        -(self.f.eval(t) * y * y + self.g.eval(t) * y + self.h.eval(t))
    }

    fn sample(&self, grid: &Grid) -> Result<[Vec<f64>; 3]> {
        Ok([
            self.f.sample_named(grid, "f")?,
            self.g.sample_named(grid, "g")?,
            self.h.sample_named(grid, "h")?,
        ])
    }
}

/// Values of a solution on a grid, truncated after finite-time escape.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: Grid,
    /// Defined values; shorter than the grid when `blowup_index` is set.
    pub values: Vec<f64>,
    /// One past the node where `|y|` first exceeded [`BLOWUP_THRESHOLD`].
    pub blowup_index: Option<usize>,
}

impl Trajectory {
    /// A trajectory defined at every node of `grid`.
    pub fn complete(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Argument(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            blowup_index: None,
        })
    }

    pub fn is_complete(&self) -> bool {
        self.blowup_index.is_none()
    }

    /// Time of the last defined node.
    pub fn horizon(&self) -> f64 {
        self.grid.node(self.values.len() - 1)
    }
}

/// RK4 solution of `y' = -(f y² + g y + h)` from `y(t0) = y0`.
///
/// Escape is data, not an error: stepping stops at the first node where
/// `|y| > BLOWUP_THRESHOLD` or the state is not finite, and that node is the
/// last one kept.
pub fn solve_riccati(rc: &RiccatiCoeffs, y0: f64, grid: &Grid) -> Result<Trajectory> {
    if !y0.is_finite() {
        return Err(Error::Argument(format!("initial value {y0} is not finite")));
    }
    let h = grid.step();
    let rhs = |t: f64, y: f64| rc.rate(t, y);
    let mut values = Vec::with_capacity(grid.len());
    values.push(y0);
    let mut y = y0;
    for i in 0..grid.len() - 1 {
        let next = rk4_step(&rhs, grid.node(i), y, h);
        if !next.is_finite() || next.abs() > BLOWUP_THRESHOLD {
            let kept = if next.is_nan() {
                f64::INFINITY.copysign(y)
            } else {
                next
            };
            values.push(kept);
            return Ok(Trajectory {
                grid: *grid,
                values,
                blowup_index: Some(i + 2),
            });
        }
        values.push(next);
        y = next;
    }
    Ok(Trajectory {
        grid: *grid,
        values,
        blowup_index: None,
    })
}

/// Solution of `x' = drift(t) x + forcing(t)` by the variation-of-constants
/// formula
///
/// ```text
/// x(t) = e^{D(t)} [x0 + ∫_{t0}^{t} e^{-D(ζ)} forcing(ζ) dζ],   D = ∫ drift,
/// ```
///
/// with both integrals taken by the trapezoid rule (no time stepping).
pub fn solve_linear_cauchy(
    drift: &Signal,
    forcing: &Signal,
    x0: f64,
    grid: &Grid,
) -> Result<Trajectory> {
    if !x0.is_finite() {
        return Err(Error::Argument(format!("initial value {x0} is not finite")));
    }
    let d = cumulative_samples(&drift.sample_named(grid, "drift")?, grid)?;
    let forcing = forcing.sample_named(grid, "forcing")?;
    let integrand: Vec<f64> = d
        .values()
        .iter()
        .zip(&forcing)
        .map(|(di, fi)| (-di).exp() * fi)
        .collect();
    let inner = cumulative_samples(&integrand, grid)?;
    let values: Vec<f64> = d
        .values()
        .iter()
        .zip(inner.values())
        .map(|(di, ii)| di.exp() * (x0 + ii))
        .collect();
    if let Some(node) = values.iter().position(|x| !x.is_finite()) {
        return Err(Error::Evaluation {
            signal: "cauchy solution".into(),
            node,
            t: grid.node(node),
            value: values[node],
        });
    }
    Trajectory::complete(*grid, values)
}

/// Second-order finite-difference derivative: central in the interior,
/// one-sided three-point at the ends.
fn derivative(values: &[f64], h: f64) -> Vec<f64> {
    let m = values.len();
    if m == 2 {
        let d = (values[1] - values[0]) / h;
        return vec![d, d];
    }
    let mut out = Vec::with_capacity(m);
    out.push((-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h));
    for i in 1..m - 1 {
        out.push((values[i + 1] - values[i - 1]) / (2.0 * h));
    }
    out.push((3.0 * values[m - 1] - 4.0 * values[m - 2] + values[m - 3]) / (2.0 * h));
    out
}

/// Five-point estimate of `|y'''|` at every node (stencil shifted at the ends).
fn third_derivative_magnitude(values: &[f64], h: f64) -> Vec<f64> {
    let m = values.len();
    if m < 5 {
        return vec![0.0; m];
    }
    (0..m)
        .map(|i| {
            let c = i.clamp(2, m - 3);
            let d3 = values[c + 2] - 2.0 * values[c + 1] + 2.0 * values[c - 1] - values[c - 2];
            (d3 / (2.0 * h * h * h)).abs()
        })
        .collect()
}

fn defined_grid(traj: &Trajectory) -> Result<Grid> {
    let m = traj.values.len();
    if m < 2 {
        return Err(Error::Argument(format!(
            "trajectory has {m} defined nodes; at least 2 are needed"
        )));
    }
    if m > traj.grid.len() {
        return Err(Error::Argument(format!(
            "trajectory has {m} values for a grid of {} nodes",
            traj.grid.len()
        )));
    }
    if m == traj.grid.len() {
        Ok(traj.grid)
    } else {
        traj.grid.prefix(m - 1)
    }
}

/// Residual profile of a trajectory against an equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    /// `y' + f y² + g y + h` at each defined node, with `y'` by finite differences.
    pub values: Vec<f64>,
    /// Per-node tolerance `10 h² (1 + scale)`, where `scale` is the largest
    /// term magnitude of the equation on the five-node stencil plus the
    /// estimated `|y'''|`.
    pub slack: Vec<f64>,
}

impl Residual {
    /// The trajectory solves the differential inequality `y' + f y² + g y + h >= 0`.
    pub fn satisfies_inequality(&self) -> bool {
        self.values.iter().zip(&self.slack).all(|(r, s)| *r >= -s)
    }

    /// The trajectory solves the equation itself.
    pub fn satisfies_equation(&self) -> bool {
        self.values
            .iter()
            .zip(&self.slack)
            .all(|(r, s)| r.abs() <= *s)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// `y' + f y² + g y + h` along the defined part of `traj`, with its slack.
pub fn riccati_residual(rc: &RiccatiCoeffs, traj: &Trajectory) -> Result<Residual> {
    let grid = defined_grid(traj)?;
    let y = &traj.values;
    let h = grid.step();
    let [f, g, c] = rc.sample(&grid)?;
    let dy = derivative(y, h);
    let d3 = third_derivative_magnitude(y, h);
    let terms: Vec<f64> = (0..y.len())
        .map(|i| y[i].abs() + (f[i] * y[i] * y[i]).abs() + (g[i] * y[i]).abs() + c[i].abs())
        .collect();
    let values = (0..y.len())
        .map(|i| dy[i] + f[i] * y[i] * y[i] + g[i] * y[i] + c[i])
        .collect();
    let m = y.len();
    let slack = (0..m)
        .map(|i| {
            let lo = i.saturating_sub(2);
            let hi = (i + 2).min(m - 1);
            let scale = terms[lo..=hi].iter().fold(0.0_f64, |a, &b| a.max(b)) + d3[i];
            10.0 * h * h * (1.0 + scale)
        })
        .collect();
    Ok(Residual { values, slack })
}

/// How the coefficient difference `f2 - f1` enters the comparison integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SquaredDifference {
    /// `(f2 - f1)² y2²`.
    #[default]
    AsPrinted,
    /// `(f2 - f1) y2²`.
    Linear,
}

/// Two equations, a solution `y2` of the second, solutions `eta1`, `eta2` of
/// the corresponding differential inequalities, and the constant `gamma`.
#[derive(Debug, Clone)]
pub struct ComparisonSetup {
    pub eq1: RiccatiCoeffs,
    pub eq2: RiccatiCoeffs,
    pub y2: Trajectory,
    pub eta1: Trajectory,
    pub eta2: Trajectory,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub f1_nonneg: bool,
    /// `γ - y2(t0) + ∫ exp{∫[f1(η1+η2) + g1]} [Δf·y2² + Δg·y2 + Δh]` per node.
    pub integral_curve: Vec<f64>,
    pub condition_holds: bool,
    /// First node where the integral condition fails, with its value.
    pub first_violation: Option<(usize, f64)>,
    /// `eta1` satisfies the first differential inequality.
    pub eta1_admissible: bool,
    /// `eta2` satisfies the second differential inequality.
    pub eta2_admissible: bool,
}

/// [`check_comparison_hypotheses_with`] using the integrand as printed.
pub fn check_comparison_hypotheses(
    setup: &ComparisonSetup,
    grid: &Grid,
) -> Result<HypothesisReport> {
    check_comparison_hypotheses_with(setup, grid, SquaredDifference::AsPrinted)
}

/// Evaluates the hypotheses of the Riccati comparison theorem on `grid`.
///
/// The integral condition is evaluated over the nodes where `y2`, `eta1` and
/// `eta2` are all defined.
pub fn check_comparison_hypotheses_with(
    setup: &ComparisonSetup,
    grid: &Grid,
    mode: SquaredDifference,
) -> Result<HypothesisReport> {
    for (name, traj) in [
        ("y2", &setup.y2),
        ("eta1", &setup.eta1),
        ("eta2", &setup.eta2),
    ] {
        traj.grid.ensure_same(grid, name)?;
    }
    let y20 = setup.y2.values[0];
    for (name, traj) in [("eta1", &setup.eta1), ("eta2", &setup.eta2)] {
        if y20 > traj.values[0] {
            return Err(Error::Validation {
                hypothesis: format!("y2(t0) <= {name}(t0)"),
                node: 0,
                t: grid.t0(),
                value: traj.values[0] - y20,
            });
        }
    }
    if !(y20..=setup.eta1.values[0]).contains(&setup.gamma) {
        return Err(Error::Validation {
            hypothesis: "gamma in [y2(t0), eta1(t0)]".into(),
            node: 0,
            t: grid.t0(),
            value: setup.gamma,
        });
    }

    let f1_all = setup.eq1.f.sample_named(grid, "f1")?;
    let f1_nonneg = require_nonnegative(&f1_all, grid, "f1(t) >= 0").is_ok();

    let m = setup
        .y2
        .values
        .len()
        .min(setup.eta1.values.len())
        .min(setup.eta2.values.len());
    if m < 2 {
        return Err(Error::Argument(
            "fewer than two common defined nodes".into(),
        ));
    }
    let sub = if m == grid.len() {
        *grid
    } else {
        grid.prefix(m - 1)?
    };
    let [f1, g1, h1] = setup.eq1.sample(&sub)?;
    let [f2, g2, h2] = setup.eq2.sample(&sub)?;
    let (y2, e1, e2) = (&setup.y2.values, &setup.eta1.values, &setup.eta2.values);

    let exponent: Vec<f64> = (0..m).map(|i| f1[i] * (e1[i] + e2[i]) + g1[i]).collect();
    let weight = cumulative_samples(&exponent, &sub)?;
    let integrand: Vec<f64> = (0..m)
        .map(|i| {
            let df = f2[i] - f1[i];
            let quad = match mode {
                SquaredDifference::AsPrinted => df * df,
                SquaredDifference::Linear => df,
            };
            let bracket = quad * y2[i] * y2[i] + (g2[i] - g1[i]) * y2[i] + (h2[i] - h1[i]);
            weight.values()[i].exp() * bracket
        })
        .collect();
    let integral = cumulative_samples(&integrand, &sub)?;
    let abs_integral =
        cumulative_samples(&integrand.iter().map(|x| x.abs()).collect::<Vec<_>>(), &sub)?;
    let offset = setup.gamma - y20;
    let integral_curve: Vec<f64> = integral.values().iter().map(|x| offset + x).collect();

    let first_violation = integral_curve
        .iter()
        .zip(abs_integral.values())
        .position(|(&x, &mag)| x < -relative_slack(setup.gamma.abs() + y20.abs() + mag))
        .map(|i| (i, integral_curve[i]));

    let eta1_admissible = riccati_residual(&setup.eq1, &setup.eta1)?.satisfies_inequality();
    let eta2_admissible = riccati_residual(&setup.eq2, &setup.eta2)?.satisfies_inequality();

    Ok(HypothesisReport {
        f1_nonneg,
        condition_holds: f1_nonneg && first_violation.is_none(),
        integral_curve,
        first_violation,
        eta1_admissible,
        eta2_admissible,
    })
}

/// Riccati/linear pair built from a forced Gronwall problem and a function
/// `u` satisfying its integral inequality.
#[derive(Debug, Clone)]
pub struct Comparison {
    /// `A(t) = v [c + ∫vu - u + F] / [c + ∫vu]²` at the grid nodes.
    pub quadratic: Vec<f64>,
    /// `y' + A y² = v y + v F`, stored as `(A, -v, -v F)`.
    pub riccati: RiccatiCoeffs,
    /// `x' = v x + v F`, stored as `(0, -v, -v F)`.
    pub linear: RiccatiCoeffs,
    /// `y(t) = c + ∫ v u`.
    pub y: Trajectory,
    /// Variation-of-constants solution of the linear equation from `c`.
    pub x: Trajectory,
    /// Per-node tolerance used for the integral inequality.
    pub slack: Vec<f64>,
    /// The same tolerance carried through the definition of `A`.
    pub quadratic_slack: Vec<f64>,
}

impl Comparison {
    /// The comparison-theorem setup with the Riccati equation second and the
    /// linear one first, `eta1 = x`, `eta2 = y` and `gamma = y(t0)`.
    pub fn setup(&self) -> ComparisonSetup {
        ComparisonSetup {
            eq1: self.linear.clone(),
            eq2: self.riccati.clone(),
            y2: self.y.clone(),
            eta1: self.x.clone(),
            eta2: self.y.clone(),
            gamma: self.y.values[0],
        }
    }

    pub fn min_quadratic(&self) -> f64 {
        self.quadratic.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Builds the Riccati equation satisfied by `y = c + ∫vu` and the linear
/// equation whose solution dominates it.
///
/// `u` must satisfy `0 <= u <= c + ∫vu + F` at every node. The tolerance on
/// that check is `1e-7 (1 + |rhs|)` plus ten times the estimated trapezoid
/// error of the two running integrals.
pub fn build_comparison(p: &BoundProblem, u: &Signal) -> Result<Comparison> {
    let s = p.validate()?;
    let grid = p.grid;
    let u = u.sample_named(&grid, "u")?;
    require_nonnegative(&u, &grid, "u(t) >= 0")?;

    let vu: Vec<f64> = s.v.iter().zip(&u).map(|(v, u)| v * u).collect();
    let running = cumulative_samples(&vu, &grid)?;
    let err_vu = trapezoid_error_estimate(&vu, &grid);
    let err_f = trapezoid_error_estimate(&s.f, &grid);
    let big_f = s.forcing_integral.values();

    let n = grid.len();
    let mut y = Vec::with_capacity(n);
    let mut quadratic = Vec::with_capacity(n);
    let mut slack = Vec::with_capacity(n);
    let mut quadratic_slack = Vec::with_capacity(n);
    for i in 0..n {
        let yi = p.c + running.values()[i];
        let rhs = yi + big_f[i];
        let tol = relative_slack(rhs) + 10.0 * (err_vu[i] + err_f[i]);
        if u[i] > rhs + tol {
            return Err(Error::Validation {
                hypothesis: "u(t) <= c + int v u + int f".into(),
                node: i,
                t: grid.node(i),
                value: u[i] - rhs,
            });
        }
        if yi <= 0.0 {
            return Err(Error::Validation {
                hypothesis: "c + int v u > 0".into(),
                node: i,
                t: grid.node(i),
                value: yi,
            });
        }
        let a = s.v[i] * (rhs - u[i]) / (yi * yi);
        let a_tol = s.v[i] * tol / (yi * yi);
        if a < -a_tol {
            return Err(Error::Validation {
                hypothesis: "A(t) >= 0".into(),
                node: i,
                t: grid.node(i),
                value: a,
            });
        }
        y.push(yi);
        quadratic.push(a);
        slack.push(tol);
        quadratic_slack.push(a_tol);
    }

    let neg_v: Vec<f64> = s.v.iter().map(|v| -v).collect();
    let v_big_f: Vec<f64> = s.v.iter().zip(big_f).map(|(v, f)| v * f).collect();
    let neg_v_big_f: Vec<f64> = v_big_f.iter().map(|x| -x).collect();

    let riccati = RiccatiCoeffs::new(
        Signal::sampled(grid, quadratic.clone())?,
        Signal::sampled(grid, neg_v.clone())?,
        Signal::sampled(grid, neg_v_big_f.clone())?,
    );
    let linear = RiccatiCoeffs::new(
        0.0,
        Signal::sampled(grid, neg_v)?,
        Signal::sampled(grid, neg_v_big_f)?,
    );
    let x = solve_linear_cauchy(
        &Signal::sampled(grid, s.v.clone())?,
        &Signal::sampled(grid, v_big_f)?,
        p.c,
        &grid,
    )?;

    Ok(Comparison {
        quadratic,
        riccati,
        linear,
        y: Trajectory::complete(grid, y)?,
        x,
        slack,
        quadratic_slack,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// `y <= x + slack` at every node.
    pub holds: bool,
    /// First node with `y > x + slack`, and `y - x` there.
    pub first_violation: Option<(usize, f64)>,
    pub max_abs_gap: f64,
}

/// Checks `y <= x` node by node with tolerance `1e-7 (1 + max(|y|, |x|))`.
pub fn verify_comparison(y: &Trajectory, x: &Trajectory) -> Result<ComparisonReport> {
    y.grid.ensure_same(&x.grid, "verify_comparison")?;
    if y.values.len() != x.values.len() {
        return Err(Error::Argument(format!(
            "trajectories have {} and {} defined nodes",
            y.values.len(),
            x.values.len()
        )));
    }
    let mut first_violation = None;
    let mut max_abs_gap = 0.0_f64;
    for (i, (&yi, &xi)) in y.values.iter().zip(&x.values).enumerate() {
        let gap = yi - xi;
        max_abs_gap = max_abs_gap.max(gap.abs());
        if first_violation.is_none() && gap > relative_slack(yi.abs().max(xi.abs())) {
            first_violation = Some((i, gap));
        }
    }
    Ok(ComparisonReport {
        holds: first_violation.is_none(),
        first_violation,
        max_abs_gap,
    })
}

/// Both sides of
///
/// ```text
/// ∫ e^{-V(ζ)} v(ζ) F(ζ) dζ = -e^{-V(t)} F(t) + ∫ e^{-V(ζ)} f(ζ) dζ
/// ```
///
/// on every node, with `V = ∫v`, `F = ∫f`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartsIdentity {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl PartsIdentity {
    pub fn max_discrepancy(&self) -> f64 {
        self.lhs
            .iter()
            .zip(&self.rhs)
            .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()))
    }

    /// Largest `|lhs - rhs| / (1 + |lhs|)`.
    pub fn max_relative_discrepancy(&self) -> f64 {
        self.lhs.iter().zip(&self.rhs).fold(0.0, |m, (a, b)| {
            f64::max(m, (a - b).abs() / (1.0 + a.abs()))
        })
    }
}

pub fn integration_by_parts(v: &Signal, f: &Signal, grid: &Grid) -> Result<PartsIdentity> {
    let v = v.sample_named(grid, "v")?;
    let f = f.sample_named(grid, "f")?;
    let big_v = cumulative_samples(&v, grid)?;
    let big_f = cumulative_samples(&f, grid)?;
    let decay: Vec<f64> = big_v.values().iter().map(|x| (-x).exp()).collect();

    let left: Vec<f64> = (0..grid.len())
        .map(|i| decay[i] * v[i] * big_f.values()[i])
        .collect();
    let right: Vec<f64> = (0..grid.len()).map(|i| decay[i] * f[i]).collect();
    let lhs = cumulative_samples(&left, grid)?.values().to_vec();
    let tail = cumulative_samples(&right, grid)?;
    let rhs = (0..grid.len())
        .map(|i| -decay[i] * big_f.values()[i] + tail.values()[i])
        .collect();
    Ok(PartsIdentity { lhs, rhs })
}
