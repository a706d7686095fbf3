//! Gronwall-Bellman type bounds.
//!
//! For a nonnegative `u` with
//!
//! ```text
//! u(t) <= c + ∫_{t0}^{t} v u + ∫_{t0}^{t} f,    v >= 0,  ∫_{t0}^{t} f >= 0,
//! ```
//!
//! [`general_bound`] returns
//!
//! ```text
//! c exp{V(t)} + ∫_{t0}^{t} exp{V(t) - V(ζ)} f(ζ) dζ,    V(t) = ∫_{t0}^{t} v,
//! ```
//!
//! which reduces to [`classic_bound`] `c exp{V(t)}` when `f ≡ 0`.
//! [`two_sided_envelope`] gives the matching lower and upper curves for a
//! positive function satisfying the inequality in both time directions.

use crate::error::{Error, Result};
use crate::signal::{cumulative_samples, weighted_tail_curve, CumulativeIntegral, Grid, Signal};

/// Data of the forced integral inequality: constant `c`, rate `v`, forcing `f`.
#[derive(Debug, Clone)]
pub struct BoundProblem {
    pub c: f64,
    pub v: Signal,
    pub f: Signal,
    pub grid: Grid,
}

/// Node samples of a validated [`BoundProblem`].
#[derive(Debug, Clone)]
pub struct ProblemSamples {
    pub v: Vec<f64>,
    pub f: Vec<f64>,
    /// `V(t) = ∫ v`.
    pub rate_integral: CumulativeIntegral,
    /// `F(t) = ∫ f`.
    pub forcing_integral: CumulativeIntegral,
}

impl BoundProblem {
    pub fn new(c: f64, v: impl Into<Signal>, f: impl Into<Signal>, grid: Grid) -> Self {
        Self {
            c,
            v: v.into(),
            f: f.into(),
            grid,
        }
    }

    /// Checks `c >= 0`, `v >= 0` and `∫f >= 0` at every node and returns the
    /// samples the bound formulas need.
    pub fn validate(&self) -> Result<ProblemSamples> {
        let grid = &self.grid;
        if !self.c.is_finite() || self.c < 0.0 {
            return Err(Error::Validation {
                hypothesis: "c >= 0".into(),
                node: 0,
                t: grid.t0(),
                value: self.c,
            });
        }
        let v = self.v.sample_named(grid, "v")?;
        require_nonnegative(&v, grid, "v(t) >= 0")?;
        let f = self.f.sample_named(grid, "f")?;
        let rate_integral = cumulative_samples(&v, grid)?;
        let forcing_integral = cumulative_samples(&f, grid)?;

        // F is a sum of signed increments; allow only accumulated roundoff below zero.
        let mut magnitude = 0.0;
        for (i, (&big_f, inc)) in forcing_integral
            .values()
            .iter()
            .zip(std::iter::once(&0.0).chain(forcing_integral.increments()))
            .enumerate()
        {
            magnitude += inc.abs();
            if big_f < -64.0 * f64::EPSILON * magnitude {
                return Err(Error::Validation {
                    hypothesis: "integral of f from t0 to t >= 0".into(),
                    node: i,
                    t: grid.node(i),
                    value: big_f,
                });
            }
        }
        Ok(ProblemSamples {
            v,
            f,
            rate_integral,
            forcing_integral,
        })
    }
}

pub(crate) fn require_nonnegative(samples: &[f64], grid: &Grid, hypothesis: &str) -> Result<()> {
    match samples.iter().position(|&x| x < 0.0) {
        None => Ok(()),
        Some(node) => Err(Error::Validation {
            hypothesis: hypothesis.into(),
            node,
            t: grid.node(node),
            value: samples[node],
        }),
    }
}

/// Lower and upper curves sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub grid: Grid,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Envelope {
    /// True when `lower <= value <= upper` at every node, up to `slack(value)`.
    pub fn contains<S>(&self, values: &[f64], slack: S) -> bool
    where
        S: Fn(f64) -> f64,
    {
        values.len() == self.lower.len()
            && values
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&x, (&lo, &hi))| lo - slack(x) <= x && x <= hi + slack(x))
    }
}

/// `c exp{∫ v}`; the forcing term of the problem is ignored.
pub fn classic_bound(p: &BoundProblem) -> Result<Vec<f64>> {
    let s = p.validate()?;
    Ok(s.rate_integral
        .values()
        .iter()
        .map(|v| p.c * v.exp())
        .collect())
}

/// `c exp{V(t)} + ∫ exp{V(t) - V(ζ)} f(ζ) dζ` at every node.
pub fn general_bound(p: &BoundProblem) -> Result<Vec<f64>> {
    let s = p.validate()?;
    let tail = weighted_tail_curve(&s.rate_integral, &s.f)?;
    Ok(s.rate_integral
        .values()
        .iter()
        .zip(tail)
        .map(|(v, tail)| p.c * v.exp() + tail)
        .collect())
}

/// Two-sided envelope for a positive `u` with `u(t0) = u0` satisfying the
/// forced inequality in both time directions:
///
/// ```text
/// u0 e^{-V(t)} - ∫ e^{-(V(t)-V(ζ))} f  <=  u(t)  <=  u0 e^{V(t)} + ∫ e^{V(t)-V(ζ)} f
/// ```
///
/// The lower curve is reported as computed and may be negative.
pub fn two_sided_envelope(u0: f64, v: &Signal, f: &Signal, grid: &Grid) -> Result<Envelope> {
    if !u0.is_finite() || u0 < 0.0 {
        return Err(Error::Validation {
            hypothesis: "u(t0) >= 0".into(),
            node: 0,
            t: grid.t0(),
            value: u0,
        });
    }
    let v = v.sample_named(grid, "v")?;
    require_nonnegative(&v, grid, "v(t) >= 0")?;
    let f = f.sample_named(grid, "f")?;
    require_nonnegative(&f, grid, "f(t) >= 0")?;
    envelope_from_samples(u0, &v, &f, grid)
}

pub(crate) fn envelope_from_samples(
    u0: f64,
    v: &[f64],
    f: &[f64],
    grid: &Grid,
) -> Result<Envelope> {
    let growth = cumulative_samples(v, grid)?;
    let decay = growth.negated();
    let upper_tail = weighted_tail_curve(&growth, f)?;
    let lower_tail = weighted_tail_curve(&decay, f)?;
    let upper = growth
        .values()
        .iter()
        .zip(upper_tail)
        .map(|(w, tail)| u0 * w.exp() + tail)
        .collect();
    let lower = decay
        .values()
        .iter()
        .zip(lower_tail)
        .map(|(w, tail)| u0 * w.exp() - tail)
        .collect();
    Ok(Envelope {
        grid: *grid,
        lower,
        upper,
    })
}

/// Ten times the composite trapezoid error bound `h² (b - a) M / 12`, where
/// `M` bounds the integrand's second derivative.
pub fn quadrature_tolerance(grid: &Grid, max_second_derivative: f64) -> f64 {
    let h = grid.step();
    10.0 * h * h * (grid.t1() - grid.t0()) * max_second_derivative / 12.0
}
