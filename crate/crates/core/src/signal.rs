//! Uniform time grids, signals sampled on them, and composite trapezoid
//! accumulation.
//!
//! Every integral `∫_{t0}^{t} s` used by the bound formulas is realized by
//! [`cumulative`] on a uniform [`Grid`]. The trapezoid rule is used
//! throughout because it never turns a nonnegative integrand into a
//! decreasing running integral, so sign hypotheses on the continuous data
//! survive discretization exactly.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Uniform partition of `[t0, t1]` into `n` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    t0: f64,
    t1: f64,
    n: usize,
    step: f64,
}

impl Grid {
    pub fn new(t0: f64, t1: f64, n: usize) -> Result<Self> {
        if !t0.is_finite() || !t1.is_finite() {
            return Err(Error::Grid(format!(
                "endpoints must be finite, got [{t0}, {t1}]"
            )));
        }
        if t1 <= t0 {
            return Err(Error::Grid(format!("t1 = {t1} must exceed t0 = {t0}")));
        }
        if n < 2 {
            return Err(Error::Grid(format!("need at least 2 nodes, got {n}")));
        }
        let step = (t1 - t0) / (n - 1) as f64;
        if step <= 0.0 {
            return Err(Error::Grid(format!(
                "step underflows for [{t0}, {t1}] with {n} nodes"
            )));
        }
        Ok(Self { t0, t1, n, step })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false; a grid has at least two nodes.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Node `i`; the last node is `t1` exactly.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        if i + 1 == self.n {
            self.t1
        } else {
            self.t0 + i as f64 * self.step
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.node(i))
    }

    /// The grid made of nodes `0..=last` of this one.
    pub fn prefix(&self, last: usize) -> Result<Self> {
        if last == 0 || last >= self.n {
            return Err(Error::Argument(format!(
                "prefix end {last} outside 1..{}",
                self.n
            )));
        }
        Self::new(self.t0, self.node(last), last + 1)
    }

    /// Same interval with every step split into `factor` pieces.
    pub fn refine(&self, factor: usize) -> Self {
        let factor = factor.max(1);
        Self::new(self.t0, self.t1, (self.n - 1) * factor + 1).expect("refining a valid grid")
    }

    pub(crate) fn ensure_same(&self, other: &Grid, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Argument(format!(
                "{what}: grid mismatch ([{}, {}] n={} vs [{}, {}] n={})",
                self.t0, self.t1, self.n, other.t0, other.t1, other.n
            )))
        }
    }
}

/// Samples aligned to a grid, linearly interpolated between nodes and held
/// constant outside `[t0, t1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    grid: Grid,
    values: Vec<f64>,
}

impl SampledSignal {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Argument(format!(
                "{} samples supplied for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, t: f64) -> f64 {
        let g = &self.grid;
        let last = g.len() - 1;
        if t <= g.t0 {
            return self.values[0];
        }
        if t >= g.t1 {
            return self.values[last];
        }
        let i = (((t - g.t0) / g.step).floor() as usize).min(last - 1);
        let (a, b) = (g.node(i), g.node(i + 1));
        if t == a {
            return self.values[i];
        }
        if t == b {
            return self.values[i + 1];
        }
        let frac = (t - a) / (b - a);
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }
}

/// A real-valued function of time.
#[derive(Clone)]
pub enum Signal {
    Constant(f64),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    Sampled(SampledSignal),
}

impl fmt::Debug for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signal::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Signal::Function(_) => f.write_str("Function(..)"),
            Signal::Sampled(s) => f
                .debug_struct("Sampled")
                .field("grid", &s.grid)
                .field("len", &s.values.len())
                .finish(),
        }
    }
}

impl Signal {
    pub fn constant(value: f64) -> Self {
        Signal::Constant(value)
    }

    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Signal::Function(Arc::new(f))
    }

    pub fn sampled(grid: Grid, values: Vec<f64>) -> Result<Self> {
        SampledSignal::new(grid, values).map(Signal::Sampled)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Signal::Constant(c) => *c,
            Signal::Function(f) => f(t),
            Signal::Sampled(s) => s.eval(t),
        }
    }

    /// Values at every node of `grid`, rejecting non-finite results.
    pub fn sample(&self, grid: &Grid) -> Result<Vec<f64>> {
        self.sample_named(grid, "signal")
    }

    pub fn sample_named(&self, grid: &Grid, name: &str) -> Result<Vec<f64>> {
        grid.nodes()
            .enumerate()
            .map(|(node, t)| {
                let value = self.eval(t);
                if value.is_finite() {
                    Ok(value)
                } else {
                    Err(Error::Evaluation {
                        signal: name.to_string(),
                        node,
                        t,
                        value,
                    })
                }
            })
            .collect()
    }
}

impl From<f64> for Signal {
    fn from(value: f64) -> Self {
        Signal::Constant(value)
    }
}

impl From<SampledSignal> for Signal {
    fn from(s: SampledSignal) -> Self {
        Signal::Sampled(s)
    }
}

/// Running trapezoid integral `values[i] = ∫_{t0}^{node(i)} s`.
///
/// The per-interval increments are kept next to the running sums so that
/// exponential weights `exp(W(t_{i+1}) - W(t_i))` can be formed without
/// cancellation.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeIntegral {
    grid: Grid,
    values: Vec<f64>,
    increments: Vec<f64>,
}

impl CumulativeIntegral {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("grid has at least two nodes")
    }

    /// `-W`, used to form the decaying weights of the lower envelope.
    pub fn negated(&self) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| -v).collect(),
            increments: self.increments.iter().map(|v| -v).collect(),
        }
    }
}

/// Composite trapezoid accumulation of `s` on `grid`.
pub fn cumulative(s: &Signal, grid: &Grid) -> Result<CumulativeIntegral> {
    let samples = s.sample(grid)?;
    cumulative_samples(&samples, grid)
}

/// [`cumulative`] for values already sampled at the nodes of `grid`.
pub fn cumulative_samples(samples: &[f64], grid: &Grid) -> Result<CumulativeIntegral> {
    if samples.len() != grid.len() {
        return Err(Error::Argument(format!(
            "{} samples for a grid of {} nodes",
            samples.len(),
            grid.len()
        )));
    }
    if let Some((node, &value)) = samples.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Evaluation {
            signal: "integrand".into(),
            node,
            t: grid.node(node),
            value,
        });
    }
    let h = grid.step();
    let increments: Vec<f64> = samples
        .windows(2)
        .map(|w| h * (w[0] + w[1]) / 2.0)
        .collect();
    let mut values = Vec::with_capacity(samples.len());
    let mut acc = 0.0;
    values.push(acc);
    for inc in &increments {
        acc += inc;
        values.push(acc);
    }
    Ok(CumulativeIntegral {
        grid: *grid,
        values,
        increments,
    })
}

/// Trapezoid value of `∫_{t0}^{t} exp{W(t) - W(ζ)} s(ζ) dζ` at `t = node(t_index)`.
pub fn weighted_tail_integral(
    w: &CumulativeIntegral,
    s: &Signal,
    grid: &Grid,
    t_index: usize,
) -> Result<f64> {
    w.grid.ensure_same(grid, "weighted_tail_integral")?;
    if t_index >= grid.len() {
        return Err(Error::Argument(format!(
            "t_index {t_index} out of range for {} nodes",
            grid.len()
        )));
    }
    if t_index == 0 {
        return Ok(0.0);
    }
    let samples = s.sample(&grid.prefix(t_index)?)?;
    let wt = w.values[t_index];
    let mut sum = 0.0;
    for (i, si) in samples.iter().enumerate() {
        let weight = if i == 0 || i == t_index { 0.5 } else { 1.0 };
        sum += weight * (wt - w.values[i]).exp() * si;
    }
    Ok(grid.step() * sum)
}

/// [`weighted_tail_integral`] at every node at once, in linear time.
///
/// Uses `I_{i+1} = e^{ΔW_i} I_i + h/2 (e^{ΔW_i} s_i + s_{i+1})`, which is the
/// same trapezoid sum regrouped.
pub fn weighted_tail_curve(w: &CumulativeIntegral, samples: &[f64]) -> Result<Vec<f64>> {
    if samples.len() != w.grid.len() {
        return Err(Error::Argument(format!(
            "{} samples for a grid of {} nodes",
            samples.len(),
            w.grid.len()
        )));
    }
    let half = w.grid.step() / 2.0;
    let mut out = Vec::with_capacity(samples.len());
    let mut acc = 0.0;
    out.push(acc);
    for (i, inc) in w.increments.iter().enumerate() {
        let grow = inc.exp();
        acc = grow * acc + half * (grow * samples[i] + samples[i + 1]);
        out.push(acc);
    }
    Ok(out)
}

/// Asymptotic error estimate of the running trapezoid integral of `samples`:
/// `Σ h³/12 |q''|` over the intervals up to each node, with `q''` taken from
/// second differences.
pub fn trapezoid_error_estimate(samples: &[f64], grid: &Grid) -> Vec<f64> {
    let n = samples.len();
    let mut out = vec![0.0; n];
    if n < 3 {
        return out;
    }
    let h = grid.step();
    let mut acc = 0.0;
    for j in 0..n - 1 {
        let m = j.clamp(1, n - 2);
        let d2 = (samples[m - 1] - 2.0 * samples[m] + samples[m + 1]).abs();
        acc += h * d2 / 12.0;
        out[j + 1] = acc;
    }
    out
}
