//! Norm envelopes for linear systems `Y' = A(t) Y + g(t)`.
//!
//! Any solution satisfies, for `t >= τ >= t0`,
//! `‖Y(t)‖ <= ‖Y(τ)‖ + ∫ ‖A‖ ‖Y‖ + ∫ ‖g‖`, and symmetrically for `t <= τ`,
//! so the two-sided envelope with `u0 = ‖Y(t0)‖`, `v = ‖A(t)‖` and
//! `f = ‖g(t)‖` encloses `‖Y(t)‖`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gronwall::{envelope_from_samples, Envelope};
use crate::ode::rk4_step_vec;
use crate::riccati::relative_slack;
use crate::signal::{Grid, Signal};

pub const POWER_ITERATIONS: usize = 200;
pub const POWER_TOLERANCE: f64 = 1e-10;

/// `Y' = A(t) Y + g(t)` with `A` given entrywise (row-major) as signals.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    dim: usize,
    matrix: Vec<Signal>,
    forcing: Vec<Signal>,
    y0: Vec<f64>,
    grid: Grid,
}

impl LinearSystem {
    pub fn new(
        matrix: Vec<Signal>,
        forcing: Vec<Signal>,
        y0: Vec<f64>,
        grid: Grid,
    ) -> Result<Self> {
        let dim = y0.len();
        if dim == 0 {
            return Err(Error::Argument("system dimension must be positive".into()));
        }
        if matrix.len() != dim * dim {
            return Err(Error::Argument(format!(
                "matrix has {} entries, expected {}",
                matrix.len(),
                dim * dim
            )));
        }
        if forcing.len() != dim {
            return Err(Error::Argument(format!(
                "forcing has {} entries, expected {dim}",
                forcing.len()
            )));
        }
        if y0.iter().any(|x| !x.is_finite()) {
            return Err(Error::Argument("initial vector must be finite".into()));
        }
        Ok(Self {
            dim,
            matrix,
            forcing,
            y0,
            grid,
        })
    }

    /// Constant-coefficient system.
    pub fn constant(a: &DMatrix<f64>, g: &[f64], y0: Vec<f64>, grid: Grid) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Argument("matrix must be square".into()));
        }
        let matrix = (0..a.nrows())
            .flat_map(|r| (0..a.ncols()).map(move |c| (r, c)))
            .map(|(r, c)| Signal::constant(a[(r, c)]))
            .collect();
        let forcing = g.iter().map(|&x| Signal::constant(x)).collect();
        Self::new(matrix, forcing, y0, grid)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn y0(&self) -> &[f64] {
        &self.y0
    }

    pub fn matrix_at(&self, t: f64) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |r, c| {
            self.matrix[r * self.dim + c].eval(t)
        })
    }

    pub fn forcing_at(&self, t: f64) -> DVector<f64> {
        DVector::from_iterator(self.dim, self.forcing.iter().map(|s| s.eval(t)))
    }

    fn rhs(&self, t: f64, y: &[f64], out: &mut [f64]) {
        let n = self.dim;
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.matrix[r * n..(r + 1) * n];
            *o = row.iter().zip(y).map(|(a, y)| a.eval(t) * y).sum::<f64>()
                + self.forcing[r].eval(t);
        }
    }
}

/// Spectral norm estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorNorm {
    pub value: f64,
    /// Power iteration did not converge and `value` is the Frobenius norm.
    pub fallback: bool,
    pub iterations: usize,
}

pub fn frobenius_norm(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest singular value of `m` by power iteration on `mᵀm`.
///
/// Falls back to the Frobenius norm, an upper bound, when the iteration
/// does not settle within [`POWER_ITERATIONS`] steps or lands below the
/// largest column norm (a certain lower bound).
pub fn operator_norm(m: &DMatrix<f64>) -> Result<OperatorNorm> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Argument("matrix has non-finite entries".into()));
    }
    let gram = m.transpose() * m;
    let max_col = m.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max_col == 0.0 {
        return Ok(OperatorNorm {
            value: 0.0,
            fallback: false,
            iterations: 0,
        });
    }
    let fallback = |iterations| OperatorNorm {
        value: frobenius_norm(m),
        fallback: true,
        iterations,
    };

    // Start from the Gram column of largest norm: one power step from the
    // coordinate direction carrying the most energy.
    let start = gram
        .column_iter()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("nonempty matrix")
        .into_owned();
    let mut x = start.normalize();
    let mut lambda = x.dot(&(&gram * &x));
    for it in 1..=POWER_ITERATIONS {
        let y = &gram * &x;
        let norm = y.norm();
        if norm == 0.0 {
            return Ok(fallback(it));
        }
        x = y / norm;
        let next = x.dot(&(&gram * &x));
        if (next - lambda).abs() <= POWER_TOLERANCE * next.abs() {
            let value = next.max(0.0).sqrt();
            if value < max_col * (1.0 - 1e-12) {
                return Ok(fallback(it));
            }
            return Ok(OperatorNorm {
                value,
                fallback: false,
                iterations: it,
            });
        }
        lambda = next;
    }
    Ok(fallback(POWER_ITERATIONS))
}

/// RK4 states at every grid node; `states[i]` is `Y(node(i))`.
pub fn integrate_system(sys: &LinearSystem) -> Result<Vec<Vec<f64>>> {
    let g = &sys.grid;
    let h = g.step();
    let rhs = |t: f64, y: &[f64], out: &mut [f64]| sys.rhs(t, y, out);
    let mut states = Vec::with_capacity(g.len());
    states.push(sys.y0.clone());
    for i in 0..g.len() - 1 {
        let next = rk4_step_vec(&rhs, g.node(i), &states[i], h);
        if next.iter().any(|x| !x.is_finite()) {
            return Err(Error::Integration {
                node: i + 1,
                t: g.node(i + 1),
            });
        }
        states.push(next);
    }
    Ok(states)
}

pub fn euclidean_norm(y: &[f64]) -> f64 {
    y.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Which matrix norm plays the role of `v(t) = ‖A(t)‖`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateNorm {
    #[default]
    Spectral,
    Frobenius,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormEnvelopeReport {
    pub envelope: Envelope,
    pub actual_norm: Vec<f64>,
    /// `lower - slack <= ‖Y‖ <= upper + slack` at every node, with
    /// `slack = 1e-7 (1 + ‖Y‖)`.
    pub contained: bool,
    /// Largest `upper - ‖Y‖`.
    pub max_upper_gap: f64,
    /// Largest `‖Y‖ - lower`.
    pub max_lower_gap: f64,
    /// Nodes where the spectral norm fell back to Frobenius.
    pub norm_fallbacks: usize,
}

pub fn norm_envelope(sys: &LinearSystem) -> Result<NormEnvelopeReport> {
    norm_envelope_with(sys, RateNorm::Spectral)
}

pub fn norm_envelope_with(sys: &LinearSystem, rate: RateNorm) -> Result<NormEnvelopeReport> {
    let g = &sys.grid;
    let mut v = Vec::with_capacity(g.len());
    let mut f = Vec::with_capacity(g.len());
    let mut norm_fallbacks = 0;
    for (i, t) in g.nodes().enumerate() {
        let a = sys.matrix_at(t);
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::Evaluation {
                signal: "A".into(),
                node: i,
                t,
                value: a
                    .iter()
                    .copied()
                    .find(|x| !x.is_finite())
                    .unwrap_or(f64::NAN),
            });
        }
        let value = match rate {
            RateNorm::Spectral => {
                let n = operator_norm(&a)?;
                norm_fallbacks += n.fallback as usize;
                n.value
            }
            RateNorm::Frobenius => frobenius_norm(&a),
        };
        v.push(value);
        let gt = sys.forcing_at(t);
        let fv = gt.norm();
        if !fv.is_finite() {
            return Err(Error::Evaluation {
                signal: "g".into(),
                node: i,
                t,
                value: fv,
            });
        }
        f.push(fv);
    }
    let envelope = envelope_from_samples(euclidean_norm(&sys.y0), &v, &f, g)?;
    let actual_norm: Vec<f64> = integrate_system(sys)?
        .iter()
        .map(|y| euclidean_norm(y))
        .collect();
    let contained = envelope.contains(&actual_norm, relative_slack);
    let max_upper_gap = envelope
        .upper
        .iter()
        .zip(&actual_norm)
        .map(|(u, a)| u - a)
        .fold(f64::NEG_INFINITY, f64::max);
    let max_lower_gap = actual_norm
        .iter()
        .zip(&envelope.lower)
        .map(|(a, l)| a - l)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(NormEnvelopeReport {
        envelope,
        actual_norm,
        contained,
        max_upper_gap,
        max_lower_gap,
        norm_fallbacks,
    })
}
