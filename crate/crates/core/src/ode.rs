//! Classical fourth-order Runge-Kutta steps on a uniform grid.
//!
//! Non-autonomous right-hand sides are evaluated at `t`, `t + h/2` and
//! `t + h`, so sampled signals are interpolated at the interval midpoint.

/// One RK4 step of the scalar ODE `y' = rhs(t, y)`.
pub fn rk4_step<F>(rhs: &F, t: f64, y: f64, h: f64) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let half = h / 2.0;
    let k1 = rhs(t, y);
    let k2 = rhs(t + half, y + half * k1);
    let k3 = rhs(t + half, y + half * k2);
    let k4 = rhs(t + h, y + h * k3);
    y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// One RK4 step of `y' = rhs(t, y)` for a state vector. `rhs` writes the
/// derivative into its third argument.
pub fn rk4_step_vec<F>(rhs: &F, t: f64, y: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let half = h / 2.0;
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    rhs(t, y, &mut k1);
    for i in 0..n {
        tmp[i] = y[i] + half * k1[i];
    }
    rhs(t + half, &tmp, &mut k2);
    for i in 0..n {
        tmp[i] = y[i] + half * k2[i];
    }
    rhs(t + half, &tmp, &mut k3);
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    rhs(t + h, &tmp, &mut k4);

    (0..n)
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}
