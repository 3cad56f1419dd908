//! Continuous regularization: the flow `du/dt = -u + (T + eps(t) I)^{-1} A* f`
//! with a decaying shift schedule, integrated by fixed-step RK4, plus the
//! closed-form transient-plus-convolution expression evaluated by quadrature
//! as an independent cross-check.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operator::{LinearOperator, Scalar};

/// Decaying shift schedule `eps(t) = eps0 * (1 + t)^(-p)`.
///
/// `p <= 1` keeps the integral of `eps` divergent, which the flow needs to
/// forget its initial state; `p > 0` sends the shift to zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DsmSchedule {
    eps0: f64,
    p: f64,
}

impl DsmSchedule {
    pub fn new(eps0: f64, p: f64) -> Result<Self> {
        if eps0 <= 0.0 || !eps0.is_finite() {
            return Err(Error::param(format!("eps0 must be finite and > 0, got {eps0}")));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::param(format!("decay exponent must lie in (0, 1], got {p}")));
        }
        Ok(Self { eps0, p })
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    pub fn decay(&self) -> f64 {
        self.p
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eps0 * (1.0 + t).powf(-self.p)
    }
}

impl Default for DsmSchedule {
    /// Slow decay that keeps the shifted operator well conditioned over
    /// desk-scale horizons.
    fn default() -> Self {
        Self { eps0: 1.0, p: 0.5 }
    }
}

/// Sampled trajectory of the regularization flow.
#[derive(Clone, Debug)]
pub struct DsmTrace<S: Scalar = f64> {
    times: Vec<f64>,
    states: Vec<DVector<S>>,
    residuals: Vec<f64>,
    errors: Vec<f64>,
}

impl<S: Scalar> DsmTrace<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Strictly increasing sample times starting at zero.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[DVector<S>] {
        &self.states
    }

    /// Residuals `|A u(t) - f|` against the data the flow was driven by.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Errors against the reference solution; empty when none was supplied.
    pub fn errors(&self) -> &[f64] {
        &self.errors
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trace holds the initial sample")
    }

    pub fn final_state(&self) -> &DVector<S> {
        self.states.last().expect("trace holds the initial sample")
    }
}

/// `(T + eps I)^{-1} b` without re-validating `T` on every call.
fn smoothed_term<S: Scalar>(t: &DMatrix<S>, eps: f64, b: &DVector<S>) -> Result<DVector<S>> {
    let mut shifted = t.clone();
    let se = S::from_real(eps);
    for i in 0..t.nrows() {
        shifted[(i, i)] += se;
    }
    let chol = shifted
        .cholesky()
        .ok_or_else(|| Error::Numerical(format!("shifted factorization broke down at eps = {eps:.3e}")))?;
    Ok(chol.solve(b))
}

/// Integrates `du/dt = -u + (T + eps(t) I)^{-1} A* f` from `t = 0` to `t_max`
/// by classical fixed-step RK4, evaluating the schedule at the stage times.
/// Every step is sampled into the trace. The initial state is arbitrary; its
/// null-space component decays like `exp(-t)` on its own.
pub fn dsm_solve<S: Scalar>(
    a_op: &LinearOperator<S>,
    f: &DVector<S>,
    sched: &DsmSchedule,
    u0: &DVector<S>,
    t_max: f64,
    h: f64,
    reference: Option<&DVector<S>>,
) -> Result<DsmTrace<S>> {
    if f.len() != a_op.nrows() {
        return Err(Error::dim(format!(
            "data has length {} but operator is {}x{}",
            f.len(),
            a_op.nrows(),
            a_op.ncols()
        )));
    }
    if u0.len() != a_op.ncols() {
        return Err(Error::dim(format!(
            "initial state has length {} but operator has {} columns",
            u0.len(),
            a_op.ncols()
        )));
    }
    if let Some(r) = reference {
        if r.len() != a_op.ncols() {
            return Err(Error::dim("reference length does not match operator columns"));
        }
    }
    if t_max <= 0.0 || !t_max.is_finite() {
        return Err(Error::param(format!("t_max must be finite and > 0, got {t_max}")));
    }
    if h <= 0.0 || h > 0.1 || h.is_nan() {
        return Err(Error::param(format!("step size must lie in (0, 0.1], got {h}")));
    }

    let gram = a_op.gram().into_matrix();
    let b = a_op.apply_adjoint(f)?;

    let mut trace =
        DsmTrace { times: Vec::new(), states: Vec::new(), residuals: Vec::new(), errors: Vec::new() };
    let record = |trace: &mut DsmTrace<S>, t: f64, u: &DVector<S>| -> Result<()> {
        let residual = (a_op.apply(u)? - f).norm();
        if !residual.is_finite() || !u.norm().is_finite() {
            return Err(Error::NonFinite(format!("flow state became non-finite at t = {t:.6}")));
        }
        trace.times.push(t);
        trace.states.push(u.clone());
        trace.residuals.push(residual);
        if let Some(y) = reference {
            trace.errors.push((u - y).norm());
        }
        Ok(())
    };

    let mut u = u0.clone();
    let mut t = 0.0f64;
    record(&mut trace, t, &u)?;
    // m(t) for the begin stage carries over from the previous step's end stage
    let mut m_begin = smoothed_term(&gram, sched.eval(0.0), &b)?;

    while t < t_max {
        let step = h.min(t_max - t);
        if step <= t_max * 1e-14 {
            break;
        }
        let half = 0.5 * step;
        let m_mid = smoothed_term(&gram, sched.eval(t + half), &b)?;
        let m_end = smoothed_term(&gram, sched.eval(t + step), &b)?;

        let k1 = &m_begin - &u;
        let k2 = &m_mid - (&u + &k1 * S::from_real(half));
        let k3 = &m_mid - (&u + &k2 * S::from_real(half));
        let k4 = &m_end - (&u + &k3 * S::from_real(step));

        u += (k1 + k2 * S::from_real(2.0) + k3 * S::from_real(2.0) + k4) * S::from_real(step / 6.0);
        t += step;
        record(&mut trace, t, &u)?;
        m_begin = m_end;
    }
    Ok(trace)
}

/// Composite-trapezoid evaluation of `int_0^t exp(-(t-s)) f(s) ds`.
///
/// This is the quadrature kernel behind [`dsm_duhamel`]; it is exposed so the
/// same code path can be checked against scalar integrands with known limits.
pub fn exp_weighted_quadrature<S: Scalar>(
    t: f64,
    quad_points: usize,
    mut integrand: impl FnMut(f64) -> Result<DVector<S>>,
) -> Result<DVector<S>> {
    if quad_points < 2 {
        return Err(Error::param(format!("need at least 2 quadrature nodes, got {quad_points}")));
    }
    if t <= 0.0 || !t.is_finite() {
        return Err(Error::param(format!("quadrature horizon must be finite and > 0, got {t}")));
    }
    let ds = t / (quad_points - 1) as f64;
    let mut acc = integrand(0.0)? * S::from_real(0.5 * ds * (-t).exp());
    for j in 1..quad_points {
        let last = j == quad_points - 1;
        let s = if last { t } else { j as f64 * ds };
        let w = if last { 0.5 * ds } else { ds };
        acc += integrand(s)? * S::from_real(w * (s - t).exp());
    }
    Ok(acc)
}

/// Scalar view of [`exp_weighted_quadrature`], running the identical kernel.
pub fn exp_weighted_quadrature_scalar(
    t: f64,
    quad_points: usize,
    mut h: impl FnMut(f64) -> f64,
) -> Result<f64> {
    let v = exp_weighted_quadrature::<f64>(t, quad_points, |s| Ok(DVector::from_element(1, h(s))))?;
    Ok(v[0])
}

/// Closed-form trajectory value
/// `u(t) = u0 exp(-t) + int_0^t exp(-(t-s)) (T + eps(s) I)^{-1} A* f ds`,
/// evaluated by composite trapezoid quadrature. Serves as an independent
/// cross-check of [`dsm_solve`]: the two discretize the same trajectory in
/// unrelated ways.
pub fn dsm_duhamel<S: Scalar>(
    a_op: &LinearOperator<S>,
    f: &DVector<S>,
    sched: &DsmSchedule,
    u0: &DVector<S>,
    t: f64,
    quad_points: usize,
) -> Result<DVector<S>> {
    if f.len() != a_op.nrows() || u0.len() != a_op.ncols() {
        return Err(Error::dim(format!(
            "operator is {}x{}, data has length {}, initial state {}",
            a_op.nrows(),
            a_op.ncols(),
            f.len(),
            u0.len()
        )));
    }
    if t < 0.0 || !t.is_finite() {
        return Err(Error::param(format!("time must be finite and >= 0, got {t}")));
    }
    if quad_points < 2 {
        return Err(Error::param(format!("need at least 2 quadrature nodes, got {quad_points}")));
    }
    if t == 0.0 {
        return Ok(u0.clone());
    }
    let gram = a_op.gram().into_matrix();
    let b = a_op.apply_adjoint(f)?;
    let integral = exp_weighted_quadrature(t, quad_points, |s| smoothed_term(&gram, sched.eval(s), &b))?;
    Ok(u0 * S::from_real((-t).exp()) + integral)
}
