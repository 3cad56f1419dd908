//! Stationary fixed-point iterations converging to the minimal-norm solution.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::{LinearOperator, Scalar, ShiftedFactor, HERMITIAN_TOL};
use crate::solvers::IterationTrace;

fn check_iteration_args<S: Scalar>(
    a_op: &LinearOperator<S>,
    f: &DVector<S>,
    u1: &DVector<S>,
    reference: Option<&DVector<S>>,
    tol: f64,
) -> Result<()> {
    if f.len() != a_op.nrows() {
        return Err(Error::dim(format!(
            "data has length {} but operator is {}x{}",
            f.len(),
            a_op.nrows(),
            a_op.ncols()
        )));
    }
    if u1.len() != a_op.ncols() {
        return Err(Error::dim(format!(
            "initial guess has length {} but operator has {} columns",
            u1.len(),
            a_op.ncols()
        )));
    }
    if let Some(r) = reference {
        if r.len() != a_op.ncols() {
            return Err(Error::dim(format!(
                "reference has length {} but operator has {} columns",
                r.len(),
                a_op.ncols()
            )));
        }
    }
    if tol < 0.0 || !tol.is_finite() {
        return Err(Error::param(format!("tolerance must be finite and >= 0, got {tol}")));
    }
    Ok(())
}

/// Fixed-point iteration `u <- a (T + aI)^{-1} u + (T + aI)^{-1} A* f` with
/// `T = A*A`. For solvable data `f = Ay` and an initial guess orthogonal to
/// the null space, the iterates converge to the minimal-norm solution `y`.
///
/// The initial guess must carry no null-space component (project it off with
/// the oracle first, or start from zero); a null-space component would be a
/// fixed point of every step and survive into the limit. Stopping uses the
/// successive-difference test `|u_next - u| <= tol * max(1, |u_next|)`; the
/// step cap is reported through [`IterationTrace::converged`] rather than as
/// an error. The shifted factorization is computed once and reused, so each
/// step costs one pair of triangular solves.
pub fn iterate_fixed_point<S: Scalar>(
    a_op: &LinearOperator<S>,
    a: f64,
    f: &DVector<S>,
    u1: &DVector<S>,
    max_steps: usize,
    tol: f64,
    reference: Option<&DVector<S>>,
) -> Result<IterationTrace<S>> {
    check_iteration_args(a_op, f, u1, reference, tol)?;
    let factor = ShiftedFactor::new(&a_op.gram(), a)?;
    let smoothing_term = factor.solve(&a_op.apply_adjoint(f)?)?;
    let scale = S::from_real(a);

    let mut trace = IterationTrace::new();
    let mut u = u1.clone();
    let record = |trace: &mut IterationTrace<S>, u: &DVector<S>| -> Result<()> {
        let residual = (a_op.apply(u)? - f).norm();
        if !residual.is_finite() {
            return Err(Error::NonFinite("iteration produced a non-finite residual".into()));
        }
        let error = reference.map(|y| (u - y).norm());
        trace.push(u.clone(), residual, error);
        Ok(())
    };
    record(&mut trace, &u)?;

    for _ in 0..max_steps {
        let next = factor.solve(&u)? * scale + &smoothing_term;
        let diff = (&next - &u).norm();
        u = next;
        record(&mut trace, &u)?;
        if diff <= tol * u.norm().max(1.0) {
            trace.mark_converged();
            break;
        }
    }
    Ok(trace)
}

/// Imaginary-shift iteration for Hermitian operators:
/// `u <- ia (A + iaI)^{-1} u + (A + iaI)^{-1} f`, run in complex arithmetic.
///
/// For solvable real data the limit is real up to the iteration tolerance; the
/// trace keeps the complex iterates and
/// [`IterationTrace::realize_final`] extracts the real part together with the
/// imaginary-norm diagnostic.
pub fn iterate_selfadjoint<S: Scalar>(
    a_op: &LinearOperator<S>,
    a: f64,
    f: &DVector<S>,
    u1: &DVector<S>,
    max_steps: usize,
    tol: f64,
    reference: Option<&DVector<S>>,
) -> Result<IterationTrace<Complex64>> {
    let dev = a_op
        .hermitian_deviation()
        .ok_or_else(|| Error::dim(format!("operator must be square, got {}x{}", a_op.nrows(), a_op.ncols())))?;
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev, tolerance: HERMITIAN_TOL });
    }
    if a <= 0.0 || !a.is_finite() {
        return Err(Error::param(format!("shift must be finite and > 0, got {a}")));
    }
    check_iteration_args(a_op, f, u1, reference, tol)?;

    let n = a_op.nrows();
    let ac: DMatrix<Complex64> = a_op.matrix().map(|x| x.to_c64());
    let ia = Complex64::new(0.0, a);
    let mut shifted = ac.clone();
    for i in 0..n {
        shifted[(i, i)] += ia;
    }
    let lu = shifted.lu();
    let solve = |v: &DVector<Complex64>| -> Result<DVector<Complex64>> {
        lu.solve(v).ok_or_else(|| Error::Numerical("imaginary-shifted solve broke down".into()))
    };

    let fc = f.map(|x| x.to_c64());
    let yc = reference.map(|y| y.map(|x| x.to_c64()));
    let g = solve(&fc)?;

    let mut trace = IterationTrace::new();
    let mut u = u1.map(|x| x.to_c64());
    let record = |trace: &mut IterationTrace<Complex64>, u: &DVector<Complex64>| -> Result<()> {
        let residual = (&ac * u - &fc).norm();
        if !residual.is_finite() {
            return Err(Error::NonFinite("iteration produced a non-finite residual".into()));
        }
        let error = yc.as_ref().map(|y| (u - y).norm());
        trace.push(u.clone(), residual, error);
        Ok(())
    };
    record(&mut trace, &u)?;

    for _ in 0..max_steps {
        let next = solve(&u)? * ia + &g;
        let diff = (&next - &u).norm();
        u = next;
        record(&mut trace, &u)?;
        if diff <= tol * u.norm().max(1.0) {
            trace.mark_converged();
            break;
        }
    }
    Ok(trace)
}
