//! The variational minimizer of `F(u) = |Au - g|^2 + a|u|^2` along its two
//! algebraically equivalent routes.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::operator::{LinearOperator, Scalar, ShiftedFactor};

/// Relative stationarity residual enforced on the computed minimizer.
const STATIONARITY_TOL: f64 = 1e-10;

/// Solves the shifted normal equations `(M + aI) x = rhs` with one step of
/// iterative refinement if plain substitution leaves a residue above the
/// stationarity tolerance.
fn solve_refined<S: Scalar>(
    m: &LinearOperator<S>,
    a: f64,
    rhs: &DVector<S>,
) -> Result<DVector<S>> {
    let factor = ShiftedFactor::new(m, a)?;
    let mut x = factor.solve(rhs)?;
    let rhs_norm = rhs.norm();
    let residual = |x: &DVector<S>| -> Result<DVector<S>> {
        Ok(rhs - (m.apply(x)? + x * S::from_real(a)))
    };
    let mut r = residual(&x)?;
    if r.norm() > STATIONARITY_TOL * rhs_norm {
        x += factor.solve(&r)?;
        r = residual(&x)?;
        if r.norm() > STATIONARITY_TOL * rhs_norm {
            return Err(Error::Numerical(format!(
                "stationarity residual {:.3e} exceeds {:.1e} of |rhs| = {:.3e} even after refinement",
                r.norm(),
                STATIONARITY_TOL,
                rhs_norm
            )));
        }
    }
    Ok(x)
}

/// Unique global minimizer of `F(u) = |Au - g|^2 + a|u|^2`, computed as
/// `(A*A + aI)^{-1} A* g`. The stationarity witness
/// `|(A*A + aI) z - A* g| <= 1e-10 |A* g|` is enforced internally.
pub fn tikhonov_minimizer<S: Scalar>(
    a_op: &LinearOperator<S>,
    a: f64,
    g: &DVector<S>,
) -> Result<DVector<S>> {
    let rhs = a_op.apply_adjoint(g)?;
    solve_refined(&a_op.gram(), a, &rhs)
}

/// The same minimizer through the data-space route `A* (AA* + aI)^{-1} g`.
/// Must agree with [`tikhonov_minimizer`] on every input; the two routes are
/// kept separate so their agreement can be asserted.
pub fn tikhonov_minimizer_via_cogram<S: Scalar>(
    a_op: &LinearOperator<S>,
    a: f64,
    g: &DVector<S>,
) -> Result<DVector<S>> {
    if g.len() != a_op.nrows() {
        return Err(Error::dim(format!(
            "operator is {}x{}, data has length {}",
            a_op.nrows(),
            a_op.ncols(),
            g.len()
        )));
    }
    let w = solve_refined(&a_op.cogram(), a, g)?;
    a_op.apply_adjoint(&w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_minimizer_matches_grid_search() {
        let a_op = LinearOperator::from_rows(1, 1, &[2.0]).unwrap();
        let g = DVector::from_vec(vec![1.0]);
        let z = tikhonov_minimizer(&a_op, 1.0, &g).unwrap();
        assert!((z[0] - 0.4).abs() < 1e-14);

        // independent oracle: brute-force 1-D minimization of F over a fine grid
        let f = |u: f64| (2.0 * u - 1.0).powi(2) + u * u;
        let mut best = (f64::INFINITY, 0.0);
        let mut u = -2.0;
        while u <= 2.0 {
            let v = f(u);
            if v < best.0 {
                best = (v, u);
            }
            u += 1e-5;
        }
        assert!((best.1 - z[0]).abs() < 1e-4);
    }

    #[test]
    fn zero_operator_minimizes_to_zero() {
        let a_op = LinearOperator::from_rows(1, 1, &[0.0]).unwrap();
        let g = DVector::from_vec(vec![5.0]);
        for a in [1e-3, 1.0, 10.0] {
            let z = tikhonov_minimizer(&a_op, a, &g).unwrap();
            assert_eq!(z[0], 0.0);
            let z2 = tikhonov_minimizer_via_cogram(&a_op, a, &g).unwrap();
            assert_eq!(z2[0], 0.0);
        }
    }

    #[test]
    fn identity_minimizer_scales_components() {
        let a_op = LinearOperator::<f64>::identity(2);
        let g = DVector::from_vec(vec![1.0, 1.0]);
        let z = tikhonov_minimizer(&a_op, 0.01, &g).unwrap();
        for i in 0..2 {
            assert!((z[i] - 1.0 / 1.01).abs() < 1e-14);
        }
    }

    #[test]
    fn routes_agree_on_scalar_example() {
        let a_op = LinearOperator::from_rows(1, 1, &[2.0]).unwrap();
        let g = DVector::from_vec(vec![1.0]);
        let z1 = tikhonov_minimizer(&a_op, 1.0, &g).unwrap();
        let z2 = tikhonov_minimizer_via_cogram(&a_op, 1.0, &g).unwrap();
        assert!((z1[0] - 0.4).abs() < 1e-14);
        assert!((&z1 - &z2).norm() <= 1e-12);
    }

    #[test]
    fn routes_agree_on_rectangular_input() {
        let a_op = LinearOperator::from_rows(
            4,
            3,
            &[0.7, -0.2, 0.0, 1.3, 0.4, -0.9, 0.0, 2.0, 0.5, -0.6, 0.1, 0.8],
        )
        .unwrap();
        let mut g = DVector::zeros(4);
        g[0] = 1.0;
        let z1 = tikhonov_minimizer(&a_op, 0.1, &g).unwrap();
        let z2 = tikhonov_minimizer_via_cogram(&a_op, 0.1, &g).unwrap();
        assert!((&z1 - &z2).norm() <= 1e-10 * (1.0 + g.norm()));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a_op = LinearOperator::<f64>::identity(2);
        let g = DVector::from_vec(vec![1.0]);
        assert!(tikhonov_minimizer(&a_op, 1.0, &g).is_err());
        assert!(tikhonov_minimizer_via_cogram(&a_op, 1.0, &g).is_err());
    }
}
