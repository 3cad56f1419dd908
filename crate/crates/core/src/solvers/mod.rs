//! Solution procedures: the stationary fixed-point iteration, the Tikhonov
//! variational minimizer (two algebraic routes), the selfadjoint
//! imaginary-shift iteration, and a continuous regularization ODE flow with
//! its closed-form cross-check.

mod dsm;
mod iterate;
mod tikhonov;

pub use dsm::{dsm_duhamel, dsm_solve, exp_weighted_quadrature, exp_weighted_quadrature_scalar, DsmSchedule, DsmTrace};
pub use iterate::{iterate_fixed_point, iterate_selfadjoint};
pub use tikhonov::{tikhonov_minimizer, tikhonov_minimizer_via_cogram};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::operator::{imaginary_norm, real_part, Scalar};

/// Record of an iterative run: all iterates, their residuals, and (when a
/// reference solution was supplied) the error against it.
///
/// Entry `k` is the state after `k` update steps; entry `0` is the initial
/// guess, so a trace always holds at least one entry.
#[derive(Clone, Debug)]
pub struct IterationTrace<S: Scalar = f64> {
    iterates: Vec<DVector<S>>,
    errors: Vec<f64>,
    residuals: Vec<f64>,
    converged: bool,
}

impl<S: Scalar> IterationTrace<S> {
    pub(crate) fn new() -> Self {
        Self { iterates: Vec::new(), errors: Vec::new(), residuals: Vec::new(), converged: false }
    }

    pub(crate) fn push(&mut self, iterate: DVector<S>, residual: f64, error: Option<f64>) {
        self.iterates.push(iterate);
        self.residuals.push(residual);
        if let Some(e) = error {
            self.errors.push(e);
        }
    }

    pub(crate) fn mark_converged(&mut self) {
        self.converged = true;
    }

    /// Number of recorded entries (initial guess included).
    pub fn steps(&self) -> usize {
        self.iterates.len()
    }

    pub fn iterates(&self) -> &[DVector<S>] {
        &self.iterates
    }

    /// Errors `|u_k - y|` against the reference; empty when none was supplied.
    pub fn errors(&self) -> &[f64] {
        &self.errors
    }

    /// Residuals `|A u_k - f|` per recorded entry.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Whether the successive-difference tolerance was met before the step cap.
    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn final_iterate(&self) -> &DVector<S> {
        self.iterates.last().expect("trace holds at least the initial guess")
    }
}

impl IterationTrace<Complex64> {
    /// Real part of the final iterate together with the norm of its imaginary
    /// part. A small imaginary norm is itself a convergence witness for real
    /// data.
    pub fn realize_final(&self) -> (DVector<f64>, f64) {
        let last = self.final_iterate();
        (real_part(last), imaginary_norm(last))
    }
}
