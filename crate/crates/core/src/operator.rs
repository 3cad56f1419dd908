//! Dense linear operators and the shifted solves used by every method.
//!
//! The operator calculus here is small but load-bearing: conjugate adjoints,
//! the Gram operators `T = A*A` and `Q = AA*`, solves against the shifted
//! operators `T + aI` and `T + iaI`, the smoothing map `g -> (T + aI)^{-1} A* g`
//! whose norm is bounded by `1/(2*sqrt(a))` independently of `A`, and the
//! resolvent `(A + iaI)^{-1}` for Hermitian `A`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative Frobenius tolerance for Hermitian-symmetry checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Scalar field of an operator: `f64` or `Complex64`.
pub trait Scalar: nalgebra::ComplexField<RealField = f64> + Copy + 'static {
    const IS_COMPLEX: bool;
    fn to_c64(self) -> Complex64;
    fn finite(self) -> bool {
        let c = self.to_c64();
        c.re.is_finite() && c.im.is_finite()
    }
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;
    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;
    fn to_c64(self) -> Complex64 {
        self
    }
}

/// Dense matrix realization of a linear operator between finite-dimensional
/// spaces. Entries are validated to be finite at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOperator<S: Scalar = f64> {
    data: DMatrix<S>,
}

impl<S: Scalar> LinearOperator<S> {
    /// Wraps a dense matrix, rejecting empty shapes and non-finite entries.
    pub fn new(data: DMatrix<S>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::param("operator must have at least one row and column"));
        }
        if data.iter().any(|x| !x.finite()) {
            return Err(Error::NonFinite("operator entry is NaN or infinite".into()));
        }
        Ok(Self { data })
    }

    /// Row-major construction from a flat slice.
    pub fn from_rows(m: usize, n: usize, entries: &[S]) -> Result<Self> {
        if entries.len() != m * n {
            return Err(Error::dim(format!(
                "expected {} entries for a {}x{} operator, got {}",
                m * n,
                m,
                n,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(m, n, entries))
    }

    pub fn identity(n: usize) -> Self {
        Self { data: DMatrix::identity(n, n) }
    }

    /// Diagonal operator with the given entries.
    pub fn from_diagonal(diag: &[S]) -> Result<Self> {
        let n = diag.len();
        let mut data = DMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            data[(i, i)] = d;
        }
        Self::new(data)
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<S> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<S> {
        self.data
    }

    /// Conjugate transpose. Applying it twice reproduces the operator exactly.
    pub fn adjoint(&self) -> Self {
        Self { data: self.data.adjoint() }
    }

    /// Gram operator `T = A*A`, symmetrized to kill rounding skew.
    pub fn gram(&self) -> Self {
        let t = self.data.adjoint() * &self.data;
        Self { data: hermitize(t) }
    }

    /// Co-Gram operator `Q = AA*`, symmetrized like [`gram`](Self::gram).
    pub fn cogram(&self) -> Self {
        let q = &self.data * self.data.adjoint();
        Self { data: hermitize(q) }
    }

    /// `A v`.
    pub fn apply(&self, v: &DVector<S>) -> Result<DVector<S>> {
        if v.len() != self.ncols() {
            return Err(Error::dim(format!(
                "operator is {}x{} but vector has length {}",
                self.nrows(),
                self.ncols(),
                v.len()
            )));
        }
        Ok(&self.data * v)
    }

    /// `A* v`.
    pub fn apply_adjoint(&self, v: &DVector<S>) -> Result<DVector<S>> {
        if v.len() != self.nrows() {
            return Err(Error::dim(format!(
                "adjoint of a {}x{} operator takes vectors of length {}, got {}",
                self.nrows(),
                self.ncols(),
                self.nrows(),
                v.len()
            )));
        }
        Ok(self.data.ad_mul(v))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.to_c64().norm_sqr()).sum::<f64>().sqrt()
    }

    /// Relative Frobenius deviation from Hermitian symmetry; `None` when not square.
    pub fn hermitian_deviation(&self) -> Option<f64> {
        if self.nrows() != self.ncols() {
            return None;
        }
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return Some(0.0);
        }
        let skew = (&self.data - self.data.adjoint()).norm();
        Some(skew / norm)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation().is_some_and(|d| d <= tol)
    }

    /// Promotes the entries to complex scalars.
    pub fn to_complex(&self) -> LinearOperator<Complex64> {
        LinearOperator { data: self.data.map(|x| x.to_c64()) }
    }
}

/// `(M + M*)/2`.
fn hermitize<S: Scalar>(m: DMatrix<S>) -> DMatrix<S> {
    let half = S::from_real(0.5);
    let adj = m.adjoint();
    (m + adj) * half
}

/// Shift mode of the regularizing perturbation: `T + aI` or `T + iaI`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftMode {
    Real,
    Imaginary,
}

/// Strictly positive regularization shift with its mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegParam {
    a: f64,
    mode: ShiftMode,
}

impl RegParam {
    pub fn new(a: f64, mode: ShiftMode) -> Result<Self> {
        if a <= 0.0 || !a.is_finite() {
            return Err(Error::param(format!("regularization shift must be finite and > 0, got {a}")));
        }
        Ok(Self { a, mode })
    }

    pub fn real(a: f64) -> Result<Self> {
        Self::new(a, ShiftMode::Real)
    }

    pub fn imaginary(a: f64) -> Result<Self> {
        Self::new(a, ShiftMode::Imaginary)
    }

    pub fn shift(&self) -> f64 {
        self.a
    }

    pub fn mode(&self) -> ShiftMode {
        self.mode
    }

    /// The uniform bound `1/(2*sqrt(a))` on the smoothing operator's norm.
    pub fn smoothing_bound(&self) -> f64 {
        match self.mode {
            ShiftMode::Real => 0.5 / self.a.sqrt(),
            ShiftMode::Imaginary => 1.0 / (2.0 * self.a).sqrt(),
        }
    }
}

fn check_shift(a: f64) -> Result<()> {
    if a <= 0.0 || !a.is_finite() {
        return Err(Error::param(format!("shift must be finite and > 0, got {a}")));
    }
    Ok(())
}

fn require_hermitian<S: Scalar>(t: &LinearOperator<S>, what: &str) -> Result<()> {
    let dev = t
        .hermitian_deviation()
        .ok_or_else(|| Error::dim(format!("{what} must be square, got {}x{}", t.nrows(), t.ncols())))?;
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev, tolerance: HERMITIAN_TOL });
    }
    Ok(())
}

/// Cached Cholesky factorization of `T + aI` for repeated real-shift solves.
pub struct ShiftedFactor<S: Scalar> {
    chol: Cholesky<S, Dyn>,
    dim: usize,
    a: f64,
}

impl<S: Scalar> ShiftedFactor<S> {
    /// Factors `T + aI`. `T` must be Hermitian; `a > 0` keeps it positive definite.
    pub fn new(t: &LinearOperator<S>, a: f64) -> Result<Self> {
        check_shift(a)?;
        require_hermitian(t, "shifted-solve operand")?;
        let n = t.nrows();
        let mut shifted = t.matrix().clone();
        let sa = S::from_real(a);
        for i in 0..n {
            shifted[(i, i)] += sa;
        }
        let chol = shifted.cholesky().ok_or_else(|| {
            Error::Numerical(format!(
                "Cholesky of the shifted operator broke down (shift {a:.3e} below the rounding \
                 floor of an operator with norm {:.3e})",
                t.frobenius_norm()
            ))
        })?;
        Ok(Self { chol, dim: n, a })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shift(&self) -> f64 {
        self.a
    }

    /// Solves `(T + aI) x = v`.
    pub fn solve(&self, v: &DVector<S>) -> Result<DVector<S>> {
        if v.len() != self.dim {
            return Err(Error::dim(format!(
                "factorization has dimension {}, vector has length {}",
                self.dim,
                v.len()
            )));
        }
        Ok(self.chol.solve(v))
    }
}

/// Solves `(T + aI) x = v` for Hermitian positive-semidefinite `T`.
pub fn shifted_solve<S: Scalar>(t: &LinearOperator<S>, a: f64, v: &DVector<S>) -> Result<DVector<S>> {
    ShiftedFactor::new(t, a)?.solve(v)
}

/// Solves `(T + iaI) x = v` in complex arithmetic. `T` must be Hermitian, which
/// makes the shifted operator invertible for every `a > 0`.
pub fn shifted_solve_imaginary<S: Scalar>(
    t: &LinearOperator<S>,
    a: f64,
    v: &DVector<Complex64>,
) -> Result<DVector<Complex64>> {
    check_shift(a)?;
    require_hermitian(t, "shifted-solve operand")?;
    let n = t.nrows();
    if v.len() != n {
        return Err(Error::dim(format!("operator is {n}x{n}, vector has length {}", v.len())));
    }
    let mut shifted = t.matrix().map(|x| x.to_c64());
    let ia = Complex64::new(0.0, a);
    for i in 0..n {
        shifted[(i, i)] += ia;
    }
    shifted
        .lu()
        .solve(v)
        .ok_or_else(|| Error::Numerical("imaginary-shifted solve broke down".into()))
}

/// Smoothing map `g -> (T + aI)^{-1} A* g` with `T = A*A`.
///
/// Its operator norm is at most `1/(2*sqrt(a))` no matter how large or
/// ill-conditioned `A` is.
pub fn smoothing_op<S: Scalar>(a_op: &LinearOperator<S>, a: f64, g: &DVector<S>) -> Result<DVector<S>> {
    let rhs = a_op.apply_adjoint(g)?;
    shifted_solve(&a_op.gram(), a, &rhs)
}

/// Imaginary-shift variant `g -> (T + iaI)^{-1} A* g`; norm at most `1/sqrt(2a)`.
pub fn smoothing_op_imaginary<S: Scalar>(
    a_op: &LinearOperator<S>,
    a: f64,
    g: &DVector<Complex64>,
) -> Result<DVector<Complex64>> {
    let ac = a_op.to_complex();
    let rhs = ac.apply_adjoint(g)?;
    shifted_solve_imaginary(&ac.gram(), a, &rhs)
}

/// Filter map `v -> a (T + aI)^{-1} v`, the error-propagation operator of the
/// fixed-point iteration. It never expands: `|Bv| <= |v|`, with equality on
/// the null space of `A`.
pub fn filter_op<S: Scalar>(a_op: &LinearOperator<S>, a: f64, v: &DVector<S>) -> Result<DVector<S>> {
    if v.len() != a_op.ncols() {
        return Err(Error::dim(format!(
            "filter operates on length-{} vectors, got {}",
            a_op.ncols(),
            v.len()
        )));
    }
    Ok(shifted_solve(&a_op.gram(), a, v)? * S::from_real(a))
}

/// Resolvent solve `(A + iaI)^{-1} v` for Hermitian `A`; the real spectrum of
/// `A` keeps the shifted operator invertible.
pub fn complex_shifted_resolvent<S: Scalar>(
    a_op: &LinearOperator<S>,
    a: f64,
    v: &DVector<Complex64>,
) -> Result<DVector<Complex64>> {
    check_shift(a)?;
    require_hermitian(a_op, "resolvent operand")?;
    let n = a_op.nrows();
    if v.len() != n {
        return Err(Error::dim(format!("operator is {n}x{n}, vector has length {}", v.len())));
    }
    let mut shifted = a_op.matrix().map(|x| x.to_c64());
    let ia = Complex64::new(0.0, a);
    for i in 0..n {
        shifted[(i, i)] += ia;
    }
    shifted
        .lu()
        .solve(v)
        .ok_or_else(|| Error::Numerical("resolvent solve broke down".into()))
}

/// Promotes a real vector to complex.
pub fn complexify(v: &DVector<f64>) -> DVector<Complex64> {
    v.map(|x| Complex64::new(x, 0.0))
}

/// Real parts of a complex vector.
pub fn real_part(v: &DVector<Complex64>) -> DVector<f64> {
    v.map(|x| x.re)
}

/// Norm of the imaginary part of a complex vector.
pub fn imaginary_norm(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|x| x.im * x.im).sum::<f64>().sqrt()
}
