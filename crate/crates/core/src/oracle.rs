//! SVD-based ground truth: minimal-norm solutions, null-space projectors, and
//! closed-form spectral predictions that every solver is verified against.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operator::{LinearOperator, RegParam, Scalar, ShiftMode};

/// Default relative rank threshold: singular values at or below
/// `DEFAULT_RANK_TOL * sigma_1` are treated as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Relative tolerance under which a vector counts as orthogonal to the null space.
pub const NULLSPACE_ORTH_TOL: f64 = 1e-8;

/// Thin singular value decomposition truncated at the rank threshold.
///
/// Kept triplets satisfy `sigma_i > tau * sigma_1`; the rank of a zero
/// operator is zero.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition<S: Scalar = f64> {
    left: DMatrix<S>,
    singular_values: DVector<f64>,
    right: DMatrix<S>,
    nrows: usize,
    ncols: usize,
    tau: f64,
}

impl<S: Scalar> SpectralDecomposition<S> {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// Kept singular values, non-increasing.
    pub fn singular_values(&self) -> &DVector<f64> {
        &self.singular_values
    }

    /// Left singular vectors, one column per kept triplet.
    pub fn left_vectors(&self) -> &DMatrix<S> {
        &self.left
    }

    /// Right singular vectors, one column per kept triplet.
    pub fn right_vectors(&self) -> &DMatrix<S> {
        &self.right
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank_threshold(&self) -> f64 {
        self.tau
    }

    pub fn sigma_max(&self) -> f64 {
        if self.rank() == 0 { 0.0 } else { self.singular_values[0] }
    }

    pub fn sigma_min(&self) -> f64 {
        let r = self.rank();
        if r == 0 { 0.0 } else { self.singular_values[r - 1] }
    }

    /// Ratio of largest to smallest kept singular value.
    pub fn condition_number(&self) -> f64 {
        if self.rank() == 0 { f64::INFINITY } else { self.sigma_max() / self.sigma_min() }
    }

    /// `sum_i sigma_i u_i v_i*`.
    pub fn reconstruct(&self) -> DMatrix<S> {
        let r = self.rank();
        if r == 0 {
            return DMatrix::zeros(self.nrows, self.ncols);
        }
        let mut scaled = self.left.clone();
        for i in 0..r {
            let mut col = scaled.column_mut(i);
            col *= S::from_real(self.singular_values[i]);
        }
        &scaled * self.right.adjoint()
    }

    /// Minimal-norm least-squares solution `sum_i (<u_i,f>/sigma_i) v_i`.
    pub fn pseudoinverse_apply(&self, f: &DVector<S>) -> Result<DVector<S>> {
        if f.len() != self.nrows {
            return Err(Error::dim(format!(
                "decomposition is of a {}x{} operator, data has length {}",
                self.nrows,
                self.ncols,
                f.len()
            )));
        }
        let mut coeffs = self.left.ad_mul(f);
        for i in 0..self.rank() {
            coeffs[i] /= S::from_real(self.singular_values[i]);
        }
        Ok(if self.rank() == 0 { DVector::zeros(self.ncols) } else { &self.right * coeffs })
    }

    /// Projection of `v` onto the row space, i.e. `v` minus its null-space part.
    pub fn project_off_nullspace(&self, v: &DVector<S>) -> Result<DVector<S>> {
        if v.len() != self.ncols {
            return Err(Error::dim(format!(
                "projector acts on length-{} vectors, got {}",
                self.ncols,
                v.len()
            )));
        }
        if self.rank() == 0 {
            return Ok(DVector::zeros(self.ncols));
        }
        Ok(&self.right * self.right.ad_mul(v))
    }

    /// Norm of the null-space component of `v`.
    pub fn nullspace_norm(&self, v: &DVector<S>) -> Result<f64> {
        let proj = self.project_off_nullspace(v)?;
        Ok((v - proj).norm())
    }

    /// Exact error of the fixed-point iteration after `n` steps started at
    /// offset `w` from the solution: `sqrt(sum_i (a/(a+sigma_i^2))^(2n) |<v_i,w>|^2)`.
    ///
    /// Requires `w` orthogonal to the null space; a null-space component would
    /// survive every step unchanged.
    pub fn iteration_error(&self, a: f64, w: &DVector<S>, n: usize) -> Result<f64> {
        if a <= 0.0 || a.is_nan() {
            return Err(Error::param(format!("shift must be > 0, got {a}")));
        }
        let wnorm = w.norm();
        if self.nullspace_norm(w)? > NULLSPACE_ORTH_TOL * wnorm {
            return Err(Error::param(
                "offset vector has a null-space component beyond tolerance; project it off first",
            ));
        }
        let coeffs = self.right.ad_mul(w);
        let mut total = 0.0;
        for i in 0..self.rank() {
            let sigma = self.singular_values[i];
            let factor = a / (a + sigma * sigma);
            total += factor.powf(2.0 * n as f64) * coeffs[i].to_c64().norm_sqr();
        }
        Ok(total.sqrt())
    }

    /// `|(T + eps I)^{-1} T y - y|` evaluated spectrally:
    /// `sqrt(sum_i (eps/(sigma_i^2+eps))^2 |<v_i,y>|^2 + |P_N y|^2)`.
    pub fn smoothed_identity_error(&self, eps: f64, y: &DVector<S>) -> Result<f64> {
        if eps < 0.0 || !eps.is_finite() {
            return Err(Error::param(format!("smoothing shift must be finite and >= 0, got {eps}")));
        }
        let null_part = self.nullspace_norm(y)?;
        let coeffs = self.right.ad_mul(y);
        let mut total = null_part * null_part;
        for i in 0..self.rank() {
            let s2 = self.singular_values[i].powi(2);
            let factor = if eps == 0.0 { 0.0 } else { eps / (s2 + eps) };
            total += (factor * factor) * coeffs[i].to_c64().norm_sqr();
        }
        Ok(total.sqrt())
    }

    /// Exact operator norm of the smoothing map for the given shift:
    /// `max_i sigma_i/(sigma_i^2 + a)` for a real shift and
    /// `max_i sigma_i/sqrt(sigma_i^4 + a^2)` for an imaginary one.
    pub fn smoothing_norm_exact(&self, reg: &RegParam) -> f64 {
        let a = reg.shift();
        self.singular_values
            .iter()
            .map(|&s| match reg.mode() {
                ShiftMode::Real => s / (s * s + a),
                ShiftMode::Imaginary => s / (s.powi(4) + a * a).sqrt(),
            })
            .fold(0.0, f64::max)
    }
}

/// Thin SVD of `a` truncated at relative threshold `tau`.
///
/// Exactly Hermitian operators (Gram matrices, symmetric problems) go through
/// the symmetric eigendecomposition, which resolves clustered small
/// eigenvalues far more accurately than the general bidiagonalization.
pub fn decompose<S: Scalar>(a: &LinearOperator<S>, tau: f64) -> SpectralDecomposition<S> {
    if a.hermitian_deviation() == Some(0.0) {
        return decompose_hermitian(a, tau);
    }
    let (m, n) = (a.nrows(), a.ncols());
    let svd = a.matrix().clone().svd(true, true);
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    let sv = svd.singular_values;
    let sigma1 = if sv.is_empty() { 0.0 } else { sv[0] };
    let cutoff = tau * sigma1;
    let r = sv.iter().take_while(|&&s| s > cutoff && s > 0.0).count();
    SpectralDecomposition {
        left: u.columns(0, r).into_owned(),
        singular_values: sv.rows(0, r).into_owned(),
        right: v_t.adjoint().columns(0, r).into_owned(),
        nrows: m,
        ncols: n,
        tau,
    }
}

/// Singular triplets of a Hermitian operator from its eigendecomposition:
/// `sigma_i = |lambda_i|`, right vectors are the eigenvectors, left vectors
/// carry the eigenvalue sign.
fn decompose_hermitian<S: Scalar>(a: &LinearOperator<S>, tau: f64) -> SpectralDecomposition<S> {
    let n = a.nrows();
    let eig = a.matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j].abs().partial_cmp(&eig.eigenvalues[i].abs()).expect("finite eigenvalues")
    });
    let lam_max = if n == 0 { 0.0 } else { eig.eigenvalues[order[0]].abs() };
    let cutoff = tau * lam_max;
    let kept: Vec<usize> =
        order.into_iter().filter(|&i| eig.eigenvalues[i].abs() > cutoff && eig.eigenvalues[i] != 0.0).collect();

    let r = kept.len();
    let mut left = DMatrix::zeros(n, r);
    let mut right = DMatrix::zeros(n, r);
    let mut singular_values = DVector::zeros(r);
    for (col, &i) in kept.iter().enumerate() {
        let lam = eig.eigenvalues[i];
        singular_values[col] = lam.abs();
        right.set_column(col, &eig.eigenvectors.column(i));
        let sign = S::from_real(if lam < 0.0 { -1.0 } else { 1.0 });
        left.set_column(col, &(eig.eigenvectors.column(i) * sign));
    }
    SpectralDecomposition { left, singular_values, right, nrows: n, ncols: n, tau }
}

/// [`decompose`] at the default rank threshold.
pub fn decompose_default<S: Scalar>(a: &LinearOperator<S>) -> SpectralDecomposition<S> {
    decompose(a, DEFAULT_RANK_TOL)
}

/// Minimal-norm least-squares solution of `A u = f` together with the
/// residual norm `|A y - f|`. A zero residual (up to the caller's tolerance)
/// certifies that the system is solvable and `y` is its minimal-norm solution.
///
/// Up to two refinement passes through the pseudoinverse squash any residue
/// the decomposition left on small singular directions.
pub fn minimal_norm_solution<S: Scalar>(
    a: &LinearOperator<S>,
    f: &DVector<S>,
    tau: f64,
) -> Result<(DVector<S>, f64)> {
    let dec = decompose(a, tau);
    let mut y = dec.pseudoinverse_apply(f)?;
    for _ in 0..2 {
        let residual = f - a.apply(&y)?;
        let correction = dec.pseudoinverse_apply(&residual)?;
        let size = correction.norm();
        y += correction;
        if size <= 1e-14 * y.norm().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    let consistency = (a.apply(&y)? - f).norm();
    Ok((y, consistency))
}

/// Removes the null-space component of `v` relative to `a`.
pub fn project_off_nullspace<S: Scalar>(
    a: &LinearOperator<S>,
    v: &DVector<S>,
    tau: f64,
) -> Result<DVector<S>> {
    decompose(a, tau).project_off_nullspace(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn real_op(m: usize, n: usize, entries: &[f64]) -> LinearOperator<f64> {
        LinearOperator::from_rows(m, n, entries).unwrap()
    }

    #[test]
    fn decompose_diagonal_rank_deficient() {
        let a = LinearOperator::from_diagonal(&[3.0, 0.0]).unwrap();
        let dec = decompose_default(&a);
        assert_eq!(dec.rank(), 1);
        assert!((dec.singular_values()[0] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn decompose_identity() {
        let dec = decompose_default(&LinearOperator::<f64>::identity(2));
        assert_eq!(dec.rank(), 2);
        assert!((dec.singular_values()[0] - 1.0).abs() < 1e-14);
        assert!((dec.singular_values()[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn decompose_rank_one_ones() {
        let a = real_op(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let dec = decompose_default(&a);
        assert_eq!(dec.rank(), 1);
        assert!((dec.singular_values()[0] - 2.0).abs() < 1e-14);
        let recon = dec.reconstruct();
        assert!((recon - a.matrix()).norm() <= 1e-10 * a.frobenius_norm());
    }

    #[test]
    fn decompose_zero_matrix() {
        let a = real_op(3, 2, &[0.0; 6]);
        let dec = decompose_default(&a);
        assert_eq!(dec.rank(), 0);
        assert_eq!(dec.pseudoinverse_apply(&DVector::zeros(3)).unwrap(), DVector::zeros(2));
    }

    #[test]
    fn minimal_norm_consistent_diagonal() {
        let a = LinearOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        let (y, cons) = minimal_norm_solution(&a, &DVector::from_vec(vec![3.0, 0.0]), DEFAULT_RANK_TOL).unwrap();
        assert!((y - DVector::from_vec(vec![3.0, 0.0])).norm() < 1e-14);
        assert!(cons < 1e-14);
    }

    #[test]
    fn minimal_norm_inconsistent_projects() {
        let a = LinearOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        let (y, cons) = minimal_norm_solution(&a, &DVector::from_vec(vec![3.0, 4.0]), DEFAULT_RANK_TOL).unwrap();
        assert!((y - DVector::from_vec(vec![3.0, 0.0])).norm() < 1e-14);
        assert!((cons - 4.0).abs() < 1e-14);
    }

    #[test]
    fn minimal_norm_picks_shortest_member() {
        let a = real_op(1, 2, &[1.0, 1.0]);
        let (y, cons) = minimal_norm_solution(&a, &DVector::from_vec(vec![2.0]), DEFAULT_RANK_TOL).unwrap();
        assert!((y - DVector::from_vec(vec![1.0, 1.0])).norm() < 1e-12);
        assert!(cons < 1e-12);
    }

    #[test]
    fn projection_examples() {
        let a = LinearOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        let p = project_off_nullspace(&a, &DVector::from_vec(vec![1.0, 1.0]), DEFAULT_RANK_TOL).unwrap();
        assert!((p - DVector::from_vec(vec![1.0, 0.0])).norm() < 1e-14);

        let full = real_op(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        let v = DVector::from_vec(vec![0.3, -0.7]);
        let p = project_off_nullspace(&full, &v, DEFAULT_RANK_TOL).unwrap();
        assert!((p - v).norm() < 1e-12);

        let row = real_op(1, 2, &[1.0, 1.0]);
        let p = project_off_nullspace(&row, &DVector::from_vec(vec![1.0, 0.0]), DEFAULT_RANK_TOL).unwrap();
        assert!((p - DVector::from_vec(vec![0.5, 0.5])).norm() < 1e-14);
    }

    #[test]
    fn iteration_error_examples() {
        let a = LinearOperator::from_diagonal(&[1.0]).unwrap();
        let dec = decompose_default(&a);
        let w = DVector::from_vec(vec![1.0]);
        assert!((dec.iteration_error(1.0, &w, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((dec.iteration_error(1.0, &w, 3).unwrap() - 0.125).abs() < 1e-15);

        let a = LinearOperator::from_diagonal(&[2.0, 1.0]).unwrap();
        let dec = decompose_default(&a);
        let w = DVector::from_vec(vec![1.0, 1.0]);
        let expected = ((0.5f64 / 4.5).powi(4) + (0.5f64 / 1.5).powi(4)).sqrt();
        assert!((dec.iteration_error(0.5, &w, 2).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn iteration_error_rejects_nullspace_component() {
        let a = LinearOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        let dec = decompose_default(&a);
        let w = DVector::from_vec(vec![1.0, 1.0]);
        assert!(dec.iteration_error(1.0, &w, 1).is_err());
    }

    #[test]
    fn smoothed_identity_examples() {
        let a = LinearOperator::from_diagonal(&[1.0, 0.0]).unwrap();
        let dec = decompose_default(&a);

        let y = DVector::from_vec(vec![1.0, 0.0]);
        let got = dec.smoothed_identity_error(0.01, &y).unwrap();
        assert!((got - 0.01 / 1.01).abs() < 1e-15);
        assert!(dec.smoothed_identity_error(0.0, &y).unwrap() < 1e-15);

        let y_null = DVector::from_vec(vec![0.0, 1.0]);
        for eps in [1e-6, 1e-2, 1.0, 100.0] {
            assert!((dec.smoothed_identity_error(eps, &y_null).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn smoothing_norm_examples() {
        let a = 0.09f64;
        let planted = LinearOperator::from_diagonal(&[2.0, a.sqrt(), 0.1]).unwrap();
        let dec = decompose_default(&planted);
        let norm = dec.smoothing_norm_exact(&RegParam::real(a).unwrap());
        assert!((norm - 0.5 / a.sqrt()).abs() <= 1e-12 * norm);

        let zero = real_op(2, 2, &[0.0; 4]);
        assert_eq!(decompose_default(&zero).smoothing_norm_exact(&RegParam::real(1.0).unwrap()), 0.0);

        let d3 = LinearOperator::from_diagonal(&[3.0]).unwrap();
        let norm = decompose_default(&d3).smoothing_norm_exact(&RegParam::real(1.0).unwrap());
        assert!((norm - 0.3).abs() < 1e-14);
    }

    #[test]
    fn orthonormal_columns() {
        let a = real_op(3, 2, &[1.0, 2.0, 0.0, 1.0, -1.0, 0.5]);
        let dec = decompose_default(&a);
        let gram_left = dec.left_vectors().ad_mul(dec.left_vectors());
        let gram_right = dec.right_vectors().ad_mul(dec.right_vectors());
        let id = DMatrix::<f64>::identity(dec.rank(), dec.rank());
        assert!((gram_left - &id).norm() < 1e-10);
        assert!((gram_right - &id).norm() < 1e-10);
    }
}
