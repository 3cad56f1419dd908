//! Generators for test problems with known minimal-norm solutions, including
//! an operator family whose norm grows without bound in its size parameter,
//! plus exact-norm noise injection.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operator::LinearOperator;
use crate::oracle::{decompose_default, SpectralDecomposition};
use crate::stopping::NoisyData;

/// Consistency tolerance of a generated problem: `|Ay - f| <= 1e-12 |f|`.
pub const CONSISTENCY_TOL: f64 = 1e-12;

/// Null-space orthogonality tolerance of the generated solution.
pub const SOLUTION_ORTH_TOL: f64 = 1e-10;

/// A solvable system `A u = f` bundled with its known minimal-norm solution
/// and the spectral decomposition computed for verification at construction.
#[derive(Clone, Debug)]
pub struct TestProblem {
    operator: LinearOperator<f64>,
    rhs: DVector<f64>,
    solution: DVector<f64>,
    label: String,
    decomposition: SpectralDecomposition<f64>,
}

impl TestProblem {
    /// Bundles `A` and `y` into a consistent problem `f = Ay`, verifying that
    /// the solution carries no null-space component.
    pub fn from_solution(operator: LinearOperator<f64>, solution: DVector<f64>, label: impl Into<String>) -> Result<Self> {
        let decomposition = decompose_default(&operator);
        Self::from_parts(operator, solution, label, decomposition)
    }

    /// Like [`from_solution`](Self::from_solution) but reuses an
    /// already-computed decomposition of the operator.
    fn from_parts(
        operator: LinearOperator<f64>,
        solution: DVector<f64>,
        label: impl Into<String>,
        decomposition: SpectralDecomposition<f64>,
    ) -> Result<Self> {
        let rhs = operator.apply(&solution)?;
        let problem = Self { operator, rhs, solution, label: label.into(), decomposition };
        problem.verify()?;
        Ok(problem)
    }

    fn verify(&self) -> Result<()> {
        let consistency = (self.operator.apply(&self.solution)? - &self.rhs).norm();
        if consistency > CONSISTENCY_TOL * self.rhs.norm().max(f64::MIN_POSITIVE) {
            return Err(Error::Numerical(format!(
                "problem '{}' is inconsistent: |Ay - f| = {consistency:.3e}",
                self.label
            )));
        }
        let null_part = self.decomposition.nullspace_norm(&self.solution)?;
        if null_part > SOLUTION_ORTH_TOL * self.solution.norm().max(f64::MIN_POSITIVE) {
            return Err(Error::Numerical(format!(
                "problem '{}': solution has null-space component {null_part:.3e}",
                self.label
            )));
        }
        Ok(())
    }

    pub fn operator(&self) -> &LinearOperator<f64> {
        &self.operator
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    /// The minimal-norm solution the problem was built around.
    pub fn solution(&self) -> &DVector<f64> {
        &self.solution
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Spectral decomposition at the default rank threshold, computed once at
    /// construction.
    pub fn decomposition(&self) -> &SpectralDecomposition<f64> {
        &self.decomposition
    }

    pub fn nrows(&self) -> usize {
        self.operator.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.operator.ncols()
    }
}

fn uniform_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))
}

/// Orthonormal m x r factor from the thin QR of a random matrix.
fn random_orthonormal(rng: &mut ChaCha8Rng, m: usize, r: usize) -> DMatrix<f64> {
    let q = uniform_matrix(rng, m, r).qr().q();
    q.columns(0, r).into_owned()
}

fn random_unit_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

/// Seeded problem of shape m x n and rank r: `A = U_r diag(sigma) V_r*` with
/// singular values log-uniform in `[1e-3, 1]` and a normalized solution drawn
/// from the row space.
pub fn rank_deficient(m: usize, n: usize, r: usize, seed: u64) -> Result<TestProblem> {
    if m == 0 || n == 0 || r == 0 || r > m.min(n) {
        return Err(Error::param(format!(
            "rank_deficient needs 1 <= r <= min(m, n), got m = {m}, n = {n}, r = {r}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_orthonormal(&mut rng, m, r);
    let v = random_orthonormal(&mut rng, n, r);
    let mut sigmas: Vec<f64> = (0..r).map(|_| 10f64.powf(rng.random_range(-3.0..0.0))).collect();
    sigmas.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let mut scaled = u.clone();
    for (i, &s) in sigmas.iter().enumerate() {
        let mut col = scaled.column_mut(i);
        col *= s;
    }
    let a = LinearOperator::new(&scaled * v.transpose())?;

    let coeffs = random_unit_vector(&mut rng, r);
    let y = &v * coeffs;
    let y = &y / y.norm();
    TestProblem::from_solution(a, y, format!("rank_deficient({m},{n},{r},seed={seed})"))
}

/// Hilbert matrix problem: `A[i][j] = 1/(i + j - 1)` (1-based), the classical
/// ill-conditioning stress. The solution is the all-ones vector projected off
/// the numerical null space, which leaves it untouched while the matrix is
/// numerically full-rank.
pub fn hilbert(n: usize) -> Result<TestProblem> {
    if n == 0 {
        return Err(Error::param("hilbert needs n >= 1"));
    }
    let a = LinearOperator::new(DMatrix::from_fn(n, n, |i, j| 1.0 / ((i + j + 1) as f64)))?;
    let ones = DVector::from_element(n, 1.0);
    let dec = decompose_default(&a);
    let y = dec.project_off_nullspace(&ones)?;
    TestProblem::from_parts(a, y, format!("hilbert({n})"), dec)
}

/// Scaled forward-difference operator `(Au)_k = n (u_(k+1) - u_k)` of shape
/// (n-1) x n. Its norm grows like `2n`, which makes it the desk-scale stand-in
/// for an unbounded operator family; the null space is the constants. The
/// solution samples one period of a sine, projected off the constants.
pub fn discretized_derivative(n: usize) -> Result<TestProblem> {
    if n < 2 {
        return Err(Error::param("discretized_derivative needs n >= 2"));
    }
    let nf = n as f64;
    let a = LinearOperator::new(DMatrix::from_fn(n - 1, n, |k, j| {
        if j == k + 1 {
            nf
        } else if j == k {
            -nf
        } else {
            0.0
        }
    }))?;
    let samples = DVector::from_fn(n, |k, _| (2.0 * std::f64::consts::PI * k as f64 / nf).sin());
    let dec = decompose_default(&a);
    let y = dec.project_off_nullspace(&samples)?;
    TestProblem::from_parts(a, y, format!("discretized_derivative({n})"), dec)
}

/// Real symmetric operator with a one-dimensional kernel:
/// `A = W diag(lambda_1..lambda_(n-1), 0) W*` with seeded orthogonal `W` and
/// eigenvalues of magnitude in `[0.1, 1]` and random sign. The solution is a
/// normalized random element of the range.
pub fn symmetric_singular(n: usize, seed: u64) -> Result<TestProblem> {
    if n < 2 {
        return Err(Error::param("symmetric_singular needs n >= 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = random_orthonormal(&mut rng, n, n);
    let lambdas: Vec<f64> = (0..n - 1)
        .map(|_| {
            let magnitude = rng.random_range(0.1..1.0);
            if rng.random_range(0.0..1.0) < 0.5 {
                -magnitude
            } else {
                magnitude
            }
        })
        .collect();

    let mut scaled = w.clone();
    for (i, lambda) in lambdas.iter().copied().chain(std::iter::once(0.0)).enumerate() {
        let mut col = scaled.column_mut(i);
        col *= lambda;
    }
    let raw = &scaled * w.transpose();
    let sym = (&raw + raw.transpose()) * 0.5;
    let a = LinearOperator::new(sym)?;

    let coeffs = random_unit_vector(&mut rng, n - 1);
    let y = w.columns(0, n - 1) * coeffs;
    let y = &y / y.norm();
    TestProblem::from_solution(a, y, format!("symmetric_singular({n},seed={seed})"))
}

/// Adds a seeded random perturbation of exact norm `delta`:
/// `f_delta = f + delta * e` with `e` a unit vector.
pub fn add_noise(f: &DVector<f64>, delta: f64, seed: u64) -> Result<NoisyData> {
    if delta < 0.0 || !delta.is_finite() {
        return Err(Error::param(format!("noise level must be finite and >= 0, got {delta}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = random_unit_vector(&mut rng, f.len());
    NoisyData::new(f + e * delta, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{decompose, minimal_norm_solution, DEFAULT_RANK_TOL};

    #[test]
    fn rank_deficient_rank_is_exact() {
        let p = rank_deficient(2, 2, 1, 7).unwrap();
        assert_eq!(p.decomposition().rank(), 1);

        let full = rank_deficient(4, 3, 3, 7).unwrap();
        assert_eq!(full.decomposition().rank(), 3);
    }

    #[test]
    fn rank_deficient_solution_is_recovered_by_the_oracle() {
        let p = rank_deficient(10, 8, 5, 3).unwrap();
        let (y, consistency) = minimal_norm_solution(p.operator(), p.rhs(), DEFAULT_RANK_TOL).unwrap();
        assert!(consistency <= 1e-12);
        assert!((y - p.solution()).norm() <= 1e-9 * p.solution().norm());
    }

    #[test]
    fn rank_deficient_is_deterministic_per_seed() {
        let p1 = rank_deficient(6, 5, 3, 42).unwrap();
        let p2 = rank_deficient(6, 5, 3, 42).unwrap();
        assert_eq!(p1.operator().matrix(), p2.operator().matrix());
        assert_eq!(p1.rhs(), p2.rhs());
        let p3 = rank_deficient(6, 5, 3, 43).unwrap();
        assert_ne!(p1.operator().matrix(), p3.operator().matrix());
    }

    #[test]
    fn hilbert_entries_and_small_cases() {
        let p = hilbert(3).unwrap();
        let expected = [
            [1.0, 0.5, 1.0 / 3.0],
            [0.5, 1.0 / 3.0, 0.25],
            [1.0 / 3.0, 0.25, 0.2],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (j, want) in row.iter().enumerate() {
                assert_eq!(p.operator().matrix()[(i, j)], *want);
            }
        }
        let p1 = hilbert(1).unwrap();
        assert_eq!(p1.operator().matrix()[(0, 0)], 1.0);
        assert_eq!(p1.solution()[0], 1.0);
        assert_eq!(p1.rhs()[0], 1.0);
    }

    #[test]
    fn hilbert_is_severely_ill_conditioned_at_n10() {
        let p = hilbert(10).unwrap();
        // keep every positive singular value to measure the full condition number
        let dec = decompose(p.operator(), 0.0);
        assert!(dec.condition_number() > 1e12, "cond = {:.3e}", dec.condition_number());
    }

    #[test]
    fn derivative_shape_and_kernel() {
        let p = discretized_derivative(2).unwrap();
        assert_eq!(p.nrows(), 1);
        assert_eq!(p.ncols(), 2);
        assert_eq!(p.operator().matrix()[(0, 0)], -2.0);
        assert_eq!(p.operator().matrix()[(0, 1)], 2.0);
        // kernel is the constants
        let ones = DVector::from_element(2, 1.0);
        assert!(p.operator().apply(&ones).unwrap().norm() < 1e-15);
    }

    #[test]
    fn derivative_norm_grows_with_n() {
        let s32 = discretized_derivative(32).unwrap().decomposition().sigma_max();
        let s64 = discretized_derivative(64).unwrap().decomposition().sigma_max();
        assert!(s64 > 2.0 * s32 * 0.9, "sigma_max(64) = {s64}, sigma_max(32) = {s32}");
    }

    #[test]
    fn symmetric_singular_structure() {
        let p = symmetric_singular(2, 5).unwrap();
        assert!(p.operator().is_hermitian(1e-14));
        assert_eq!(p.decomposition().rank(), 1);

        let p = symmetric_singular(12, 1).unwrap();
        assert!(p.operator().is_hermitian(1e-14));
        assert_eq!(p.decomposition().rank(), 11);
    }

    #[test]
    fn noise_has_exact_norm_and_is_reproducible() {
        let f = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        for delta in [1e-6, 1e-2, 3.0] {
            let noisy = add_noise(&f, delta, 11).unwrap();
            let measured = (noisy.data() - &f).norm();
            // forming f + delta*e rounds entries at eps*|f_i|, which caps the
            // attainable exactness when delta is far below |f|
            let rounding = 4.0 * f64::EPSILON * f.norm() / delta;
            assert!((measured / delta - 1.0).abs() <= 1e-12 + rounding);
        }
        let n1 = add_noise(&f, 0.1, 11).unwrap();
        let n2 = add_noise(&f, 0.1, 11).unwrap();
        assert_eq!(n1.data(), n2.data());

        let clean = add_noise(&f, 0.0, 11).unwrap();
        assert_eq!(clean.data(), &f);
    }

    #[test]
    fn generated_problems_pass_their_invariants() {
        // construction re-verifies consistency and orthogonality; exercise a spread
        for seed in 0..5 {
            rank_deficient(7, 9, 4, seed).unwrap();
            symmetric_singular(6, seed).unwrap();
        }
        for n in [2, 5, 12, 40] {
            discretized_derivative(n).unwrap();
        }
        for n in 1..=12 {
            hilbert(n).unwrap();
        }
    }
}
