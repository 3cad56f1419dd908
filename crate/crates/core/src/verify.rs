//! Named invariant suites behind the `verify` command.
//!
//! Each check exercises one mathematical guarantee of the library against
//! seeded inputs and reports a measured margin. The fixed check names form
//! part of the report contract.

use std::f64::consts::FRAC_PI_2;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::operator::{smoothing_op, smoothing_op_imaginary, LinearOperator, RegParam};
use crate::oracle::{decompose_default, minimal_norm_solution, DEFAULT_RANK_TOL};
use crate::problems;
use crate::solvers::{exp_weighted_quadrature_scalar, tikhonov_minimizer, tikhonov_minimizer_via_cogram};

/// Outcome of one named check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Measured worst-case margin or the first failure description.
    pub details: String,
    pub elapsed: Duration,
}

/// Results of the full suite.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{:22} {}  [{:6.2}s]  {}\n",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.elapsed.as_secs_f64(),
                c.details
            ));
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        out.push_str(&format!(
            "overall: {} ({passed}/{} checks)\n",
            if self.all_passed() { "PASS" } else { "FAIL" },
            self.checks.len()
        ));
        out
    }
}

/// Runs every named check.
pub fn run_all() -> VerifyReport {
    VerifyReport {
        checks: vec![
            theorem2_bound(),
            eq18_identity(),
            theorem3_minimizer(),
            lemma1_equiv(),
            lemma2_quadrature(),
            lemma3_limit(),
        ],
    }
}

struct Tally {
    failures: Vec<String>,
    margin: f64,
}

impl Tally {
    fn new() -> Self {
        Self { failures: Vec::new(), margin: 0.0 }
    }

    /// Records a ratio that must stay at or below one; NaN counts as failure.
    fn ratio(&mut self, ratio: f64, context: impl Fn() -> String) {
        if ratio > 1.0 || ratio.is_nan() {
            self.failures.push(format!("{} (ratio {ratio:.6e})", context()));
        }
        if ratio > self.margin {
            self.margin = ratio;
        }
    }

    fn require(&mut self, ok: bool, context: impl Fn() -> String) {
        if !ok {
            self.failures.push(context());
        }
    }

    fn finish(self, name: &'static str, start: Instant) -> CheckResult {
        let passed = self.failures.is_empty();
        let details = if passed {
            format!("worst margin {:.3e} of tolerance", self.margin)
        } else {
            format!("{} failure(s); first: {}", self.failures.len(), self.failures[0])
        };
        CheckResult { name, passed, details, elapsed: start.elapsed() }
    }
}

/// Operator with prescribed singular values from seeded orthonormal factors.
fn operator_with_spectrum(rng: &mut ChaCha8Rng, m: usize, n: usize, sigmas: &[f64]) -> LinearOperator<f64> {
    let r = sigmas.len();
    let gauss = |rng: &mut ChaCha8Rng, rows: usize, cols: usize| {
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    };
    if r == 0 {
        return LinearOperator::new(DMatrix::zeros(m, n)).expect("valid zero operator");
    }
    let u = gauss(rng, m, r).qr().q().columns(0, r).into_owned();
    let v = gauss(rng, n, r).qr().q().columns(0, r).into_owned();
    let mut scaled = u;
    for (i, &s) in sigmas.iter().enumerate() {
        let mut col = scaled.column_mut(i);
        col *= s;
    }
    LinearOperator::new(&scaled * v.transpose()).expect("finite by construction")
}

fn log_spaced(top: f64, cond: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![top];
    }
    (0..count)
        .map(|i| top * cond.powf(-(i as f64) / (count as f64 - 1.0)))
        .collect()
}

fn random_vector(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.random_range(-1.0..1.0))
}

const SHIFT_GRID: [f64; 5] = [1e-6, 1e-4, 1e-2, 1.0, 10.0];

/// Smoothing-norm bound: for every operator and every shift `a > 0` the
/// exact norm `max_i sigma_i/(sigma_i^2 + a)` stays at or below
/// `1/(2 sqrt(a))`, the bound is attained when a singular value sits at
/// `sqrt(a)`, and the imaginary-shift variant obeys `1/sqrt(2a)`. The sweep
/// covers 200 seeded matrices with condition numbers up to 1e8 and norms up
/// to 1e6, plus the norm-divergent derivative family, demonstrating that the
/// bound depends on the shift alone.
pub fn theorem2_bound() -> CheckResult {
    let start = Instant::now();
    let mut tally = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);

    let slack = 1.0 + 1e-12;
    let check_decomposition = |tally: &mut Tally, dec: &crate::oracle::SpectralDecomposition<f64>, what: &str| {
        for a in SHIFT_GRID {
            let real = RegParam::real(a).expect("a > 0");
            let norm = dec.smoothing_norm_exact(&real);
            tally.ratio(norm / (real.smoothing_bound() * slack), || format!("{what}: real bound at a = {a:.1e}"));
            let imag = RegParam::imaginary(a).expect("a > 0");
            let norm_im = dec.smoothing_norm_exact(&imag);
            tally.ratio(norm_im / (imag.smoothing_bound() * slack), || {
                format!("{what}: imaginary bound at a = {a:.1e}")
            });
        }
    };

    // 200 seeded random matrices, condition numbers up to 1e8, norms up to 1e6
    for k in 0..200u64 {
        let m = rng.random_range(1..=30usize);
        let n = rng.random_range(1..=30usize);
        let r = rng.random_range(1..=m.min(n));
        let cond = 10f64.powf(rng.random_range(0.0..8.0));
        let scale = 10f64.powf(rng.random_range(0.0..6.0));
        let a_op = operator_with_spectrum(&mut rng, m, n, &log_spaced(scale, cond, r));
        let dec = decompose_default(&a_op);
        check_decomposition(&mut tally, &dec, &format!("random #{k}"));

        // measured application for well-scaled instances, where the factored
        // solve stays within the 1e-10 relative slack
        if scale <= 10.0 {
            let g = random_vector(&mut rng, m);
            for a in [1e-2, 1.0, 10.0] {
                let s = smoothing_op(&a_op, a, &g).expect("valid inputs");
                let bound = 0.5 / a.sqrt() * g.norm() * (1.0 + 1e-10);
                tally.ratio(s.norm() / bound, || format!("random #{k}: measured smoothing at a = {a:.1e}"));
            }
        }
    }

    // norm-divergent operator family: the bound must not move with n
    for exp in 3..=10u32 {
        let n = 1usize << exp;
        let problem = problems::discretized_derivative(n).expect("valid n");
        check_decomposition(&mut tally, problem.decomposition(), &format!("derivative n = {n}"));
    }

    // planted singular value at sqrt(a): the real bound is attained
    for a in SHIFT_GRID {
        let rs = a.sqrt();
        let planted = LinearOperator::from_diagonal(&[100.0 * rs, rs, rs / 50.0]).expect("finite");
        let dec = decompose_default(&planted);
        let real = RegParam::real(a).expect("a > 0");
        let norm = dec.smoothing_norm_exact(&real);
        let bound = real.smoothing_bound();
        tally.require((norm - bound).abs() <= 1e-10 * bound, || {
            format!("planted sqrt(a): norm {norm:.12e} vs bound {bound:.12e} at a = {a:.1e}")
        });

        // measured apply against the attaining left singular vector matches
        // the closed form for both shift modes
        let g = dec.left_vectors().column(1).into_owned();
        let s = smoothing_op(&planted, a, &g).expect("valid inputs");
        tally.require((s.norm() - norm).abs() <= 1e-8 * norm, || {
            format!("planted sqrt(a): measured {:.12e} vs closed form {norm:.12e}", s.norm())
        });
        let imag = RegParam::imaginary(a).expect("a > 0");
        let norm_im = dec.smoothing_norm_exact(&imag);
        let gc = g.map(|x| num_complex::Complex64::new(x, 0.0));
        let si = smoothing_op_imaginary(&planted, a, &gc).expect("valid inputs");
        tally.require((si.norm() - norm_im).abs() <= 1e-8 * norm_im, || {
            format!("planted sqrt(a): imaginary measured {:.12e} vs {norm_im:.12e}", si.norm())
        });
        tally.require((norm_im - imag.smoothing_bound()).abs() <= 1e-10 * imag.smoothing_bound(), || {
            format!("planted sqrt(a): imaginary norm should attain 1/sqrt(2a) at a = {a:.1e}")
        });
    }

    tally.finish("theorem2_bound", start)
}

/// Route identity: the normal-equations minimizer `(A*A + aI)^{-1} A* g` and
/// the data-space form `A* (AA* + aI)^{-1} g` agree on seeded inputs spanning
/// every rank from zero to full.
pub fn eq18_identity() -> CheckResult {
    let start = Instant::now();
    let mut tally = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xE18);

    for k in 0..100u64 {
        let m = rng.random_range(1..=10usize);
        let n = rng.random_range(1..=10usize);
        let r = rng.random_range(0..=m.min(n));
        let cond = 10f64.powf(rng.random_range(0.0..2.0));
        let a_op = operator_with_spectrum(&mut rng, m, n, &log_spaced(1.0, cond, r));
        let a = 10f64.powf(rng.random_range(-4.0..1.0));
        let g = random_vector(&mut rng, m);

        let z1 = tikhonov_minimizer(&a_op, a, &g).expect("valid inputs");
        let z2 = tikhonov_minimizer_via_cogram(&a_op, a, &g).expect("valid inputs");
        let diff = (&z1 - &z2).norm();
        tally.ratio(diff / (1e-9 * (1.0 + g.norm())), || {
            format!("triple #{k} (m={m}, n={n}, r={r}, a={a:.2e})")
        });
    }

    tally.finish("eq18_identity", start)
}

/// Minimizer optimality: the computed minimizer `z` is stationary to 1e-10
/// relative, and every perturbation raises the objective by at least
/// `(1 - 1e-10)(|Ah|^2 + a|h|^2)`.
pub fn theorem3_minimizer() -> CheckResult {
    let start = Instant::now();
    let mut tally = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x73);

    for k in 0..20u64 {
        let m = rng.random_range(2..=12usize);
        let n = rng.random_range(2..=12usize);
        let r = rng.random_range(1..=m.min(n));
        let cond = 10f64.powf(rng.random_range(0.0..2.0));
        let a_op = operator_with_spectrum(&mut rng, m, n, &log_spaced(1.0, cond, r));
        let a = 10f64.powf(rng.random_range(-2.0..0.0));
        let g = random_vector(&mut rng, m);

        let z = tikhonov_minimizer(&a_op, a, &g).expect("valid inputs");
        let rhs = a_op.apply_adjoint(&g).expect("dims");
        let stationarity = (a_op.gram().apply(&z).expect("dims") + &z * a - &rhs).norm();
        tally.ratio(stationarity / (1e-10 * rhs.norm().max(f64::MIN_POSITIVE)), || {
            format!("problem #{k}: stationarity")
        });

        let objective = |u: &DVector<f64>| -> f64 {
            let r = a_op.apply(u).expect("dims") - &g;
            r.norm_squared() + a * u.norm_squared()
        };
        let fz = objective(&z);
        for _ in 0..50 {
            let mut h = random_vector(&mut rng, n);
            let target = rng.random_range(0.5..2.0);
            h *= target / h.norm().max(1e-12);
            let gain = objective(&(&z + &h)) - fz;
            let floor = (1.0 - 1e-10) * (a_op.apply(&h).expect("dims").norm_squared() + a * h.norm_squared());
            tally.require(gain >= floor, || {
                format!("problem #{k}: perturbation gain {gain:.6e} below floor {floor:.6e}")
            });
        }
    }

    tally.finish("theorem3_minimizer", start)
}

/// Normal-equations equivalence: for consistent systems the minimal-norm
/// solutions of `Au = f` and `A*Au = A*f` coincide.
pub fn lemma1_equiv() -> CheckResult {
    let start = Instant::now();
    let mut tally = Tally::new();

    let mut problems_list = Vec::new();
    for seed in 0..27u64 {
        let m = 3 + (seed as usize % 8);
        let n = 3 + ((seed as usize * 5 + 2) % 8);
        let r = 1 + (seed as usize % m.min(n));
        problems_list.push(problems::rank_deficient(m, n, r, 1000 + seed).expect("valid dims"));
    }
    for (i, n) in (4..14).enumerate() {
        problems_list.push(problems::symmetric_singular(n, 2000 + i as u64).expect("valid dims"));
    }
    for n in 4..14 {
        problems_list.push(problems::discretized_derivative(n).expect("valid dims"));
    }
    for n in 1..=3 {
        problems_list.push(problems::hilbert(n).expect("valid dims"));
    }
    assert_eq!(problems_list.len(), 50);

    for p in &problems_list {
        let (y1, cons) = minimal_norm_solution(p.operator(), p.rhs(), DEFAULT_RANK_TOL).expect("dims");
        tally.require(cons <= 1e-10 * p.rhs().norm().max(f64::MIN_POSITIVE), || {
            format!("{}: generated data not consistent (|Ay - f| = {cons:.3e})", p.label())
        });
        let normal_rhs = p.operator().apply_adjoint(p.rhs()).expect("dims");
        let (y2, _) =
            minimal_norm_solution(&p.operator().gram(), &normal_rhs, DEFAULT_RANK_TOL).expect("dims");
        let diff = (&y1 - &y2).norm();
        tally.ratio(diff / (1e-9 * y1.norm().max(f64::MIN_POSITIVE)), || {
            format!("{}: route disagreement", p.label())
        });
    }

    tally.finish("lemma1_equiv", start)
}

/// Exponentially weighted averages converge to the integrand's limit: for
/// `h = arctan`, the quadrature `int_0^t exp(-(t-s)) h(s) ds` approaches
/// `pi/2` as the horizon grows, and the kernel itself is converged in its
/// node count.
pub fn lemma2_quadrature() -> CheckResult {
    let start = Instant::now();
    let mut tally = Tally::new();

    // node-count convergence of the kernel at a fixed horizon
    let coarse = exp_weighted_quadrature_scalar(20.0, 4001, f64::atan).expect("valid horizon");
    let fine = exp_weighted_quadrature_scalar(20.0, 64001, f64::atan).expect("valid horizon");
    tally.require((coarse - fine).abs() <= 1e-5, || {
        format!("kernel not converged in node count: |{coarse:.9} - {fine:.9}|")
    });

    // horizon convergence toward the limit pi/2; deviation scales like 1/t
    let cases = [(20.0, 4001usize, 6e-2), (200.0, 40_001, 6e-3), (2000.0, 400_001, 6e-4)];
    let mut prev = f64::INFINITY;
    for (t, nodes, budget) in cases {
        let q = exp_weighted_quadrature_scalar(t, nodes, f64::atan).expect("valid horizon");
        let dev = (q - FRAC_PI_2).abs();
        tally.ratio(dev / budget, || format!("horizon t = {t}: deviation {dev:.3e}"));
        tally.require(dev < prev, || format!("horizon t = {t}: deviation not decreasing"));
        prev = dev;
    }

    tally.finish("lemma2_quadrature", start)
}

/// Smoothed-identity limit: `|(T + eps I)^{-1} T y - y|` falls to zero with
/// `eps` for `y` orthogonal to the null space, and equals `|y|` identically
/// for `y` inside it.
pub fn lemma3_limit() -> CheckResult {
    let start = Instant::now();
    let mut tally = Tally::new();

    let diagonals: [&[f64]; 2] = [&[2.0, 1.0, 0.0], &[3.0, 0.5, 0.1, 0.0]];
    for (which, diag) in diagonals.iter().enumerate() {
        let a_op = LinearOperator::from_diagonal(diag).expect("finite");
        let dec = decompose_default(&a_op);
        let n = diag.len();

        // off-kernel reference: ones on the non-null coordinates, normalized
        let mut y = DVector::from_element(n, 1.0);
        y[n - 1] = 0.0;
        let y = &y / y.norm();

        let mut prev = f64::INFINITY;
        let mut last = f64::INFINITY;
        for k in 1..=12 {
            let eps = 10f64.powi(-k);
            let err = dec.smoothed_identity_error(eps, &y).expect("valid eps");
            tally.require(err < prev, || format!("diag #{which}: error not decreasing at eps = 1e-{k}"));
            prev = err;
            last = err;
        }
        tally.ratio(last / (1e-6 * y.norm()), || format!("diag #{which}: terminal error {last:.3e}"));

        // kernel reference: the error equals |y| for every eps
        let mut y_null = DVector::zeros(n);
        y_null[n - 1] = 2.0;
        for k in 1..=12 {
            let eps = 10f64.powi(-k);
            let err = dec.smoothed_identity_error(eps, &y_null).expect("valid eps");
            tally.require((err - y_null.norm()).abs() <= 1e-12 * y_null.norm(), || {
                format!("diag #{which}: kernel error {err:.15e} != |y| at eps = 1e-{k}")
            });
        }
    }

    tally.finish("lemma3_limit", start)
}

#[cfg(test)]
mod tests {
    use super::*;

    // The individual checks run (and are timed) in the acceptance suite; here
    // only the report plumbing is covered.
    #[test]
    fn report_renders_one_line_per_check() {
        let report = VerifyReport {
            checks: vec![
                CheckResult { name: "a", passed: true, details: "ok".into(), elapsed: Duration::ZERO },
                CheckResult { name: "b", passed: false, details: "broke".into(), elapsed: Duration::ZERO },
            ],
        };
        assert!(!report.all_passed());
        let text = report.render();
        assert!(text.contains("a"));
        assert!(text.contains("FAIL"));
        assert!(text.lines().count() == 3);
    }

    #[test]
    fn fast_checks_pass() {
        assert!(eq18_identity().passed);
        assert!(lemma3_limit().passed);
    }
}
