//! Seed provenance for the frozen constants in the acceptance suite.
//!
//! The acceptance experiments pin generator seeds whose spectra keep the runs
//! well-posed: step counts in the hundreds rather than millions, discrepancy
//! crossings at desk-scale horizons, and measurable components on every
//! eigen-direction. These scans regenerate such seeds; they are ignored by
//! default and exist so the constants can be re-derived when a generator
//! changes. Run with
//!   cargo test -p regsolve --test dev_seed_search -- --ignored --nocapture

use nalgebra::DVector;
use regsolve::oracle::decompose_default;
use regsolve::problems::{rank_deficient, symmetric_singular};
use regsolve::solvers::iterate_fixed_point;

/// Acceptance criterion 4 uses rank_deficient(20, 15, 8, 1318).
#[test]
#[ignore = "development-time seed scan"]
fn scan_rank_deficient_20_15_8() {
    // want: sigma_min in [0.02, 0.1] so the predicted step count stays in the
    // hundreds, monotone measured errors, tight agreement with the spectral
    // prediction both value-relative early on and |y|-relative throughout
    let a = 0.1f64;
    let mut found = 0;
    for seed in 0..4000u64 {
        let p = match rank_deficient(20, 15, 8, seed) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let smin = p.decomposition().sigma_min();
        if !(0.02..=0.1).contains(&smin) {
            continue;
        }
        let q: f64 = a / (a + smin * smin);
        let n_star = ((1e-6f64).ln() / q.ln()).ceil() as usize;
        let u1 = DVector::zeros(15);
        let w = &u1 - p.solution();
        let trace =
            match iterate_fixed_point(p.operator(), a, p.rhs(), &u1, n_star, 0.0, Some(p.solution())) {
                Ok(t) => t,
                Err(_) => continue,
            };
        let dec = p.decomposition();
        let ynorm = p.solution().norm();
        let mut worst_early = 0.0f64;
        let mut worst_abs = 0.0f64;
        let mut monotone = true;
        let mut prev = f64::INFINITY;
        for (n, err) in trace.errors().iter().enumerate() {
            let pred = dec.iteration_error(a, &w, n).unwrap();
            if pred >= 1e-3 * ynorm {
                worst_early = worst_early.max((err - pred).abs() / pred);
            }
            worst_abs = worst_abs.max((err - pred).abs() / ynorm);
            if *err > prev {
                monotone = false;
            }
            prev = *err;
        }
        let final_ok = *trace.errors().last().unwrap() <= 1e-6 * ynorm;
        if worst_early <= 1e-11 && worst_abs <= 1e-11 && monotone && final_ok {
            println!("seed {seed}: smin={smin:.4} n*={n_star} early={worst_early:.3e} abs={worst_abs:.3e}");
            found += 1;
            if found >= 12 {
                break;
            }
        }
    }
    assert!(found > 0, "no suitable seed found");
}

/// Acceptance criteria 7 and 8 use rank_deficient(12, 10, 6, 12837).
#[test]
#[ignore = "development-time seed scan"]
fn scan_rank_deficient_12_10_6() {
    // want sigma_min >= 0.12: the noisy discrepancy crossing needs the decay
    // schedule to reach eps of order sigma_min^2 * delta, which stays at
    // desk-scale horizons only when the smallest singular value is large
    let mut found = 0;
    for seed in 0..200_000u64 {
        let p = match rank_deficient(12, 10, 6, seed) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let smin = p.decomposition().sigma_min();
        if smin >= 0.12 {
            println!("seed {seed}: smin={smin:.4}");
            found += 1;
            if found >= 8 {
                break;
            }
        }
    }
    assert!(found > 0, "no suitable seed found");
}

/// Acceptance criterion 6 uses symmetric_singular(12, 41).
#[test]
#[ignore = "development-time seed scan"]
fn scan_symmetric_singular_12() {
    // want distinct |lambda| (gap >= 0.02, so singular directions stay
    // resolvable) and solution components >= 1e-2 on every eigen-direction so
    // per-direction contraction ratios are measurable
    let mut found = 0;
    for seed in 0..2000u64 {
        let p = match symmetric_singular(12, seed) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let dec = decompose_default(p.operator());
        let mut sv: Vec<f64> = dec.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut min_gap = f64::INFINITY;
        for w in sv.windows(2) {
            min_gap = min_gap.min(w[0] - w[1]);
        }
        let coeffs = dec.right_vectors().ad_mul(p.solution());
        let min_comp = coeffs.iter().map(|c| c.abs()).fold(f64::INFINITY, f64::min);
        if min_gap >= 0.02 && min_comp >= 1e-2 {
            println!("seed {seed}: min_gap={min_gap:.4} min_comp={min_comp:.4}");
            found += 1;
            if found >= 8 {
                break;
            }
        }
    }
    assert!(found > 0, "no suitable seed found");
}

/// CLI end-to-end tests use rank_deficient(10, 8, 5, 4).
#[test]
#[ignore = "development-time seed scan"]
fn scan_rank_deficient_10_8_5() {
    for seed in 0..50u64 {
        let p = rank_deficient(10, 8, 5, seed).unwrap();
        let smin = p.decomposition().sigma_min();
        let a = 0.1f64;
        let q: f64 = a / (a + smin * smin);
        let n_star = ((1e-8f64).ln() / q.ln()).ceil();
        if n_star < 5000.0 {
            println!("seed {seed}: smin={smin:.4} steps-to-1e-8={n_star:.0}");
        }
    }
}
