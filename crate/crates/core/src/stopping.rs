//! Noise-aware termination: the iteration-count schedule `n(delta)` with its
//! error envelope, and discrepancy-principle stopping for sampled runs.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::operator::Scalar;
use crate::solvers::{DsmTrace, IterationTrace};

/// Default discrepancy safety factor.
pub const DEFAULT_DISCREPANCY_C: f64 = 1.5;

/// Noisy right-hand side together with the exact perturbation norm
/// `delta = |f_delta - f|`.
#[derive(Clone, Debug)]
pub struct NoisyData {
    f_delta: DVector<f64>,
    delta: f64,
}

impl NoisyData {
    pub fn new(f_delta: DVector<f64>, delta: f64) -> Result<Self> {
        if delta < 0.0 || !delta.is_finite() {
            return Err(Error::param(format!("noise level must be finite and >= 0, got {delta}")));
        }
        if f_delta.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("noisy data contains NaN or infinity".into()));
        }
        Ok(Self { f_delta, delta })
    }

    pub fn data(&self) -> &DVector<f64> {
        &self.f_delta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Parameters of the stopping rule `n(delta) = ceil(c * delta^(-gamma))`.
///
/// `gamma < 1` makes the two limits hold literally: the index grows without
/// bound while `delta * n(delta)` still vanishes as the noise goes to zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleParams {
    gamma: f64,
    c: f64,
}

impl ScheduleParams {
    pub fn new(gamma: f64, c: f64) -> Result<Self> {
        if gamma <= 0.0 || gamma >= 1.0 || gamma.is_nan() {
            return Err(Error::param(format!("gamma must lie in (0, 1), got {gamma}")));
        }
        if c <= 0.0 || !c.is_finite() {
            return Err(Error::param(format!("schedule constant must be finite and > 0, got {c}")));
        }
        Ok(Self { gamma, c })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

impl Default for ScheduleParams {
    fn default() -> Self {
        Self { gamma: 0.5, c: 1.0 }
    }
}

/// Iteration count `ceil(c * delta^(-gamma))` for noise level `delta > 0`.
///
/// A zero noise level is rejected: with exact data one iterates to tolerance
/// instead of stopping by schedule.
pub fn stopping_index(delta: f64, params: &ScheduleParams) -> Result<usize> {
    if delta <= 0.0 || !delta.is_finite() {
        return Err(Error::param(format!(
            "schedule stopping needs a noise level > 0, got {delta}; iterate to tolerance instead"
        )));
    }
    let raw = params.c * delta.powf(-params.gamma);
    if !raw.is_finite() {
        return Err(Error::Numerical(format!("stopping index overflowed for delta = {delta}")));
    }
    Ok((raw.ceil() as usize).max(1))
}

/// Error envelope `nu(delta, n) = delta (n+1) / (2 sqrt(a)) + eps_n`, where
/// `eps_n` is the caller-supplied clean-data error term (measured, or
/// predicted spectrally by the oracle).
pub fn error_envelope(delta: f64, n: usize, a: f64, eps_n: f64) -> f64 {
    delta * (n as f64 + 1.0) / (2.0 * a.sqrt()) + eps_n
}

/// Outcome of a discrepancy-principle scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscrepancyStop {
    /// First sample index with residual at or below the threshold; the final
    /// index when the threshold was never reached.
    pub index: usize,
    /// Whether the residual actually crossed `c * delta`.
    pub reached: bool,
    /// Residual at the returned index.
    pub residual: f64,
}

/// Scans residuals (computed against the noisy data) for the first crossing
/// of `c * delta` with `c > 1`.
pub fn discrepancy_stop(residuals: &[f64], data: &NoisyData, c: f64) -> Result<DiscrepancyStop> {
    if residuals.is_empty() {
        return Err(Error::param("discrepancy scan needs a non-empty trace"));
    }
    if c <= 1.0 || !c.is_finite() {
        return Err(Error::param(format!("discrepancy constant must be finite and > 1, got {c}")));
    }
    let threshold = c * data.delta();
    for (i, &r) in residuals.iter().enumerate() {
        if r <= threshold {
            return Ok(DiscrepancyStop { index: i, reached: true, residual: r });
        }
    }
    let last = residuals.len() - 1;
    Ok(DiscrepancyStop { index: last, reached: false, residual: residuals[last] })
}

impl<S: Scalar> DsmTrace<S> {
    /// Discrepancy stop over this trajectory; also reports the stopping time.
    pub fn discrepancy_stop(&self, data: &NoisyData, c: f64) -> Result<(DiscrepancyStop, f64)> {
        let stop = discrepancy_stop(self.residuals(), data, c)?;
        Ok((stop, self.times()[stop.index]))
    }
}

impl<S: Scalar> IterationTrace<S> {
    /// Discrepancy stop over this iteration's residual sequence.
    pub fn discrepancy_stop(&self, data: &NoisyData, c: f64) -> Result<DiscrepancyStop> {
        discrepancy_stop(self.residuals(), data, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stopping_index_examples() {
        let p = ScheduleParams::default();
        assert_eq!(stopping_index(1e-4, &p).unwrap(), 100);
        assert_eq!(stopping_index(1.0, &p).unwrap(), 1);
        let p = ScheduleParams::new(0.25, 2.0).unwrap();
        assert_eq!(stopping_index(1e-2, &p).unwrap(), 7);
        assert!(stopping_index(0.0, &ScheduleParams::default()).is_err());
    }

    #[test]
    fn schedule_limits() {
        let p = ScheduleParams::default();
        let mut prev_n = 0usize;
        let mut prev_dn = f64::INFINITY;
        for k in 1..=6 {
            let delta = 10f64.powi(-k);
            let n = stopping_index(delta, &p).unwrap();
            assert!(n > prev_n, "n(delta) must increase as delta shrinks");
            let dn = delta * n as f64;
            assert!(dn < prev_dn, "delta * n(delta) must decrease");
            prev_n = n;
            prev_dn = dn;
        }
    }

    #[test]
    fn envelope_examples() {
        assert_eq!(error_envelope(0.0, 17, 2.0, 0.25), 0.25);
        assert!((error_envelope(0.1, 3, 0.25, 0.0) - 0.4).abs() < 1e-15);
        assert!((error_envelope(1e-3, 99, 1.0, 0.01) - 0.06).abs() < 1e-15);
    }

    #[test]
    fn discrepancy_threshold_logic() {
        let data = NoisyData::new(DVector::zeros(1), 0.1).unwrap();

        let stop = discrepancy_stop(&[3.0, 1.4, 0.2], &data, 1.5).unwrap();
        assert_eq!(stop.index, 2);
        assert!(!stop.reached);

        let stop = discrepancy_stop(&[3.0, 1.4, 0.1], &data, 1.5).unwrap();
        assert_eq!(stop.index, 2);
        assert!(stop.reached);
        assert!((stop.residual - 0.1).abs() < 1e-15);

        assert!(discrepancy_stop(&[], &data, 1.5).is_err());
        assert!(discrepancy_stop(&[1.0], &data, 1.0).is_err());
    }

    #[test]
    fn discrepancy_returns_minimal_index_on_monotone_residuals() {
        let data = NoisyData::new(DVector::zeros(1), 1.0).unwrap();
        let residuals = [5.0, 4.0, 3.0, 1.5, 1.5, 0.5];
        let stop = discrepancy_stop(&residuals, &data, 1.5).unwrap();
        assert_eq!(stop.index, 3);
        assert!(stop.reached);
    }

    #[test]
    fn noisy_data_validation() {
        assert!(NoisyData::new(DVector::from_vec(vec![1.0]), -0.1).is_err());
        assert!(NoisyData::new(DVector::from_vec(vec![f64::NAN]), 0.1).is_err());
    }
}
