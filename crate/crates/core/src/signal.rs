//! Complex baseband signal primitives.
//!
//! The received-signal model is `s = A * s_n + r`, where `s_n` has unit mean
//! power, `r` is complex white Gaussian noise whose real and imaginary parts
//! each have variance `sigma^2`, and the SNR is `A^2 / (2 sigma^2)`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::RngCore;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::rng;

/// Sample rate of every generated radar signal.
pub const SAMPLE_RATE_HZ: f64 = 100e6;
/// Default model input length.
pub const SIGNAL_LENGTH: usize = 1024;

/// Tolerance on the unit-power precondition of [`apply_snr`].
pub const UNIT_POWER_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("signal is empty")]
    Empty,
    #[error("signal has zero power and cannot be normalized")]
    ZeroPower,
    #[error("signal contains a non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("expected unit mean power, got {0}")]
    NotUnitPower(f64),
    #[error("resampling needs at least 2 samples (input {input}, target {target})")]
    TooShort { input: usize, target: usize },
    #[error("noise sigma must be positive, got {0}")]
    BadSigma(f64),
    #[error("signal length {got} does not match expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// A fixed-length complex baseband sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct IqSignal {
    samples: Vec<Complex64>,
    sample_rate_hz: f64,
}

impl IqSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64) -> Result<Self, SignalError> {
        if samples.is_empty() {
            return Err(SignalError::Empty);
        }
        if let Some(i) = samples.iter().position(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(SignalError::NonFinite(i));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    /// Build from interleaved `[i0, q0, i1, q1, ...]` values.
    pub fn from_interleaved(iq: &[f32], sample_rate_hz: f64) -> Result<Self, SignalError> {
        let samples = iq
            .chunks_exact(2)
            .map(|p| Complex64::new(p[0] as f64, p[1] as f64))
            .collect();
        Self::new(samples, sample_rate_hz)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn mean_power(&self) -> f64 {
        mean_power(&self.samples)
    }

    /// Interleaved I/Q values in single precision.
    pub fn to_interleaved(&self) -> Vec<f32> {
        self.samples
            .iter()
            .flat_map(|s| [s.re as f32, s.im as f32])
            .collect()
    }

    pub fn expect_len(&self, expected: usize) -> Result<(), SignalError> {
        if self.len() != expected {
            return Err(SignalError::LengthMismatch {
                expected,
                got: self.len(),
            });
        }
        Ok(())
    }
}

/// Noise parameters for one SNR point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub sigma: f64,
    pub amplitude_scale: f64,
}

impl NoiseSpec {
    /// `A = sqrt(2 sigma^2 10^(snr_db / 10))`.
    pub fn new(snr_db: f64, sigma: f64) -> Result<Self, SignalError> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(SignalError::BadSigma(sigma));
        }
        let amplitude_scale = (2.0 * sigma * sigma * 10f64.powf(snr_db / 10.0)).sqrt();
        Ok(Self {
            snr_db,
            sigma,
            amplitude_scale,
        })
    }

    pub fn unit_sigma(snr_db: f64) -> Self {
        Self::new(snr_db, 1.0).expect("sigma 1 is valid")
    }
}

pub fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|s| s.norm_sqr()).sum::<f64>() / x.len() as f64
}

/// Scale `x` to unit mean power.
pub fn normalize_power(x: &[Complex64]) -> Result<Vec<Complex64>, SignalError> {
    if x.is_empty() {
        return Err(SignalError::Empty);
    }
    let p = mean_power(x);
    if !(p > 0.0) {
        return Err(SignalError::ZeroPower);
    }
    if !p.is_finite() {
        return Err(SignalError::NonFinite(
            x.iter().position(|s| !s.norm_sqr().is_finite()).unwrap_or(0),
        ));
    }
    let g = 1.0 / p.sqrt();
    Ok(x.iter().map(|s| s * g).collect())
}

/// `A * x_norm + r` with `r` drawn from `rng` (see [`crate::rng`] for the
/// exact Gaussian draw order).
pub fn apply_snr<R: RngCore + ?Sized>(
    x_norm: &[Complex64],
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<Vec<Complex64>, SignalError> {
    if x_norm.is_empty() {
        return Err(SignalError::Empty);
    }
    if !(noise.sigma > 0.0) {
        return Err(SignalError::BadSigma(noise.sigma));
    }
    let p = mean_power(x_norm);
    if (p - 1.0).abs() > UNIT_POWER_TOL {
        return Err(SignalError::NotUnitPower(p));
    }
    let a = noise.amplitude_scale;
    Ok(x_norm
        .iter()
        .map(|s| {
            let (zi, zq) = rng::gaussian_pair(rng);
            s * a + Complex64::new(zi * noise.sigma, zq * noise.sigma)
        })
        .collect())
}

fn fft_pair(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
}

/// Band-limited resampling by zero-padding or truncating the spectrum.
///
/// For an even-length side the Nyquist bin is split (upsampling) or folded
/// (downsampling) so that real inputs stay real.
pub fn resample_to_length(x: &[Complex64], n_target: usize) -> Result<Vec<Complex64>, SignalError> {
    let n_in = x.len();
    if n_in < 2 || n_target < 2 {
        return Err(SignalError::TooShort {
            input: n_in,
            target: n_target,
        });
    }
    if n_in == n_target {
        return Ok(x.to_vec());
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n_in);
    let inv = planner.plan_fft_inverse(n_target);

    let mut spec = x.to_vec();
    fwd.process(&mut spec);

    let mut out = vec![Complex64::new(0.0, 0.0); n_target];
    let n_min = n_in.min(n_target);
    // Bins 0..=half on the positive side and the matching negative bins.
    let half = n_min / 2;
    let n_pos = if n_min % 2 == 0 { half } else { half + 1 };
    let n_neg = half;
    out[..n_pos].copy_from_slice(&spec[..n_pos]);
    for k in 1..=n_neg {
        out[n_target - k] = spec[n_in - k];
    }
    if n_min % 2 == 0 {
        if n_target > n_in {
            // Split the input Nyquist bin across +half and -half.
            let nyq = spec[half];
            out[half] = nyq * 0.5;
            out[n_target - half] = nyq * 0.5;
        } else {
            // Fold both input bins that alias onto the output Nyquist bin.
            out[half] = spec[half] + spec[n_in - half];
        }
    }

    inv.process(&mut out);
    let scale = 1.0 / n_in as f64;
    for s in out.iter_mut() {
        *s *= scale;
    }
    Ok(out)
}

/// Aperiodic autocorrelation `R[k] = sum_n x[n] conj(x[n - k])` for
/// `k = 0..len`, without normalization.
pub fn autocorrelation_raw(x: &[Complex64]) -> Result<Vec<Complex64>, SignalError> {
    let n = x.len();
    if n == 0 {
        return Err(SignalError::Empty);
    }
    let m = (2 * n).next_power_of_two();
    let (fwd, inv) = fft_pair(m);
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[..n].copy_from_slice(x);
    fwd.process(&mut buf);
    for b in buf.iter_mut() {
        *b = Complex64::new(b.norm_sqr(), 0.0);
    }
    inv.process(&mut buf);
    let scale = 1.0 / m as f64;
    Ok(buf[..n].iter().map(|v| v * scale).collect())
}

/// Autocorrelation renormalized to unit mean power, so it can be fed to
/// the classifier in place of the time-domain sequence.
pub fn autocorrelation(x: &[Complex64]) -> Result<Vec<Complex64>, SignalError> {
    let r = autocorrelation_raw(x)?;
    if r[0].re <= 0.0 {
        return Err(SignalError::ZeroPower);
    }
    normalize_power(&r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn brute_autocorr(x: &[Complex64]) -> Vec<Complex64> {
        (0..x.len())
            .map(|k| (k..x.len()).map(|n| x[n] * x[n - k].conj()).sum())
            .collect()
    }

    fn dft_peak_bin(x: &[Complex64]) -> usize {
        let n = x.len();
        (0..n)
            .map(|k| {
                let v: Complex64 = x
                    .iter()
                    .enumerate()
                    .map(|(i, s)| s * Complex64::from_polar(1.0, -2.0 * PI * (k * i) as f64 / n as f64))
                    .sum();
                (k, v.norm())
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
            .0
    }

    #[test]
    fn normalize_constant() {
        let out = normalize_power(&vec![c(2.0, 0.0); 8]).unwrap();
        for s in out {
            assert!((s - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn normalize_unit_tone_is_identity() {
        let tone: Vec<_> = (0..256)
            .map(|n| Complex64::from_polar(1.0, 0.3 * n as f64))
            .collect();
        let out = normalize_power(&tone).unwrap();
        for (a, b) in tone.iter().zip(&out) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn normalize_rejects_zero_and_empty() {
        assert_eq!(normalize_power(&[c(0.0, 0.0); 4]), Err(SignalError::ZeroPower));
        assert_eq!(normalize_power(&[]), Err(SignalError::Empty));
    }

    #[test]
    fn amplitude_scale_from_snr() {
        assert!((NoiseSpec::unit_sigma(0.0).amplitude_scale - 2f64.sqrt()).abs() < 1e-12);
        assert!((NoiseSpec::unit_sigma(20.0).amplitude_scale - 200f64.sqrt()).abs() < 1e-12);
        assert!(NoiseSpec::new(0.0, 0.0).is_err());
        assert!(NoiseSpec::new(0.0, -1.0).is_err());
    }

    #[test]
    fn apply_snr_rejects_non_unit_power() {
        let mut rng = stream_rng(0, Stream::Noise);
        let x = vec![c(2.0, 0.0); 16];
        assert!(matches!(
            apply_snr(&x, &NoiseSpec::unit_sigma(0.0), &mut rng),
            Err(SignalError::NotUnitPower(_))
        ));
    }

    #[test]
    fn apply_snr_is_reproducible() {
        let x = normalize_power(&(0..64).map(|n| c(n as f64, 1.0)).collect::<Vec<_>>()).unwrap();
        let spec = NoiseSpec::unit_sigma(3.0);
        let a = apply_snr(&x, &spec, &mut stream_rng(9, Stream::Noise)).unwrap();
        let b = apply_snr(&x, &spec, &mut stream_rng(9, Stream::Noise)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empirical_snr_matches_request() {
        // Monte-Carlo estimate: signal power A^2 over measured noise power.
        let x: Vec<_> = (0..1000)
            .map(|n| Complex64::from_polar(1.0, 0.05 * n as f64))
            .collect();
        let spec = NoiseSpec::unit_sigma(6.0);
        let mut rng = stream_rng(11, Stream::Noise);
        let (mut ps, mut pn) = (0.0, 0.0);
        for _ in 0..100 {
            let y = apply_snr(&x, &spec, &mut rng).unwrap();
            for (yi, xi) in y.iter().zip(&x) {
                let s = xi * spec.amplitude_scale;
                ps += s.norm_sqr();
                pn += (yi - s).norm_sqr();
            }
        }
        let est = 10.0 * (ps / pn).log10();
        assert!((est - 6.0).abs() < 0.1, "estimated {est} dB");
    }

    #[test]
    fn resample_identity() {
        let x: Vec<_> = (0..1024).map(|n| c((n as f64).sin(), 0.5)).collect();
        let y = resample_to_length(&x, 1024).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn resample_preserves_dc() {
        let x = vec![c(0.7, -0.2); 512];
        let y = resample_to_length(&x, 1024).unwrap();
        assert_eq!(y.len(), 1024);
        for s in y {
            assert!((s - c(0.7, -0.2)).norm() < 1e-12);
        }
        let z = resample_to_length(&vec![c(1.5, 0.0); 37], 10).unwrap();
        for s in z {
            assert!((s - c(1.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn resample_moves_tone_frequency() {
        let x: Vec<_> = (0..512)
            .map(|n| Complex64::from_polar(1.0, 2.0 * PI * 0.1 * n as f64))
            .collect();
        let y = resample_to_length(&x, 1024).unwrap();
        let peak = dft_peak_bin(&y) as f64 / 1024.0;
        assert!((peak - 0.05).abs() <= 1.0 / 1024.0, "peak at {peak}");
    }

    #[test]
    fn resample_downsampling_and_errors() {
        let x: Vec<_> = (0..100)
            .map(|n| Complex64::from_polar(1.0, 2.0 * PI * 0.02 * n as f64))
            .collect();
        let y = resample_to_length(&x, 50).unwrap();
        assert_eq!(y.len(), 50);
        assert_eq!(dft_peak_bin(&y), 2);
        assert!(resample_to_length(&x, 1).is_err());
        assert!(resample_to_length(&x[..1], 8).is_err());
    }

    #[test]
    fn autocorrelation_impulse() {
        let mut x = vec![c(0.0, 0.0); 16];
        x[0] = c(1.0, 0.0);
        let r = autocorrelation_raw(&x).unwrap();
        assert!((r[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(r[1..].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn autocorrelation_barker13() {
        let chips = [1., 1., 1., 1., 1., -1., -1., 1., 1., -1., 1., -1., 1.];
        let x: Vec<_> = chips.iter().map(|&v| c(v, 0.0)).collect();
        let fast = autocorrelation_raw(&x).unwrap();
        let slow = brute_autocorr(&x);
        assert!((fast[0].norm() - 13.0).abs() < 1e-9);
        for (f, s) in fast.iter().zip(&slow) {
            assert!((f - s).norm() < 1e-9);
        }
        assert!(fast[1..].iter().all(|v| v.norm() <= 1.0 + 1e-9));
    }

    #[test]
    fn autocorrelation_zero_input_errors() {
        let x = vec![c(0.0, 0.0); 8];
        let r = autocorrelation_raw(&x).unwrap();
        assert!(r.iter().all(|v| v.norm() == 0.0));
        assert!(autocorrelation(&x).is_err());
        assert!(autocorrelation(&[]).is_err());
    }

    proptest! {
        #[test]
        fn normalized_power_is_one(v in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 1..300)) {
            let x: Vec<_> = v.iter().map(|&(a, b)| c(a, b)).collect();
            prop_assume!(mean_power(&x) > 1e-12);
            let y = normalize_power(&x).unwrap();
            prop_assert!((mean_power(&y) - 1.0).abs() < 1e-9);
        }

        #[test]
        fn autocorrelation_matches_brute_force(v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..64)) {
            let x: Vec<_> = v.iter().map(|&(a, b)| c(a, b)).collect();
            let fast = autocorrelation_raw(&x).unwrap();
            let slow = brute_autocorr(&x);
            for (f, s) in fast.iter().zip(&slow) {
                prop_assert!((f - s).norm() < 1e-9);
            }
        }

        #[test]
        fn resample_exact_length_and_dc(n_in in 2usize..300, n_out in 2usize..300, dc in -5.0f64..5.0) {
            let y = resample_to_length(&vec![c(dc, 0.0); n_in], n_out).unwrap();
            prop_assert_eq!(y.len(), n_out);
            for s in y {
                prop_assert!((s - c(dc, 0.0)).norm() < 1e-9);
            }
        }
    }
}
