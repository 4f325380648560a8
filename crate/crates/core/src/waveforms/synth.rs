use std::f64::consts::PI;

use num_complex::Complex64;
use rand::RngCore;

use super::codes::{self, PolyphaseVariant, PolytimeParams, PolytimeVariant};
use super::{RadarClass, WaveformError, WaveformSpec};
use crate::rng;
use crate::signal::{normalize_power, resample_to_length, SAMPLE_RATE_HZ, SIGNAL_LENGTH};

fn required<T>(v: Option<T>, name: &'static str) -> Result<T, WaveformError> {
    v.ok_or(WaveformError::MissingParameter(name))
}

/// Hold each chip for `samples_per_chip` samples. Symbol boundaries fall at
/// `floor(n / samples_per_chip)`, so fractional rates accumulate instead of
/// rounding per chip. The result has `ceil(len * samples_per_chip)` samples.
pub fn chip_waveform(chips: &[Complex64], samples_per_chip: f64) -> Vec<Complex64> {
    let total = (chips.len() as f64 * samples_per_chip - 1e-9).ceil().max(1.0) as usize;
    (0..total)
        .map(|n| {
            let idx = ((n as f64 / samples_per_chip) as usize).min(chips.len() - 1);
            chips[idx]
        })
        .collect()
}

fn mix_carrier(x: &mut [Complex64], fc_hz: f64, start: usize) {
    let w = 2.0 * PI * fc_hz / SAMPLE_RATE_HZ;
    for (n, s) in x.iter_mut().enumerate() {
        *s *= Complex64::from_polar(1.0, w * (n + start) as f64);
    }
}

/// Phase-continuous frequency hopping: `freqs_hz[k]` is held for symbol `k`.
fn hop_waveform(freqs_hz: &[f64], samples_per_symbol: f64, len: usize) -> Vec<Complex64> {
    let mut phase = 0.0;
    (0..len)
        .map(|n| {
            let k = ((n as f64 / samples_per_symbol) as usize).min(freqs_hz.len() - 1);
            let s = Complex64::from_polar(1.0, phase);
            phase = (phase + 2.0 * PI * freqs_hz[k] / SAMPLE_RATE_HZ).rem_euclid(2.0 * PI);
            s
        })
        .collect()
}

fn fit_length(x: Vec<Complex64>, len: usize) -> Result<Vec<Complex64>, WaveformError> {
    if x.len() == len {
        Ok(x)
    } else {
        Ok(resample_to_length(&x, len)?)
    }
}

fn coded_pulse(
    chips: &[Complex64],
    spec: &WaveformSpec,
    len: usize,
) -> Result<Vec<Complex64>, WaveformError> {
    let mut x = chip_waveform(chips, spec.samples_per_symbol()?);
    mix_carrier(&mut x, required(spec.fc_hz, "fc_hz")?, 0);
    fit_length(x, len)
}

/// Noiseless unit-power signal of the default length.
pub fn synthesize<R: RngCore + ?Sized>(
    spec: &WaveformSpec,
    rng: &mut R,
) -> Result<Vec<Complex64>, WaveformError> {
    synthesize_with_length(spec, SIGNAL_LENGTH, rng)
}

/// Noiseless unit-power signal of `len` samples.
///
/// Code-based classes produce one code period at the chip rate and are then
/// resampled to `len`; continuous classes (NM, LFM, PSK, FSK) fill the
/// window directly; polytime pulses sit at a random offset inside a
/// zero-filled window.
pub fn synthesize_with_length<R: RngCore + ?Sized>(
    spec: &WaveformSpec,
    len: usize,
    rng: &mut R,
) -> Result<Vec<Complex64>, WaveformError> {
    use RadarClass::*;
    if len < 2 {
        return Err(WaveformError::UnsupportedParameter { name: "len", value: len as f64 });
    }
    let fs = SAMPLE_RATE_HZ;
    let raw = match spec.class {
        Nm => {
            let mut x = vec![Complex64::new(1.0, 0.0); len];
            mix_carrier(&mut x, required(spec.fc_hz, "fc_hz")?, 0);
            x
        }
        Lfm => {
            let fc = required(spec.fc_hz, "fc_hz")?;
            let bw = required(spec.bw_hz, "bw_hz")?;
            let f0 = fc - bw / 2.0;
            let nf = len as f64;
            (0..len)
                .map(|n| {
                    let n = n as f64;
                    // Sum of f0 + bw k / len over k < n.
                    let cycles = (f0 * n + bw * n * (n - 1.0) / (2.0 * nf)) / fs;
                    Complex64::from_polar(1.0, 2.0 * PI * cycles.fract())
                })
                .collect()
        }
        Psk2 | Psk4 | Psk8 => {
            let order = required(spec.order, "order")?;
            let sps = spec.samples_per_symbol()?;
            let n_sym = (len as f64 / sps).ceil() as usize;
            let symbols: Vec<Complex64> = (0..n_sym)
                .map(|_| {
                    let k = rng::index(rng, order);
                    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / order as f64)
                })
                .collect();
            let mut x = chip_waveform(&symbols, sps);
            x.truncate(len);
            mix_carrier(&mut x, required(spec.fc_hz, "fc_hz")?, 0);
            x
        }
        Barker => coded_pulse(codes::barker_sequence(required(spec.lc, "lc")?)?.entries(), spec, len)?,
        Frank | P1 | P2 | P3 | P4 | Px => {
            let variant = match spec.class {
                Frank => PolyphaseVariant::Frank,
                P1 => PolyphaseVariant::P1,
                P2 => PolyphaseVariant::P2,
                P3 => PolyphaseVariant::P3,
                P4 => PolyphaseVariant::P4,
                _ => PolyphaseVariant::Px,
            };
            let code = codes::polyphase_code(variant, required(spec.m, "m")?)?;
            coded_pulse(code.entries(), spec, len)?
        }
        ZadoffChu => {
            let code = codes::zadoff_chu(required(spec.m, "m")?, required(spec.r, "r")?)?;
            coded_pulse(code.entries(), spec, len)?
        }
        Huffman => {
            let code = codes::huffman_sequence(required(spec.m, "m")?, required(spec.s_db, "s_db")?)?;
            coded_pulse(code.entries(), spec, len)?
        }
        T1 | T2 | T3 | T4 => {
            let variant = match spec.class {
                T1 => PolytimeVariant::T1,
                T2 => PolytimeVariant::T2,
                T3 => PolytimeVariant::T3,
                _ => PolytimeVariant::T4,
            };
            let pw = required(spec.pw_samples, "pw_samples")?;
            if pw == 0 || pw > len {
                return Err(WaveformError::UnsupportedParameter { name: "pw_samples", value: pw as f64 });
            }
            let params = PolytimeParams {
                segments: spec.ng.unwrap_or(0),
                bandwidth_hz: spec.bw_hz.unwrap_or(0.0),
                pulse_samples: pw,
                phase_states: required(spec.ps, "ps")?,
                sample_rate_hz: fs,
            };
            let phases = codes::polytime_phases(variant, &params)?;
            let start = rng::index(rng, len - pw + 1);
            let mut x = vec![Complex64::new(0.0, 0.0); len];
            for (slot, p) in x[start..start + pw].iter_mut().zip(&phases) {
                *slot = Complex64::from_polar(1.0, *p);
            }
            mix_carrier(&mut x[start..start + pw], required(spec.fc_hz, "fc_hz")?, start);
            x
        }
        Fsk2 | Fsk4 | Fsk8 => {
            let order = required(spec.order, "order")?;
            let df = required(spec.delta_f_hz, "delta_f_hz")?;
            let fc = required(spec.fc_hz, "fc_hz")?;
            let sps = spec.samples_per_symbol()?;
            let n_sym = (len as f64 / sps).ceil() as usize;
            let centre = (order as f64 - 1.0) / 2.0;
            let freqs: Vec<f64> = (0..n_sym)
                .map(|_| fc + (rng::index(rng, order) as f64 - centre) * df)
                .collect();
            hop_waveform(&freqs, sps, len)
        }
        Costas => {
            let m = required(spec.m, "m")?;
            let df = required(spec.delta_f_hz, "delta_f_hz")?;
            let fc = required(spec.fc_hz, "fc_hz")?;
            let sps = spec.samples_per_symbol()?;
            let perm = codes::costas_array(m, rng)?;
            let centre = (m as f64 + 1.0) / 2.0;
            let freqs: Vec<f64> = perm.iter().map(|&p| fc + (p as f64 - centre) * df).collect();
            let natural = (m as f64 * sps - 1e-9).ceil() as usize;
            fit_length(hop_waveform(&freqs, sps, natural), len)?
        }
        Noise => {
            let sigma = spec.sigma.unwrap_or(1.0);
            (0..len)
                .map(|_| {
                    let (a, b) = rng::gaussian_pair(rng);
                    Complex64::new(a * sigma, b * sigma)
                })
                .collect()
        }
    };
    Ok(normalize_power(&raw)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use crate::signal::mean_power;
    use crate::waveforms::sample_spec;

    /// Instantaneous frequency in Hz from successive phase differences.
    fn inst_freq(x: &[Complex64]) -> Vec<f64> {
        x.windows(2)
            .map(|w| (w[1] * w[0].conj()).arg() / (2.0 * PI) * SAMPLE_RATE_HZ)
            .collect()
    }

    fn dft_peak_hz(x: &[Complex64]) -> f64 {
        let n = x.len();
        let (k, _) = (0..n)
            .map(|k| {
                let v: Complex64 = x
                    .iter()
                    .enumerate()
                    .map(|(i, s)| s * Complex64::from_polar(1.0, -2.0 * PI * (k * i) as f64 / n as f64))
                    .sum();
                (k, v.norm())
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let k = if k > n / 2 { k as f64 - n as f64 } else { k as f64 };
        k / n as f64 * SAMPLE_RATE_HZ
    }

    #[test]
    fn chip_waveform_fractional_rate() {
        let chips = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
        let x = chip_waveform(&chips, 2.5);
        assert_eq!(x.len(), 5);
        let re: Vec<f64> = x.iter().map(|c| c.re).collect();
        assert_eq!(re, vec![1.0, 1.0, 1.0, -1.0, -1.0]);
        assert_eq!(chip_waveform(&chips, 20.0).len(), 40);
    }

    #[test]
    fn every_class_unit_power_and_length() {
        for class in RadarClass::ALL {
            for seed in 0..20 {
                let mut rng = stream_rng(seed, Stream::Waveform);
                let spec = sample_spec(class, &mut rng);
                let x = synthesize(&spec, &mut rng).unwrap();
                assert_eq!(x.len(), SIGNAL_LENGTH, "{class}");
                assert!((mean_power(&x) - 1.0).abs() < 1e-6, "{class}");
                assert!(x.iter().all(|s| s.re.is_finite() && s.im.is_finite()));
            }
        }
    }

    #[test]
    fn synthesis_is_deterministic() {
        for class in RadarClass::ALL {
            let run = || {
                let mut rng = stream_rng(123, Stream::Waveform);
                let spec = sample_spec(class, &mut rng);
                synthesize(&spec, &mut rng).unwrap()
            };
            assert_eq!(run(), run(), "{class}");
        }
    }

    #[test]
    fn nm_tone() {
        let mut spec = WaveformSpec::empty(RadarClass::Nm);
        spec.fc_hz = Some(SAMPLE_RATE_HZ / 8.0);
        let x = synthesize(&spec, &mut stream_rng(0, Stream::Waveform)).unwrap();
        assert!(x.iter().all(|s| (s.norm() - 1.0).abs() < 1e-9));
        assert!((dft_peak_hz(&x) - SAMPLE_RATE_HZ / 8.0).abs() < 1.0);
    }

    #[test]
    fn lfm_span() {
        let mut spec = WaveformSpec::empty(RadarClass::Lfm);
        spec.fc_hz = Some(3e6);
        spec.bw_hz = Some(SAMPLE_RATE_HZ / 10.0);
        let x = synthesize(&spec, &mut stream_rng(0, Stream::Waveform)).unwrap();
        let f = inst_freq(&x);
        let span = f.iter().cloned().fold(f64::MIN, f64::max) - f.iter().cloned().fold(f64::MAX, f64::min);
        assert!((span - 10e6).abs() / 10e6 < 0.02, "span {span}");
    }

    #[test]
    fn noise_class_variance() {
        let spec = WaveformSpec {
            sigma: Some(1.0),
            ..WaveformSpec::empty(RadarClass::Noise)
        };
        let mut acc = 0.0;
        let trials = 50;
        for seed in 0..trials {
            let x = synthesize(&spec, &mut stream_rng(seed, Stream::Waveform)).unwrap();
            // After unit-power normalization each component carries 1/2.
            acc += x.iter().map(|s| s.re * s.re).sum::<f64>() / x.len() as f64;
        }
        assert!((acc / trials as f64 - 0.5).abs() < 0.02);
    }

    #[test]
    fn polytime_pulse_is_contained() {
        let mut rng = stream_rng(8, Stream::Waveform);
        let mut spec = sample_spec(RadarClass::T1, &mut rng);
        spec.pw_samples = Some(300);
        let x = synthesize(&spec, &mut rng).unwrap();
        let on: Vec<usize> = (0..x.len()).filter(|&n| x[n].norm() > 0.0).collect();
        assert_eq!(on.len(), 300);
        assert_eq!(on.last().unwrap() - on[0], 299);
    }

    #[test]
    fn missing_parameter_is_reported() {
        let spec = WaveformSpec::empty(RadarClass::Lfm);
        assert!(matches!(
            synthesize(&spec, &mut stream_rng(0, Stream::Waveform)),
            Err(WaveformError::MissingParameter(_))
        ));
    }
}
