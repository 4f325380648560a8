//! The 8-class comparison set: CW, LFM, BFSK, SIN, EXP, SFW, BPSK, BASK.
//!
//! Only the family names are fixed for this set; the parameter ranges below
//! are local defaults (see [`EightClassConfig`]) and are not meant to match
//! any published generator sample for sample.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::RngCore;

use super::synth::chip_waveform;
use super::WaveformError;
use crate::rng;
use crate::signal::{normalize_power, SAMPLE_RATE_HZ, SIGNAL_LENGTH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EightClass {
    Cw,
    Lfm,
    Bfsk,
    Sin,
    Exp,
    Sfw,
    Bpsk,
    Bask,
}

impl EightClass {
    pub const ALL: [EightClass; 8] = [
        Self::Cw,
        Self::Lfm,
        Self::Bfsk,
        Self::Sin,
        Self::Exp,
        Self::Sfw,
        Self::Bpsk,
        Self::Bask,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Cw => "CW",
            Self::Lfm => "LFM",
            Self::Bfsk => "BFSK",
            Self::Sin => "SIN",
            Self::Exp => "EXP",
            Self::Sfw => "SFW",
            Self::Bpsk => "BPSK",
            Self::Bask => "BASK",
        }
    }
}

impl fmt::Display for EightClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EightClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown 8-class family `{s}`"))
    }
}

/// Parameter ranges for the 8-class families.
#[derive(Debug, Clone, PartialEq)]
pub struct EightClassConfig {
    /// Carrier range, Hz (symmetric around zero).
    pub fc_max_hz: f64,
    /// Swept/occupied bandwidth range, Hz.
    pub bw_range_hz: (f64, f64),
    /// Symbol rates for BPSK, BASK and BFSK, Msymb/s.
    pub symbol_rates_msym: Vec<f64>,
    /// SIN: modulation cycles per window.
    pub sin_cycles: (f64, f64),
    /// EXP: curvature of the exponential sweep.
    pub exp_curvature: (f64, f64),
    /// SFW: number of frequency steps.
    pub sfw_steps: (usize, usize),
    /// BASK: amplitude of the low symbol (the high symbol is 1).
    pub bask_low_level: f64,
}

impl Default for EightClassConfig {
    fn default() -> Self {
        Self {
            fc_max_hz: SAMPLE_RATE_HZ / 4.0,
            bw_range_hz: (SAMPLE_RATE_HZ / 20.0, SAMPLE_RATE_HZ / 4.0),
            symbol_rates_msym: vec![2.0, 5.0, 10.0, 15.0, 20.0],
            sin_cycles: (1.0, 4.0),
            exp_curvature: (1.0, 4.0),
            sfw_steps: (4, 8),
            bask_low_level: 0.5,
        }
    }
}

/// Integrate an instantaneous-frequency track (Hz per sample) into a unit
/// modulus signal.
fn from_frequency(freqs: impl Iterator<Item = f64>) -> Vec<Complex64> {
    let mut phase = 0.0f64;
    freqs
        .map(|f| {
            let s = Complex64::from_polar(1.0, phase);
            phase = (phase + 2.0 * PI * f / SAMPLE_RATE_HZ).rem_euclid(2.0 * PI);
            s
        })
        .collect()
}

fn random_bits<R: RngCore + ?Sized>(rng: &mut R, n: usize) -> Vec<bool> {
    loop {
        let bits: Vec<bool> = (0..n).map(|_| rng.next_u64() >> 63 == 1).collect();
        // Both symbols must be present so that every realization carries the
        // modulation.
        if n < 2 || (bits.iter().any(|&b| b) && bits.iter().any(|&b| !b)) {
            return bits;
        }
    }
}

pub fn synthesize_8class<R: RngCore + ?Sized>(
    class: EightClass,
    cfg: &EightClassConfig,
    rng: &mut R,
) -> Result<Vec<Complex64>, WaveformError> {
    let len = SIGNAL_LENGTH;
    let nf = len as f64;
    let fc = rng::uniform(rng, -cfg.fc_max_hz, cfg.fc_max_hz);
    let raw: Vec<Complex64> = match class {
        EightClass::Cw => from_frequency((0..len).map(|_| fc)),
        EightClass::Lfm => {
            let bw = rng::uniform(rng, cfg.bw_range_hz.0, cfg.bw_range_hz.1);
            from_frequency((0..len).map(|n| fc - bw / 2.0 + bw * n as f64 / nf))
        }
        EightClass::Sin => {
            let bw = rng::uniform(rng, cfg.bw_range_hz.0, cfg.bw_range_hz.1);
            let cycles = rng::uniform(rng, cfg.sin_cycles.0, cfg.sin_cycles.1);
            from_frequency((0..len).map(|n| fc + bw / 2.0 * (2.0 * PI * cycles * n as f64 / nf).sin()))
        }
        EightClass::Exp => {
            let bw = rng::uniform(rng, cfg.bw_range_hz.0, cfg.bw_range_hz.1);
            let alpha = rng::uniform(rng, cfg.exp_curvature.0, cfg.exp_curvature.1);
            let denom = alpha.exp_m1();
            from_frequency(
                (0..len).map(|n| fc - bw / 2.0 + bw * (alpha * n as f64 / nf).exp_m1() / denom),
            )
        }
        EightClass::Sfw => {
            let bw = rng::uniform(rng, cfg.bw_range_hz.0, cfg.bw_range_hz.1);
            let steps = cfg.sfw_steps.0 + rng::index(rng, cfg.sfw_steps.1 - cfg.sfw_steps.0 + 1);
            let width = nf / steps as f64;
            from_frequency((0..len).map(|n| {
                let k = ((n as f64 / width) as usize).min(steps - 1);
                fc - bw / 2.0 + bw * k as f64 / (steps - 1) as f64
            }))
        }
        EightClass::Bfsk => {
            let sep = rng::uniform(rng, cfg.bw_range_hz.0, cfg.bw_range_hz.1);
            let vs = *rng::choose(rng, &cfg.symbol_rates_msym);
            let sps = SAMPLE_RATE_HZ / (vs * 1e6);
            let bits = random_bits(rng, (nf / sps).ceil() as usize);
            from_frequency((0..len).map(|n| {
                let k = ((n as f64 / sps) as usize).min(bits.len() - 1);
                if bits[k] {
                    fc + sep / 2.0
                } else {
                    fc - sep / 2.0
                }
            }))
        }
        EightClass::Bpsk | EightClass::Bask => {
            let vs = *rng::choose(rng, &cfg.symbol_rates_msym);
            let sps = SAMPLE_RATE_HZ / (vs * 1e6);
            let bits = random_bits(rng, (nf / sps).ceil() as usize);
            let symbols: Vec<Complex64> = bits
                .iter()
                .map(|&b| match (class, b) {
                    (EightClass::Bpsk, true) => Complex64::new(1.0, 0.0),
                    (EightClass::Bpsk, false) => Complex64::new(-1.0, 0.0),
                    (_, true) => Complex64::new(1.0, 0.0),
                    (_, false) => Complex64::new(cfg.bask_low_level, 0.0),
                })
                .collect();
            let mut x = chip_waveform(&symbols, sps);
            x.truncate(len);
            let carrier = from_frequency((0..len).map(|_| fc));
            x.iter().zip(carrier).map(|(s, c)| s * c).collect()
        }
    };
    Ok(normalize_power(&raw)?)
}
