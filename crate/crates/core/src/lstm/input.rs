use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use super::Scalar;
use crate::dataset::{LabeledExample, SplitData};
use crate::signal::{autocorrelation, normalize_power, SignalError};

/// Representation fed to the first LSTM layer, one (I, Q) pair per step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputDomain {
    /// The received samples, scaled to unit mean power.
    #[default]
    Time,
    /// Aperiodic autocorrelation, scaled to unit mean power.
    Autocorrelation,
}

impl InputDomain {
    pub fn name(self) -> &'static str {
        match self {
            Self::Time => "time",
            Self::Autocorrelation => "autocorrelation",
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Self::Time => 0,
            Self::Autocorrelation => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::Time),
            1 => Some(Self::Autocorrelation),
            _ => None,
        }
    }
}

impl fmt::Display for InputDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InputDomain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "time" => Ok(Self::Time),
            "autocorrelation" | "autocorr" => Ok(Self::Autocorrelation),
            _ => Err(format!("unknown input domain `{s}` (time, autocorrelation)")),
        }
    }
}

/// A model-ready sequence with its label.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<F> {
    /// `steps x 2`, interleaved I/Q.
    pub input: Vec<F>,
    pub label: usize,
    pub snr_db: i16,
}

impl<F> Sample<F> {
    pub fn steps(&self) -> usize {
        self.input.len() / 2
    }
}

pub fn prepare_input<F: Scalar>(iq: &[f32], domain: InputDomain) -> Result<Vec<F>, SignalError> {
    let x: Vec<Complex64> = iq
        .chunks_exact(2)
        .map(|p| Complex64::new(p[0] as f64, p[1] as f64))
        .collect();
    let y = match domain {
        InputDomain::Time => normalize_power(&x)?,
        InputDomain::Autocorrelation => autocorrelation(&x)?,
    };
    Ok(y.iter().flat_map(|s| [F::of(s.re), F::of(s.im)]).collect())
}

pub fn prepare_example<F: Scalar>(ex: &LabeledExample, domain: InputDomain) -> Result<Sample<F>, SignalError> {
    Ok(Sample {
        input: prepare_input(&ex.iq, domain)?,
        label: ex.class_index as usize,
        snr_db: ex.snr_db,
    })
}

pub fn prepare_split<F: Scalar>(split: &SplitData, domain: InputDomain) -> Result<Vec<Sample<F>>, SignalError> {
    split
        .examples
        .par_iter()
        .map(|ex| prepare_example(ex, domain))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_domain_is_unit_power() {
        let iq: Vec<f32> = (0..64).map(|i| (i as f32 * 0.3).sin() * 7.0).collect();
        let x: Vec<f64> = prepare_input(&iq, InputDomain::Time).unwrap();
        let p: f64 = x.iter().map(|v| v * v).sum::<f64>() / 32.0;
        assert!((p - 1.0).abs() < 1e-9);
    }

    #[test]
    fn autocorrelation_domain_is_unit_power() {
        let iq: Vec<f32> = (0..64).map(|i| (i as f32 * 0.7).cos()).collect();
        let x: Vec<f64> = prepare_input(&iq, InputDomain::Autocorrelation).unwrap();
        assert_eq!(x.len(), 64);
        let p: f64 = x.iter().map(|v| v * v).sum::<f64>() / 32.0;
        assert!((p - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_signal_is_rejected() {
        assert!(prepare_input::<f32>(&[0.0; 8], InputDomain::Time).is_err());
        assert!(prepare_input::<f32>(&[0.0; 8], InputDomain::Autocorrelation).is_err());
    }

    #[test]
    fn domain_names() {
        for d in [InputDomain::Time, InputDomain::Autocorrelation] {
            assert_eq!(d.name().parse::<InputDomain>().unwrap(), d);
            assert_eq!(InputDomain::from_code(d.code()), Some(d));
        }
    }
}
