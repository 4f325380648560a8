use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use super::WaveformError;
use crate::rng;
use crate::signal::SAMPLE_RATE_HZ;

/// The 23 radar modulation classes, in dataset label order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RadarClass {
    Nm,
    Lfm,
    Psk2,
    Psk4,
    Psk8,
    Barker,
    Frank,
    P1,
    P2,
    P3,
    P4,
    Px,
    ZadoffChu,
    Huffman,
    T1,
    T2,
    T3,
    T4,
    Fsk2,
    Fsk4,
    Fsk8,
    Costas,
    Noise,
}

impl RadarClass {
    pub const ALL: [RadarClass; 23] = [
        Self::Nm,
        Self::Lfm,
        Self::Psk2,
        Self::Psk4,
        Self::Psk8,
        Self::Barker,
        Self::Frank,
        Self::P1,
        Self::P2,
        Self::P3,
        Self::P4,
        Self::Px,
        Self::ZadoffChu,
        Self::Huffman,
        Self::T1,
        Self::T2,
        Self::T3,
        Self::T4,
        Self::Fsk2,
        Self::Fsk4,
        Self::Fsk8,
        Self::Costas,
        Self::Noise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Nm => "NM",
            Self::Lfm => "LFM",
            Self::Psk2 => "2PSK",
            Self::Psk4 => "4PSK",
            Self::Psk8 => "8PSK",
            Self::Barker => "Barker",
            Self::Frank => "Frank",
            Self::P1 => "P1",
            Self::P2 => "P2",
            Self::P3 => "P3",
            Self::P4 => "P4",
            Self::Px => "Px",
            Self::ZadoffChu => "ZadoffChu",
            Self::Huffman => "Huffman",
            Self::T1 => "T1",
            Self::T2 => "T2",
            Self::T3 => "T3",
            Self::T4 => "T4",
            Self::Fsk2 => "2FSK",
            Self::Fsk4 => "4FSK",
            Self::Fsk8 => "8FSK",
            Self::Costas => "Costas",
            Self::Noise => "Noise",
        }
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).expect("listed")
    }
}

impl fmt::Display for RadarClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RadarClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown radar class `{s}`"))
    }
}

/// One fully parameterized radar waveform. Fields that do not apply to the
/// class are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformSpec {
    pub class: RadarClass,
    pub fc_hz: Option<f64>,
    pub bw_hz: Option<f64>,
    /// Symbol rate in Msymb/s.
    pub vs_msym: Option<f64>,
    pub order: Option<usize>,
    pub lc: Option<usize>,
    pub m: Option<usize>,
    pub r: Option<usize>,
    pub s_db: Option<f64>,
    pub ng: Option<usize>,
    pub pw_samples: Option<usize>,
    pub ps: Option<usize>,
    pub delta_f_hz: Option<f64>,
    /// Per-component noise deviation of the Noise class.
    pub sigma: Option<f64>,
}

impl WaveformSpec {
    pub fn empty(class: RadarClass) -> Self {
        Self {
            class,
            fc_hz: None,
            bw_hz: None,
            vs_msym: None,
            order: None,
            lc: None,
            m: None,
            r: None,
            s_db: None,
            ng: None,
            pw_samples: None,
            ps: None,
            delta_f_hz: None,
            sigma: None,
        }
    }

    /// Samples per symbol at the fixed sample rate.
    pub fn samples_per_symbol(&self) -> Result<f64, WaveformError> {
        let vs = self.vs_msym.ok_or(WaveformError::MissingParameter("vs_msym"))?;
        Ok(SAMPLE_RATE_HZ / (vs * 1e6))
    }
}

pub(crate) mod grid {
    pub const PSK_VS: [f64; 5] = [2.0, 5.0, 10.0, 15.0, 20.0];
    pub const POLY_VS: [f64; 4] = [7.0, 10.0, 15.0, 20.0];
    pub const FSK_VS: [f64; 5] = [1.0, 2.0, 5.0, 10.0, 15.0];
    pub const FRANK_M: [usize; 5] = [4, 5, 6, 7, 8];
    pub const P2_M: [usize; 3] = [4, 6, 8];
    pub const LONG_M: [usize; 5] = [16, 25, 36, 49, 64];
    pub const ZC_R: [usize; 2] = [11, 13];
    pub const HUFFMAN_S_DB: [f64; 3] = [-63.0, -60.0, -56.0];
    pub const POLYTIME_NG: [usize; 3] = [4, 5, 6];
    pub const PW_RANGE: (usize, usize) = (256, 1024);
}

/// Draw every parameter of `class` from its grid: uniform over discrete
/// sets, uniform over continuous ranges.
pub fn sample_spec<R: RngCore + ?Sized>(class: RadarClass, rng: &mut R) -> WaveformSpec {
    use grid::*;
    use RadarClass::*;

    let fs = SAMPLE_RATE_HZ;
    let mut s = WaveformSpec::empty(class);
    if class != Noise {
        s.fc_hz = Some(rng::uniform(rng, -fs / 4.0, fs / 4.0));
    }
    let bw = |rng: &mut R| rng::uniform(rng, fs / 20.0, fs / 4.0);
    let pw = |rng: &mut R| PW_RANGE.0 + rng::index(rng, PW_RANGE.1 - PW_RANGE.0 + 1);
    match class {
        Nm => {}
        Lfm => s.bw_hz = Some(bw(rng)),
        Psk2 | Psk4 | Psk8 => {
            s.order = Some(match class {
                Psk2 => 2,
                Psk4 => 4,
                _ => 8,
            });
            s.vs_msym = Some(*rng::choose(rng, &PSK_VS));
        }
        Barker => {
            s.lc = Some(*rng::choose(rng, &crate::waveforms::BARKER_LENGTHS));
            s.vs_msym = Some(*rng::choose(rng, &PSK_VS));
        }
        Frank | P1 | Px => {
            s.m = Some(*rng::choose(rng, &FRANK_M));
            s.vs_msym = Some(*rng::choose(rng, &POLY_VS));
        }
        P2 => {
            s.m = Some(*rng::choose(rng, &P2_M));
            s.vs_msym = Some(*rng::choose(rng, &POLY_VS));
        }
        P3 | P4 => {
            s.m = Some(*rng::choose(rng, &LONG_M));
            s.vs_msym = Some(*rng::choose(rng, &POLY_VS));
        }
        ZadoffChu => {
            s.m = Some(*rng::choose(rng, &LONG_M));
            s.r = Some(*rng::choose(rng, &ZC_R));
            s.vs_msym = Some(*rng::choose(rng, &POLY_VS));
        }
        Huffman => {
            s.m = Some(*rng::choose(rng, &LONG_M));
            s.vs_msym = Some(*rng::choose(rng, &POLY_VS));
            s.s_db = Some(*rng::choose(rng, &HUFFMAN_S_DB));
        }
        T1 | T2 => {
            s.ng = Some(*rng::choose(rng, &POLYTIME_NG));
            s.pw_samples = Some(pw(rng));
            s.ps = Some(2);
        }
        T3 | T4 => {
            s.bw_hz = Some(bw(rng));
            s.pw_samples = Some(pw(rng));
            s.ps = Some(2);
        }
        Fsk2 | Fsk4 | Fsk8 => {
            s.order = Some(match class {
                Fsk2 => 2,
                Fsk4 => 4,
                _ => 8,
            });
            let vs = *rng::choose(rng, &FSK_VS);
            s.vs_msym = Some(vs);
            s.delta_f_hz = Some(vs * 1e6);
        }
        Costas => {
            s.m = Some(*rng::choose(rng, &crate::waveforms::COSTAS_ORDERS));
            let vs = *rng::choose(rng, &FSK_VS);
            s.vs_msym = Some(vs);
            s.delta_f_hz = Some(vs * 1e6);
        }
        Noise => s.sigma = Some(1.0),
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    #[test]
    fn class_names_round_trip() {
        assert_eq!(RadarClass::ALL.len(), 23);
        for (i, c) in RadarClass::ALL.iter().enumerate() {
            assert_eq!(c.index(), i);
            assert_eq!(c.name().parse::<RadarClass>().unwrap(), *c);
        }
        assert!("QAM".parse::<RadarClass>().is_err());
    }

    #[test]
    fn psk_grid() {
        let mut rng = stream_rng(1, Stream::Waveform);
        for class in [RadarClass::Psk2, RadarClass::Psk4, RadarClass::Psk8] {
            for _ in 0..50 {
                let s = sample_spec(class, &mut rng);
                assert!([2, 4, 8].contains(&s.order.unwrap()));
                assert!(grid::PSK_VS.contains(&s.vs_msym.unwrap()));
                assert!(s.bw_hz.is_none() && s.m.is_none());
            }
        }
    }

    #[test]
    fn lfm_and_carrier_ranges() {
        let mut rng = stream_rng(2, Stream::Waveform);
        let fs = SAMPLE_RATE_HZ;
        for _ in 0..500 {
            let s = sample_spec(RadarClass::Lfm, &mut rng);
            let bw = s.bw_hz.unwrap();
            assert!(bw >= fs / 20.0 && bw <= fs / 4.0);
            let fc = s.fc_hz.unwrap();
            assert!(fc >= -fs / 4.0 && fc <= fs / 4.0);
        }
        assert!(sample_spec(RadarClass::Noise, &mut rng).fc_hz.is_none());
    }

    #[test]
    fn every_class_respects_grid() {
        let mut rng = stream_rng(3, Stream::Waveform);
        for class in RadarClass::ALL {
            for _ in 0..40 {
                let s = sample_spec(class, &mut rng);
                if let Some(m) = s.m {
                    let ok = match class {
                        RadarClass::Frank | RadarClass::P1 | RadarClass::Px => grid::FRANK_M.contains(&m),
                        RadarClass::P2 => grid::P2_M.contains(&m),
                        RadarClass::Costas => [3, 4, 5, 6].contains(&m),
                        _ => grid::LONG_M.contains(&m),
                    };
                    assert!(ok, "{class} m={m}");
                }
                if let Some(pw) = s.pw_samples {
                    assert!((256..=1024).contains(&pw));
                    assert_eq!(s.ps, Some(2));
                }
                if let Some(df) = s.delta_f_hz {
                    assert_eq!(df, s.vs_msym.unwrap() * 1e6);
                }
                if let Some(ng) = s.ng {
                    assert!(grid::POLYTIME_NG.contains(&ng));
                }
                if let Some(sdb) = s.s_db {
                    assert!(grid::HUFFMAN_S_DB.contains(&sdb));
                }
                if let Some(r) = s.r {
                    assert!(grid::ZC_R.contains(&r));
                }
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        for class in RadarClass::ALL {
            let a = sample_spec(class, &mut stream_rng(77, Stream::Waveform));
            let b = sample_spec(class, &mut stream_rng(77, Stream::Waveform));
            assert_eq!(a, b);
        }
    }
}
