//! Pulse-compression code families.
//!
//! Phase laws, with chips indexed from zero unless noted:
//!
//! | code | length | phase of chip |
//! |------|--------|---------------|
//! | Frank | M² | `2π/M · i·j`, group `i`, chip `j` (Frank 1963) |
//! | P1 | M² | `−π/M · [M − (2i+1)] · [i·M + j]` (Lewis & Kretschmer 1981) |
//! | P2 | M² | `−π/(2M) · (2i+1−M) · (2j+1−M)`, M even (Lewis & Kretschmer 1981) |
//! | Px | M² | `2π/M · ((M+1)/2 − (j+1)) · ((M+1)/2 − (i+1))`, M even; `M/2` in place of the first `(M+1)/2` for odd M (Rapajic & Kennedy 1998) |
//! | P3 | M | `π j² / M` (Lewis & Kretschmer 1982) |
//! | P4 | M | `π j² / M − π j` (Lewis & Kretschmer 1982) |
//! | Zadoff-Chu | M | `−π r j² / M` for even M, `−π r j (j+1) / M` for odd M |
//!
//! where `i` is the frequency group and `j` the chip within the group, so
//! chip `n = i·M + j`.
//!
//! The polytime codes (Kretschmer & Lewis, as tabulated by Pace, *Detecting
//! and Classifying LPI Radar*) quantize a continuous phase trajectory to
//! `n_states` levels, `φ_q = 2π/n · floor(n φ / 2π)`, over a code of duration
//! `T` split into `k` segments (`j` = segment of time `t`):
//!
//! ```text
//! T1: φ(t) = 2π j (k t − j T) / T
//! T2: φ(t) = 2π (k t − j T) (2j − k + 1) / (2T)
//! T3: φ(t) = 2π Δf t² / (2T)
//! T4: φ(t) = 2π (Δf t² / (2T) − Δf t / 2)
//! ```

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::RngCore;

use super::WaveformError;
use crate::rng;

/// A sequence of complex chip values.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSequence {
    entries: Vec<Complex64>,
}

impl CodeSequence {
    pub fn new(entries: Vec<Complex64>) -> Result<Self, WaveformError> {
        if entries.is_empty() {
            return Err(WaveformError::EmptyCode);
        }
        Ok(Self { entries })
    }

    fn from_phases(phases: impl IntoIterator<Item = f64>) -> Self {
        Self {
            entries: phases.into_iter().map(|p| Complex64::from_polar(1.0, p)).collect(),
        }
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.arg()).collect()
    }
}

pub const BARKER_LENGTHS: [usize; 4] = [5, 7, 11, 13];

pub fn barker_sequence(lc: usize) -> Result<CodeSequence, WaveformError> {
    let signs: &[i8] = match lc {
        5 => &[1, 1, 1, -1, 1],
        7 => &[1, 1, 1, -1, -1, 1, -1],
        11 => &[1, 1, 1, -1, -1, -1, 1, -1, -1, 1, -1],
        13 => &[1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1],
        _ => return Err(WaveformError::UnsupportedParameter { name: "lc", value: lc as f64 }),
    };
    CodeSequence::new(signs.iter().map(|&s| Complex64::new(s as f64, 0.0)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyphaseVariant {
    Frank,
    P1,
    P2,
    P3,
    P4,
    Px,
}

impl PolyphaseVariant {
    /// Code length for parameter `m`.
    pub fn code_length(self, m: usize) -> usize {
        match self {
            Self::P3 | Self::P4 => m,
            _ => m * m,
        }
    }
}

pub fn polyphase_code(variant: PolyphaseVariant, m: usize) -> Result<CodeSequence, WaveformError> {
    if m < 2 {
        return Err(WaveformError::UnsupportedParameter { name: "m", value: m as f64 });
    }
    let mf = m as f64;
    let grid = |law: &dyn Fn(f64, f64) -> f64| {
        CodeSequence::from_phases(
            (0..m).flat_map(|i| (0..m).map(move |j| (i as f64, j as f64))).map(|(i, j)| law(i, j)),
        )
    };
    let code = match variant {
        PolyphaseVariant::Frank => grid(&|i, j| 2.0 * PI / mf * i * j),
        PolyphaseVariant::P1 => grid(&|i, j| -PI / mf * (mf - (2.0 * i + 1.0)) * (i * mf + j)),
        PolyphaseVariant::P2 => {
            if m % 2 != 0 {
                return Err(WaveformError::UnsupportedParameter { name: "m", value: mf });
            }
            grid(&|i, j| -PI / (2.0 * mf) * (2.0 * i + 1.0 - mf) * (2.0 * j + 1.0 - mf))
        }
        PolyphaseVariant::Px => {
            let first = if m % 2 == 0 { (mf + 1.0) / 2.0 } else { mf / 2.0 };
            grid(&|i, j| 2.0 * PI / mf * (first - (j + 1.0)) * ((mf + 1.0) / 2.0 - (i + 1.0)))
        }
        PolyphaseVariant::P3 => CodeSequence::from_phases((0..m).map(|j| {
            let j = j as f64;
            PI * j * j / mf
        })),
        PolyphaseVariant::P4 => CodeSequence::from_phases((0..m).map(|j| {
            let j = j as f64;
            PI * j * j / mf - PI * j
        })),
    };
    Ok(code)
}

pub fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn zadoff_chu(m: usize, r: usize) -> Result<CodeSequence, WaveformError> {
    if m < 2 {
        return Err(WaveformError::UnsupportedParameter { name: "m", value: m as f64 });
    }
    if gcd(r, m) != 1 {
        return Err(WaveformError::NotCoprime { m, r });
    }
    let mf = m as f64;
    let odd = m % 2 == 1;
    Ok(CodeSequence::from_phases((0..m).map(|n| {
        // Reduce the quadratic term exactly in integers before scaling.
        let q = if odd { n * (n + 1) } else { n * n };
        let q = (r * q) % (2 * m);
        -PI * q as f64 / mf
    })))
}

/// Huffman code of length `m` whose aperiodic autocorrelation is zero
/// except at lag 0 and at lags `±(m−1)`, where it sits `s_db` below the
/// peak. The code energy is normalized to 1.
///
/// The autocorrelation polynomial `ε z^{-N} + 1 + ε z^{N}` (`N = m − 1`,
/// `ε = 10^(s_db/20)`) has its `2N` zeros on two circles of reciprocal
/// radii at angles `π(2k+1)/N`. Picking one zero of each reciprocal pair
/// and expanding the product gives the code; the outer circle is used for
/// the first half of the angles and the inner one for the rest, which
/// yields a chirp-like envelope.
pub fn huffman_sequence(m: usize, s_db: f64) -> Result<CodeSequence, WaveformError> {
    if m < 3 {
        return Err(WaveformError::UnsupportedParameter { name: "m", value: m as f64 });
    }
    if !(s_db < 0.0) || s_db < -200.0 {
        return Err(WaveformError::UnsupportedParameter { name: "s_db", value: s_db });
    }
    let n = m - 1;
    let eps = 10f64.powf(s_db / 20.0);
    // z^N = w, eps w^2 + w + eps = 0, both roots negative reals.
    let w_small = (-1.0 + (1.0 - 4.0 * eps * eps).sqrt()) / (2.0 * eps);
    let rho_inner = w_small.abs().powf(1.0 / n as f64);
    let rho_outer = 1.0 / rho_inner;

    let roots: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = PI * (2 * k + 1) as f64 / n as f64;
            let rho = if k < n / 2 { rho_outer } else { rho_inner };
            Complex64::from_polar(rho, theta)
        })
        .collect();
    // Evaluate the polynomial on m points of the unit circle and invert the
    // DFT; this is far better conditioned than expanding the product.
    let samples: Vec<Complex64> = (0..m)
        .map(|k| {
            let z = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64);
            roots.iter().map(|r| z - r).product()
        })
        .collect();
    let coeffs: Vec<Complex64> = (0..m)
        .map(|d| {
            samples
                .iter()
                .enumerate()
                .map(|(k, v)| v * Complex64::from_polar(1.0, -2.0 * PI * ((k * d) % m) as f64 / m as f64))
                .sum::<Complex64>()
                / m as f64
        })
        .collect();
    let energy: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let g = 1.0 / energy.sqrt();
    CodeSequence::new(coeffs.into_iter().map(|c| c * g).collect())
}

/// Whether `perm` (values `1..=m`) satisfies the Costas difference-triangle
/// condition.
pub fn is_costas(perm: &[usize]) -> bool {
    let m = perm.len();
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if sorted.iter().enumerate().any(|(i, &v)| v != i + 1) {
        return false;
    }
    for shift in 1..m {
        let mut diffs: Vec<i64> = (0..m - shift)
            .map(|i| perm[i + shift] as i64 - perm[i] as i64)
            .collect();
        diffs.sort_unstable();
        if diffs.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
    }
    true
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v + 1);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(m), &mut vec![false; m], &mut out);
    out
}

/// All Costas arrays of order `m`, in lexicographic order.
pub fn all_costas_arrays(m: usize) -> Vec<Vec<usize>> {
    permutations(m).into_iter().filter(|p| is_costas(p)).collect()
}

pub const COSTAS_ORDERS: [usize; 4] = [3, 4, 5, 6];

fn costas_table() -> &'static [Vec<Vec<usize>>; 4] {
    static TABLE: OnceLock<[Vec<Vec<usize>>; 4]> = OnceLock::new();
    TABLE.get_or_init(|| COSTAS_ORDERS.map(all_costas_arrays))
}

/// A Costas array of order `m` drawn uniformly from the exhaustive table.
pub fn costas_array<R: RngCore + ?Sized>(m: usize, rng: &mut R) -> Result<Vec<usize>, WaveformError> {
    let slot = COSTAS_ORDERS
        .iter()
        .position(|&o| o == m)
        .ok_or(WaveformError::UnsupportedParameter { name: "m", value: m as f64 })?;
    Ok(rng::choose(rng, &costas_table()[slot]).clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolytimeVariant {
    T1,
    T2,
    T3,
    T4,
}

/// Parameters of a polytime code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolytimeParams {
    /// Segment count (T1/T2).
    pub segments: usize,
    /// Swept bandwidth in Hz (T3/T4).
    pub bandwidth_hz: f64,
    pub pulse_samples: usize,
    pub phase_states: usize,
    pub sample_rate_hz: f64,
}

/// Continuous (pre-quantization) phase trajectory of a polytime code, one
/// value per sample.
pub fn polytime_raw_phases(
    variant: PolytimeVariant,
    p: &PolytimeParams,
) -> Result<Vec<f64>, WaveformError> {
    if p.pulse_samples == 0 {
        return Err(WaveformError::UnsupportedParameter { name: "pw_samples", value: 0.0 });
    }
    let big_t = p.pulse_samples as f64 / p.sample_rate_hz;
    let k = p.segments as f64;
    let phases = (0..p.pulse_samples)
        .map(|n| {
            let t = n as f64 / p.sample_rate_hz;
            let seg = ((n * p.segments) / p.pulse_samples) as f64;
            match variant {
                PolytimeVariant::T1 => 2.0 * PI * seg * (k * t - seg * big_t) / big_t,
                PolytimeVariant::T2 => {
                    2.0 * PI * (k * t - seg * big_t) * (2.0 * seg - k + 1.0) / (2.0 * big_t)
                }
                PolytimeVariant::T3 => 2.0 * PI * p.bandwidth_hz * t * t / (2.0 * big_t),
                PolytimeVariant::T4 => {
                    2.0 * PI * (p.bandwidth_hz * t * t / (2.0 * big_t) - p.bandwidth_hz * t / 2.0)
                }
            }
        })
        .collect();
    match variant {
        PolytimeVariant::T1 | PolytimeVariant::T2 if p.segments == 0 => {
            Err(WaveformError::UnsupportedParameter { name: "ng", value: 0.0 })
        }
        PolytimeVariant::T3 | PolytimeVariant::T4 if !(p.bandwidth_hz > 0.0) => {
            Err(WaveformError::UnsupportedParameter { name: "bw_hz", value: p.bandwidth_hz })
        }
        _ => Ok(phases),
    }
}

/// Quantized polytime phase per sample, with values in `[0, 2π)`.
pub fn polytime_phases(variant: PolytimeVariant, p: &PolytimeParams) -> Result<Vec<f64>, WaveformError> {
    if p.phase_states != 2 {
        return Err(WaveformError::UnsupportedParameter {
            name: "ps",
            value: p.phase_states as f64,
        });
    }
    let n = p.phase_states as f64;
    let step = 2.0 * PI / n;
    Ok(polytime_raw_phases(variant, p)?
        .into_iter()
        .map(|phi| {
            let level = (n * phi / (2.0 * PI)).floor().rem_euclid(n);
            level * step
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    fn aperiodic(x: &[Complex64]) -> Vec<Complex64> {
        (0..x.len())
            .map(|k| (k..x.len()).map(|n| x[n] * x[n - k].conj()).sum())
            .collect()
    }

    fn cyclic(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| (0..n).map(|i| x[i] * x[(i + n - k) % n].conj()).sum())
            .collect()
    }

    fn wrap(p: f64) -> f64 {
        (p + PI).rem_euclid(2.0 * PI) - PI
    }

    fn phase_eq(a: f64, b: f64) -> bool {
        wrap(a - b).abs() < 1e-9
    }

    #[test]
    fn barker_values_and_sidelobes() {
        let expect: [(usize, &[f64]); 3] = [
            (5, &[1., 1., 1., -1., 1.]),
            (7, &[1., 1., 1., -1., -1., 1., -1.]),
            (13, &[1., 1., 1., 1., 1., -1., -1., 1., 1., -1., 1., -1., 1.]),
        ];
        for (lc, chips) in expect {
            let code = barker_sequence(lc).unwrap();
            let re: Vec<f64> = code.entries().iter().map(|c| c.re).collect();
            assert_eq!(re, chips);
        }
        for lc in BARKER_LENGTHS {
            let r = aperiodic(barker_sequence(lc).unwrap().entries());
            let peak_sidelobe = r[1..].iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!((peak_sidelobe - 1.0).abs() < 1e-12, "lc={lc}");
            assert!((r[0].re - lc as f64).abs() < 1e-12);
        }
        assert!(barker_sequence(6).is_err());
    }

    #[test]
    fn frank_m2() {
        let ph = polyphase_code(PolyphaseVariant::Frank, 2).unwrap().phases();
        for (a, b) in ph.iter().zip([0.0, 0.0, 0.0, PI]) {
            assert!(phase_eq(*a, b), "{ph:?}");
        }
    }

    #[test]
    fn p4_m4() {
        let ph = polyphase_code(PolyphaseVariant::P4, 4).unwrap().phases();
        for (a, b) in ph.iter().zip([0.0, -0.75 * PI, -PI, -0.75 * PI]) {
            assert!(phase_eq(*a, b), "{ph:?}");
        }
    }

    #[test]
    fn polyphase_direct_evaluation() {
        // Independent per-chip evaluation with 1-based indices.
        let m = 4usize;
        let mf = m as f64;
        let p1 = polyphase_code(PolyphaseVariant::P1, m).unwrap().phases();
        let p2 = polyphase_code(PolyphaseVariant::P2, m).unwrap().phases();
        for gi in 1..=m {
            for ci in 1..=m {
                let n = (gi - 1) * m + (ci - 1);
                let (g, c) = (gi as f64, ci as f64);
                let want_p1 = -(PI / mf) * (mf - (2.0 * g - 1.0)) * ((g - 1.0) * mf + (c - 1.0));
                let want_p2 = -(PI / (2.0 * mf)) * (2.0 * g - 1.0 - mf) * (2.0 * c - 1.0 - mf);
                assert!(phase_eq(p1[n], want_p1));
                assert!(phase_eq(p2[n], want_p2));
            }
        }
        let p3 = polyphase_code(PolyphaseVariant::P3, 16).unwrap().phases();
        for (j, p) in p3.iter().enumerate() {
            assert!(phase_eq(*p, PI * (j * j) as f64 / 16.0));
        }
    }

    #[test]
    fn polyphase_lengths_and_modulus() {
        use PolyphaseVariant::*;
        for (variant, ms) in [
            (Frank, &[4usize, 5, 6, 7, 8][..]),
            (P1, &[4, 5, 6, 7, 8]),
            (Px, &[4, 5, 6, 7, 8]),
            (P2, &[4, 6, 8]),
            (P3, &[16, 25, 36, 49, 64]),
            (P4, &[16, 25, 36, 49, 64]),
        ] {
            for &m in ms {
                let code = polyphase_code(variant, m).unwrap();
                assert_eq!(code.len(), variant.code_length(m));
                assert!(code.entries().iter().all(|e| (e.norm() - 1.0).abs() < 1e-12));
            }
        }
        assert!(polyphase_code(P2, 5).is_err());
    }

    #[test]
    fn zadoff_chu_cazac_grid() {
        for m in [16, 25, 36, 49, 64] {
            for r in [11, 13] {
                let code = zadoff_chu(m, r).unwrap();
                assert!(code.entries().iter().all(|e| (e.norm() - 1.0).abs() < 1e-12));
                let c = cyclic(code.entries());
                assert!(c[1..].iter().all(|v| v.norm() < 1e-9), "m={m} r={r}");
            }
        }
        assert!(matches!(zadoff_chu(16, 4), Err(WaveformError::NotCoprime { .. })));
    }

    #[test]
    fn huffman_end_lobes() {
        for m in [16, 25, 36, 49, 64] {
            for s in [-63.0, -60.0, -56.0] {
                let code = huffman_sequence(m, s).unwrap();
                let x = code.entries();
                assert_eq!(x.len(), m);
                let energy: f64 = x.iter().map(|v| v.norm_sqr()).sum();
                assert!((energy - 1.0).abs() < 1e-9);
                let r = aperiodic(x);
                let peak = r[0].norm();
                let end = 20.0 * (r[m - 1].norm() / peak).log10();
                assert!((end - s).abs() < 0.5, "m={m} s={s} end={end}");
                for v in &r[1..m - 1] {
                    let db = 20.0 * (v.norm() / peak).log10();
                    assert!(db < -100.0, "m={m} s={s} interior {db}");
                }
            }
        }
    }

    #[test]
    fn costas_brute_force_counts() {
        // Known counts of Costas arrays per order.
        assert_eq!(all_costas_arrays(3).len(), 4);
        assert_eq!(all_costas_arrays(4).len(), 12);
        assert_eq!(all_costas_arrays(5).len(), 40);
        assert_eq!(all_costas_arrays(6).len(), 116);
        assert!(is_costas(&[1, 3, 2]));
        assert!(is_costas(&[1, 2, 4, 3]));
        assert!(!is_costas(&[1, 2, 3]));
        assert!(!is_costas(&[1, 1, 2]));
    }

    #[test]
    fn costas_draws_are_valid() {
        let mut rng = stream_rng(5, Stream::Waveform);
        for m in COSTAS_ORDERS {
            for _ in 0..50 {
                let p = costas_array(m, &mut rng).unwrap();
                assert_eq!(p.len(), m);
                assert!(is_costas(&p));
            }
        }
        assert!(costas_array(7, &mut rng).is_err());
    }

    fn params(ng: usize, bw: f64, pw: usize) -> PolytimeParams {
        PolytimeParams {
            segments: ng,
            bandwidth_hz: bw,
            pulse_samples: pw,
            phase_states: 2,
            sample_rate_hz: 100e6,
        }
    }

    #[test]
    fn polytime_two_states() {
        for v in [PolytimeVariant::T1, PolytimeVariant::T2, PolytimeVariant::T3, PolytimeVariant::T4] {
            let ph = polytime_phases(v, &params(5, 12e6, 700)).unwrap();
            assert_eq!(ph.len(), 700);
            assert!(ph.iter().all(|&p| p == 0.0 || p == PI));
        }
        let mut bad = params(4, 10e6, 512);
        bad.phase_states = 4;
        assert!(polytime_phases(PolytimeVariant::T1, &bad).is_err());
    }

    #[test]
    fn t1_segments_detected() {
        // Segment boundaries are where the per-sample phase increment changes.
        let raw = polytime_raw_phases(PolytimeVariant::T1, &params(4, 0.0, 1024)).unwrap();
        let inc: Vec<f64> = raw.windows(2).map(|w| w[1] - w[0]).collect();
        let mut segments = 1;
        let mut slope = inc[0];
        for (n, d) in inc.iter().enumerate() {
            // Resets at boundaries are jumps, not slope changes.
            if (n + 1) % 256 == 0 {
                continue;
            }
            if (d - slope).abs() > 1e-9 {
                segments += 1;
                slope = *d;
            }
        }
        assert_eq!(segments, 4);
    }

    #[test]
    fn t3_sweep_spans_bandwidth() {
        let bw = 20e6;
        let raw = polytime_raw_phases(PolytimeVariant::T3, &params(0, bw, 800)).unwrap();
        let inst: Vec<f64> = raw.windows(2).map(|w| (w[1] - w[0]) / (2.0 * PI) * 100e6).collect();
        let span = inst.last().unwrap() - inst[0];
        assert!((span - bw).abs() / bw < 0.01, "span {span}");
        let raw4 = polytime_raw_phases(PolytimeVariant::T4, &params(0, bw, 800)).unwrap();
        let f0 = (raw4[1] - raw4[0]) / (2.0 * PI) * 100e6;
        assert!((f0 + bw / 2.0).abs() / bw < 0.01);
    }
}
