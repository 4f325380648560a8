//! Deterministic random streams.
//!
//! Every example is generated from its own seed, derived by hashing the
//! master seed together with the example's coordinates (class, SNR, split,
//! index). Generation order and thread count therefore never affect output.
//!
//! Seeds are mixed with SplitMix64:
//!
//! ```text
//! mix(z):  z += 0x9E3779B97F4A7C15
//!          z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!          z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!          z ^ (z >> 31)
//! derive(seed, [p0, p1, ...]) = mix(...mix(mix(seed) ^ p0) ^ p1 ...)
//! ```
//!
//! The derived seed keys a ChaCha8 stream cipher (32-byte key = the seed in
//! little-endian, repeated four times), which is itself counter based.
//! Distinct purposes use distinct ChaCha stream ids (see [`Stream`]).
//!
//! Gaussian deviates use the Box-Muller transform on 53-bit uniforms:
//!
//! ```text
//! u1 = ((next_u64 >> 11) + 1) * 2^-53     in (0, 1]
//! u2 = (next_u64 >> 11) * 2^-53           in [0, 1)
//! r  = sqrt(-2 ln u1)
//! (z0, z1) = (r cos(2 pi u2), r sin(2 pi u2))
//! ```
//!
//! For complex noise, z0 goes to the in-phase part and z1 to the quadrature
//! part of the same sample.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream ids used for the different consumers of an example seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    /// Waveform parameters and symbol content.
    Waveform = 0,
    /// Additive channel noise.
    Noise = 1,
    /// Training-time shuffling and initialization.
    Training = 2,
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash a master seed together with a list of coordinates.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ p))
}

/// A ChaCha8 generator for `seed` positioned at the start of `stream`.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&seed.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream as u64);
    rng
}

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

/// Uniform deviate in `[0, 1)` with 53 bits of resolution.
pub fn uniform01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * INV_2_53
}

/// Uniform deviate in `[lo, hi)`.
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * uniform01(rng)
}

/// Uniform index in `0..n` by rejection-free multiply-shift on 64 bits.
pub fn index<R: RngCore + ?Sized>(rng: &mut R, n: usize) -> usize {
    assert!(n > 0, "cannot draw from an empty range");
    ((rng.next_u64() as u128 * n as u128) >> 64) as usize
}

/// Pick one element of a non-empty slice uniformly.
pub fn choose<'a, T, R: RngCore + ?Sized>(rng: &mut R, items: &'a [T]) -> &'a T {
    &items[index(rng, items.len())]
}

/// A pair of independent standard normal deviates (Box-Muller).
pub fn gaussian_pair<R: RngCore + ?Sized>(rng: &mut R) -> (f64, f64) {
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * INV_2_53;
    let u2 = (rng.next_u64() >> 11) as f64 * INV_2_53;
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Fisher-Yates shuffle driven by [`index`].
pub fn shuffle<T, R: RngCore + ?Sized>(rng: &mut R, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = index(rng, i + 1);
        items.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference SplitMix64 generator seeded with 0.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(
            splitmix64(0x9E37_79B9_7F4A_7C15),
            0x6E78_9E6A_A1B9_65F4
        );
    }

    #[test]
    fn derived_seeds_depend_on_every_part() {
        let base = derive_seed(7, &[1, 2, 3]);
        assert_ne!(base, derive_seed(7, &[1, 2, 4]));
        assert_ne!(base, derive_seed(8, &[1, 2, 3]));
        assert_ne!(base, derive_seed(7, &[2, 1, 3]));
        assert_eq!(base, derive_seed(7, &[1, 2, 3]));
    }

    #[test]
    fn streams_are_independent() {
        let mut a = stream_rng(42, Stream::Waveform);
        let mut b = stream_rng(42, Stream::Noise);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = stream_rng(1, Stream::Noise);
        let n = 200_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n / 2 {
            let (a, b) = gaussian_pair(&mut rng);
            s1 += a + b;
            s2 += a * a + b * b;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn index_covers_range() {
        let mut rng = stream_rng(3, Stream::Waveform);
        let mut seen = [0usize; 5];
        for _ in 0..5000 {
            seen[index(&mut rng, 5)] += 1;
        }
        assert!(seen.iter().all(|&c| c > 800));
    }
}
