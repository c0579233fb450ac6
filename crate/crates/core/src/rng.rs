//! Counter-based random numbers.
//!
//! Every draw is a pure function of `(seed, frame, channel, draw)`, so
//! trajectories are reproducible regardless of the order or thread in which
//! frames are generated. The mixer is the SplitMix64 finalizer applied
//! in a chain over the key words; it is not cryptographically secure.

use crate::math;

#[inline]
const fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub const fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub const fn seed(&self) -> u64 {
        self.seed
    }

    /// Raw 64-bit output for a key.
    pub const fn bits(&self, frame: u64, channel: u64, draw: u64) -> u64 {
        let mut h = mix64(self.seed.wrapping_add(GOLDEN));
        h = mix64(h ^ frame.wrapping_mul(GOLDEN).wrapping_add(1));
        h = mix64(h ^ channel.wrapping_mul(GOLDEN).wrapping_add(2));
        mix64(h ^ draw.wrapping_mul(GOLDEN).wrapping_add(3))
    }

    /// Uniform in the open interval `(0, 1)`.
    pub fn uniform(&self, frame: u64, channel: u64, draw: u64) -> f64 {
        // 53 random bits, offset by half an ulp so 0 is never returned.
        let bits = self.bits(frame, channel, draw) >> 11;
        (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller on two uniforms of the same key.
    pub fn standard_normal(&self, frame: u64, channel: u64) -> f64 {
        let u1 = self.uniform(frame, channel, 0);
        let u2 = self.uniform(frame, channel, 1);
        math::sqrt(-2.0 * math::ln(u1)) * math::cos(math::TAU * u2)
    }

    pub fn normal(&self, frame: u64, channel: u64, std_dev: f64) -> f64 {
        if std_dev == 0.0 {
            0.0
        } else {
            std_dev * self.standard_normal(frame, channel)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_pure_functions_of_the_key() {
        let a = CounterRng::new(7);
        let b = CounterRng::new(7);
        assert_eq!(a.bits(3, 1, 0), b.bits(3, 1, 0));
        assert_ne!(a.bits(3, 1, 0), a.bits(3, 2, 0));
        assert_ne!(a.bits(3, 1, 0), a.bits(4, 1, 0));
        assert_ne!(a.bits(3, 1, 0), CounterRng::new(8).bits(3, 1, 0));
    }

    #[test]
    fn uniform_stays_open() {
        let r = CounterRng::new(0);
        for k in 0..10_000 {
            let u = r.uniform(k, 0, 0);
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn normal_moments() {
        let r = CounterRng::new(42);
        let n = 100_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for k in 0..n {
            let x = r.standard_normal(k, 5);
            s += x;
            s2 += x * x;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "var {var}");
    }
}
