//! Counter-based deterministic random number generation.
//!
//! The generator is SplitMix64: output i is a fixed 64-bit mix of
//! `seed + (i+1) * 0x9E3779B97F4A7C15`, so identical seeds produce identical
//! streams on every platform and in any language with 64-bit integers.
//! Gaussian draws use the Box-Muller transform on paired uniforms.
//! Not cryptographic; simulation and test use only.

const GAMMA: u64 = 0x9E3779B97F4A7C15;
const MIX1: u64 = 0xBF58476D1CE4E5B9;
const MIX2: u64 = 0x94D049BB133111EB;

/// Deterministic SplitMix64 stream.
#[derive(Debug, Clone)]
pub struct CounterRng {
    state: u64,
    cached_gauss: Option<f64>,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed, cached_gauss: None }
    }

    /// Derives an independent stream for a labeled subtask. The label is
    /// folded into the state with the same finalizer, so derived streams are
    /// reproducible functions of (seed, label).
    pub fn derive(&self, label: u64) -> Self {
        Self::new(mix(self.state.wrapping_add(mix(label))))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in 0..bound.
    pub fn next_below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        (self.next_u64() % bound as u64) as usize
    }

    /// Standard normal via Box-Muller on paired uniforms; the second draw of
    /// each pair is cached.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.cached_gauss.take() {
            return z;
        }
        // Shift u1 away from 0 so the log is finite.
        let u1 = ((self.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.cached_gauss = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i + 1);
            items.swap(i, j);
        }
    }
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(MIX1);
    z = (z ^ (z >> 27)).wrapping_mul(MIX2);
    z ^ (z >> 31)
}
