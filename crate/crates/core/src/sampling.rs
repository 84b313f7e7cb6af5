//! Reproducible sample points inside a model's box.
//!
//! The generator is splitmix64: the state advances by `0x9E3779B97F4A7C15`
//! and each output is mixed as
//! `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9; z = (z ^ (z >> 27)) * 0x94D049BB133111EB; z ^ (z >> 31)`.
//! A uniform double in `[0, 1)` is `(z >> 11) * 2^-53`. Coordinates are drawn
//! in order for each point; a point whose frame condition estimate exceeds
//! [`SAMPLE_COND_BOUND`] (or whose frame cannot be evaluated) is discarded
//! and redrawn from the continuing sequence.

use alloc::vec::Vec;

use crate::dsl::ModelSpec;

/// Frames worse conditioned than this are resampled.
pub const SAMPLE_COND_BOUND: f64 = 1e6;

/// Upper bound on consecutive rejected draws before sampling gives up.
const MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SamplingError {
    #[error("could not find a well-conditioned frame after {0} draws")]
    Exhausted(usize),
}

/// Draws `count` points uniformly from `spec.sample_box`, shrunk by
/// `margin` on every side.
pub fn sample_points_with_margin(
    spec: &ModelSpec,
    count: usize,
    seed: u64,
    margin: f64,
) -> Result<Vec<Vec<f64>>, SamplingError> {
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(count);
    let mut rejected = 0;
    while out.len() < count {
        let p: Vec<f64> = spec
            .sample_box
            .iter()
            .map(|(lo, hi)| {
                let (lo, hi) = (lo + margin, hi - margin);
                lo + (hi - lo) * rng.next_f64()
            })
            .collect();
        let ok = spec
            .frame_values(&p)
            .map(|m| m.condition_estimate() <= SAMPLE_COND_BOUND)
            .unwrap_or(false);
        if ok {
            out.push(p);
            rejected = 0;
        } else {
            rejected += 1;
            if rejected >= MAX_REJECTIONS {
                return Err(SamplingError::Exhausted(rejected));
            }
        }
    }
    Ok(out)
}

/// Draws `count` points uniformly from `spec.sample_box`.
pub fn sample_points(
    spec: &ModelSpec,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, SamplingError> {
    sample_points_with_margin(spec, count, seed, 0.0)
}
