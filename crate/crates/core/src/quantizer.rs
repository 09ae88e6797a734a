//! Fronthaul alphabet and the symmetric mid-rise uniform quantizer.
//!
//! A [`QuantizerSpec`] fixes the step `Δ` and the resolution `B` (so `L = 2^B`
//! real levels `Δ(ℓ − (L−1)/2)`, `ℓ = 0..L`). The complex alphabet is the
//! Cartesian product of the level set with itself.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

/// Highest resolution covered by the distortion-factor table.
pub const MAX_BITS: u32 = 8;

/// Number of candidates in the step-size grid search.
pub const CALIBRATION_GRID: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizerSpec {
    pub bits: u32,
    pub delta: f64,
    pub eta: f64,
}

impl QuantizerSpec {
    /// Spec with `η` taken from the built-in table.
    pub fn new(delta: f64, bits: u32) -> Result<Self> {
        let eta = distortion_factor(bits)?;
        Self::with_eta(delta, bits, eta)
    }

    pub fn with_eta(delta: f64, bits: u32, eta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Config(format!("quantizer step must be positive, got {delta}")));
        }
        if bits == 0 || bits > 30 {
            return Err(Error::UnsupportedBits(bits));
        }
        if !(0.0..1.0).contains(&eta) {
            return Err(Error::Config(format!("distortion factor must lie in [0, 1), got {eta}")));
        }
        Ok(QuantizerSpec { bits, delta, eta })
    }

    pub fn levels(&self) -> usize {
        1usize << self.bits
    }

    pub fn level(&self, index: usize) -> f64 {
        let l = self.levels() as f64;
        self.delta * (index as f64 - (l - 1.0) / 2.0)
    }

    /// Ascending real levels.
    pub fn level_set(&self) -> Vec<f64> {
        (0..self.levels()).map(|i| self.level(i)).collect()
    }

    /// All `L²` complex points.
    pub fn alphabet(&self) -> Vec<C64> {
        let ls = self.level_set();
        ls.iter().flat_map(|&re| ls.iter().map(move |&im| C64::new(re, im))).collect()
    }

    /// Index `o(x) = min(max(⌊x/Δ + L/2⌋, 0), L−1)`.
    pub fn level_index(&self, x: f64) -> usize {
        let l = self.levels();
        let raw = (x / self.delta + l as f64 / 2.0).floor();
        raw.clamp(0.0, (l - 1) as f64) as usize
    }

    pub fn quantize(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        Ok(self.level(self.level_index(x)))
    }

    pub fn quantize_complex(&self, z: C64) -> Result<C64> {
        Ok(C64::new(self.quantize(z.re)?, self.quantize(z.im)?))
    }

    /// Exact membership in the level set.
    pub fn contains_level(&self, x: f64) -> bool {
        x.is_finite() && self.level(self.level_index(x)) == x
    }

    /// Largest input magnitude that does not saturate.
    pub fn non_saturating_bound(&self) -> f64 {
        self.delta * self.levels() as f64 / 2.0
    }

    /// Smallest magnitude any level can take, `Δ/2`.
    pub fn min_magnitude(&self) -> f64 {
        self.delta / 2.0
    }
}

pub fn midrise_quantize(x: f64, spec: &QuantizerSpec) -> Result<f64> {
    spec.quantize(x)
}

pub fn quantize_complex(z: C64, spec: &QuantizerSpec) -> Result<C64> {
    spec.quantize_complex(z)
}

/// Additive-quantization-noise distortion factors for a Gaussian input.
///
/// `B = 1..=5` are the tabulated Lloyd-Max values; above that the
/// high-resolution approximation `(π√3/2)·2^(−2B)` is used.
pub fn distortion_factor(bits: u32) -> Result<f64> {
    const TABLE: [f64; 5] = [0.3634, 0.1175, 0.03454, 0.009497, 0.002499];
    match bits {
        1..=5 => Ok(TABLE[bits as usize - 1]),
        6..=MAX_BITS => Ok(std::f64::consts::PI * 3f64.sqrt() / 2.0 * 2f64.powi(-2 * bits as i32)),
        _ => Err(Error::UnsupportedBits(bits)),
    }
}

/// Sample-mean distortion `(1/n) Σ |r − Q(r)|²` of the level set for step `delta`.
pub fn sample_distortion(samples: &[f64], bits: u32, delta: f64) -> f64 {
    let l = (1usize << bits) as f64;
    let half = l / 2.0;
    let offset = (l - 1.0) / 2.0;
    let top = l - 1.0;
    let inv = 1.0 / delta;
    let mut acc = 0.0;
    for &r in samples {
        let o = (r * inv + half).floor().clamp(0.0, top);
        let err = r - delta * (o - offset);
        acc += err * err;
    }
    acc / samples.len() as f64
}

/// Grid candidates `j · 8σ̂/(L·G)`, `j = 1..=G`, where `σ̂` is the sample RMS.
pub fn calibration_grid(samples: &[f64], bits: u32) -> Vec<f64> {
    let rms = (samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64).sqrt();
    let top = 8.0 * rms / (1usize << bits) as f64;
    (1..=CALIBRATION_GRID).map(|j| top * j as f64 / CALIBRATION_GRID as f64).collect()
}

/// Offline step-size optimization by one-dimensional grid search.
pub fn calibrate_step(samples: &[f64], bits: u32) -> Result<QuantizerSpec> {
    let eta = distortion_factor(bits)?;
    if let Some(&bad) = samples.iter().find(|x| !x.is_finite()) {
        return Err(Error::NonFinite(bad));
    }
    if samples.iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateInput("calibration needs at least one non-zero sample".into()));
    }
    let mut best = (f64::INFINITY, 0.0);
    for delta in calibration_grid(samples, bits) {
        let d = sample_distortion(samples, bits, delta);
        if d < best.0 {
            best = (d, delta);
        }
    }
    QuantizerSpec::with_eta(best.1, bits, eta)
}
