//! Seeded fixtures shared by the precoding benchmarks.

use splitmimo_core::aas::{self, AasMethod};
use splitmimo_core::bbu::qrzf;
use splitmimo_core::channel::{rayleigh_from_rng, rng_for};
use splitmimo_core::quantizer::{calibrate_step, distortion_factor};
use splitmimo_core::{ChannelMatrix, EffectiveChannel, QuantizerSpec};

pub const SIGMA0_SQ: f64 = 0.01;

/// Rayleigh channel with `k` UEs and `m` antennas.
pub fn channel(k: usize, m: usize, seed: u64) -> ChannelMatrix {
    ChannelMatrix::new(rayleigh_from_rng(&mut rng_for(seed, 0), k, m, 1.0)).expect("finite draw")
}

/// GS-MRT effective channel (`N = K`) with a quantizer calibrated on its QRZF precoder.
pub fn split_instance(k: usize, m: usize, bits: u32, seed: u64) -> (EffectiveChannel, QuantizerSpec) {
    let h = channel(k, m, seed);
    let pa = aas::select(AasMethod::GsMrt, &h, k).expect("N = K");
    let eff = aas::effective_channel(&h, &pa).expect("matching dimensions");
    let spec = quantizer_for(&eff, bits);
    (eff, spec)
}

pub fn quantizer_for(eff: &EffectiveChannel, bits: u32) -> QuantizerSpec {
    let eta = distortion_factor(bits).expect("supported resolution");
    let p = qrzf(&eff.matrix, 1.0, SIGMA0_SQ, eta, eff.dim()).expect("full-rank channel");
    let samples: Vec<f64> = p.matrix.iter().flat_map(|z| [z.re, z.im]).collect();
    calibrate_step(&samples, bits).expect("non-degenerate samples")
}
