//! Channel realizations: i.i.d. Rayleigh and a tapped Rician mmWave model.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::linalg::{all_finite, CMatrix, C64};

/// `K x M` downlink channel; row `k` is `h_kᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub entries: CMatrix,
    pub subcarrier_index: Option<usize>,
}

impl ChannelMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !all_finite(&entries) {
            return Err(Error::DegenerateChannel("channel has non-finite entries".into()));
        }
        Ok(ChannelMatrix { entries, subcarrier_index: None })
    }

    pub fn ues(&self) -> usize {
        self.entries.nrows()
    }

    pub fn antennas(&self) -> usize {
        self.entries.ncols()
    }

    /// Keeps only the first `m` antennas.
    pub fn truncated(&self, m: usize) -> ChannelMatrix {
        ChannelMatrix {
            entries: self.entries.columns(0, m.min(self.antennas())).into_owned(),
            subcarrier_index: self.subcarrier_index,
        }
    }

    /// Interleaved real/imaginary CSV, one channel row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.entries.row_iter() {
            let fields: Vec<String> =
                row.iter().flat_map(|z| [format!("{:e}", z.re), format!("{:e}", z.im)]).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmWaveParams {
    pub num_taps: usize,
    pub rician_factor_db: f64,
    pub num_subcarriers: usize,
    /// Element spacing of the uniform linear array, in wavelengths.
    pub antenna_spacing: f64,
    /// Angle-of-departure range in radians, sampled uniformly per UE.
    pub aoa_range: (f64, f64),
}

impl Default for MmWaveParams {
    fn default() -> Self {
        MmWaveParams {
            num_taps: 4,
            rician_factor_db: 10.0,
            num_subcarriers: 64,
            antenna_spacing: 0.5,
            aoa_range: (-PI / 2.0, PI / 2.0),
        }
    }
}

impl MmWaveParams {
    pub fn rician_factor(&self) -> f64 {
        10f64.powf(self.rician_factor_db / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_taps == 0 {
            return Err(Error::Config("num_taps must be >= 1".into()));
        }
        if self.num_subcarriers < self.num_taps {
            return Err(Error::Config(format!(
                "num_subcarriers ({}) must be >= num_taps ({})",
                self.num_subcarriers, self.num_taps
            )));
        }
        if self.rician_factor_db.is_nan() || self.rician_factor() <= 0.0 {
            return Err(Error::Config("rician factor must be positive".into()));
        }
        if !(self.antenna_spacing.is_finite() && self.antenna_spacing > 0.0) {
            return Err(Error::Config("antenna_spacing must be positive".into()));
        }
        let (lo, hi) = self.aoa_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config("aoa_range must be a finite increasing pair".into()));
        }
        Ok(())
    }
}

/// Deterministic RNG for `(seed, stream)`; distinct streams never overlap.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Circularly symmetric `CN(0, variance)` sample.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(s * re, s * im)
}

pub fn rayleigh_from_rng<R: Rng + ?Sized>(rng: &mut R, k: usize, m: usize, gamma: f64) -> CMatrix {
    CMatrix::from_fn(k, m, |_, _| complex_gaussian(rng, gamma))
}

/// i.i.d. `CN(0, γ)` entries, `K x M`.
pub fn gen_rayleigh(config: &SystemConfig, seed: u64) -> Result<ChannelMatrix> {
    config.validate()?;
    let mut rng = rng_for(seed, 0);
    ChannelMatrix::new(rayleigh_from_rng(&mut rng, config.k, config.m, config.gamma))
}

/// Unit-modulus ULA steering vector `exp(j 2π d m sin θ)`.
pub fn steering_vector(m: usize, spacing: f64, angle: f64) -> Vec<C64> {
    let phase = 2.0 * PI * spacing * angle.sin();
    (0..m).map(|i| C64::from_polar(1.0, phase * i as f64)).collect()
}

/// Time-domain taps `[tap][ue][antenna]` for one realization.
///
/// Tap 0 carries the LoS steering vector plus a diffuse part; later taps are
/// diffuse. Every tap has unit average power per entry before the per-UE
/// normalization to total power `γM`.
pub fn mmwave_taps<R: Rng + ?Sized>(
    rng: &mut R,
    k: usize,
    m: usize,
    gamma: f64,
    params: &MmWaveParams,
) -> Vec<CMatrix> {
    let kappa = params.rician_factor();
    let (los_amp, nlos_amp) = if kappa.is_infinite() {
        (1.0, 0.0)
    } else {
        ((kappa / (kappa + 1.0)).sqrt(), (1.0 / (kappa + 1.0)).sqrt())
    };
    let mut taps: Vec<CMatrix> = (0..params.num_taps).map(|_| CMatrix::zeros(k, m)).collect();
    for ue in 0..k {
        let (lo, hi) = params.aoa_range;
        let angle = rng.random_range(lo..hi);
        let los = steering_vector(m, params.antenna_spacing, angle);
        for (t, tap) in taps.iter_mut().enumerate() {
            for a in 0..m {
                let diffuse = complex_gaussian(rng, 1.0);
                tap[(ue, a)] = if t == 0 { los[a] * los_amp + diffuse * nlos_amp } else { diffuse };
            }
        }
        let total: f64 = taps.iter().map(|tap| tap.row(ue).iter().map(|z| z.norm_sqr()).sum::<f64>()).sum();
        let scale = if total > 0.0 { (gamma * m as f64 / total).sqrt() } else { 0.0 };
        for tap in taps.iter_mut() {
            for a in 0..m {
                tap[(ue, a)] *= scale;
            }
        }
    }
    taps
}

/// `H[f] = Σ_t H_t exp(−j 2π f t / F)` for `f = 0..F`.
pub fn taps_to_subcarriers(taps: &[CMatrix], num_subcarriers: usize) -> Vec<ChannelMatrix> {
    let (k, m) = taps[0].shape();
    (0..num_subcarriers)
        .map(|f| {
            let mut h = CMatrix::zeros(k, m);
            for (t, tap) in taps.iter().enumerate() {
                let w = C64::from_polar(1.0, -2.0 * PI * (f * t) as f64 / num_subcarriers as f64);
                h += tap * w;
            }
            ChannelMatrix { entries: h, subcarrier_index: Some(f) }
        })
        .collect()
}

pub fn mmwave_from_rng<R: Rng + ?Sized>(
    rng: &mut R,
    k: usize,
    m: usize,
    gamma: f64,
    params: &MmWaveParams,
) -> Vec<ChannelMatrix> {
    let taps = mmwave_taps(rng, k, m, gamma, params);
    taps_to_subcarriers(&taps, params.num_subcarriers)
}

/// One channel matrix per subcarrier.
pub fn gen_mmwave(config: &SystemConfig, params: &MmWaveParams, seed: u64) -> Result<Vec<ChannelMatrix>> {
    config.validate()?;
    params.validate()?;
    let mut rng = rng_for(seed, 0);
    Ok(mmwave_from_rng(&mut rng, config.k, config.m, config.gamma, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius_sq;

    fn cfg(m: usize, k: usize, gamma: f64) -> SystemConfig {
        SystemConfig { gamma, ..SystemConfig::normalized(m, k, k, vec![10.0]) }
    }

    #[test]
    fn rayleigh_scalar_second_moment() {
        let mut rng = rng_for(7, 0);
        let n = 100_000;
        let m2: f64 = (0..n).map(|_| complex_gaussian(&mut rng, 1.0).norm_sqr()).sum::<f64>() / n as f64;
        assert!((m2 - 1.0).abs() < 0.02, "second moment {m2}");
    }

    #[test]
    fn rayleigh_zero_gamma_is_zero() {
        let h = gen_rayleigh(&cfg(4, 2, 0.0), 3).unwrap();
        assert!(h.entries.iter().all(|z| z.norm_sqr() == 0.0));
    }

    #[test]
    fn rayleigh_frobenius_mean() {
        let c = cfg(32, 8, 1.0);
        let trials = 10_000;
        let mut rng = rng_for(11, 0);
        let mean = (0..trials)
            .map(|_| frobenius_sq(&rayleigh_from_rng(&mut rng, c.k, c.m, c.gamma)))
            .sum::<f64>()
            / trials as f64;
        assert!((mean - 256.0).abs() / 256.0 < 0.02, "mean {mean}");
    }

    #[test]
    fn rayleigh_component_statistics() {
        let gamma = 2.0;
        let h = rayleigh_from_rng(&mut rng_for(5, 0), 200, 200, gamma);
        let n = (200 * 200) as f64;
        let mean_re = h.iter().map(|z| z.re).sum::<f64>() / n;
        let mean_im = h.iter().map(|z| z.im).sum::<f64>() / n;
        let var_re = h.iter().map(|z| (z.re - mean_re).powi(2)).sum::<f64>() / (n - 1.0);
        let var_im = h.iter().map(|z| (z.im - mean_im).powi(2)).sum::<f64>() / (n - 1.0);
        // standard error of the mean is sqrt(1/n) = 0.005
        assert!(mean_re.abs() < 0.03 && mean_im.abs() < 0.03);
        // chi-square variance estimate: relative sd sqrt(2/n) ≈ 0.007
        assert!((var_re / (gamma / 2.0) - 1.0).abs() < 0.04, "{var_re}");
        assert!((var_im / (gamma / 2.0) - 1.0).abs() < 0.04, "{var_im}");
    }

    #[test]
    fn seeded_reproducibility() {
        let c = cfg(8, 4, 1.0);
        assert_eq!(gen_rayleigh(&c, 42).unwrap(), gen_rayleigh(&c, 42).unwrap());
        assert_ne!(gen_rayleigh(&c, 42).unwrap(), gen_rayleigh(&c, 43).unwrap());
        let p = MmWaveParams::default();
        assert_eq!(gen_mmwave(&c, &p, 9).unwrap(), gen_mmwave(&c, &p, 9).unwrap());
    }

    #[test]
    fn pure_los_single_tap_is_scaled_steering() {
        let gamma = 2.0;
        let c = cfg(16, 3, gamma);
        let p = MmWaveParams { num_taps: 1, rician_factor_db: f64::INFINITY, ..Default::default() };
        let hs = gen_mmwave(&c, &p, 1).unwrap();
        for row in hs[0].entries.row_iter() {
            for z in row.iter() {
                assert!((z.norm() - gamma.sqrt()).abs() < 1e-12);
            }
            let norm_sq: f64 = row.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm_sq - gamma * 16.0).abs() < 1e-10);
        }
    }

    #[test]
    fn single_tap_is_frequency_flat() {
        let c = cfg(128, 8, 1.0);
        let p = MmWaveParams { num_taps: 1, ..Default::default() };
        let hs = gen_mmwave(&c, &p, 2).unwrap();
        assert_eq!(hs.len(), 64);
        for h in &hs[1..] {
            assert_eq!(h.entries, hs[0].entries);
        }
    }

    #[test]
    fn per_ue_tap_power_is_normalized() {
        let gamma = 0.7;
        let p = MmWaveParams::default();
        let taps = mmwave_taps(&mut rng_for(4, 0), 8, 32, gamma, &p);
        for ue in 0..8 {
            let total: f64 =
                taps.iter().map(|t| t.row(ue).iter().map(|z| z.norm_sqr()).sum::<f64>()).sum();
            assert!((total - gamma * 32.0).abs() < 1e-12 * gamma * 32.0);
        }
    }

    #[test]
    fn subcarrier_mean_power_matches_parseval() {
        let (k, m, gamma) = (8, 16, 1.0);
        let p = MmWaveParams::default();
        let mut rng = rng_for(21, 0);
        let trials = 1000;
        let mut acc = 0.0;
        for _ in 0..trials {
            let hs = mmwave_from_rng(&mut rng, k, m, gamma, &p);
            acc += hs.iter().map(|h| frobenius_sq(&h.entries)).sum::<f64>() / 64.0;
        }
        let mean = acc / trials as f64;
        let target = gamma * (m * k) as f64;
        assert!((mean - target).abs() / target < 0.03, "mean {mean}");
    }

    #[test]
    fn invalid_mmwave_params() {
        let bad = MmWaveParams { num_taps: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = MmWaveParams { num_subcarriers: 2, num_taps: 4, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
