//! Distributed spectrum-sensing scenario.
//!
//! The unknown power spectral density is expanded over a bank of
//! non-overlapping rectangular basis functions; occupancy of the spectrum is
//! encoded by which expansion coefficients are nonzero. Each node observes
//! the PSD on a fixed frequency grid through its channel gain, plus Gaussian
//! observation noise, yielding a sparse linear regression block per
//! iteration.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::algorithms::RegressionSnapshot;
use crate::linalg::Mat;

#[derive(Debug, Error, PartialEq)]
pub enum SpectrumError {
    #[error("frequency {0} outside [{1}, {2})")]
    FrequencyOutOfRange(f64, f64, f64),
    #[error("band index {0} outside 1..={1}")]
    BandOutOfRange(usize, usize),
    #[error("node index {0} outside 0..{1}")]
    NodeOutOfRange(usize, usize),
}

/// Bank of rectangular basis functions partitioning [f_min, f_max) into
/// `n_basis` equal bands, evaluated on a grid of `n_freq` frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisBank {
    pub n_basis: usize,
    pub n_freq: usize,
    pub f_min: f64,
    pub f_max: f64,
    pub amplitude: f64,
}

impl BasisBank {
    pub fn band_width(&self) -> f64 {
        (self.f_max - self.f_min) / self.n_basis as f64
    }

    /// j-th grid frequency, j in 0..n_freq.
    pub fn grid_freq(&self, j: usize) -> f64 {
        self.f_min + j as f64 * (self.f_max - self.f_min) / self.n_freq as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.n_freq).map(|j| self.grid_freq(j)).collect()
    }

    fn check_freq(&self, f: f64) -> Result<(), SpectrumError> {
        if f < self.f_min || f >= self.f_max {
            return Err(SpectrumError::FrequencyOutOfRange(f, self.f_min, self.f_max));
        }
        Ok(())
    }

    pub fn check_band(&self, band: usize) -> Result<(), SpectrumError> {
        if band < 1 || band > self.n_basis {
            return Err(SpectrumError::BandOutOfRange(band, self.n_basis));
        }
        Ok(())
    }

    /// 1-based index of the band containing frequency `f`. A frequency
    /// within a relative 1e-9 of a band edge counts as the upper band, so
    /// grid points computed in floating point land where they should.
    pub fn band_of(&self, f: f64) -> Result<usize, SpectrumError> {
        self.check_freq(f)?;
        let x = (f - self.f_min) * self.n_basis as f64 / (self.f_max - self.f_min);
        let idx = (x + 1e-9) as usize;
        Ok(idx.min(self.n_basis - 1) + 1)
    }

    /// Value of basis function `band` (1-based) at frequency `f`: the
    /// amplitude inside the band's half-open interval, zero elsewhere.
    pub fn eval(&self, f: f64, band: usize) -> Result<f64, SpectrumError> {
        self.check_band(band)?;
        Ok(if self.band_of(f)? == band {
            self.amplitude
        } else {
            0.0
        })
    }

    /// N_freq x N_basis matrix of basis values on the grid.
    pub fn eval_matrix(&self) -> Mat<f64> {
        Mat::from_fn(self.n_freq, self.n_basis, |j, m| {
            self.eval(self.grid_freq(j), m + 1).expect("grid frequency in range")
        })
    }
}

/// True spectrum, channels, and noise levels for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumScenario {
    pub bank: BasisBank,
    /// Per-band transmit powers (mW); sparse.
    pub omega0: Vec<f64>,
    /// Squared channel magnitude per node, constant over frequency and time.
    pub channel_gain: Vec<f64>,
    /// Receiver noise power, assumed estimated beforehand and subtracted.
    pub rx_noise_power: f64,
    /// Variance of the observation noise on each grid sample.
    pub obs_noise_var: f64,
}

impl SpectrumScenario {
    pub fn n_nodes(&self) -> usize {
        self.channel_gain.len()
    }

    /// Indicator of the occupied bands (1.0/0.0).
    pub fn support_mask(&self) -> Vec<f64> {
        self.omega0
            .iter()
            .map(|&w| if w != 0.0 { 1.0 } else { 0.0 })
            .collect()
    }

    /// 1-based indices of the occupied bands.
    pub fn support_bands(&self) -> Vec<usize> {
        self.omega0
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(|(m, _)| m + 1)
            .collect()
    }

    pub fn sparsity_ratio(&self) -> f64 {
        self.support_bands().len() as f64 / self.bank.n_basis as f64
    }

    /// Transmitted PSD at frequency `f`.
    pub fn true_psd(&self, f: f64) -> Result<f64, SpectrumError> {
        let band = self.bank.band_of(f)?;
        Ok(self.bank.amplitude * self.omega0[band - 1])
    }

    /// Regressor block of node `k`: row j holds the channel-weighted basis
    /// values at grid frequency j. Channels are static, so the block does not
    /// depend on the iteration.
    pub fn node_regressor(&self, k: usize, _iteration: usize) -> Result<Mat<f64>, SpectrumError> {
        if k >= self.n_nodes() {
            return Err(SpectrumError::NodeOutOfRange(k, self.n_nodes()));
        }
        let gain = self.channel_gain[k];
        let bank = &self.bank;
        Ok(Mat::from_fn(bank.n_freq, bank.n_basis, |j, m| {
            gain * bank
                .eval(bank.grid_freq(j), m + 1)
                .expect("grid frequency in range")
        }))
    }

    /// Noise-free received PSD samples of node `k`.
    pub fn clean_response(&self, k: usize) -> Result<Vec<f64>, SpectrumError> {
        let b = self.node_regressor(k, 0)?;
        Ok(b.mul_vec(&self.omega0).expect("matching dimensions"))
    }

    /// One iteration's snapshot for node `k`: the regressor block and the
    /// noisy received samples.
    pub fn generate_measurement(
        &self,
        k: usize,
        iteration: usize,
        rng: &mut impl Rng,
    ) -> Result<RegressionSnapshot<f64>, SpectrumError> {
        let regressor = self.node_regressor(k, iteration)?;
        let clean = regressor.mul_vec(&self.omega0).expect("matching dimensions");
        let noise = Normal::new(0.0, self.obs_noise_var.sqrt()).expect("valid noise std");
        let desired = clean
            .iter()
            .map(|&c| {
                // The receiver noise floor is added and immediately removed:
                // it is treated as known exactly from a prior estimation step.
                c + noise.sample(rng) + self.rx_noise_power - self.rx_noise_power
            })
            .collect();
        Ok(RegressionSnapshot::new(regressor, desired))
    }

    /// Copy of the scenario with band `band` (1-based) set to `power_mw`.
    pub fn with_band_power(&self, band: usize, power_mw: f64) -> Result<Self, SpectrumError> {
        self.bank.check_band(band)?;
        let mut s = self.clone();
        s.omega0[band - 1] = power_mw;
        Ok(s)
    }
}

/// PSD implied by a coefficient estimate at frequency `f`.
pub fn estimated_psd(omega: &[f64], bank: &BasisBank, f: f64) -> Result<f64, SpectrumError> {
    let band = bank.band_of(f)?;
    Ok(bank.amplitude * omega[band - 1])
}

/// Two-column CSV of a PSD curve over the grid.
pub fn psd_csv(bank: &BasisBank, omega: &[f64]) -> String {
    let mut out = String::from("frequency,power\n");
    for j in 0..bank.n_freq {
        let f = bank.grid_freq(j);
        let p = estimated_psd(omega, bank, f).expect("grid frequency in range");
        out.push_str(&format!("{f:.6},{p:.10}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bank() -> BasisBank {
        BasisBank {
            n_basis: 50,
            n_freq: 100,
            f_min: 0.0,
            f_max: 1.0,
            amplitude: 1.0,
        }
    }

    fn scenario() -> SpectrumScenario {
        let mut omega0 = vec![0.0; 50];
        for &b in &[3usize, 9, 15, 22, 28, 35, 41, 47] {
            omega0[b] = 0.7;
        }
        SpectrumScenario {
            bank: bank(),
            omega0,
            channel_gain: vec![1.0; 4],
            rx_noise_power: 0.0,
            obs_noise_var: 0.001,
        }
    }

    #[test]
    fn eval_basis_examples() {
        let b = bank();
        // Band 1 covers [0, 0.02).
        assert_eq!(b.eval(0.015, 1).unwrap(), 1.0);
        assert_eq!(b.eval(0.5, 1).unwrap(), 0.0);
        assert_eq!(
            b.eval(1.0, 1).unwrap_err(),
            SpectrumError::FrequencyOutOfRange(1.0, 0.0, 1.0)
        );
        assert_eq!(b.eval(0.5, 51).unwrap_err(), SpectrumError::BandOutOfRange(51, 50));
    }

    #[test]
    fn rectangular_bases_partition_the_grid() {
        let b = bank();
        for j in 0..b.n_freq {
            let f = b.grid_freq(j);
            let total: f64 = (1..=b.n_basis).map(|m| b.eval(f, m).unwrap()).sum();
            assert_eq!(total, b.amplitude);
        }
    }

    #[test]
    fn true_psd_values() {
        let s = scenario();
        // Band 4 (index 3) is occupied: frequencies [0.06, 0.08).
        assert_eq!(s.true_psd(0.07).unwrap(), 0.7);
        assert_eq!(s.true_psd(0.00).unwrap(), 0.0);
        let silent = SpectrumScenario {
            omega0: vec![0.0; 50],
            ..s
        };
        assert_eq!(silent.true_psd(0.07).unwrap(), 0.0);
    }

    #[test]
    fn regressor_structure() {
        let s = scenario();
        let b = s.node_regressor(0, 0).unwrap();
        assert_eq!((b.rows(), b.cols()), (100, 50));
        // 100 grid points over 50 equal bands: two nonzero rows per column.
        for m in 0..50 {
            let nonzero = (0..100).filter(|&j| b.get(j, m) != 0.0).count();
            assert_eq!(nonzero, 2);
        }
        assert_eq!(b, s.bank.eval_matrix());

        let faded = SpectrumScenario {
            channel_gain: vec![0.0; 1],
            ..scenario()
        };
        let z = faded.node_regressor(0, 0).unwrap();
        assert!((0..100).all(|j| (0..50).all(|m| z.get(j, m) == 0.0)));
    }

    #[test]
    fn measurement_determinism_and_noiseless_exactness() {
        let s = scenario();
        let a = s
            .generate_measurement(1, 0, &mut ChaCha8Rng::seed_from_u64(9))
            .unwrap();
        let b = s
            .generate_measurement(1, 0, &mut ChaCha8Rng::seed_from_u64(9))
            .unwrap();
        assert_eq!(a, b);

        let clean = SpectrumScenario {
            obs_noise_var: 0.0,
            ..scenario()
        };
        let snap = clean
            .generate_measurement(0, 0, &mut ChaCha8Rng::seed_from_u64(1))
            .unwrap();
        assert_eq!(snap.desired, clean.clean_response(0).unwrap());
    }

    #[test]
    fn measurements_concentrate_around_active_power() {
        let s = scenario();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sigma = s.obs_noise_var.sqrt();
        let mut outliers = 0usize;
        let mut total = 0usize;
        for i in 0..100 {
            let snap = s.generate_measurement(0, i, &mut rng).unwrap();
            for j in 0..100 {
                let truth = s.true_psd(s.bank.grid_freq(j)).unwrap();
                if truth > 0.0 {
                    total += 1;
                    if (snap.desired[j] - truth).abs() > 3.0 * sigma {
                        outliers += 1;
                    }
                }
            }
        }
        // Three-sigma excursions happen for ~0.3% of Gaussian draws.
        assert!(total > 1000);
        assert!((outliers as f64) < 0.02 * total as f64);
    }

    #[test]
    fn estimated_psd_is_linear_and_matches_truth() {
        let s = scenario();
        for j in 0..100 {
            let f = s.bank.grid_freq(j);
            assert_eq!(
                estimated_psd(&s.omega0, &s.bank, f).unwrap(),
                s.true_psd(f).unwrap()
            );
        }
        assert_eq!(estimated_psd(&vec![0.0; 50], &s.bank, 0.5).unwrap(), 0.0);
        let doubled: Vec<f64> = s.omega0.iter().map(|w| 2.0 * w).collect();
        assert_eq!(
            estimated_psd(&doubled, &s.bank, 0.07).unwrap(),
            2.0 * s.true_psd(0.07).unwrap()
        );
    }

    #[test]
    fn band_power_override() {
        let s = scenario().with_band_power(16, 0.2).unwrap();
        assert_eq!(s.omega0[15], 0.2);
        assert!(scenario().with_band_power(0, 0.2).is_err());
    }
}
