//! PAPR and BER Monte-Carlo runners.
//!
//! Packet `i` draws from its own ChaCha stream keyed by `(master_seed, i)`
//! (and the SNR index for BER), so results do not depend on how packets are
//! spread over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::ComplexSample;
use crate::waveform::packet::{draw_packet, recover_bits, ExperimentConfig, Modulator, Scheme};
use crate::waveform::pulse::{matched_filter, shape_full, shape_same};
use crate::waveform::qpsk::qpsk_ber_theory;

/// `10 log10(max |x|^2 / mean |x|^2)`.
pub fn papr_db(samples: &[ComplexSample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (peak, total) = samples
        .iter()
        .map(|s| s.norm_sqr())
        .fold((0.0f64, 0.0f64), |(p, t), v| (p.max(v), t + v));
    if total == 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok(10.0 * (peak / (total / samples.len() as f64)).log10())
}

pub fn mean_power(samples: &[ComplexSample]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}

/// Cap magnitudes at `alpha * sqrt(mean power)` keeping the phase, which is
/// clipping at `alpha` after normalizing to unit mean power. Returns the
/// clipped signal and the number of samples that were touched.
pub fn clip(samples: &[ComplexSample], alpha: f64) -> (Vec<ComplexSample>, usize) {
    let limit = alpha * mean_power(samples).sqrt();
    let mut touched = 0;
    let out = samples
        .iter()
        .map(|&s| {
            let r = s.norm();
            if r > limit {
                touched += 1;
                s * (limit / r)
            } else {
                s
            }
        })
        .collect();
    (out, touched)
}

/// Empirical `Pr(PAPR > threshold)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CcdfCurve {
    pub scheme: Scheme,
    pub band_size: usize,
    pub subcarriers: usize,
    pub clipped: bool,
    pub thresholds_db: Vec<f64>,
    pub probability: Vec<f64>,
    sorted: Vec<f64>,
}

impl CcdfCurve {
    /// One point per distinct observed value `v`, at height `Pr(PAPR >= v)`.
    pub fn from_samples(scheme: Scheme, band_size: usize, subcarriers: usize, clipped: bool, papr_db: &[f64]) -> Self {
        let mut sorted = papr_db.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let mut thresholds_db = Vec::new();
        let mut probability = Vec::new();
        for (i, &v) in sorted.iter().enumerate() {
            if thresholds_db.last() != Some(&v) {
                thresholds_db.push(v);
                probability.push((sorted.len() - i) as f64 / n);
            }
        }
        Self { scheme, band_size, subcarriers, clipped, thresholds_db, probability, sorted }
    }

    /// `Pr(PAPR > threshold)`.
    pub fn exceedance(&self, threshold_db: f64) -> f64 {
        if self.sorted.is_empty() {
            return 0.0;
        }
        let above = self.sorted.len() - self.sorted.partition_point(|&v| v <= threshold_db);
        above as f64 / self.sorted.len() as f64
    }

    /// Threshold exceeded with probability `p`: the midpoint between the
    /// `round(n p)`-th largest sample and the next one below it.
    pub fn quantile_db(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        let k = ((n as f64 * p).round() as usize).min(n);
        if k == 0 {
            return self.sorted[n - 1];
        }
        if k == n {
            return self.sorted[0];
        }
        0.5 * (self.sorted[n - k - 1] + self.sorted[n - k])
    }

    /// The 99.9th percentile PAPR.
    pub fn percentile_999(&self) -> f64 {
        self.quantile_db(1e-3)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("threshold_db,prob\n");
        for (t, p) in self.thresholds_db.iter().zip(&self.probability) {
            s.push_str(&format!("{t:.6},{p:.6e}\n"));
        }
        s
    }
}

/// Per-packet PAPR values of one CCDF run, with and without clipping.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CcdfRun {
    pub config: ExperimentConfig,
    pub papr_db: Vec<f64>,
    pub clipped_papr_db: Option<Vec<f64>>,
    pub clipped_samples: u64,
    pub total_samples: u64,
}

impl CcdfRun {
    pub fn curve(&self) -> CcdfCurve {
        let c = &self.config;
        CcdfCurve::from_samples(c.scheme, c.band_size, c.subcarriers, false, &self.papr_db)
    }

    pub fn clipped_curve(&self) -> Option<CcdfCurve> {
        let c = &self.config;
        self.clipped_papr_db
            .as_ref()
            .map(|v| CcdfCurve::from_samples(c.scheme, c.band_size, c.subcarriers, true, v))
    }
}

fn packet_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))
}

/// PAPR of every packet, plus the clipped PAPR when `clipping_alpha` is set.
pub fn run_ccdf(config: &ExperimentConfig, workers: usize) -> Result<CcdfRun> {
    let modulator = Modulator::new(config)?;
    let taps = config.taps()?;
    let per_packet = |i: usize| -> Result<(f64, Option<f64>, usize)> {
        let mut rng = packet_rng(config.master_seed, i as u64);
        let draw = draw_packet(config, &modulator, &mut rng)?;
        let samples = shape_same(&draw.chips, &taps, config.oversample);
        let papr = papr_db(&samples)?;
        match config.clipping_alpha {
            Some(alpha) => {
                let (clipped, touched) = clip(&samples, alpha);
                Ok((papr, Some(papr_db(&clipped)?), touched))
            }
            None => Ok((papr, None, 0)),
        }
    };
    let results: Vec<_> = pool(workers)?.install(|| {
        (0..config.packets).into_par_iter().map(per_packet).collect::<Result<Vec<_>>>()
    })?;
    let papr = results.iter().map(|r| r.0).collect();
    let clipped = config
        .clipping_alpha
        .map(|_| results.iter().map(|r| r.1.expect("clipped value present")).collect());
    Ok(CcdfRun {
        config: config.clone(),
        papr_db: papr,
        clipped_papr_db: clipped,
        clipped_samples: results.iter().map(|r| r.2 as u64).sum(),
        total_samples: (config.packets * config.samples_per_packet()) as u64,
    })
}

/// Bit counts at one SNR.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub bits: u64,
    pub bit_errors: u64,
    pub clipped_samples: u64,
}

impl BerPoint {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }

    /// Whether the measurement is within `sigmas` binomial standard
    /// deviations of the closed-form value.
    pub fn matches_theory(&self, sigmas: f64) -> bool {
        let p = qpsk_ber_theory(self.snr_db);
        let sd = (p * (1.0 - p) / self.bits as f64).sqrt();
        (self.ber() - p).abs() <= sigmas * sd
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BerCurve {
    pub scheme: Scheme,
    pub clipped: bool,
    pub points: Vec<BerPoint>,
}

impl BerCurve {
    pub fn snr_db(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.snr_db).collect()
    }

    pub fn ber(&self) -> Vec<f64> {
        self.points.iter().map(BerPoint::ber).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("snr_db,ber,bit_errors,bits\n");
        for p in &self.points {
            s.push_str(&format!("{:.3},{:.6e},{},{}\n", p.snr_db, p.ber(), p.bit_errors, p.bits));
        }
        s
    }
}

/// Noise variance per chip for a given `Eb/N0`.
///
/// Every scheme places unit-variance data on each occupied subcarrier, so
/// after the receiver's despreading a data symbol has `Es = 1` against
/// noise `M sigma^2`, giving `Es/N0 = 1 / (M sigma^2)`; QPSK has
/// `Eb = Es / 2`. The pulse is unit energy, so the chip-rate noise after the
/// matched filter equals the per-sample noise added at the oversampled rate.
pub fn chip_noise_variance(band_size: usize, ebn0_db: f64) -> f64 {
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    1.0 / (2.0 * band_size as f64 * ebn0)
}

/// Bit error rate over AWGN at every point of `snr_db_grid` (read as
/// `Eb/N0` in dB), clipping at `clipping_alpha` when set.
pub fn run_ber(config: &ExperimentConfig, workers: usize) -> Result<BerCurve> {
    if config.snr_db_grid.is_empty() {
        return Err(Error::InvalidConfig("snr_db_grid is empty".into()));
    }
    let modulator = Modulator::new(config)?;
    let taps = config.taps()?;
    let pool = pool(workers)?;
    let chips = config.chips_per_packet();
    let mut points = Vec::with_capacity(config.snr_db_grid.len());
    for (point, &snr_db) in config.snr_db_grid.iter().enumerate() {
        let sigma = (chip_noise_variance(config.band_size, snr_db) / 2.0).sqrt();
        let per_packet = |i: usize| -> Result<(u64, u64, u64)> {
            let mut rng = packet_rng(config.master_seed, ((point as u64) << 40) | i as u64);
            let draw = draw_packet(config, &modulator, &mut rng)?;
            let mut tx = shape_full(&draw.chips, &taps, config.oversample);
            let mut touched = 0;
            if let Some(alpha) = config.clipping_alpha {
                let (clipped, n) = clip(&tx, alpha);
                tx = clipped;
                touched = n as u64;
            }
            for s in tx.iter_mut() {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *s += Complex64::new(re, im) * sigma;
            }
            let z = matched_filter(&tx, &taps, config.oversample, chips);
            let bits = recover_bits(config, &modulator, &draw.layout, &z)?;
            let errors = bits.iter().zip(&draw.bits).filter(|(a, b)| a != b).count() as u64;
            Ok((draw.bits.len() as u64, errors, touched))
        };
        let mut p = BerPoint { snr_db, bits: 0, bit_errors: 0, clipped_samples: 0 };
        let mut next = 0usize;
        while p.bit_errors < config.ber_min_errors && p.bits < config.ber_max_bits {
            let batch = next..next + config.ber_batch_packets;
            next = batch.end;
            let results = pool.install(|| batch.into_par_iter().map(per_packet).collect::<Result<Vec<_>>>())?;
            for (b, e, t) in results {
                p.bits += b;
                p.bit_errors += e;
                p.clipped_samples += t;
            }
        }
        points.push(p);
    }
    Ok(BerCurve {
        scheme: config.scheme,
        clipped: config.clipping_alpha.is_some(),
        points,
    })
}
