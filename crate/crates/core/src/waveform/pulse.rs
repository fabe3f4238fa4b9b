//! Pulse shaping.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::ComplexSample;

/// Transmit pulse.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pulse {
    /// Root raised cosine with the configured roll-off and span.
    #[default]
    Rrc,
    /// Sample-and-hold over one chip.
    Rectangular,
}

/// Root raised cosine taps, `span * oversample + 1` of them, symmetric and
/// scaled to unit energy. `t` is in chips.
pub fn rrc_taps(beta: f64, span: usize, oversample: usize) -> Result<Vec<f64>> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidConfig(format!("roll-off {beta} outside (0, 1]")));
    }
    if span == 0 || oversample == 0 {
        return Err(Error::InvalidConfig("pulse span and oversampling must be positive".into()));
    }
    let half = (span * oversample / 2) as isize;
    let len = span * oversample + 1;
    let mut taps: Vec<f64> = (0..len as isize)
        .map(|i| {
            let t = (i - half) as f64 / oversample as f64;
            rrc_at(t, beta)
        })
        .collect();
    let energy = taps.iter().map(|v| v * v).sum::<f64>().sqrt();
    taps.iter_mut().for_each(|v| *v /= energy);
    Ok(taps)
}

fn rrc_at(t: f64, beta: f64) -> f64 {
    if t == 0.0 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let edge = 1.0 / (4.0 * beta);
    if ((t.abs() - edge) / edge).abs() < 1e-12 {
        let a = PI / (4.0 * beta);
        return beta * FRAC_1_SQRT_2 * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
    num / den
}

/// Unit-energy rectangle spanning one chip.
pub fn rectangular_taps(oversample: usize) -> Vec<f64> {
    vec![1.0 / (oversample as f64).sqrt(); oversample.max(1)]
}

/// Full convolution of the chip sequence, zero-stuffed by `oversample`, with
/// `taps`. Output length is `chips.len() * oversample + taps.len() - 1`.
pub fn shape_full(chips: &[ComplexSample], taps: &[f64], oversample: usize) -> Vec<ComplexSample> {
    if chips.is_empty() {
        return Vec::new();
    }
    let len = chips.len() * oversample + taps.len() - 1;
    let mut out = vec![Complex64::ZERO; len];
    // only every oversample-th input is non-zero, so scatter per chip
    for (c, &x) in chips.iter().enumerate() {
        let base = c * oversample;
        for (k, &h) in taps.iter().enumerate() {
            out[base + k] += x * h;
        }
    }
    out
}

/// Centered part of [`shape_full`] with `chips.len() * oversample` samples.
pub fn shape_same(chips: &[ComplexSample], taps: &[f64], oversample: usize) -> Vec<ComplexSample> {
    let full = shape_full(chips, taps, oversample);
    let offset = (taps.len() - 1) / 2;
    full[offset..offset + chips.len() * oversample].to_vec()
}

/// Matched filter sampled at chip instants:
/// `z[c] = sum_k r[c * oversample + k] h[k]`, for signals built by
/// [`shape_full`].
pub fn matched_filter(received: &[ComplexSample], taps: &[f64], oversample: usize, chips: usize) -> Vec<ComplexSample> {
    (0..chips)
        .map(|c| {
            let base = c * oversample;
            taps.iter().zip(&received[base..base + taps.len()]).map(|(&h, &r)| r * h).sum()
        })
        .collect()
}
