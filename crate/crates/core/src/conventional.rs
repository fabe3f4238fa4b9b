//! Textbook IFDMA transceiver chains.
//!
//! The transmitter exists in two equivalent forms: the time-domain
//! repeat-and-rotate form and the frequency-domain spread-map-transform form.
//! The receiver transforms the whole band, equalizes every subcarrier with one
//! tap, then extracts each stream and inverts its spreading separately.

use std::collections::BTreeMap;

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::allocation::{NodeId, StreamAllocation};
use crate::error::{Error, Result};
use crate::spectral::{ComplexSample, Direction, Transform};

/// Symbol blocks keyed by node. A node owning several streams has one block
/// whose length is the sum of its stream sizes; the block is consumed by its
/// streams in allocation order.
pub type NodeBlocks = BTreeMap<NodeId, Vec<ComplexSample>>;

/// `x'[l] = (N/M) e^{j 2 pi l d / M} x[l mod N]`.
pub fn tx_time_domain(block: &[ComplexSample], band_size: usize, shift: usize) -> Result<Vec<ComplexSample>> {
    let n = block.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if band_size % n != 0 {
        return Err(Error::NotDivisible { len: band_size, divisor: n });
    }
    if shift >= band_size / n {
        return Err(Error::ShiftOutOfRange { shift, limit: band_size / n });
    }
    let amplitude = n as f64 / band_size as f64;
    Ok((0..band_size)
        .map(|l| {
            let phase = ((l * shift) % band_size) as f64 / band_size as f64;
            Complex64::from_polar(amplitude, TAU * phase) * block[l % n]
        })
        .collect())
}

fn check_block(block: &[ComplexSample], alloc: &StreamAllocation) -> Result<()> {
    if block.len() != alloc.size {
        return Err(Error::LengthMismatch { expected: alloc.size, actual: block.len() });
    }
    Ok(())
}

/// N-point forward transform, map bin `i` to subcarrier `d + i M/N`, M-point
/// inverse transform.
pub fn tx_freq_domain(block: &[ComplexSample], alloc: &StreamAllocation) -> Result<Vec<ComplexSample>> {
    check_block(block, alloc)?;
    let spread = Transform::for_len(alloc.size)?.run(block, Direction::Forward)?;
    let mut spectrum = vec![Complex64::ZERO; alloc.band_size];
    for (&k, &v) in alloc.subcarriers.iter().zip(&spread) {
        spectrum[k] = v;
    }
    Transform::for_len(alloc.band_size)?.run(&spectrum, Direction::Inverse)
}

/// Split per-node blocks into per-stream blocks aligned with `allocs`.
pub fn split_blocks<'a>(blocks: &'a NodeBlocks, allocs: &[StreamAllocation]) -> Result<Vec<&'a [ComplexSample]>> {
    let mut offsets: BTreeMap<&NodeId, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(allocs.len());
    for a in allocs {
        let block = blocks.get(&a.node).ok_or_else(|| Error::MissingBlock(a.node.to_string()))?;
        let offset = offsets.entry(&a.node).or_insert(0);
        let end = *offset + a.size;
        if end > block.len() {
            return Err(Error::LengthMismatch { expected: end, actual: block.len() });
        }
        out.push(&block[*offset..end]);
        *offset = end;
    }
    for (node, &used) in &offsets {
        if used != blocks[*node].len() {
            return Err(Error::LengthMismatch { expected: used, actual: blocks[*node].len() });
        }
    }
    Ok(out)
}

/// Inverse of [`split_blocks`].
pub fn join_blocks(streams: Vec<Vec<ComplexSample>>, allocs: &[StreamAllocation]) -> NodeBlocks {
    let mut out = NodeBlocks::new();
    for (a, s) in allocs.iter().zip(streams) {
        out.entry(a.node.clone()).or_default().extend(s);
    }
    out
}

/// Superposition of every stream's time-domain signal.
pub fn tx_aggregate(blocks: &NodeBlocks, allocs: &[StreamAllocation]) -> Result<Vec<ComplexSample>> {
    let band = allocs.first().map(|a| a.band_size).ok_or(Error::EmptyInput)?;
    let mut sum = vec![Complex64::ZERO; band];
    for (a, block) in allocs.iter().zip(split_blocks(blocks, allocs)?) {
        for (acc, v) in sum.iter_mut().zip(tx_time_domain(block, band, a.shift)?) {
            *acc += v;
        }
    }
    Ok(sum)
}

/// A linear time-invariant channel applied to one cyclic-prefixed body, so
/// its action on the body is circular convolution.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelModel {
    taps: Vec<ComplexSample>,
    response: Vec<ComplexSample>,
}

impl ChannelModel {
    pub fn identity(band_size: usize) -> Self {
        Self {
            taps: vec![Complex64::ONE],
            response: vec![Complex64::ONE; band_size],
        }
    }

    pub fn from_taps(taps: Vec<ComplexSample>, band_size: usize) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::EmptyInput);
        }
        if taps.len() > band_size {
            return Err(Error::LengthMismatch { expected: band_size, actual: taps.len() });
        }
        let mut padded = taps.clone();
        padded.resize(band_size, Complex64::ZERO);
        let response = Transform::for_len(band_size)?.run(&padded, Direction::Forward)?;
        Ok(Self { taps, response })
    }

    pub fn taps(&self) -> &[ComplexSample] {
        &self.taps
    }

    pub fn frequency_response(&self) -> &[ComplexSample] {
        &self.response
    }

    pub fn apply_circular(&self, signal: &[ComplexSample]) -> Result<Vec<ComplexSample>> {
        let m = self.response.len();
        if signal.len() != m {
            return Err(Error::LengthMismatch { expected: m, actual: signal.len() });
        }
        Ok((0..m)
            .map(|l| {
                self.taps
                    .iter()
                    .enumerate()
                    .map(|(i, &h)| h * signal[(l + m - i) % m])
                    .sum()
            })
            .collect())
    }
}

/// Zero-forcing equalization of `spectrum` on every subcarrier used by
/// `allocs`. Unused subcarriers are left as they are.
pub fn equalize(
    spectrum: &mut [ComplexSample],
    allocs: &[StreamAllocation],
    channel: &ChannelModel,
) -> Result<()> {
    let h = channel.frequency_response();
    if h.len() != spectrum.len() {
        return Err(Error::LengthMismatch { expected: spectrum.len(), actual: h.len() });
    }
    // gains this far below the strongest one are numerical zeros
    let floor = h.iter().map(|v| v.norm()).fold(0.0, f64::max) * 1e-12;
    for &k in allocs.iter().flat_map(|a| a.subcarriers.iter()) {
        if h[k].norm() <= floor {
            return Err(Error::ZeroChannelGain(k));
        }
        spectrum[k] /= h[k];
    }
    Ok(())
}

/// Per-stream output of the receiver chain, aligned with `allocs`.
pub fn rx_streams(
    signal: &[ComplexSample],
    allocs: &[StreamAllocation],
    channel: &ChannelModel,
) -> Result<Vec<Vec<ComplexSample>>> {
    let band = signal.len();
    if let Some(a) = allocs.iter().find(|a| a.band_size != band) {
        return Err(Error::LengthMismatch { expected: a.band_size, actual: band });
    }
    let mut spectrum = Transform::for_len(band)?.run(signal, Direction::Forward)?;
    equalize(&mut spectrum, allocs, channel)?;
    allocs
        .iter()
        .map(|a| {
            let picked: Vec<_> = a.subcarriers.iter().map(|&k| spectrum[k]).collect();
            Transform::for_len(a.size)?.run(&picked, Direction::Inverse)
        })
        .collect()
}

/// Forward transform, one-tap equalization, per-stream extraction and
/// N-point inverse transform.
pub fn rx_conventional(
    signal: &[ComplexSample],
    allocs: &[StreamAllocation],
    channel: &ChannelModel,
) -> Result<NodeBlocks> {
    Ok(join_blocks(rx_streams(signal, allocs, channel)?, allocs))
}
