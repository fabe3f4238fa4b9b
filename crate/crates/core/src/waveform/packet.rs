//! Experiment configuration and packet synthesis.

use std::fmt;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::allocation::{allocate, NodeId, RequestProfile};
use crate::conventional::NodeBlocks;
use crate::error::{Error, Result};
use crate::spectral::{ComplexSample, DecompositionPlan, Direction, Transform};
use crate::unified::{build_schedule, unified_detect_nofde_streams, unified_multiplex, TapSchedule, Variant};
use crate::waveform::pulse::{rectangular_taps, rrc_taps, shape_same, Pulse};
use crate::waveform::qpsk::{qpsk_demap, qpsk_map};
use crate::spectral::OpCount;

/// Master seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_190_417;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// One or more IFDMA streams from the binary expansion of `N`.
    MultiIfdma,
    /// DFT-spread block of contiguous subcarriers.
    Lfdma,
    /// Symbols straight onto scattered subcarriers.
    Ofdma,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::MultiIfdma, Scheme::Lfdma, Scheme::Ofdma];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::MultiIfdma => "multi-ifdma",
            Scheme::Lfdma => "lfdma",
            Scheme::Ofdma => "ofdma",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Relative amplitude of the streams of a Multi-IFDMA user.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StreamGain {
    /// Every stream is its own repeat-and-rotate signal with amplitude
    /// `N_i / M`, so a stream's power grows with its size.
    #[default]
    Natural,
    /// Every data symbol carries the same energy regardless of the stream it
    /// rides on.
    EqualSymbolEnergy,
}

/// One Monte-Carlo experiment: a scheme, a band and a request size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    #[serde(rename = "M")]
    pub band_size: usize,
    #[serde(rename = "N")]
    pub subcarriers: usize,
    pub scheme: Scheme,
    pub rrc_beta: f64,
    pub rrc_span_symbols: usize,
    pub oversample: usize,
    pub ofdm_symbols_per_packet: usize,
    /// Chips per OFDM symbol including the cyclic prefix. Defaults to
    /// `M + M/4`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_per_ofdm_symbol_with_cp: Option<usize>,
    pub packets: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clipping_alpha: Option<f64>,
    pub snr_db_grid: Vec<f64>,
    pub master_seed: u64,
    pub stream_gain: StreamGain,
    pub pulse: Pulse,
    /// A BER point stops once this many bit errors are seen...
    pub ber_min_errors: u64,
    /// ...or this many bits are sent.
    pub ber_max_bits: u64,
    /// Packets simulated between stopping-rule checks.
    pub ber_batch_packets: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            band_size: 16,
            subcarriers: 4,
            scheme: Scheme::MultiIfdma,
            rrc_beta: 0.5,
            rrc_span_symbols: 20,
            oversample: 10,
            ofdm_symbols_per_packet: 10,
            samples_per_ofdm_symbol_with_cp: None,
            packets: 10_000,
            clipping_alpha: None,
            snr_db_grid: vec![0.0, 2.0, 4.0, 6.0, 8.0],
            master_seed: DEFAULT_SEED,
            stream_gain: StreamGain::Natural,
            pulse: Pulse::Rrc,
            ber_min_errors: 200,
            ber_max_bits: 20_000_000,
            ber_batch_packets: 32,
        }
    }
}

impl ExperimentConfig {
    pub fn chips_per_symbol(&self) -> usize {
        self.samples_per_ofdm_symbol_with_cp
            .unwrap_or(self.band_size + self.band_size / 4)
    }

    pub fn cp_len(&self) -> usize {
        self.chips_per_symbol() - self.band_size
    }

    pub fn chips_per_packet(&self) -> usize {
        self.chips_per_symbol() * self.ofdm_symbols_per_packet
    }

    /// Samples per packet after oversampling.
    pub fn samples_per_packet(&self) -> usize {
        self.chips_per_packet() * self.oversample
    }

    pub fn bits_per_packet(&self) -> usize {
        2 * self.subcarriers * self.ofdm_symbols_per_packet
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.band_size == 0 {
            return bad("M must be positive".into());
        }
        if self.subcarriers == 0 || self.subcarriers > self.band_size {
            return bad(format!("N = {} must be in 1..={}", self.subcarriers, self.band_size));
        }
        if self.scheme == Scheme::MultiIfdma && !self.band_size.is_power_of_two() {
            return bad(format!("multi-ifdma needs a power-of-two M, got {}", self.band_size));
        }
        if !(self.rrc_beta > 0.0 && self.rrc_beta <= 1.0) {
            return bad(format!("rrc_beta = {} must be in (0, 1]", self.rrc_beta));
        }
        if self.oversample == 0 || self.rrc_span_symbols == 0 {
            return bad("oversample and rrc_span_symbols must be positive".into());
        }
        if self.ofdm_symbols_per_packet == 0 || self.packets == 0 {
            return bad("ofdm_symbols_per_packet and packets must be positive".into());
        }
        if self.chips_per_symbol() < self.band_size {
            return bad(format!(
                "samples_per_ofdm_symbol_with_cp = {} is shorter than M = {}",
                self.chips_per_symbol(),
                self.band_size
            ));
        }
        if let Some(alpha) = self.clipping_alpha {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return bad(format!("clipping_alpha = {alpha} must be positive"));
            }
        }
        if self.snr_db_grid.iter().any(|v| !v.is_finite()) {
            return bad("snr_db_grid entries must be finite".into());
        }
        if self.ber_batch_packets == 0 {
            return bad("ber_batch_packets must be positive".into());
        }
        Ok(())
    }

    pub fn taps(&self) -> Result<Vec<f64>> {
        match self.pulse {
            Pulse::Rrc => rrc_taps(self.rrc_beta, self.rrc_span_symbols, self.oversample),
            Pulse::Rectangular => Ok(rectangular_taps(self.oversample)),
        }
    }
}

/// Subcarrier placement used by one packet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Layout {
    /// The fixed bit-reversal allocation.
    Streams,
    /// First subcarrier of the contiguous block.
    Contiguous(usize),
    /// Subcarrier carrying each symbol, in symbol order.
    Scattered(Vec<usize>),
}

/// Per-scheme mapping between a block of `N` data symbols and one `M`-sample
/// body. Every scheme is scaled so that each occupied subcarrier carries
/// unit-variance data, except Multi-IFDMA under [`StreamGain::Natural`].
#[derive(Clone, Debug)]
pub struct Modulator {
    scheme: Scheme,
    band_size: usize,
    subcarriers: usize,
    band: Transform,
    spread: Transform,
    tx: Option<TapSchedule>,
    rx: Option<TapSchedule>,
    gains: Vec<f64>,
}

const USER: &str = "user";

impl Modulator {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let (m, n) = (config.band_size, config.subcarriers);
        let (mut tx, mut rx, mut gains) = (None, None, Vec::new());
        if config.scheme == Scheme::MultiIfdma {
            let allocs = allocate(&RequestProfile::new(m, [(USER, n)]))?;
            let plan = DecompositionPlan::radix2(m.trailing_zeros());
            gains = allocs
                .iter()
                .map(|a| match config.stream_gain {
                    StreamGain::Natural => 1.0,
                    StreamGain::EqualSymbolEnergy => 1.0 / (a.size as f64).sqrt(),
                })
                .collect();
            tx = Some(build_schedule(&allocs, &plan, Variant::Transmit)?);
            rx = Some(build_schedule(&allocs, &plan, Variant::NoFde)?);
        }
        Ok(Self {
            scheme: config.scheme,
            band_size: m,
            subcarriers: n,
            band: Transform::for_len(m)?,
            spread: Transform::for_len(n)?,
            tx,
            rx,
            gains,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Draw the subcarriers for one packet.
    pub fn draw_layout<R: Rng + ?Sized>(&self, rng: &mut R) -> Layout {
        match self.scheme {
            Scheme::MultiIfdma => Layout::Streams,
            Scheme::Lfdma => Layout::Contiguous(rng.random_range(0..=self.band_size - self.subcarriers)),
            Scheme::Ofdma => Layout::Scattered(sample(rng, self.band_size, self.subcarriers).into_vec()),
        }
    }

    fn occupied(&self, layout: &Layout) -> Vec<usize> {
        match layout {
            Layout::Contiguous(start) => (*start..*start + self.subcarriers).collect(),
            Layout::Scattered(list) => list.clone(),
            Layout::Streams => Vec::new(),
        }
    }

    /// Body samples for one block of `N` symbols.
    pub fn modulate(&self, layout: &Layout, symbols: &[ComplexSample]) -> Result<Vec<ComplexSample>> {
        if symbols.len() != self.subcarriers {
            return Err(Error::LengthMismatch { expected: self.subcarriers, actual: symbols.len() });
        }
        if let Some(schedule) = &self.tx {
            let mut block = Vec::with_capacity(self.subcarriers);
            let mut rest = symbols;
            for (a, &g) in schedule.streams().iter().zip(&self.gains) {
                let (head, tail) = rest.split_at(a.size);
                block.extend(head.iter().map(|&s| s * g));
                rest = tail;
            }
            let mut blocks = NodeBlocks::new();
            blocks.insert(NodeId::from(USER), block);
            return unified_multiplex(&blocks, schedule);
        }
        let values = match self.scheme {
            Scheme::Lfdma => {
                let scale = 1.0 / (self.subcarriers as f64).sqrt();
                let mut v = self.spread.run(symbols, Direction::Forward)?;
                v.iter_mut().for_each(|x| *x *= scale);
                v
            }
            _ => symbols.to_vec(),
        };
        let mut spectrum = vec![Complex64::ZERO; self.band_size];
        for (k, v) in self.occupied(layout).into_iter().zip(values) {
            spectrum[k] = v;
        }
        self.band.run(&spectrum, Direction::Inverse)
    }

    /// Symbol estimates from one received body, up to a per-stream positive
    /// scale that leaves quadrant decisions unchanged.
    pub fn demodulate(&self, layout: &Layout, body: &[ComplexSample]) -> Result<Vec<ComplexSample>> {
        if let Some(schedule) = &self.rx {
            let streams = unified_detect_nofde_streams(body, schedule, &mut OpCount::default())?;
            return Ok(streams.into_iter().flatten().collect());
        }
        let spectrum = self.band.run(body, Direction::Forward)?;
        let picked: Vec<_> = self.occupied(layout).into_iter().map(|k| spectrum[k]).collect();
        match self.scheme {
            Scheme::Lfdma => self.spread.run(&picked, Direction::Inverse),
            _ => Ok(picked),
        }
    }
}

/// Everything drawn and computed for one packet before the pulse shaper.
#[derive(Clone, Debug)]
pub struct PacketDraw {
    pub bits: Vec<bool>,
    pub layout: Layout,
    /// Cyclic-prefixed bodies back to back, one sample per chip.
    pub chips: Vec<ComplexSample>,
}

/// Draw bits and allocation, modulate every OFDM symbol and prepend its
/// cyclic prefix.
pub fn draw_packet<R: Rng + ?Sized>(config: &ExperimentConfig, modulator: &Modulator, rng: &mut R) -> Result<PacketDraw> {
    let layout = modulator.draw_layout(rng);
    let bits: Vec<bool> = (0..config.bits_per_packet()).map(|_| rng.random()).collect();
    let symbols = qpsk_map(&bits)?;
    let cp = config.cp_len();
    let mut chips = Vec::with_capacity(config.chips_per_packet());
    for block in symbols.chunks(config.subcarriers) {
        let body = modulator.modulate(&layout, block)?;
        chips.extend_from_slice(&body[body.len() - cp..]);
        chips.extend_from_slice(&body);
    }
    Ok(PacketDraw { bits, layout, chips })
}

/// Bits recovered from matched-filter chip samples of one packet.
pub fn recover_bits(config: &ExperimentConfig, modulator: &Modulator, layout: &Layout, chips: &[ComplexSample]) -> Result<Vec<bool>> {
    let per = config.chips_per_symbol();
    let cp = config.cp_len();
    let mut bits = Vec::with_capacity(config.bits_per_packet());
    for symbol in chips.chunks(per) {
        bits.extend(qpsk_demap(&modulator.demodulate(layout, &symbol[cp..])?));
    }
    Ok(bits)
}

/// One oversampled, pulse-shaped packet of `samples_per_packet()` samples.
pub fn build_packet<R: Rng + ?Sized>(config: &ExperimentConfig, rng: &mut R) -> Result<Vec<ComplexSample>> {
    let modulator = Modulator::new(config)?;
    let draw = draw_packet(config, &modulator, rng)?;
    Ok(shape_same(&draw.chips, &config.taps()?, config.oversample))
}
