//! Monte-Carlo waveform experiments: QPSK framing, cyclic prefix, pulse
//! shaping, PAPR statistics, clipping and bit error rate over AWGN.

pub mod experiment;
pub mod packet;
pub mod pulse;
pub mod qpsk;

pub use experiment::{
    chip_noise_variance, clip, mean_power, papr_db, run_ber, run_ccdf, BerCurve, BerPoint, CcdfCurve, CcdfRun,
};
pub use packet::{build_packet, ExperimentConfig, Layout, Modulator, Scheme, StreamGain, DEFAULT_SEED};
pub use pulse::{rrc_taps, Pulse};
pub use qpsk::{qpsk_ber_theory, qpsk_demap, qpsk_map};
