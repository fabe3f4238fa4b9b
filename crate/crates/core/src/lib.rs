//! Interleaved FDMA baseband processing.
//!
//! The crate covers the transform engine ([`spectral`]), subcarrier
//! allocation ([`allocation`]), the textbook transceiver chains
//! ([`conventional`]), the single-transform transceivers ([`unified`]),
//! the Monte-Carlo waveform experiments ([`waveform`]) and multiplier
//! accounting ([`complexity`]). [`verify`] bundles the cross-checks between
//! them into named property suites.

pub mod allocation;
pub mod complexity;
pub mod conventional;
pub mod error;
pub mod spectral;
pub mod unified;
pub mod verify;
pub mod waveform;

pub use allocation::{allocate, allocate_composite, NodeId, RequestProfile, StreamAllocation};
pub use conventional::{rx_conventional, tx_freq_domain, tx_time_domain, ChannelModel, NodeBlocks};
pub use error::{Error, Result};
pub use spectral::{ComplexSample, DecompositionPlan, Direction, Transform};
pub use unified::{build_schedule, unified_detect, unified_detect_nofde, unified_multiplex, TapSchedule, Variant};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/transform.md")]
    mod transform {}
    #[doc = include_str!("../../../book/src/allocation.md")]
    mod allocation {}
    #[doc = include_str!("../../../book/src/transceivers.md")]
    mod transceivers {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/complexity.md")]
    mod complexity {}
}
