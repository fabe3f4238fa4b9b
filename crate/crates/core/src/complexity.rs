//! Multiplier and switch accounting.
//!
//! Counts are deployed hardware: a transmitter that must be able to serve
//! every stream size carries one N-point transform per size (or per
//! possible concurrent stream), whether or not a given frame uses it. An
//! N-point radix-2 transform costs `(N/2) log2 N` complex multipliers.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum System {
    Single,
    Multi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Link {
    Uplink,
    Downlink,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Role {
    TxTime,
    TxFreq,
    RxConventional,
    UnifiedTx,
    UnifiedWithFde,
    UnifiedNoFde,
}

impl Role {
    pub const ALL: [Role; 6] = [
        Role::TxTime,
        Role::TxFreq,
        Role::RxConventional,
        Role::UnifiedTx,
        Role::UnifiedWithFde,
        Role::UnifiedNoFde,
    ];

    pub fn is_unified(self) -> bool {
        matches!(self, Role::UnifiedTx | Role::UnifiedWithFde | Role::UnifiedNoFde)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::TxTime => "tx-time",
            Role::TxFreq => "tx-freq",
            Role::RxConventional => "rx-conventional",
            Role::UnifiedTx => "unified-tx",
            Role::UnifiedWithFde => "unified-rx-fde",
            Role::UnifiedNoFde => "unified-rx-nofde",
        })
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            System::Single => "single",
            System::Multi => "multi",
        })
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Link::Uplink => "UL",
            Link::Downlink => "DL",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Scenario {
    pub system: System,
    pub link: Link,
    pub role: Role,
}

impl Scenario {
    pub fn new(system: System, link: Link, role: Role) -> Self {
        Self { system, link, role }
    }

    /// Every combination, in table order.
    pub fn all() -> Vec<Scenario> {
        let mut out = Vec::new();
        for system in [System::Single, System::Multi] {
            for link in [Link::Uplink, Link::Downlink] {
                for role in Role::ALL {
                    out.push(Scenario { system, link, role });
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub scenario: Scenario,
    pub size: usize,
    pub exact_multipliers: u64,
    /// The closed-form table entry evaluated at `size`.
    pub approx_value: f64,
    pub approx_formula: &'static str,
    /// Per-line tapping buses, one switch per line per cut: `M (m + 1)`.
    pub switch_count: Option<u64>,
    /// The alternative `M (m + 1) / 2` figure, reported alongside.
    pub switch_count_half: Option<u64>,
}

fn log2_of(size: usize) -> Result<u32> {
    if size < 2 || !size.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(size));
    }
    Ok(size.trailing_zeros())
}

/// `(N/2) log2 N`.
pub fn transform_multipliers(n: u64) -> u64 {
    n / 2 * u64::from(n.trailing_zeros())
}

/// One N-point transform for every `N = 2^n`, `n = 1..m`, plus the shared
/// M-point transform.
pub fn single_stream_exact(size: usize) -> Result<u64> {
    let m = log2_of(size)?;
    let spread: u64 = (1..=m).map(|n| transform_multipliers(1 << n)).sum();
    Ok(spread + transform_multipliers(size as u64))
}

/// `M/N` N-point transforms for every `N = 2^n`, `n = 1..m`, plus the shared
/// M-point transform.
pub fn multi_stream_exact(size: usize) -> Result<u64> {
    let m = log2_of(size)?;
    let big = size as u64;
    let spread: u64 = (1..=m).map(|n| (big >> n) * transform_multipliers(1 << n)).sum();
    Ok(spread + transform_multipliers(big))
}

/// `(1/4) M m^2 + (3/4) M m`: the exact closed form of [`multi_stream_exact`].
pub fn multi_stream_closed_form(size: usize) -> Result<f64> {
    let m = f64::from(log2_of(size)?);
    let big = size as f64;
    Ok(0.25 * big * m * m + 0.75 * big * m)
}

/// `(3/2) M m`.
pub fn single_stream_approx(size: usize) -> Result<f64> {
    let m = f64::from(log2_of(size)?);
    Ok(1.5 * size as f64 * m)
}

/// `(1/4) M m^2 + (1/2) M m`, the published approximation. It falls short
/// of the exact sum by `M m / 4`.
pub fn multi_stream_approx(size: usize) -> Result<f64> {
    let m = f64::from(log2_of(size)?);
    let big = size as f64;
    Ok(0.25 * big * m * m + 0.5 * big * m)
}

const SINGLE_FORM: &str = "3/2 M log2 M";
const MULTI_FORM: &str = "1/4 M log2^2 M + 1/2 M log2 M";
const SINGLE_DL_RX_FORM: &str = "M log2 M + 1/2 M log2 M";

/// Multiplier (and, for the unified designs, switch) count of one scenario.
pub fn count(scenario: Scenario, size: usize) -> Result<ComplexityReport> {
    let m = log2_of(size)?;
    let big = size as u64;
    let half = transform_multipliers(big);
    let multi = scenario.system == System::Multi || scenario.link == Link::Downlink;
    let (exact, approx, formula) = match scenario.role {
        Role::TxTime if multi => (big * big, (big * big) as f64, "M^2"),
        Role::TxTime => (big, big as f64, "M"),
        Role::TxFreq if multi => (multi_stream_exact(size)?, multi_stream_approx(size)?, MULTI_FORM),
        Role::TxFreq => (single_stream_exact(size)?, single_stream_approx(size)?, SINGLE_FORM),
        // a single-stream downlink node despreads only its own stream, so it
        // needs one transform per size
        Role::RxConventional if scenario.system == System::Single && scenario.link == Link::Downlink => {
            (single_stream_exact(size)?, single_stream_approx(size)?, SINGLE_DL_RX_FORM)
        }
        Role::RxConventional => (multi_stream_exact(size)?, multi_stream_approx(size)?, MULTI_FORM),
        Role::UnifiedTx => (half, half as f64, "1/2 M log2 M"),
        Role::UnifiedNoFde => (half, half as f64, "1/2 M log2 M"),
        Role::UnifiedWithFde => (2 * half, (2 * half) as f64, "1/2 M log2 M + 1/2 M log2 M"),
    };
    let switches = u64::from(m + 1) * big;
    let unified = scenario.role.is_unified();
    Ok(ComplexityReport {
        scenario,
        size,
        exact_multipliers: exact,
        approx_value: approx,
        approx_formula: formula,
        switch_count: unified.then_some(switches),
        switch_count_half: unified.then_some(switches / 2),
    })
}

/// Conventional against unified designs for the multi-stream downlink.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub size: usize,
    pub log2_size: u32,
    pub conventional_tx: u64,
    pub conventional_rx: u64,
    pub unified_tx: u64,
    pub unified_rx_fde: u64,
    pub unified_rx_nofde: u64,
    /// Conventional receiver over one unified transform.
    pub rx_ratio: f64,
    /// Conventional receiver over the unified receiver including its
    /// equalization front transform.
    pub rx_ratio_with_fde: f64,
    pub tx_ratio: f64,
    /// `log2 M / 3`.
    pub threshold: f64,
}

impl ComparisonRow {
    pub fn meets_threshold(&self) -> bool {
        self.rx_ratio > self.threshold && self.tx_ratio > self.threshold
    }
}

pub fn compare(sizes: &[usize]) -> Result<Vec<ComparisonRow>> {
    sizes
        .iter()
        .map(|&size| {
            let get = |role| count(Scenario::new(System::Multi, Link::Downlink, role), size).map(|r| r.exact_multipliers);
            let conventional_tx = get(Role::TxFreq)?;
            let conventional_rx = get(Role::RxConventional)?;
            let unified_tx = get(Role::UnifiedTx)?;
            let unified_rx_fde = get(Role::UnifiedWithFde)?;
            let unified_rx_nofde = get(Role::UnifiedNoFde)?;
            let log2_size = size.trailing_zeros();
            Ok(ComparisonRow {
                size,
                log2_size,
                conventional_tx,
                conventional_rx,
                unified_tx,
                unified_rx_fde,
                unified_rx_nofde,
                rx_ratio: conventional_rx as f64 / unified_rx_nofde as f64,
                rx_ratio_with_fde: conventional_rx as f64 / unified_rx_fde as f64,
                tx_ratio: conventional_tx as f64 / unified_tx as f64,
                threshold: f64::from(log2_size) / 3.0,
            })
        })
        .collect()
}

/// Remarks printed under the tables.
pub fn footnotes(size: usize) -> Result<Vec<String>> {
    let m = log2_of(size)?;
    let big = size as f64;
    Ok(vec![
        format!(
            "The many-transform sum closes to 1/4 M m^2 + 3/4 M m = {}; the 1/4 M m^2 + 1/2 M m approximation ({}) drops M m / 4 = {}.",
            multi_stream_closed_form(size)?,
            multi_stream_approx(size)?,
            big * f64::from(m) / 4.0
        ),
        format!(
            "Single-stream downlink receiver: \"{SINGLE_DL_RX_FORM}\" and \"{SINGLE_FORM}\" are the same quantity; the exact sum is {}.",
            single_stream_exact(size)?
        ),
        format!(
            "Tapping-bus switches: M (m + 1) = {} with one bus per line; the halved figure M (m + 1) / 2 = {} is shown for reference.",
            (m as usize + 1) * size,
            (m as usize + 1) * size / 2
        ),
        "The unified receiver with equalization needs a forward and an inverse transform; without equalization it needs the forward transform only.".to_owned(),
    ])
}
