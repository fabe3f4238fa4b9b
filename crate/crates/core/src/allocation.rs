//! Subcarrier allocation.
//!
//! Requests are packed onto contiguous *bins* from bin 0 upward in
//! descending size order; the front permutation of the transform then turns
//! each aligned bin range into an evenly spaced subcarrier set. A request
//! that is not a power of two is split into its binary expansion first, and
//! each piece is placed as its own stream.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{digit_reverse_index, DecompositionPlan};

/// Opaque node label.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub String);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Request {
    pub node: NodeId,
    pub count: usize,
}

/// Requests in arrival order against a band of `band_size` subcarriers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RequestProfile {
    pub band_size: usize,
    pub requests: Vec<Request>,
}

impl RequestProfile {
    pub fn new<I, N>(band_size: usize, requests: I) -> Self
    where
        I: IntoIterator<Item = (N, usize)>,
        N: Into<NodeId>,
    {
        Self {
            band_size,
            requests: requests
                .into_iter()
                .map(|(node, count)| Request { node: node.into(), count })
                .collect(),
        }
    }

    pub fn total(&self) -> usize {
        self.requests.iter().map(|r| r.count).sum()
    }
}

/// One IFDMA stream: `size` subcarriers spaced `band_size / size` apart
/// starting at `shift`, carried on bins `bins`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamAllocation {
    pub node: NodeId,
    pub band_size: usize,
    pub size: usize,
    pub shift: usize,
    /// Ascending, so `subcarriers[i] = shift + i * spacing`.
    pub subcarriers: Vec<usize>,
    pub bins: Range<usize>,
}

impl StreamAllocation {
    /// Place a stream on an explicit bin range.
    pub fn from_bins(node: impl Into<NodeId>, bins: Range<usize>, plan: &DecompositionPlan) -> Result<Self> {
        let size = bins.len();
        if bins.end > plan.size() {
            return Err(Error::IndexOutOfRange { index: bins.end - 1, size: plan.size() });
        }
        if plan.exit_stage(size).is_none() || size == 0 {
            return Err(Error::InadmissibleSize { size, admissible: plan.admissible_sizes() });
        }
        if bins.start % size != 0 {
            return Err(Error::MisalignedBins { start: bins.start, end: bins.end, size });
        }
        let mut subcarriers = bins
            .clone()
            .map(|b| digit_reverse_index(b, plan))
            .collect::<Result<Vec<_>>>()?;
        subcarriers.sort_unstable();
        Ok(Self {
            node: node.into(),
            band_size: plan.size(),
            size,
            shift: subcarriers[0],
            subcarriers,
            bins,
        })
    }

    /// Place a stream on an explicit subcarrier set. The set must be the
    /// image of one aligned bin block under the plan's front permutation.
    pub fn from_subcarriers(node: impl Into<NodeId>, subcarriers: &[usize], plan: &DecompositionPlan) -> Result<Self> {
        let not_a_stream = || Error::NotAStream(subcarriers.to_vec());
        let inverse = plan.reversed();
        let mut bins = subcarriers
            .iter()
            .map(|&k| digit_reverse_index(k, &inverse))
            .collect::<Result<Vec<_>>>()?;
        bins.sort_unstable();
        bins.dedup();
        if bins.is_empty() || bins.len() != subcarriers.len() {
            return Err(not_a_stream());
        }
        let (start, end) = (bins[0], bins[bins.len() - 1] + 1);
        if end - start != bins.len() {
            return Err(not_a_stream());
        }
        Self::from_bins(node, start..end, plan).map_err(|_| not_a_stream())
    }

    pub fn spacing(&self) -> usize {
        self.band_size / self.size
    }

    /// `log2` of the stream size, when it is a power of two.
    pub fn log2_size(&self) -> Option<u32> {
        self.size.is_power_of_two().then(|| self.size.trailing_zeros())
    }

    pub fn is_evenly_spaced(&self) -> bool {
        let step = self.spacing();
        self.size * step == self.band_size
            && self.shift < step
            && self.subcarriers.iter().enumerate().all(|(i, &k)| k == self.shift + i * step)
    }
}

/// All streams granted to one node, largest first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiStreamAllocation {
    pub node: NodeId,
    pub streams: Vec<StreamAllocation>,
}

impl MultiStreamAllocation {
    pub fn total(&self) -> usize {
        self.streams.iter().map(|s| s.size).sum()
    }

    /// Every subcarrier of the node, ascending.
    pub fn subcarriers(&self) -> Vec<usize> {
        let mut all: Vec<_> = self.streams.iter().flat_map(|s| s.subcarriers.iter().copied()).collect();
        all.sort_unstable();
        all
    }
}

/// Binary expansion of `n`, largest power first.
pub fn minimal_partition(n: usize) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::ZeroRequest);
    }
    Ok((0..usize::BITS).rev().map(|b| 1usize << b).filter(|&p| n & p != 0).collect())
}

/// Whether every request fits once expanded into power-of-two streams.
/// The expansion preserves the total, so this reduces to `sum <= M`.
pub fn check_feasibility(profile: &RequestProfile) -> bool {
    profile.requests.iter().all(|r| r.count > 0)
        && profile
            .requests
            .iter()
            .try_fold(0usize, |acc, r| acc.checked_add(r.count))
            .is_some_and(|total| total <= profile.band_size)
}

fn pack(
    pieces: Vec<(usize, NodeId)>,
    plan: &DecompositionPlan,
) -> Result<Vec<StreamAllocation>> {
    let mut pieces = pieces;
    // stable: equal sizes keep arrival order
    pieces.sort_by(|a, b| b.0.cmp(&a.0));
    let mut next = 0;
    let mut out = Vec::with_capacity(pieces.len());
    for (size, node) in pieces {
        out.push(StreamAllocation::from_bins(node, next..next + size, plan)?);
        next += size;
    }
    Ok(out)
}

fn check_requests(profile: &RequestProfile) -> Result<()> {
    if profile.requests.iter().any(|r| r.count == 0) {
        return Err(Error::ZeroRequest);
    }
    if !check_feasibility(profile) {
        return Err(Error::Infeasible { requested: profile.total(), available: profile.band_size });
    }
    Ok(())
}

/// Bit-reversal allocation on a power-of-two band. Returns one entry per
/// stream, in bin order.
pub fn allocate(profile: &RequestProfile) -> Result<Vec<StreamAllocation>> {
    if !profile.band_size.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(profile.band_size));
    }
    check_requests(profile)?;
    let plan = DecompositionPlan::radix2(profile.band_size.trailing_zeros());
    let mut pieces = Vec::new();
    for r in &profile.requests {
        for size in minimal_partition(r.count)? {
            pieces.push((size, r.node.clone()));
        }
    }
    pack(pieces, &plan)
}

/// [`allocate`], grouped per node in request order.
pub fn allocate_multi(profile: &RequestProfile) -> Result<Vec<MultiStreamAllocation>> {
    Ok(group_by_node(&allocate(profile)?))
}

/// Group streams per node, nodes in order of first appearance.
pub fn group_by_node(streams: &[StreamAllocation]) -> Vec<MultiStreamAllocation> {
    let mut out: Vec<MultiStreamAllocation> = Vec::new();
    for s in streams {
        match out.iter_mut().find(|g| g.node == s.node) {
            Some(g) => g.streams.push(s.clone()),
            None => out.push(MultiStreamAllocation { node: s.node.clone(), streams: vec![s.clone()] }),
        }
    }
    out
}

/// Digit-reversal allocation under a mixed-radix plan. Each request must be
/// a single admissible stream size; no splitting is attempted.
pub fn allocate_composite(profile: &RequestProfile, plan: &DecompositionPlan) -> Result<Vec<StreamAllocation>> {
    if profile.band_size != plan.size() {
        return Err(Error::LengthMismatch { expected: plan.size(), actual: profile.band_size });
    }
    check_requests(profile)?;
    let admissible = plan.admissible_sizes();
    if let Some(r) = profile.requests.iter().find(|r| !admissible.contains(&r.count)) {
        return Err(Error::InadmissibleSize { size: r.count, admissible });
    }
    pack(profile.requests.iter().map(|r| (r.count, r.node.clone())).collect(), plan)
}
