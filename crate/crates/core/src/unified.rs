//! Single-transform transceivers.
//!
//! After the front permutation and `t` butterfly stages of an inverse
//! transform, every aligned block of `B_t` bin lines holds a complete
//! `B_t`-point inverse transform of one evenly spaced subcarrier set. A
//! stream of size `B_t` can therefore be read off (detector) or written in
//! (multiplexer) at that cut, and one M-point network serves every stream at
//! once. Each bin line carries a bus of switch elements, one per cut, and a
//! [`TapSchedule`] says which switch is set.

use num_complex::Complex64;

use crate::allocation::{NodeId, StreamAllocation};
use crate::conventional::{join_blocks, split_blocks, NodeBlocks};
use crate::error::{Error, Result};
use crate::spectral::{bit_reverse_index, ComplexSample, DecompositionPlan, Direction, OpCount, Transform};

/// Subcarriers feeding block `d_prime` of size `2^(m-t)` after `t` splits:
/// `{ d + j 2^t }` where `d` is the `t`-bit reversal of `d_prime`.
pub fn block_subcarriers(m: u32, t: u32, d_prime: usize) -> Result<Vec<usize>> {
    if t > m {
        return Err(Error::StageOutOfRange { stage: t as usize, stages: m as usize });
    }
    if d_prime >= 1 << t {
        return Err(Error::IndexOutOfRange { index: d_prime, size: 1 << t });
    }
    let d = bit_reverse_index(d_prime, t)?;
    Ok((0..1usize << (m - t)).map(|j| d + (j << t)).collect())
}

/// Which way the schedule drives the network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Read streams out of an inverse transform fed with equalized subcarriers.
    WithFde,
    /// Read streams out of a forward transform fed with the raw time signal.
    NoFde,
    /// Write streams into an inverse transform.
    Transmit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SwitchState {
    Through,
    Exit,
}

/// How a switch in the Exit state treats the through path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Semantics {
    /// Input 1 goes to both outputs. This is the tailored element: the
    /// exited value keeps flowing downstream.
    Broadcast,
    /// Input 1 goes to Exit only and Input 2 (the idle bus) to Through.
    Strict,
}

/// A 2x2 routing element on one bin line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SwitchElement {
    pub state: SwitchState,
}

impl SwitchElement {
    /// Route `(input1, input2)` to `(through, exit)`.
    pub fn route(
        self,
        input1: ComplexSample,
        input2: ComplexSample,
        semantics: Semantics,
    ) -> (ComplexSample, ComplexSample) {
        match (self.state, semantics) {
            (SwitchState::Through, _) => (input1, input2),
            (SwitchState::Exit, Semantics::Broadcast) => (input1, input1),
            (SwitchState::Exit, Semantics::Strict) => (input2, input1),
        }
    }
}

/// Tap settings for one bin line.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LineTap {
    /// Cut at which the line's switch is set; stage 0 is right after the
    /// front permutation. `None` leaves every switch in Through.
    pub exit_stage: Option<usize>,
    /// Index into [`TapSchedule::streams`].
    pub owner: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct TapSchedule {
    variant: Variant,
    transform: Transform,
    lines: Vec<LineTap>,
    streams: Vec<StreamAllocation>,
}

impl TapSchedule {
    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn plan(&self) -> &DecompositionPlan {
        self.transform.plan()
    }

    pub fn lines(&self) -> &[LineTap] {
        &self.lines
    }

    pub fn streams(&self) -> &[StreamAllocation] {
        &self.streams
    }

    pub fn owner(&self, line: usize) -> Option<&NodeId> {
        self.lines[line].owner.map(|i| &self.streams[i].node)
    }

    /// Cut at which stream `index` is tapped.
    pub fn stream_stage(&self, index: usize) -> usize {
        self.lines[self.streams[index].bins.start].exit_stage.expect("owned line is tapped")
    }

    /// Switch states of every line at cut `stage`.
    pub fn switch_states(&self, stage: usize) -> Vec<SwitchState> {
        self.lines
            .iter()
            .map(|l| match l.exit_stage {
                Some(s) if s == stage => SwitchState::Exit,
                _ => SwitchState::Through,
            })
            .collect()
    }

    /// Switch positions instantiated: one per line per cut, `M (R + 1)`.
    pub fn switch_count(&self) -> usize {
        self.plan().size() * (self.plan().stages() + 1)
    }

    fn last_stage(&self) -> usize {
        self.lines.iter().filter_map(|l| l.exit_stage).max().unwrap_or(0)
    }
}

/// Tap schedule for `allocs` on the network described by `plan`.
///
/// A stream of size `B_t` is tapped at cut `t` of the inverse transform for
/// [`Variant::WithFde`] and [`Variant::Transmit`], and at cut `R - t` of the
/// forward transform for [`Variant::NoFde`].
pub fn build_schedule(allocs: &[StreamAllocation], plan: &DecompositionPlan, variant: Variant) -> Result<TapSchedule> {
    let m = plan.size();
    let mut lines = vec![LineTap::default(); m];
    for (index, a) in allocs.iter().enumerate() {
        if a.band_size != m {
            return Err(Error::LengthMismatch { expected: m, actual: a.band_size });
        }
        if a.bins.end > m {
            return Err(Error::IndexOutOfRange { index: a.bins.end - 1, size: m });
        }
        let stage = plan
            .exit_stage(a.bins.len())
            .ok_or_else(|| Error::InadmissibleSize { size: a.bins.len(), admissible: plan.admissible_sizes() })?;
        if a.bins.len() != a.size || a.bins.start % a.size != 0 {
            return Err(Error::MisalignedBins { start: a.bins.start, end: a.bins.end, size: a.size });
        }
        let stage = match variant {
            Variant::WithFde | Variant::Transmit => stage,
            Variant::NoFde => plan.stages() - stage,
        };
        for line in a.bins.clone() {
            if lines[line].owner.is_some() {
                return Err(Error::OverlappingLines(line));
            }
            lines[line] = LineTap { exit_stage: Some(stage), owner: Some(index) };
        }
    }
    Ok(TapSchedule {
        variant,
        transform: Transform::new(plan.clone()),
        lines,
        streams: allocs.to_vec(),
    })
}

fn expect_variant(schedule: &TapSchedule, variant: Variant, what: &'static str) -> Result<()> {
    if schedule.variant != variant {
        return Err(Error::WrongDirection(what));
    }
    Ok(())
}

/// Pass the state through the switches at cut `stage`, collecting exits.
fn tap(
    state: &mut [ComplexSample],
    schedule: &TapSchedule,
    stage: usize,
    semantics: Semantics,
    out: &mut [Vec<ComplexSample>],
) {
    for (line, (value, switch)) in state.iter_mut().zip(schedule.switch_states(stage)).enumerate() {
        let (through, exit) = SwitchElement { state: switch }.route(*value, Complex64::ZERO, semantics);
        *value = through;
        if switch == SwitchState::Exit {
            let owner = schedule.lines[line].owner.expect("tapped line has an owner");
            out[owner].push(exit);
        }
    }
}

/// Per-stream detector output aligned with `schedule.streams()`, with the
/// choice of switch semantics and a multiplication counter exposed.
pub fn unified_detect_streams(
    freq_data: &[ComplexSample],
    schedule: &TapSchedule,
    semantics: Semantics,
    ops: &mut OpCount,
) -> Result<Vec<Vec<ComplexSample>>> {
    expect_variant(schedule, Variant::WithFde, "detector needs a with-FDE schedule")?;
    let transform = &schedule.transform;
    let mut state = transform.permute(freq_data)?;
    let mut out = vec![Vec::new(); schedule.streams.len()];
    tap(&mut state, schedule, 0, semantics, &mut out);
    for stage in 1..=schedule.last_stage() {
        transform.apply_stage(&mut state, stage, Direction::Inverse, ops)?;
        tap(&mut state, schedule, stage, semantics, &mut out);
    }
    Ok(out)
}

/// Demultiplex and despread every stream with one inverse transform.
/// `freq_data` holds the equalized subcarrier values.
pub fn unified_detect(freq_data: &[ComplexSample], schedule: &TapSchedule) -> Result<NodeBlocks> {
    let streams = unified_detect_streams(freq_data, schedule, Semantics::Broadcast, &mut OpCount::default())?;
    Ok(join_blocks(streams, &schedule.streams))
}

/// Per-stream output of the forward-transform detector.
pub fn unified_detect_nofde_streams(
    time_signal: &[ComplexSample],
    schedule: &TapSchedule,
    ops: &mut OpCount,
) -> Result<Vec<Vec<ComplexSample>>> {
    expect_variant(schedule, Variant::NoFde, "forward detector needs a no-FDE schedule")?;
    let transform = &schedule.transform;
    if time_signal.len() != transform.size() {
        return Err(Error::LengthMismatch { expected: transform.size(), actual: time_signal.len() });
    }
    let stages = schedule.plan().stages();
    let mut state = time_signal.to_vec();
    let mut out = vec![Vec::new(); schedule.streams.len()];
    tap(&mut state, schedule, 0, Semantics::Broadcast, &mut out);
    for stage in 1..=schedule.last_stage() {
        // forward stage s mirrors inverse stage R + 1 - s
        transform.undo_inverse_stage(&mut state, stages + 1 - stage, ops)?;
        tap(&mut state, schedule, stage, Semantics::Broadcast, &mut out);
    }
    Ok(out)
}

/// Demultiplex every stream straight from the received time signal, without
/// equalization, using the stages of one forward transform.
pub fn unified_detect_nofde(time_signal: &[ComplexSample], schedule: &TapSchedule) -> Result<NodeBlocks> {
    let streams = unified_detect_nofde_streams(time_signal, schedule, &mut OpCount::default())?;
    Ok(join_blocks(streams, &schedule.streams))
}

/// [`unified_multiplex`] with a multiplication counter.
pub fn unified_multiplex_counted(
    blocks: &NodeBlocks,
    schedule: &TapSchedule,
    ops: &mut OpCount,
) -> Result<Vec<ComplexSample>> {
    expect_variant(schedule, Variant::Transmit, "multiplexer needs a transmit schedule")?;
    let parts = split_blocks(blocks, &schedule.streams)?;
    let transform = &schedule.transform;
    let mut state = vec![Complex64::ZERO; transform.size()];
    let stages = schedule.plan().stages();
    for stage in 0..=stages {
        if stage > 0 {
            transform.apply_stage(&mut state, stage, Direction::Inverse, ops)?;
        }
        for (index, (a, block)) in schedule.streams.iter().zip(&parts).enumerate() {
            if schedule.stream_stage(index) == stage {
                state[a.bins.clone()].copy_from_slice(block);
            }
        }
    }
    Ok(state)
}

/// Multiplex and spread every stream with one inverse transform: each block
/// is written onto its bin lines at its cut and the remaining stages run.
pub fn unified_multiplex(blocks: &NodeBlocks, schedule: &TapSchedule) -> Result<Vec<ComplexSample>> {
    unified_multiplex_counted(blocks, schedule, &mut OpCount::default())
}
