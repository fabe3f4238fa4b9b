//! Named property suites that cross-check every fast path against an
//! independent oracle. The command-line `verify` subcommand prints these.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::allocation::{allocate, allocate_composite, minimal_partition, RequestProfile, StreamAllocation};
use crate::complexity::{count, Link, Role, Scenario, System};
use crate::conventional::{rx_streams, split_blocks, tx_freq_domain, tx_time_domain, ChannelModel, NodeBlocks};
use crate::spectral::{
    bit_reverse_index, dft_naive, digit_reverse_index, ComplexSample, DecompositionPlan, Direction, OpCount,
    Transform,
};
use crate::unified::{
    build_schedule, block_subcarriers, unified_detect_nofde_streams, unified_detect_streams, unified_multiplex,
    unified_multiplex_counted, Semantics, Variant,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scope {
    All,
    Spectral,
    Transceiver,
    IndexLaw,
    Allocation,
}

impl Scope {
    pub const NAMES: [&'static str; 5] = ["all", "spectral", "transceiver", "prop2", "allocation"];

    fn includes(self, other: Scope) -> bool {
        self == Scope::All || self == other
    }
}

impl FromStr for Scope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(Scope::All),
            "spectral" => Ok(Scope::Spectral),
            "transceiver" => Ok(Scope::Transceiver),
            "prop2" => Ok(Scope::IndexLaw),
            "allocation" => Ok(Scope::Allocation),
            other => Err(format!("unknown scope '{other}', expected one of {}", Scope::NAMES.join(", "))),
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Scope::All => "all",
            Scope::Spectral => "spectral",
            Scope::Transceiver => "transceiver",
            Scope::IndexLaw => "prop2",
            Scope::Allocation => "allocation",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Random instances per size for the randomized properties.
    pub trials: usize,
    pub seed: u64,
    /// Run the transform suites against a transform with flipped twiddle
    /// signs, to show that the suite catches it.
    pub corrupt_twiddles: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { trials: 1000, seed: 7, corrupt_twiddles: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyOutcome {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    /// Short summary: worst error seen, instances checked.
    pub detail: String,
    pub counterexample: Option<String>,
}

impl fmt::Display for PropertyOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{mark} {}/{}: {}", self.suite, self.name, self.detail)?;
        if let Some(c) = &self.counterexample {
            write!(f, "\n    counterexample: {c}")?;
        }
        Ok(())
    }
}

type Check = std::result::Result<String, (String, String)>;

fn outcome(suite: &'static str, name: &'static str, check: Check) -> PropertyOutcome {
    match check {
        Ok(detail) => PropertyOutcome { suite, name, passed: true, detail, counterexample: None },
        Err((detail, example)) => PropertyOutcome {
            suite,
            name,
            passed: false,
            detail,
            counterexample: Some(example),
        },
    }
}

/// Run every property in `scope`.
pub fn run(scope: Scope, options: &VerifyOptions) -> Vec<PropertyOutcome> {
    let mut out = Vec::new();
    if scope.includes(Scope::Spectral) {
        let s = "spectral";
        out.push(outcome(s, "oracle-equivalence", oracle_equivalence(options)));
        out.push(outcome(s, "permutation-involution", permutation_involution()));
        out.push(outcome(s, "parseval", parseval(options)));
        out.push(outcome(s, "stage-composition", stage_composition(options)));
        out.push(outcome(s, "per-block-inverse", per_block_inverse(options)));
        out.push(outcome(s, "ordering-count", ordering_count()));
    }
    if scope.includes(Scope::IndexLaw) {
        out.push(outcome("prop2", "index-law-exhaustive", index_law_exhaustive(6, options)));
    }
    if scope.includes(Scope::Transceiver) {
        let s = "transceiver";
        out.push(outcome(s, "transmitter-equivalence", transmitter_equivalence(options)));
        out.push(outcome(s, "detector-equivalence", detector_equivalence(options)));
        out.push(outcome(s, "three-node-scenario", three_node_scenario()));
        out.push(outcome(s, "contamination-harmless", contamination(options)));
        out.push(outcome(s, "duality", duality(options)));
        out.push(outcome(s, "channel-round-trip", channel_round_trip(options)));
        out.push(outcome(s, "energy", energy(options)));
        out.push(outcome(s, "switch-count", switch_count()));
        out.push(outcome(s, "multiplier-count", multiplier_count()));
    }
    if scope.includes(Scope::Allocation) {
        let s = "allocation";
        out.push(outcome(s, "even-spacing-exhaustive", even_spacing_exhaustive(32)));
        out.push(outcome(s, "partition-minimality", partition_minimality(4096)));
        out.push(outcome(s, "worked-examples", allocation_examples()));
    }
    out
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<ComplexSample> {
    (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect()
}

fn inf_norm(x: &[ComplexSample]) -> f64 {
    x.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn max_diff(a: &[ComplexSample], b: &[ComplexSample]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn dump(x: &[ComplexSample]) -> String {
    let shown: Vec<String> = x.iter().take(8).map(|v| format!("{:.4}{:+.4}j", v.re, v.im)).collect();
    let more = if x.len() > 8 { format!(", ... ({} total)", x.len()) } else { String::new() };
    format!("[{}{}]", shown.join(", "), more)
}

fn transform(plan: DecompositionPlan, options: &VerifyOptions) -> Transform {
    let t = Transform::new(plan);
    if options.corrupt_twiddles {
        t.with_flipped_twiddle_sign()
    } else {
        t
    }
}

/// Sizes exercised by the transform oracle checks.
pub const ORACLE_SIZES: [usize; 8] = [4, 8, 16, 64, 256, 12, 24, 48];

fn oracle_equivalence(options: &VerifyOptions) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut worst = 0.0f64;
    for &m in &ORACLE_SIZES {
        let t = transform(Transform::for_len(m).expect("valid size").plan().clone(), options);
        for _ in 0..options.trials {
            let x = random_vector(&mut rng, m);
            for direction in [Direction::Forward, Direction::Inverse] {
                let fast = t.run(&x, direction).expect("length matches");
                let slow = dft_naive(&x, direction).expect("non-empty");
                let err = max_diff(&fast, &slow) / inf_norm(&x);
                worst = worst.max(err);
                if err >= 1e-9 {
                    return Err((
                        format!("M={m} {direction:?}: relative error {err:.3e}"),
                        format!("M={m} x={}", dump(&x)),
                    ));
                }
            }
        }
    }
    Ok(format!("{} vectors per size, worst relative error {worst:.2e}", options.trials))
}

fn permutation_involution() -> Check {
    for m in 0..=12u32 {
        for i in 0..1usize << m {
            let r = bit_reverse_index(i, m).expect("in range");
            if bit_reverse_index(r, m).expect("in range") != i {
                return Err((format!("bit reversal not an involution at m={m}"), format!("i={i}")));
            }
        }
    }
    for size in [12, 24, 48, 360] {
        for plan in DecompositionPlan::orderings(size).expect("composite") {
            let back = plan.reversed();
            for i in 0..size {
                let k = digit_reverse_index(i, &plan).expect("in range");
                if digit_reverse_index(k, &back).expect("in range") != i {
                    return Err((
                        "digit reversal not undone by the reversed plan".into(),
                        format!("plan {:?}, i={i}", plan.factors()),
                    ));
                }
            }
        }
    }
    Ok("bit reversal m<=12; digit reversal for every ordering of 12, 24, 48, 360".into())
}

fn parseval(options: &VerifyOptions) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ 0x9E37);
    let mut worst = 0.0f64;
    for &m in &ORACLE_SIZES {
        let t = transform(Transform::for_len(m).expect("valid size").plan().clone(), options);
        for _ in 0..options.trials.min(200) {
            let x = random_vector(&mut rng, m);
            let big: f64 = t.run(&x, Direction::Forward).expect("len").iter().map(|v| v.norm_sqr()).sum();
            let small: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>() * m as f64;
            let err = (big - small).abs() / small;
            worst = worst.max(err);
            if err >= 1e-9 {
                return Err((format!("M={m}: energy ratio off by {err:.3e}"), dump(&x)));
            }
        }
    }
    Ok(format!("worst relative energy error {worst:.2e}"))
}

fn stage_composition(options: &VerifyOptions) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ 0x51);
    for &m in &ORACLE_SIZES {
        let t = transform(Transform::for_len(m).expect("valid size").plan().clone(), options);
        let x = random_vector(&mut rng, m);
        for direction in [Direction::Forward, Direction::Inverse] {
            let mut state = t.permute(&x).expect("len");
            for stage in 1..=t.plan().stages() {
                t.apply_stage(&mut state, stage, direction, &mut OpCount::default()).expect("stage");
            }
            if state != t.run(&x, direction).expect("len") {
                return Err((format!("M={m}: stage-by-stage result differs"), dump(&x)));
            }
        }
    }
    Ok("permutation then R stages reproduces the transform bit for bit".into())
}

/// After the permutation and `n` inverse stages, each aligned block holds the
/// inverse transform of the subcarriers its bins map to.
fn per_block_inverse(options: &VerifyOptions) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ 0xB10C);
    let mut worst = 0.0f64;
    for &m in &ORACLE_SIZES {
        let t = transform(Transform::for_len(m).expect("valid size").plan().clone(), options);
        let plan = t.plan().clone();
        let x = random_vector(&mut rng, m);
        let mut state = t.permute(&x).expect("len");
        for stage in 0..=plan.stages() {
            if stage > 0 {
                t.apply_stage(&mut state, stage, Direction::Inverse, &mut OpCount::default()).expect("stage");
            }
            let b = plan.block_size(stage);
            for start in (0..m).step_by(b) {
                let mut subs: Vec<usize> = (start..start + b).map(|bin| t.subcarrier_of_bin(bin)).collect();
                subs.sort_unstable();
                let values: Vec<_> = subs.iter().map(|&k| x[k]).collect();
                let oracle = dft_naive(&values, Direction::Inverse).expect("non-empty");
                let err = max_diff(&state[start..start + b], &oracle) / inf_norm(&x);
                worst = worst.max(err);
                if err >= 1e-9 {
                    return Err((
                        format!("M={m} stage {stage} block at bin {start}: error {err:.3e}"),
                        format!("subcarriers {subs:?}"),
                    ));
                }
            }
        }
    }
    Ok(format!("every block at every cut, worst relative error {worst:.2e}"))
}

fn ordering_count() -> Check {
    let n = DecompositionPlan::orderings(12).expect("composite").len();
    if n == 3 {
        Ok("M=12 admits 3 orderings".into())
    } else {
        Err((format!("M=12 admits {n} orderings, expected 3"), "M=12".into()))
    }
}

/// Trace every subcarrier impulse through the permutation and the first
/// `m - t` stages and record which block it lands in.
pub fn trace_block_subcarriers(m: u32, t: u32) -> Vec<Vec<usize>> {
    let size = 1usize << m;
    let tr = Transform::new(DecompositionPlan::radix2(m));
    let block = 1usize << (m - t);
    let mut sets = vec![Vec::new(); 1 << t];
    for k in 0..size {
        let mut x = vec![Complex64::ZERO; size];
        x[k] = Complex64::ONE;
        let mut state = tr.permute(&x).expect("len");
        for stage in 1..=(m - t) as usize {
            tr.apply_stage(&mut state, stage, Direction::Inverse, &mut OpCount::default()).expect("stage");
        }
        for (d_prime, set) in sets.iter_mut().enumerate() {
            let energy: f64 = state[d_prime * block..(d_prime + 1) * block].iter().map(|v| v.norm_sqr()).sum();
            if energy > 1e-24 {
                set.push(k);
            }
        }
    }
    sets
}

fn index_law_exhaustive(max_m: u32, _options: &VerifyOptions) -> Check {
    let mut cases = 0;
    for m in 0..=max_m {
        for t in 0..=m {
            let traced = trace_block_subcarriers(m, t);
            for (d_prime, set) in traced.iter().enumerate() {
                let law = block_subcarriers(m, t, d_prime).expect("in range");
                cases += 1;
                if *set != law {
                    return Err((
                        format!("m={m} t={t} d'={d_prime}: traced set differs"),
                        format!("traced {set:?}, law {law:?}"),
                    ));
                }
            }
        }
    }
    Ok(format!("{cases} (m, t, d') cases for m <= {max_m}, zero mismatches"))
}

/// A random feasible request profile on a power-of-two band, sometimes
/// filling it completely. Requests are arbitrary sizes, so nodes with
/// non-power-of-two requests get several streams.
pub fn random_profile(rng: &mut ChaCha8Rng, band: usize) -> RequestProfile {
    let target = if rng.random_bool(0.5) { band } else { rng.random_range(1..=band) };
    let mut left = target;
    let mut requests = Vec::new();
    while left > 0 {
        let n = rng.random_range(1..=left);
        requests.push((format!("n{}", requests.len()), n));
        left -= n;
    }
    RequestProfile::new(band, requests)
}

/// Random symbols for every node of `allocs`.
pub fn random_blocks(rng: &mut ChaCha8Rng, allocs: &[StreamAllocation]) -> NodeBlocks {
    let mut blocks = NodeBlocks::new();
    for a in allocs {
        let v = random_vector(rng, a.size);
        blocks.entry(a.node.clone()).or_default().extend(v);
    }
    blocks
}

/// Sizes exercised by the transceiver checks.
pub const TRANSCEIVER_SIZES: [usize; 4] = [8, 16, 32, 64];

fn transmitter_equivalence(options: &VerifyOptions) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ 0x7);
    let mut worst = 0.0f64;
    for &m in &TRANSCEIVER_SIZES {
        let plan = DecompositionPlan::radix2(m.trailing_zeros());
        for _ in 0..options.trials {
            let profile = random_profile(&mut rng, m);
            let allocs = allocate(&profile).expect("feasible");
            let blocks = random_blocks(&mut rng, &allocs);
            let parts = split_blocks(&blocks, &allocs).expect("blocks match");
            let mut time = vec![Complex64::ZERO; m];
            let mut freq = vec![Complex64::ZERO; m];
            for (a, block) in allocs.iter().zip(&parts) {
                for (acc, v) in time.iter_mut().zip(tx_time_domain(block, m, a.shift).expect("valid")) {
                    *acc += v;
                }
                for (acc, v) in freq.iter_mut().zip(tx_freq_domain(block, a).expect("valid")) {
                    *acc += v;
                }
            }
            let schedule = build_schedule(&allocs, &plan, Variant::Transmit).expect("schedule");
            let unified = unified_multiplex(&blocks, &schedule).expect("multiplex");
            let scale = parts.iter().map(|p| inf_norm(p)).fold(0.0, f64::max);
            let err = max_diff(&time, &freq).max(max_diff(&time, &unified)) / scale;
            worst = worst.max(err);
            if err >= 1e-9 {
                return Err((format!("M={m}: paths differ by {err:.3e}"), format!("{:?}", profile.requests)));
            }
        }
    }
    Ok(format!("{} random allocation sets per M, worst error {worst:.2e}", options.trials))
}

fn detector_equivalence(options: &VerifyOptions) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ 0xD);
    let mut worst = 0.0f64;
    for &m in &TRANSCEIVER_SIZES {
        let plan = DecompositionPlan::radix2(m.trailing_zeros());
        let band = Transform::new(plan.clone());
        for _ in 0..options.trials {
            let profile = random_profile(&mut rng, m);
            let allocs = allocate(&profile).expect("feasible");
            // arbitrary received signal: the detectors must agree on anything
            let signal = random_vector(&mut rng, m);
            let oracle = rx_streams(&signal, &allocs, &ChannelModel::identity(m)).expect("rx");
            let spectrum = band.run(&signal, Direction::Forward).expect("len");
            let with = build_schedule(&allocs, &plan, Variant::WithFde).expect("schedule");
            let got = unified_detect_streams(&spectrum, &with, Semantics::Broadcast, &mut OpCount::default())
                .expect("detect");
            let without = build_schedule(&allocs, &plan, Variant::NoFde).expect("schedule");
            let raw = unified_detect_nofde_streams(&signal, &without, &mut OpCount::default()).expect("detect");
            let scale = inf_norm(&signal).max(1e-300);
            for i in 0..allocs.len() {
                let err = max_diff(&got[i], &oracle[i]).max(max_diff(&raw[i], &oracle[i])) / scale;
                worst = worst.max(err);
                if err >= 1e-9 {
                    return Err((
                        format!("M={m} stream {i}: detectors differ by {err:.3e}"),
                        format!("{:?}", profile.requests),
                    ));
                }
            }
        }
    }
    Ok(format!("{} random allocation sets per M, worst error {worst:.2e}", options.trials))
}

/// The three-node M=8 scenario: A on {1,3,5,7}, B on {0,4}, C on {6}.
pub fn three_node_allocations() -> Vec<StreamAllocation> {
    let plan = DecompositionPlan::radix2(3);
    vec![
        StreamAllocation::from_subcarriers("A", &[1, 3, 5, 7], &plan).expect("stream"),
        StreamAllocation::from_subcarriers("B", &[0, 4], &plan).expect("stream"),
        StreamAllocation::from_subcarriers("C", &[6], &plan).expect("stream"),
    ]
}

fn three_node_scenario() -> Check {
    let plan = DecompositionPlan::radix2(3);
    let allocs = three_node_allocations();
    let with = build_schedule(&allocs, &plan, Variant::WithFde).map_err(|e| (e.to_string(), String::new()))?;
    let without = build_schedule(&allocs, &plan, Variant::NoFde).map_err(|e| (e.to_string(), String::new()))?;
    let stages: Vec<_> = (0..3).map(|i| (with.stream_stage(i), without.stream_stage(i))).collect();
    if stages != vec![(2, 1), (1, 2), (0, 3)] || with.owner(2).is_some() {
        return Err(("tap stages differ from the scenario".into(), format!("{stages:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let blocks = random_blocks(&mut rng, &allocs);
    let tx_schedule = build_schedule(&allocs, &plan, Variant::Transmit).map_err(|e| (e.to_string(), String::new()))?;
    let tx = unified_multiplex(&blocks, &tx_schedule).map_err(|e| (e.to_string(), String::new()))?;
    let spectrum = Transform::new(plan).run(&tx, Direction::Forward).expect("len");
    let got = unified_detect_streams(&spectrum, &with, Semantics::Broadcast, &mut OpCount::default()).expect("detect");
    let raw = unified_detect_nofde_streams(&tx, &without, &mut OpCount::default()).expect("detect");
    let parts = split_blocks(&blocks, &allocs).expect("blocks");
    for i in 0..3 {
        let err = max_diff(&got[i], parts[i]).max(max_diff(&raw[i], parts[i]));
        if err >= 1e-9 {
            return Err((format!("stream {i} not recovered, error {err:.3e}"), dump(parts[i])));
        }
    }
    Ok("A exits after stage 2, B after 1, C after 0; forward taps at 1, 2, 3; blocks recovered".into())
}

fn contamination(options: &VerifyOptions) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ 0xC0);
    let mut trials = 0;
    for &m in &[2usize, 4, 8, 16, 32] {
        let plan = DecompositionPlan::radix2(m.trailing_zeros());
        for _ in 0..200 {
            let allocs = allocate(&random_profile(&mut rng, m)).expect("feasible");
            let schedule = build_schedule(&allocs, &plan, Variant::WithFde).expect("schedule");
            let x = random_vector(&mut rng, m);
            let broadcast =
                unified_detect_streams(&x, &schedule, Semantics::Broadcast, &mut OpCount::default()).expect("detect");
            let strict =
                unified_detect_streams(&x, &schedule, Semantics::Strict, &mut OpCount::default()).expect("detect");
            trials += 1;
            if broadcast != strict {
                return Err(("broadcast output differs from zero-downstream output".into(), dump(&x)));
            }
        }
    }
    Ok(format!("{trials} random schedules, M <= 32, outputs bit-identical"))
}

fn duality(options: &VerifyOptions) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ 0xDA);
    let mut worst = 0.0f64;
    for &m in &TRANSCEIVER_SIZES {
        let plan = DecompositionPlan::radix2(m.trailing_zeros());
        let band = Transform::new(plan.clone());
        for _ in 0..options.trials.min(200) {
            let allocs = allocate(&random_profile(&mut rng, m)).expect("feasible");
            let blocks = random_blocks(&mut rng, &allocs);
            let tx = build_schedule(&allocs, &plan, Variant::Transmit).expect("schedule");
            let rx = build_schedule(&allocs, &plan, Variant::WithFde).expect("schedule");
            let signal = unified_multiplex(&blocks, &tx).expect("multiplex");
            let spectrum = band.run(&signal, Direction::Forward).expect("len");
            let got = unified_detect_streams(&spectrum, &rx, Semantics::Broadcast, &mut OpCount::default())
                .expect("detect");
            let parts = split_blocks(&blocks, &allocs).expect("blocks");
            for (g, p) in got.iter().zip(&parts) {
                let err = max_diff(g, p) / inf_norm(p);
                worst = worst.max(err);
                if err >= 1e-9 {
                    return Err((format!("M={m}: round trip error {err:.3e}"), dump(p)));
                }
            }
        }
    }
    Ok(format!("multiplex, forward transform, detect recovers every block; worst {worst:.2e}"))
}

fn channel_round_trip(options: &VerifyOptions) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ 0xCA);
    let mut worst = 0.0f64;
    for &m in &TRANSCEIVER_SIZES {
        let channel = ChannelModel::from_taps(vec![Complex64::ONE, Complex64::new(0.5, 0.0)], m).expect("channel");
        for _ in 0..options.trials.min(200) {
            let allocs = allocate(&random_profile(&mut rng, m)).expect("feasible");
            let blocks = random_blocks(&mut rng, &allocs);
            let tx = crate::conventional::tx_aggregate(&blocks, &allocs).expect("tx");
            let rx = crate::conventional::rx_conventional(&channel.apply_circular(&tx).expect("len"), &allocs, &channel)
                .expect("rx");
            for (node, block) in &blocks {
                let err = max_diff(&rx[node], block) / inf_norm(block);
                worst = worst.max(err);
                if err >= 1e-9 {
                    return Err((format!("M={m}: node {node} error {err:.3e}"), dump(block)));
                }
            }
        }
    }
    Ok(format!("two-tap channel with zero-forcing, worst {worst:.2e}"))
}

fn energy(options: &VerifyOptions) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ 0xE);
    for &m in &TRANSCEIVER_SIZES {
        for _ in 0..options.trials.min(200) {
            let n = 1usize << rng.random_range(0..=m.trailing_zeros());
            let d = rng.random_range(0..m / n);
            let x = random_vector(&mut rng, n);
            let y = tx_time_domain(&x, m, d).expect("valid");
            let ey: f64 = y.iter().map(|v| v.norm_sqr()).sum();
            let ex: f64 = x.iter().map(|v| v.norm_sqr()).sum();
            let want = ex * n as f64 / m as f64;
            if (ey - want).abs() > 1e-9 * want {
                return Err((format!("M={m} N={n} d={d}: energy {ey} vs {want}"), dump(&x)));
            }
        }
    }
    Ok("signal energy equals (N/M) times block energy".into())
}

fn switch_count() -> Check {
    for m in 1..=10u32 {
        let size = 1usize << m;
        let plan = DecompositionPlan::radix2(m);
        let allocs = allocate(&RequestProfile::new(size, [("a", size)])).expect("feasible");
        let schedule = build_schedule(&allocs, &plan, Variant::WithFde).expect("schedule");
        let want = size * (m as usize + 1);
        let ledger = count(Scenario::new(System::Multi, Link::Downlink, Role::UnifiedWithFde), size)
            .expect("power of two")
            .switch_count;
        if schedule.switch_count() != want || ledger != Some(want as u64) {
            return Err((format!("M={size}: {} switches", schedule.switch_count()), String::new()));
        }
    }
    Ok("M (log2 M + 1) switch positions for M = 2..1024".into())
}

fn multiplier_count() -> Check {
    for m in 1..=10u32 {
        let size = 1usize << m;
        let plan = DecompositionPlan::radix2(m);
        let ledger = count(Scenario::new(System::Single, Link::Uplink, Role::UnifiedNoFde), size)
            .expect("power of two")
            .exact_multipliers;
        let full = allocate(&RequestProfile::new(size, [("a", size)])).expect("feasible");
        let with = build_schedule(&full, &plan, Variant::WithFde).expect("schedule");
        let mut ops = OpCount::default();
        unified_detect_streams(&vec![Complex64::ONE; size], &with, Semantics::Broadcast, &mut ops).expect("detect");
        // a transmitter carrying only single-subcarrier streams runs every stage
        let singles: Vec<_> = (0..size)
            .map(|b| StreamAllocation::from_bins(format!("s{b}"), b..b + 1, &plan).expect("bin"))
            .collect();
        let tx = build_schedule(&singles, &plan, Variant::Transmit).expect("schedule");
        let mut blocks = NodeBlocks::new();
        for s in &singles {
            blocks.insert(s.node.clone(), vec![Complex64::ONE]);
        }
        let mut tx_ops = OpCount::default();
        unified_multiplex_counted(&blocks, &tx, &mut tx_ops).expect("multiplex");
        if ops.complex_mults != ledger || tx_ops.complex_mults != ledger {
            return Err((
                format!("M={size}: counted {} / {} against ledger {ledger}", ops.complex_mults, tx_ops.complex_mults),
                String::new(),
            ));
        }
    }
    Ok("instrumented full transform uses (M/2) log2 M multiplications, M = 2..1024".into())
}

/// Every multiset of positive request sizes with total at most `band`,
/// as non-increasing lists.
pub fn request_multisets(band: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, cap: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !prefix.is_empty() {
            out.push(prefix.clone());
        }
        for n in (1..=cap.min(left)).rev() {
            prefix.push(n);
            rec(left - n, n, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(band, band, &mut Vec::new(), &mut out);
    out
}

fn even_spacing_exhaustive(max_band: usize) -> Check {
    let mut profiles = 0usize;
    let mut band = 2;
    while band <= max_band {
        for sizes in request_multisets(band) {
            profiles += 1;
            let profile = RequestProfile::new(band, sizes.iter().enumerate().map(|(i, &n)| (format!("n{i}"), n)));
            let allocs = allocate(&profile).map_err(|e| (e.to_string(), format!("M={band} {sizes:?}")))?;
            let mut seen = vec![false; band];
            for a in &allocs {
                if !a.is_evenly_spaced() {
                    return Err(("stream is not evenly spaced".into(), format!("M={band} {sizes:?}: {a:?}")));
                }
                let mut image: Vec<_> = a.bins.clone().map(|b| bit_reverse_index(b, band.trailing_zeros()).unwrap()).collect();
                image.sort_unstable();
                if image != a.subcarriers {
                    return Err(("subcarriers are not the bit-reversed bins".into(), format!("M={band} {sizes:?}")));
                }
                for &k in &a.subcarriers {
                    if std::mem::replace(&mut seen[k], true) {
                        return Err((format!("subcarrier {k} allocated twice"), format!("M={band} {sizes:?}")));
                    }
                }
            }
            let per_node: usize = allocs.iter().map(|a| a.size).sum();
            if per_node != profile.total() {
                return Err(("allocated total differs from request total".into(), format!("M={band} {sizes:?}")));
            }
            if profile.total() == band && seen.iter().any(|s| !s) {
                return Err(("full request left a subcarrier free".into(), format!("M={band} {sizes:?}")));
            }
        }
        band *= 2;
    }
    Ok(format!("{profiles} feasible request multisets for M = 2..{max_band}"))
}

fn partition_minimality(limit: usize) -> Check {
    // fewest powers of two summing to n, by dynamic programming
    let mut best = vec![usize::MAX; limit + 1];
    best[0] = 0;
    for n in 1..=limit {
        let mut p = 1;
        while p <= n {
            best[n] = best[n].min(best[n - p] + 1);
            p *= 2;
        }
    }
    for n in 1..=limit {
        let parts = minimal_partition(n).expect("positive");
        let decreasing = parts.windows(2).all(|w| w[0] > w[1]);
        if parts.iter().sum::<usize>() != n
            || !decreasing
            || parts.len() != n.count_ones() as usize
            || parts.len() != best[n]
        {
            return Err(("partition is not minimal".into(), format!("n={n}: {parts:?}")));
        }
    }
    Ok(format!("n = 1..{limit}: popcount parts, none shorter exists"))
}

fn allocation_examples() -> Check {
    let fail = |what: &str| Err((what.to_owned(), String::new()));
    let worked = allocate(&RequestProfile::new(8, [("A", 2), ("B", 1), ("C", 4)])).expect("feasible");
    let got: Vec<_> = worked.iter().map(|a| (a.node.0.clone(), a.bins.clone(), a.subcarriers.clone())).collect();
    let want = vec![
        ("C".to_owned(), 0..4, vec![0, 2, 4, 6]),
        ("A".to_owned(), 4..6, vec![1, 5]),
        ("B".to_owned(), 6..7, vec![3]),
    ];
    if got != want {
        return fail("M=8 worked example differs");
    }
    let first = &allocate(&RequestProfile::new(64, [("x", 4)])).expect("feasible")[0];
    if first.subcarriers != vec![0, 16, 32, 48] {
        return fail("first four bins of M=64 differ");
    }
    let plan = DecompositionPlan::new(vec![2, 3, 2]).expect("primes");
    if plan.admissible_sizes() != vec![12, 6, 2, 1] {
        return fail("admissible sizes for (2,3,2) differ");
    }
    let placed = [
        StreamAllocation::from_bins("A", 6..12, &plan),
        StreamAllocation::from_bins("B", 2..4, &plan),
        StreamAllocation::from_bins("C", 0..1, &plan),
    ];
    let sets: Vec<_> = placed.iter().map(|a| a.as_ref().map(|a| a.subcarriers.clone()).unwrap_or_default()).collect();
    if sets != vec![vec![1, 3, 5, 7, 9, 11], vec![2, 8], vec![0]] {
        return fail("M=12 placement differs");
    }
    let packed = allocate_composite(&RequestProfile::new(12, [("A", 6), ("B", 2), ("C", 1)]), &plan)
        .map_err(|e| (e.to_string(), String::new()))?;
    if !packed.iter().all(StreamAllocation::is_evenly_spaced) {
        return fail("composite packing is not evenly spaced");
    }
    Ok("M=8 table, M=64 first node, M=12 placement and admissible sizes".into())
}
