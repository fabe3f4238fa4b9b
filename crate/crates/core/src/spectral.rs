//! Transform engine.
//!
//! Every transform here is a decimation-in-time Cooley-Tukey network laid out
//! as an explicit front permutation followed by one butterfly stage per
//! factor of the [`DecompositionPlan`]. The inverse direction carries a
//! `1/f` scale on each stage, so a full inverse transform is scaled by
//! `1/M` and every intermediate block of size `B` holds a properly scaled
//! `B`-point inverse transform. The forward direction is unscaled.
//!
//! Lines of the network after the front permutation are called *bins*. The
//! permutation sends subcarrier `k` to the bin whose mixed-radix digits are
//! those of `k` read in reverse; for an all-2 plan this is bit reversal.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// One complex baseband value.
pub type ComplexSample = Complex64;

/// Transform direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `X[k] = sum_n x[n] e^{-j 2 pi k n / M}`, unscaled.
    Forward,
    /// `x[l] = (1/M) sum_k X[k] e^{+j 2 pi k l / M}`.
    Inverse,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        }
    }
}

/// `e^{±j 2 pi num / den}` with the angle reduced exactly before evaluation.
fn unit_root(num: usize, den: usize, direction: Direction) -> Complex64 {
    let frac = (num % den) as f64 / den as f64;
    Complex64::from_polar(1.0, direction.sign() * TAU * frac)
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Direct `O(M^2)` DFT. This is the reference every fast path is checked
/// against, so it shares no code with [`Transform`].
pub fn dft_naive(x: &[ComplexSample], direction: Direction) -> Result<Vec<ComplexSample>> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let m = x.len();
    let scale = match direction {
        Direction::Forward => 1.0,
        Direction::Inverse => 1.0 / m as f64,
    };
    Ok((0..m)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(n, &v)| v * unit_root(k * n, m, direction))
                .sum::<Complex64>()
                * scale
        })
        .collect())
}

/// An ordered prime factorization `M = f_0 f_1 ... f_{R-1}`.
///
/// `f_0` is the outermost split: the first mod-`f_0` shuffle groups the
/// input by `k mod f_0`. Butterfly stage `t` (1-based) combines radix
/// `f_{R-t}`, so after stage `t` the network holds independent transforms
/// of size `f_{R-t} ... f_{R-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DecompositionPlan {
    factors: Vec<usize>,
    size: usize,
}

impl DecompositionPlan {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = factors.iter().find(|&&f| !is_prime(f)) {
            return Err(Error::InvalidFactor(bad));
        }
        let size = factors.iter().product();
        Ok(Self { factors, size })
    }

    /// The radix-2 plan for `M = 2^log2_size`.
    pub fn radix2(log2_size: u32) -> Self {
        Self {
            factors: vec![2; log2_size as usize],
            size: 1usize << log2_size,
        }
    }

    /// Prime factors of `n` in ascending order. `n = 1` gives the empty plan.
    pub fn factorize(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        let mut factors = Vec::new();
        let mut rest = n;
        let mut d = 2;
        while d * d <= rest {
            while rest % d == 0 {
                factors.push(d);
                rest /= d;
            }
            d += 1;
        }
        if rest > 1 {
            factors.push(rest);
        }
        Ok(Self { factors, size: n })
    }

    /// Every distinct ordering of the prime factors of `n`, lexicographically
    /// sorted. Their count is the multinomial coefficient of the exponents.
    pub fn orderings(n: usize) -> Result<Vec<Self>> {
        let mut factors = Self::factorize(n)?.factors;
        let mut out = vec![factors.clone()];
        // next lexicographic permutation, starting from the sorted order
        loop {
            let Some(i) = (1..factors.len()).rev().find(|&i| factors[i - 1] < factors[i]) else {
                break;
            };
            let j = (i..factors.len()).rev().find(|&j| factors[j] > factors[i - 1]).unwrap();
            factors.swap(i - 1, j);
            factors[i..].reverse();
            out.push(factors.clone());
        }
        Ok(out.into_iter().map(|f| Self { factors: f, size: n }).collect())
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    /// The transform size `M`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of butterfly stages `R`.
    pub fn stages(&self) -> usize {
        self.factors.len()
    }

    pub fn is_radix2(&self) -> bool {
        self.factors.iter().all(|&f| f == 2)
    }

    /// `log2 M` for a radix-2 plan.
    pub fn log2_size(&self) -> Option<u32> {
        self.is_radix2().then_some(self.factors.len() as u32)
    }

    /// The radix combined by butterfly stage `stage` (1-based).
    pub fn stage_radix(&self, stage: usize) -> usize {
        self.factors[self.factors.len() - stage]
    }

    /// Size of each embedded sub-transform once `stage` stages have run.
    /// Stage 0 is the state right after the front permutation.
    pub fn block_size(&self, stage: usize) -> usize {
        self.factors[self.factors.len() - stage..].iter().product()
    }

    pub fn stage_view(&self, stage: usize) -> Result<StageView> {
        if stage > self.stages() {
            return Err(Error::StageOutOfRange { stage, stages: self.stages() });
        }
        let block_size = self.block_size(stage);
        Ok(StageView {
            stage_index: stage,
            block_size,
            block_count: self.size / block_size,
        })
    }

    /// The stage after which a stream of `size` subcarriers is complete.
    pub fn exit_stage(&self, size: usize) -> Option<usize> {
        (0..=self.stages()).find(|&t| self.block_size(t) == size)
    }

    /// Single-stream sizes this plan can carry, largest first.
    pub fn admissible_sizes(&self) -> Vec<usize> {
        (0..=self.stages()).rev().map(|t| self.block_size(t)).collect()
    }

    pub fn reversed(&self) -> Self {
        let mut factors = self.factors.clone();
        factors.reverse();
        Self { factors, size: self.size }
    }
}

/// One cut through the network: the state after `stage_index` stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StageView {
    pub stage_index: usize,
    pub block_size: usize,
    pub block_count: usize,
}

/// Reverse the low `bits` bits of `i`.
pub fn bit_reverse_index(i: usize, bits: u32) -> Result<usize> {
    if bits as usize >= usize::BITS as usize || i >> bits != 0 {
        let size = 1usize.checked_shl(bits).unwrap_or(usize::MAX);
        return Err(Error::IndexOutOfRange { index: i, size });
    }
    if bits == 0 {
        return Ok(0);
    }
    Ok(i.reverse_bits() >> (usize::BITS - bits))
}

/// Map bin `i` to its subcarrier under `plan`.
///
/// `i` is read as mixed-radix digits `b_0 b_1 ... b_{R-1}` with `b_0` the most
/// significant (radix `f_0`); the result is `b_0 + f_0 b_1 + f_0 f_1 b_2 + ...`.
/// The inverse map is the same function under the reversed plan.
pub fn digit_reverse_index(i: usize, plan: &DecompositionPlan) -> Result<usize> {
    if i >= plan.size() {
        return Err(Error::IndexOutOfRange { index: i, size: plan.size() });
    }
    let mut rest = i;
    let mut weight = 1;
    let mut out = 0;
    // least significant bin digit belongs to f_{R-1}, which is the most
    // significant subcarrier digit
    let mut digits = Vec::with_capacity(plan.stages());
    for &f in plan.factors().iter().rev() {
        digits.push(rest % f);
        rest /= f;
    }
    for (&f, &d) in plan.factors().iter().zip(digits.iter().rev()) {
        out += d * weight;
        weight *= f;
    }
    Ok(out)
}

/// Group `x` by `index mod radix`, groups in order `0..radix`, stable within
/// a group.
pub fn mod_shuffle(x: &[ComplexSample], radix: usize) -> Result<Vec<ComplexSample>> {
    if radix == 0 || x.len() % radix != 0 {
        return Err(Error::NotDivisible { len: x.len(), divisor: radix });
    }
    Ok((0..radix)
        .flat_map(|g| x.iter().skip(g).step_by(radix).copied())
        .collect())
}

/// Running count of complex multiplications performed by butterfly stages.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCount {
    pub complex_mults: u64,
}

#[derive(Clone, Debug)]
struct StageTables {
    radix: usize,
    /// distance between the radix inputs of one butterfly
    span: usize,
    /// inverse-direction twiddles, `(q - 1) * span + l1` for `q in 1..radix`
    twiddles: Vec<Complex64>,
    /// inverse-direction `radix`-th roots of unity
    roots: Vec<Complex64>,
}

impl StageTables {
    fn twiddle(&self, q: usize, l1: usize, direction: Direction) -> Complex64 {
        let w = self.twiddles[(q - 1) * self.span + l1];
        match direction {
            Direction::Inverse => w,
            Direction::Forward => w.conj(),
        }
    }

    fn root(&self, r: usize, direction: Direction) -> Complex64 {
        let w = self.roots[r % self.radix];
        match direction {
            Direction::Inverse => w,
            Direction::Forward => w.conj(),
        }
    }
}

/// A planned transform: the front permutation and per-stage twiddles for one
/// [`DecompositionPlan`], computed once at full double precision.
#[derive(Clone, Debug)]
pub struct Transform {
    plan: DecompositionPlan,
    /// `permutation[bin] = subcarrier`
    permutation: Vec<usize>,
    stages: Vec<StageTables>,
}

impl Transform {
    pub fn new(plan: DecompositionPlan) -> Self {
        let permutation = (0..plan.size())
            .map(|bin| digit_reverse_index(bin, &plan).expect("bin in range"))
            .collect();
        let stages = (1..=plan.stages())
            .map(|stage| {
                let radix = plan.stage_radix(stage);
                let block = plan.block_size(stage);
                let span = block / radix;
                let twiddles = (1..radix)
                    .flat_map(|q| (0..span).map(move |l1| unit_root(l1 * q, block, Direction::Inverse)))
                    .collect();
                let roots = (0..radix).map(|r| unit_root(r, radix, Direction::Inverse)).collect();
                StageTables { radix, span, twiddles, roots }
            })
            .collect();
        Self { plan, permutation, stages }
    }

    /// Plan for `len`: radix-2 when `len` is a power of two, otherwise the
    /// ascending prime factorization.
    pub fn for_len(len: usize) -> Result<Self> {
        let plan = if len.is_power_of_two() {
            DecompositionPlan::radix2(len.trailing_zeros())
        } else {
            DecompositionPlan::factorize(len)?
        };
        Ok(Self::new(plan))
    }

    pub fn plan(&self) -> &DecompositionPlan {
        &self.plan
    }

    pub fn size(&self) -> usize {
        self.plan.size()
    }

    /// Subcarrier carried by `bin` after the front permutation.
    pub fn subcarrier_of_bin(&self, bin: usize) -> usize {
        self.permutation[bin]
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.size() {
            return Err(Error::LengthMismatch { expected: self.size(), actual: len });
        }
        Ok(())
    }

    fn check_stage(&self, stage: usize) -> Result<()> {
        if stage == 0 || stage > self.plan.stages() {
            return Err(Error::StageOutOfRange { stage, stages: self.plan.stages() });
        }
        Ok(())
    }

    /// Front permutation: `out[bin] = x[subcarrier_of_bin(bin)]`.
    pub fn permute(&self, x: &[ComplexSample]) -> Result<Vec<ComplexSample>> {
        self.check_len(x.len())?;
        Ok(self.permutation.iter().map(|&k| x[k]).collect())
    }

    /// Undo [`Transform::permute`].
    pub fn unpermute(&self, bins: &[ComplexSample]) -> Result<Vec<ComplexSample>> {
        self.check_len(bins.len())?;
        let mut out = vec![Complex64::ZERO; bins.len()];
        for (bin, &k) in self.permutation.iter().enumerate() {
            out[k] = bins[bin];
        }
        Ok(out)
    }

    /// Apply butterfly stage `stage` (1-based) in place.
    pub fn apply_stage(
        &self,
        state: &mut [ComplexSample],
        stage: usize,
        direction: Direction,
        ops: &mut OpCount,
    ) -> Result<()> {
        self.check_len(state.len())?;
        self.check_stage(stage)?;
        let t = &self.stages[stage - 1];
        let (radix, span) = (t.radix, t.span);
        let block = radix * span;
        let scale = match direction {
            Direction::Forward => 1.0,
            Direction::Inverse => 1.0 / radix as f64,
        };
        if radix == 2 {
            for base in (0..state.len()).step_by(block) {
                for l1 in 0..span {
                    let (i, j) = (base + l1, base + span + l1);
                    let a = state[i];
                    let b = state[j] * t.twiddle(1, l1, direction);
                    state[i] = (a + b) * scale;
                    state[j] = (a - b) * scale;
                }
            }
            ops.complex_mults += (state.len() / 2) as u64;
            return Ok(());
        }
        let mut y = vec![Complex64::ZERO; radix];
        for base in (0..state.len()).step_by(block) {
            for l1 in 0..span {
                y[0] = state[base + l1];
                for (q, yq) in y.iter_mut().enumerate().skip(1) {
                    *yq = state[base + q * span + l1] * t.twiddle(q, l1, direction);
                }
                for l2 in 0..radix {
                    let acc: Complex64 = y
                        .iter()
                        .enumerate()
                        .map(|(q, &v)| v * t.root(l2 * q, direction))
                        .sum();
                    state[base + l2 * span + l1] = acc * scale;
                }
                ops.complex_mults += ((radix - 1) + radix * radix) as u64;
            }
        }
        Ok(())
    }

    /// Invert inverse-direction stage `stage` in place, so that
    /// `undo_inverse_stage(s)` after `apply_stage(s, Inverse)` is the identity.
    ///
    /// Running these for `s = R, R-1, ..., 1` and then [`Transform::unpermute`]
    /// computes the forward transform as the mirror image of the inverse one.
    pub fn undo_inverse_stage(
        &self,
        state: &mut [ComplexSample],
        stage: usize,
        ops: &mut OpCount,
    ) -> Result<()> {
        self.check_len(state.len())?;
        self.check_stage(stage)?;
        let t = &self.stages[stage - 1];
        let (radix, span) = (t.radix, t.span);
        let block = radix * span;
        if radix == 2 {
            for base in (0..state.len()).step_by(block) {
                for l1 in 0..span {
                    let (i, j) = (base + l1, base + span + l1);
                    let (top, bottom) = (state[i], state[j]);
                    state[i] = top + bottom;
                    state[j] = (top - bottom) * t.twiddle(1, l1, Direction::Forward);
                }
            }
            ops.complex_mults += (state.len() / 2) as u64;
            return Ok(());
        }
        let mut o = vec![Complex64::ZERO; radix];
        for base in (0..state.len()).step_by(block) {
            for l1 in 0..span {
                for (l2, v) in o.iter_mut().enumerate() {
                    *v = state[base + l2 * span + l1];
                }
                for q in 0..radix {
                    let y: Complex64 = o
                        .iter()
                        .enumerate()
                        .map(|(l2, &v)| v * t.root(l2 * q, Direction::Forward))
                        .sum();
                    state[base + q * span + l1] = if q == 0 {
                        y
                    } else {
                        y * t.twiddle(q, l1, Direction::Forward)
                    };
                }
                ops.complex_mults += ((radix - 1) + radix * radix) as u64;
            }
        }
        Ok(())
    }

    /// Full transform: front permutation, then stages `1..=R`.
    pub fn run(&self, x: &[ComplexSample], direction: Direction) -> Result<Vec<ComplexSample>> {
        let mut ops = OpCount::default();
        self.run_counted(x, direction, &mut ops)
    }

    pub fn run_counted(
        &self,
        x: &[ComplexSample],
        direction: Direction,
        ops: &mut OpCount,
    ) -> Result<Vec<ComplexSample>> {
        let mut state = self.permute(x)?;
        for stage in 1..=self.plan.stages() {
            self.apply_stage(&mut state, stage, direction, ops)?;
        }
        Ok(state)
    }

    /// Forward transform computed as the mirror image of the inverse network:
    /// undo stages `R..=1`, then undo the permutation.
    pub fn run_reflected_forward(&self, x: &[ComplexSample]) -> Result<Vec<ComplexSample>> {
        self.check_len(x.len())?;
        let mut state = x.to_vec();
        let mut ops = OpCount::default();
        for stage in (1..=self.plan.stages()).rev() {
            self.undo_inverse_stage(&mut state, stage, &mut ops)?;
        }
        self.unpermute(&state)
    }

    /// A copy whose twiddles carry the wrong sign. Used by the verification
    /// suite to prove that it notices a broken transform.
    #[doc(hidden)]
    pub fn with_flipped_twiddle_sign(mut self) -> Self {
        for t in &mut self.stages {
            for w in &mut t.twiddles {
                *w = w.conj();
            }
        }
        self
    }
}

/// Transform `x` under `plan`.
pub fn fft(x: &[ComplexSample], plan: &DecompositionPlan, direction: Direction) -> Result<Vec<ComplexSample>> {
    if x.len() != plan.size() {
        return Err(Error::LengthMismatch { expected: plan.size(), actual: x.len() });
    }
    Transform::new(plan.clone()).run(x, direction)
}

/// Apply exactly one butterfly stage to `state`.
pub fn stage_apply(
    state: &[ComplexSample],
    plan: &DecompositionPlan,
    stage: usize,
    direction: Direction,
) -> Result<Vec<ComplexSample>> {
    let mut out = state.to_vec();
    Transform::new(plan.clone()).apply_stage(&mut out, stage, direction, &mut OpCount::default())?;
    Ok(out)
}
