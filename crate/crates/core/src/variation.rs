//! Computable `U^p`/`V^p` machinery and the blockwise `X^s`/`Y^s` norms.
//!
//! Paths are right-continuous step functions with values in the zonal field
//! space, zero before the first breakpoint and (by the `v(∞) = 0` convention)
//! zero after the last. For such paths the `p`-variation supremum over all
//! partitions is attained on the path's own breakpoints augmented by the
//! leading and terminal zeros, so `V^p` is computed exactly by dynamic
//! programming over that finite value sequence.
//!
//! The atomic `U^p` norm is an infimum over infinitely many decompositions
//! and is deliberately only bracketed: the upper bound telescopes the path
//! into one-jump atoms, the lower bound is `max(sup_t ‖v(t)‖, ‖v‖_{V^p}/2)`;
//! both constants come with the embeddings proved in the unit tests. Every
//! consumer of the bracket reports its width.

use crate::sphere::{propagate, ClusterScheme, DyadicBlock, Flow, SphereError, ZonalField};
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VariationError {
    #[error("breakpoints must be strictly increasing")]
    TimesNotIncreasing,
    #[error("{times} breakpoints need {} values, got {values}", times - 1)]
    LengthMismatch { times: usize, values: usize },
    #[error("variation exponent must be ≥ 1, got {0}")]
    BadExponent(f64),
    #[error("exhaustive search only supported up to {cap} pieces, got {got}")]
    TooManyPieces { got: usize, cap: usize },
    #[error("cannot resample a piece of infinite length")]
    UnboundedPiece,
    #[error(transparent)]
    Sphere(#[from] SphereError),
}

/// L² distance of two fields without intermediate allocation.
fn field_dist(a: Option<&ZonalField>, b: Option<&ZonalField>) -> f64 {
    let zero: &[Complex64] = &[];
    let ca = a.map_or(zero, |f| f.coeffs());
    let cb = b.map_or(zero, |f| f.coeffs());
    let len = ca.len().max(cb.len());
    let mut sum = 0.0;
    for k in 0..len {
        let x = ca.get(k).copied().unwrap_or(Complex64::ZERO);
        let y = cb.get(k).copied().unwrap_or(Complex64::ZERO);
        sum += (x - y).norm_sqr();
    }
    sum.sqrt()
}

/// Right-continuous step path: value `values[i]` on `[times[i], times[i+1])`,
/// zero before `times[0]` and after the final breakpoint. The final
/// breakpoint may be `f64::INFINITY`.
#[derive(Clone, Debug)]
pub struct StepPath {
    times: Vec<f64>,
    values: Vec<ZonalField>,
}

impl StepPath {
    pub fn new(times: Vec<f64>, values: Vec<ZonalField>) -> Result<Self, VariationError> {
        if times.len() != values.len() + 1 {
            return Err(VariationError::LengthMismatch {
                times: times.len(),
                values: values.len(),
            });
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(VariationError::TimesNotIncreasing);
        }
        Ok(Self { times, values })
    }

    /// The identically-zero path.
    pub fn zero() -> Self {
        Self {
            times: vec![],
            values: vec![],
        }
    }

    pub fn pieces(&self) -> usize {
        self.values.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[ZonalField] {
        &self.values
    }

    /// Path value at `t` (zero outside the pieces; `v(∞) = 0`).
    pub fn value_at(&self, t: f64) -> Option<&ZonalField> {
        if self.values.is_empty() || t < self.times[0] || t >= *self.times.last().unwrap() {
            return None;
        }
        let idx = match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        self.values.get(idx)
    }

    /// `sup_t ‖v(t)‖_{L²}` over the whole line.
    pub fn sup_value_norm(&self) -> f64 {
        self.values.iter().map(|v| v.l2_norm()).fold(0.0, f64::max)
    }

    /// The value sequence `0, v_0, …, v_{K−1}, 0` on which every partition
    /// sum is realized.
    fn value_sequence(&self) -> Vec<Option<&ZonalField>> {
        let mut seq = Vec::with_capacity(self.values.len() + 2);
        seq.push(None);
        seq.extend(self.values.iter().map(Some));
        seq.push(None);
        seq
    }

    /// Exact `V^p` norm by dynamic programming over the breakpoint values.
    pub fn vp_norm(&self, p: f64) -> f64 {
        if !(p >= 1.0) {
            return f64::NAN;
        }
        if self.values.is_empty() {
            return 0.0;
        }
        let seq = self.value_sequence();
        let n = seq.len();
        let mut best = vec![0.0f64; n];
        let mut overall = 0.0f64;
        for j in 1..n {
            for i in 0..j {
                let cand = best[i] + field_dist(seq[i], seq[j]).powf(p);
                if cand > best[j] {
                    best[j] = cand;
                }
            }
            overall = overall.max(best[j]);
        }
        overall.powf(1.0 / p)
    }

    /// Exhaustive supremum over all subsets of the breakpoint value sequence;
    /// exponential in the piece count, for cross-checking the DP.
    pub fn vp_norm_exhaustive(&self, p: f64) -> Result<f64, VariationError> {
        const CAP: usize = 18;
        if self.values.len() > CAP {
            return Err(VariationError::TooManyPieces {
                got: self.values.len(),
                cap: CAP,
            });
        }
        if self.values.is_empty() {
            return Ok(0.0);
        }
        let seq = self.value_sequence();
        let n = seq.len();
        let mut best = 0.0f64;
        for mask in 0u32..(1 << n) {
            if (mask.count_ones() as usize) < 2 {
                continue;
            }
            let mut prev: Option<usize> = None;
            let mut sum = 0.0;
            for j in 0..n {
                if mask & (1 << j) != 0 {
                    if let Some(i) = prev {
                        sum += field_dist(seq[i], seq[j]).powf(p);
                    }
                    prev = Some(j);
                }
            }
            best = best.max(sum);
        }
        Ok(best.powf(1.0 / p))
    }

    /// Sum a partition's jump contributions directly (for tests probing
    /// partitions that are not subsets of the breakpoints).
    pub fn partition_sum(&self, partition: &[f64], p: f64) -> f64 {
        let mut sum = 0.0;
        for w in partition.windows(2) {
            let a = if w[0].is_infinite() { None } else { self.value_at(w[0]) };
            let b = if w[1].is_infinite() { None } else { self.value_at(w[1]) };
            sum += field_dist(a, b).powf(p);
        }
        sum.powf(1.0 / p)
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        Self {
            times: self.times.clone(),
            values: self.values.iter().map(|v| v.scaled(a)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        // Merge breakpoints; values add piecewise.
        let mut cuts: Vec<f64> = self
            .times
            .iter()
            .chain(other.times.iter())
            .copied()
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut times = Vec::new();
        let mut values = Vec::new();
        for w in cuts.windows(2) {
            let probe = w[0];
            let a = self.value_at(probe);
            let b = other.value_at(probe);
            let v = match (a, b) {
                (None, None) => ZonalField::zeros(0),
                (Some(x), None) => x.clone(),
                (None, Some(y)) => y.clone(),
                (Some(x), Some(y)) => x.add(y),
            };
            times.push(w[0]);
            values.push(v);
        }
        if let Some(&last) = cuts.last() {
            times.push(last);
        }
        StepPath::new(times, values).expect("merged cuts are increasing")
    }
}

/// Build a step path and check the atom normalization `Σ ‖φ_k‖^p = 1`.
pub fn up_atom(
    times: Vec<f64>,
    values: Vec<ZonalField>,
    p: f64,
) -> Result<(StepPath, bool), VariationError> {
    if !(p >= 1.0) {
        return Err(VariationError::BadExponent(p));
    }
    let path = StepPath::new(times, values)?;
    let total: f64 = path.values.iter().map(|v| v.l2_norm().powf(p)).sum();
    Ok((path, (total - 1.0).abs() < 1e-12))
}

/// Two-sided bracket for the atomic `U^p` norm.
#[derive(Clone, Copy, Debug)]
pub struct UpBracket {
    pub lower: f64,
    pub upper: f64,
}

impl UpBracket {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Bracket `‖path‖_{U^p}` between guaranteed bounds.
///
/// Upper: the telescoping decomposition into one-jump atoms `χ_{[t,∞)}ψ`
/// costs `Σ ‖jumps‖` (including the terminal jump when the path ends at a
/// finite time). Lower: `sup_t ‖v(t)‖` by the `L^∞` embedding, and
/// `‖v‖_{V^p}/2` because every atom has `p`-variation at most 2.
pub fn up_norm_bracket(path: &StepPath, p: f64) -> UpBracket {
    if path.values.is_empty() {
        return UpBracket {
            lower: 0.0,
            upper: 0.0,
        };
    }
    let mut upper = 0.0;
    let mut prev: Option<&ZonalField> = None;
    for v in &path.values {
        upper += field_dist(prev, Some(v));
        prev = Some(v);
    }
    if path.times.last().copied().unwrap_or(f64::INFINITY).is_finite() {
        upper += field_dist(prev, None);
    }
    let lower = path.sup_value_norm().max(path.vp_norm(p) / 2.0);
    UpBracket { lower, upper }
}

/// Whether piece values are taken in the fixed frame or already conjugated
/// along a linear flow (`u(t) = e^{itA} · base(t)`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Fixed,
    FlowAdapted(Flow),
}

impl StepPath {
    /// The path `t ↦ e^{−itA} u(t)` where `u` is this path interpreted in
    /// `frame`, resampled onto a refined breakpoint grid.
    ///
    /// When the frame already matches the requested flow the result is exact
    /// (the conjugation is the identity on piece values). Otherwise each
    /// piece is subdivided with at least `density` samples per unit of
    /// residual phase `max|spectral rate| × piece length`, and the value at
    /// each sub-piece left endpoint is used; the step-function error is
    /// proportional to the residual phase per sub-piece times the value norm.
    pub fn conjugated(
        &self,
        flow: Flow,
        frame: Frame,
        scheme: &ClusterScheme,
        density: f64,
    ) -> Result<StepPath, VariationError> {
        if frame == Frame::FlowAdapted(flow) {
            return Ok(self.clone());
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (i, v) in self.values.iter().enumerate() {
            let (a, b) = (self.times[i], self.times[i + 1]);
            let rate = residual_rate(v, flow, frame, scheme)?;
            let pieces = if b.is_finite() {
                ((density * rate * (b - a)).ceil() as usize).max(1)
            } else if rate == 0.0 || v.is_zero() {
                1
            } else {
                return Err(VariationError::UnboundedPiece);
            };
            let step = if b.is_finite() {
                (b - a) / pieces as f64
            } else {
                0.0
            };
            for r in 0..pieces {
                let s = a + r as f64 * step;
                times.push(s);
                values.push(conjugate_value(v, s, flow, frame, scheme)?);
            }
        }
        if let Some(&last) = self.times.last() {
            times.push(last);
        }
        if times.is_empty() {
            return Ok(StepPath::zero());
        }
        StepPath::new(times, values)
    }
}

/// Largest residual phase rate between the frame flow and the target flow.
fn residual_rate(
    v: &ZonalField,
    flow: Flow,
    frame: Frame,
    scheme: &ClusterScheme,
) -> Result<f64, VariationError> {
    let mut rate = 0.0f64;
    for (k, c) in v.coeffs().iter().enumerate() {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let target = crate::sphere::flow_freq_sixteenth(k, flow, scheme)? as f64 / 16.0;
        let source = match frame {
            Frame::Fixed => 0.0,
            Frame::FlowAdapted(g) => crate::sphere::flow_freq_sixteenth(k, g, scheme)? as f64 / 16.0,
        };
        rate = rate.max((target - source).abs());
    }
    Ok(rate)
}

/// `e^{−isA} u(s)` for one piece value in the given frame.
fn conjugate_value(
    v: &ZonalField,
    s: f64,
    flow: Flow,
    frame: Frame,
    scheme: &ClusterScheme,
) -> Result<ZonalField, VariationError> {
    let in_fixed_frame = match frame {
        Frame::Fixed => v.clone(),
        Frame::FlowAdapted(g) => propagate(v, s, g, scheme)?,
    };
    Ok(propagate(&in_fixed_frame, -s, flow, scheme)?)
}

/// Blockwise path data: one step path per dyadic block, each spectrally
/// supported in its block.
#[derive(Clone, Debug)]
pub struct BlockPath {
    pub frame: Frame,
    pub blocks: Vec<(DyadicBlock, StepPath)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockSpace {
    X,
    Y,
}

/// An `X^s`/`Y^s` norm value; in the `X` case the value is the bracket
/// midpoint and the bracket ends are reported alongside.
#[derive(Clone, Copy, Debug)]
pub struct BlockNormOutcome {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

/// `(Σ_N ⟨N⟩^{2s} ‖P_N u‖²)^{1/2}` with per-block flow-conjugated `U²`
/// brackets (`X`) or exact `V²` norms (`Y`).
pub fn xs_ys_norm(
    bp: &BlockPath,
    space: BlockSpace,
    s: f64,
    scheme: &ClusterScheme,
    density: f64,
) -> Result<BlockNormOutcome, VariationError> {
    let mut sq_value = 0.0;
    let mut sq_lower = 0.0;
    let mut sq_upper = 0.0;
    for (block, path) in &bp.blocks {
        let conj = path.conjugated(Flow::Laplacian, bp.frame, scheme, density)?;
        let weight = block.bracket().powf(2.0 * s);
        match space {
            BlockSpace::X => {
                let bracket = up_norm_bracket(&conj, 2.0);
                sq_value += weight * bracket.midpoint().powi(2);
                sq_lower += weight * bracket.lower.powi(2);
                sq_upper += weight * bracket.upper.powi(2);
            }
            BlockSpace::Y => {
                let v = conj.vp_norm(2.0);
                sq_value += weight * v * v;
                sq_lower += weight * v * v;
                sq_upper += weight * v * v;
            }
        }
    }
    Ok(BlockNormOutcome {
        value: sq_value.sqrt(),
        lower: sq_lower.sqrt(),
        upper: sq_upper.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream_rng;
    use crate::sphere::{ClusterScheme, DyadicBlock, Flow, ZonalField};
    use rand::Rng;

    fn unit_field(k: usize) -> ZonalField {
        ZonalField::basis(k)
    }

    fn random_path(pieces: usize, cutoff: usize, seed: u64) -> StepPath {
        let mut rng = stream_rng(seed, &[pieces as u64, cutoff as u64]);
        let mut times: Vec<f64> = (0..=pieces).map(|_| rng.random::<f64>() * 10.0).collect();
        times.sort_by(f64::total_cmp);
        times.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        while times.len() < pieces + 1 {
            times.push(times.last().unwrap() + 1.0);
        }
        let degrees: Vec<usize> = (0..=cutoff).collect();
        let values = (0..pieces)
            .map(|_| {
                let amp = rng.random::<f64>() * 2.0;
                ZonalField::random_on_degrees(&degrees, &mut rng)
                    .scaled(Complex64::new(amp, 0.0))
            })
            .collect();
        StepPath::new(times, values).unwrap()
    }

    #[test]
    fn vp_of_a_single_unit_step_counts_two_jumps() {
        let path = StepPath::new(vec![0.0, 1.0], vec![unit_field(2)]).unwrap();
        assert!((path.vp_norm(2.0) - 2f64.sqrt()).abs() < 1e-14);
        // Constant on [0, ∞): the v(∞) = 0 convention still sees both jumps.
        let half = StepPath::new(vec![0.0, f64::INFINITY], vec![unit_field(1)]).unwrap();
        for p in [1.0, 2.0, 4.0] {
            assert!((half.vp_norm(p) - 2f64.powf(1.0 / p)).abs() < 1e-14);
        }
        assert_eq!(StepPath::zero().vp_norm(2.0), 0.0);
    }

    #[test]
    fn dp_equals_exhaustive_search() {
        for seed in 0..20u64 {
            let path = random_path(1 + (seed as usize % 9), 3, 100 + seed);
            for &p in &[1.0, 2.0, 3.5] {
                let dp = path.vp_norm(p);
                let brute = path.vp_norm_exhaustive(p).unwrap();
                assert!(
                    (dp - brute).abs() < 1e-12,
                    "seed {seed} p {p}: {dp} vs {brute}"
                );
            }
        }
    }

    #[test]
    fn arbitrary_partitions_never_exceed_the_breakpoint_supremum() {
        let mut rng = stream_rng(55, &[0]);
        let path = random_path(7, 3, 777);
        let vp = path.vp_norm(2.0);
        for _ in 0..200 {
            let mut pts: Vec<f64> = (0..6).map(|_| rng.random::<f64>() * 14.0 - 2.0).collect();
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            if rng.random::<f64>() < 0.3 {
                pts.push(f64::INFINITY);
            }
            assert!(path.partition_sum(&pts, 2.0) <= vp + 1e-12);
        }
    }

    #[test]
    fn vp_is_nonincreasing_in_p() {
        for seed in 0..8u64 {
            let path = random_path(6, 2, 300 + seed);
            let norms: Vec<f64> = [1.0, 2.0, 4.0, 8.0]
                .iter()
                .map(|&p| path.vp_norm(p))
                .collect();
            for w in norms.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "{norms:?}");
            }
        }
    }

    #[test]
    fn atom_validation_and_variation_bound() {
        let inv = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let (atom, valid) = up_atom(
            vec![0.0, 1.0, 2.0],
            vec![unit_field(0).scaled(inv), unit_field(3).scaled(inv)],
            2.0,
        )
        .unwrap();
        assert!(valid);
        assert!(atom.vp_norm(2.0) <= 2.0 + 1e-12);
        let (_, invalid) = up_atom(vec![0.0, 1.0], vec![unit_field(0).scaled(inv)], 2.0).unwrap();
        assert!(!invalid);
        // Random valid atoms always have V^p at most 2.
        let mut rng = stream_rng(56, &[1]);
        for trial in 0..20u64 {
            let pieces = 2 + (trial as usize % 5);
            let p = [1.0, 2.0, 4.0][trial as usize % 3];
            let mut vals: Vec<ZonalField> = (0..pieces)
                .map(|_| {
                    ZonalField::random_on_degrees(&[0, 1, 2], &mut rng)
                        .scaled(Complex64::new(rng.random::<f64>() + 0.1, 0.0))
                })
                .collect();
            let total: f64 = vals.iter().map(|v| v.l2_norm().powf(p)).sum();
            let scale = total.powf(-1.0 / p);
            for v in &mut vals {
                *v = v.scaled(Complex64::new(scale, 0.0));
            }
            let times: Vec<f64> = (0..=pieces).map(|i| i as f64).collect();
            let (atom, valid) = up_atom(times, vals, p).unwrap();
            assert!(valid);
            assert!(atom.vp_norm(p) <= 2.0 + 1e-10);
        }
    }

    #[test]
    fn bracket_examples() {
        let phi = unit_field(2).scaled(Complex64::new(0.8, 0.6));
        let norm = phi.l2_norm();
        let bounded = StepPath::new(vec![1.0, 3.0], vec![phi.clone()]).unwrap();
        let br = up_norm_bracket(&bounded, 2.0);
        assert!((br.upper - 2.0 * norm).abs() < 1e-12);
        assert!(br.lower >= norm - 1e-12 && br.lower <= norm + 1e-12);
        assert!(br.lower <= norm && norm <= br.upper);
        // One-jump path to infinity pinches.
        let half = StepPath::new(vec![1.0, f64::INFINITY], vec![phi.clone()]).unwrap();
        let pinch = up_norm_bracket(&half, 2.0);
        assert!((pinch.lower - norm).abs() < 1e-12);
        assert!((pinch.upper - norm).abs() < 1e-12);
        let zero = up_norm_bracket(&StepPath::zero(), 2.0);
        assert_eq!((zero.lower, zero.upper), (0.0, 0.0));
    }

    #[test]
    fn bracket_and_vp_are_homogeneous_and_subadditive() {
        let a = random_path(5, 2, 900);
        let b = random_path(4, 2, 901);
        let lam = Complex64::new(-1.3, 0.4);
        let scaled = a.scaled(lam);
        let br = up_norm_bracket(&a, 2.0);
        let br_s = up_norm_bracket(&scaled, 2.0);
        assert!((br_s.lower - lam.norm() * br.lower).abs() < 1e-10);
        assert!((br_s.upper - lam.norm() * br.upper).abs() < 1e-10);
        assert!((scaled.vp_norm(2.0) - lam.norm() * a.vp_norm(2.0)).abs() < 1e-10);
        let sum = a.add(&b);
        assert!(sum.vp_norm(2.0) <= a.vp_norm(2.0) + b.vp_norm(2.0) + 1e-10);
        let br_sum = up_norm_bracket(&sum, 2.0);
        let br_b = up_norm_bracket(&b, 2.0);
        assert!(br_sum.upper <= br.upper + br_b.upper + 1e-10);
        // L^∞ embedding: sup norm never exceeds the upper bracket.
        assert!(sum.sup_value_norm() <= br_sum.upper + 1e-12);
    }

    #[test]
    fn conjugation_of_flow_adapted_paths_is_exact() {
        let scheme = ClusterScheme::s3();
        let phi = unit_field(3);
        let path = StepPath::new(vec![0.25, 2.0], vec![phi.clone()]).unwrap();
        let conj = path
            .conjugated(Flow::Laplacian, Frame::FlowAdapted(Flow::Laplacian), &scheme, 8.0)
            .unwrap();
        assert_eq!(conj.pieces(), 1);
        assert!(field_dist(Some(&conj.values()[0]), Some(&phi)) < 1e-15);
        let z = StepPath::zero()
            .conjugated(Flow::Laplacian, Frame::Fixed, &scheme, 8.0)
            .unwrap();
        assert_eq!(z.pieces(), 0);
    }

    #[test]
    fn clustered_and_laplacian_conjugations_differ_by_a_slow_phase() {
        // A Laplacian-adapted path conjugated by the clustered flow picks up
        // only the residual phases e^{±it}, so a coarse resampling already
        // reproduces the V² norm closely.
        let scheme = ClusterScheme::s3();
        let mut rng = stream_rng(57, &[2]);
        let phi = ZonalField::random_on_degrees(&[1, 2, 3, 4], &mut rng);
        let path = StepPath::new(vec![0.0, 1.0, 2.5], vec![phi.clone(), phi.scaled(Complex64::new(0.3, 0.0))]).unwrap();
        let exact = path
            .conjugated(Flow::Laplacian, Frame::FlowAdapted(Flow::Laplacian), &scheme, 8.0)
            .unwrap();
        let resampled = path
            .conjugated(Flow::Clustered, Frame::FlowAdapted(Flow::Laplacian), &scheme, 64.0)
            .unwrap();
        // Residual rate is 1, so the sampling modulus per sub-piece is ~1/64.
        let vp_exact = exact.vp_norm(2.0);
        let vp_res = resampled.vp_norm(2.0);
        assert!(
            (vp_res - vp_exact).abs() <= 2.0 * 0.1 + 0.2,
            "{vp_exact} vs {vp_res}"
        );
    }

    #[test]
    fn block_norm_pinches_on_single_flow_adapted_steps() {
        let scheme = ClusterScheme::s3();
        let n = 4u32;
        let phi = ZonalField::basis(5).scaled(Complex64::new(0.7, -0.2)); // cluster 5 ∈ [4, 8)
        let path = StepPath::new(vec![0.0, f64::INFINITY], vec![phi.clone()]).unwrap();
        let bp = BlockPath {
            frame: Frame::FlowAdapted(Flow::Laplacian),
            blocks: vec![(DyadicBlock::new(n).unwrap(), path)],
        };
        let out = xs_ys_norm(&bp, BlockSpace::X, 1.0, &scheme, 8.0).unwrap();
        let expect = DyadicBlock::new(n).unwrap().bracket() * phi.l2_norm();
        assert!((out.value - expect).abs() < 1e-12);
        assert!((out.upper - out.lower).abs() < 1e-12);
        let zero = BlockPath {
            frame: Frame::Fixed,
            blocks: vec![],
        };
        assert_eq!(
            xs_ys_norm(&zero, BlockSpace::Y, 1.0, &scheme, 8.0).unwrap().value,
            0.0
        );
    }

    #[test]
    fn y_norm_bounded_by_twice_the_x_upper_bracket() {
        let scheme = ClusterScheme::s3();
        let mut rng = stream_rng(58, &[3]);
        for trial in 0..5u64 {
            let mut blocks = Vec::new();
            for &n in &[1u32, 2, 4] {
                let degrees: Vec<usize> = DyadicBlock::new(n).unwrap().range().collect();
                let pieces = 2 + (trial as usize % 3);
                let times: Vec<f64> = (0..=pieces).map(|i| i as f64 * 0.5).collect();
                let values: Vec<ZonalField> = (0..pieces)
                    .map(|_| ZonalField::random_on_degrees(&degrees, &mut rng))
                    .collect();
                blocks.push((
                    DyadicBlock::new(n).unwrap(),
                    StepPath::new(times, values).unwrap(),
                ));
            }
            let bp = BlockPath {
                frame: Frame::FlowAdapted(Flow::Laplacian),
                blocks,
            };
            let x = xs_ys_norm(&bp, BlockSpace::X, 1.0, &scheme, 8.0).unwrap();
            let y = xs_ys_norm(&bp, BlockSpace::Y, 1.0, &scheme, 8.0).unwrap();
            assert!(y.value <= 2.0 * x.upper + 1e-10, "{} vs {}", y.value, x.upper);
        }
    }
}
