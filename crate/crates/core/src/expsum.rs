//! Quadratic exponential sums and the circle-method toolkit.
//!
//! Two time conventions coexist and both are exposed. Sums of the form
//! `S(t) = Σ_{n∈[b,b+N]} c_n e^{−it μ_n²}` with `μ_n = n + α/4` live on the
//! base interval `τ₀ = [0, 32π]`, which is a joint period because
//! `16 μ_n² ∈ ℤ`. The windowed Gauss-Weyl sums of the arc analysis use the
//! 1-periodic convention `f(t) = Σ_n σ_n e^{2πitn²}`; switching `t ↦ −t`
//! moves between them, and every norm here is invariant under that switch.
//!
//! For even `p` the `L^p(τ₀)` norm of `S` is a mean of a trigonometric
//! polynomial and is computed exactly:
//!
//! * `p = 2` by Parseval (distinct `μ_n²`),
//! * `p = 4, 6` by enumerating frequency resonances of `S^{p/2}`, which costs
//!   `O(N²)`/`O(N³)` independently of the window offset `b`,
//! * `p ≥ 8` by a rectangle rule with one sample per unit of the phase
//!   lattice, evaluated as a single FFT when the sample budget allows.
//!
//! Everything else (odd or fractional `p`, oversized budgets) goes through a
//! stratified sampling estimate that reports its refinement delta.

use crate::report::{ScalingReport, ReportError};
use crate::seed::stream_rng;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use thiserror::Error;

/// The base time interval `[0, 32π]`.
pub const TAU0: f64 = 32.0 * PI;

/// Hard cap on rectangle-rule samples for the exact even-`p` route.
pub const FFT_SAMPLE_CAP: u64 = 1 << 25;

/// Cap on enumerated resonance tuples (pairs or triples).
const TUPLE_CAP: u64 = 48_000_000;

#[derive(Debug, Error)]
pub enum ExpSumError {
    #[error("coefficient window must be nonempty")]
    EmptyWindow,
    #[error("exact L^p requires even p ≥ 2, got {0} (use lp_norm_approx)")]
    OddExponent(u32),
    #[error("exact L^{p} needs {needed} samples, over the cap {cap}")]
    SampleBudget { p: u32, needed: u128, cap: u64 },
    #[error("approximate norms need at least {need} samples, got {got}")]
    TooFewSamples { got: usize, need: usize },
    #[error("exponent must be ≥ 1, got {0}")]
    BadExponent(f64),
    #[error("window length mismatch: {got} coefficients for {want} support points")]
    WindowMismatch { got: usize, want: usize },
    #[error("invalid major-arc input: {0}")]
    InvalidArc(String),
    #[error(transparent)]
    Report(#[from] ReportError),
}

fn kahan_add(sum: &mut Complex64, comp: &mut Complex64, term: Complex64) {
    let y = term - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
}

// ---------------------------------------------------------------------------
// ExpSumSpec
// ---------------------------------------------------------------------------

/// A quadratic exponential sum `Σ_{n=b}^{b+N} c_n e^{−it(n+α/4)²}`.
#[derive(Clone, Debug)]
pub struct ExpSumSpec {
    b: u64,
    alpha: u32,
    coeffs: Vec<Complex64>,
}

impl ExpSumSpec {
    pub fn new(b: u64, alpha: u32, coeffs: Vec<Complex64>) -> Result<Self, ExpSumError> {
        if coeffs.is_empty() {
            return Err(ExpSumError::EmptyWindow);
        }
        Ok(Self { b, alpha, coeffs })
    }

    /// Window length `N` (the window is `[b, b+N]`, inclusive).
    pub fn window_len(&self) -> u64 {
        self.coeffs.len() as u64 - 1
    }

    pub fn window(&self) -> (u64, u64) {
        (self.b, self.b + self.window_len())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `16 μ_{b+j}² = (4(b+j)+α)²`, exact.
    fn freq16(&self, j: usize) -> u128 {
        let m = 4 * (self.b + j as u64) as u128 + self.alpha as u128;
        m * m
    }

    /// Frequency relative to the window start; the global phase it drops has
    /// modulus one and cannot affect any norm.
    fn rel_freq16(&self, j: usize) -> u64 {
        (self.freq16(j) - self.freq16(0)) as u64
    }

    /// Evaluate the sum at `t` with compensated accumulation.
    pub fn eval(&self, t: f64) -> Complex64 {
        let mut sum = Complex64::ZERO;
        let mut comp = Complex64::ZERO;
        for (j, &c) in self.coeffs.iter().enumerate() {
            let mu_sq = self.freq16(j) as f64 / 16.0;
            kahan_add(&mut sum, &mut comp, c * Complex64::from_polar(1.0, -mu_sq * t));
        }
        sum
    }

    /// Exact `L^p(τ₀)` norm for even `p ≥ 2`.
    pub fn lp_norm(&self, p: u32) -> Result<f64, ExpSumError> {
        if p < 2 || p % 2 != 0 {
            return Err(ExpSumError::OddExponent(p));
        }
        match p {
            2 => Ok(TAU0.sqrt() * self.l2()),
            4 | 6 => {
                let freqs: Vec<u64> = (0..self.coeffs.len()).map(|j| self.rel_freq16(j)).collect();
                let sum_sq = resonance_power_sum(&freqs, &self.coeffs, p / 2)?;
                Ok((TAU0 * sum_sq).powf(1.0 / p as f64))
            }
            _ => {
                let rel_max = self.rel_freq16(self.coeffs.len() - 1) as u128;
                let needed = (p as u128 / 2) * rel_max + 1;
                if needed > FFT_SAMPLE_CAP as u128 {
                    return Err(ExpSumError::SampleBudget {
                        p,
                        needed,
                        cap: FFT_SAMPLE_CAP,
                    });
                }
                let freqs: Vec<u64> = (0..self.coeffs.len()).map(|j| self.rel_freq16(j)).collect();
                let mean = fft_rectangle_mean(&freqs, &self.coeffs, p, needed as usize);
                Ok((TAU0 * mean).powf(1.0 / p as f64))
            }
        }
    }

    /// Stratified-sampling estimate of the `L^p(τ₀)` norm for real `p ≥ 1`,
    /// with the refinement delta against the half-budget estimate.
    pub fn lp_norm_approx(
        &self,
        p: f64,
        samples: usize,
        seed: u64,
    ) -> Result<ApproxNorm, ExpSumError> {
        if samples < 10_000 {
            return Err(ExpSumError::TooFewSamples {
                got: samples,
                need: 10_000,
            });
        }
        if !(p >= 1.0) {
            return Err(ExpSumError::BadExponent(p));
        }
        let mut rng = stream_rng(seed, &[0x4c70, self.b, self.coeffs.len() as u64]);
        let mut total = 0.0f64;
        let mut total_c = 0.0f64;
        let mut half = 0.0f64; // strata with even index: an L/2-stratified estimate
        let l = samples as f64;
        for r in 0..samples {
            let u: f64 = rng.random();
            let t = (r as f64 + u) / l * TAU0;
            let v = self.eval(t).norm().powf(p);
            let y = v - total_c;
            let s = total + y;
            total_c = (s - total) - y;
            total = s;
            if r % 2 == 0 {
                half += v;
            }
        }
        let value = (TAU0 * total / l).powf(1.0 / p);
        let value_half = (TAU0 * half / (l / 2.0).ceil()).powf(1.0 / p);
        Ok(ApproxNorm {
            value,
            refinement_delta: (value - value_half).abs(),
        })
    }
}

/// An approximate norm with its reported refinement delta.
#[derive(Clone, Copy, Debug)]
pub struct ApproxNorm {
    pub value: f64,
    pub refinement_delta: f64,
}

/// `Σ_K |d_K|²` where `d` are the frequency-collected coefficients of
/// `S^{half}`; this is the mean of `|S|^{2·half}` over a joint period.
fn resonance_power_sum(
    freqs: &[u64],
    amps: &[Complex64],
    half: u32,
) -> Result<f64, ExpSumError> {
    let len = freqs.len();
    let tuples: u64 = match half {
        2 => (len as u64) * (len as u64 + 1) / 2,
        3 => {
            let l = len as u64;
            l * (l + 1) * (l + 2) / 6
        }
        _ => unreachable!("resonance route only covers p = 4, 6"),
    };
    if tuples > TUPLE_CAP {
        return Err(ExpSumError::SampleBudget {
            p: 2 * half,
            needed: tuples as u128,
            cap: TUPLE_CAP,
        });
    }
    // (key, encoded tuple): the encoding makes the sort order total, so the
    // aggregation order is independent of the sorting algorithm.
    let mut entries: Vec<(u64, u64)> = Vec::with_capacity(tuples as usize);
    let stride = len as u64;
    match half {
        2 => {
            for j in 0..len {
                for k in j..len {
                    entries.push((freqs[j] + freqs[k], j as u64 * stride + k as u64));
                }
            }
        }
        3 => {
            for j in 0..len {
                for k in j..len {
                    let fjk = freqs[j] + freqs[k];
                    let base = (j as u64 * stride + k as u64) * stride;
                    for l in k..len {
                        entries.push((fjk + freqs[l], base + l as u64));
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    entries.par_sort_unstable();
    let decode_amp = |code: u64| -> Complex64 {
        match half {
            2 => {
                let j = (code / stride) as usize;
                let k = (code % stride) as usize;
                let factor = if j == k { 1.0 } else { 2.0 };
                amps[j] * amps[k] * factor
            }
            _ => {
                let l = (code % stride) as usize;
                let jk = code / stride;
                let k = (jk % stride) as usize;
                let j = (jk / stride) as usize;
                let factor = if j == k && k == l {
                    1.0
                } else if j == k || k == l {
                    3.0
                } else {
                    6.0
                };
                amps[j] * amps[k] * amps[l] * factor
            }
        }
    };
    let mut total = 0.0f64;
    let mut idx = 0usize;
    while idx < entries.len() {
        let key = entries[idx].0;
        let mut d = Complex64::ZERO;
        while idx < entries.len() && entries[idx].0 == key {
            d += decode_amp(entries[idx].1);
            idx += 1;
        }
        total += d.norm_sqr();
    }
    Ok(total)
}

/// Mean of `|S|^p` over its period via a rectangle rule with `samples`
/// points, evaluated as one FFT. Exact when `samples` exceeds the maximal
/// frequency of `|S|^p` on the integer lattice, which the caller guarantees.
fn fft_rectangle_mean(freqs: &[u64], amps: &[Complex64], p: u32, samples: usize) -> f64 {
    let n = next_fast_len(samples);
    let mut buf = vec![Complex64::ZERO; n];
    for (&f, &a) in freqs.iter().zip(amps) {
        buf[f as usize] += a;
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    fft.process(&mut buf);
    let halfp = (p / 2) as i32;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in &buf {
        let term = v.norm_sqr().powi(halfp);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum / n as f64
}

/// Smallest 5-smooth integer ≥ `n`; keeps the FFT plan mixed-radix friendly.
fn next_fast_len(n: usize) -> usize {
    let mut best = usize::MAX;
    let mut p2 = 1usize;
    while p2 / 2 < n {
        let mut p23 = p2;
        while p23 / 3 < n {
            let mut p235 = p23;
            while p235 / 5 < n {
                if p235 >= n && p235 < best {
                    best = p235;
                }
                match p235.checked_mul(5) {
                    Some(v) => p235 = v,
                    None => break,
                }
            }
            match p23.checked_mul(3) {
                Some(v) => p23 = v,
                None => break,
            }
        }
        match p2.checked_mul(2) {
            Some(v) => p2 = v,
            None => break,
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Lemma-style slope experiment
// ---------------------------------------------------------------------------

/// Coefficient families for the scaling experiments; all are ℓ²-normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoeffFamily {
    Constant,
    RandomPhase,
    RandomGaussian,
}

impl CoeffFamily {
    pub fn label(self) -> &'static str {
        match self {
            CoeffFamily::Constant => "constant",
            CoeffFamily::RandomPhase => "random-phase",
            CoeffFamily::RandomGaussian => "random-gaussian",
        }
    }

    pub fn sample<R: Rng>(self, len: usize, rng: &mut R) -> Vec<Complex64> {
        let mut coeffs = match self {
            CoeffFamily::Constant => vec![Complex64::ONE; len],
            CoeffFamily::RandomPhase => (0..len)
                .map(|_| Complex64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI))
                .collect(),
            CoeffFamily::RandomGaussian => (0..len)
                .map(|_| {
                    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                })
                .collect(),
        };
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for c in &mut coeffs {
                *c /= norm;
            }
        } else {
            coeffs[0] = Complex64::ONE;
        }
        coeffs
    }
}

#[derive(Clone, Debug)]
pub struct LemmaLpConfig {
    pub p: u32,
    pub sizes: Vec<u64>,
    pub trials: u32,
    pub families: Vec<CoeffFamily>,
    pub b_choices: Vec<u64>,
    pub alpha: u32,
    pub master_seed: u64,
    pub approx_samples: usize,
}

impl LemmaLpConfig {
    /// Predicted slope `1/2 − 2/p` of the scaling in the window length.
    pub fn predicted_slope(&self) -> f64 {
        0.5 - 2.0 / self.p as f64
    }
}

#[derive(Clone, Debug)]
pub struct LemmaLpRow {
    pub n: u64,
    pub family: &'static str,
    pub trial: u32,
    pub b: u64,
    pub route: &'static str,
    pub norm: f64,
    pub delta: f64,
}

#[derive(Clone, Debug)]
pub struct LemmaLpOutcome {
    pub report: ScalingReport,
    pub rows: Vec<LemmaLpRow>,
}

/// Measure `‖S‖_{L^p(τ₀)}` for ℓ²-normalized coefficient draws over a list
/// of window lengths and fit the slope of the max-over-trials norm.
pub fn verify_lemma_lp(cfg: &LemmaLpConfig) -> Result<LemmaLpOutcome, ExpSumError> {
    #[derive(Clone)]
    struct Job {
        n: u64,
        family: CoeffFamily,
        trial: u32,
    }
    let mut jobs = Vec::new();
    for &n in &cfg.sizes {
        for &family in &cfg.families {
            for trial in 0..cfg.trials {
                jobs.push(Job { n, family, trial });
            }
        }
    }
    let rows: Result<Vec<LemmaLpRow>, ExpSumError> = jobs
        .par_iter()
        .map(|job| {
            let family_id = match job.family {
                CoeffFamily::Constant => 1u64,
                CoeffFamily::RandomPhase => 2,
                CoeffFamily::RandomGaussian => 3,
            };
            let mut rng = stream_rng(
                cfg.master_seed,
                &[0x1e, job.n, family_id, job.trial as u64],
            );
            let b = if cfg.b_choices.is_empty() {
                0
            } else {
                // Cycle with a random offset so each b value is exercised.
                let offset = rng.random_range(0..cfg.b_choices.len());
                cfg.b_choices[(job.trial as usize + offset) % cfg.b_choices.len()]
            };
            let coeffs = job.family.sample(job.n as usize + 1, &mut rng);
            let spec = ExpSumSpec::new(b, cfg.alpha, coeffs)?;
            let (norm, route, delta) = match spec.lp_norm(cfg.p) {
                Ok(v) => (v, "exact", 0.0),
                Err(ExpSumError::SampleBudget { .. }) | Err(ExpSumError::OddExponent(_)) => {
                    let approx = spec.lp_norm_approx(
                        cfg.p as f64,
                        cfg.approx_samples,
                        cfg.master_seed ^ 0x5eed,
                    )?;
                    (approx.value, "stratified", approx.refinement_delta)
                }
                Err(e) => return Err(e),
            };
            Ok(LemmaLpRow {
                n: job.n,
                family: job.family.label(),
                trial: job.trial,
                b,
                route,
                norm,
                delta,
            })
        })
        .collect();
    let rows = rows?;
    let mut samples = Vec::new();
    for &n in &cfg.sizes {
        let max = rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| r.norm)
            .fold(f64::MIN, f64::max);
        samples.push((n as f64, max));
    }
    let report = ScalingReport::fit(samples)?;
    Ok(LemmaLpOutcome { report, rows })
}

// ---------------------------------------------------------------------------
// Windowed Gauss-Weyl sums (1-periodic convention)
// ---------------------------------------------------------------------------

/// Smooth cutoff sequence: `1` on `[b, b+N]`, linear ramps down to `0` at
/// `b−N` and `b+2N`, zero outside.
///
/// Steps satisfy `|σ_{n+1} − σ_n| ≤ 1/N` exactly. The total variation of the
/// step sequence is `4/N` for this profile (any profile that rises and falls
/// with unit total rise has step variation at least `2/N`).
#[derive(Clone, Debug)]
pub struct WindowSequence {
    b: u64,
    n: u64,
    first: i64,
    sigma: Vec<f64>,
}

impl WindowSequence {
    pub fn new(b: u64, n: u64) -> Self {
        assert!(n >= 1, "window length must be positive");
        let first = b as i64 - n as i64;
        let len = 3 * n as usize + 1;
        let mut sigma = vec![0.0; len];
        for (i, s) in sigma.iter_mut().enumerate() {
            let m = first + i as i64;
            let up = b as i64;
            let down = b as i64 + n as i64;
            *s = if m < up {
                (m - first) as f64 / n as f64
            } else if m <= down {
                1.0
            } else {
                1.0 - (m - down) as f64 / n as f64
            };
        }
        Self { b, n, first, sigma }
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Inclusive support `[b−N, b+2N]`.
    pub fn support(&self) -> (i64, i64) {
        (self.first, self.first + self.sigma.len() as i64 - 1)
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn sigma_at(&self, m: i64) -> f64 {
        if m < self.first {
            return 0.0;
        }
        self.sigma
            .get((m - self.first) as usize)
            .copied()
            .unwrap_or(0.0)
    }

    pub fn sum(&self) -> f64 {
        self.sigma.iter().sum()
    }

    /// Largest step `|σ_{m+1} − σ_m|`, including the boundary steps from 0.
    pub fn max_step(&self) -> f64 {
        let mut max = 0.0f64;
        let mut prev = 0.0;
        for &s in &self.sigma {
            max = max.max((s - prev).abs());
            prev = s;
        }
        max.max(prev.abs())
    }

    /// Total variation of the difference sequence `(σ_{m+1} − σ_m)`.
    pub fn step_variation(&self) -> f64 {
        let mut steps = Vec::with_capacity(self.sigma.len() + 1);
        let mut prev = 0.0;
        for &s in &self.sigma {
            steps.push(s - prev);
            prev = s;
        }
        steps.push(0.0 - prev);
        let mut tv = 0.0;
        for w in steps.windows(2) {
            tv += (w[1] - w[0]).abs();
        }
        tv
    }

    /// `f(t) = Σ_m σ_m e^{2πitm²}`.
    pub fn weyl_sum(&self, t: f64) -> Complex64 {
        let mut sum = Complex64::ZERO;
        let mut comp = Complex64::ZERO;
        for (i, &s) in self.sigma.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            let m = self.first + i as i64;
            let phase = 2.0 * PI * wrap_unit(t * (m * m) as f64);
            kahan_add(&mut sum, &mut comp, Complex64::from_polar(s, phase));
        }
        sum
    }
}

/// Fractional part in `[0, 1)`, used to keep phase arguments small.
fn wrap_unit(x: f64) -> f64 {
    x - x.floor()
}

/// A coefficient sequence against a window: `Σ_m c_m σ_m e^{2πitm²}`.
#[derive(Clone, Debug)]
pub struct WindowedWeylSum {
    window: WindowSequence,
    coeffs: Vec<Complex64>,
}

impl WindowedWeylSum {
    pub fn new(window: WindowSequence, coeffs: Vec<Complex64>) -> Result<Self, ExpSumError> {
        if coeffs.len() != window.sigma.len() {
            return Err(ExpSumError::WindowMismatch {
                got: coeffs.len(),
                want: window.sigma.len(),
            });
        }
        Ok(Self { window, coeffs })
    }

    /// ℓ²-normalized coefficients from a family draw.
    pub fn sampled(window: WindowSequence, family: CoeffFamily, rng: &mut impl Rng) -> Self {
        let coeffs = family.sample(window.sigma.len(), rng);
        Self { window, coeffs }
    }

    pub fn window(&self) -> &WindowSequence {
        &self.window
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let mut sum = Complex64::ZERO;
        let mut comp = Complex64::ZERO;
        for (i, (&s, &c)) in self.window.sigma.iter().zip(&self.coeffs).enumerate() {
            let m = self.window.first + i as i64;
            let phase = 2.0 * PI * wrap_unit(t * (m * m) as f64);
            kahan_add(
                &mut sum,
                &mut comp,
                c * Complex64::from_polar(s, phase),
            );
        }
        sum
    }

    /// Largest possible modulus `Σ |c_m| σ_m`.
    pub fn mass(&self) -> f64 {
        self.window
            .sigma
            .iter()
            .zip(&self.coeffs)
            .map(|(s, c)| s * c.norm())
            .sum()
    }

    /// Exact `L⁴(0,1)` norm by pair-resonance enumeration.
    pub fn l4_norm(&self) -> Result<f64, ExpSumError> {
        let mut freqs = Vec::new();
        let mut amps = Vec::new();
        for (i, (&s, &c)) in self.window.sigma.iter().zip(&self.coeffs).enumerate() {
            let m = self.window.first + i as i64;
            let amp = c * s;
            if amp.norm_sqr() > 0.0 {
                freqs.push((m * m) as u64);
                amps.push(amp);
            }
        }
        if freqs.is_empty() {
            return Ok(0.0);
        }
        let sum_sq = resonance_power_sum(&freqs, &amps, 2)?;
        Ok(sum_sq.powf(0.25))
    }

    /// Lebesgue measure of `{t ∈ [0,1]: |f(t)| > λ}` by stratified sampling,
    /// with the binomial Monte-Carlo standard error.
    pub fn superlevel_measure(&self, lambda: f64, samples: usize, seed: u64) -> SuperlevelEstimate {
        let mut rng = stream_rng(seed, &[0x51, self.window.b, self.window.n]);
        if lambda <= 0.0 {
            return SuperlevelEstimate {
                measure: 1.0,
                mc_sigma: 0.0,
            };
        }
        if lambda > self.mass() {
            return SuperlevelEstimate {
                measure: 0.0,
                mc_sigma: 0.0,
            };
        }
        let mut hits = 0usize;
        for r in 0..samples {
            let u: f64 = rng.random();
            let t = (r as f64 + u) / samples as f64;
            if self.eval(t).norm() > lambda {
                hits += 1;
            }
        }
        let p = hits as f64 / samples as f64;
        SuperlevelEstimate {
            measure: p,
            mc_sigma: (p * (1.0 - p) / samples as f64).sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SuperlevelEstimate {
    pub measure: f64,
    pub mc_sigma: f64,
}

// ---------------------------------------------------------------------------
// Divisor counting and Dirichlet approximation
// ---------------------------------------------------------------------------

/// `#{(n₁,n₂) ∈ ℕ²: n₁,n₂ ≤ N, n₁(n₂+b) = k}` by trial division.
pub fn divisor_count(k: u64, b: u64, n: u64) -> u64 {
    assert!(k >= 1);
    let mut count = 0;
    let mut d = 1;
    while d * d <= k {
        if k % d == 0 {
            let e = k / d;
            // n1 = d
            if d <= n && e > b && e - b <= n {
                count += 1;
            }
            // n1 = e (skip the square root double count)
            if e != d && e <= n && d > b && d - b <= n {
                count += 1;
            }
        }
        d += 1;
    }
    count
}

/// Reduced fraction `a/q` with `q ≤ Q` and `|t − a/q| ≤ 1/(qQ)`, by the
/// continued-fraction expansion of `t`.
pub fn dirichlet_approx(t: f64, q_max: u64) -> (u64, u64) {
    assert!(q_max >= 1);
    assert!((0.0..=1.0).contains(&t));
    let mut h_prev: u64 = 1;
    let mut k_prev: u64 = 0;
    let mut h: u64 = t.floor() as u64;
    let mut k: u64 = 1;
    let mut x = t - t.floor();
    for _ in 0..64 {
        if x.abs() < 1e-15 {
            break;
        }
        let inv = 1.0 / x;
        let a = inv.floor();
        if a >= 1e18 {
            break;
        }
        let a_int = a as u64;
        let (h_next, overflow_h) = match a_int.checked_mul(h) {
            Some(v) => (v.checked_add(h_prev), false),
            None => (None, true),
        };
        let k_next = a_int.checked_mul(k).and_then(|v| v.checked_add(k_prev));
        match (h_next, k_next, overflow_h) {
            (Some(hn), Some(kn), false) => {
                if kn > q_max {
                    break;
                }
                h_prev = h;
                k_prev = k;
                h = hn;
                k = kn;
            }
            _ => break,
        }
        x = inv - a;
    }
    (h, k)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

// ---------------------------------------------------------------------------
// Major and minor arcs
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct MajorArcSample {
    pub measured: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Compare `|f(t)|` on a major arc against `q^{−1/2}(|t−a/q| + N^{−2})^{−1/2}`.
pub fn major_arc_check(
    w: &WindowSequence,
    a: u64,
    q: u64,
    t: f64,
) -> Result<MajorArcSample, ExpSumError> {
    let n = w.n();
    if a == 0 || a >= q {
        return Err(ExpSumError::InvalidArc(format!("need 1 ≤ a < q, got a={a}, q={q}")));
    }
    if q >= n {
        return Err(ExpSumError::InvalidArc(format!("need q < N, got q={q}, N={n}")));
    }
    if gcd(a, q) != 1 {
        return Err(ExpSumError::InvalidArc(format!("a/q = {a}/{q} is not reduced")));
    }
    let dist = (t - a as f64 / q as f64).abs();
    if dist >= 1.0 / (q as f64 * n as f64) {
        return Err(ExpSumError::InvalidArc(format!(
            "|t − a/q| = {dist} is not below 1/(qN)"
        )));
    }
    let measured = w.weyl_sum(t).norm();
    let bound = (q as f64).sqrt().recip() * (dist + (n as f64).powi(-2)).sqrt().recip();
    Ok(MajorArcSample {
        measured,
        bound,
        ratio: measured / bound,
    })
}

/// Distance from `t` to `a/q` on the circle `ℝ/ℤ`.
fn circle_dist(t: f64, a: u64, q: u64) -> f64 {
    let d = (t - a as f64 / q as f64).abs();
    d.min((1.0 - d).abs())
}

/// Membership in the major arcs `∪_{q ≤ N^ν} ∪_{a: gcd(a,q)=1} {circle
/// distance ≤ N^{ν−2}}`; exact small-denominator search.
pub fn is_major_arc(t: f64, n: u64, nu: f64) -> bool {
    let q_cap = (n as f64).powf(nu).floor() as u64;
    let radius = (n as f64).powf(nu - 2.0);
    for q in 1..=q_cap.max(1) {
        let a = (t * q as f64).round() as i64;
        for cand in [a - 1, a, a + 1] {
            if cand < 0 {
                continue;
            }
            let mut aa = cand as u64 % q;
            if aa == 0 {
                aa = q; // the arc at 0 is the arc at 1 on the circle
            }
            if gcd(aa, q) == 1 && circle_dist(t, aa, q) <= radius {
                return true;
            }
        }
    }
    false
}

#[derive(Clone, Copy, Debug)]
pub struct MinorArcScan {
    pub max_ratio: f64,
    pub argmax_t: f64,
    pub scanned: usize,
    pub excluded: usize,
}

/// Scan `|f(t)| / N^{1−ν/2}` over a uniform grid with the major arcs removed.
pub fn minor_arc_scan(w: &WindowSequence, nu: f64, grid: usize) -> MinorArcScan {
    let n = w.n();
    let bound = (n as f64).powf(1.0 - nu / 2.0);
    let mut max_ratio = 0.0f64;
    let mut argmax_t = f64::NAN;
    let mut excluded = 0usize;
    for i in 0..grid {
        let t = (i as f64 + 0.5) / grid as f64;
        if is_major_arc(t, n, nu) {
            excluded += 1;
            continue;
        }
        let ratio = w.weyl_sum(t).norm() / bound;
        if ratio > max_ratio {
            max_ratio = ratio;
            argmax_t = t;
        }
    }
    MinorArcScan {
        max_ratio,
        argmax_t,
        scanned: grid - excluded,
        excluded,
    }
}
