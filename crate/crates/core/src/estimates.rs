//! Measurement harness for the multilinear dispersive estimates.
//!
//! The workhorse is [`spacetime_lp_norm`]: the `L^p(τ₀ × S³)` norm of a
//! product of linearly-flowing zonal fields. Space integrals are always exact
//! (Gauss quadrature sized to the total polynomial degree). Time integrals of
//! even powers are trigonometric polynomials on the `1/16` frequency lattice;
//! when the lattice sample count fits the budget the rectangle rule is exact,
//! otherwise a stratified estimate with a reported refinement delta is used.
//!
//! On top of the engine sit the individual checks: dyadic Strichartz
//! scalings, trilinear spectral-cluster and trilinear Strichartz ratios, the
//! crude no-oscillation bound, quadruple-product decay, and the phase
//! integrals behind the almost-orthogonality of separated frequency windows.

use crate::report::{ReportError, ScalingReport};
use crate::seed::stream_rng;
use crate::sphere::{
    flow_freq_sixteenth, quadrature_rule, ClusterScheme, DyadicBlock, Flow, SphereError,
    ZonalField,
};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

/// The base space-time interval is `τ₀ = [0, 32π]`.
pub const TAU0: f64 = 32.0 * PI;

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("space-time norms require even p ≥ 2, got {0}")]
    ExponentNotEven(u32),
    #[error("cluster sizes must be ordered n1 ≥ n2 ≥ n3, got {0:?}")]
    OrderingViolation([u64; 3]),
    #[error("no degrees found in the requested block or window")]
    EmptyBlock,
    #[error(transparent)]
    Sphere(#[from] SphereError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

/// One factor of a space-time product: a zonal field, either constant in
/// time (`flow: None`) or evolving under a linear flow.
#[derive(Clone, Debug)]
pub struct FlowComponent {
    pub field: ZonalField,
    pub flow: Option<Flow>,
}

impl FlowComponent {
    pub fn flowing(field: ZonalField, flow: Flow) -> Self {
        Self {
            field,
            flow: Some(flow),
        }
    }

    pub fn frozen(field: ZonalField) -> Self {
        Self { field, flow: None }
    }
}

/// A measured norm; `exact` marks the lattice-rectangle route, otherwise
/// `delta` reports the stratified refinement difference.
#[derive(Clone, Copy, Debug)]
pub struct NormEstimate {
    pub value: f64,
    pub exact: bool,
    pub delta: f64,
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

/// Basis values `e_k(θ_j)` for all degrees up to `k_max` on the given nodes.
fn basis_matrix(k_max: usize, nodes: &[f64]) -> Vec<Vec<f64>> {
    let scale = crate::sphere::basis_scale();
    let mut rows = vec![vec![0.0; nodes.len()]; k_max + 1];
    for (j, &theta) in nodes.iter().enumerate() {
        let x = theta.cos();
        let mut u_prev = 0.0f64;
        let mut u = 1.0f64;
        for row in rows.iter_mut() {
            row[j] = u * scale;
            let u_next = 2.0 * x * u - u_prev;
            u_prev = u;
            u = u_next;
        }
    }
    rows
}

/// `‖Π_j components_j‖_{L^p(τ₀ × S³)}` for even `p`.
///
/// `time_budget` caps the number of time samples; lattice-exact integration
/// is used whenever it fits, stratified sampling (seeded, with delta)
/// otherwise.
pub fn spacetime_lp_norm(
    components: &[FlowComponent],
    p: u32,
    scheme: &ClusterScheme,
    time_budget: usize,
    seed: u64,
) -> Result<NormEstimate, EstimateError> {
    if p < 2 || p % 2 != 0 {
        return Err(EstimateError::ExponentNotEven(p));
    }
    // Space rule sized to the full product degree at any fixed time.
    let degree_sum: usize = components.iter().map(|c| c.field.cutoff()).sum();
    let space_nodes = (p as usize * degree_sum) / 2 + 1;
    let rule = quadrature_rule(space_nodes);

    // Per-component frequency data on the 1/16 lattice.
    let mut spread16: u128 = 0;
    let mut lattice_gcd: u64 = 0;
    let mut freqs: Vec<Vec<u64>> = Vec::with_capacity(components.len());
    for comp in components {
        match comp.flow {
            None => freqs.push(vec![]),
            Some(flow) => {
                let mut f = Vec::with_capacity(comp.field.coeffs().len());
                let mut lo = u64::MAX;
                let mut hi = 0u64;
                for (k, c) in comp.field.coeffs().iter().enumerate() {
                    let w = flow_freq_sixteenth(k, flow, scheme)?;
                    f.push(w);
                    if c.norm_sqr() > 0.0 {
                        lo = lo.min(w);
                        hi = hi.max(w);
                    }
                }
                if lo <= hi {
                    spread16 += (p as u128 / 2) * (hi - lo) as u128;
                    for (k, c) in comp.field.coeffs().iter().enumerate() {
                        if c.norm_sqr() > 0.0 {
                            lattice_gcd = gcd_u64(lattice_gcd, f[k] - lo);
                        }
                    }
                }
                freqs.push(f);
            }
        }
    }

    let exact_samples = if lattice_gcd == 0 {
        1u128
    } else {
        spread16 / lattice_gcd as u128 + 1
    };
    let exact = exact_samples <= time_budget as u128;

    let basis: Vec<Vec<Vec<f64>>> = components
        .iter()
        .map(|c| basis_matrix(c.field.cutoff(), rule.nodes()))
        .collect();

    let eval_at = |t: f64| -> f64 {
        // G(t) = ∫ |Π u_j(t, ·)|^p dV, exact in space.
        let mut prod = vec![Complex64::ONE; rule.len()];
        for (ci, comp) in components.iter().enumerate() {
            let mut vals = vec![Complex64::ZERO; rule.len()];
            for (k, &c) in comp.field.coeffs().iter().enumerate() {
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                let coeff = match comp.flow {
                    None => c,
                    Some(_) => {
                        let w = freqs[ci][k] as f64 / 16.0;
                        c * Complex64::from_polar(1.0, -w * t)
                    }
                };
                let row = &basis[ci][k];
                for (v, &e) in vals.iter_mut().zip(row.iter()) {
                    *v += coeff * e;
                }
            }
            for (pr, v) in prod.iter_mut().zip(&vals) {
                *pr *= v;
            }
        }
        let halfp = (p / 2) as i32;
        let mut acc = 0.0;
        for (w, v) in rule.weights().iter().zip(&prod) {
            acc += w * v.norm_sqr().powi(halfp);
        }
        acc
    };

    if exact {
        let l = exact_samples as usize;
        let period = if lattice_gcd == 0 {
            TAU0
        } else {
            TAU0 / lattice_gcd as f64
        };
        let sum: f64 = (0..l)
            .into_par_iter()
            .map(|r| eval_at(period * r as f64 / l as f64))
            .sum::<f64>();
        let integral = TAU0 * sum / l as f64;
        Ok(NormEstimate {
            value: integral.powf(1.0 / p as f64),
            exact: true,
            delta: 0.0,
        })
    } else {
        let l = time_budget;
        let offsets: Vec<f64> = {
            let mut rng = stream_rng(seed, &[0x57, p as u64, degree_sum as u64]);
            (0..l).map(|_| rand::Rng::random::<f64>(&mut rng)).collect()
        };
        let samples: Vec<f64> = (0..l)
            .into_par_iter()
            .map(|r| eval_at((r as f64 + offsets[r]) / l as f64 * TAU0))
            .collect();
        let mean = samples.iter().sum::<f64>() / l as f64;
        let half_mean = samples.iter().step_by(2).sum::<f64>() / samples.iter().step_by(2).count() as f64;
        let value = (TAU0 * mean).powf(1.0 / p as f64);
        let half_value = (TAU0 * half_mean).powf(1.0 / p as f64);
        Ok(NormEstimate {
            value,
            exact: false,
            delta: (value - half_value).abs(),
        })
    }
}

/// Degrees whose eigenvalue clusters into the given block (searched along
/// the degree axis until the block is exhausted).
pub fn block_degrees(scheme: &ClusterScheme, block: DyadicBlock) -> Vec<usize> {
    let mut out = Vec::new();
    let hi_cluster = block.range().end;
    // Degree k has eigenvalue ~ (k+1)²; clusters sit near μ_n² ~ n², so
    // scanning a margin past 2·hi covers every scheme accepted here.
    let k_cap = 2 * hi_cluster + scheme.alpha() as usize + 4;
    for k in 0..=k_cap {
        if let Some(n) = scheme.cluster_of_degree(k) {
            if block.contains(n) {
                out.push(k);
            }
        }
    }
    out
}

/// Degrees clustering into a half-open window of cluster indices.
pub fn window_degrees(scheme: &ClusterScheme, window: std::ops::Range<usize>) -> Vec<usize> {
    let mut out = Vec::new();
    let k_cap = 2 * window.end + scheme.alpha() as usize + 4;
    for k in 0..=k_cap {
        if let Some(n) = scheme.cluster_of_degree(k) {
            if window.contains(&n) {
                out.push(k);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Strichartz
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct StrichartzConfig {
    pub p: u32,
    pub sizes: Vec<u32>,
    pub trials: u32,
    pub master_seed: u64,
    pub time_budget: usize,
}

#[derive(Clone, Debug)]
pub struct StrichartzRow {
    pub n: u32,
    pub trial: u32,
    pub norm: f64,
    pub exact: bool,
    pub delta: f64,
}

#[derive(Clone, Debug)]
pub struct StrichartzOutcome {
    pub report: ScalingReport,
    pub rows: Vec<StrichartzRow>,
}

/// Sample `‖P_N e^{itΔ}φ‖_{L^p(τ₀×S³)}` over random block data and fit the
/// slope against `⟨N⟩`.
pub fn strichartz_check(
    cfg: &StrichartzConfig,
    scheme: &ClusterScheme,
) -> Result<StrichartzOutcome, EstimateError> {
    let mut jobs = Vec::new();
    for &n in &cfg.sizes {
        for trial in 0..cfg.trials {
            jobs.push((n, trial));
        }
    }
    let rows: Result<Vec<StrichartzRow>, EstimateError> = jobs
        .par_iter()
        .map(|&(n, trial)| {
            let block = DyadicBlock::new(n).map_err(EstimateError::Sphere)?;
            let degrees = block_degrees(scheme, block);
            if degrees.is_empty() {
                return Err(EstimateError::EmptyBlock);
            }
            let mut rng = stream_rng(cfg.master_seed, &[0x573, n as u64, trial as u64]);
            let phi = ZonalField::random_on_degrees(&degrees, &mut rng);
            let est = spacetime_lp_norm(
                &[FlowComponent::flowing(phi, Flow::Laplacian)],
                cfg.p,
                scheme,
                cfg.time_budget,
                cfg.master_seed ^ (n as u64) << 8 ^ trial as u64,
            )?;
            Ok(StrichartzRow {
                n,
                trial,
                norm: est.value,
                exact: est.exact,
                delta: est.delta,
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
        let bracket = DyadicBlock::new(n).map_err(EstimateError::Sphere)?.bracket();
        samples.push((bracket, max));
    }
    let report = ScalingReport::fit(samples)?;
    Ok(StrichartzOutcome { report, rows })
}

/// `‖P_N u‖_{L^p(τ₀×S³)}` for a step-atom `u = Σ_k χ_{[t_{k−1},t_k)}
/// e^{itA}φ_k`; stratified in time piece by piece.
pub fn atom_spacetime_lp_norm(
    pieces: &[(f64, f64, ZonalField)],
    p: u32,
    flow: Flow,
    scheme: &ClusterScheme,
    samples_per_piece: usize,
    seed: u64,
) -> Result<f64, EstimateError> {
    if p < 2 || p % 2 != 0 {
        return Err(EstimateError::ExponentNotEven(p));
    }
    let mut total = 0.0;
    for (idx, (a, b, phi)) in pieces.iter().enumerate() {
        let lo = a.max(0.0);
        let hi = b.min(TAU0);
        if hi <= lo {
            continue;
        }
        let degree = phi.cutoff();
        let rule = quadrature_rule((p as usize * degree) / 2 + 1);
        let mut rng = stream_rng(seed, &[0xa70, idx as u64]);
        let l = samples_per_piece;
        let mut acc = 0.0;
        for r in 0..l {
            let u: f64 = rand::Rng::random(&mut rng);
            let t = lo + (r as f64 + u) / l as f64 * (hi - lo);
            let ut = crate::sphere::propagate(phi, t, flow, scheme)?;
            let vals = ut.synthesize(rule.nodes());
            let halfp = (p / 2) as i32;
            let g: f64 = rule
                .weights()
                .iter()
                .zip(&vals)
                .map(|(w, v)| w * v.norm_sqr().powi(halfp))
                .sum();
            acc += g;
        }
        total += (hi - lo) * acc / l as f64;
    }
    Ok(total.powf(1.0 / p as f64))
}

// ---------------------------------------------------------------------------
// Trilinear checks
// ---------------------------------------------------------------------------

/// A measured-versus-bound sample for a trilinear quantity.
#[derive(Clone, Copy, Debug)]
pub struct TrilinearSample {
    pub sizes: [u64; 3],
    pub measured: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// `‖e_{n₁} e_{n₂} e_{n₃}‖_{L²(S³)}` against `⟨n₂⟩^{1/2+ε} ⟨n₃⟩^{1−ε}`.
///
/// The zonal line is one-dimensional per cluster, so the sample is
/// deterministic: the inputs are the normalized zonal eigenfunctions.
pub fn trilinear_cluster_check(
    n1: u64,
    n2: u64,
    n3: u64,
    eps: f64,
) -> Result<TrilinearSample, EstimateError> {
    if !(n1 >= n2 && n2 >= n3) {
        return Err(EstimateError::OrderingViolation([n1, n2, n3]));
    }
    let degree_sum = (n1 + n2 + n3) as usize;
    let rule = quadrature_rule(degree_sum + 1);
    let f1 = ZonalField::basis(n1 as usize);
    let f2 = ZonalField::basis(n2 as usize);
    let f3 = ZonalField::basis(n3 as usize);
    let v1 = f1.synthesize(rule.nodes());
    let v2 = f2.synthesize(rule.nodes());
    let v3 = f3.synthesize(rule.nodes());
    let mut acc = 0.0;
    for j in 0..rule.len() {
        acc += rule.weights()[j] * (v1[j] * v2[j] * v3[j]).norm_sqr();
    }
    let measured = acc.sqrt();
    let jb = |n: u64| (1.0 + (n as f64) * (n as f64)).sqrt();
    let bound = jb(n2).powf(0.5 + eps) * jb(n3).powf(1.0 - eps);
    Ok(TrilinearSample {
        sizes: [n1, n2, n3],
        measured,
        bound,
        ratio: measured / bound,
    })
}

#[derive(Clone, Debug)]
pub struct TrilinearStrichartzConfig {
    pub n1: u32,
    pub n2: u32,
    pub n3: u32,
    /// Width of the window `J ⊂ [N₁, 2N₁)` in cluster indices.
    pub j_width: usize,
    pub delta: f64,
    pub eta: f64,
    pub trials: u32,
    pub master_seed: u64,
    pub time_budget: usize,
}

/// `‖P_{N₁,J} u₁ P_{N₂} u₂ P_{N₃} u₃‖_{L²(τ₀×S³)}` for linear-flow inputs
/// against `|J|^δ N₂^{1/2+η} ⟨N₃⟩^{3/2−η−δ}`.
pub fn trilinear_strichartz_check(
    cfg: &TrilinearStrichartzConfig,
    scheme: &ClusterScheme,
) -> Result<Vec<TrilinearSample>, EstimateError> {
    let b1 = DyadicBlock::new(cfg.n1)?;
    let b2 = DyadicBlock::new(cfg.n2)?;
    let b3 = DyadicBlock::new(cfg.n3)?;
    let j_width = cfg.j_width.max(1);
    let j_range = b1.range().start..(b1.range().start + j_width).min(b1.range().end);
    let deg1 = window_degrees(scheme, j_range.clone());
    let deg2 = block_degrees(scheme, b2);
    let deg3 = block_degrees(scheme, b3);
    if deg1.is_empty() || deg2.is_empty() || deg3.is_empty() {
        return Err(EstimateError::EmptyBlock);
    }
    let jb = |n: u32| (1.0 + (n as f64) * (n as f64)).sqrt();
    let bound = (j_width as f64).powf(cfg.delta)
        * (cfg.n2 as f64).max(1.0).powf(0.5 + cfg.eta)
        * jb(cfg.n3).powf(1.5 - cfg.eta - cfg.delta);
    let mut out = Vec::new();
    for trial in 0..cfg.trials {
        let mut rng = stream_rng(
            cfg.master_seed,
            &[0x7151, cfg.n1 as u64, cfg.n2 as u64, cfg.n3 as u64, trial as u64],
        );
        let u1 = ZonalField::random_on_degrees(&deg1, &mut rng);
        let u2 = ZonalField::random_on_degrees(&deg2, &mut rng);
        let u3 = ZonalField::random_on_degrees(&deg3, &mut rng);
        let est = spacetime_lp_norm(
            &[
                FlowComponent::flowing(u1, Flow::Clustered),
                FlowComponent::flowing(u2, Flow::Clustered),
                FlowComponent::flowing(u3, Flow::Clustered),
            ],
            2,
            scheme,
            cfg.time_budget,
            cfg.master_seed ^ 0x7151 ^ trial as u64,
        )?;
        out.push(TrilinearSample {
            sizes: [cfg.n1 as u64, cfg.n2 as u64, cfg.n3 as u64],
            measured: est.value,
            bound,
            ratio: est.value / bound,
        });
    }
    Ok(out)
}

/// Crude bound for time-frozen block fields: `‖Π P_{N_j} u_j‖_{L²(τ×S³)}`
/// against `|τ|^{1/2} ⟨N₂⟩^{3/2} ⟨N₃⟩^{3/2} Π ‖u_j‖`.
pub fn crude_bound_check(
    n1: u32,
    n2: u32,
    n3: u32,
    tau_len: f64,
    trials: u32,
    master_seed: u64,
    scheme: &ClusterScheme,
) -> Result<Vec<TrilinearSample>, EstimateError> {
    if !(n1 >= n2 && n2 >= n3) {
        return Err(EstimateError::OrderingViolation([n1 as u64, n2 as u64, n3 as u64]));
    }
    let deg: Vec<Vec<usize>> = [n1, n2, n3]
        .iter()
        .map(|&n| block_degrees(scheme, DyadicBlock::new(n).unwrap()))
        .collect();
    if deg.iter().any(|d| d.is_empty()) {
        return Err(EstimateError::EmptyBlock);
    }
    let jb = |n: u32| (1.0 + (n as f64) * (n as f64)).sqrt();
    let mut out = Vec::new();
    for trial in 0..trials {
        let mut rng = stream_rng(master_seed, &[0xc4de, n1 as u64, n2 as u64, trial as u64]);
        let fields: Vec<ZonalField> = deg
            .iter()
            .map(|d| ZonalField::random_on_degrees(d, &mut rng))
            .collect();
        let degree_sum: usize = fields.iter().map(|f| f.cutoff()).sum();
        let rule = quadrature_rule(degree_sum + 1);
        let vals: Vec<Vec<Complex64>> = fields.iter().map(|f| f.synthesize(rule.nodes())).collect();
        let mut acc = 0.0;
        for j in 0..rule.len() {
            acc += rule.weights()[j] * (vals[0][j] * vals[1][j] * vals[2][j]).norm_sqr();
        }
        let measured = (tau_len * acc).sqrt();
        let norms: f64 = fields.iter().map(|f| f.l2_norm()).product();
        let bound = tau_len.sqrt() * jb(n2).powf(1.5) * jb(n3).powf(1.5) * norms;
        out.push(TrilinearSample {
            sizes: [n1 as u64, n2 as u64, n3 as u64],
            measured,
            bound,
            ratio: measured / bound,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Phase integrals and decay
// ---------------------------------------------------------------------------

/// `∫_{τ₀} e^{itσ} dt` for a real frequency shift `σ`.
pub fn phase_integral_from_shift(sigma: f64) -> Complex64 {
    if sigma == 0.0 {
        return Complex64::new(TAU0, 0.0);
    }
    let num = Complex64::from_polar(1.0, TAU0 * sigma) - Complex64::ONE;
    num / Complex64::new(0.0, sigma)
}

/// The almost-orthogonality integral
/// `∫_{τ₀} e^{−it(μ_{n₁}²+μ_{n₂}²+μ_{n₃}²)} e^{it(μ_{n₁'}²+μ_{n₂'}²+μ_{n₃'}²)} dt`.
///
/// For every integer `α` the shift lies on the `1/16` frequency lattice, so
/// `32π·σ ∈ 2πℤ` and the integral is exactly `32π` on the diagonal `σ = 0`
/// and exactly `0` off it.
pub fn phase_integral(n: [usize; 3], n_prime: [usize; 3], scheme: &ClusterScheme) -> Complex64 {
    let mut sigma16: i128 = 0;
    for j in 0..3 {
        sigma16 += scheme.mu_sq_sixteenth(n_prime[j]) as i128;
        sigma16 -= scheme.mu_sq_sixteenth(n[j]) as i128;
    }
    if sigma16 == 0 {
        Complex64::new(TAU0, 0.0)
    } else {
        Complex64::ZERO
    }
}

/// Exact shift `σ = Σ_j (μ_{n_j'}² − μ_{n_j}²)` of a tuple pair.
pub fn phase_shift(n: [usize; 3], n_prime: [usize; 3], scheme: &ClusterScheme) -> f64 {
    let mut sigma16: i128 = 0;
    for j in 0..3 {
        sigma16 += scheme.mu_sq_sixteenth(n_prime[j]) as i128;
        sigma16 -= scheme.mu_sq_sixteenth(n[j]) as i128;
    }
    sigma16 as f64 / 16.0
}

#[derive(Clone, Debug)]
pub struct OrthogonalityScan {
    /// Per separation `|m − m'| ≥ min_gap`: (gap, max |I|, envelope).
    pub per_gap: Vec<(usize, f64, f64)>,
    pub max_abs: f64,
    pub tuples: u64,
}

/// Scan the phase integrals across the window partition
/// `J_m = [m N₂²/N₁, (m+1) N₂²/N₁)` of the top block, over all tuples with
/// `n₁ ∈ J_m`, `n₁' ∈ J_{m'}`, `|m − m'| ≥ min_gap` and free `n₂, n₃, n₂',
/// n₃'` in the `N₂` block.
///
/// The envelope `2/(|m−m'| N₂² − 8N₂²)` is the closed-form bound
/// `|I| ≤ 2/|σ|` combined with the separation `|σ| ≥ |m−m'| N₂² − 8N₂²`;
/// integer schemes realize it degenerately, with every off-diagonal integral
/// exactly zero.
pub fn block_orthogonality_scan(
    n1: u32,
    n2: u32,
    scheme: &ClusterScheme,
    min_gap: usize,
) -> Result<OrthogonalityScan, EstimateError> {
    let b1 = DyadicBlock::new(n1)?;
    let b2 = DyadicBlock::new(n2)?;
    let window = (n2 as u64 * n2 as u64).max(1);
    let part_index = |n: usize| -> usize { (n as u64 * n1 as u64 / window) as usize };
    let r1: Vec<usize> = b1.range().collect();
    let r2: Vec<usize> = b2.range().collect();
    let mut per_gap: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
    let mut max_abs = 0.0f64;
    let mut tuples = 0u64;
    for &a in &r1 {
        for &ap in &r1 {
            let gap = part_index(a).abs_diff(part_index(ap));
            if gap < min_gap {
                continue;
            }
            for &b in &r2 {
                for &bp in &r2 {
                    for &c in &r2 {
                        for &cp in &r2 {
                            let v = phase_integral([a, b, c], [ap, bp, cp], scheme).norm();
                            tuples += 1;
                            max_abs = max_abs.max(v);
                            per_gap
                                .entry(gap)
                                .and_modify(|m| *m = m.max(v))
                                .or_insert(v);
                        }
                    }
                }
            }
        }
    }
    let n2f = (n2 as f64).max(1.0);
    let per_gap = per_gap
        .into_iter()
        .map(|(gap, max)| {
            let envelope = if gap as f64 * n2f * n2f > 8.0 * n2f * n2f {
                2.0 / (gap as f64 * n2f * n2f - 8.0 * n2f * n2f)
            } else {
                f64::INFINITY
            };
            (gap, max, envelope)
        })
        .collect();
    Ok(OrthogonalityScan {
        per_gap,
        max_abs,
        tuples,
    })
}

/// `|∫ e_{n₀} e_{n₁} e_{n₂} e_{n₃} dV|`; exactly zero whenever
/// `n₀ > n₁ + n₂ + n₃` by the product degree bound.
pub fn decay_check(n: [usize; 4]) -> f64 {
    let degree_sum: usize = n.iter().sum();
    let rule = quadrature_rule(degree_sum / 2 + 1);
    let vals: Vec<Vec<Complex64>> = n
        .iter()
        .map(|&k| ZonalField::basis(k).synthesize(rule.nodes()))
        .collect();
    let mut acc = Complex64::ZERO;
    for j in 0..rule.len() {
        acc += rule.weights()[j] * vals[0][j] * vals[1][j] * vals[2][j] * vals[3][j];
    }
    acc.norm()
}
