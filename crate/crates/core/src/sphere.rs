//! Exact spectral geometry of the round 3-sphere on zonal functions.
//!
//! A zonal function depends only on the geodesic distance `θ ∈ [0, π]` from a
//! fixed pole. The degree-`k` zonal spherical harmonic is proportional to the
//! Chebyshev polynomial of the second kind, and we work throughout in the
//! L²-normalized family
//!
//! ```text
//!     e_k(θ) = U_k(cos θ) / sqrt(2π²),          ∫_{S³} e_j e_k dV = δ_jk,
//! ```
//!
//! with `Vol(S³) = 2π²` and `∫_{S³} f dV = 4π ∫_0^π f(θ) sin²θ dθ`. The
//! Laplace-Beltrami eigenvalue of degree `k` is `λ_k² = k(k+2)` with
//! multiplicity `(k+1)²`; the zonal line in each eigenspace is
//! one-dimensional. Zonal fields are closed under pointwise products, so the
//! quintic nonlinearity `|u|⁴u` stays in the basis and all integrals below
//! are evaluated by Gauss quadrature that is exact for the polynomial degrees
//! involved.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;
use std::io::{self, BufRead, Read, Write};
use thiserror::Error;

/// Volume of the unit round 3-sphere.
pub const SPHERE_VOLUME: f64 = 2.0 * PI * PI;

/// `1/sqrt(2π²)`, the amplitude of the constant basis field `e_0`.
pub fn basis_scale() -> f64 {
    SPHERE_VOLUME.sqrt().recip()
}

/// Laplace eigenvalue `λ_k² = (k+1)² − 1 = k(k+2)` of degree `k`.
pub fn eigenvalue(k: usize) -> f64 {
    (k as f64) * (k as f64 + 2.0)
}

/// `16 λ_k²`, exact in integer arithmetic (used for phase lattices).
pub fn eigenvalue_sixteenth(k: u64) -> u64 {
    16 * k * (k + 2)
}

/// Dimension `(k+1)²` of the full degree-`k` eigenspace.
pub fn multiplicity(k: usize) -> u64 {
    let d = k as u64 + 1;
    d * d
}

#[derive(Debug, Error)]
pub enum SphereError {
    #[error("coefficient vector must be nonempty")]
    EmptyField,
    #[error("cluster windows are not pairwise disjoint (alpha={alpha}, e={e}, b={b})")]
    OverlappingWindows { alpha: u32, e: f64, b: f64 },
    #[error("cluster half-widths must be positive")]
    NonPositiveWidth,
    #[error("quadrature rule needs at least one node")]
    EmptyQuadrature,
    #[error("got {got} samples for a rule with {want} nodes")]
    SampleMismatch { got: usize, want: usize },
    #[error("dyadic block size must be 0 or a power of two, got {0}")]
    NotDyadic(u32),
    #[error("eigenvalue {0} lies outside every cluster window")]
    Unclustered(f64),
    #[error("malformed field data: {0}")]
    MalformedData(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Sign of the quintic nonlinearity `± |u|⁴ u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Defocusing,
    Focusing,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Defocusing => 1.0,
            Sign::Focusing => -1.0,
        }
    }
}

// ---------------------------------------------------------------------------
// ZonalField
// ---------------------------------------------------------------------------

/// Complex coefficient vector over the normalized zonal basis `e_0..e_K`.
///
/// Parseval holds exactly: the L²(S³) norm equals the Euclidean norm of the
/// coefficients. Fields are immutable values; all operations return new
/// fields.
#[derive(Clone, Debug, PartialEq)]
pub struct ZonalField {
    coeffs: Vec<Complex64>,
}

impl ZonalField {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self, SphereError> {
        if coeffs.is_empty() {
            return Err(SphereError::EmptyField);
        }
        Ok(Self { coeffs })
    }

    /// Zero field with cutoff `k_max`.
    pub fn zeros(k_max: usize) -> Self {
        Self {
            coeffs: vec![Complex64::ZERO; k_max + 1],
        }
    }

    /// The basis field `e_k` (unit coefficient at degree `k`).
    pub fn basis(k: usize) -> Self {
        let mut coeffs = vec![Complex64::ZERO; k + 1];
        coeffs[k] = Complex64::ONE;
        Self { coeffs }
    }

    /// Largest representable degree `K`.
    pub fn cutoff(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `e_k`, zero beyond the cutoff.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(Complex64::ZERO)
    }

    /// Largest degree carrying a nonzero coefficient, if any.
    pub fn support_max(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| c.norm_sqr() > 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.support_max().is_none()
    }

    /// L²(S³) norm; by Parseval this is the Euclidean coefficient norm.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Sobolev norm `(Σ_k (1+λ_k²)^s |c_k|²)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| (1.0 + eigenvalue(k)).powf(s) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Pointwise scaling by a complex scalar.
    pub fn scaled(&self, a: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![Complex64::ZERO; len];
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c = self.coeff(k) + other.coeff(k);
        }
        Self { coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![Complex64::ZERO; len];
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c = self.coeff(k) - other.coeff(k);
        }
        Self { coeffs }
    }

    /// Truncate to degree `k_max`, returning the dropped L² mass as well.
    pub fn truncated_with_loss(&self, k_max: usize) -> (Self, f64) {
        if self.cutoff() <= k_max {
            let mut coeffs = self.coeffs.clone();
            coeffs.resize(k_max + 1, Complex64::ZERO);
            return (Self { coeffs }, 0.0);
        }
        let kept = self.coeffs[..=k_max].to_vec();
        let loss = self.coeffs[k_max + 1..]
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        (Self { coeffs: kept }, loss)
    }

    pub fn truncated(&self, k_max: usize) -> Self {
        self.truncated_with_loss(k_max).0
    }

    /// Evaluate at the grid `thetas` by Clenshaw backward recurrence.
    pub fn synthesize(&self, thetas: &[f64]) -> Vec<Complex64> {
        thetas.iter().map(|&t| self.eval(t)).collect()
    }

    /// Evaluate at a single colatitude.
    pub fn eval(&self, theta: f64) -> Complex64 {
        let x = theta.cos();
        let two_x = 2.0 * x;
        let mut b1 = Complex64::ZERO;
        let mut b2 = Complex64::ZERO;
        for &c in self.coeffs.iter().rev() {
            let b0 = c + two_x * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        // For the U_k recurrence the Clenshaw tail collapses to b_0.
        b1 * basis_scale()
    }

    /// `Σ_k c_k sin((k+1)θ)` and its first two θ-derivatives.
    fn sine_sums(&self, theta: f64) -> (Complex64, Complex64, Complex64) {
        let mut h = Complex64::ZERO;
        let mut h1 = Complex64::ZERO;
        let mut h2 = Complex64::ZERO;
        for (k, &c) in self.coeffs.iter().enumerate() {
            let m = (k + 1) as f64;
            let (s, co) = (m * theta).sin_cos();
            h += c * s;
            h1 += c * (m * co);
            h2 -= c * (m * m * s);
        }
        (h, h1, h2)
    }

    /// Sup norm over `S³`, estimated on a refinement grid of `16(K+1)`
    /// intervals with one Newton polish per interior candidate.
    ///
    /// This is a lower-biased estimator; for cutoffs up to a few thousand the
    /// bias is far below any tolerance used in this crate.
    pub fn sup_norm(&self) -> f64 {
        let k = self.cutoff();
        let cells = 16 * (k + 1);
        let h = PI / cells as f64;
        // |f|² · 2π² as a function of θ, endpoints via U_k(±1) = (±1)^k (k+1).
        let boundary = |at_zero: bool| -> f64 {
            let mut s = Complex64::ZERO;
            for (deg, &c) in self.coeffs.iter().enumerate() {
                let amp = (deg + 1) as f64;
                let sgn = if at_zero || deg % 2 == 0 { 1.0 } else { -1.0 };
                s += c * (amp * sgn);
            }
            s.norm_sqr()
        };
        let g_of = |theta: f64| -> f64 {
            let (hh, _, _) = self.sine_sums(theta);
            let s = theta.sin();
            hh.norm_sqr() / (s * s)
        };
        let mut grid = Vec::with_capacity(cells + 1);
        grid.push(boundary(true));
        for j in 1..cells {
            grid.push(g_of(j as f64 * h));
        }
        grid.push(boundary(false));
        let mut best = grid[0].max(grid[cells]);
        for j in 1..cells {
            if grid[j] >= grid[j - 1] && grid[j] >= grid[j + 1] {
                let theta = j as f64 * h;
                best = best.max(grid[j]);
                // One Newton step on the derivative of |h|²/sin²θ.
                let (hh, h1, h2) = self.sine_sums(theta);
                let (s, c) = theta.sin_cos();
                let re_h1h = (h1 * hh.conj()).re;
                let phi = 2.0 * re_h1h * s - 2.0 * hh.norm_sqr() * c;
                let dphi = 2.0 * ((h2 * hh.conj()).re + h1.norm_sqr() + hh.norm_sqr()) * s
                    - 2.0 * re_h1h * c;
                if dphi != 0.0 {
                    let polished = theta - phi / dphi;
                    if polished > theta - h && polished < theta + h {
                        best = best.max(g_of(polished));
                    }
                }
            }
        }
        (best / SPHERE_VOLUME).sqrt()
    }

    /// Random field with unit L² norm supported on the given degree set.
    pub fn random_on_degrees<R: Rng>(degrees: &[usize], rng: &mut R) -> Self {
        let k_max = *degrees.iter().max().expect("nonempty degree set");
        let mut coeffs = vec![Complex64::ZERO; k_max + 1];
        for &k in degrees {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            coeffs[k] = Complex64::new(re, im);
        }
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for c in &mut coeffs {
                *c /= norm;
            }
        } else {
            coeffs[k_max] = Complex64::ONE;
        }
        Self { coeffs }
    }
}

// ---------------------------------------------------------------------------
// Serialization: plain-text and binary columnar (k, Re c_k, Im c_k)
// ---------------------------------------------------------------------------

const BINARY_MAGIC: &[u8; 4] = b"ZNF1";

impl ZonalField {
    /// Plain-text columnar form: one `k re im` line per degree.
    pub fn write_text<W: Write>(&self, w: &mut W) -> Result<(), SphereError> {
        writeln!(w, "# zonal field, columns: k re im")?;
        for (k, c) in self.coeffs.iter().enumerate() {
            writeln!(w, "{} {:?} {:?}", k, c.re, c.im)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: &mut R) -> Result<Self, SphereError> {
        let mut coeffs = Vec::new();
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let k: usize = it
                .next()
                .ok_or_else(|| SphereError::MalformedData("missing degree".into()))?
                .parse()
                .map_err(|e| SphereError::MalformedData(format!("degree: {e}")))?;
            let re: f64 = it
                .next()
                .ok_or_else(|| SphereError::MalformedData("missing re".into()))?
                .parse()
                .map_err(|e| SphereError::MalformedData(format!("re: {e}")))?;
            let im: f64 = it
                .next()
                .ok_or_else(|| SphereError::MalformedData("missing im".into()))?
                .parse()
                .map_err(|e| SphereError::MalformedData(format!("im: {e}")))?;
            if k != coeffs.len() {
                return Err(SphereError::MalformedData(format!(
                    "degrees must be consecutive from 0, got {k} at position {}",
                    coeffs.len()
                )));
            }
            coeffs.push(Complex64::new(re, im));
        }
        Self::new(coeffs)
    }

    /// Binary columnar form: magic `ZNF1`, then `u32` count and per-degree
    /// `f64` real and imaginary parts. All integers and floats little-endian.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<(), SphereError> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(self.coeffs.len() as u32).to_le_bytes())?;
        for c in &self.coeffs {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self, SphereError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(SphereError::MalformedData("bad magic".into()));
        }
        let mut len4 = [0u8; 4];
        r.read_exact(&mut len4)?;
        let len = u32::from_le_bytes(len4) as usize;
        let mut coeffs = Vec::with_capacity(len);
        let mut buf = [0u8; 8];
        for _ in 0..len {
            r.read_exact(&mut buf)?;
            let re = f64::from_le_bytes(buf);
            r.read_exact(&mut buf)?;
            let im = f64::from_le_bytes(buf);
            coeffs.push(Complex64::new(re, im));
        }
        Self::new(coeffs)
    }
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Gauss rule for the zonal measure `4π sin²θ dθ` on `[0, π]`.
///
/// Nodes are `θ_j = jπ/(M+1)` with weights `4π·(π/(M+1))·sin²θ_j`. The rule
/// integrates `p(cos θ)` exactly for polynomials of degree up to `2M−1`, and
/// every odd-degree monomial (in particular degree `2M+1`) by symmetry.
/// Degree `2M` aliases (`U_{2M} ↦ −U_0` on the node set) and is not exact.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

pub fn quadrature_rule(m: usize) -> QuadratureRule {
    assert!(m >= 1, "quadrature rule needs at least one node");
    let step = PI / (m as f64 + 1.0);
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for j in 1..=m {
        let theta = j as f64 * step;
        nodes.push(theta);
        weights.push(4.0 * PI * step * theta.sin() * theta.sin());
    }
    QuadratureRule { nodes, weights }
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_{S³} v dV` for node samples `v`, fixed left-to-right order.
    pub fn integrate(&self, values: &[Complex64]) -> Complex64 {
        assert_eq!(values.len(), self.nodes.len());
        let mut acc = Complex64::ZERO;
        for (w, v) in self.weights.iter().zip(values) {
            acc += v * *w;
        }
        acc
    }

    pub fn integrate_real(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.nodes.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Discrete zonal transform: recover coefficients up to `k_max` from node
/// samples. Exact for fields of degree `d` whenever `d + k_max ≤ 2M−1`.
pub fn analyze(
    values: &[Complex64],
    rule: &QuadratureRule,
    k_max: usize,
) -> Result<ZonalField, SphereError> {
    if rule.is_empty() {
        return Err(SphereError::EmptyQuadrature);
    }
    if values.len() != rule.len() {
        return Err(SphereError::SampleMismatch {
            got: values.len(),
            want: rule.len(),
        });
    }
    let scale = basis_scale();
    let mut coeffs = vec![Complex64::ZERO; k_max + 1];
    // Upward U-recurrence per node keeps the transform O(M·K).
    for (j, (&theta, &w)) in rule.nodes.iter().zip(rule.weights.iter()).enumerate() {
        let x = theta.cos();
        let wv = values[j] * w;
        let mut u_prev = 0.0f64;
        let mut u = 1.0f64;
        for c in coeffs.iter_mut() {
            *c += wv * (u * scale);
            let u_next = 2.0 * x * u - u_prev;
            u_prev = u;
            u = u_next;
        }
    }
    ZonalField::new(coeffs)
}

// ---------------------------------------------------------------------------
// Cluster schemes and dyadic blocks
// ---------------------------------------------------------------------------

/// Spectral clustering parameters `(α, E, B)`.
///
/// The windows are `I_n = [μ_n² − E, μ_n² + E]` for `n ≥ 1` with
/// `μ_n = n + α/4`, plus `I_0 = [−B, B]` (the convention is `μ_0 = 0`).
/// Pairwise disjointness is checked at construction. On the unit 3-sphere the
/// natural values are `α = 4, E = 1, B = 1`, for which `λ_k² ∈ I_n` iff
/// `k = n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterScheme {
    alpha: u32,
    e_width: f64,
    b_width: f64,
}

impl ClusterScheme {
    pub fn new(alpha: u32, e_width: f64, b_width: f64) -> Result<Self, SphereError> {
        if !(e_width > 0.0) || !(b_width > 0.0) {
            return Err(SphereError::NonPositiveWidth);
        }
        let scheme = Self {
            alpha,
            e_width,
            b_width,
        };
        // Gaps μ_{n+1}² − μ_n² grow with n, so n = 1 is the tight pair; the
        // I_0/I_1 pair is checked separately.
        let tight_gap = scheme.mu(2).powi(2) - scheme.mu(1).powi(2);
        let disjoint =
            tight_gap > 2.0 * e_width && scheme.mu(1).powi(2) - e_width > b_width;
        if disjoint {
            Ok(scheme)
        } else {
            Err(SphereError::OverlappingWindows {
                alpha,
                e: e_width,
                b: b_width,
            })
        }
    }

    /// The 3-sphere scheme `α = 4, E = 1, B = 1`.
    pub fn s3() -> Self {
        Self::new(4, 1.0, 1.0).expect("the sphere scheme is disjoint")
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    /// `μ_n = n + α/4` for `n ≥ 1`, and `μ_0 = 0`.
    pub fn mu(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            n as f64 + self.alpha as f64 / 4.0
        }
    }

    /// `16 μ_n²` as an exact integer: `(4n+α)²` for `n ≥ 1`, `0` for `n = 0`.
    pub fn mu_sq_sixteenth(&self, n: usize) -> u64 {
        if n == 0 {
            0
        } else {
            let m = 4 * n as u64 + self.alpha as u64;
            m * m
        }
    }

    /// Window `I_n` as a closed interval.
    pub fn window(&self, n: usize) -> (f64, f64) {
        if n == 0 {
            (-self.b_width, self.b_width)
        } else {
            let center = self.mu(n).powi(2);
            (center - self.e_width, center + self.e_width)
        }
    }

    /// The unique `n` with `λ² ∈ I_n`, or `None` outside all windows.
    pub fn cluster_of(&self, lambda_sq: f64) -> Option<usize> {
        if lambda_sq <= self.b_width {
            return Some(0);
        }
        let guess = (lambda_sq.max(0.0).sqrt() - self.alpha as f64 / 4.0).round();
        let lo = (guess as i64 - 2).max(1) as usize;
        for n in lo..lo + 5 {
            let (a, b) = self.window(n);
            if lambda_sq >= a && lambda_sq <= b {
                return Some(n);
            }
        }
        None
    }

    /// Cluster index of the degree-`k` eigenvalue.
    pub fn cluster_of_degree(&self, k: usize) -> Option<usize> {
        self.cluster_of(eigenvalue(k))
    }
}

/// Dyadic block of cluster indices: `{0}` for `N = 0`, else `[N, 2N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyadicBlock {
    n: u32,
}

impl DyadicBlock {
    pub fn new(n: u32) -> Result<Self, SphereError> {
        if n == 0 || n.is_power_of_two() {
            Ok(Self { n })
        } else {
            Err(SphereError::NotDyadic(n))
        }
    }

    pub fn zero() -> Self {
        Self { n: 0 }
    }

    pub fn size(&self) -> u32 {
        self.n
    }

    /// The block containing a given cluster index.
    pub fn containing(cluster: usize) -> Self {
        if cluster == 0 {
            Self { n: 0 }
        } else {
            Self {
                n: (cluster as u32 + 1).next_power_of_two() / 2,
            }
        }
    }

    pub fn contains(&self, cluster: usize) -> bool {
        if self.n == 0 {
            cluster == 0
        } else {
            cluster >= self.n as usize && cluster < 2 * self.n as usize
        }
    }

    /// Cluster index range covered by the block.
    pub fn range(&self) -> std::ops::Range<usize> {
        if self.n == 0 {
            0..1
        } else {
            self.n as usize..2 * self.n as usize
        }
    }

    /// The blocks `0, 1, 2, 4, …` needed to cover cluster indices `≤ max_n`.
    pub fn partition_up_to(max_n: usize) -> Vec<Self> {
        let mut out = vec![Self { n: 0 }];
        let mut n = 1u32;
        while (n as usize) <= max_n {
            out.push(Self { n });
            n *= 2;
        }
        out
    }

    /// Japanese bracket `⟨N⟩ = (1+N²)^{1/2}`.
    pub fn bracket(&self) -> f64 {
        (1.0 + (self.n as f64).powi(2)).sqrt()
    }
}

/// Keep only coefficients whose eigenvalue clusters to an index in `keep`.
fn project_by<F: Fn(usize) -> bool>(f: &ZonalField, scheme: &ClusterScheme, keep: F) -> ZonalField {
    let coeffs = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, &c)| match scheme.cluster_of_degree(k) {
            Some(n) if keep(n) => c,
            _ => Complex64::ZERO,
        })
        .collect();
    ZonalField::new(coeffs).expect("projection preserves length")
}

/// Single-cluster projector `p_n`.
pub fn project_cluster(f: &ZonalField, scheme: &ClusterScheme, n: usize) -> ZonalField {
    project_by(f, scheme, |m| m == n)
}

/// Dyadic projector `P_N`.
pub fn project_block(f: &ZonalField, scheme: &ClusterScheme, block: DyadicBlock) -> ZonalField {
    project_by(f, scheme, |m| block.contains(m))
}

/// Projector `P_J` onto a half-open range of cluster indices.
pub fn project_index_range(
    f: &ZonalField,
    scheme: &ClusterScheme,
    range: std::ops::Range<usize>,
) -> ZonalField {
    project_by(f, scheme, |m| range.contains(&m))
}

// ---------------------------------------------------------------------------
// Linear flows
// ---------------------------------------------------------------------------

/// The two linear flows: the Laplacian `Δ` with phases `λ_k²`, and the
/// cluster-flattened operator with phases `μ_{n(k)}²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    Laplacian,
    Clustered,
}

/// Phase frequency of degree `k` under a flow (in units of `1/16`, exact).
pub fn flow_freq_sixteenth(
    k: usize,
    flow: Flow,
    scheme: &ClusterScheme,
) -> Result<u64, SphereError> {
    match flow {
        Flow::Laplacian => Ok(eigenvalue_sixteenth(k as u64)),
        Flow::Clustered => scheme
            .cluster_of_degree(k)
            .map(|n| scheme.mu_sq_sixteenth(n))
            .ok_or_else(|| SphereError::Unclustered(eigenvalue(k))),
    }
}

/// `e^{itA} f`: per-mode phases `e^{−i λ_k² t}` or `e^{−i μ_{n(k)}² t}`.
pub fn propagate(
    f: &ZonalField,
    t: f64,
    flow: Flow,
    scheme: &ClusterScheme,
) -> Result<ZonalField, SphereError> {
    let mut coeffs = Vec::with_capacity(f.coeffs().len());
    for (k, &c) in f.coeffs().iter().enumerate() {
        let freq = flow_freq_sixteenth(k, flow, scheme)? as f64 / 16.0;
        coeffs.push(c * Complex64::from_polar(1.0, -freq * t));
    }
    ZonalField::new(coeffs)
}

// ---------------------------------------------------------------------------
// Pointwise quintic
// ---------------------------------------------------------------------------

/// Result of a quintic evaluation, with the L² mass dropped by truncation.
#[derive(Clone, Debug)]
pub struct QuinticOutput {
    pub field: ZonalField,
    pub truncated_l2: f64,
}

/// The field `± |u|⁴ u`, evaluated pointwise on a dealiased grid.
///
/// With `truncate` the output is cut back to the input cutoff `K` using
/// `M = 3K+1` nodes (coefficients up to `K` are exact); without it the full
/// degree-`5K` product is recovered exactly using `M = 5K+1` nodes.
pub fn pointwise_quintic(u: &ZonalField, sign: Sign, truncate: bool) -> QuinticOutput {
    let k = u.cutoff();
    let (m, out_degree) = if truncate {
        (3 * k + 1, 5 * k)
    } else {
        (5 * k + 1, 5 * k)
    };
    let rule = quadrature_rule(m);
    let mut values = u.synthesize(rule.nodes());
    let s = sign.factor();
    for v in &mut values {
        let a = v.norm_sqr();
        *v *= s * a * a;
    }
    let full = analyze(&values, &rule, out_degree).expect("rule matches samples");
    if truncate {
        let (field, loss) = full.truncated_with_loss(k);
        QuinticOutput {
            field,
            truncated_l2: loss,
        }
    } else {
        QuinticOutput {
            field: full,
            truncated_l2: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream_rng;
    use proptest::prelude::*;

    const TOL: f64 = 1e-12;

    /// Closed form `4π ∫_0^π cos^d θ sin²θ dθ` via the double-factorial
    /// reduction (zero for odd `d`).
    fn cos_power_integral(d: usize) -> f64 {
        if d % 2 == 1 {
            return 0.0;
        }
        let m = d / 2;
        // π (2m−1)!! / ((2m)!! (2m+2))
        let mut ratio = 1.0; // (2m−1)!!/(2m)!!
        for i in 1..=m {
            ratio *= (2 * i - 1) as f64 / (2 * i) as f64;
        }
        4.0 * PI * PI * ratio / (2.0 * m as f64 + 2.0)
    }

    /// Coefficients of U_k in the monomial basis, exact for small k.
    fn u_poly(k: usize) -> Vec<f64> {
        let mut prev = vec![1.0];
        if k == 0 {
            return prev;
        }
        let mut cur = vec![0.0, 2.0];
        for _ in 2..=k {
            let mut next = vec![0.0; cur.len() + 1];
            for (i, &c) in cur.iter().enumerate() {
                next[i + 1] += 2.0 * c;
            }
            for (i, &c) in prev.iter().enumerate() {
                next[i] -= c;
            }
            prev = cur;
            cur = next;
        }
        cur
    }

    fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    /// Expand a polynomial in x into U-coefficients by repeated leading-term
    /// elimination.
    fn poly_to_u(mut p: Vec<f64>) -> Vec<f64> {
        let deg = p.len() - 1;
        let mut out = vec![0.0; deg + 1];
        for k in (0..=deg).rev() {
            let uk = u_poly(k);
            let lead = uk[k];
            let c = p[k] / lead;
            out[k] = c;
            for (i, &u) in uk.iter().enumerate() {
                p[i] -= c * u;
            }
        }
        out
    }

    #[test]
    fn eigenvalue_and_multiplicity_match_closed_forms() {
        assert_eq!(eigenvalue(0), 0.0);
        assert_eq!(eigenvalue(2), 8.0);
        assert_eq!(eigenvalue(5), 35.0);
        assert_eq!(multiplicity(0), 1);
        assert_eq!(multiplicity(2), 9);
        assert_eq!(multiplicity(7), 64);
    }

    #[test]
    fn cluster_lookup_on_the_sphere_scheme() {
        let s = ClusterScheme::s3();
        assert_eq!(s.cluster_of(8.0), Some(2));
        assert_eq!(s.cluster_of(0.0), Some(0));
        assert_eq!(s.cluster_of(6.5), None);
        for k in 0..200 {
            assert_eq!(s.cluster_of_degree(k), Some(k));
        }
    }

    #[test]
    fn overlapping_windows_rejected() {
        assert!(ClusterScheme::new(0, 1.0, 1.0).is_err());
        assert!(ClusterScheme::new(4, 3.0, 1.0).is_err());
        assert!(ClusterScheme::new(1, 1.0, 0.5).is_ok());
    }

    #[test]
    fn quadrature_single_node() {
        let rule = quadrature_rule(1);
        assert_eq!(rule.nodes(), &[PI / 2.0]);
        assert!((rule.weights()[0] - SPHERE_VOLUME).abs() < TOL);
    }

    #[test]
    fn quadrature_total_weight_and_cos_squared() {
        let rule = quadrature_rule(3);
        let total: f64 = rule.weights().iter().sum();
        assert!((total - SPHERE_VOLUME).abs() < TOL);
        let moment: f64 = rule
            .nodes()
            .iter()
            .zip(rule.weights())
            .map(|(t, w)| w * t.cos() * t.cos())
            .sum();
        assert!((moment - PI * PI / 2.0).abs() < TOL);
    }

    #[test]
    fn quadrature_exactness_profile() {
        // Exact for degree ≤ 2M−1 and for the odd degree 2M+1; the even
        // degree 2M aliases and must not be expected to integrate exactly.
        for m in [1usize, 2, 3, 5, 8] {
            let rule = quadrature_rule(m);
            for d in 0..=(2 * m - 1) {
                let q: f64 = rule
                    .nodes()
                    .iter()
                    .zip(rule.weights())
                    .map(|(t, w)| w * t.cos().powi(d as i32))
                    .sum();
                assert!(
                    (q - cos_power_integral(d)).abs() < 1e-10,
                    "degree {d} with {m} nodes"
                );
            }
            let odd = 2 * m + 1;
            let q: f64 = rule
                .nodes()
                .iter()
                .zip(rule.weights())
                .map(|(t, w)| w * t.cos().powi(odd as i32))
                .sum();
            assert!(q.abs() < 1e-10);
            // Degree 2M aliases as U_{2M} ↦ −U_0 on the node set, so the
            // monomial x^{2M} picks up exactly −2^{−2M}·2π² of error.
            let even = 2 * m;
            let q: f64 = rule
                .nodes()
                .iter()
                .zip(rule.weights())
                .map(|(t, w)| w * t.cos().powi(even as i32))
                .sum();
            let predicted = -2.0f64.powi(-2 * m as i32) * SPHERE_VOLUME;
            assert!(
                ((q - cos_power_integral(even)) - predicted).abs() < 1e-10,
                "degree 2M aliasing error should match the closed form"
            );
        }
    }

    #[test]
    fn synthesize_basis_values() {
        let scale = basis_scale();
        let e0 = ZonalField::basis(0);
        assert!((e0.eval(1.234) - Complex64::new(scale, 0.0)).norm() < TOL);
        let e1 = ZonalField::basis(1);
        assert!((e1.eval(0.0) - Complex64::new(2.0 * scale, 0.0)).norm() < TOL);
        for k in [3usize, 7, 20] {
            let ek = ZonalField::basis(k);
            let expect = (k as f64 + 1.0) * scale;
            assert!((ek.eval(0.0) - Complex64::new(expect, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn analyze_recovers_basis_field() {
        let rule = quadrature_rule(8);
        let e3 = ZonalField::basis(3);
        let values = e3.synthesize(rule.nodes());
        let rec = analyze(&values, &rule, 6).unwrap();
        for k in 0..=6 {
            let expect = if k == 3 { 1.0 } else { 0.0 };
            assert!((rec.coeff(k) - expect).norm() < TOL, "k={k}");
        }
    }

    #[test]
    fn analyze_zero_and_size_mismatch() {
        let rule = quadrature_rule(4);
        let zeros = vec![Complex64::ZERO; 4];
        let rec = analyze(&zeros, &rule, 3).unwrap();
        assert!(rec.is_zero());
        assert!(analyze(&zeros[..3], &rule, 3).is_err());
    }

    #[test]
    fn product_of_e2_with_itself_lives_on_even_degrees() {
        let rule = quadrature_rule(8);
        let e2 = ZonalField::basis(2);
        let vals: Vec<Complex64> = e2
            .synthesize(rule.nodes())
            .into_iter()
            .map(|v| v * v)
            .collect();
        let rec = analyze(&vals, &rule, 4).unwrap();
        // U_2² = U_0 + U_2 + U_4, so e_2² = (e_0+e_2+e_4)/sqrt(2π²).
        let scale = basis_scale();
        for k in 0..=4 {
            let expect = if k % 2 == 0 { scale } else { 0.0 };
            assert!((rec.coeff(k) - expect).norm() < TOL, "k={k}");
        }
    }

    #[test]
    fn product_linearization_matches_polynomial_expansion() {
        // analyze(e_m e_n) is supported exactly on |m−n|, |m−n|+2, …, m+n
        // with unit coefficients in the U-product rule.
        for m in 0..=10usize {
            for n in 0..=m {
                let p = poly_mul(&u_poly(m), &u_poly(n));
                let u_coeffs = poly_to_u(p);
                let rule = quadrature_rule(m + n + 1);
                let fm = ZonalField::basis(m);
                let fn_ = ZonalField::basis(n);
                let vals: Vec<Complex64> = fm
                    .synthesize(rule.nodes())
                    .into_iter()
                    .zip(fn_.synthesize(rule.nodes()))
                    .map(|(a, b)| a * b)
                    .collect();
                let rec = analyze(&vals, &rule, m + n).unwrap();
                for k in 0..=(m + n) {
                    let brute = u_coeffs[k];
                    let spectral = rec.coeff(k).re * SPHERE_VOLUME.sqrt();
                    assert!(
                        (brute - spectral).abs() < 1e-9,
                        "m={m} n={n} k={k}: {brute} vs {spectral}"
                    );
                    let in_support = k >= m - n && (k + m + n) % 2 == 0;
                    if in_support {
                        assert!((brute - 1.0).abs() < 1e-9);
                    } else {
                        assert!(brute.abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn parseval_roundtrip_at_minimal_node_count() {
        let mut rng = stream_rng(11, &[0]);
        let k = 12;
        let degrees: Vec<usize> = (0..=k).collect();
        let f = ZonalField::random_on_degrees(&degrees, &mut rng);
        let rule = quadrature_rule(k + 1);
        let rec = analyze(&f.synthesize(rule.nodes()), &rule, k).unwrap();
        let err = rec.sub(&f).l2_norm();
        assert!(err < TOL);
    }

    #[test]
    fn projectors_are_idempotent_orthogonal_and_complete() {
        let scheme = ClusterScheme::s3();
        let mut rng = stream_rng(12, &[0]);
        let f = ZonalField::random_on_degrees(&(0..=15).collect::<Vec<_>>(), &mut rng);
        let p2 = project_cluster(&f, &scheme, 2);
        assert_eq!(p2, project_cluster(&p2, &scheme, 2));
        assert!(project_cluster(&p2, &scheme, 3).is_zero());
        let mut sum = ZonalField::zeros(f.cutoff());
        for block in DyadicBlock::partition_up_to(15) {
            sum = sum.add(&project_block(&f, &scheme, block));
        }
        assert!(sum.sub(&f).l2_norm() < TOL);
    }

    #[test]
    fn projection_examples() {
        let scheme = ClusterScheme::s3();
        let e2 = ZonalField::basis(2);
        assert!(project_cluster(&e2, &scheme, 2).sub(&e2).l2_norm() < TOL);
        assert!(project_cluster(&e2, &scheme, 3).is_zero());
        let f = ZonalField::new((0..=7).map(|_| Complex64::ONE).collect()).unwrap();
        let p4 = project_block(&f, &scheme, DyadicBlock::new(4).unwrap());
        for k in 0..=7 {
            let expect = if k >= 4 { 1.0 } else { 0.0 };
            assert!((p4.coeff(k) - expect).norm() < TOL);
        }
    }

    #[test]
    fn sobolev_norm_examples() {
        let e0 = ZonalField::basis(0);
        assert!((e0.sobolev_norm(3.7) - 1.0).abs() < TOL);
        let e2 = ZonalField::basis(2);
        assert!((e2.sobolev_norm(1.0) - 3.0).abs() < TOL);
        let mixed = ZonalField::basis(0).add(&ZonalField::basis(2));
        assert!((mixed.sobolev_norm(1.0) - 10.0f64.sqrt()).abs() < TOL);
        assert!((mixed.sobolev_norm(0.0) - mixed.l2_norm()).abs() < TOL);
    }

    #[test]
    fn sup_norm_of_eigenfunctions_grows_linearly() {
        let scale = basis_scale();
        let e0 = ZonalField::basis(0);
        assert!((e0.sup_norm() - scale).abs() < 1e-10);
        for k in [1usize, 2, 5, 17, 64] {
            let ek = ZonalField::basis(k);
            let expect = (k as f64 + 1.0) * scale;
            assert!(
                (ek.sup_norm() - expect).abs() < 1e-8,
                "k={k}: {} vs {expect}",
                ek.sup_norm()
            );
            // Sogge ratio in d = 3: sup/L² = (k+1)/sqrt(2π²).
            assert!(ek.sup_norm() / ek.l2_norm() <= (k as f64 + 1.0) * scale + 1e-8);
        }
    }

    #[test]
    fn sup_norm_finds_interior_extrema() {
        // e_1 + e_2 peaks away from the poles on one side; compare against a
        // very fine scan.
        let f = ZonalField::basis(1).add(&ZonalField::basis(2).scaled(Complex64::new(-0.7, 0.3)));
        let fine: f64 = (0..200_001)
            .map(|j| f.eval(j as f64 * PI / 200_000.0).norm())
            .fold(0.0, f64::max);
        assert!((f.sup_norm() - fine).abs() < 1e-9);
    }

    #[test]
    fn quintic_on_constants_and_zero() {
        let c = Complex64::new(0.3, -0.4);
        let u = ZonalField::basis(0).scaled(c);
        let out = pointwise_quintic(&u, Sign::Defocusing, true);
        let expect = c * c.norm_sqr().powi(2) / (SPHERE_VOLUME * SPHERE_VOLUME);
        assert!((out.field.coeff(0) - expect).norm() < TOL);
        assert_eq!(out.truncated_l2, 0.0);
        let focusing = pointwise_quintic(&u, Sign::Focusing, true);
        assert!((focusing.field.coeff(0) + expect).norm() < TOL);
        let z = pointwise_quintic(&ZonalField::zeros(4), Sign::Defocusing, true);
        assert!(z.field.is_zero());
    }

    #[test]
    fn quintic_support_is_exactly_five_k() {
        let mut rng = stream_rng(13, &[1]);
        let k = 6;
        let u = ZonalField::random_on_degrees(&(0..=k).collect::<Vec<_>>(), &mut rng);
        let out = pointwise_quintic(&u, Sign::Defocusing, false);
        assert_eq!(out.field.cutoff(), 5 * k);
        assert!(out.field.coeff(5 * k).norm() > 1e-12);
        // Re-analyzing at a higher cutoff shows nothing beyond 5K.
        let rule = quadrature_rule(6 * k + 4);
        let vals: Vec<Complex64> = u
            .synthesize(rule.nodes())
            .into_iter()
            .map(|v| v * v.norm_sqr().powi(2))
            .collect();
        let rec = analyze(&vals, &rule, 6 * k).unwrap();
        for deg in 5 * k + 1..=6 * k {
            assert!(rec.coeff(deg).norm() < TOL, "degree {deg}");
        }
    }

    #[test]
    fn propagate_is_unitary_and_flows_differ_by_global_phase() {
        let scheme = ClusterScheme::s3();
        let mut rng = stream_rng(14, &[2]);
        let f = ZonalField::random_on_degrees(&(0..=20).collect::<Vec<_>>(), &mut rng);
        let t = 0.73;
        let a = propagate(&f, t, Flow::Laplacian, &scheme).unwrap();
        let b = propagate(&f, t, Flow::Clustered, &scheme).unwrap();
        assert!((a.l2_norm() - f.l2_norm()).abs() < 1e-14);
        let phase = Complex64::from_polar(1.0, -t);
        for k in 1..=20 {
            assert!((b.coeff(k) - a.coeff(k) * phase).norm() < 1e-13);
        }
        assert!((b.coeff(0) - a.coeff(0)).norm() < 1e-15);
    }

    #[test]
    fn text_roundtrip_bit_exact() {
        let mut rng = stream_rng(15, &[3]);
        let f = ZonalField::random_on_degrees(&[0, 1, 5, 9], &mut rng);
        let mut buf = Vec::new();
        f.write_text(&mut buf).unwrap();
        let g = ZonalField::read_text(&mut buf.as_slice()).unwrap();
        assert_eq!(f, g);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn binary_roundtrip(coeffs in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..40)) {
            let f = ZonalField::new(coeffs.iter().map(|&(r, i)| Complex64::new(r, i)).collect()).unwrap();
            let mut buf = Vec::new();
            f.write_binary(&mut buf).unwrap();
            let g = ZonalField::read_binary(&mut buf.as_slice()).unwrap();
            prop_assert_eq!(f, g);
        }
    }
}
