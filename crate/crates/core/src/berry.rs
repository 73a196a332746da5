//! Non-abelian Berry connections and holonomies of degenerate eigenspaces.
//!
//! Conventions: the connection is `A_i = i F†∂_i F` for an orthonormal
//! frame `F` (columns spanning the selected cluster), `U_L = P exp(i∮A)`
//! with later segments to the left, and the end alignment `B` maps the
//! final frame back onto the initial one. The loop unitary `W = B·U_L` is
//! expressed in the initial frame; under a change of frames `F_k → F_k g_k`
//! it transforms as `W → g_0† W g_0`, so its spectrum is gauge invariant.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{
    c, cis, eigenphase_distance, eigenphases, eigh, ensure_hermitian, ensure_unitary, expi_hermitian,
    min_singular_value, principal_value, unitarize, CMat,
};

/// Smallest admissible singular value of a successive-frame overlap.
pub const MIN_OVERLAP: f64 = 0.9;
pub const DEFAULT_GAP_FLOOR: f64 = 1e-6;
/// Cluster width allowed relative to `max(1, |E|_max)`.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;
pub const DEFAULT_FD_STEP: f64 = 1e-4;
pub const FRAME_ORTHONORMAL_TOL: f64 = 1e-10;
/// Anti-Hermitian part of a finite-difference connection above which a warning is attached.
pub const CONNECTION_RESIDUAL_TOL: f64 = 1e-6;
/// Below this `|tr(U1†U2)|/dim` the relative phase is undefined.
pub const TRACE_FLOOR: f64 = 1e-9;

/// Frames along an ordered list of parameter points, continued from the
/// first point. Implementations fix the gauge.
pub trait FrameContinuation: Send + Sync {
    fn frames_along(&self, points: &[Vec<f64>]) -> Result<Vec<CMat>>;
}

struct Pointwise<F>(F);

impl<F> FrameContinuation for Pointwise<F>
where
    F: Fn(&[f64]) -> Result<CMat> + Send + Sync,
{
    fn frames_along(&self, points: &[Vec<f64>]) -> Result<Vec<CMat>> {
        points.iter().map(|p| (self.0)(p)).collect()
    }
}

/// How frames are chosen inside the degenerate subspace.
#[derive(Clone)]
pub enum Gauge {
    /// Eigenvectors, each aligned to the previous sample.
    Sequential,
    /// Eigenvectors aligned to a fixed `N×D` reference.
    Reference(CMat),
    /// Frames supplied by the family itself (analytic continuation).
    Continued(Arc<dyn FrameContinuation>),
}

impl Gauge {
    /// A single-valued section `λ ↦ F(λ)`.
    pub fn pointwise<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<CMat> + Send + Sync + 'static,
    {
        Gauge::Continued(Arc::new(Pointwise(f)))
    }
}

impl fmt::Debug for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gauge::Sequential => f.write_str("Sequential"),
            Gauge::Reference(r) => write!(f, "Reference({}×{})", r.nrows(), r.ncols()),
            Gauge::Continued(_) => f.write_str("Continued"),
        }
    }
}

pub type Evaluator = Arc<dyn Fn(&[f64]) -> CMat + Send + Sync>;

/// Hermitian `N×N` matrices over `R^k` with a selected cluster of `D`
/// eigenvalues starting at ascending index `level_start`.
#[derive(Clone)]
pub struct HamiltonianFamily {
    param_dim: usize,
    dim: usize,
    evaluator: Evaluator,
    level_start: usize,
    degeneracy: usize,
    gap_floor: f64,
    cluster_tol: f64,
    gauge: Gauge,
}

impl fmt::Debug for HamiltonianFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianFamily")
            .field("param_dim", &self.param_dim)
            .field("dim", &self.dim)
            .field("level_start", &self.level_start)
            .field("degeneracy", &self.degeneracy)
            .field("gap_floor", &self.gap_floor)
            .field("gauge", &self.gauge)
            .finish()
    }
}

impl HamiltonianFamily {
    pub fn new<F>(param_dim: usize, dim: usize, level_start: usize, degeneracy: usize, evaluator: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> CMat + Send + Sync + 'static,
    {
        if param_dim == 0 || dim == 0 || degeneracy == 0 || level_start + degeneracy > dim {
            return Err(Error::InvalidFamily(format!(
                "need k ≥ 1 and a cluster inside the spectrum (k = {param_dim}, N = {dim}, levels {level_start}..{})",
                level_start + degeneracy
            )));
        }
        Ok(Self {
            param_dim,
            dim,
            evaluator: Arc::new(evaluator),
            level_start,
            degeneracy,
            gap_floor: DEFAULT_GAP_FLOOR,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            gauge: Gauge::Sequential,
        })
    }

    pub fn with_gap_floor(mut self, gap_floor: f64) -> Self {
        self.gap_floor = gap_floor;
        self
    }

    pub fn with_cluster_tol(mut self, cluster_tol: f64) -> Self {
        self.cluster_tol = cluster_tol;
        self
    }

    pub fn with_gauge(mut self, gauge: Gauge) -> Self {
        self.gauge = gauge;
        self
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degeneracy(&self) -> usize {
        self.degeneracy
    }

    pub fn level_start(&self) -> usize {
        self.level_start
    }

    pub fn gap_floor(&self) -> f64 {
        self.gap_floor
    }

    pub fn gauge(&self) -> &Gauge {
        &self.gauge
    }

    pub fn hamiltonian(&self, lambda: &[f64]) -> Result<CMat> {
        if lambda.len() != self.param_dim {
            return Err(Error::DimensionMismatch {
                expected: self.param_dim,
                got: lambda.len(),
            });
        }
        let h = (self.evaluator)(lambda);
        if h.nrows() != self.dim || h.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: h.nrows(),
            });
        }
        ensure_hermitian(&h)?;
        Ok(h)
    }
}

/// Orthonormal basis of the selected cluster at `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub lambda: Vec<f64>,
    /// `N×D`, orthonormal columns.
    pub basis: CMat,
    pub energies: Vec<f64>,
}

fn eigen_frame(family: &HamiltonianFamily, lambda: &[f64]) -> Result<Frame> {
    let h = family.hamiltonian(lambda)?;
    let (values, vectors) = eigh(&h)?;
    let (s, d) = (family.level_start, family.degeneracy);
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let width = values[s + d - 1] - values[s];
    let collapse = |reason: String| Error::GapCollapse {
        at: lambda.to_vec(),
        reason,
    };
    if width > family.cluster_tol * scale {
        return Err(collapse(format!("cluster of {d} levels is split by {width:e}")));
    }
    if s > 0 && values[s] - values[s - 1] < family.gap_floor {
        return Err(collapse(format!("gap below the cluster is {:e}", values[s] - values[s - 1])));
    }
    if s + d < values.len() && values[s + d] - values[s + d - 1] < family.gap_floor {
        return Err(collapse(format!(
            "gap above the cluster is {:e}",
            values[s + d] - values[s + d - 1]
        )));
    }
    Ok(Frame {
        lambda: lambda.to_vec(),
        basis: vectors.columns(s, d).into_owned(),
        energies: values[s..s + d].to_vec(),
    })
}

/// `basis·unitarize(basis†·target)`: the frame of the same span closest to `target`.
fn align_to(basis: &CMat, target: &CMat) -> Result<CMat> {
    Ok(basis * unitarize(&(basis.adjoint() * target))?)
}

/// Selected-cluster frame at `lambda`, aligned to `previous` when given.
pub fn frame_at(family: &HamiltonianFamily, lambda: &[f64], previous: Option<&Frame>) -> Result<Frame> {
    let mut frame = eigen_frame(family, lambda)?;
    if let Some(p) = previous {
        frame.basis = align_to(&frame.basis, &p.basis)?;
    }
    Ok(frame)
}

fn check_frame(family: &HamiltonianFamily, f: &CMat) -> Result<()> {
    if f.nrows() != family.dim || f.ncols() != family.degeneracy {
        return Err(Error::DimensionMismatch {
            expected: family.dim * family.degeneracy,
            got: f.nrows() * f.ncols(),
        });
    }
    let gram = f.adjoint() * f;
    let err = (gram - CMat::identity(family.degeneracy, family.degeneracy))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if err > FRAME_ORTHONORMAL_TOL {
        return Err(Error::NotUnitary { defect: err });
    }
    Ok(())
}

fn frames_with_gauge(family: &HamiltonianFamily, gauge: &Gauge, points: &[Vec<f64>], exec: Exec) -> Result<Vec<CMat>> {
    match gauge {
        Gauge::Sequential => {
            let raw = exec.map(points, |p| eigen_frame(family, p));
            let mut out: Vec<CMat> = Vec::with_capacity(points.len());
            for f in raw {
                let f = f?.basis;
                let aligned = match out.last() {
                    Some(prev) => align_to(&f, prev)?,
                    None => f,
                };
                out.push(aligned);
            }
            Ok(out)
        }
        Gauge::Reference(r) => exec
            .map(points, |p| eigen_frame(family, p).and_then(|f| align_to(&f.basis, r)))
            .into_iter()
            .collect(),
        Gauge::Continued(g) => {
            let frames = g.frames_along(points)?;
            if frames.len() != points.len() {
                return Err(Error::DimensionMismatch {
                    expected: points.len(),
                    got: frames.len(),
                });
            }
            for f in &frames {
                check_frame(family, f)?;
            }
            Ok(frames)
        }
    }
}

/// Frames along `points` in the family's own gauge.
pub fn frames_along(family: &HamiltonianFamily, points: &[Vec<f64>], exec: Exec) -> Result<Vec<CMat>> {
    frames_with_gauge(family, &family.gauge, points, exec)
}

/// Closed, ordered list of parameter points. The last sample equals the
/// first, up to whole periods in coordinates declared periodic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterLoop {
    samples: Vec<Vec<f64>>,
    periods: Vec<Option<f64>>,
    refinement: u32,
}

/// Distance at which the last sample is considered equal to the first.
pub const LOOP_CLOSURE_TOL: f64 = 1e-12;

impl ParameterLoop {
    pub fn new(samples: Vec<Vec<f64>>) -> Result<Self> {
        let k = samples.first().map_or(0, Vec::len);
        Self::with_periods(samples, vec![None; k])
    }

    pub fn with_periods(mut samples: Vec<Vec<f64>>, periods: Vec<Option<f64>>) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::InvalidLoop(format!("{} samples, need at least 3", samples.len())));
        }
        let k = samples[0].len();
        if k == 0 || samples.iter().any(|s| s.len() != k) || periods.len() != k {
            return Err(Error::InvalidLoop("samples and periods must share one positive dimension".into()));
        }
        if samples.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidLoop("non-finite sample".into()));
        }
        if periods.iter().flatten().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidLoop("periods must be positive".into()));
        }
        let n = samples.len();
        for i in 0..k {
            let d = samples[n - 1][i] - samples[0][i];
            let wraps = periods[i].map_or(0.0, |p| (d / p).round() * p);
            if (d - wraps).abs() > LOOP_CLOSURE_TOL * samples[0][i].abs().max(1.0) {
                return Err(Error::InvalidLoop(format!(
                    "not closed: coordinate {i} differs by {:e} between first and last sample",
                    d - wraps
                )));
            }
            samples[n - 1][i] = samples[0][i] + wraps;
        }
        Ok(Self {
            samples,
            periods,
            refinement: 0,
        })
    }

    /// `n_segments + 1` samples of `f(s)` at `s = k/n_segments`, `s = 1` included.
    pub fn from_fn<F>(n_segments: usize, periods: Vec<Option<f64>>, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Vec<f64>,
    {
        let samples = (0..=n_segments).map(|k| f(k as f64 / n_segments as f64)).collect();
        Self::with_periods(samples, periods)
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn periods(&self) -> &[Option<f64>] {
        &self.periods
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].len()
    }

    pub fn refinement(&self) -> u32 {
        self.refinement
    }

    pub fn max_step(&self) -> f64 {
        self.samples.windows(2).map(|w| dist(&w[0], &w[1])).fold(0.0, f64::max)
    }

    /// Inserts the midpoint of every segment.
    pub fn refined(&self) -> Self {
        let mut samples = Vec::with_capacity(2 * self.samples.len());
        for w in self.samples.windows(2) {
            samples.push(w[0].clone());
            samples.push(w[0].iter().zip(&w[1]).map(|(a, b)| 0.5 * (a + b)).collect());
        }
        samples.push(self.samples[self.samples.len() - 1].clone());
        Self {
            samples,
            periods: self.periods.clone(),
            refinement: self.refinement + 1,
        }
    }

    pub fn reversed(&self) -> Self {
        let mut samples = self.samples.clone();
        samples.reverse();
        Self {
            samples,
            periods: self.periods.clone(),
            refinement: self.refinement,
        }
    }

    /// Appends a non-periodic coordinate `extra(k)` to sample `k`.
    pub fn lifted<F>(&self, extra: F) -> Self
    where
        F: Fn(usize) -> f64,
    {
        let n = self.samples.len();
        let mut samples: Vec<Vec<f64>> = self
            .samples
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let mut s = s.clone();
                s.push(extra(k % (n - 1)));
                s
            })
            .collect();
        let first_extra = samples[0][samples[0].len() - 1];
        let last = samples[n - 1].len() - 1;
        samples[n - 1][last] = first_extra;
        let mut periods = self.periods.clone();
        periods.push(None);
        Self {
            samples,
            periods,
            refinement: self.refinement,
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Holonomy of one closed loop.
#[derive(Debug, Clone, PartialEq)]
pub struct HolonomyResult {
    pub u_l: CMat,
    pub end_alignment: CMat,
    /// `B·U_L`, in the initial frame.
    pub loop_unitary: CMat,
    /// Sorted eigenphases of `B·U_L`.
    pub spectrum: Vec<f64>,
    /// `arg det(B·U_L) / D`, with `arg` the principal value.
    pub overall_phase: f64,
    /// `e^{−i·overall_phase}·B·U_L`, unit determinant.
    pub projective_part: CMat,
    pub samples: usize,
    /// Smallest singular value over successive overlaps (1 for connection transport).
    pub min_overlap: f64,
}

impl HolonomyResult {
    pub fn from_parts(u_l: CMat, end_alignment: CMat, samples: usize, min_overlap: f64) -> Self {
        let loop_unitary = &end_alignment * &u_l;
        let d = loop_unitary.nrows() as f64;
        let overall_phase = loop_unitary.determinant().arg() / d;
        let projective_part = &loop_unitary * cis(-overall_phase);
        Self {
            spectrum: eigenphases(&loop_unitary),
            u_l,
            end_alignment,
            loop_unitary,
            overall_phase,
            projective_part,
            samples,
            min_overlap,
        }
    }

    pub fn dim(&self) -> usize {
        self.loop_unitary.nrows()
    }
}

/// Discrete Wilson line of an ordered frame list whose last frame spans the
/// same subspace as the first: `U_L = Π_k unitarize(F_k†F_{k+1})†`,
/// `B = unitarize(F_0†F_n)`.
pub fn holonomy_from_frames(frames: &[CMat]) -> Result<HolonomyResult> {
    if frames.len() < 2 {
        return Err(Error::InvalidLoop("need at least two frames".into()));
    }
    let d = frames[0].ncols();
    let mut u = CMat::identity(d, d);
    let mut min_overlap = f64::INFINITY;
    for (k, w) in frames.windows(2).enumerate() {
        let m = w[0].adjoint() * &w[1];
        let sv = min_singular_value(&m);
        min_overlap = min_overlap.min(sv);
        if sv < MIN_OVERLAP {
            return Err(Error::IllConditionedLoop {
                index: k,
                next: k + 1,
                singular_value: sv,
            });
        }
        u = unitarize(&m)?.adjoint() * u;
    }
    let close = frames[0].adjoint() * &frames[frames.len() - 1];
    let sv = min_singular_value(&close);
    if sv < 1.0 - 1e-6 {
        return Err(Error::InvalidLoop(format!(
            "final frame does not span the initial subspace (smallest singular value {sv})"
        )));
    }
    let b = unitarize(&close)?;
    Ok(HolonomyResult::from_parts(u, b, frames.len(), min_overlap))
}

fn with_one_refinement<F>(lp: &ParameterLoop, f: F) -> Result<HolonomyResult>
where
    F: Fn(&ParameterLoop) -> Result<HolonomyResult>,
{
    match f(lp) {
        Err(Error::IllConditionedLoop { .. }) => f(&lp.refined()),
        other => other,
    }
}

/// Overlap-product holonomy; an ill-conditioned loop is refined once.
pub fn holonomy_overlap(family: &HamiltonianFamily, lp: &ParameterLoop, exec: Exec) -> Result<HolonomyResult> {
    check_loop(family, lp)?;
    with_one_refinement(lp, |l| holonomy_from_frames(&frames_along(family, l.samples(), exec)?))
}

fn check_loop(family: &HamiltonianFamily, lp: &ParameterLoop) -> Result<()> {
    if lp.dim() != family.param_dim {
        return Err(Error::DimensionMismatch {
            expected: family.param_dim,
            got: lp.dim(),
        });
    }
    Ok(())
}

/// Overlap-product holonomy with frames `F_k → F_k g_k`.
pub fn regauge(family: &HamiltonianFamily, lp: &ParameterLoop, gauges: &[CMat], exec: Exec) -> Result<HolonomyResult> {
    check_loop(family, lp)?;
    if gauges.len() != lp.len() {
        return Err(Error::DimensionMismatch {
            expected: lp.len(),
            got: gauges.len(),
        });
    }
    for g in gauges {
        if g.nrows() != family.degeneracy || g.ncols() != family.degeneracy {
            return Err(Error::DimensionMismatch {
                expected: family.degeneracy,
                got: g.nrows(),
            });
        }
        ensure_unitary(g, 1e-10)?;
    }
    let frames = frames_along(family, lp.samples(), exec)?;
    let regauged: Vec<CMat> = frames.iter().zip(gauges).map(|(f, g)| f * g).collect();
    holonomy_from_frames(&regauged)
}

/// Gauge used when a smooth section is needed: the family's own, or the
/// eigenframe at `anchor` as a fixed reference.
fn smooth_gauge(family: &HamiltonianFamily, anchor: &[f64]) -> Result<Gauge> {
    Ok(match &family.gauge {
        Gauge::Sequential => Gauge::Reference(eigen_frame(family, anchor)?.basis),
        g => g.clone(),
    })
}

fn offsets(center: &[f64], step: f64) -> Vec<Vec<f64>> {
    let mut pts = Vec::with_capacity(2 * center.len());
    for i in 0..center.len() {
        for sign in [-1.0, 1.0] {
            let mut p = center.to_vec();
            p[i] += sign * step;
            pts.push(p);
        }
    }
    pts
}

/// `A_i = i F†(F(λ+h e_i) − F(λ−h e_i))/(2h)` from a block of frames laid
/// out as `[F(λ), F(λ−he_1), F(λ+he_1), …]`; returns the Hermitian parts
/// and the largest anti-Hermitian residual.
fn connection_from_block(block: &[CMat], step: f64) -> (Vec<CMat>, f64) {
    let f0 = &block[0];
    let mut residual = 0.0f64;
    let comps = block[1..]
        .chunks(2)
        .map(|pair| {
            let raw = (f0.adjoint() * (&pair[1] - &pair[0])) * c(0.0, 1.0 / (2.0 * step));
            let herm = (&raw + raw.adjoint()) * c(0.5, 0.0);
            let anti = (&raw - raw.adjoint()) * c(0.5, 0.0);
            residual = residual.max(anti.iter().map(|z| z.norm()).fold(0.0, f64::max));
            herm
        })
        .collect();
    (comps, residual)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionWarning {
    pub anti_hermitian_residual: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerryConnectionSample {
    pub lambda: Vec<f64>,
    /// `A_i` for each parameter direction, Hermitian.
    pub components: Vec<CMat>,
    pub anti_hermitian_residual: f64,
    pub warning: Option<ConnectionWarning>,
}

/// Central-difference connection at `lambda` in the family's gauge. A family
/// without its own section uses the eigenframe at `lambda` as reference, a
/// gauge in which `A(λ) = 0`.
pub fn berry_connection_fd(
    family: &HamiltonianFamily,
    lambda: &[f64],
    step: f64,
    exec: Exec,
) -> Result<BerryConnectionSample> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidFamily(format!("finite-difference step must be positive, got {step}")));
    }
    let gauge = smooth_gauge(family, lambda)?;
    let mut points = vec![lambda.to_vec()];
    points.extend(offsets(lambda, step));
    let block = frames_with_gauge(family, &gauge, &points, exec)?;
    let (components, residual) = connection_from_block(&block, step);
    Ok(BerryConnectionSample {
        lambda: lambda.to_vec(),
        components,
        anti_hermitian_residual: residual,
        warning: (residual > CONNECTION_RESIDUAL_TOL).then_some(ConnectionWarning {
            anti_hermitian_residual: residual,
            tolerance: CONNECTION_RESIDUAL_TOL,
        }),
    })
}

/// Path-ordered exponential of the finite-difference connection, sampled at
/// segment midpoints: `U_L = Π_k exp(i Σ_i A_i(λ_{k+½}) Δλ_i)`.
pub fn holonomy_connection(
    family: &HamiltonianFamily,
    lp: &ParameterLoop,
    fd_step: f64,
    exec: Exec,
) -> Result<HolonomyResult> {
    check_loop(family, lp)?;
    let samples = lp.samples();
    let gauge = smooth_gauge(family, &samples[0])?;
    let k = lp.dim();
    let block_len = 2 + 2 * k;
    let mut points = Vec::with_capacity((samples.len() - 1) * block_len + 1);
    for w in samples.windows(2) {
        let mid: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| 0.5 * (a + b)).collect();
        points.push(w[0].clone());
        points.push(mid.clone());
        points.extend(offsets(&mid, fd_step));
    }
    points.push(samples[samples.len() - 1].clone());
    let frames = frames_with_gauge(family, &gauge, &points, exec)?;
    let d = family.degeneracy;
    let mut u = CMat::identity(d, d);
    let mut max_residual = 0.0f64;
    for (seg, w) in samples.windows(2).enumerate() {
        let block = &frames[seg * block_len + 1..(seg + 1) * block_len];
        let (comps, residual) = connection_from_block(block, fd_step);
        max_residual = max_residual.max(residual);
        let mut x = CMat::zeros(d, d);
        for (i, a) in comps.iter().enumerate() {
            x += a * c(w[1][i] - w[0][i], 0.0);
        }
        u = expi_hermitian(&x)? * u;
    }
    let close = frames[0].adjoint() * &frames[frames.len() - 1];
    let b = unitarize(&close)?;
    Ok(HolonomyResult::from_parts(u, b, samples.len(), 1.0))
}

/// Both holonomy methods on one loop.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    pub overlap: HolonomyResult,
    pub connection: HolonomyResult,
    /// Bottleneck distance between the two spectra.
    pub spectrum_gap: f64,
    pub agree: bool,
}

pub fn cross_validate(
    family: &HamiltonianFamily,
    lp: &ParameterLoop,
    fd_step: f64,
    tol: f64,
    exec: Exec,
) -> Result<CrossValidation> {
    let overlap = holonomy_overlap(family, lp, exec)?;
    let connection = holonomy_connection(family, lp, fd_step, exec)?;
    let spectrum_gap = eigenphase_distance(&overlap.spectrum, &connection.spectrum);
    Ok(CrossValidation {
        agree: spectrum_gap <= tol,
        overlap,
        connection,
        spectrum_gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveDistance {
    /// `arg tr(U1†U2)`; zero when undefined.
    pub phase: f64,
    /// `‖U2 − e^{i·phase}U1‖_F`.
    pub residual: f64,
    pub phase_defined: bool,
}

/// How far `u2` is from `e^{iα}u1` for the best `α`.
pub fn projective_distance(u1: &CMat, u2: &CMat) -> Result<ProjectiveDistance> {
    if u1.shape() != u2.shape() {
        return Err(Error::DimensionMismatch {
            expected: u1.nrows(),
            got: u2.nrows(),
        });
    }
    let tr = (u1.adjoint() * u2).trace();
    let phase_defined = tr.norm() > TRACE_FLOOR * u1.nrows() as f64;
    let phase = if phase_defined { principal_value(tr.arg()) } else { 0.0 };
    let residual = (u2 - u1 * cis(phase)).norm();
    Ok(ProjectiveDistance {
        phase,
        residual,
        phase_defined,
    })
}

fn pauli() -> [CMat; 3] {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        CMat::from_row_slice(2, 2, &[z, one, one, z]),
        CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        CMat::from_row_slice(2, 2, &[one, z, z, -one]),
    ]
}

/// `H(θ, φ) = −n̂(θ, φ)·σ`; the ground state is spin-up along `n̂`. The gauge
/// is the section aligned to spin-up along z, in which the ground state is
/// `(cos θ/2, e^{iφ} sin θ/2)` and `A_φ = −(1 − cos θ)/2`.
pub fn cone_family() -> HamiltonianFamily {
    let [sx, sy, sz] = pauli();
    let eval = move |p: &[f64]| {
        let (theta, phi) = (p[0], p[1]);
        let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        -(&sx * c(n[0], 0.0) + &sy * c(n[1], 0.0) + &sz * c(n[2], 0.0))
    };
    let up = CMat::from_column_slice(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]);
    HamiltonianFamily::new(2, 2, 0, 1, eval)
        .expect("valid cone family")
        .with_gauge(Gauge::Reference(up))
}

/// Loop `φ: 0 → 2π` at fixed polar angle, `n_segments` steps.
pub fn cone_loop(theta: f64, n_segments: usize) -> Result<ParameterLoop> {
    let tau = 2.0 * std::f64::consts::PI;
    ParameterLoop::from_fn(n_segments, vec![None, Some(tau)], |s| vec![theta, tau * s])
}

/// Subspace `P0` rotated by `e^{iφG}`: `H(φ) = −e^{iφG} P0 P0† e^{−iφG}`,
/// frame `F(φ) = e^{iφG}P0`. With integer-spectrum `G` the frame is single
/// valued, `U_L = exp(−2πi P0†G P0)` and `B = I`.
pub fn rotating_subspace_family(generator: CMat, degeneracy: usize) -> Result<HamiltonianFamily> {
    ensure_hermitian(&generator)?;
    let n = generator.nrows();
    if degeneracy == 0 || degeneracy >= n {
        return Err(Error::InvalidFamily(format!("degeneracy {degeneracy} must lie in 1..{n}")));
    }
    let p0 = CMat::identity(n, n).columns(0, degeneracy).into_owned();
    let (gen_h, p0_h) = (generator.clone(), p0.clone());
    let eval = move |p: &[f64]| {
        let r = expi_hermitian(&(&gen_h * c(p[0], 0.0))).expect("Hermitian generator");
        -(&r * &p0_h * p0_h.adjoint() * r.adjoint())
    };
    let section = move |p: &[f64]| Ok(expi_hermitian(&(&generator * c(p[0], 0.0)))? * &p0);
    Ok(HamiltonianFamily::new(1, n, 0, degeneracy, eval)?.with_gauge(Gauge::pointwise(section)))
}

/// Loop `φ: 0 → 2π` in `n_segments` steps.
pub fn angle_loop(n_segments: usize) -> Result<ParameterLoop> {
    let tau = 2.0 * std::f64::consts::PI;
    ParameterLoop::from_fn(n_segments, vec![Some(tau)], |s| vec![tau * s])
}
