//! Toy degenerate family whose frames depend on the loop parameter
//! `η = (x + iy)/l_B` holomorphically, up to a Gaussian and real positive
//! channel moduli.
//!
//! The frame is a product `|η⟩_orb ⊗ F_int(θ)`:
//!
//! * `|η⟩_orb` is a lowest-Landau-level coherent state truncated at `N`
//!   levels, amplitudes `e^{−|η|²/4} α^n/√n!` with `α = η/√2`. Transport
//!   around a loop of area `A` gives the scalar phase `e^{−iA/l_B²}`.
//! * `F_int(θ) = e^{iθG}P_0` with `θ = arg Π_j (η − w_j)` continued along
//!   the path, `G = g + [[0, C†], [C, 0]]` on `C^{2D}` and `C` having
//!   half-integer singular values `s_k`. In the eigenchannels of `G`
//!   (eigenvalues `ν`) the amplitudes are `p(η)^ν / |p(η)|^ν`, with
//!   `p = Π_j (η − w_j)`.
//!
//! The connection is then a multiple of the identity, and the loop unitary
//! is `B·U_L = e^{−iA/l_B²} M^n` with `n` the total winding around the
//! punctures and `M = V' diag((−1)^{2s_k}) V'†`. Its projective part
//! depends only on winding data.
//!
//! Two perturbations break this. `Antiholomorphic` multiplies the frame by
//! `e^{iε ρ(η) G⊥}` with `ρ = |η − w̄|²`, explicitly `η*`-dependent.
//! `ExtraParameter` adds a third coordinate `ξ` and multiplies by
//! `e^{iεξ G⊥}`; loops confined to `ξ = 0` are untouched.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::anyon::{winding_number, PlanarPath, Point};
use crate::berry::{
    holonomy_overlap, projective_distance, FrameContinuation, Gauge, HamiltonianFamily, HolonomyResult,
    ParameterLoop,
};
use crate::braid::BraidRepresentation;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{c, cis, eigh, expi_hermitian, principal_value, CMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationMode {
    Antiholomorphic,
    ExtraParameter,
}

/// Parameters of a [`HolomorphicFamily`]; lengths in physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolomorphicSpec {
    pub punctures: Vec<[f64; 2]>,
    pub magnetic_length: f64,
    /// Orbital levels kept.
    pub truncation: usize,
    pub degeneracy: usize,
    pub epsilon: f64,
    pub mode: PerturbationMode,
    /// Largest `|η|` the truncation must serve.
    pub working_radius: f64,
    /// Singular values of `C`, positive multiples of 1/2; default `(k+1)/2`.
    pub spins: Option<Vec<f64>>,
    /// Scalar shift `g` of the internal generator.
    pub generator_shift: f64,
}

impl Default for HolomorphicSpec {
    fn default() -> Self {
        Self {
            punctures: vec![[0.0, 0.0]],
            magnetic_length: 1.0,
            truncation: 48,
            degeneracy: 2,
            epsilon: 0.0,
            mode: PerturbationMode::Antiholomorphic,
            working_radius: 4.0,
            spins: None,
            generator_shift: 0.0,
        }
    }
}

/// Largest tolerated norm lost to the orbital truncation inside the working disk.
pub const TRUNCATION_TOL: f64 = 1e-10;
/// Minimal distance (in `l_B`) between punctures and between a sample and a puncture.
pub const PUNCTURE_TOL: f64 = 1e-9;
/// Largest angle increment around a puncture between consecutive samples.
pub const MAX_BRANCH_STEP: f64 = PI / 2.0;

/// `P(n ≥ levels)` for a Poisson distribution of mean `mu`.
fn poisson_tail(mu: f64, levels: usize) -> f64 {
    let mut term = (-mu).exp();
    let mut head = 0.0;
    for n in 0..levels {
        head += term;
        term *= mu / (n + 1) as f64;
    }
    let mut tail = 0.0;
    let mut n = levels;
    while term > 1e-300 && n < levels + 2000 {
        tail += term;
        n += 1;
        term *= mu / n as f64;
    }
    tail.max(1.0 - head - tail).max(tail)
}

/// Deterministic Hermitian matrix used for the fixed unitaries and `G⊥`.
fn fixed_hermitian(d: usize, seed: f64) -> CMat {
    let mut h = CMat::zeros(d, d);
    for a in 0..d {
        for b in a..d {
            let re = (seed * (a + 1) as f64 + 1.3 * (b + 1) as f64).cos();
            let im = if a == b {
                0.0
            } else {
                (seed * (a + 2) as f64 * (b + 1) as f64 + 0.7).sin()
            };
            h[(a, b)] = c(re, im);
            h[(b, a)] = c(re, -im);
        }
    }
    h
}

#[derive(Debug, Clone)]
pub struct HolomorphicFamily {
    spec: HolomorphicSpec,
    /// In units of `l_B`.
    punctures: Vec<Complex64>,
    center: Complex64,
    spins: Vec<f64>,
    v_left: CMat,
    v_right: CMat,
    generator: CMat,
    perturbation: CMat,
    channel_values: Vec<f64>,
    channel_basis: CMat,
}

/// Validates `spec` and builds the family together with its induced
/// Hamiltonian family `H(λ) = I − F F†` (cluster at 0, rest at 1).
pub fn make_holomorphic_family(spec: &HolomorphicSpec) -> Result<(Arc<HolomorphicFamily>, HamiltonianFamily)> {
    let fam = Arc::new(HolomorphicFamily::new(spec.clone())?);
    let ham = fam.hamiltonian_family();
    Ok((fam, ham))
}

impl HolomorphicFamily {
    pub fn new(spec: HolomorphicSpec) -> Result<Self> {
        let bad = |m: String| Error::InvalidFamily(m);
        if !(spec.magnetic_length.is_finite() && spec.magnetic_length > 0.0) {
            return Err(bad(format!("magnetic length must be positive, got {}", spec.magnetic_length)));
        }
        if spec.degeneracy == 0 {
            return Err(bad("degeneracy must be positive".into()));
        }
        if spec.punctures.is_empty() {
            return Err(bad("need at least one puncture".into()));
        }
        if !spec.epsilon.is_finite() || !spec.generator_shift.is_finite() {
            return Err(bad("epsilon and generator shift must be finite".into()));
        }
        let punctures: Vec<Complex64> = spec
            .punctures
            .iter()
            .map(|p| c(p[0], p[1]) / spec.magnetic_length)
            .collect();
        for (i, a) in punctures.iter().enumerate() {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(bad(format!("puncture {i} is not finite")));
            }
            for (j, b) in punctures.iter().enumerate().skip(i + 1) {
                if (a - b).norm() <= PUNCTURE_TOL {
                    return Err(bad(format!("punctures {i} and {j} collide")));
                }
            }
        }
        let mu = spec.working_radius.powi(2) / 2.0;
        let tail = poisson_tail(mu, spec.truncation);
        if spec.truncation == 0 || tail >= TRUNCATION_TOL {
            return Err(bad(format!(
                "{} orbital levels lose {tail:e} of the norm at |η| = {}; need < {TRUNCATION_TOL:e}",
                spec.truncation, spec.working_radius
            )));
        }
        let d = spec.degeneracy;
        let spins = spec
            .spins
            .clone()
            .unwrap_or_else(|| (0..d).map(|k| (k + 1) as f64 / 2.0).collect());
        if spins.len() != d || spins.iter().any(|s| !(*s > 0.0) || (2.0 * s - (2.0 * s).round()).abs() > 1e-12) {
            return Err(bad(format!("need {d} positive half-integer spins, got {spins:?}")));
        }
        let v_left = expi_hermitian(&fixed_hermitian(d, 0.9))?;
        let v_right = expi_hermitian(&fixed_hermitian(d, 1.7))?;
        let s_diag = CMat::from_diagonal(&nalgebra::DVector::from_iterator(d, spins.iter().map(|&s| c(s, 0.0))));
        let cmat = &v_left * s_diag * v_right.adjoint();
        let k = 2 * d;
        let mut generator = CMat::identity(k, k) * c(spec.generator_shift, 0.0);
        generator.view_mut((d, 0), (d, d)).copy_from(&cmat);
        generator.view_mut((0, d), (d, d)).copy_from(&cmat.adjoint());
        let (channel_values, channel_basis) = eigh(&generator)?;
        let perturbation = fixed_hermitian(k, 2.1);
        let center = punctures.iter().sum::<Complex64>() / punctures.len() as f64;
        Ok(Self {
            spec,
            punctures,
            center,
            spins,
            v_left,
            v_right,
            generator,
            perturbation,
            channel_values,
            channel_basis,
        })
    }

    pub fn spec(&self) -> &HolomorphicSpec {
        &self.spec
    }

    pub fn param_dim(&self) -> usize {
        match self.spec.mode {
            PerturbationMode::Antiholomorphic => 2,
            PerturbationMode::ExtraParameter => 3,
        }
    }

    pub fn internal_dim(&self) -> usize {
        2 * self.spec.degeneracy
    }

    pub fn dim(&self) -> usize {
        self.spec.truncation * self.internal_dim()
    }

    pub fn degeneracy(&self) -> usize {
        self.spec.degeneracy
    }

    pub fn generator(&self) -> &CMat {
        &self.generator
    }

    pub fn eta(&self, lambda: &[f64]) -> Complex64 {
        c(lambda[0], lambda[1]) / self.spec.magnetic_length
    }

    fn check_point(&self, lambda: &[f64]) -> Result<Complex64> {
        if lambda.len() != self.param_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.param_dim(),
                got: lambda.len(),
            });
        }
        let eta = self.eta(lambda);
        if eta.norm() > self.spec.working_radius {
            return Err(Error::InvalidFamily(format!(
                "|η| = {} exceeds the working radius {}",
                eta.norm(),
                self.spec.working_radius
            )));
        }
        if let Some(w) = self.punctures.iter().find(|w| (eta - **w).norm() <= PUNCTURE_TOL) {
            return Err(Error::PointOnPath {
                x: w.re * self.spec.magnetic_length,
                y: w.im * self.spec.magnetic_length,
                distance: (eta - w).norm() * self.spec.magnetic_length,
            });
        }
        Ok(eta)
    }

    /// Normalized truncated coherent state, and the norm it had before normalizing.
    fn orbital(&self, eta: Complex64) -> (Vec<Complex64>, f64) {
        let alpha = eta / 2f64.sqrt();
        let gauss = (-eta.norm_sqr() / 4.0).exp();
        let mut amps = Vec::with_capacity(self.spec.truncation);
        let mut term = c(gauss, 0.0);
        for n in 0..self.spec.truncation {
            amps.push(term);
            term = term * alpha / ((n + 1) as f64).sqrt();
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        (amps, norm)
    }

    /// `e^{iθG}P_0` in closed form.
    fn rotated_p0(&self, theta: f64) -> CMat {
        let d = self.spec.degeneracy;
        let cos = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            d,
            self.spins.iter().map(|&s| c((theta * s).cos(), 0.0)),
        ));
        let sin = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            d,
            self.spins.iter().map(|&s| c(0.0, (theta * s).sin())),
        ));
        let mut out = CMat::zeros(2 * d, d);
        out.view_mut((0, 0), (d, d)).copy_from(&(&self.v_right * cos * self.v_right.adjoint()));
        out.view_mut((d, 0), (d, d)).copy_from(&(&self.v_left * sin * self.v_right.adjoint()));
        out * cis(theta * self.spec.generator_shift)
    }

    fn internal(&self, eta: Complex64, theta: f64, lambda: &[f64]) -> Result<CMat> {
        let base = self.rotated_p0(theta);
        let eps = self.spec.epsilon;
        let strength = match self.spec.mode {
            PerturbationMode::Antiholomorphic => eps * (eta - self.center).norm_sqr(),
            PerturbationMode::ExtraParameter => eps * lambda[2],
        };
        if strength == 0.0 {
            return Ok(base);
        }
        Ok(expi_hermitian(&(&self.perturbation * c(strength, 0.0)))? * base)
    }

    fn frame(&self, eta: Complex64, theta: f64, lambda: &[f64]) -> Result<CMat> {
        let (orb, _) = self.orbital(eta);
        let int = self.internal(eta, theta, lambda)?;
        let k = self.internal_dim();
        let d = self.spec.degeneracy;
        Ok(CMat::from_fn(orb.len() * k, d, |r, col| orb[r / k] * int[(r % k, col)]))
    }

    fn principal_angle(&self, eta: Complex64) -> f64 {
        self.punctures.iter().map(|w| (eta - w).arg()).sum()
    }

    /// `θ = arg p(η)` along `points`, continued from the principal value at the first.
    pub fn continued_angles(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(points.len());
        let mut prev: Option<(Complex64, f64)> = None;
        for (idx, p) in points.iter().enumerate() {
            let eta = self.check_point(p)?;
            let theta = match prev {
                None => self.principal_angle(eta),
                Some((pe, pt)) => {
                    let mut t = pt;
                    for w in &self.punctures {
                        let step = principal_value((eta - w).arg() - (pe - w).arg());
                        if step.abs() > MAX_BRANCH_STEP {
                            return Err(Error::InvalidLoop(format!(
                                "sample {idx} turns {step:.3} rad around a puncture in one step; refine the loop"
                            )));
                        }
                        t += step;
                    }
                    t
                }
            };
            out.push(theta);
            prev = Some((eta, theta));
        }
        Ok(out)
    }

    /// `M = V' diag((−1)^{2s_k}) V'†`, the frame monodromy of one positive winding.
    pub fn monodromy(&self) -> CMat {
        let d = self.spec.degeneracy;
        let diag = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            d,
            self.spins.iter().map(|&s| cis(2.0 * PI * s)),
        ));
        &self.v_right * diag * self.v_right.adjoint()
    }

    /// Two-strand representation with `σ_1 ↦ R`, `R² = M`: a full winding
    /// of the relative coordinate is the word `s1 s1`.
    pub fn exchange_representation(&self) -> BraidRepresentation {
        let d = self.spec.degeneracy;
        let diag = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            d,
            self.spins.iter().map(|&s| cis(PI * s)),
        ));
        let r = &self.v_right * diag * self.v_right.adjoint();
        BraidRepresentation::new(2, vec![r]).expect("R is unitary")
    }

    /// Induced family `H(λ) = I − F F†`.
    pub fn hamiltonian_family(self: &Arc<Self>) -> HamiltonianFamily {
        let me = Arc::clone(self);
        let n = self.dim();
        let eval = move |lambda: &[f64]| {
            let eta = me.eta(lambda);
            let theta = me.principal_angle(eta);
            let f = me
                .frame(eta, theta, lambda)
                .unwrap_or_else(|_| CMat::zeros(n, me.spec.degeneracy));
            CMat::identity(n, n) - &f * f.adjoint()
        };
        HamiltonianFamily::new(self.param_dim(), n, 0, self.spec.degeneracy, eval)
            .expect("valid induced family")
            .with_gap_floor(0.5)
            .with_gauge(Gauge::Continued(Arc::clone(self) as Arc<dyn FrameContinuation>))
    }

    /// Frame amplitudes with the real positive factors stripped: orbital
    /// normalization, Gaussian, and `|p(η)|^{−ν}` per eigenchannel of `G`.
    /// Rows are `(n, channel)`, columns the frame index.
    fn stripped_amplitudes(&self, frame: &CMat, eta: Complex64) -> CMat {
        let (_, norm) = self.orbital(eta);
        let gauss = (-eta.norm_sqr() / 4.0).exp();
        let p_abs: f64 = self.punctures.iter().map(|w| (eta - w).norm()).product();
        let k = self.internal_dim();
        let mut out = CMat::zeros(frame.nrows(), frame.ncols());
        for n in 0..self.spec.truncation {
            let block = frame.rows(n * k, k);
            let chan = self.channel_basis.adjoint() * block;
            for (ch, &nu) in self.channel_values.iter().enumerate() {
                let scale = norm / gauss * p_abs.powf(nu);
                for col in 0..frame.ncols() {
                    out[(n * k + ch, col)] = chan[(ch, col)] * scale;
                }
            }
        }
        out
    }

    /// Largest `|∂a/∂η*|` over the stripped amplitudes at the given points
    /// (fourth-order central differences with step `h` in `η`).
    pub fn cauchy_riemann_residual(&self, points: &[Vec<f64>], h: f64) -> Result<f64> {
        let lb = self.spec.magnetic_length;
        let mut worst = 0.0f64;
        for p in points {
            self.check_point(p)?;
            let mut stencil = vec![p.clone()];
            for (dx, dy) in [(1.0, 0.0), (0.0, 1.0)] {
                for m in [-2.0, -1.0, 1.0, 2.0] {
                    let mut q = p.clone();
                    q[0] += m * h * dx * lb;
                    q[1] += m * h * dy * lb;
                    stencil.push(q);
                }
            }
            let frames = self.frames_along(&stencil)?;
            let amps: Vec<CMat> = stencil
                .iter()
                .zip(&frames)
                .map(|(q, f)| self.stripped_amplitudes(f, self.eta(q)))
                .collect();
            let deriv = |o: usize| (&amps[o + 1] * c(1.0, 0.0) - &amps[o + 2] * c(8.0, 0.0)
                + &amps[o + 3] * c(8.0, 0.0)
                - &amps[o + 4] * c(1.0, 0.0))
                * c(1.0 / (12.0 * h), 0.0);
            let d_bar = (deriv(0) + deriv(4) * c(0.0, 1.0)) * c(0.5, 0.0);
            worst = worst.max(d_bar.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        Ok(worst)
    }

    /// Windings of the `(x, y)` projection of `lp` around every puncture.
    pub fn windings(&self, lp: &ParameterLoop) -> Result<Vec<i64>> {
        let s = lp.samples();
        let verts: Vec<Point> = s[..s.len() - 1].iter().map(|p| Point::new(p[0], p[1])).collect();
        let path = PlanarPath::closed(verts)?;
        self.spec
            .punctures
            .iter()
            .map(|w| winding_number(&path, Point::new(w[0], w[1])))
            .collect()
    }
}

impl FrameContinuation for HolomorphicFamily {
    fn frames_along(&self, points: &[Vec<f64>]) -> Result<Vec<CMat>> {
        let thetas = self.continued_angles(points)?;
        points
            .iter()
            .zip(thetas)
            .map(|(p, t)| self.frame(self.eta(p), t, p))
            .collect()
    }
}

/// Closed loop shapes in the `(x, y)` plane, physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LoopShape {
    Circle { center: [f64; 2], radius: f64 },
    /// Semi-axes `rx`, `ry`, rotated by `angle`.
    Ellipse { center: [f64; 2], rx: f64, ry: f64, angle: f64 },
    /// Vertices in order; the closing edge is implicit.
    Polygon { vertices: Vec<[f64; 2]> },
}

impl LoopShape {
    /// Counter-clockwise loop with every step at most `max_step` long.
    pub fn to_loop(&self, max_step: f64) -> Result<ParameterLoop> {
        if !(max_step > 0.0) {
            return Err(Error::InvalidLoop("max_step must be positive".into()));
        }
        match self {
            LoopShape::Circle { center, radius } => {
                let n = ((2.0 * PI * radius / max_step).ceil() as usize).max(8);
                ParameterLoop::from_fn(n, vec![None; 2], |s| {
                    let a = 2.0 * PI * s;
                    vec![center[0] + radius * a.cos(), center[1] + radius * a.sin()]
                })
            }
            LoopShape::Ellipse { center, rx, ry, angle } => {
                let n = ((2.0 * PI * rx.max(*ry) / max_step).ceil() as usize).max(8);
                let (ca, sa) = (angle.cos(), angle.sin());
                ParameterLoop::from_fn(n, vec![None; 2], |s| {
                    let a = 2.0 * PI * s;
                    let (u, v) = (rx * a.cos(), ry * a.sin());
                    vec![center[0] + ca * u - sa * v, center[1] + sa * u + ca * v]
                })
            }
            LoopShape::Polygon { vertices } => {
                let path = PlanarPath::closed(vertices.iter().map(|v| Point::new(v[0], v[1])).collect())?;
                let mut samples = Vec::new();
                for (a, b) in path.segments() {
                    let len = (b.x - a.x).hypot(b.y - a.y);
                    let m = ((len / max_step).ceil() as usize).max(1);
                    for j in 0..m {
                        let t = j as f64 / m as f64;
                        samples.push(vec![a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)]);
                    }
                }
                samples.push(samples[0].clone());
                ParameterLoop::new(samples)
            }
        }
    }

    /// Signed area enclosed, physical units.
    pub fn signed_area(&self) -> Result<f64> {
        Ok(match self {
            LoopShape::Circle { radius, .. } => PI * radius * radius,
            LoopShape::Ellipse { rx, ry, .. } => PI * rx * ry,
            LoopShape::Polygon { vertices } => {
                PlanarPath::closed(vertices.iter().map(|v| Point::new(v[0], v[1])).collect())?.signed_area()
            }
        })
    }
}

/// Loop unitary of `lp` for the family, via the overlap method.
pub fn loop_holonomy(family: &Arc<HolomorphicFamily>, lp: &ParameterLoop, exec: Exec) -> Result<HolonomyResult> {
    holonomy_overlap(&family.hamiltonian_family(), lp, exec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub epsilon: f64,
    /// Projective residual of `B·U_L` between the two loops of each pair.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationTable {
    pub rows: Vec<DeviationRow>,
    /// Maximum residual never decreases along the sweep order.
    pub non_decreasing: bool,
}

/// Residual tolerated by the non-decreasing trend check.
pub const TREND_SLACK: f64 = 1e-12;

/// For every `ε`, the largest projective residual between the loop
/// unitaries of each homotopic pair. Pairs and sweep points run in parallel.
pub fn robustness_break_probe(
    base: &HolomorphicSpec,
    loop_pairs: &[(ParameterLoop, ParameterLoop)],
    eps_sweep: &[f64],
    exec: Exec,
) -> Result<DeviationTable> {
    let probe = HolomorphicFamily::new(base.clone())?;
    for (i, (a, b)) in loop_pairs.iter().enumerate() {
        let (wa, wb) = (probe.windings(a)?, probe.windings(b)?);
        if wa != wb {
            return Err(Error::InvalidLoop(format!(
                "pair {i} is not homotopic: windings {wa:?} vs {wb:?}"
            )));
        }
    }
    let jobs: Vec<(usize, usize)> = (0..eps_sweep.len())
        .flat_map(|e| (0..loop_pairs.len()).map(move |p| (e, p)))
        .collect();
    let families: Vec<Arc<HolomorphicFamily>> = eps_sweep
        .iter()
        .map(|&eps| {
            HolomorphicFamily::new(HolomorphicSpec {
                epsilon: eps,
                ..base.clone()
            })
            .map(Arc::new)
        })
        .collect::<Result<_>>()?;
    let residuals = exec.map(&jobs, |&(e, p)| -> Result<f64> {
        let ham = families[e].hamiltonian_family();
        let (a, b) = &loop_pairs[p];
        let ha = holonomy_overlap(&ham, a, Exec::Sequential)?;
        let hb = holonomy_overlap(&ham, b, Exec::Sequential)?;
        Ok(projective_distance(&ha.loop_unitary, &hb.loop_unitary)?.residual)
    });
    let residuals = residuals.into_iter().collect::<Result<Vec<f64>>>()?;
    let rows: Vec<DeviationRow> = eps_sweep
        .iter()
        .enumerate()
        .map(|(e, &epsilon)| {
            let r = residuals[e * loop_pairs.len()..(e + 1) * loop_pairs.len()].to_vec();
            DeviationRow {
                epsilon,
                max_residual: r.iter().copied().fold(0.0, f64::max),
                residuals: r,
            }
        })
        .collect();
    let non_decreasing = rows
        .windows(2)
        .all(|w| w[1].max_residual >= w[0].max_residual - TREND_SLACK);
    Ok(DeviationTable { rows, non_decreasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigenphase_distance;

    fn family(eps: f64, mode: PerturbationMode) -> Arc<HolomorphicFamily> {
        Arc::new(
            HolomorphicFamily::new(HolomorphicSpec {
                epsilon: eps,
                mode,
                ..Default::default()
            })
            .unwrap(),
        )
    }

    fn circle(cx: f64, cy: f64, r: f64) -> ParameterLoop {
        LoopShape::Circle {
            center: [cx, cy],
            radius: r,
        }
        .to_loop(0.02)
        .unwrap()
    }

    #[test]
    fn truncation_and_collisions_rejected() {
        let too_small = HolomorphicSpec {
            truncation: 10,
            ..Default::default()
        };
        assert!(HolomorphicFamily::new(too_small).is_err());
        let clash = HolomorphicSpec {
            punctures: vec![[0.5, 0.0], [0.5, 0.0]],
            ..Default::default()
        };
        assert!(HolomorphicFamily::new(clash).is_err());
        let odd = HolomorphicSpec {
            spins: Some(vec![0.5, 0.7]),
            ..Default::default()
        };
        assert!(HolomorphicFamily::new(odd).is_err());
    }

    #[test]
    fn frames_are_orthonormal_eigenframes() {
        let fam = family(0.0, PerturbationMode::Antiholomorphic);
        let ham = fam.hamiltonian_family();
        let p = vec![vec![0.7, -0.3]];
        let f = &fam.frames_along(&p).unwrap()[0];
        let gram = f.adjoint() * f;
        assert!((gram - CMat::identity(2, 2)).norm() < 1e-12);
        let h = ham.hamiltonian(&p[0]).unwrap();
        assert!((h * f).norm() < 1e-12);
    }

    #[test]
    fn unperturbed_loop_is_area_phase_times_monodromy() {
        let fam = family(0.0, PerturbationMode::Antiholomorphic);
        let lp = circle(0.2, 0.1, 1.0);
        let r = loop_holonomy(&fam, &lp, Exec::Parallel).unwrap();
        let area = crate::anyon::PlanarPath::closed(
            lp.samples()[..lp.len() - 1].iter().map(|p| Point::new(p[0], p[1])).collect(),
        )
        .unwrap()
        .signed_area();
        let want = fam.monodromy() * cis(-area);
        let d = projective_distance(&want, &r.loop_unitary).unwrap();
        assert!(d.residual < 1e-9, "{}", d.residual);
        assert!(d.phase.abs() < 1e-8, "{}", d.phase);
        assert!((r.u_l.clone() * r.u_l[(0, 0)].conj() - CMat::identity(2, 2)).norm() < 1e-9);
    }

    #[test]
    fn unperturbed_family_is_holomorphic() {
        let fam = family(0.0, PerturbationMode::Antiholomorphic);
        let pts = vec![vec![0.8, 0.5], vec![-1.2, 0.9], vec![0.3, -1.7]];
        assert!(fam.cauchy_riemann_residual(&pts, 1e-3).unwrap() < 1e-8);
        let bent = family(0.05, PerturbationMode::Antiholomorphic);
        assert!(bent.cauchy_riemann_residual(&pts, 1e-3).unwrap() > 1e-4);
    }

    #[test]
    fn exchange_word_squares_to_monodromy() {
        let fam = family(0.0, PerturbationMode::Antiholomorphic);
        let rep = fam.exchange_representation();
        let r = rep.image(1).unwrap();
        assert!((r * r - fam.monodromy()).norm() < 1e-12);
    }

    #[test]
    fn extra_parameter_slice_is_untouched() {
        let flat = family(0.0, PerturbationMode::Antiholomorphic);
        let lifted = family(0.1, PerturbationMode::ExtraParameter);
        let lp = circle(0.0, 0.3, 1.2);
        let a = loop_holonomy(&flat, &lp, Exec::Sequential).unwrap();
        let b = loop_holonomy(&lifted, &lp.lifted(|_| 0.0), Exec::Sequential).unwrap();
        assert!((a.loop_unitary - b.loop_unitary).norm() < 1e-12);
    }

    #[test]
    fn winding_twice_squares_monodromy() {
        let fam = family(0.0, PerturbationMode::Antiholomorphic);
        let once = circle(0.0, 0.0, 1.0);
        let mut twice: Vec<Vec<f64>> = once.samples().to_vec();
        twice.pop();
        let again = twice.clone();
        twice.extend(again);
        twice.push(twice[0].clone());
        let twice = ParameterLoop::new(twice).unwrap();
        let r = loop_holonomy(&fam, &twice, Exec::Sequential).unwrap();
        let phases = r.projective_part.clone();
        assert!(eigenphase_distance(&crate::linalg::eigenphases(&phases), &[r.spectrum[0] - r.overall_phase; 2]) < 1e-8);
    }
}
