//! Spin degrees of freedom: spin-s operators, spatially conditioned swap
//! evolution on two orthogonal tracks, and the split of a closed-loop spin
//! phase into dynamical and geometric parts.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, ensure_hermitian, hermitian_defect, matexp_unitary, max_abs, principal_value,
    timeordered_evolve, CMat, CVec, TimeGrid,
};

/// A positive half-integer spin, stored as `2s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Spin {
    twice: u32,
}

impl Spin {
    pub fn new(s: f64) -> Result<Self> {
        let twice = 2.0 * s;
        if !twice.is_finite() || twice < 0.5 || (twice - twice.round()).abs() > 1e-12 {
            return Err(Error::InvalidSpin(s));
        }
        Ok(Self {
            twice: twice.round() as u32,
        })
    }

    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 {
            return Err(Error::InvalidSpin(0.0));
        }
        Ok(Self { twice })
    }

    pub fn s(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    pub fn dim(self) -> usize {
        self.twice as usize + 1
    }

    pub fn is_fermion(self) -> bool {
        self.twice % 2 == 1
    }

    /// `(−1)^{2s}`
    pub fn exchange_sign(self) -> f64 {
        if self.is_fermion() {
            -1.0
        } else {
            1.0
        }
    }

    /// `2sπ` reduced to its principal value: π for fermions, 0 for bosons.
    pub fn exchange_phase(self) -> f64 {
        if self.is_fermion() {
            PI
        } else {
            0.0
        }
    }
}

impl TryFrom<f64> for Spin {
    type Error = Error;

    fn try_from(s: f64) -> Result<Self> {
        Spin::new(s)
    }
}

impl From<Spin> for f64 {
    fn from(s: Spin) -> f64 {
        s.s()
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice.is_multiple_of(2) {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// Spin-s angular momentum operators in the `|s, m⟩` basis ordered
/// `m = s, s−1, …, −s`.
#[derive(Debug, Clone)]
pub struct SpinSystem {
    spin: Spin,
    sx: CMat,
    sy: CMat,
    sz: CMat,
}

impl SpinSystem {
    pub fn new(spin: Spin) -> Self {
        let s = spin.s();
        let dim = spin.dim();
        let m = |k: usize| s - k as f64;
        let mut raise = CMat::zeros(dim, dim);
        for k in 1..dim {
            // S+|m⟩ = √(s(s+1) − m(m+1)) |m+1⟩, and |m+1⟩ sits at index k−1.
            let mk = m(k);
            raise[(k - 1, k)] = c((s * (s + 1.0) - mk * (mk + 1.0)).sqrt(), 0.0);
        }
        let lower = raise.adjoint();
        let sx = (&raise + &lower).scale(0.5);
        let sy = (&raise - &lower) * c(0.0, -0.5);
        let sz = CMat::from_diagonal(&CVec::from_iterator(dim, (0..dim).map(|k| c(m(k), 0.0))));
        Self { spin, sx, sy, sz }
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    pub fn sx(&self) -> &CMat {
        &self.sx
    }

    pub fn sy(&self) -> &CMat {
        &self.sy
    }

    pub fn sz(&self) -> &CMat {
        &self.sz
    }

    /// Magnetic quantum numbers in basis order.
    pub fn m_values(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.spin.s() - k as f64).collect()
    }

    /// `n̂·S` for an arbitrary (not necessarily unit) vector.
    pub fn s_dot(&self, n: [f64; 3]) -> CMat {
        self.sx.scale(n[0]) + self.sy.scale(n[1]) + self.sz.scale(n[2])
    }

    pub fn casimir(&self) -> CMat {
        &self.sx * &self.sx + &self.sy * &self.sy + &self.sz * &self.sz
    }

    /// Largest entrywise violation of `[S_i, S_j] = i ε_ijk S_k`.
    pub fn commutator_defect(&self) -> f64 {
        let i = c(0.0, 1.0);
        let comm = |a: &CMat, b: &CMat| a * b - b * a;
        [
            comm(&self.sx, &self.sy) - self.sz.map(|z| z * i),
            comm(&self.sy, &self.sz) - self.sx.map(|z| z * i),
            comm(&self.sz, &self.sx) - self.sy.map(|z| z * i),
        ]
        .iter()
        .map(max_abs)
        .fold(0.0, f64::max)
    }
}

pub fn make_spin_system(s: f64) -> Result<SpinSystem> {
    Ok(SpinSystem::new(Spin::new(s)?))
}

/// `exp(−i·angle·(n̂·S))` for a unit axis `n̂`.
pub fn rotation_unitary(sys: &SpinSystem, axis: [f64; 3], angle: f64) -> Result<CMat> {
    let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::InvalidAxis("zero axis".into()));
    }
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidAxis(format!("|axis| = {norm}, expected 1")));
    }
    matexp_unitary(&sys.s_dot(axis), angle)
}

/// A normalized spin (or any finite-dimensional) state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinState {
    amps: CVec,
}

impl SpinState {
    pub fn new(amps: CVec) -> Result<Self> {
        let norm_sqr = amps.norm_squared();
        if (norm_sqr - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { amps })
    }

    pub fn normalized(amps: CVec) -> Result<Self> {
        let norm = amps.norm();
        if !(norm > 0.0) {
            return Err(Error::NotNormalized { norm_sqr: 0.0 });
        }
        Ok(Self { amps: amps.unscale(norm) })
    }

    /// Basis state `|s, m⟩` with `m = s − index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = CVec::zeros(dim);
        amps[index] = c(1.0, 0.0);
        Self { amps }
    }

    /// Spin coherent state pointing along polar angle `theta`, azimuth `phi`:
    /// `e^{−iφS_z} e^{−iθS_y} |s, s⟩`.
    pub fn coherent(sys: &SpinSystem, theta: f64, phi: f64) -> Self {
        let top = Self::basis(sys.dim(), 0);
        let rz = matexp_unitary(sys.sz(), phi).expect("S_z is Hermitian");
        let ry = matexp_unitary(sys.sy(), theta).expect("S_y is Hermitian");
        let amps = rz * ry * top.amps;
        Self::normalized(amps).expect("unitary image of a unit vector")
    }

    pub fn amps(&self) -> &CVec {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// `⟨self|other⟩`
    pub fn overlap(&self, other: &SpinState) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    /// `|⟨self|other⟩|²`
    pub fn ray_fidelity(&self, other: &SpinState) -> f64 {
        self.overlap(other).norm_sqr()
    }

    /// `⟨ψ|H|ψ⟩` (real part; the imaginary part vanishes for Hermitian `H`).
    pub fn expectation(&self, h: &CMat) -> f64 {
        self.amps.dotc(&(h * &self.amps)).re
    }

    /// Applies a unitary and renormalizes away rounding drift.
    pub fn evolved(&self, u: &CMat) -> Self {
        Self::normalized(u * &self.amps).expect("unitary image of a unit vector")
    }
}

type TimeHamiltonian = Arc<dyn Fn(f64) -> CMat + Send + Sync>;

/// Spin Hamiltonians conditioned on the two orthogonal spatial tracks:
/// `H = Π_A(t)⊗H_A(t) + Π_B(t)⊗H_B(t)`. The projectors are implicit: track
/// labels follow the particles, so the full generator is block diagonal.
#[derive(Clone)]
pub struct ConditionedHamiltonian {
    h_a: TimeHamiltonian,
    h_b: TimeHamiltonian,
}

impl fmt::Debug for ConditionedHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConditionedHamiltonian").finish_non_exhaustive()
    }
}

impl ConditionedHamiltonian {
    pub fn new<A, B>(h_a: A, h_b: B) -> Self
    where
        A: Fn(f64) -> CMat + Send + Sync + 'static,
        B: Fn(f64) -> CMat + Send + Sync + 'static,
    {
        Self {
            h_a: Arc::new(h_a),
            h_b: Arc::new(h_b),
        }
    }

    pub fn constant(h_a: CMat, h_b: CMat) -> Self {
        Self::new(move |_| h_a.clone(), move |_| h_b.clone())
    }

    /// Both tracks rotate the same way: `H_A = H_B` (so `V_A = V_B`).
    pub fn identical<A>(h: A) -> Self
    where
        A: Fn(f64) -> CMat + Send + Sync + 'static,
    {
        let h: TimeHamiltonian = Arc::new(h);
        Self {
            h_a: h.clone(),
            h_b: h,
        }
    }

    /// `H_B(t) = −H_A(t_start + t_end − t)`, which makes `V_B = V_A†` on `grid`.
    pub fn reversed_conjugate<A>(h_a: A, grid: &TimeGrid) -> Self
    where
        A: Fn(f64) -> CMat + Send + Sync + 'static,
    {
        let h_a: TimeHamiltonian = Arc::new(h_a);
        let mirror = grid.t_start() + grid.t_end();
        let inner = h_a.clone();
        Self {
            h_a,
            h_b: Arc::new(move |t| -inner(mirror - t)),
        }
    }

    pub fn h_a(&self, t: f64) -> CMat {
        (self.h_a)(t)
    }

    pub fn h_b(&self, t: f64) -> CMat {
        (self.h_b)(t)
    }

    /// Generator on (track A ⊕ track B) ⊗ spin.
    pub fn track_hamiltonian(&self, t: f64) -> CMat {
        block_diag(&self.h_a(t), &self.h_b(t))
    }
}

pub(crate) fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let (na, nb) = (a.nrows(), b.nrows());
    let mut out = CMat::zeros(na + nb, na + nb);
    out.view_mut((0, 0), (na, na)).copy_from(a);
    out.view_mut((na, na), (nb, nb)).copy_from(b);
    out
}

/// Result of a conditioned spin swap: `V_A|σ⟩ = e^{iφ_A}|τ⟩`, `V_B|τ⟩ = e^{iφ_B}|σ⟩`.
#[derive(Debug, Clone)]
pub struct SpinSwap {
    pub v_a: CMat,
    pub v_b: CMat,
    pub phi_a: f64,
    pub phi_b: f64,
    pub overlap_a: f64,
    pub overlap_b: f64,
}

impl SpinSwap {
    /// Propagator on (track A ⊕ track B) ⊗ spin; the off-diagonal blocks are exact zeros.
    pub fn track_propagator(&self) -> CMat {
        block_diag(&self.v_a, &self.v_b)
    }

    pub fn spin_phase(&self) -> f64 {
        spin_phase_sum(self.phi_a, self.phi_b)
    }
}

/// Minimum `|⟨τ|V_A|σ⟩|` for an evolution to count as a swap.
pub const SWAP_OVERLAP_TOL: f64 = 1e-8;

pub fn conditioned_swap_evolve(
    sys: &SpinSystem,
    cond: &ConditionedHamiltonian,
    sigma: &SpinState,
    tau: &SpinState,
    grid: &TimeGrid,
) -> Result<SpinSwap> {
    let dim = sys.dim();
    for state in [sigma, tau] {
        if state.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: state.dim(),
            });
        }
    }
    let v_a = timeordered_evolve(|t| cond.h_a(t), grid)?;
    let v_b = timeordered_evolve(|t| cond.h_b(t), grid)?;
    if v_a.nrows() != dim || v_b.nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: v_a.nrows().max(v_b.nrows()),
        });
    }
    let amp_a = tau.amps().dotc(&(&v_a * sigma.amps()));
    let amp_b = sigma.amps().dotc(&(&v_b * tau.amps()));
    if amp_a.norm() < 1.0 - SWAP_OVERLAP_TOL {
        return Err(Error::NotASpinSwap {
            track: 'A',
            overlap: amp_a.norm(),
        });
    }
    if amp_b.norm() < 1.0 - SWAP_OVERLAP_TOL {
        return Err(Error::NotASpinSwap {
            track: 'B',
            overlap: amp_b.norm(),
        });
    }
    Ok(SpinSwap {
        v_a,
        v_b,
        phi_a: amp_a.arg(),
        phi_b: amp_b.arg(),
        overlap_a: amp_a.norm(),
        overlap_b: amp_b.norm(),
    })
}

/// `φ_spin = φ_A + φ_B` modulo 2π.
pub fn spin_phase_sum(phi_a: f64, phi_b: f64) -> f64 {
    principal_value(phi_a + phi_b)
}

/// `arg⟨σ|V_B V_A|σ⟩`, the phase of the closed spin loop σ → τ → σ.
pub fn loop_phase(sigma: &SpinState, v_a: &CMat, v_b: &CMat) -> f64 {
    sigma.amps().dotc(&(v_b * (v_a * sigma.amps()))).arg()
}

/// Phase of a closed ray-space loop split as `total ≡ dynamical + geometric`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseDecomposition {
    pub total: f64,
    pub dynamical: f64,
    pub geometric: f64,
}

pub const LOOP_CLOSURE_TOL: f64 = 1e-6;

/// Aharonov–Anandan split of a sampled closed trajectory.
///
/// `trajectory[k]` and `hamiltonians[k]` are sampled at `grid.point(k)`.
/// The dynamical phase is `−∫⟨ψ|H|ψ⟩dt` (trapezoid rule), the total is
/// `arg⟨ψ(0)|ψ(T)⟩`, and the geometric part is their difference mod 2π.
pub fn aa_decompose(
    trajectory: &[SpinState],
    hamiltonians: &[CMat],
    grid: &TimeGrid,
) -> Result<PhaseDecomposition> {
    aa_decompose_with_tol(trajectory, hamiltonians, grid, LOOP_CLOSURE_TOL)
}

pub fn aa_decompose_with_tol(
    trajectory: &[SpinState],
    hamiltonians: &[CMat],
    grid: &TimeGrid,
    closure_tol: f64,
) -> Result<PhaseDecomposition> {
    let n = grid.n_steps() + 1;
    if trajectory.len() != n || hamiltonians.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: trajectory.len().min(hamiltonians.len()),
        });
    }
    let closure = trajectory[0].overlap(&trajectory[n - 1]);
    if closure.norm() < 1.0 - closure_tol {
        return Err(Error::OpenLoop {
            defect: 1.0 - closure.norm(),
        });
    }
    for h in hamiltonians {
        ensure_hermitian(h)?;
    }
    let energies: Vec<f64> = trajectory
        .iter()
        .zip(hamiltonians)
        .map(|(psi, h)| psi.expectation(h))
        .collect();
    let dt = grid.dt();
    let integral: f64 = energies.windows(2).map(|w| 0.5 * (w[0] + w[1]) * dt).sum();
    let total = closure.arg();
    let dynamical = -integral;
    Ok(PhaseDecomposition {
        total,
        dynamical,
        geometric: principal_value(total - dynamical),
    })
}

/// Evolves `psi0` with the exponential midpoint rule and returns the state
/// and the Hamiltonian sampled at every grid point.
pub fn evolve_trajectory<F>(
    h: F,
    psi0: &SpinState,
    grid: &TimeGrid,
) -> Result<(Vec<SpinState>, Vec<CMat>)>
where
    F: Fn(f64) -> CMat,
{
    let dt = grid.dt();
    let mut states = Vec::with_capacity(grid.n_steps() + 1);
    let mut hams = Vec::with_capacity(grid.n_steps() + 1);
    let mut psi = psi0.clone();
    for k in 0..grid.n_steps() {
        hams.push(h(grid.point(k)));
        states.push(psi.clone());
        let step = matexp_unitary(&h(grid.midpoint(k)), dt)?;
        if step.nrows() != psi.dim() {
            return Err(Error::DimensionMismatch {
                expected: psi.dim(),
                got: step.nrows(),
            });
        }
        psi = psi.evolved(&step);
    }
    hams.push(h(grid.t_end()));
    states.push(psi);
    Ok((states, hams))
}

/// `2sπ + φ_spatial + φ_spin` modulo 2π.
pub fn total_observable_phase(spin: Spin, phi_spatial: f64, phi_spin: f64) -> f64 {
    principal_value(spin.exchange_phase() + phi_spatial + phi_spin)
}

/// Everything measurable about one spin swap.
#[derive(Debug, Clone)]
pub struct SpinSwapReport {
    pub swap: SpinSwap,
    pub spin_phase: f64,
    /// Decomposition of the closed loop σ → τ → σ traced by `V_B·V_A`.
    pub loop_decomposition: PhaseDecomposition,
    pub total_observable: f64,
}

/// Runs the conditioned swap and decomposes the closed spin loop.
pub fn analyze_spin_swap(
    sys: &SpinSystem,
    cond: &ConditionedHamiltonian,
    sigma: &SpinState,
    tau: &SpinState,
    grid: &TimeGrid,
    phi_spatial: f64,
) -> Result<SpinSwapReport> {
    let swap = conditioned_swap_evolve(sys, cond, sigma, tau, grid)?;
    let duration = grid.duration();
    let t0 = grid.t_start();
    let loop_grid = TimeGrid::new(t0, t0 + 2.0 * duration, 2 * grid.n_steps())?;
    let split = t0 + duration;
    let loop_h = |t: f64| {
        if t < split {
            cond.h_a(t)
        } else {
            cond.h_b(t - duration)
        }
    };
    let (traj, hams) = evolve_trajectory(loop_h, sigma, &loop_grid)?;
    // The sample at the seam belongs to both halves; use the A side there.
    let loop_decomposition = aa_decompose(&traj, &hams, &loop_grid)?;
    let spin_phase = swap.spin_phase();
    Ok(SpinSwapReport {
        total_observable: total_observable_phase(sys.spin(), phi_spatial, spin_phase),
        swap,
        spin_phase,
        loop_decomposition,
    })
}

/// Geometric-cancellation setup: σ spin-up along x, τ spin-down along x,
/// and both tracks rotate the spin by π about z over `[0, duration]`.
pub fn equal_rotation_swap(sys: &SpinSystem, duration: f64, n_steps: usize) -> Result<SpinSwapReport> {
    let grid = TimeGrid::new(0.0, duration, n_steps)?;
    let h = sys.sz().scale(PI / duration);
    let cond = ConditionedHamiltonian::identical(move |_| h.clone());
    let sigma = SpinState::coherent(sys, PI / 2.0, 0.0);
    let tau = SpinState::coherent(sys, PI / 2.0, PI);
    analyze_spin_swap(sys, &cond, &sigma, &tau, &grid, 0.0)
}

/// Hermiticity check exposed for diagnostics.
pub fn spin_hermitian_defect(sys: &SpinSystem) -> f64 {
    [sys.sx(), sys.sy(), sys.sz()]
        .into_iter()
        .map(hermitian_defect)
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(n: usize) -> CMat {
        CMat::identity(n, n)
    }

    #[test]
    fn spin_parsing() {
        assert_eq!(Spin::new(0.5).unwrap().twice(), 1);
        assert_eq!(Spin::new(2.0).unwrap().dim(), 5);
        assert!(Spin::new(0.0).is_err());
        assert!(Spin::new(-0.5).is_err());
        assert!(Spin::new(0.3).is_err());
        assert_eq!(Spin::new(1.5).unwrap().to_string(), "3/2");
    }

    #[test]
    fn spin_one_sz_spectrum() {
        let sys = make_spin_system(1.0).unwrap();
        assert_eq!(sys.dim(), 3);
        assert_eq!(sys.m_values(), vec![1.0, 0.0, -1.0]);
        for (k, m) in sys.m_values().into_iter().enumerate() {
            assert_eq!(sys.sz()[(k, k)], c(m, 0.0));
        }
    }

    #[test]
    fn spin_three_halves_casimir() {
        let sys = make_spin_system(1.5).unwrap();
        let diff = sys.casimir() - identity(4).scale(15.0 / 4.0);
        assert!(max_abs(&diff) < 1e-12);
        assert!(sys.commutator_defect() < 1e-12);
        assert!(spin_hermitian_defect(&sys) == 0.0);
    }

    #[test]
    fn rotation_edge_cases() {
        let half = make_spin_system(0.5).unwrap();
        let one = make_spin_system(1.0).unwrap();
        let z = [0.0, 0.0, 1.0];
        assert!(max_abs(&(rotation_unitary(&half, z, 0.0).unwrap() - identity(2))) < 1e-15);
        assert!(max_abs(&(rotation_unitary(&half, z, 2.0 * PI).unwrap() + identity(2))) < 1e-12);
        assert!(max_abs(&(rotation_unitary(&one, z, 2.0 * PI).unwrap() - identity(3))) < 1e-12);
        assert!(matches!(
            rotation_unitary(&half, [0.0; 3], 1.0),
            Err(Error::InvalidAxis(_))
        ));
        assert!(rotation_unitary(&half, [0.0, 0.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn no_swap_case_is_identity() {
        let sys = make_spin_system(0.5).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let cond = ConditionedHamiltonian::constant(CMat::zeros(2, 2), CMat::zeros(2, 2));
        let sigma = SpinState::coherent(&sys, 0.3, 0.2);
        let swap = conditioned_swap_evolve(&sys, &cond, &sigma, &sigma, &grid).unwrap();
        assert!(max_abs(&(&swap.v_a - identity(2))) < 1e-15);
        assert!(swap.phi_a.abs() < 1e-15 && swap.phi_b.abs() < 1e-15);
    }

    #[test]
    fn failed_swap_reports_overlap() {
        let sys = make_spin_system(0.5).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let cond = ConditionedHamiltonian::constant(CMat::zeros(2, 2), CMat::zeros(2, 2));
        let up = SpinState::basis(2, 0);
        let down = SpinState::basis(2, 1);
        match conditioned_swap_evolve(&sys, &cond, &up, &down, &grid) {
            Err(Error::NotASpinSwap { track: 'A', overlap }) => assert!(overlap < 1e-15),
            other => panic!("expected NotASpinSwap, got {other:?}"),
        }
    }

    #[test]
    fn up_x_to_down_x_by_pi_rotation() {
        let sys = make_spin_system(0.5).unwrap();
        let report = equal_rotation_swap(&sys, 1.0, 50).unwrap();
        assert!(report.swap.overlap_a > 1.0 - 1e-12);
        assert!(report.swap.overlap_b > 1.0 - 1e-12);
        // V_B V_A is the full 2π rotation, −I for spin 1/2.
        assert!((principal_value(report.spin_phase - PI)).abs() < 1e-12);
    }

    #[test]
    fn track_blocks_never_mix() {
        let sys = make_spin_system(1.0).unwrap();
        let report = equal_rotation_swap(&sys, 1.0, 20).unwrap();
        let full = report.swap.track_propagator();
        let mut on_a = CVec::zeros(6);
        on_a.rows_mut(0, 3).copy_from(SpinState::coherent(&sys, 1.0, 0.4).amps());
        let out = full * on_a;
        for k in 3..6 {
            assert_eq!(out[k], c(0.0, 0.0));
        }
    }

    #[test]
    fn phase_sum_examples() {
        assert!((spin_phase_sum(0.3, 0.4) - 0.7).abs() < 1e-15);
        assert_eq!(spin_phase_sum(1.1, -1.1), 0.0);
        let half = Spin::new(0.5).unwrap();
        let one = Spin::new(1.0).unwrap();
        assert!((total_observable_phase(half, 0.0, 0.0) - PI).abs() < 1e-15);
        assert!(total_observable_phase(half, 0.0, PI).abs() < 1e-15);
        assert!((total_observable_phase(one, PI / 2.0, PI / 2.0) - PI).abs() < 1e-15);
    }

    #[test]
    fn stationary_state_has_no_geometric_phase() {
        let sys = make_spin_system(0.5).unwrap();
        let e = 0.5;
        let t = 2.0;
        let h = sys.sz().clone();
        let grid = TimeGrid::new(0.0, t, 200).unwrap();
        let (traj, hams) = evolve_trajectory(|_| h.clone(), &SpinState::basis(2, 0), &grid).unwrap();
        let d = aa_decompose(&traj, &hams, &grid).unwrap();
        assert!((d.total - principal_value(-e * t)).abs() < 1e-12);
        assert!((d.dynamical + e * t).abs() < 1e-12);
        assert!(d.geometric.abs() < 1e-12);
    }

    #[test]
    fn open_loop_is_rejected() {
        let sys = make_spin_system(0.5).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let h = sys.sz().scale(PI / 2.0);
        let (traj, hams) = evolve_trajectory(
            |_| h.clone(),
            &SpinState::coherent(&sys, PI / 2.0, 0.0),
            &grid,
        )
        .unwrap();
        assert!(matches!(
            aa_decompose(&traj, &hams, &grid),
            Err(Error::OpenLoop { .. })
        ));
    }
}
