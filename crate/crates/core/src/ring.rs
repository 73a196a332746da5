//! Two identical particles on a ring, physically swapped by rotating both
//! by π, plus an optional identity term that only adds a dynamical phase.
//!
//! Single-particle states live in the truncated `L_z` eigenbasis
//! `|m⟩, m ∈ [−m_max, m_max]`. The swap Hamiltonian `φ̇(t)·L_z` is diagonal
//! there, so the truncation is exact and never leaks norm.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, cis, principal_value, TimeGrid};
use crate::spin::Spin;

pub const DEFAULT_M_MAX: usize = 16;
pub const NORM_TOL: f64 = 1e-12;
/// Largest `|Σ|c_m|² e^{imπ}|` accepted for a swap-compatible state.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct RingState {
    m_max: usize,
    /// `amps[i]` is the amplitude of `|m = i − m_max⟩`.
    amps: Vec<Complex64>,
}

impl RingState {
    pub fn new(m_max: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 2 * m_max + 1 {
            return Err(Error::DimensionMismatch {
                expected: 2 * m_max + 1,
                got: amps.len(),
            });
        }
        let norm_sqr: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { m_max, amps })
    }

    /// Builds a state from `(m, amplitude)` pairs; unspecified `m` are zero.
    pub fn from_components(m_max: usize, components: &[(i64, Complex64)]) -> Result<Self> {
        let mut amps = vec![c(0.0, 0.0); 2 * m_max + 1];
        for &(m, a) in components {
            if m.unsigned_abs() as usize > m_max {
                return Err(Error::DimensionMismatch {
                    expected: m_max,
                    got: m.unsigned_abs() as usize,
                });
            }
            amps[(m + m_max as i64) as usize] += a;
        }
        Self::new(m_max, amps)
    }

    /// Equal-weight, zero-phase superposition of the listed `m`.
    pub fn equal_superposition(m_max: usize, ms: &[i64]) -> Result<Self> {
        let a = c(1.0 / (ms.len() as f64).sqrt(), 0.0);
        let comps: Vec<_> = ms.iter().map(|&m| (m, a)).collect();
        Self::from_components(m_max, &comps)
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn m_values(&self) -> impl Iterator<Item = i64> {
        let m_max = self.m_max as i64;
        -m_max..=m_max
    }

    pub fn amplitude(&self, m: i64) -> Complex64 {
        let idx = m + self.m_max as i64;
        if idx < 0 || idx as usize >= self.amps.len() {
            return c(0.0, 0.0);
        }
        self.amps[idx as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`
    pub fn overlap(&self, other: &RingState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn is_swap_compatible(&self) -> bool {
        check_swap_orthogonality(self) <= ORTHOGONALITY_TOL
    }
}

/// `c_m → e^{−imθ} c_m`: rigid rotation of the particle by `theta`.
pub fn rotate_ring(state: &RingState, theta: f64) -> RingState {
    let amps = state
        .m_values()
        .zip(&state.amps)
        .map(|(m, a)| a * cis(-(m as f64) * theta))
        .collect();
    RingState {
        m_max: state.m_max,
        amps,
    }
}

/// `|Σ_m |c_m|² e^{imπ}|`; zero means the π-rotated state stays orthogonal
/// to the original at all times.
pub fn check_swap_orthogonality(state: &RingState) -> f64 {
    state
        .m_values()
        .zip(&state.amps)
        .map(|(m, a)| {
            let parity = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            parity * a.norm_sqr()
        })
        .sum::<f64>()
        .abs()
}

/// Sampled swap protocol: the rotation angle `φ(t)` with `φ(0) = 0`,
/// `φ(T) = π`, and the extra identity-term phase `ϕ(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapSchedule {
    grid: TimeGrid,
    phi: Vec<f64>,
    extra_phase: Vec<f64>,
}

/// Endpoint tolerance when sampling `φ`; accepted endpoints are then pinned exactly.
pub const ENDPOINT_TOL: f64 = 1e-12;

impl SwapSchedule {
    pub fn from_samples(grid: TimeGrid, mut phi: Vec<f64>, extra_phase: Vec<f64>) -> Result<Self> {
        let n = grid.n_steps() + 1;
        if phi.len() != n || extra_phase.len() != n {
            return Err(Error::InvalidSchedule(format!(
                "expected {n} samples, got {} (phi) and {} (extra)",
                phi.len(),
                extra_phase.len()
            )));
        }
        if phi.iter().chain(&extra_phase).any(|x| !x.is_finite()) {
            return Err(Error::InvalidSchedule("non-finite sample".into()));
        }
        if phi[0].abs() > ENDPOINT_TOL {
            return Err(Error::InvalidSchedule(format!("phi(0) = {}, expected 0", phi[0])));
        }
        if (phi[n - 1] - PI).abs() > ENDPOINT_TOL {
            return Err(Error::InvalidSchedule(format!(
                "phi(T) = {}, expected π",
                phi[n - 1]
            )));
        }
        phi[0] = 0.0;
        phi[n - 1] = PI;
        Ok(Self {
            grid,
            phi,
            extra_phase,
        })
    }

    pub fn from_fns<P, E>(grid: TimeGrid, phi: P, extra_phase: E) -> Result<Self>
    where
        P: Fn(f64) -> f64,
        E: Fn(f64) -> f64,
    {
        let phi = grid.points().map(&phi).collect();
        let extra = grid.points().map(&extra_phase).collect();
        Self::from_samples(grid, phi, extra)
    }

    /// Uniform rotation with no extra term.
    pub fn linear(grid: TimeGrid) -> Self {
        let (t0, span) = (grid.t_start(), grid.duration());
        Self::from_fns(grid, |t| PI * (t - t0) / span, |_| 0.0).expect("linear ramp hits its endpoints")
    }

    pub fn with_profile(grid: TimeGrid, profile: PhiProfile) -> Self {
        let (t0, span) = (grid.t_start(), grid.duration());
        Self::from_fns(grid, |t| profile.angle((t - t0) / span), |_| 0.0)
            .expect("profiles hit their endpoints")
    }

    /// Replaces the extra term by a linear ramp with `ϕ(0) − ϕ(T) = drop`.
    pub fn with_extra_phase_drop(mut self, drop: f64) -> Self {
        let n = self.grid.n_steps();
        self.extra_phase = (0..=n).map(|k| -drop * k as f64 / n as f64).collect();
        self
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn extra_phase(&self) -> &[f64] {
        &self.extra_phase
    }

    /// `ϕ(0) − ϕ(T)`
    pub fn extra_phase_drop(&self) -> f64 {
        self.extra_phase[0] - self.extra_phase[self.extra_phase.len() - 1]
    }
}

/// Shapes of `φ(u)` on the unit interval `u = (t − t_0)/T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiProfile {
    Linear,
    /// `π(3u² − 2u³)`
    Smoothstep,
    /// `πu + 1.5 sin(2πu)`: runs backwards through the middle of the swap.
    Overshoot,
}

impl PhiProfile {
    pub const ALL: [PhiProfile; 3] = [PhiProfile::Linear, PhiProfile::Smoothstep, PhiProfile::Overshoot];

    pub fn angle(self, u: f64) -> f64 {
        match self {
            PhiProfile::Linear => PI * u,
            PhiProfile::Smoothstep => PI * u * u * (3.0 - 2.0 * u),
            PhiProfile::Overshoot => PI * u + 1.5 * (2.0 * PI * u).sin(),
        }
    }
}

/// Diagonal single-particle propagator of `φ̇(t)L_z` with the exponential
/// midpoint rule (`φ̇` at each midpoint from the neighbouring samples).
fn swap_propagator(m_max: usize, schedule: &SwapSchedule) -> Vec<Complex64> {
    let mut diag = vec![c(1.0, 0.0); 2 * m_max + 1];
    for w in schedule.phi.windows(2) {
        let dphi = w[1] - w[0];
        for (i, d) in diag.iter_mut().enumerate() {
            let m = i as f64 - m_max as f64;
            *d *= cis(-m * dphi);
        }
    }
    diag
}

/// Global phase `ϕ(0) − ϕ(T)` from stepping the identity term `ϕ̇(t)·1`.
fn extra_term_phase(schedule: &SwapSchedule) -> f64 {
    let total: f64 = schedule.extra_phase.windows(2).map(|w| -(w[1] - w[0])).sum();
    principal_value(total)
}

/// Evolves one particle through the swap. Returns the rotated state and the
/// phase `ϕ(0) − ϕ(T)` accumulated by the pair through the identity term.
pub fn evolve_ring_swap(state: &RingState, schedule: &SwapSchedule) -> Result<(RingState, f64)> {
    let value = check_swap_orthogonality(state);
    if value > ORTHOGONALITY_TOL {
        return Err(Error::SwapOrthogonality { value });
    }
    let diag = swap_propagator(state.m_max, schedule);
    let amps = state.amps.iter().zip(&diag).map(|(a, d)| a * d).collect();
    Ok((
        RingState {
            m_max: state.m_max,
            amps,
        },
        extra_term_phase(schedule),
    ))
}

/// Symmetrized two-particle amplitude array
/// `Ψ[m₁][m₂] = (α_{m₁}β_{m₂} + (−1)^{2s} β_{m₁}α_{m₂})/√2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoParticleState {
    spin: Spin,
    m_max: usize,
    /// Row-major, row index = particle label 1.
    amps: Vec<Complex64>,
}

impl TwoParticleState {
    pub fn symmetrized(spin: Spin, alpha: &RingState, beta: &RingState) -> Result<Self> {
        if alpha.m_max != beta.m_max {
            return Err(Error::DimensionMismatch {
                expected: alpha.m_max,
                got: beta.m_max,
            });
        }
        let n = alpha.amps.len();
        let sign = spin.exchange_sign();
        let norm = 1.0 / 2f64.sqrt();
        let mut amps = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                amps.push((alpha.amps[i] * beta.amps[j] + beta.amps[i] * alpha.amps[j] * sign) * norm);
            }
        }
        Ok(Self {
            spin,
            m_max: alpha.m_max,
            amps,
        })
    }

    fn side(&self) -> usize {
        2 * self.m_max + 1
    }

    pub fn amplitude(&self, m1: i64, m2: i64) -> Complex64 {
        let off = self.m_max as i64;
        let n = self.side();
        self.amps[(m1 + off) as usize * n + (m2 + off) as usize]
    }

    /// The same state with the particle labels 1 ↔ 2 exchanged.
    pub fn label_swapped(&self) -> Self {
        let n = self.side();
        let amps = (0..n * n).map(|k| self.amps[(k % n) * n + k / n]).collect();
        Self {
            spin: self.spin,
            m_max: self.m_max,
            amps,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn overlap(&self, other: &Self) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Applies `diag ⊗ diag`.
    fn apply_product(&self, diag: &[Complex64]) -> Self {
        let n = self.side();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(k, a)| a * diag[k / n] * diag[k % n])
            .collect();
        Self {
            spin: self.spin,
            m_max: self.m_max,
            amps,
        }
    }

    /// Largest `|Ψ(β,α) − (−1)^{2s}Ψ(α,β)|` over basis pairs.
    pub fn exchange_symmetry_defect(&self) -> f64 {
        let swapped = self.label_swapped();
        let sign = self.spin.exchange_sign();
        swapped
            .amps
            .iter()
            .zip(&self.amps)
            .map(|(s, a)| (s - a * sign).norm())
            .fold(0.0, f64::max)
    }
}

/// Observable outcome of physically swapping the pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeOutcome {
    pub total_phase: f64,
    /// `2sπ` mod 2π.
    pub exchange_part: f64,
    /// `ϕ(0) − ϕ(T)` mod 2π.
    pub spatial_dynamical_part: f64,
    /// `|⟨Ψ|Ψ_final⟩|²`: how well the final state is the initial ray.
    pub fidelity: f64,
    /// Norm lost from the truncated band (zero for this diagonal evolution).
    pub leakage: f64,
}

/// Swaps two identical spin-s particles prepared in `|A⟩` and `|B⟩ = R(π)|A⟩`
/// and reports the phase relative to the unswapped, unevolved pair.
pub fn two_particle_swap(spin: Spin, state_a: &RingState, schedule: &SwapSchedule) -> Result<ExchangeOutcome> {
    let value = check_swap_orthogonality(state_a);
    if value > ORTHOGONALITY_TOL {
        return Err(Error::SwapOrthogonality { value });
    }
    let state_b = rotate_ring(state_a, PI);
    let psi = TwoParticleState::symmetrized(spin, state_a, &state_b)?;
    let diag = swap_propagator(state_a.m_max, schedule);
    let extra = extra_term_phase(schedule);
    let evolved = psi.apply_product(&diag);
    let overlap = psi.overlap(&evolved) * cis(extra);
    let leakage = (psi.norm_sqr() - evolved.norm_sqr()).abs();
    Ok(ExchangeOutcome {
        total_phase: principal_value(overlap.arg()),
        exchange_part: spin.exchange_phase(),
        spatial_dynamical_part: extra,
        fidelity: overlap.norm_sqr() / (psi.norm_sqr() * evolved.norm_sqr()),
        leakage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> RingState {
        RingState::equal_superposition(DEFAULT_M_MAX, &[0, 1]).unwrap()
    }

    fn grid() -> TimeGrid {
        TimeGrid::new(0.0, 1.0, 1000).unwrap()
    }

    #[test]
    fn rotation_by_pi_flips_odd_m() {
        let r = rotate_ring(&half(), PI);
        let s = 1.0 / 2f64.sqrt();
        assert!((r.amplitude(0) - c(s, 0.0)).norm() < 1e-15);
        assert!((r.amplitude(1) - c(-s, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn full_turn_and_zero_turn_are_identity() {
        let st = RingState::from_components(3, &[(-2, c(0.6, 0.0)), (3, c(0.0, 0.8))]).unwrap();
        for theta in [0.0, 2.0 * PI] {
            let r = rotate_ring(&st, theta);
            for (a, b) in r.amps().iter().zip(st.amps()) {
                assert!((a - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn orthogonality_examples() {
        assert!(check_swap_orthogonality(&half()) < 1e-15);
        let zero = RingState::equal_superposition(4, &[0]).unwrap();
        assert!((check_swap_orthogonality(&zero) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unnormalized_state_rejected() {
        assert!(RingState::from_components(2, &[(0, c(1.0, 0.0)), (1, c(0.1, 0.0))]).is_err());
        assert!(RingState::new(2, vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn evolve_linear_swap() {
        let (fin, phase) = evolve_ring_swap(&half(), &SwapSchedule::linear(grid())).unwrap();
        let want = rotate_ring(&half(), PI);
        assert!((fin.overlap(&want).norm() - 1.0).abs() < 1e-12);
        assert!((fin.amplitude(1) - want.amplitude(1)).norm() < 1e-12);
        assert!(phase.abs() < 1e-15);
    }

    #[test]
    fn evolve_rejects_non_orthogonal_state() {
        let bad = RingState::equal_superposition(2, &[0, 2]).unwrap();
        match evolve_ring_swap(&bad, &SwapSchedule::linear(grid())) {
            Err(Error::SwapOrthogonality { value }) => assert!((value - 1.0).abs() < 1e-12),
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn extra_term_adds_its_drop() {
        let sched = SwapSchedule::linear(grid()).with_extra_phase_drop(PI / 3.0);
        let (_, phase) = evolve_ring_swap(&half(), &sched).unwrap();
        assert!((phase - PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn schedule_endpoints_enforced() {
        let g = grid();
        assert!(SwapSchedule::from_fns(g, |t| PI * t + 1e-6, |_| 0.0).is_err());
        assert!(SwapSchedule::from_fns(g, |t| 0.9 * PI * t, |_| 0.0).is_err());
    }

    #[test]
    fn fermion_and_boson_swap_phases() {
        let sched = SwapSchedule::linear(grid());
        let f = two_particle_swap(Spin::new(0.5).unwrap(), &half(), &sched).unwrap();
        assert!((principal_value(f.total_phase - PI)).abs() < 1e-12);
        assert!(f.fidelity > 1.0 - 1e-12);
        let b = two_particle_swap(Spin::new(1.0).unwrap(), &half(), &sched).unwrap();
        assert!(b.total_phase.abs() < 1e-12);
        assert!(b.leakage < 1e-12);
    }

    #[test]
    fn exchange_symmetry_is_exact() {
        for twice in 1..=4 {
            let spin = Spin::from_twice(twice).unwrap();
            let a = RingState::from_components(3, &[(-1, c(0.5, 0.0)), (0, c(0.0, 0.5)), (1, c(0.5, 0.0)), (2, c(-0.5, 0.0))])
                .unwrap();
            let psi = TwoParticleState::symmetrized(spin, &a, &rotate_ring(&a, PI)).unwrap();
            assert_eq!(psi.exchange_symmetry_defect(), 0.0);
            assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }
}
