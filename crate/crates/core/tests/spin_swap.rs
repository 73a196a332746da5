mod common;

use std::f64::consts::PI;

use common::{circ, propagator, random_hermitian, rng, M};
use nalgebra::DVector;
use num_complex::Complex64;
use phaselab::spin::{
    aa_decompose, conditioned_swap_evolve, equal_rotation_swap, evolve_trajectory, loop_phase, make_spin_system,
    rotation_unitary, total_observable_phase, ConditionedHamiltonian, Spin, SpinState,
};
use phaselab::TimeGrid;
use proptest::prelude::*;
use rand::Rng;

fn random_state(r: &mut impl Rng, n: usize) -> SpinState {
    let v = DVector::from_fn(n, |_, _| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
    SpinState::normalized(v).unwrap()
}

#[test]
fn ladder_operator_oracle() {
    for twice in 1..=6u32 {
        let s = twice as f64 / 2.0;
        let sys = make_spin_system(s).unwrap();
        let n = sys.dim();
        let mut plus = M::zeros(n, n);
        for k in 1..n {
            let m = s - k as f64;
            plus[(k - 1, k)] = Complex64::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
        let sx = (&plus + plus.adjoint()) * Complex64::new(0.5, 0.0);
        let sy = (&plus - plus.adjoint()) * Complex64::new(0.0, -0.5);
        assert!((sys.sx() - sx).norm() < 1e-14);
        assert!((sys.sy() - sy).norm() < 1e-14);
        let comm = sys.sx() * sys.sy() - sys.sy() * sys.sx() - sys.sz() * Complex64::new(0.0, 1.0);
        assert!(comm.norm() < 1e-12);
        let cas = sys.casimir() - M::identity(n, n) * Complex64::new(s * (s + 1.0), 0.0);
        assert!(cas.norm() < 1e-12);
    }
    assert!(make_spin_system(0.3).is_err());
    assert!(make_spin_system(0.0).is_err());
}

#[test]
fn rotation_matches_taylor_oracle() {
    let sys = make_spin_system(1.5).unwrap();
    let axis = [0.48, -0.6, 0.64];
    let u = rotation_unitary(&sys, axis, 2.3).unwrap();
    let want = propagator(&sys.s_dot(axis), 2.3);
    assert!((u - want).norm() < 1e-12);
    for (s, sign) in [(0.5, -1.0), (1.0, 1.0), (1.5, -1.0)] {
        let sys = make_spin_system(s).unwrap();
        let u = rotation_unitary(&sys, [0.0, 0.0, 1.0], 2.0 * PI).unwrap();
        let n = sys.dim();
        assert!((u - M::identity(n, n) * Complex64::new(sign, 0.0)).norm() < 1e-12);
    }
    assert!(rotation_unitary(&sys, [0.0, 0.0, 0.0], 1.0).is_err());
}

#[test]
fn coherent_loop_solid_angle_oracle() {
    for twice in 1..=3u32 {
        let s = twice as f64 / 2.0;
        let sys = make_spin_system(s).unwrap();
        for theta0 in [0.4, PI / 2.0, 2.2] {
            let psi = SpinState::coherent(&sys, theta0, 0.3);
            let expected = -2.0 * PI * s * (1.0 - theta0.cos());
            let t_end = 3.0;
            let grid = TimeGrid::new(0.0, t_end, 400).unwrap();
            let sz = sys.sz().clone();
            let uniform = {
                let sz = sz.clone();
                move |_t: f64| sz.scale(2.0 * PI / t_end)
            };
            let accelerating = move |t: f64| sz.scale(4.0 * PI * t / (t_end * t_end));
            let (traj, hams) = evolve_trajectory(uniform, &psi, &grid).unwrap();
            let a = aa_decompose(&traj, &hams, &grid).unwrap();
            let (traj, hams) = evolve_trajectory(accelerating, &psi, &grid).unwrap();
            let b = aa_decompose(&traj, &hams, &grid).unwrap();
            assert!(circ(a.geometric, expected) < 1e-6, "s={s} θ={theta0}: {}", a.geometric);
            assert!(circ(a.geometric, b.geometric) < 1e-6);
            assert!(circ(a.total, a.dynamical + a.geometric) < 1e-12);
        }
    }
}

#[test]
fn stationary_state_has_no_geometric_phase() {
    let sys = make_spin_system(1.0).unwrap();
    let psi = SpinState::basis(3, 0);
    let grid = TimeGrid::new(0.0, 2.0, 50).unwrap();
    let h = sys.sz().scale(0.7);
    let (traj, hams) = evolve_trajectory(move |_| h.clone(), &psi, &grid).unwrap();
    let d = aa_decompose(&traj, &hams, &grid).unwrap();
    assert!(circ(d.total, -1.4) < 1e-12);
    assert!((d.dynamical + 1.4).abs() < 1e-12);
    assert!(circ(d.geometric, 0.0) < 1e-12);
}

#[test]
fn equal_rotation_cancels_exchange_sign() {
    for twice in 1..=3u32 {
        let sys = make_spin_system(twice as f64 / 2.0).unwrap();
        let rep = equal_rotation_swap(&sys, 1.0, 200).unwrap();
        assert!(circ(rep.loop_decomposition.geometric, PI * twice as f64) < 1e-6);
        assert!(circ(rep.total_observable, 0.0) < 1e-6);
        let tp = rep.swap.track_propagator();
        let n = sys.dim();
        assert!(tp.view((0, n), (n, n)).iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        assert!(tp.view((n, 0), (n, n)).iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }
}

#[test]
fn observable_phase_examples() {
    let half = Spin::new(0.5).unwrap();
    assert!(circ(total_observable_phase(half, 0.0, 0.0), PI) < 1e-15);
    assert!(circ(total_observable_phase(half, 0.0, PI), 0.0) < 1e-15);
    assert!(circ(total_observable_phase(Spin::new(1.0).unwrap(), PI / 2.0, PI / 2.0), PI) < 1e-15);
}

/// Track B undoes track A and then rotates about `σ`, so `V_B τ ∝ σ`.
fn random_swap(seed: u64, twice: u32) -> (f64, f64, f64, f64) {
    let mut r = rng(seed);
    let sys = make_spin_system(twice as f64 / 2.0).unwrap();
    let n = sys.dim();
    let sigma = random_state(&mut r, n);
    let h_a = random_hermitian(&mut r, n, 1.0);
    let k0 = random_hermitian(&mut r, n, 1.0);
    let p = sigma.amps() * sigma.amps().adjoint();
    let q = M::identity(n, n) - &p;
    let k = &p * &k0 * &p + &q * &k0 * &q;
    let t_end = 1.0;
    let grid = TimeGrid::new(0.0, t_end, 64).unwrap();
    let tau = SpinState::normalized(propagator(&h_a, t_end) * sigma.amps()).unwrap();
    let ha = h_a.clone();
    let cond = ConditionedHamiltonian::new(
        move |_| ha.clone(),
        move |t| if t < 0.5 * t_end { -&h_a * Complex64::new(2.0, 0.0) } else { &k * Complex64::new(2.0, 0.0) },
    );
    let sw = conditioned_swap_evolve(&sys, &cond, &sigma, &tau, &grid).unwrap();
    let via_sigma = loop_phase(&sigma, &sw.v_a, &sw.v_b);
    let via_tau = loop_phase(&tau, &sw.v_b, &sw.v_a);
    (sw.phi_a, sw.phi_b, via_sigma, via_tau)
}

#[test]
fn reversed_conjugate_schedule_cancels() {
    for seed in 0..10u64 {
        let mut r = rng(100 + seed);
        let sys = make_spin_system(1.0).unwrap();
        let (h0, h1) = (random_hermitian(&mut r, 3, 1.0), random_hermitian(&mut r, 3, 1.0));
        let grid = TimeGrid::new(0.0, 2.0, 300).unwrap();
        let h = move |t: f64| &h0 + &h1 * Complex64::new(t.sin(), 0.0);
        let sigma = random_state(&mut r, 3);
        let mut u = M::identity(3, 3);
        for k in 0..grid.n_steps() {
            u = propagator(&h(grid.midpoint(k)), grid.dt()) * u;
        }
        let tau = SpinState::normalized(u * sigma.amps()).unwrap();
        let cond = ConditionedHamiltonian::reversed_conjugate(h, &grid);
        let sw = conditioned_swap_evolve(&sys, &cond, &sigma, &tau, &grid).unwrap();
        assert!(circ(sw.spin_phase(), 0.0) < 1e-9, "seed {seed}: {}", sw.spin_phase());
    }
}

#[test]
fn failed_swap_reports_overlap() {
    let sys = make_spin_system(0.5).unwrap();
    let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
    let cond = ConditionedHamiltonian::constant(M::zeros(2, 2), M::zeros(2, 2));
    let up = SpinState::basis(2, 0);
    let down = SpinState::basis(2, 1);
    assert!(conditioned_swap_evolve(&sys, &cond, &up, &down, &grid).is_err());
    let sw = conditioned_swap_evolve(&sys, &cond, &up, &up, &grid).unwrap();
    assert_eq!((sw.phi_a, sw.phi_b), (0.0, 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn loop_phase_symmetry(seed in 0u64..10_000, twice in 1u32..4) {
        let (pa, pb, s, t) = random_swap(seed, twice);
        prop_assert!(circ(s, pa + pb) < 1e-9);
        prop_assert!(circ(t, pa + pb) < 1e-9);
    }
}
