mod common;

use std::f64::consts::PI;

use common::{circ, cone_adiabatic_phase, expm_taylor, polar, random_hermitian, random_unitary, rng, M};
use num_complex::Complex64;
use phaselab::berry::{
    angle_loop, berry_connection_fd, cone_family, cone_loop, cross_validate, frames_along, holonomy_from_frames,
    holonomy_overlap, projective_distance, regauge, rotating_subspace_family, HamiltonianFamily, ParameterLoop,
};
use phaselab::linalg::{eigenphase_distance, eigenphases};
use phaselab::{Error, Exec};
use proptest::prelude::*;

/// `Q diag(spectrum) Q†` with a random unitary `Q`, so `e^{2πiG} = I`.
fn integer_generator(r: &mut impl rand::Rng, spectrum: &[f64]) -> M {
    let q = random_unitary(r, spectrum.len());
    let d = M::from_diagonal(&nalgebra::DVector::from_iterator(
        spectrum.len(),
        spectrum.iter().map(|&x| Complex64::new(x, 0.0)),
    ));
    &q * d * q.adjoint()
}

#[test]
fn cone_matches_adiabatic_evolution() {
    let fam = cone_family();
    for theta in [PI / 6.0, PI / 3.0, PI / 2.0] {
        let r = holonomy_overlap(&fam, &cone_loop(theta, 2000).unwrap(), Exec::Parallel).unwrap();
        let oracle = cone_adiabatic_phase(theta, 1000.0, 0.02);
        let analytic = -PI * (1.0 - theta.cos());
        assert!(circ(oracle, analytic) < 1e-4, "oracle {oracle} vs {analytic}");
        assert!(circ(r.spectrum[0], oracle) < 1e-4, "θ={theta}: {} vs {oracle}", r.spectrum[0]);
    }
}

#[test]
fn cone_methods_agree() {
    let fam = cone_family();
    for theta in [PI / 6.0, PI / 3.0, PI / 2.0] {
        let cv = cross_validate(&fam, &cone_loop(theta, 2000).unwrap(), 1e-4, 1e-3, Exec::Parallel).unwrap();
        assert!(cv.agree, "θ={theta}: gap {}", cv.spectrum_gap);
    }
}

#[test]
fn connection_is_hermitian_and_matches_cone_formula() {
    let fam = cone_family();
    let s = berry_connection_fd(&fam, &[1.1, 0.4], 1e-4, Exec::Sequential).unwrap();
    assert!(s.warning.is_none());
    assert!((s.components[1][(0, 0)].re + (1.0 - 1.1f64.cos()) / 2.0).abs() < 1e-7);
    assert!(s.components[0][(0, 0)].norm() < 1e-7);
}

#[test]
fn rotating_subspace_matches_exponential_oracle() {
    let mut r = rng(7);
    let g = integer_generator(&mut r, &[-1.0, 0.0, 1.0, 2.0]);
    let fam = rotating_subspace_family(g.clone(), 2).unwrap();
    let res = holonomy_overlap(&fam, &angle_loop(3000).unwrap(), Exec::Parallel).unwrap();
    let p0 = M::identity(4, 4).columns(0, 2).into_owned();
    let block = p0.adjoint() * &g * &p0;
    let want = expm_taylor(&(block * Complex64::new(0.0, -2.0 * PI)));
    let tail = g.view((2, 0), (2, 2)).norm();
    assert!(tail > 0.1);
    let d = eigenphase_distance(&eigenphases(&want), &res.spectrum);
    assert!(d < 5e-3, "{d}");
}

#[test]
fn discrete_wilson_line_matches_svd_oracle() {
    let mut r = rng(11);
    let mut frames = Vec::new();
    let n = 6;
    let base = random_unitary(&mut r, 5).columns(0, 2).into_owned();
    let step = random_hermitian(&mut r, 5, 0.05);
    let mut cur = base.clone();
    for _ in 0..n {
        frames.push(cur.clone());
        cur = expm_taylor(&(&step * Complex64::new(0.0, 1.0))) * cur;
    }
    frames.push(&base * random_unitary(&mut r, 2));
    let res = holonomy_from_frames(&frames).unwrap();
    let mut u = M::identity(2, 2);
    for w in frames.windows(2) {
        u = polar(&(w[0].adjoint() * &w[1])).adjoint() * u;
    }
    let b = polar(&(frames[0].adjoint() * &frames[n]));
    assert!((res.loop_unitary - b * u).norm() < 1e-10);
}

#[test]
fn gap_collapse_is_reported() {
    let fam = HamiltonianFamily::new(1, 2, 0, 1, |p: &[f64]| {
        M::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(p[0], 0.0), Complex64::new(0.0, 0.0)]))
    })
    .unwrap();
    let lp = ParameterLoop::new(vec![vec![-1.0], vec![0.0], vec![-1.0]]).unwrap();
    assert!(matches!(holonomy_overlap(&fam, &lp, Exec::Sequential), Err(Error::GapCollapse { .. })));
}

#[test]
fn regauging_preserves_spectrum() {
    let mut r = rng(5);
    let g = integer_generator(&mut r, &[0.0, 1.0, 1.0, 3.0]);
    let fam = rotating_subspace_family(g, 2).unwrap();
    let lp = angle_loop(600).unwrap();
    let base = holonomy_overlap(&fam, &lp, Exec::Parallel).unwrap();
    for _ in 0..10 {
        let gauges: Vec<M> = (0..lp.len()).map(|_| random_unitary(&mut r, 2)).collect();
        let reg = regauge(&fam, &lp, &gauges, Exec::Parallel).unwrap();
        assert!(eigenphase_distance(&base.spectrum, &reg.spectrum) < 1e-6);
        let back = gauges[0].clone() * &reg.loop_unitary * gauges[0].adjoint();
        assert!((back - &base.loop_unitary).norm() < 1e-9);
    }
}

#[test]
fn reversed_loop_inverts_holonomy() {
    let fam = cone_family();
    let lp = cone_loop(0.9, 800).unwrap();
    let f = holonomy_overlap(&fam, &lp, Exec::Parallel).unwrap();
    let b = holonomy_overlap(&fam, &lp.reversed(), Exec::Parallel).unwrap();
    assert!(circ(f.spectrum[0], -b.spectrum[0]) < 1e-9);
}

#[test]
fn frames_parallel_equal_sequential() {
    let fam = cone_family();
    let lp = cone_loop(1.2, 300).unwrap();
    let a = frames_along(&fam, lp.samples(), Exec::Sequential).unwrap();
    let b = frames_along(&fam, lp.samples(), Exec::Parallel).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cone_phase_is_solid_angle(theta in 0.1f64..3.0) {
        let r = holonomy_overlap(&cone_family(), &cone_loop(theta, 1500).unwrap(), Exec::Sequential).unwrap();
        prop_assert!(circ(r.spectrum[0], -PI * (1.0 - theta.cos())) < 1e-4);
    }

    #[test]
    fn projective_distance_ignores_global_phase(seed in 0u64..1000, alpha in -3.0f64..3.0) {
        let mut r = rng(seed);
        let u = random_unitary(&mut r, 3);
        let v = &u * Complex64::from_polar(1.0, alpha);
        let d = projective_distance(&u, &v).unwrap();
        prop_assert!(d.residual < 1e-10);
        prop_assert!(circ(d.phase, alpha) < 1e-10);
        let w = random_unitary(&mut r, 3);
        let dw = projective_distance(&u, &w).unwrap();
        prop_assert!((dw.residual - common::projective_residual_scan(&u, &w)).abs() < 1e-6);
    }
}
