mod common;

use std::f64::consts::PI;

use common::{circ, shoelace};
use phaselab::berry::{holonomy_overlap, projective_distance, ParameterLoop};
use phaselab::braid::{compare_braid_to_holonomy, BraidWord};
use phaselab::holomorphic::{
    loop_holonomy, make_holomorphic_family, robustness_break_probe, HolomorphicSpec, LoopShape, PerturbationMode,
};
use phaselab::Exec;
use proptest::prelude::*;

fn spec(eps: f64) -> HolomorphicSpec {
    HolomorphicSpec {
        punctures: vec![[-0.8, 0.0], [0.9, 0.3]],
        magnetic_length: 1.2,
        epsilon: eps,
        ..Default::default()
    }
}

fn circle(cx: f64, cy: f64, r: f64) -> LoopShape {
    LoopShape::Circle { center: [cx, cy], radius: r }
}

fn pairs() -> Vec<(LoopShape, LoopShape)> {
    vec![
        (circle(-0.8, 0.0, 0.5), circle(-0.6, 0.1, 0.9)),
        (
            circle(0.0, 0.0, 2.0),
            LoopShape::Ellipse { center: [0.1, 0.1], rx: 2.6, ry: 1.3, angle: 0.2 },
        ),
        (
            circle(0.9, 0.3, 0.4),
            LoopShape::Polygon { vertices: vec![[0.5, -0.5], [1.8, 0.0], [1.2, 1.2], [0.4, 0.8]] },
        ),
        (circle(2.5, 2.5, 0.6), circle(-2.0, 2.0, 0.9)),
        (
            LoopShape::Polygon { vertices: vec![[-2.5, -2.0], [2.5, -2.0], [2.5, 2.0], [-2.5, 2.0]] },
            circle(0.05, 0.15, 1.9),
        ),
    ]
}

fn loops() -> Vec<(ParameterLoop, ParameterLoop)> {
    pairs().iter().map(|(a, b)| (a.to_loop(0.03).unwrap(), b.to_loop(0.03).unwrap())).collect()
}

fn sampled_area(lp: &ParameterLoop) -> f64 {
    let v: Vec<(f64, f64)> = lp.samples()[..lp.len() - 1].iter().map(|p| (p[0], p[1])).collect();
    shoelace(&v)
}

#[test]
fn equal_winding_loops_differ_only_by_area_phase() {
    let s = spec(0.0);
    let (fam, ham) = make_holomorphic_family(&s).unwrap();
    for (a, b) in loops() {
        assert_eq!(fam.windings(&a).unwrap(), fam.windings(&b).unwrap());
        let ha = holonomy_overlap(&ham, &a, Exec::Parallel).unwrap();
        let hb = holonomy_overlap(&ham, &b, Exec::Parallel).unwrap();
        let d = projective_distance(&ha.loop_unitary, &hb.loop_unitary).unwrap();
        assert!(d.residual <= 1e-6, "{}", d.residual);
        let l2 = s.magnetic_length * s.magnetic_length;
        let want = -(sampled_area(&b) - sampled_area(&a)) / l2;
        assert!(circ(d.phase, want) < 1e-6, "{} vs {want}", d.phase);
    }
}

#[test]
fn different_windings_are_distinguished() {
    let (fam, _) = make_holomorphic_family(&spec(0.0)).unwrap();
    let one = loop_holonomy(&fam, &circle(-0.8, 0.0, 0.5).to_loop(0.03).unwrap(), Exec::Parallel).unwrap();
    let none = loop_holonomy(&fam, &circle(2.5, 2.5, 0.5).to_loop(0.03).unwrap(), Exec::Parallel).unwrap();
    let d = projective_distance(&one.loop_unitary, &none.loop_unitary).unwrap();
    assert!(d.residual > 0.5);
}

#[test]
fn full_winding_matches_exchange_squared() {
    let (fam, _) = make_holomorphic_family(&spec(0.0)).unwrap();
    let h = loop_holonomy(&fam, &circle(-0.8, 0.0, 0.6).to_loop(0.03).unwrap(), Exec::Parallel).unwrap();
    let rep = fam.exchange_representation();
    let d = compare_braid_to_holonomy(&rep, &BraidWord::parse(2, "s1 s1").unwrap(), &h).unwrap();
    assert!(d.residual < 1e-6);
    let wrong = compare_braid_to_holonomy(&rep, &BraidWord::parse(2, "s1").unwrap(), &h).unwrap();
    assert!(wrong.residual > 0.1);
}

#[test]
fn antiholomorphic_sweep_breaks_robustness() {
    let table = robustness_break_probe(&spec(0.0), &loops(), &[0.0, 0.01, 0.05, 0.1], Exec::Parallel).unwrap();
    assert!(table.rows[0].max_residual <= 1e-6);
    assert!(table.rows[1..].iter().all(|r| r.max_residual > 1e-6));
    assert!(table.non_decreasing, "{table:?}");
}

#[test]
fn sweep_rejects_non_homotopic_pair() {
    let bad = vec![(
        circle(-0.8, 0.0, 0.5).to_loop(0.05).unwrap(),
        circle(2.5, 2.5, 0.5).to_loop(0.05).unwrap(),
    )];
    assert!(robustness_break_probe(&spec(0.0), &bad, &[0.0], Exec::Sequential).is_err());
}

#[test]
fn extra_parameter_excursions_are_path_dependent() {
    let s = HolomorphicSpec { mode: PerturbationMode::ExtraParameter, epsilon: 0.3, ..spec(0.0) };
    let (fam, ham) = make_holomorphic_family(&s).unwrap();
    let base = circle(-0.8, 0.0, 0.6).to_loop(0.03).unwrap();
    let flat = base.lifted(|_| 0.0);
    let n = (base.len() - 1) as f64;
    let bump = base.lifted(|k| 0.8 * (2.0 * PI * k as f64 / n).sin());
    let a = holonomy_overlap(&ham, &flat, Exec::Parallel).unwrap();
    let b = holonomy_overlap(&ham, &bump, Exec::Parallel).unwrap();
    assert!(projective_distance(&a.loop_unitary, &b.loop_unitary).unwrap().residual > 1e-4);
    assert_eq!(fam.windings(&flat).unwrap(), fam.windings(&bump).unwrap());
}

#[test]
fn cauchy_riemann_holds_only_unperturbed() {
    let pts = vec![vec![0.1, 1.0], vec![-1.5, -0.9], vec![1.7, 1.2], vec![0.0, -1.4]];
    let (flat, _) = make_holomorphic_family(&spec(0.0)).unwrap();
    assert!(flat.cauchy_riemann_residual(&pts, 1e-3).unwrap() <= 1e-8);
    let (bent, _) = make_holomorphic_family(&spec(0.05)).unwrap();
    assert!(bent.cauchy_riemann_residual(&pts, 1e-3).unwrap() > 1e-4);
}

#[test]
fn points_outside_working_disk_rejected() {
    let (_, ham) = make_holomorphic_family(&spec(0.0)).unwrap();
    let far = circle(0.0, 0.0, 6.0).to_loop(0.1).unwrap();
    assert!(holonomy_overlap(&ham, &far, Exec::Sequential).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn wobbly_circles_share_projective_class(r1 in 0.2f64..0.6, r2 in 0.2f64..0.6, dx in -0.1f64..0.1) {
        let (fam, _) = make_holomorphic_family(&spec(0.0)).unwrap();
        let a = loop_holonomy(&fam, &circle(-0.8 + dx, 0.0, r1).to_loop(0.03).unwrap(), Exec::Sequential).unwrap();
        let b = loop_holonomy(&fam, &circle(-0.8, dx, r2).to_loop(0.03).unwrap(), Exec::Sequential).unwrap();
        prop_assert!(projective_distance(&a.loop_unitary, &b.loop_unitary).unwrap().residual <= 1e-6);
    }
}
