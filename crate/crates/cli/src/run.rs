//! Dispatch from parsed scenarios to the physics library. Each sweep point
//! yields one or more rows of named outputs.

use std::f64::consts::PI;
use std::path::Path;

use indexmap::IndexMap;
use phaselab::anyon::{
    deformation_robustness_probe, total_anyon_phase, AnyonSpecies, FieldMap, FluxQuadrature, PlanarPath, Point,
};
use phaselab::berry::{
    angle_loop, cone_family, cone_loop, cross_validate, projective_distance, rotating_subspace_family,
    CrossValidation, ParameterLoop,
};
use phaselab::braid::{
    compare_braid_to_holonomy, conjugate_representation, evaluate_word, verify_representation, BraidRepresentation,
    BraidWord, Letter,
};
use phaselab::holomorphic::{make_holomorphic_family, robustness_break_probe, PerturbationMode};
use phaselab::linalg::{c, cis, eigenphase_distance, eigenphases, expi_hermitian, principal_value, timeordered_evolve};
use phaselab::ring::{check_swap_orthogonality, two_particle_swap, RingState, SwapSchedule};
use phaselab::spin::{
    analyze_spin_swap, equal_rotation_swap, make_spin_system, total_observable_phase, ConditionedHamiltonian,
    SpinState,
};
use phaselab::{CMat, CVec, Exec, TimeGrid};
use serde_json::{json, Value};

use crate::config::{
    AnyonPhaseParams, BerryHolonomyParams, BraidCheckParams, FamilySpec, PathSpec, RepresentationSpec,
    RingSwapParams, RobustnessSweepParams, Scenario, SpinSwapMode, SpinSwapParams,
};
use crate::inputs::{read_grid, read_path};

pub type Row = IndexMap<String, Value>;

type PResult<T> = Result<T, RunError>;

/// Failure inside one sweep point.
#[derive(Debug)]
pub enum RunError {
    Physics(phaselab::Error),
    Input(crate::error::CliError),
}

impl From<phaselab::Error> for RunError {
    fn from(e: phaselab::Error) -> Self {
        RunError::Physics(e)
    }
}

impl From<crate::error::CliError> for RunError {
    fn from(e: crate::error::CliError) -> Self {
        RunError::Input(e)
    }
}

fn num(x: f64) -> Value {
    json!(x)
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|x| json!(x)).collect())
}

/// Fixed Hermitian matrix used to mix bases deterministically.
fn mixing_generator(n: usize) -> CMat {
    CMat::from_fn(n, n, |a, b| {
        let re = 1.0 / (1.0 + a.abs_diff(b) as f64);
        c(re, (a as f64 - b as f64) / 5.0)
    })
}

pub fn run_point(scenario: &Scenario, base_dir: &Path) -> PResult<Vec<Row>> {
    match scenario {
        Scenario::RingSwap(p) => ring_swap(p),
        Scenario::SpinSwap(p) => spin_swap(p),
        Scenario::AnyonPhase(p) => anyon_phase(p, base_dir),
        Scenario::BerryHolonomy(p) => berry_holonomy(p),
        Scenario::RobustnessSweep(p) => robustness_sweep(p),
        Scenario::BraidCheck(p) => braid_check(p),
    }
}

fn ring_swap(p: &RingSwapParams) -> PResult<Vec<Row>> {
    let spin = phaselab::spin::Spin::new(p.spin)?;
    let state = RingState::equal_superposition(p.m_max, &p.components)?;
    let grid = TimeGrid::new(0.0, p.duration, p.steps)?;
    let schedule = SwapSchedule::with_profile(grid, p.profile).with_extra_phase_drop(p.extra_phase_drop);
    let out = two_particle_swap(spin, &state, &schedule)?;
    let mut r = Row::new();
    r.insert("total_phase".into(), num(out.total_phase));
    r.insert("exchange_part".into(), num(out.exchange_part));
    r.insert("spatial_dynamical_part".into(), num(out.spatial_dynamical_part));
    r.insert("fidelity".into(), num(out.fidelity));
    r.insert("leakage".into(), num(out.leakage));
    r.insert("orthogonality".into(), num(check_swap_orthogonality(&state)));
    let split = principal_value(out.total_phase - out.exchange_part - out.spatial_dynamical_part).abs();
    r.insert("decomposition_residual".into(), num(split));
    Ok(vec![r])
}

fn spin_swap(p: &SpinSwapParams) -> PResult<Vec<Row>> {
    let sys = make_spin_system(p.spin)?;
    let rep = match p.mode {
        SpinSwapMode::EqualRotation => equal_rotation_swap(&sys, p.duration, p.steps)?,
        SpinSwapMode::ReversedConjugate => {
            let grid = TimeGrid::new(0.0, p.duration, p.steps)?;
            let norm = p.axis.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                return Err(phaselab::Error::InvalidAxis("zero axis".into()).into());
            }
            let axis = p.axis.map(|x| x / norm);
            let (rot, sx) = (sys.s_dot(axis), sys.sx().clone());
            let (t_end, drive) = (p.duration, p.drive);
            let h = move |t: f64| rot.scale(PI / t_end) + sx.scale(drive * (PI * t / t_end).sin());
            let v_a = timeordered_evolve(&h, &grid)?;
            let sigma = SpinState::coherent(&sys, PI / 2.0, 0.0);
            let tau = SpinState::normalized(&v_a * sigma.amps())?;
            let cond = ConditionedHamiltonian::reversed_conjugate(h, &grid);
            analyze_spin_swap(&sys, &cond, &sigma, &tau, &grid, p.phi_spatial)?
        }
    };
    let mut r = Row::new();
    r.insert("phi_a".into(), num(rep.swap.phi_a));
    r.insert("phi_b".into(), num(rep.swap.phi_b));
    r.insert("spin_phase".into(), num(rep.spin_phase));
    r.insert("loop_total".into(), num(rep.loop_decomposition.total));
    r.insert("loop_dynamical".into(), num(rep.loop_decomposition.dynamical));
    r.insert("loop_geometric".into(), num(rep.loop_decomposition.geometric));
    r.insert(
        "total_observable".into(),
        num(total_observable_phase(sys.spin(), p.phi_spatial, rep.spin_phase)),
    );
    r.insert("overlap_a".into(), num(rep.swap.overlap_a));
    r.insert("overlap_b".into(), num(rep.swap.overlap_b));
    Ok(vec![r])
}

fn build_path(spec: &PathSpec, base_dir: &Path) -> PResult<PlanarPath> {
    let pt = |v: &[f64; 2]| Point::new(v[0], v[1]);
    Ok(match spec {
        PathSpec::Polygon { vertices, closed } => PlanarPath::new(vertices.iter().map(pt).collect(), *closed)?,
        PathSpec::Regular { center, radius, sides } => PlanarPath::regular_polygon(pt(center), *radius, *sides)?,
        PathSpec::Rectangle { x_min, y_min, x_max, y_max } => PlanarPath::rectangle(*x_min, *y_min, *x_max, *y_max)?,
        PathSpec::File { file } => read_path(&base_dir.join(file))?,
    })
}

fn anyon_phase(p: &AnyonPhaseParams, base_dir: &Path) -> PResult<Vec<Row>> {
    let species = AnyonSpecies::new(p.charge, p.flux)?;
    let path = build_path(&p.path, base_dir)?;
    let field = match &p.field_file {
        Some(f) => read_grid(&base_dir.join(f))?,
        None => p.field.clone(),
    };
    let others: Vec<Point> = p.others.iter().map(|v| Point::new(v[0], v[1])).collect();
    let quad = FluxQuadrature {
        cells_per_side: p.cells_per_side,
        cells_per_region_diameter: p.cells_per_region_diameter,
    };
    let d = &p.deformations;
    let mut deformed = Vec::new();
    for k in 0..d.wobbles {
        deformed.push(path.wobbled(d.wobble_amplitude, k)?);
    }
    for &s in &d.scales {
        deformed.push(path.scaled(s)?);
    }
    let mut r = Row::new();
    let base = if deformed.is_empty() {
        total_anyon_phase(&species, &path, &others, &field, &quad, Exec::Parallel)?
    } else {
        let probe = deformation_robustness_probe(
            &species,
            &path,
            &deformed,
            &others,
            &field,
            p.threshold,
            &quad,
            Exec::Parallel,
        )?;
        let drifts: Vec<f64> = probe.deformations.iter().map(|v| v.geometric_drift).collect();
        let areas: Vec<f64> = deformed.iter().map(PlanarPath::signed_area).collect();
        r.insert("deformation_count".into(), json!(deformed.len()));
        r.insert(
            "topology_changed".into(),
            json!(probe.deformations.iter().any(|v| v.topology_changed)),
        );
        r.insert(
            "topological_spread".into(),
            num(probe
                .deformations
                .iter()
                .map(|v| principal_value(v.report.topological - probe.base.topological).abs())
                .fold(0.0, f64::max)),
        );
        r.insert("max_abs_drift".into(), num(probe.max_abs_drift));
        r.insert("robust".into(), json!(probe.robust));
        r.insert("drifts".into(), nums(&drifts));
        r.insert("deformed_areas".into(), nums(&areas));
        if let FieldMap::Everywhere { b } = field {
            let predicted: Vec<f64> = areas.iter().map(|a| p.charge * b * (a - path.signed_area())).collect();
            let rel = drifts
                .iter()
                .zip(&predicted)
                .filter(|(_, q)| q.abs() > 0.0)
                .map(|(d, q)| (d - q).abs() / q.abs())
                .fold(0.0, f64::max);
            r.insert("predicted_drifts".into(), nums(&predicted));
            r.insert("max_relative_drift_error".into(), num(rel));
        }
        probe.base
    };
    let mut head = Row::new();
    head.insert("windings".into(), json!(base.windings));
    head.insert("topological".into(), num(base.topological));
    head.insert("geometric".into(), num(base.geometric));
    head.insert("total".into(), num(base.total));
    head.insert("flux".into(), num(base.flux));
    head.insert("pair_phase".into(), num(species.pair_phase()));
    head.insert("signed_area".into(), num(path.signed_area()));
    head.extend(r);
    Ok(vec![head])
}

fn holonomy_row(cv: &CrossValidation) -> Row {
    let mut r = Row::new();
    r.insert("spectrum".into(), nums(&cv.overlap.spectrum));
    r.insert("overall_phase".into(), num(cv.overlap.overall_phase));
    r.insert("connection_spectrum".into(), nums(&cv.connection.spectrum));
    r.insert("spectrum_gap".into(), num(cv.spectrum_gap));
    r.insert("methods_agree".into(), json!(cv.agree));
    r.insert("min_overlap".into(), num(cv.overlap.min_overlap));
    r.insert("samples".into(), json!(cv.overlap.samples));
    r
}

fn berry_holonomy(p: &BerryHolonomyParams) -> PResult<Vec<Row>> {
    match &p.family {
        FamilySpec::Cone { theta } => {
            let cv = cross_validate(&cone_family(), &cone_loop(*theta, p.samples)?, p.fd_step, p.agree_tol, Exec::Parallel)?;
            let mut r = holonomy_row(&cv);
            let analytic = principal_value(-PI * (1.0 - theta.cos()));
            r.insert("analytic_phase".into(), num(analytic));
            r.insert("analytic_error".into(), num(eigenphase_distance(&cv.overlap.spectrum, &[analytic])));
            Ok(vec![r])
        }
        FamilySpec::RotatingSubspace { spectrum, degeneracy, mixing } => {
            let n = spectrum.len();
            let rot = expi_hermitian(&mixing_generator(n).scale(*mixing))?;
            let diag = CMat::from_diagonal(&CVec::from_iterator(n, spectrum.iter().map(|&x| c(x, 0.0))));
            let g = &rot * diag * rot.adjoint();
            let fam = rotating_subspace_family(g.clone(), *degeneracy)?;
            let cv = cross_validate(&fam, &angle_loop(p.samples)?, p.fd_step, p.agree_tol, Exec::Parallel)?;
            let p0 = g.view((0, 0), (*degeneracy, *degeneracy)).into_owned();
            let analytic = eigenphases(&expi_hermitian(&p0.scale(-2.0 * PI))?);
            let mut r = holonomy_row(&cv);
            r.insert("analytic_error".into(), num(eigenphase_distance(&cv.overlap.spectrum, &analytic)));
            r.insert("analytic_spectrum".into(), nums(&analytic));
            Ok(vec![r])
        }
        FamilySpec::Holomorphic { spec, loop_shape, max_step } => {
            let (fam, ham) = make_holomorphic_family(spec)?;
            let flat = loop_shape.to_loop(*max_step)?;
            let lp = match spec.mode {
                PerturbationMode::Antiholomorphic => flat.clone(),
                PerturbationMode::ExtraParameter => flat.lifted(|_| 0.0),
            };
            let cv = cross_validate(&ham, &lp, p.fd_step, p.agree_tol, Exec::Parallel)?;
            let windings = fam.windings(&flat)?;
            let n: i64 = windings.iter().sum();
            let area = sampled_area(&flat);
            let l2 = spec.magnetic_length * spec.magnetic_length;
            let mut predicted = CMat::identity(spec.degeneracy, spec.degeneracy);
            let m = fam.monodromy();
            for _ in 0..n.unsigned_abs() {
                predicted = if n > 0 { &m * predicted } else { m.adjoint() * predicted };
            }
            let predicted = predicted * cis(-area / l2);
            let dist = projective_distance(&predicted, &cv.overlap.loop_unitary)?;
            let letter = Letter::new(1, n < 0);
            let word = BraidWord::new(2, vec![letter; 2 * n.unsigned_abs() as usize])?;
            let exchange = compare_braid_to_holonomy(&fam.exchange_representation(), &word, &cv.overlap)?;
            let mut r = holonomy_row(&cv);
            r.insert("windings".into(), json!(windings));
            r.insert("signed_area".into(), num(area));
            r.insert("predicted_residual".into(), num(dist.residual));
            r.insert("predicted_phase_offset".into(), num(dist.phase));
            r.insert("exchange_word".into(), json!(word.to_string()));
            r.insert("exchange_residual".into(), num(exchange.residual));
            Ok(vec![r])
        }
    }
}

fn sampled_area(lp: &ParameterLoop) -> f64 {
    let s = lp.samples();
    let n = s.len() - 1;
    0.5 * (0..n).map(|i| s[i][0] * s[i + 1][1] - s[i + 1][0] * s[i][1]).sum::<f64>()
}

fn robustness_sweep(p: &RobustnessSweepParams) -> PResult<Vec<Row>> {
    let mut pairs = Vec::with_capacity(p.pairs.len());
    for pair in &p.pairs {
        let (a, b) = (pair.a.to_loop(p.max_step)?, pair.b.to_loop(p.max_step)?);
        pairs.push(match p.family.mode {
            PerturbationMode::Antiholomorphic => (a, b),
            PerturbationMode::ExtraParameter => {
                let n = (b.len() - 1) as f64;
                let lift = pair.lift;
                (a.lifted(|_| 0.0), b.lifted(|k| lift * (2.0 * PI * k as f64 / n).sin()))
            }
        });
    }
    let table = robustness_break_probe(&p.family, &pairs, &p.epsilons, Exec::Parallel)?;
    Ok(table
        .rows
        .iter()
        .map(|row| {
            let mut r = Row::new();
            r.insert("epsilon".into(), num(row.epsilon));
            r.insert("residuals".into(), nums(&row.residuals));
            r.insert("max_residual".into(), num(row.max_residual));
            r.insert("robust".into(), json!(row.max_residual <= p.zero_tol));
            r.insert("non_decreasing".into(), json!(table.non_decreasing));
            r
        })
        .collect())
}

fn build_representation(spec: &RepresentationSpec) -> PResult<BraidRepresentation> {
    Ok(match spec {
        RepresentationSpec::Ising => BraidRepresentation::ising(),
        RepresentationSpec::Ising4 => {
            let im = BraidRepresentation::ising().images().to_vec();
            BraidRepresentation::new(4, vec![im[0].clone(), im[1].clone(), im[0].clone()])?
        }
        RepresentationSpec::Fibonacci => BraidRepresentation::fibonacci(),
        RepresentationSpec::Abelian { n_strands, theta } => BraidRepresentation::abelian(*n_strands, *theta)?,
        RepresentationSpec::Trivial { n_strands, dim } => BraidRepresentation::trivial(*n_strands, *dim)?,
        RepresentationSpec::HolomorphicExchange { spec } => {
            let (fam, _) = make_holomorphic_family(spec)?;
            fam.exchange_representation()
        }
    })
}

fn braid_check(p: &BraidCheckParams) -> PResult<Vec<Row>> {
    let rep = build_representation(&p.representation)?;
    let n = rep.n_strands();
    let report = verify_representation(&rep, p.tol);
    let mut r = Row::new();
    r.insert("n_strands".into(), json!(n));
    r.insert("dim".into(), json!(rep.dim()));
    r.insert("relation_worst".into(), num(report.worst));
    r.insert("relations_pass".into(), json!(report.passes));
    let braid: Vec<f64> = report.braid_residuals.iter().map(|x| x.1).collect();
    let commute: Vec<f64> = report.commute_residuals.iter().map(|x| x.2).collect();
    r.insert("braid_residuals".into(), nums(&braid));
    r.insert("commute_residuals".into(), nums(&commute));
    if p.conjugate_mixing != 0.0 {
        let v = expi_hermitian(&mixing_generator(rep.dim()).scale(p.conjugate_mixing))?;
        let conj = verify_representation(&conjugate_representation(&rep, &v)?, p.tol);
        r.insert("conjugated_worst".into(), num(conj.worst));
        r.insert(
            "conjugation_preserves".into(),
            json!(conj.passes == report.passes && (conj.worst - report.worst).abs() <= p.tol),
        );
    }
    let mut spectra = Vec::with_capacity(p.words.len());
    for w in &p.words {
        let word = BraidWord::parse(n, w)?;
        spectra.push(nums(&eigenphases(&evaluate_word(&rep, &word)?)));
    }
    r.insert("word_spectra".into(), Value::Array(spectra));
    if !p.word_pairs.is_empty() {
        let mut worst = 0.0f64;
        for [a, b] in &p.word_pairs {
            let (wa, wb) = (BraidWord::parse(n, a)?, BraidWord::parse(n, b)?);
            let whole = evaluate_word(&rep, &wa.concat(&wb)?)?;
            let split = evaluate_word(&rep, &wb)? * evaluate_word(&rep, &wa)?;
            worst = worst.max((whole - split).norm());
        }
        r.insert("homomorphism_worst".into(), num(worst));
        r.insert("homomorphism_pass".into(), json!(worst <= p.tol));
    }
    Ok(vec![r])
}
