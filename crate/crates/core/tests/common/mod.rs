//! Independent reference implementations used only by tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type M = DMatrix<Complex64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `exp(X)` by scaling and squaring with a 30-term Taylor series.
pub fn expm_taylor(x: &M) -> M {
    let norm = x.iter().map(|z| z.norm()).sum::<f64>();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = x / Complex64::new(2f64.powi(squarings as i32), 0.0);
    let n = x.nrows();
    let mut sum = M::identity(n, n);
    let mut term = M::identity(n, n);
    for k in 1..30 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `exp(−iH dt)` through the Taylor oracle.
pub fn propagator(h: &M, dt: f64) -> M {
    expm_taylor(&(h * Complex64::new(0.0, -dt)))
}

pub fn random_hermitian(r: &mut impl Rng, n: usize, scale: f64) -> M {
    let a = M::from_fn(n, n, |_, _| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
    (&a + a.adjoint()) * Complex64::new(0.5 * scale, 0.0)
}

pub fn random_unitary(r: &mut impl Rng, n: usize) -> M {
    expm_taylor(&(random_hermitian(r, n, 2.0) * Complex64::new(0.0, 1.0)))
}

/// Polar factor `M (M†M)^{−1/2}` via the singular value decomposition.
pub fn polar(m: &M) -> M {
    let svd = m.clone().svd(true, true);
    svd.u.unwrap() * svd.v_t.unwrap()
}

pub fn shoelace(v: &[(f64, f64)]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
}

pub fn wrap(x: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let r = x.rem_euclid(tau);
    if r > std::f64::consts::PI { r - tau } else { r }
}

pub fn circ(a: f64, b: f64) -> f64 {
    wrap(a - b).abs()
}

/// `min_α ‖B − e^{iα}A‖_F` by scanning the phase, independent of the trace formula.
pub fn projective_residual_scan(a: &M, b: &M) -> f64 {
    let mut best = f64::INFINITY;
    let mut lo = -std::f64::consts::PI;
    let mut hi = std::f64::consts::PI;
    for _ in 0..6 {
        let step = (hi - lo) / 200.0;
        let mut arg = lo;
        for k in 0..=200 {
            let alpha = lo + k as f64 * step;
            let d = (b - a * Complex64::from_polar(1.0, alpha)).norm();
            if d < best {
                best = d;
                arg = alpha;
            }
        }
        lo = arg - step;
        hi = arg + step;
    }
    best
}

/// Geometric phase of the spin-1/2 ground state of `−n̂(θ, 2πt/T)·σ` from a
/// dense time-ordered evolution with the dynamical phase `T` removed,
/// Richardson-extrapolated over `T` and `2T` to cancel the `1/T` correction.
pub fn cone_adiabatic_phase(theta: f64, t_total: f64, dt: f64) -> f64 {
    let one = |t_end: f64| {
        let steps = (t_end / dt).ceil() as usize;
        let grid = phaselab::TimeGrid::new(0.0, t_end, steps).unwrap();
        let h = |t: f64| {
            let phi = std::f64::consts::TAU * t / t_end;
            let (s, c) = (theta.sin(), theta.cos());
            M::from_row_slice(
                2,
                2,
                &[
                    Complex64::new(-c, 0.0),
                    Complex64::new(-s * phi.cos(), s * phi.sin()),
                    Complex64::new(-s * phi.cos(), -s * phi.sin()),
                    Complex64::new(c, 0.0),
                ],
            )
        };
        let u = phaselab::linalg::timeordered_evolve(h, &grid).unwrap();
        let psi = nalgebra::DVector::from_vec(vec![
            Complex64::new((theta / 2.0).cos(), 0.0),
            Complex64::new((theta / 2.0).sin(), 0.0),
        ]);
        wrap(psi.dotc(&(u * &psi)).arg() - t_end)
    };
    let (g1, g2) = (one(t_total), one(2.0 * t_total));
    wrap(g2 + wrap(g2 - g1))
}
