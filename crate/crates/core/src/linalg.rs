//! Dense complex linear algebra and time-stepped unitary evolution.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Absolute Hermiticity tolerance, scaled by the largest entry when that exceeds one.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `e^{iθ}`
#[inline]
pub fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// Principal value of a phase in (−π, π].
pub fn principal_value(phase: f64) -> f64 {
    let mut p = phase.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// Distance between two phases on the circle, in [0, π].
pub fn circular_distance(a: f64, b: f64) -> f64 {
    principal_value(a - b).abs()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// max |M − M†| over entries.
pub fn hermitian_defect(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(m - m.adjoint()))
}

/// max |U†U − I| over entries.
pub fn unitary_defect(u: &CMat) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - CMat::identity(n, n)))
}

pub fn ensure_hermitian(h: &CMat) -> Result<()> {
    let asymmetry = hermitian_defect(h);
    if asymmetry > HERMITIAN_TOL * max_abs(h).max(1.0) {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok(())
}

pub fn ensure_unitary(u: &CMat, tol: f64) -> Result<()> {
    let defect = unitary_defect(u);
    if defect > tol {
        return Err(Error::NotUnitary { defect });
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted ascending.
/// Columns of the returned matrix are the matching orthonormal eigenvectors.
pub fn eigh(h: &CMat) -> Result<(Vec<f64>, CMat)> {
    ensure_hermitian(h)?;
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    Ok((values, vectors))
}

/// `exp(−i·H·dt)` for Hermitian `H`, through the spectral decomposition.
pub fn matexp_unitary(h: &CMat, dt: f64) -> Result<CMat> {
    let (values, vectors) = eigh(h)?;
    let phases = CVec::from_iterator(values.len(), values.iter().map(|&e| cis(-e * dt)));
    let mut scaled = vectors.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    Ok(scaled * vectors.adjoint())
}

/// `exp(i·X)` for Hermitian `X`.
pub fn expi_hermitian(x: &CMat) -> Result<CMat> {
    matexp_unitary(x, -1.0)
}

/// Smallest singular value below which [`unitarize`] rejects its input.
pub const RANK_TOL: f64 = 1e-12;

/// Unitary factor `W` of the polar decomposition `M = W·P`.
///
/// `W = U·V†` from the SVD; it is the unitary maximizing `Re tr(W†M)`.
pub fn unitarize(m: &CMat) -> Result<CMat> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let svd = m.clone().svd(true, true);
    let smallest = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    if !(smallest > RANK_TOL) {
        return Err(Error::RankDeficient {
            singular_value: smallest,
        });
    }
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V†");
    Ok(u * v_t)
}

/// Smallest singular value of a square matrix.
pub fn min_singular_value(m: &CMat) -> f64 {
    m.singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Uniform time grid; `dt = (t_end − t_start) / n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidGrid("n_steps must be positive".into()));
        }
        if !(t_start.is_finite() && t_end.is_finite()) || t_end <= t_start {
            return Err(Error::InvalidGrid(format!(
                "need finite t_start < t_end, got [{t_start}, {t_end}]"
            )));
        }
        Ok(Self {
            t_start,
            t_end,
            n_steps,
        })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn dt(&self) -> f64 {
        self.duration() / self.n_steps as f64
    }

    /// Grid point `k` in `0..=n_steps`; the last point is exactly `t_end`.
    pub fn point(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_end
        } else {
            self.t_start + k as f64 * self.dt()
        }
    }

    pub fn midpoint(&self, k: usize) -> f64 {
        self.t_start + (k as f64 + 0.5) * self.dt()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_steps).map(|k| self.point(k))
    }

    /// Splits into `[t_start, t_mid]` and `[t_mid, t_end]` sharing the grid
    /// points; requires an even number of steps.
    pub fn halves(&self) -> Option<(TimeGrid, TimeGrid)> {
        if !self.n_steps.is_multiple_of(2) {
            return None;
        }
        let half = self.n_steps / 2;
        let mid = self.point(half);
        Some((
            TimeGrid {
                t_start: self.t_start,
                t_end: mid,
                n_steps: half,
            },
            TimeGrid {
                t_start: mid,
                t_end: self.t_end,
                n_steps: half,
            },
        ))
    }
}

/// Time-ordered propagator of a Hermitian family with the exponential
/// midpoint rule: `U = Π_k exp(−i·H(t_k + dt/2)·dt)`, latest step leftmost.
pub fn timeordered_evolve<F>(family: F, grid: &TimeGrid) -> Result<CMat>
where
    F: Fn(f64) -> CMat,
{
    let dt = grid.dt();
    let mut u: Option<CMat> = None;
    for k in 0..grid.n_steps() {
        let h = family(grid.midpoint(k));
        let step = matexp_unitary(&h, dt)?;
        u = Some(match u {
            None => step,
            Some(acc) => {
                if acc.nrows() != step.nrows() {
                    return Err(Error::DimensionMismatch {
                        expected: acc.nrows(),
                        got: step.nrows(),
                    });
                }
                step * acc
            }
        });
    }
    Ok(u.expect("grid has at least one step"))
}

/// Eigenvalues of a unitary (or any normal) matrix via the complex Schur form.
pub fn unitary_eigenvalues(u: &CMat) -> Vec<Complex64> {
    let schur = Schur::new(u.clone());
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Eigenphases of a unitary, sorted ascending in (−π, π].
pub fn eigenphases(u: &CMat) -> Vec<f64> {
    let mut phases: Vec<f64> = unitary_eigenvalues(u)
        .into_iter()
        .map(|z| principal_value(z.arg()))
        .collect();
    phases.sort_by(f64::total_cmp);
    phases
}

/// Bottleneck distance between two eigenphase multisets on the circle.
///
/// Both lists are sorted and matched under every cyclic shift; for points on
/// a circle the best shift is an optimal bottleneck matching.
pub fn eigenphase_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    if a.is_empty() {
        return 0.0;
    }
    let mut a: Vec<f64> = a.iter().map(|&x| principal_value(x)).collect();
    let mut b: Vec<f64> = b.iter().map(|&x| principal_value(x)).collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let n = a.len();
    (0..n)
        .map(|shift| {
            (0..n)
                .map(|i| circular_distance(a[i], b[(i + shift) % n]))
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Conjugate-linear inner product `⟨a|b⟩`.
pub fn inner(a: &CVec, b: &CVec) -> Complex64 {
    a.dotc(b)
}
