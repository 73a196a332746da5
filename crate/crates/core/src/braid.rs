//! Braid words and unitary representations of the braid group.
//!
//! Composition convention: the first letter of a word acts first, so the
//! word `σ_a σ_b` evaluates to `B_b·B_a`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::berry::{projective_distance, HolonomyResult, ProjectiveDistance};
use crate::error::{Error, Result};
use crate::linalg::{c, cis, ensure_unitary, CMat};

/// `σ_generator` or its inverse; generators are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Self { generator, inverse }
    }

    pub fn inverted(self) -> Self {
        Self {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }

    pub fn exponent(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BraidWord {
    n_strands: usize,
    letters: Vec<Letter>,
}

impl BraidWord {
    pub fn new(n_strands: usize, letters: Vec<Letter>) -> Result<Self> {
        if n_strands < 2 {
            return Err(Error::InvalidWord(format!("{n_strands} strands, need at least 2")));
        }
        if let Some(l) = letters.iter().find(|l| l.generator == 0 || l.generator >= n_strands) {
            return Err(Error::InvalidWord(format!(
                "generator s{} outside 1..={} for {n_strands} strands",
                l.generator,
                n_strands - 1
            )));
        }
        Ok(Self { n_strands, letters })
    }

    pub fn identity(n_strands: usize) -> Result<Self> {
        Self::new(n_strands, Vec::new())
    }

    /// Parses whitespace-separated tokens `s<i>` or `s<i>^<k>` with a
    /// nonzero integer `k`; `e` or an empty string is the identity.
    pub fn parse(n_strands: usize, text: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "e" {
                continue;
            }
            let body = tok
                .strip_prefix('s')
                .ok_or_else(|| Error::InvalidWord(format!("token `{tok}` does not start with `s`")))?;
            let (idx, exp) = match body.split_once('^') {
                Some((i, e)) => (i, e),
                None => (body, "1"),
            };
            let generator: usize = idx
                .parse()
                .map_err(|_| Error::InvalidWord(format!("bad generator index in `{tok}`")))?;
            let k: i64 = exp
                .parse()
                .map_err(|_| Error::InvalidWord(format!("bad exponent in `{tok}`")))?;
            if k == 0 {
                return Err(Error::InvalidWord(format!("zero exponent in `{tok}`")));
            }
            letters.extend(std::iter::repeat_n(Letter::new(generator, k < 0), k.unsigned_abs() as usize));
        }
        Self::new(n_strands, letters)
    }

    pub fn n_strands(&self) -> usize {
        self.n_strands
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Sum of all exponents.
    pub fn net_exponent(&self) -> i64 {
        self.letters.iter().map(|l| l.exponent()).sum()
    }

    /// Formal inverse: letters reversed and inverted.
    pub fn inverse(&self) -> Self {
        Self {
            n_strands: self.n_strands,
            letters: self.letters.iter().rev().map(|l| l.inverted()).collect(),
        }
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &BraidWord) -> Result<Self> {
        if self.n_strands != other.n_strands {
            return Err(Error::InvalidWord(format!(
                "cannot join words on {} and {} strands",
                self.n_strands, other.n_strands
            )));
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(Self {
            n_strands: self.n_strands,
            letters,
        })
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("e");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "s{}", l.generator)?;
            if l.inverse {
                f.write_str("^-1")?;
            }
        }
        Ok(())
    }
}

/// Cancels adjacent `σ_i σ_i^{-1}` pairs until none remain.
pub fn reduce_word(w: &BraidWord) -> BraidWord {
    let mut out: Vec<Letter> = Vec::with_capacity(w.letters.len());
    for &l in &w.letters {
        if out.last() == Some(&l.inverted()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    BraidWord {
        n_strands: w.n_strands,
        letters: out,
    }
}

/// Tolerance on `max |B†B − I|` for generator images.
pub const REP_UNITARY_TOL: f64 = 1e-10;

/// Unitary images `B_1, …, B_{n−1}` of the generators.
#[derive(Debug, Clone, PartialEq)]
pub struct BraidRepresentation {
    n_strands: usize,
    images: Vec<CMat>,
}

impl BraidRepresentation {
    pub fn new(n_strands: usize, images: Vec<CMat>) -> Result<Self> {
        if n_strands < 2 || images.len() != n_strands - 1 {
            return Err(Error::InvalidRepresentation(format!(
                "{n_strands} strands need {} generator images, got {}",
                n_strands.saturating_sub(1),
                images.len()
            )));
        }
        let d = images[0].nrows();
        for (i, b) in images.iter().enumerate() {
            if !b.is_square() || b.nrows() != d || d == 0 {
                return Err(Error::InvalidRepresentation(format!(
                    "image of s{} is {}×{}, expected {d}×{d}",
                    i + 1,
                    b.nrows(),
                    b.ncols()
                )));
            }
            ensure_unitary(b, REP_UNITARY_TOL)
                .map_err(|e| Error::InvalidRepresentation(format!("image of s{}: {e}", i + 1)))?;
        }
        Ok(Self { n_strands, images })
    }

    pub fn trivial(n_strands: usize, dim: usize) -> Result<Self> {
        Self::new(n_strands, vec![CMat::identity(dim, dim); n_strands.saturating_sub(1)])
    }

    /// Every generator mapped to `e^{iθ}`.
    pub fn abelian(n_strands: usize, theta: f64) -> Result<Self> {
        Self::new(n_strands, vec![CMat::from_element(1, 1, cis(theta)); n_strands.saturating_sub(1)])
    }

    /// Three-strand Ising representation on the two-dimensional fusion space.
    pub fn ising() -> Self {
        let s1 = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]) * cis(-PI / 8.0);
        let r = 1.0 / 2f64.sqrt();
        let s2 = CMat::from_row_slice(2, 2, &[c(r, 0.0), c(0.0, -r), c(0.0, -r), c(r, 0.0)]) * cis(PI / 8.0);
        Self::new(3, vec![s1, s2]).expect("Ising images are unitary")
    }

    /// Three-strand Fibonacci representation: `B_1 = diag(R_1, R_τ)`, `B_2 = F B_1 F`.
    pub fn fibonacci() -> Self {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let s1 = CMat::from_row_slice(
            2,
            2,
            &[cis(-4.0 * PI / 5.0), c(0.0, 0.0), c(0.0, 0.0), cis(3.0 * PI / 5.0)],
        );
        let (a, b) = (1.0 / phi, 1.0 / phi.sqrt());
        let f = CMat::from_row_slice(2, 2, &[c(a, 0.0), c(b, 0.0), c(b, 0.0), c(-a, 0.0)]);
        let s2 = &f * &s1 * &f;
        Self::new(3, vec![s1, s2]).expect("Fibonacci images are unitary")
    }

    pub fn n_strands(&self) -> usize {
        self.n_strands
    }

    pub fn dim(&self) -> usize {
        self.images[0].nrows()
    }

    /// Image of `σ_generator`, numbered from 1.
    pub fn image(&self, generator: usize) -> Option<&CMat> {
        generator.checked_sub(1).and_then(|i| self.images.get(i))
    }

    pub fn images(&self) -> &[CMat] {
        &self.images
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    /// `(i, ‖B_i B_{i+1} B_i − B_{i+1} B_i B_{i+1}‖)`
    pub braid_residuals: Vec<(usize, f64)>,
    /// `(i, j, ‖B_i B_j − B_j B_i‖)` for `|i − j| ≥ 2`
    pub commute_residuals: Vec<(usize, usize, f64)>,
    pub worst: f64,
    pub tol: f64,
    pub passes: bool,
}

/// Frobenius-norm residuals of both braid relations for every generator pair.
pub fn verify_representation(rep: &BraidRepresentation, tol: f64) -> RelationReport {
    let b = &rep.images;
    let m = b.len();
    let braid_residuals: Vec<(usize, f64)> = (0..m.saturating_sub(1))
        .map(|i| {
            let lhs = &b[i] * &b[i + 1] * &b[i];
            let rhs = &b[i + 1] * &b[i] * &b[i + 1];
            (i + 1, (lhs - rhs).norm())
        })
        .collect();
    let mut commute_residuals = Vec::new();
    for i in 0..m {
        for j in i + 2..m {
            let r = (&b[i] * &b[j] - &b[j] * &b[i]).norm();
            commute_residuals.push((i + 1, j + 1, r));
        }
    }
    let worst = braid_residuals
        .iter()
        .map(|r| r.1)
        .chain(commute_residuals.iter().map(|r| r.2))
        .fold(0.0, f64::max);
    RelationReport {
        braid_residuals,
        commute_residuals,
        worst,
        tol,
        passes: worst <= tol,
    }
}

/// `B_{last}···B_{first}`; inverse letters map to adjoints.
pub fn evaluate_word(rep: &BraidRepresentation, w: &BraidWord) -> Result<CMat> {
    let d = rep.dim();
    let mut u = CMat::identity(d, d);
    for l in &w.letters {
        let b = rep.image(l.generator).ok_or_else(|| {
            Error::InvalidWord(format!(
                "generator s{} outside the {}-strand representation",
                l.generator, rep.n_strands
            ))
        })?;
        u = if l.inverse { b.adjoint() * u } else { b * u };
    }
    Ok(u)
}

/// Every image `B ↦ V†BV`.
pub fn conjugate_representation(rep: &BraidRepresentation, v: &CMat) -> Result<BraidRepresentation> {
    if v.nrows() != rep.dim() || v.ncols() != rep.dim() {
        return Err(Error::DimensionMismatch {
            expected: rep.dim(),
            got: v.nrows(),
        });
    }
    ensure_unitary(v, REP_UNITARY_TOL)?;
    let images = rep.images.iter().map(|b| v.adjoint() * b * v).collect();
    Ok(BraidRepresentation {
        n_strands: rep.n_strands,
        images,
    })
}

/// Projective distance from the word's image to the loop unitary `B·U_L`.
pub fn compare_braid_to_holonomy(
    rep: &BraidRepresentation,
    w: &BraidWord,
    hol: &HolonomyResult,
) -> Result<ProjectiveDistance> {
    if rep.dim() != hol.dim() {
        return Err(Error::DimensionMismatch {
            expected: rep.dim(),
            got: hol.dim(),
        });
    }
    projective_distance(&evaluate_word(rep, w)?, &hol.loop_unitary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(n: usize, s: &str) -> BraidWord {
        BraidWord::parse(n, s).unwrap()
    }

    #[test]
    fn parse_and_display() {
        let x = w(4, "s1 s3^-1 s2^2");
        assert_eq!(x.len(), 4);
        assert_eq!(x.to_string(), "s1 s3^-1 s2 s2");
        assert!(BraidWord::parse(3, "s3").is_err());
        assert!(BraidWord::parse(3, "t1").is_err());
        assert!(BraidWord::parse(3, "s1^0").is_err());
        assert!(w(3, "").is_empty());
    }

    #[test]
    fn free_reduction_examples() {
        assert!(reduce_word(&w(2, "s1 s1^-1")).is_empty());
        assert_eq!(reduce_word(&w(3, "s1 s2 s2^-1 s1")), w(3, "s1 s1"));
        let r = w(3, "s1 s2 s1^-1");
        assert_eq!(reduce_word(&r), r);
    }

    #[test]
    fn relation_checks() {
        assert!(verify_representation(&BraidRepresentation::abelian(2, 0.4).unwrap(), 1e-12).passes);
        assert!(verify_representation(&BraidRepresentation::trivial(3, 2).unwrap(), 0.0).passes);
        assert!(verify_representation(&BraidRepresentation::ising(), 1e-12).passes);
        assert!(verify_representation(&BraidRepresentation::fibonacci(), 1e-12).passes);
        let z = c(0.0, 0.0);
        let o = c(1.0, 0.0);
        let x = CMat::from_row_slice(2, 2, &[z, o, o, z]);
        let zz = CMat::from_row_slice(2, 2, &[o, z, z, -o]);
        let bad = verify_representation(&BraidRepresentation::new(3, vec![x, zz]).unwrap(), 1e-9);
        assert!(!bad.passes);
        assert!((bad.worst - 2.0).abs() < 1e-12);
    }

    #[test]
    fn word_evaluation() {
        let rep = BraidRepresentation::abelian(3, 0.3).unwrap();
        let u = evaluate_word(&rep, &w(3, "s1 s2 s1^-1 s2 s2")).unwrap();
        assert!((u[(0, 0)] - cis(0.9)).norm() < 1e-14);
        assert_eq!(evaluate_word(&rep, &w(3, "")).unwrap(), CMat::identity(1, 1));
        let ising = BraidRepresentation::ising();
        let x = w(3, "s1 s2^-1");
        let want = ising.image(2).unwrap().adjoint() * ising.image(1).unwrap();
        assert!((evaluate_word(&ising, &x).unwrap() - want).norm() < 1e-15);
        assert!(evaluate_word(&ising, &w(4, "s3")).is_err());
    }

    #[test]
    fn identity_conjugation() {
        let rep = BraidRepresentation::fibonacci();
        let same = conjugate_representation(&rep, &CMat::identity(2, 2)).unwrap();
        assert_eq!(same, rep);
        assert!(conjugate_representation(&rep, &(CMat::identity(2, 2) * c(2.0, 0.0))).is_err());
    }
}
