//! Finite-section operator matrices tagged with their domain and codomain.
//!
//! Coordinates: `Hardy { n }` uses `w^0..w^n`; `CoHardy { m }` uses
//! `w^-1..w^-m` (row `i` is `w^{-(i+1)}`); `Model` uses the Takenaka-Malmquist
//! basis; `ModelPerp` uses the orthonormal system `{theta w^k}` for
//! `0 <= k < analytic` followed by `w^-1..w^-m`.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{LaurentSeries, C64};
use crate::model_space::ModelBasis;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceTag {
    Hardy { n: usize },
    CoHardy { m: usize },
    Model { dim: usize, basis_id: u64 },
    ModelPerp { basis_id: u64, analytic: usize, m: usize },
}

impl SpaceTag {
    pub fn dim(&self) -> usize {
        match *self {
            SpaceTag::Hardy { n } => n + 1,
            SpaceTag::CoHardy { m } => m,
            SpaceTag::Model { dim, .. } => dim,
            SpaceTag::ModelPerp { analytic, m, .. } => analytic + m,
        }
    }

    pub fn model(basis: &ModelBasis) -> Self {
        SpaceTag::Model { dim: basis.dim(), basis_id: basis.id() }
    }

    pub fn model_perp(basis: &ModelBasis, n: usize, m: usize) -> Self {
        SpaceTag::ModelPerp { basis_id: basis.id(), analytic: n.saturating_sub(basis.dim()), m }
    }

    /// Image of the tag under the index flip `w^k <-> w^{-k-1}`.
    fn flipped(&self) -> Result<Self> {
        match *self {
            SpaceTag::Hardy { n } => Ok(SpaceTag::CoHardy { m: n + 1 }),
            SpaceTag::CoHardy { m } if m >= 1 => Ok(SpaceTag::Hardy { n: m - 1 }),
            other => Err(Error::TagMismatch(format!("V is undefined on {other:?}"))),
        }
    }
}

/// Coordinates of a vector in a tagged space.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggedVector {
    pub space: SpaceTag,
    pub coords: DVector<C64>,
}

impl TaggedVector {
    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    /// Coefficients `0..=n` of `f`.
    pub fn hardy(f: &LaurentSeries, n: usize) -> Self {
        Self { space: SpaceTag::Hardy { n }, coords: DVector::from_fn(n + 1, |k, _| f.coeff(k as i64)) }
    }

    /// Coefficients `-1..=-m` of `f`.
    pub fn cohardy(f: &LaurentSeries, m: usize) -> Self {
        Self { space: SpaceTag::CoHardy { m }, coords: DVector::from_fn(m, |i, _| f.coeff(-(i as i64) - 1)) }
    }

    /// Coordinates of `f` against the model basis.
    pub fn model(f: &LaurentSeries, basis: &ModelBasis) -> Self {
        Self { space: SpaceTag::model(basis), coords: DVector::from_vec(basis.coordinates(f)) }
    }

    /// Series with these coordinates (Hardy and CoHardy tags only).
    pub fn to_series(&self) -> Result<LaurentSeries> {
        match self.space {
            SpaceTag::Hardy { n } => Ok(LaurentSeries::from_fn(0, n as i64, |k| self.coords[k as usize])),
            SpaceTag::CoHardy { m } => Ok(LaurentSeries::from_fn(-(m as i64), -1, |k| self.coords[(-k - 1) as usize])),
            other => Err(Error::TagMismatch(format!("no monomial coordinates on {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OpMatrix {
    domain: SpaceTag,
    codomain: SpaceTag,
    entries: DMatrix<C64>,
}

impl OpMatrix {
    pub fn new(domain: SpaceTag, codomain: SpaceTag, entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != codomain.dim() || entries.ncols() != domain.dim() {
            return Err(Error::TagMismatch(format!(
                "{}x{} entries for {:?} -> {:?}",
                entries.nrows(),
                entries.ncols(),
                domain,
                codomain
            )));
        }
        Ok(Self { domain, codomain, entries })
    }

    fn build(domain: SpaceTag, codomain: SpaceTag, f: impl FnMut(usize, usize) -> C64) -> Self {
        let entries = DMatrix::from_fn(codomain.dim(), domain.dim(), f);
        Self { domain, codomain, entries }
    }

    pub fn identity(space: SpaceTag) -> Self {
        Self { domain: space, codomain: space, entries: DMatrix::identity(space.dim(), space.dim()) }
    }

    pub fn zeros(domain: SpaceTag, codomain: SpaceTag) -> Self {
        Self::build(domain, codomain, |_, _| C64::new(0.0, 0.0))
    }

    pub fn domain(&self) -> SpaceTag {
        self.domain
    }

    pub fn codomain(&self) -> SpaceTag {
        self.codomain
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    /// `self ∘ rhs`.
    pub fn compose(&self, rhs: &OpMatrix) -> Result<OpMatrix> {
        if self.domain != rhs.codomain {
            return Err(Error::TagMismatch(format!("compose {:?} after {:?}", self.domain, rhs.codomain)));
        }
        Ok(Self { domain: rhs.domain, codomain: self.codomain, entries: &self.entries * &rhs.entries })
    }

    pub fn add(&self, rhs: &OpMatrix) -> Result<OpMatrix> {
        self.same_tags(rhs)?;
        Ok(Self { entries: &self.entries + &rhs.entries, ..self.clone_tags() })
    }

    pub fn sub(&self, rhs: &OpMatrix) -> Result<OpMatrix> {
        self.same_tags(rhs)?;
        Ok(Self { entries: &self.entries - &rhs.entries, ..self.clone_tags() })
    }

    pub fn scale(&self, c: C64) -> OpMatrix {
        Self { entries: self.entries.map(|x| x * c), ..self.clone_tags() }
    }

    /// Conjugate transpose with swapped tags.
    pub fn adjoint(&self) -> OpMatrix {
        Self { domain: self.codomain, codomain: self.domain, entries: self.entries.adjoint() }
    }

    pub fn apply(&self, x: &TaggedVector) -> Result<TaggedVector> {
        if x.space != self.domain {
            return Err(Error::TagMismatch(format!("apply {:?} to {:?}", self.domain, x.space)));
        }
        Ok(TaggedVector { space: self.codomain, coords: &self.entries * &x.coords })
    }

    pub fn norm(&self) -> f64 {
        op_norm(self)
    }

    fn same_tags(&self, rhs: &OpMatrix) -> Result<()> {
        if self.domain != rhs.domain || self.codomain != rhs.codomain {
            return Err(Error::TagMismatch(format!(
                "{:?}->{:?} vs {:?}->{:?}",
                self.domain, self.codomain, rhs.domain, rhs.codomain
            )));
        }
        Ok(())
    }

    fn clone_tags(&self) -> Self {
        Self { domain: self.domain, codomain: self.codomain, entries: DMatrix::zeros(0, 0) }
    }
}

/// Frobenius norm of `a - b` over a block of rows and columns.
pub fn block_residual(a: &DMatrix<C64>, b: &DMatrix<C64>, rows: Range<usize>, cols: Range<usize>) -> f64 {
    let mut s = 0.0;
    for j in rows {
        for k in cols.clone() {
            s += (a[(j, k)] - b[(j, k)]).norm_sqr();
        }
    }
    s.sqrt()
}

/// `T_f` on `Hardy(n)`: entry `(j, k) = f_{j-k}`.
pub fn toeplitz(f: &LaurentSeries, n: usize) -> OpMatrix {
    let t = SpaceTag::Hardy { n };
    OpMatrix::build(t, t, |j, k| f.coeff(j as i64 - k as i64))
}

/// `H_f : Hardy(n) -> CoHardy(m)`: row `w^-j`, column `w^k` holds `f_{-j-k}`.
pub fn hankel(f: &LaurentSeries, n: usize, m: usize) -> OpMatrix {
    OpMatrix::build(SpaceTag::Hardy { n }, SpaceTag::CoHardy { m }, |i, k| f.coeff(-(i as i64 + 1) - k as i64))
}

/// `S_f` on `CoHardy(m)`: column `w^-k` holds `Q(f w^-k)`.
pub fn s_op(f: &LaurentSeries, m: usize) -> OpMatrix {
    let t = SpaceTag::CoHardy { m };
    OpMatrix::build(t, t, |i, k| f.coeff(k as i64 - i as i64))
}

/// `U : Hardy(n) -> CoHardy(m)`, `w^k -> w^{-k-1}`.
pub fn u_matrix(n: usize, m: usize) -> OpMatrix {
    OpMatrix::build(SpaceTag::Hardy { n }, SpaceTag::CoHardy { m }, |i, k| {
        if i == k {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `x ⊗ y : f -> <f, y> x`.
pub fn rank_one(x: &TaggedVector, y: &TaggedVector) -> OpMatrix {
    OpMatrix { domain: y.space, codomain: x.space, entries: &x.coords * y.coords.adjoint() }
}

/// Largest singular value.
pub fn op_norm(a: &OpMatrix) -> f64 {
    matrix_norm(&a.entries)
}

pub fn matrix_norm(a: &DMatrix<C64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().iter().fold(0.0, |m, s| m.max(*s))
}

/// Matrix of `V^{-1} A V`. `V` flips `w^k <-> w^{-k-1}` and conjugates, so on
/// coordinates the result is the entrywise conjugate with flipped tags.
pub fn v_conjugate(a: &OpMatrix) -> Result<OpMatrix> {
    Ok(OpMatrix { domain: a.domain.flipped()?, codomain: a.codomain.flipped()?, entries: a.entries.map(|x| x.conj()) })
}

/// Antilinear `V` on coordinates: conjugation with the flipped tag.
pub fn apply_v(x: &TaggedVector) -> Result<TaggedVector> {
    Ok(TaggedVector { space: x.space.flipped()?, coords: x.coords.map(|c| c.conj()) })
}

/// `A^theta_g` in the model basis: entry `(j, k) = <g e_k, e_j>`.
pub fn tto(g: &LaurentSeries, basis: &ModelBasis) -> OpMatrix {
    let t = SpaceTag::model(basis);
    let images: Vec<LaurentSeries> = basis.vectors().iter().map(|e| g * e).collect();
    OpMatrix::build(t, t, |j, k| images[k].inner(&basis.vectors()[j]))
}

/// Coordinates of `(I - P_theta) h = Qh + theta P(conj(theta) h)` in `ModelPerp`.
pub fn perp_coordinates(h: &LaurentSeries, basis: &ModelBasis, n: usize, m: usize) -> DVector<C64> {
    let analytic = n.saturating_sub(basis.dim());
    let theta = basis.theta_to(h.max_index().max(0) as usize);
    let a = (&theta.conj() * h).truncate(0, analytic as i64);
    DVector::from_fn(
        analytic + m,
        |r, _| if r < analytic { a.coeff(r as i64) } else { h.coeff(-((r - analytic) as i64) - 1) },
    )
}

/// `H^theta_f : Model -> ModelPerp(n, m)`, column `k` is `(I - P_theta)(f e_k)`.
pub fn tho(f: &LaurentSeries, basis: &ModelBasis, n: usize, m: usize) -> OpMatrix {
    let codomain = SpaceTag::model_perp(basis, n, m);
    let cols: Vec<DVector<C64>> = basis.vectors().iter().map(|e| perp_coordinates(&(f * e), basis, n, m)).collect();
    OpMatrix::build(SpaceTag::model(basis), codomain, |r, k| cols[k][r])
}

/// Outcome of one finite-section identity check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub residual: f64,
    pub budget: f64,
}

impl IdentityCheck {
    pub fn new(name: impl Into<String>, residual: f64, budget: f64) -> Self {
        Self { name: name.into(), residual, budget }
    }

    pub fn passed(&self) -> bool {
        self.residual <= self.budget
    }
}

#[derive(Serialize)]
struct MatrixJson<'a> {
    domain: &'a SpaceTag,
    codomain: &'a SpaceTag,
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for OpMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut entries = Vec::with_capacity(self.rows() * self.cols());
        for j in 0..self.rows() {
            for k in 0..self.cols() {
                let x = self.entries[(j, k)];
                entries.push([x.re, x.im]);
            }
        }
        MatrixJson { domain: &self.domain, codomain: &self.codomain, rows: self.rows(), cols: self.cols(), entries }
            .serialize(s)
    }
}
