//! Finitely supported Laurent series on the unit circle.
//!
//! A [`LaurentSeries`] stores the Fourier coefficients of a function on the
//! circle over a contiguous index window. Arithmetic is exact convolution;
//! truncated expansions of rational functions carry a geometric `tail_bound`
//! (an l1 bound on the discarded coefficients) so that downstream checks can
//! budget for finite-section error.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Largest coefficient window a single series may occupy.
pub const MAX_SPAN: usize = 1 << 24;

const CIRCLE_TOL: f64 = 1e-12;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Clone)]
pub struct LaurentSeries {
    min_index: i64,
    coeffs: Vec<C64>,
    tail_bound: f64,
    truncation_warning: bool,
}

impl LaurentSeries {
    pub fn new(min_index: i64, coeffs: Vec<C64>) -> Self {
        Self { min_index, coeffs, tail_bound: 0.0, truncation_warning: false }
    }

    pub fn zero() -> Self {
        Self::new(0, Vec::new())
    }

    pub fn constant(c: C64) -> Self {
        Self::new(0, vec![c])
    }

    /// `c * w^k`.
    pub fn monomial(k: i64, c: C64) -> Self {
        Self::new(k, vec![c])
    }

    /// Series with coefficient `f(n)` for `lo <= n <= hi`.
    pub fn from_fn(lo: i64, hi: i64, f: impl FnMut(i64) -> C64) -> Self {
        if hi < lo {
            return Self::zero();
        }
        Self::new(lo, (lo..=hi).map(f).collect())
    }

    pub fn min_index(&self) -> i64 {
        self.min_index
    }

    /// Largest stored index; `min_index - 1` when empty.
    pub fn max_index(&self) -> i64 {
        self.min_index + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, n: i64) -> C64 {
        let k = n - self.min_index;
        if k < 0 || k >= self.coeffs.len() as i64 {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[k as usize]
        }
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn with_tail_bound(mut self, tail: f64) -> Self {
        self.tail_bound = tail;
        self
    }

    pub fn truncation_warning(&self) -> bool {
        self.truncation_warning
    }

    pub fn with_truncation_warning(mut self, flag: bool) -> Self {
        self.truncation_warning = flag;
        self
    }

    /// Coefficients over `lo..=hi`, zero padded.
    pub fn window(&self, lo: i64, hi: i64) -> Vec<C64> {
        (lo..=hi).map(|n| self.coeff(n)).collect()
    }

    /// Drops exact leading and trailing zeros.
    pub fn trimmed(&self) -> Self {
        let zero = C64::new(0.0, 0.0);
        let first = self.coeffs.iter().position(|c| *c != zero);
        let Some(first) = first else {
            return Self::zero().with_tail_bound(self.tail_bound);
        };
        let last = self.coeffs.iter().rposition(|c| *c != zero).unwrap_or(first);
        Self {
            min_index: self.min_index + first as i64,
            coeffs: self.coeffs[first..=last].to_vec(),
            tail_bound: self.tail_bound,
            truncation_warning: self.truncation_warning,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm_sqr() == 0.0)
    }

    pub fn is_analytic(&self) -> bool {
        (self.min_index..0).all(|n| self.coeff(n).norm_sqr() == 0.0)
    }

    /// Exact convolution. Fails when the result window exceeds [`MAX_SPAN`].
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.is_empty() || other.is_empty() {
            return Ok(Self::zero().with_tail_bound(self.mixed_tail(other)));
        }
        let span = self.len() + other.len() - 1;
        if span > MAX_SPAN {
            return Err(Error::Oversized { span, cap: MAX_SPAN });
        }
        let mut out = vec![C64::new(0.0, 0.0); span];
        let (short, long) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        for (i, &a) in short.coeffs.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for (o, &b) in out[i..i + long.len()].iter_mut().zip(&long.coeffs) {
                *o += a * b;
            }
        }
        let mut r = Self::new(self.min_index + other.min_index, out);
        r.tail_bound = self.mixed_tail(other);
        r.truncation_warning = self.truncation_warning || other.truncation_warning;
        Ok(r)
    }

    fn mixed_tail(&self, other: &Self) -> f64 {
        self.tail_bound * other.l1_norm() + other.tail_bound * self.l1_norm() + self.tail_bound * other.tail_bound
    }

    /// Coefficient `n` of the result is the conjugate of coefficient `-n`.
    pub fn conj(&self) -> Self {
        let coeffs = self.coeffs.iter().rev().map(|c| c.conj()).collect();
        Self { min_index: -self.max_index(), coeffs, ..self.clone_meta() }
    }

    fn clone_meta(&self) -> Self {
        Self {
            min_index: 0,
            coeffs: Vec::new(),
            tail_bound: self.tail_bound,
            truncation_warning: self.truncation_warning,
        }
    }

    /// Restriction to indices `lo..=hi`; the discarded l1 mass joins the tail bound.
    pub fn truncate(&self, lo: i64, hi: i64) -> Self {
        let lo = lo.max(self.min_index);
        let hi = hi.min(self.max_index());
        let kept: f64 = if hi >= lo { (lo..=hi).map(|n| self.coeff(n).norm()).sum() } else { 0.0 };
        let dropped = self.l1_norm() - kept;
        let mut r = if hi < lo { Self::zero() } else { Self::from_fn(lo, hi, |n| self.coeff(n)) };
        r.tail_bound = self.tail_bound + dropped.max(0.0);
        r.truncation_warning = self.truncation_warning;
        r
    }

    /// Riesz projection onto indices `>= 0`.
    pub fn project_p(&self) -> Self {
        let mut r = self.truncate(0, self.max_index().max(0));
        r.tail_bound = self.tail_bound;
        r
    }

    /// Complementary projection onto indices `<= -1`.
    pub fn project_q(&self) -> Self {
        let mut r = self.truncate(self.min_index.min(-1), -1);
        r.tail_bound = self.tail_bound;
        r
    }

    /// Multiplication by `w^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self { min_index: self.min_index + k, coeffs: self.coeffs.clone(), ..self.clone_meta() }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            min_index: self.min_index,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            tail_bound: self.tail_bound * c.norm(),
            truncation_warning: self.truncation_warning,
        }
    }

    pub fn mean(&self) -> C64 {
        self.coeff(0)
    }

    /// L2 inner product, conjugate linear in `other`.
    pub fn inner(&self, other: &Self) -> C64 {
        let lo = self.min_index.max(other.min_index);
        let hi = self.max_index().min(other.max_index());
        let mut s = C64::new(0.0, 0.0);
        for n in lo..=hi {
            s += self.coeff(n) * other.coeff(n).conj();
        }
        s
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Sum of coefficient moduli; bounds the sup norm on the circle.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// Point evaluation. Series with negative indices need `|p| = 1`; analytic
    /// series accept `|p| <= 1`.
    pub fn evaluate(&self, p: C64) -> Result<C64> {
        let r = p.norm();
        if self.min_index < 0 && (r - 1.0).abs() > CIRCLE_TOL {
            return Err(Error::Domain(format!("evaluation at |p| = {r} needs an analytic series")));
        }
        if r > 1.0 + CIRCLE_TOL {
            return Err(Error::Domain(format!("evaluation outside the closed disk (|p| = {r})")));
        }
        Ok(self.evaluate_unchecked(p))
    }

    /// Evaluation without domain checks (Horner in `p` and `1/p`).
    pub fn evaluate_unchecked(&self, p: C64) -> C64 {
        let mut pos = C64::new(0.0, 0.0);
        for n in (0.max(self.min_index)..=self.max_index()).rev() {
            pos = pos * p + self.coeff(n);
        }
        if self.min_index >= 0 {
            return pos * p.powi(self.min_index.min(i32::MAX as i64) as i32);
        }
        let inv = p.inv();
        let mut neg = C64::new(0.0, 0.0);
        for n in self.min_index..=(-1).min(self.max_index()) {
            neg = (neg + self.coeff(n)) * inv;
        }
        pos + neg
    }

    /// `(Uf)_m = f_{-m-1}`.
    pub fn apply_u(&self) -> Self {
        let coeffs = self.coeffs.iter().rev().copied().collect();
        Self { min_index: -self.max_index() - 1, coeffs, ..self.clone_meta() }
    }

    /// `(Vf)_m = conj(f_{-m-1})`; antilinear involution.
    pub fn apply_v(&self) -> Self {
        let coeffs = self.coeffs.iter().rev().map(|c| c.conj()).collect();
        Self { min_index: -self.max_index() - 1, coeffs, ..self.clone_meta() }
    }

    /// Values at the `count` equispaced circle points `exp(2 pi i k / count)`.
    pub fn sample(&self, count: usize) -> Result<Vec<C64>> {
        if count == 0 || self.len() > count {
            return Err(Error::Domain(format!("{} coefficients do not fit {} samples", self.len(), count)));
        }
        let mut buf = vec![C64::new(0.0, 0.0); count];
        for (i, c) in self.coeffs.iter().enumerate() {
            let n = self.min_index + i as i64;
            buf[n.rem_euclid(count as i64) as usize] += c;
        }
        FftPlanner::new().plan_fft_inverse(count).process(&mut buf);
        Ok(buf)
    }

    /// Inverse of [`sample`](Self::sample); coefficients land on `-count/2 ..= count/2 - 1`.
    pub fn from_samples(samples: &[C64]) -> Self {
        let count = samples.len();
        if count == 0 {
            return Self::zero();
        }
        let mut buf = samples.to_vec();
        FftPlanner::new().plan_fft_forward(count).process(&mut buf);
        let half = (count / 2) as i64;
        let scale = 1.0 / count as f64;
        Self::from_fn(-half, count as i64 - half - 1, |n| buf[n.rem_euclid(count as i64) as usize] * scale)
    }

    /// Largest modulus over `count` circle samples.
    pub fn sup_estimate(&self, count: usize) -> f64 {
        let count = count.max(self.len().next_power_of_two());
        self.sample(count).map(|v| v.iter().fold(0.0_f64, |m, x| m.max(x.norm()))).unwrap_or_else(|_| self.l1_norm())
    }
}

/// Inner product by circle quadrature with `count` nodes.
pub fn quadrature_inner(a: &LaurentSeries, b: &LaurentSeries, count: usize) -> Result<C64> {
    let sa = a.sample(count)?;
    let sb = b.sample(count)?;
    let s: C64 = sa.iter().zip(&sb).map(|(x, y)| x * y.conj()).sum();
    Ok(s / count as f64)
}

impl PartialEq for LaurentSeries {
    fn eq(&self, other: &Self) -> bool {
        let lo = self.min_index.min(other.min_index);
        let hi = self.max_index().max(other.max_index());
        (lo..=hi).all(|n| self.coeff(n) == other.coeff(n))
    }
}

impl fmt::Debug for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LaurentSeries")
            .field("min_index", &self.min_index)
            .field("coeffs", &self.coeffs)
            .field("tail_bound", &self.tail_bound)
            .finish()
    }
}

impl Add for &LaurentSeries {
    type Output = LaurentSeries;
    fn add(self, rhs: &LaurentSeries) -> LaurentSeries {
        if self.is_empty() {
            return rhs.clone().with_tail_bound(rhs.tail_bound + self.tail_bound);
        }
        if rhs.is_empty() {
            return self.clone().with_tail_bound(rhs.tail_bound + self.tail_bound);
        }
        let lo = self.min_index.min(rhs.min_index);
        let hi = self.max_index().max(rhs.max_index());
        let mut r = LaurentSeries::from_fn(lo, hi, |n| self.coeff(n) + rhs.coeff(n));
        r.tail_bound = self.tail_bound + rhs.tail_bound;
        r.truncation_warning = self.truncation_warning || rhs.truncation_warning;
        r
    }
}

impl Neg for &LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Sub for &LaurentSeries {
    type Output = LaurentSeries;
    fn sub(self, rhs: &LaurentSeries) -> LaurentSeries {
        self + &(-rhs)
    }
}

/// Panics when the product window exceeds [`MAX_SPAN`]; use
/// [`LaurentSeries::checked_mul`] on untrusted input.
impl Mul for &LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, rhs: &LaurentSeries) -> LaurentSeries {
        self.checked_mul(rhs).expect("series product exceeds the span cap")
    }
}

impl Mul<C64> for &LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, rhs: C64) -> LaurentSeries {
        self.scale(rhs)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<LaurentSeries> for LaurentSeries {
            type Output = LaurentSeries;
            fn $m(self, rhs: LaurentSeries) -> LaurentSeries {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&LaurentSeries> for LaurentSeries {
            type Output = LaurentSeries;
            fn $m(self, rhs: &LaurentSeries) -> LaurentSeries {
                (&self).$m(rhs)
            }
        }
        impl $tr<LaurentSeries> for &LaurentSeries {
            type Output = LaurentSeries;
            fn $m(self, rhs: LaurentSeries) -> LaurentSeries {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Mul<C64> for LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, rhs: C64) -> LaurentSeries {
        self.scale(rhs)
    }
}

impl Neg for LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        -&self
    }
}

impl AddAssign<&LaurentSeries> for LaurentSeries {
    fn add_assign(&mut self, rhs: &LaurentSeries) {
        *self = &*self + rhs;
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    min_index: i64,
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for LaurentSeries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesJson { min_index: self.min_index, coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentSeries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = SeriesJson::deserialize(d)?;
        if raw.coeffs.len() > MAX_SPAN {
            return Err(serde::de::Error::custom(format!("coefficient window exceeds {MAX_SPAN}")));
        }
        if raw.coeffs.iter().flatten().any(|x| !x.is_finite()) {
            return Err(serde::de::Error::custom("non-finite coefficient"));
        }
        Ok(Self::new(raw.min_index, raw.coeffs.into_iter().map(|[re, im]| C64::new(re, im)).collect()))
    }
}

/// A point of the open unit disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskPoint(C64);

impl DiskPoint {
    pub fn new(z: C64) -> Result<Self> {
        if z.norm() < 1.0 && z.is_finite() {
            Ok(Self(z))
        } else {
            Err(Error::OutsideDisk(format!("{z}")))
        }
    }

    pub fn polar(r: f64, angle: f64) -> Result<Self> {
        Self::new(C64::from_polar(r, angle))
    }

    pub fn value(&self) -> C64 {
        self.0
    }

    pub fn modulus(&self) -> f64 {
        self.0.norm()
    }

    pub fn conj(&self) -> Self {
        Self(self.0.conj())
    }
}

/// Truncation orders and tolerances shared by every finite-section computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationConfig {
    /// Analytic order: coefficients `0..=n`.
    pub n: usize,
    /// Coanalytic order: coefficients `-1..=-m`.
    pub m: usize,
    pub sample_count: usize,
    pub zero_tol: f64,
    pub residual_tol: f64,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self { n: 256, m: 256, sample_count: 2048, zero_tol: 1e-8, residual_tol: 1e-6 }
    }
}

impl TruncationConfig {
    /// Config with the given orders and the smallest admissible power-of-two sample count.
    pub fn with_orders(n: usize, m: usize) -> Self {
        Self { n, m, sample_count: (4 * (n + m)).next_power_of_two(), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.m < 1 {
            return Err(Error::Config("N and M must be at least 1".into()));
        }
        if self.sample_count < 4 * (self.n + self.m) {
            return Err(Error::Config(format!(
                "sample_count {} below 4(N+M) = {}",
                self.sample_count,
                4 * (self.n + self.m)
            )));
        }
        if !(self.zero_tol >= 0.0 && self.residual_tol >= 0.0 && self.zero_tol < self.residual_tol) {
            return Err(Error::Config("tolerances must satisfy 0 <= zero_tol < residual_tol".into()));
        }
        Ok(())
    }
}

/// `N (1 - |z|) >= 10`.
pub fn kernel_truncation_adequate(z: DiskPoint, n: usize) -> bool {
    n as f64 * (1.0 - z.modulus()) >= 10.0
}

/// Normalized reproducing kernel `k_z(w) = sqrt(1-|z|^2) / (1 - conj(z) w)` to order `n`.
pub fn cauchy_kernel(z: DiskPoint, n: usize) -> LaurentSeries {
    let r = z.modulus();
    let s = (1.0 - r * r).sqrt();
    let zb = z.value().conj();
    let mut c = C64::new(s, 0.0);
    let coeffs = (0..=n)
        .map(|_| {
            let v = c;
            c *= zb;
            v
        })
        .collect();
    let tail = s * r.powi(n as i32 + 1) / (1.0 - r);
    LaurentSeries::new(0, coeffs).with_tail_bound(tail).with_truncation_warning(!kernel_truncation_adequate(z, n))
}

/// Disk automorphism `phi_z(w) = (z - w) / (1 - conj(z) w)` to order `n`.
pub fn mobius_symbol(z: DiskPoint, n: usize) -> LaurentSeries {
    let r = z.modulus();
    let zb = z.value().conj();
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(z.value());
    let mut c = C64::new(-(1.0 - r * r), 0.0);
    for _ in 1..=n {
        coeffs.push(c);
        c *= zb;
    }
    let tail = (1.0 + r) * r.powi(n as i32);
    LaurentSeries::new(0, coeffs).with_tail_bound(tail).with_truncation_warning(!kernel_truncation_adequate(z, n))
}

/// Closed-form value of `phi_z(w)`.
pub fn mobius(z: C64, w: C64) -> C64 {
    (z - w) / (1.0 - z.conj() * w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn zbar() -> LaurentSeries {
        LaurentSeries::monomial(-1, cx(1.0, 0.0))
    }

    fn w() -> LaurentSeries {
        LaurentSeries::monomial(1, cx(1.0, 0.0))
    }

    fn pseudo_random(lo: i64, hi: i64, seed: u64) -> LaurentSeries {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        LaurentSeries::from_fn(lo, hi, |_| cx(next(), next()))
    }

    #[test]
    fn product_of_conjugate_pair() {
        let p = (zbar() + w()) * w();
        assert_eq!(p, LaurentSeries::monomial(2, cx(1.0, 0.0)) + LaurentSeries::constant(cx(1.0, 0.0)));
        assert_eq!(p.min_index(), 0);
        assert_eq!(p.max_index(), 2);
    }

    #[test]
    fn multiply_by_one_is_identity() {
        let f = pseudo_random(-5, 7, 3);
        assert_eq!(&f * &LaurentSeries::constant(cx(1.0, 0.0)), f);
    }

    #[test]
    fn product_matches_fft_oracle() {
        let a = pseudo_random(-8, 8, 11);
        let b = pseudo_random(-8, 8, 12);
        let count = 64;
        let prod: Vec<C64> =
            a.sample(count).unwrap().iter().zip(b.sample(count).unwrap()).map(|(x, y)| x * y).collect();
        let oracle = LaurentSeries::from_samples(&prod);
        let direct = &a * &b;
        for n in -16..=16 {
            assert!((direct.coeff(n) - oracle.coeff(n)).norm() < 1e-12, "index {n}");
        }
    }

    #[test]
    fn conjugation() {
        assert_eq!(w().conj(), zbar());
        assert_eq!(LaurentSeries::constant(cx(1.0, 2.0)).conj(), LaurentSeries::constant(cx(1.0, -2.0)));
        let f = pseudo_random(-3, 9, 5);
        assert_eq!(f.conj().conj(), f);
        assert_eq!(f.conj().coeff(-4), f.coeff(4).conj());
    }

    #[test]
    fn projections() {
        let f = zbar() + LaurentSeries::constant(cx(1.0, 0.0)) + w();
        assert_eq!(f.project_p(), LaurentSeries::constant(cx(1.0, 0.0)) + w());
        assert_eq!(f.project_q(), zbar());
        let g = pseudo_random(0, 6, 2);
        assert_eq!(g.project_p(), g);
        let h = pseudo_random(-6, 6, 9);
        assert_eq!(h.project_p() + h.project_q(), h);
        assert_eq!(h.project_p().inner(&h.project_q()), cx(0.0, 0.0));
    }

    #[test]
    fn inner_norm_evaluate() {
        assert_eq!(w().inner(&w()), cx(1.0, 0.0));
        assert_eq!(w().inner(&zbar()), cx(0.0, 0.0));
        let f = LaurentSeries::constant(cx(1.0, 0.0)) + w();
        assert!((f.evaluate(cx(1.0, 0.0)).unwrap() - cx(2.0, 0.0)).norm() < 1e-15);
        assert!(zbar().evaluate(cx(0.5, 0.0)).is_err());
        assert!(f.evaluate(cx(0.5, 0.0)).is_ok());
        assert!(f.evaluate(cx(1.5, 0.0)).is_err());
        let g = pseudo_random(-4, 4, 8);
        let c = cx(0.3, -0.7);
        assert!((g.inner(&g.scale(c)) - g.norm_sqr() * c.conj()).norm() < 1e-12);
    }

    #[test]
    fn evaluate_negative_powers_on_circle() {
        let p = C64::from_polar(1.0, 0.7);
        let v = zbar().scale(cx(2.0, 0.0)).evaluate(p).unwrap();
        assert!((v - 2.0 * p.conj()).norm() < 1e-14);
    }

    #[test]
    fn parseval_against_quadrature() {
        let f = pseudo_random(-20, 20, 21);
        let g = pseudo_random(-20, 20, 22);
        let q = quadrature_inner(&f, &g, 256).unwrap();
        assert!((q - f.inner(&g)).norm() <= 1e-10 * f.norm() * g.norm());
        let qn = quadrature_inner(&f, &f, 256).unwrap().re;
        assert!((qn - f.norm_sqr()).abs() <= 1e-10 * f.norm_sqr());
    }

    #[test]
    fn cauchy_kernel_basics() {
        let k0 = cauchy_kernel(DiskPoint::new(cx(0.0, 0.0)).unwrap(), 16);
        assert_eq!(k0.trimmed(), LaurentSeries::constant(cx(1.0, 0.0)));
        let z = DiskPoint::new(cx(0.5, 0.0)).unwrap();
        let k = cauchy_kernel(z, 64);
        let bound = 0.5f64.powi(2 * 65) / (1.0 - 0.25);
        assert!((k.norm() - 1.0).abs() <= bound + 1e-15);
    }

    #[test]
    fn cauchy_kernel_reproduces() {
        let f = pseudo_random(0, 12, 4);
        let z = DiskPoint::new(cx(0.3, 0.0)).unwrap();
        let lhs = f.inner(&cauchy_kernel(z, 40));
        let rhs = f.evaluate(z.value()).unwrap() * (1.0 - 0.09f64).sqrt();
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn kernel_truncation_warning() {
        let z = DiskPoint::new(cx(0.95, 0.0)).unwrap();
        assert!(cauchy_kernel(z, 64).truncation_warning());
        assert!(!cauchy_kernel(z, 256).truncation_warning());
    }

    #[test]
    fn mobius_symbol_basics() {
        let m0 = mobius_symbol(DiskPoint::new(cx(0.0, 0.0)).unwrap(), 8).trimmed();
        assert_eq!(m0, LaurentSeries::monomial(1, cx(-1.0, 0.0)));
        let z = DiskPoint::new(cx(0.4, 0.2)).unwrap();
        let m = mobius_symbol(z, 128);
        assert!(m.evaluate(z.value()).unwrap().norm() < 1e-12);
        let z = DiskPoint::new(cx(0.5, 0.0)).unwrap();
        let m = mobius_symbol(z, 128);
        for v in m.sample(512).unwrap() {
            assert!((v.norm() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn mobius_involution_pointwise() {
        let z = DiskPoint::new(cx(-0.3, 0.45)).unwrap();
        let m = mobius_symbol(z, 200);
        for k in 0..32 {
            let w = C64::from_polar(1.0, k as f64 * 0.196);
            let img = mobius(z.value(), w);
            let back = m.evaluate_unchecked(img);
            assert!((back - w).norm() < 1e-10 + m.tail_bound());
        }
    }

    #[test]
    fn u_and_v_maps() {
        let one = LaurentSeries::constant(cx(1.0, 0.0));
        assert_eq!(one.apply_u(), zbar());
        assert_eq!(zbar().apply_v(), one);
        assert_eq!(one.apply_v(), zbar());
        let f = pseudo_random(-5, 8, 13);
        assert!((f.apply_u().norm() - f.norm()).abs() < 1e-14);
        assert!((f.apply_v().norm() - f.norm()).abs() < 1e-14);
        assert_eq!(f.apply_v().apply_v(), f);
        assert_eq!(f.apply_u().coeff(3), f.coeff(-4));
    }

    #[test]
    fn oversized_product_is_rejected() {
        let a = LaurentSeries::new(0, vec![cx(1.0, 0.0); MAX_SPAN / 2 + 2]);
        assert!(matches!(a.checked_mul(&a), Err(Error::Oversized { .. })));
    }

    #[test]
    fn disk_point_rejects_boundary() {
        assert!(DiskPoint::new(cx(1.0, 0.0)).is_err());
        assert!(DiskPoint::new(cx(0.6, 0.8)).is_err());
        assert!(DiskPoint::new(cx(0.6, 0.79)).is_ok());
    }

    #[test]
    fn config_validation() {
        assert!(TruncationConfig::default().validate().is_ok());
        assert!(TruncationConfig { n: 0, ..Default::default() }.validate().is_err());
        assert!(TruncationConfig { sample_count: 100, ..Default::default() }.validate().is_err());
        assert!(TruncationConfig { zero_tol: 1.0, ..Default::default() }.validate().is_err());
        assert_eq!(TruncationConfig::with_orders(128, 128).sample_count, 1024);
    }

    #[test]
    fn json_round_trip() {
        let f = pseudo_random(-3, 4, 1);
        let s = serde_json::to_string(&f).unwrap();
        let g: LaurentSeries = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
        let v: LaurentSeries = serde_json::from_str(r#"{"min_index":-1,"coeffs":[[1,0],[0,2]]}"#).unwrap();
        assert_eq!(v.coeff(0), cx(0.0, 2.0));
    }

    #[test]
    fn truncate_tracks_dropped_mass() {
        let f = LaurentSeries::from_fn(0, 4, |_| cx(1.0, 0.0));
        let t = f.truncate(0, 2);
        assert_eq!(t.max_index(), 2);
        assert!((t.tail_bound() - 2.0).abs() < 1e-15);
    }
}
