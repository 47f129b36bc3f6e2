//! Finite Blaschke products.
//!
//! The factor for a zero `a != 0` is `(|a|/a)(a - w)/(1 - conj(a) w)`, and the
//! factor for `a = 0` is `w`. Multiplicity is repetition.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::harmonic::{DiskPoint, LaurentSeries, C64};

const NEAR_BOUNDARY: f64 = 0.95;

#[derive(Clone, Debug, PartialEq)]
pub struct BlaschkeProduct {
    zeros: Vec<DiskPoint>,
    constant: C64,
}

/// Value of the normalized factor for the zero `a` at `w`.
pub fn factor(a: C64, w: C64) -> C64 {
    if a.norm_sqr() == 0.0 {
        w
    } else {
        (a.norm() / a) * (a - w) / (1.0 - a.conj() * w)
    }
}

impl BlaschkeProduct {
    pub fn new(zeros: Vec<C64>, constant: C64) -> Result<Self> {
        if (constant.norm() - 1.0).abs() > 1e-12 || !constant.is_finite() {
            return Err(Error::Blaschke(format!("constant {constant} is not unimodular")));
        }
        let zeros = zeros
            .into_iter()
            .map(|z| DiskPoint::new(z).map_err(|_| Error::Blaschke(format!("zero {z} outside the open disk"))))
            .collect::<Result<Vec<_>>>()?;
        let theta = Self { zeros, constant };
        let dev = theta.inner_deviation(64);
        if dev > 1e-10 {
            return Err(Error::Blaschke(format!("|theta| deviates from 1 by {dev:e} on the circle")));
        }
        Ok(theta)
    }

    /// Product with constant 1.
    pub fn from_zeros(zeros: &[C64]) -> Result<Self> {
        Self::new(zeros.to_vec(), C64::new(1.0, 0.0))
    }

    /// `w^d`.
    pub fn monomial(d: usize) -> Self {
        Self { zeros: vec![DiskPoint::new(C64::new(0.0, 0.0)).unwrap(); d], constant: C64::new(1.0, 0.0) }
    }

    pub fn zeros(&self) -> Vec<C64> {
        self.zeros.iter().map(|z| z.value()).collect()
    }

    pub fn constant(&self) -> C64 {
        self.constant
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn max_zero_modulus(&self) -> f64 {
        self.zeros.iter().map(|z| z.modulus()).fold(0.0, f64::max)
    }

    /// Zeros beyond modulus 0.95 make Taylor tails decay slowly.
    pub fn near_boundary(&self) -> bool {
        self.max_zero_modulus() > NEAR_BOUNDARY
    }

    pub fn evaluate(&self, w: C64) -> Result<C64> {
        if w.norm() > 1.0 + 1e-12 {
            return Err(Error::Domain(format!("Blaschke evaluation at |w| = {} > 1", w.norm())));
        }
        Ok(self.evaluate_unchecked(w))
    }

    /// Evaluation anywhere off the poles.
    pub fn evaluate_unchecked(&self, w: C64) -> C64 {
        self.zeros.iter().fold(self.constant, |acc, a| acc * factor(a.value(), w))
    }

    pub fn at_zero(&self) -> C64 {
        self.evaluate_unchecked(C64::new(0.0, 0.0))
    }

    /// Largest `||theta| - 1|` over `count` circle samples.
    pub fn inner_deviation(&self, count: usize) -> f64 {
        (0..count)
            .map(|k| {
                let w = C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / count as f64);
                (self.evaluate_unchecked(w).norm() - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Taylor coefficients `0..=n` with a geometric l1 tail estimate.
    pub fn taylor(&self, n: usize) -> LaurentSeries {
        let ext = 2 * n + 64;
        let mut c = vec![C64::new(0.0, 0.0); ext + 1];
        c[0] = self.constant;
        for a in &self.zeros {
            apply_factor(&mut c, a.value());
        }
        let rho = self.max_zero_modulus();
        let mut tail: f64 = c[n + 1..].iter().map(|x| x.norm()).sum();
        if rho > 0.0 {
            tail += c[ext].norm() * rho / (1.0 - rho);
        }
        c.truncate(n + 1);
        LaurentSeries::new(0, c).with_tail_bound(tail).with_truncation_warning(self.near_boundary())
    }

    /// Solutions of `theta(w) = value` in the plane (poles excluded).
    pub fn preimages(&self, value: C64) -> Vec<C64> {
        let one = vec![C64::new(1.0, 0.0)];
        let mut num = one.clone();
        let mut den = one;
        for a in &self.zeros {
            let a = a.value();
            if a.norm_sqr() == 0.0 {
                num = poly_mul(&num, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
            } else {
                let u = a.norm() / a;
                num = poly_mul(&num, &[u * a, -u]);
            }
            den = poly_mul(&den, &[C64::new(1.0, 0.0), -a.conj()]);
        }
        let p: Vec<C64> = num.iter().zip(&den).map(|(x, y)| self.constant * x - value * y).collect();
        poly_roots(&p)
    }

    /// Splits into the product of the first `k` factors (carrying the constant) and the rest.
    pub fn split(&self, k: usize) -> (Self, Self) {
        let k = k.min(self.degree());
        (
            Self { zeros: self.zeros[..k].to_vec(), constant: self.constant },
            Self { zeros: self.zeros[k..].to_vec(), constant: C64::new(1.0, 0.0) },
        )
    }

    /// Stable identifier derived from the zeros and constant.
    pub fn id(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |x: f64| {
            for b in x.to_bits().to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        for z in &self.zeros {
            eat(z.value().re);
            eat(z.value().im);
        }
        eat(self.constant.re);
        eat(self.constant.im);
        h
    }
}

/// In-place multiplication of analytic coefficients by the factor for `a`,
/// truncated to the buffer length.
pub fn apply_factor(c: &mut [C64], a: C64) {
    if a.norm_sqr() == 0.0 {
        c.rotate_right(1);
        c[0] = C64::new(0.0, 0.0);
        return;
    }
    let u = a.norm() / a;
    let ab = a.conj();
    let mut prev_x = C64::new(0.0, 0.0);
    let mut prev_y = C64::new(0.0, 0.0);
    for x in c.iter_mut() {
        let t = a * *x - prev_x;
        prev_x = *x;
        prev_y = t + ab * prev_y;
        *x = prev_y;
    }
    for x in c.iter_mut() {
        *x *= u;
    }
}

/// In-place multiplication by `1 / (1 - conj(a) w)`.
pub fn apply_cauchy(c: &mut [C64], a: C64) {
    let ab = a.conj();
    let mut prev = C64::new(0.0, 0.0);
    for x in c.iter_mut() {
        prev = *x + ab * prev;
        *x = prev;
    }
}

fn poly_mul(p: &[C64], q: &[C64]) -> Vec<C64> {
    let mut r = vec![C64::new(0.0, 0.0); p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            r[i + j] += a * b;
        }
    }
    r
}

/// Roots of `sum p[k] w^k` by Durand-Kerner iteration with Newton polishing.
pub fn poly_roots(p: &[C64]) -> Vec<C64> {
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut p: Vec<C64> = p.to_vec();
    while p.len() > 1 && p.last().is_some_and(|c| c.norm() <= 1e-14 * scale) {
        p.pop();
    }
    let d = p.len().saturating_sub(1);
    if d == 0 {
        return Vec::new();
    }
    let lead = p[d];
    let monic: Vec<C64> = p.iter().map(|c| c / lead).collect();
    let eval = |w: C64| monic.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * w + c);
    let seed = C64::new(0.4, 0.9);
    let mut roots: Vec<C64> = (0..d).map(|k| seed.powi(k as i32)).collect();
    for _ in 0..1000 {
        let mut delta = 0.0_f64;
        for i in 0..d {
            let mut denom = C64::new(1.0, 0.0);
            for j in 0..d {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    let deriv: Vec<C64> = (1..=d).map(|k| monic[k] * k as f64).collect();
    let eval_d = |w: C64| deriv.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * w + c);
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let dv = eval_d(*r);
            if dv.norm() > 0.0 {
                *r -= eval(*r) / dv;
            }
        }
    }
    roots
}

#[derive(Serialize, Deserialize)]
struct BlaschkeJson {
    zeros: Vec<[f64; 2]>,
    constant: [f64; 2],
}

impl Serialize for BlaschkeProduct {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BlaschkeJson {
            zeros: self.zeros.iter().map(|z| [z.value().re, z.value().im]).collect(),
            constant: [self.constant.re, self.constant.im],
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BlaschkeProduct {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BlaschkeJson::deserialize(d)?;
        Self::new(
            raw.zeros.into_iter().map(|[re, im]| C64::new(re, im)).collect(),
            C64::new(raw.constant[0], raw.constant[1]),
        )
        .map_err(serde::de::Error::custom)
    }
}
