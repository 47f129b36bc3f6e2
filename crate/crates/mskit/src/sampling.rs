//! Seeded generators for symbols, inner functions and zero-product instances.
//!
//! Each trial draws from its own ChaCha stream (`seed`, `stream = trial index`),
//! so results do not depend on evaluation order or thread count.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};
use crate::harmonic::{LaurentSeries, C64};
use crate::model_space::{build_tm_basis, project_model, ModelBasis};

pub type TrialRng = ChaCha8Rng;

pub fn trial_rng(seed: u64, stream: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex Gaussian (unit expected modulus squared).
pub fn complex_normal(rng: &mut TrialRng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn unit_complex(rng: &mut TrialRng) -> C64 {
    C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Uniform point of the disk `|z| <= max_modulus`.
pub fn disk_point(rng: &mut TrialRng, max_modulus: f64) -> C64 {
    let r = max_modulus * rng.random::<f64>().sqrt();
    C64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Gaussian coefficients on `lo..=hi`.
pub fn random_trig(rng: &mut TrialRng, lo: i64, hi: i64) -> LaurentSeries {
    LaurentSeries::from_fn(lo, hi, |_| complex_normal(rng))
}

/// Blaschke product with zeros of modulus in `[min_modulus, max_modulus]`
/// and a random unimodular constant.
pub fn random_blaschke(
    rng: &mut TrialRng,
    degree: usize,
    min_modulus: f64,
    max_modulus: f64,
) -> Result<BlaschkeProduct> {
    let zeros = (0..degree)
        .map(|_| {
            let r = rng.random_range(min_modulus..=max_modulus);
            C64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    BlaschkeProduct::new(zeros, unit_complex(rng))
}

/// Gaussian combination of the basis vectors.
pub fn random_model_element(rng: &mut TrialRng, basis: &ModelBasis) -> LaurentSeries {
    let c: Vec<C64> = (0..basis.dim()).map(|_| complex_normal(rng)).collect();
    basis.combine(&c)
}

/// Random model element with its `k0` component removed, so it vanishes at 0.
pub fn random_model_element_at_zero(rng: &mut TrialRng, basis: &ModelBasis) -> LaurentSeries {
    let g = random_model_element(rng, basis);
    let k0 = basis.k0();
    let c = g.coeff(0) / k0.coeff(0);
    let mut h = &g - &k0.scale(c);
    h = LaurentSeries::from_fn(0, basis.n() as i64, |m| if m == 0 { C64::new(0.0, 0.0) } else { h.coeff(m) });
    h
}

/// How a zero-product instance was built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroFamily {
    /// `g` in the ideal.
    GIdeal,
    FConstant,
    Coanalytic,
    /// Condition 4 with `alpha = beta = 0`.
    AlphaBetaZero,
    /// Condition 4 with `alpha = 0`, `beta != 0`.
    BetaOnly,
    /// Condition 4 with `0 < |alpha| < 1`.
    AlphaInside,
    /// Condition 4 with `|alpha| > 1`.
    AlphaOutside,
    /// A constructed instance with random perturbations of `f` and `g`.
    Perturbed,
}

impl ZeroFamily {
    pub const CONSTRUCTED: [ZeroFamily; 7] = [
        ZeroFamily::GIdeal,
        ZeroFamily::FConstant,
        ZeroFamily::Coanalytic,
        ZeroFamily::AlphaBetaZero,
        ZeroFamily::BetaOnly,
        ZeroFamily::AlphaInside,
        ZeroFamily::AlphaOutside,
    ];

    /// The theorem condition the construction targets.
    pub fn condition(&self) -> Option<&'static str> {
        match self {
            ZeroFamily::GIdeal => Some("1"),
            ZeroFamily::FConstant => Some("2"),
            ZeroFamily::Coanalytic => Some("3"),
            ZeroFamily::Perturbed => None,
            _ => Some("4"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ZeroInstance {
    pub family: ZeroFamily,
    pub basis: ModelBasis,
    pub f: LaurentSeries,
    pub g: LaurentSeries,
}

/// Builds one instance of `family` at truncation `n` from the given stream.
pub fn zero_instance(family: ZeroFamily, rng: &mut TrialRng, n: usize) -> Result<ZeroInstance> {
    if family == ZeroFamily::Perturbed {
        let base = ZeroFamily::CONSTRUCTED[rng.random_range(0..ZeroFamily::CONSTRUCTED.len())];
        let inst = zero_instance(base, rng, n)?;
        let ef = rng.random_range(0.05..0.5);
        let eg = rng.random_range(0.05..0.5);
        let f = &inst.f + &random_trig(rng, -3, 3).scale(C64::new(ef, 0.0));
        let g = &inst.g + &random_trig(rng, -3, 3).scale(C64::new(eg, 0.0));
        return Ok(ZeroInstance { family, basis: inst.basis, f, g });
    }
    let degree = rng.random_range(2..=4usize);
    let mut theta = random_blaschke(rng, degree, 0.1, 0.6)?;
    if family == ZeroFamily::AlphaBetaZero {
        let mut zeros = theta.zeros();
        zeros[0] = C64::new(0.0, 0.0);
        theta = BlaschkeProduct::new(zeros, theta.constant())?;
    }
    let basis = build_tm_basis(&theta, n)?;
    let (f, g) = match family {
        ZeroFamily::GIdeal => {
            let th = basis.theta_series();
            let (h, k) = (random_trig(rng, 0, 3), random_trig(rng, 0, 3));
            let g = &(th * &h).truncate(0, n as i64) + &(th * &k).truncate(0, n as i64).conj();
            (random_trig(rng, -3, 3), g)
        }
        ZeroFamily::FConstant => (LaurentSeries::constant(complex_normal(rng)), random_trig(rng, -3, 3)),
        ZeroFamily::Coanalytic => {
            let (b1, _) = theta.split(rng.random_range(1..degree));
            let f = &LaurentSeries::constant(complex_normal(rng)) + &b1.taylor(n).scale(complex_normal(rng));
            (f, basis.vectors()[degree - 1].scale(complex_normal(rng)).conj())
        }
        ZeroFamily::AlphaBetaZero => {
            let (b1, _) = theta.split(rng.random_range(1..degree));
            let g1 = basis.vectors()[degree - 1].scale(complex_normal(rng));
            (coanalytic_plus_constant(rng, &b1, n), g1)
        }
        ZeroFamily::BetaOnly => beta_only(rng, &basis),
        ZeroFamily::AlphaInside => {
            let alpha = C64::from_polar(rng.random_range(0.2..0.6), rng.random_range(0.0..std::f64::consts::TAU));
            alpha_inside(rng, &basis, alpha)?
        }
        ZeroFamily::AlphaOutside => {
            let alpha = C64::from_polar(rng.random_range(1.5..3.0), rng.random_range(0.0..std::f64::consts::TAU));
            alpha_outside(rng, &basis, alpha)?
        }
        ZeroFamily::Perturbed => unreachable!(),
    };
    Ok(ZeroInstance { family, basis, f, g })
}

/// `c0 + conj(c b)`.
fn coanalytic_plus_constant(rng: &mut TrialRng, b: &BlaschkeProduct, n: usize) -> LaurentSeries {
    &LaurentSeries::constant(complex_normal(rng)) + &b.taylor(n).scale(complex_normal(rng)).conj()
}

/// Normalized Cauchy kernel `sqrt(1 - |a|^2) / (1 - conj(a) w)` to order `n`.
fn normalized_kernel(a: C64, n: usize) -> LaurentSeries {
    let s = (1.0 - a.norm_sqr()).sqrt();
    let mut p = C64::new(s, 0.0);
    LaurentSeries::from_fn(0, n as i64, |_| {
        let c = p;
        p *= a.conj();
        c
    })
}

/// `alpha = 0`, `beta = h(0)` with `h = B1 (s e' + t B2)` chosen so that
/// `h - beta` lies in the model space.
fn beta_only(rng: &mut TrialRng, basis: &ModelBasis) -> (LaurentSeries, LaurentSeries) {
    let theta = basis.theta();
    let n = basis.n();
    let d = theta.degree();
    let (b1, b2) = theta.split(rng.random_range(1..d));
    let e = normalized_kernel(theta.zeros()[d - 1], n);
    let s = complex_normal(rng);
    let kappa = basis.theta_at_zero().conj() * b1.at_zero();
    let t = kappa * s * e.coeff(0) / (1.0 - kappa * b2.at_zero());
    let h = (&b1.taylor(n) * &(&e.scale(s) + &b2.taylor(n).scale(t))).truncate(0, n as i64);
    let beta = h.coeff(0);
    let g1 = &h - &LaurentSeries::constant(beta);
    let g2 = basis.k0().scale(beta.conj());
    (coanalytic_plus_constant(rng, &b1, n), &g1 + &g2.conj())
}

/// Combination of `{e_0, .., e_{d-1}, theta}` vanishing at `points`.
fn vanishing_combination(rng: &mut TrialRng, basis: &ModelBasis, points: &[C64]) -> Result<LaurentSeries> {
    let d = basis.dim();
    let theta = basis.theta();
    let eval = |j: usize, w: C64| if j < d { basis.evaluate_vector(j, w) } else { theta.evaluate_unchecked(w) };
    let k = points.len();
    let free = [complex_normal(rng), complex_normal(rng)];
    let mut coef = vec![C64::new(0.0, 0.0); d + 1];
    coef[k] = free[0];
    coef[k + 1..].iter_mut().for_each(|c| *c = complex_normal(rng));
    coef[d] = free[1];
    if k > 0 {
        let a = DMatrix::from_fn(k, k, |r, c| eval(c, points[r]));
        let rhs = DVector::from_fn(k, |r, _| -(k..=d).map(|j| eval(j, points[r]) * coef[j]).sum::<C64>());
        let x = a.lu().solve(&rhs).ok_or_else(|| Error::Domain("singular interpolation system".into()))?;
        coef[..k].copy_from_slice(x.as_slice());
    }
    let mut q = basis.combine(&coef[..d]);
    q = &q + &basis.theta_series().scale(coef[d]);
    Ok(q)
}

/// `sum_{k < terms} c^k theta^k` to order `n`.
fn geometric_in_theta(basis: &ModelBasis, c: C64, tol: f64) -> LaurentSeries {
    let n = basis.n() as i64;
    let terms = (tol.ln() / c.norm().ln()).ceil().max(1.0) as usize + 1;
    let theta = basis.theta_series();
    let mut acc = LaurentSeries::zero();
    let mut pw = LaurentSeries::constant(C64::new(1.0, 0.0));
    for _ in 0..terms {
        acc = &acc + &pw;
        pw = (&pw * theta).truncate(0, n).scale(c);
    }
    acc
}

fn points_with_value(basis: &ModelBasis, value: C64) -> Result<Vec<C64>> {
    let pts = basis.theta().preimages(value);
    if pts.len() != basis.dim() || pts.iter().any(|p| p.norm() >= 0.99) {
        return Err(Error::Domain("preimages left the disk".into()));
    }
    Ok(pts)
}

/// `f = -conj(P(theta conj q) / (1 - conj(alpha) theta))` with `q` vanishing at
/// all but one point where `theta = alpha`; `beta = -g1` at the remaining point.
fn alpha_inside(rng: &mut TrialRng, basis: &ModelBasis, alpha: C64) -> Result<(LaurentSeries, LaurentSeries)> {
    let n = basis.n() as i64;
    let d = basis.dim();
    let lambda = points_with_value(basis, alpha)?;
    let q = vanishing_combination(rng, basis, &lambda[..d - 1])?;
    let theta = basis.theta_series();
    let p = (theta * &q.conj()).truncate(0, n);
    let f = (&p * &geometric_in_theta(basis, alpha.conj(), 1e-17)).truncate(0, n).scale(C64::new(-1.0, 0.0)).conj();
    let g1 = random_model_element_at_zero(rng, basis);
    let beta = -g1.evaluate_unchecked(lambda[d - 1]);
    Ok((f, alpha_beta_symbol(basis, &g1, alpha, beta)))
}

/// `f = P(theta conj q) / (alpha - theta)` with `q` vanishing at all but one
/// point where `theta = 1 / conj(alpha)`.
fn alpha_outside(rng: &mut TrialRng, basis: &ModelBasis, alpha: C64) -> Result<(LaurentSeries, LaurentSeries)> {
    let n = basis.n() as i64;
    let d = basis.dim();
    let mu = points_with_value(basis, 1.0 / alpha.conj())?;
    let q = vanishing_combination(rng, basis, &mu[..d - 1])?;
    let theta = basis.theta_series();
    let v = (theta * &q.conj()).truncate(0, n);
    let inv = geometric_in_theta(basis, 1.0 / alpha, 1e-17).scale(1.0 / alpha);
    let f = (&v * &inv).truncate(0, n);
    let g1 = random_model_element_at_zero(rng, basis);
    let t = (theta * &g1.conj()).truncate(0, n);
    let beta = (-alpha.conj() * t.evaluate_unchecked(mu[d - 1])).conj();
    Ok((f, alpha_beta_symbol(basis, &g1, alpha, beta)))
}

/// `g1 + conj(g2)` with `g2 = P_theta(conj(alpha) theta conj(g1) + conj(beta) k0)`.
fn alpha_beta_symbol(basis: &ModelBasis, g1: &LaurentSeries, alpha: C64, beta: C64) -> LaurentSeries {
    let n = basis.n() as i64;
    let th = basis.theta_series();
    let src = &(th * &g1.conj()).truncate(-n, n).scale(alpha.conj()) + &basis.k0().scale(beta.conj());
    let g2 = project_model(&src, basis);
    g1 + &g2.conj()
}
