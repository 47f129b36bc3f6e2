//! The model space `K_theta = H^2 ⊖ theta H^2` for a finite Blaschke product.
//!
//! [`build_tm_basis`] produces the Takenaka-Malmquist orthonormal basis;
//! [`project_model`] computes `P_theta f = Pf - theta P(conj(theta) f)` from the
//! cached Taylor expansion of `theta`, giving a second path that tests can play
//! off against basis expansion.

use crate::blaschke::{apply_cauchy, apply_factor, factor, BlaschkeProduct};
use crate::error::{Error, Result};
use crate::harmonic::{DiskPoint, LaurentSeries, C64};

#[derive(Clone, Debug)]
pub struct ModelBasis {
    theta: BlaschkeProduct,
    n: usize,
    theta_series: LaurentSeries,
    vectors: Vec<LaurentSeries>,
    gram_residual: f64,
}

/// Symbol split `g = g1 + conj(g2) + ideal_part` with `g1, g2` in `K_theta` and `g1(0) = 0`.
#[derive(Clone, Debug)]
pub struct SymbolDecomposition {
    pub g1: LaurentSeries,
    pub g2: LaurentSeries,
    pub ideal_part: LaurentSeries,
    pub residual: f64,
}

pub fn build_tm_basis(theta: &BlaschkeProduct, n: usize) -> Result<ModelBasis> {
    if theta.degree() == 0 {
        return Err(Error::Blaschke("constant inner function has no model space".into()));
    }
    let zeros = theta.zeros();
    let rho = theta.max_zero_modulus();
    let vectors: Vec<LaurentSeries> = (0..zeros.len())
        .map(|k| {
            let a = zeros[k];
            let mut c = vec![C64::new(0.0, 0.0); n + 1];
            c[0] = C64::new((1.0 - a.norm_sqr()).sqrt(), 0.0);
            for &b in &zeros[..k] {
                apply_factor(&mut c, b);
            }
            apply_cauchy(&mut c, a);
            let tail = if rho > 0.0 { c[n].norm() * (n as f64 + 1.0) * rho / (1.0 - rho).powi(2) } else { 0.0 };
            LaurentSeries::new(0, c).with_tail_bound(tail)
        })
        .collect();
    let d = vectors.len();
    let mut gram_residual = 0.0_f64;
    for j in 0..d {
        for k in 0..d {
            let target = if j == k { 1.0 } else { 0.0 };
            gram_residual = gram_residual.max((vectors[k].inner(&vectors[j]) - target).norm());
        }
    }
    Ok(ModelBasis { theta: theta.clone(), n, theta_series: theta.taylor(n), vectors, gram_residual })
}

impl ModelBasis {
    pub fn theta(&self) -> &BlaschkeProduct {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vectors(&self) -> &[LaurentSeries] {
        &self.vectors
    }

    pub fn gram_residual(&self) -> f64 {
        self.gram_residual
    }

    pub fn id(&self) -> u64 {
        self.theta.id() ^ (self.n as u64).rotate_left(32)
    }

    /// Cached Taylor expansion of `theta` to order `n`.
    pub fn theta_series(&self) -> &LaurentSeries {
        &self.theta_series
    }

    /// Taylor expansion of `theta` to at least `order`.
    pub fn theta_to(&self, order: usize) -> LaurentSeries {
        if order <= self.n {
            self.theta_series.clone()
        } else {
            self.theta.taylor(order)
        }
    }

    pub fn theta_at_zero(&self) -> C64 {
        self.theta.at_zero()
    }

    /// `P_theta 1 = 1 - conj(theta(0)) theta`.
    pub fn k0(&self) -> LaurentSeries {
        let t0 = self.theta_at_zero();
        &LaurentSeries::constant(C64::new(1.0, 0.0)) - &self.theta_series.scale(t0.conj())
    }

    /// Closed-form value of the `k`-th basis vector.
    pub fn evaluate_vector(&self, k: usize, w: C64) -> C64 {
        let zeros = self.theta.zeros();
        let a = zeros[k];
        let head = (1.0 - a.norm_sqr()).sqrt() / (1.0 - a.conj() * w);
        zeros[..k].iter().fold(head, |acc, &b| acc * factor(b, w))
    }

    /// `[<h, e_j>]_j`.
    pub fn coordinates(&self, h: &LaurentSeries) -> Vec<C64> {
        self.vectors.iter().map(|e| h.inner(e)).collect()
    }

    /// `sum_j c_j e_j`.
    pub fn combine(&self, coords: &[C64]) -> LaurentSeries {
        coords.iter().zip(&self.vectors).fold(LaurentSeries::zero(), |acc, (c, e)| &acc + &e.scale(*c))
    }
}

/// `P_theta f` truncated to the analytic window `0..=N` of the basis.
pub fn project_model(f: &LaurentSeries, basis: &ModelBasis) -> LaurentSeries {
    let n = basis.n as i64;
    let pf = f.project_p().truncate(0, n);
    let theta = basis.theta_series();
    let inner = (&theta.conj() * &pf).project_p();
    (&pf - &(theta * &inner)).truncate(0, n)
}

/// Reproducing kernel `(1 - conj(theta(w)) theta(z)) / (1 - conj(w) z)` to order `n`.
pub fn model_kernel(w: DiskPoint, theta: &BlaschkeProduct, n: usize) -> LaurentSeries {
    let wb = w.value().conj();
    let tw = theta.evaluate_unchecked(w.value()).conj();
    let c = theta.taylor(n);
    let mut szego = C64::new(1.0, 0.0);
    let mut prod = C64::new(0.0, 0.0);
    let coeffs = (0..=n as i64)
        .map(|j| {
            prod = prod * wb + c.coeff(j);
            let v = szego - tw * prod;
            szego *= wb;
            v
        })
        .collect();
    let r = w.modulus();
    let tail = 2.0 * r.powi(n as i32 + 1) / (1.0 - r) + c.tail_bound() / (1.0 - r);
    LaurentSeries::new(0, coeffs).with_tail_bound(tail)
}

/// Orthogonal projection of `phi` onto the ideal `theta H^2 + conj(theta H^2)`
/// over the window `[-N, N]`: returns `(ideal component, residual norm)`.
///
/// `{theta w^m}` and `{conj(theta w^n)}` are each orthonormal and meet only in
/// the `m = n = 0` Gram entry `theta(0)^2`, so the normal equations decouple
/// except for a 2x2 block.
pub fn ideal_projection(phi: &LaurentSeries, basis: &ModelBasis) -> (LaurentSeries, f64) {
    let n = basis.n as i64;
    let lo = phi.min_index().min(-n);
    let hi = phi.max_index().max(n);
    let theta = basis.theta_to((hi - lo).max(0) as usize);
    let a = (&theta.conj() * phi).truncate(0, n);
    let b = (&theta * phi).truncate(-n, 0);
    let t = basis.theta_at_zero().powi(2);
    let (a0, b0) = (a.coeff(0), b.coeff(0));
    let x0 = (a0 - t.conj() * b0) / (1.0 - t.norm_sqr());
    let y0 = b0 - t * x0;
    let x = LaurentSeries::from_fn(0, n, |m| if m == 0 { x0 } else { a.coeff(m) });
    let ybar = LaurentSeries::from_fn(0, n, |m| if m == 0 { y0.conj() } else { b.coeff(-m).conj() });
    let ideal = &(&theta * &x).truncate(lo, hi) + &(&theta * &ybar).conj().truncate(lo, hi);
    let residual = (phi - &ideal).norm();
    (ideal, residual)
}

/// Canonical decomposition with the `g1(0) = 0` normalization.
pub fn decompose_symbol(g: &LaurentSeries, basis: &ModelBasis) -> SymbolDecomposition {
    let u = project_model(&g.project_p(), basis);
    let v = g.project_q().conj();
    let (g1, g2) = normalize_pair(&u, &project_model(&v, basis), basis);
    let rem = &(g - &g1) - &g2.conj();
    let (ideal_part, residual) = ideal_projection(&rem, basis);
    SymbolDecomposition { g1, g2, ideal_part, residual }
}

/// Moves the `k0` component of `g1` into `g2` so that `g1(0) = 0` while
/// `g1 + conj(g2)` changes only by an ideal element.
pub fn normalize_pair(g1: &LaurentSeries, g2: &LaurentSeries, basis: &ModelBasis) -> (LaurentSeries, LaurentSeries) {
    let t0 = basis.theta_at_zero();
    let c = g1.coeff(0) / (1.0 - t0.norm_sqr());
    let k0 = basis.k0();
    let mut h1 = g1 - &k0.scale(c);
    let n = basis.n as i64;
    h1 = LaurentSeries::from_fn(0, n, |m| if m == 0 { C64::new(0.0, 0.0) } else { h1.coeff(m) })
        .with_tail_bound(h1.tail_bound());
    let h2 = (g2 + &k0.scale(c.conj())).truncate(0, n);
    (h1, h2)
}

impl SymbolDecomposition {
    /// `g1 + conj(g2)`.
    pub fn symbol(&self) -> LaurentSeries {
        &self.g1 + &self.g2.conj()
    }
}

/// `||Qf||`.
pub fn in_h2(f: &LaurentSeries) -> f64 {
    f.project_q().norm()
}

/// `max(||Qf||, ||Q(theta conj f)||)`; zero exactly on `K_theta + C theta`.
pub fn in_ktheta_plus_c_theta(f: &LaurentSeries, basis: &ModelBasis) -> f64 {
    let order = (f.max_index().max(0) as usize).max(basis.n);
    let theta = basis.theta_to(order);
    in_h2(f).max(in_h2(&(&theta * &f.conj())))
}

/// `||f - mean(f)||`.
pub fn is_constant(f: &LaurentSeries) -> f64 {
    (f - &LaurentSeries::constant(f.mean())).norm()
}
