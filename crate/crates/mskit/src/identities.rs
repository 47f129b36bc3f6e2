//! Seeded suite of finite-section operator identities.
//!
//! Finite sections of trig-symbol identities are exact away from the
//! truncation edge, so each identity is checked on the leading block that stops
//! `deg f + deg g` short of the edge, or on the full block where exact. Each check carries a
//! budget `1e-12 * dim + tail`, where `tail` collects the truncation bounds of
//! any kernel, Mobius or Blaschke expansions involved.

use std::collections::BTreeMap;
use std::ops::Range;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::{cauchy_kernel, mobius_symbol, DiskPoint, LaurentSeries};
use crate::model_space::{build_tm_basis, decompose_symbol};
use crate::operators::{
    block_residual, hankel, rank_one, s_op, toeplitz, u_matrix, v_conjugate, IdentityCheck, OpMatrix, TaggedVector,
};
use crate::par::{map_range, Execution};
use crate::sampling::{disk_point, random_blaschke, random_model_element, random_trig, trial_rng, TrialRng};
use crate::theorems::lemma_eq_split;

/// Which identity groups to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityGroup {
    /// Toeplitz/Hankel product rules, V- and U-conjugation, kernel projections.
    Algebra,
    /// The two rank-one perturbation identities.
    Tensor,
    /// The product split and its two rewritten forms.
    ProductSplit,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteOptions {
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub max_degree: usize,
    pub seed: u64,
    /// Maximum modulus of the kernel point `z`.
    pub max_radius: f64,
    /// Maximum degree of the inner function for the product split.
    pub max_theta_degree: usize,
    pub groups: Vec<IdentityGroup>,
    /// Adds an identity with a flipped sign, which must fail.
    pub self_test: bool,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            n: 128,
            m: 128,
            trials: 50,
            max_degree: 8,
            seed: 0,
            max_radius: 0.7,
            max_theta_degree: 4,
            groups: vec![IdentityGroup::Algebra, IdentityGroup::Tensor, IdentityGroup::ProductSplit],
            self_test: false,
            exec: Execution::default(),
        }
    }
}

/// Worst residual per identity across trials.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub options: SuiteOptions,
    pub worst: Vec<IdentityCheck>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn violations(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.worst.iter().filter(|c| !c.passed())
    }

    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.worst.iter().find(|c| c.name == name)
    }
}

fn rounding(dim: usize) -> f64 {
    1e-12 * dim as f64
}

fn check(name: &str, a: &OpMatrix, b: &OpMatrix, rows: Range<usize>, cols: Range<usize>, tail: f64) -> IdentityCheck {
    let dim = a.rows().max(a.cols());
    IdentityCheck::new(name, block_residual(a.entries(), b.entries(), rows, cols), rounding(dim) + tail)
}

/// Degree of a trig polynomial: the largest `|k|` with a nonzero coefficient.
fn degree(f: &LaurentSeries) -> usize {
    let t = f.trimmed();
    if t.is_zero() {
        return 0;
    }
    t.min_index().unsigned_abs().max(t.max_index().unsigned_abs()) as usize
}

/// Product rules, their analytic special cases, `V` and `U` conjugation.
pub fn algebra_checks(f: &LaurentSeries, g: &LaurentSeries, n: usize, m: usize) -> Result<Vec<IdentityCheck>> {
    let margin = degree(f) + degree(g);
    if 2 * margin >= n.min(m) {
        return Err(Error::Config(format!("truncation {n}/{m} too small for symbol degree {margin}")));
    }
    let inner = 0..n + 1 - margin;
    let co = 0..m - margin;
    let fg = f * g;
    let (tf, tg) = (toeplitz(f, n), toeplitz(g, n));
    let (hf, hg) = (hankel(f, n, m), hankel(g, n, m));
    let mut out = Vec::new();

    let rhs = tf.compose(&tg)?.add(&hankel(&f.conj(), n, m).adjoint().compose(&hg)?)?;
    out.push(check("toeplitz_product_rule", &toeplitz(&fg, n), &rhs, inner.clone(), inner.clone(), 0.0));

    let rhs = hf.compose(&tg)?.add(&s_op(f, m).compose(&hg)?)?;
    out.push(check("hankel_product_rule", &hankel(&fg, n, m), &rhs, co.clone(), inner.clone(), 0.0));

    let ga = g.project_p();
    let fga = f * &ga;
    let tga = toeplitz(&ga, n);
    out.push(check(
        "analytic_right_toeplitz",
        &tf.compose(&tga)?,
        &toeplitz(&fga, n),
        inner.clone(),
        inner.clone(),
        0.0,
    ));
    out.push(check("analytic_right_hankel", &hf.compose(&tga)?, &hankel(&fga, n, m), co.clone(), inner.clone(), 0.0));

    let fa = f.project_p();
    let lhs = hankel(&(&fa * g), n, m);
    let rhs = s_op(&fa, m).compose(&hg)?;
    out.push(check("analytic_left_hankel", &lhs, &rhs, co.clone(), inner.clone(), 0.0));

    let h = hankel(f, n, n + 1);
    out.push(check("v_conjugation", &v_conjugate(&h)?, &h.adjoint(), 0..n + 1, 0..n + 1, 0.0));

    let u = u_matrix(n, n + 1);
    let lhs = u.adjoint().compose(&s_op(f, n + 1))?.compose(&u)?;
    let flip =
        LaurentSeries::from_fn(f.min_index().min(-f.max_index()), f.max_index().max(-f.min_index()), |k| f.coeff(-k));
    out.push(check("u_conjugation", &lhs, &toeplitz(&flip, n), inner.clone(), inner, 0.0));
    Ok(out)
}

/// `I - T_{phi_z} T_{conj phi_z} = k_z ⊗ k_z` and
/// `S*_{phi_z} S_{phi_z} = I - (U k_{conj z}) ⊗ (U k_{conj z})`.
pub fn kernel_checks(z: DiskPoint, n: usize, m: usize) -> Result<Vec<IdentityCheck>> {
    let phi = mobius_symbol(z, n.max(m));
    let k = cauchy_kernel(z, n);
    let kv = TaggedVector::hardy(&k, n);
    let t = toeplitz(&phi, n);
    let lhs = OpMatrix::identity(t.domain()).sub(&t.compose(&t.adjoint())?)?;
    let tail = 2.0 * phi.tail_bound() + 2.0 * k.tail_bound();
    let mut out = vec![check("kernel_projection", &lhs, &rank_one(&kv, &kv), 0..n + 1, 0..n + 1, tail)];

    let uk = cauchy_kernel(z.conj(), m).apply_u();
    let ukv = TaggedVector::cohardy(&uk, m);
    let s = s_op(&phi, m);
    let lhs = s.adjoint().compose(&s)?;
    let rhs = OpMatrix::identity(s.domain()).sub(&rank_one(&ukv, &ukv))?;
    out.push(check("coanalytic_kernel_projection", &lhs, &rhs, 0..m, 0..m, tail));
    Ok(out)
}

/// The two rank-one perturbation identities at `z`.
pub fn tensor_checks(
    f: &LaurentSeries,
    g: &LaurentSeries,
    z: DiskPoint,
    n: usize,
    m: usize,
) -> Result<Vec<IdentityCheck>> {
    let phi = mobius_symbol(z, n);
    let k = cauchy_kernel(z, n);
    let t_phi = toeplitz(&phi, n);
    let (hf, hg) = (hankel(f, n, m), hankel(g, n, m));
    let tail = 4.0 * (phi.tail_bound() + k.tail_bound()) * (1.0 + f.l1_norm()) * (1.0 + g.l1_norm());
    let kv = TaggedVector::hardy(&k, n);

    let hfhg = hf.adjoint().compose(&hg)?;
    let lhs = hfhg.sub(&t_phi.adjoint().compose(&hfhg)?.compose(&t_phi)?)?;
    let x = TaggedVector::hardy(&hf.apply(&kv)?.to_series()?.apply_v(), n);
    let y = TaggedVector::hardy(&hg.apply(&kv)?.to_series()?.apply_v(), n);
    let mut out = vec![check("tensor_hankel_pair", &lhs, &rank_one(&x, &y), 0..n + 1, 0..n + 1, tail)];

    let t_phib = t_phi.adjoint();
    let hftg = hf.compose(&toeplitz(g, n))?;
    let lhs = s_op(&phi, m).compose(&hftg)?.compose(&t_phib)?.sub(&hftg)?;
    let a = rank_one(&hftg.apply(&kv)?, &kv);
    let uk = TaggedVector::cohardy(&cauchy_kernel(z.conj(), m).apply_u(), m);
    let b = rank_one(&hf.apply(&kv)?, &hg.adjoint().apply(&uk)?).compose(&t_phib)?;
    let rhs = b.sub(&a)?;
    out.push(check("tensor_hankel_toeplitz", &lhs, &rhs, 0..m, 0..n + 1, tail));
    Ok(out)
}

fn merge(worst: &mut BTreeMap<String, IdentityCheck>, checks: Vec<IdentityCheck>) {
    for c in checks {
        let excess = c.residual - c.budget;
        if worst.get(&c.name).is_none_or(|w| excess > w.residual - w.budget) {
            worst.insert(c.name.clone(), c);
        }
    }
}

fn random_symbol(rng: &mut TrialRng, max_degree: usize) -> LaurentSeries {
    let d = rng.random_range(1..=max_degree.max(1)) as i64;
    random_trig(rng, -d, d)
}

/// Budget for the product split: the block identity involves compressions by
/// the model basis, whose Gram error enters linearly.
const SPLIT_BUDGET: f64 = 1e-8;

fn trial(opts: &SuiteOptions, index: usize) -> Result<Vec<IdentityCheck>> {
    let mut rng = trial_rng(opts.seed, index as u64);
    let f = random_symbol(&mut rng, opts.max_degree);
    let g = random_symbol(&mut rng, opts.max_degree);
    let z = DiskPoint::new(disk_point(&mut rng, opts.max_radius))?;
    let mut out = Vec::new();
    for group in &opts.groups {
        match group {
            IdentityGroup::Algebra => {
                out.extend(algebra_checks(&f, &g, opts.n, opts.m)?);
                out.extend(kernel_checks(z, opts.n, opts.m)?);
            }
            IdentityGroup::Tensor => out.extend(tensor_checks(&f, &g, z, opts.n, opts.m)?),
            IdentityGroup::ProductSplit => {
                let d = rng.random_range(1..=opts.max_theta_degree.max(1));
                let theta = random_blaschke(&mut rng, d, 0.0, 0.6)?;
                let basis = build_tm_basis(&theta, opts.n)?;
                let sym = &random_model_element(&mut rng, &basis) + &random_model_element(&mut rng, &basis).conj();
                let dec = decompose_symbol(&sym, &basis);
                let fs = random_symbol(&mut rng, opts.max_degree.min(4));
                let split = lemma_eq_split(&fs, &dec, &basis, opts.n, opts.m)?;
                let budget = SPLIT_BUDGET + basis.gram_residual();
                for (name, r) in ["product_split", "product_split_coanalytic_form", "product_split_analytic_form"]
                    .iter()
                    .zip(split.residuals)
                {
                    out.push(IdentityCheck::new(*name, r, budget));
                }
            }
        }
    }
    if opts.self_test {
        let lhs = toeplitz(&(&f * &g), opts.n);
        let rhs = toeplitz(&f, opts.n)
            .compose(&toeplitz(&g, opts.n))?
            .sub(&hankel(&f.conj(), opts.n, opts.m).adjoint().compose(&hankel(&g, opts.n, opts.m))?)?;
        let margin = degree(&f) + degree(&g);
        let inner = 0..opts.n + 1 - margin;
        out.push(check("self_test_wrong_sign", &lhs, &rhs, inner.clone(), inner, 0.0));
    }
    Ok(out)
}

/// Runs all trials and keeps the worst residual per identity.
pub fn run_suite(opts: &SuiteOptions) -> Result<SuiteReport> {
    if opts.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    if opts.max_degree == 0 || !(0.0..1.0).contains(&opts.max_radius) {
        return Err(Error::Config("max degree must be positive and the radius in [0, 1)".into()));
    }
    let results = map_range(opts.exec, opts.trials, |i| trial(opts, i));
    let mut worst = BTreeMap::new();
    for r in results {
        merge(&mut worst, r?);
    }
    let worst: Vec<IdentityCheck> = worst.into_values().collect();
    let passed = worst.iter().all(IdentityCheck::passed);
    Ok(SuiteReport { options: opts.clone(), worst, passed })
}
