//! Radial probes of boundary-limit functionals.
//!
//! Every functional here is evaluated through series arithmetic (products and
//! projections of truncated Laurent series) rather than through dense operator
//! matrices, so that the dense matrices of [`crate::operators`] can serve as an
//! independent check. No compactness verdict is produced: reports carry values,
//! per-point adequacy flags and a descriptive log-slope only.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::{cauchy_kernel, DiskPoint, LaurentSeries, C64};
use crate::model_space::{ModelBasis, SymbolDecomposition};
use crate::operators::OpMatrix;
use crate::par::{map_range, map_slice, Execution};

/// `(1 - r) N >= 16`.
pub fn point_adequate(r: f64, n: usize) -> bool {
    (1.0 - r) * n as f64 >= 16.0
}

/// Smallest power of two `N` at which radius `r` is adequate.
pub fn adequate_truncation(r: f64) -> usize {
    let need = (16.0 / (1.0 - r)).ceil() as usize;
    need.max(1).next_power_of_two()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbePath {
    points: Vec<DiskPoint>,
}

impl ProbePath {
    pub fn new(points: Vec<DiskPoint>) -> Result<Self> {
        for w in points.windows(2) {
            if w[1].modulus() <= w[0].modulus() {
                return Err(Error::Input("probe radii must be strictly increasing".into()));
            }
        }
        Ok(Self { points })
    }

    /// Points `r e^{i angle}` for the given radii.
    pub fn radial(radii: &[f64], angle: f64) -> Result<Self> {
        Self::new(radii.iter().map(|r| DiskPoint::polar(*r, angle)).collect::<Result<Vec<_>>>()?)
    }

    pub fn points(&self) -> &[DiskPoint] {
        &self.points
    }

    pub fn adequacy(&self, n: usize) -> Vec<bool> {
        self.points.iter().map(|z| point_adequate(z.modulus(), n)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeProvenance {
    pub n: usize,
    pub m: usize,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub labels: Vec<String>,
    pub radii: Vec<f64>,
    pub angles: Vec<f64>,
    pub adequacy: Vec<bool>,
    /// `values[s][p]`: stream `s` at path point `p`.
    pub values: Vec<Vec<f64>>,
    /// Least-squares slope of `log value` against `log(1 - r)` over adequate points.
    pub trend: Vec<Option<f64>>,
    pub provenance: ProbeProvenance,
}

impl ProbeReport {
    fn assemble(labels: &[&str], path: &ProbePath, n: usize, m: usize, per_point: Vec<Vec<f64>>) -> Self {
        let adequacy = path.adequacy(n);
        let radii: Vec<f64> = path.points.iter().map(|z| z.modulus()).collect();
        let angles = path.points.iter().map(|z| z.value().arg()).collect();
        let values: Vec<Vec<f64>> = (0..labels.len()).map(|s| per_point.iter().map(|p| p[s]).collect()).collect();
        let trend = values.iter().map(|v| log_slope(&radii, v, &adequacy)).collect();
        Self {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            radii,
            angles,
            adequacy,
            values,
            trend,
            provenance: ProbeProvenance { n, m, seed: None },
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.provenance.seed = Some(seed);
        self
    }

    /// CSV with columns `r, angle, adequacy, <streams>`; floats to 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,angle,adequacy");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for p in 0..self.radii.len() {
            out.push_str(&format!("{},{},{}", sig17(self.radii[p]), sig17(self.angles[p]), self.adequacy[p]));
            for s in &self.values {
                out.push(',');
                out.push_str(&sig17(s[p]));
            }
            out.push('\n');
        }
        out
    }
}

/// Scientific notation with 17 significant digits.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

fn log_slope(radii: &[f64], values: &[f64], adequate: &[bool]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(values)
        .zip(adequate)
        .filter(|((_, v), ok)| **ok && **v > 0.0)
        .map(|((r, v), _)| ((1.0 - r).ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// `H_f x = Q(f x)` restricted to `w^-1..w^-m`.
fn hankel_apply(f: &LaurentSeries, x: &LaurentSeries, m: usize) -> LaurentSeries {
    (f * x).truncate(-(m as i64), -1)
}

/// `H*_f y = P(conj(f) y)` restricted to `0..=n`.
fn hankel_adjoint_apply(f: &LaurentSeries, y: &LaurentSeries, n: usize) -> LaurentSeries {
    (&f.conj() * y).truncate(0, n as i64)
}

/// `T_f x = P(f x)` restricted to `0..=n`.
fn toeplitz_apply(f: &LaurentSeries, x: &LaurentSeries, n: usize) -> LaurentSeries {
    (f * x).truncate(0, n as i64)
}

/// `U k_{conj z}` truncated like the coanalytic block.
fn u_kernel_conj(z: DiskPoint, n: usize, m: usize) -> LaurentSeries {
    cauchy_kernel(z.conj(), n.max(m)).apply_u().truncate(-(m as i64), -1)
}

/// Spectral norm of `sum_i a_i ⊗ b_i` from the small triangular factors:
/// with `A = Q_A R_A`, `B = Q_B R_B`, `||A B*|| = ||R_A R_B*||`.
pub fn tensor_sum_norm(a: &[LaurentSeries], b: &[LaurentSeries]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let (ra, rb) = (triangular_factor(a), triangular_factor(b));
    crate::operators::matrix_norm(&(ra * rb.adjoint()))
}

/// `R` from a Householder QR of the coefficient matrix `[v_1 .. v_k]`, so
/// `R* R` is the Gram matrix without squaring the condition number.
fn triangular_factor(v: &[LaurentSeries]) -> DMatrix<C64> {
    let lo = v.iter().map(|x| x.min_index()).min().unwrap_or(0);
    let hi = v.iter().map(|x| x.max_index()).max().unwrap_or(0);
    let rows = (hi - lo + 1).max(v.len() as i64) as usize;
    let a = DMatrix::from_fn(rows, v.len(), |r, c| v[c].coeff(lo + r as i64));
    a.qr().r()
}

/// `||H_f k_z||` and `||H*_f U k_{conj z}||` along the path.
pub fn hankel_kernel_probe(f: &LaurentSeries, path: &ProbePath, n: usize, m: usize) -> ProbeReport {
    hankel_kernel_probe_with(Execution::default(), f, path, n, m)
}

pub fn hankel_kernel_probe_with(
    exec: Execution,
    f: &LaurentSeries,
    path: &ProbePath,
    n: usize,
    m: usize,
) -> ProbeReport {
    let per_point = map_slice(exec, path.points(), |z| {
        let k = cauchy_kernel(*z, n);
        let uk = u_kernel_conj(*z, n, m);
        vec![hankel_apply(f, &k, m).norm(), hankel_adjoint_apply(f, &uk, n).norm()]
    });
    ProbeReport::assemble(&["hankel_kz", "hankel_adj_u_kzbar"], path, n, m, per_point)
}

fn check_pairs(fs: &[LaurentSeries], gs: &[LaurentSeries]) -> Result<()> {
    if fs.len() != gs.len() {
        return Err(Error::Input(format!("{} f-symbols but {} g-symbols", fs.len(), gs.len())));
    }
    Ok(())
}

/// `||sum (H_{f_i} k_z) ⊗ (H_{g_i} k_z)||` along the path.
pub fn tensor_probe_k1(
    fs: &[LaurentSeries],
    gs: &[LaurentSeries],
    path: &ProbePath,
    n: usize,
    m: usize,
) -> Result<ProbeReport> {
    check_pairs(fs, gs)?;
    let per_point = map_slice(Execution::default(), path.points(), |z| vec![k1_value(fs, gs, *z, n, m)]);
    Ok(ProbeReport::assemble(&["tensor_k1"], path, n, m, per_point))
}

fn k1_value(fs: &[LaurentSeries], gs: &[LaurentSeries], z: DiskPoint, n: usize, m: usize) -> f64 {
    let k = cauchy_kernel(z, n);
    let a: Vec<_> = fs.iter().map(|f| hankel_apply(f, &k, m)).collect();
    let b: Vec<_> = gs.iter().map(|g| hankel_apply(g, &k, m)).collect();
    tensor_sum_norm(&a, &b)
}

/// Tensor sum `||sum (H_{f_i} k_z) ⊗ (H*_{g_i} U k_{conj z})||` and
/// `||(sum H_{f_i} T_{g_i})* U k_{conj z}||` along the path.
pub fn tensor_probe_k2(
    fs: &[LaurentSeries],
    gs: &[LaurentSeries],
    path: &ProbePath,
    n: usize,
    m: usize,
) -> Result<ProbeReport> {
    check_pairs(fs, gs)?;
    let per_point = map_slice(Execution::default(), path.points(), |z| k2_values(fs, gs, *z, n, m).to_vec());
    Ok(ProbeReport::assemble(&["tensor_k2", "k2_adj_u_kzbar"], path, n, m, per_point))
}

fn k2_values(fs: &[LaurentSeries], gs: &[LaurentSeries], z: DiskPoint, n: usize, m: usize) -> [f64; 2] {
    let k = cauchy_kernel(z, n);
    let uk = u_kernel_conj(z, n, m);
    let a: Vec<_> = fs.iter().map(|f| hankel_apply(f, &k, m)).collect();
    let b: Vec<_> = gs.iter().map(|g| hankel_adjoint_apply(g, &uk, n)).collect();
    let adj = fs.iter().zip(gs).fold(LaurentSeries::zero(), |acc, (f, g)| {
        &acc + &toeplitz_apply(&g.conj(), &hankel_adjoint_apply(f, &uk, n), n)
    });
    [tensor_sum_norm(&a, &b), adj.norm()]
}

/// Symbol triples for the product functionals: first-slot Hankel symbols,
/// second-slot Hankel symbols of the coanalytic tensor and Toeplitz symbols of
/// the analytic one.
pub struct ProductSymbols {
    pub hankel_left: [LaurentSeries; 3],
    pub hankel_right: [LaurentSeries; 3],
    pub toeplitz_right: [LaurentSeries; 3],
}

pub fn product_symbols(f: &LaurentSeries, dec: &SymbolDecomposition, basis: &ModelBasis, n: usize) -> ProductSymbols {
    let theta = basis.theta_to(n);
    let thb = theta.conj();
    let (g1, g2) = (&dec.g1, &dec.g2);
    let fg1 = f * g1;
    ProductSymbols {
        hankel_left: [thb.clone(), &thb * g2, g1.conj()],
        hankel_right: [fg1.clone(), f.clone(), -(&theta * f)],
        toeplitz_right: [&theta * &fg1.conj(), &theta * &f.conj(), -f.conj()],
    }
}

/// The three product functionals along the path.
pub fn product_probe(
    f: &LaurentSeries,
    dec: &SymbolDecomposition,
    basis: &ModelBasis,
    path: &ProbePath,
    n: usize,
    m: usize,
) -> ProbeReport {
    let s = product_symbols(f, dec, basis, n);
    let per_point = map_slice(Execution::default(), path.points(), |z| {
        let k1 = k1_value(&s.hankel_left, &s.hankel_right, *z, n, m);
        let [t2, adj] = k2_values(&s.hankel_left, &s.toeplitz_right, *z, n, m);
        vec![k1, t2, adj]
    });
    ProbeReport::assemble(&["product_k1", "product_k2", "product_adj_u_kzbar"], path, n, m, per_point)
}

/// Top-`k` singular values of `builder(N)` for each size, in size order.
pub fn finite_section_sv<F>(builder: F, sizes: &[usize], k: usize) -> Result<Vec<(usize, Vec<f64>)>>
where
    F: Fn(usize) -> OpMatrix + Sync + Send,
{
    finite_section_sv_with(Execution::default(), builder, sizes, k)
}

pub fn finite_section_sv_with<F>(
    exec: Execution,
    builder: F,
    sizes: &[usize],
    k: usize,
) -> Result<Vec<(usize, Vec<f64>)>>
where
    F: Fn(usize) -> OpMatrix + Sync + Send,
{
    if k == 0 {
        return Err(Error::Input("k must be at least 1".into()));
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("sizes must be strictly ascending".into()));
    }
    Ok(map_range(exec, sizes.len(), |i| {
        let a = builder(sizes[i]);
        let mut sv: Vec<f64> = a.entries().clone().singular_values().iter().copied().collect();
        sv.sort_by(|x, y| y.total_cmp(x));
        sv.resize(k, 0.0);
        (sizes[i], sv)
    }))
}
