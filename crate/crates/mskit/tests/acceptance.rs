//! Acceptance criteria, one line per criterion. Runs as a plain binary so the
//! lines are always visible; exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use mskit::cli::{run, Cli};
use mskit::harmonic::{cauchy_kernel, DiskPoint, LaurentSeries, C64};
use mskit::identities::{run_suite, IdentityGroup, SuiteOptions};
use mskit::model_space::{build_tm_basis, decompose_symbol, SymbolDecomposition};
use mskit::operators::{hankel, op_norm, rank_one, tho, toeplitz, tto, TaggedVector};
use mskit::probe::{
    adequate_truncation, hankel_kernel_probe, product_probe, tensor_probe_k1, tensor_probe_k2, ProbePath,
};
use mskit::sampling::{disk_point, random_blaschke, random_trig, trial_rng, zero_instance, ZeroFamily};
use mskit::theorems::{
    classify_oracle, tto_kernel_dimension, zero_product_decide, zero_product_oracle, DecideOptions, OracleClass,
    ORACLE_NONZERO_THRESHOLD, ORACLE_ZERO_THRESHOLD,
};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    let mut o = f();
    let el = t.elapsed();
    o.detail.push_str(&format!("; {:.2}s", el.as_secs_f64()));
    if let Some(l) = limit {
        if el > l {
            o.pass = false;
            o.detail.push_str(&format!(" exceeds {}s", l.as_secs()));
        }
    }
    o
}

fn identity_suite() -> Outcome {
    let opts = SuiteOptions {
        n: 128,
        m: 128,
        trials: 50,
        max_degree: 8,
        seed: 1,
        groups: vec![IdentityGroup::Algebra],
        ..Default::default()
    };
    let r = run_suite(&opts).expect("suite runs");
    let product_rules = [
        "toeplitz_product_rule",
        "hankel_product_rule",
        "analytic_right_toeplitz",
        "analytic_right_hankel",
        "analytic_left_hankel",
    ];
    let worst_rule = product_rules.iter().map(|n| r.get(n).expect("present").residual).fold(0.0, f64::max);
    let v = r.get("v_conjugation").expect("present");
    let s = r.get("coanalytic_kernel_projection").expect("present");
    outcome(
        r.passed && worst_rule <= 1e-10 && v.passed() && s.passed(),
        format!(
            "worst product-rule residual {worst_rule:.2e}, V-conjugation {:.2e}, S*S {:.2e}",
            v.residual, s.residual
        ),
    )
}

fn tensor_lemma() -> Outcome {
    let opts = SuiteOptions {
        n: 256,
        m: 256,
        trials: 20,
        max_degree: 8,
        seed: 2,
        max_radius: 0.7,
        groups: vec![IdentityGroup::Tensor],
        ..Default::default()
    };
    let r = run_suite(&opts).expect("suite runs");
    let worst = r.worst.iter().map(|c| c.residual).fold(0.0, f64::max);
    outcome(r.passed && worst <= 1e-6, format!("worst residual {worst:.2e} over 20 instances"))
}

fn sarason() -> Outcome {
    let mut worst_ideal = 0.0_f64;
    let mut mismatches = Vec::new();
    for deg in 1..=4usize {
        for trial in 0..5u64 {
            let mut rng = trial_rng(3, deg as u64 * 100 + trial);
            let theta = random_blaschke(&mut rng, deg, 0.0, 0.8).unwrap();
            let basis = build_tm_basis(&theta, 256).unwrap();
            let window = deg + 4;
            let dim = tto_kernel_dimension(&basis, window, 1e-7);
            let expect = (2 * window + 1) - (2 * deg - 1);
            if dim != expect {
                mismatches.push(format!("deg {deg} trial {trial}: {dim} != {expect}"));
            }
            let th = basis.theta_series();
            let (h, k) = (random_trig(&mut rng, 0, 3), random_trig(&mut rng, 0, 3));
            let phi = &(th * &h).truncate(0, 256) + &(th * &k).truncate(0, 256).conj();
            worst_ideal = worst_ideal.max(op_norm(&tto(&phi, &basis)));
        }
    }
    outcome(
        mismatches.is_empty() && worst_ideal <= 1e-8,
        format!("kernel dimension mismatches {:?}, worst ideal-symbol norm {worst_ideal:.2e}", mismatches),
    )
}

fn zero_tho() -> Outcome {
    let mut worst_const = 0.0_f64;
    let mut least = f64::INFINITY;
    for trial in 0..50u64 {
        let mut rng = trial_rng(4, trial);
        let deg = rng.random_range(2..=4usize);
        let basis = build_tm_basis(&random_blaschke(&mut rng, deg, 0.0, 0.7).unwrap(), 128).unwrap();
        let c = LaurentSeries::constant(C64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)));
        worst_const = worst_const.max(op_norm(&tho(&c, &basis, 128, 128)));
        let d = rng.random_range(1..=4i64);
        let mut f = random_trig(&mut rng, -d, d);
        let dev = (&f - &LaurentSeries::constant(f.mean())).norm();
        if dev < 0.1 {
            f = f.scale(C64::new(0.1 / dev, 0.0));
        }
        least = least.min(op_norm(&tho(&f, &basis, 128, 128)));
    }
    outcome(
        worst_const <= 1e-10 && least >= 1e-4,
        format!("constants {worst_const:.2e}, smallest nonconstant {least:.2e}"),
    )
}

fn end_to_end() -> Outcome {
    let n = 256;
    let mut plan: Vec<ZeroFamily> = Vec::new();
    for fam in [ZeroFamily::GIdeal, ZeroFamily::FConstant, ZeroFamily::Coanalytic] {
        plan.extend(std::iter::repeat_n(fam, 20));
    }
    for fam in [ZeroFamily::AlphaBetaZero, ZeroFamily::BetaOnly, ZeroFamily::AlphaInside, ZeroFamily::AlphaOutside] {
        plan.extend(std::iter::repeat_n(fam, 10));
    }
    plan.extend(std::iter::repeat_n(ZeroFamily::Perturbed, 100));
    let results = mskit::par::map_range(mskit::par::Execution::default(), plan.len(), |i| {
        let inst = zero_instance(plan[i], &mut trial_rng(5, i as u64), n).expect("instance");
        let dec = decompose_symbol(&inst.g, &inst.basis);
        let v = zero_product_decide(&inst.f, &dec, &inst.basis, &DecideOptions::default());
        let norm = zero_product_oracle(&inst.f, &inst.g, &inst.basis, n, n);
        (plan[i], v.condition.is_zero(), classify_oracle(norm, ORACLE_ZERO_THRESHOLD, ORACLE_NONZERO_THRESHOLD), norm)
    });
    let mut indeterminate = 0;
    let mut disagree = Vec::new();
    let mut zeros = 0;
    for (i, (fam, zero, class, norm)) in results.iter().enumerate() {
        match class {
            OracleClass::Indeterminate => indeterminate += 1,
            OracleClass::Zero if *zero => zeros += 1,
            OracleClass::Nonzero if !*zero => {}
            _ => disagree.push(format!("#{i} {fam:?} decided_zero={zero} oracle={norm:.2e}")),
        }
    }
    let frac = indeterminate as f64 / results.len() as f64;
    outcome(
        disagree.is_empty() && frac < 0.05,
        format!(
            "{} instances, {zeros} agreed zero, {indeterminate} indeterminate, disagreements {:?}",
            results.len(),
            disagree
        ),
    )
}

fn product_split() -> Outcome {
    let opts = SuiteOptions {
        n: 128,
        m: 128,
        trials: 30,
        max_degree: 4,
        seed: 6,
        max_theta_degree: 4,
        groups: vec![IdentityGroup::ProductSplit],
        ..Default::default()
    };
    let r = run_suite(&opts).expect("suite runs");
    let worst = r.worst.iter().map(|c| c.residual).fold(0.0, f64::max);
    outcome(r.passed && worst <= 1e-8, format!("worst residual {worst:.2e} over 30 instances"))
}

fn closed_form_probe() -> Outcome {
    let radii = [0.5, 0.9, 0.99];
    let n = adequate_truncation(0.99);
    let zbar = LaurentSeries::monomial(-1, C64::new(1.0, 0.0));
    let rep = hankel_kernel_probe(&zbar, &ProbePath::radial(&radii, 0.0).unwrap(), n, n);
    let err = radii.iter().zip(&rep.values[0]).map(|(r, v)| (v - (1.0 - r * r).sqrt()).abs()).fold(0.0, f64::max);
    let v99 = rep.values[0][2];
    let ok = err <= 1e-9 && (v99 - 0.14106735).abs() < 1e-8 && rep.adequacy.iter().all(|a| *a);
    outcome(ok, format!("N = {n}, max error {err:.2e}, value at 0.99 = {v99:.10}"))
}

fn dense_tensor_norm(a: &[LaurentSeries], b: &[TaggedVector], k: &TaggedVector, n: usize, m: usize) -> f64 {
    let mut acc: Option<mskit::operators::OpMatrix> = None;
    for (ai, bi) in a.iter().zip(b) {
        let x = hankel(ai, n, m).apply(k).unwrap();
        let r = rank_one(&x, bi);
        acc = Some(match acc {
            None => r,
            Some(s) => s.add(&r).unwrap(),
        });
    }
    op_norm(&acc.unwrap())
}

/// Dense evaluation of every probe stream at `z`.
fn dense_streams(
    fs: &[LaurentSeries],
    gs: &[LaurentSeries],
    ts: &[LaurentSeries],
    z: DiskPoint,
    n: usize,
    m: usize,
) -> (f64, f64, f64) {
    let k = TaggedVector::hardy(&cauchy_kernel(z, n), n);
    let uk = TaggedVector::cohardy(&cauchy_kernel(z.conj(), n.max(m)).apply_u(), m);
    let k1_b: Vec<TaggedVector> = gs.iter().map(|g| hankel(g, n, m).apply(&k).unwrap()).collect();
    let k1 = dense_tensor_norm(fs, &k1_b, &k, n, m);
    let k2_b: Vec<TaggedVector> = ts.iter().map(|t| hankel(t, n, m).adjoint().apply(&uk).unwrap()).collect();
    let k2 = dense_tensor_norm(fs, &k2_b, &k, n, m);
    let mut adj = mskit::operators::OpMatrix::zeros(
        mskit::operators::SpaceTag::CoHardy { m },
        mskit::operators::SpaceTag::Hardy { n },
    );
    for (f, t) in fs.iter().zip(ts) {
        adj = adj.add(&hankel(f, n, m).compose(&toeplitz(t, n)).unwrap().adjoint()).unwrap();
    }
    (k1, k2, adj.apply(&uk).unwrap().norm())
}

fn dual_path() -> Outcome {
    let (n, m) = (64, 64);
    let mut worst = 0.0_f64;
    for trial in 0..20u64 {
        let mut rng = trial_rng(8, trial);
        let radii = [0.2, 0.4, 0.6];
        let path = ProbePath::radial(&radii, rng.random_range(0.0..std::f64::consts::TAU)).unwrap();
        let f = random_trig(&mut rng, -4, 4);
        let rep = hankel_kernel_probe(&f, &path, n, m);
        for (p, z) in path.points().iter().enumerate() {
            let k = TaggedVector::hardy(&cauchy_kernel(*z, n), n);
            let uk = TaggedVector::cohardy(&cauchy_kernel(z.conj(), n).apply_u(), m);
            let h = hankel(&f, n, m);
            worst = worst.max((rep.values[0][p] - h.apply(&k).unwrap().norm()).abs());
            worst = worst.max((rep.values[1][p] - h.adjoint().apply(&uk).unwrap().norm()).abs());
        }
        let fs = [random_trig(&mut rng, -3, 3), random_trig(&mut rng, -3, 3)];
        let gs = [random_trig(&mut rng, -3, 3), random_trig(&mut rng, -3, 3)];
        let r1 = tensor_probe_k1(&fs, &gs, &path, n, m).unwrap();
        let r2 = tensor_probe_k2(&fs, &gs, &path, n, m).unwrap();
        for (p, z) in path.points().iter().enumerate() {
            let (k1, k2, adj) = dense_streams(&fs, &gs, &gs, *z, n, m);
            worst = worst.max((r1.values[0][p] - k1).abs());
            worst = worst.max((r2.values[0][p] - k2).abs());
            worst = worst.max((r2.values[1][p] - adj).abs());
        }
        let deg = rng.random_range(2..=3usize);
        let basis = build_tm_basis(&random_blaschke(&mut rng, deg, 0.0, 0.6).unwrap(), n).unwrap();
        let g = random_trig(&mut rng, -3, 3);
        let dec = decompose_symbol(&g, &basis);
        let rp = product_probe(&f, &dec, &basis, &path, n, m);
        let (left, right, toep) = product_families(&f, &dec, basis.theta_series());
        for (p, z) in path.points().iter().enumerate() {
            let (k1, k2, adj) = dense_streams(&left, &right, &toep, *z, n, m);
            worst = worst.max((rp.values[0][p] - k1).abs());
            worst = worst.max((rp.values[1][p] - k2).abs());
            worst = worst.max((rp.values[2][p] - adj).abs());
        }
    }
    outcome(worst <= 1e-10, format!("worst probe/dense gap {worst:.2e} over 20 cases"))
}

fn product_families(
    f: &LaurentSeries,
    dec: &SymbolDecomposition,
    theta: &LaurentSeries,
) -> (Vec<LaurentSeries>, Vec<LaurentSeries>, Vec<LaurentSeries>) {
    let thb = theta.conj();
    let fg1 = f * &dec.g1;
    let minus = C64::new(-1.0, 0.0);
    (
        vec![thb.clone(), &thb * &dec.g2, dec.g1.conj()],
        vec![fg1.clone(), f.clone(), (theta * f).scale(minus)],
        vec![theta * &fg1.conj(), theta * &f.conj(), f.conj().scale(minus)],
    )
}

fn payload(args: &[&str]) -> (i32, String) {
    use clap::Parser;
    let cli = Cli::try_parse_from(args).expect("arguments parse");
    let o = run(&cli).expect("command runs");
    (o.code, o.payload)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    };
    let theta = write("theta.json", r#"{"zeros":[[0.3,0.1],[-0.2,0.4],[0.0,-0.5]],"constant":[1,0]}"#);
    let f = write("f.json", r#"{"min_index":-2,"coeffs":[[0.1,0.2],[1,0],[0.5,0.5],[0,1],[0.25,0]]}"#);
    let g = write("g.json", r#"{"min_index":-1,"coeffs":[[0.3,0],[1,-1],[0,0.7]]}"#);
    let symbols = write(
        "sym.json",
        r#"{"f":{"min_index":-2,"coeffs":[[0.1,0.2],[1,0],[0.5,0.5]]},"g":{"min_index":-1,"coeffs":[[0.3,0],[1,-1]]}}"#,
    );
    let runs: Vec<Vec<&str>> = vec![
        vec!["mskit", "--seed", "17", "identities", "--trials", "6"],
        vec!["mskit", "--truncation", "96", "check-zero", &theta, &f, &g, "--oracle"],
        vec![
            "mskit",
            "--truncation",
            "96",
            "--format",
            "csv",
            "probe",
            "product",
            "--theta",
            &theta,
            "--symbols",
            &symbols,
        ],
    ];
    let mut same = true;
    for args in &runs {
        same &= payload(args) == payload(args);
    }
    let seq =
        run_suite(&SuiteOptions { trials: 6, seed: 9, exec: mskit::par::Execution::Sequential, ..Default::default() })
            .unwrap();
    let par =
        run_suite(&SuiteOptions { trials: 6, seed: 9, exec: mskit::par::Execution::Parallel, ..Default::default() })
            .unwrap();
    let i1 = zero_instance(ZeroFamily::Perturbed, &mut trial_rng(10, 3), 128).unwrap();
    let i2 = zero_instance(ZeroFamily::Perturbed, &mut trial_rng(10, 3), 128).unwrap();
    same &= seq.worst == par.worst && i1.f == i2.f && i1.g == i2.g;
    let z = DiskPoint::new(disk_point(&mut trial_rng(1, 1), 0.5)).unwrap();
    same &= z == DiskPoint::new(disk_point(&mut trial_rng(1, 1), 0.5)).unwrap();
    outcome(same, format!("{} CLI payloads, suite in both execution modes, sampler streams", runs.len()))
}

type Criterion = (&'static str, Option<u64>, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("identity suite", Some(15), identity_suite),
        ("tensor lemma", Some(30), tensor_lemma),
        ("zero truncated Toeplitz", None, sarason),
        ("zero truncated Hankel", None, zero_tho),
        ("zero product end to end", Some(60), end_to_end),
        ("product split identities", None, product_split),
        ("closed-form probe law", None, closed_form_probe),
        ("probe/dense dual path", None, dual_path),
        ("determinism", None, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let o = timed(limit.map(Duration::from_secs), f);
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {}: {tag} {name}: {}", i + 1, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
