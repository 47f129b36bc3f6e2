//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 identity violation, 2 malformed input or usage,
//! 3 decision/oracle disagreement, 4 indeterminate oracle.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};
use crate::harmonic::{LaurentSeries, TruncationConfig};
use crate::identities::{run_suite, IdentityGroup, SuiteOptions};
use crate::model_space::{build_tm_basis, decompose_symbol};
use crate::operators::{hankel, s_op, tho, toeplitz, tto, OpMatrix};
use crate::par::init_threads;
use crate::probe::{
    adequate_truncation, finite_section_sv, hankel_kernel_probe, product_probe, sig17, tensor_probe_k1,
    tensor_probe_k2, ProbePath, ProbeReport,
};
use crate::theorems::{
    classify_oracle, zero_product_decide, zero_product_oracle, DecideOptions, OracleClass, ORACLE_NONZERO_THRESHOLD,
    ORACLE_ZERO_THRESHOLD,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DISAGREE: i32 = 3;
pub const EXIT_INDETERMINATE: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProbeKind {
    Kernel,
    Tensor1,
    Tensor2,
    Product,
    Svd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GroupArg {
    Algebra,
    Tensor,
    ProductSplit,
}

impl From<GroupArg> for IdentityGroup {
    fn from(g: GroupArg) -> Self {
        match g {
            GroupArg::Algebra => IdentityGroup::Algebra,
            GroupArg::Tensor => IdentityGroup::Tensor,
            GroupArg::ProductSplit => IdentityGroup::ProductSplit,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mskit", version, about = "Finite-section operators on Hardy and model spaces")]
pub struct Cli {
    /// Analytic truncation order N.
    #[arg(long, global = true)]
    pub truncation: Option<usize>,
    /// Coanalytic truncation order M (defaults to N).
    #[arg(long, global = true)]
    pub coanalytic: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Zero tolerance for decisions.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long, global = true, env = "MSKIT_THREADS", hide = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the seeded identity suite.
    Identities {
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 8)]
        max_degree: usize,
        /// Add an identity with a deliberately wrong sign.
        #[arg(long)]
        self_test: bool,
        #[arg(long, value_enum, value_delimiter = ',')]
        groups: Vec<GroupArg>,
    },
    /// Decide whether H^theta_f A^theta_g vanishes.
    CheckZero {
        theta: PathBuf,
        f: PathBuf,
        g: PathBuf,
        /// Also compute the dense oracle and require agreement.
        #[arg(long)]
        oracle: bool,
        /// Evaluate every condition.
        #[arg(long)]
        report_all: bool,
    },
    /// Evaluate boundary-limit functionals along a radial path.
    Probe {
        #[arg(value_enum)]
        kind: ProbeKind,
        #[arg(long)]
        theta: Option<PathBuf>,
        #[arg(long)]
        symbols: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.9,0.99")]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        angle: f64,
        /// Truncation sizes for the singular value table.
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
        sizes: Vec<usize>,
        /// Number of singular values per size.
        #[arg(long, default_value_t = 4)]
        k: usize,
    },
    /// Dump the matrix of A^theta_g.
    Tto { theta: PathBuf, g: PathBuf },
    /// Dump the matrix of H^theta_f.
    Tho { theta: PathBuf, f: PathBuf },
}

/// A finished command: payload and exit code.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub payload: String,
}

/// Parses arguments, runs, writes the payload, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    if let Some(t) = cli.threads {
        init_threads(t);
    }
    match run(&cli).and_then(|o| emit(&cli, &o).map(|_| o.code)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn emit(cli: &Cli, o: &Outcome) -> Result<()> {
    match &cli.out {
        Some(p) => std::fs::write(p, &o.payload)?,
        None => print!("{}", o.payload),
    }
    Ok(())
}

/// Runs a parsed command without writing anything.
pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Identities { trials, max_degree, self_test, groups } => {
            cmd_identities(cli, *trials, *max_degree, *self_test, groups)
        }
        Command::CheckZero { theta, f, g, oracle, report_all } => {
            cmd_check_zero(cli, theta, f, g, *oracle, *report_all)
        }
        Command::Probe { kind, theta, symbols, radii, angle, sizes, k } => {
            cmd_probe(cli, *kind, theta.as_deref(), symbols, radii, *angle, sizes, *k)
        }
        Command::Tto { theta, g } => {
            let cfg = truncation(cli, 256)?;
            let basis = build_tm_basis(&read_json::<BlaschkeProduct>(theta)?, cfg.n)?;
            matrix_outcome(cli, &tto(&read_json(g)?, &basis))
        }
        Command::Tho { theta, f } => {
            let cfg = truncation(cli, 256)?;
            let basis = build_tm_basis(&read_json::<BlaschkeProduct>(theta)?, cfg.n)?;
            matrix_outcome(cli, &tho(&read_json(f)?, &basis, cfg.n, cfg.m))
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn truncation(cli: &Cli, default_n: usize) -> Result<TruncationConfig> {
    let n = cli.truncation.unwrap_or(default_n);
    let mut cfg = TruncationConfig::with_orders(n, cli.coanalytic.unwrap_or(n));
    if let Some(t) = cli.tolerance {
        cfg.zero_tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn config_json(cli: &Cli, cfg: &TruncationConfig) -> Value {
    json!({
        "truncation": cfg.n,
        "coanalytic": cfg.m,
        "sample_count": cfg.sample_count,
        "zero_tol": cfg.zero_tol,
        "residual_tol": cfg.residual_tol,
        "seed": cli.seed,
    })
}

fn to_json(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn cmd_identities(
    cli: &Cli,
    trials: usize,
    max_degree: usize,
    self_test: bool,
    groups: &[GroupArg],
) -> Result<Outcome> {
    let cfg = truncation(cli, 128)?;
    let mut opts =
        SuiteOptions { n: cfg.n, m: cfg.m, trials, max_degree, seed: cli.seed, self_test, ..Default::default() };
    if !groups.is_empty() {
        opts.groups = groups.iter().map(|g| (*g).into()).collect();
    }
    let report = run_suite(&opts)?;
    let code = if report.passed { EXIT_OK } else { EXIT_VIOLATION };
    let payload = match cli.format {
        Format::Json => {
            let rows: Vec<Value> = report
                .worst
                .iter()
                .map(|c| json!({"name": c.name, "residual": c.residual, "budget": c.budget, "passed": c.passed()}))
                .collect();
            let mut config = config_json(cli, &cfg);
            config["trials"] = json!(trials);
            config["max_degree"] = json!(max_degree);
            config["groups"] = json!(opts.groups);
            config["self_test"] = json!(self_test);
            to_json(&json!({"config": config, "identities": rows, "passed": report.passed}))?
        }
        Format::Csv => {
            let mut s = String::from("name,residual,budget,passed\n");
            for c in &report.worst {
                let _ = writeln!(s, "{},{},{},{}", c.name, sig17(c.residual), sig17(c.budget), c.passed());
            }
            s
        }
    };
    Ok(Outcome { code, payload })
}

/// Exit code for a decision checked against the dense oracle.
pub fn oracle_exit_code(class: OracleClass, decided_zero: bool) -> i32 {
    match (class, decided_zero) {
        (OracleClass::Indeterminate, _) => EXIT_INDETERMINATE,
        (OracleClass::Zero, true) | (OracleClass::Nonzero, false) => EXIT_OK,
        _ => EXIT_DISAGREE,
    }
}

fn cmd_check_zero(cli: &Cli, theta: &Path, f: &Path, g: &Path, oracle: bool, report_all: bool) -> Result<Outcome> {
    let cfg = truncation(cli, 256)?;
    let theta: BlaschkeProduct = read_json(theta)?;
    let f: LaurentSeries = read_json(f)?;
    let g: LaurentSeries = read_json(g)?;
    let basis = build_tm_basis(&theta, cfg.n)?;
    let dec = decompose_symbol(&g, &basis);
    let opts = DecideOptions { zero_tol: cfg.zero_tol, report_all, sample_count: cfg.sample_count };
    let mut verdict = zero_product_decide(&f, &dec, &basis, &opts);
    let mut code = EXIT_OK;
    if oracle {
        let norm = zero_product_oracle(&f, &g, &basis, cfg.n, cfg.m);
        verdict.oracle_norm = Some(norm);
        code = oracle_exit_code(
            classify_oracle(norm, ORACLE_ZERO_THRESHOLD, ORACLE_NONZERO_THRESHOLD),
            verdict.condition.is_zero(),
        );
    }
    let payload = match cli.format {
        Format::Json => {
            let mut v = serde_json::to_value(&verdict)?;
            v["config"] = config_json(cli, &cfg);
            if oracle {
                v["oracle_class"] = serde_json::to_value(classify_oracle(
                    verdict.oracle_norm.unwrap_or(0.0),
                    ORACLE_ZERO_THRESHOLD,
                    ORACLE_NONZERO_THRESHOLD,
                ))?;
            }
            to_json(&v)?
        }
        Format::Csv => {
            let mut s = format!("condition,{}\n", verdict.condition.label());
            for (k, v) in &verdict.residuals {
                let _ = writeln!(s, "{k},{}", sig17(*v));
            }
            if let Some(n) = verdict.oracle_norm {
                let _ = writeln!(s, "oracle_norm,{}", sig17(n));
            }
            s
        }
    };
    Ok(Outcome { code, payload })
}

/// Symbols for `probe`: a bare symbol, or an object with the fields a kind needs.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbeSymbols {
    f: Option<LaurentSeries>,
    g: Option<LaurentSeries>,
    fs: Option<Vec<LaurentSeries>>,
    gs: Option<Vec<LaurentSeries>>,
    builder: Option<String>,
}

fn load_probe_symbols(path: &Path) -> Result<ProbeSymbols> {
    let v: Value = read_json(path)?;
    let bad = |e: serde_json::Error| Error::Input(format!("{}: {e}", path.display()));
    if v.get("min_index").is_some() {
        return Ok(ProbeSymbols { f: Some(serde_json::from_value(v).map_err(bad)?), ..Default::default() });
    }
    serde_json::from_value(v).map_err(bad)
}

fn need<T>(x: Option<T>, what: &str) -> Result<T> {
    x.ok_or_else(|| Error::Input(format!("probe input needs `{what}`")))
}

#[allow(clippy::too_many_arguments)]
fn cmd_probe(
    cli: &Cli,
    kind: ProbeKind,
    theta: Option<&Path>,
    symbols: &Path,
    radii: &[f64],
    angle: f64,
    sizes: &[usize],
    k: usize,
) -> Result<Outcome> {
    let sym = load_probe_symbols(symbols)?;
    let rmax = radii.iter().copied().fold(0.0, f64::max);
    let default_n = if rmax < 1.0 { adequate_truncation(rmax).max(256) } else { 256 };
    let cfg = truncation(cli, default_n)?;
    let (n, m) = (cfg.n, cfg.m);
    if kind == ProbeKind::Svd {
        return svd_outcome(cli, &cfg, &sym, theta, sizes, k);
    }
    let path = ProbePath::radial(radii, angle)?;
    let report = match kind {
        ProbeKind::Kernel => hankel_kernel_probe(&need(sym.f, "f")?, &path, n, m),
        ProbeKind::Tensor1 => tensor_probe_k1(&need(sym.fs, "fs")?, &need(sym.gs, "gs")?, &path, n, m)?,
        ProbeKind::Tensor2 => tensor_probe_k2(&need(sym.fs, "fs")?, &need(sym.gs, "gs")?, &path, n, m)?,
        ProbeKind::Product => {
            let theta: BlaschkeProduct = read_json(need(theta, "--theta")?)?;
            let basis = build_tm_basis(&theta, n)?;
            let dec = decompose_symbol(&need(sym.g, "g")?, &basis);
            product_probe(&need(sym.f, "f")?, &dec, &basis, &path, n, m)
        }
        ProbeKind::Svd => unreachable!(),
    }
    .with_seed(cli.seed);
    Ok(Outcome { code: EXIT_OK, payload: probe_payload(cli, &cfg, &report)? })
}

fn probe_payload(cli: &Cli, cfg: &TruncationConfig, report: &ProbeReport) -> Result<String> {
    match cli.format {
        Format::Csv => Ok(report.to_csv()),
        Format::Json => {
            let mut config = config_json(cli, cfg);
            config["adequacy_rule"] = json!("(1 - r) N >= 16");
            to_json(&json!({"config": config, "report": report}))
        }
    }
}

fn svd_outcome(
    cli: &Cli,
    cfg: &TruncationConfig,
    sym: &ProbeSymbols,
    theta: Option<&Path>,
    sizes: &[usize],
    k: usize,
) -> Result<Outcome> {
    let f = need(sym.f.clone(), "f")?;
    let builder = sym.builder.as_deref().unwrap_or("hankel");
    let theta = match builder {
        "tho" => Some(read_json::<BlaschkeProduct>(need(theta, "--theta")?)?),
        "hankel" | "toeplitz" | "s" => None,
        other => return Err(Error::Input(format!("unknown builder `{other}`"))),
    };
    let build = |n: usize| -> OpMatrix {
        match builder {
            "hankel" => hankel(&f, n, n),
            "toeplitz" => toeplitz(&f, n),
            "s" => s_op(&f, n),
            _ => {
                let t = theta.as_ref().expect("theta checked above");
                let basis = build_tm_basis(t, n).expect("degree checked below");
                tho(&f, &basis, n, n)
            }
        }
    };
    if let Some(t) = &theta {
        if t.degree() == 0 {
            return Err(Error::Blaschke("constant inner function has no model space".into()));
        }
    }
    let table = finite_section_sv(build, sizes, k)?;
    let payload = match cli.format {
        Format::Csv => {
            let mut s = String::from("size");
            for i in 1..=k {
                let _ = write!(s, ",sv{i}");
            }
            s.push('\n');
            for (n, sv) in &table {
                let _ = write!(s, "{n}");
                for x in sv {
                    let _ = write!(s, ",{}", sig17(*x));
                }
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let mut config = config_json(cli, cfg);
            config["builder"] = json!(builder);
            config["k"] = json!(k);
            let sizes_json: Vec<Value> =
                table.iter().map(|(n, sv)| json!({"size": n, "singular_values": sv})).collect();
            to_json(&json!({"config": config, "table": sizes_json}))?
        }
    };
    Ok(Outcome { code: EXIT_OK, payload })
}

fn matrix_outcome(cli: &Cli, a: &OpMatrix) -> Result<Outcome> {
    let payload = match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string(a)?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("row,col,re,im\n");
            for j in 0..a.rows() {
                for k in 0..a.cols() {
                    let x = a.entries()[(j, k)];
                    let _ = writeln!(s, "{j},{k},{},{}", sig17(x.re), sig17(x.im));
                }
            }
            s
        }
    };
    Ok(Outcome { code: EXIT_OK, payload })
}
