//! Command-line front end: single density and phase queries as JSON,
//! certification sweeps as CSV, and verification suites.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde_json::{json, Map, Value};

use crate::bigmath::{fmt17, ln_ratio};
use crate::error::{Error, Result};
use crate::estimates::{
    certify_sweep, estimate_rank1, estimate_rank2, estimate_rankr, estimate_weighted,
    upper_bound_rankr, BandReport, Region,
};
use crate::exppoly::identities::run_suite;
use crate::fourier_kernel::{density_contour, density_plancherel, LogDensity, QuadratureConfig};
use crate::phase::{
    global_psi_diagnostic, lemma34_diagnostics, lemma44_check, local_psi_diagnostic, random_deltas,
    Diagnostic, PhaseProblem,
};
use crate::radial_dp::{build_table, density_dp, eigenfunction_check, harnack_minima, RadialChain};
use crate::special_fn::{SphericalF0, WalkParams};

#[derive(Debug, Parser)]
#[command(
    name = "affine-walk",
    version,
    about = "Transition densities of isotropic walks on Ã_r buildings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// p_n(λ) by one method, with the matching estimate.
    Density,
    /// Stationary point s(δ) and phase φ(δ).
    Phase {
        /// δ in root coordinates; derived from --n and --x when absent.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        delta: Option<Vec<f64>>,
    },
    /// Oracle against estimate over a region, as CSV.
    Sweep {
        #[arg(long, value_enum)]
        region: RegionKind,
        /// Time steps for rankr-interior; defaults to multiples of 6 up to --nmax.
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<u64>>,
    },
    /// Runs a verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
}

#[derive(Debug, Args)]
pub struct Opts {
    #[arg(long, global = true, default_value_t = 2)]
    pub rank: usize,
    #[arg(long, global = true, default_value_t = 2)]
    pub q: u32,
    /// Weight of λ_1 for the weighted rank-two walk, e.g. 1/3.
    #[arg(long, global = true)]
    pub c1: Option<String>,
    #[arg(long, global = true)]
    pub n: Option<u64>,
    /// λ in fundamental-weight coordinates, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub x: Option<Vec<i64>>,
    #[arg(long, global = true, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 0.3)]
    pub eta: f64,
    #[arg(long, global = true)]
    pub nmax: Option<u64>,
    #[arg(long, global = true, default_value_t = 4)]
    pub m: u64,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Dp,
    Fourier,
    FourierRaw,
    Estimate,
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RegionKind {
    Rank2Full,
    Rank2Interior,
    Rank2Boundary,
    Rank1,
    RankrInterior,
    Weighted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Identities,
    Lemma34,
    GlobalPsi,
    Harnack,
    Plancherel,
    Eigenfunction,
    Table,
}

/// Validated run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub params: WalkParams,
    pub n: Option<u64>,
    pub x: Option<Vec<i64>>,
    pub method: MethodArg,
    pub quad: QuadratureConfig,
    pub eta: f64,
    pub nmax: Option<u64>,
    pub m: u64,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Input(format!("cannot parse {s:?} as a rational"));
    match s.split_once('/') {
        Some((a, b)) => {
            let (a, b) = (
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            );
            if b == num_bigint::BigInt::zero() {
                return Err(bad());
            }
            Ok(BigRational::new(a, b))
        }
        None => Ok(BigRational::from_integer(
            s.trim().parse().map_err(|_| bad())?,
        )),
    }
}

impl RunConfig {
    pub fn from_opts(o: &Opts) -> Result<Self> {
        let params = match &o.c1 {
            Some(c1) => {
                if o.rank != 2 {
                    return Err(Error::Input("--c1 needs --rank 2".into()));
                }
                WalkParams::weighted(o.q, parse_rational(c1)?)?
            }
            None => WalkParams::distinguished(o.rank, o.q)?,
        };
        if let Some(x) = &o.x {
            params.root_system().check_len(x)?;
            if x.iter().any(|&c| c < 0) {
                return Err(Error::Input(format!("{x:?} is not dominant")));
            }
        }
        if !(o.eta > 0.0 && o.eta < 1.0) {
            return Err(Error::Input(format!("--eta {} must lie in (0,1)", o.eta)));
        }
        if o.threads == Some(0) {
            return Err(Error::Input("--threads must be positive".into()));
        }
        let quad = QuadratureConfig {
            tol: o.tol,
            ..QuadratureConfig::default()
        };
        quad.validate()?;
        Ok(RunConfig {
            params,
            n: o.n,
            x: o.x.clone(),
            method: o.method,
            quad,
            eta: o.eta,
            nmax: o.nmax,
            m: o.m,
            out: o.out.clone(),
            seed: o.seed,
        })
    }

    fn require_n(&self) -> Result<u64> {
        self.n.ok_or_else(|| Error::Input("--n is required".into()))
    }

    fn require_x(&self) -> Result<&[i64]> {
        self.x
            .as_deref()
            .ok_or_else(|| Error::Input("--x is required".into()))
    }

    fn require_nmax(&self) -> Result<u64> {
        self.nmax
            .ok_or_else(|| Error::Input("--nmax is required".into()))
    }

    fn sink(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(File::create(p)?),
            None => Box::new(io::stdout().lock()),
        })
    }
}

/// A finite double as a JSON number with 17 significant digits, else `null`.
fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(fmt17(x).parse().expect("formatted double is a JSON number"))
    } else {
        Value::Null
    }
}

fn write_json(cfg: &RunConfig, v: &Value) -> Result<()> {
    let mut w = cfg.sink()?;
    serde_json::to_writer_pretty(&mut w, v).map_err(|e| Error::Io(e.into()))?;
    writeln!(w)?;
    Ok(())
}

/// Log of the matching closed-form estimate, `None` where it does not apply.
fn estimate_log(cfg: &RunConfig, n: u64, x: &[i64]) -> Option<f64> {
    let p = &cfg.params;
    let len = x.iter().sum::<i64>() as u64;
    if len > n {
        return None;
    }
    let f0 = || SphericalF0::new(p.root_system(), p.q());
    let e = match p.rank() {
        1 => estimate_rank1(p, n, x[0] as u64),
        2 if p.is_distinguished() => estimate_rank2(p, n, x),
        2 => estimate_weighted(p, &f0(), n, x, cfg.eta, 0.0),
        _ if len as f64 <= (1.0 - cfg.eta) * n as f64 => estimate_rankr(p, &f0(), n, x, cfg.eta),
        _ => upper_bound_rankr(p, &f0(), n, x),
    };
    e.ok().map(|e| e.log_value)
}

pub fn cmd_density(cfg: &RunConfig) -> Result<Value> {
    let p = &cfg.params;
    let n = cfg.require_n()?;
    let x = cfg.require_x()?;
    let method = match cfg.method {
        MethodArg::Auto if p.rank() <= 2 => MethodArg::Dp,
        MethodArg::Auto => MethodArg::Fourier,
        m => m,
    };
    let est = estimate_log(cfg, n, x);
    let mut rec = Map::new();
    rec.insert("rank".into(), json!(p.rank()));
    rec.insert("q".into(), json!(p.q()));
    if let Some((c1, c2)) = p.sphere_weights().filter(|_| !p.is_distinguished()) {
        rec.insert("c1".into(), json!(c1.to_string()));
        rec.insert("c2".into(), json!(c2.to_string()));
    }
    rec.insert("n".into(), json!(n));
    rec.insert("lambda".into(), json!(x));
    let log_p = match method {
        MethodArg::Dp => {
            let v = density_dp(p, n as usize, x)?;
            rec.insert("method".into(), json!("dp"));
            rec.insert("density".into(), json!(v.to_string()));
            rec.insert("numerator".into(), json!(v.numer().to_string()));
            rec.insert("denominator".into(), json!(v.denom().to_string()));
            rec.insert("exact".into(), json!(true));
            if v.is_zero() {
                f64::NEG_INFINITY
            } else {
                ln_ratio(&v)
            }
        }
        MethodArg::Fourier | MethodArg::FourierRaw => {
            let d: LogDensity = if method == MethodArg::Fourier {
                density_contour(p, n, x, &cfg.quad)?
            } else {
                density_plancherel(p, n, x, &cfg.quad)?
            };
            let name = if method == MethodArg::Fourier {
                "fourier"
            } else {
                "fourier-raw"
            };
            rec.insert("method".into(), json!(name));
            rec.insert("density".into(), num(d.value()));
            rec.insert("quadrature_error".into(), num(d.error));
            rec.insert("grid".into(), json!(d.grid));
            rec.insert("exact".into(), json!(false));
            if d.sign > 0 {
                d.log_value
            } else {
                f64::NEG_INFINITY
            }
        }
        MethodArg::Estimate => {
            let e = est.ok_or_else(|| {
                Error::Regime(format!("no estimate applies at n = {n}, λ = {x:?}"))
            })?;
            rec.insert("method".into(), json!("estimate"));
            rec.insert("density".into(), num(e.exp()));
            rec.insert("exact".into(), json!(false));
            e
        }
        MethodArg::Auto => unreachable!(),
    };
    rec.insert("log_density".into(), num(log_p));
    rec.insert("estimate_log".into(), est.map(num).unwrap_or(Value::Null));
    let ratio = est.map(|e| (log_p - e).exp()).filter(|r| r.is_finite());
    rec.insert("ratio".into(), ratio.map(num).unwrap_or(Value::Null));
    Ok(Value::Object(rec))
}

pub fn cmd_phase(cfg: &RunConfig, delta: Option<&[f64]>) -> Result<Value> {
    let p = &cfg.params;
    let prob = match delta {
        Some(d) => PhaseProblem::new(p, d)?,
        None => PhaseProblem::from_lattice(p, cfg.require_n()?, cfg.require_x()?)?,
    };
    let sol = prob.solve()?;
    let vec = |v: &[f64]| Value::Array(v.iter().map(|&t| num(t)).collect());
    Ok(json!({
        "rank": p.rank(),
        "q": p.q(),
        "delta": vec(prob.delta()),
        "s_ambient": vec(&sol.s),
        "s_root": vec(&sol.s_root),
        "s_weight": vec(&sol.s_weight),
        "phi": num(sol.phi),
        "h_s": num(sol.h_s),
        "grad_residual": num(sol.grad_residual),
        "b": Value::Array(sol.b.iter().map(|r| vec(r)).collect()),
        "iterations": sol.iterations,
    }))
}

fn region_of(cfg: &RunConfig, kind: RegionKind, ns: Option<&[u64]>) -> Result<Region> {
    let n_max = cfg.require_nmax()?;
    Ok(match kind {
        RegionKind::Rank2Full => Region::Rank2Full { n_max },
        RegionKind::Rank2Interior => Region::Rank2Interior {
            n_max,
            eta: cfg.eta,
        },
        RegionKind::Rank2Boundary => Region::Rank2Boundary { n_max, m: cfg.m },
        RegionKind::Rank1 => Region::Rank1 { n_max },
        RegionKind::RankrInterior => Region::RankRInterior {
            ns: match ns {
                Some(ns) => ns.to_vec(),
                None => (6..=n_max).step_by(6).collect(),
            },
            eta: cfg.eta,
        },
        RegionKind::Weighted => Region::Weighted {
            n_max,
            eta: cfg.eta,
        },
    })
}

/// Writes the sweep rows and a final summary row (omitted for an empty region).
pub fn write_sweep_csv<W: Write>(report: &BandReport, rank: usize, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["n".to_string()];
    header.extend((1..=rank).map(|j| format!("x{j}")));
    header.extend(
        [
            "|x|",
            "d",
            "log_p_oracle",
            "log_estimate",
            "ratio",
            "regime",
        ]
        .map(String::from),
    );
    out.write_record(&header)?;
    for row in &report.rows {
        let mut rec = vec![row.n.to_string()];
        rec.extend(row.x.iter().map(|v| v.to_string()));
        rec.push(row.weight_len().to_string());
        rec.push(row.d.to_string());
        rec.push(fmt17(row.log_p));
        rec.push(fmt17(row.log_estimate));
        rec.push(fmt17(row.ratio()));
        rec.push(row.regime.as_str().to_string());
        out.write_record(&rec)?;
    }
    if !report.is_empty() {
        let mut rec = vec!["summary".to_string()];
        rec.extend(std::iter::repeat_n(String::new(), rank + 2));
        rec.push(fmt17(report.c_min));
        rec.push(fmt17(report.c_max));
        rec.push(fmt17(report.width()));
        rec.push(report.region.name().to_string());
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn cmd_sweep(cfg: &RunConfig, kind: RegionKind, ns: Option<&[u64]>) -> Result<BandReport> {
    let region = region_of(cfg, kind, ns)?;
    let report = certify_sweep(&cfg.params, &region, &cfg.quad)?;
    write_sweep_csv(&report, cfg.params.rank(), cfg.sink()?)?;
    Ok(report)
}

fn check(name: impl Into<String>, passed: bool, witness: Option<String>) -> Diagnostic {
    Diagnostic {
        name: name.into(),
        passed,
        measured: Vec::new(),
        witness: if passed { None } else { witness },
    }
}

fn suite_identities(cfg: &RunConfig) -> Vec<Diagnostic> {
    run_suite(cfg.params.rank(), cfg.nmax.unwrap_or(8) as u32)
        .into_iter()
        .map(|r| {
            let mut name = format!("{:?} {}", r.identity, r.params);
            if !r.values.is_empty() {
                name = format!("{name} [{}]", r.values.join(", "));
            }
            check(name, r.passed, r.witness)
        })
        .collect()
}

fn suite_harnack(cfg: &RunConfig) -> Result<Vec<Diagnostic>> {
    let p = &cfg.params;
    let n_max = cfg.nmax.unwrap_or(200) as usize;
    let mut out = Vec::new();
    if p.rank() == 2 && n_max >= 4 {
        let mins = harnack_minima(p, n_max)?;
        let (first, last) = (mins[mins.len() / 2], mins[mins.len() - 1]);
        let drift = ((last.1 - first.1) / first.1).abs();
        let mut d = check(
            "harnack minimum positive and stable",
            first.1 > 0.0 && drift < 0.1,
            Some(format!(
                "n={} min={}, n={} min={}",
                first.0, first.1, last.0, last.1
            )),
        );
        d.measured = vec![("min".into(), last.1), ("drift".into(), drift)];
        out.push(d);
    }
    let horizon = n_max.min(60);
    let mut chain = RadialChain::new(p, horizon)?;
    let mut bad = None;
    for n in 1..=horizon {
        chain.step()?;
        for x in crate::estimates::dominant_weights(p.rank(), n as i64) {
            let len = x.iter().sum::<i64>() as usize;
            let expect = match p.rank() {
                1 => (n - len).is_multiple_of(2),
                _ => n >= 2 || len == 1,
            };
            let positive = !chain.density(&x)?.is_zero();
            if positive != expect && bad.is_none() {
                bad = Some(format!("n={n} λ={x:?} positive={positive}"));
            }
        }
    }
    out.push(check(
        format!("aperiodicity up to n={horizon}"),
        bad.is_none(),
        bad,
    ));
    Ok(out)
}

pub fn cmd_verify(cfg: &RunConfig, suite: Suite) -> Result<Vec<Diagnostic>> {
    let p = &cfg.params;
    Ok(match suite {
        Suite::Identities => suite_identities(cfg),
        Suite::Lemma34 => {
            let mut v = lemma34_diagnostics(p, cfg.seed)?;
            if p.is_distinguished() {
                v.push(lemma44_check(p, &random_deltas(2, 500, 0.999, cfg.seed))?);
            }
            v
        }
        Suite::GlobalPsi => vec![
            global_psi_diagnostic(p, 1.0, 101),
            local_psi_diagnostic(p, 1.0, 0.3, 13),
        ],
        Suite::Harnack => suite_harnack(cfg)?,
        Suite::Plancherel => {
            let zero = vec![0; p.rank()];
            let v = density_plancherel(p, 0, &zero, &cfg.quad)?.value();
            let err = (v - 1.0).abs();
            let mut d = check(
                "p_0(0) = 1",
                err < 1e-7,
                Some(format!("p_0(0) = {}", fmt17(v))),
            );
            d.measured.push(("error".into(), err));
            vec![d]
        }
        Suite::Eigenfunction => {
            let w = eigenfunction_check(p, 12)?;
            vec![check(
                "Σ p⁺(λ,μ) F_0(μ) = 𝝈 F_0(λ), |λ| <= 12",
                w.is_none(),
                w.map(|x| format!("{x:?}")),
            )]
        }
        Suite::Table => {
            let t = build_table(p)?;
            let one = BigRational::from_integer(1.into());
            t.rows()
                .map(|(region, row)| {
                    let sum: BigRational = row.iter().map(|m| m.prob.clone()).sum();
                    let entries: Vec<String> = row
                        .iter()
                        .map(|m| format!("{:?}: {}", m.step, m.prob))
                        .collect();
                    Diagnostic {
                        name: format!("row {region:?} sums to one"),
                        passed: sum == one && !row.iter().any(|m| m.prob.is_negative()),
                        measured: Vec::new(),
                        witness: Some(entries.join(", ")),
                    }
                })
                .collect()
        }
    })
}

/// Parses arguments, dispatches, and returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    let cfg = RunConfig::from_opts(&cli.opts)?;
    if let Some(t) = cli.opts.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Input(e.to_string()))?;
    }
    match &cli.command {
        Command::Density => write_json(&cfg, &cmd_density(&cfg)?)?,
        Command::Phase { delta } => write_json(&cfg, &cmd_phase(&cfg, delta.as_deref())?)?,
        Command::Sweep { region, ns } => {
            let r = cmd_sweep(&cfg, *region, ns.as_deref())?;
            if !r.is_empty() {
                eprintln!(
                    "{}: {} rows, band [{}, {}]",
                    r.region.name(),
                    r.rows.len(),
                    r.c_min,
                    r.c_max
                );
            }
        }
        Command::Verify { suite } => {
            let diags = cmd_verify(&cfg, *suite)?;
            for d in &diags {
                eprintln!("{} {}", if d.passed { "PASS" } else { "FAIL" }, d.name);
                for (k, v) in &d.measured {
                    eprintln!("    {k} = {v}");
                }
                if let Some(w) = &d.witness {
                    eprintln!("    {w}");
                }
            }
            let passed = diags.iter().all(|d| d.passed);
            write_json(
                &cfg,
                &json!({ "suite": format!("{suite:?}").to_lowercase(), "passed": passed, "checks": diags }),
            )?;
            if !passed {
                let first = diags.iter().find(|d| !d.passed).expect("a failing check");
                return Err(Error::Verification(format!(
                    "{}: {}",
                    first.name,
                    first.witness.as_deref().unwrap_or("no witness")
                )));
            }
        }
    }
    Ok(0)
}
