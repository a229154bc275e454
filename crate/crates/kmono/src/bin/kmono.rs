//! Batch experiment runner: core checks, learners, testers, and the
//! hard-instance experiments, with seeded reproducible outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use kmono::chains::{
    exact_distance_to_k_monotone, longest_alternating_chain_witness,
};
use kmono::function::hamming_distance;
use kmono::learners::{
    coupon_learn, kmono_learn_hypercube, threshold_compose_learn, Hypothesis,
};
use kmono::oracle::OracleConfig;
use kmono::talagrand::{
    birthday_distinguisher, distinguishing_experiment, farness_report, verify_yes_k_monotone,
    write_experiment_csv, ExperimentRow, TalagrandInstance, TalagrandParams,
};
use kmono::testers::{brute_force_projector, one_sided_test, test_by_learning};
use kmono::{DomainKind, FunctionTable};

const VERSION: &str = env!("CARGO_PKG_VERSION");
const BUDGET_ENV: &str = "KMONO_BUDGET";

#[derive(Parser)]
#[command(name = "kmono", version, about = "k-monotonicity testing and learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Structural checks of a function table file.
    Check {
        /// Function table (JSON).
        #[arg(long)]
        file: PathBuf,
        #[command(flatten)]
        params: CommonArgs,
    },
    /// Run a learner against a table-backed oracle and report its error.
    Learn {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = LearnAlgo::LowDegree)]
        algo: LearnAlgo,
        #[command(flatten)]
        params: CommonArgs,
    },
    /// Run a tester over seeded trials and report accept rates.
    Test {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = TestMode::Learning)]
        mode: TestMode,
        #[command(flatten)]
        params: CommonArgs,
    },
    /// Hard-instance experiments.
    Talagrand {
        #[command(subcommand)]
        sub: TalagrandCmd,
    },
}

#[derive(Subcommand)]
enum TalagrandCmd {
    /// Sample an instance and write it as JSON.
    Gen {
        #[arg(long, value_enum, default_value_t = Variant::Yes)]
        variant: Variant,
        #[command(flatten)]
        params: CommonArgs,
    },
    /// Verify sampled yes-instances are exactly k-monotone.
    Verify {
        /// Instance file; omitted means sample `--trials` fresh instances.
        #[arg(long)]
        file: Option<PathBuf>,
        #[command(flatten)]
        params: CommonArgs,
    },
    /// Distance of sampled no-instances from k-monotonicity.
    Farness {
        #[arg(long)]
        file: Option<PathBuf>,
        #[command(flatten)]
        params: CommonArgs,
    },
    /// Sweep the birthday distinguisher over sample sizes.
    Distinguish {
        /// Comma-separated sample sizes, e.g. 1,4,16,64.
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<u64>,
        #[command(flatten)]
        params: CommonArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LearnAlgo {
    LowDegree,
    Coupon,
    Threshold,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestMode {
    Learning,
    OneSided,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Yes,
    No,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Json,
    Csv,
}

/// Flags shared by every command; a JSON config file overrides them
/// field by field.
#[derive(Args, Clone)]
struct CommonArgs {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    r: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Enumeration / sample-count budget (env KMONO_BUDGET supplies the default).
    #[arg(long)]
    budget: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// JSON file whose fields override the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Fully resolved parameters: flags, then config-file overrides, then
/// defaults. Hashed into every artifact.
#[derive(Clone, Serialize)]
struct Params {
    d: usize,
    r: u32,
    k: u32,
    eps: f64,
    delta: f64,
    eta: f64,
    samples: u64,
    trials: u64,
    seed: u64,
    budget: Option<u64>,
}

fn env_budget() -> Option<u64> {
    std::env::var(BUDGET_ENV).ok().and_then(|s| s.parse().ok())
}

impl CommonArgs {
    fn resolve(&self) -> Result<Params, String> {
        let mut p = Params {
            d: self.d.unwrap_or(4),
            r: self.r.unwrap_or(2),
            k: self.k.unwrap_or(1),
            eps: self.eps.unwrap_or(0.3),
            delta: self.delta.unwrap_or(0.1),
            eta: self.eta.unwrap_or(0.0),
            samples: self.samples.unwrap_or(1000),
            trials: self.trials.unwrap_or(100),
            seed: self.seed.unwrap_or(0),
            budget: self.budget.or_else(env_budget),
        };
        if let Some(path) = &self.config {
            let raw = fs::read_to_string(path).map_err(|e| format!("config {path:?}: {e}"))?;
            let v: Value =
                serde_json::from_str(&raw).map_err(|e| format!("config {path:?}: {e}"))?;
            let obj = v
                .as_object()
                .ok_or_else(|| format!("config {path:?}: expected a JSON object"))?;
            macro_rules! take {
                ($key:literal, $field:ident, $as:ident) => {
                    if let Some(x) = obj.get($key) {
                        p.$field = x
                            .$as()
                            .ok_or_else(|| format!("config field {} has wrong type", $key))?
                            as _;
                    }
                };
            }
            take!("d", d, as_u64);
            take!("r", r, as_u64);
            take!("k", k, as_u64);
            take!("eps", eps, as_f64);
            take!("delta", delta, as_f64);
            take!("eta", eta, as_f64);
            take!("samples", samples, as_u64);
            take!("trials", trials, as_u64);
            take!("seed", seed, as_u64);
            if let Some(x) = obj.get("budget") {
                p.budget = Some(
                    x.as_u64()
                        .ok_or_else(|| "config field budget has wrong type".to_string())?,
                );
            }
        }
        if p.k == 0 || p.r < 2 || p.eps <= 0.0 || !(0.0..1.0).contains(&p.delta) {
            return Err("need k >= 1, r >= 2, eps > 0, delta in (0,1)".into());
        }
        Ok(p)
    }

    fn init_workers(&self) {
        if let Some(w) = self.workers {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
        }
    }
}

fn config_hash(p: &Params) -> String {
    let canonical = serde_json::to_string(p).expect("params serialize");
    let digest = Sha256::digest(canonical.as_bytes());
    hex(&digest[..8])
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn stamp(p: &Params) -> Value {
    json!({ "seed": p.seed, "config": config_hash(p), "version": VERSION })
}

/// Write atomically: temp file in the same directory, then rename, so a
/// failed run never leaves a partial artifact.
fn emit(out: Option<&Path>, body: &str) -> Result<(), String> {
    match out {
        None => {
            println!("{body}");
            Ok(())
        }
        Some(path) => {
            let tmp = path.with_extension("tmp");
            fs::write(&tmp, body).map_err(|e| format!("write {tmp:?}: {e}"))?;
            fs::rename(&tmp, path).map_err(|e| format!("rename to {path:?}: {e}"))
        }
    }
}

fn load_table(path: &Path) -> Result<Arc<FunctionTable>, String> {
    let raw = fs::read_to_string(path).map_err(|e| format!("read {path:?}: {e}"))?;
    FunctionTable::from_json(&raw)
        .map(Arc::new)
        .map_err(|e| format!("parse {path:?}: {e}"))
}

fn run() -> Result<(), String> {
    match Cli::parse().command {
        Command::Check { file, params } => cmd_check(&file, &params),
        Command::Learn { file, algo, params } => cmd_learn(&file, algo, &params),
        Command::Test { file, mode, params } => cmd_test(&file, mode, &params),
        Command::Talagrand { sub } => match sub {
            TalagrandCmd::Gen { variant, params } => cmd_tal_gen(variant, &params),
            TalagrandCmd::Verify { file, params } => cmd_tal_verify(file.as_deref(), &params),
            TalagrandCmd::Farness { file, params } => cmd_tal_farness(file.as_deref(), &params),
            TalagrandCmd::Distinguish { sweep, params } => cmd_tal_distinguish(&sweep, &params),
        },
    }
}

fn cmd_check(file: &Path, args: &CommonArgs) -> Result<(), String> {
    let p = args.resolve()?;
    args.init_workers();
    let f = load_table(file)?;
    let (len, witness) = longest_alternating_chain_witness(&f).map_err(|e| e.to_string())?;
    let kmono = len <= p.k;
    let exact = exact_distance_to_k_monotone(&f, p.k, p.budget.map(u128::from))
        .ok()
        .map(|d| json!({ "num": *d.numer(), "den": *d.denom() }));
    let report = json!({
        "k": p.k,
        "k_monotone": kmono,
        "longest_alternating_chain": len,
        "witness": if kmono { Value::Null } else { json!(witness.points) },
        "exact_distance": exact,
        "meta": stamp(&p),
    });
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&report).unwrap())
}

fn cmd_learn(file: &Path, algo: LearnAlgo, args: &CommonArgs) -> Result<(), String> {
    let p = args.resolve()?;
    args.init_workers();
    let f = load_table(file)?;
    let dom = f.domain();
    let r = f.r();
    let cfg = OracleConfig::for_table(f.clone(), p.seed).with_eta(p.eta);
    let (h, used): (Hypothesis, u64) = match algo {
        LearnAlgo::LowDegree => {
            let got = kmono_learn_hypercube(&cfg, p.k, p.eps, p.samples)
                .map_err(|e| e.to_string())?;
            (Hypothesis::LowDegree(got), p.samples)
        }
        LearnAlgo::Coupon => {
            let got = coupon_learn(&cfg, p.samples).map_err(|e| e.to_string())?;
            (Hypothesis::Majority(got), p.samples)
        }
        LearnAlgo::Threshold => {
            let s = p.samples;
            let base = move |c: &OracleConfig, e: f64, _d: f64| {
                let inner = kmono_learn_hypercube(c, p.k, e, s)?;
                Ok((Hypothesis::LowDegree(inner), s))
            };
            threshold_compose_learn(&cfg, &base, p.eps, p.delta).map_err(|e| e.to_string())?
        }
    };
    let ht = h.materialize(dom, r).map_err(|e| e.to_string())?;
    let err = hamming_distance(&f, &ht).map_err(|e| e.to_string())?;
    let report = json!({
        "hypothesis": h,
        "samples_used": used,
        "error": { "num": *err.numer(), "den": *err.denom() },
        "meta": stamp(&p),
    });
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&report).unwrap())
}

fn cmd_test(file: &Path, mode: TestMode, args: &CommonArgs) -> Result<(), String> {
    let p = args.resolve()?;
    args.init_workers();
    let f = load_table(file)?;
    let mut verdicts = Vec::new();
    let mut accepts = 0u64;
    for t in 0..p.trials {
        let seed = kmono::oracle::prf(p.seed, 1 << 40, t);
        let cfg = OracleConfig::for_table(f.clone(), seed).with_eta(p.eta);
        let v = match mode {
            TestMode::Learning => {
                let k = p.k;
                let eps = p.eps;
                let s = p.samples;
                let learner = move |c: &OracleConfig, e: f64, _d: f64| {
                    Ok((Hypothesis::LowDegree(kmono_learn_hypercube(c, k, e, s)?), s))
                };
                test_by_learning(&cfg, k, eps, &learner, &brute_force_projector)
                    .map_err(|e| e.to_string())?
            }
            TestMode::OneSided => {
                let sample = cfg.draw(p.samples).map_err(|e| e.to_string())?;
                one_sided_test(&sample, p.k, seed).map_err(|e| e.to_string())?
            }
        };
        accepts += u64::from(v.accepted());
        verdicts.push(v);
    }
    let report = json!({
        "trials": p.trials,
        "accept_rate": accepts as f64 / p.trials as f64,
        "verdicts": verdicts,
        "meta": stamp(&p),
    });
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&report).unwrap())
}

fn tal_params(p: &Params) -> Result<TalagrandParams, String> {
    TalagrandParams::new(p.d, p.r, p.k, p.eps).map_err(|e| e.to_string())
}

fn cmd_tal_gen(variant: Variant, args: &CommonArgs) -> Result<(), String> {
    let p = args.resolve()?;
    let tp = tal_params(&p)?;
    let inst = match variant {
        Variant::Yes => TalagrandInstance::sample_yes(&tp, p.seed),
        Variant::No => TalagrandInstance::sample_no(&tp, p.seed),
    };
    let body = json!({ "instance": inst, "meta": stamp(&p) });
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&body).unwrap())
}

fn load_instance(path: &Path) -> Result<TalagrandInstance, String> {
    let raw = fs::read_to_string(path).map_err(|e| format!("read {path:?}: {e}"))?;
    let v: Value = serde_json::from_str(&raw).map_err(|e| e.to_string())?;
    let inner = v.get("instance").cloned().unwrap_or(v);
    serde_json::from_value(inner).map_err(|e| format!("parse {path:?}: {e}"))
}

fn cmd_tal_verify(file: Option<&Path>, args: &CommonArgs) -> Result<(), String> {
    let p = args.resolve()?;
    args.init_workers();
    let results: Vec<bool> = match file {
        Some(path) => {
            vec![verify_yes_k_monotone(&load_instance(path)?).map_err(|e| e.to_string())?]
        }
        None => {
            let tp = tal_params(&p)?;
            (0..p.trials)
                .map(|t| {
                    let inst =
                        TalagrandInstance::sample_yes(&tp, kmono::oracle::prf(p.seed, 1 << 41, t));
                    verify_yes_k_monotone(&inst).map_err(|e| e.to_string())
                })
                .collect::<Result<_, _>>()?
        }
    };
    let passed = results.iter().filter(|&&b| b).count();
    let body = json!({
        "instances": results.len(),
        "k_monotone": passed,
        "all_passed": passed == results.len(),
        "meta": stamp(&p),
    });
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&body).unwrap())
}

fn cmd_tal_farness(file: Option<&Path>, args: &CommonArgs) -> Result<(), String> {
    let p = args.resolve()?;
    args.init_workers();
    let reports: Vec<_> = match file {
        Some(path) => vec![farness_report(&load_instance(path)?).map_err(|e| e.to_string())?],
        None => {
            let tp = tal_params(&p)?;
            (0..p.trials)
                .map(|t| {
                    let inst =
                        TalagrandInstance::sample_no(&tp, kmono::oracle::prf(p.seed, 1 << 42, t));
                    farness_report(&inst).map_err(|e| e.to_string())
                })
                .collect::<Result<_, _>>()?
        }
    };
    let mean = reports.iter().map(|r| r.value).sum::<f64>() / reports.len() as f64;
    let body = json!({ "mean_value": mean, "reports": reports, "meta": stamp(&p) });
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&body).unwrap())
}

/// Sweep checkpointing: completed rows are flushed to `<out>.ckpt` as JSON
/// lines keyed by s; an interrupted sweep resumes past them.
fn cmd_tal_distinguish(sweep: &[u64], args: &CommonArgs) -> Result<(), String> {
    let p = args.resolve()?;
    args.init_workers();
    let tp = tal_params(&p)?;
    let sweep: Vec<u64> = if sweep.is_empty() { vec![p.samples] } else { sweep.to_vec() };
    let ckpt_path = args.out.as_ref().map(|o| o.with_extension("ckpt"));
    let mut done: Vec<ExperimentRow> = Vec::new();
    if let Some(cp) = &ckpt_path {
        if let Ok(raw) = fs::read_to_string(cp) {
            for line in raw.lines() {
                if let Ok(row) = serde_json::from_str::<Value>(line) {
                    done.push(ExperimentRow {
                        s: row["s"].as_u64().unwrap_or(0),
                        trials: row["trials"].as_u64().unwrap_or(0),
                        yes_accept: row["yes_accept"].as_f64().unwrap_or(0.0),
                        no_accept: row["no_accept"].as_f64().unwrap_or(0.0),
                        advantage: row["advantage"].as_f64().unwrap_or(0.0),
                        stderr: row["stderr"].as_f64().unwrap_or(0.0),
                    });
                }
            }
        }
    }
    let mut rows = Vec::new();
    for (idx, &s) in sweep.iter().enumerate() {
        if let Some(row) = done.iter().find(|r| r.s == s && r.trials == p.trials) {
            rows.push(row.clone());
            continue;
        }
        let seed = kmono::oracle::prf(p.seed, 1 << 43, idx as u64);
        let row = distinguishing_experiment(&tp, &birthday_distinguisher, s, p.trials, seed)
            .map_err(|e| e.to_string())?;
        if let Some(cp) = &ckpt_path {
            use std::io::Write;
            let mut fh = fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(cp)
                .map_err(|e| e.to_string())?;
            writeln!(fh, "{}", serde_json::to_string(&row).unwrap()).map_err(|e| e.to_string())?;
        }
        rows.push(row);
    }
    let body = match args.format {
        Format::Csv => {
            let mut buf = Vec::new();
            let meta = stamp(&p);
            use std::io::Write;
            writeln!(buf, "# seed={} config={} version={}", p.seed, meta["config"], VERSION)
                .unwrap();
            write_experiment_csv(&mut buf, &rows).map_err(|e| e.to_string())?;
            String::from_utf8(buf).unwrap()
        }
        Format::Json => {
            serde_json::to_string_pretty(&json!({ "rows": rows, "meta": stamp(&p) })).unwrap()
        }
    };
    let res = emit(args.out.as_deref(), &body);
    if res.is_ok() {
        if let Some(cp) = &ckpt_path {
            let _ = fs::remove_file(cp);
        }
    }
    res
}

// Domain re-export used by integration tests of the CLI surface.
#[allow(dead_code)]
fn _type_anchor(_: DomainKind) {}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
