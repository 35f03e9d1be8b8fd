//! `npp`: reproducible experiments on the planted number partitioning
//! problem. Every stochastic subcommand requires `--seed`; identical
//! invocations produce byte-identical CSV output. Exit codes: 0 success,
//! 1 configuration error, 2 enumeration-budget error.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use npp_core::analytics;
use npp_core::heuristics::{Algorithm, ExhaustiveMin, Greedy, Ldm, RandomSearch};
use npp_core::partition::Partition;
use npp_core::sampler::{sample_planted, sample_unplanted_with, PlantedSpec};
use npp_core::scan::{ScanOptions, DEFAULT_BALL_BUDGET, DEFAULT_LEVEL_SET_CAP, DEFAULT_MAX_SCAN_N};
use npp_core::{BoundMultiplier, CoreError, Instance};

use npp_cli::config::{parse_n_list, resolve, ConfigMap};
use npp_cli::experiments::*;
use npp_cli::records::fmt_real;

#[derive(Parser)]
#[command(
    name = "npp",
    version,
    about = "Laboratory for the planted number partitioning problem"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed (required for stochastic commands).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV tables and JSON summaries.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// key=value config file supplying defaults for any flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Fractional bits of the fixed-point grid.
    #[arg(long)]
    frac_bits: Option<u32>,
}

struct Resolved {
    cfg: ConfigMap,
    seed: Option<u64>,
    out_dir: PathBuf,
    frac_bits: u32,
}

impl Common {
    fn resolve(&self) -> Result<Resolved> {
        let cfg = match &self.config {
            Some(p) => ConfigMap::load(p)?,
            None => ConfigMap::default(),
        };
        let seed = match self.seed {
            Some(s) => Some(s),
            None => cfg.get::<u64>("seed")?,
        };
        let out_dir = match &self.out_dir {
            Some(p) => p.clone(),
            None => cfg
                .get::<PathBuf>("out-dir")?
                .unwrap_or_else(|| PathBuf::from(".")),
        };
        let frac_bits = resolve(self.frac_bits, &cfg, "frac-bits", Some(DEFAULT_FRAC_BITS))?;
        Ok(Resolved {
            cfg,
            seed,
            out_dir,
            frac_bits,
        })
    }
}

impl Resolved {
    fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| anyhow!("--seed is required for this command"))
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate instances (unplanted or planted) as text files.
    Sample(SampleArgs),
    /// Run one algorithm on one instance and report the objective.
    Solve(SolveArgs),
    /// Exhaustive scans: ground states, zeta profile, scaling regression.
    Scan(ScanArgs),
    /// Distance-resolved minimum scaling at fixed rho.
    Zeta(ZetaArgs),
    /// Hamming-ball emptiness around the planted partition.
    Isolate(IsolateArgs),
    /// Level sets on interpolated replicas, tuple search, histograms.
    Ogp(OgpArgs),
    /// Overlap trajectories of algorithm outputs along instance paths.
    Interpolate(InterpolateArgs),
    /// Pairwise output overlaps on independent planted replicas.
    Chaos(ChaosArgs),
    /// Hamming stability records on correlated instance pairs.
    Stability(StabilityArgs),
    /// Planted-vs-unplanted classification by a scalar statistic.
    Distinguish(DistinguishArgs),
    /// Success and anti-concentration fractions of an algorithm.
    Probe(ProbeArgs),
    /// Closed-form predictor reports (no randomness).
    Predict(PredictArgs),
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: Option<usize>,
    /// Number of instances to generate.
    #[arg(long)]
    count: Option<u64>,
    #[arg(long)]
    planted: bool,
    /// Planting base C > 2.
    #[arg(long)]
    c: Option<f64>,
    /// Use the sqrt(2)-multiplied conditioning bound.
    #[arg(long)]
    sqrt2_bound: bool,
    /// Hidden partition as a +/- string (defaults to all +).
    #[arg(long)]
    sigma_star: Option<String>,
    /// Print the instance to stdout instead of writing files.
    #[arg(long)]
    stdout: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    /// ldm | greedy | random | exact
    #[arg(long)]
    algorithm: Option<String>,
    /// Random-search budget.
    #[arg(long)]
    budget: Option<u64>,
    /// Instance file; omit to generate one from --n/--seed.
    #[arg(long, value_name = "FILE")]
    r#in: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    planted: bool,
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated sizes, e.g. 16,18,20.
    #[arg(long)]
    n_list: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    planted: bool,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    max_n: Option<usize>,
}

#[derive(Args)]
struct ZetaArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    n_list: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    c: Option<f64>,
    /// Scan the unplanted ensemble instead (reference all-plus sigma*).
    #[arg(long)]
    unplanted: bool,
    #[arg(long)]
    max_n: Option<usize>,
}

#[derive(Args)]
struct IsolateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Ball radius fraction beta (radius = floor(beta n)).
    #[arg(long)]
    beta: Option<f64>,
    /// Alternatively: pick beta with h(beta) equal to this entropy.
    #[arg(long)]
    hb: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    budget: Option<u128>,
}

#[derive(Args)]
struct OgpArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: Option<usize>,
    /// Number of correlated replicas (tuple arity).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Interpolation grid resolution.
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    max_n: Option<usize>,
}

#[derive(Args)]
struct InterpolateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Args)]
struct ChaosArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Args)]
struct StabilityArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    /// Additive stability allowance f.
    #[arg(long)]
    f: Option<f64>,
    /// Multiplicative stability allowance L.
    #[arg(long)]
    l: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Args)]
struct DistinguishArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: Option<usize>,
    /// Trials per class (planted and unplanted).
    #[arg(long)]
    trials: Option<u64>,
    /// exact_min | ldm_value | ball_min | oracle
    #[arg(long)]
    statistic: Option<String>,
    #[arg(long)]
    ball_d: Option<usize>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    max_n: Option<usize>,
}

#[derive(Args)]
struct ProbeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    common: Common,
    /// entropy | entropy-inv | binom | vandermonde | lambda | gauss-box1 |
    /// gauss-box2 | first-moment | ogp-params | chaos-eta | hardness
    #[arg(long)]
    what: Option<String>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    z: Option<f64>,
    #[arg(long)]
    z1: Option<f64>,
    #[arg(long)]
    z2: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    l: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    m: Option<u64>,
    #[arg(long)]
    c2: Option<f64>,
}

fn build_algorithm(name: &str, budget: u64, max_n: usize) -> Result<Box<dyn Algorithm>> {
    match name {
        "ldm" => Ok(Box::new(Ldm)),
        "greedy" => Ok(Box::new(Greedy)),
        "random" => Ok(Box::new(RandomSearch { budget })),
        "exact" => Ok(Box::new(ExhaustiveMin {
            opts: ScanOptions {
                max_n,
                parallel: false,
            },
        })),
        other => bail!("unknown algorithm {other:?} (ldm|greedy|random|exact)"),
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            classify_exit(&e)
        }
    }
}

/// 2 for enumeration-budget violations, 1 for everything else.
fn classify_exit(e: &anyhow::Error) -> i32 {
    for cause in e.chain() {
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            if matches!(
                core,
                CoreError::ScanTooLarge { .. } | CoreError::BallBudget { .. }
            ) {
                return 2;
            }
        }
    }
    1
}

fn dispatch(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Sample(a) => cmd_sample(a),
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Scan(a) => cmd_scan(a),
        Cmd::Zeta(a) => cmd_zeta(a),
        Cmd::Isolate(a) => cmd_isolate(a),
        Cmd::Ogp(a) => cmd_ogp(a),
        Cmd::Interpolate(a) => cmd_interpolate(a),
        Cmd::Chaos(a) => cmd_chaos(a),
        Cmd::Stability(a) => cmd_stability(a),
        Cmd::Distinguish(a) => cmd_distinguish(a),
        Cmd::Probe(a) => cmd_probe(a),
        Cmd::Predict(a) => cmd_predict(a),
    }
}

fn cmd_sample(a: SampleArgs) -> Result<()> {
    let r = a.common.resolve()?;
    let seed = r.require_seed()?;
    let n = resolve(a.n, &r.cfg, "n", None::<usize>)?;
    let count = resolve(a.count, &r.cfg, "count", Some(1u64))?;
    let planted = a.planted || r.cfg.get_flag("planted")?;
    let base_c = resolve(a.c, &r.cfg, "c", Some(3.0))?;
    let bound = if a.sqrt2_bound || r.cfg.get_flag("sqrt2-bound")? {
        BoundMultiplier::Sqrt2
    } else {
        BoundMultiplier::One
    };
    let sigma_star = match a.sigma_star.or(r.cfg.get("sigma-star")?) {
        Some(s) => Some(s.parse::<Partition>().map_err(|e| anyhow!("{e}"))?),
        None => None,
    };
    for i in 0..count {
        let inst_seed = npp_core::rng::derive(seed, i);
        let inst = if planted {
            sample_planted(&PlantedSpec {
                n,
                base_c,
                sigma_star: sigma_star.clone(),
                bound,
                frac_bits: r.frac_bits,
                seed: inst_seed,
            })?
        } else {
            sample_unplanted_with(n, r.frac_bits, inst_seed)?
        };
        if a.stdout {
            print!("{}", inst.to_text());
        } else {
            std::fs::create_dir_all(&r.out_dir)?;
            let path = r.out_dir.join(format!("instance_{seed}_{i:04}.txt"));
            std::fs::write(&path, inst.to_text())
                .with_context(|| format!("writing {}", path.display()))?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let r = a.common.resolve()?;
    let algorithm = resolve(a.algorithm, &r.cfg, "algorithm", Some("ldm".to_string()))?;
    let budget = resolve(a.budget, &r.cfg, "budget", Some(1000u64))?;
    let max_n = DEFAULT_MAX_SCAN_N;
    let alg = build_algorithm(&algorithm, budget, max_n)?;
    let (inst, solve_seed) = match &a.r#in {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            // Only the randomized solver actually consumes the seed.
            let seed = if algorithm == "random" {
                r.require_seed()?
            } else {
                r.seed.unwrap_or(0)
            };
            (Instance::parse_text(&text)?, seed)
        }
        None => {
            let seed = r.require_seed()?;
            let n = resolve(a.n, &r.cfg, "n", None::<usize>)?;
            let planted = a.planted || r.cfg.get_flag("planted")?;
            let base_c = resolve(a.c, &r.cfg, "c", Some(3.0))?;
            let (inst, _) =
                experiments_draw(n, planted, base_c, r.frac_bits, seed)?;
            (inst, seed)
        }
    };
    let sigma = alg.solve(&inst, solve_seed);
    let e = inst.hamiltonian(&sigma)?;
    println!("algorithm={algorithm}");
    println!("n={}", inst.n());
    println!("partition={sigma}");
    println!("inner_product_numerator={}", inst.inner_product(&sigma)?);
    println!("log2_h={}", fmt_real(e.log2_hamiltonian()));
    println!("h={}", fmt_real(e.hamiltonian()));
    Ok(())
}

fn experiments_draw(
    n: usize,
    planted: bool,
    base_c: f64,
    frac_bits: u32,
    seed: u64,
) -> Result<(Instance, Partition)> {
    if planted {
        let inst = sample_planted(&PlantedSpec {
            n,
            base_c,
            sigma_star: None,
            bound: Default::default(),
            frac_bits,
            seed,
        })?;
        let star = inst.planting().unwrap().sigma_star.clone();
        Ok((inst, star))
    } else {
        Ok((
            sample_unplanted_with(n, frac_bits, seed)?,
            Partition::all_plus(n),
        ))
    }
}

fn cmd_scan(a: ScanArgs) -> Result<()> {
    let r = a.common.resolve()?;
    let seed = r.require_seed()?;
    let n_single = match a.n {
        Some(n) => Some(n),
        None => r.cfg.get::<usize>("n")?,
    };
    let n_list = match (n_single, a.n_list.or(r.cfg.get("n-list")?)) {
        (Some(n), None) => vec![n],
        (None, Some(list)) => parse_n_list(&list)?,
        (Some(_), Some(_)) => bail!("pass either --n or --n-list, not both"),
        (None, None) => bail!("missing required parameter --n or --n-list"),
    };
    let p = ScalingParams {
        n_list: n_list.clone(),
        trials: resolve(a.trials, &r.cfg, "trials", Some(1))?,
        seed,
        planted: a.planted || r.cfg.get_flag("planted")?,
        base_c: resolve(a.c, &r.cfg, "c", Some(3.0))?,
        frac_bits: r.frac_bits,
        max_n: resolve(a.max_n, &r.cfg, "max-n", Some(DEFAULT_MAX_SCAN_N))?,
    };
    let rec = run_scaling(&p)?;
    let echo = json!({
        "experiment": "scan",
        "n_list": n_list, "trials": p.trials, "seed": seed,
        "planted": p.planted, "c": p.base_c, "frac_bits": p.frac_bits,
    });
    report(rec.write(&r.out_dir, "scan", &echo)?)
}

fn cmd_zeta(a: ZetaArgs) -> Result<()> {
    let r = a.common.resolve()?;
    let seed = r.require_seed()?;
    let n_list = parse_n_list(&resolve(a.n_list, &r.cfg, "n-list", None::<String>)?)?;
    let rho = resolve(a.rho, &r.cfg, "rho", None::<f64>)?;
    let p = ZetaParams {
        scaling: ScalingParams {
            n_list: n_list.clone(),
            trials: resolve(a.trials, &r.cfg, "trials", Some(200))?,
            seed,
            planted: !(a.unplanted || r.cfg.get_flag("unplanted")?),
            base_c: resolve(a.c, &r.cfg, "c", Some(3.0))?,
            frac_bits: r.frac_bits,
            max_n: resolve(a.max_n, &r.cfg, "max-n", Some(DEFAULT_MAX_SCAN_N))?,
        },
        rho,
    };
    let rec = run_zeta_scaling(&p)?;
    let echo = json!({
        "experiment": "zeta", "rho": rho,
        "n_list": n_list, "trials": p.scaling.trials, "seed": seed,
        "planted": p.scaling.planted, "c": p.scaling.base_c,
    });
    report(rec.write(&r.out_dir, "zeta", &echo)?)
}

fn cmd_isolate(a: IsolateArgs) -> Result<()> {
    let r = a.common.resolve()?;
    let seed = r.require_seed()?;
    let eps = resolve(a.eps, &r.cfg, "eps", None::<f64>)?;
    let beta = match (a.beta.or(r.cfg.get("beta")?), a.hb.or(r.cfg.get("hb")?)) {
        (Some(b), None) => b,
        (None, Some(h)) => beta_from_entropy(h)?,
        (Some(_), Some(_)) => bail!("pass either --beta or --hb, not both"),
        (None, None) => bail!("missing required parameter --beta or --hb"),
    };
    let p = IsolationParams {
        n: resolve(a.n, &r.cfg, "n", None::<usize>)?,
        trials: resolve(a.trials, &r.cfg, "trials", Some(100))?,
        seed,
        base_c: resolve(a.c, &r.cfg, "c", Some(3.0))?,
        frac_bits: r.frac_bits,
        eps,
        beta,
        budget: resolve(a.budget, &r.cfg, "budget", Some(DEFAULT_BALL_BUDGET))?,
    };
    let rec = run_isolation(&p)?;
    let echo = json!({
        "experiment": "isolate", "n": p.n, "trials": p.trials, "seed": seed,
        "eps": eps, "beta": beta, "c": p.base_c,
    });
    report(rec.write(&r.out_dir, "isolate", &echo)?)
}

fn cmd_ogp(a: OgpArgs) -> Result<()> {
    let r = a.common.resolve()?;
    let seed = r.require_seed()?;
    let p = OgpParams {
        n: resolve(a.n, &r.cfg, "n", None::<usize>)?,
        replicas: resolve(a.m, &r.cfg, "m", Some(2))?,
        eps: resolve(a.eps, &r.cfg, "eps", None::<f64>)?,
        delta: resolve(a.delta, &r.cfg, "delta", Some(0.0))?,
        q: resolve(a.q, &r.cfg, "q", Some(5))?,
        trials: resolve(a.trials, &r.cfg, "trials", Some(1))?,
        seed,
        base_c: resolve(a.c, &r.cfg, "c", Some(3.0))?,
        frac_bits: r.frac_bits,
        cap: resolve(a.cap, &r.cfg, "cap", Some(DEFAULT_LEVEL_SET_CAP))?,
        max_n: resolve(a.max_n, &r.cfg, "max-n", Some(DEFAULT_MAX_SCAN_N))?,
    };
    let rec = run_level_set_ogp(&p)?;
    let echo = json!({
        "experiment": "ogp", "n": p.n, "m": p.replicas, "eps": p.eps,
        "delta": p.delta, "q": p.q, "trials": p.trials, "seed": seed,
        "c": p.base_c, "cap": p.cap,
    });
    report(rec.write(&r.out_dir, "ogp", &echo)?)
}

fn cmd_interpolate(a: InterpolateArgs) -> Result<()> {
    let r = a.common.resolve()?;
    let seed = r.require_seed()?;
    let algorithm = resolve(a.algorithm, &r.cfg, "algorithm", Some("ldm".to_string()))?;
    let budget = resolve(a.budget, &r.cfg, "budget", Some(1000u64))?;
    let p = InterpolationParams {
        n: resolve(a.n, &r.cfg, "n", None::<usize>)?,
        replicas: resolve(a.replicas, &r.cfg, "replicas", Some(2))?,
        q: resolve(a.q, &r.cfg, "q", Some(10))?,
        trials: resolve(a.trials, &r.cfg, "trials", Some(1))?,
        seed,
        base_c: resolve(a.c, &r.cfg, "c", Some(3.0))?,
        frac_bits: r.frac_bits,
        algorithm: build_algorithm(&algorithm, budget, DEFAULT_MAX_SCAN_N)?,
    };
    let rec = run_interpolation(&p)?;
    let echo = json!({
        "experiment": "interpolate", "n": p.n, "replicas": p.replicas,
        "q": p.q, "trials": p.trials, "seed": seed, "algorithm": algorithm,
        "c": p.base_c,
    });
    report(rec.write(&r.out_dir, "interpolate", &echo)?)
}

fn cmd_chaos(a: ChaosArgs) -> Result<()> {
    let r = a.common.resolve()?;
    let seed = r.require_seed()?;
    let algorithm = resolve(a.algorithm, &r.cfg, "algorithm", Some("ldm".to_string()))?;
    let budget = resolve(a.budget, &r.cfg, "budget", Some(1000u64))?;
    let p = ChaosParams {
        n: resolve(a.n, &r.cfg, "n", None::<usize>)?,
        replicas: resolve(a.m, &r.cfg, "m", Some(2))?,
        eps: resolve(a.eps, &r.cfg, "eps", None::<f64>)?,
        trials: resolve(a.trials, &r.cfg, "trials", Some(100))?,
        seed,
        base_c: resolve(a.c, &r.cfg, "c", Some(3.0))?,
        frac_bits: r.frac_bits,
        algorithm: build_algorithm(&algorithm, budget, DEFAULT_MAX_SCAN_N)?,
    };
    let rec = run_chaos(&p)?;
    let echo = json!({
        "experiment": "chaos", "n": p.n, "m": p.replicas, "eps": p.eps,
        "trials": p.trials, "seed": seed, "algorithm": algorithm, "c": p.base_c,
    });
    report(rec.write(&r.out_dir, "chaos", &echo)?)
}

fn cmd_stability(a: StabilityArgs) -> Result<()> {
    let r = a.common.resolve()?;
    let seed = r.require_seed()?;
    let algorithm = resolve(a.algorithm, &r.cfg, "algorithm", Some("ldm".to_string()))?;
    let budget = resolve(a.budget, &r.cfg, "budget", Some(1000u64))?;
    let p = StabilityParams {
        n: resolve(a.n, &r.cfg, "n", None::<usize>)?,
        rho: resolve(a.rho, &r.cfg, "rho", None::<f64>)?,
        f: resolve(a.f, &r.cfg, "f", Some(0.0))?,
        l: resolve(a.l, &r.cfg, "l", Some(1.0))?,
        trials: resolve(a.trials, &r.cfg, "trials", Some(100))?,
        seed,
        frac_bits: r.frac_bits,
        algorithm: build_algorithm(&algorithm, budget, DEFAULT_MAX_SCAN_N)?,
    };
    let rec = run_stability(&p)?;
    let echo = json!({
        "experiment": "stability", "n": p.n, "rho": p.rho, "f": p.f, "l": p.l,
        "trials": p.trials, "seed": seed, "algorithm": algorithm,
    });
    report(rec.write(&r.out_dir, "stability", &echo)?)
}

fn cmd_distinguish(a: DistinguishArgs) -> Result<()> {
    let r = a.common.resolve()?;
    let seed = r.require_seed()?;
    let statistic: Statistic = resolve(
        a.statistic,
        &r.cfg,
        "statistic",
        Some("ldm_value".to_string()),
    )?
    .parse()?;
    let p = DistinguishParams {
        n: resolve(a.n, &r.cfg, "n", None::<usize>)?,
        trials: resolve(a.trials, &r.cfg, "trials", Some(200))?,
        seed,
        base_c: resolve(a.c, &r.cfg, "c", Some(3.0))?,
        frac_bits: r.frac_bits,
        statistic,
        ball_d: resolve(a.ball_d, &r.cfg, "ball-d", Some(2))?,
        max_n: resolve(a.max_n, &r.cfg, "max-n", Some(DEFAULT_MAX_SCAN_N))?,
    };
    let rec = run_distinguish(&p)?;
    let echo = json!({
        "experiment": "distinguish", "n": p.n, "trials": p.trials, "seed": seed,
        "statistic": format!("{statistic:?}"), "c": p.base_c, "ball_d": p.ball_d,
    });
    report(rec.write(&r.out_dir, "distinguish", &echo)?)
}

fn cmd_probe(a: ProbeArgs) -> Result<()> {
    let r = a.common.resolve()?;
    let seed = r.require_seed()?;
    let algorithm = resolve(a.algorithm, &r.cfg, "algorithm", Some("ldm".to_string()))?;
    let budget = resolve(a.budget, &r.cfg, "budget", Some(1000u64))?;
    let p = ProbeParams {
        n: resolve(a.n, &r.cfg, "n", None::<usize>)?,
        trials: resolve(a.trials, &r.cfg, "trials", Some(100))?,
        seed,
        base_c: resolve(a.c, &r.cfg, "c", Some(3.0))?,
        frac_bits: r.frac_bits,
        eps: resolve(a.eps, &r.cfg, "eps", Some(0.5))?,
        algorithm: build_algorithm(&algorithm, budget, DEFAULT_MAX_SCAN_N)?,
    };
    let rec = run_success_and_anticoncentration(&p)?;
    let echo = json!({
        "experiment": "probe", "n": p.n, "trials": p.trials, "seed": seed,
        "eps": p.eps, "algorithm": algorithm, "c": p.base_c,
    });
    report(rec.write(&r.out_dir, "probe", &echo)?)
}

fn cmd_predict(a: PredictArgs) -> Result<()> {
    let r = a.common.resolve()?;
    let what = resolve(a.what, &r.cfg, "what", None::<String>)?;
    let need = |v: Option<f64>, key: &str| -> Result<f64> {
        resolve(v, &r.cfg, key, None::<f64>)
    };
    let mut out = Vec::new();
    match what.as_str() {
        "entropy" => {
            let p = need(a.p, "p")?;
            out.push(("h", fmt_real(analytics::binary_entropy(p)?)));
        }
        "entropy-inv" => {
            let y = need(a.p, "p")?;
            out.push(("p", fmt_real(analytics::binary_entropy_inv(y)?)));
        }
        "binom" => {
            let n = resolve(a.n, &r.cfg, "n", None::<u64>)?;
            let k = resolve(a.k, &r.cfg, "k", None::<u64>)?;
            let c = analytics::binom_exact(n, k)?;
            out.push(("binom", c.to_string()));
            out.push(("log2_binom", fmt_real(analytics::log2_biguint(&c))));
        }
        "vandermonde" => {
            let n = resolve(a.n, &r.cfg, "n", None::<u64>)?;
            let k = resolve(a.k, &r.cfg, "k", None::<u64>)?;
            let holds = analytics::vandermonde_convolution_holds(n, k)?;
            out.push(("holds", holds.to_string()));
        }
        "lambda" => {
            let rho = need(a.rho, "rho")?;
            out.push((
                "lambda",
                fmt_real(analytics::overlap_gram_min_eigenvalue(rho)?),
            ));
        }
        "gauss-box1" => {
            let z = need(a.z, "z")?;
            let b = analytics::gauss_box_1(z)?;
            out.push(("lower", fmt_real(b.lower)));
            out.push(("upper", fmt_real(b.upper)));
            out.push(("approx", fmt_real(b.approx)));
        }
        "gauss-box2" => {
            let z1 = need(a.z1, "z1")?;
            let z2 = need(a.z2, "z2")?;
            let rho = need(a.rho, "rho")?;
            let (lo, hi) = analytics::gauss_box_2(z1, z2, rho)?;
            out.push(("lower", fmt_real(lo)));
            out.push(("upper", fmt_real(hi)));
        }
        "first-moment" => {
            let n = resolve(a.n, &r.cfg, "n", None::<u64>)?;
            let rho = need(a.rho, "rho")?;
            let scale = need(a.scale, "scale")?;
            let m = analytics::expected_count_at_distance(n, rho, scale)?;
            out.push(("expected_count", fmt_real(m.expected_count)));
            out.push(("log2_expected", fmt_real(m.log2_expected)));
            out.push(("regime", format!("{:?}", m.regime).to_lowercase()));
        }
        "ogp-params" => {
            let eps = need(a.eps, "eps")?;
            let delta = resolve(a.delta, &r.cfg, "delta", Some(0.0))?;
            let p = analytics::ogp_parameters(eps, delta)?;
            out.push(("m", p.m.to_string()));
            out.push(("c", fmt_real(p.c)));
            out.push(("beta", fmt_real(p.beta)));
            out.push(("eta", fmt_real(p.eta)));
        }
        "chaos-eta" => {
            let eps = need(a.eps, "eps")?;
            out.push(("eta_star", fmt_real(analytics::chaos_eta_star(eps)?)));
        }
        "hardness" => {
            let eps = need(a.eps, "eps")?;
            let l = need(a.l, "l")?;
            let eta = need(a.eta, "eta")?;
            let m = resolve(a.m, &r.cfg, "m", None::<u64>)?;
            let c2 = resolve(a.c2, &r.cfg, "c2", Some(2.0))?;
            let h = analytics::hardness_parameters(eps, l, eta, m, c2)?;
            out.push(("c1", fmt_real(h.c1)));
            out.push(("q", fmt_real(h.q)));
            out.push(("rho", fmt_real(h.rho)));
            out.push(("log2_log2_t", fmt_real(h.log2_log2_t)));
            out.push(("log2_inv_pst_excess", fmt_real(h.log2_inv_pst_excess())));
            out.push(("log2_inv_pl_excess", fmt_real(h.log2_inv_pl_excess())));
            if let Some(n) = a.n {
                out.push(("log2_inv_pf_excess", fmt_real(h.log2_inv_pf_excess(n))));
            }
        }
        other => bail!("unknown predictor {other:?}"),
    }
    for (k, v) in out {
        println!("{k}={v}");
    }
    Ok(())
}

fn report(paths: Vec<PathBuf>) -> Result<()> {
    for p in paths {
        println!("{}", p.display());
    }
    Ok(())
}
