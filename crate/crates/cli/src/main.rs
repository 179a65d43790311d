//! Command-line front end: instance generation, parameter sweeps to CSV, and
//! the claim verification harness.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use swivel_core::combos::{self, ComboFile};
use swivel_core::error::Error as CoreError;
use swivel_core::recovery::{self, RecoveryKind, TripartiteState};
use swivel_core::states::{
    random_density, random_positive, random_channel, Instance, InstanceFile,
};
use swivel_core::swivel::{self, Budget};
use swivel_core::verify::{self, ClaimConfig};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "swivel", version, about = "Swiveled Renyi entropic quantities toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance file (seeded, byte-reproducible).
    Gen(GenArgs),
    /// Sweep a quantity over a parameter grid and write CSV.
    Sweep(SweepArgs),
    /// Run a registered claim over seeded trials and write a JSON report.
    Verify(VerifyArgs),
    /// List the registered claims with their defaults.
    ListClaims,
}

#[derive(Args)]
struct GenArgs {
    /// Input-space subsystem dimensions, comma separated (e.g. 2,2).
    #[arg(long, value_delimiter = ',', conflicts_with = "tripartite")]
    dims: Option<Vec<usize>>,
    /// Generate a tripartite (CMI-ready) instance with these three dims.
    #[arg(long, value_delimiter = ',')]
    tripartite: Option<Vec<usize>>,
    /// Number of Kraus operators of the random channel.
    #[arg(long, default_value_t = 2)]
    kraus: usize,
    /// Channel output dimension (defaults to the input dimension).
    #[arg(long)]
    dout: Option<usize>,
    /// Rank of the random state (defaults to full rank).
    #[arg(long)]
    rank: Option<usize>,
    /// Trace of the random positive operator σ.
    #[arg(long, default_value_t = 1.0)]
    sigma_trace: f64,
    /// Master seed (falls back to the SWIVEL_SEED environment variable).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Quantity {
    DeltaPrime,
    DeltaTildePrime,
    CmiPrime,
    CmiTildePrime,
    LPrime,
    LTildePrime,
    TraceQuantity,
    RecoveryCurves,
}

#[derive(Args)]
struct SweepArgs {
    /// What to sweep.
    #[arg(long, value_enum)]
    quantity: Quantity,
    /// Instance file produced by `gen`.
    #[arg(long)]
    instance: PathBuf,
    /// Combo file (for l-prime / l-tilde-prime sweeps).
    #[arg(long)]
    combo: Option<PathBuf>,
    /// Mixing parameter for combo normalization.
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// Grid points, comma separated; `inf` is allowed. Defaults per quantity.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<String>>,
    /// Optimizer budget as RESTARTSxEVALS (e.g. 8x200000).
    #[arg(long, default_value = "8x200000")]
    budget: String,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Claim id (see list-claims).
    claim: String,
    /// Number of seeded trials (defaults per claim).
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed (falls back to SWIVEL_SEED, then 1).
    #[arg(long)]
    seed: Option<u64>,
    /// Override the claim's default tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Worker threads for the trial loop.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Optimizer budget as RESTARTSxEVALS.
    #[arg(long, default_value = "8x200000")]
    budget: String,
    /// Write the JSON report here (stdout gets a one-line summary).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Gen(args) => run(cmd_gen(args)),
        Command::Sweep(args) => run(cmd_sweep(args)),
        Command::Verify(args) => match cmd_verify(args) {
            Ok(passed) => {
                if passed {
                    0
                } else {
                    1
                }
            }
            Err(e) => report_error(e),
        },
        Command::ListClaims => run(cmd_list_claims()),
    };
    std::process::exit(code);
}

fn run(result: Result<(), CoreError>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) => report_error(e),
    }
}

fn report_error(e: CoreError) -> i32 {
    eprintln!("error: {e}");
    match e {
        CoreError::NonConvergence(_) => 3,
        CoreError::UnknownClaim(_) => 2,
        _ => 2,
    }
}

fn master_seed(explicit: Option<u64>) -> u64 {
    explicit
        .or_else(|| std::env::var("SWIVEL_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(1)
}

fn parse_budget(text: &str) -> Result<Budget, CoreError> {
    let (restarts, evals) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| CoreError::InvalidInput(format!("budget must be RESTARTSxEVALS, got {text}")))?;
    Ok(Budget {
        restarts: restarts
            .parse()
            .map_err(|_| CoreError::InvalidInput(format!("bad restart count {restarts}")))?,
        max_evals: evals
            .parse()
            .map_err(|_| CoreError::InvalidInput(format!("bad eval count {evals}")))?,
    })
}

fn cmd_gen(args: GenArgs) -> Result<(), CoreError> {
    let seed = master_seed(args.seed);
    let file = if let Some(dims) = args.tripartite {
        if dims.len() != 3 {
            return Err(CoreError::InvalidInput("--tripartite needs three dims".into()));
        }
        let state = TripartiteState::random_pd([dims[0], dims[1], dims[2]], seed)?;
        let inst = state.cmi_instance()?;
        let mut labels = BTreeMap::new();
        labels.insert("structure".to_string(), "tripartite".to_string());
        InstanceFile::from_instance(&inst, dims, labels)
    } else {
        let dims = args
            .dims
            .ok_or_else(|| CoreError::InvalidInput("need --dims or --tripartite".into()))?;
        let din: usize = dims.iter().product();
        let dout = args.dout.unwrap_or(din);
        let rank = args.rank.unwrap_or(din);
        let rho = random_density(din, rank, swivel_core::states::derive_seed(seed, 1))?;
        let sigma =
            random_positive(din, args.sigma_trace, swivel_core::states::derive_seed(seed, 2))?;
        let channel =
            random_channel(din, dout, args.kraus, swivel_core::states::derive_seed(seed, 3))?;
        let inst = Instance::new(rho, sigma, channel, Some(seed))?;
        InstanceFile::from_instance(&inst, dims, BTreeMap::new())
    };
    std::fs::write(&args.out, file.to_json()?)?;
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

fn parse_grid(entries: &[String]) -> Result<Vec<f64>, CoreError> {
    entries
        .iter()
        .map(|s| {
            if s == "inf" {
                Ok(f64::INFINITY)
            } else {
                s.parse::<f64>()
                    .map_err(|_| CoreError::InvalidInput(format!("bad grid value {s}")))
            }
        })
        .collect()
}

fn default_grid(quantity: Quantity) -> Vec<f64> {
    match quantity {
        Quantity::DeltaPrime | Quantity::CmiPrime | Quantity::LPrime => {
            (0..=20).map(|k| k as f64 * 0.1).filter(|a| (a - 1.0).abs() > 1e-9).collect()
        }
        Quantity::DeltaTildePrime | Quantity::CmiTildePrime | Quantity::LTildePrime => {
            vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.25, 1.5, 2.0, 4.0, 8.0, f64::INFINITY]
        }
        Quantity::TraceQuantity => vec![2.0, 3.0, 4.0, 8.0, 16.0],
        Quantity::RecoveryCurves => {
            let mut grid = Vec::new();
            let mut t = -10.0f64;
            while t <= 10.0 + 1e-12 {
                grid.push(t);
                t += 0.05;
            }
            grid
        }
    }
}

/// Shortest round-trip decimal; NaN spelled `nan`.
fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

fn params_hash(params: &[f64]) -> String {
    let mut hasher = Sha256::new();
    for p in params {
        hasher.update(p.to_le_bytes());
    }
    let digest = hasher.finalize();
    hex16(&digest)
}

fn hex16(digest: &[u8]) -> String {
    digest.iter().take(8).fold(String::new(), |mut acc, b| {
        let _ = write!(acc, "{b:02x}");
        acc
    })
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CoreError> {
    let instance_bytes = std::fs::read(&args.instance)?;
    let file = InstanceFile::from_json(std::str::from_utf8(&instance_bytes).map_err(|e| {
        CoreError::InvalidInput(format!("instance file is not UTF-8: {e}"))
    })?)?;
    let inst = file.to_instance()?;
    let budget = parse_budget(&args.budget)?;
    let grid = match &args.grid {
        Some(entries) => parse_grid(entries)?,
        None => default_grid(args.quantity),
    };
    // α-sweeps must keep clear of the degenerate point α = 1.
    let is_alpha_sweep = !matches!(args.quantity, Quantity::TraceQuantity | Quantity::RecoveryCurves);
    if is_alpha_sweep && grid.iter().any(|a| (a - 1.0).abs() < 1e-6) {
        return Err(CoreError::InvalidInput(
            "alpha grid must exclude 1 by at least 1e-6 (the quantities are discontinuous there)"
                .into(),
        ));
    }

    let mut digest_input = Sha256::new();
    digest_input.update(&instance_bytes);
    digest_input.update(format!("{:?}", args.quantity));
    for g in &grid {
        digest_input.update(g.to_le_bytes());
    }
    digest_input.update(args.budget.as_bytes());
    let digest = hex16(&digest_input.finalize());

    let mut out = String::new();
    let _ = writeln!(out, "# swivel {VERSION} digest={digest}");
    let _ = writeln!(out, "param,value,certified,optimum_params_hash,error");

    let combo_nc = match args.quantity {
        Quantity::LPrime | Quantity::LTildePrime => {
            let combo_path = args
                .combo
                .as_ref()
                .ok_or_else(|| CoreError::InvalidInput("l-prime sweeps need --combo".into()))?;
            let combo_file: ComboFile = serde_json::from_str(&std::fs::read_to_string(combo_path)?)?;
            let combo = combo_file.to_combo()?;
            Some(
                combos::normalize_combo(&combo, inst.rho(), args.epsilon)?
                    .with_seed(file.seed),
            )
        }
        _ => None,
    };

    let state = match args.quantity {
        Quantity::CmiPrime | Quantity::CmiTildePrime => {
            if file.dims.len() != 3 {
                return Err(CoreError::InvalidInput(
                    "cmi sweeps need a tripartite instance".into(),
                ));
            }
            Some(TripartiteState::new(
                inst.rho().clone(),
                [file.dims[0], file.dims[1], file.dims[2]],
                Some(file.seed),
            )?)
        }
        _ => None,
    };

    if args.quantity == Quantity::RecoveryCurves {
        for &t in &grid {
            let row = (|| -> Result<(f64, f64), CoreError> {
                let map =
                    recovery::build_recovery(RecoveryKind::Rotated(t), inst.sigma(), inst.channel())?;
                let omega = map.apply_herm(inst.n_rho())?;
                Ok((
                    swivel_core::entropy::d0_ops(inst.rho().op(), &omega),
                    swivel_core::entropy::d2_ops(inst.rho().op(), &omega),
                ))
            })();
            match row {
                Ok((d0, d2)) => {
                    let _ = writeln!(out, "{},{},true,d0,", fmt_f64(t), fmt_f64(d0));
                    let _ = writeln!(out, "{},{},true,d2,", fmt_f64(t), fmt_f64(d2));
                }
                Err(e) => {
                    let _ = writeln!(out, "{},nan,false,,{e}", fmt_f64(t));
                }
            }
        }
    } else {
        for &x in &grid {
            let result: Result<(f64, bool, String), CoreError> = match args.quantity {
                Quantity::DeltaPrime => swivel::delta_prime(&inst, x, &budget)
                    .map(|v| (v.value, v.certified, params_hash(&v.point.params))),
                Quantity::DeltaTildePrime => swivel::delta_tilde_prime(&inst, x, &budget)
                    .map(|v| (v.value, v.certified, params_hash(&v.point.params))),
                Quantity::CmiPrime => {
                    recovery::cmi_prime(state.as_ref().unwrap(), x, &budget)
                        .map(|v| (v.value, v.certified, params_hash(&v.point.params)))
                }
                Quantity::CmiTildePrime => {
                    recovery::cmi_tilde_prime(state.as_ref().unwrap(), x, &budget)
                        .map(|v| (v.value, v.certified, params_hash(&v.point.params)))
                }
                Quantity::LPrime => combos::l_prime(combo_nc.as_ref().unwrap(), x, &budget)
                    .map(|v| (v.value, v.certified, String::new())),
                Quantity::LTildePrime => {
                    combos::l_tilde_prime(combo_nc.as_ref().unwrap(), x, &budget)
                        .map(|v| (v.value, v.certified, String::new()))
                }
                Quantity::TraceQuantity => combos::trace_quantity(&inst, x, &budget)
                    .map(|v| (v.value, v.certified, String::new())),
                Quantity::RecoveryCurves => unreachable!(),
            };
            match result {
                Ok((value, certified, hash)) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},",
                        fmt_f64(x),
                        fmt_f64(value),
                        certified,
                        hash
                    );
                }
                Err(e) => {
                    let _ = writeln!(out, "{},nan,false,,{e}", fmt_f64(x));
                }
            }
        }
    }

    std::fs::write(&args.out, out)?;
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<bool, CoreError> {
    let trials = args
        .trials
        .or_else(|| verify::default_trials(&args.claim))
        .ok_or_else(|| CoreError::UnknownClaim(args.claim.clone()))?;
    let cfg = ClaimConfig {
        trials,
        seed: master_seed(args.seed),
        tolerance: args.tolerance,
        budget: parse_budget(&args.budget)?,
        jobs: args.jobs.max(1),
    };
    let report = verify::run_claim(&args.claim, &cfg)?;
    let status = if report.passed() { "PASS" } else { "FAIL" };
    println!(
        "[{status}] {} trials={} passes={} worst_violation={:+.3e} tolerance={:.1e}",
        report.claim_id, report.trials, report.passes, report.worst_violation, report.tolerance
    );

    if let Some(path) = args.out {
        let mut digest = Sha256::new();
        digest.update(report.claim_id.as_bytes());
        digest.update(cfg.seed.to_le_bytes());
        digest.update(cfg.trials.to_le_bytes());
        let envelope = serde_json::json!({
            "version": VERSION,
            "input_digest": hex16(&digest.finalize()),
            "report": report,
        });
        std::fs::write(&path, serde_json::to_string_pretty(&envelope)?)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(report.passed())
}

fn cmd_list_claims() -> Result<(), CoreError> {
    for claim in verify::list_claims() {
        println!(
            "{:<22} trials={:<3} tolerance={:<8.1e} {}",
            claim.id, claim.default_trials, claim.default_tolerance, claim.description
        );
    }
    Ok(())
}
