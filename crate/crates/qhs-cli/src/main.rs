//! `qhs`: command-line front end for the hidden subgroup toolkit.
//!
//! Every run prints a JSON report to stdout, optionally writes a tabular
//! artifact (`--output`, CSV or JSON), and always writes a manifest
//! describing what ran. Exit codes: 0 success, 2 the algorithm ran but
//! stayed inconclusive, 1 usage or domain error.

mod formats;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::mpsc;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde_json::{json, Value};

use qhs_core::freegrp::{
    coset_enumerate, generalized_shor_free, lift_hsp, shortlex_transversal, FreeGroupError,
};
use qhs_core::groups::{FiniteAbelianGroup, Subgroup};
use qhs_core::grover::grover_run;
use qhs_core::qrand::{qrand, solve_abelian_hsp, HspError};
use qhs_core::qsim::{sample, HsOracle, MeasurementOutcome, OutcomeLabel};
use qhs_core::shor::{
    dual_shor, dual_shor_instance, factor, recover_period, shor_distribution,
    wandering_shor_exponent, CandidateSource, LatticeOracle, ShorConfig, ShorError,
};

#[derive(Parser)]
#[command(
    name = "qhs",
    version,
    about = "Deterministic simulator and solvers for hidden subgroup problems"
)]
struct Cli {
    /// Base RNG seed; defaults to the QHS_SEED environment variable, then 0.
    /// Trial i runs with seed base+i.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of independent sampling trials.
    #[arg(long, global = true, default_value_t = 1)]
    trials: u32,

    /// Worker threads used to run trials; results stay ordered by trial.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: u32,

    /// Path for the tabular artifact, when the subcommand produces one.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Artifact file format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Manifest path (default: next to the artifact, else ./qhs_manifest.json).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Order-finding distribution and period recovery for a^x mod N
    Shor(ShorArgs),
    /// Recover a hidden divisor of Q from an exactly periodic oracle
    DualShor(DualShorArgs),
    /// Exponent of a hidden finite quotient of Z^n found by random probing
    Wandering(WanderingArgs),
    /// Exact one-query dual distribution for a coset oracle
    Qrand(QrandArgs),
    /// Amplitude amplification search at the optimal iteration count
    Grover(GroverArgs),
    /// Finitely presented groups: enumeration, transversals, reconstruction
    Freegroup(FreegroupArgs),
    /// Recover a hidden bitmask on n bits from its XOR-coset oracle
    Simon(SimonArgs),
}

#[derive(Args)]
struct ShorArgs {
    #[command(subcommand)]
    action: Option<ShorAction>,

    /// Modulus N the oracle works against
    #[arg(long)]
    n: Option<u64>,

    /// Base a of the oracle x -> a^x mod N
    #[arg(long)]
    a: Option<u64>,

    /// Measurement samples drawn per trial before period recovery
    #[arg(long, default_value_t = 1)]
    samples: u32,

    /// Write the full measurement distribution to this path
    #[arg(long)]
    emit_distribution: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ShorAction {
    /// Factor N end to end, retrying random bases until one works
    Factor(FactorArgs),
}

#[derive(Args)]
struct FactorArgs {
    /// Odd composite to factor
    #[arg(long)]
    n: u64,

    /// Attempt budget across random bases
    #[arg(long = "attempts", default_value_t = 32)]
    max_attempts: u32,
}

#[derive(Args)]
struct DualShorArgs {
    /// Ambient modulus Q
    #[arg(long)]
    q: u64,

    /// Hidden divisor a of Q encoded by the oracle
    #[arg(long = "hidden-a")]
    a: u64,

    /// Dual samples drawn per trial
    #[arg(long, default_value_t = 8)]
    samples: u32,
}

#[derive(Args)]
struct WanderingArgs {
    /// Rank n of the ambient free abelian group Z^n
    #[arg(long)]
    rank: usize,

    /// Hidden lattice generators, e.g. "2,0;0,3" for rank 2
    #[arg(long = "k")]
    k: String,

    /// Upper bound on the quotient exponent
    #[arg(long, default_value_t = 8)]
    bound: u64,

    /// Consecutive non-growing rounds required before stopping
    #[arg(long, default_value_t = 3)]
    stability: u32,

    /// Total round budget
    #[arg(long, default_value_t = 40)]
    max_rounds: u32,
}

#[derive(Args)]
struct QrandArgs {
    /// Cyclic factor orders of the ambient group, e.g. "2,2"
    #[arg(long)]
    group: String,

    /// Hidden subgroup generators as coordinate tuples, e.g. "1,1;0,1".
    /// Omitted means the trivial subgroup.
    #[arg(long)]
    hidden: Option<String>,
}

#[derive(Args)]
struct GroverArgs {
    /// Number of qubits n; the search space has 2^n states
    #[arg(long)]
    qubits: u32,

    /// Index of the marked state
    #[arg(long)]
    target: usize,

    /// Stdout rendering for the run report
    #[arg(long, value_enum, default_value_t = Format::Json)]
    report: Format,
}

#[derive(Args)]
struct FreegroupArgs {
    #[command(subcommand)]
    action: FreegroupAction,
}

#[derive(Subcommand)]
enum FreegroupAction {
    /// Enumerate the group a presentation defines and report its order
    Enumerate(EnumerateArgs),
    /// Shortlex-minimal word for every element of a presented group
    Transversal(TransversalArgs),
    /// Reconstruct a presentation of a hidden quotient by sampling
    Gshor(GshorArgs),
}

#[derive(Args)]
struct EnumerateArgs {
    /// Presentation text like "rank=2; relators=x1^3, x2^2, (x1 x2)^2",
    /// or a path to a file holding it
    #[arg(long)]
    presentation: String,

    /// Coset budget for the enumeration
    #[arg(long, default_value_t = 512)]
    max_cosets: usize,
}

#[derive(Args)]
struct TransversalArgs {
    /// Presentation of the group to enumerate, inline or a file path
    #[arg(long)]
    presentation: String,

    /// Coset budget for the enumeration
    #[arg(long, default_value_t = 512)]
    max_cosets: usize,
}

#[derive(Args)]
struct GshorArgs {
    /// Presentation realizing the map out of the free group whose
    /// kernel is reconstructed; the oracle labels by its cosets
    #[arg(long = "kernel-spec")]
    kernel_spec: String,

    /// Presentation of the finite probe group used to address the oracle
    #[arg(long)]
    probe: String,

    /// Known order of the hidden quotient (the stopping condition)
    #[arg(long)]
    target_order: u64,

    /// Longest relator length searched per round
    #[arg(long, default_value_t = 2)]
    radius: usize,

    /// Relator budget before giving up
    #[arg(long, default_value_t = 24)]
    max_relators: usize,

    /// Coset budget when realizing the quotient presentation
    #[arg(long, default_value_t = 512)]
    max_cosets: usize,
}

#[derive(Args)]
struct SimonArgs {
    /// Number of bits n; the domain is the n-fold direct power of Z_2
    #[arg(long)]
    bits: usize,

    /// Hidden bitmask s as comma-separated bits, e.g. "1,1"
    #[arg(long)]
    hidden: String,

    /// Stop once the candidate subgroup is stable at this confidence
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,

    /// Query budget per trial
    #[arg(long, default_value_t = 64)]
    max_rounds: u32,
}

/// Everything a finished run hands back to `main` for reporting.
struct RunOutput {
    name: &'static str,
    params: Value,
    report: Value,
    artifacts: Vec<PathBuf>,
    conclusive: bool,
    /// Alternative stdout rendering (report stays JSON in the manifest).
    report_csv: Option<String>,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = err.print();
                return 0;
            }
            let text = err.to_string();
            let line = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("bad arguments");
            let line = line.strip_prefix("error: ").unwrap_or(line);
            eprintln!("qhs: {line}");
            return 1;
        }
    };
    let seed = match resolve_seed(&cli) {
        Ok(seed) => seed,
        Err(msg) => {
            eprintln!("qhs: {msg}");
            return 1;
        }
    };
    match dispatch(&cli, seed) {
        Ok(out) => {
            let status = if out.conclusive { 0 } else { 2 };
            if let Err(msg) = write_manifest(&cli, seed, &out, status) {
                eprintln!("qhs: {msg}");
                return 1;
            }
            let rendered = match &out.report_csv {
                Some(text) => text.clone(),
                None => {
                    let mut pretty =
                        serde_json::to_string_pretty(&out.report).expect("report serializes");
                    pretty.push('\n');
                    pretty
                }
            };
            // A closed reader (e.g. piped into head) is not a failure:
            // the manifest is already on disk, so just stop printing.
            use std::io::Write;
            let _ = std::io::stdout().lock().write_all(rendered.as_bytes());
            status
        }
        Err(msg) => {
            eprintln!("qhs: {msg}");
            1
        }
    }
}

fn resolve_seed(cli: &Cli) -> Result<u64, String> {
    if let Some(seed) = cli.seed {
        return Ok(seed);
    }
    match std::env::var("QHS_SEED") {
        Ok(raw) => raw
            .trim()
            .parse()
            .map_err(|_| format!("QHS_SEED must be an unsigned integer, got '{raw}'")),
        Err(_) => Ok(0),
    }
}

fn trial_rng(seed: u64, trial: u32) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed.wrapping_add(trial as u64))
}

fn dispatch(cli: &Cli, seed: u64) -> Result<RunOutput, String> {
    match &cli.command {
        Command::Shor(args) => run_shor(cli, args, seed),
        Command::DualShor(args) => run_dual_shor(cli, args, seed),
        Command::Wandering(args) => run_wandering(cli, args, seed),
        Command::Qrand(args) => run_qrand(cli, args, seed),
        Command::Grover(args) => run_grover(cli, args, seed),
        Command::Freegroup(args) => match &args.action {
            FreegroupAction::Enumerate(a) => run_fg_enumerate(cli, a),
            FreegroupAction::Transversal(a) => run_fg_transversal(cli, a),
            FreegroupAction::Gshor(a) => run_fg_gshor(cli, a, seed),
        },
        Command::Simon(args) => run_simon(cli, args, seed),
    }
}

fn write_manifest(cli: &Cli, seed: u64, out: &RunOutput, status: i32) -> Result<(), String> {
    let path = cli
        .manifest
        .clone()
        .or_else(|| {
            out.artifacts.first().map(|artifact| {
                let mut raw = artifact.as_os_str().to_os_string();
                raw.push(".manifest.json");
                PathBuf::from(raw)
            })
        })
        .unwrap_or_else(|| PathBuf::from("qhs_manifest.json"));
    let artifacts: Vec<String> = out
        .artifacts
        .iter()
        .map(|p| p.display().to_string())
        .collect();
    let doc = json!({
        "schema_version": 1,
        "tool": "qhs",
        "subcommand": out.name,
        "seed": seed,
        "trials": cli.trials,
        "jobs": cli.jobs,
        "parameters": out.params,
        "artifacts": artifacts,
        "exit_status": status,
        "result": out.report,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("manifest serializes");
    text.push('\n');
    std::fs::write(&path, text)
        .map_err(|e| format!("cannot write manifest {}: {e}", path.display()))
}

/// Runs trials 0..trials, on up to `jobs` threads, preserving trial
/// order in the returned vector. The first error wins.
fn run_trials<T, F>(trials: u32, jobs: u32, run_one: F) -> Result<Vec<T>, String>
where
    T: Send,
    F: Fn(u32) -> Result<T, String> + Sync,
{
    if trials == 0 {
        return Err("--trials must be at least 1".into());
    }
    let workers = jobs.clamp(1, trials.min(64));
    if workers == 1 {
        return (0..trials).map(run_one).collect();
    }
    let next = AtomicU32::new(0);
    let (tx, rx) = mpsc::channel::<(u32, Result<T, String>)>();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            let run_one = &run_one;
            scope.spawn(move || loop {
                let t = next.fetch_add(1, Ordering::Relaxed);
                if t >= trials {
                    break;
                }
                if tx.send((t, run_one(t))).is_err() {
                    break;
                }
            });
        }
    });
    drop(tx);
    let mut slots: Vec<Option<Result<T, String>>> = (0..trials).map(|_| None).collect();
    for (t, result) in rx {
        slots[t as usize] = Some(result);
    }
    slots
        .into_iter()
        .map(|slot| slot.expect("every trial slot filled"))
        .collect()
}

fn distribution_rows(dist: &[MeasurementOutcome]) -> Vec<(String, String)> {
    dist.iter()
        .map(|o| {
            (
                formats::label_string(&o.label),
                formats::prob_string(o.probability),
            )
        })
        .collect()
}

fn write_rows(
    path: &Path,
    format: Format,
    header: (&str, &str),
    rows: &[(String, String)],
) -> Result<(), String> {
    let text = match format {
        Format::Csv => formats::rows_csv(header, rows),
        Format::Json => formats::rows_json(header, rows),
    };
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn reject_output(cli: &Cli, name: &str) -> Result<(), String> {
    if cli.output.is_some() {
        return Err(format!("{name} writes no tabular artifact; drop --output"));
    }
    Ok(())
}

fn single_trial_only(cli: &Cli, name: &str) -> Result<(), String> {
    if cli.trials != 1 {
        return Err(format!("{name} runs a single trial; drop --trials"));
    }
    Ok(())
}

fn character_value(label: &OutcomeLabel) -> Result<u64, String> {
    match label {
        OutcomeLabel::Character(chi) if chi.freqs().len() == 1 => Ok(chi.freqs()[0]),
        other => Err(format!(
            "expected a cyclic character label, got {}",
            formats::label_string(other)
        )),
    }
}

fn source_string(source: &CandidateSource) -> String {
    match source {
        CandidateSource::Single { sample, .. } => format!("single({sample})"),
        CandidateSource::LcmPair { first, second } => format!("lcm({}, {})", first.0, second.0),
    }
}

fn trace_json(trace: &[qhs_core::shor::AttemptRecord]) -> Vec<Value> {
    trace
        .iter()
        .map(|rec| {
            json!({
                "a": rec.a,
                "sample": rec.sample,
                "period": rec.period,
                "note": rec.note,
            })
        })
        .collect()
}

fn subgroup_json(subgroup: &Subgroup) -> Value {
    let generators: Vec<Vec<u64>> = subgroup
        .generators()
        .iter()
        .map(|g| g.coords().to_vec())
        .collect();
    json!({ "order": subgroup.order(), "generators": generators })
}

fn run_shor(cli: &Cli, args: &ShorArgs, seed: u64) -> Result<RunOutput, String> {
    if let Some(ShorAction::Factor(factor_args)) = &args.action {
        return run_factor(cli, factor_args, seed);
    }
    let n = args.n.ok_or("shor requires --n")?;
    let a = args.a.ok_or("shor requires --a")?;
    if args.samples == 0 {
        return Err("--samples must be at least 1".into());
    }
    let config = ShorConfig::new(n, a).map_err(|e| e.to_string())?;
    let dist = shor_distribution(&config).map_err(|e| e.to_string())?;
    let rows = distribution_rows(&dist);
    let mut artifacts = Vec::new();
    if let Some(path) = args.emit_distribution.clone().or_else(|| cli.output.clone()) {
        write_rows(&path, cli.format, ("label", "prob"), &rows)?;
        artifacts.push(path);
    }
    let trials = run_trials(cli.trials, cli.jobs, |t| {
        let mut rng = trial_rng(seed, t);
        let mut samples = Vec::with_capacity(args.samples as usize);
        for _ in 0..args.samples {
            let outcome = sample(&dist, &mut rng).map_err(|e| e.to_string())?;
            samples.push(character_value(&outcome.label)?);
        }
        let candidate = recover_period(&samples, &config).map_err(|e| e.to_string())?;
        Ok(json!({
            "trial": t,
            "samples": samples,
            "period": candidate.as_ref().map(|c| c.period),
            "verified": candidate.as_ref().map(|c| c.verified).unwrap_or(false),
            "source": candidate.as_ref().map(|c| source_string(&c.source)),
        }))
    })?;
    let conclusive = trials
        .iter()
        .any(|t| t["verified"].as_bool() == Some(true));
    Ok(RunOutput {
        name: "shor",
        params: json!({ "n": n, "a": a, "samples": args.samples }),
        report: json!({
            "n": n,
            "a": a,
            "q": config.q(),
            "samples_per_trial": args.samples,
            "trials": trials,
        }),
        artifacts,
        conclusive,
        report_csv: None,
    })
}

fn run_factor(cli: &Cli, args: &FactorArgs, seed: u64) -> Result<RunOutput, String> {
    single_trial_only(cli, "shor factor")?;
    reject_output(cli, "shor factor")?;
    let mut rng = trial_rng(seed, 0);
    let (report, conclusive) = match factor(args.n, args.max_attempts, &mut rng) {
        Ok(result) => (
            json!({
                "n": args.n,
                "factors": result.factors,
                "attempts": result.trace.len(),
                "trace": trace_json(&result.trace),
            }),
            true,
        ),
        Err(ShorError::AttemptsExhausted { trace }) => (
            json!({
                "n": args.n,
                "factors": Value::Null,
                "attempts": trace.len(),
                "trace": trace_json(&trace),
            }),
            false,
        ),
        Err(other) => return Err(other.to_string()),
    };
    Ok(RunOutput {
        name: "shor-factor",
        params: json!({ "n": args.n, "max_attempts": args.max_attempts }),
        report,
        artifacts: Vec::new(),
        conclusive,
        report_csv: None,
    })
}

fn run_dual_shor(cli: &Cli, args: &DualShorArgs, seed: u64) -> Result<RunOutput, String> {
    if args.samples == 0 {
        return Err("--samples must be at least 1".into());
    }
    let oracle = dual_shor_instance(args.q, args.a).map_err(|e| e.to_string())?;
    let mut artifacts = Vec::new();
    if let Some(path) = cli.output.clone() {
        // The dual distribution does not depend on the RNG; a probe run
        // with the base seed recovers it exactly.
        let probe = qrand(&oracle, &mut trial_rng(seed, 0)).map_err(|e| e.to_string())?;
        write_rows(
            &path,
            cli.format,
            ("label", "prob"),
            &distribution_rows(&probe.distribution),
        )?;
        artifacts.push(path);
    }
    let trials = run_trials(cli.trials, cli.jobs, |t| {
        let mut rng = trial_rng(seed, t);
        match dual_shor(args.q, &oracle, args.samples, &mut rng) {
            Ok(outcome) => Ok(json!({
                "trial": t,
                "recovered": outcome.a,
                "samples": outcome.samples,
            })),
            Err(ShorError::AllSamplesZero { samples }) => Ok(json!({
                "trial": t,
                "recovered": Value::Null,
                "zero_samples": samples,
            })),
            Err(other) => Err(other.to_string()),
        }
    })?;
    let conclusive = trials.iter().any(|t| !t["recovered"].is_null());
    Ok(RunOutput {
        name: "dual-shor",
        params: json!({ "q": args.q, "a": args.a, "samples": args.samples }),
        report: json!({
            "q": args.q,
            "hidden_a": args.a,
            "samples_per_trial": args.samples,
            "trials": trials,
        }),
        artifacts,
        conclusive,
        report_csv: None,
    })
}

fn run_wandering(cli: &Cli, args: &WanderingArgs, seed: u64) -> Result<RunOutput, String> {
    single_trial_only(cli, "wandering")?;
    reject_output(cli, "wandering")?;
    if args.bound == 0 || args.bound > 1_000_000 {
        return Err("--bound must be between 1 and 1000000".into());
    }
    let generators = formats::parse_i64_vectors(&args.k)?;
    let rank = args.rank;
    if rank == 0 {
        return Err("--rank must be at least 1".into());
    }
    if generators[0].len() != rank {
        return Err(format!(
            "--k vectors have {} coordinates but --rank is {rank}",
            generators[0].len()
        ));
    }
    let oracle = LatticeOracle::new(rank, &generators).map_err(|e| e.to_string())?;
    let phi = |x: &[i64]| {
        oracle
            .label(x)
            .expect("probes stay inside the oracle coordinate range")
    };
    let mut rng = trial_rng(seed, 0);
    let (report, conclusive) = match wandering_shor_exponent(
        &phi,
        rank,
        args.bound,
        args.stability,
        args.max_rounds,
        &mut rng,
    ) {
        Ok(out) => (
            json!({
                "rank": rank,
                "exponent": out.exponent,
                "rounds": out.rounds,
                "failures": out.failures,
                "history": out.history,
            }),
            true,
        ),
        Err(ShorError::RoundBudget { best, rounds, failures }) => (
            json!({
                "rank": rank,
                "exponent": Value::Null,
                "best": best,
                "rounds": rounds,
                "failures": failures,
            }),
            false,
        ),
        Err(other) => return Err(other.to_string()),
    };
    Ok(RunOutput {
        name: "wandering",
        params: json!({
            "rank": args.rank,
            "k": args.k,
            "bound": args.bound,
            "stability": args.stability,
            "max_rounds": args.max_rounds,
        }),
        report,
        artifacts: Vec::new(),
        conclusive,
        report_csv: None,
    })
}

fn run_qrand(cli: &Cli, args: &QrandArgs, seed: u64) -> Result<RunOutput, String> {
    let orders = formats::parse_u64_list(&args.group)?;
    let group = FiniteAbelianGroup::new(orders.clone()).map_err(|e| e.to_string())?;
    let hidden_tuples = match &args.hidden {
        Some(src) => formats::parse_u64_vectors(src)?,
        None => Vec::new(),
    };
    let subgroup = if hidden_tuples.is_empty() {
        Subgroup::trivial(&group)
    } else {
        let gens = hidden_tuples
            .iter()
            .map(|coords| group.element(coords).map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, String>>()?;
        Subgroup::generated(&group, &gens).map_err(|e| e.to_string())?
    };
    let oracle = HsOracle::coset_labeling(&group, &subgroup).map_err(|e| e.to_string())?;
    // The distribution is RNG-independent; one probe run recovers it.
    let probe = qrand(&oracle, &mut trial_rng(seed, 0)).map_err(|e| e.to_string())?;
    let rows = distribution_rows(&probe.distribution);
    let mut artifacts = Vec::new();
    if let Some(path) = cli.output.clone() {
        write_rows(&path, cli.format, ("label", "prob"), &rows)?;
        artifacts.push(path);
    }
    let trials = run_trials(cli.trials, cli.jobs, |t| {
        let mut rng = trial_rng(seed, t);
        let result = qrand(&oracle, &mut rng).map_err(|e| e.to_string())?;
        Ok(json!({
            "trial": t,
            "sampled": formats::label_string(&result.sampled),
        }))
    })?;
    let distribution: Vec<Value> = rows
        .iter()
        .map(|(label, prob)| json!({ "label": label, "prob": prob }))
        .collect();
    Ok(RunOutput {
        name: "qrand",
        params: json!({ "group": orders, "hidden": hidden_tuples }),
        report: json!({
            "group": orders,
            "hidden_generators": hidden_tuples,
            "subgroup_order": subgroup.order(),
            "sampled": formats::label_string(&probe.sampled),
            "queries": probe.queries,
            "distribution": distribution,
            "trials": trials,
        }),
        artifacts,
        conclusive: true,
        report_csv: None,
    })
}

fn run_grover(cli: &Cli, args: &GroverArgs, seed: u64) -> Result<RunOutput, String> {
    let trials = run_trials(cli.trials, cli.jobs, |t| {
        let mut rng = trial_rng(seed, t);
        let run = grover_run(args.qubits, args.target, &mut rng).map_err(|e| e.to_string())?;
        Ok((run.iterations, run.success_probability, run.sampled))
    })?;
    let (iterations, success_probability, _) = trials[0];
    let states = 1u64 << args.qubits;
    let trial_rows: Vec<Value> = trials
        .iter()
        .enumerate()
        .map(|(t, (_, _, sampled))| json!({ "trial": t, "sampled": sampled }))
        .collect();
    let report_csv = match args.report {
        Format::Json => None,
        Format::Csv => {
            let mut text = String::from("trial,sampled,iterations,success_probability\n");
            for (t, (_, _, sampled)) in trials.iter().enumerate() {
                text.push_str(&format!(
                    "{t},{sampled},{iterations},{}\n",
                    formats::prob_string(success_probability)
                ));
            }
            Some(text)
        }
    };
    let mut artifacts = Vec::new();
    if let Some(path) = cli.output.clone() {
        let rows: Vec<(String, String)> = trials
            .iter()
            .enumerate()
            .map(|(t, (_, _, sampled))| (t.to_string(), sampled.to_string()))
            .collect();
        write_rows(&path, cli.format, ("trial", "sampled"), &rows)?;
        artifacts.push(path);
    }
    Ok(RunOutput {
        name: "grover",
        params: json!({ "qubits": args.qubits, "target": args.target }),
        report: json!({
            "qubits": args.qubits,
            "states": states,
            "target": args.target,
            "iterations": iterations,
            "success_probability": success_probability,
            "trials": trial_rows,
        }),
        artifacts,
        conclusive: true,
        report_csv,
    })
}

/// A presentation flag accepts the text inline or a path to a file
/// holding it; an existing file wins.
fn presentation_text(value: &str) -> Result<String, String> {
    let path = Path::new(value);
    if path.is_file() {
        return std::fs::read_to_string(path)
            .map(|s| s.trim().to_string())
            .map_err(|e| format!("reading {value}: {e}"));
    }
    Ok(value.to_string())
}

fn run_fg_enumerate(cli: &Cli, args: &EnumerateArgs) -> Result<RunOutput, String> {
    single_trial_only(cli, "freegroup enumerate")?;
    reject_output(cli, "freegroup enumerate")?;
    let presentation = formats::parse_presentation(&presentation_text(&args.presentation)?)?;
    let (report, conclusive) = match coset_enumerate(&presentation, args.max_cosets) {
        Ok(realization) => (
            json!({
                "presentation": presentation.to_string(),
                "order": realization.size(),
                "abelian": realization.is_abelian(),
            }),
            true,
        ),
        Err(FreeGroupError::CapExceeded { cosets }) => (
            json!({
                "presentation": presentation.to_string(),
                "order": Value::Null,
                "cosets_allocated": cosets,
            }),
            false,
        ),
        Err(other) => return Err(other.to_string()),
    };
    Ok(RunOutput {
        name: "freegroup-enumerate",
        params: json!({
            "presentation": args.presentation,
            "max_cosets": args.max_cosets,
        }),
        report,
        artifacts: Vec::new(),
        conclusive,
        report_csv: None,
    })
}

fn run_fg_transversal(cli: &Cli, args: &TransversalArgs) -> Result<RunOutput, String> {
    single_trial_only(cli, "freegroup transversal")?;
    let presentation = formats::parse_presentation(&presentation_text(&args.presentation)?)?;
    let realization = match coset_enumerate(&presentation, args.max_cosets) {
        Ok(realization) => realization,
        Err(FreeGroupError::CapExceeded { cosets }) => {
            return Ok(RunOutput {
                name: "freegroup-transversal",
                params: json!({
                    "presentation": args.presentation,
                    "max_cosets": args.max_cosets,
                }),
                report: json!({
                    "presentation": presentation.to_string(),
                    "order": Value::Null,
                    "cosets_allocated": cosets,
                }),
                artifacts: Vec::new(),
                conclusive: false,
                report_csv: None,
            });
        }
        Err(other) => return Err(other.to_string()),
    };
    let transversal = shortlex_transversal(&realization).map_err(|e| e.to_string())?;
    let representatives: Vec<String> = transversal
        .representatives()
        .iter()
        .map(|w| w.to_string())
        .collect();
    let lengths: Vec<usize> = transversal
        .representatives()
        .iter()
        .map(|w| w.len())
        .collect();
    let mut artifacts = Vec::new();
    if let Some(path) = cli.output.clone() {
        let rows: Vec<(String, String)> = representatives
            .iter()
            .enumerate()
            .map(|(i, rep)| (i.to_string(), rep.clone()))
            .collect();
        write_rows(&path, cli.format, ("label", "word"), &rows)?;
        artifacts.push(path);
    }
    Ok(RunOutput {
        name: "freegroup-transversal",
        params: json!({
            "presentation": args.presentation,
            "max_cosets": args.max_cosets,
        }),
        report: json!({
            "presentation": presentation.to_string(),
            "order": realization.size(),
            "representatives": representatives,
            "lengths": lengths,
        }),
        artifacts,
        conclusive: true,
        report_csv: None,
    })
}

fn run_fg_gshor(cli: &Cli, args: &GshorArgs, seed: u64) -> Result<RunOutput, String> {
    single_trial_only(cli, "freegroup gshor")?;
    reject_output(cli, "freegroup gshor")?;
    let quotient = formats::parse_presentation(&presentation_text(&args.kernel_spec)?)?;
    let probe = formats::parse_presentation(&presentation_text(&args.probe)?)?;
    let realization = coset_enumerate(&quotient, args.max_cosets)
        .map_err(|e| format!("kernel-spec presentation: {e}"))?;
    let labels: Vec<u64> = (0..realization.size() as u64).collect();
    let oracle = lift_hsp(&realization, &labels).map_err(|e| e.to_string())?;
    let mut rng = trial_rng(seed, 0);
    let (report, conclusive) = match generalized_shor_free(
        &oracle,
        &probe,
        args.target_order,
        args.radius,
        args.max_relators,
        &mut rng,
    ) {
        Ok(found) => {
            let relators: Vec<String> =
                found.relators().iter().map(|r| r.to_string()).collect();
            (
                json!({
                    "presentation": found.to_string(),
                    "relators": relators,
                    "target_order": args.target_order,
                }),
                true,
            )
        }
        Err(FreeGroupError::Inconclusive { relators, rounds }) => {
            let partial: Vec<String> = relators.iter().map(|r| r.to_string()).collect();
            (
                json!({
                    "presentation": Value::Null,
                    "partial_relators": partial,
                    "rounds": rounds,
                }),
                false,
            )
        }
        Err(other) => return Err(other.to_string()),
    };
    Ok(RunOutput {
        name: "freegroup-gshor",
        params: json!({
            "kernel_spec": args.kernel_spec,
            "probe": args.probe,
            "target_order": args.target_order,
            "radius": args.radius,
            "max_relators": args.max_relators,
        }),
        report,
        artifacts: Vec::new(),
        conclusive,
        report_csv: None,
    })
}

fn run_simon(cli: &Cli, args: &SimonArgs, seed: u64) -> Result<RunOutput, String> {
    reject_output(cli, "simon")?;
    if args.bits == 0 || args.bits > 10 {
        return Err("--bits must be between 1 and 10".into());
    }
    let group = FiniteAbelianGroup::new(vec![2; args.bits]).map_err(|e| e.to_string())?;
    let coords = formats::parse_u64_list(&args.hidden)?;
    if coords.len() != args.bits {
        return Err(format!("--hidden needs exactly {} bits", args.bits));
    }
    let s = group.element(&coords).map_err(|e| e.to_string())?;
    let subgroup = Subgroup::generated(&group, &[s]).map_err(|e| e.to_string())?;
    let oracle = HsOracle::coset_labeling(&group, &subgroup).map_err(|e| e.to_string())?;
    let trials = run_trials(cli.trials, cli.jobs, |t| {
        let mut rng = trial_rng(seed, t);
        match solve_abelian_hsp(&oracle, args.max_rounds, args.confidence, &mut rng) {
            Ok(solution) => Ok(json!({
                "trial": t,
                "subgroup": subgroup_json(&solution.subgroup),
                "queries": solution.queries,
                "inconclusive": false,
            })),
            Err(HspError::Inconclusive { best, rounds }) => Ok(json!({
                "trial": t,
                "subgroup": subgroup_json(&best),
                "queries": rounds,
                "inconclusive": true,
            })),
            Err(other) => Err(other.to_string()),
        }
    })?;
    let conclusive = trials
        .iter()
        .any(|t| t["inconclusive"].as_bool() == Some(false));
    Ok(RunOutput {
        name: "simon",
        params: json!({
            "bits": args.bits,
            "hidden": coords,
            "confidence": args.confidence,
            "max_rounds": args.max_rounds,
        }),
        report: json!({
            "bits": args.bits,
            "hidden": coords,
            "confidence": args.confidence,
            "max_rounds": args.max_rounds,
            "trials": trials,
        }),
        conclusive,
        artifacts: Vec::new(),
        report_csv: None,
    })
}
