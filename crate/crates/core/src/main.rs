use clap::{Parser, Subcommand, ValueEnum};
use radbound::attack::{attack_general, attack_rank_one, verify_witness, Budget};
use radbound::error::{Error, Result};
use radbound::gate::{check, decompose};
use radbound::io::{load_json, load_matrix, save_json, DecompositionFile, VerifyFile};
use radbound::linalg::op_norm;
use radbound::range::RangeSample;
use radbound::sweep::{run_sweep, SweepConfig, SweepMode};
use radbound::tol::Tolerances;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

/// Decide whether a square complex matrix `A` satisfies
/// `rho(AB) <= r(A) r(B)` for every `B`, decompose it when it does, and hunt
/// for violating witnesses when it does not.
#[derive(Parser)]
#[command(name = "radbound", version, about)]
struct Cli {
    /// JSON file overriding decision tolerances (partial files allowed).
    #[arg(long, global = true, value_name = "FILE")]
    tol_file: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the product bound for a matrix; prints the verdict as JSON.
    /// Exit 0 when satisfied, 1 when not.
    Check {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
    },
    /// Compute the canonical block decomposition of a satisfying matrix.
    Decompose {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Also write the JSON output to this file.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Search for a matrix `B` pushing `rho(AB)` above `r(A) r(B)`.
    Attack {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = AttackMode::Rank1)]
        mode: AttackMode,
        /// Scale factor applied to the default search budget.
        #[arg(long, default_value_t = 1.0)]
        budget: f64,
        /// Override the number of independent starts.
        #[arg(long)]
        restarts: Option<usize>,
        /// Override the number of refinement steps per start.
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the witness JSON to this file.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Sample the numerical range boundary; prints CSV with columns
    /// theta,support,boundary_re,boundary_im.
    Range {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Number of angles (at least 8).
        #[arg(long, default_value_t = 720)]
        samples: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Run a generator/attack campaign; exit 0 iff every hard invariant held.
    Sweep {
        #[arg(long, value_enum, default_value_t = SweepModeArg::Mixed)]
        mode: SweepModeArg,
        /// Dimensions to cycle through: "a..b" (inclusive) or a comma list.
        #[arg(long, default_value = "2..8")]
        dims: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; 0 picks the library default.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Scale factor applied to the per-trial search budget.
        #[arg(long, default_value_t = 1.0)]
        budget: f64,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        iters: Option<usize>,
        /// Margin for violating instances.
        #[arg(long, default_value_t = 0.2)]
        margin: f64,
        /// Also write the report JSON to this file.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Re-verify a witness or decomposition file from its serialized content.
    Verify {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Matrix the witness refers to; required for witness files.
        #[arg(long, value_name = "FILE")]
        matrix: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AttackMode {
    Rank1,
    General,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepModeArg {
    Satisfy,
    Violate,
    Mixed,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    let tols = match load_tols(cli.tol_file.as_deref()) {
        Ok(t) => t,
        Err(e) => return fail(&e),
    };
    let outcome = match cli.command {
        Command::Check { input } => cmd_check(&input, &tols),
        Command::Decompose { input, out } => cmd_decompose(&input, out.as_deref(), &tols),
        Command::Attack {
            input,
            mode,
            budget,
            restarts,
            iters,
            seed,
            out,
        } => cmd_attack(&input, mode, budget, restarts, iters, seed, out.as_deref()),
        Command::Range {
            input,
            samples,
            out,
        } => cmd_range(&input, samples, out.as_deref()),
        Command::Sweep {
            mode,
            dims,
            trials,
            seed,
            jobs,
            budget,
            restarts,
            iters,
            margin,
            out,
        } => cmd_sweep(
            mode,
            &dims,
            trials,
            seed,
            jobs,
            budget,
            restarts,
            iters,
            margin,
            out.as_deref(),
            &tols,
        ),
        Command::Verify { input, matrix } => cmd_verify(&input, matrix.as_deref(), &tols),
    };
    match outcome {
        Ok(code) => code,
        // Reading stdout ended early (e.g. piped into head); not our error.
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> i32 {
    eprintln!("error: {e}");
    match e {
        Error::Convergence { .. }
        | Error::Singular
        | Error::SplitVerification { .. }
        | Error::Reassembly { .. } => 3,
        Error::GateNotSatisfied(_) => 1,
        _ => 2,
    }
}

fn load_tols(path: Option<&Path>) -> Result<Tolerances> {
    match path {
        Some(p) => Ok(serde_json::from_str(&fs::read_to_string(p)?)?),
        None => Ok(Tolerances::default()),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    use std::io::Write;
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    // The file lands before stdout so a closed pipe cannot lose it.
    if let Some(path) = out {
        save_json(path, value)?;
    }
    print_json(value)
}

fn cmd_check(input: &Path, tols: &Tolerances) -> Result<i32> {
    let a = load_matrix(input)?.matrix;
    let verdict = check(&a, tols)?;
    print_json(&verdict)?;
    Ok(if verdict.satisfied { 0 } else { 1 })
}

fn cmd_decompose(input: &Path, out: Option<&Path>, tols: &Tolerances) -> Result<i32> {
    let a = load_matrix(input)?.matrix;
    let form = decompose(&a, tols)?;
    emit_json(&DecompositionFile { a, form }, out)?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_attack(
    input: &Path,
    mode: AttackMode,
    budget: f64,
    restarts: Option<usize>,
    iters: Option<usize>,
    seed: u64,
    out: Option<&Path>,
) -> Result<i32> {
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "budget must be a positive scale factor, got {budget}"
        )));
    }
    let a = load_matrix(input)?.matrix;
    let base = match mode {
        AttackMode::Rank1 => Budget::for_rank_one(),
        AttackMode::General => Budget::for_general(),
    };
    let mut plan = base.scaled(budget);
    if let Some(r) = restarts {
        plan.restarts = r;
    }
    if let Some(i) = iters {
        plan.iters = i;
    }
    let witness = match mode {
        AttackMode::Rank1 => attack_rank_one(&a, &plan, seed)?,
        AttackMode::General => attack_general(&a, &plan, seed)?,
    };
    emit_json(&witness, out)?;
    Ok(0)
}

fn cmd_range(input: &Path, samples: usize, out: Option<&Path>) -> Result<i32> {
    let a = load_matrix(input)?.matrix;
    let sample = RangeSample::compute(&a, samples)?;
    let csv = sample.to_csv();
    match out {
        Some(path) => fs::write(path, &csv)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(csv.as_bytes())?;
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    mode: SweepModeArg,
    dims: &str,
    trials: usize,
    seed: u64,
    jobs: usize,
    budget: f64,
    restarts: Option<usize>,
    iters: Option<usize>,
    margin: f64,
    out: Option<&Path>,
    tols: &Tolerances,
) -> Result<i32> {
    if !(budget.is_finite() && budget > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "budget must be a positive scale factor, got {budget}"
        )));
    }
    let mut plan = Budget::for_rank_one().scaled(budget);
    if let Some(r) = restarts {
        plan.restarts = r;
    }
    if let Some(i) = iters {
        plan.iters = i;
    }
    let cfg = SweepConfig {
        mode: match mode {
            SweepModeArg::Satisfy => SweepMode::Satisfy,
            SweepModeArg::Violate => SweepMode::Violate,
            SweepModeArg::Mixed => SweepMode::Mixed,
        },
        dims: parse_dims(dims)?,
        trials,
        seed,
        jobs,
        budget: plan,
        violate_margin: margin,
    };
    let report = run_sweep(&cfg, tols)?;
    emit_json(&report, out)?;
    if report.all_ok() {
        Ok(0)
    } else {
        for r in report.records.iter().filter(|r| !r.ok) {
            eprintln!(
                "trial {} failed (dim {}, seed {}): {}",
                r.index, r.dim, r.seed, r.detail
            );
        }
        Ok(1)
    }
}

fn cmd_verify(input: &Path, matrix: Option<&Path>, tols: &Tolerances) -> Result<i32> {
    #[derive(Serialize)]
    struct WitnessCheck {
        kind: &'static str,
        stored_ratio: f64,
        recomputed_ratio: f64,
        drift: f64,
        ok: bool,
    }
    #[derive(Serialize)]
    struct DecompositionCheck {
        kind: &'static str,
        residual: f64,
        threshold: f64,
        ok: bool,
    }

    match load_json::<VerifyFile>(input)? {
        VerifyFile::Witness(w) => {
            let matrix = matrix.ok_or_else(|| {
                Error::InvalidArgument(
                    "verifying a witness needs --matrix with the matrix it refers to".into(),
                )
            })?;
            let a = load_matrix(matrix)?.matrix;
            let recomputed = verify_witness(&a, &w, tols)?;
            let drift = (recomputed - w.ratio).abs();
            let ok = drift <= tols.witness_recheck;
            print_json(&WitnessCheck {
                kind: "witness",
                stored_ratio: w.ratio,
                recomputed_ratio: recomputed,
                drift,
                ok,
            })?;
            Ok(if ok { 0 } else { 1 })
        }
        VerifyFile::Decomposition(d) => {
            let residual = op_norm(&d.form.reassemble().sub(&d.a))?;
            let threshold = tols.reassembly_coeff * (1.0 + op_norm(&d.a)?);
            let ok = residual <= threshold;
            print_json(&DecompositionCheck {
                kind: "decomposition",
                residual,
                threshold,
                ok,
            })?;
            Ok(if ok { 0 } else { 1 })
        }
    }
}

/// "a..b" (inclusive) or a comma-separated list of entries, each a single
/// dimension or a range; all values must lie in [2, 200].
fn parse_dims(text: &str) -> Result<Vec<usize>> {
    let bad = |msg: String| Error::InvalidArgument(msg);
    let mut dims = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        if let Some((lo, hi)) = token.split_once("..") {
            let lo: usize = lo
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad dimension range start in {token:?}")))?;
            let hi: usize = hi
                .trim()
                .parse()
                .map_err(|_| bad(format!("bad dimension range end in {token:?}")))?;
            if lo > hi {
                return Err(bad(format!("empty dimension range {token:?}")));
            }
            dims.extend(lo..=hi);
        } else {
            dims.push(
                token
                    .parse()
                    .map_err(|_| bad(format!("bad dimension {token:?}")))?,
            );
        }
    }
    if dims.is_empty() {
        return Err(bad("dims must be nonempty".into()));
    }
    if let Some(&out) = dims.iter().find(|&&d| !(2..=200).contains(&d)) {
        return Err(bad(format!("dims must lie in [2, 200], got {out}")));
    }
    Ok(dims)
}
