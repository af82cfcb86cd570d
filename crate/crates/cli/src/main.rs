//! `lsharp`: batch front end for the evaluator, the context-testing
//! checker, the bisimulation engine and the differential corpus runner.
//!
//! Every command prints one JSON report on stdout. Exit codes:
//! 0 for a positive verdict (value, equivalent, valid, all agree),
//! 1 for a negative one (stuck, distinguished, counterexample, disagreement),
//! 2 for an inconclusive one (fuel exhausted, unjustified, no strategy found),
//! 3 for unreadable input and 4 when evaluation ends in an error.

mod corpus;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lambda_sharp::bisim::relfile::{parse_state, RelFile};
use lambda_sharp::bisim::sharp::{SharpGame, SharpIndex};
use lambda_sharp::bisim::{
    audit_diacritical, check, distinguish, expand, replay_all, verify_strategy, Justifier, UpToSpec, Verdict,
};
use lambda_sharp::ctxeq::{check_in_general_context, ctx_equiv_check, CtxEqConfig};
use lambda_sharp::lamshift::{self, parse_sterm, SOutcome, SState, STerm, Semantics, ShiftGame};
use lambda_sharp::lts::Variant;
use lambda_sharp::parse::parse_term;
use lambda_sharp::reduction::{eval_counting, trace, ErrorReason, Outcome};
use lambda_sharp::syntax::Term;

#[derive(Parser)]
#[command(name = "lsharp", version, about = "Multi-prompt delimited control: evaluation and equivalence checking")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Calculus {
    Lambdabla,
    Lamshift,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SemArg {
    Original,
    Relaxed,
}

impl From<SemArg> for Semantics {
    fn from(s: SemArg) -> Semantics {
        match s {
            SemArg::Original => Semantics::Original,
            SemArg::Relaxed => Semantics::Relaxed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Standard,
    Star,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Standard => Variant::STANDARD,
            VariantArg::Star => Variant::STAR,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Difftest,
}

#[derive(clap::Args)]
struct CalcArgs {
    #[arg(long, value_enum, default_value = "lambdabla")]
    calculus: Calculus,
    /// Only meaningful with `--calculus lamshift`.
    #[arg(long, value_enum, default_value = "original")]
    semantics: SemArg,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a closed program.
    Eval {
        file: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        fuel: usize,
        #[command(flatten)]
        calc: CalcArgs,
        /// Include every intermediate term with its rule.
        #[arg(long)]
        trace: bool,
    },
    /// Print the observable class of a closed program.
    Obs {
        file: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        fuel: usize,
        #[command(flatten)]
        calc: CalcArgs,
    },
    /// Compare two programs in all enumerated evaluation contexts.
    EquivCtx {
        file1: PathBuf,
        file2: PathBuf,
        #[arg(long, default_value_t = 3)]
        size: usize,
        #[arg(long, default_value_t = 1000)]
        fuel: usize,
        #[command(flatten)]
        calc: CalcArgs,
        /// Read fuel exhaustion as divergence.
        #[arg(long)]
        presume_divergence: bool,
        /// Test in this single general context instead, written as a term
        /// with a free variable for the hole.
        #[arg(long)]
        context: Option<PathBuf>,
        #[arg(long, default_value = "hole")]
        hole: String,
    },
    /// Check a candidate relation and that it relates the two programs.
    EquivBisim {
        file1: PathBuf,
        file2: PathBuf,
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long, default_value_t = 3)]
        ctx_size: usize,
        #[arg(long, default_value_t = 2)]
        rule_depth: usize,
        #[arg(long, default_value_t = 50)]
        tau_fuel: usize,
        /// Defaults to the variant declared in the candidate file.
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
    },
    /// Search for a winning attacker strategy in the bisimulation game.
    Distinguish {
        file1: PathBuf,
        file2: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 2)]
        ctx_size: usize,
        #[arg(long, default_value_t = 20)]
        tau_fuel: usize,
        #[arg(long, value_enum, default_value = "standard")]
        variant: VariantArg,
        #[command(flatten)]
        calc: CalcArgs,
    },
    /// Run a batch of programs.
    Corpus {
        dir: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Write this many generated handler programs into DIR first.
        #[arg(long)]
        generate: Option<usize>,
        /// Generator seed; defaults to LAMBDABLA_SEED or a fixed value.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        fuel: usize,
        #[arg(long, default_value_t = 4)]
        jobs: usize,
    },
}

/// A failure that is reported as exit code 3.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type Res = Result<(Value, u8), InputError>;

fn read(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn with_path<T, E: std::fmt::Display>(path: &Path, r: Result<T, E>) -> Result<T, InputError> {
    r.map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn term_file(path: &Path) -> Result<Term, InputError> {
    with_path(path, parse_term(&read(path)?))
}

fn sterm_file(path: &Path) -> Result<STerm, InputError> {
    with_path(path, parse_sterm(&read(path)?))
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let out = match cli.cmd {
        Cmd::Eval { file, fuel, calc, trace } => eval_cmd(&file, fuel, &calc, trace, false),
        Cmd::Obs { file, fuel, calc } => eval_cmd(&file, fuel, &calc, false, true),
        Cmd::EquivCtx {
            file1,
            file2,
            size,
            fuel,
            calc,
            presume_divergence,
            context,
            hole,
        } => equiv_ctx(&file1, &file2, size, fuel, &calc, presume_divergence, context.as_deref(), &hole),
        Cmd::EquivBisim {
            file1,
            file2,
            candidate,
            ctx_size,
            rule_depth,
            tau_fuel,
            variant,
        } => equiv_bisim(&file1, &file2, &candidate, ctx_size, rule_depth, tau_fuel, variant),
        Cmd::Distinguish {
            file1,
            file2,
            depth,
            ctx_size,
            tau_fuel,
            variant,
            calc,
        } => distinguish_cmd(&file1, &file2, depth, ctx_size, tau_fuel, variant.into(), &calc),
        Cmd::Corpus {
            dir,
            mode: Mode::Difftest,
            generate,
            seed,
            fuel,
            jobs,
        } => corpus::difftest(&dir, generate, seed, fuel, jobs),
    };
    match out {
        Ok((report, code)) => {
            let text = serde_json::to_string_pretty(&report).expect("reports serialize");
            // a closed pipe is not worth a panic
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::from(code)
        }
        Err(InputError(msg)) => {
            eprintln!("lsharp: {msg}");
            ExitCode::from(3)
        }
    }
}

fn outcome_json(o: &Outcome) -> (Value, u8) {
    match o {
        Outcome::Value(v) => (json!({"outcome": "value", "result": v.to_string()}), 0),
        Outcome::Stuck(_, t) => (json!({"outcome": "stuck", "result": t.to_string()}), 1),
        Outcome::Error(r) => (json!({"outcome": "error", "reason": error_reason(*r)}), 4),
        Outcome::FuelExhausted(n) => (json!({"outcome": "unknown", "fuel": n}), 2),
    }
}

fn error_reason(r: ErrorReason) -> &'static str {
    match r {
        ErrorReason::AppNonLambda => "application of a non-function",
        ErrorReason::ResetNonPrompt => "delimiter is not a prompt",
        ErrorReason::GrabNonPrompt => "capture on a non-prompt",
        ErrorReason::ThrowNonCont => "throw to a non-continuation",
        ErrorReason::FreeVariable => "free variable",
    }
}

fn s_outcome_json(o: &SOutcome) -> (Value, u8) {
    match o {
        SOutcome::Value(v) => (json!({"outcome": "value", "result": v.to_string()}), 0),
        SOutcome::Stuck(t) => (json!({"outcome": "stuck", "result": t.to_string()}), 1),
        SOutcome::FuelExhausted(n) => (json!({"outcome": "unknown", "fuel": n}), 2),
    }
}

fn eval_cmd(file: &Path, fuel: usize, calc: &CalcArgs, want_trace: bool, obs_only: bool) -> Res {
    let t0 = Instant::now();
    let (mut report, code, steps) = match calc.calculus {
        Calculus::Lambdabla => {
            let e = term_file(file)?;
            if want_trace {
                let (tr, out) = trace(&e, fuel);
                let (mut r, code) = outcome_json(&out);
                r["trace"] = tr
                    .iter()
                    .map(|(t, k)| json!({"rule": k.to_string(), "term": t.to_string()}))
                    .collect();
                (r, code, tr.len())
            } else {
                let (out, n) = eval_counting(&e, fuel);
                let (r, code) = outcome_json(&out);
                (r, code, n)
            }
        }
        Calculus::Lamshift => {
            let e = sterm_file(file)?;
            let (tr, out) = with_path(file, lamshift::reduction::trace_s(&e, fuel, calc.semantics.into()))?;
            let (mut r, code) = s_outcome_json(&out);
            if want_trace {
                r["trace"] = tr
                    .iter()
                    .map(|(t, k)| json!({"rule": k.to_string(), "term": t.to_string()}))
                    .collect();
            }
            r["semantics"] = json!(format!("{:?}", calc.semantics).to_lowercase());
            (r, code, tr.len())
        }
    };
    report["calculus"] = json!(format!("{:?}", calc.calculus).to_lowercase());
    report["steps"] = json!(steps);
    report["fuel"] = json!(fuel);
    report["elapsed_ms"] = json!(ms(t0));
    if obs_only {
        let class = match report["outcome"].as_str() {
            Some("value") => "value",
            Some("stuck") => "stuck",
            Some("error") => "error-or-divergence",
            _ => "unknown",
        };
        report = json!({"observable": class, "fuel": fuel, "elapsed_ms": ms(t0)});
    }
    Ok((report, code))
}

#[allow(clippy::too_many_arguments)]
fn equiv_ctx(
    f1: &Path,
    f2: &Path,
    size: usize,
    fuel: usize,
    calc: &CalcArgs,
    presume: bool,
    context: Option<&Path>,
    hole: &str,
) -> Res {
    let t0 = Instant::now();
    let verdict = match (calc.calculus, context) {
        (Calculus::Lambdabla, None) => {
            let mut cfg = CtxEqConfig::new(size, fuel);
            cfg.presume_divergence = presume;
            with_path(f1, ctx_equiv_check(&term_file(f1)?, &term_file(f2)?, &cfg))?
        }
        (Calculus::Lambdabla, Some(c)) => {
            let ctx = term_file(c)?;
            with_path(
                c,
                check_in_general_context(&ctx, hole, &term_file(f1)?, &term_file(f2)?, fuel, presume),
            )?
        }
        (Calculus::Lamshift, None) => with_path(
            f1,
            lamshift::ctx_equiv_check_s(&sterm_file(f1)?, &sterm_file(f2)?, size, fuel, calc.semantics.into(), presume),
        )?,
        (Calculus::Lamshift, Some(_)) => {
            return Err(InputError("--context is only supported for the multi-prompt calculus".into()))
        }
    };
    let code = verdict.exit_code() as u8;
    Ok((
        json!({
            "verdict": verdict,
            "bounds": {"size": size, "fuel": fuel, "presume_divergence": presume},
            "elapsed_ms": ms(t0),
        }),
        code,
    ))
}

fn equiv_bisim(
    f1: &Path,
    f2: &Path,
    candidate: &Path,
    ctx_size: usize,
    rule_depth: usize,
    tau_fuel: usize,
    variant: Option<VariantArg>,
) -> Res {
    let t0 = Instant::now();
    let l = with_path(f1, parse_state(&read(f1)?))?;
    let r = with_path(f2, parse_state(&read(f2)?))?;
    let rel = with_path(candidate, RelFile::parse(&read(candidate)?))?;
    let variant = variant.map(Variant::from).unwrap_or(rel.variant);
    let spec = if variant == Variant::STAR {
        UpToSpec::star()
    } else {
        UpToSpec::standard()
    };
    let name = candidate.file_stem().map_or("candidate".into(), |s| s.to_string_lossy().into_owned());
    let cand = rel.into_candidate(name);
    let g = SharpGame::new(variant, ctx_size);
    let exp = expand(&g, &cand, ctx_size, rule_depth);
    let idx = SharpIndex::new(&exp, variant, spec.clone());
    let rep = check(&g, &exp, &idx, tau_fuel, true);
    let audit = audit_diacritical(&idx, &rep.log, &spec);
    let replay_failures = replay_all(&g, &idx, &rep.log).len();
    let pair = idx.justify(&l, &r, false, None);
    let (verdict, code) = match &rep.verdict {
        Verdict::ValidWithinBounds(_) if pair.is_some() && audit && replay_failures == 0 => ("valid-within-bounds", 0),
        Verdict::ValidWithinBounds(_) if pair.is_none() => ("pair-not-related", 2),
        Verdict::ValidWithinBounds(_) => ("audit-failed", 2),
        Verdict::Counterexample { .. } => ("counterexample", 1),
        Verdict::Unjustified { .. } => ("unjustified", 2),
    };
    let witness = match &rep.verdict {
        Verdict::ValidWithinBounds(_) => Value::Null,
        Verdict::Counterexample { trace, .. } => json!({"detail": rep.verdict.to_string(), "trace": trace}),
        v => json!({"detail": v.to_string()}),
    };
    let stats = match &rep.verdict {
        Verdict::ValidWithinBounds(st) => json!(st),
        _ => Value::Null,
    };
    Ok((
        json!({
            "verdict": verdict,
            "candidate": rep.verdict.kind(),
            "stats": stats,
            "pair": {"left": l.to_string(), "right": r.to_string(),
                     "justification": pair.map(|j| j.to_string())},
            "diacritical_audit": audit,
            "replay_failures": replay_failures,
            "witness": witness,
            "bounds": {"ctx_size": ctx_size, "rule_depth": rule_depth, "tau_fuel": tau_fuel,
                       "variant": if variant == Variant::STAR { "star" } else { "standard" }},
            "elapsed_ms": ms(t0),
        }),
        code,
    ))
}

/// A state for the shift/reset game: values go to the environment.
fn s_state(e: STerm) -> SState {
    if e.is_value() {
        SState::new(Vec::new(), vec![e], None)
    } else {
        SState::term(e)
    }
}

fn distinguish_cmd(
    f1: &Path,
    f2: &Path,
    depth: usize,
    ctx_size: usize,
    tau_fuel: usize,
    variant: Variant,
    calc: &CalcArgs,
) -> Res {
    let t0 = Instant::now();
    let (found, left, right) = match calc.calculus {
        Calculus::Lambdabla => {
            let l = with_path(f1, parse_state(&read(f1)?))?;
            let r = with_path(f2, parse_state(&read(f2)?))?;
            let g = SharpGame::new(variant, ctx_size);
            let st = distinguish(&g, &l, &r, depth, tau_fuel);
            let found = st.map(|st| {
                let ok = verify_strategy(&g, &l, &r, &st, tau_fuel);
                (st.trace(), st.moves(), ok)
            });
            (found, l.to_string(), r.to_string())
        }
        Calculus::Lamshift => {
            let l = s_state(sterm_file(f1)?);
            let r = s_state(sterm_file(f2)?);
            let g = ShiftGame::new(calc.semantics.into(), ctx_size);
            let st = distinguish(&g, &l, &r, depth, tau_fuel);
            let found = st.map(|st| {
                let ok = verify_strategy(&g, &l, &r, &st, tau_fuel);
                (st.trace(), st.moves(), ok)
            });
            (found, l.to_string(), r.to_string())
        }
    };
    let bounds = json!({"depth": depth, "ctx_size": ctx_size, "tau_fuel": tau_fuel});
    Ok(match found {
        Some((trace, moves, verified)) => (
            json!({"verdict": "distinguished", "left": left, "right": right, "trace": trace,
                   "moves": moves, "replay_verified": verified, "bounds": bounds, "elapsed_ms": ms(t0)}),
            1,
        ),
        None => (
            json!({"verdict": "unknown", "left": left, "right": right, "bounds": bounds, "elapsed_ms": ms(t0)}),
            2,
        ),
    })
}
