//! `hornpair` command line.
//!
//! Exit codes: 0 success (proved, sat), 1 disproved or unsat, 2 unknown or
//! timeout, 3 usage or input error.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hornpair::chc::{parse_program, print_program, ClauseId, Program};
use hornpair::kernel::{check_all_defs_unfolded, classify_sequence, parse_trace, AClass};
use hornpair::lia::Verdict;
use hornpair::model::{check_model_with, check_tight};
use hornpair::oracle::{bounded_lm_with, false_derivable_with, Derivation, OracleBudget};
use hornpair::pairing::{duplicate_for_self_pairing, pair_goal, PairingConfig, PairingError, TieBreak};
use hornpair::smtlib::{emit_smtlib, parse_model};
use hornpair::solver::{external_solve, SolveOutcome, SolverConfig, SOLVER_ENV};
use hornpair::Exec;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const OK: u8 = 0;
const NEGATIVE: u8 = 1;
const UNKNOWN: u8 = 2;
const USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "hornpair", version, about = "Transform and check constrained Horn clauses over integers")]
struct Cli {
    /// Run library work on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Pair the two atoms of a goal clause and write the transformed clauses.
    Transform {
        input: PathBuf,
        /// Goal clause id (1-based file order) or `auto` for the unique goal.
        #[arg(long, default_value = "auto")]
        query: String,
        /// Keep pairing until no goal has a pair with disjoint cones.
        #[arg(long)]
        iterate: bool,
        #[arg(long, default_value_t = 64)]
        max_defs: usize,
        #[arg(long, value_enum, default_value_t = TieArg::Leftmost)]
        tie_break: TieArg,
        #[arg(long, value_enum, default_value_t = ClassArg::Lia)]
        a_class: ClassArg,
        /// Write the rule trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check that a model file satisfies every clause of a program.
    CheckModel { program: PathBuf, model: PathBuf },
    /// Check that a model is tight for a set of definitions.
    CheckTight { defs: PathBuf, model: PathBuf },
    /// Bottom-up evaluation inside a finite box.
    Oracle {
        program: PathBuf,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Value range, `LO..HI` inclusive.
        #[arg(long = "box", default_value = "0..3", value_parser = parse_box)]
        range: (i64, i64),
    },
    /// Print a program as SMT-LIB or in clause syntax.
    Emit {
        program: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Smtlib)]
        format: Format,
    },
    /// Run an external Horn solver.
    Solve {
        program: PathBuf,
        /// Solver command line, e.g. "z3 -in".
        #[arg(long)]
        solver: Option<String>,
        #[arg(long, default_value_t = 60)]
        timeout: u64,
    },
    /// Classify a saved rule trace.
    ValidateTrace { trace: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum TieArg {
    Leftmost,
    Lexicographic,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Lia,
    #[value(name = "2var")]
    TwoVar,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Smtlib,
    Chc,
}

fn parse_box(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s.split_once("..").ok_or("expected LO..HI")?;
    let lo: i64 = lo.trim().parse().map_err(|e| format!("{lo}: {e}"))?;
    let hi: i64 = hi.trim().parse().map_err(|e| format!("{hi}: {e}"))?;
    if lo > hi {
        return Err(format!("empty box {lo}..{hi}"));
    }
    Ok((lo, hi))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_program(path: &Path) -> Result<Program> {
    parse_program(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Proved => OK,
        Verdict::Disproved => NEGATIVE,
        Verdict::Unknown => UNKNOWN,
    }
}

fn pick_goal(p: &Program, query: &str) -> Result<ClauseId> {
    if query == "auto" {
        let goals: Vec<ClauseId> = p.goals().map(|g| g.id).collect();
        return match goals[..] {
            [g] => Ok(g),
            [] => bail!("the program has no goal clause"),
            _ => bail!("{} goal clauses, pick one with --query", goals.len()),
        };
    }
    let id = ClauseId(query.parse().with_context(|| format!("bad clause id {query:?}"))?);
    match p.get(id) {
        Some(c) if c.is_goal() => Ok(id),
        Some(_) => bail!("clause {id} is not a goal"),
        None => bail!("no clause {id}"),
    }
}

fn transform(exec: Exec, args: TransformArgs) -> Result<u8> {
    let p = load_program(&args.input)?;
    let goal = pick_goal(&p, &args.query)?;
    if args.max_defs == 0 {
        bail!("--max-defs must be positive");
    }
    let cfg = PairingConfig {
        max_defs: args.max_defs,
        tie_break: match args.tie_break {
            TieArg::Leftmost => TieBreak::Leftmost,
            TieArg::Lexicographic => TieBreak::Lexicographic,
        },
        iterate: args.iterate,
        a_classifier: match args.a_class {
            ClassArg::Lia => AClass::Lia,
            ClassArg::TwoVar => AClass::TwoVar,
        },
        exec,
    };
    let res = match pair_goal(&p, goal, &cfg) {
        Err(PairingError::PartitionOverlap(pred)) => {
            // both atoms reach a shared predicate: pair against a renamed copy
            eprintln!("cones overlap at {pred}; pairing against a renamed copy");
            let (dup, g) = duplicate_for_self_pairing(&p, goal)?;
            pair_goal(&dup, g, &cfg)?
        }
        r => r?,
    };
    write_out(args.output.as_deref(), &print_program(&res.transf))?;
    if let Some(t) = &args.trace {
        let mut text = res.state.log().join("\n");
        text.push('\n');
        std::fs::write(t, text).with_context(|| format!("writing {}", t.display()))?;
    }
    for (g, pred) in &res.overlaps {
        eprintln!("goal {g} left unpaired: cones overlap at {pred}");
    }
    eprintln!(
        "{} clauses, {} definitions, no_self_unfolding={} all_foldings_reversible={}",
        res.transf.len(),
        res.defs.len(),
        res.report.no_self_unfolding,
        res.report.all_foldings_reversible
    );
    Ok(OK)
}

struct TransformArgs {
    input: PathBuf,
    query: String,
    iterate: bool,
    max_defs: usize,
    tie_break: TieArg,
    a_class: ClassArg,
    trace: Option<PathBuf>,
    output: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<u8> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::default() };
    match cli.cmd {
        Cmd::Transform { input, query, iterate, max_defs, tie_break, a_class, trace, output } => {
            transform(exec, TransformArgs { input, query, iterate, max_defs, tie_break, a_class, trace, output })
        }
        Cmd::CheckModel { program, model } => {
            let p = load_program(&program)?;
            let sigma = parse_model(&read(&model)?).with_context(|| format!("parsing {}", model.display()))?;
            let report = check_model_with(exec, &p, &sigma)?;
            for (id, v) in &report.clauses {
                println!("clause {id}: {v}");
            }
            for pred in &report.undefined {
                println!("undefined {pred}: taken as true");
            }
            println!("overall: {}", report.overall);
            Ok(verdict_code(report.overall))
        }
        Cmd::CheckTight { defs, model } => {
            let d = load_program(&defs)?;
            let sigma = parse_model(&read(&model)?).with_context(|| format!("parsing {}", model.display()))?;
            let v = check_tight(&d, &sigma)?;
            println!("tight: {v}");
            Ok(verdict_code(v))
        }
        Cmd::Oracle { program, depth, range } => {
            let p = load_program(&program)?;
            let b = OracleBudget::new(depth, range.0, range.1)?;
            if p.goals().next().is_some() {
                match false_derivable_with(exec, &p, b)? {
                    Derivation::Found { goal, valuation } => {
                        let vals: Vec<String> = valuation.iter().map(|(v, x)| format!("{v}={x}")).collect();
                        println!("false derived by goal {goal}: {}", vals.join(" "));
                        return Ok(NEGATIVE);
                    }
                    Derivation::NotWithinBudget => println!("false not derived within the budget"),
                }
            }
            for a in bounded_lm_with(exec, &p, b)? {
                println!("{a}");
            }
            Ok(if p.goals().next().is_some() { UNKNOWN } else { OK })
        }
        Cmd::Emit { program, format } => {
            let p = load_program(&program)?;
            match format {
                Format::Smtlib => print!("{}", emit_smtlib(&p)),
                Format::Chc => print!("{}", print_program(&p)),
            }
            Ok(OK)
        }
        Cmd::Solve { program, solver, timeout } => {
            let p = load_program(&program)?;
            if timeout == 0 {
                bail!("--timeout must be at least 1");
            }
            let cfg = match solver {
                Some(cmd) => SolverConfig::new(&cmd, timeout),
                None => SolverConfig::from_env(timeout).ok_or_else(|| anyhow!("no solver: pass --solver or set {SOLVER_ENV}"))?,
            };
            Ok(match external_solve(&p, &cfg) {
                SolveOutcome::Sat(model) => {
                    println!("sat");
                    if !model.is_empty() {
                        println!("{model}");
                    }
                    OK
                }
                SolveOutcome::Unsat => {
                    println!("unsat");
                    NEGATIVE
                }
                SolveOutcome::Unknown => {
                    println!("unknown");
                    UNKNOWN
                }
                SolveOutcome::Timeout => {
                    println!("timeout");
                    UNKNOWN
                }
                SolveOutcome::ProcessError(e) => bail!("solver failed: {e}"),
            })
        }
        Cmd::ValidateTrace { trace } => {
            let steps = parse_trace(&read(&trace)?).map_err(|e| anyhow!("{}: {e}", trace.display()))?;
            let c = classify_sequence(&steps);
            let (all, missing) = check_all_defs_unfolded(&steps);
            println!("steps: {}", steps.len());
            println!("a_sound: {}", c.a_sound);
            println!("no_self_unfolding: {}", c.no_self_unfolding);
            println!("all_foldings_reversible: {}", c.all_foldings_reversible);
            println!("all_defs_unfolded: {all}");
            for d in missing {
                println!("never unfolded: {d}");
            }
            Ok(if all { OK } else { NEGATIVE })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE)
        }
    }
}
