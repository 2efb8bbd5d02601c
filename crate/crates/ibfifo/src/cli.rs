//! Command surface. `run` parses arguments, dispatches, writes the report
//! and returns the process exit code.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ibfifo_core::bounded::ValidatedSpec;
use ibfifo_core::corpus::{
    gen_3sat, gen_cdp, gen_minsky, gen_random, CnfError, CnfFormula, MinskyError, MinskyProgram, RandomParams,
};
use ibfifo_core::engine::{
    apply_reduction, decide_boundedness, decide_control_state, decide_deadlock, decide_rational_reachability,
    decide_reachability, decide_reduced, decide_termination, ob_bundle, ob_decide, translate_target, Analysis,
    EngineOptions, ObQuery, ReduceError, Reduced, ReducedTarget, Reduction, ReductionInput, Verdict,
};
use ibfifo_core::model::{run_trace, FifoConfig, FifoMachine, StateId};
use ibfifo_core::normalize::{normalize_machine, normalize_machine_ob, BoundMode, NormalizeError};
use ibfifo_core::relation::parse_relation;
use thiserror::Error;

use crate::exec::Threaded;
use crate::formats::{
    parse_bounds, parse_contents, parse_machine, parse_target, parse_trace, print_bounds, print_contents,
    print_counter_machine, print_counter_target, print_machine, print_target, FormatError,
};
use crate::report::{exit_code, Format, Report, Wording};

/// Exit code for usage, input and output errors.
pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error(transparent)]
    Parse(#[from] FormatError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Cnf(#[from] CnfError),
    #[error(transparent)]
    Minsky(#[from] MinskyError),
    #[error("{0}")]
    Usage(String),
}

#[derive(Parser, Debug)]
#[command(name = "ibfifo", version, about = "Verify FIFO machines along input- or output-bounded runs")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Ib,
    Ob,
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long)]
    machine: PathBuf,
    /// Bounded languages; defaults to the machine file itself.
    #[arg(long)]
    bounds: Option<PathBuf>,
    /// Overrides the `mode` line of the bounds file.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Depth of the fallback search on unbounded machines.
    #[arg(long, default_value_t = 48)]
    max_depth: u32,
    /// Letters per channel allowed in the fallback search.
    #[arg(long)]
    channel_bound: Option<u32>,
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Print witness runs.
    #[arg(long)]
    witness: bool,
}

#[derive(Args, Debug, Clone, Default)]
struct TargetArgs {
    #[arg(long)]
    state: Option<String>,
    /// Channel contents such as `c1=ab;c2=`.
    #[arg(long)]
    contents: Option<String>,
    /// File with `state` and `contents` lines.
    #[arg(long)]
    target: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Property {
    Bounded,
    Terminates,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Is a configuration reachable?
    Reach {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        target: TargetArgs,
    },
    /// Is a state reachable with contents in a rational relation?
    RationalReach {
        #[command(flatten)]
        common: Common,
        #[arg(long, required = true)]
        state: Vec<String>,
        /// Regex over tuple letters such as `[b,_]([a,_])*`.
        #[arg(long)]
        relation: String,
    },
    /// Is a control state reachable?
    Csr {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        state: String,
    },
    /// Is a configuration without enabled transitions reachable?
    Deadlock {
        #[command(flatten)]
        common: Common,
    },
    /// Boundedness or termination.
    Check {
        #[arg(value_enum)]
        property: Property,
        #[command(flatten)]
        common: Common,
    },
    /// Normal form of the machine.
    Normalize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        emit: bool,
    },
    /// Counter machine of the normal form.
    Counterize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        emit: bool,
    },
    /// Apply a reduction; emit the artifact or decide it.
    Reduce {
        #[command(flatten)]
        common: Common,
        /// reach-to-csr, csr-to-reach, reach-to-deadlock, bounded-to-reach or term-to-reach
        #[arg(long)]
        kind: String,
        #[arg(long)]
        emit: bool,
        #[command(flatten)]
        target: TargetArgs,
    },
    /// Generate corpus machines.
    Gen {
        #[command(subcommand)]
        what: Gen,
    },
    /// Run a trace on a machine and print where it ends.
    Replay {
        #[arg(long)]
        machine: PathBuf,
        /// Actions such as `c1!a c1?a c2!e`.
        #[arg(long)]
        trace: String,
        /// Expected final state.
        #[arg(long)]
        state: Option<String>,
        /// Expected final contents.
        #[arg(long)]
        contents: Option<String>,
    },
}

#[derive(Args, Debug, Clone)]
struct GenOut {
    /// Write `<prefix>.fm`, `<prefix>.bl` and `<prefix>.target` instead of
    /// one combined listing on stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed; defaults to IBFIFO_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Gen {
    /// The connection/disconnection protocol.
    Cdp {
        #[command(flatten)]
        out: GenOut,
    },
    /// 3SAT gadgets for a DIMACS formula or a random one.
    #[command(name = "3sat")]
    Sat {
        #[command(flatten)]
        out: GenOut,
        #[arg(long)]
        dimacs: Option<PathBuf>,
        #[arg(long)]
        flat: bool,
        #[arg(long)]
        unbounded_variant: bool,
        #[arg(long, default_value_t = 3)]
        vars: usize,
        #[arg(long, default_value_t = 4)]
        clauses: usize,
    },
    /// Minsky machine simulation for a program file or a random program.
    Minsky {
        #[command(flatten)]
        out: GenOut,
        #[arg(long)]
        program: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        states: usize,
        #[arg(long, default_value_t = 5)]
        rules: usize,
    },
    /// Random machine with random bounded languages.
    Random {
        #[command(flatten)]
        out: GenOut,
        #[arg(long, default_value_t = 4)]
        states: usize,
        #[arg(long, default_value_t = 2)]
        channels: usize,
        #[arg(long, default_value_t = 8)]
        transitions: usize,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

struct Loaded {
    machine: FifoMachine,
    specs: Vec<ValidatedSpec>,
    mode: BoundMode,
}

fn load(common: &Common) -> Result<Loaded, CliError> {
    let text = read(&common.machine)?;
    let mf = parse_machine(&text).map_err(|source| CliError::Format { path: common.machine.clone(), source })?;
    let bpath = common.bounds.clone().unwrap_or_else(|| common.machine.clone());
    let btext = if bpath == common.machine { text } else { read(&bpath)? };
    let bf = parse_bounds(&btext, &mf.machine).map_err(|source| CliError::Format { path: bpath, source })?;
    let mode = match common.mode {
        Some(ModeArg::Ib) => BoundMode::Input,
        Some(ModeArg::Ob) => BoundMode::Output,
        None => bf.mode.unwrap_or(BoundMode::Input),
    };
    Ok(Loaded { machine: mf.machine, specs: bf.specs, mode })
}

fn options(common: &Common) -> EngineOptions {
    EngineOptions { max_depth: common.max_depth, channel_bound: common.channel_bound, ..Default::default() }
}

fn state_id(m: &FifoMachine, name: &str) -> Result<StateId, CliError> {
    m.state_id(name).ok_or_else(|| CliError::Usage(format!("unknown state `{name}`")))
}

fn target_of(m: &FifoMachine, t: &TargetArgs) -> Result<Option<FifoConfig>, CliError> {
    if let Some(path) = &t.target {
        let text = read(path)?;
        return parse_target(&text, m).map(Some).map_err(|source| CliError::Format { path: path.clone(), source });
    }
    let Some(state) = &t.state else { return Ok(None) };
    let contents = parse_contents(t.contents.as_deref().unwrap_or(""), m)?;
    Ok(Some(FifoConfig { state: state_id(m, state)?, contents }))
}

fn seed(out: &GenOut) -> u64 {
    out.seed.or_else(|| std::env::var("IBFIFO_SEED").ok().and_then(|s| s.parse().ok())).unwrap_or(0)
}

/// Writes generated files, or returns one combined listing.
fn emit_generated(
    out: &GenOut,
    header: &str,
    machine: &FifoMachine,
    name: &str,
    specs: &[ValidatedSpec],
    target: Option<&FifoConfig>,
) -> Result<String, CliError> {
    let fm = print_machine(name, machine);
    let bl = print_bounds(BoundMode::Input, specs);
    let tg = target.map(|t| print_target(machine, t));
    match &out.out {
        Some(prefix) => {
            let with = |ext: &str| PathBuf::from(format!("{}.{ext}", prefix.display()));
            write_file(&with("fm"), &format!("{header}{fm}"))?;
            write_file(&with("bl"), &bl)?;
            let mut listing = format!("wrote {}\nwrote {}\n", with("fm").display(), with("bl").display());
            if let Some(tg) = tg {
                write_file(&with("target"), &tg)?;
                writeln!(listing, "wrote {}", with("target").display()).unwrap();
            }
            Ok(listing)
        }
        None => Ok(format!("{header}{fm}{bl}{}", tg.unwrap_or_default())),
    }
}

fn unsupported_ob(what: &str) -> CliError {
    CliError::Usage(format!("{what} is not available for output-bounded runs"))
}

/// Runs one command; returns the exit code and the text for stdout.
fn dispatch(cmd: Command) -> Result<(i32, String), CliError> {
    let report = |common: &Common, query: &str, v: &Verdict, wording: Wording, m: &FifoMachine, t0: Instant| {
        let r = Report::new(query, v, wording, m, t0.elapsed());
        (exit_code(v.answer), r.render(common.format, common.witness))
    };
    match cmd {
        Command::Reach { common, target } => {
            let t0 = Instant::now();
            let l = load(&common)?;
            let t = target_of(&l.machine, &target)?.ok_or_else(|| CliError::Usage("reach needs --state or --target".into()))?;
            let exec = Threaded { workers: common.workers };
            let v = match l.mode {
                BoundMode::Input => {
                    let bundle = normalize_machine(&l.machine, &l.specs)?;
                    let an = Analysis::new(&bundle, options(&common));
                    decide_reachability(&an, &exec, &translate_target(&bundle, &t))
                }
                BoundMode::Output => ob_decide(&l.machine, &l.specs, &ObQuery::Reach(t), options(&common), &exec)?,
            };
            Ok(report(&common, "reach", &v, Wording::YesNo, &l.machine, t0))
        }
        Command::RationalReach { common, state, relation } => {
            let t0 = Instant::now();
            let l = load(&common)?;
            if l.mode == BoundMode::Output {
                return Err(unsupported_ob("rational reachability"));
            }
            let rel = parse_relation(&relation, &l.machine).map_err(|e| CliError::Usage(format!("relation: {e}")))?;
            let bundle = normalize_machine(&l.machine, &l.specs)?;
            let an = Analysis::new(&bundle, options(&common));
            let mut states = Vec::new();
            for s in &state {
                states.extend(bundle.states_over(state_id(&l.machine, s)?));
            }
            let exec = Threaded { workers: common.workers };
            let v = decide_rational_reachability(&an, &exec, &states, &bundle.relation_preimage(&rel));
            Ok(report(&common, "rational-reach", &v, Wording::YesNo, &l.machine, t0))
        }
        Command::Csr { common, state } => {
            let t0 = Instant::now();
            let l = load(&common)?;
            let q = state_id(&l.machine, &state)?;
            let exec = Threaded { workers: common.workers };
            let v = match l.mode {
                BoundMode::Input => {
                    let bundle = normalize_machine(&l.machine, &l.specs)?;
                    let an = Analysis::new(&bundle, options(&common));
                    decide_control_state(&an, &exec, &bundle.states_over(q))
                }
                BoundMode::Output => ob_decide(&l.machine, &l.specs, &ObQuery::ControlState(q), options(&common), &exec)?,
            };
            Ok(report(&common, "csr", &v, Wording::YesNo, &l.machine, t0))
        }
        Command::Deadlock { common } => {
            let t0 = Instant::now();
            let l = load(&common)?;
            if l.mode == BoundMode::Output {
                return Err(unsupported_ob("deadlock"));
            }
            let bundle = normalize_machine(&l.machine, &l.specs)?;
            let an = Analysis::new(&bundle, options(&common));
            let v = decide_deadlock(&an, &Threaded { workers: common.workers });
            Ok(report(&common, "deadlock", &v, Wording::YesNo, &l.machine, t0))
        }
        Command::Check { property, common } => {
            let t0 = Instant::now();
            let l = load(&common)?;
            let exec = Threaded { workers: common.workers };
            let (v, wording, query) = match property {
                Property::Bounded => {
                    let v = match l.mode {
                        BoundMode::Input => {
                            let bundle = normalize_machine(&l.machine, &l.specs)?;
                            decide_boundedness(&Analysis::new(&bundle, options(&common)), &exec)
                        }
                        BoundMode::Output => ob_decide(&l.machine, &l.specs, &ObQuery::Bounded, options(&common), &exec)?,
                    };
                    (v, Wording::Bounded, "bounded")
                }
                Property::Terminates => {
                    let v = match l.mode {
                        BoundMode::Input => {
                            let bundle = normalize_machine(&l.machine, &l.specs)?;
                            decide_termination(&Analysis::new(&bundle, options(&common)), &exec)
                        }
                        BoundMode::Output => {
                            ob_decide(&l.machine, &l.specs, &ObQuery::Terminates, options(&common), &exec)?
                        }
                    };
                    (v, Wording::Terminates, "terminates")
                }
            };
            Ok(report(&common, query, &v, wording, &l.machine, t0))
        }
        Command::Normalize { common, emit } => {
            let l = load(&common)?;
            let bundle = match l.mode {
                BoundMode::Input => normalize_machine(&l.machine, &l.specs)?,
                BoundMode::Output => normalize_machine_ob(&l.machine, &l.specs)?,
            };
            let m = &bundle.machine;
            let text = if emit {
                format!("{}{}", print_machine("normal", m), print_bounds(l.mode, &bundle.specs))
            } else {
                format!("states={}\ntransitions={}\nletters={}\n", m.num_states(), m.transitions().len(), m.num_letters())
            };
            Ok((0, text))
        }
        Command::Counterize { common, emit } => {
            let l = load(&common)?;
            let bundle = match l.mode {
                BoundMode::Input => normalize_machine(&l.machine, &l.specs)?,
                BoundMode::Output => ob_bundle(&l.machine, &l.specs, &ObQuery::Bounded)?,
            };
            let an = Analysis::new(&bundle, options(&common));
            let cm = &an.counters;
            let text = if emit {
                print_counter_machine(cm)
            } else {
                format!("states={}\ncounters={}\ntransitions={}\n", cm.num_states(), cm.num_counters(), cm.transitions().len())
            };
            Ok((0, text))
        }
        Command::Reduce { common, kind, emit, target } => {
            let t0 = Instant::now();
            let l = load(&common)?;
            if l.mode == BoundMode::Output {
                return Err(unsupported_ob("reduce"));
            }
            let k = Reduction::from_name(&kind).ok_or_else(|| CliError::Usage(format!("unknown reduction `{kind}`")))?;
            let t = target_of(&l.machine, &target)?;
            let q = match (&target.state, &t) {
                (_, Some(c)) => Some(c.state),
                (Some(s), None) => Some(state_id(&l.machine, s)?),
                _ => None,
            };
            let input = ReductionInput { machine: &l.machine, specs: &l.specs, target: t.as_ref(), state: q };
            let reduced = apply_reduction(k, input)?;
            if emit {
                return Ok((0, print_reduced(&reduced)));
            }
            let v = decide_reduced(&reduced, options(&common), &Threaded { workers: common.workers })?;
            let r = Report::new(k.name(), &Verdict { witness: None, ..v.clone() }, Wording::YesNo, &l.machine, t0.elapsed());
            Ok((exit_code(v.answer), r.render(common.format, false)))
        }
        Command::Gen { what } => generate(what).map(|s| (0, s)),
        Command::Replay { machine, trace, state, contents } => {
            let text = read(&machine)?;
            let m = parse_machine(&text).map_err(|source| CliError::Format { path: machine.clone(), source })?.machine;
            let actions = parse_trace(&trace, &m)?;
            match run_trace(&m, &m.initial_config(), &actions) {
                Ok(end) => {
                    let mut ok = true;
                    if let Some(s) = &state {
                        ok &= end.state == state_id(&m, s)?;
                    }
                    if let Some(c) = &contents {
                        ok &= end.contents == parse_contents(c, &m)?;
                    }
                    let line = format!("end={} {}\nmatches={ok}\n", m.state_name(end.state), print_contents(&m, &end.contents));
                    Ok((if ok { 0 } else { 1 }, line))
                }
                Err(e) => Ok((1, format!("failed_at={}\nerror={}\n", e.index, e.kind))),
            }
        }
    }
}

fn print_reduced(r: &Reduced) -> String {
    match r {
        Reduced::Fifo { machine, specs, target } => {
            let mut s = format!("{}{}", print_machine("reduced", machine), print_bounds(BoundMode::Input, specs));
            match target {
                ReducedTarget::ControlState(q) => writeln!(s, "# question: control state\nstate {}", machine.state_name(*q)).unwrap(),
                ReducedTarget::Config(t) => write!(s, "# question: configuration\n{}", print_target(machine, t)).unwrap(),
                ReducedTarget::Deadlock => writeln!(s, "# question: deadlock").unwrap(),
            }
            s
        }
        Reduced::Counter { machine, targets } => {
            let mut s = print_counter_machine(machine);
            for t in targets {
                writeln!(s, "{}", print_counter_target(machine, t)).unwrap();
            }
            s
        }
    }
}

fn generate(what: Gen) -> Result<String, CliError> {
    match what {
        Gen::Cdp { out } => {
            let (m, specs) = gen_cdp();
            emit_generated(&out, "# connection/disconnection protocol\n", &m, "cdp", &specs, None)
        }
        Gen::Sat { out, dimacs, flat, unbounded_variant, vars, clauses } => {
            let cnf = match &dimacs {
                Some(p) => CnfFormula::parse_dimacs(&read(p)?)?,
                None => CnfFormula::seeded(seed(&out), vars, clauses),
            };
            let inst = gen_3sat(&cnf, flat, unbounded_variant);
            let header = format!("# 3sat gadgets, satisfiable={}\n", inst.satisfiable);
            emit_generated(&out, &header, &inst.machine, "sat", std::slice::from_ref(&inst.spec), Some(&inst.target))
        }
        Gen::Minsky { out, program, states, rules } => {
            let prog = match &program {
                Some(p) => MinskyProgram::parse(&read(p)?)?,
                None => MinskyProgram::seeded(seed(&out), states, rules, 4),
            };
            let inst = gen_minsky(&prog);
            let mut header = String::from("# minsky simulation of\n");
            for line in prog.print().lines() {
                writeln!(header, "#   {line}").unwrap();
            }
            if let Some(reach) = prog.reachable(4) {
                let mut names: Vec<&str> = reach.iter().map(|(q, _)| q.as_str()).collect();
                names.dedup();
                writeln!(header, "# reachable program states: {}", names.join(" ")).unwrap();
            }
            emit_generated(&out, &header, &inst.machine, "minsky", std::slice::from_ref(&inst.shape), None)
        }
        Gen::Random { out, states, channels, transitions } => {
            let params = RandomParams { states, channels, transitions, ..RandomParams::default() };
            let s = seed(&out);
            let (m, specs) = gen_random(s, &params);
            emit_generated(&out, &format!("# random machine, seed {s}\n"), &m, "random", &specs, None)
        }
    }
}

/// Parses `args` (program name first), runs the command and writes the
/// report to `out`; errors go to `err`.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_ERROR } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok((code, text)) => {
            if out.write_all(text.as_bytes()).is_err() {
                return EXIT_ERROR;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

/// Convenience for tests: runs and captures stdout.
pub fn run_captured<S: AsRef<str>>(args: &[S]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv: Vec<String> = std::iter::once("ibfifo".to_string()).chain(args.iter().map(|s| s.as_ref().to_string())).collect();
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

