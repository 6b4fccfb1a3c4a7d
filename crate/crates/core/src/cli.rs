//! The `eventb` command line.
//!
//! Model options may come from a scenario header and from flags; flags win.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::checker::{bfs_check, deadlock_probe, refine_check, CheckConfig, CheckReport, RefineError, Verdict};
use crate::machine::{MachineDefinition, MachineState, Trace};
use crate::relkernel::{parse_element, Element};
use crate::scenario::{Expectation, MachineKind, Scenario, ScenarioError};
use crate::whatsapp::mutants::Mutant;
use crate::whatsapp::{machine0, machine2, project, read_chat, AbstractState, ConcreteState, DumpError, ReadError};

/// Process exit statuses. Stable across platforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    InvariantViolation = 1,
    Deadlock = 2,
    BoundExhausted = 3,
    RefinementFailure = 4,
    ExpectationMismatch = 5,
    StepRejected = 6,
    MissingCell = 7,
    InputError = 64,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Scenario { path: PathBuf, source: ScenarioError },
    #[error("{path}: {source}")]
    Dump { path: PathBuf, source: DumpError },
    #[error("{0}")]
    Usage(String),
    #[error("line {line}: step {index}: {message}")]
    Step { line: usize, index: usize, message: String },
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error(transparent)]
    Read(#[from] ReadError),
    #[error("write failed: {0}")]
    Output(#[from] io::Error),
}

impl CliError {
    fn status(&self) -> ExitStatus {
        match self {
            CliError::Step { .. } => ExitStatus::StepRejected,
            CliError::Refine(_) => ExitStatus::RefinementFailure,
            CliError::Read(_) => ExitStatus::MissingCell,
            _ => ExitStatus::InputError,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "eventb", version, about = "Guarded-event models of a chat app: replay, simulate, check, refine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replay a scenario file and compare against its `expect` line.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        /// Treat a final state with no enabled event as a failure.
        #[arg(long)]
        deadlock_is_error: bool,
    },
    /// Seeded random walk; prints a scenario that `run` accepts.
    Simulate {
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, env = "EVENTB_SEED", default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        deadlock_is_error: bool,
        /// Also write the final state dump to this file.
        #[arg(long, value_name = "PATH")]
        dump_state: Option<PathBuf>,
    },
    /// Breadth-first invariant (or deadlock) check.
    Check {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Look for deadlocks instead of invariant violations.
        #[arg(long)]
        deadlock: bool,
        /// Start from a state dump instead of the empty state.
        #[arg(long, value_name = "PATH")]
        initial_state: Option<PathBuf>,
    },
    /// Check that machine2 refines machine0.
    Refine {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// List the contents of one chat cell of a machine2 state dump, in order.
    Read {
        #[arg(long, value_name = "PATH")]
        state_dump: PathBuf,
        #[arg(long, value_parser = parse_element)]
        u1: Element,
        #[arg(long, value_parser = parse_element)]
        u2: Element,
    },
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, value_parser = MachineKind::from_str)]
    machine: Option<MachineKind>,
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    contents: Option<usize>,
    #[arg(long)]
    subset_cap: Option<usize>,
    /// Model option as key=value; repeatable.
    #[arg(long = "option", value_name = "KEY=VALUE")]
    options: Vec<String>,
    #[arg(long, value_parser = Mutant::from_str)]
    mutant: Option<Mutant>,
    /// Remove an event from the machine; repeatable.
    #[arg(long = "drop-event", value_name = "EVENT")]
    drop_events: Vec<String>,
    /// Keep only the named events; repeatable.
    #[arg(long = "keep-event", value_name = "EVENT", conflicts_with = "drop_events")]
    keep_events: Vec<String>,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 8)]
    depth: usize,
    #[arg(long, default_value_t = 1_000_000)]
    max_states: usize,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

impl SearchArgs {
    fn config(&self) -> CheckConfig {
        CheckConfig {
            max_depth: self.depth,
            max_states: self.max_states,
            workers: self.workers.max(1),
            ..CheckConfig::default()
        }
    }
}

impl ModelArgs {
    /// Layers the flags over a scenario's header.
    fn apply(&self, sc: &mut Scenario) -> Result<(), CliError> {
        if let Some(m) = self.machine {
            sc.machine = m;
        }
        let cfg = &mut sc.config;
        if let Some(n) = self.users {
            cfg.users = n;
        }
        if let Some(n) = self.contents {
            cfg.contents = n;
        }
        if let Some(n) = self.subset_cap {
            cfg.subset_cap = n;
        }
        for kv in &self.options {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--option expects key=value, got `{kv}`")))?;
            cfg.set_option(k, v).map_err(CliError::Usage)?;
        }
        if self.mutant.is_some() {
            sc.mutant = self.mutant;
        }
        Ok(())
    }

    fn restrict<S: MachineState>(&self, m: MachineDefinition<S>) -> Result<MachineDefinition<S>, CliError> {
        for name in self.drop_events.iter().chain(&self.keep_events) {
            if m.find_event(name).is_none() {
                return Err(CliError::Usage(format!("machine {} has no event `{name}`", m.name())));
            }
        }
        fn names(v: &[String]) -> Vec<&str> {
            v.iter().map(String::as_str).collect()
        }
        Ok(if !self.keep_events.is_empty() {
            m.retain_events(&names(&self.keep_events))
        } else {
            m.without_events(&names(&self.drop_events))
        })
    }
}

/// A state type the CLI can build a machine for and read from a dump.
trait Model: MachineState + FromStr<Err = DumpError> {
    fn build(sc: &Scenario) -> Result<MachineDefinition<Self>, String>;
}

impl Model for AbstractState {
    fn build(sc: &Scenario) -> Result<MachineDefinition<Self>, String> {
        let m = machine0(&sc.config);
        match sc.mutant {
            Some(mu) => mu.apply_abstract(m),
            None => Ok(m),
        }
    }
}

impl Model for ConcreteState {
    fn build(sc: &Scenario) -> Result<MachineDefinition<Self>, String> {
        let m = machine2(&sc.config);
        match sc.mutant {
            Some(mu) => mu.apply_concrete(m),
            None => Ok(m),
        }
    }
}

fn build<S: Model>(sc: &Scenario, model: &ModelArgs) -> Result<MachineDefinition<S>, CliError> {
    model.restrict(S::build(sc).map_err(CliError::Usage)?)
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_state<S: Model>(path: &Path) -> Result<S, CliError> {
    read_file(path)?.parse().map_err(|source| CliError::Dump {
        path: path.to_path_buf(),
        source,
    })
}

/// Final-state dump as scenario comments.
fn commented(dump: &str) -> String {
    dump.lines().map(|l| format!("# {l}\n")).collect()
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return ExitStatus::InputError;
            }
            let _ = write!(out, "{}", e.render());
            return ExitStatus::Ok;
        }
    };
    match dispatch(cli.command, out) {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.status()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<ExitStatus, CliError> {
    match command {
        Command::Run {
            scenario,
            model,
            deadlock_is_error,
        } => {
            let text = read_file(&scenario)?;
            let mut sc = Scenario::parse(&text).map_err(|source| CliError::Scenario {
                path: scenario.clone(),
                source,
            })?;
            model.apply(&mut sc)?;
            match sc.machine {
                MachineKind::M0 => cmd_run::<AbstractState>(&sc, &model, deadlock_is_error, out),
                MachineKind::M2 => cmd_run::<ConcreteState>(&sc, &model, deadlock_is_error, out),
            }
        }
        Command::Simulate {
            steps,
            seed,
            model,
            deadlock_is_error,
            dump_state,
        } => {
            let mut sc = Scenario::default();
            model.apply(&mut sc)?;
            let opts = SimulateOpts {
                steps,
                seed,
                deadlock_is_error,
                dump_state: dump_state.as_deref(),
            };
            match sc.machine {
                MachineKind::M0 => cmd_simulate::<AbstractState>(&sc, &model, &opts, out),
                MachineKind::M2 => cmd_simulate::<ConcreteState>(&sc, &model, &opts, out),
            }
        }
        Command::Check {
            model,
            search,
            deadlock,
            initial_state,
        } => {
            let mut sc = Scenario::default();
            model.apply(&mut sc)?;
            let init = initial_state.as_deref();
            let cfg = search.config();
            match sc.machine {
                MachineKind::M0 => cmd_check::<AbstractState>(&sc, &model, &cfg, deadlock, init, out),
                MachineKind::M2 => cmd_check::<ConcreteState>(&sc, &model, &cfg, deadlock, init, out),
            }
        }
        Command::Refine { model, search } => {
            let mut sc = Scenario::default();
            model.apply(&mut sc)?;
            cmd_refine(&sc, &model, &search.config(), out)
        }
        Command::Read { state_dump, u1, u2 } => {
            let s: ConcreteState = load_state(&state_dump)?;
            for c in read_chat(&s, &u1, &u2)? {
                writeln!(out, "{c}")?;
            }
            Ok(ExitStatus::Ok)
        }
    }
}

fn cmd_run<S: Model>(
    sc: &Scenario,
    model: &ModelArgs,
    deadlock_is_error: bool,
    out: &mut dyn Write,
) -> Result<ExitStatus, CliError> {
    let m = build::<S>(sc, model)?;
    out.write_all(sc.header().as_bytes())?;
    let mut state = m.initial_state();
    let mut seen: Vec<String> = Vec::new();
    let mut first_violation: Option<String> = None;
    let mut note = |labels: Vec<String>, out: &mut dyn Write| -> io::Result<()> {
        if labels.is_empty() {
            return Ok(());
        }
        writeln!(out, "# violated: {}", labels.join(","))?;
        first_violation.get_or_insert_with(|| labels[0].clone());
        for l in labels {
            if !seen.contains(&l) {
                seen.push(l);
            }
        }
        Ok(())
    };
    note(m.check_invariants(&state), out)?;
    for (i, st) in sc.steps.iter().enumerate() {
        let index = i + 1;
        let rejected = |message: String| CliError::Step {
            line: st.line,
            index,
            message,
        };
        let event = m
            .find_event(&st.event)
            .ok_or_else(|| rejected(format!("unknown event `{}`", st.event)))?;
        let step = st.bind(event, &state).map_err(rejected)?;
        state = m
            .step(&state, &step.event, &step.binding)
            .map_err(|e| rejected(e.to_string()))?;
        writeln!(out, "{step}")?;
        note(m.check_invariants(&state), out)?;
    }
    let deadlocked = m.is_deadlocked(&state);
    let observed = match (&first_violation, deadlocked) {
        (Some(l), _) => Expectation::InvariantViolation(l.clone()),
        (None, true) => Expectation::Deadlock,
        (None, false) => Expectation::Ok,
    };
    writeln!(out, "expect {observed}")?;
    out.write_all(b"# final state\n")?;
    out.write_all(commented(&state.dump()).as_bytes())?;

    let status = match &sc.expect {
        Some(want) => {
            let met = match want {
                Expectation::Ok => first_violation.is_none(),
                Expectation::Deadlock => deadlocked,
                Expectation::InvariantViolation(l) => seen.contains(l),
            };
            if met {
                ExitStatus::Ok
            } else {
                writeln!(out, "# expectation not met: expected `{want}`, observed `{observed}`")?;
                ExitStatus::ExpectationMismatch
            }
        }
        None if first_violation.is_some() => ExitStatus::InvariantViolation,
        None if deadlocked && deadlock_is_error => ExitStatus::Deadlock,
        None => ExitStatus::Ok,
    };
    Ok(status)
}

struct SimulateOpts<'a> {
    steps: usize,
    seed: u64,
    deadlock_is_error: bool,
    dump_state: Option<&'a Path>,
}

fn cmd_simulate<S: Model>(
    sc: &Scenario,
    model: &ModelArgs,
    opts: &SimulateOpts<'_>,
    out: &mut dyn Write,
) -> Result<ExitStatus, CliError> {
    let m = build::<S>(sc, model)?;
    let (trace, state, outcome, status): (Trace, S, Expectation, ExitStatus) = match m.random_walk(opts.steps, opts.seed) {
        Ok(w) if w.deadlocked => {
            let status = if opts.deadlock_is_error {
                ExitStatus::Deadlock
            } else {
                ExitStatus::Ok
            };
            (w.trace, w.final_state, Expectation::Deadlock, status)
        }
        Ok(w) => (w.trace, w.final_state, Expectation::Ok, ExitStatus::Ok),
        Err(crate::machine::WalkError::InvariantViolation { labels, trace, state }) => (
            trace,
            *state,
            Expectation::InvariantViolation(labels[0].clone()),
            ExitStatus::InvariantViolation,
        ),
    };
    writeln!(out, "# simulate seed={} steps={}", opts.seed, opts.steps)?;
    out.write_all(sc.header().as_bytes())?;
    write!(out, "{trace}")?;
    writeln!(out, "expect {outcome}")?;
    out.write_all(b"# final state\n")?;
    let dump = state.dump();
    out.write_all(commented(&dump).as_bytes())?;
    if let Some(path) = opts.dump_state {
        fs::write(path, &dump).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    }
    Ok(status)
}

fn verdict_status(v: &Verdict) -> ExitStatus {
    match v {
        Verdict::Ok => ExitStatus::Ok,
        Verdict::InvariantViolation(_) => ExitStatus::InvariantViolation,
        Verdict::Deadlock => ExitStatus::Deadlock,
        Verdict::BoundExhausted => ExitStatus::BoundExhausted,
        Verdict::SimulationFailure(_) => ExitStatus::RefinementFailure,
    }
}

fn report<S: MachineState>(r: &CheckReport<S>, out: &mut dyn Write) -> Result<ExitStatus, CliError> {
    out.write_all(r.render().as_bytes())?;
    Ok(verdict_status(&r.verdict))
}

fn cmd_check<S: Model>(
    sc: &Scenario,
    model: &ModelArgs,
    cfg: &CheckConfig,
    deadlock: bool,
    initial: Option<&Path>,
    out: &mut dyn Write,
) -> Result<ExitStatus, CliError> {
    let mut m = build::<S>(sc, model)?;
    if let Some(path) = initial {
        m = m.with_initial(load_state(path)?);
    }
    let r = if deadlock {
        deadlock_probe(&m, cfg)
    } else {
        bfs_check(&m, cfg)
    };
    report(&r, out)
}

fn cmd_refine(sc: &Scenario, model: &ModelArgs, cfg: &CheckConfig, out: &mut dyn Write) -> Result<ExitStatus, CliError> {
    let mut abs_sc = sc.clone();
    let mut conc_sc = sc.clone();
    match sc.mutant {
        Some(mu) if mu.is_concrete() => abs_sc.mutant = None,
        Some(_) => conc_sc.mutant = None,
        None => {}
    }
    let abs = AbstractState::build(&abs_sc).map_err(CliError::Usage)?;
    let conc = build::<ConcreteState>(&conc_sc, model)?;
    let r = refine_check(&abs, &conc, project, cfg)?;
    report(&r, out)
}
