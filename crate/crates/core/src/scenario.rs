//! Line-oriented scenario files.
//!
//! ```text
//! # comments and blank lines are ignored
//! machine m0
//! users 3
//! contents 2
//! option add_content=literal
//! add_user A
//! add_user u=B
//! create_chat_session A B
//! expect invariant-violation inv4
//! ```
//!
//! Header lines (`machine`, `users`, `contents`, `option`, `mutant`) come
//! before the first step. A step names an event followed by its arguments,
//! either positional (in parameter order) or `name=value`. Parameters left
//! out are filled in when their generator offers exactly one value, which
//! is how index parameters such as `k1` are usually supplied.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::machine::{split_words, Binding, EventDescriptor, MachineState, TraceStep};
use crate::relkernel::{parse_element, text::is_atom_name, Element};
use crate::whatsapp::mutants::Mutant;
use crate::whatsapp::ModelConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MachineKind {
    #[default]
    M0,
    M2,
}

impl fmt::Display for MachineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MachineKind::M0 => "m0",
            MachineKind::M2 => "m2",
        })
    }
}

impl FromStr for MachineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "m0" | "machine0" => Ok(MachineKind::M0),
            "m2" | "machine2" => Ok(MachineKind::M2),
            _ => Err(format!("unknown machine `{s}` (expected m0 or m2)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expectation {
    Ok,
    Deadlock,
    InvariantViolation(String),
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::Ok => f.write_str("ok"),
            Expectation::Deadlock => f.write_str("deadlock"),
            Expectation::InvariantViolation(label) => write!(f, "invariant-violation {label}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arg {
    Positional(Element),
    Named(String, Element),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioStep {
    /// 1-based line in the scenario file.
    pub line: usize,
    pub event: String,
    pub args: Vec<Arg>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ScenarioError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError {
        line,
        column,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scenario {
    pub machine: MachineKind,
    pub config: ModelConfig,
    pub mutant: Option<Mutant>,
    pub steps: Vec<ScenarioStep>,
    pub expect: Option<Expectation>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let mut sc = Scenario::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("");
            let words = split_words(body);
            let Some(&(col, head)) = words.first() else {
                continue;
            };
            let rest = &words[1..];
            let single = |what: &str| -> Result<(usize, &str), ScenarioError> {
                match rest {
                    [one] => Ok(*one),
                    _ => Err(err(line, col, format!("`{head}` takes exactly one {what}"))),
                }
            };
            let header = matches!(head, "machine" | "users" | "contents" | "option" | "mutant");
            if header && !sc.steps.is_empty() {
                return Err(err(line, col, format!("`{head}` must come before the first step")));
            }
            match head {
                "machine" => {
                    let (c, v) = single("machine name")?;
                    sc.machine = v.parse().map_err(|m| err(line, c, m))?;
                }
                "users" | "contents" => {
                    let n = pool_size(head, rest, line, col)?;
                    sc.config.set_option(head, &n.to_string()).map_err(|m| err(line, col, m))?;
                }
                "option" => {
                    if rest.is_empty() {
                        return Err(err(line, col, "`option` needs key=value"));
                    }
                    for &(c, kv) in rest {
                        let (k, v) = kv
                            .split_once('=')
                            .ok_or_else(|| err(line, c, format!("expected key=value, got `{kv}`")))?;
                        sc.config.set_option(k, v).map_err(|m| err(line, c, m))?;
                    }
                }
                "mutant" => {
                    let (c, v) = single("mutant name")?;
                    sc.mutant = Some(v.parse().map_err(|m| err(line, c, m))?);
                }
                "expect" => {
                    if sc.expect.is_some() {
                        return Err(err(line, col, "only one `expect` line is allowed"));
                    }
                    sc.expect = Some(parse_expectation(rest, line, col)?);
                }
                _ => sc.steps.push(parse_step(line, col, head, rest)?),
            }
        }
        Ok(sc)
    }

    /// The header lines that reproduce this scenario's configuration.
    pub fn header(&self) -> String {
        let mut out = format!(
            "machine {}\nusers {}\ncontents {}\n",
            self.machine, self.config.users, self.config.contents
        );
        let opts: Vec<String> = self
            .config
            .options()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        out.push_str(&format!("option {}\n", opts.join(" ")));
        if let Some(m) = self.mutant {
            out.push_str(&format!("mutant {m}\n"));
        }
        out
    }
}

/// `users 3`, or `users A B C` listing the whole generated pool.
fn pool_size(head: &str, rest: &[(usize, &str)], line: usize, col: usize) -> Result<usize, ScenarioError> {
    if let [(_, n)] = rest {
        if let Ok(n) = n.parse::<usize>() {
            return Ok(n);
        }
    }
    if rest.is_empty() {
        return Err(err(line, col, format!("`{head}` needs a size or the pool's names")));
    }
    let cfg = ModelConfig::with_pools(rest.len(), rest.len());
    let pool = if head == "users" {
        cfg.user_pool()
    } else {
        cfg.content_pool()
    };
    let mut seen = std::collections::BTreeSet::new();
    for &(c, name) in rest {
        let known = pool.iter().any(|e| e.as_atom() == Some(name));
        if !known || !seen.insert(name) {
            let names: Vec<String> = pool.iter().map(|e| e.to_string()).collect();
            return Err(err(
                line,
                c,
                format!("`{name}` is not in the {head} pool of that size ({})", names.join(" ")),
            ));
        }
    }
    Ok(rest.len())
}

fn parse_expectation(rest: &[(usize, &str)], line: usize, col: usize) -> Result<Expectation, ScenarioError> {
    match rest {
        [(_, "ok")] => Ok(Expectation::Ok),
        [(_, "deadlock")] => Ok(Expectation::Deadlock),
        [(_, "invariant-violation"), (c, label)] => {
            if is_atom_name(label) {
                Ok(Expectation::InvariantViolation(label.to_string()))
            } else {
                Err(err(line, *c, format!("bad invariant label `{label}`")))
            }
        }
        _ => Err(err(
            line,
            col,
            "expected `expect ok`, `expect deadlock` or `expect invariant-violation <label>`",
        )),
    }
}

fn parse_step(line: usize, col: usize, event: &str, rest: &[(usize, &str)]) -> Result<ScenarioStep, ScenarioError> {
    if !is_atom_name(event) {
        return Err(err(line, col, format!("bad event name `{event}`")));
    }
    let mut args = Vec::new();
    for &(c, word) in rest {
        let element = |text: &str, offset: usize| {
            parse_element(text).map_err(|e| err(line, c + offset + e.column - 1, e.message))
        };
        match word.split_once('=') {
            Some((name, value)) if is_atom_name(name) => {
                args.push(Arg::Named(name.to_string(), element(value, name.len() + 1)?));
            }
            Some(_) => return Err(err(line, c, format!("bad parameter in `{word}`"))),
            None => args.push(Arg::Positional(element(word, 0)?)),
        }
    }
    Ok(ScenarioStep {
        line,
        event: event.to_string(),
        args,
    })
}

impl ScenarioStep {
    /// Resolves the arguments against an event's parameter list.
    pub fn bind<S: MachineState>(&self, event: &EventDescriptor<S>, state: &S) -> Result<TraceStep, String> {
        let names: Vec<&str> = event.param_names().collect();
        let mut given: Vec<Option<Element>> = vec![None; names.len()];
        let mut next_positional = 0;
        for a in &self.args {
            let (slot, value) = match a {
                Arg::Positional(v) => {
                    while next_positional < names.len() && given[next_positional].is_some() {
                        next_positional += 1;
                    }
                    if next_positional == names.len() {
                        return Err(format!("too many arguments for `{}`", event.name()));
                    }
                    (next_positional, v)
                }
                Arg::Named(n, v) => {
                    let slot = names
                        .iter()
                        .position(|p| p == n)
                        .ok_or_else(|| format!("`{}` has no parameter `{n}`", event.name()))?;
                    if given[slot].is_some() {
                        return Err(format!("parameter `{n}` given twice"));
                    }
                    (slot, v)
                }
            };
            given[slot] = Some(value.clone());
        }
        let mut binding = Binding::new();
        for (i, p) in event.params().iter().enumerate() {
            let v = match given[i].take() {
                Some(v) => v,
                None => {
                    let candidates = p.candidates(state, &binding);
                    match (candidates.len(), candidates.first()) {
                        (1, Some(only)) => only.clone(),
                        _ => {
                            return Err(format!(
                                "missing argument `{}` ({} candidates)",
                                p.name,
                                candidates.len()
                            ))
                        }
                    }
                }
            };
            binding.push(&p.name, v);
        }
        Ok(TraceStep {
            event: event.name().to_string(),
            binding,
        })
    }
}
