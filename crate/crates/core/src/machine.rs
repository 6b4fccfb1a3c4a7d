//! Guarded-event machines.
//!
//! A machine is an initial state, a list of events and a list of labelled
//! invariants. An event has named parameters whose candidate values come
//! from state-dependent generators, a guard, and an action. Actions are
//! pure functions of the pre-state, so every right-hand side of a
//! multi-assignment sees the same snapshot.

use std::fmt;
use std::hash::Hash;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::relkernel::{parse_element, text::is_atom_name, Element, FiniteSet};

/// A machine state snapshot.
pub trait MachineState: Clone + Eq + Hash + fmt::Debug + Send + Sync + 'static {
    /// Canonical multi-line dump, one variable per line.
    fn dump(&self) -> String;
}

pub type DomainFn<S> = Arc<dyn Fn(&S, &Binding) -> FiniteSet + Send + Sync>;
pub type GuardFn<S> = Arc<dyn Fn(&S, &Binding) -> bool + Send + Sync>;
pub type ActionFn<S> = Arc<dyn Fn(&S, &Binding) -> S + Send + Sync>;
pub type PredicateFn<S> = Arc<dyn Fn(&S) -> bool + Send + Sync>;

/// Parameter values in declaration order.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Binding(Vec<(Arc<str>, Element)>);

impl Binding {
    pub fn new() -> Self {
        Binding::default()
    }

    pub fn with(mut self, name: &str, value: Element) -> Self {
        self.push(name, value);
        self
    }

    pub fn push(&mut self, name: &str, value: Element) {
        self.0.push((Arc::from(name), value));
    }

    pub fn get(&self, name: &str) -> Option<&Element> {
        self.0.iter().find(|(n, _)| &**n == name).map(|(_, v)| v)
    }

    /// Value of a declared parameter. Guards and actions only ever see
    /// complete bindings, so a missing name is a bug in the model.
    pub fn value(&self, name: &str) -> &Element {
        self.get(name)
            .unwrap_or_else(|| panic!("binding has no parameter `{name}`"))
    }

    pub fn set_value(&self, name: &str) -> &FiniteSet {
        self.value(name)
            .as_set()
            .unwrap_or_else(|| panic!("parameter `{name}` is not a set"))
    }

    pub fn nat(&self, name: &str) -> u64 {
        self.value(name)
            .as_nat()
            .unwrap_or_else(|| panic!("parameter `{name}` is not a natural"))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|(n, _)| &**n)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Element)> {
        self.0.iter().map(|(n, v)| (&**n, v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Keeps only the named parameters, in their current order.
    pub fn restrict_to<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Binding {
        let names: Vec<&str> = names.into_iter().collect();
        Binding(
            self.0
                .iter()
                .filter(|(n, _)| names.contains(&&**n))
                .cloned()
                .collect(),
        )
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (n, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{n}={v}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

pub struct Param<S> {
    pub name: Arc<str>,
    domain: DomainFn<S>,
}

impl<S> Clone for Param<S> {
    fn clone(&self) -> Self {
        Param {
            name: self.name.clone(),
            domain: self.domain.clone(),
        }
    }
}

impl<S> Param<S> {
    /// Candidate values given the state and the parameters bound so far.
    pub fn candidates(&self, state: &S, partial: &Binding) -> FiniteSet {
        (self.domain)(state, partial)
    }
}

/// One guarded event: `any params where guard then action end`.
pub struct EventDescriptor<S> {
    name: Arc<str>,
    refines: Option<Arc<str>>,
    params: Vec<Param<S>>,
    guard: GuardFn<S>,
    action: ActionFn<S>,
}

impl<S> Clone for EventDescriptor<S> {
    fn clone(&self) -> Self {
        EventDescriptor {
            name: self.name.clone(),
            refines: self.refines.clone(),
            params: self.params.clone(),
            guard: self.guard.clone(),
            action: self.action.clone(),
        }
    }
}

impl<S: MachineState> EventDescriptor<S> {
    pub fn new(name: &str) -> Self {
        EventDescriptor {
            name: Arc::from(name),
            refines: None,
            params: Vec::new(),
            guard: Arc::new(|_, _| true),
            action: Arc::new(|s, _| s.clone()),
        }
    }

    pub fn param(
        mut self,
        name: &str,
        domain: impl Fn(&S, &Binding) -> FiniteSet + Send + Sync + 'static,
    ) -> Self {
        self.params.push(Param {
            name: Arc::from(name),
            domain: Arc::new(domain),
        });
        self
    }

    pub fn guard(mut self, g: impl Fn(&S, &Binding) -> bool + Send + Sync + 'static) -> Self {
        self.guard = Arc::new(g);
        self
    }

    pub fn action(mut self, a: impl Fn(&S, &Binding) -> S + Send + Sync + 'static) -> Self {
        self.action = Arc::new(a);
        self
    }

    /// Names the abstract event this one refines.
    pub fn refines(mut self, abstract_name: &str) -> Self {
        self.refines = Some(Arc::from(abstract_name));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn refined_event(&self) -> Option<&str> {
        self.refines.as_deref()
    }

    pub fn params(&self) -> &[Param<S>] {
        &self.params
    }

    pub fn param_names(&self) -> impl Iterator<Item = &str> {
        self.params.iter().map(|p| &*p.name)
    }

    pub fn guard_fn(&self) -> GuardFn<S> {
        self.guard.clone()
    }

    pub fn action_fn(&self) -> ActionFn<S> {
        self.action.clone()
    }

    pub fn holds(&self, state: &S, binding: &Binding) -> bool {
        (self.guard)(state, binding)
    }

    /// Applies the action without consulting the guard.
    pub fn apply_unguarded(&self, state: &S, binding: &Binding) -> S {
        (self.action)(state, binding)
    }

    pub fn binding_matches(&self, binding: &Binding) -> bool {
        binding.len() == self.params.len()
            && self.param_names().zip(binding.names()).all(|(a, b)| a == b)
    }

    /// Every binding drawn from the parameter generators, in canonical order.
    pub fn candidate_bindings(&self, state: &S) -> Vec<Binding> {
        let mut out = Vec::new();
        self.extend(state, 0, Binding::new(), &mut out);
        out
    }

    fn extend(&self, state: &S, i: usize, partial: Binding, out: &mut Vec<Binding>) {
        if i == self.params.len() {
            out.push(partial);
            return;
        }
        let p = &self.params[i];
        for v in p.candidates(state, &partial).iter() {
            self.extend(state, i + 1, partial.clone().with(&p.name, v.clone()), out);
        }
    }

    /// Bindings from the generators under which the guard holds.
    pub fn enabled_bindings(&self, state: &S) -> Vec<Binding> {
        self.candidate_bindings(state)
            .into_iter()
            .filter(|b| self.holds(state, b))
            .collect()
    }
}

impl<S> fmt::Debug for EventDescriptor<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EventDescriptor")
            .field("name", &self.name)
            .field("refines", &self.refines)
            .field(
                "params",
                &self.params.iter().map(|p| p.name.clone()).collect::<Vec<_>>(),
            )
            .finish()
    }
}

pub struct Invariant<S> {
    pub label: Arc<str>,
    predicate: PredicateFn<S>,
}

impl<S> Clone for Invariant<S> {
    fn clone(&self) -> Self {
        Invariant {
            label: self.label.clone(),
            predicate: self.predicate.clone(),
        }
    }
}

impl<S> Invariant<S> {
    pub fn holds(&self, s: &S) -> bool {
        (self.predicate)(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("event `{event}` expects parameters [{expected}], got [{got}]")]
    BindingMismatch {
        event: String,
        expected: String,
        got: String,
    },
    #[error("guard of `{event}` not satisfied for {binding}")]
    GuardNotSatisfied { event: String, binding: Binding },
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
}

/// Result of firing an event through the scheduler.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fired<S> {
    Next(S),
    Disabled,
}

pub struct MachineDefinition<S> {
    name: String,
    initial: Arc<dyn Fn() -> S + Send + Sync>,
    events: Vec<EventDescriptor<S>>,
    invariants: Vec<Invariant<S>>,
}

impl<S> Clone for MachineDefinition<S> {
    fn clone(&self) -> Self {
        MachineDefinition {
            name: self.name.clone(),
            initial: self.initial.clone(),
            events: self.events.clone(),
            invariants: self.invariants.clone(),
        }
    }
}

impl<S: MachineState> MachineDefinition<S> {
    pub fn new(name: &str, initial: impl Fn() -> S + Send + Sync + 'static) -> Self {
        MachineDefinition {
            name: name.to_string(),
            initial: Arc::new(initial),
            events: Vec::new(),
            invariants: Vec::new(),
        }
    }

    pub fn event(mut self, e: EventDescriptor<S>) -> Self {
        self.events.push(e);
        self
    }

    pub fn invariant(
        mut self,
        label: &str,
        p: impl Fn(&S) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.invariants.push(Invariant {
            label: Arc::from(label),
            predicate: Arc::new(p),
        });
        self
    }

    /// Checks that event names and invariant labels are unique.
    pub fn validate(&self) -> Result<(), MachineError> {
        for (i, e) in self.events.iter().enumerate() {
            if self.events[..i].iter().any(|o| o.name == e.name) {
                return Err(MachineError::Duplicate {
                    kind: "event",
                    name: e.name.to_string(),
                });
            }
        }
        for (i, inv) in self.invariants.iter().enumerate() {
            if self.invariants[..i].iter().any(|o| o.label == inv.label) {
                return Err(MachineError::Duplicate {
                    kind: "invariant",
                    name: inv.label.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn initial_state(&self) -> S {
        (self.initial)()
    }

    pub fn events(&self) -> &[EventDescriptor<S>] {
        &self.events
    }

    pub fn invariants(&self) -> &[Invariant<S>] {
        &self.invariants
    }

    pub fn find_event(&self, name: &str) -> Option<&EventDescriptor<S>> {
        self.events.iter().find(|e| &*e.name == name)
    }

    pub fn with_initial(mut self, state: S) -> Self {
        self.initial = Arc::new(move || state.clone());
        self
    }

    pub fn retain_events(mut self, names: &[&str]) -> Self {
        self.events.retain(|e| names.contains(&&*e.name));
        self
    }

    pub fn without_events(mut self, names: &[&str]) -> Self {
        self.events.retain(|e| !names.contains(&&*e.name));
        self
    }

    /// Swaps in a replacement for the event with the same name.
    pub fn replace_event(mut self, e: EventDescriptor<S>) -> Self {
        if let Some(slot) = self.events.iter_mut().find(|o| o.name == e.name) {
            *slot = e;
        }
        self
    }

    /// Applies `f` to the named event in place.
    pub fn map_event(
        mut self,
        name: &str,
        f: impl FnOnce(EventDescriptor<S>) -> EventDescriptor<S>,
    ) -> Self {
        if let Some(i) = self.events.iter().position(|e| &*e.name == name) {
            let e = self.events[i].clone();
            self.events[i] = f(e);
        }
        self
    }

    /// Every enabled `(event, binding)` pair: events in declaration order,
    /// bindings in canonical parameter order.
    pub fn enabled(&self, state: &S) -> Vec<(&EventDescriptor<S>, Binding)> {
        self.events
            .iter()
            .flat_map(|e| e.enabled_bindings(state).into_iter().map(move |b| (e, b)))
            .collect()
    }

    pub fn is_deadlocked(&self, state: &S) -> bool {
        self.events
            .iter()
            .all(|e| e.candidate_bindings(state).iter().all(|b| !e.holds(state, b)))
    }

    pub fn fire(&self, state: &S, event: &str, binding: &Binding) -> Result<Fired<S>, MachineError> {
        let e = self
            .find_event(event)
            .ok_or_else(|| MachineError::UnknownEvent(event.to_string()))?;
        if !e.binding_matches(binding) {
            return Err(MachineError::BindingMismatch {
                event: event.to_string(),
                expected: e.param_names().collect::<Vec<_>>().join(","),
                got: binding.names().collect::<Vec<_>>().join(","),
            });
        }
        if !e.holds(state, binding) {
            return Ok(Fired::Disabled);
        }
        Ok(Fired::Next(e.apply_unguarded(state, binding)))
    }

    /// Performs one transition; a disabled event is an error here.
    pub fn step(&self, state: &S, event: &str, binding: &Binding) -> Result<S, MachineError> {
        match self.fire(state, event, binding)? {
            Fired::Next(s) => Ok(s),
            Fired::Disabled => Err(MachineError::GuardNotSatisfied {
                event: event.to_string(),
                binding: binding.clone(),
            }),
        }
    }

    /// Labels of every invariant that fails in `state`, in registration order.
    pub fn check_invariants(&self, state: &S) -> Vec<String> {
        self.invariants
            .iter()
            .filter(|inv| !inv.holds(state))
            .map(|inv| inv.label.to_string())
            .collect()
    }

    /// Replays a trace from the initial state.
    pub fn replay(&self, trace: &Trace) -> Result<S, ReplayError> {
        let mut s = self.initial_state();
        for (index, st) in trace.steps().iter().enumerate() {
            s = self
                .step(&s, &st.event, &st.binding)
                .map_err(|error| ReplayError { index, error })?;
        }
        Ok(s)
    }

    /// Seeded random walk choosing uniformly among enabled pairs.
    pub fn random_walk(&self, steps: usize, seed: u64) -> Result<Walk<S>, WalkError<S>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = self.initial_state();
        let mut trace = Trace::default();
        let violated = self.check_invariants(&state);
        if !violated.is_empty() {
            return Err(WalkError::InvariantViolation {
                labels: violated,
                trace,
                state: Box::new(state),
            });
        }
        for _ in 0..steps {
            let mut enabled = self.enabled(&state);
            if enabled.is_empty() {
                return Ok(Walk {
                    trace,
                    final_state: state,
                    deadlocked: true,
                });
            }
            let pick = rng.gen_range(0..enabled.len());
            let (event, binding) = enabled.swap_remove(pick);
            state = event.apply_unguarded(&state, &binding);
            trace.push(event.name(), binding);
            let violated = self.check_invariants(&state);
            if !violated.is_empty() {
                return Err(WalkError::InvariantViolation {
                    labels: violated,
                    trace,
                    state: Box::new(state),
                });
            }
        }
        Ok(Walk {
            trace,
            final_state: state,
            deadlocked: false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk<S> {
    pub trace: Trace,
    pub final_state: S,
    /// The walk stopped early because nothing was enabled.
    pub deadlocked: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WalkError<S: fmt::Debug> {
    #[error("invariant violation [{}] after {} steps", labels.join(","), trace.len())]
    InvariantViolation {
        labels: Vec<String>,
        trace: Trace,
        state: Box<S>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {index}: {error}")]
pub struct ReplayError {
    /// 0-based index of the failing step.
    pub index: usize,
    pub error: MachineError,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TraceStep {
    pub event: String,
    pub binding: Binding,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.event)?;
        if !self.binding.is_empty() {
            write!(f, " {}", self.binding)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceParseError {
    pub column: usize,
    pub message: String,
}

impl std::error::Error for TraceParseError {}

impl fmt::Display for TraceParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

impl FromStr for TraceStep {
    type Err = TraceParseError;

    /// Parses `<event> <param>=<element> ...`.
    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let mut words = split_words(line).into_iter();
        let (col, event) = words.next().ok_or(TraceParseError {
            column: 1,
            message: "empty step".into(),
        })?;
        if !is_atom_name(event) {
            return Err(TraceParseError {
                column: col,
                message: format!("bad event name `{event}`"),
            });
        }
        let mut binding = Binding::new();
        for (col, word) in words {
            let (name, value) = word.split_once('=').ok_or(TraceParseError {
                column: col,
                message: format!("expected <param>=<value>, got `{word}`"),
            })?;
            if !is_atom_name(name) {
                return Err(TraceParseError {
                    column: col,
                    message: format!("bad parameter name `{name}`"),
                });
            }
            let v = parse_element(value).map_err(|e| TraceParseError {
                column: col + name.len() + e.column,
                message: e.message,
            })?;
            binding.push(name, v);
        }
        Ok(TraceStep {
            event: event.to_string(),
            binding,
        })
    }
}

/// Splits on whitespace outside brackets, keeping 1-based start columns.
pub(crate) fn split_words(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices() {
        match ch {
            '(' | '{' => depth += 1,
            ')' | '}' => depth -= 1,
            _ => {}
        }
        if ch.is_whitespace() && depth <= 0 {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

/// Ordered list of `(event, binding)` steps.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Trace(Vec<TraceStep>);

impl Trace {
    pub fn new(steps: Vec<TraceStep>) -> Self {
        Trace(steps)
    }

    pub fn push(&mut self, event: &str, binding: Binding) {
        self.0.push(TraceStep {
            event: event.to_string(),
            binding,
        });
    }

    pub fn steps(&self) -> &[TraceStep] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for st in &self.0 {
            writeln!(f, "{st}")?;
        }
        Ok(())
    }
}

impl FromStr for Trace {
    type Err = (usize, TraceParseError);

    /// One step per non-blank line; the error carries the 1-based line.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        text.lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| l.parse::<TraceStep>().map_err(|e| (i + 1, e)))
            .collect::<Result<Vec<_>, _>>()
            .map(Trace)
    }
}
