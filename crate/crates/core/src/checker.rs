//! Bounded breadth-first exploration of a machine's reachable states.
//!
//! Levels are expanded one at a time. Successor generation and invariant
//! evaluation may run on several workers, but deduplication and the choice
//! of the reported state follow declaration order, so a report never
//! depends on the worker count.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::machine::{Binding, EventDescriptor, MachineDefinition, MachineState, Trace, TraceStep};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckConfig {
    /// Longest trace explored.
    pub max_depth: usize,
    /// Distinct states allowed before giving up.
    pub max_states: usize,
    pub detect_deadlock: bool,
    pub check_invariants: bool,
    /// 1 runs on the calling thread.
    pub workers: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            max_depth: 8,
            max_states: 1_000_000,
            detect_deadlock: false,
            check_invariants: true,
            workers: 1,
        }
    }
}

impl CheckConfig {
    pub fn with_depth(max_depth: usize) -> Self {
        CheckConfig {
            max_depth,
            ..CheckConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    /// Every label violated in the offending state.
    InvariantViolation(Vec<String>),
    Deadlock,
    BoundExhausted,
    /// A concrete step whose projection is not an abstract step.
    SimulationFailure(String),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Ok => f.write_str("ok"),
            Verdict::InvariantViolation(labels) => {
                write!(f, "invariant-violation {}", labels.join(","))
            }
            Verdict::Deadlock => f.write_str("deadlock"),
            Verdict::BoundExhausted => f.write_str("bound-exhausted"),
            Verdict::SimulationFailure(detail) => write!(f, "simulation-failure {detail}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport<S> {
    pub verdict: Verdict,
    /// Distinct states discovered, up to and including the reported one.
    pub states_explored: usize,
    /// Deepest level whose states were all examined.
    pub depth_reached: usize,
    /// The whole reachable space fitted inside the depth bound.
    pub complete: bool,
    pub counterexample: Option<Trace>,
    pub final_state: Option<S>,
}

impl<S: MachineState> CheckReport<S> {
    pub fn is_ok(&self) -> bool {
        self.verdict == Verdict::Ok
    }

    pub fn violated(&self) -> &[String] {
        match &self.verdict {
            Verdict::InvariantViolation(labels) => labels,
            _ => &[],
        }
    }

    /// Verdict, counters, counterexample trace and final state dump.
    pub fn render(&self) -> String {
        let mut out = format!(
            "verdict: {}\nstates_explored: {}\ndepth_reached: {}\ncomplete: {}\n",
            self.verdict, self.states_explored, self.depth_reached, self.complete
        );
        if let Some(trace) = &self.counterexample {
            out.push_str(&format!("counterexample: {} steps\n", trace.len()));
            out.push_str(&trace.to_string());
        }
        if let Some(s) = &self.final_state {
            out.push_str("final state:\n");
            out.push_str(&s.dump());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefineError {
    #[error("event `{event}` refines `{refines}`, which the abstract machine lacks")]
    UnmatchedEvent { event: String, refines: String },
    #[error("event `{event}` lacks parameter `{param}` of `{refines}`")]
    MissingParameter {
        event: String,
        refines: String,
        param: String,
    },
}

struct Node<S> {
    state: S,
    parent: Option<(usize, TraceStep)>,
}

struct Successor<S> {
    step: TraceStep,
    state: S,
    /// Set when a transition check rejected this step.
    rejected: Option<String>,
}

type StepCheck<'a, S> = dyn Fn(&S, &EventDescriptor<S>, &Binding, &S) -> Option<String> + Sync + 'a;

struct Search<'a, S: MachineState> {
    machine: &'a MachineDefinition<S>,
    config: &'a CheckConfig,
    step_check: Option<&'a StepCheck<'a, S>>,
    nodes: Vec<Node<S>>,
    index: HashMap<S, usize>,
}

impl<'a, S: MachineState> Search<'a, S> {
    fn trace_to(&self, mut i: usize) -> Trace {
        let mut steps = Vec::new();
        while let Some((parent, step)) = &self.nodes[i].parent {
            steps.push(step.clone());
            i = *parent;
        }
        steps.reverse();
        Trace::new(steps)
    }

    fn report(&self, verdict: Verdict, depth: usize, at: Option<usize>) -> CheckReport<S> {
        CheckReport {
            verdict,
            states_explored: self.nodes.len(),
            depth_reached: depth,
            complete: false,
            counterexample: at.map(|i| self.trace_to(i)),
            final_state: at.map(|i| self.nodes[i].state.clone()),
        }
    }

    /// What is wrong with a freshly discovered state, if anything.
    fn judge(&self, s: &S) -> Option<Verdict> {
        if self.config.check_invariants {
            let labels = self.machine.check_invariants(s);
            if !labels.is_empty() {
                return Some(Verdict::InvariantViolation(labels));
            }
        }
        if self.config.detect_deadlock && self.machine.is_deadlocked(s) {
            return Some(Verdict::Deadlock);
        }
        None
    }

    fn successors(&self, i: usize) -> Vec<Successor<S>> {
        let pre = &self.nodes[i].state;
        self.machine
            .enabled(pre)
            .into_iter()
            .map(|(e, b)| {
                let state = e.apply_unguarded(pre, &b);
                let rejected = self.step_check.and_then(|f| f(pre, e, &b, &state));
                Successor {
                    step: TraceStep {
                        event: e.name().to_string(),
                        binding: b,
                    },
                    state,
                    rejected,
                }
            })
            .collect()
    }

    fn map_ordered<T: Send, R: Send>(&self, items: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R> {
        if self.config.workers <= 1 {
            items.into_iter().map(f).collect()
        } else {
            items.into_par_iter().map(f).collect()
        }
    }

    fn run(mut self) -> CheckReport<S> {
        let init = self.machine.initial_state();
        self.index.insert(init.clone(), 0);
        self.nodes.push(Node {
            state: init,
            parent: None,
        });
        if let Some(v) = self.judge(&self.nodes[0].state) {
            return self.report(v, 0, Some(0));
        }
        let mut frontier = vec![0usize];
        let mut depth = 0;
        while !frontier.is_empty() {
            if depth == self.config.max_depth {
                return self.report(Verdict::Ok, depth, None);
            }
            let expanded = self.map_ordered(frontier, |i| (i, self.successors(i)));

            let mut fresh = Vec::new();
            for (parent, succs) in expanded {
                for succ in succs {
                    if let Some(detail) = succ.rejected {
                        // report the offending step itself
                        self.nodes.push(Node {
                            state: succ.state,
                            parent: Some((parent, succ.step)),
                        });
                        let at = self.nodes.len() - 1;
                        return self.report(Verdict::SimulationFailure(detail), depth, Some(at));
                    }
                    if self.index.contains_key(&succ.state) {
                        continue;
                    }
                    if self.nodes.len() == self.config.max_states {
                        return self.report(Verdict::BoundExhausted, depth, None);
                    }
                    self.index.insert(succ.state.clone(), self.nodes.len());
                    fresh.push(self.nodes.len());
                    self.nodes.push(Node {
                        state: succ.state,
                        parent: Some((parent, succ.step)),
                    });
                }
            }

            let verdicts = self.map_ordered(fresh.clone(), |i| self.judge(&self.nodes[i].state));
            if let Some((pos, v)) = verdicts
                .into_iter()
                .enumerate()
                .find_map(|(pos, v)| v.map(|v| (pos, v)))
            {
                let at = fresh[pos];
                self.nodes.truncate(at + 1);
                return self.report(v, depth + 1, Some(at));
            }
            frontier = fresh;
            depth += 1;
        }
        let mut r = self.report(Verdict::Ok, depth, None);
        r.complete = true;
        r
    }
}

fn search<S: MachineState>(
    machine: &MachineDefinition<S>,
    config: &CheckConfig,
    step_check: Option<&StepCheck<'_, S>>,
) -> CheckReport<S> {
    let s = Search {
        machine,
        config,
        step_check,
        nodes: Vec::new(),
        index: HashMap::new(),
    };
    if config.workers <= 1 {
        return s.run();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(config.workers).build() {
        Ok(pool) => pool.install(|| s.run()),
        Err(_) => s.run(),
    }
}

/// Breadth-first search for the shortest trace to an invariant violation
/// (or deadlock, if enabled in `config`).
pub fn bfs_check<S: MachineState>(machine: &MachineDefinition<S>, config: &CheckConfig) -> CheckReport<S> {
    search(machine, config, None)
}

/// Shortest trace to a state where no event is enabled. Invariants are not
/// consulted.
pub fn deadlock_probe<S: MachineState>(
    machine: &MachineDefinition<S>,
    config: &CheckConfig,
) -> CheckReport<S> {
    let config = CheckConfig {
        detect_deadlock: true,
        check_invariants: false,
        ..config.clone()
    };
    search(machine, &config, None)
}

/// Explores the concrete machine, checking its invariants in every state and,
/// for each transition, that the abstract counterpart of the event is enabled
/// in the projected pre-state and yields the projected post-state. Events
/// that refine nothing must leave the projection unchanged.
pub fn refine_check<A: MachineState, C: MachineState>(
    abstract_machine: &MachineDefinition<A>,
    concrete: &MachineDefinition<C>,
    project: impl Fn(&C) -> A + Sync,
    config: &CheckConfig,
) -> Result<CheckReport<C>, RefineError> {
    for e in concrete.events() {
        let Some(name) = e.refined_event() else { continue };
        let a = abstract_machine
            .find_event(name)
            .ok_or_else(|| RefineError::UnmatchedEvent {
                event: e.name().to_string(),
                refines: name.to_string(),
            })?;
        if let Some(p) = a.param_names().find(|p| !e.param_names().any(|q| q == *p)) {
            return Err(RefineError::MissingParameter {
                event: e.name().to_string(),
                refines: name.to_string(),
                param: p.to_string(),
            });
        }
    }

    let check = |pre: &C, e: &EventDescriptor<C>, b: &Binding, post: &C| -> Option<String> {
        let (before, after) = (project(pre), project(post));
        let Some(name) = e.refined_event() else {
            return (before != after).then(|| format!("{} changes the abstract state", e.name()));
        };
        let a = abstract_machine.find_event(name)?;
        let ab = b.restrict_to(a.param_names());
        if !a.holds(&before, &ab) {
            return Some(format!("{} fires where {name} is disabled", e.name()));
        }
        (a.apply_unguarded(&before, &ab) != after)
            .then(|| format!("{} does not project onto {name}", e.name()))
    };
    Ok(search(concrete, config, Some(&check)))
}

/// Every state reachable within `max_depth` steps, each with the depth at
/// which BFS first meets it, in discovery order.
pub fn reachable_states<S: MachineState>(machine: &MachineDefinition<S>, max_depth: usize) -> Vec<(S, usize)> {
    let init = machine.initial_state();
    let mut seen: HashMap<S, ()> = HashMap::new();
    seen.insert(init.clone(), ());
    let mut out = vec![(init.clone(), 0)];
    let mut frontier = vec![init];
    for depth in 1..=max_depth {
        let mut next = Vec::new();
        for s in &frontier {
            for (e, b) in machine.enabled(s) {
                let t = e.apply_unguarded(s, &b);
                if seen.insert(t.clone(), ()).is_none() {
                    out.push((t.clone(), depth));
                    next.push(t);
                }
            }
        }
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relkernel::{Element, FiniteSet};

    /// Counter modulo `n` with a bad value.
    fn ring(n: u64, bad: u64) -> MachineDefinition<Num> {
        MachineDefinition::new("ring", || Num(0))
            .event(
                EventDescriptor::<Num>::new("inc")
                    .param("by", |_: &Num, _: &Binding| {
                        [1u64, 2].into_iter().map(Element::nat).collect::<FiniteSet>()
                    })
                    .guard(|s: &Num, _: &Binding| s.0 < 100)
                    .action(move |s: &Num, b: &Binding| Num((s.0 + b.nat("by")) % n)),
            )
            .invariant("not_bad", move |s: &Num| s.0 != bad)
    }

    #[derive(Debug, Clone, PartialEq, Eq, Hash)]
    struct Num(u64);

    impl MachineState for Num {
        fn dump(&self) -> String {
            format!("n = {}\n", self.0)
        }
    }

    #[test]
    fn finds_shortest_violation() {
        let r = bfs_check(&ring(10, 5), &CheckConfig::default());
        assert_eq!(r.verdict, Verdict::InvariantViolation(vec!["not_bad".into()]));
        // 2+2+1
        assert_eq!(r.counterexample.as_ref().unwrap().len(), 3);
        assert_eq!(r.final_state, Some(Num(5)));
        let replayed = ring(10, 5).replay(r.counterexample.as_ref().unwrap()).unwrap();
        assert_eq!(replayed, Num(5));
        // levels: {0} {1,2} {3,4} then 5 is the first new state at depth 3
        assert_eq!(r.states_explored, 6);
    }

    #[test]
    fn exhausts_small_space() {
        let r = bfs_check(&ring(4, 99), &CheckConfig::default());
        assert!(r.is_ok() && r.complete);
        assert_eq!(r.states_explored, 4);
    }

    #[test]
    fn bounds() {
        let r = bfs_check(&ring(100, 99), &CheckConfig::with_depth(3));
        assert!(r.is_ok() && !r.complete);
        assert_eq!(r.states_explored, 7);
        let r = bfs_check(
            &ring(100, 99),
            &CheckConfig {
                max_states: 4,
                ..CheckConfig::default()
            },
        );
        assert_eq!(r.verdict, Verdict::BoundExhausted);
        assert_eq!(r.states_explored, 4);
    }

    #[test]
    fn worker_count_does_not_change_report() {
        let m = ring(50, 37);
        let one = bfs_check(&m, &CheckConfig::default());
        for workers in [2, 4] {
            let many = bfs_check(
                &m,
                &CheckConfig {
                    workers,
                    ..CheckConfig::default()
                },
            );
            assert_eq!(many, one);
        }
    }

    #[test]
    fn deadlock_at_root() {
        let m = MachineDefinition::new("stuck", || Num(0));
        let r = deadlock_probe(&m, &CheckConfig::default());
        assert_eq!(r.verdict, Verdict::Deadlock);
        assert_eq!(r.counterexample.unwrap().len(), 0);
        assert_eq!(r.states_explored, 1);
    }

    #[test]
    fn refinement_mismatch() {
        let abs = ring(10, 99);
        let conc = MachineDefinition::new("c", || Num(0)).event(
            EventDescriptor::<Num>::new("inc_one")
                .refines("inc")
                .param("by", |_: &Num, _: &Binding| FiniteSet::singleton(Element::nat(1)))
                .guard(|s: &Num, _: &Binding| s.0 < 3)
                .action(|s: &Num, b: &Binding| Num(s.0 + b.nat("by"))),
        );
        let r = refine_check(&abs, &conc, |s| s.clone(), &CheckConfig::default()).unwrap();
        assert!(r.is_ok() && r.complete);

        let bad = conc
            .clone()
            .map_event("inc_one", |e| e.action(|s: &Num, _: &Binding| Num(s.0 + 3)));
        let r = refine_check(&abs, &bad, |s| s.clone(), &CheckConfig::default()).unwrap();
        assert!(matches!(r.verdict, Verdict::SimulationFailure(_)));
        assert_eq!(r.counterexample.unwrap().len(), 1);

        let orphan = conc.map_event("inc_one", |e| e.refines("dec"));
        assert!(matches!(
            refine_check(&abs, &orphan, |s| s.clone(), &CheckConfig::default()),
            Err(RefineError::UnmatchedEvent { .. })
        ));
    }

    #[test]
    fn reachable_matches_search_count() {
        let m = ring(100, 99);
        let states = reachable_states(&m, 3);
        assert_eq!(states.len(), 7);
        assert_eq!(states.last().unwrap().1, 3);
    }
}
