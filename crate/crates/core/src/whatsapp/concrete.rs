use std::sync::Arc;

use thiserror::Error;

use super::abstract_model::{abstract_events, abstract_invariants, AbstractEvent};
use super::{AbstractState, ModelConfig, Universe};
use crate::machine::{Binding, EventDescriptor, MachineDefinition, MachineState};
use crate::relkernel::{Element, FiniteRelation, FiniteSet};

/// The abstract variables plus the content sequence and per-chat screens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ConcreteState {
    pub abs: AbstractState,
    pub csize: u64,
    /// `1..csize ↠ content`
    pub contents: FiniteRelation,
    /// owner ↦ (partner ↦ (index ↦ content))
    pub screen: FiniteRelation,
}

impl ConcreteState {
    /// `screen(a)`
    pub fn screen_of(&self, a: &Element) -> Option<FiniteRelation> {
        self.screen.lookup(a).and_then(Element::as_relation)
    }

    /// `screen(a)(b)`
    pub fn cell(&self, a: &Element, b: &Element) -> Option<FiniteRelation> {
        self.screen_of(a)
            .and_then(|row| row.lookup(b).and_then(Element::as_relation))
    }

    /// `screen ⊕ {a ↦ (screen(a) ⊕ {b ↦ cell})}`
    fn with_cell(&self, a: &Element, b: &Element, cell: FiniteRelation) -> FiniteRelation {
        let row = self
            .screen_of(a)
            .unwrap_or_default()
            .override_with(&FiniteRelation::singleton(b.clone(), cell.into()));
        self.screen
            .override_with(&FiniteRelation::singleton(a.clone(), row.into()))
    }
}

impl MachineState for ConcreteState {
    fn dump(&self) -> String {
        format!(
            "{}csize = {}\ncontents = {}\nscreen = {}\n",
            self.abs.dump(),
            self.csize,
            self.contents,
            self.screen
        )
    }
}

/// The six abstract variables of a concrete state.
pub fn project(s: &ConcreteState) -> AbstractState {
    s.abs.clone()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReadError {
    #[error("no screen cell for chat {u1} -> {u2}")]
    MissingCell { u1: Element, u2: Element },
}

/// The content of `screen(u1)(u2)` in ascending index order.
pub fn read_chat(s: &ConcreteState, u1: &Element, u2: &Element) -> Result<Vec<Element>, ReadError> {
    let cell = s.cell(u1, u2).ok_or_else(|| ReadError::MissingCell {
        u1: u1.clone(),
        u2: u2.clone(),
    })?;
    // pairs iterate in index order since naturals compare numerically
    Ok(cell.iter().map(|(_, c)| c.clone()).collect())
}

/// Screen entries whose content is in neither endpoint's `chatcontent`
/// domain, as `(owner, partner, content)`. Not an invariant.
pub fn screen_chatcontent_diagnostic(s: &ConcreteState) -> Vec<(Element, Element, Element)> {
    let sent = |u: &Element| s.abs.sent_by(u).map(|r| r.dom()).unwrap_or_default();
    let mut out = Vec::new();
    for (a, row) in s.screen.iter() {
        let Some(row) = row.as_relation() else { continue };
        for (b, cell) in row.iter() {
            let known = sent(a).union(&sent(b));
            for (_, c) in cell.as_relation().unwrap_or_default().iter() {
                if !known.contains(c) {
                    out.push((a.clone(), b.clone(), c.clone()));
                }
            }
        }
    }
    out
}

/// One past the largest index in a cell (naturals sort first and in order,
/// so the last pair holds the largest index).
fn next_index(cell: Option<&FiniteRelation>) -> u64 {
    cell.and_then(|c| c.iter().next_back().and_then(|(k, _)| k.as_nat()))
        .map_or(1, |m| m + 1)
}

/// `∀ i · i ∈ dom(cell) ⇒ k > i`
fn above_all(cell: Option<FiniteRelation>, k: u64) -> bool {
    k >= next_index(cell.as_ref())
}

/// Brings `contents`, `csize` and the screen skeleton in line with a new
/// abstract state: one screen row per user and one cell per chat pair,
/// cells range-restricted to `content`, and `contents` compacted to the
/// surviving items with new ones appended at `csize+1`.
fn reconcile(pre: &ConcreteState, abs: AbstractState) -> ConcreteState {
    if abs.user == pre.abs.user && abs.chat == pre.abs.chat && abs.content == pre.abs.content {
        return ConcreteState {
            abs,
            ..pre.clone()
        };
    }
    let mut screen = FiniteRelation::empty();
    for u in abs.user.iter() {
        let old = pre.screen_of(u).unwrap_or_default();
        let row = FiniteRelation::from_pairs(abs.chat.image_of(u).iter().map(|v| {
            let cell = old
                .lookup(v)
                .and_then(Element::as_relation)
                .unwrap_or_default()
                .ran_restrict(&abs.content);
            (v.clone(), cell.into())
        }));
        screen = screen.with(u.clone(), row.into());
    }

    let mut known = FiniteSet::empty();
    let mut kept = Vec::new();
    for (_, c) in pre.contents.iter() {
        if abs.content.contains(c) && !known.contains(c) {
            known = known.with(c.clone());
            kept.push(c.clone());
        }
    }
    let appended = abs.content.diff(&known);
    let contents = FiniteRelation::from_pairs(
        kept.into_iter()
            .chain(appended.iter().cloned())
            .enumerate()
            .map(|(i, c)| (Element::nat(i as u64 + 1), c)),
    );
    ConcreteState {
        csize: contents.len() as u64,
        contents,
        screen,
        abs,
    }
}

type ConcreteGuard = fn(&Universe, &ConcreteState, &Binding) -> bool;
type ConcreteAction = fn(&Universe, &ConcreteState, &Binding, ConcreteState) -> ConcreteState;
type IndexDomain = fn(&ConcreteState, &Binding) -> FiniteSet;

struct Refinement {
    name: &'static str,
    refines: &'static str,
    extra: &'static [(&'static str, IndexDomain)],
    guard: ConcreteGuard,
    /// Receives the pre-state, the binding and the reconciled post-state.
    action: ConcreteAction,
}

fn no_guard(_: &Universe, _: &ConcreteState, _: &Binding) -> bool {
    true
}

fn no_action(_: &Universe, _: &ConcreteState, _: &Binding, post: ConcreteState) -> ConcreteState {
    post
}

fn single(n: u64) -> FiniteSet {
    FiniteSet::singleton(Element::nat(n))
}

fn k1_next(s: &ConcreteState, b: &Binding) -> FiniteSet {
    match s.cell(b.value("u1"), b.value("u2")) {
        Some(cell) => single(next_index(Some(&cell))),
        None => FiniteSet::empty(),
    }
}

fn k2_next(s: &ConcreteState, b: &Binding) -> FiniteSet {
    match s.cell(b.value("u2"), b.value("u1")) {
        Some(cell) => single(next_index(Some(&cell))),
        None => FiniteSet::empty(),
    }
}

fn k2_first(s: &ConcreteState, b: &Binding) -> FiniteSet {
    match s.cell(b.value("u2"), b.value("u1")) {
        Some(_) => FiniteSet::empty(),
        None => single(1),
    }
}

fn index_of_content(s: &ConcreteState, b: &Binding) -> FiniteSet {
    s.contents.inverse().image_of(b.value("c"))
}

fn index_on_screen(s: &ConcreteState, b: &Binding) -> FiniteSet {
    s.cell(b.value("u1"), b.value("u2"))
        .map(|cell| cell.inverse().image_of(b.value("c")))
        .unwrap_or_default()
}

fn k_above_targets(s: &ConcreteState, b: &Binding) -> FiniteSet {
    let Some(us) = b.value("us").as_set() else {
        return FiniteSet::empty();
    };
    let u = b.value("u");
    let k = us
        .iter()
        .map(|u2| next_index(s.cell(u, u2).as_ref()))
        .max()
        .unwrap_or(1);
    single(k)
}

fn unused_in(cell: Option<FiniteRelation>, k: &Element) -> bool {
    cell.is_some_and(|cell| !cell.in_dom(k))
}

fn g_chatting_refined(_: &Universe, s: &ConcreteState, b: &Binding) -> bool {
    let (u1, u2) = (b.value("u1"), b.value("u2"));
    unused_in(s.cell(u1, u2), b.value("k1")) && unused_in(s.cell(u2, u1), b.value("k2"))
}

fn g_chatting_first_time(_: &Universe, s: &ConcreteState, b: &Binding) -> bool {
    let (u1, u2) = (b.value("u1"), b.value("u2"));
    unused_in(s.cell(u1, u2), b.value("k1"))
        && s.screen.in_dom(u2)
        && s.cell(u2, u1).is_none()
}

/// Screens after `u1` sees `c` at `k1` and `u2` sees it at `k2`, where `u2`'s
/// cell is extended when present (and otherwise starts at `{k2 ↦ c}`).
fn a_chatting(_: &Universe, pre: &ConcreteState, b: &Binding, post: ConcreteState) -> ConcreteState {
    let (u1, u2, c) = (b.value("u1"), b.value("u2"), b.value("c"));
    let own = pre
        .cell(u1, u2)
        .unwrap_or_default()
        .override_with(&FiniteRelation::singleton(b.value("k1").clone(), c.clone()));
    let theirs = pre
        .cell(u2, u1)
        .unwrap_or_default()
        .override_with(&FiniteRelation::singleton(b.value("k2").clone(), c.clone()));
    let screen = post.with_cell(u1, u2, own);
    let post = ConcreteState { screen, ..post };
    let screen = post.with_cell(u2, u1, theirs);
    ConcreteState { screen, ..post }
}

fn g_delete_content_refined(_: &Universe, s: &ConcreteState, b: &Binding) -> bool {
    let c = b.value("c");
    s.contents.contains(b.value("i"), c)
        && s.cell(b.value("u1"), b.value("u2"))
            .is_some_and(|cell| cell.contains(b.value("k"), c))
}

fn a_delete_content_refined(
    _: &Universe,
    pre: &ConcreteState,
    b: &Binding,
    post: ConcreteState,
) -> ConcreteState {
    let (u1, u2) = (b.value("u1"), b.value("u2"));
    let cell = pre
        .cell(u1, u2)
        .unwrap_or_default()
        .dom_subtract(&FiniteSet::singleton(b.value("k").clone()));
    ConcreteState {
        screen: post.with_cell(u1, u2, cell),
        ..post
    }
}

fn g_remove_content_refined(_: &Universe, s: &ConcreteState, b: &Binding) -> bool {
    let (u1, c) = (b.value("u1"), b.value("c"));
    s.contents.contains(b.value("i"), c)
        && s.abs.chatcontent.iter().all(|(a, inner)| {
            a == u1 || !inner.as_relation().is_some_and(|r| r.in_dom(c))
        })
}

fn g_fan_out_cells(_: &Universe, s: &ConcreteState, b: &Binding) -> bool {
    let u = b.value("u");
    let Some(k) = b.value("k").as_nat() else {
        return false;
    };
    let Some(row) = s.screen_of(u) else {
        return false;
    };
    b.set_value("us")
        .iter()
        .all(|u2| row.in_dom(u2) && above_all(s.cell(u, u2), k))
}

fn g_broadcast_refined(_: &Universe, s: &ConcreteState, b: &Binding) -> bool {
    let u = b.value("u");
    let Some(k) = b.value("k").as_nat() else {
        return false;
    };
    s.screen.in_dom(u) && b.set_value("us").iter().all(|u2| above_all(s.cell(u, u2), k))
}

/// Each `screen(u)(u2)` for `u2 ∈ us` gains `k ↦ c`; receiver cells are only
/// created, never filled.
fn a_fan_out(_: &Universe, pre: &ConcreteState, b: &Binding, post: ConcreteState) -> ConcreteState {
    let (u, k, c) = (b.value("u"), b.value("k"), b.value("c"));
    let mut post = post;
    for u2 in b.set_value("us").iter() {
        let cell = pre
            .cell(u, u2)
            .unwrap_or_default()
            .override_with(&FiniteRelation::singleton(k.clone(), c.clone()));
        post.screen = post.with_cell(u, u2, cell);
    }
    post
}

fn refinements() -> Vec<Refinement> {
    let keep = |name: &'static str| Refinement {
        name,
        refines: name,
        extra: &[],
        guard: no_guard,
        action: no_action,
    };
    vec![
        keep("add_user"),
        keep("add_content"),
        keep("create_chat_session"),
        keep("select_chat"),
        keep("unselect_chat"),
        Refinement {
            name: "chatting_refined",
            refines: "chatting",
            extra: &[("k1", k1_next), ("k2", k2_next)],
            guard: g_chatting_refined,
            action: a_chatting,
        },
        Refinement {
            name: "chatting_first_time",
            refines: "chatting",
            extra: &[("k1", k1_next), ("k2", k2_first)],
            guard: g_chatting_first_time,
            action: a_chatting,
        },
        Refinement {
            name: "delete_content_refined",
            refines: "delete_content",
            extra: &[("i", index_of_content), ("k", index_on_screen)],
            guard: g_delete_content_refined,
            action: a_delete_content_refined,
        },
        Refinement {
            name: "remove_content_refined",
            refines: "remove_content",
            extra: &[("i", index_of_content)],
            guard: g_remove_content_refined,
            action: no_action,
        },
        keep("mute_chat"),
        keep("unmute_chat"),
        Refinement {
            name: "forward_refined",
            refines: "forward",
            extra: &[("k", k_above_targets)],
            guard: g_fan_out_cells,
            action: a_fan_out,
        },
        Refinement {
            name: "broadcast_refined",
            refines: "broadcast",
            extra: &[("k", k_above_targets)],
            guard: g_broadcast_refined,
            action: a_fan_out,
        },
        keep("delete_chat_session"),
    ]
}

fn build(cfg: &Arc<Universe>, abs: AbstractEvent, r: Refinement) -> EventDescriptor<ConcreteState> {
    let mut d = abs
        .descriptor(r.name, cfg, |s: &ConcreteState| &s.abs)
        .refines(r.refines);
    for &(name, domain) in r.extra {
        d = d.param(name, domain);
    }
    let (c1, c2) = (cfg.clone(), cfg.clone());
    let (ag, aa, rg, ra) = (abs.guard, abs.action, r.guard, r.action);
    d.guard(move |s, b| ag(&c1, &s.abs, b) && rg(&c1, s, b))
        .action(move |s, b| {
            let post = reconcile(s, aa(&c2, &s.abs, b));
            ra(&c2, s, b, post)
        })
}

fn is_cell(cell: &Element, content: &FiniteSet) -> bool {
    cell.as_relation().is_some_and(|cell| {
        cell.is_functional()
            && cell
                .iter()
                .all(|(k, c)| k.as_nat().is_some() && content.contains(c))
    })
}

fn screen_typed(s: &ConcreteState) -> bool {
    let user = &s.abs.user;
    s.screen.is_functional()
        && s.screen.iter().all(|(a, row)| {
            user.contains(a)
                && row.as_relation().is_some_and(|row| {
                    row.is_functional()
                        && row
                            .iter()
                            .all(|(b, cell)| user.contains(b) && is_cell(cell, &s.abs.content))
                })
        })
}

/// One screen row per user and one cell per chat session.
fn screen_matches_chats(s: &ConcreteState) -> bool {
    s.screen.dom() == s.abs.user
        && s.screen.iter().all(|(a, row)| {
            row.as_relation()
                .is_some_and(|row| row.dom() == s.abs.chat.image_of(a))
        })
}

/// The refined machine. Every event names the abstract event it refines.
pub fn machine2(cfg: &ModelConfig) -> MachineDefinition<ConcreteState> {
    let shared = Arc::new(Universe::new(cfg));
    let abstract_by_name = abstract_events();
    let mut m = MachineDefinition::new("machine2", ConcreteState::default);
    for r in refinements() {
        let abs = *abstract_by_name
            .iter()
            .find(|e| e.name == r.refines)
            .expect("refined event exists");
        m = m.event(build(&shared, abs, r));
    }
    for (label, p) in abstract_invariants(&shared) {
        m = m.invariant(label, move |s: &ConcreteState| p(&s.abs));
    }
    m.invariant("invr21", |_: &ConcreteState| true)
        .invariant("invr22", |s: &ConcreteState| {
            let seg: FiniteSet = (1..=s.csize).map(Element::nat).collect();
            s.contents.is_surjective(&seg, &s.abs.content)
        })
        .invariant("invr23", |s: &ConcreteState| s.abs.content == s.contents.ran())
        .invariant("invr24", screen_typed)
        .invariant("screen_dom", screen_matches_chats)
}
