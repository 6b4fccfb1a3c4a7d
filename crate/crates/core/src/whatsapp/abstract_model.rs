use std::sync::Arc;

use super::{AddContentMode, BroadcastMode, ForwardMode, ModelConfig, RemoveContentMode, Universe};
use crate::machine::{Binding, EventDescriptor, MachineDefinition, MachineState};
use crate::relkernel::{Element, FiniteRelation, FiniteSet};

/// The six variables of the abstract machine.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct AbstractState {
    pub user: FiniteSet,
    pub content: FiniteSet,
    pub chat: FiniteRelation,
    pub active: FiniteRelation,
    pub muted: FiniteRelation,
    /// sender ↦ (content ↦ recipients)
    pub chatcontent: FiniteRelation,
}

impl AbstractState {
    /// `chatcontent(u)`, if `u` is in its domain.
    pub fn sent_by(&self, u: &Element) -> Option<FiniteRelation> {
        self.chatcontent.lookup(u).and_then(Element::as_relation)
    }

    /// `chatcontent(u)(c)`
    pub fn recipients(&self, u: &Element, c: &Element) -> Option<FiniteSet> {
        self.sent_by(u)
            .and_then(|inner| inner.lookup(c).and_then(Element::as_set).cloned())
    }

    /// `chatcontent ⊕ {u ↦ inner}`
    pub(crate) fn with_sent(&self, u: &Element, inner: FiniteRelation) -> FiniteRelation {
        self.chatcontent
            .override_with(&FiniteRelation::singleton(u.clone(), inner.into()))
    }

    /// Content items that appear in some sender's mapping.
    pub fn sent_content(&self) -> FiniteSet {
        self.chatcontent
            .iter()
            .filter_map(|(_, inner)| inner.as_relation())
            .flat_map(|inner| inner.dom().iter().cloned().collect::<Vec<_>>())
            .collect()
    }
}

impl MachineState for AbstractState {
    fn dump(&self) -> String {
        format!(
            "user = {}\ncontent = {}\nchat = {}\nactive = {}\nmuted = {}\nchatcontent = {}\n",
            self.user, self.content, self.chat, self.active, self.muted, self.chatcontent
        )
    }
}

/// Candidate values for one parameter given the state and the parameters
/// bound so far. Generators may skip values the guard always rejects, so
/// long as every enabled binding is still produced.
pub(crate) type DomainImpl = fn(&Universe, &AbstractState, &Binding) -> FiniteSet;

fn fresh_user(cfg: &Universe, s: &AbstractState, _: &Binding) -> FiniteSet {
    cfg.users.diff(&s.user)
}

fn fresh_content(cfg: &Universe, s: &AbstractState, _: &Binding) -> FiniteSet {
    cfg.contents.diff(&s.content)
}

fn any_user(_: &Universe, s: &AbstractState, _: &Binding) -> FiniteSet {
    s.user.clone()
}

fn any_content(_: &Universe, s: &AbstractState, _: &Binding) -> FiniteSet {
    s.content.clone()
}

/// Users `u1` has no chat with yet.
fn unchatted(_: &Universe, s: &AbstractState, b: &Binding) -> FiniteSet {
    s.user.diff(&s.chat.image_of(b.value("u1")))
}

fn chat_partner(_: &Universe, s: &AbstractState, b: &Binding) -> FiniteSet {
    s.chat.image_of(b.value("u1"))
}

fn active_partner(_: &Universe, s: &AbstractState, b: &Binding) -> FiniteSet {
    s.active.image_of(b.value("u1"))
}

fn muted_partner(_: &Universe, s: &AbstractState, b: &Binding) -> FiniteSet {
    s.muted.image_of(b.value("u1"))
}

/// Content `u1` has sent to `u2`.
fn sent_to_partner(_: &Universe, s: &AbstractState, b: &Binding) -> FiniteSet {
    let (u1, u2) = pair(b);
    s.sent_by(u1)
        .map(|inner| {
            inner
                .iter()
                .filter(|(_, to)| to.as_set().is_some_and(|to| to.contains(u2)))
                .map(|(c, _)| c.clone())
                .collect()
        })
        .unwrap_or_default()
}

fn subsets_of(cfg: &Universe, of: &FiniteSet) -> FiniteSet {
    of.subsets(1, cfg.subset_cap)
        .into_iter()
        .map(Element::Set)
        .collect()
}

/// Users `u` may fan out to: neither side has muted the other.
fn unmuted_with(s: &AbstractState, u: &Element, of: &FiniteSet) -> FiniteSet {
    of.iter()
        .filter(|v| !s.muted.contains(u, v) && !s.muted.contains(v, u))
        .cloned()
        .collect()
}

fn partner_subset(cfg: &Universe, s: &AbstractState, b: &Binding) -> FiniteSet {
    let u = b.value("u");
    subsets_of(cfg, &unmuted_with(s, u, &s.chat.image_of(u)))
}

fn user_subset(cfg: &Universe, s: &AbstractState, b: &Binding) -> FiniteSet {
    subsets_of(cfg, &unmuted_with(s, b.value("u"), &s.user))
}

pub(crate) type GuardImpl = fn(&Universe, &AbstractState, &Binding) -> bool;
pub(crate) type ActionImpl = fn(&Universe, &AbstractState, &Binding) -> AbstractState;

/// An abstract event as plain functions, so the refinement can reuse its
/// guard and action on the abstract part of a concrete state.
#[derive(Clone, Copy)]
pub struct AbstractEvent {
    pub name: &'static str,
    pub(crate) params: &'static [(&'static str, DomainImpl)],
    pub(crate) guard: GuardImpl,
    pub(crate) action: ActionImpl,
}

impl AbstractEvent {
    pub(crate) fn descriptor<S: MachineState>(
        &self,
        name: &str,
        cfg: &Arc<Universe>,
        view: fn(&S) -> &AbstractState,
    ) -> EventDescriptor<S> {
        let mut d = EventDescriptor::new(name);
        for &(pname, domain) in self.params {
            let cfg = cfg.clone();
            d = d.param(pname, move |s: &S, b: &Binding| domain(&cfg, view(s), b));
        }
        d
    }
}

fn pair(b: &Binding) -> (&Element, &Element) {
    (b.value("u1"), b.value("u2"))
}

fn both_users(s: &AbstractState, b: &Binding) -> bool {
    let (u1, u2) = pair(b);
    s.user.contains(u1) && s.user.contains(u2)
}

fn one(x: &Element, y: &Element) -> FiniteRelation {
    FiniteRelation::singleton(x.clone(), y.clone())
}

fn g_add_user(cfg: &Universe, s: &AbstractState, b: &Binding) -> bool {
    let u = b.value("u");
    cfg.users.contains(u) && !s.user.contains(u)
}

fn a_add_user(_: &Universe, s: &AbstractState, b: &Binding) -> AbstractState {
    let u = b.value("u");
    let empties = s
        .content
        .cross(&FiniteSet::singleton(Element::Set(FiniteSet::empty())));
    AbstractState {
        user: s.user.with(u.clone()),
        chatcontent: s.with_sent(u, empties),
        ..s.clone()
    }
}

fn g_add_content(cfg: &Universe, s: &AbstractState, b: &Binding) -> bool {
    let c = b.value("c");
    cfg.contents.contains(c) && !s.content.contains(c)
}

fn a_add_content(cfg: &Universe, s: &AbstractState, b: &Binding) -> AbstractState {
    let c = b.value("c");
    let fresh = one(c, &Element::Set(FiniteSet::empty()));
    let chatcontent = match cfg.add_content {
        AddContentMode::Pointwise => FiniteRelation::from_pairs(s.chatcontent.iter().map(
            |(u, inner)| {
                let inner = inner.as_relation().unwrap_or_default();
                (u.clone(), inner.override_with(&fresh).into())
            },
        )),
        AddContentMode::Literal => s.chatcontent.union(
            &s.user
                .cross(&FiniteSet::singleton(fresh.to_element())),
        ),
    };
    AbstractState {
        content: s.content.with(c.clone()),
        chatcontent,
        ..s.clone()
    }
}

fn g_create_chat_session(_: &Universe, s: &AbstractState, b: &Binding) -> bool {
    let (u1, u2) = pair(b);
    both_users(s, b) && !s.chat.contains(u1, u2)
}

fn a_create_chat_session(_: &Universe, s: &AbstractState, b: &Binding) -> AbstractState {
    let (u1, u2) = pair(b);
    AbstractState {
        chat: s.chat.with(u1.clone(), u2.clone()),
        active: s.active.override_with(&one(u1, u2)),
        ..s.clone()
    }
}

fn g_select_chat(_: &Universe, s: &AbstractState, b: &Binding) -> bool {
    let (u1, u2) = pair(b);
    both_users(s, b)
        && s.chat.contains(u1, u2)
        && !s.muted.contains(u1, u2)
        && !s.active.contains(u1, u2)
}

fn a_select_chat(_: &Universe, s: &AbstractState, b: &Binding) -> AbstractState {
    let (u1, u2) = pair(b);
    AbstractState {
        active: s.active.override_with(&one(u1, u2)),
        ..s.clone()
    }
}

fn g_unselect_chat(_: &Universe, s: &AbstractState, b: &Binding) -> bool {
    let (u1, u2) = pair(b);
    both_users(s, b) && s.chat.contains(u1, u2) && s.active.contains(u1, u2)
}

fn a_unselect_chat(_: &Universe, s: &AbstractState, b: &Binding) -> AbstractState {
    let (u1, u2) = pair(b);
    AbstractState {
        active: s.active.without(u1, u2),
        ..s.clone()
    }
}

fn g_chatting(cfg: &Universe, s: &AbstractState, b: &Binding) -> bool {
    let (u1, u2) = pair(b);
    let c = b.value("c");
    both_users(s, b)
        && s.active.contains(u1, u2)
        && !s.muted.contains(u1, u2)
        && !s.muted.contains(u2, u1)
        && cfg.contents.contains(c)
        && !s.content.contains(c)
        && s.chatcontent.in_dom(u1)
}

fn a_chatting(cfg: &Universe, s: &AbstractState, b: &Binding) -> AbstractState {
    let (u1, u2) = pair(b);
    let c = b.value("c");
    let sent = s.sent_by(u1).unwrap_or_default();
    let mut chatcontent = s.with_sent(
        u1,
        sent.union(&one(c, &FiniteSet::singleton(u2.clone()).into())),
    );
    if cfg.symmetric_chat {
        // u2's prior entries, plus c ↦ {u1}
        let theirs = s
            .sent_by(u2)
            .unwrap_or_default()
            .union(&one(c, &FiniteSet::singleton(u1.clone()).into()));
        chatcontent = chatcontent.override_with(&one(u2, &theirs.into()));
    }
    AbstractState {
        content: s.content.with(c.clone()),
        chat: s.chat.with(u2.clone(), u1.clone()),
        chatcontent,
        ..s.clone()
    }
}

/// Shared guard of delete-content and remove-content.
fn g_content_owned(_: &Universe, s: &AbstractState, b: &Binding) -> bool {
    let (u1, u2) = pair(b);
    let c = b.value("c");
    both_users(s, b)
        && s.active.contains(u1, u2)
        && s.chatcontent.in_dom(u1)
        && s.sent_by(u1).is_some_and(|inner| inner.in_dom(c))
        && s.recipients(u1, c).is_some_and(|r| r.contains(u2))
}

fn a_delete_content(_: &Universe, s: &AbstractState, b: &Binding) -> AbstractState {
    let (u1, u2) = pair(b);
    let c = b.value("c");
    let inner = s.sent_by(u1).unwrap_or_default();
    let left = s.recipients(u1, c).unwrap_or_default().without(u2);
    AbstractState {
        chatcontent: s.with_sent(u1, inner.override_with(&one(c, &left.into()))),
        ..s.clone()
    }
}

fn a_remove_content(cfg: &Universe, s: &AbstractState, b: &Binding) -> AbstractState {
    let u1 = b.value("u1");
    let c = b.value("c");
    let inner = s.sent_by(u1).unwrap_or_default();
    let content = match cfg.remove_content {
        RemoveContentMode::Verbatim => s.content.without(c),
        RemoveContentMode::Recompute => s
            .chatcontent
            .iter()
            .filter_map(|(a, inner)| inner.as_relation().map(|r| (a, r)))
            .flat_map(|(a, r)| {
                r.dom()
                    .iter()
                    .filter(|cc| !(a == u1 && *cc == c))
                    .cloned()
                    .collect::<Vec<_>>()
            })
            .collect(),
    };
    AbstractState {
        chatcontent: s.with_sent(u1, inner.dom_subtract(&FiniteSet::singleton(c.clone()))),
        content,
        ..s.clone()
    }
}

fn g_mute_chat(_: &Universe, s: &AbstractState, b: &Binding) -> bool {
    let (u1, u2) = pair(b);
    both_users(s, b) && s.chat.contains(u1, u2) && !s.muted.contains(u1, u2)
}

fn a_mute_chat(_: &Universe, s: &AbstractState, b: &Binding) -> AbstractState {
    let (u1, u2) = pair(b);
    AbstractState {
        muted: s.muted.with(u1.clone(), u2.clone()),
        active: s.active.without(u1, u2),
        ..s.clone()
    }
}

fn g_unmute_chat(_: &Universe, s: &AbstractState, b: &Binding) -> bool {
    let (u1, u2) = pair(b);
    both_users(s, b) && s.chat.contains(u1, u2) && s.muted.contains(u1, u2)
}

fn a_unmute_chat(_: &Universe, s: &AbstractState, b: &Binding) -> AbstractState {
    let (u1, u2) = pair(b);
    AbstractState {
        muted: s.muted.without(u1, u2),
        ..s.clone()
    }
}

/// Forward's guards without `us ⊆ chat[{u}]`.
fn g_broadcast(_: &Universe, s: &AbstractState, b: &Binding) -> bool {
    let u = b.value("u");
    let Some(us) = b.value("us").as_set() else {
        return false;
    };
    // muted[{u}] ∩ us = ∅ ∧ muted[us] ∩ {u} = ∅, pointwise
    s.user.contains(u)
        && s.content.contains(b.value("c"))
        && s.chatcontent.in_dom(u)
        && us.is_subset(&s.user)
        && us
            .iter()
            .all(|v| !s.muted.contains(u, v) && !s.muted.contains(v, u))
}

fn g_forward(cfg: &Universe, s: &AbstractState, b: &Binding) -> bool {
    g_broadcast(cfg, s, b)
        && b
            .set_value("us")
            .is_subset(&s.chat.image_of(b.value("u")))
}

fn sent_with_forwarded(cfg: &Universe, s: &AbstractState, b: &Binding) -> FiniteRelation {
    let u = b.value("u");
    let us = b.set_value("us");
    let c = b.value("c");
    let inner = s.sent_by(u).unwrap_or_default();
    let inner = match cfg.forward {
        ForwardMode::Merge => {
            let to = s.recipients(u, c).unwrap_or_default().union(us);
            inner.override_with(&one(c, &to.into()))
        }
        ForwardMode::Literal => inner.union(&one(c, &us.clone().into())),
    };
    s.with_sent(u, inner)
}

fn a_forward(cfg: &Universe, s: &AbstractState, b: &Binding) -> AbstractState {
    let me = FiniteSet::singleton(b.value("u").clone());
    AbstractState {
        chatcontent: sent_with_forwarded(cfg, s, b),
        chat: s.chat.union(&b.set_value("us").cross(&me)),
        ..s.clone()
    }
}

fn a_broadcast(cfg: &Universe, s: &AbstractState, b: &Binding) -> AbstractState {
    let me = FiniteSet::singleton(b.value("u").clone());
    let us = b.set_value("us");
    let mut chat = s.chat.union(&us.cross(&me));
    if cfg.broadcast == BroadcastMode::BothDirections {
        chat = chat.union(&me.cross(us));
    }
    AbstractState {
        chatcontent: sent_with_forwarded(cfg, s, b),
        chat,
        ..s.clone()
    }
}

fn g_delete_chat_session(_: &Universe, s: &AbstractState, b: &Binding) -> bool {
    let (u1, u2) = pair(b);
    both_users(s, b) && s.chat.contains(u1, u2) && s.active.contains(u1, u2)
}

fn a_delete_chat_session(cfg: &Universe, s: &AbstractState, b: &Binding) -> AbstractState {
    let (u1, u2) = pair(b);
    let chatcontent = match s.sent_by(u1) {
        Some(inner) => {
            let stripped = FiniteRelation::from_pairs(inner.iter().map(|(c, to)| {
                let to = to.as_set().cloned().unwrap_or_default().without(u2);
                (c.clone(), to.into())
            }));
            s.with_sent(u1, stripped)
        }
        None => s.chatcontent.clone(),
    };
    let mut next = AbstractState {
        chat: s.chat.without(u1, u2),
        active: s.active.without(u1, u2),
        muted: s.muted.without(u1, u2),
        chatcontent,
        ..s.clone()
    };
    if cfg.remove_content == RemoveContentMode::Recompute {
        next.content = next.sent_content();
    }
    next
}

/// The thirteen abstract events in declaration order.
pub fn abstract_events() -> Vec<AbstractEvent> {
    vec![
        AbstractEvent {
            name: "add_user",
            params: &[("u", fresh_user)],
            guard: g_add_user,
            action: a_add_user,
        },
        AbstractEvent {
            name: "add_content",
            params: &[("c", fresh_content)],
            guard: g_add_content,
            action: a_add_content,
        },
        AbstractEvent {
            name: "create_chat_session",
            params: &[("u1", any_user), ("u2", unchatted)],
            guard: g_create_chat_session,
            action: a_create_chat_session,
        },
        AbstractEvent {
            name: "select_chat",
            params: &[("u1", any_user), ("u2", chat_partner)],
            guard: g_select_chat,
            action: a_select_chat,
        },
        AbstractEvent {
            name: "unselect_chat",
            params: &[("u1", any_user), ("u2", active_partner)],
            guard: g_unselect_chat,
            action: a_unselect_chat,
        },
        AbstractEvent {
            name: "chatting",
            params: &[("u1", any_user), ("u2", active_partner), ("c", fresh_content)],
            guard: g_chatting,
            action: a_chatting,
        },
        AbstractEvent {
            name: "delete_content",
            params: &[("u1", any_user), ("u2", active_partner), ("c", sent_to_partner)],
            guard: g_content_owned,
            action: a_delete_content,
        },
        AbstractEvent {
            name: "remove_content",
            params: &[("u1", any_user), ("u2", active_partner), ("c", sent_to_partner)],
            guard: g_content_owned,
            action: a_remove_content,
        },
        AbstractEvent {
            name: "mute_chat",
            params: &[("u1", any_user), ("u2", chat_partner)],
            guard: g_mute_chat,
            action: a_mute_chat,
        },
        AbstractEvent {
            name: "unmute_chat",
            params: &[("u1", any_user), ("u2", muted_partner)],
            guard: g_unmute_chat,
            action: a_unmute_chat,
        },
        AbstractEvent {
            name: "forward",
            params: &[("u", any_user), ("us", partner_subset), ("c", any_content)],
            guard: g_forward,
            action: a_forward,
        },
        AbstractEvent {
            name: "broadcast",
            params: &[("u", any_user), ("us", user_subset), ("c", any_content)],
            guard: g_broadcast,
            action: a_broadcast,
        },
        AbstractEvent {
            name: "delete_chat_session",
            params: &[("u1", any_user), ("u2", active_partner)],
            guard: g_delete_chat_session,
            action: a_delete_chat_session,
        },
    ]
}

/// `chatcontent ∈ user ⇸ (content ⇸ ℙ(user))`
fn chatcontent_typed(s: &AbstractState) -> bool {
    s.chatcontent.is_functional()
        && s.chatcontent.iter().all(|(u, inner)| {
            s.user.contains(u)
                && inner.as_relation().is_some_and(|inner| {
                    inner.is_functional()
                        && inner.iter().all(|(c, to)| {
                            s.content.contains(c)
                                && to.as_set().is_some_and(|to| to.is_subset(&s.user))
                        })
                })
        })
}

/// Recipients of anything `u` sent are among `u`'s chat partners.
fn recipients_in_chats(s: &AbstractState) -> bool {
    s.chatcontent
        .iter()
        .filter(|(u, _)| s.user.contains(u))
        .all(|(u, inner)| {
            let partners = s.chat.image_of(u);
            match inner.as_relation() {
                Some(inner) => inner
                    .iter()
                    .filter(|(c, _)| s.content.contains(c))
                    .all(|(_, to)| to.as_set().is_some_and(|to| to.is_subset(&partners))),
                None => true,
            }
        })
}

pub(crate) type AbstractPredicate = Box<dyn Fn(&AbstractState) -> bool + Send + Sync>;

/// Labelled state invariants inv1–inv10, usable on any state that embeds an
/// [`AbstractState`].
pub(crate) fn abstract_invariants(cfg: &Universe) -> Vec<(&'static str, AbstractPredicate)> {
    let users = cfg.users.clone();
    let contents = cfg.contents.clone();
    vec![
        ("inv1", Box::new(move |s| s.user.is_subset(&users))),
        ("inv2", Box::new(move |s| s.content.is_subset(&contents))),
        ("inv3", Box::new(|s| s.chat.is_relation(&s.user, &s.user))),
        ("inv4", Box::new(chatcontent_typed)),
        (
            "inv5",
            Box::new(|s| s.active.is_partial_function(&s.user, &s.user)),
        ),
        ("inv6", Box::new(|s| s.muted.is_relation(&s.user, &s.user))),
        ("inv7", Box::new(|s| s.active.is_subset(&s.chat))),
        ("inv8", Box::new(|s| s.muted.is_subset(&s.chat))),
        ("inv9", Box::new(|s| s.muted.inter(&s.active).is_empty())),
        ("inv10", Box::new(recipients_in_chats)),
    ]
}

/// The abstract machine with every state variable empty initially.
pub fn machine0(cfg: &ModelConfig) -> MachineDefinition<AbstractState> {
    let shared = Arc::new(Universe::new(cfg));
    let mut m = MachineDefinition::new("machine0", AbstractState::default);
    for ev in abstract_events() {
        let (c1, c2) = (shared.clone(), shared.clone());
        let (guard, action) = (ev.guard, ev.action);
        m = m.event(
            ev.descriptor(ev.name, &shared, |s: &AbstractState| s)
                .guard(move |s, b| guard(&c1, s, b))
                .action(move |s, b| action(&c2, s, b)),
        );
    }
    for (label, p) in abstract_invariants(&shared) {
        m = m.invariant(label, p);
    }
    m
}
