//! Seeded faults for exercising the checkers.

use std::fmt;
use std::str::FromStr;

use super::{AbstractState, ConcreteState};
use crate::machine::{EventDescriptor, MachineDefinition, MachineState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutant {
    /// `select_chat` adds to `active` with `∪` instead of `⊕`.
    SelectChatUnion,
    /// `delete_content` also performs `content := content ∖ {c}`.
    DeleteContentShrinks,
    /// Refined chatting leaves `contents` untouched.
    ChattingWithoutContents,
    /// Refined chatting does not add `u2 ↦ u1` to `chat`.
    ChattingWithoutReverseChat,
}

impl Mutant {
    pub const ALL: [Mutant; 4] = [
        Mutant::SelectChatUnion,
        Mutant::DeleteContentShrinks,
        Mutant::ChattingWithoutContents,
        Mutant::ChattingWithoutReverseChat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutant::SelectChatUnion => "select-chat-union",
            Mutant::DeleteContentShrinks => "delete-content-shrinks",
            Mutant::ChattingWithoutContents => "chatting-without-contents",
            Mutant::ChattingWithoutReverseChat => "chatting-without-reverse-chat",
        }
    }

    /// Whether the fault targets the refined machine.
    pub fn is_concrete(self) -> bool {
        matches!(
            self,
            Mutant::ChattingWithoutContents | Mutant::ChattingWithoutReverseChat
        )
    }

    pub fn apply_abstract(
        self,
        m: MachineDefinition<AbstractState>,
    ) -> Result<MachineDefinition<AbstractState>, String> {
        match self {
            Mutant::SelectChatUnion => Ok(m.map_event("select_chat", |e| {
                wrap(e, |pre, b, post| AbstractState {
                    active: pre.active.with(b.value("u1").clone(), b.value("u2").clone()),
                    ..post
                })
            })),
            Mutant::DeleteContentShrinks => Ok(m.map_event("delete_content", |e| {
                wrap(e, |_, b, post| AbstractState {
                    content: post.content.without(b.value("c")),
                    ..post
                })
            })),
            _ => Err(format!("mutant `{self}` applies to machine2 only")),
        }
    }

    pub fn apply_concrete(
        self,
        m: MachineDefinition<ConcreteState>,
    ) -> Result<MachineDefinition<ConcreteState>, String> {
        let chatting = ["chatting_refined", "chatting_first_time"];
        match self {
            Mutant::ChattingWithoutContents => Ok(chatting.iter().fold(m, |m, name| {
                m.map_event(name, |e| {
                    wrap(e, |pre, _, post| ConcreteState {
                        contents: pre.contents.clone(),
                        ..post
                    })
                })
            })),
            Mutant::ChattingWithoutReverseChat => Ok(chatting.iter().fold(m, |m, name| {
                m.map_event(name, |e| {
                    wrap(e, |pre, _, mut post| {
                        post.abs.chat = pre.abs.chat.clone();
                        post
                    })
                })
            })),
            _ => Err(format!("mutant `{self}` applies to machine0 only")),
        }
    }
}

/// Post-processes an event's action with `(pre, binding, post) -> post'`.
fn wrap<S: MachineState>(
    e: EventDescriptor<S>,
    f: impl Fn(&S, &crate::machine::Binding, S) -> S + Send + Sync + 'static,
) -> EventDescriptor<S> {
    let original = e.action_fn();
    e.action(move |s, b| f(s, b, original(s, b)))
}

impl fmt::Display for Mutant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mutant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mutant::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Mutant::ALL.iter().map(|m| m.name()).collect();
                format!("unknown mutant `{s}` (expected one of: {})", names.join(", "))
            })
    }
}
