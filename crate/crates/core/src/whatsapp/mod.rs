//! The messaging-app model: an abstract machine over users, content and chat
//! sessions, and a concrete refinement that orders content on per-chat
//! screens.

mod abstract_model;
mod concrete;
mod dump;
pub mod mutants;

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use crate::relkernel::{Element, FiniteSet};

pub use abstract_model::{abstract_events, machine0, AbstractState};
pub use concrete::{
    machine2, project, read_chat, screen_chatcontent_diagnostic, ConcreteState, ReadError,
};
pub use dump::DumpError;

/// How `add_content` extends `chatcontent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AddContentMode {
    /// Every sender's inner mapping gains `c ↦ ∅`.
    #[default]
    Pointwise,
    /// `chatcontent ∪ (user × {{c ↦ ∅}})`, which breaks functionality of
    /// `chatcontent` as soon as a user exists.
    Literal,
}

/// How `remove_content` (and `delete_chat_session`) update `content`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RemoveContentMode {
    /// `content := {cc | cc still sent by someone}`.
    #[default]
    Recompute,
    /// `content := content ∖ {c}`, which strands copies held by other senders.
    Verbatim,
}

/// How `forward`/`broadcast` install `c ↦ us` into the sender's mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForwardMode {
    /// `chatcontent(u) ⊕ {c ↦ chatcontent(u)(c) ∪ us}`.
    #[default]
    Merge,
    /// `chatcontent(u) ∪ {c ↦ us}`.
    Literal,
}

/// Which chat sessions `broadcast` creates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BroadcastMode {
    /// Both `us × {u}` and `{u} × us`, so the sender's recipients stay
    /// within its own chats.
    #[default]
    BothDirections,
    /// Only `us × {u}`.
    Literal,
}

macro_rules! mode_text {
    ($ty:ty { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $text),+ })
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok(Self::$variant),)+
                    _ => Err(format!(
                        "unknown mode `{s}` (expected one of: {})",
                        [$($text),+].join(", ")
                    )),
                }
            }
        }
    };
}

mode_text!(AddContentMode { Pointwise => "pointwise", Literal => "literal" });
mode_text!(RemoveContentMode { Recompute => "recompute", Verbatim => "verbatim" });
mode_text!(ForwardMode { Merge => "merge", Literal => "literal" });
mode_text!(BroadcastMode { BothDirections => "both", Literal => "literal" });

/// Universe sizes, subset cap and behaviour variants shared by both machines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub users: usize,
    pub contents: usize,
    /// Largest set enumerated for the `us` parameter of forward/broadcast.
    pub subset_cap: usize,
    /// `chatting` also records the content in the receiver's mapping.
    pub symmetric_chat: bool,
    pub add_content: AddContentMode,
    pub remove_content: RemoveContentMode,
    pub forward: ForwardMode,
    pub broadcast: BroadcastMode,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            users: 3,
            contents: 4,
            subset_cap: 2,
            symmetric_chat: false,
            add_content: AddContentMode::default(),
            remove_content: RemoveContentMode::default(),
            forward: ForwardMode::default(),
            broadcast: BroadcastMode::default(),
        }
    }
}

impl ModelConfig {
    pub fn with_pools(users: usize, contents: usize) -> Self {
        ModelConfig {
            users,
            contents,
            ..ModelConfig::default()
        }
    }

    /// The USER carrier set: `A, B, C, ...` (then `U27, U28, ...`).
    pub fn user_pool(&self) -> FiniteSet {
        (0..self.users).map(|i| Element::atom(&user_name(i))).collect()
    }

    /// The CONTENT carrier set: `c1, c2, ...`.
    pub fn content_pool(&self) -> FiniteSet {
        (1..=self.contents)
            .map(|i| Element::atom(&format!("c{i}")))
            .collect()
    }

    /// Sets an option by its scenario/CLI name.
    pub fn set_option(&mut self, key: &str, value: &str) -> Result<(), String> {
        let num = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| format!("option `{key}` expects a number, got `{v}`"))
        };
        match key {
            "users" => self.users = num(value)?,
            "contents" => self.contents = num(value)?,
            "subset_cap" => self.subset_cap = num(value)?,
            "symmetric_chat" => {
                self.symmetric_chat = match value {
                    "true" | "on" => true,
                    "false" | "off" => false,
                    _ => return Err(format!("option `{key}` expects true/false, got `{value}`")),
                }
            }
            "add_content" => self.add_content = value.parse()?,
            "remove_content" => self.remove_content = value.parse()?,
            "forward" => self.forward = value.parse()?,
            "broadcast" => self.broadcast = value.parse()?,
            _ => return Err(format!("unknown option `{key}`")),
        }
        Ok(())
    }

    /// The non-pool options as `key=value` pairs, in a fixed order.
    pub fn options(&self) -> Vec<(&'static str, String)> {
        vec![
            ("subset_cap", self.subset_cap.to_string()),
            ("symmetric_chat", self.symmetric_chat.to_string()),
            ("add_content", self.add_content.to_string()),
            ("remove_content", self.remove_content.to_string()),
            ("forward", self.forward.to_string()),
            ("broadcast", self.broadcast.to_string()),
        ]
    }
}

/// A configuration with its carrier pools built once.
#[derive(Debug)]
pub(crate) struct Universe {
    pub cfg: ModelConfig,
    pub users: FiniteSet,
    pub contents: FiniteSet,
}

impl Universe {
    pub fn new(cfg: &ModelConfig) -> Self {
        Universe {
            cfg: cfg.clone(),
            users: cfg.user_pool(),
            contents: cfg.content_pool(),
        }
    }
}

impl Deref for Universe {
    type Target = ModelConfig;

    fn deref(&self) -> &ModelConfig {
        &self.cfg
    }
}

fn user_name(i: usize) -> String {
    if i < 26 {
        char::from(b'A' + i as u8).to_string()
    } else {
        format!("U{}", i + 1)
    }
}
