//! Reading state dumps back in. Writing is `MachineState::dump`.

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

use super::{AbstractState, ConcreteState};
use crate::relkernel::{parse_element, Element, FiniteRelation, FiniteSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DumpError {
    #[error("line {line}: expected `name = value`")]
    Syntax { line: usize },
    #[error("line {line}: {message}")]
    Value { line: usize, message: String },
    #[error("line {line}: unknown variable `{name}`")]
    UnknownVariable { line: usize, name: String },
    #[error("line {line}: `{name}` given twice")]
    Repeated { line: usize, name: String },
    #[error("missing variable `{0}`")]
    Missing(&'static str),
}

const ABSTRACT_VARS: [&str; 6] = ["user", "content", "chat", "active", "muted", "chatcontent"];
const CONCRETE_VARS: [&str; 3] = ["csize", "contents", "screen"];

struct Fields(BTreeMap<String, (usize, Element)>);

impl Fields {
    fn parse(text: &str, allowed: &[&str]) -> Result<Self, DumpError> {
        let mut out = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let (name, value) = raw.split_once('=').ok_or(DumpError::Syntax { line })?;
            let name = name.trim();
            if !allowed.contains(&name) {
                return Err(DumpError::UnknownVariable {
                    line,
                    name: name.to_string(),
                });
            }
            let value = parse_element(value).map_err(|e| DumpError::Value {
                line,
                message: e.to_string(),
            })?;
            if out.insert(name.to_string(), (line, value)).is_some() {
                return Err(DumpError::Repeated {
                    line,
                    name: name.to_string(),
                });
            }
        }
        Ok(Fields(out))
    }

    fn take(&mut self, name: &'static str) -> Result<(usize, Element), DumpError> {
        self.0.remove(name).ok_or(DumpError::Missing(name))
    }

    fn set(&mut self, name: &'static str) -> Result<FiniteSet, DumpError> {
        let (line, e) = self.take(name)?;
        e.as_set().cloned().ok_or_else(|| DumpError::Value {
            line,
            message: format!("`{name}` must be a set"),
        })
    }

    fn relation(&mut self, name: &'static str) -> Result<FiniteRelation, DumpError> {
        let (line, e) = self.take(name)?;
        e.as_relation().ok_or_else(|| DumpError::Value {
            line,
            message: format!("`{name}` must be a set of pairs"),
        })
    }

    fn nat(&mut self, name: &'static str) -> Result<u64, DumpError> {
        let (line, e) = self.take(name)?;
        e.as_nat().ok_or_else(|| DumpError::Value {
            line,
            message: format!("`{name}` must be a natural number"),
        })
    }

    fn abstract_state(&mut self) -> Result<AbstractState, DumpError> {
        Ok(AbstractState {
            user: self.set("user")?,
            content: self.set("content")?,
            chat: self.relation("chat")?,
            active: self.relation("active")?,
            muted: self.relation("muted")?,
            chatcontent: self.relation("chatcontent")?,
        })
    }
}

impl FromStr for AbstractState {
    type Err = DumpError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        Fields::parse(text, &ABSTRACT_VARS)?.abstract_state()
    }
}

impl FromStr for ConcreteState {
    type Err = DumpError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let allowed: Vec<&str> = ABSTRACT_VARS.iter().chain(&CONCRETE_VARS).copied().collect();
        let mut f = Fields::parse(text, &allowed)?;
        Ok(ConcreteState {
            abs: f.abstract_state()?,
            csize: f.nat("csize")?,
            contents: f.relation("contents")?,
            screen: f.relation("screen")?,
        })
    }
}
