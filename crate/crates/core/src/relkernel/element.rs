use std::fmt;
use std::sync::Arc;

use super::{FiniteRelation, FiniteSet};

/// A value in the model universe.
///
/// Atoms name carrier-set members (users, content items), naturals index
/// sequences, and pairs and sets let relations nest inside relations. The
/// derived ordering is total and agrees with structural equality, which is
/// what gives every set its canonical iteration order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    Nat(u64),
    Atom(Arc<str>),
    Pair(Arc<(Element, Element)>),
    Set(FiniteSet),
}

impl Element {
    pub fn atom(name: &str) -> Self {
        Element::Atom(Arc::from(name))
    }

    pub fn nat(n: u64) -> Self {
        Element::Nat(n)
    }

    pub fn pair(left: Element, right: Element) -> Self {
        Element::Pair(Arc::new((left, right)))
    }

    pub fn as_nat(&self) -> Option<u64> {
        match self {
            Element::Nat(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Element::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&Element, &Element)> {
        match self {
            Element::Pair(p) => Some((&p.0, &p.1)),
            _ => None,
        }
    }

    pub fn as_set(&self) -> Option<&FiniteSet> {
        match self {
            Element::Set(s) => Some(s),
            _ => None,
        }
    }

    /// Views a set-valued element as a relation, if every member is a pair.
    pub fn as_relation(&self) -> Option<FiniteRelation> {
        self.as_set().and_then(|s| FiniteRelation::try_from_set(s.clone()))
    }
}

impl From<FiniteSet> for Element {
    fn from(s: FiniteSet) -> Self {
        Element::Set(s)
    }
}

impl From<FiniteRelation> for Element {
    fn from(r: FiniteRelation) -> Self {
        Element::Set(r.into_set())
    }
}

impl From<u64> for Element {
    fn from(n: u64) -> Self {
        Element::Nat(n)
    }
}

impl From<&str> for Element {
    fn from(a: &str) -> Self {
        Element::atom(a)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Nat(n) => write!(f, "{n}"),
            Element::Atom(a) => f.write_str(a),
            Element::Pair(p) => write!(f, "({},{})", p.0, p.1),
            Element::Set(s) => write!(f, "{s}"),
        }
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_is_total_across_variants() {
        let mut v = [
            Element::Set(FiniteSet::empty()),
            Element::pair(Element::nat(1), Element::atom("a")),
            Element::atom("b"),
            Element::nat(3),
            Element::atom("a"),
        ];
        v.sort();
        let shown: Vec<String> = v.iter().map(|e| e.to_string()).collect();
        assert_eq!(shown, ["3", "a", "b", "(1,a)", "{}"]);
    }

    #[test]
    fn relation_view_requires_pairs() {
        let s = FiniteSet::from_iter([Element::atom("a")]);
        assert!(Element::Set(s).as_relation().is_none());
        assert!(Element::Set(FiniteSet::empty()).as_relation().is_some());
    }
}
