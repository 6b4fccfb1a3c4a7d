use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::{Element, FiniteRelation};

/// Immutable, duplicate-free finite set with canonical (sorted) iteration.
///
/// Cloning shares storage; every "update" builds a new set.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FiniteSet(Arc<BTreeSet<Element>>);

impl FiniteSet {
    pub fn empty() -> Self {
        FiniteSet::default()
    }

    pub fn singleton(e: Element) -> Self {
        FiniteSet::from_iter([e])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: &Element) -> bool {
        self.0.contains(e)
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &Element> + '_ {
        self.0.iter()
    }

    pub(crate) fn range_from<'a>(&'a self, start: &Element) -> impl Iterator<Item = &'a Element> + 'a {
        self.0
            .range((std::ops::Bound::Included(start.clone()), std::ops::Bound::Unbounded))
    }

    pub fn first(&self) -> Option<&Element> {
        self.0.first()
    }

    pub fn last(&self) -> Option<&Element> {
        self.0.last()
    }

    pub fn with(&self, e: Element) -> Self {
        if self.contains(&e) {
            return self.clone();
        }
        let mut out = self.clone();
        Arc::make_mut(&mut out.0).insert(e);
        out
    }

    pub fn without(&self, e: &Element) -> Self {
        if !self.contains(e) {
            return self.clone();
        }
        let mut out = self.clone();
        Arc::make_mut(&mut out.0).remove(e);
        out
    }

    pub fn union(&self, other: &FiniteSet) -> Self {
        if other.is_empty() {
            return self.clone();
        }
        if self.is_empty() {
            return other.clone();
        }
        self.iter().chain(other.iter()).cloned().collect()
    }

    pub fn inter(&self, other: &FiniteSet) -> Self {
        self.iter().filter(|e| other.contains(e)).cloned().collect()
    }

    pub fn diff(&self, other: &FiniteSet) -> Self {
        if other.is_empty() {
            return self.clone();
        }
        self.iter().filter(|e| !other.contains(e)).cloned().collect()
    }

    pub fn is_subset(&self, other: &FiniteSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &FiniteSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    /// Cartesian product `self × other`.
    pub fn cross(&self, other: &FiniteSet) -> FiniteRelation {
        FiniteRelation::from_pairs(
            self.iter()
                .flat_map(|a| other.iter().map(move |b| (a.clone(), b.clone()))),
        )
    }

    /// All subsets whose size lies in `min..=max`, in canonical order.
    pub fn subsets(&self, min: usize, max: usize) -> Vec<FiniteSet> {
        let items: Vec<&Element> = self.iter().collect();
        let mut out = Vec::new();
        let mut chosen = Vec::new();
        fn go<'a>(
            items: &[&'a Element],
            start: usize,
            min: usize,
            max: usize,
            chosen: &mut Vec<&'a Element>,
            out: &mut Vec<FiniteSet>,
        ) {
            if chosen.len() >= min {
                out.push(chosen.iter().map(|e| (*e).clone()).collect());
            }
            if chosen.len() == max {
                return;
            }
            for i in start..items.len() {
                chosen.push(items[i]);
                go(items, i + 1, min, max, chosen, out);
                chosen.pop();
            }
        }
        go(&items, 0, min, max, &mut chosen, &mut out);
        out.sort();
        out
    }
}

impl FromIterator<Element> for FiniteSet {
    fn from_iter<I: IntoIterator<Item = Element>>(iter: I) -> Self {
        FiniteSet(Arc::new(iter.into_iter().collect()))
    }
}

impl<'a> IntoIterator for &'a FiniteSet {
    type Item = &'a Element;
    type IntoIter = std::collections::btree_set::Iter<'a, Element>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for FiniteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for FiniteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The segment `lo..hi` of naturals; empty when `lo > hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NatSegment {
    pub lo: u64,
    pub hi: u64,
}

impl NatSegment {
    pub fn new(lo: u64, hi: u64) -> Self {
        NatSegment { lo, hi }
    }

    pub fn contains(&self, n: u64) -> bool {
        self.lo <= n && n <= self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn to_set(&self) -> FiniteSet {
        (self.lo..=self.hi).map(Element::Nat).collect()
    }
}
