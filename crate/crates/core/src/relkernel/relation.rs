use std::fmt;

use super::{Element, FiniteSet, RelError};

/// A finite binary relation: a [`FiniteSet`] whose members are all pairs.
///
/// Keeping the pairs inside an ordinary set means a relation converts to an
/// [`Element`] for free, which is how nested mappings such as
/// `user ⇸ (content ⇸ ℙ(user))` are stored.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FiniteRelation(FiniteSet);

fn pair_parts(e: &Element) -> (&Element, &Element) {
    e.as_pair().expect("relation members are pairs")
}

impl FiniteRelation {
    pub fn empty() -> Self {
        FiniteRelation::default()
    }

    pub fn singleton(x: Element, y: Element) -> Self {
        FiniteRelation::from_pairs([(x, y)])
    }

    pub fn from_pairs<I: IntoIterator<Item = (Element, Element)>>(pairs: I) -> Self {
        FiniteRelation(pairs.into_iter().map(|(x, y)| Element::pair(x, y)).collect())
    }

    /// Accepts a set only if every member is a pair.
    pub fn try_from_set(s: FiniteSet) -> Option<Self> {
        if s.iter().all(|e| e.as_pair().is_some()) {
            Some(FiniteRelation(s))
        } else {
            None
        }
    }

    pub fn as_set(&self) -> &FiniteSet {
        &self.0
    }

    pub fn into_set(self) -> FiniteSet {
        self.0
    }

    pub fn to_element(&self) -> Element {
        Element::Set(self.0.clone())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (&Element, &Element)> + '_ {
        self.0.iter().map(pair_parts)
    }

    pub fn contains(&self, x: &Element, y: &Element) -> bool {
        self.0.contains(&Element::pair(x.clone(), y.clone()))
    }

    pub fn with(&self, x: Element, y: Element) -> Self {
        FiniteRelation(self.0.with(Element::pair(x, y)))
    }

    pub fn without(&self, x: &Element, y: &Element) -> Self {
        FiniteRelation(self.0.without(&Element::pair(x.clone(), y.clone())))
    }

    /// Pairs whose left component is `x`, found by a range scan.
    fn row<'a>(&'a self, x: &Element) -> impl Iterator<Item = &'a Element> + 'a {
        // Nat(0) is the least element, so (x,0) precedes every (x,_).
        let x = x.clone();
        let start = Element::pair(x.clone(), Element::Nat(0));
        self.0
            .range_from(&start)
            .map(pair_parts)
            .take_while(move |(l, _)| **l == x)
            .map(|(_, r)| r)
    }

    pub fn dom(&self) -> FiniteSet {
        self.iter().map(|(x, _)| x.clone()).collect()
    }

    pub fn ran(&self) -> FiniteSet {
        self.iter().map(|(_, y)| y.clone()).collect()
    }

    pub fn in_dom(&self, x: &Element) -> bool {
        self.row(x).next().is_some()
    }

    /// `r[{x}]`
    pub fn image_of(&self, x: &Element) -> FiniteSet {
        self.row(x).cloned().collect()
    }

    /// `r[s]`
    pub fn image(&self, s: &FiniteSet) -> FiniteSet {
        s.iter().flat_map(|x| self.row(x)).cloned().collect()
    }

    /// `r ⊕ q`
    pub fn override_with(&self, q: &FiniteRelation) -> Self {
        if q.is_empty() {
            return self.clone();
        }
        let qdom = q.dom();
        FiniteRelation(
            q.0.iter()
                .cloned()
                .chain(
                    self.0
                        .iter()
                        .filter(|e| !qdom.contains(pair_parts(e).0))
                        .cloned(),
                )
                .collect(),
        )
    }

    /// `s ◁ r`
    pub fn dom_restrict(&self, s: &FiniteSet) -> Self {
        self.filter(|x, _| s.contains(x))
    }

    /// `s ⩤ r`
    pub fn dom_subtract(&self, s: &FiniteSet) -> Self {
        self.filter(|x, _| !s.contains(x))
    }

    /// `r ▷ s`
    pub fn ran_restrict(&self, s: &FiniteSet) -> Self {
        self.filter(|_, y| s.contains(y))
    }

    /// `r ⩥ s`
    pub fn ran_subtract(&self, s: &FiniteSet) -> Self {
        self.filter(|_, y| !s.contains(y))
    }

    pub fn filter<F: Fn(&Element, &Element) -> bool>(&self, keep: F) -> Self {
        FiniteRelation(
            self.0
                .iter()
                .filter(|e| {
                    let (x, y) = pair_parts(e);
                    keep(x, y)
                })
                .cloned()
                .collect(),
        )
    }

    /// Forward composition `self ; r`.
    pub fn compose(&self, r: &FiniteRelation) -> Self {
        FiniteRelation::from_pairs(
            self.iter()
                .flat_map(|(x, y)| r.row(y).map(move |z| (x.clone(), z.clone()))),
        )
    }

    pub fn identity(s: &FiniteSet) -> Self {
        FiniteRelation::from_pairs(s.iter().map(|x| (x.clone(), x.clone())))
    }

    pub fn inverse(&self) -> Self {
        FiniteRelation::from_pairs(self.iter().map(|(x, y)| (y.clone(), x.clone())))
    }

    pub fn union(&self, other: &FiniteRelation) -> Self {
        FiniteRelation(self.0.union(&other.0))
    }

    pub fn inter(&self, other: &FiniteRelation) -> Self {
        FiniteRelation(self.0.inter(&other.0))
    }

    pub fn diff(&self, other: &FiniteRelation) -> Self {
        FiniteRelation(self.0.diff(&other.0))
    }

    pub fn is_subset(&self, other: &FiniteRelation) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Every left element maps to at most one right element.
    pub fn is_functional(&self) -> bool {
        let mut prev: Option<&Element> = None;
        for (x, _) in self.iter() {
            if prev == Some(x) {
                return false;
            }
            prev = Some(x);
        }
        true
    }

    /// `r ∈ A ↔ B`
    pub fn is_relation(&self, a: &FiniteSet, b: &FiniteSet) -> bool {
        self.iter().all(|(x, y)| a.contains(x) && b.contains(y))
    }

    /// `r ∈ A ⇸ B`
    pub fn is_partial_function(&self, a: &FiniteSet, b: &FiniteSet) -> bool {
        self.is_relation(a, b) && self.is_functional()
    }

    /// `r ∈ A → B`
    pub fn is_total_function(&self, a: &FiniteSet, b: &FiniteSet) -> bool {
        self.is_partial_function(a, b) && self.dom() == *a
    }

    /// `r ∈ A ↣ B`
    pub fn is_injective(&self, a: &FiniteSet, b: &FiniteSet) -> bool {
        self.is_total_function(a, b) && self.inverse().is_functional()
    }

    /// `r ∈ A ↠ B`
    pub fn is_surjective(&self, a: &FiniteSet, b: &FiniteSet) -> bool {
        self.is_total_function(a, b) && self.ran() == *b
    }

    /// `r ∈ A ⤖ B`
    pub fn is_bijection(&self, a: &FiniteSet, b: &FiniteSet) -> bool {
        self.is_injective(a, b) && self.ran() == *b
    }

    /// Function application `f(x)`.
    pub fn apply(&self, x: &Element) -> Result<&Element, RelError> {
        let mut row = self.row(x);
        let first = row
            .next()
            .ok_or_else(|| RelError::OutsideDomain(x.clone()))?;
        if row.next().is_some() {
            return Err(RelError::NotFunctionalAt(x.clone()));
        }
        Ok(first)
    }

    /// `f(x)` when `x ∈ dom(f)`, without the functionality check.
    pub fn lookup(&self, x: &Element) -> Option<&Element> {
        self.row(x).next()
    }
}

impl FromIterator<(Element, Element)> for FiniteRelation {
    fn from_iter<I: IntoIterator<Item = (Element, Element)>>(iter: I) -> Self {
        FiniteRelation::from_pairs(iter)
    }
}

impl fmt::Display for FiniteRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for FiniteRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: &str) -> Element {
        Element::atom(n)
    }

    fn n(v: u64) -> Element {
        Element::nat(v)
    }

    fn rel(pairs: &[(Element, Element)]) -> FiniteRelation {
        pairs.iter().cloned().collect()
    }

    fn set(items: &[Element]) -> FiniteSet {
        items.iter().cloned().collect()
    }

    #[test]
    fn image_examples() {
        let r = rel(&[(a("a"), n(1)), (a("a"), n(2)), (a("b"), n(3))]);
        assert_eq!(r.image(&set(&[a("a")])), set(&[n(1), n(2)]));
        assert!(r.image(&FiniteSet::empty()).is_empty());
        let r = rel(&[(a("a"), n(1))]);
        assert_eq!(r.image(&set(&[a("a"), a("b")])), set(&[n(1)]));
    }

    #[test]
    fn override_examples() {
        let r = rel(&[(a("a"), n(1)), (a("b"), n(2))]);
        let q = rel(&[(a("a"), n(3))]);
        assert_eq!(r.override_with(&q), rel(&[(a("a"), n(3)), (a("b"), n(2))]));
        assert_eq!(r.override_with(&FiniteRelation::empty()), r);
        assert_eq!(FiniteRelation::empty().override_with(&q), q);
    }

    #[test]
    fn restriction_examples() {
        let r = rel(&[(a("a"), n(1)), (a("b"), n(2))]);
        assert_eq!(r.dom_subtract(&set(&[a("a")])), rel(&[(a("b"), n(2))]));
        assert_eq!(r.ran_restrict(&set(&[n(1)])), rel(&[(a("a"), n(1))]));
        assert!(r.dom_restrict(&FiniteSet::empty()).is_empty());
        assert_eq!(r.ran_subtract(&set(&[n(1)])), rel(&[(a("b"), n(2))]));
    }

    #[test]
    fn compose_examples() {
        let q = rel(&[(a("a"), n(1))]);
        let r = rel(&[(n(1), a("z"))]);
        assert_eq!(q.compose(&r), rel(&[(a("a"), a("z"))]));
        assert!(q.compose(&FiniteRelation::empty()).is_empty());
    }

    #[test]
    fn identity_and_inverse() {
        assert!(FiniteRelation::identity(&FiniteSet::empty()).is_empty());
        assert_eq!(rel(&[(a("a"), n(1))]).inverse(), rel(&[(n(1), a("a"))]));
    }

    #[test]
    fn function_predicates() {
        let two = rel(&[(a("a"), n(1)), (a("a"), n(2))]);
        let any: FiniteSet = set(&[a("a"), n(1), n(2)]);
        assert!(!two.is_partial_function(&any, &any));

        let f = rel(&[(n(1), a("c1"))]);
        let one = super::super::NatSegment::new(1, 1).to_set();
        let b = set(&[a("c1")]);
        assert!(f.is_total_function(&one, &b));
        assert!(f.is_surjective(&one, &b));
        assert!(f.is_bijection(&one, &b));

        assert!(FiniteRelation::empty().is_total_function(&FiniteSet::empty(), &b));
    }

    #[test]
    fn apply_errors_carry_the_element() {
        let f = rel(&[(a("a"), n(1))]);
        assert_eq!(f.apply(&a("a")), Ok(&n(1)));
        assert_eq!(f.apply(&a("b")), Err(RelError::OutsideDomain(a("b"))));
        let g = rel(&[(a("a"), n(1)), (a("a"), n(2))]);
        assert_eq!(g.apply(&a("a")), Err(RelError::NotFunctionalAt(a("a"))));
    }

    #[test]
    fn row_scan_handles_nested_left_elements() {
        let left = Element::pair(a("x"), n(0));
        let r = rel(&[(left.clone(), n(5)), (a("x"), n(6))]);
        assert_eq!(r.image_of(&left), set(&[n(5)]));
        assert_eq!(r.image_of(&a("x")), set(&[n(6)]));
    }
}
