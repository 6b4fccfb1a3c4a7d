//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use eventb_core::machine::{Binding, EventDescriptor, MachineDefinition, MachineState};
use eventb_core::relkernel::{Element, FiniteRelation, FiniteSet};
use eventb_core::whatsapp::ModelConfig;

pub mod relalg {
    use super::*;

    pub type Pairs = BTreeSet<(u8, u8)>;
    pub type Points = BTreeSet<u8>;

    /// Two relations and a set over the universe `0..n`.
    #[derive(Debug, Clone)]
    pub struct Case {
        pub n: u8,
        pub r: Pairs,
        pub q: Pairs,
        pub s: Points,
    }

    impl Case {
        /// Bit `i*n + j` of a mask selects the pair `(i, j)`. With
        /// `functional`, `r` keeps only the smallest image of each point.
        pub fn from_bits(n: u8, r: u64, q: u64, s: u8, functional: bool) -> Case {
            let n = n.clamp(1, 6);
            let pairs = |mask: u64| -> Pairs {
                universe(n)
                    .flat_map(|x| universe(n).map(move |y| (x, y)))
                    .filter(|&(x, y)| mask >> (x as u32 * n as u32 + y as u32) & 1 == 1)
                    .collect()
            };
            let mut r = pairs(r);
            if functional {
                let mut seen = Points::new();
                r.retain(|&(x, _)| seen.insert(x));
            }
            Case {
                n,
                r,
                q: pairs(q),
                s: universe(n).filter(|i| s >> i & 1 == 1).collect(),
            }
        }
    }

    pub fn universe(n: u8) -> impl Iterator<Item = u8> + Clone {
        0..n
    }

    pub fn el(x: u8) -> Element {
        Element::nat(x as u64)
    }

    pub fn rel(p: &Pairs) -> FiniteRelation {
        FiniteRelation::from_pairs(p.iter().map(|&(x, y)| (el(x), el(y))))
    }

    pub fn set(s: &Points) -> FiniteSet {
        s.iter().map(|&x| el(x)).collect()
    }

    fn grid(n: u8) -> impl Iterator<Item = (u8, u8)> {
        universe(n).flat_map(move |x| universe(n).map(move |y| (x, y)))
    }

    // Set-builder definitions, enumerated over the whole universe.

    pub fn forward(n: u8, q: &Pairs, r: &Pairs) -> Pairs {
        grid(n)
            .filter(|&(x, z)| universe(n).any(|y| q.contains(&(x, y)) && r.contains(&(y, z))))
            .collect()
    }

    pub fn id(n: u8, s: &Points) -> Pairs {
        grid(n).filter(|&(x, y)| s.contains(&x) && s.contains(&y) && x == y).collect()
    }

    pub fn dom_res(n: u8, s: &Points, r: &Pairs) -> Pairs {
        grid(n).filter(|p| r.contains(p) && s.contains(&p.0)).collect()
    }

    pub fn dom_sub(n: u8, s: &Points, r: &Pairs) -> Pairs {
        grid(n).filter(|p| r.contains(p) && !s.contains(&p.0)).collect()
    }

    pub fn ran_res(n: u8, r: &Pairs, s: &Points) -> Pairs {
        grid(n).filter(|p| r.contains(p) && s.contains(&p.1)).collect()
    }

    pub fn ran_sub(n: u8, r: &Pairs, s: &Points) -> Pairs {
        grid(n).filter(|p| r.contains(p) && !s.contains(&p.1)).collect()
    }

    pub fn image(n: u8, r: &Pairs, s: &Points) -> Points {
        universe(n)
            .filter(|&y| universe(n).any(|x| r.contains(&(x, y)) && s.contains(&x)))
            .collect()
    }

    pub fn overriding(n: u8, r: &Pairs, q: &Pairs) -> Pairs {
        grid(n)
            .filter(|&(x, y)| {
                q.contains(&(x, y)) || (r.contains(&(x, y)) && !universe(n).any(|z| q.contains(&(x, z))))
            })
            .collect()
    }

    pub fn inverse(n: u8, r: &Pairs) -> Pairs {
        grid(n).filter(|&(x, y)| r.contains(&(y, x))).collect()
    }

    pub fn dom(n: u8, r: &Pairs) -> Points {
        universe(n).filter(|&x| universe(n).any(|y| r.contains(&(x, y)))).collect()
    }

    pub fn ran(n: u8, r: &Pairs) -> Points {
        universe(n).filter(|&y| universe(n).any(|x| r.contains(&(x, y)))).collect()
    }

    pub fn is_relation(r: &Pairs, a: &Points, b: &Points) -> bool {
        r.iter().all(|(x, y)| a.contains(x) && b.contains(y))
    }

    pub fn is_partial_fn(n: u8, r: &Pairs, a: &Points, b: &Points) -> bool {
        is_relation(r, a, b)
            && universe(n).all(|x| {
                universe(n).all(|y| universe(n).all(|z| !(r.contains(&(x, y)) && r.contains(&(x, z))) || y == z))
            })
    }

    pub fn is_total_fn(n: u8, r: &Pairs, a: &Points, b: &Points) -> bool {
        is_partial_fn(n, r, a, b) && a.iter().all(|&x| universe(n).any(|y| r.contains(&(x, y))))
    }

    pub fn is_injection(n: u8, r: &Pairs, a: &Points, b: &Points) -> bool {
        is_total_fn(n, r, a, b)
            && grid(n).all(|(x, x2)| universe(n).all(|y| !(r.contains(&(x, y)) && r.contains(&(x2, y))) || x == x2))
    }

    pub fn is_surjection(n: u8, r: &Pairs, a: &Points, b: &Points) -> bool {
        is_total_fn(n, r, a, b) && b.iter().all(|&y| universe(n).any(|x| r.contains(&(x, y))))
    }

    fn check_eq<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
        if got == want {
            Ok(())
        } else {
            Err(format!("{what}: got {got:?}, want {want:?}"))
        }
    }

    /// Compares every operation against its definition and checks the
    /// short-form identities.
    pub fn check(c: &Case) -> Result<(), String> {
        let n = c.n;
        let (r, q, s) = (rel(&c.r), rel(&c.q), set(&c.s));
        let all: Points = universe(n).collect();
        let u = set(&all);

        check_eq("forward composition", r.compose(&q), rel(&forward(n, &c.r, &c.q)))?;
        check_eq("identity", FiniteRelation::identity(&s), rel(&id(n, &c.s)))?;
        check_eq("domain restriction", r.dom_restrict(&s), rel(&dom_res(n, &c.s, &c.r)))?;
        check_eq("domain subtraction", r.dom_subtract(&s), rel(&dom_sub(n, &c.s, &c.r)))?;
        check_eq("range restriction", r.ran_restrict(&s), rel(&ran_res(n, &c.r, &c.s)))?;
        check_eq("range subtraction", r.ran_subtract(&s), rel(&ran_sub(n, &c.r, &c.s)))?;
        check_eq("image", r.image(&s), set(&image(n, &c.r, &c.s)))?;
        check_eq("overriding", r.override_with(&q), rel(&overriding(n, &c.r, &c.q)))?;
        check_eq("inverse", r.inverse(), rel(&inverse(n, &c.r)))?;
        check_eq("dom", r.dom(), set(&dom(n, &c.r)))?;
        check_eq("ran", r.ran(), set(&ran(n, &c.r)))?;
        check_eq("union", r.union(&q), rel(&c.r.union(&c.q).copied().collect()))?;
        check_eq("intersection", r.inter(&q), rel(&c.r.intersection(&c.q).copied().collect()))?;
        check_eq("difference", r.diff(&q), rel(&c.r.difference(&c.q).copied().collect()))?;
        check_eq("subset", r.is_subset(&q), c.r.is_subset(&c.q))?;
        let cross: Pairs = c.s.iter().flat_map(|&x| all.iter().map(move |&y| (x, y))).collect();
        check_eq("cartesian product", s.cross(&u), rel(&cross))?;
        for x in universe(n) {
            let images: Vec<u8> = universe(n).filter(|&y| c.r.contains(&(x, y))).collect();
            let want = match images.as_slice() {
                [y] => Some(el(*y)),
                _ => None,
            };
            check_eq("application", r.apply(&el(x)).ok().cloned(), want)?;
        }
        for (a, b) in [(&all, &all), (&c.s, &all), (&all, &c.s), (&c.s, &c.s)] {
            let (sa, sb) = (set(a), set(b));
            check_eq("relation", r.is_relation(&sa, &sb), is_relation(&c.r, a, b))?;
            check_eq("partial function", r.is_partial_function(&sa, &sb), is_partial_fn(n, &c.r, a, b))?;
            check_eq("total function", r.is_total_function(&sa, &sb), is_total_fn(n, &c.r, a, b))?;
            check_eq("injection", r.is_injective(&sa, &sb), is_injection(n, &c.r, a, b))?;
            check_eq("surjection", r.is_surjective(&sa, &sb), is_surjection(n, &c.r, a, b))?;
            check_eq(
                "bijection",
                r.is_bijection(&sa, &sb),
                is_injection(n, &c.r, a, b) && is_surjection(n, &c.r, a, b),
            )?;
        }
        let subsets: BTreeSet<Points> = (0u32..1 << c.s.len())
            .map(|m| c.s.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, &x)| x).collect::<Points>())
            .filter(|p| (1..=2).contains(&p.len()))
            .collect();
        let got: BTreeSet<FiniteSet> = s.subsets(1, 2).into_iter().collect();
        check_eq("subsets", got, subsets.iter().map(set).collect())?;

        let id_s = FiniteRelation::identity(&s);
        check_eq("short form s◁r = id(s);r", r.dom_restrict(&s), id_s.compose(&r))?;
        check_eq("short form s⩤r = (dom(r)∖s)◁r", r.dom_subtract(&s), r.dom_restrict(&r.dom().diff(&s)))?;
        check_eq("short form r▷s = r;id(s)", r.ran_restrict(&s), r.compose(&id_s))?;
        check_eq("short form r⩥s = r▷(ran(r)∖s)", r.ran_subtract(&s), r.ran_restrict(&r.ran().diff(&s)))?;
        check_eq("short form r[s] = ran(s◁r)", r.image(&s), r.dom_restrict(&s).ran())?;
        check_eq(
            "short form r⊕q = q ∪ (dom(q)⩤r)",
            r.override_with(&q),
            q.union(&r.dom_subtract(&q.dom())),
        )?;
        Ok(())
    }
}

/// The typed domain of a whatsapp event parameter, ignoring the state:
/// users and contents range over the whole pool, recipient sets over every
/// pool subset of size `1..=subset_cap`, indices over `1..=max_index`.
pub fn typed_domain(cfg: &ModelConfig, param: &str, max_index: u64) -> Vec<Element> {
    match param {
        "u" | "u1" | "u2" => cfg.user_pool().iter().cloned().collect(),
        "c" => cfg.content_pool().iter().cloned().collect(),
        "us" => cfg
            .user_pool()
            .subsets(1, cfg.subset_cap)
            .into_iter()
            .map(Element::from)
            .collect(),
        "k" | "k1" | "k2" | "i" => (1..=max_index).map(Element::nat).collect(),
        other => panic!("no typed domain for parameter `{other}`"),
    }
}

/// Every binding in the full typed parameter product under which the guard holds.
pub fn brute_enabled<S: MachineState>(
    cfg: &ModelConfig,
    e: &EventDescriptor<S>,
    s: &S,
    max_index: u64,
) -> Vec<Binding> {
    let mut bindings = vec![Binding::new()];
    for name in e.param_names() {
        let dom = typed_domain(cfg, name, max_index);
        bindings = bindings
            .into_iter()
            .flat_map(|b| dom.iter().map(move |v| b.clone().with(name, v.clone())))
            .collect();
    }
    bindings.into_iter().filter(|b| e.holds(s, b)).collect()
}

/// Breadth-first enumeration of every state within `depth` steps using the
/// brute-force enabled sets, with each state's first depth.
pub fn brute_reachable<S: MachineState>(
    cfg: &ModelConfig,
    m: &MachineDefinition<S>,
    depth: usize,
    max_index: u64,
) -> HashMap<S, usize> {
    let mut seen = HashMap::new();
    let mut queue = VecDeque::new();
    let init = m.initial_state();
    seen.insert(init.clone(), 0);
    queue.push_back((init, 0));
    while let Some((s, d)) = queue.pop_front() {
        if d == depth {
            continue;
        }
        for e in m.events() {
            for b in brute_enabled(cfg, e, &s, max_index) {
                let next = e.apply_unguarded(&s, &b);
                if !seen.contains_key(&next) {
                    seen.insert(next.clone(), d + 1);
                    queue.push_back((next, d + 1));
                }
            }
        }
    }
    seen
}

/// Length of the shortest violating trace within `depth`, by brute force.
pub fn brute_shortest_violation<S: MachineState>(
    cfg: &ModelConfig,
    m: &MachineDefinition<S>,
    depth: usize,
    max_index: u64,
) -> Option<usize> {
    brute_reachable(cfg, m, depth, max_index)
        .into_iter()
        .filter(|(s, _)| !m.check_invariants(s).is_empty())
        .map(|(_, d)| d)
        .min()
}

pub fn states_of<S: MachineState>(pairs: &[(S, usize)]) -> HashSet<S> {
    pairs.iter().map(|(s, _)| s.clone()).collect()
}

/// Sends `picks.len()` messages between A and B on the refined machine
/// and checks that both members read them back in send order.
///
/// `picks[i] = (content choice, sender is B)`. The first message always
/// goes from A; each later one uses `chatting_refined` with indices left
/// to the scheduler. Content choices index into the unsent pool.
pub fn send_and_read(picks: &[(usize, bool)]) -> Result<Vec<Element>, String> {
    use eventb_core::machine::TraceStep;
    use eventb_core::scenario::Scenario;
    use eventb_core::whatsapp::{machine2, read_chat};

    let cfg = ModelConfig::with_pools(2, picks.len().max(1));
    let m = machine2(&cfg);
    let mut pool: Vec<Element> = cfg.content_pool().iter().cloned().collect();
    let mut script = vec!["add_user A".to_string(), "add_user B".into(), "create_chat_session A B".into()];
    let mut sent = Vec::new();
    for (i, &(pick, from_b)) in picks.iter().enumerate() {
        let c = pool.remove(pick % pool.len());
        let (u1, u2) = if from_b && i > 0 { ("B", "A") } else { ("A", "B") };
        if i == 0 {
            script.push(format!("chatting_first_time A B {c}"));
            script.push("select_chat B A".into());
        } else {
            script.push(format!("chatting_refined {u1} {u2} {c}"));
        }
        sent.push(c);
    }
    let sc = Scenario::parse(&script.join("\n")).map_err(|e| e.to_string())?;
    let mut s = m.initial_state();
    for st in &sc.steps {
        let ev = m.find_event(&st.event).ok_or("unknown event")?;
        let TraceStep { event, binding } = st.bind(ev, &s)?;
        s = m.step(&s, &event, &binding).map_err(|e| e.to_string())?;
    }
    let (a, b) = (Element::atom("A"), Element::atom("B"));
    for (x, y) in [(&a, &b), (&b, &a)] {
        let got = read_chat(&s, x, y).map_err(|e| e.to_string())?;
        if got != sent {
            return Err(format!("{x}'s view {got:?} differs from send order {sent:?}"));
        }
    }
    Ok(sent)
}
