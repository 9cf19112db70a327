//! External behavior of a machine: dominoes, the windows seen around each
//! state, and decision procedures for behavioral inclusion.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::rc::Rc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::machine::{dot_quote, ExternalMode, StateId, StateMachine};
use crate::window::{DominoSet, ExternalAlphabet, Letter, Window};

/// The interval `[m - l, m - 1]` of a window of length `l` placed around the
/// current time: `l - m` past letters followed by `m` future letters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IntervalSpec {
    pub l: usize,
    pub m: usize,
}

impl IntervalSpec {
    pub fn new(l: usize, m: usize) -> Result<IntervalSpec> {
        if l == 0 {
            return Err(Error::InvalidSpec("window length must be at least 1".into()));
        }
        if m > l {
            return Err(Error::InvalidSpec(format!("future part {m} exceeds window length {l}")));
        }
        Ok(IntervalSpec { l, m })
    }

    pub fn past_len(&self) -> usize {
        self.l - self.m
    }
}

type PerState = Rc<Vec<BTreeSet<Window>>>;

/// Memoized past and future windows of every state of an accepted machine,
/// seen through one external alphabet.
pub struct Horizon<'a> {
    q: &'a StateMachine,
    alphabet: ExternalAlphabet,
    past: RefCell<HashMap<usize, PerState>>,
    future: RefCell<HashMap<usize, PerState>>,
}

impl<'a> Horizon<'a> {
    pub fn new(q: &'a StateMachine, mode: ExternalMode) -> Result<Horizon<'a>> {
        q.require_accepted()?;
        Ok(Horizon {
            q,
            alphabet: ExternalAlphabet::of(q, mode),
            past: RefCell::new(HashMap::new()),
            future: RefCell::new(HashMap::new()),
        })
    }

    pub fn machine(&self) -> &'a StateMachine {
        self.q
    }

    pub fn alphabet(&self) -> &ExternalAlphabet {
        &self.alphabet
    }

    pub fn mode(&self) -> ExternalMode {
        self.alphabet.mode
    }

    /// For each state, the last `k` letters emitted before some visit to it,
    /// padded with diamonds when the visit happens before time `k`.
    pub fn past(&self, k: usize) -> PerState {
        if let Some(p) = self.past.borrow().get(&k) {
            return p.clone();
        }
        let q = self.q;
        let mut sets = vec![BTreeSet::new(); q.num_states()];
        let mut queue = VecDeque::new();
        for &x in q.initial() {
            if sets[x].insert(Window::diamonds(k)) {
                queue.push_back((x, Window::diamonds(k)));
            }
        }
        while let Some((x, w)) = queue.pop_front() {
            for t in q.edges_from(x) {
                let next = w.shift(Letter::Sym(self.alphabet.project(t.input, t.output)));
                if sets[t.to].insert(next.clone()) {
                    queue.push_back((t.to, next));
                }
            }
        }
        let sets = Rc::new(sets);
        self.past.borrow_mut().insert(k, sets.clone());
        sets
    }

    /// For each state, the label sequences of all paths of length `k` from it.
    pub fn future(&self, k: usize) -> PerState {
        if let Some(f) = self.future.borrow().get(&k) {
            return f.clone();
        }
        let sets = if k == 0 {
            vec![BTreeSet::from([Window::empty()]); self.q.num_states()]
        } else {
            let shorter = self.future(k - 1);
            (0..self.q.num_states())
                .map(|x| {
                    let mut out = BTreeSet::new();
                    for t in self.q.edges_from(x) {
                        let head = Window::from_symbols(&[self.alphabet.project(t.input, t.output)]);
                        for tail in &shorter[t.to] {
                            out.insert(head.concat(tail));
                        }
                    }
                    out
                })
                .collect()
        };
        let sets = Rc::new(sets);
        self.future.borrow_mut().insert(k, sets.clone());
        sets
    }

    /// Windows over `[m - l, m - 1]` (or `[m - l, m]` when `extended`) seen
    /// at visits to `x`.
    pub fn external_strings(&self, x: StateId, spec: IntervalSpec, extended: bool) -> BTreeSet<Window> {
        let past = self.past(spec.past_len());
        let fut = self.future(spec.m + usize::from(extended));
        let mut out = BTreeSet::new();
        for p in &past[x] {
            for f in &fut[x] {
                out.insert(p.concat(f));
            }
        }
        out
    }

    /// All windows of length `n` that end at a time `k >= 0`.
    pub fn dominoes(&self, n: usize) -> DominoSet {
        assert!(n >= 1, "dominoes have positive length");
        let past = self.past(n - 1);
        let step = self.future(1);
        let mut windows = BTreeSet::new();
        for x in 0..self.q.num_states() {
            for p in &past[x] {
                for f in &step[x] {
                    windows.insert(p.concat(f));
                }
            }
        }
        DominoSet { length: n, windows }
    }
}

pub fn dominoes(q: &StateMachine, mode: ExternalMode, n: usize) -> Result<DominoSet> {
    if n == 0 {
        return Err(Error::InvalidSpec("dominoes have positive length".into()));
    }
    Ok(Horizon::new(q, mode)?.dominoes(n))
}

pub fn external_strings(
    q: &StateMachine,
    mode: ExternalMode,
    x: StateId,
    spec: IntervalSpec,
    extended: bool,
) -> Result<BTreeSet<Window>> {
    let h = Horizon::new(q, mode)?;
    if x >= q.num_states() {
        return Err(Error::UnknownState(format!("#{x}")));
    }
    Ok(h.external_strings(x, spec, extended))
}

/// Deterministic automaton over `W` accepting exactly the finite label
/// prefixes of a machine. Built by the subset construction; the empty subset
/// is the rejecting sink.
#[derive(Debug, Clone)]
pub struct PrefixAutomaton {
    pub alphabet: ExternalAlphabet,
    pub subsets: Vec<BTreeSet<StateId>>,
    pub delta: Vec<Vec<usize>>,
    pub initial: usize,
    pub sink: usize,
}

impl PrefixAutomaton {
    pub fn build(q: &StateMachine, mode: ExternalMode) -> PrefixAutomaton {
        let alphabet = ExternalAlphabet::of(q, mode);
        let mut index: BTreeMap<BTreeSet<StateId>, usize> = BTreeMap::new();
        let mut subsets = Vec::new();
        let mut delta: Vec<Vec<usize>> = Vec::new();
        let start: BTreeSet<StateId> = q.initial().iter().copied().collect();
        let mut intern = |s: BTreeSet<StateId>, subsets: &mut Vec<BTreeSet<StateId>>| -> (usize, bool) {
            if let Some(&i) = index.get(&s) {
                return (i, false);
            }
            let i = subsets.len();
            index.insert(s.clone(), i);
            subsets.push(s);
            (i, true)
        };
        let (initial, _) = intern(start, &mut subsets);
        let mut next = 0;
        while next < subsets.len() {
            let mut row = vec![BTreeSet::new(); alphabet.len()];
            for &x in &subsets[next] {
                for t in q.edges_from(x) {
                    row[alphabet.project(t.input, t.output) as usize].insert(t.to);
                }
            }
            let row: Vec<usize> = row.into_iter().map(|s| intern(s, &mut subsets).0).collect();
            delta.push(row);
            next += 1;
        }
        let (sink, fresh) = intern(BTreeSet::new(), &mut subsets);
        if fresh {
            delta.push(vec![sink; alphabet.len()]);
        }
        PrefixAutomaton {
            alphabet,
            subsets,
            delta,
            initial,
            sink,
        }
    }

    pub fn accepts(&self, word: &[u32]) -> bool {
        let mut s = self.initial;
        for &w in word {
            s = self.delta[s][w as usize];
        }
        s != self.sink
    }

    pub fn to_dot(&self, q: &StateMachine) -> String {
        let name = |i: usize| {
            let members: Vec<&str> = self.subsets[i].iter().map(|&x| q.state_name(x)).collect();
            format!("{{{}}}", members.join(","))
        };
        let mut out = String::from("digraph \"prefixes\" {\n  rankdir=LR;\n");
        for i in 0..self.subsets.len() {
            let shape = if i == self.initial { "doublecircle" } else { "circle" };
            out.push_str(&format!("  {} [shape={shape}];\n", dot_quote(&name(i))));
        }
        for (i, row) in self.delta.iter().enumerate() {
            for (w, &j) in row.iter().enumerate() {
                out.push_str(&format!(
                    "  {} -> {} [label={}];\n",
                    dot_quote(&name(i)),
                    dot_quote(&name(j)),
                    dot_quote(self.alphabet.name(w as u32))
                ));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Outcome of a behavioral inclusion check. The counterexample is a finite
/// label sequence of the left machine that the right machine cannot produce.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InclusionVerdict {
    pub included: bool,
    pub counterexample: Option<Vec<String>>,
}

/// Maps symbol ids of `a` onto symbol ids of `b` by name; the two label
/// spaces must coincide.
pub(crate) fn align_alphabets(a: &ExternalAlphabet, b: &ExternalAlphabet) -> Result<Vec<u32>> {
    if a.mode != b.mode || a.name_set() != b.name_set() {
        return Err(Error::IncompatibleAlphabets(format!(
            "{{{}}} vs {{{}}}",
            a.names().join(","),
            b.names().join(",")
        )));
    }
    a.names().iter().map(|n| b.lookup(n)).collect()
}

/// A concrete state paired with a state of the prefix automaton.
type Node = (StateId, usize);

/// Decides whether every infinite label sequence of `q1` is one of `q2`.
/// Both machines are live and finitely branching, so their behaviors are
/// closed and comparing finite prefixes is exact.
pub fn behavior_included(q1: &StateMachine, q2: &StateMachine, mode: ExternalMode) -> Result<InclusionVerdict> {
    q1.require_well_formed()?;
    q2.require_well_formed()?;
    let a1 = ExternalAlphabet::of(q1, mode);
    let dfa = PrefixAutomaton::build(q2, mode);
    let map = align_alphabets(&a1, &dfa.alphabet)?;

    // product node -> (predecessor node, symbol read), none for initial nodes
    let mut parent: HashMap<Node, Option<(Node, u32)>> = HashMap::new();
    let mut queue = VecDeque::new();
    for &x in q1.initial() {
        let node = (x, dfa.initial);
        if parent.insert(node, None).is_none() {
            queue.push_back(node);
        }
    }
    let trace = |mut node: Node, parent: &HashMap<Node, Option<(Node, u32)>>| {
        let mut word = Vec::new();
        while let Some(Some((prev, w))) = parent.get(&node) {
            word.push(*w);
            node = *prev;
        }
        word.reverse();
        word
    };
    while let Some(node @ (x, d)) = queue.pop_front() {
        for t in q1.edges_from(x) {
            let w = a1.project(t.input, t.output);
            let d2 = dfa.delta[d][map[w as usize] as usize];
            if d2 == dfa.sink {
                let mut word = trace(node, &parent);
                word.push(w);
                return Ok(InclusionVerdict {
                    included: false,
                    counterexample: Some(word.into_iter().map(|w| a1.name(w).to_string()).collect()),
                });
            }
            let next = (t.to, d2);
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(next) {
                e.insert(Some((node, w)));
                queue.push_back(next);
            }
        }
    }
    Ok(InclusionVerdict {
        included: true,
        counterexample: None,
    })
}

pub fn behavior_equal(q1: &StateMachine, q2: &StateMachine, mode: ExternalMode) -> Result<bool> {
    Ok(behavior_included(q1, q2, mode)?.included && behavior_included(q2, q1, mode)?.included)
}

/// Result of the domino saturation test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaturationVerdict {
    pub holds: bool,
    /// A window of length `l + 2` whose two overlapping sub-windows are
    /// dominoes but which is not itself a domino.
    pub witness: Option<Window>,
}

/// Checks that gluing any two overlapping dominoes of length `l + 1` yields a
/// domino of length `l + 2`.
pub fn saturation_check(q: &StateMachine, mode: ExternalMode, l: usize) -> Result<SaturationVerdict> {
    IntervalSpec::new(l, 0)?;
    let h = Horizon::new(q, mode)?;
    Ok(saturation_with(&h, l))
}

pub(crate) fn saturation_with(h: &Horizon<'_>, l: usize) -> SaturationVerdict {
    let short = h.dominoes(l + 1);
    let long = h.dominoes(l + 2);
    let all_diamonds = Window::diamonds(l + 1);
    let heads = std::iter::once(Letter::Diamond).chain((0..h.alphabet().len() as u32).map(Letter::Sym));
    let heads: Vec<Letter> = heads.collect();
    let mut candidates = BTreeSet::new();
    for tail in &short.windows {
        for &a in &heads {
            let Ok(zeta) = Window::new(std::iter::once(a).chain(tail.letters().iter().copied()).collect()) else {
                continue;
            };
            let front = zeta.slice(0, l + 1);
            if short.contains(&front) || front == all_diamonds {
                candidates.insert(zeta);
            }
        }
    }
    let witness = candidates.into_iter().find(|z| !long.contains(z));
    SaturationVerdict {
        holds: witness.is_none(),
        witness,
    }
}
