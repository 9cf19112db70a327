//! Abstractions whose states are windows of external letters around the
//! current time, and the completeness predicates that relate them to the
//! original machine.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::behavior::{behavior_equal, Horizon, IntervalSpec};
use crate::error::Result;
use crate::machine::{ExternalMode, StateId, StateMachine, Transition};
use crate::window::{ExternalAlphabet, Letter, Window};

/// What a state of an abstraction stands for.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum AbstractState {
    Window(Window),
    Cell(BTreeSet<Window>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AbstractKind {
    Window { l: usize, m: usize },
    Quotient { l: usize },
    Dominoes { l: usize },
}

/// An abstraction together with the meaning of each of its states and the
/// digest of the machine it was built from.
#[derive(Debug, Clone)]
pub struct AbstractMachine {
    pub machine: StateMachine,
    pub labels: Vec<AbstractState>,
    pub kind: AbstractKind,
    pub mode: ExternalMode,
    pub source_digest: String,
}

impl AbstractMachine {
    /// Index of the state standing for window `w`, if present.
    pub fn window_state(&self, w: &Window) -> Option<StateId> {
        self.labels.iter().position(|s| matches!(s, AbstractState::Window(v) if v == w))
    }

    pub fn window(&self, x: StateId) -> Option<&Window> {
        match &self.labels[x] {
            AbstractState::Window(w) => Some(w),
            AbstractState::Cell(_) => None,
        }
    }

    pub fn cell(&self, x: StateId) -> Option<&BTreeSet<Window>> {
        match &self.labels[x] {
            AbstractState::Cell(c) => Some(c),
            AbstractState::Window(_) => None,
        }
    }
}

/// The two overlap conditions a transition between windows must satisfy:
/// the past part of the target is the past part of the source shifted by
/// `w`, and the future part of the source starts with `w` followed by the
/// future part of the target minus its last letter.
pub fn windows_overlap(src: &Window, w: u32, dst: &Window, spec: IntervalSpec) -> bool {
    let IntervalSpec { l, m } = spec;
    let p = l - m;
    let past_ok = src.slice(0, p).push(Letter::Sym(w)).slice(1, p + 1) == dst.slice(0, p);
    let future_ok = m == 0 || {
        let shifted = Window::from_symbols(&[w]).concat(&dst.slice(p, l - 1));
        src.slice(p, l) == shifted.slice(0, m)
    };
    past_ok && future_ok
}

/// Assembles a machine over window states from its reachable part.
fn assemble(
    q: &StateMachine,
    alphabet: &ExternalAlphabet,
    initial: BTreeSet<Window>,
    edges: BTreeSet<(Window, usize, usize, Window)>,
) -> (StateMachine, Vec<AbstractState>) {
    let mut adj: BTreeMap<&Window, Vec<&Window>> = BTreeMap::new();
    for (a, _, _, b) in &edges {
        adj.entry(a).or_default().push(b);
    }
    let mut seen: BTreeSet<&Window> = initial.iter().collect();
    let mut queue: VecDeque<&Window> = initial.iter().collect();
    while let Some(w) = queue.pop_front() {
        for &next in adj.get(w).into_iter().flatten() {
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    let order: Vec<Window> = seen.into_iter().cloned().collect();
    let index: BTreeMap<&Window, usize> = order.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let delta = edges
        .iter()
        .filter(|(a, ..)| index.contains_key(a))
        .map(|(a, u, y, b)| Transition::new(index[a], *u, *y, index[b]))
        .collect();
    let names = order.iter().map(|w| alphabet.window_name(w)).collect();
    let init = initial.iter().map(|w| index[w]).collect();
    let machine = StateMachine::from_parts(names, q.inputs().to_vec(), q.outputs().to_vec(), init, delta)
        .expect("window names are valid state names")
        .with_external(Some(alphabet.mode));
    (machine, order.into_iter().map(AbstractState::Window).collect())
}

/// Builds the abstraction whose states are the windows over `[m - l, m - 1]`.
/// Its initial states are the windows seen at time zero from an initial
/// state; a transition joins two windows when they overlap consistently with
/// its label and a concrete transition connects states carrying them.
pub fn build_abstract_machine(q: &StateMachine, mode: ExternalMode, spec: IntervalSpec) -> Result<AbstractMachine> {
    let h = Horizon::new(q, mode)?;
    Ok(build_with(&h, spec))
}

pub fn build_with(h: &Horizon<'_>, spec: IntervalSpec) -> AbstractMachine {
    let q = h.machine();
    let alphabet = h.alphabet();
    let IntervalSpec { l, m } = spec;
    let e: Vec<BTreeSet<Window>> = (0..q.num_states()).map(|x| h.external_strings(x, spec, false)).collect();

    let fut = h.future(m);
    let lead = Window::diamonds(l - m);
    let initial: BTreeSet<Window> = q
        .initial()
        .iter()
        .flat_map(|&x| fut[x].iter().map(|f| lead.concat(f)))
        .collect();

    // windows of each state keyed by their first l - 1 letters
    let by_prefix: Vec<BTreeMap<Window, Vec<&Window>>> = e
        .iter()
        .map(|set| {
            let mut map: BTreeMap<Window, Vec<&Window>> = BTreeMap::new();
            for w in set {
                map.entry(w.slice(0, l - 1)).or_default().push(w);
            }
            map
        })
        .collect();

    let mut edges = BTreeSet::new();
    for t in q.transitions() {
        let w = alphabet.project(t.input, t.output);
        for src in &e[t.from] {
            if m > 0 && src.at(l - m) != Letter::Sym(w) {
                continue;
            }
            let Some(cands) = by_prefix[t.to].get(&src.slice(1, l)) else {
                continue;
            };
            for &dst in cands {
                if windows_overlap(src, w, dst, spec) {
                    edges.insert((src.clone(), t.input, t.output, dst.clone()));
                }
            }
        }
    }
    let (machine, labels) = assemble(q, alphabet, initial, edges);
    AbstractMachine {
        machine,
        labels,
        kind: AbstractKind::Window { l, m },
        mode: alphabet.mode,
        source_digest: q.digest(),
    }
}

/// The machine read off the dominoes alone: states are `l`-windows, the
/// all-diamond window is initial, and every `(l + 1)`-domino is a transition
/// from its first `l` letters to its last `l` letters.
pub fn domino_realization(q: &StateMachine, l: usize) -> Result<AbstractMachine> {
    IntervalSpec::new(l, 0)?;
    let h = Horizon::new(q, ExternalMode::InputOutput)?;
    let alphabet = h.alphabet();
    let mut edges = BTreeSet::new();
    for z in &h.dominoes(l + 1).windows {
        let Letter::Sym(w) = z.at(l) else { unreachable!("dominoes end in a symbol") };
        let (u, y) = alphabet.unpair(w);
        edges.insert((z.slice(0, l), u, y, z.slice(1, l + 1)));
    }
    let (machine, labels) = assemble(q, alphabet, BTreeSet::from([Window::diamonds(l)]), edges);
    Ok(AbstractMachine {
        machine,
        labels,
        kind: AbstractKind::Dominoes { l },
        mode: ExternalMode::InputOutput,
        source_digest: q.digest(),
    })
}

/// The abstraction's transitions with labels projected onto `W`.
pub fn projected_triples(am: &AbstractMachine) -> BTreeSet<(Window, u32, Window)> {
    let alphabet = ExternalAlphabet::of(&am.machine, am.mode);
    am.machine
        .transitions()
        .iter()
        .map(|t| {
            (
                am.window(t.from).expect("window state").clone(),
                alphabet.project(t.input, t.output),
                am.window(t.to).expect("window state").clone(),
            )
        })
        .collect()
}

/// Triples `(first l letters, letter at position l - m, last l letters)` of
/// the `(l + 1)`-dominoes whose two halves are states of the abstraction.
pub fn domino_triples(h: &Horizon<'_>, spec: IntervalSpec, states: &BTreeSet<Window>) -> BTreeSet<(Window, u32, Window)> {
    let IntervalSpec { l, m } = spec;
    h.dominoes(l + 1)
        .windows
        .iter()
        .filter_map(|z| {
            let (a, b) = (z.slice(0, l), z.slice(1, l + 1));
            let Letter::Sym(w) = z.at(l - m) else { return None };
            (states.contains(&a) && states.contains(&b)).then_some((a, w, b))
        })
        .collect()
}

/// A predicate outcome with the first violation found in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub state: Option<StateId>,
    pub windows: Vec<Window>,
}

impl Verdict {
    fn from_witness(witness: Option<Witness>) -> Verdict {
        Verdict {
            holds: witness.is_none(),
            witness,
        }
    }

    /// Human-readable witness: optional state name followed by windows.
    pub fn describe(&self, q: &StateMachine, alphabet: &ExternalAlphabet) -> Option<String> {
        let w = self.witness.as_ref()?;
        let wins: Vec<String> = w.windows.iter().map(|z| alphabet.window_name(z)).collect();
        Some(match w.state {
            Some(x) => format!("{}: {}", q.state_name(x), wins.join(", ")),
            None => wins.join(", "),
        })
    }
}

/// Every state sees a single future of length `m`.
pub fn is_future_unique(h: &Horizon<'_>, spec: IntervalSpec) -> Verdict {
    let p = spec.past_len();
    for x in 0..h.machine().num_states() {
        let e = h.external_strings(x, spec, false);
        let mut iter = e.iter();
        if let Some(first) = iter.next() {
            let head = first.slice(p, spec.l);
            if let Some(other) = iter.find(|z| z.slice(p, spec.l) != head) {
                return Verdict::from_witness(Some(Witness {
                    state: Some(x),
                    windows: vec![first.clone(), other.clone()],
                }));
            }
        }
    }
    Verdict::from_witness(None)
}

/// Every `(l + 1)`-domino whose first `l` letters are seen at a state is
/// also seen there one step further.
pub fn is_sbalc(h: &Horizon<'_>, spec: IntervalSpec) -> Verdict {
    let dom = h.dominoes(spec.l + 1);
    for x in 0..h.machine().num_states() {
        let e = h.external_strings(x, spec, false);
        let ext = h.external_strings(x, spec, true);
        for z in &dom.windows {
            if e.contains(&z.slice(0, spec.l)) && !ext.contains(z) {
                return Verdict::from_witness(Some(Witness {
                    state: Some(x),
                    windows: vec![z.clone()],
                }));
            }
        }
    }
    Verdict::from_witness(None)
}

/// Any two `(l + 1)`-dominoes that agree on their first `l` letters are equal.
pub fn dominoes_determined_by_prefix(h: &Horizon<'_>, l: usize) -> Verdict {
    let dom = h.dominoes(l + 1);
    let mut seen: BTreeMap<Window, &Window> = BTreeMap::new();
    for z in &dom.windows {
        if let Some(prev) = seen.insert(z.slice(0, l), z) {
            return Verdict::from_witness(Some(Witness {
                state: None,
                windows: vec![prev.clone(), z.clone()],
            }));
        }
    }
    Verdict::from_witness(None)
}

/// Checks [`dominoes_determined_by_prefix`] for an interval with room for
/// one more future letter.
pub fn joint_fu_sbalc(q: &StateMachine, mode: ExternalMode, spec: IntervalSpec) -> Result<Verdict> {
    if spec.m >= spec.l {
        return Err(crate::error::Error::InvalidSpec(format!(
            "future part {} leaves no room for a step at length {}",
            spec.m, spec.l
        )));
    }
    Ok(dominoes_determined_by_prefix(&Horizon::new(q, mode)?, spec.l))
}

/// The machine and its past-only abstraction of length `l` have equal behavior.
pub fn is_async_l_complete(q: &StateMachine, mode: ExternalMode, l: usize) -> Result<bool> {
    let am = build_abstract_machine(q, mode, IntervalSpec::new(l, 0)?)?;
    behavior_equal(q, &am.machine, mode)
}

pub fn future_unique(q: &StateMachine, mode: ExternalMode, spec: IntervalSpec) -> Result<Verdict> {
    Ok(is_future_unique(&Horizon::new(q, mode)?, spec))
}

pub fn sbalc(q: &StateMachine, mode: ExternalMode, spec: IntervalSpec) -> Result<Verdict> {
    Ok(is_sbalc(&Horizon::new(q, mode)?, spec))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_conditions() {
        let spec = IntervalSpec::new(2, 1).unwrap();
        // past a, future b; emitting b leads to past b, future c
        let src = Window::from_symbols(&[0, 1]);
        let dst = Window::from_symbols(&[1, 2]);
        assert!(windows_overlap(&src, 1, &dst, spec));
        assert!(!windows_overlap(&src, 2, &dst, spec));
        let spec0 = IntervalSpec::new(2, 0).unwrap();
        assert!(windows_overlap(&src, 2, &dst, spec0));
        assert!(!windows_overlap(&src, 1, &dst, spec0));
    }

    #[test]
    fn single_loop_has_one_window_per_spec() {
        let q = StateMachine::from_names(&["s"], &["u"], &["y"], &["s"], &[["s", "u", "y", "s"]]).unwrap();
        for l in 1..=3 {
            let am = build_abstract_machine(&q, ExternalMode::Outputs, IntervalSpec::new(l, l).unwrap()).unwrap();
            assert_eq!(am.machine.num_states(), 1);
            let am0 = build_abstract_machine(&q, ExternalMode::Outputs, IntervalSpec::new(l, 0).unwrap()).unwrap();
            assert_eq!(am0.machine.num_states(), l + 1);
        }
    }
}
