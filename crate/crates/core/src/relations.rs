//! Relations between the states of two machines: simulation checks, the
//! canonical relations linking a machine to its abstractions, and a small
//! relation algebra.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::behavior::{align_alphabets, Horizon, IntervalSpec};
use crate::error::{Error, Result};
use crate::machine::{ExternalMode, StateId, StateMachine, Transition};
use crate::qba::quotient_with;
use crate::salca::build_with;
use crate::window::{ExternalAlphabet, Window};

/// A set of state pairs tied to the digests of its two endpoint machines.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    pub left: String,
    pub right: String,
    pairs: BTreeSet<(StateId, StateId)>,
}

impl Relation {
    pub fn new<I>(left: &StateMachine, right: &StateMachine, pairs: I) -> Result<Relation>
    where
        I: IntoIterator<Item = (StateId, StateId)>,
    {
        let pairs: BTreeSet<_> = pairs.into_iter().collect();
        if let Some(&(a, b)) = pairs
            .iter()
            .find(|(a, b)| *a >= left.num_states() || *b >= right.num_states())
        {
            return Err(Error::MalformedRelation(format!("pair (#{a}, #{b}) out of range")));
        }
        Ok(Relation {
            left: left.digest(),
            right: right.digest(),
            pairs,
        })
    }

    pub fn from_names(left: &StateMachine, right: &StateMachine, pairs: &[(&str, &str)]) -> Result<Relation> {
        let mut out = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            let a = left
                .state_id(a)
                .map_err(|_| Error::MalformedRelation(format!("`{a}` is not a left state")))?;
            let b = right
                .state_id(b)
                .map_err(|_| Error::MalformedRelation(format!("`{b}` is not a right state")))?;
            out.push((a, b));
        }
        Relation::new(left, right, out)
    }

    pub fn pairs(&self) -> &BTreeSet<(StateId, StateId)> {
        &self.pairs
    }

    pub fn contains(&self, a: StateId, b: StateId) -> bool {
        self.pairs.contains(&(a, b))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn inverse(&self) -> Relation {
        Relation {
            left: self.right.clone(),
            right: self.left.clone(),
            pairs: self.pairs.iter().map(|&(a, b)| (b, a)).collect(),
        }
    }

    /// Pairs `(a, c)` with `(a, b)` in `self` and `(b, c)` in `next`.
    pub fn compose(&self, next: &Relation) -> Result<Relation> {
        if self.right != next.left {
            return Err(Error::DigestMismatch {
                expected: self.right.clone(),
                found: next.left.clone(),
            });
        }
        let mut by_left: BTreeMap<StateId, Vec<StateId>> = BTreeMap::new();
        for &(b, c) in &next.pairs {
            by_left.entry(b).or_default().push(c);
        }
        let pairs = self
            .pairs
            .iter()
            .flat_map(|&(a, b)| by_left.get(&b).into_iter().flatten().map(move |&c| (a, c)))
            .collect();
        Ok(Relation {
            left: self.left.clone(),
            right: next.right.clone(),
            pairs,
        })
    }

    /// Checks that the relation was built for exactly these two machines.
    pub fn check_endpoints(&self, left: &StateMachine, right: &StateMachine) -> Result<()> {
        for (want, q) in [(&self.left, left), (&self.right, right)] {
            let found = q.digest();
            if *want != found {
                return Err(Error::DigestMismatch {
                    expected: want.clone(),
                    found,
                });
            }
        }
        if let Some(&(a, b)) = self
            .pairs
            .iter()
            .find(|(a, b)| *a >= left.num_states() || *b >= right.num_states())
        {
            return Err(Error::MalformedRelation(format!("pair (#{a}, #{b}) out of range")));
        }
        Ok(())
    }

    /// One pair per line, written `left -> right`.
    pub fn render(&self, left: &StateMachine, right: &StateMachine) -> String {
        let mut out = String::new();
        for &(a, b) in &self.pairs {
            out.push_str(&format!("{} -> {}\n", left.state_name(a), right.state_name(b)));
        }
        out
    }

    pub fn parse(text: &str, left: &StateMachine, right: &StateMachine) -> Result<Relation> {
        let mut pairs = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (a, b) = line
                .split_once("->")
                .ok_or_else(|| Error::MalformedRelation(format!("expected `a -> b`, got `{line}`")))?;
            pairs.push((a.trim(), b.trim()));
        }
        Relation::from_names(left, right, &pairs)
    }
}

/// Which direction of a bisimulation check a failure belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimulationFailure {
    /// An initial state of the simulated side related to no initial state.
    UnrelatedInitial { direction: Direction, state: StateId },
    /// A move of the simulated side from `pair.0` that `pair.1` cannot match.
    UnmatchedMove {
        direction: Direction,
        pair: (StateId, StateId),
        transition: Transition,
    },
}

/// Result of checking a candidate relation, with every violation found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationVerdict {
    pub valid: bool,
    pub failures: Vec<SimulationFailure>,
}

impl SimulationVerdict {
    pub fn describe(&self, left: &StateMachine, right: &StateMachine) -> Vec<String> {
        self.failures
            .iter()
            .map(|f| {
                let (sim, other, dir) = match f {
                    SimulationFailure::UnrelatedInitial { direction, .. }
                    | SimulationFailure::UnmatchedMove { direction, .. } => match direction {
                        Direction::Forward => (left, right, "forward"),
                        Direction::Backward => (right, left, "backward"),
                    },
                };
                match f {
                    SimulationFailure::UnrelatedInitial { state, .. } => {
                        format!("{dir}: initial state {} is unrelated", sim.state_name(*state))
                    }
                    SimulationFailure::UnmatchedMove { pair, transition: t, .. } => format!(
                        "{dir}: ({}, {}) cannot match ({}, {}, {}, {})",
                        sim.state_name(pair.0),
                        other.state_name(pair.1),
                        sim.state_name(t.from),
                        sim.inputs()[t.input],
                        sim.outputs()[t.output],
                        sim.state_name(t.to)
                    ),
                }
            })
            .collect()
    }
}

/// Label-indexed successor lists of one machine over a shared alphabet.
struct Moves {
    by_state: Vec<BTreeMap<u32, Vec<StateId>>>,
}

impl Moves {
    fn new(q: &StateMachine, alphabet: &ExternalAlphabet, map: Option<&[u32]>) -> Moves {
        let by_state = (0..q.num_states())
            .map(|x| {
                q.moves_by_label(x, |u, y| {
                    let w = alphabet.project(u, y);
                    map.map_or(w, |m| m[w as usize])
                })
            })
            .collect();
        Moves { by_state }
    }
}

/// Both machines' moves keyed by the left machine's symbol ids.
fn shared_moves(q1: &StateMachine, q2: &StateMachine, mode: ExternalMode) -> Result<(Moves, Moves)> {
    let a1 = ExternalAlphabet::of(q1, mode);
    let a2 = ExternalAlphabet::of(q2, mode);
    let back = align_alphabets(&a2, &a1)?;
    Ok((Moves::new(q1, &a1, None), Moves::new(q2, &a2, Some(&back))))
}

fn check_direction(
    q1: &StateMachine,
    q2: &StateMachine,
    m2: &Moves,
    alphabet: &ExternalAlphabet,
    pairs: &BTreeSet<(StateId, StateId)>,
    direction: Direction,
    failures: &mut Vec<SimulationFailure>,
) {
    for &x in q1.initial() {
        if !q2.initial().iter().any(|&y| pairs.contains(&(x, y))) {
            failures.push(SimulationFailure::UnrelatedInitial { direction, state: x });
        }
    }
    for &(x, y) in pairs {
        for t in q1.edges_from(x) {
            let w = alphabet.project(t.input, t.output);
            let matched = m2.by_state[y]
                .get(&w)
                .is_some_and(|succ| succ.iter().any(|&y2| pairs.contains(&(t.to, y2))));
            if !matched {
                failures.push(SimulationFailure::UnmatchedMove {
                    direction,
                    pair: (x, y),
                    transition: *t,
                });
            }
        }
    }
}

/// Checks the relation as a simulation of `q1` by `q2` over `W`: initial
/// states are covered and every move of a related left state is matched by
/// an equally labelled move into a related pair. With `bisim` the inverse
/// relation is checked as well.
pub fn verify_simulation(
    q1: &StateMachine,
    q2: &StateMachine,
    mode: ExternalMode,
    r: &Relation,
    bisim: bool,
) -> Result<SimulationVerdict> {
    q1.require_well_formed()?;
    q2.require_well_formed()?;
    r.check_endpoints(q1, q2)?;
    let (_, m2) = shared_moves(q1, q2, mode)?;
    let a1 = ExternalAlphabet::of(q1, mode);
    let mut failures = Vec::new();
    check_direction(q1, q2, &m2, &a1, &r.pairs, Direction::Forward, &mut failures);
    if bisim {
        // the backward check runs in the right machine's own symbol ids
        let (_, m1) = shared_moves(q2, q1, mode)?;
        let a2 = ExternalAlphabet::of(q2, mode);
        check_direction(q2, q1, &m1, &a2, &r.inverse().pairs, Direction::Backward, &mut failures);
    }
    Ok(SimulationVerdict {
        valid: failures.is_empty(),
        failures,
    })
}

fn greatest_fixpoint(q1: &StateMachine, q2: &StateMachine, mode: ExternalMode, both_ways: bool) -> Result<Relation> {
    q1.require_well_formed()?;
    q2.require_well_formed()?;
    let (m1, m2) = shared_moves(q1, q2, mode)?;
    let n1 = q1.num_states();
    let n2 = q2.num_states();
    let mut rel = vec![vec![true; n2]; n1];
    let matched = |from: &Moves, to: &Moves, x: usize, y: usize, rel: &dyn Fn(usize, usize) -> bool| {
        from.by_state[x].iter().all(|(w, succ)| {
            succ.iter().all(|&x2| {
                to.by_state[y]
                    .get(w)
                    .is_some_and(|ys| ys.iter().any(|&y2| rel(x2, y2)))
            })
        })
    };
    loop {
        let mut changed = false;
        for x in 0..n1 {
            for y in 0..n2 {
                if !rel[x][y] {
                    continue;
                }
                let snapshot = &rel;
                let fwd = matched(&m1, &m2, x, y, &|a, b| snapshot[a][b]);
                let ok = fwd && (!both_ways || matched(&m2, &m1, y, x, &|b, a| snapshot[a][b]));
                if !ok {
                    rel[x][y] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let pairs = (0..n1).flat_map(|x| (0..n2).map(move |y| (x, y))).filter(|&(x, y)| rel[x][y]);
    Relation::new(q1, q2, pairs.collect::<Vec<_>>())
}

/// The largest relation whose pairs all satisfy the move-matching condition.
pub fn greatest_simulation(q1: &StateMachine, q2: &StateMachine, mode: ExternalMode) -> Result<Relation> {
    greatest_fixpoint(q1, q2, mode, false)
}

/// The largest relation matching moves in both directions.
pub fn greatest_bisimulation(q1: &StateMachine, q2: &StateMachine, mode: ExternalMode) -> Result<Relation> {
    greatest_fixpoint(q1, q2, mode, true)
}

/// `q2` simulates `q1` over `W`.
pub fn simulates(q1: &StateMachine, q2: &StateMachine, mode: ExternalMode) -> Result<bool> {
    let r = greatest_simulation(q1, q2, mode)?;
    Ok(verify_simulation(q1, q2, mode, &r, false)?.valid)
}

/// `q1` and `q2` are bisimilar over `W`.
pub fn bisimilar(q1: &StateMachine, q2: &StateMachine, mode: ExternalMode) -> Result<bool> {
    let r = greatest_bisimulation(q1, q2, mode)?;
    Ok(verify_simulation(q1, q2, mode, &r, true)?.valid)
}

/// The relations that link a machine to its abstractions and the
/// abstractions to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalKind {
    /// A state and every window seen at it, into the `(l, m)` abstraction.
    StateToAbstract,
    /// A window of length `l + 1` and its last `l` letters, from the
    /// `(l + 1, m)` abstraction into the `(l, m)` abstraction.
    LStep,
    /// Windows of the `(l, m + 1)` and `(l, m)` abstractions that are one step
    /// apart and seen at a common state.
    MStep,
    /// A state and its set of future output windows, into the quotient.
    StateToQuotient,
    /// A future window and every quotient state containing it.
    SalcaToQuotient,
    /// A future window and the quotient state consisting of it alone.
    Renaming,
}

/// A canonical relation together with the two machines it connects.
#[derive(Debug, Clone)]
pub struct CanonicalRelation {
    pub relation: Relation,
    pub left: StateMachine,
    pub right: StateMachine,
}

/// Builds a canonical relation. The quotient kinds always observe outputs
/// and ignore `mode`; `m` is ignored by them as well.
pub fn canonical_relation(
    kind: CanonicalKind,
    q: &StateMachine,
    mode: ExternalMode,
    l: usize,
    m: usize,
) -> Result<CanonicalRelation> {
    match kind {
        CanonicalKind::StateToAbstract => {
            let spec = IntervalSpec::new(l, m)?;
            let h = Horizon::new(q, mode)?;
            let am = build_with(&h, spec);
            let index = window_index(&am.labels);
            let mut pairs = Vec::new();
            for x in 0..q.num_states() {
                for w in h.external_strings(x, spec, false) {
                    if let Some(&i) = index.get(&w) {
                        pairs.push((x, i));
                    }
                }
            }
            finish(q.clone(), am.machine, pairs)
        }
        CanonicalKind::LStep => {
            let spec = IntervalSpec::new(l, m)?;
            let h = Horizon::new(q, mode)?;
            let big = build_with(&h, IntervalSpec::new(l + 1, m)?);
            let small = build_with(&h, spec);
            let index = window_index(&small.labels);
            let pairs = (0..big.machine.num_states())
                .filter_map(|a| {
                    let w = big.window(a)?;
                    index.get(&w.slice(1, l + 1)).map(|&b| (a, b))
                })
                .collect();
            finish(big.machine, small.machine, pairs)
        }
        CanonicalKind::MStep => {
            if m >= l {
                return Err(Error::InvalidSpec(format!("future part {m} leaves no room for a step at length {l}")));
            }
            let h = Horizon::new(q, mode)?;
            let (later, earlier) = (IntervalSpec::new(l, m + 1)?, IntervalSpec::new(l, m)?);
            let big = build_with(&h, later);
            let small = build_with(&h, earlier);
            let (bi, si) = (window_index(&big.labels), window_index(&small.labels));
            let mut pairs = BTreeSet::new();
            for x in 0..q.num_states() {
                let ea = h.external_strings(x, later, false);
                let eb = h.external_strings(x, earlier, false);
                for a in &ea {
                    for b in &eb {
                        if a.slice(0, l - 1) == b.slice(1, l) {
                            if let (Some(&i), Some(&j)) = (bi.get(a), si.get(b)) {
                                pairs.insert((i, j));
                            }
                        }
                    }
                }
            }
            finish(big.machine, small.machine, pairs.into_iter().collect())
        }
        CanonicalKind::StateToQuotient => {
            let spec = IntervalSpec::new(l, l)?;
            let h = Horizon::new(q, ExternalMode::Outputs)?;
            let qm = quotient_with(&h, l);
            let pairs = (0..q.num_states())
                .map(|x| {
                    let f = h.external_strings(x, spec, false);
                    let j = (0..qm.machine.num_states())
                        .find(|&j| qm.cell(j) == Some(&f))
                        .expect("every fiber is a quotient state");
                    (x, j)
                })
                .collect();
            finish(q.clone(), qm.machine, pairs)
        }
        CanonicalKind::SalcaToQuotient | CanonicalKind::Renaming => {
            let spec = IntervalSpec::new(l, l)?;
            let h = Horizon::new(q, ExternalMode::Outputs)?;
            let am = build_with(&h, spec);
            let qm = quotient_with(&h, l);
            let mut pairs = Vec::new();
            for a in 0..am.machine.num_states() {
                let w = am.window(a).expect("window state");
                for j in 0..qm.machine.num_states() {
                    let cell = qm.cell(j).expect("cell state");
                    let related = match kind {
                        CanonicalKind::Renaming => cell.len() == 1 && cell.contains(w),
                        _ => cell.contains(w),
                    };
                    if related {
                        pairs.push((a, j));
                    }
                }
            }
            finish(am.machine, qm.machine, pairs)
        }
    }
}

fn window_index(labels: &[crate::salca::AbstractState]) -> BTreeMap<Window, StateId> {
    labels
        .iter()
        .enumerate()
        .filter_map(|(i, s)| match s {
            crate::salca::AbstractState::Window(w) => Some((w.clone(), i)),
            crate::salca::AbstractState::Cell(_) => None,
        })
        .collect()
}

fn finish(left: StateMachine, right: StateMachine, pairs: Vec<(StateId, StateId)>) -> Result<CanonicalRelation> {
    let relation = Relation::new(&left, &right, pairs)?;
    Ok(CanonicalRelation { relation, left, right })
}

/// Whether an abstraction can stand in for the machine when synthesising
/// controllers that pick inputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ControlReport {
    /// Every related abstract state enables only inputs the concrete state enables.
    pub input_inclusion: bool,
    /// Every concrete state enables every input.
    pub free_input: bool,
    pub simulation_ok: bool,
    pub alternating_ok: bool,
    /// Related pairs that break input inclusion, by name.
    pub violations: Vec<(String, String)>,
}

pub fn control_compatibility(q: &StateMachine, qhat: &StateMachine, r: &Relation, mode: ExternalMode) -> Result<ControlReport> {
    q.require_accepted()?;
    qhat.require_well_formed()?;
    r.check_endpoints(q, qhat)?;
    let names = |m: &StateMachine, x: StateId| -> BTreeSet<String> {
        m.enabled(x).into_iter().map(|u| m.inputs()[u].clone()).collect()
    };
    let violations: Vec<(String, String)> = r
        .pairs
        .iter()
        .filter(|&&(x, xh)| !names(qhat, xh).is_subset(&names(q, x)))
        .map(|&(x, xh)| (q.state_name(x).to_string(), qhat.state_name(xh).to_string()))
        .collect();
    let free_input = (0..q.num_states()).all(|x| q.enabled(x).len() == q.inputs().len());
    let simulation_ok = verify_simulation(q, qhat, mode, r, false)?.valid;
    let input_inclusion = violations.is_empty();
    Ok(ControlReport {
        input_inclusion,
        free_input,
        simulation_ok,
        alternating_ok: simulation_ok && input_inclusion,
        violations,
    })
}
