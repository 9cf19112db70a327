//! Quotient abstractions: partition refinement driven by admissible outputs
//! and successor sets, and the machine over sets of future output windows.

use std::collections::{BTreeMap, BTreeSet};

use crate::behavior::{Horizon, IntervalSpec};
use crate::error::{Error, Result};
use crate::machine::{ExternalMode, StateId, StateMachine, Transition};
use crate::salca::{AbstractKind, AbstractMachine, AbstractState, Verdict, Witness};
use crate::window::{ExternalAlphabet, Window};

/// A partition of the state set in canonical form: members of each cell
/// sorted, cells ordered by their least member.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    cells: Vec<Vec<StateId>>,
}

impl Partition {
    pub fn new(cells: Vec<Vec<StateId>>, num_states: usize) -> Result<Partition> {
        let mut seen = vec![false; num_states];
        for cell in &cells {
            if cell.is_empty() {
                return Err(Error::InvalidPartition("empty cell".into()));
            }
            for &x in cell {
                if x >= num_states {
                    return Err(Error::InvalidPartition(format!("state #{x} out of range")));
                }
                if std::mem::replace(&mut seen[x], true) {
                    return Err(Error::InvalidPartition(format!("state #{x} in two cells")));
                }
            }
        }
        if let Some(x) = seen.iter().position(|b| !b) {
            return Err(Error::InvalidPartition(format!("state #{x} in no cell")));
        }
        Ok(Partition::canonical(cells))
    }

    fn canonical(mut cells: Vec<Vec<StateId>>) -> Partition {
        for c in &mut cells {
            c.sort_unstable();
        }
        cells.sort_unstable_by_key(|c| c[0]);
        Partition { cells }
    }

    pub fn cells(&self) -> &[Vec<StateId>] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Index of the cell holding each state.
    pub fn cell_of(&self, num_states: usize) -> Vec<usize> {
        let mut out = vec![0; num_states];
        for (i, c) in self.cells.iter().enumerate() {
            for &x in c {
                out[x] = i;
            }
        }
        out
    }

    /// Every cell of `self` lies inside a cell of `coarser`.
    pub fn refines(&self, coarser: &Partition, num_states: usize) -> bool {
        let owner = coarser.cell_of(num_states);
        self.cells.iter().all(|c| c.iter().all(|&x| owner[x] == owner[c[0]]))
    }

    /// One cell per line, written `{x1,x5}`.
    pub fn render(&self, q: &StateMachine) -> String {
        let mut out = String::new();
        for c in &self.cells {
            let names: Vec<&str> = c.iter().map(|&x| q.state_name(x)).collect();
            out.push_str(&format!("{{{}}}\n", names.join(",")));
        }
        out
    }

    pub fn parse(text: &str, q: &StateMachine) -> Result<Partition> {
        let mut cells = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let inner = line
                .strip_prefix('{')
                .and_then(|l| l.strip_suffix('}'))
                .ok_or_else(|| Error::Parse(format!("expected a braced cell, got `{line}`")))?;
            let mut cell = Vec::new();
            for name in inner.split(',').map(str::trim).filter(|n| !n.is_empty()) {
                cell.push(q.state_id(name)?);
            }
            cells.push(cell);
        }
        Partition::new(cells, q.num_states())
    }
}

/// States grouped by their set of admissible outputs.
pub fn initial_partition(q: &StateMachine) -> Result<Partition> {
    q.require_accepted()?;
    let mut groups: BTreeMap<BTreeSet<usize>, Vec<StateId>> = BTreeMap::new();
    for x in 0..q.num_states() {
        groups.entry(q.h(x)).or_default().push(x);
    }
    Ok(Partition::canonical(groups.into_values().collect()))
}

/// States with at least one successor in `z`.
pub fn preimage(q: &StateMachine, z: &[StateId]) -> BTreeSet<StateId> {
    let target: BTreeSet<StateId> = z.iter().copied().collect();
    (0..q.num_states())
        .filter(|&x| q.edges_from(x).iter().any(|t| target.contains(&t.to)))
        .collect()
}

fn split(cells: Vec<Vec<StateId>>, by: &BTreeSet<StateId>) -> Vec<Vec<StateId>> {
    let mut out = Vec::with_capacity(cells.len());
    for c in cells {
        let (inside, outside): (Vec<_>, Vec<_>) = c.into_iter().partition(|x| by.contains(x));
        out.extend([inside, outside].into_iter().filter(|v| !v.is_empty()));
    }
    out
}

/// Splits every cell by the predecessors of every cell of `p`.
pub fn refine(q: &StateMachine, p: &Partition) -> Result<Partition> {
    let order: Vec<usize> = (0..p.len()).collect();
    refine_in_order(q, p, &order)
}

/// Like [`refine`], applying the splitters in the given order of `p`'s cells.
pub fn refine_in_order(q: &StateMachine, p: &Partition, order: &[usize]) -> Result<Partition> {
    q.require_accepted()?;
    Partition::new(p.cells.clone(), q.num_states())?;
    let mut cells = p.cells.clone();
    for &i in order {
        let z = p
            .cells
            .get(i)
            .ok_or_else(|| Error::InvalidPartition(format!("no cell #{i}")))?;
        cells = split(cells, &preimage(q, z));
    }
    Ok(Partition::canonical(cells))
}

/// Violation of stability: `cell` meets the predecessors of `target` but
/// also holds `state`, which has no successor in `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityWitness {
    pub cell: Vec<StateId>,
    pub target: Vec<StateId>,
    pub state: StateId,
}

/// A partition is a fixed point when every cell lies entirely inside or
/// entirely outside the predecessors of every cell.
pub fn is_fixed_point(q: &StateMachine, p: &Partition) -> Result<Option<StabilityWitness>> {
    q.require_accepted()?;
    Partition::new(p.cells.clone(), q.num_states())?;
    for z in &p.cells {
        for target in &p.cells {
            let pre = preimage(q, target);
            if z.iter().any(|x| pre.contains(x)) {
                if let Some(&state) = z.iter().find(|x| !pre.contains(x)) {
                    return Ok(Some(StabilityWitness {
                        cell: z.clone(),
                        target: target.clone(),
                        state,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// The `l`-th partition of the refinement chain.
pub fn partition_at(q: &StateMachine, l: usize) -> Result<Partition> {
    if l == 0 {
        return Err(Error::InvalidSpec("refinement levels start at 1".into()));
    }
    let mut p = initial_partition(q)?;
    for _ in 1..l {
        p = refine(q, &p)?;
    }
    Ok(p)
}

/// Refines until a fixed point or until `max_steps` partitions have been
/// produced. Returns the last partition, its level and whether it is stable.
pub fn refinement_fixpoint(q: &StateMachine, max_steps: usize) -> Result<(Partition, usize, bool)> {
    let mut p = initial_partition(q)?;
    let mut steps = 1;
    loop {
        let stable = is_fixed_point(q, &p)?.is_none();
        if stable || steps >= max_steps {
            return Ok((p, steps, stable));
        }
        p = refine(q, &p)?;
        steps += 1;
    }
}

/// Future output windows of length `l` for every state.
fn fibers(h: &Horizon<'_>, l: usize) -> Vec<BTreeSet<Window>> {
    let spec = IntervalSpec { l, m: l };
    (0..h.machine().num_states()).map(|x| h.external_strings(x, spec, false)).collect()
}

/// States grouped by equal sets of length-`l` future output windows.
pub fn future_partition(q: &StateMachine, l: usize) -> Result<Partition> {
    IntervalSpec::new(l, l)?;
    let h = Horizon::new(q, ExternalMode::Outputs)?;
    let mut groups: BTreeMap<BTreeSet<Window>, Vec<StateId>> = BTreeMap::new();
    for (x, f) in fibers(&h, l).into_iter().enumerate() {
        groups.entry(f).or_default().push(x);
    }
    Ok(Partition::canonical(groups.into_values().collect()))
}

/// The machine whose states are the distinct sets of length-`l` future
/// output windows, with one transition per concrete transition.
pub fn build_quotient_machine(q: &StateMachine, l: usize) -> Result<AbstractMachine> {
    IntervalSpec::new(l, l)?;
    let h = Horizon::new(q, ExternalMode::Outputs)?;
    Ok(quotient_with(&h, l))
}

pub(crate) fn quotient_with(h: &Horizon<'_>, l: usize) -> AbstractMachine {
    let q = h.machine();
    let alphabet: &ExternalAlphabet = h.alphabet();
    let fib = fibers(h, l);
    let cells: BTreeSet<&BTreeSet<Window>> = fib.iter().collect();
    let index: BTreeMap<&BTreeSet<Window>, usize> = cells.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let names = cells.iter().map(|c| alphabet.cell_name(c.iter())).collect();
    let initial = q.initial().iter().map(|&x| index[&fib[x]]).collect();
    let delta = q
        .transitions()
        .iter()
        .map(|t| Transition::new(index[&fib[t.from]], t.input, t.output, index[&fib[t.to]]))
        .collect();
    let machine = StateMachine::from_parts(names, q.inputs().to_vec(), q.outputs().to_vec(), initial, delta)
        .expect("cell names are valid state names")
        .with_external(Some(ExternalMode::Outputs));
    AbstractMachine {
        machine,
        labels: cells.into_iter().map(|c| AbstractState::Cell(c.clone())).collect(),
        kind: AbstractKind::Quotient { l },
        mode: ExternalMode::Outputs,
        source_digest: q.digest(),
    }
}

/// For every `(l + 1)`-domino and every quotient state containing its first
/// `l` letters, some state of that fiber continues into the whole domino.
/// The witness lists the domino followed by the members of the quotient state.
pub fn is_domino_consistent(q: &StateMachine, l: usize) -> Result<Verdict> {
    IntervalSpec::new(l, l)?;
    let h = Horizon::new(q, ExternalMode::Outputs)?;
    Ok(domino_consistent_with(&h, l))
}

pub(crate) fn domino_consistent_with(h: &Horizon<'_>, l: usize) -> Verdict {
    let fib = fibers(h, l);
    let longer = h.future(l + 1);
    let mut members: BTreeMap<&BTreeSet<Window>, Vec<StateId>> = BTreeMap::new();
    for (x, f) in fib.iter().enumerate() {
        members.entry(f).or_default().push(x);
    }
    for z in &h.dominoes(l + 1).windows {
        let head = z.slice(0, l);
        for (cell, xs) in &members {
            if cell.contains(&head) && !xs.iter().any(|&x| longer[x].contains(z)) {
                let mut windows = vec![z.clone()];
                windows.extend(cell.iter().cloned());
                return Verdict {
                    holds: false,
                    witness: Some(Witness { state: None, windows }),
                };
            }
        }
    }
    Verdict {
        holds: true,
        witness: None,
    }
}
