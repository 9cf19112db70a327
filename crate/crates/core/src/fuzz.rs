//! Seeded random machines and the law suite that cross-checks every
//! construction against the independent predicates, with shrinking of
//! failing machines.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::behavior::{behavior_equal, behavior_included, saturation_with, Horizon, IntervalSpec};
use crate::machine::{ExternalMode, StateMachine, Transition};
use crate::qba::{
    domino_consistent_with, future_partition, initial_partition, is_fixed_point, partition_at, preimage, quotient_with,
    refine, refine_in_order, refinement_fixpoint,
};
use crate::relations::{bisimilar, canonical_relation, simulates, verify_simulation, CanonicalKind};
use crate::salca::{
    build_with, domino_realization, domino_triples, dominoes_determined_by_prefix, is_future_unique, is_sbalc,
    projected_triples, AbstractMachine,
};
use crate::window::{Letter, Window};

/// Parameters of the random machine generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FuzzConfig {
    pub seed: u64,
    pub max_states: usize,
    pub max_inputs: usize,
    pub max_outputs: usize,
    pub count: usize,
    /// Largest window length the laws are checked for.
    pub max_l: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            seed: 42,
            max_states: 6,
            max_inputs: 3,
            max_outputs: 3,
            count: 100,
            max_l: 3,
        }
    }
}

impl FuzzConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let bad = |what: &str| Err(crate::Error::InvalidSpec(what.to_string()));
        if !(1..=8).contains(&self.max_states) {
            return bad("max_states must be between 1 and 8");
        }
        if !(1..=4).contains(&self.max_inputs) || !(1..=4).contains(&self.max_outputs) {
            return bad("max_inputs and max_outputs must be between 1 and 4");
        }
        if !(1..=3).contains(&self.max_l) {
            return bad("max_l must be between 1 and 3");
        }
        Ok(())
    }
}

/// A machine in separable form: admissible outputs per state and
/// post-states per state and input. The transition relation is their product.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Separable {
    n: usize,
    inputs: usize,
    outputs: usize,
    initial: BTreeSet<usize>,
    h: Vec<BTreeSet<usize>>,
    f: Vec<Vec<BTreeSet<usize>>>,
}

impl Separable {
    fn from_machine(q: &StateMachine) -> Separable {
        let n = q.num_states();
        let inputs = q.inputs().len();
        Separable {
            n,
            inputs,
            outputs: q.outputs().len(),
            initial: q.initial().iter().copied().collect(),
            h: (0..n).map(|x| q.h(x)).collect(),
            f: (0..n).map(|x| (0..inputs).map(|u| q.post(x, u)).collect()).collect(),
        }
    }

    fn to_machine(&self) -> StateMachine {
        let mut delta = Vec::new();
        for x in 0..self.n {
            for (u, post) in self.f[x].iter().enumerate() {
                for &x2 in post {
                    for &y in &self.h[x] {
                        delta.push(Transition::new(x, u, y, x2));
                    }
                }
            }
        }
        StateMachine::from_parts(
            (0..self.n).map(|i| format!("x{i}")).collect(),
            (0..self.inputs).map(|i| format!("u{i}")).collect(),
            (0..self.outputs).map(|i| format!("y{i}")).collect(),
            self.initial.iter().copied().collect(),
            delta,
        )
        .expect("generated names are valid")
    }

    fn without_state(&self, gone: usize) -> Separable {
        let map = |x: usize| if x > gone { x - 1 } else { x };
        let keep = |set: &BTreeSet<usize>| set.iter().filter(|&&x| x != gone).map(|&x| map(x)).collect();
        Separable {
            n: self.n - 1,
            inputs: self.inputs,
            outputs: self.outputs,
            initial: keep(&self.initial),
            h: (0..self.n).filter(|&x| x != gone).map(|x| self.h[x].clone()).collect(),
            f: (0..self.n)
                .filter(|&x| x != gone)
                .map(|x| self.f[x].iter().map(keep).collect())
                .collect(),
        }
    }
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize, p: f64, nonempty: bool) -> BTreeSet<usize> {
    let mut s: BTreeSet<usize> = (0..n).filter(|_| rng.gen_bool(p)).collect();
    if nonempty && s.is_empty() {
        s.insert(rng.gen_range(0..n));
    }
    s
}

/// One random accepted machine. Outputs per state and post-states per input
/// are drawn first and multiplied out, so the result is separable by
/// construction; draws are repeated until the machine is live and reachable.
pub fn random_machine(rng: &mut ChaCha8Rng, config: &FuzzConfig) -> StateMachine {
    loop {
        let n = rng.gen_range(1..=config.max_states);
        let inputs = rng.gen_range(1..=config.max_inputs);
        let outputs = rng.gen_range(1..=config.max_outputs);
        let edge_p = (1.6 / (n * inputs) as f64).min(0.9);
        let h = (0..n)
            .map(|_| {
                let mut s = BTreeSet::from([rng.gen_range(0..outputs)]);
                if rng.gen_bool(0.35) {
                    s.insert(rng.gen_range(0..outputs));
                }
                s
            })
            .collect();
        let f = (0..n)
            .map(|_| (0..inputs).map(|_| random_subset(rng, n, edge_p, false)).collect())
            .collect();
        let initial = random_subset(rng, n, 0.25, true);
        let q = Separable {
            n,
            inputs,
            outputs,
            initial,
            h,
            f,
        }
        .to_machine();
        if q.validate().accepted {
            return q;
        }
    }
}

/// The machine sequence for a configuration.
pub fn generate(config: &FuzzConfig) -> Vec<StateMachine> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..config.count).map(|_| random_machine(&mut rng, config)).collect()
}

/// Shared, memoized constructions for one machine.
pub struct LawContext<'a> {
    pub q: &'a StateMachine,
    pub max_l: usize,
    outputs: Horizon<'a>,
    pairs: Horizon<'a>,
    built: RefCell<HashMap<(ExternalMode, usize, usize), Rc<AbstractMachine>>>,
    quotients: RefCell<HashMap<usize, Rc<AbstractMachine>>>,
}

impl<'a> LawContext<'a> {
    pub fn new(q: &'a StateMachine, max_l: usize) -> crate::Result<LawContext<'a>> {
        Ok(LawContext {
            q,
            max_l,
            outputs: Horizon::new(q, ExternalMode::Outputs)?,
            pairs: Horizon::new(q, ExternalMode::InputOutput)?,
            built: RefCell::new(HashMap::new()),
            quotients: RefCell::new(HashMap::new()),
        })
    }

    pub fn horizon(&self, mode: ExternalMode) -> &Horizon<'a> {
        match mode {
            ExternalMode::Outputs => &self.outputs,
            ExternalMode::InputOutput => &self.pairs,
        }
    }

    pub fn abstraction(&self, mode: ExternalMode, l: usize, m: usize) -> Rc<AbstractMachine> {
        self.built
            .borrow_mut()
            .entry((mode, l, m))
            .or_insert_with(|| Rc::new(build_with(self.horizon(mode), IntervalSpec { l, m })))
            .clone()
    }

    pub fn quotient(&self, l: usize) -> Rc<AbstractMachine> {
        self.quotients
            .borrow_mut()
            .entry(l)
            .or_insert_with(|| Rc::new(quotient_with(&self.outputs, l)))
            .clone()
    }
}

const MODES: [ExternalMode; 2] = [ExternalMode::Outputs, ExternalMode::InputOutput];

type LawResult = std::result::Result<(), String>;

/// A named property every accepted machine must satisfy.
pub struct Law {
    pub name: &'static str,
    pub check: fn(&LawContext<'_>) -> LawResult,
}

fn iff(name: &str, lhs: bool, rhs: bool) -> LawResult {
    if lhs == rhs {
        Ok(())
    } else {
        Err(format!("{name}: left side {lhs}, right side {rhs}"))
    }
}

fn ok_or(cond: bool, msg: impl FnOnce() -> String) -> LawResult {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn specs(max_l: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=max_l).flat_map(|l| (0..=l).map(move |m| (l, m)))
}

fn sim(
    kind: CanonicalKind,
    q: &StateMachine,
    build_mode: ExternalMode,
    check_mode: ExternalMode,
    l: usize,
    m: usize,
    inverse: bool,
) -> std::result::Result<bool, String> {
    let c = canonical_relation(kind, q, build_mode, l, m).map_err(|e| e.to_string())?;
    let v = if inverse {
        verify_simulation(&c.right, &c.left, check_mode, &c.relation.inverse(), false)
    } else {
        verify_simulation(&c.left, &c.right, check_mode, &c.relation, false)
    };
    v.map(|v| v.valid).map_err(|e| e.to_string())
}

fn law_realization(cx: &LawContext<'_>) -> LawResult {
    for mode in MODES {
        for (l, m) in specs(cx.max_l) {
            let a = cx.abstraction(mode, l, m);
            let b = cx.abstraction(mode, l, 0);
            let eq = behavior_equal(&a.machine, &b.machine, mode).map_err(|e| e.to_string())?;
            ok_or(eq, || format!("W={mode} l={l} m={m}: behavior differs from the m=0 abstraction"))?;
        }
    }
    Ok(())
}

fn law_standard_realization(cx: &LawContext<'_>) -> LawResult {
    for l in 1..=cx.max_l {
        let recipe = domino_realization(cx.q, l).map_err(|e| e.to_string())?;
        let built = cx.abstraction(ExternalMode::InputOutput, l, 0);
        ok_or(recipe.machine == built.machine, || {
            format!("l={l}: domino recipe differs from the m=0 abstraction")
        })?;
    }
    Ok(())
}

fn law_state_simulation(cx: &LawContext<'_>) -> LawResult {
    for mode in MODES {
        for (l, m) in specs(cx.max_l) {
            let fwd = sim(CanonicalKind::StateToAbstract, cx.q, mode, ExternalMode::InputOutput, l, m, false)?;
            let fu = is_future_unique(cx.horizon(mode), IntervalSpec { l, m }).holds;
            iff(&format!("W={mode} l={l} m={m} simulation vs future uniqueness"), fwd, fu)?;
        }
    }
    Ok(())
}

fn law_abstract_simulation(cx: &LawContext<'_>) -> LawResult {
    for mode in MODES {
        for (l, m) in specs(cx.max_l) {
            let back = sim(CanonicalKind::StateToAbstract, cx.q, mode, mode, l, m, true)?;
            let sb = is_sbalc(cx.horizon(mode), IntervalSpec { l, m }).holds;
            iff(&format!("W={mode} l={l} m={m} inverse simulation vs state-based completeness"), back, sb)?;
        }
    }
    Ok(())
}

fn law_length_step(cx: &LawContext<'_>) -> LawResult {
    for mode in MODES {
        for (l, m) in specs(cx.max_l.saturating_sub(1)) {
            let fwd = sim(CanonicalKind::LStep, cx.q, mode, mode, l, m, false)?;
            ok_or(fwd, || format!("W={mode} l={l} m={m}: length step is not a simulation"))?;
            let back = sim(CanonicalKind::LStep, cx.q, mode, mode, l, m, true)?;
            let sat = saturation_with(cx.horizon(mode), l).holds;
            iff(&format!("W={mode} l={l} m={m} inverse length step vs saturation"), back, sat)?;
        }
    }
    Ok(())
}

fn law_shift_step(cx: &LawContext<'_>) -> LawResult {
    for mode in MODES {
        for (l, m) in specs(cx.max_l).filter(|(l, m)| m < l) {
            let fwd = sim(CanonicalKind::MStep, cx.q, mode, mode, l, m, false)?;
            ok_or(fwd, || format!("W={mode} l={l} m={m}: shift step is not a simulation"))?;
            let back = sim(CanonicalKind::MStep, cx.q, mode, mode, l, m, true)?;
            let joint = dominoes_determined_by_prefix(cx.horizon(mode), l).holds;
            iff(&format!("W={mode} l={l} m={m} inverse shift step vs prefix-determined dominoes"), back, joint)?;
        }
    }
    Ok(())
}

fn law_quotient_simulation(cx: &LawContext<'_>) -> LawResult {
    for l in 1..=cx.max_l {
        let y = ExternalMode::Outputs;
        let fwd = sim(CanonicalKind::StateToQuotient, cx.q, y, ExternalMode::InputOutput, l, l, false)?;
        ok_or(fwd, || format!("l={l}: state-to-quotient relation is not a simulation"))?;
        let back = sim(CanonicalKind::StateToQuotient, cx.q, y, y, l, l, true)?;
        let p = partition_at(cx.q, l).map_err(|e| e.to_string())?;
        let fixed = is_fixed_point(cx.q, &p).map_err(|e| e.to_string())?.is_none();
        iff(&format!("l={l} inverse quotient relation vs fixed point"), back, fixed)?;
    }
    Ok(())
}

fn law_quotient_behavior(cx: &LawContext<'_>) -> LawResult {
    for l in 1..=cx.max_l {
        let qm = cx.quotient(l);
        let past = cx.abstraction(ExternalMode::Outputs, l, 0);
        let v = behavior_included(&qm.machine, &past.machine, ExternalMode::Outputs).map_err(|e| e.to_string())?;
        ok_or(v.included, || format!("l={l}: quotient behavior escapes the m=0 abstraction: {:?}", v.counterexample))?;
    }
    Ok(())
}

fn law_window_quotient(cx: &LawContext<'_>) -> LawResult {
    let y = ExternalMode::Outputs;
    for l in 1..=cx.max_l {
        let fwd = sim(CanonicalKind::SalcaToQuotient, cx.q, y, y, l, l, false)?;
        let dc = domino_consistent_with(&cx.outputs, l).holds;
        iff(&format!("l={l} window-to-quotient simulation vs domino consistency"), fwd, dc)?;
        let back = sim(CanonicalKind::SalcaToQuotient, cx.q, y, y, l, l, true)?;
        let fu = is_future_unique(&cx.outputs, IntervalSpec { l, m: l }).holds;
        iff(&format!("l={l} inverse window-to-quotient simulation vs future uniqueness"), back, fu)?;
    }
    Ok(())
}

fn law_unique_future_consistent(cx: &LawContext<'_>) -> LawResult {
    for l in 1..=cx.max_l {
        let fu = is_future_unique(&cx.outputs, IntervalSpec { l, m: l }).holds;
        let dc = domino_consistent_with(&cx.outputs, l).holds;
        ok_or(!fu || dc, || format!("l={l}: future unique but not domino consistent"))?;
    }
    Ok(())
}

fn law_domino_triples(cx: &LawContext<'_>) -> LawResult {
    for mode in MODES {
        for (l, m) in specs(cx.max_l) {
            let am = cx.abstraction(mode, l, m);
            let states: BTreeSet<Window> = (0..am.machine.num_states())
                .map(|x| am.window(x).expect("window state").clone())
                .collect();
            let built = projected_triples(&am);
            let from_dominoes = domino_triples(cx.horizon(mode), IntervalSpec { l, m }, &states);
            ok_or(built == from_dominoes, || {
                format!(
                    "W={mode} l={l} m={m}: {} projected transitions vs {} domino triples",
                    built.len(),
                    from_dominoes.len()
                )
            })?;
        }
    }
    Ok(())
}

fn law_saturation(cx: &LawContext<'_>) -> LawResult {
    for mode in MODES {
        for l in 1..cx.max_l {
            let sat = saturation_with(cx.horizon(mode), l).holds;
            let a = cx.abstraction(mode, l, 0);
            let b = cx.abstraction(mode, l + 1, 0);
            let eq = behavior_equal(&a.machine, &b.machine, mode).map_err(|e| e.to_string())?;
            iff(&format!("W={mode} l={l} saturation vs equal behaviors at l and l+1"), sat, eq)?;
        }
    }
    Ok(())
}

fn law_prefix_determined(cx: &LawContext<'_>) -> LawResult {
    for mode in MODES {
        let h = cx.horizon(mode);
        for (l, m) in specs(cx.max_l).filter(|(l, m)| m < l) {
            let joint = dominoes_determined_by_prefix(h, l).holds;
            let both = is_future_unique(h, IntervalSpec { l, m: m + 1 }).holds && is_sbalc(h, IntervalSpec { l, m }).holds;
            iff(&format!("W={mode} l={l} m={m} prefix-determined dominoes vs future unique and complete"), joint, both)?;
        }
    }
    Ok(())
}

fn law_partition_fibers(cx: &LawContext<'_>) -> LawResult {
    for l in 1..=cx.max_l {
        let p = partition_at(cx.q, l).map_err(|e| e.to_string())?;
        let f = future_partition(cx.q, l).map_err(|e| e.to_string())?;
        ok_or(p == f, || {
            format!(
                "l={l}: refinement cells {} differ from future-window fibers {}",
                p.render(cx.q).trim().replace('\n', " "),
                f.render(cx.q).trim().replace('\n', " ")
            )
        })?;
    }
    Ok(())
}

fn law_renaming(cx: &LawContext<'_>) -> LawResult {
    let y = ExternalMode::Outputs;
    for l in 1..=cx.max_l {
        if !is_future_unique(&cx.outputs, IntervalSpec { l, m: l }).holds {
            continue;
        }
        let ren = canonical_relation(CanonicalKind::Renaming, cx.q, y, l, l).map_err(|e| e.to_string())?;
        let v = verify_simulation(&ren.left, &ren.right, y, &ren.relation, true).map_err(|e| e.to_string())?;
        ok_or(v.valid, || format!("l={l}: renaming is not a bisimulation"))?;
        let to_abs = canonical_relation(CanonicalKind::StateToAbstract, cx.q, y, l, l).map_err(|e| e.to_string())?;
        let to_quo = canonical_relation(CanonicalKind::StateToQuotient, cx.q, y, l, l).map_err(|e| e.to_string())?;
        let composed = to_abs.relation.compose(&ren.relation).map_err(|e| e.to_string())?;
        ok_or(composed == to_quo.relation, || format!("l={l}: composition through renaming differs"))?;
        let past = cx.abstraction(y, l, 0);
        let fut = cx.abstraction(y, l, l);
        let qm = cx.quotient(l);
        let ordered = bisimilar(&qm.machine, &fut.machine, y).map_err(|e| e.to_string())?
            && simulates(&fut.machine, &past.machine, y).map_err(|e| e.to_string())?;
        ok_or(ordered, || format!("l={l}: ordering of abstractions fails under unique futures"))?;
    }
    Ok(())
}

fn law_past_determinism(cx: &LawContext<'_>) -> LawResult {
    for mode in MODES {
        for l in 1..=cx.max_l {
            let am = cx.abstraction(mode, l, 0);
            let alphabet = cx.horizon(mode).alphabet();
            for x in 0..am.machine.num_states() {
                let mut succ: BTreeMap<u32, BTreeSet<usize>> = BTreeMap::new();
                for t in am.machine.edges_from(x) {
                    succ.entry(alphabet.project(t.input, t.output)).or_default().insert(t.to);
                }
                ok_or(succ.values().all(|s| s.len() == 1), || {
                    format!("W={mode} l={l}: state {} has two successors for one letter", am.machine.state_name(x))
                })?;
            }
        }
    }
    Ok(())
}

fn law_domino_monotone(cx: &LawContext<'_>) -> LawResult {
    for mode in MODES {
        let h = cx.horizon(mode);
        for n in 1..=cx.max_l + 1 {
            let short = h.dominoes(n);
            let long = h.dominoes(n + 1);
            for z in &long.windows {
                let front = z.slice(0, n);
                ok_or(short.contains(&front) || front == Window::diamonds(n), || {
                    format!("W={mode} n={n}: front of a domino is not a domino")
                })?;
                ok_or(short.contains(&z.slice(1, n + 1)), || format!("W={mode} n={n}: back of a domino is not a domino"))?;
            }
        }
    }
    Ok(())
}

fn law_refinement_chain(cx: &LawContext<'_>) -> LawResult {
    let q = cx.q;
    let n = q.num_states();
    let mut p = initial_partition(q).map_err(|e| e.to_string())?;
    for level in 1..=n {
        ok_or(p.cells().iter().all(|c| c.iter().all(|&x| q.h(x) == q.h(c[0]))), || {
            format!("level {level}: a cell mixes output sets")
        })?;
        let next = refine(q, &p).map_err(|e| e.to_string())?;
        ok_or(next.refines(&p, n), || format!("level {level}: refinement is not finer"))?;
        let stable = is_fixed_point(q, &p).map_err(|e| e.to_string())?.is_none();
        ok_or(stable == (next == p), || format!("level {level}: fixed point test disagrees with refine"))?;
        ok_or(stable || next.len() > p.len(), || format!("level {level}: refinement did not grow"))?;
        let reversed: Vec<usize> = (0..p.len()).rev().collect();
        let other = refine_in_order(q, &p, &reversed).map_err(|e| e.to_string())?;
        ok_or(other == next, || format!("level {level}: splitter order matters"))?;
        p = next;
    }
    let (_, _, reached) = refinement_fixpoint(q, n).map_err(|e| e.to_string())?;
    ok_or(reached, || "no fixed point within |X| steps".to_string())
}

fn law_quotient_containment(cx: &LawContext<'_>) -> LawResult {
    for l in 1..=cx.max_l {
        let qm = cx.quotient(l);
        for t in qm.machine.transitions() {
            let src = qm.cell(t.from).expect("cell");
            let dst = qm.cell(t.to).expect("cell");
            let heads: BTreeSet<Window> = src.iter().map(|w| w.slice(1, l)).collect();
            let ok_tail = dst.iter().all(|w| heads.contains(&w.slice(0, l - 1)));
            let ok_head = src.iter().any(|w| w.at(0) == Letter::Sym(t.output as u32));
            ok_or(ok_tail && ok_head, || {
                format!("l={l}: quotient transition {} -> {} breaks window containment", qm.machine.state_name(t.from), qm.machine.state_name(t.to))
            })?;
        }
    }
    Ok(())
}

fn law_fixpoint_preimages(cx: &LawContext<'_>) -> LawResult {
    // a partition with a violation witness really violates stability
    let q = cx.q;
    let p = initial_partition(q).map_err(|e| e.to_string())?;
    if let Some(w) = is_fixed_point(q, &p).map_err(|e| e.to_string())? {
        let pre = preimage(q, &w.target);
        ok_or(w.cell.iter().any(|x| pre.contains(x)) && !pre.contains(&w.state), || {
            "stability witness does not violate stability".to_string()
        })?;
    }
    Ok(())
}

/// Every law checked by the fuzzer, in reporting order.
pub fn laws() -> Vec<Law> {
    vec![
        Law { name: "realization_equal_behaviors", check: law_realization },
        Law { name: "domino_recipe_equals_past_abstraction", check: law_standard_realization },
        Law { name: "state_simulation_iff_future_unique", check: law_state_simulation },
        Law { name: "inverse_simulation_iff_state_based_complete", check: law_abstract_simulation },
        Law { name: "length_step_simulation_and_saturation", check: law_length_step },
        Law { name: "shift_step_simulation_and_prefix_determined", check: law_shift_step },
        Law { name: "state_to_quotient_and_fixed_point", check: law_quotient_simulation },
        Law { name: "quotient_behavior_within_past_abstraction", check: law_quotient_behavior },
        Law { name: "window_to_quotient_iff_consistency_and_uniqueness", check: law_window_quotient },
        Law { name: "unique_future_implies_domino_consistent", check: law_unique_future_consistent },
        Law { name: "projected_transitions_equal_domino_triples", check: law_domino_triples },
        Law { name: "saturation_iff_equal_behaviors", check: law_saturation },
        Law { name: "prefix_determined_iff_unique_and_complete", check: law_prefix_determined },
        Law { name: "partition_cells_equal_future_fibers", check: law_partition_fibers },
        Law { name: "renaming_identities_under_unique_future", check: law_renaming },
        Law { name: "past_abstraction_deterministic", check: law_past_determinism },
        Law { name: "dominoes_monotone", check: law_domino_monotone },
        Law { name: "refinement_chain", check: law_refinement_chain },
        Law { name: "quotient_window_containment", check: law_quotient_containment },
        Law { name: "stability_witness_valid", check: law_fixpoint_preimages },
    ]
}

/// Checks one law on one machine.
pub fn check_law(law: &Law, q: &StateMachine, max_l: usize) -> LawResult {
    let cx = LawContext::new(q, max_l).map_err(|e| e.to_string())?;
    (law.check)(&cx)
}

/// Greedily removes transitions, then states, then initial states while the
/// machine stays accepted and the law keeps failing.
pub fn shrink(law: &Law, q: &StateMachine, max_l: usize) -> StateMachine {
    let mut cur = Separable::from_machine(q);
    let fails = |s: &Separable| {
        let m = s.to_machine();
        m.validate().accepted && check_law(law, &m, max_l).is_err()
    };
    loop {
        let mut candidates: Vec<Separable> = Vec::new();
        for x in 0..cur.n {
            for u in 0..cur.inputs {
                for &x2 in &cur.f[x][u] {
                    let mut c = cur.clone();
                    c.f[x][u].remove(&x2);
                    candidates.push(c);
                }
            }
            if cur.h[x].len() > 1 {
                for &y in &cur.h[x] {
                    let mut c = cur.clone();
                    c.h[x].remove(&y);
                    candidates.push(c);
                }
            }
        }
        if cur.n > 1 {
            candidates.extend((0..cur.n).map(|x| cur.without_state(x)));
        }
        if cur.initial.len() > 1 {
            for &x in &cur.initial {
                let mut c = cur.clone();
                c.initial.remove(&x);
                candidates.push(c);
            }
        }
        match candidates.into_iter().find(|c| fails(c)) {
            Some(c) => cur = c,
            None => return cur.to_machine(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LawFailure {
    pub machine_index: usize,
    pub detail: String,
    /// The shrunk counterexample in the JSON machine format.
    pub machine: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct LawOutcome {
    pub law: &'static str,
    pub checked: usize,
    pub passed: usize,
    pub first_failure: Option<LawFailure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FuzzSummary {
    pub config: FuzzConfig,
    pub outcomes: Vec<LawOutcome>,
}

impl FuzzSummary {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed == o.checked)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for o in &self.outcomes {
            let mark = if o.passed == o.checked { "ok  " } else { "FAIL" };
            out.push_str(&format!("{mark} {:<55} {}/{}\n", o.law, o.passed, o.checked));
            if let Some(f) = &o.first_failure {
                out.push_str(&format!("     machine #{}: {}\n     shrunk: {}\n", f.machine_index, f.detail, f.machine));
            }
        }
        out
    }
}

/// Generates the machines of `config` and checks every law on each, in
/// parallel across machines. The summary does not depend on thread timing.
pub fn run(config: &FuzzConfig, shrink_failures: bool) -> FuzzSummary {
    let machines = generate(config);
    if machines.is_empty() {
        return FuzzSummary {
            config: *config,
            outcomes: Vec::new(),
        };
    }
    let names: Vec<&'static str> = laws().iter().map(|l| l.name).collect();
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).clamp(1, 16);
    let chunk = machines.len().div_ceil(threads).max(1);
    let max_l = config.max_l;
    let results: Vec<Vec<LawResult>> = std::thread::scope(|s| {
        let handles: Vec<_> = machines
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    let laws = laws();
                    part.iter()
                        .map(|q| match LawContext::new(q, max_l) {
                            Ok(cx) => laws.iter().map(|law| (law.check)(&cx)).collect(),
                            Err(e) => laws.iter().map(|_| Err(e.to_string())).collect(),
                        })
                        .collect::<Vec<Vec<LawResult>>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("law worker panicked")).collect()
    });
    let all = laws();
    let outcomes = names
        .iter()
        .enumerate()
        .map(|(i, &law)| {
            let mut passed = 0;
            let mut first_failure = None;
            for (k, r) in results.iter().enumerate() {
                match &r[i] {
                    Ok(()) => passed += 1,
                    Err(detail) if first_failure.is_none() => {
                        let q = if shrink_failures {
                            shrink(&all[i], &machines[k], max_l)
                        } else {
                            machines[k].clone()
                        };
                        let detail = match check_law(&all[i], &q, max_l) {
                            Err(d) if shrink_failures => d,
                            _ => detail.clone(),
                        };
                        first_failure = Some(LawFailure {
                            machine_index: k,
                            detail,
                            machine: q.to_json(),
                        });
                    }
                    Err(_) => {}
                }
            }
            LawOutcome {
                law,
                checked: results.len(),
                passed,
                first_failure,
            }
        })
        .collect();
    FuzzSummary {
        config: *config,
        outcomes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic_and_accepted() {
        let cfg = FuzzConfig { count: 20, ..FuzzConfig::default() };
        let a = generate(&cfg);
        let b = generate(&cfg);
        assert_eq!(a, b);
        assert!(a.iter().all(|q| q.validate().accepted && q.is_separable()));
    }

    #[test]
    fn empty_run_has_no_checks() {
        let cfg = FuzzConfig { count: 0, ..FuzzConfig::default() };
        let s = run(&cfg, false);
        assert!(s.outcomes.iter().all(|o| o.checked == 0));
    }
}
