//! Finite nondeterministic state machines with separate input and output
//! alphabets, their JSON file format and structural validation.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::error::{Error, Result};

pub type StateId = usize;
pub type InputId = usize;
pub type OutputId = usize;

/// Token that renders the padding symbol inside window names.
pub const DIAMOND_TOKEN: &str = "<>";

/// Which part of a transition label is visible from the outside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExternalMode {
    /// Only the output `y` is observed.
    #[serde(rename = "y")]
    Outputs,
    /// The pair `(u, y)` is observed.
    #[serde(rename = "uy")]
    InputOutput,
}

impl ExternalMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ExternalMode::Outputs => "y",
            ExternalMode::InputOutput => "uy",
        }
    }
}

impl fmt::Display for ExternalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExternalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "y" => Ok(ExternalMode::Outputs),
            "uy" => Ok(ExternalMode::InputOutput),
            other => Err(Error::Parse(format!("unknown external alphabet `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub from: StateId,
    pub input: InputId,
    pub output: OutputId,
    pub to: StateId,
}

impl Transition {
    pub fn new(from: StateId, input: InputId, output: OutputId, to: StateId) -> Self {
        Transition { from, input, output, to }
    }
}

/// Structural properties of a machine. `accepted` gates every construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub output_deterministic: bool,
    pub separable: bool,
    pub reachable: bool,
    pub live: bool,
    pub accepted: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.separable {
            out.push("not separable");
        }
        if !self.reachable {
            out.push("has unreachable states or no initial state");
        }
        if !self.live {
            out.push("has a state without outgoing transitions");
        }
        out
    }
}

/// A machine `(X, U, Y, delta, X0)`. Declaration order of every alphabet is
/// the canonical order; transitions are kept sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateMachine {
    states: Vec<String>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    initial: Vec<StateId>,
    transitions: Vec<Transition>,
    external: Option<ExternalMode>,
    // transitions[offsets[x]..offsets[x + 1]] leave state x
    offsets: Vec<usize>,
}

fn is_plain_symbol(name: &str) -> bool {
    !name.is_empty()
        && !name.contains(DIAMOND_TOKEN)
        && !name
            .chars()
            .any(|c| c.is_whitespace() || c.is_control() || matches!(c, '.' | '|' | '/'))
}

/// Input and output names must be plain tokens: no whitespace and none of
/// `.`, `|`, `/` or `<>`, which are used to spell windows.
pub fn check_symbol(name: &str) -> Result<()> {
    if is_plain_symbol(name) {
        Ok(())
    } else {
        Err(Error::InvalidSymbol(name.to_string()))
    }
}

/// State names are plain tokens or the spelled-out windows and window sets
/// produced by the abstractions (`<>.y1`, `y3.y2|y3.y4`, `u1/y1.u2/y2`).
pub fn check_state_name(name: &str) -> Result<()> {
    let part_ok = |part: &str| {
        part == DIAMOND_TOKEN
            || is_plain_symbol(part)
            || matches!(part.split_once('/'), Some((u, y)) if is_plain_symbol(u) && is_plain_symbol(y))
    };
    let ok = !name.is_empty()
        && name
            .split('|')
            .all(|cell| !cell.is_empty() && cell.split('.').all(part_ok));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidSymbol(name.to_string()))
    }
}

fn index_names(names: &[String], what: &str) -> Result<HashMap<String, usize>> {
    let mut map = HashMap::with_capacity(names.len());
    for (i, n) in names.iter().enumerate() {
        if map.insert(n.clone(), i).is_some() {
            return Err(Error::Duplicate(format!("{what} {n}")));
        }
    }
    Ok(map)
}

impl StateMachine {
    /// Builds a machine from index-based parts. Duplicate transitions are
    /// collapsed, duplicate names rejected.
    pub fn from_parts(
        states: Vec<String>,
        inputs: Vec<String>,
        outputs: Vec<String>,
        initial: Vec<StateId>,
        transitions: Vec<Transition>,
    ) -> Result<Self> {
        for s in &states {
            check_state_name(s)?;
        }
        for s in inputs.iter().chain(&outputs) {
            check_symbol(s)?;
        }
        index_names(&states, "state")?;
        index_names(&inputs, "input")?;
        index_names(&outputs, "output")?;
        let initial: BTreeSet<StateId> = initial.into_iter().collect();
        if let Some(&bad) = initial.iter().find(|&&x| x >= states.len()) {
            return Err(Error::UnknownState(format!("#{bad}")));
        }
        for t in &transitions {
            if t.from >= states.len() {
                return Err(Error::UnknownState(format!("#{}", t.from)));
            }
            if t.to >= states.len() {
                return Err(Error::UnknownState(format!("#{}", t.to)));
            }
            if t.input >= inputs.len() {
                return Err(Error::UnknownInput(format!("#{}", t.input)));
            }
            if t.output >= outputs.len() {
                return Err(Error::UnknownOutput(format!("#{}", t.output)));
            }
        }
        let transitions: Vec<Transition> = transitions
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut offsets = vec![0; states.len() + 1];
        for t in &transitions {
            offsets[t.from + 1] += 1;
        }
        for i in 0..states.len() {
            offsets[i + 1] += offsets[i];
        }
        Ok(StateMachine {
            states,
            inputs,
            outputs,
            initial: initial.into_iter().collect(),
            transitions,
            external: None,
            offsets,
        })
    }

    /// Builds a machine from names, the form used by tests and the file format.
    pub fn from_names<S: AsRef<str>>(
        states: &[S],
        inputs: &[S],
        outputs: &[S],
        initial: &[S],
        transitions: &[[S; 4]],
    ) -> Result<Self> {
        let own = |v: &[S]| v.iter().map(|s| s.as_ref().to_string()).collect::<Vec<_>>();
        let (states, inputs, outputs) = (own(states), own(inputs), own(outputs));
        let sx = index_names(&states, "state")?;
        let su = index_names(&inputs, "input")?;
        let sy = index_names(&outputs, "output")?;
        let state = |n: &str| sx.get(n).copied().ok_or_else(|| Error::UnknownState(n.into()));
        let mut init = Vec::new();
        for n in initial {
            init.push(state(n.as_ref())?);
        }
        let mut delta = Vec::new();
        for [x, u, y, x2] in transitions {
            let u = su
                .get(u.as_ref())
                .copied()
                .ok_or_else(|| Error::UnknownInput(u.as_ref().into()))?;
            let y = sy
                .get(y.as_ref())
                .copied()
                .ok_or_else(|| Error::UnknownOutput(y.as_ref().into()))?;
            delta.push(Transition::new(state(x.as_ref())?, u, y, state(x2.as_ref())?));
        }
        StateMachine::from_parts(states, inputs, outputs, init, delta)
    }

    pub fn with_external(mut self, mode: Option<ExternalMode>) -> Self {
        self.external = mode;
        self
    }

    /// External alphabet recorded in the machine file, if any.
    pub fn external(&self) -> Option<ExternalMode> {
        self.external
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn is_initial(&self, x: StateId) -> bool {
        self.initial.binary_search(&x).is_ok()
    }

    /// Transitions leaving `x`, in canonical order.
    pub fn edges_from(&self, x: StateId) -> &[Transition] {
        &self.transitions[self.offsets[x]..self.offsets[x + 1]]
    }

    pub fn state_id(&self, name: &str) -> Result<StateId> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    pub fn input_id(&self, name: &str) -> Result<InputId> {
        self.inputs
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownInput(name.to_string()))
    }

    pub fn output_id(&self, name: &str) -> Result<OutputId> {
        self.outputs
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownOutput(name.to_string()))
    }

    pub fn state_name(&self, x: StateId) -> &str {
        &self.states[x]
    }

    /// Admissible outputs `H(x)`.
    pub fn h(&self, x: StateId) -> BTreeSet<OutputId> {
        self.edges_from(x).iter().map(|t| t.output).collect()
    }

    /// Post-states `F(x, u)`.
    pub fn post(&self, x: StateId, u: InputId) -> BTreeSet<StateId> {
        self.edges_from(x)
            .iter()
            .filter(|t| t.input == u)
            .map(|t| t.to)
            .collect()
    }

    /// All successors `T(x)`.
    pub fn succ(&self, x: StateId) -> BTreeSet<StateId> {
        self.edges_from(x).iter().map(|t| t.to).collect()
    }

    /// Enabled inputs of `x`.
    pub fn enabled(&self, x: StateId) -> BTreeSet<InputId> {
        self.edges_from(x).iter().map(|t| t.input).collect()
    }

    pub fn admissible_outputs(&self, x: &str) -> Result<Vec<String>> {
        let x = self.state_id(x)?;
        Ok(self.h(x).into_iter().map(|y| self.outputs[y].clone()).collect())
    }

    pub fn post_states(&self, x: &str, u: &str) -> Result<Vec<String>> {
        let x = self.state_id(x)?;
        let u = self.input_id(u)?;
        Ok(self.post(x, u).into_iter().map(|s| self.states[s].clone()).collect())
    }

    pub fn successors(&self, x: &str) -> Result<Vec<String>> {
        let x = self.state_id(x)?;
        Ok(self.succ(x).into_iter().map(|s| self.states[s].clone()).collect())
    }

    pub fn enabled_inputs(&self, x: &str) -> Result<Vec<String>> {
        let x = self.state_id(x)?;
        Ok(self.enabled(x).into_iter().map(|u| self.inputs[u].clone()).collect())
    }

    /// States reachable from the initial set, as a membership vector.
    pub fn reachable_mask(&self) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        let mut queue: VecDeque<StateId> = VecDeque::new();
        for &x in &self.initial {
            seen[x] = true;
            queue.push_back(x);
        }
        while let Some(x) = queue.pop_front() {
            for t in self.edges_from(x) {
                if !seen[t.to] {
                    seen[t.to] = true;
                    queue.push_back(t.to);
                }
            }
        }
        seen
    }

    pub fn is_separable(&self) -> bool {
        (0..self.states.len()).all(|x| {
            let moves: BTreeSet<(InputId, StateId)> =
                self.edges_from(x).iter().map(|t| (t.input, t.to)).collect();
            let outs = self.h(x);
            moves.len() * outs.len() == self.edges_from(x).len()
        })
    }

    pub fn validate(&self) -> ValidationReport {
        let output_deterministic = (0..self.states.len()).all(|x| self.h(x).len() <= 1);
        let separable = self.is_separable();
        let reachable = !self.initial.is_empty() && self.reachable_mask().into_iter().all(|b| b);
        let live = (0..self.states.len()).all(|x| !self.edges_from(x).is_empty());
        ValidationReport {
            output_deterministic,
            separable,
            reachable,
            live,
            accepted: separable && reachable && live,
        }
    }

    pub fn require_accepted(&self) -> Result<()> {
        let report = self.validate();
        if report.accepted {
            Ok(())
        } else {
            Err(Error::NotAccepted(report.failures().join(", ")))
        }
    }

    /// Reachable and live, without separability. Abstractions are compared
    /// under this weaker condition since they need not be separable.
    pub fn require_well_formed(&self) -> Result<()> {
        let report = self.validate();
        if report.reachable && report.live {
            Ok(())
        } else {
            let mut why = report.failures();
            why.retain(|f| *f != "not separable");
            Err(Error::NotAccepted(why.join(", ")))
        }
    }

    /// Keeps only the states reachable from the initial set.
    pub fn restrict_to_reachable(&self) -> StateMachine {
        let keep = self.reachable_mask();
        if keep.iter().all(|&b| b) {
            return self.clone();
        }
        let mut map = vec![usize::MAX; self.states.len()];
        let mut states = Vec::new();
        for (x, name) in self.states.iter().enumerate() {
            if keep[x] {
                map[x] = states.len();
                states.push(name.clone());
            }
        }
        let delta = self
            .transitions
            .iter()
            .filter(|t| keep[t.from])
            .map(|t| Transition::new(map[t.from], t.input, t.output, map[t.to]))
            .collect();
        let initial = self.initial.iter().map(|&x| map[x]).collect();
        StateMachine::from_parts(states, self.inputs.clone(), self.outputs.clone(), initial, delta)
            .expect("restriction of a valid machine is valid")
            .with_external(self.external)
    }

    fn to_file(&self) -> MachineFile {
        MachineFile {
            states: self.states.clone(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            initial: self.initial.iter().map(|&x| self.states[x].clone()).collect(),
            transitions: self
                .transitions
                .iter()
                .map(|t| {
                    [
                        self.states[t.from].clone(),
                        self.inputs[t.input].clone(),
                        self.outputs[t.output].clone(),
                        self.states[t.to].clone(),
                    ]
                })
                .collect(),
            external: self.external,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("machine serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("machine serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MachineFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        StateMachine::from_names(
            &file.states,
            &file.inputs,
            &file.outputs,
            &file.initial,
            &file.transitions,
        )
        .map(|q| q.with_external(file.external))
    }

    /// Short content hash of the canonical JSON form, used to tie relations
    /// to the machines they were built for.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_json().as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Graphviz rendering: one node per state, one edge per transition
    /// labelled `u/y`, initial states drawn as double circles.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph {} {{\n  rankdir=LR;\n", dot_quote(name));
        for (x, s) in self.states.iter().enumerate() {
            let shape = if self.is_initial(x) { "doublecircle" } else { "circle" };
            out.push_str(&format!("  {} [shape={shape}];\n", dot_quote(s)));
        }
        for t in &self.transitions {
            out.push_str(&format!(
                "  {} -> {} [label={}];\n",
                dot_quote(&self.states[t.from]),
                dot_quote(&self.states[t.to]),
                dot_quote(&format!("{}/{}", self.inputs[t.input], self.outputs[t.output]))
            ));
        }
        out.push_str("}\n");
        out
    }

    /// Transitions grouped by source, then by projected label. Handy when
    /// matching moves across machines.
    pub fn moves_by_label<F>(&self, x: StateId, label: F) -> BTreeMap<u32, Vec<StateId>>
    where
        F: Fn(InputId, OutputId) -> u32,
    {
        let mut map: BTreeMap<u32, Vec<StateId>> = BTreeMap::new();
        for t in self.edges_from(x) {
            map.entry(label(t.input, t.output)).or_default().push(t.to);
        }
        map
    }
}

pub(crate) fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MachineFile {
    states: Vec<String>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    initial: Vec<String>,
    transitions: Vec<[String; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    external: Option<ExternalMode>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> StateMachine {
        StateMachine::from_names(
            &["a", "b"],
            &["u"],
            &["y", "z"],
            &["a"],
            &[["a", "u", "y", "b"], ["b", "u", "z", "a"], ["a", "u", "y", "b"]],
        )
        .unwrap()
    }

    #[test]
    fn duplicate_transitions_collapse() {
        assert_eq!(small().transitions().len(), 2);
    }

    #[test]
    fn duplicate_declarations_are_rejected() {
        let err = StateMachine::from_names(&["a", "a"], &["u"], &["y"], &["a"], &[]).unwrap_err();
        assert!(matches!(err, Error::Duplicate(_)));
    }

    #[test]
    fn reserved_tokens_are_rejected() {
        for bad in ["<>", "a.b", "a|b", "a/b", "", "a b"] {
            let err = StateMachine::from_names(&["s"], &[bad], &["y"], &["s"], &[]).unwrap_err();
            assert!(matches!(err, Error::InvalidSymbol(_)), "{bad}");
        }
    }

    #[test]
    fn window_names_are_valid_states() {
        for ok in ["<>", "<>.y1", "y3.y2|y3.y4", "u1/y1.u2/y2"] {
            check_state_name(ok).unwrap();
        }
        for bad in ["a..b", "|a", "a/b/c", "x y"] {
            assert!(check_state_name(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn unknown_names_are_reported() {
        let err = StateMachine::from_names(&["a"], &["u"], &["y"], &["b"], &[]).unwrap_err();
        assert_eq!(err, Error::UnknownState("b".into()));
        let q = small();
        assert_eq!(q.admissible_outputs("c").unwrap_err(), Error::UnknownState("c".into()));
        assert_eq!(q.post_states("a", "v").unwrap_err(), Error::UnknownInput("v".into()));
    }

    #[test]
    fn json_round_trip() {
        let q = small().with_external(Some(ExternalMode::InputOutput));
        let back = StateMachine::from_json(&q.to_json_pretty()).unwrap();
        assert_eq!(back, q);
        assert_eq!(back.digest(), q.digest());
    }

    #[test]
    fn validation_flags() {
        let r = small().validate();
        assert!(r.accepted && r.output_deterministic);
        // a state with two outputs but only one of them paired with a move
        let q = StateMachine::from_names(
            &["a", "b"],
            &["u", "v"],
            &["y", "z"],
            &["a"],
            &[["a", "u", "y", "b"], ["a", "v", "z", "b"], ["b", "u", "y", "b"]],
        )
        .unwrap();
        let r = q.validate();
        assert!(!r.separable && !r.accepted && r.live && r.reachable);
        let dead = StateMachine::from_names(&["a", "b"], &["u"], &["y"], &["a"], &[["a", "u", "y", "b"]])
            .unwrap();
        assert!(!dead.validate().live);
    }
}
