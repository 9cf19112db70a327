#![allow(dead_code)]

pub mod brute;

#[allow(unused_imports)]
pub use brute::*;

use std::collections::BTreeSet;
use std::path::PathBuf;

use domino_core::{ExternalAlphabet, ExternalMode, StateMachine, Window};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn load(name: &str) -> StateMachine {
    let text = std::fs::read_to_string(data_path(name)).expect("fixture exists");
    StateMachine::from_json(&text).expect("fixture parses")
}

/// The five-state machine with two initial states and a branching cycle
/// through x2, x3 and x4.
pub fn branching_cycle() -> StateMachine {
    load("branching_cycle.json")
}

pub fn self_loop() -> StateMachine {
    load("self_loop.json")
}

pub fn names<'a, I: IntoIterator<Item = &'a Window>>(q: &StateMachine, mode: ExternalMode, windows: I) -> BTreeSet<String> {
    let a = ExternalAlphabet::of(q, mode);
    windows.into_iter().map(|w| a.window_name(w)).collect()
}

pub fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

pub fn state_names(q: &StateMachine) -> BTreeSet<String> {
    q.states().iter().cloned().collect()
}

pub fn initial_names(q: &StateMachine) -> BTreeSet<String> {
    q.initial().iter().map(|&x| q.state_name(x).to_string()).collect()
}

pub fn transition_names(q: &StateMachine) -> BTreeSet<(String, String, String, String)> {
    q.transitions()
        .iter()
        .map(|t| {
            (
                q.state_name(t.from).to_string(),
                q.inputs()[t.input].clone(),
                q.outputs()[t.output].clone(),
                q.state_name(t.to).to_string(),
            )
        })
        .collect()
}

/// Machine from an edge mask over `states x inputs x outputs x states`,
/// restricted to reachable states; `None` unless the result is live.
pub fn masked_machine(n: usize, nu: usize, ny: usize, initial: &[bool], edges: &[bool]) -> Option<StateMachine> {
    use domino_core::Transition;
    let mut delta = Vec::new();
    let mut i = 0;
    for x in 0..n {
        for u in 0..nu {
            for y in 0..ny {
                for x2 in 0..n {
                    if edges[i] {
                        delta.push(Transition::new(x, u, y, x2));
                    }
                    i += 1;
                }
            }
        }
    }
    let init: Vec<usize> = (0..n).filter(|&x| initial[x] || x == 0).collect();
    let q = StateMachine::from_parts(
        (0..n).map(|x| format!("x{x}")).collect(),
        (0..nu).map(|u| format!("u{u}")).collect(),
        (0..ny).map(|y| format!("y{y}")).collect(),
        init,
        delta,
    )
    .ok()?
    .restrict_to_reachable();
    q.require_well_formed().ok()?;
    Some(q)
}

/// Separable machine built from output sets `h` (`states x outputs`) and
/// successor sets `f` (`states x inputs x states`); `None` unless accepted.
pub fn product_machine(n: usize, nu: usize, ny: usize, initial: &[bool], h: &[bool], f: &[bool]) -> Option<StateMachine> {
    let mut edges = vec![false; n * nu * ny * n];
    for x in 0..n {
        for u in 0..nu {
            for y in 0..ny {
                for x2 in 0..n {
                    edges[((x * nu + u) * ny + y) * n + x2] = h[x * ny + y] && f[(x * nu + u) * n + x2];
                }
            }
        }
    }
    let q = masked_machine(n, nu, ny, initial, &edges)?;
    q.require_accepted().ok()?;
    Some(q)
}

pub mod strategies {
    use super::*;
    use proptest::prelude::*;

    /// Reachable and live machines, not necessarily separable.
    pub fn well_formed(max_n: usize, nu: usize, ny: usize) -> impl Strategy<Value = StateMachine> {
        (1..=max_n)
            .prop_flat_map(move |n| {
                let p = (1.5 / (n * nu * ny) as f64).clamp(0.05, 0.9);
                (
                    Just(n),
                    proptest::collection::vec(proptest::bool::weighted(0.3), n),
                    proptest::collection::vec(proptest::bool::weighted(p), n * nu * ny * n),
                )
            })
            .prop_filter_map("reachable and live", move |(n, init, edges)| masked_machine(n, nu, ny, &init, &edges))
    }

    /// Accepted machines.
    pub fn accepted(max_n: usize, nu: usize, ny: usize) -> impl Strategy<Value = StateMachine> {
        (1..=max_n)
            .prop_flat_map(move |n| {
                let p = (1.6 / (n * nu) as f64).clamp(0.1, 0.9);
                (
                    Just(n),
                    proptest::collection::vec(proptest::bool::weighted(0.3), n),
                    proptest::collection::vec(proptest::bool::weighted(0.45), n * ny),
                    proptest::collection::vec(proptest::bool::weighted(p), n * nu * n),
                )
            })
            .prop_filter_map("accepted", move |(n, init, h, f)| product_machine(n, nu, ny, &init, &h, &f))
    }
}
