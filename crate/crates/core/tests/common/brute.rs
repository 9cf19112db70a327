//! Exhaustive enumerations used as independent references.

use std::collections::BTreeSet;

use domino_core::{ExternalAlphabet, ExternalMode, Letter, StateMachine, Window};

/// Every label sequence of length exactly `depth` produced by some run,
/// named letter by letter.
pub fn words_of_length(q: &StateMachine, mode: ExternalMode, depth: usize) -> BTreeSet<Vec<String>> {
    let a = ExternalAlphabet::of(q, mode);
    let mut level: BTreeSet<(usize, Vec<String>)> = q.initial().iter().map(|&x| (x, Vec::new())).collect();
    for _ in 0..depth {
        let mut next = BTreeSet::new();
        for (x, word) in &level {
            for t in q.edges_from(*x) {
                let mut w = word.clone();
                w.push(a.name(a.project(t.input, t.output)).to_string());
                next.insert((t.to, w));
            }
        }
        level = next;
    }
    level.into_iter().map(|(_, w)| w).collect()
}

/// Every word of length at most `depth` over `size` symbols.
pub fn all_words(size: u32, depth: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    let mut level = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for w in &level {
            for s in 0..size {
                let mut v: Vec<u32> = w.clone();
                v.push(s);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

/// Whether some run from an initial state produces `word`.
pub fn produces(q: &StateMachine, a: &ExternalAlphabet, word: &[u32]) -> bool {
    fn go(q: &StateMachine, a: &ExternalAlphabet, x: usize, word: &[u32]) -> bool {
        match word.split_first() {
            None => true,
            Some((&w, rest)) => q
                .edges_from(x)
                .iter()
                .any(|t| a.project(t.input, t.output) == w && go(q, a, t.to, rest)),
        }
    }
    q.initial().iter().any(|&x| go(q, a, x, word))
}

/// Every window of length `n` with an optional diamond prefix.
pub fn all_windows(a: &ExternalAlphabet, n: usize) -> Vec<Window> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &out {
            let mut d = w.clone();
            d.push(Letter::Diamond);
            next.push(d);
            for s in 0..a.len() as u32 {
                let mut v = w.clone();
                v.push(Letter::Sym(s));
                next.push(v);
            }
        }
        out = next;
    }
    out.into_iter().filter_map(|v| Window::new(v).ok()).collect()
}

/// Whether some run visits `x` with `w` around the visit: the first
/// `past_len` letters lead into `x` (from an initial state when padded with
/// diamonds) and the rest leave it.
pub fn window_seen_at(q: &StateMachine, a: &ExternalAlphabet, x: usize, w: &Window, past_len: usize) -> bool {
    let ls: Vec<Option<u32>> = w
        .letters()
        .iter()
        .map(|l| match l {
            Letter::Diamond => None,
            Letter::Sym(s) => Some(*s),
        })
        .collect();
    let diamonds = ls.iter().take_while(|l| l.is_none()).count();
    let (past, future) = ls.split_at(past_len);
    let mut back: BTreeSet<usize> = BTreeSet::from([x]);
    for s in past[diamonds.min(past.len())..].iter().rev() {
        let s = s.expect("diamonds only lead");
        back = q
            .transitions()
            .iter()
            .filter(|t| back.contains(&t.to) && a.project(t.input, t.output) == s)
            .map(|t| t.from)
            .collect();
    }
    let past_ok = if diamonds > 0 {
        back.iter().any(|s| q.is_initial(*s))
    } else {
        !back.is_empty()
    };
    let mut fwd: BTreeSet<usize> = BTreeSet::from([x]);
    for s in future {
        let Some(s) = s else { return false };
        fwd = q
            .transitions()
            .iter()
            .filter(|t| fwd.contains(&t.from) && a.project(t.input, t.output) == *s)
            .map(|t| t.to)
            .collect();
    }
    past_ok && !fwd.is_empty()
}

fn paths(q: &StateMachine, a: &ExternalAlphabet, start: usize, depth: usize) -> Vec<(Vec<usize>, Vec<u32>)> {
    let mut runs = vec![(vec![start], Vec::new())];
    let mut done = Vec::new();
    for _ in 0..depth {
        let mut next = Vec::new();
        for (states, labels) in runs {
            for t in q.edges_from(*states.last().unwrap()) {
                let mut s = states.clone();
                let mut l = labels.clone();
                s.push(t.to);
                l.push(a.project(t.input, t.output));
                next.push((s, l));
            }
            done.push((states, labels));
        }
        runs = next;
    }
    done.extend(runs);
    done
}

/// Windows around visits, read off explicit run segments of at most `depth`
/// steps. Segments from initial states start at time zero and pad the past
/// with diamonds; segments from any state only yield windows lying inside
/// them. Every state must be reachable.
pub fn windows_from_runs(q: &StateMachine, a: &ExternalAlphabet, past_len: usize, fut_len: usize, depth: usize) -> Vec<BTreeSet<Window>> {
    let mut out = vec![BTreeSet::new(); q.num_states()];
    for start in 0..q.num_states() {
        let anchored = q.is_initial(start);
        for (states, labels) in paths(q, a, start, depth) {
            for k in 0..states.len() {
                if k + fut_len > labels.len() {
                    break;
                }
                if k < past_len && !anchored {
                    continue;
                }
                let mut w = Vec::with_capacity(past_len + fut_len);
                for i in 0..past_len {
                    let pos = k as isize - past_len as isize + i as isize;
                    w.push(if pos < 0 { Letter::Diamond } else { Letter::Sym(labels[pos as usize]) });
                }
                for i in 0..fut_len {
                    w.push(Letter::Sym(labels[k + i]));
                }
                out[states[k]].insert(Window::new(w).unwrap());
            }
        }
    }
    out
}

/// Whether every pair of `r` matches every move of its left state.
pub fn step_closed(q1: &StateMachine, q2: &StateMachine, mode: ExternalMode, r: &BTreeSet<(usize, usize)>) -> bool {
    let a1 = ExternalAlphabet::of(q1, mode);
    let a2 = ExternalAlphabet::of(q2, mode);
    r.iter().all(|&(x, y)| {
        q1.edges_from(x).iter().all(|t| {
            let w = a1.name(a1.project(t.input, t.output));
            q2.edges_from(y)
                .iter()
                .any(|s| a2.name(a2.project(s.input, s.output)) == w && r.contains(&(t.to, s.to)))
        })
    })
}

pub fn covers_initial(q1: &StateMachine, q2: &StateMachine, r: &BTreeSet<(usize, usize)>) -> bool {
    q1.initial().iter().all(|&x| q2.initial().iter().any(|&y| r.contains(&(x, y))))
}

/// Every relation between `n1` and `n2` states.
pub fn all_relations(n1: usize, n2: usize) -> impl Iterator<Item = BTreeSet<(usize, usize)>> {
    let all: Vec<(usize, usize)> = (0..n1).flat_map(|x| (0..n2).map(move |y| (x, y))).collect();
    (0u32..1 << all.len()).map(move |mask| {
        all.iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, p)| *p)
            .collect()
    })
}

/// Union of all step-closed relations, of those whose inverse is step-closed
/// too, and whether some such relation also covers initial states.
pub struct ExhaustiveSimulation {
    pub greatest: BTreeSet<(usize, usize)>,
    pub greatest_bi: BTreeSet<(usize, usize)>,
    pub simulates: bool,
    pub bisimilar: bool,
}

pub fn exhaustive_simulation(q1: &StateMachine, q2: &StateMachine, mode: ExternalMode) -> ExhaustiveSimulation {
    let mut out = ExhaustiveSimulation {
        greatest: BTreeSet::new(),
        greatest_bi: BTreeSet::new(),
        simulates: false,
        bisimilar: false,
    };
    for r in all_relations(q1.num_states(), q2.num_states()) {
        if !step_closed(q1, q2, mode, &r) {
            continue;
        }
        out.greatest.extend(r.iter().copied());
        out.simulates |= covers_initial(q1, q2, &r);
        let inv: BTreeSet<(usize, usize)> = r.iter().map(|&(a, b)| (b, a)).collect();
        if step_closed(q2, q1, mode, &inv) {
            out.greatest_bi.extend(r.iter().copied());
            out.bisimilar |= covers_initial(q1, q2, &r) && covers_initial(q2, q1, &inv);
        }
    }
    out
}
