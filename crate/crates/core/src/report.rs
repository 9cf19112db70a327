//! Property tables and abstraction orderings for one machine, as plain
//! serializable values with a text rendering.

use serde::Serialize;

use crate::behavior::{behavior_included, saturation_with, Horizon, IntervalSpec};
use crate::error::Result;
use crate::machine::{ExternalMode, StateMachine, ValidationReport};
use crate::qba::{domino_consistent_with, is_fixed_point, partition_at, quotient_with, refinement_fixpoint};
use crate::relations::{bisimilar, simulates};
use crate::salca::{build_with, is_async_l_complete, is_future_unique, is_sbalc, AbstractMachine};

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub name: String,
    pub states: usize,
    pub initial: usize,
    pub transitions: usize,
}

impl Summary {
    fn of(name: String, q: &StateMachine) -> Summary {
        Summary {
            name,
            states: q.num_states(),
            initial: q.initial().len(),
            transitions: q.transitions().len(),
        }
    }
}

/// Predicates that depend on both `l` and `m`.
#[derive(Debug, Clone, Serialize)]
pub struct SpecRow {
    pub l: usize,
    pub m: usize,
    pub future_unique: bool,
    pub future_unique_witness: Option<String>,
    pub sbalc: bool,
    pub sbalc_witness: Option<String>,
}

/// Predicates and abstractions that depend on `l` only.
#[derive(Debug, Clone, Serialize)]
pub struct LevelRow {
    pub l: usize,
    pub async_complete: bool,
    pub saturated: bool,
    pub domino_consistent: bool,
    pub domino_consistent_witness: Option<String>,
    pub fixed_point: bool,
    pub fixed_point_witness: Option<String>,
    pub partition: Vec<String>,
    pub abstractions: Vec<Summary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementSummary {
    pub steps: usize,
    pub reached: bool,
    pub cells: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub digest: String,
    pub external: ExternalMode,
    pub validation: ValidationReport,
    pub specs: Vec<SpecRow>,
    pub levels: Vec<LevelRow>,
    pub refinement: RefinementSummary,
}

pub fn past_name(l: usize) -> String {
    format!("window({l},0)")
}

pub fn future_name(l: usize) -> String {
    format!("window({l},{l})")
}

pub fn quotient_name(l: usize) -> String {
    format!("quotient({l})")
}

/// Evaluates every predicate for `l <= l_max` and `m` in `{0, l}`. The
/// quotient-side predicates always observe outputs.
pub fn build_report(q: &StateMachine, mode: ExternalMode, l_max: usize, max_steps: Option<usize>) -> Result<Report> {
    IntervalSpec::new(l_max, 0)?;
    let h = Horizon::new(q, mode)?;
    let hy = Horizon::new(q, ExternalMode::Outputs)?;
    let alphabet = h.alphabet();
    let mut specs = Vec::new();
    let mut levels = Vec::new();
    for l in 1..=l_max {
        let ms: Vec<usize> = if l == 0 { vec![0] } else { vec![0, l] };
        for m in ms {
            let spec = IntervalSpec { l, m };
            let fu = is_future_unique(&h, spec);
            let sb = is_sbalc(&h, spec);
            specs.push(SpecRow {
                l,
                m,
                future_unique: fu.holds,
                future_unique_witness: fu.describe(q, alphabet),
                sbalc: sb.holds,
                sbalc_witness: sb.describe(q, alphabet),
            });
        }
        let dc = domino_consistent_with(&hy, l);
        let p = partition_at(q, l)?;
        let fixed = is_fixed_point(q, &p)?;
        let names = |c: &[usize]| c.iter().map(|&x| q.state_name(x)).collect::<Vec<_>>().join(",");
        let past = build_with(&h, IntervalSpec { l, m: 0 });
        let fut = build_with(&h, IntervalSpec { l, m: l });
        let quo = quotient_with(&hy, l);
        levels.push(LevelRow {
            l,
            async_complete: is_async_l_complete(q, mode, l)?,
            saturated: saturation_with(&h, l).holds,
            domino_consistent: dc.holds,
            domino_consistent_witness: dc.describe(q, hy.alphabet()),
            fixed_point: fixed.is_none(),
            fixed_point_witness: fixed.map(|w| {
                format!("{{{}}} meets predecessors of {{{}}} but {} has no successor there", names(&w.cell), names(&w.target), q.state_name(w.state))
            }),
            partition: p.cells().iter().map(|c| format!("{{{}}}", names(c))).collect(),
            abstractions: vec![
                Summary::of(past_name(l), &past.machine),
                Summary::of(future_name(l), &fut.machine),
                Summary::of(quotient_name(l), &quo.machine),
            ],
        });
    }
    let (p, steps, reached) = refinement_fixpoint(q, max_steps.unwrap_or(q.num_states()).max(1))?;
    Ok(Report {
        digest: q.digest(),
        external: mode,
        validation: q.validate(),
        specs,
        levels,
        refinement: RefinementSummary {
            steps,
            reached,
            cells: p.len(),
        },
    })
}

fn mark(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

impl Report {
    pub fn render_text(&self) -> String {
        let mut out = format!("machine {} (W = {})\n", self.digest, self.external);
        let v = &self.validation;
        out.push_str(&format!(
            "output_deterministic={} separable={} reachable={} live={}\n\n",
            mark(v.output_deterministic),
            mark(v.separable),
            mark(v.reachable),
            mark(v.live)
        ));
        out.push_str("l m  future_unique sbalc\n");
        for r in &self.specs {
            out.push_str(&format!("{} {}  {:<13} {}\n", r.l, r.m, mark(r.future_unique), mark(r.sbalc)));
            if let Some(w) = &r.future_unique_witness {
                out.push_str(&format!("     future_unique fails at {w}\n"));
            }
            if let Some(w) = &r.sbalc_witness {
                out.push_str(&format!("     sbalc fails at {w}\n"));
            }
        }
        out.push_str("\nl  async_complete saturated domino_consistent fixed_point\n");
        for r in &self.levels {
            out.push_str(&format!(
                "{}  {:<14} {:<9} {:<17} {}\n",
                r.l,
                mark(r.async_complete),
                mark(r.saturated),
                mark(r.domino_consistent),
                mark(r.fixed_point)
            ));
            if let Some(w) = &r.domino_consistent_witness {
                out.push_str(&format!("   domino consistency fails at {w}\n"));
            }
            if let Some(w) = &r.fixed_point_witness {
                out.push_str(&format!("   not a fixed point: {w}\n"));
            }
            out.push_str(&format!("   partition {}\n", r.partition.join(" ")));
            for s in &r.abstractions {
                out.push_str(&format!(
                    "   {:<12} {} states, {} initial, {} transitions\n",
                    s.name, s.states, s.initial, s.transitions
                ));
            }
        }
        out.push_str(&format!(
            "\nrefinement: {} cells after {} steps, fixed point {}\n",
            self.refinement.cells,
            self.refinement.steps,
            if self.refinement.reached { "reached" } else { "not reached" }
        ));
        out
    }
}

/// One ordered pair of machines and whether the right one simulates the left.
#[derive(Debug, Clone, Serialize)]
pub struct PairVerdict {
    pub left: String,
    pub right: String,
    pub simulated: bool,
    pub behavior_included: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub l: usize,
    pub machines: Vec<Summary>,
    pub pairs: Vec<PairVerdict>,
    /// Names of the abstractions bisimilar to the source machine.
    pub bisimilar_to_source: Vec<String>,
    pub chain: String,
}

impl Comparison {
    pub fn simulated(&self, left: &str, right: &str) -> Option<bool> {
        self.pairs
            .iter()
            .find(|p| p.left == left && p.right == right)
            .map(|p| p.simulated)
    }

    pub fn equivalent(&self, a: &str, b: &str) -> Option<bool> {
        Some(self.simulated(a, b)? && self.simulated(b, a)?)
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("abstractions at l = {} (W = y)\n", self.l);
        for s in &self.machines {
            out.push_str(&format!("  {:<12} {} states, {} transitions\n", s.name, s.states, s.transitions));
        }
        out.push('\n');
        for p in &self.pairs {
            out.push_str(&format!(
                "  {:<12} simulated by {:<12} {:<5}  behavior included {}\n",
                p.left,
                p.right,
                mark(p.simulated),
                mark(p.behavior_included)
            ));
        }
        out.push_str(&format!("\nbisimilar to source: {}\n", if self.bisimilar_to_source.is_empty() { "none".to_string() } else { self.bisimilar_to_source.join(", ") }));
        out.push_str(&format!("chain: {}\n", self.chain));
        out
    }
}

/// Compares the future-window abstraction, the quotient and the past-window
/// abstraction at length `l` over outputs, pairwise and against the source.
pub fn compare(q: &StateMachine, l: usize) -> Result<Comparison> {
    IntervalSpec::new(l, l)?;
    let y = ExternalMode::Outputs;
    let h = Horizon::new(q, y)?;
    let list: Vec<(String, AbstractMachine)> = vec![
        (future_name(l), build_with(&h, IntervalSpec { l, m: l })),
        (quotient_name(l), quotient_with(&h, l)),
        (past_name(l), build_with(&h, IntervalSpec { l, m: 0 })),
    ];
    let mut pairs = Vec::new();
    for (a, ma) in &list {
        for (b, mb) in &list {
            if a == b {
                continue;
            }
            pairs.push(PairVerdict {
                left: a.clone(),
                right: b.clone(),
                simulated: simulates(&ma.machine, &mb.machine, y)?,
                behavior_included: behavior_included(&ma.machine, &mb.machine, y)?.included,
            });
        }
    }
    let mut bisim = Vec::new();
    for (name, m) in &list {
        if bisimilar(q, &m.machine, y)? {
            bisim.push(name.clone());
        }
    }
    let mut cmp = Comparison {
        l,
        machines: std::iter::once(Summary::of("source".into(), q))
            .chain(list.iter().map(|(n, m)| Summary::of(n.clone(), &m.machine)))
            .collect(),
        pairs,
        bisimilar_to_source: bisim,
        chain: String::new(),
    };
    cmp.chain = render_chain(&cmp, &list.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>());
    Ok(cmp)
}

fn render_chain(cmp: &Comparison, names: &[String]) -> String {
    let mut parts = vec![names[0].clone()];
    for w in names.windows(2) {
        let fwd = cmp.simulated(&w[0], &w[1]).unwrap_or(false);
        let back = cmp.simulated(&w[1], &w[0]).unwrap_or(false);
        let rel = match (fwd, back) {
            (true, true) => "~=",
            (true, false) => "<",
            (false, true) => ">",
            (false, false) => "<>",
        };
        parts.push(rel.to_string());
        parts.push(w[1].clone());
    }
    let mut chain = parts.join(" ");
    for b in &cmp.bisimilar_to_source {
        chain.push_str(&format!(", {b} ~= source"));
    }
    chain
}
