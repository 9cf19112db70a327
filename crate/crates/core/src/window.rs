//! Windows over an external alphabet padded on the left with the diamond
//! symbol, and the alphabet that names their letters.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::machine::{ExternalMode, InputId, OutputId, StateMachine, DIAMOND_TOKEN};

/// One position of a window. The diamond sorts before every symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    Diamond,
    Sym(u32),
}

/// A finite string over `W` with all diamonds in a contiguous prefix.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Window(Vec<Letter>);

impl Window {
    pub fn new(letters: Vec<Letter>) -> Result<Window> {
        let first_sym = letters
            .iter()
            .position(|l| *l != Letter::Diamond)
            .unwrap_or(letters.len());
        if letters[first_sym..].contains(&Letter::Diamond) {
            return Err(Error::Parse("diamond after a symbol in a window".into()));
        }
        Ok(Window(letters))
    }

    pub fn empty() -> Window {
        Window(Vec::new())
    }

    pub fn diamonds(n: usize) -> Window {
        Window(vec![Letter::Diamond; n])
    }

    pub fn from_symbols(symbols: &[u32]) -> Window {
        Window(symbols.iter().map(|&s| Letter::Sym(s)).collect())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn at(&self, i: usize) -> Letter {
        self.0[i]
    }

    pub fn diamond_count(&self) -> usize {
        self.0.iter().take_while(|l| **l == Letter::Diamond).count()
    }

    /// The sub-window of positions `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Window {
        Window(self.0[start..end].to_vec())
    }

    pub fn concat(&self, other: &Window) -> Window {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Window(v)
    }

    pub fn push(&self, letter: Letter) -> Window {
        let mut v = self.0.clone();
        v.push(letter);
        Window(v)
    }

    /// Drops the first letter and appends `letter`, keeping the length.
    pub fn shift(&self, letter: Letter) -> Window {
        if self.0.is_empty() {
            return Window::empty();
        }
        let mut v = self.0[1..].to_vec();
        v.push(letter);
        Window(v)
    }

    pub fn starts_with(&self, prefix: &Window) -> bool {
        self.0.starts_with(&prefix.0)
    }
}

/// The external alphabet `W` of a machine: its outputs, or its
/// input/output pairs. Symbol ids follow declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalAlphabet {
    pub mode: ExternalMode,
    num_inputs: usize,
    num_outputs: usize,
    names: Vec<String>,
}

impl ExternalAlphabet {
    pub fn of(q: &StateMachine, mode: ExternalMode) -> ExternalAlphabet {
        let names = match mode {
            ExternalMode::Outputs => q.outputs().to_vec(),
            ExternalMode::InputOutput => q
                .inputs()
                .iter()
                .flat_map(|u| q.outputs().iter().map(move |y| format!("{u}/{y}")))
                .collect(),
        };
        ExternalAlphabet {
            mode,
            num_inputs: q.inputs().len(),
            num_outputs: q.outputs().len(),
            names,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// The projection of a transition label onto `W`.
    pub fn project(&self, u: InputId, y: OutputId) -> u32 {
        match self.mode {
            ExternalMode::Outputs => y as u32,
            ExternalMode::InputOutput => (u * self.num_outputs + y) as u32,
        }
    }

    /// Splits a pair symbol back into its input and output.
    pub fn unpair(&self, w: u32) -> (InputId, OutputId) {
        debug_assert_eq!(self.mode, ExternalMode::InputOutput);
        let w = w as usize;
        (w / self.num_outputs, w % self.num_outputs)
    }

    pub fn name(&self, w: u32) -> &str {
        &self.names[w as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lookup(&self, name: &str) -> Result<u32> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| i as u32)
            .ok_or_else(|| Error::Parse(format!("unknown external symbol `{name}`")))
    }

    /// The set of symbols actually produced by the machine's label space,
    /// compared by name across machines.
    pub fn name_set(&self) -> BTreeSet<&str> {
        self.names.iter().map(String::as_str).collect()
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn letter_name(&self, l: Letter) -> &str {
        match l {
            Letter::Diamond => DIAMOND_TOKEN,
            Letter::Sym(w) => self.name(w),
        }
    }

    /// Window rendered as a state name: letters joined with `.`.
    pub fn window_name(&self, w: &Window) -> String {
        let mut out = String::new();
        for (i, l) in w.letters().iter().enumerate() {
            if i > 0 {
                out.push('.');
            }
            out.push_str(self.letter_name(*l));
        }
        out
    }

    /// Window rendered as a line of a domino listing: letters separated by spaces.
    pub fn window_line(&self, w: &Window) -> String {
        let mut out = String::new();
        for (i, l) in w.letters().iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{}", self.letter_name(*l));
        }
        out
    }

    /// Set of windows rendered as a state name: windows joined with `|`.
    pub fn cell_name<'a, I: IntoIterator<Item = &'a Window>>(&self, cell: I) -> String {
        cell.into_iter()
            .map(|w| self.window_name(w))
            .collect::<Vec<_>>()
            .join("|")
    }

    /// Parses a window written with `.` or whitespace separators.
    pub fn parse_window(&self, text: &str) -> Result<Window> {
        let parts: Vec<&str> = if text.contains('.') {
            text.split('.').collect()
        } else {
            text.split_whitespace().collect()
        };
        let mut letters = Vec::with_capacity(parts.len());
        for p in parts {
            letters.push(if p == DIAMOND_TOKEN {
                Letter::Diamond
            } else {
                Letter::Sym(self.lookup(p)?)
            });
        }
        Window::new(letters)
    }
}

/// The set of length-`n` windows of a behavior, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominoSet {
    pub length: usize,
    pub windows: BTreeSet<Window>,
}

impl DominoSet {
    pub fn contains(&self, w: &Window) -> bool {
        self.windows.contains(w)
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    /// One window per line, letters separated by spaces.
    pub fn render(&self, alphabet: &ExternalAlphabet) -> String {
        let mut out = String::new();
        for w in &self.windows {
            out.push_str(&alphabet.window_line(w));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, alphabet: &ExternalAlphabet) -> Result<DominoSet> {
        let mut windows = BTreeSet::new();
        let mut length = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let w = alphabet.parse_window(line)?;
            if *length.get_or_insert(w.len()) != w.len() {
                return Err(Error::Parse("windows of different lengths".into()));
            }
            windows.insert(w);
        }
        Ok(DominoSet {
            length: length.unwrap_or(0),
            windows,
        })
    }
}
