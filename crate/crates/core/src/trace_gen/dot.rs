//! GraphViz dot dialect for Moore machines.
//!
//! ```text
//! digraph arbiter {
//!   inputs="r_0,r_1"; outputs="g_0,g_1";   // optional, fixes AP order
//!   init [shape=point];
//!   init -> s0;                           // unlabeled entry edge
//!   s0 [label="s0|!g_0&!g_1"];            // name | output valuation
//!   s0 -> s1 [label="r_0"];               // input expression
//! }
//! ```
//!
//! Edge labels are `|`-separated disjunctions of `&`-joined literals, with
//! `1`/`true` for the tautology. Input propositions not mentioned in a
//! conjunction are unconstrained. Output propositions absent from a node label
//! are false. Without `inputs`/`outputs` attributes, propositions are ordered
//! by first appearance. Attributes other than `label`, `inputs` and `outputs`
//! are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::alphabet::{is_valid_ap_name, AlphabetError, AlphabetSpec, Side, Valuation};
use crate::machine::{MachineError, MooreMachine, Transducer};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DotError {
    #[error("{line}:{col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("state `{state}` has no transition for input {letter}")]
    Missing { state: String, letter: String },
    #[error("state `{state}` has more than one transition for input {letter}")]
    Nondeterministic { state: String, letter: String },
    #[error("expected exactly one unlabeled entry edge, found {0}")]
    Entry(usize),
    #[error("node `{0}` is used as a state but has no `name|output` label")]
    Unlabeled(String),
    #[error("unknown {side} proposition `{name}`")]
    UnknownAp { side: Side, name: String },
    #[error("bad expression `{0}`")]
    Expression(String),
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
    #[error(transparent)]
    Machine(#[from] MachineError),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    Arrow,
    Open,
    Close,
    LBracket,
    RBracket,
    Eq,
    Comma,
    Semi,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            chars: src.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, msg: impl Into<String>) -> DotError {
        DotError::Syntax {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize, usize)>, DotError> {
        let mut out = Vec::new();
        let mut at_line_start = true;
        while let Some(&c) = self.chars.peek() {
            let (line, col) = (self.line, self.col);
            if c == '\n' {
                at_line_start = true;
                self.bump();
                continue;
            }
            if c.is_whitespace() {
                self.bump();
                continue;
            }
            if c == '#' && at_line_start {
                while self.chars.peek().is_some_and(|&c| c != '\n') {
                    self.bump();
                }
                continue;
            }
            at_line_start = false;
            let tok = match c {
                '{' => {
                    self.bump();
                    Tok::Open
                }
                '}' => {
                    self.bump();
                    Tok::Close
                }
                '[' => {
                    self.bump();
                    Tok::LBracket
                }
                ']' => {
                    self.bump();
                    Tok::RBracket
                }
                '=' => {
                    self.bump();
                    Tok::Eq
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                ';' => {
                    self.bump();
                    Tok::Semi
                }
                '-' => {
                    self.bump();
                    match self.bump() {
                        Some('>') => Tok::Arrow,
                        Some('-') => return Err(self.err("undirected edges are not supported")),
                        Some(d) if d.is_ascii_digit() => Tok::Id(format!("-{d}{}", self.word())),
                        _ => return Err(self.err("expected `->`")),
                    }
                }
                '/' => {
                    self.bump();
                    match self.bump() {
                        Some('/') => {
                            while self.chars.peek().is_some_and(|&c| c != '\n') {
                                self.bump();
                            }
                        }
                        Some('*') => loop {
                            match self.bump() {
                                Some('*') if self.chars.peek() == Some(&'/') => {
                                    self.bump();
                                    break;
                                }
                                Some(_) => {}
                                None => return Err(self.err("unterminated comment")),
                            }
                        },
                        _ => return Err(self.err("unexpected `/`")),
                    }
                    continue;
                }
                '"' => {
                    self.bump();
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            Some('\\') => match self.bump() {
                                Some('"') => s.push('"'),
                                Some('\n') => {}
                                Some(other) => {
                                    s.push('\\');
                                    s.push(other);
                                }
                                None => return Err(self.err("unterminated string")),
                            },
                            Some('"') => break,
                            Some(ch) => s.push(ch),
                            None => return Err(self.err("unterminated string")),
                        }
                    }
                    Tok::Id(s)
                }
                c if c.is_alphanumeric() || c == '_' || c == '.' => Tok::Id(self.word()),
                other => return Err(self.err(format!("unexpected character `{other}`"))),
            };
            out.push((tok, line, col));
        }
        Ok(out)
    }

    fn word(&mut self) -> String {
        let mut s = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_alphanumeric() || c == '_' || c == '.' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }
}

#[derive(Default)]
struct RawGraph {
    attrs: HashMap<String, String>,
    /// node id -> label, in declaration order
    nodes: Vec<(String, Option<String>)>,
    edges: Vec<(String, String, Option<String>)>,
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn err(&self, msg: impl Into<String>) -> DotError {
        let (line, col) = self
            .toks
            .get(self.pos)
            .or(self.toks.last())
            .map_or((1, 1), |t| (t.1, t.2));
        DotError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), DotError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn id(&mut self, what: &str) -> Result<String, DotError> {
        match self.peek() {
            Some(Tok::Id(_)) => match self.next() {
                Some(Tok::Id(s)) => Ok(s),
                _ => unreachable!(),
            },
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn attr_list(&mut self) -> Result<HashMap<String, String>, DotError> {
        let mut attrs = HashMap::new();
        while self.peek() == Some(&Tok::LBracket) {
            self.pos += 1;
            while self.peek() != Some(&Tok::RBracket) {
                let key = self.id("attribute name")?;
                let value = if self.peek() == Some(&Tok::Eq) {
                    self.pos += 1;
                    self.id("attribute value")?
                } else {
                    "true".to_string()
                };
                attrs.insert(key, value);
                if matches!(self.peek(), Some(Tok::Comma | Tok::Semi)) {
                    self.pos += 1;
                }
            }
            self.pos += 1;
        }
        Ok(attrs)
    }

    fn graph(&mut self) -> Result<RawGraph, DotError> {
        let mut head = self.id("`digraph`")?;
        if head == "strict" {
            head = self.id("`digraph`")?;
        }
        if head != "digraph" {
            return Err(self.err("only `digraph` is supported"));
        }
        if matches!(self.peek(), Some(Tok::Id(_))) {
            self.pos += 1;
        }
        self.expect(Tok::Open, "`{`")?;
        let mut g = RawGraph::default();
        loop {
            match self.peek() {
                Some(Tok::Close) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Semi) => {
                    self.pos += 1;
                }
                Some(Tok::Id(_)) => self.statement(&mut g)?,
                Some(_) => return Err(self.err("expected a statement")),
                None => return Err(self.err("unexpected end of input, expected `}`")),
            }
        }
        if self.pos < self.toks.len() {
            return Err(self.err("trailing input after graph"));
        }
        Ok(g)
    }

    fn statement(&mut self, g: &mut RawGraph) -> Result<(), DotError> {
        let first = self.id("statement")?;
        match (first.as_str(), self.peek()) {
            ("subgraph", _) => Err(self.err("subgraphs are not supported")),
            ("graph", Some(Tok::LBracket)) => {
                g.attrs.extend(self.attr_list()?);
                Ok(())
            }
            ("node" | "edge", Some(Tok::LBracket)) => {
                self.attr_list()?;
                Ok(())
            }
            (_, Some(Tok::Eq)) => {
                self.pos += 1;
                let value = self.id("attribute value")?;
                g.attrs.insert(first, value);
                Ok(())
            }
            (_, Some(Tok::Arrow)) => {
                let mut chain = vec![first];
                while self.peek() == Some(&Tok::Arrow) {
                    self.pos += 1;
                    chain.push(self.id("edge target")?);
                }
                let attrs = self.attr_list()?;
                let label = attrs.get("label").cloned();
                for pair in chain.windows(2) {
                    g.edges
                        .push((pair[0].clone(), pair[1].clone(), label.clone()));
                }
                for id in chain {
                    declare(g, id, None);
                }
                Ok(())
            }
            _ => {
                let attrs = self.attr_list()?;
                declare(g, first, attrs.get("label").cloned());
                Ok(())
            }
        }
    }
}

fn declare(g: &mut RawGraph, id: String, label: Option<String>) {
    match g.nodes.iter_mut().find(|(n, _)| *n == id) {
        Some(entry) => {
            if label.is_some() {
                entry.1 = label;
            }
        }
        None => g.nodes.push((id, label)),
    }
}

/// One conjunction: `(mask, value)` over proposition positions.
type Cube = (u32, u32);

fn parse_names(list: &str) -> Vec<String> {
    list.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// Splits an expression into conjunctions of `(name, positive)` literals.
fn parse_expression(expr: &str) -> Result<Vec<Vec<(String, bool)>>, DotError> {
    let bad = || DotError::Expression(expr.to_string());
    let mut out = Vec::new();
    for disjunct in expr.split('|') {
        let mut lits = Vec::new();
        let d = disjunct
            .trim()
            .trim_start_matches('(')
            .trim_end_matches(')')
            .trim();
        if d == "1" || d == "true" {
            out.push(lits);
            continue;
        }
        if d == "0" || d == "false" {
            continue;
        }
        for lit in d.split('&') {
            let lit = lit.trim();
            let (name, positive) = match lit.strip_prefix('!') {
                Some(rest) => (rest.trim(), false),
                None => (lit, true),
            };
            if !is_valid_ap_name(name) {
                return Err(bad());
            }
            lits.push((name.to_string(), positive));
        }
        out.push(lits);
    }
    Ok(out)
}

fn intern(names: &mut Vec<String>, name: &str) -> usize {
    names.iter().position(|n| n == name).unwrap_or_else(|| {
        names.push(name.to_string());
        names.len() - 1
    })
}

/// Parses the documented dot dialect into a total, deterministic machine.
pub fn parse_dot(text: &str) -> Result<MooreMachine, DotError> {
    let toks = Lexer::new(text).tokens()?;
    let g = Parser { toks, pos: 0 }.graph()?;

    let entries: Vec<&(String, String, Option<String>)> = g
        .edges
        .iter()
        .filter(|e| e.2.as_deref().is_none_or(|l| l.trim().is_empty()))
        .collect();
    if entries.len() != 1 {
        return Err(DotError::Entry(entries.len()));
    }
    let start_node = entries[0].0.clone();
    let initial_id = entries[0].1.clone();

    // states: labeled nodes with `name|output`, in source order
    let mut states = Vec::new();
    let mut state_outputs = Vec::new();
    for (id, label) in &g.nodes {
        if *id == start_node {
            continue;
        }
        match label.as_deref().and_then(|l| l.split_once('|')) {
            Some((_, out)) => {
                states.push(id.clone());
                state_outputs.push(out.trim().to_string());
            }
            None => return Err(DotError::Unlabeled(id.clone())),
        }
    }

    let declared_inputs = g.attrs.get("inputs").map(|s| parse_names(s));
    let declared_outputs = g.attrs.get("outputs").map(|s| parse_names(s));
    let mut input_names = declared_inputs.clone().unwrap_or_default();
    let mut output_names = declared_outputs.clone().unwrap_or_default();

    let mut out_lits = Vec::new();
    for expr in &state_outputs {
        let mut lits = Vec::new();
        if !expr.is_empty() && expr != "0" && expr != "false" {
            let conj = parse_expression(expr)?;
            if conj.len() != 1 {
                return Err(DotError::Expression(expr.clone()));
            }
            for (name, positive) in &conj[0] {
                let idx = if declared_outputs.is_some() {
                    output_names.iter().position(|n| n == name).ok_or_else(|| {
                        DotError::UnknownAp {
                            side: Side::Output,
                            name: name.clone(),
                        }
                    })?
                } else {
                    intern(&mut output_names, name)
                };
                lits.push((idx, *positive));
            }
        }
        out_lits.push(lits);
    }

    let mut edges = Vec::new();
    for (src, dst, label) in &g.edges {
        if *src == start_node {
            continue;
        }
        let label = label.as_deref().unwrap_or("");
        let mut cubes = Vec::new();
        for conj in parse_expression(label)? {
            let mut cube: Cube = (0, 0);
            for (name, positive) in conj {
                let idx = if declared_inputs.is_some() {
                    input_names
                        .iter()
                        .position(|n| *n == name)
                        .ok_or(DotError::UnknownAp {
                            side: Side::Input,
                            name,
                        })?
                } else {
                    intern(&mut input_names, &name)
                };
                if idx >= 32 {
                    return Err(AlphabetError::TooWide {
                        side: Side::Input,
                        count: idx + 1,
                    }
                    .into());
                }
                cube.0 |= 1 << idx;
                if positive {
                    cube.1 |= 1 << idx;
                }
            }
            cubes.push(cube);
        }
        edges.push((src.clone(), dst.clone(), cubes));
    }

    let ab = AlphabetSpec::new(input_names, output_names)?;
    let letters = ab.num_input_letters();
    let index_of = |id: &str| states.iter().position(|s| s == id);
    let initial = index_of(&initial_id).ok_or_else(|| DotError::Unlabeled(initial_id.clone()))?;

    let mut table: Vec<Option<usize>> = vec![None; states.len() * letters];
    for (src, dst, cubes) in &edges {
        let s = index_of(src).ok_or_else(|| DotError::Unlabeled(src.clone()))?;
        let t = index_of(dst).ok_or_else(|| DotError::Unlabeled(dst.clone()))?;
        let mut hit = vec![false; letters];
        for &(mask, value) in cubes {
            for (a, h) in hit.iter_mut().enumerate() {
                if (a as u32) & mask == value {
                    *h = true;
                }
            }
        }
        for (a, _) in hit.iter().enumerate().filter(|(_, h)| **h) {
            let slot = &mut table[s * letters + a];
            if slot.is_some() {
                return Err(DotError::Nondeterministic {
                    state: states[s].clone(),
                    letter: ab.format_valuation(Side::Input, ab.input_letter(a), "&"),
                });
            }
            *slot = Some(t);
        }
    }
    let mut transitions = Vec::with_capacity(table.len());
    for (i, slot) in table.iter().enumerate() {
        match slot {
            Some(t) => transitions.push(*t),
            None => {
                return Err(DotError::Missing {
                    state: states[i / letters].clone(),
                    letter: ab.format_valuation(Side::Input, ab.input_letter(i % letters), "&"),
                })
            }
        }
    }
    let width = ab.output_width();
    let outputs = out_lits
        .iter()
        .map(|lits| {
            let mut v = Valuation::zero(width);
            for &(i, positive) in lits {
                v = v.with(i, positive);
            }
            v
        })
        .collect();
    Ok(MooreMachine::new(
        ab,
        states,
        initial,
        transitions,
        outputs,
    )?)
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\\\""))
}

/// Writes a machine in the dialect accepted by [`parse_dot`]. Edges sharing a
/// source and target are merged into one disjunctive label. States are
/// declared before any edge so that parsing restores their order.
pub fn write_dot(m: &MooreMachine, name: &str) -> String {
    let ab = m.alphabet();
    let mut s = String::new();
    let _ = writeln!(s, "digraph {} {{", quote(name));
    let _ = writeln!(s, "  inputs={};", quote(&ab.input_aps().join(",")));
    let _ = writeln!(s, "  outputs={};", quote(&ab.output_aps().join(",")));
    let _ = writeln!(s, "  __start [shape=point, label=\"\"];");
    for (i, id) in m.states().iter().enumerate() {
        let out = ab.format_valuation(Side::Output, m.output(i), "&");
        let _ = writeln!(
            s,
            "  {} [label={}];",
            quote(id),
            quote(&format!("{id}|{out}"))
        );
    }
    let _ = writeln!(s, "  __start -> {};", quote(&m.states()[m.initial()]));
    for (i, id) in m.states().iter().enumerate() {
        let mut by_target: Vec<(usize, Vec<String>)> = Vec::new();
        for a in ab.input_letters() {
            let t = m.successor(i, a.index());
            let lit = ab.format_valuation(Side::Input, a, "&");
            match by_target.iter_mut().find(|(x, _)| *x == t) {
                Some((_, v)) => v.push(lit),
                None => by_target.push((t, vec![lit])),
            }
        }
        for (t, lits) in by_target {
            let _ = writeln!(
                s,
                "  {} -> {} [label={}];",
                quote(id),
                quote(&m.states()[t]),
                quote(&lits.join(" | "))
            );
        }
    }
    s.push_str("}\n");
    s
}
