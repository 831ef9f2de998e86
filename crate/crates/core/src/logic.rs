//! Temporally sound properties as per-run cut vectors, modal formula
//! evaluation over frames, and write/read-stability.
//!
//! Because T is a disjoint union of finite chains, the upward-closed
//! world sets are exactly the per-run suffixes, so quantifying over
//! "all temporally sound formulae" becomes a finite sweep over cut
//! vectors.

use crate::bitset::Mask;
use crate::frame::{FrameError, SecurityFrame};
use crate::lang::{eval_expr, Expr};
use crate::value::Value;
use std::fmt;

pub const DEFAULT_EXHAUSTIVE_BOUND: u128 = 10_000_000;

/// One per-run suffix index. `At(c)` keeps the worlds at depth >= c (a
/// diverging run's limit world is included by any `At`); `Empty` keeps
/// none. For a halted run of n configurations, `At(n)` also denotes the
/// empty suffix; the enumeration keeps both representations so each run
/// contributes exactly len+2 choices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cut {
    At(u32),
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cuts(pub Vec<Cut>);

impl fmt::Display for Cuts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            match c {
                Cut::At(c) => write!(f, "{c}")?,
                Cut::Empty => write!(f, "-")?,
            }
        }
        Ok(())
    }
}

impl Cuts {
    pub fn empty(frame: &SecurityFrame) -> Cuts {
        Cuts(vec![Cut::Empty; frame.runs.len()])
    }

    pub fn full(frame: &SecurityFrame) -> Cuts {
        Cuts(vec![Cut::At(0); frame.runs.len()])
    }

    /// Does the cut select no world of run `r`?
    pub fn is_empty_on(&self, frame: &SecurityFrame, r: usize) -> bool {
        match self.0[r] {
            Cut::Empty => true,
            Cut::At(c) => !frame.runs[r].diverging && c as usize >= frame.runs[r].stores.len(),
        }
    }

    /// Runs whose suffix is nonempty (the ◇-closure of the set is the
    /// union of exactly these runs).
    pub fn live_runs(&self, frame: &SecurityFrame) -> Vec<bool> {
        (0..frame.runs.len())
            .map(|r| !self.is_empty_on(frame, r))
            .collect()
    }

    pub fn mask(&self, frame: &SecurityFrame) -> Mask {
        let mut out = frame.empty_mask();
        for (r, cut) in self.0.iter().enumerate() {
            let (a, b) = frame.span(r);
            let run = &frame.runs[r];
            let nf = run.stores.len();
            match *cut {
                Cut::Empty => {}
                Cut::At(c) => {
                    let c = c as usize;
                    if run.diverging {
                        // finite worlds from depth c, plus the limit world
                        out.set_range(a + c.min(nf), a + nf);
                        out.set(b - 1);
                    } else {
                        out.set_range(a + c.min(nf), a + nf);
                    }
                }
            }
        }
        out
    }

    /// Worlds of live runs (= the extension of ◇S).
    pub fn run_closure(&self, frame: &SecurityFrame) -> Mask {
        let mut out = frame.empty_mask();
        for r in 0..frame.runs.len() {
            if !self.is_empty_on(frame, r) {
                let (a, b) = frame.span(r);
                out.set_range(a, b);
            }
        }
        out
    }

    /// Canonical cut vector denoting a given upward-closed world set.
    pub fn from_mask(frame: &SecurityFrame, mask: &Mask) -> Cuts {
        let mut cuts = Vec::with_capacity(frame.runs.len());
        for r in 0..frame.runs.len() {
            let (a, b) = frame.span(r);
            match mask.first_set_in(a, b) {
                None => cuts.push(Cut::Empty),
                Some(first) => cuts.push(Cut::At((first - a) as u32)),
            }
        }
        Cuts(cuts)
    }
}

/// Is the world set upward-closed along T? (Sanity check used by tests.)
pub fn is_temporally_sound(frame: &SecurityFrame, mask: &Mask) -> bool {
    frame.up_t(mask) == *mask
}

// ---------------------------------------------------------------------
// enumeration

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    /// At most k runs may take a cut strictly between 0 and none.
    Runset(u32),
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exhaustive => write!(f, "exhaustive"),
            Mode::Runset(k) => write!(f, "runset:{k}"),
        }
    }
}

/// Number of cut vectors the exhaustive mode would enumerate:
/// the product of (len_r + 2).
pub fn exhaustive_count(frame: &SecurityFrame) -> u128 {
    frame
        .runs
        .iter()
        .map(|r| r.stores.len() as u128 + 2)
        .product()
}

fn decode(state: &[u32], limits: &[u32]) -> Cuts {
    Cuts(
        state
            .iter()
            .zip(limits)
            .map(|(&v, &lim)| if v == lim { Cut::Empty } else { Cut::At(v) })
            .collect(),
    )
}

fn admissible(state: &[u32], limits: &[u32], mode: Mode) -> bool {
    match mode {
        Mode::Exhaustive => true,
        Mode::Runset(k) => {
            state
                .iter()
                .zip(limits)
                .filter(|(&v, &lim)| v != 0 && v != lim)
                .count()
                <= k as usize
        }
    }
}

/// Streaming enumeration of cut vectors in lexicographic order
/// (0 < 1 < ... < len < none per run), filtered by mode.
pub struct CutStream {
    /// encoded odometer: value v in 0..=nf encodes At(v), nf+1 encodes Empty
    state: Option<Vec<u32>>,
    limits: Vec<u32>,
    mode: Mode,
}

impl CutStream {
    pub fn new(frame: &SecurityFrame, mode: Mode) -> CutStream {
        let limits: Vec<u32> = frame
            .runs
            .iter()
            .map(|r| r.stores.len() as u32 + 1)
            .collect();
        CutStream {
            state: Some(vec![0; limits.len()]),
            limits,
            mode,
        }
    }

    /// Collect up to `chunk` vectors; returns an empty vector when done.
    pub fn next_chunk(&mut self, chunk: usize) -> Vec<Cuts> {
        let mut out = Vec::new();
        while out.len() < chunk {
            let Some(state) = &mut self.state else { break };
            if admissible(state, &self.limits, self.mode) {
                out.push(decode(state, &self.limits));
            }
            // advance odometer (last run fastest)
            let mut i = state.len();
            let mut exhausted = false;
            loop {
                if i == 0 {
                    exhausted = true;
                    break;
                }
                i -= 1;
                if state[i] < self.limits[i] {
                    state[i] += 1;
                    for v in state[i + 1..].iter_mut() {
                        *v = 0;
                    }
                    break;
                } else {
                    state[i] = 0;
                }
            }
            if exhausted {
                self.state = None;
                break;
            }
        }
        out
    }
}

// ---------------------------------------------------------------------
// atom extensions

/// Extension of a boolean combination over time-0 values: full runs
/// whose initial store satisfies it.
pub fn ext_time0(frame: &SecurityFrame, expr: &Expr) -> Result<Cuts, FrameError> {
    let mut cuts = Vec::with_capacity(frame.runs.len());
    for run in &frame.runs {
        let v = eval_expr(expr, &run.initial)?;
        let truthy = v.truthy().ok_or(crate::lang::LangError::TypeError {
            op: "time-0 predicate".into(),
            value: v.to_string(),
        })?;
        cuts.push(if truthy { Cut::At(0) } else { Cut::Empty });
    }
    Ok(Cuts(cuts))
}

/// Extension of the atom v@tau=value.
pub fn ext_atom(
    frame: &SecurityFrame,
    var: &str,
    tau: usize,
    value: &Value,
) -> Result<Cuts, FrameError> {
    let mut cuts = Vec::with_capacity(frame.runs.len());
    for (r, run) in frame.runs.iter().enumerate() {
        if tau > run.max_depth() {
            if run.diverging {
                return Err(FrameError::UnsupportedAtom {
                    var: var.to_string(),
                    tau,
                    run: r,
                });
            }
            cuts.push(Cut::Empty);
            continue;
        }
        if run.stores[tau].get(var) == Some(value) {
            cuts.push(Cut::At(tau as u32));
        } else {
            cuts.push(Cut::Empty);
        }
    }
    Ok(Cuts(cuts))
}

/// Extension of ⇓: each halting run's halted suffix.
pub fn ext_halted(frame: &SecurityFrame) -> Cuts {
    Cuts(
        frame
            .runs
            .iter()
            .map(|run| {
                if run.halts {
                    Cut::At(run.max_depth() as u32)
                } else {
                    Cut::Empty
                }
            })
            .collect(),
    )
}

// ---------------------------------------------------------------------
// stability

/// A property is write-stable for an agent when the union of runs
/// meeting it is closed under W^C steps.
pub fn is_write_stable(frame: &SecurityFrame, agent_idx: usize, cuts: &Cuts) -> bool {
    let live = cuts.live_runs(frame);
    let wc = &frame.agent_rels(agent_idx).wc;
    for class in &wc.classes {
        let mut it = class.iter_set();
        let Some(first) = it.next() else { continue };
        let first_live = live[frame.world(first).run];
        for w in it {
            if live[frame.world(w).run] != first_live {
                return false;
            }
        }
    }
    true
}

/// Read-stability: the same closure under K^C steps.
pub fn is_read_stable(frame: &SecurityFrame, agent_idx: usize, cuts: &Cuts) -> bool {
    let live = cuts.live_runs(frame);
    let kc = &frame.agent_rels(agent_idx).kc;
    for class in &kc.classes {
        let mut it = class.iter_set();
        let Some(first) = it.next() else { continue };
        let first_live = live[frame.world(first).run];
        for w in it {
            if live[frame.world(w).run] != first_live {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------
// rendering dictionary

#[derive(Clone, Debug)]
pub struct DictEntry {
    pub cuts: Cuts,
    pub label: String,
}

fn initial_values(frame: &SecurityFrame, var: &str) -> Vec<Value> {
    let mut vals: Vec<Value> = frame
        .runs
        .iter()
        .filter_map(|r| r.initial.get(var).cloned())
        .collect();
    vals.sort();
    vals.dedup();
    vals
}

fn time0_eq(var: &str, val: &Value) -> Expr {
    Expr::bin(
        crate::lang::BinOp::Eq,
        Expr::Var(var.to_string()),
        Expr::Lit(val.clone()),
    )
}

/// Human-oriented witness candidates: single time-0 atoms, then
/// conjunctions, then disjunctions of two of them. All are RUNSET(0)
/// vectors, so trying them first only reorders the search.
pub fn dictionary(frame: &SecurityFrame) -> Vec<DictEntry> {
    let mut out = Vec::new();
    let mut atoms: Vec<(String, Expr)> = Vec::new();
    for var in &frame.vars {
        for val in initial_values(frame, var) {
            atoms.push((format!("{var}@0={val}"), time0_eq(var, &val)));
        }
    }
    for (label, expr) in &atoms {
        if let Ok(cuts) = ext_time0(frame, expr) {
            out.push(DictEntry {
                cuts,
                label: label.clone(),
            });
        }
    }
    let combos: [(&str, crate::lang::BinOp); 2] = [
        ("∧", crate::lang::BinOp::And),
        ("∨", crate::lang::BinOp::Or),
    ];
    for (sym, op) in combos {
        for i in 0..atoms.len() {
            for j in 0..atoms.len() {
                if j <= i {
                    continue;
                }
                let same_var = atoms[i].0.split('@').next() == atoms[j].0.split('@').next();
                if same_var && op == crate::lang::BinOp::And {
                    continue; // contradiction or duplicate
                }
                let expr = Expr::bin(op, atoms[i].1.clone(), atoms[j].1.clone());
                if let Ok(cuts) = ext_time0(frame, &expr) {
                    out.push(DictEntry {
                        cuts,
                        label: format!("{} {sym} {}", atoms[i].0, atoms[j].0),
                    });
                }
            }
        }
    }
    out
}

/// Render a cut vector: dictionary match by extension, else a
/// suffix-of-run description.
pub fn render_cuts(frame: &SecurityFrame, cuts: &Cuts) -> String {
    let mask = cuts.mask(frame);
    if mask.is_empty() {
        return "false".into();
    }
    if mask == frame.full_mask() {
        return "true".into();
    }
    for entry in dictionary(frame) {
        if entry.cuts.mask(frame) == mask {
            return entry.label;
        }
    }
    if ext_halted(frame).mask(frame) == mask {
        return "halted".into();
    }
    // fall back to suffixes of runs, labelled by initial store
    let mut parts = Vec::new();
    for (r, cut) in cuts.0.iter().enumerate() {
        if cuts.is_empty_on(frame, r) {
            continue;
        }
        let label = crate::frame::store_label(&frame.vars, &frame.runs[r].initial);
        match cut {
            Cut::At(0) => parts.push(format!("run({label})")),
            Cut::At(c) => parts.push(format!("suffix({label},{c})")),
            Cut::Empty => {}
        }
    }
    parts.join(" ∨ ")
}

// ---------------------------------------------------------------------
// formulas

#[derive(Clone, Debug, PartialEq)]
pub enum RelName {
    T,
    Kc(String),
    Kp(String),
    Wc(String),
    Wp(String),
    Count(String),
}

impl fmt::Display for RelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelName::T => write!(f, "T"),
            RelName::Kc(a) => write!(f, "KC[{a}]"),
            RelName::Kp(a) => write!(f, "KP[{a}]"),
            RelName::Wc(a) => write!(f, "WC[{a}]"),
            RelName::Wp(a) => write!(f, "WP[{a}]"),
            RelName::Count(a) => write!(f, "COUNT[{a}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    SetAtom(Cuts),
    /// Time-0 predicate, resolved against the frame at evaluation time.
    Time0(Expr),
    At {
        var: String,
        tau: usize,
        value: Value,
    },
    Halted,
    Lit(bool),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Box_(RelName, Box<Formula>),
    Dia(RelName, Box<Formula>),
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn box_(rel: RelName, f: Formula) -> Formula {
        Formula::Box_(rel, Box::new(f))
    }

    pub fn dia(rel: RelName, f: Formula) -> Formula {
        Formula::Dia(rel, Box::new(f))
    }

    pub fn always(f: Formula) -> Formula {
        Formula::box_(RelName::T, f)
    }

    pub fn eventually(f: Formula) -> Formula {
        Formula::dia(RelName::T, f)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::SetAtom(cuts) => write!(f, "set[{cuts}]"),
            Formula::Time0(e) => write!(f, "set({e})"),
            Formula::At { var, tau, value } => write!(f, "{var}@{tau}={value}"),
            Formula::Halted => write!(f, "halted"),
            Formula::Lit(b) => write!(f, "{b}"),
            Formula::Not(x) => write!(f, "¬{x}"),
            Formula::And(a, b) => write!(f, "({a} ∧ {b})"),
            Formula::Or(a, b) => write!(f, "({a} ∨ {b})"),
            Formula::Implies(a, b) => write!(f, "({a} ⇒ {b})"),
            Formula::Box_(RelName::T, x) => write!(f, "□{x}"),
            Formula::Dia(RelName::T, x) => write!(f, "◇{x}"),
            Formula::Box_(r, x) => write!(f, "[{r}]{x}"),
            Formula::Dia(r, x) => write!(f, "⟨{r}⟩{x}"),
        }
    }
}

fn rel_box(frame: &SecurityFrame, rel: &RelName, x: &Mask) -> Result<Mask, FrameError> {
    Ok(match rel {
        RelName::T => frame.box_t(x),
        RelName::Kc(a) => frame.rels(a)?.kc.box_(x),
        RelName::Kp(a) => frame.rels(a)?.kp.box_(x),
        RelName::Wc(a) => frame.rels(a)?.wc.box_(x),
        RelName::Wp(a) => frame.rels(a)?.wp.box_(x),
        RelName::Count(a) => frame.rels(a)?.cnt.box_(x),
    })
}

fn rel_dia(frame: &SecurityFrame, rel: &RelName, x: &Mask) -> Result<Mask, FrameError> {
    Ok(match rel {
        RelName::T => frame.dia_t(x),
        RelName::Kc(a) => frame.rels(a)?.kc.dia_(x),
        RelName::Kp(a) => frame.rels(a)?.kp.dia_(x),
        RelName::Wc(a) => frame.rels(a)?.wc.dia_(x),
        RelName::Wp(a) => frame.rels(a)?.wp.dia_(x),
        RelName::Count(a) => frame.rels(a)?.cnt.dia_(x),
    })
}

/// Evaluate a formula over every world at once.
pub fn eval_mask(frame: &SecurityFrame, formula: &Formula) -> Result<Mask, FrameError> {
    Ok(match formula {
        Formula::SetAtom(cuts) => cuts.mask(frame),
        Formula::Time0(e) => ext_time0(frame, e)?.mask(frame),
        Formula::At { var, tau, value } => {
            let mut out = frame.empty_mask();
            for w in 0..frame.n_worlds() {
                if frame.atom(w, var, *tau, value)? {
                    out.set(w);
                }
            }
            out
        }
        Formula::Halted => frame.halted_mask().clone(),
        Formula::Lit(true) => frame.full_mask(),
        Formula::Lit(false) => frame.empty_mask(),
        Formula::Not(x) => eval_mask(frame, x)?.not(),
        Formula::And(a, b) => eval_mask(frame, a)?.and(&eval_mask(frame, b)?),
        Formula::Or(a, b) => eval_mask(frame, a)?.or(&eval_mask(frame, b)?),
        Formula::Implies(a, b) => eval_mask(frame, a)?.not().or(&eval_mask(frame, b)?),
        Formula::Box_(rel, x) => rel_box(frame, rel, &eval_mask(frame, x)?)?,
        Formula::Dia(rel, x) => rel_dia(frame, rel, &eval_mask(frame, x)?)?,
    })
}

/// Standard possible-world semantics at one world.
pub fn eval(frame: &SecurityFrame, world: usize, formula: &Formula) -> Result<bool, FrameError> {
    Ok(eval_mask(frame, formula)?.get(world))
}

// ---------------------------------------------------------------------
// CLI formula syntax

pub fn parse_formula(src: &str) -> Result<Formula, String> {
    let mut p = FormulaParser {
        src: src.trim(),
        pos: 0,
    };
    let f = p.implies()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(format!("trailing input at byte {}", p.pos));
    }
    Ok(f)
}

struct FormulaParser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> FormulaParser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if let Some(rest) = self.rest().strip_prefix(token) {
            // keywords must not run into identifiers
            let boundary_ok = !token
                .chars()
                .last()
                .map(|c| c.is_alphanumeric())
                .unwrap_or(false)
                || !rest.chars().next().map(|c| c.is_alphanumeric() || c == '_').unwrap_or(false);
            if boundary_ok {
                self.pos += token.len();
                return true;
            }
        }
        false
    }

    fn implies(&mut self) -> Result<Formula, String> {
        let lhs = self.or_f()?;
        if self.eat("->") || self.eat("=>") {
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or_f(&mut self) -> Result<Formula, String> {
        let mut lhs = self.and_f()?;
        while self.eat("or") || self.eat("||") {
            let rhs = self.and_f()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_f(&mut self) -> Result<Formula, String> {
        let mut lhs = self.unary()?;
        while self.eat("and") || self.eat("&&") {
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, String> {
        if self.eat("not") || self.eat("!") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.eat("always") {
            return Ok(Formula::always(self.unary()?));
        }
        if self.eat("eventually") {
            return Ok(Formula::eventually(self.unary()?));
        }
        if self.eat("box") {
            let rel = self.rel()?;
            return Ok(Formula::box_(rel, self.unary()?));
        }
        if self.eat("dia") {
            let rel = self.rel()?;
            return Ok(Formula::dia(rel, self.unary()?));
        }
        self.atom()
    }

    fn rel(&mut self) -> Result<RelName, String> {
        if !self.eat("(") {
            return Err("expected '(' after modality".into());
        }
        self.skip_ws();
        let name: String = self
            .rest()
            .chars()
            .take_while(|c| c.is_ascii_alphabetic())
            .collect();
        self.pos += name.len();
        let rel = match name.to_ascii_uppercase().as_str() {
            "T" => RelName::T,
            kind @ ("KC" | "KP" | "WC" | "WP" | "COUNT") => {
                if !self.eat("[") {
                    return Err(format!("expected '[agent]' after {kind}"));
                }
                self.skip_ws();
                let agent: String = self
                    .rest()
                    .chars()
                    .take_while(|c| c.is_alphanumeric() || *c == '_')
                    .collect();
                self.pos += agent.len();
                if !self.eat("]") {
                    return Err("expected ']'".into());
                }
                match kind {
                    "KC" => RelName::Kc(agent),
                    "KP" => RelName::Kp(agent),
                    "WC" => RelName::Wc(agent),
                    "WP" => RelName::Wp(agent),
                    _ => RelName::Count(agent),
                }
            }
            other => return Err(format!("unknown relation '{other}'")),
        };
        if !self.eat(")") {
            return Err("expected ')'".into());
        }
        Ok(rel)
    }

    fn atom(&mut self) -> Result<Formula, String> {
        if self.eat("(") {
            let f = self.implies()?;
            if !self.eat(")") {
                return Err("expected ')'".into());
            }
            return Ok(f);
        }
        if self.eat("halted") {
            return Ok(Formula::Halted);
        }
        if self.eat("true") {
            return Ok(Formula::Lit(true));
        }
        if self.eat("false") {
            return Ok(Formula::Lit(false));
        }
        if self.eat("set") {
            if !self.eat("(") {
                return Err("expected '(' after set".into());
            }
            let start = self.pos;
            let mut depth = 1usize;
            for (off, c) in self.rest().char_indices() {
                match c {
                    '(' => depth += 1,
                    ')' => {
                        depth -= 1;
                        if depth == 0 {
                            let inner = &self.src[start..start + off];
                            self.pos = start + off + 1;
                            let stmt = crate::lang::parse(&format!("__q := {inner}"))
                                .map_err(|e| e.to_string())?;
                            let expr = match &*stmt {
                                crate::lang::Stmt::Assign(_, e) => e.clone(),
                                _ => unreachable!(),
                            };
                            return Ok(Formula::Time0(expr));
                        }
                    }
                    _ => {}
                }
            }
            return Err("unterminated set(...)".into());
        }
        // v@tau=value
        self.skip_ws();
        let var: String = self
            .rest()
            .chars()
            .take_while(|c| c.is_alphanumeric() || *c == '_')
            .collect();
        if var.is_empty() {
            return Err(format!("expected an atom at byte {}", self.pos));
        }
        self.pos += var.len();
        if !self.eat("@") {
            return Err(format!("expected '@' after variable '{var}'"));
        }
        self.skip_ws();
        let tau_str: String = self
            .rest()
            .chars()
            .take_while(|c| c.is_ascii_digit())
            .collect();
        if tau_str.is_empty() {
            return Err("expected a step index".into());
        }
        self.pos += tau_str.len();
        if !self.eat("=") {
            return Err("expected '=' in atom".into());
        }
        self.skip_ws();
        let neg = self.eat("-");
        let val_str: String = self
            .rest()
            .chars()
            .take_while(|c| c.is_ascii_digit())
            .collect();
        if val_str.is_empty() {
            return Err("expected an integer value".into());
        }
        self.pos += val_str.len();
        let mut value: i64 = val_str.parse().map_err(|e| format!("bad value: {e}"))?;
        if neg {
            value = -value;
        }
        Ok(Formula::At {
            var,
            tau: tau_str.parse().map_err(|e| format!("bad step: {e}"))?,
            value: Value::Int(value),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{build_frame, Depth};
    use crate::lang::Program;
    use crate::policy::SecurityContext;

    fn prog(src: &str, decls: &[(&str, &[i64])]) -> Program {
        let declared: Vec<(String, Vec<Value>)> = decls
            .iter()
            .map(|(v, d)| (v.to_string(), d.iter().map(|n| Value::Int(*n)).collect()))
            .collect();
        Program::new(src, &declared).unwrap()
    }

    fn copy_frame() -> SecurityFrame {
        let p = prog("b := a", &[("a", &[0, 1]), ("b", &[0])]);
        let ctx = SecurityContext::new(&["A"], &[])
            .with_read("A", &["b"])
            .with_flags(true, false);
        build_frame(&p, &ctx, 100).unwrap()
    }

    fn fig1_ctx() -> SecurityContext {
        SecurityContext::new(&["A"], &[])
            .with_read("A", &["p", "u"])
            .with_write("A", &["u"])
            .with_flags(true, true)
    }

    fn fig1_frame(src: &str) -> SecurityFrame {
        let p = prog(src, &[("u", &[0, 1]), ("s", &[0, 1]), ("p", &[0])]);
        build_frame(&p, &fig1_ctx(), 1000).unwrap()
    }

    #[test]
    fn exhaustive_enumeration_counts() {
        let f = copy_frame(); // two runs of two configurations
        assert_eq!(exhaustive_count(&f), 16);
        let mut stream = CutStream::new(&f, Mode::Exhaustive);
        let all = stream.next_chunk(1000);
        assert_eq!(all.len(), 16);
        // every denoted set is temporally sound
        for cuts in &all {
            assert!(is_temporally_sound(&f, &cuts.mask(&f)));
        }
    }

    #[test]
    fn runset_zero_is_all_or_nothing_per_run() {
        let f = copy_frame();
        let mut stream = CutStream::new(&f, Mode::Runset(0));
        let all = stream.next_chunk(1000);
        assert_eq!(all.len(), 4); // 2^2
    }

    #[test]
    fn runset_families_nest() {
        let f = fig1_frame("if u = 1 then p := s");
        let collect = |mode| {
            let mut s = CutStream::new(&f, mode);
            let mut v = Vec::new();
            loop {
                let chunk = s.next_chunk(512);
                if chunk.is_empty() {
                    break;
                }
                v.extend(chunk);
            }
            v
        };
        let r0 = collect(Mode::Runset(0)).len();
        let r1 = collect(Mode::Runset(1)).len();
        let all = collect(Mode::Exhaustive).len();
        assert!(r0 < r1 && r1 < all);
        assert_eq!(all as u128, exhaustive_count(&f));
    }

    #[test]
    fn atom_extension_selects_full_runs_at_time_zero() {
        let f = fig1_frame("if u = 1 then p := s");
        let cuts = ext_atom(&f, "s", 0, &Value::Int(0)).unwrap();
        // runs ordered by (u,s): 00, 01, 10, 11 — s=0 selects runs 0 and 2
        assert_eq!(
            cuts.0,
            vec![Cut::At(0), Cut::Empty, Cut::At(0), Cut::Empty]
        );
        // a RUNSET(0) vector by construction
        assert!(cuts.0.iter().all(|c| matches!(c, Cut::At(0) | Cut::Empty)));
    }

    #[test]
    fn halted_extension_is_the_halt_suffix() {
        let p = prog("p := s; loop", &[("p", &[0]), ("s", &[0, 1])]);
        let ctx = SecurityContext::new(&["A"], &[]).with_read("A", &["p"]);
        let f = build_frame(&p, &ctx, 1000).unwrap();
        let cuts = ext_halted(&f);
        assert!(cuts.0.iter().all(|c| *c == Cut::Empty));

        let f2 = copy_frame();
        let cuts2 = ext_halted(&f2);
        assert_eq!(cuts2.0, vec![Cut::At(1), Cut::At(1)]);
        assert!(is_temporally_sound(&f2, &cuts2.mask(&f2)));
    }

    #[test]
    fn eval_knows_the_run_after_the_copy() {
        let f = copy_frame();
        // after b:=a with a=0 the agent knows it is in the a=0 run
        let run0 = Cuts(vec![Cut::At(0), Cut::Empty]);
        let w01 = f.world_index(0, Depth::At(1)).unwrap();
        let know = Formula::box_(RelName::Kc("A".into()), Formula::SetAtom(run0));
        assert!(eval(&f, w01, &know).unwrap());
        let w00 = f.world_index(0, Depth::At(0)).unwrap();
        assert!(!eval(&f, w00, &know).unwrap());
        // reflexivity: something is always considered possible
        let all = Formula::SetAtom(Cuts::full(&f));
        for w in 0..f.n_worlds() {
            assert!(eval(&f, w, &Formula::dia(RelName::Kc("A".into()), all.clone())).unwrap());
        }
    }

    #[test]
    fn fig1_attack_step_reaches_knowledge() {
        // at world 000, a W^C step reaches 100 where the agent will
        // eventually know s@0=0
        let f = fig1_frame("if u = 1 then p := s");
        let s0 = Formula::Time0(time0_eq("s", &Value::Int(0)));
        let phi = Formula::dia(
            RelName::Wc("A".into()),
            Formula::eventually(Formula::box_(RelName::Kc("A".into()), s0)),
        );
        let w000 = f.world_index(0, Depth::At(0)).unwrap();
        assert!(eval(&f, w000, &phi).unwrap());
    }

    #[test]
    fn box_dia_duality() {
        let f = fig1_frame("if u = 1 then p := s");
        let rels = [
            RelName::T,
            RelName::Kc("A".into()),
            RelName::Kp("A".into()),
            RelName::Wc("A".into()),
            RelName::Wp("A".into()),
            RelName::Count("A".into()),
        ];
        let mut stream = CutStream::new(&f, Mode::Runset(1));
        for cuts in stream.next_chunk(64) {
            for rel in &rels {
                let inner = Formula::SetAtom(cuts.clone());
                let lhs = eval_mask(&f, &Formula::box_(rel.clone(), inner.clone())).unwrap();
                let rhs = eval_mask(
                    &f,
                    &Formula::not(Formula::dia(rel.clone(), Formula::not(inner))),
                )
                .unwrap();
                assert_eq!(lhs, rhs, "duality fails for {rel}");
            }
        }
    }

    #[test]
    fn write_stability_examples() {
        let f = fig1_frame("if u = 1 then p := s");
        let s0 = ext_time0(&f, &time0_eq("s", &Value::Int(0))).unwrap();
        assert!(is_write_stable(&f, 0, &s0));
        // (u@0=1 ∧ s@0=0) is the cautionary non-write-stable example
        let u1s0 = ext_time0(
            &f,
            &Expr::bin(
                crate::lang::BinOp::And,
                time0_eq("u", &Value::Int(1)),
                time0_eq("s", &Value::Int(0)),
            ),
        )
        .unwrap();
        assert!(!is_write_stable(&f, 0, &u1s0));
    }

    #[test]
    fn read_stability_counterexample_from_te() {
        // if s=1 then t:=u with R(A) = {t,u}: t@1=1 is not read-stable
        let p = prog(
            "if s = 1 then t := u",
            &[("s", &[0, 1]), ("t", &[0, 1]), ("u", &[0, 1])],
        );
        let ctx = SecurityContext::new(&["A"], &[])
            .with_read("A", &["t", "u"])
            .with_write("A", &["u"])
            .with_flags(true, false);
        let f = build_frame(&p, &ctx, 1000).unwrap();
        let t1 = ext_atom(&f, "t", 1, &Value::Int(1)).unwrap();
        assert!(!is_read_stable(&f, 0, &t1));
    }

    #[test]
    fn render_prefers_the_dictionary() {
        let f = fig1_frame("if u = 1 then p := s");
        let s0 = ext_time0(&f, &time0_eq("s", &Value::Int(0))).unwrap();
        assert_eq!(render_cuts(&f, &s0), "s@0=0");
        assert_eq!(render_cuts(&f, &Cuts::full(&f)), "true");
        assert_eq!(render_cuts(&f, &Cuts::empty(&f)), "false");
    }

    #[test]
    fn formula_parser_round_trips() {
        // set(...) takes a predicate over time-0 variable values
        let f = parse_formula("box(KC[A]) eventually set(p = 0 || s = 1)");
        assert!(f.is_ok(), "{f:?}");
        let f = parse_formula("dia(WC[A]) (eventually box(KC[A]) s@0=0)").unwrap();
        match f {
            Formula::Dia(RelName::Wc(a), _) => assert_eq!(a, "A"),
            other => panic!("unexpected parse {other:?}"),
        }
        assert!(parse_formula("box(QQ[A]) true").is_err());
    }

    #[test]
    fn from_mask_round_trips_canonical_vectors() {
        let f = fig1_frame("if u = 1 then p := s");
        let mut stream = CutStream::new(&f, Mode::Exhaustive);
        loop {
            let chunk = stream.next_chunk(256);
            if chunk.is_empty() {
                break;
            }
            for cuts in chunk {
                let m = cuts.mask(&f);
                assert_eq!(Cuts::from_mask(&f, &m).mask(&f), m);
            }
        }
    }
}
