//! Security Kripke frames built from programs and security contexts.
//!
//! Worlds are finite trace prefixes; a silently diverging run contributes
//! one extra LIMIT world standing for all of its post-stabilization
//! prefixes (they are bisimilar for every relation and supported atom).
//! The time relation T is the prefix order, so it is a union of total
//! orders on the disjoint run chains.

pub mod check;
pub mod export;

use crate::bitset::Mask;
use crate::lang::{eval_expr, Expr, Program, Store};
use crate::policy::{EndorseMode, PolicyError, SecurityContext};
use crate::trace::{self, Obs, ObsSeq, RunStatus, TraceError};
use crate::value::Value;
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Depth {
    At(usize),
    Limit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct World {
    pub run: usize,
    pub depth: Depth,
}

impl fmt::Display for World {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.depth {
            Depth::At(d) => write!(f, "r{}@{}", self.run, d),
            Depth::Limit => write!(f, "r{}@limit", self.run),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FrameRun {
    pub initial: Store,
    pub stores: Vec<Store>,
    pub halts: bool,
    pub stuck: bool,
    pub diverging: bool,
}

impl FrameRun {
    pub fn max_depth(&self) -> usize {
        self.stores.len() - 1
    }
}

/// Equivalence relation represented by its classes.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub class_of: Vec<u32>,
    pub classes: Vec<Mask>,
}

impl Partition {
    pub fn from_keys<K: std::hash::Hash + Eq>(keys: Vec<K>) -> Partition {
        let n = keys.len();
        let mut ids: HashMap<K, u32> = HashMap::new();
        let mut class_of = Vec::with_capacity(n);
        for k in keys {
            let next = ids.len() as u32;
            let id = *ids.entry(k).or_insert(next);
            class_of.push(id);
        }
        let mut classes = vec![Mask::empty(n); ids.len()];
        for (i, &c) in class_of.iter().enumerate() {
            classes[c as usize].set(i);
        }
        Partition { class_of, classes }
    }

    pub fn class_mask(&self, world: usize) -> &Mask {
        &self.classes[self.class_of[world] as usize]
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.class_of[a] == self.class_of[b]
    }

    /// Worlds whose whole class is inside `x`.
    pub fn box_(&self, x: &Mask) -> Mask {
        let mut out = Mask::empty(x.len());
        for class in &self.classes {
            if class.is_subset(x) {
                out.or_assign(class);
            }
        }
        out
    }

    /// Worlds whose class meets `x`.
    pub fn dia_(&self, x: &Mask) -> Mask {
        let mut out = Mask::empty(x.len());
        for class in &self.classes {
            if class.intersects(x) {
                out.or_assign(class);
            }
        }
        out
    }
}

/// A write-permission relation: an equivalence in the standard setting,
/// or an explicit reflexive relation after event endorsement.
#[derive(Clone, Debug)]
pub enum WriteRel {
    Part(Partition),
    Explicit(Vec<Mask>),
}

impl WriteRel {
    pub fn box_(&self, x: &Mask) -> Mask {
        match self {
            WriteRel::Part(p) => p.box_(x),
            WriteRel::Explicit(rows) => {
                let mut out = Mask::empty(x.len());
                for (w, row) in rows.iter().enumerate() {
                    if row.is_subset(x) {
                        out.set(w);
                    }
                }
                out
            }
        }
    }

    pub fn dia_(&self, x: &Mask) -> Mask {
        match self {
            WriteRel::Part(p) => p.dia_(x),
            WriteRel::Explicit(rows) => {
                let mut out = Mask::empty(x.len());
                for (w, row) in rows.iter().enumerate() {
                    if row.intersects(x) {
                        out.set(w);
                    }
                }
                out
            }
        }
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        match self {
            WriteRel::Part(p) => p.related(a, b),
            WriteRel::Explicit(rows) => rows[a].get(b),
        }
    }

    pub fn related_mask(&self, w: usize) -> Mask {
        match self {
            WriteRel::Part(p) => p.class_mask(w).clone(),
            WriteRel::Explicit(rows) => rows[w].clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AgentRels {
    pub kc: Partition,
    pub kp: Partition,
    pub wc: Partition,
    pub wp: WriteRel,
    pub cnt: Partition,
}

#[derive(Clone, Debug)]
pub struct SecurityFrame {
    pub vars: Vec<String>,
    pub agents: Vec<String>,
    pub signals_termination: bool,
    pub synchronous: bool,
    pub runs: Vec<FrameRun>,
    pub worlds: Vec<World>,
    spans: Vec<(usize, usize)>,
    rels: Vec<AgentRels>,
    halting_runs: Mask,
    diverging_runs: Mask,
    halted: Mask,
}

#[derive(Debug, Error)]
pub enum FrameError {
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Lang(#[from] crate::lang::LangError),
    #[error("run {run} from {initial} has a store-changing cycle (unsupported divergence)")]
    UnsupportedRun { run: usize, initial: String },
    #[error("run {run} from {initial} exceeded the step budget")]
    BudgetRun { run: usize, initial: String },
    #[error("atom {var}@{tau} is beyond the truncation depth of run {run}")]
    UnsupportedAtom { var: String, tau: usize, run: usize },
    #[error("unknown agent '{0}'")]
    UnknownAgent(String),
    #[error("frame import: {0}")]
    Import(String),
}

pub fn store_label(vars: &[String], store: &Store) -> String {
    let parts: Vec<String> = vars.iter().map(|v| store[v].to_string()).collect();
    if parts.iter().all(|p| p.len() == 1) {
        parts.join("")
    } else {
        parts.join(",")
    }
}

impl SecurityFrame {
    pub fn n_worlds(&self) -> usize {
        self.worlds.len()
    }

    pub fn span(&self, run: usize) -> (usize, usize) {
        self.spans[run]
    }

    pub fn world_index(&self, run: usize, depth: Depth) -> Option<usize> {
        let (a, b) = self.spans[run];
        match depth {
            Depth::At(d) => {
                let i = a + d;
                let limit = self.runs[run].diverging;
                let fin_end = if limit { b - 1 } else { b };
                (i < fin_end).then_some(i)
            }
            Depth::Limit => self.runs[run].diverging.then_some(b - 1),
        }
    }

    pub fn world(&self, idx: usize) -> World {
        self.worlds[idx]
    }

    pub fn rels(&self, agent: &str) -> Result<&AgentRels, FrameError> {
        let i = self
            .agents
            .iter()
            .position(|a| a == agent)
            .ok_or_else(|| FrameError::UnknownAgent(agent.to_string()))?;
        Ok(&self.rels[i])
    }

    pub fn agent_rels(&self, agent_idx: usize) -> &AgentRels {
        &self.rels[agent_idx]
    }

    /// Worlds of runs that eventually halt (the extension of ◇⇓).
    pub fn halting_runs_mask(&self) -> &Mask {
        &self.halting_runs
    }

    /// Worlds of diverging runs (the extension of □¬⇓).
    pub fn diverging_mask(&self) -> &Mask {
        &self.diverging_runs
    }

    /// Worlds where the program has already halted (the extension of ⇓).
    pub fn halted_mask(&self) -> &Mask {
        &self.halted
    }

    pub fn empty_mask(&self) -> Mask {
        Mask::empty(self.n_worlds())
    }

    pub fn full_mask(&self) -> Mask {
        Mask::full(self.n_worlds())
    }

    /// ◇x over the prefix order (reflexive).
    pub fn dia_t(&self, x: &Mask) -> Mask {
        let mut out = self.empty_mask();
        for &(a, b) in &self.spans {
            if let Some(h) = x.last_set_in(a, b) {
                out.set_range(a, h + 1);
            }
        }
        out
    }

    /// □x over the prefix order.
    pub fn box_t(&self, x: &Mask) -> Mask {
        self.dia_t(&x.not()).not()
    }

    /// Upward (future) closure of x.
    pub fn up_t(&self, x: &Mask) -> Mask {
        let mut out = self.empty_mask();
        for &(a, b) in &self.spans {
            if let Some(l) = x.first_set_in(a, b) {
                out.set_range(l, b);
            }
        }
        out
    }

    /// Is the world at `idx` an initial (length-1) world?
    pub fn is_initial(&self, idx: usize) -> bool {
        matches!(self.worlds[idx].depth, Depth::At(0))
    }

    /// Evaluate the atom v@tau=value at a world.
    pub fn atom(
        &self,
        idx: usize,
        var: &str,
        tau: usize,
        value: &Value,
    ) -> Result<bool, FrameError> {
        let w = self.worlds[idx];
        let run = &self.runs[w.run];
        if tau > run.max_depth() {
            if run.diverging {
                return Err(FrameError::UnsupportedAtom {
                    var: var.to_string(),
                    tau,
                    run: w.run,
                });
            }
            // the run is complete and shorter than tau: the atom is false
            return Ok(false);
        }
        let deep_enough = match w.depth {
            Depth::At(d) => d >= tau,
            Depth::Limit => true,
        };
        Ok(deep_enough && run.stores[tau].get(var) == Some(value))
    }

    /// ⇓ at a world.
    pub fn halted_at(&self, idx: usize) -> bool {
        self.halted.get(idx)
    }
}

/// Build the security Kripke frame of a program under a context.
pub fn build_frame(
    program: &Program,
    ctx: &SecurityContext,
    budget: usize,
) -> Result<SecurityFrame, FrameError> {
    build_frame_opts(program, ctx, budget, trace::DEFAULT_INITIAL_BOUND, true)
}

pub fn build_frame_opts(
    program: &Program,
    ctx: &SecurityContext,
    budget: usize,
    initial_bound: usize,
    parallel: bool,
) -> Result<SecurityFrame, FrameError> {
    ctx.validate(&program.vars)?;
    let mut runs = trace::unfold_all(program, budget, initial_bound, parallel)?;
    for (i, run) in runs.iter().enumerate() {
        match run.status {
            RunStatus::UnsupportedDiverge { .. } => {
                return Err(FrameError::UnsupportedRun {
                    run: i,
                    initial: store_label(&program.vars, &run.initial),
                })
            }
            RunStatus::BudgetExceeded => {
                return Err(FrameError::BudgetRun {
                    run: i,
                    initial: store_label(&program.vars, &run.initial),
                })
            }
            _ => {}
        }
    }

    // Synchronous contexts make every step observable, so diverging runs
    // must be unrolled to a common horizon before the limit quotient is
    // sound (beyond it, the frame repeats under the step shift).
    if ctx.synchronous {
        let horizon = runs.iter().map(|r| r.max_depth()).max().unwrap_or(0);
        for run in &mut runs {
            if run.diverges_silently() {
                run.extend_to(horizon);
            }
        }
    }

    let frame_runs: Vec<FrameRun> = runs
        .iter()
        .map(|r| FrameRun {
            initial: r.initial.clone(),
            stores: r.stores.clone(),
            halts: r.halts(),
            stuck: matches!(r.status, RunStatus::Stuck(_)),
            diverging: r.diverges_silently(),
        })
        .collect();

    let mut worlds = Vec::new();
    let mut spans = Vec::new();
    for (ri, run) in frame_runs.iter().enumerate() {
        let start = worlds.len();
        for d in 0..run.stores.len() {
            worlds.push(World {
                run: ri,
                depth: Depth::At(d),
            });
        }
        if run.diverging {
            worlds.push(World {
                run: ri,
                depth: Depth::Limit,
            });
        }
        spans.push((start, worlds.len()));
    }
    let n = worlds.len();

    let mut halting_runs = Mask::empty(n);
    let mut diverging_runs = Mask::empty(n);
    let mut halted = Mask::empty(n);
    for (ri, run) in frame_runs.iter().enumerate() {
        let (a, b) = spans[ri];
        if run.halts {
            halting_runs.set_range(a, b);
            halted.set(a + run.max_depth());
        } else {
            diverging_runs.set_range(a, b);
        }
    }

    let mut agents = ctx.agents.clone();
    agents.sort();
    agents.dedup();

    let mut rels = Vec::with_capacity(agents.len());
    for agent in &agents {
        let mut view_keys: Vec<ViewKey> = Vec::with_capacity(n);
        let mut fix_keys: Vec<ObsSeq> = Vec::with_capacity(n);
        let mut wc_keys: Vec<WcKey> = Vec::with_capacity(n);
        let mut cnt_keys: Vec<usize> = Vec::with_capacity(n);
        for (idx, w) in worlds.iter().enumerate() {
            let run = &runs[w.run];
            let (v, f) = match w.depth {
                Depth::At(d) => (
                    trace::view(ctx, agent, &program.vars, run, d),
                    trace::fix(ctx, agent, &program.vars, run, d),
                ),
                Depth::Limit => (
                    trace::view(ctx, agent, &program.vars, run, run.max_depth()),
                    trace::fix(ctx, agent, &program.vars, run, run.max_depth()),
                ),
            };
            cnt_keys.push(if w.depth == Depth::Limit && ctx.synchronous {
                usize::MAX
            } else {
                v.len()
            });
            view_keys.push(if w.depth == Depth::Limit && ctx.synchronous {
                ViewKey::Limit(v)
            } else {
                ViewKey::Finite(v)
            });
            wc_keys.push(if w.depth == Depth::At(0) {
                WcKey::Initial(f.clone())
            } else {
                WcKey::Solo(idx)
            });
            fix_keys.push(f);
        }
        let kc = Partition::from_keys(view_keys);
        let kp = kc.clone();
        let wc = Partition::from_keys(wc_keys);
        let wp = WriteRel::Part(Partition::from_keys(fix_keys));
        let cnt = Partition::from_keys(cnt_keys);
        rels.push(AgentRels {
            kc,
            kp,
            wc,
            wp,
            cnt,
        });
    }

    let mut frame = SecurityFrame {
        vars: program.vars.clone(),
        agents,
        signals_termination: ctx.signals_termination,
        synchronous: ctx.synchronous,
        runs: frame_runs,
        worlds,
        spans,
        rels,
        halting_runs,
        diverging_runs,
        halted,
    };

    for (agent, psi) in &ctx.declass {
        frame = refine_declassification(frame, agent, psi)?;
    }
    frame = endorsement_perm(frame, program, ctx)?;
    Ok(frame)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum ViewKey {
    Finite(ObsSeq),
    Limit(ObsSeq),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum WcKey {
    Initial(ObsSeq),
    Solo(usize),
}

/// Refine K^P for one agent with a declassification predicate over
/// time-0 values: worlds stay related only if they agree on psi.
pub fn refine_declassification(
    mut frame: SecurityFrame,
    agent: &str,
    psi: &Expr,
) -> Result<SecurityFrame, FrameError> {
    let psi_truth: Vec<bool> = frame
        .runs
        .iter()
        .map(|r| {
            let v = eval_expr(psi, &r.initial)?;
            v.truthy().ok_or(crate::lang::LangError::TypeError {
                op: "declassification predicate".into(),
                value: v.to_string(),
            })
        })
        .collect::<Result<_, _>>()?;
    let idx = frame
        .agents
        .iter()
        .position(|a| a == agent)
        .ok_or_else(|| FrameError::UnknownAgent(agent.to_string()))?;
    let keys: Vec<(u32, bool)> = (0..frame.n_worlds())
        .map(|w| {
            (
                frame.rels[idx].kp.class_of[w],
                psi_truth[frame.worlds[w].run],
            )
        })
        .collect();
    frame.rels[idx].kp = Partition::from_keys(keys);
    Ok(frame)
}

/// Replace W^P with the endorsement-aware permission relation configured
/// in the context.
pub fn endorsement_perm(
    mut frame: SecurityFrame,
    program: &Program,
    ctx: &SecurityContext,
) -> Result<SecurityFrame, FrameError> {
    match &ctx.endorse {
        EndorseMode::None => Ok(frame),
        EndorseMode::PerVariable(map) => {
            for (agent, endorsed) in map {
                let idx = frame
                    .agents
                    .iter()
                    .position(|a| a == agent)
                    .ok_or_else(|| FrameError::UnknownAgent(agent.clone()))?;
                // fix over V \ W(A) \ endorsed: endorsed influence is masked out
                let w_set = ctx.write_set(agent);
                let vars: Vec<String> = program
                    .vars
                    .iter()
                    .filter(|v| !w_set.contains(*v) && !endorsed.contains(*v))
                    .cloned()
                    .collect();
                let keys: Vec<ObsSeq> = (0..frame.n_worlds())
                    .map(|i| {
                        let w = frame.worlds[i];
                        let run = &frame.runs[w.run];
                        let depth = match w.depth {
                            Depth::At(d) => d,
                            Depth::Limit => run.max_depth(),
                        };
                        let raw: Vec<Obs> = run.stores[..=depth]
                            .iter()
                            .map(|store| Obs {
                                vals: vars.iter().map(|v| store[v].clone()).collect(),
                                halted: false,
                                time: None,
                            })
                            .collect();
                        trace::destutter(&raw)
                    })
                    .collect();
                frame.rels[idx].wp = WriteRel::Part(Partition::from_keys(keys));
            }
            Ok(frame)
        }
        EndorseMode::Event => {
            for idx in 0..frame.agents.len() {
                let agent = frame.agents[idx].clone();
                let rel = event_relation(&frame, program, ctx, &agent)?;
                frame.rels[idx].wp = WriteRel::Explicit(rel);
            }
            Ok(frame)
        }
    }
}

/// Event endorsement: worlds are related if their per-step fixed
/// projections have equal length and every differing entry is at a
/// variable already endorsed for the agent in both worlds at that step.
/// Projections are compared per configuration (undestuttered): the
/// endorsement event itself changes E and so re-times the destuttered
/// sequences, which would disconnect the worked examples.
fn event_relation(
    frame: &SecurityFrame,
    program: &Program,
    ctx: &SecurityContext,
    agent: &str,
) -> Result<Vec<Mask>, FrameError> {
    let w_set = ctx.write_set(agent);
    let fix_vars: Vec<String> = program
        .vars
        .iter()
        .filter(|v| !w_set.contains(*v))
        .cloned()
        .collect();
    let e_pos = fix_vars.iter().position(|v| v == crate::lang::END_VAR);

    let n = frame.n_worlds();
    // raw projections per world, padded to the stabilization point for limits
    let projs: Vec<(Vec<Vec<Value>>, bool)> = (0..n)
        .map(|i| {
            let w = frame.worlds[i];
            let run = &frame.runs[w.run];
            let depth = match w.depth {
                Depth::At(d) => d,
                Depth::Limit => run.max_depth(),
            };
            let raw: Vec<Vec<Value>> = run.stores[..=depth]
                .iter()
                .map(|store| fix_vars.iter().map(|v| store[v].clone()).collect())
                .collect();
            (raw, w.depth == Depth::Limit)
        })
        .collect();

    let endorsed_at = |entry: &[Value], var: &str| -> bool {
        let Some(e_pos) = e_pos else { return false };
        match &entry[e_pos] {
            Value::Set(s) => s.iter().any(|v| {
                matches!(v, Value::Pair(a, x)
                    if **a == Value::Name(agent.to_string()) && **x == Value::Name(var.to_string()))
            }),
            _ => false,
        }
    };

    let related = |a: usize, b: usize| -> bool {
        let (pa, la) = &projs[a];
        let (pb, lb) = &projs[b];
        if la != lb {
            return false; // a limit world is never as long as a finite one
        }
        if *la {
            // both limits: compare padded to the common horizon
            let len = pa.len().max(pb.len());
            for i in 0..len {
                let ea = &pa[i.min(pa.len() - 1)];
                let eb = &pb[i.min(pb.len() - 1)];
                if !entries_ok(ea, eb, &fix_vars, &endorsed_at) {
                    return false;
                }
            }
            return true;
        }
        if pa.len() != pb.len() {
            return false;
        }
        pa.iter()
            .zip(pb)
            .all(|(ea, eb)| entries_ok(ea, eb, &fix_vars, &endorsed_at))
    };

    fn entries_ok(
        ea: &[Value],
        eb: &[Value],
        fix_vars: &[String],
        endorsed_at: &impl Fn(&[Value], &str) -> bool,
    ) -> bool {
        for (k, var) in fix_vars.iter().enumerate() {
            if ea[k] != eb[k] && !(endorsed_at(ea, var) && endorsed_at(eb, var)) {
                return false;
            }
        }
        true
    }

    let mut rows = vec![Mask::empty(n); n];
    for a in 0..n {
        rows[a].set(a);
        for b in a + 1..n {
            if related(a, b) {
                rows[a].set(b);
                rows[b].set(a);
            }
        }
    }
    Ok(rows)
}

/// The counting agent's knowledge: worlds related iff the view lengths
/// match. Built at frame construction; this accessor mirrors the
/// operation surface.
pub fn counting_relation<'f>(
    frame: &'f SecurityFrame,
    agent: &str,
) -> Result<&'f Partition, FrameError> {
    Ok(&frame.rels(agent)?.cnt)
}
