//! Trace-based reference definitions, differential tests realizing the
//! equivalence theorems, random program generation, and the implication
//! audit over the comparison diagrams.

use crate::corpus::{self, Entry};
use crate::frame::{build_frame_opts, store_label};
use crate::lang::{Program, Store};
use crate::policy::{EndorseMode, SecurityContext};
use crate::props::{self, CheckOpts, PropertyId, Status};
use crate::trace::{self, ObsSeq, Run, TraceError};
use crate::value::Value;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TraceProp {
    TraceConf,
    TiTraceConf,
    TiTraceInteg,
    TraceRd,
    TraceTe,
}

impl TraceProp {
    pub fn all() -> [TraceProp; 5] {
        [
            TraceProp::TraceConf,
            TraceProp::TiTraceConf,
            TraceProp::TiTraceInteg,
            TraceProp::TraceRd,
            TraceProp::TraceTe,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            TraceProp::TraceConf => "TRACE_CONF",
            TraceProp::TiTraceConf => "TI_TRACE_CONF",
            TraceProp::TiTraceInteg => "TI_TRACE_INTEG",
            TraceProp::TraceRd => "TRACE_RD",
            TraceProp::TraceTe => "TRACE_TE",
        }
    }

    pub fn parse(name: &str) -> Option<TraceProp> {
        TraceProp::all()
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(name))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceWitness {
    pub agent: String,
    /// Initial stores of the runs involved (pair or quadruple).
    pub stores: Vec<String>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceVerdict {
    pub property: String,
    pub status: Status,
    pub witness: Option<TraceWitness>,
}

#[derive(Clone, Copy, Debug)]
pub struct TraceOpts {
    pub budget: usize,
    pub parallel: bool,
    /// The termination-insensitive escape clause ("or at least one run
    /// diverges"); disabling it strictly strengthens the definitions,
    /// which a test exercises.
    pub ti_escape: bool,
}

impl Default for TraceOpts {
    fn default() -> Self {
        TraceOpts {
            budget: trace::DEFAULT_STEP_BUDGET,
            parallel: true,
            ti_escape: true,
        }
    }
}

struct RunTable {
    runs: Vec<Run>,
    index: BTreeMap<Store, usize>,
    vars: Vec<String>,
}

impl RunTable {
    fn build(program: &Program, ctx: &SecurityContext, opts: &TraceOpts) -> Result<RunTable, TraceError> {
        let runs = trace::unfold_all(program, opts.budget, trace::DEFAULT_INITIAL_BOUND, opts.parallel)?;
        for (i, run) in runs.iter().enumerate() {
            if !run.supported() {
                return Err(TraceError::UnsupportedDivergence {
                    initial: store_label(&program.vars, &run.initial),
                    at: i,
                });
            }
        }
        let _ = ctx;
        let index = runs
            .iter()
            .enumerate()
            .map(|(i, r)| (r.initial.clone(), i))
            .collect();
        Ok(RunTable {
            runs,
            index,
            vars: program.vars.clone(),
        })
    }

    fn lookup(&self, store: &Store) -> &Run {
        &self.runs[self.index[store]]
    }
}

fn assignments(program: &Program, vars: &[String]) -> Vec<Vec<(String, Value)>> {
    let mut out: Vec<Vec<(String, Value)>> = vec![Vec::new()];
    for v in vars {
        let dom = &program.domains[v];
        let mut next = Vec::with_capacity(out.len() * dom.len());
        for partial in &out {
            for val in dom {
                let mut a = partial.clone();
                a.push((v.clone(), val.clone()));
                next.push(a);
            }
        }
        out = next;
    }
    out
}

fn override_store(base: &Store, assignment: &[(String, Value)]) -> Store {
    let mut s = base.clone();
    for (v, val) in assignment {
        s.insert(v.clone(), val.clone());
    }
    s
}

/// Run one trace-based definition, quantifying exactly over its own
/// store classes.
pub fn trace_check(
    program: &Program,
    ctx: &SecurityContext,
    prop: TraceProp,
    opts: &TraceOpts,
) -> Result<TraceVerdict, TraceError> {
    let table = RunTable::build(program, ctx, opts)?;
    let verdict = |witness: Option<TraceWitness>| TraceVerdict {
        property: prop.name().to_string(),
        status: if witness.is_some() {
            Status::Violated
        } else {
            Status::Satisfied
        },
        witness,
    };

    for agent in &ctx.agents {
        let witness = match prop {
            TraceProp::TraceConf | TraceProp::TiTraceConf => pairwise(
                program,
                ctx,
                agent,
                &table,
                &unreadable(program, ctx, agent),
                Projection::View,
                prop == TraceProp::TiTraceConf && opts.ti_escape,
            )?,
            TraceProp::TiTraceInteg => pairwise(
                program,
                ctx,
                agent,
                &table,
                &writable(program, ctx, agent),
                Projection::Fix,
                opts.ti_escape,
            )?,
            TraceProp::TraceRd => quadruple(
                program,
                ctx,
                agent,
                &table,
                &unreadable(program, ctx, agent),
                &writable(program, ctx, agent),
                Projection::View,
                opts.ti_escape,
            )?,
            TraceProp::TraceTe => quadruple(
                program,
                ctx,
                agent,
                &table,
                &writable(program, ctx, agent),
                &unreadable(program, ctx, agent),
                Projection::Fix,
                opts.ti_escape,
            )?,
        };
        if witness.is_some() {
            return Ok(verdict(witness));
        }
    }
    Ok(verdict(None))
}

#[derive(Clone, Copy, PartialEq)]
enum Projection {
    View,
    Fix,
}

fn unreadable(program: &Program, ctx: &SecurityContext, agent: &str) -> Vec<String> {
    let r = ctx.read_set(agent);
    program
        .vars
        .iter()
        .filter(|v| !r.contains(*v))
        .cloned()
        .collect()
}

fn writable(program: &Program, ctx: &SecurityContext, agent: &str) -> Vec<String> {
    let w = ctx.write_set(agent);
    program
        .vars
        .iter()
        .filter(|v| w.contains(*v))
        .cloned()
        .collect()
}

fn maximal(
    ctx: &SecurityContext,
    agent: &str,
    vars: &[String],
    run: &Run,
    projection: Projection,
) -> Result<ObsSeq, TraceError> {
    match projection {
        Projection::View => trace::maximal_view(ctx, agent, vars, run),
        Projection::Fix => trace::maximal_fix(ctx, agent, vars, run),
    }
}

/// The pair-based definitions: for every initial store and pair of
/// assignments to `varied`, the projections of the maximal traces must
/// agree (or, termination-insensitively, one of the runs must diverge).
#[allow(clippy::too_many_arguments)]
fn pairwise(
    program: &Program,
    ctx: &SecurityContext,
    agent: &str,
    table: &RunTable,
    varied: &[String],
    projection: Projection,
    ti_escape: bool,
) -> Result<Option<TraceWitness>, TraceError> {
    let fixed: Vec<String> = program
        .vars
        .iter()
        .filter(|v| !varied.contains(v))
        .cloned()
        .collect();
    let bases = assignments(program, &fixed);
    let choices = assignments(program, varied);
    for base in &bases {
        let base_store = override_store(&Store::new(), base);
        for i in 0..choices.len() {
            for j in i + 1..choices.len() {
                let s1 = override_store(&base_store, &choices[i]);
                let s2 = override_store(&base_store, &choices[j]);
                let (r1, r2) = (table.lookup(&s1), table.lookup(&s2));
                if ti_escape && (!r1.halts() || !r2.halts()) {
                    continue;
                }
                let p1 = maximal(ctx, agent, &table.vars, r1, projection)?;
                let p2 = maximal(ctx, agent, &table.vars, r2, projection)?;
                if p1 != p2 {
                    return Ok(Some(TraceWitness {
                        agent: agent.to_string(),
                        stores: vec![
                            store_label(&table.vars, &s1),
                            store_label(&table.vars, &s2),
                        ],
                        detail: format!(
                            "projections differ: {} vs {}",
                            render_obs(&p1),
                            render_obs(&p2)
                        ),
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// The quadruple definitions: vary `inner` (indexing the iff sides) and
/// `outer`; whether varying `inner` changes the projection must not
/// depend on the `outer` assignment.
#[allow(clippy::too_many_arguments)]
fn quadruple(
    program: &Program,
    ctx: &SecurityContext,
    agent: &str,
    table: &RunTable,
    inner: &[String],
    outer: &[String],
    projection: Projection,
    ti_escape: bool,
) -> Result<Option<TraceWitness>, TraceError> {
    let fixed: Vec<String> = program
        .vars
        .iter()
        .filter(|v| !inner.contains(v) && !outer.contains(v))
        .cloned()
        .collect();
    let bases = assignments(program, &fixed);
    let inner_choices = assignments(program, inner);
    let outer_choices = assignments(program, outer);
    for base in &bases {
        let base_store = override_store(&Store::new(), base);
        for i1 in 0..inner_choices.len() {
            for i2 in i1 + 1..inner_choices.len() {
                for o1 in 0..outer_choices.len() {
                    for o2 in o1 + 1..outer_choices.len() {
                        let store = |i: usize, o: usize| {
                            override_store(
                                &override_store(&base_store, &inner_choices[i]),
                                &outer_choices[o],
                            )
                        };
                        let quad = [
                            store(i1, o1),
                            store(i2, o1),
                            store(i1, o2),
                            store(i2, o2),
                        ];
                        let runs: Vec<&Run> = quad.iter().map(|s| table.lookup(s)).collect();
                        if ti_escape && runs.iter().any(|r| !r.halts()) {
                            continue;
                        }
                        let proj: Vec<ObsSeq> = runs
                            .iter()
                            .map(|r| maximal(ctx, agent, &table.vars, r, projection))
                            .collect::<Result<_, _>>()?;
                        let eq_first = proj[0] == proj[1];
                        let eq_second = proj[2] == proj[3];
                        if eq_first != eq_second {
                            return Ok(Some(TraceWitness {
                                agent: agent.to_string(),
                                stores: quad
                                    .iter()
                                    .map(|s| store_label(&table.vars, s))
                                    .collect(),
                                detail: format!(
                                    "iff fails: first pair {}, second pair {}",
                                    if eq_first { "equal" } else { "differs" },
                                    if eq_second { "equal" } else { "differs" },
                                ),
                            }));
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

fn render_obs(seq: &ObsSeq) -> String {
    let parts: Vec<String> = seq
        .iter()
        .map(|o| {
            let vals: Vec<String> = o.vals.iter().map(|v| v.to_string()).collect();
            let mut s = format!("({})", vals.join(","));
            if o.halted {
                s.push('!');
            }
            s
        })
        .collect();
    parts.join("")
}

// ---------------------------------------------------------------------
// differential tests

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Pairing {
    ConfBasic,
    ConfTi,
    IntegTi,
    IntegTiCause,
    RdTi,
    TeTi,
}

impl Pairing {
    pub fn all() -> [Pairing; 6] {
        [
            Pairing::ConfBasic,
            Pairing::ConfTi,
            Pairing::IntegTi,
            Pairing::IntegTiCause,
            Pairing::RdTi,
            Pairing::TeTi,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Pairing::ConfBasic => "TRACE_CONF<->CONF",
            Pairing::ConfTi => "TI_TRACE_CONF<->TI_CONF",
            Pairing::IntegTi => "TI_TRACE_INTEG<->TI_INTEG",
            Pairing::IntegTiCause => "TI_TRACE_INTEG<->TI_CAUSE_INTEG",
            Pairing::RdTi => "TRACE_RD<->TI_RD",
            Pairing::TeTi => "TRACE_TE<->TI_TE",
        }
    }

    fn trace_prop(&self) -> TraceProp {
        match self {
            Pairing::ConfBasic => TraceProp::TraceConf,
            Pairing::ConfTi => TraceProp::TiTraceConf,
            Pairing::IntegTi | Pairing::IntegTiCause => TraceProp::TiTraceInteg,
            Pairing::RdTi => TraceProp::TraceRd,
            Pairing::TeTi => TraceProp::TraceTe,
        }
    }

    fn modal_prop(&self) -> PropertyId {
        match self {
            Pairing::ConfBasic => PropertyId::Conf,
            Pairing::ConfTi => PropertyId::TiConf,
            Pairing::IntegTi => PropertyId::TiInteg,
            Pairing::IntegTiCause => PropertyId::TiCauseInteg,
            Pairing::RdTi => PropertyId::TiRd,
            Pairing::TeTi => PropertyId::TiTe,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairingStatus {
    Agree,
    Disagree,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingResult {
    pub pairing: String,
    pub status: PairingStatus,
    pub trace_status: Option<Status>,
    pub modal_status: Option<Status>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiffReport {
    pub pairings: Vec<PairingResult>,
}

impl DiffReport {
    pub fn disagreements(&self) -> usize {
        self.pairings
            .iter()
            .filter(|p| p.status == PairingStatus::Disagree)
            .count()
    }
}

/// Does every halted world's W^P class contain only halted worlds?
fn fix_signals_termination(frame: &crate::frame::SecurityFrame) -> bool {
    let halted = frame.halted_mask();
    frame.agents.iter().all(|agent| {
        let rels = frame.rels(agent).unwrap();
        halted
            .iter_set()
            .all(|w| rels.wp.related_mask(w).is_subset(halted))
    })
}

/// Compare the trace-based and modal verdicts on every theorem pairing
/// whose assumptions hold; assumption failures skip, never silently pass.
pub fn differential(
    program: &Program,
    ctx: &SecurityContext,
    opts: &TraceOpts,
    check_opts: &CheckOpts,
) -> Result<DiffReport, Box<dyn std::error::Error>> {
    let frame = build_frame_opts(program, ctx, opts.budget, 4096, opts.parallel)?;
    let mut pairings = Vec::new();
    for pairing in Pairing::all() {
        let mut skip_reasons: Vec<String> = Vec::new();
        match pairing {
            Pairing::ConfBasic | Pairing::ConfTi | Pairing::RdTi => {
                if !ctx.declass.is_empty() {
                    skip_reasons
                        .push("declassification refines K^P beyond the trace definitions".into());
                }
            }
            Pairing::IntegTi | Pairing::IntegTiCause | Pairing::TeTi => {
                if ctx.endorse != EndorseMode::None {
                    skip_reasons
                        .push("endorsement refines W^P beyond the trace definitions".into());
                }
            }
        }
        if matches!(pairing, Pairing::RdTi | Pairing::TeTi) {
            for w in props::audit_theorem_assumptions(&frame, ctx, pairing.modal_prop()) {
                if w.contains("benign") {
                    continue;
                }
                skip_reasons.push(w);
            }
        }
        if pairing == Pairing::TeTi && !fix_signals_termination(&frame) {
            // The transparent-endorsement equivalence swaps knowledge and
            // permission; its proof needs halting to be recorded in the
            // write-invariant projection (the W^P dual of termination
            // signalling), which plain fixes do not provide in general.
            skip_reasons.push(
                "halting is not recorded in the write-invariant projection (W^P dual of termination signalling)"
                    .into(),
            );
        }
        if ctx.synchronous
            && frame.runs.iter().any(|r| !r.halts)
            && matches!(
                pairing,
                Pairing::ConfBasic | Pairing::ConfTi | Pairing::RdTi
            )
        {
            skip_reasons
                .push("synchronous observers give diverging runs infinite views".into());
        }
        if !skip_reasons.is_empty() {
            pairings.push(PairingResult {
                pairing: pairing.name().to_string(),
                status: PairingStatus::Skipped,
                trace_status: None,
                modal_status: None,
                detail: skip_reasons.join("; "),
            });
            continue;
        }
        let trace_verdict = trace_check(program, ctx, pairing.trace_prop(), opts)?;
        let modal_verdict = props::check(&frame, pairing.modal_prop(), check_opts)?;
        let agree = trace_verdict.status == modal_verdict.status;
        pairings.push(PairingResult {
            pairing: pairing.name().to_string(),
            status: if agree {
                PairingStatus::Agree
            } else {
                PairingStatus::Disagree
            },
            trace_status: Some(trace_verdict.status),
            modal_status: Some(modal_verdict.status),
            detail: if agree {
                String::new()
            } else {
                format!(
                    "trace witness: {:?}; modal witness: {:?}",
                    trace_verdict.witness,
                    modal_verdict.witnesses.first()
                )
            },
        });
    }
    Ok(DiffReport { pairings })
}

// ---------------------------------------------------------------------
// random program generation

#[derive(Clone, Copy, Debug)]
pub struct GenBounds {
    pub max_vars: usize,
    pub max_stmts: usize,
}

impl Default for GenBounds {
    fn default() -> Self {
        GenBounds {
            max_vars: 3,
            max_stmts: 6,
        }
    }
}

fn gen_expr(rng: &mut ChaCha8Rng, vars: &[String], depth: usize) -> String {
    if depth == 0 || rng.gen_bool(0.4) {
        if rng.gen_bool(0.7) {
            return vars[rng.gen_range(0..vars.len())].clone();
        }
        return rng.gen_range(0..2).to_string();
    }
    let op = ["+", "-", "*", "=", "!=", "<", "&&", "||", "^"][rng.gen_range(0..9)];
    let a = gen_expr(rng, vars, depth - 1);
    let b = gen_expr(rng, vars, depth - 1);
    format!("({a} {op} {b})")
}

fn gen_stmts(rng: &mut ChaCha8Rng, vars: &[String], budget: &mut usize) -> Vec<String> {
    let mut out = Vec::new();
    while *budget > 0 {
        *budget -= 1;
        let roll = rng.gen_range(0..100);
        if roll < 55 {
            let v = vars[rng.gen_range(0..vars.len())].clone();
            out.push(format!("{v} := {}", gen_expr(rng, vars, 2)));
        } else if roll < 80 && *budget > 0 {
            let guard = gen_expr(rng, vars, 1);
            *budget -= 1;
            let v = vars[rng.gen_range(0..vars.len())].clone();
            let then_branch = format!("{v} := {}", gen_expr(rng, vars, 1));
            if rng.gen_bool(0.5) && *budget > 0 {
                *budget -= 1;
                let w = vars[rng.gen_range(0..vars.len())].clone();
                let else_branch = format!("{w} := {}", gen_expr(rng, vars, 1));
                out.push(format!(
                    "if {guard} then {{ {then_branch} }} else {{ {else_branch} }}"
                ));
            } else {
                out.push(format!("if {guard} then {{ {then_branch} }}"));
            }
        } else if roll < 90 {
            // divergence only through the silent loop, so every run stays
            // in the supported class
            if rng.gen_bool(0.5) {
                let guard = gen_expr(rng, vars, 1);
                out.push(format!("if {guard} then loop"));
            } else {
                out.push("loop".to_string());
            }
        } else {
            out.push("skip".to_string());
        }
        if rng.gen_bool(0.25) {
            break;
        }
    }
    if out.is_empty() {
        out.push("skip".to_string());
    }
    out
}

/// Deterministically generate a boolean program and a matching context
/// with W(A) ⊆ R(A) and termination signalling (the assumptions the
/// differential theorems need).
pub fn gen_program(seed: u64, bounds: GenBounds) -> (String, SecurityContext) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_vars = rng.gen_range(1..=bounds.max_vars);
    let vars: Vec<String> = (0..n_vars).map(|i| format!("v{i}")).collect();
    let mut budget = rng.gen_range(1..=bounds.max_stmts);
    let stmts = gen_stmts(&mut rng, &vars, &mut budget);
    let source = stmts.join("; ");

    let domains: Vec<(&str, &[i64])> = Vec::new();
    let mut ctx = SecurityContext::new(&["A"], &domains);
    ctx.domains = vars
        .iter()
        .map(|v| (v.clone(), vec![Value::Int(0), Value::Int(1)]))
        .collect();
    let mut read = std::collections::BTreeSet::new();
    let mut write = std::collections::BTreeSet::new();
    for v in &vars {
        if rng.gen_bool(0.5) {
            read.insert(v.clone());
            if rng.gen_bool(0.4) {
                write.insert(v.clone());
            }
        }
    }
    ctx.read.insert("A".into(), read);
    ctx.write.insert("A".into(), write);
    ctx.signals_termination = true;
    ctx.synchronous = false;
    (source, ctx)
}

pub fn gen_entry(seed: u64, bounds: GenBounds) -> (String, Program, SecurityContext) {
    let (source, ctx) = gen_program(seed, bounds);
    let program = Program::new(&source, ctx.declared()).expect("generated programs parse");
    (source, program, ctx)
}

// ---------------------------------------------------------------------
// implication audit

/// The arrows of the two comparison diagrams, stronger first. The
/// integrity node carries both the effect and cause forms. The drawn
/// arrow from the alternative termination-insensitive r.d. to wrong
/// variant (a) is omitted: the violation matrix's own row (iv)
/// satisfies the former and violates the latter (variant (a)'s premise
/// drops a conjunct, so it is not weaker), and only the arrow from
/// plain robust declassification is argued in the text.
pub fn implication_arrows() -> Vec<(PropertyId, PropertyId)> {
    use PropertyId::*;
    vec![
        (Conf, TiConf),
        (Conf, PiConf),
        (Conf, Rd),
        (Rd, RdVarA),
        (TiConf, RdAlt),
        (RdVarA, RdVarB),
        (RdVarB, TiRd),
        (Integ, TiInteg),
        (CauseInteg, TiCauseInteg),
        (Integ, TiCauseInteg),
        (CauseInteg, TiInteg),
        (Integ, TeAlt),
        (CauseInteg, TeAlt),
        (Integ, Te),
        (CauseInteg, Te),
        (Te, TiTe),
        (TiInteg, TiTe),
        (TiCauseInteg, TiTe),
    ]
}

/// The named separating examples and the verdict pairs that
/// witness each non-implication.
pub fn separations() -> Vec<(&'static str, Vec<(PropertyId, Status)>)> {
    use PropertyId::*;
    use Status::*;
    vec![
        ("fig1-iii-sync", vec![(Rd, Violated), (RdVarA, Satisfied)]),
        ("fig1-iv-sync", vec![(RdVarA, Violated), (RdVarB, Satisfied)]),
        ("fig1-v-sync", vec![(RdVarB, Violated), (TiRd, Satisfied)]),
        (
            "conf-ii",
            vec![(TiConf, Satisfied), (TiConfIntermediate, Violated)],
        ),
        (
            "conf-iii",
            vec![(TiConfIntermediate, Satisfied), (Conf, Violated)],
        ),
        ("pi-ascending", vec![(PiConf, Satisfied), (Conf, Violated)]),
        ("pi-descending", vec![(PiConf, Violated)]),
        (
            "rd-else-loop-sync",
            vec![(TiRd, Satisfied), (RdAlt, Violated)],
        ),
        (
            "rd-trailing-loop-sync",
            vec![(Rd, Satisfied), (RdAlt, Violated)],
        ),
        ("te-i", vec![(TiTe, Satisfied), (TeAlt, Violated)]),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct ArrowFailure {
    pub entry: String,
    pub stronger: String,
    pub weaker: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub frames_checked: usize,
    pub arrow_failures: Vec<ArrowFailure>,
    pub separation_failures: Vec<String>,
}

impl AuditReport {
    pub fn ok(&self) -> bool {
        self.arrow_failures.is_empty() && self.separation_failures.is_empty()
    }
}

/// Verify both diagrams over a corpus of built frames, plus the
/// separating verdict pairs on the named examples.
pub fn implication_audit(entries: &[Entry], opts: &CheckOpts, budget: usize) -> AuditReport {
    let verdict_maps: Vec<(String, BTreeMap<PropertyId, Status>)> = crate::par::map(
        entries.to_vec(),
        opts.parallel,
        |entry| {
            let frame = entry.frame(budget).expect("corpus frames build");
            let mut map = BTreeMap::new();
            for id in PropertyId::all() {
                let v = props::check(&frame, id, opts).expect("corpus checks run");
                map.insert(id, v.status);
            }
            (entry.name.to_string(), map)
        },
    );

    let mut report = AuditReport {
        frames_checked: verdict_maps.len(),
        arrow_failures: Vec::new(),
        separation_failures: Vec::new(),
    };
    for (name, map) in &verdict_maps {
        for (stronger, weaker) in implication_arrows() {
            if map[&stronger] == Status::Satisfied && map[&weaker] == Status::Violated {
                report.arrow_failures.push(ArrowFailure {
                    entry: name.clone(),
                    stronger: stronger.name().to_string(),
                    weaker: weaker.name().to_string(),
                });
            }
        }
    }
    for (entry_name, expected) in separations() {
        match verdict_maps.iter().find(|(n, _)| n == entry_name) {
            None => report
                .separation_failures
                .push(format!("separating program {entry_name} missing from the corpus")),
            Some((_, map)) => {
                for (id, want) in expected {
                    if map[&id] != want {
                        report.separation_failures.push(format!(
                            "{entry_name}: expected {} {:?}, got {:?}",
                            id.name(),
                            want,
                            map[&id]
                        ));
                    }
                }
            }
        }
    }
    report
}

pub fn default_audit(opts: &CheckOpts, budget: usize) -> AuditReport {
    implication_audit(&corpus::audit_corpus(), opts, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::named_corpus;

    fn entry(name: &str) -> Entry {
        named_corpus()
            .into_iter()
            .find(|e| e.name == name)
            .unwrap_or_else(|| panic!("no corpus entry {name}"))
    }

    fn run_trace(name: &str, prop: TraceProp) -> TraceVerdict {
        let e = entry(name);
        let p = e.program().unwrap();
        trace_check(&p, &e.ctx, prop, &TraceOpts::default()).unwrap()
    }

    #[test]
    fn copy_violates_trace_confidentiality() {
        let v = run_trace("copy", TraceProp::TraceConf);
        assert_eq!(v.status, Status::Violated);
        let w = v.witness.unwrap();
        assert_eq!(w.stores, vec!["00", "10"]);
    }

    #[test]
    fn diverging_copy_satisfies_ti_trace_confidentiality() {
        let v = run_trace("conf-iii", TraceProp::TiTraceConf);
        assert_eq!(v.status, Status::Satisfied);
    }

    #[test]
    fn fig1_ii_violates_trace_rd() {
        let v = run_trace("fig1-ii", TraceProp::TraceRd);
        assert_eq!(v.status, Status::Violated);
        assert_eq!(v.witness.unwrap().stores.len(), 4);
    }

    #[test]
    fn te_ii_violates_trace_te() {
        let v = run_trace("te-ii", TraceProp::TraceTe);
        assert_eq!(v.status, Status::Violated);
    }

    #[test]
    fn skip_satisfies_all_trace_definitions() {
        let ctx = SecurityContext::new(&["A"], &[("a", &[0, 1]), ("b", &[0, 1])])
            .with_read("A", &["a"])
            .with_write("A", &["a"]);
        let p = Program::new("skip", ctx.declared()).unwrap();
        for prop in TraceProp::all() {
            let v = trace_check(&p, &ctx, prop, &TraceOpts::default()).unwrap();
            assert_eq!(v.status, Status::Satisfied, "{}", prop.name());
        }
    }

    #[test]
    fn ti_escape_strictly_weakens() {
        // on the diverging matrix rows, removing the escape flips the
        // trace verdicts from satisfied to violated
        let strict = TraceOpts {
            ti_escape: false,
            ..TraceOpts::default()
        };
        let mut saw_difference = false;
        for name in ["fig1-iii", "fig1-iv", "fig1-v"] {
            let e = entry(name);
            let p = e.program().unwrap();
            let with = trace_check(&p, &e.ctx, TraceProp::TraceRd, &TraceOpts::default()).unwrap();
            let without = trace_check(&p, &e.ctx, TraceProp::TraceRd, &strict).unwrap();
            if with.status == Status::Satisfied && without.status == Status::Violated {
                saw_difference = true;
            }
            // never the other way around
            assert!(
                !(with.status == Status::Violated && without.status == Status::Satisfied),
                "{name}: escape must only excuse"
            );
        }
        assert!(saw_difference);
    }

    #[test]
    fn witnesses_vary_only_quantified_variables() {
        let v = run_trace("copy", TraceProp::TraceConf);
        let w = v.witness.unwrap();
        // stores "ab": only a (the unreadable variable) may differ
        let (s1, s2) = (&w.stores[0], &w.stores[1]);
        assert_eq!(s1.chars().nth(1), s2.chars().nth(1));
    }

    #[test]
    fn generator_is_deterministic_and_supported() {
        let (a, _) = gen_program(7, GenBounds::default());
        let (b, _) = gen_program(7, GenBounds::default());
        assert_eq!(a, b);
        // the silent loop is the only unbounded construct, so no seed
        // may produce a store-changing cycle or blow the budget
        for seed in 0..500 {
            let (_, program, _) = gen_entry(seed, GenBounds::default());
            let runs = trace::unfold_all(&program, 10_000, 4096, false).unwrap();
            let again = trace::unfold_all(&program, 10_000, 4096, true).unwrap();
            for (run, rerun) in runs.iter().zip(&again) {
                assert!(
                    run.supported(),
                    "seed {seed} produced an unsupported run: {:?}",
                    run.status
                );
                // determinism: re-unfolding yields the same trace
                assert_eq!(run.stores, rerun.stores);
                assert_eq!(run.status, rerun.status);
            }
        }
    }

    #[test]
    fn tiny_bounds_stay_parseable() {
        for seed in 0..50 {
            let (source, program, _) = gen_entry(
                seed,
                GenBounds {
                    max_vars: 1,
                    max_stmts: 1,
                },
            );
            assert!(!program.vars.is_empty(), "{source}");
        }
    }

    #[test]
    fn differential_agrees_on_the_copy_program() {
        let e = entry("copy");
        let p = e.program().unwrap();
        let report =
            differential(&p, &e.ctx, &TraceOpts::default(), &CheckOpts::default()).unwrap();
        assert_eq!(report.disagreements(), 0, "{report:?}");
    }

    #[test]
    fn differential_skips_refined_frames() {
        let e = entry("endorse-first");
        let p = e.program().unwrap();
        let report =
            differential(&p, &e.ctx, &TraceOpts::default(), &CheckOpts::default()).unwrap();
        assert_eq!(report.disagreements(), 0);
        assert!(report
            .pairings
            .iter()
            .any(|p| p.status == PairingStatus::Skipped && p.pairing.contains("INTEG")));
    }
}
