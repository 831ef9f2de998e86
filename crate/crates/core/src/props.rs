//! The modal security property catalogue: each property is a formula
//! template quantified over every world, agent, and admissible
//! temporally sound world set.

use crate::bitset::Mask;
use crate::frame::{FrameError, SecurityFrame, World};
use crate::logic::{
    self, dictionary, render_cuts, CutStream, Cuts, Formula, Mode, RelName,
    DEFAULT_EXHAUSTIVE_BOUND,
};
use crate::policy::SecurityContext;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum PropertyId {
    Conf,
    TiConf,
    TiConfIntermediate,
    PiConf,
    Integ,
    TiInteg,
    CauseInteg,
    TiCauseInteg,
    Rd,
    RdSimplified,
    TiRd,
    RdVarA,
    RdVarB,
    RdAlt,
    Te,
    TiTe,
    TeAlt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stability {
    Any,
    WriteStable,
    ReadStable,
}

impl PropertyId {
    pub fn all() -> [PropertyId; 17] {
        use PropertyId::*;
        [
            Conf,
            TiConf,
            TiConfIntermediate,
            PiConf,
            Integ,
            TiInteg,
            CauseInteg,
            TiCauseInteg,
            Rd,
            RdSimplified,
            TiRd,
            RdVarA,
            RdVarB,
            RdAlt,
            Te,
            TiTe,
            TeAlt,
        ]
    }

    pub fn name(&self) -> &'static str {
        use PropertyId::*;
        match self {
            Conf => "CONF",
            TiConf => "TI_CONF",
            TiConfIntermediate => "TI_CONF_INTERMEDIATE",
            PiConf => "PI_CONF",
            Integ => "INTEG",
            TiInteg => "TI_INTEG",
            CauseInteg => "CAUSE_INTEG",
            TiCauseInteg => "TI_CAUSE_INTEG",
            Rd => "RD",
            RdSimplified => "RD_SIMPLIFIED",
            TiRd => "TI_RD",
            RdVarA => "RD_VAR_A",
            RdVarB => "RD_VAR_B",
            RdAlt => "RD_ALT",
            Te => "TE",
            TiTe => "TI_TE",
            TeAlt => "TE_ALT",
        }
    }

    pub fn parse(name: &str) -> Option<PropertyId> {
        PropertyId::all()
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(name))
    }

    /// Which temporally sound sets the quantifier admits.
    pub fn stability(&self) -> Stability {
        use PropertyId::*;
        match self {
            Rd | RdSimplified | TiRd | RdVarA | RdVarB | RdAlt => Stability::WriteStable,
            Te | TiTe | TeAlt => Stability::ReadStable,
            _ => Stability::Any,
        }
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Satisfied,
    Violated,
    Unsupported,
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub world: WorldRef,
    pub agent: String,
    /// Rendered description of the violating set.
    pub phi: String,
    /// The cut vector itself.
    pub phi_cuts: String,
    /// The instantiated template.
    pub formula: String,
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct WorldRef {
    pub run: usize,
    /// Depth within the run; `None` is the limit world.
    pub depth: Option<usize>,
}

impl From<World> for WorldRef {
    fn from(w: World) -> WorldRef {
        WorldRef {
            run: w.run,
            depth: match w.depth {
                crate::frame::Depth::At(d) => Some(d),
                crate::frame::Depth::Limit => None,
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub property: String,
    pub status: Status,
    pub mode: String,
    pub witnesses: Vec<Witness>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub witness_cuts: Option<Cuts>,
}

impl Verdict {
    pub fn satisfied(&self) -> bool {
        self.status == Status::Satisfied
    }

    pub fn violated(&self) -> bool {
        self.status == Status::Violated
    }
}

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("exhaustive enumeration needs {count} cut vectors, above the bound {bound}")]
    ExhaustiveBound { count: u128, bound: u128 },
    #[error("unknown property '{0}'")]
    UnknownProperty(String),
}

#[derive(Clone, Debug)]
pub struct CheckOpts {
    pub mode: Mode,
    /// Restrict the agent quantifier (defaults to every agent).
    pub agents: Option<Vec<String>>,
    pub parallel: bool,
    pub exhaustive_bound: u128,
}

impl Default for CheckOpts {
    fn default() -> Self {
        CheckOpts {
            mode: Mode::Runset(2),
            agents: None,
            parallel: true,
            exhaustive_bound: DEFAULT_EXHAUSTIVE_BOUND,
        }
    }
}

/// Per-candidate precomputation shared by all templates.
struct SPre {
    in_mask: Mask,
    dia: Mask,
}

impl SPre {
    fn new(frame: &SecurityFrame, cuts: &Cuts) -> SPre {
        SPre {
            in_mask: cuts.mask(frame),
            dia: cuts.run_closure(frame),
        }
    }
}

/// Worlds at which the instantiated template fails.
fn violation_mask(
    frame: &SecurityFrame,
    agent_idx: usize,
    id: PropertyId,
    s: &SPre,
) -> Mask {
    let rels = frame.agent_rels(agent_idx);
    let halting = frame.halting_runs_mask();
    let diverge = frame.diverging_mask();
    let in_s = &s.in_mask;
    let dia_s = &s.dia;

    use PropertyId::*;
    match id {
        Conf => {
            let learn = frame.dia_t(&rels.kc.box_(in_s));
            learn.minus(&rels.kp.box_(dia_s))
        }
        TiConf => {
            let learn = frame.dia_t(&rels.kc.box_(in_s));
            halting
                .and(&learn)
                .minus(&rels.kp.box_(&diverge.or(dia_s)))
        }
        TiConfIntermediate => {
            let learn = frame.dia_t(&rels.kc.box_(in_s));
            halting.and(&learn).minus(&rels.kp.box_(dia_s))
        }
        PiConf => {
            let gap = rels.kc.box_(in_s).minus(&rels.cnt.box_(in_s));
            frame.dia_t(&gap).minus(&rels.kp.box_(dia_s))
        }
        Integ => {
            let can = rels.wc.dia_(dia_s);
            can.minus(&frame.dia_t(&rels.wp.dia_(in_s)))
        }
        TiInteg => {
            let can = rels.wc.dia_(&halting.and(dia_s));
            can.minus(&diverge.or(&frame.dia_t(&rels.wp.dia_(in_s))))
        }
        CauseInteg => {
            let fixed = frame.dia_t(&rels.wp.box_(in_s));
            fixed.minus(&rels.wc.box_(dia_s))
        }
        TiCauseInteg => {
            let fixed = frame.dia_t(&rels.wp.box_(in_s));
            halting
                .and(&fixed)
                .minus(&rels.wc.box_(&diverge.or(dia_s)))
        }
        Rd => {
            let inner = frame
                .dia_t(&rels.kc.box_(in_s))
                .minus(&rels.kp.box_(dia_s));
            rels.wc.dia_(&inner).minus(&inner)
        }
        RdSimplified => {
            let inner = frame.dia_t(&rels.kc.box_(in_s));
            rels.wc.dia_(&inner).minus(&inner)
        }
        TiRd => {
            let learn = frame.dia_t(&rels.kc.box_(in_s));
            // [K^C](□¬S ⇒ ◇⇓) = [K^C](◇S ∨ ◇⇓)
            let cond = rels.kc.box_(&dia_s.or(halting));
            if same_partition(&rels.kc, &rels.kp) {
                // the simplified form under K^C = K^P; the permission
                // conjuncts of the general display are not redundant on
                // every frame, and the trace equivalence holds for this
                // form
                let inner = halting.and(&learn).and(&cond);
                let concl = diverge.or(&learn);
                rels.wc.dia_(&inner).minus(&concl)
            } else {
                let notperm = rels.kp.box_(&diverge.or(dia_s)).not();
                let inner = halting.and(&learn).and(&notperm).and(&cond);
                let concl = diverge.or(&learn.and(&notperm));
                rels.wc.dia_(&inner).minus(&concl)
            }
        }
        RdVarA => {
            let learn = frame.dia_t(&rels.kc.box_(in_s));
            let inner = halting.and(&learn);
            rels.wc.dia_(&inner).minus(&diverge.or(&learn))
        }
        RdVarB => {
            let learn = frame.dia_t(&rels.kc.box_(in_s));
            let notperm = rels.kc.box_(&diverge.or(dia_s)).not();
            let inner = halting.and(&learn).and(&notperm);
            rels.wc.dia_(&inner).minus(&diverge.or(&learn))
        }
        RdAlt => {
            let learn = frame.dia_t(&rels.kc.box_(in_s));
            let notperm = rels.kp.box_(&diverge.or(dia_s)).not();
            let inner = halting.and(&learn).and(&notperm);
            rels.wc.dia_(&inner).minus(&inner)
        }
        Te => {
            let inner = frame
                .dia_t(&rels.wp.box_(in_s))
                .minus(&rels.wc.box_(dia_s));
            rels.kc.dia_(&inner).minus(&inner)
        }
        TiTe => {
            let cause = frame.dia_t(&rels.wp.box_(in_s));
            let notcap = rels.wc.box_(&diverge.or(dia_s)).not();
            let cond = rels.wp.box_(&dia_s.or(halting));
            let inner = halting.and(&cause).and(&notcap).and(&cond);
            let concl = diverge.or(&cause.and(&notcap));
            rels.kc.dia_(&inner).minus(&concl)
        }
        TeAlt => {
            let lhs = rels
                .wc
                .dia_(dia_s)
                .minus(&frame.dia_t(&rels.wp.dia_(in_s)));
            lhs.minus(&rels.kc.box_(&lhs))
        }
    }
}

/// The instantiated template as a formula, for witness re-checking.
/// `kp_equals_kc` selects the simplified robust-declassification form
/// evaluated on frames without declassification.
pub fn template_formula(
    id: PropertyId,
    agent: &str,
    cuts: &Cuts,
    kp_equals_kc: bool,
) -> Formula {
    use Formula as F;
    let s = || F::SetAtom(cuts.clone());
    let kc = || RelName::Kc(agent.into());
    let kp = || RelName::Kp(agent.into());
    let wc = || RelName::Wc(agent.into());
    let wp = || RelName::Wp(agent.into());
    let cnt = || RelName::Count(agent.into());
    let halts = || F::eventually(F::Halted);
    let diverges = || F::always(F::not(F::Halted));
    let learn = || F::eventually(F::box_(kc(), s()));
    let perm = || F::box_(kp(), F::eventually(s()));
    let perm_ti = || F::box_(kp(), F::or(diverges(), F::eventually(s())));
    let side_cond_k = || {
        F::box_(
            kc(),
            F::implies(F::always(F::not(s())), halts()),
        )
    };

    use PropertyId::*;
    match id {
        Conf => F::implies(learn(), perm()),
        TiConf => F::implies(F::and(halts(), learn()), perm_ti()),
        TiConfIntermediate => F::implies(F::and(halts(), learn()), perm()),
        PiConf => F::implies(
            F::eventually(F::and(
                F::box_(kc(), s()),
                F::not(F::box_(cnt(), s())),
            )),
            perm(),
        ),
        Integ => F::implies(
            F::dia(wc(), F::eventually(s())),
            F::eventually(F::dia(wp(), s())),
        ),
        TiInteg => F::implies(
            F::dia(wc(), F::and(halts(), F::eventually(s()))),
            F::or(diverges(), F::eventually(F::dia(wp(), s()))),
        ),
        CauseInteg => F::implies(
            F::eventually(F::box_(wp(), s())),
            F::box_(wc(), F::eventually(s())),
        ),
        TiCauseInteg => F::implies(
            F::and(halts(), F::eventually(F::box_(wp(), s()))),
            F::box_(wc(), F::or(diverges(), F::eventually(s()))),
        ),
        Rd => {
            let inner = F::and(learn(), F::not(perm()));
            F::implies(F::dia(wc(), inner.clone()), inner)
        }
        RdSimplified => F::implies(F::dia(wc(), learn()), learn()),
        TiRd => {
            if kp_equals_kc {
                let inner = F::and(F::and(halts(), learn()), side_cond_k());
                F::implies(F::dia(wc(), inner), F::or(diverges(), learn()))
            } else {
                let inner = F::and(
                    F::and(halts(), learn()),
                    F::and(F::not(perm_ti()), side_cond_k()),
                );
                F::implies(
                    F::dia(wc(), inner),
                    F::or(diverges(), F::and(learn(), F::not(perm_ti()))),
                )
            }
        }
        RdVarA => F::implies(
            F::dia(wc(), F::and(halts(), learn())),
            F::or(diverges(), learn()),
        ),
        RdVarB => {
            let notperm_c = F::not(F::box_(kc(), F::or(diverges(), F::eventually(s()))));
            F::implies(
                F::dia(wc(), F::and(F::and(halts(), learn()), notperm_c)),
                F::or(diverges(), learn()),
            )
        }
        RdAlt => {
            let inner = F::and(F::and(halts(), learn()), F::not(perm_ti()));
            F::implies(F::dia(wc(), inner.clone()), inner)
        }
        Te => {
            let inner = F::and(
                F::eventually(F::box_(wp(), s())),
                F::not(F::box_(wc(), F::eventually(s()))),
            );
            F::implies(F::dia(kc(), inner.clone()), inner)
        }
        TiTe => {
            let cause = F::eventually(F::box_(wp(), s()));
            let notcap =
                F::not(F::box_(wc(), F::or(diverges(), F::eventually(s()))));
            let side = F::box_(
                wp(),
                F::implies(F::always(F::not(s())), halts()),
            );
            let inner = F::and(F::and(halts(), cause.clone()), F::and(notcap.clone(), side));
            F::implies(
                F::dia(kc(), inner),
                F::or(diverges(), F::and(cause, notcap)),
            )
        }
        TeAlt => {
            let lhs = F::and(
                F::dia(wc(), F::eventually(s())),
                F::not(F::eventually(F::dia(wp(), s()))),
            );
            F::implies(lhs.clone(), F::box_(kc(), lhs))
        }
    }
}

fn admissible(frame: &SecurityFrame, agent_idx: usize, id: PropertyId, cuts: &Cuts) -> bool {
    match id.stability() {
        Stability::Any => true,
        Stability::WriteStable => logic::is_write_stable(frame, agent_idx, cuts),
        Stability::ReadStable => logic::is_read_stable(frame, agent_idx, cuts),
    }
}

struct Found {
    cuts: Cuts,
    agent_idx: usize,
    agent_rank: usize,
    mask: Mask,
    world: usize,
}

impl Found {
    /// Witness order: world by run/depth, then agent, then discovery
    /// (candidate sets are tried dictionary-first, then in cut-vector
    /// lexicographic order, so ties keep the more readable set).
    fn beats(&self, other: &Option<Found>) -> bool {
        match other {
            None => true,
            Some(o) => (self.world, self.agent_rank) < (o.world, o.agent_rank),
        }
    }

    fn optimal(&self) -> bool {
        self.world == 0 && self.agent_rank == 0
    }
}

fn scan_candidate(
    frame: &SecurityFrame,
    id: PropertyId,
    agent_indices: &[usize],
    cuts: &Cuts,
) -> Option<Found> {
    let pre = SPre::new(frame, cuts);
    let mut best: Option<Found> = None;
    for (rank, &ai) in agent_indices.iter().enumerate() {
        if !admissible(frame, ai, id, cuts) {
            continue;
        }
        let viol = violation_mask(frame, ai, id, &pre);
        if let Some(world) = viol.first_set() {
            let cand = Found {
                cuts: cuts.clone(),
                agent_idx: ai,
                agent_rank: rank,
                mask: viol,
                world,
            };
            if cand.beats(&best) {
                best = Some(cand);
            }
        }
    }
    best
}

/// Decide one property. The search tries human-readable candidate sets
/// (time-0 atoms and their two-literal combinations) first, then sweeps
/// the full cut-vector family for the mode; the verdict is independent
/// of the order, the reported witness is the first hit.
pub fn check(
    frame: &SecurityFrame,
    id: PropertyId,
    opts: &CheckOpts,
) -> Result<Verdict, CheckError> {
    if opts.mode == Mode::Exhaustive {
        let count = logic::exhaustive_count(frame);
        if count > opts.exhaustive_bound {
            return Err(CheckError::ExhaustiveBound {
                count,
                bound: opts.exhaustive_bound,
            });
        }
    }

    let agent_indices: Vec<usize> = match &opts.agents {
        None => (0..frame.agents.len()).collect(),
        Some(names) => {
            let mut idx = Vec::new();
            for name in names {
                let i = frame
                    .agents
                    .iter()
                    .position(|a| a == name)
                    .ok_or_else(|| FrameError::UnknownAgent(name.clone()))?;
                idx.push(i);
            }
            idx.sort_unstable();
            idx
        }
    };

    // Sweep every candidate set; the reported witness minimizes
    // (world, agent) with ties broken by candidate order. The sweep
    // stops early only once that minimum cannot improve.
    let mut found: Option<Found> = None;
    for entry in dictionary(frame) {
        if let Some(f) = scan_candidate(frame, id, &agent_indices, &entry.cuts) {
            if f.beats(&found) {
                found = Some(f);
            }
            if found.as_ref().is_some_and(Found::optimal) {
                break;
            }
        }
    }
    if !found.as_ref().is_some_and(Found::optimal) {
        let mut stream = CutStream::new(frame, opts.mode);
        loop {
            let chunk = stream.next_chunk(8192);
            if chunk.is_empty() {
                break;
            }
            let candidates = crate::par::map(chunk, opts.parallel, |cuts| {
                scan_candidate(frame, id, &agent_indices, &cuts)
            });
            for cand in candidates.into_iter().flatten() {
                if cand.beats(&found) {
                    found = Some(cand);
                }
            }
            if found.as_ref().is_some_and(Found::optimal) {
                break;
            }
        }
    }

    let verdict = match found {
        None => Verdict {
            property: id.name().to_string(),
            status: Status::Satisfied,
            mode: opts.mode.to_string(),
            witnesses: Vec::new(),
            warnings: Vec::new(),
            witness_cuts: None,
        },
        Some(f) => {
            let agent = frame.agents[f.agent_idx].clone();
            let rendered = render_cuts(frame, &f.cuts);
            let rels = frame.agent_rels(f.agent_idx);
            let formula =
                template_formula(id, &agent, &f.cuts, same_partition(&rels.kc, &rels.kp));
            let formula_str = formula.to_string();
            let witnesses = f
                .mask
                .iter_set()
                .map(|w| Witness {
                    world: frame.world(w).into(),
                    agent: agent.clone(),
                    phi: rendered.clone(),
                    phi_cuts: f.cuts.to_string(),
                    formula: formula_str.clone(),
                })
                .collect();
            Verdict {
                property: id.name().to_string(),
                status: Status::Violated,
                mode: opts.mode.to_string(),
                witnesses,
                warnings: Vec::new(),
                witness_cuts: Some(f.cuts),
            }
        }
    };
    Ok(verdict)
}

pub fn check_all(
    frame: &SecurityFrame,
    ids: &[PropertyId],
    opts: &CheckOpts,
) -> Result<Vec<Verdict>, CheckError> {
    ids.iter().map(|id| check(frame, *id, opts)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RdEquivalence {
    pub status: Status,
    pub detail: String,
}

fn same_partition(a: &crate::frame::Partition, b: &crate::frame::Partition) -> bool {
    (0..a.class_of.len()).all(|w| a.class_mask(w) == b.class_mask(w))
}

/// On frames without declassification the full and simplified robust
/// declassification templates must agree, witnesses included.
pub fn check_rd_equivalence(
    frame: &SecurityFrame,
    opts: &CheckOpts,
) -> Result<RdEquivalence, CheckError> {
    for agent in &frame.agents {
        let rels = frame.rels(agent)?;
        if !same_partition(&rels.kc, &rels.kp) {
            return Ok(RdEquivalence {
                status: Status::Unsupported,
                detail: format!("K^C differs from K^P for agent {agent} (declassified frame)"),
            });
        }
    }
    let full = check(frame, PropertyId::Rd, opts)?;
    let simplified = check(frame, PropertyId::RdSimplified, opts)?;
    if full.status != simplified.status {
        return Ok(RdEquivalence {
            status: Status::Violated,
            detail: format!(
                "verdicts differ: full={:?} simplified={:?}",
                full.status, simplified.status
            ),
        });
    }
    // The redundancy argument for the dropped conjunct goes through
    // commutation, so pointwise agreement is only guaranteed where the
    // initial-world squares live; the full form's witness must still
    // re-check as a violation of the simplified template.
    if let (Some(cuts), Some(w)) = (&full.witness_cuts, full.witnesses.first()) {
        let formula = template_formula(
            PropertyId::RdSimplified,
            &w.agent,
            cuts,
            true,
        );
        let idx = frame
            .world_index(
                w.world.run,
                w.world
                    .depth
                    .map(crate::frame::Depth::At)
                    .unwrap_or(crate::frame::Depth::Limit),
            )
            .expect("witness world exists");
        if crate::logic::eval(frame, idx, &formula)? {
            return Ok(RdEquivalence {
                status: Status::Violated,
                detail: format!(
                    "the full-form witness {} at {:?} does not re-check under the simplified form",
                    w.phi, w.world
                ),
            });
        }
    }
    Ok(RdEquivalence {
        status: Status::Satisfied,
        detail: "full and simplified robust declassification verdicts coincide".into(),
    })
}

/// Warnings about assumptions the equivalence theorems need.
pub fn audit_theorem_assumptions(
    frame: &SecurityFrame,
    ctx: &SecurityContext,
    id: PropertyId,
) -> Vec<String> {
    let mut warnings = Vec::new();
    if !matches!(id, PropertyId::TiRd | PropertyId::TiTe) {
        return warnings;
    }
    if !ctx.signals_termination {
        let all_halt = frame.runs.iter().all(|r| r.halts);
        if all_halt {
            warnings.push(
                "signals_termination is not set (benign here: every run halts)".to_string(),
            );
        } else {
            warnings.push("signals_termination is not set".to_string());
        }
    }
    for agent in &ctx.agents {
        let w = ctx.write_set(agent);
        let r = ctx.read_set(agent);
        if !w.is_subset(&r) {
            warnings.push(format!("W({agent}) is not a subset of R({agent})"));
        }
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::build_frame;
    use crate::lang::Program;
    use crate::value::Value;

    fn prog(src: &str, decls: &[(&str, &[i64])]) -> Program {
        let declared: Vec<(String, Vec<Value>)> = decls
            .iter()
            .map(|(v, d)| (v.to_string(), d.iter().map(|n| Value::Int(*n)).collect()))
            .collect();
        Program::new(src, &declared).unwrap()
    }

    fn check_one(frame: &SecurityFrame, id: PropertyId) -> Verdict {
        check(frame, id, &CheckOpts::default()).unwrap()
    }

    fn conf_frame(src: &str) -> SecurityFrame {
        // the IV.A trio context: A reads p, s secret, clocked observer
        let p = prog(src, &[("p", &[0]), ("s", &[0, 1])]);
        let ctx = SecurityContext::new(&["A"], &[])
            .with_read("A", &["p"])
            .with_flags(true, true);
        build_frame(&p, &ctx, 1000).unwrap()
    }

    #[test]
    fn confidentiality_trio() {
        let f1 = conf_frame("p := s");
        assert!(check_one(&f1, PropertyId::Conf).violated());
        assert!(check_one(&f1, PropertyId::TiConf).violated());

        let f2 = conf_frame("p := s; if s = 1 then loop");
        assert!(check_one(&f2, PropertyId::Conf).violated());
        assert!(check_one(&f2, PropertyId::TiConf).satisfied());
        assert!(check_one(&f2, PropertyId::TiConfIntermediate).violated());

        let f3 = conf_frame("p := s; loop");
        assert!(check_one(&f3, PropertyId::Conf).violated());
        assert!(check_one(&f3, PropertyId::TiConf).satisfied());
        assert!(check_one(&f3, PropertyId::TiConfIntermediate).satisfied());
    }

    #[test]
    fn copy_program_witness_is_the_secret_bit() {
        let p = prog("b := a", &[("a", &[0, 1]), ("b", &[0])]);
        let ctx = SecurityContext::new(&["A"], &[])
            .with_read("A", &["b"])
            .with_flags(true, false);
        let f = build_frame(&p, &ctx, 100).unwrap();
        let v = check_one(&f, PropertyId::Conf);
        assert!(v.violated());
        let w = &v.witnesses[0];
        assert_eq!(w.phi, "a@0=0");
        assert_eq!(w.world, WorldRef { run: 0, depth: Some(0) });
    }

    #[test]
    fn skip_program_satisfies_everything() {
        let p = prog("skip", &[("u", &[0, 1]), ("s", &[0, 1]), ("t", &[0, 1])]);
        let ctx = SecurityContext::new(&["A"], &[])
            .with_read("A", &["t", "u"])
            .with_write("A", &["u"])
            .with_flags(true, false);
        let f = build_frame(&p, &ctx, 100).unwrap();
        for id in PropertyId::all() {
            let v = check_one(&f, id);
            assert!(v.satisfied(), "{id} should hold on skip: {v:?}");
        }
    }

    #[test]
    fn integrity_examples() {
        let decls: &[(&str, &[i64])] = &[("u", &[0, 1]), ("t", &[0, 1])];
        let ctx = SecurityContext::new(&["A"], &[])
            .with_read("A", &["t", "u"])
            .with_write("A", &["u"])
            .with_flags(true, false);

        let guarded = build_frame(&prog("u := 0; t := u", decls), &ctx, 100).unwrap();
        assert!(check_one(&guarded, PropertyId::Integ).satisfied());

        let direct = build_frame(&prog("t := u", decls), &ctx, 100).unwrap();
        assert!(check_one(&direct, PropertyId::Integ).violated());
        let cause = check_one(&direct, PropertyId::CauseInteg);
        assert!(cause.violated());
        assert_eq!(cause.witnesses[0].phi, "u@0=0");
    }

    #[test]
    fn event_endorsement_flips_integrity() {
        let decls: &[(&str, &[i64])] = &[("u", &[0, 1]), ("t", &[0, 1])];
        let mut ctx = SecurityContext::new(&["A"], &[])
            .with_read("A", &["t", "u"])
            .with_write("A", &["u"]);
        ctx.endorse = crate::policy::EndorseMode::Event;

        let before = build_frame(&prog("endorse(A, t); t := u", decls), &ctx, 100).unwrap();
        let v = check_one(&before, PropertyId::Integ);
        assert!(v.satisfied(), "endorse-first should satisfy integrity: {v:?}");

        let after = build_frame(&prog("t := u; endorse(A, t)", decls), &ctx, 100).unwrap();
        assert!(check_one(&after, PropertyId::Integ).violated());

        let mut none = ctx.clone();
        none.endorse = crate::policy::EndorseMode::None;
        let plain = build_frame(&prog("endorse(A, t); t := u", decls), &none, 100).unwrap();
        assert!(check_one(&plain, PropertyId::Integ).violated());
    }

    #[test]
    fn per_variable_endorsement_excuses_the_listed_sink() {
        let decls: &[(&str, &[i64])] = &[("u", &[0, 1]), ("t", &[0, 1])];
        let mut ctx = SecurityContext::new(&["A"], &[])
            .with_read("A", &["t", "u"])
            .with_write("A", &["u"]);
        ctx.endorse = crate::policy::EndorseMode::PerVariable(
            [("A".to_string(), ["t".to_string()].into_iter().collect())]
                .into_iter()
                .collect(),
        );
        let f = build_frame(&prog("t := u", decls), &ctx, 100).unwrap();
        assert!(check_one(&f, PropertyId::Integ).satisfied());
        // a second, unendorsed sink still violates
        let decls3: &[(&str, &[i64])] = &[("u", &[0, 1]), ("t", &[0, 1]), ("w", &[0, 1])];
        let f2 = build_frame(&prog("t := u; w := u", decls3), &ctx, 100).unwrap();
        assert!(check_one(&f2, PropertyId::Integ).violated());
    }

    #[test]
    fn transparent_endorsement_trio() {
        let ctx = SecurityContext::new(&["A"], &[])
            .with_read("A", &["t", "u", "t1", "t2"])
            .with_write("A", &["u"])
            .with_flags(true, false);
        let d2: &[(&str, &[i64])] = &[("s", &[0, 1]), ("t", &[0, 1]), ("u", &[0, 1])];
        // trusted sinks start zeroed, as in the motivating endorsement
        // pipelines; with free trusted initials the secret branch choice
        // becomes observable through the fix history
        let d3: &[(&str, &[i64])] = &[
            ("s", &[0, 1]),
            ("t1", &[0]),
            ("t2", &[0]),
            ("u", &[0, 1]),
        ];
        let mut c2 = ctx.clone();
        c2.read.get_mut("A").unwrap().retain(|v| v != "t1" && v != "t2");

        let plain = build_frame(&prog("t := u", d2), &c2, 100).unwrap();
        assert!(check_one(&plain, PropertyId::TiTe).satisfied());

        let secret_guard = build_frame(&prog("if s = 1 then t := u", d2), &c2, 100).unwrap();
        assert!(check_one(&secret_guard, PropertyId::TiTe).violated());

        let mut c3 = ctx.clone();
        c3.read.get_mut("A").unwrap().retain(|v| v != "t");
        let split = build_frame(
            &prog("if s = 1 then t1 := u else t2 := u", d3),
            &c3,
            100,
        )
        .unwrap();
        let v = check_one(&split, PropertyId::TiTe);
        assert!(v.satisfied(), "how-but-not-whether should satisfy TI_TE: {v:?}");
    }

    #[test]
    fn te_alt_rejects_the_plain_copy() {
        let d2: &[(&str, &[i64])] = &[("s", &[0, 1]), ("t", &[0, 1]), ("u", &[0, 1])];
        let ctx = SecurityContext::new(&["A"], &[])
            .with_read("A", &["t", "u"])
            .with_write("A", &["u"])
            .with_flags(true, false);
        let f = build_frame(&prog("t := u", d2), &ctx, 100).unwrap();
        assert!(check_one(&f, PropertyId::TeAlt).violated());
    }

    #[test]
    fn progress_insensitive_pair() {
        let decls: &[(&str, &[i64])] =
            &[("s", &[0, 1, 2, 3]), ("i", &[0]), ("p", &[0])];
        let ctx = SecurityContext::new(&["A"], &[]).with_read("A", &["p"]);

        let ascending = build_frame(&prog("for i = 0 .. s do p := i", decls), &ctx, 1000).unwrap();
        assert!(check_one(&ascending, PropertyId::PiConf).satisfied());
        assert!(check_one(&ascending, PropertyId::Conf).violated());
        assert!(check_one(&ascending, PropertyId::TiConf).violated());

        let descending =
            build_frame(&prog("for i = 0 .. s do p := s - i", decls), &ctx, 1000).unwrap();
        assert!(check_one(&descending, PropertyId::PiConf).violated());
    }

    #[test]
    fn rd_boundary_programs() {
        let decls: &[(&str, &[i64])] = &[("u", &[0, 1]), ("s", &[0, 1]), ("p", &[0])];
        let ctx = SecurityContext::new(&["A"], &[])
            .with_read("A", &["p", "u"])
            .with_write("A", &["u"])
            .with_flags(true, true);

        let else_loop =
            build_frame(&prog("if u = 1 then p := s else loop", decls), &ctx, 1000).unwrap();
        assert!(check_one(&else_loop, PropertyId::TiRd).satisfied());
        assert!(check_one(&else_loop, PropertyId::RdAlt).violated());

        let trailing =
            build_frame(&prog("p := s; if u = 0 then loop", decls), &ctx, 1000).unwrap();
        let rd = check_one(&trailing, PropertyId::Rd);
        assert!(rd.satisfied(), "{rd:?}");
        assert!(check_one(&trailing, PropertyId::RdAlt).violated());
    }

    #[test]
    fn declassified_xor_passes_confidentiality() {
        let p = prog(
            "p := s1 ^ s2",
            &[("p", &[0]), ("s1", &[0, 1]), ("s2", &[0, 1])],
        );
        let mut ctx = SecurityContext::new(&["A"], &[])
            .with_read("A", &["p"])
            .with_flags(true, false);
        let without = build_frame(&p, &ctx, 100).unwrap();
        assert!(check_one(&without, PropertyId::Conf).violated());

        ctx.declass.insert(
            "A".into(),
            crate::lang::Expr::bin(
                crate::lang::BinOp::Xor,
                crate::lang::Expr::var("s1"),
                crate::lang::Expr::var("s2"),
            ),
        );
        let with = build_frame(&p, &ctx, 100).unwrap();
        assert!(check_one(&with, PropertyId::Conf).satisfied());

        // world (p=0, s1=1, s2=1) satisfies [K^P]◇(p@1=0)
        let w = with.world_index(3, crate::frame::Depth::At(0)).unwrap();
        let phi = Formula::box_(
            RelName::Kp("A".into()),
            Formula::eventually(Formula::At {
                var: "p".into(),
                tau: 1,
                value: Value::Int(0),
            }),
        );
        assert!(logic::eval(&with, w, &phi).unwrap());
    }

    #[test]
    fn rd_equivalence_on_plain_and_declassified_frames() {
        let decls: &[(&str, &[i64])] = &[("u", &[0, 1]), ("s", &[0, 1]), ("p", &[0])];
        let ctx = SecurityContext::new(&["A"], &[])
            .with_read("A", &["p", "u"])
            .with_write("A", &["u"])
            .with_flags(true, true);
        let f = build_frame(&prog("if u = 1 then p := s", decls), &ctx, 1000).unwrap();
        let eq = check_rd_equivalence(&f, &CheckOpts::default()).unwrap();
        assert_eq!(eq.status, Status::Satisfied);

        let skip = build_frame(&prog("skip", decls), &ctx, 100).unwrap();
        assert_eq!(
            check_rd_equivalence(&skip, &CheckOpts::default()).unwrap().status,
            Status::Satisfied
        );

        let mut dctx = ctx.clone();
        dctx.declass
            .insert("A".into(), crate::lang::Expr::var("s"));
        let df = build_frame(&prog("if u = 1 then p := s", decls), &dctx, 1000).unwrap();
        assert_eq!(
            check_rd_equivalence(&df, &CheckOpts::default()).unwrap().status,
            Status::Unsupported
        );
    }

    #[test]
    fn witnesses_recheck_through_formula_evaluation() {
        let decls: &[(&str, &[i64])] = &[("u", &[0, 1]), ("s", &[0, 1]), ("p", &[0])];
        let ctx = SecurityContext::new(&["A"], &[])
            .with_read("A", &["p", "u"])
            .with_write("A", &["u"])
            .with_flags(true, true);
        let f = build_frame(&prog("if u = 1 then p := s", decls), &ctx, 1000).unwrap();
        for id in [PropertyId::Conf, PropertyId::Rd, PropertyId::TiRd] {
            let v = check_one(&f, id);
            if let Some(cuts) = &v.witness_cuts {
                let formula = template_formula(id, "A", cuts, true);
                for w in &v.witnesses {
                    let idx = f
                        .world_index(
                            w.world.run,
                            w.world
                                .depth
                                .map(crate::frame::Depth::At)
                                .unwrap_or(crate::frame::Depth::Limit),
                        )
                        .unwrap();
                    assert!(
                        !logic::eval(&f, idx, &formula).unwrap(),
                        "witness fails to re-check for {id}"
                    );
                }
            }
        }
    }

    #[test]
    fn assumption_audit() {
        let decls: &[(&str, &[i64])] = &[("u", &[0, 1]), ("s", &[0, 1]), ("p", &[0])];
        let bad_ctx = SecurityContext::new(&["A"], &[])
            .with_read("A", &["p"])
            .with_write("A", &["u"]);
        let f = build_frame(&prog("if u = 1 then p := s", decls), &bad_ctx, 1000).unwrap();
        let warnings = audit_theorem_assumptions(&f, &bad_ctx, PropertyId::TiRd);
        assert!(warnings.iter().any(|w| w.contains("not a subset")));
        assert!(warnings.iter().any(|w| w.contains("benign")));

        let good_ctx = SecurityContext::new(&["A"], &[])
            .with_read("A", &["p", "u"])
            .with_write("A", &["u"])
            .with_flags(true, false);
        let f2 = build_frame(&prog("if u = 1 then p := s", decls), &good_ctx, 1000).unwrap();
        assert!(audit_theorem_assumptions(&f2, &good_ctx, PropertyId::TiRd).is_empty());
    }
}
