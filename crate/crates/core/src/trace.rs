//! Run unfolding with lasso detection, destuttering, and agent
//! projections (view / fix) of traces.

use crate::lang::{step, Config, LangError, Program, Store};
use crate::policy::SecurityContext;
use crate::value::Value;
use std::collections::HashMap;
use thiserror::Error;

pub const DEFAULT_STEP_BUDGET: usize = 10_000;
pub const DEFAULT_INITIAL_BOUND: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Halted,
    /// Evaluation error (e.g. head of an empty input stream); treated as
    /// halted for termination purposes but reported distinctly.
    Stuck(LangError),
    /// A configuration repeated and the cycle leaves the store unchanged.
    SilentDiverge {
        /// Step count at which the repeat was detected.
        detected_at: usize,
    },
    /// A configuration repeated but the cycle changes the store.
    UnsupportedDiverge { detected_at: usize },
    BudgetExceeded,
}

#[derive(Clone, Debug)]
pub struct Run {
    pub initial: Store,
    /// Stores of the kept configurations. For silent divergence the
    /// sequence is truncated before the first repeated configuration.
    pub stores: Vec<Store>,
    pub status: RunStatus,
}

impl Run {
    pub fn halts(&self) -> bool {
        matches!(self.status, RunStatus::Halted | RunStatus::Stuck(_))
    }

    pub fn diverges_silently(&self) -> bool {
        matches!(self.status, RunStatus::SilentDiverge { .. })
    }

    pub fn supported(&self) -> bool {
        self.halts() || self.diverges_silently()
    }

    /// Highest explicit depth (stabilization point for diverging runs,
    /// halt point otherwise).
    pub fn max_depth(&self) -> usize {
        self.stores.len() - 1
    }

    /// Extend a silently diverging run with copies of its stabilized
    /// store up to `depth` (used by the synchronous frame construction).
    pub fn extend_to(&mut self, depth: usize) {
        debug_assert!(self.diverges_silently());
        while self.max_depth() < depth {
            self.stores.push(self.stores.last().unwrap().clone());
        }
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("initial store space has {count} entries, exceeding the bound {bound}")]
    TooManyInitialStores { count: usize, bound: usize },
    #[error("run from {initial} diverges with a store-changing cycle (detected at step {at})")]
    UnsupportedDivergence { initial: String, at: usize },
    #[error("run from {initial} exceeded the step budget of {budget}")]
    BudgetExceeded { initial: String, budget: usize },
    #[error("maximal {what} of a diverging run is infinite under a synchronous context")]
    InfiniteProjection { what: &'static str },
    #[error(transparent)]
    Lang(#[from] LangError),
}

/// All initial stores: the Cartesian product of the declared domains in
/// canonical (lexicographic by variable order) order.
pub fn enumerate_initial_stores(
    program: &Program,
    bound: usize,
) -> Result<Vec<Store>, TraceError> {
    let mut count: usize = 1;
    for v in &program.vars {
        count = count.saturating_mul(program.domains[v].len());
        if count > bound {
            return Err(TraceError::TooManyInitialStores { count, bound });
        }
    }
    let mut stores = vec![Store::new()];
    for v in &program.vars {
        let dom = &program.domains[v];
        let mut next = Vec::with_capacity(stores.len() * dom.len());
        for partial in &stores {
            for val in dom {
                let mut s = partial.clone();
                s.insert(v.clone(), val.clone());
                next.push(s);
            }
        }
        stores = next;
    }
    Ok(stores)
}

/// Unfold one run: step until halt, a repeated configuration, or budget
/// exhaustion.
pub fn unfold_run(program: &Program, initial: Store, budget: usize) -> Run {
    let mut seen: HashMap<Config, usize> = HashMap::new();
    let mut configs = vec![Config::new(program.ast.clone(), initial.clone())];
    seen.insert(configs[0].clone(), 0);

    loop {
        let last = configs.last().unwrap();
        if last.halted() {
            return Run {
                initial,
                stores: configs.into_iter().map(|c| c.store).collect(),
                status: RunStatus::Halted,
            };
        }
        if configs.len() > budget {
            return Run {
                initial,
                stores: configs.into_iter().map(|c| c.store).collect(),
                status: RunStatus::BudgetExceeded,
            };
        }
        let next = match step(last) {
            Ok(c) => c,
            Err(e) => {
                return Run {
                    initial,
                    stores: configs.into_iter().map(|c| c.store).collect(),
                    status: RunStatus::Stuck(e),
                }
            }
        };
        let n = configs.len();
        if let Some(&m) = seen.get(&next) {
            // cycle: configs m..n repeat forever
            let silent = configs[m..n].iter().all(|c| c.store == configs[m].store)
                && next.store == configs[m].store;
            let status = if silent {
                RunStatus::SilentDiverge { detected_at: n }
            } else {
                RunStatus::UnsupportedDiverge { detected_at: n }
            };
            return Run {
                initial,
                stores: configs.into_iter().map(|c| c.store).collect(),
                status,
            };
        }
        seen.insert(next.clone(), n);
        configs.push(next);
    }
}

/// Unfold every run of the program, in canonical initial-store order.
pub fn unfold_all(
    program: &Program,
    budget: usize,
    bound: usize,
    parallel: bool,
) -> Result<Vec<Run>, TraceError> {
    let inits = enumerate_initial_stores(program, bound)?;
    Ok(crate::par::map(inits, parallel, |init| {
        unfold_run(program, init, budget)
    }))
}

/// Longest subsequence with no two equal consecutive entries.
pub fn destutter<T: PartialEq + Clone>(xs: &[T]) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for x in xs {
        if out.last() != Some(x) {
            out.push(x.clone());
        }
    }
    out
}

/// One observation: a projected store, plus a halt tag when the context
/// signals termination and a step index when it is synchronous.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Obs {
    pub vals: Vec<Value>,
    pub halted: bool,
    pub time: Option<usize>,
}

pub type ObsSeq = Vec<Obs>;

fn project(
    run: &Run,
    upto: usize,
    vars: &[String],
    tag_halt: bool,
    timed: bool,
) -> ObsSeq {
    let halted_from = if run.halts() { run.max_depth() } else { usize::MAX };
    let raw: Vec<Obs> = run.stores[..=upto]
        .iter()
        .enumerate()
        .map(|(d, store)| Obs {
            vals: vars.iter().map(|v| store[v].clone()).collect(),
            halted: tag_halt && d >= halted_from,
            time: if timed { Some(d) } else { None },
        })
        .collect();
    destutter(&raw)
}

fn read_vars(ctx: &SecurityContext, agent: &str, program_vars: &[String]) -> Vec<String> {
    let r = ctx.read_set(agent);
    program_vars
        .iter()
        .filter(|v| r.contains(*v))
        .cloned()
        .collect()
}

fn fix_vars(ctx: &SecurityContext, agent: &str, program_vars: &[String]) -> Vec<String> {
    let w = ctx.write_set(agent);
    program_vars
        .iter()
        .filter(|v| !w.contains(*v))
        .cloned()
        .collect()
}

/// Destuttered projection of the trace prefix `run[0..=depth]` to the
/// agent's readable variables.
pub fn view(
    ctx: &SecurityContext,
    agent: &str,
    program_vars: &[String],
    run: &Run,
    depth: usize,
) -> ObsSeq {
    project(
        run,
        depth,
        &read_vars(ctx, agent, program_vars),
        ctx.signals_termination,
        ctx.synchronous,
    )
}

/// Destuttered projection to the variables the agent cannot write.
pub fn fix(
    ctx: &SecurityContext,
    agent: &str,
    program_vars: &[String],
    run: &Run,
    depth: usize,
) -> ObsSeq {
    project(run, depth, &fix_vars(ctx, agent, program_vars), false, false)
}

/// Undestuttered per-configuration fix projection (used by the
/// event-endorsement permission relation).
pub fn raw_fix(
    ctx: &SecurityContext,
    agent: &str,
    program_vars: &[String],
    run: &Run,
    depth: usize,
) -> Vec<Vec<Value>> {
    let vars = fix_vars(ctx, agent, program_vars);
    run.stores[..=depth]
        .iter()
        .map(|store| vars.iter().map(|v| store[v].clone()).collect())
        .collect()
}

/// View of the whole maximal trace. Finite for halting runs and for
/// silent lassos (whose post-stabilization projections are constant),
/// unless a synchronous clock makes every step observable.
pub fn maximal_view(
    ctx: &SecurityContext,
    agent: &str,
    program_vars: &[String],
    run: &Run,
) -> Result<ObsSeq, TraceError> {
    if run.diverges_silently() && ctx.synchronous {
        return Err(TraceError::InfiniteProjection { what: "view" });
    }
    debug_assert!(run.supported());
    Ok(view(ctx, agent, program_vars, run, run.max_depth()))
}

/// Fix of the whole maximal trace (never carries clock or halt tags).
pub fn maximal_fix(
    ctx: &SecurityContext,
    agent: &str,
    program_vars: &[String],
    run: &Run,
) -> Result<ObsSeq, TraceError> {
    debug_assert!(run.supported());
    Ok(fix(ctx, agent, program_vars, run, run.max_depth()))
}
