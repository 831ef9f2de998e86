//! The named example programs and their canonical security contexts,
//! plus the benchmark violation matrix over the robust-declassification
//! variants.

use crate::frame::{build_frame_opts, FrameError, SecurityFrame};
use crate::lang::Program;
use crate::policy::{EndorseMode, SecurityContext};
use crate::props::{self, CheckOpts, PropertyId, Status, WorldRef};
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct Entry {
    pub name: &'static str,
    pub source: &'static str,
    pub ctx: SecurityContext,
}

impl Entry {
    pub fn program(&self) -> Result<Program, crate::lang::LangError> {
        Program::new(self.source, self.ctx.declared())
    }

    pub fn frame(&self, budget: usize) -> Result<SecurityFrame, FrameError> {
        let program = self.program()?;
        build_frame_opts(&program, &self.ctx, budget, 4096, true)
    }
}

fn ctx(
    domains: &[(&str, &[i64])],
    read: &[&str],
    write: &[&str],
    signals: bool,
    synchronous: bool,
) -> SecurityContext {
    SecurityContext::new(&["A"], domains)
        .with_read("A", read)
        .with_write("A", write)
        .with_flags(signals, synchronous)
}

const B01: &[i64] = &[0, 1];
const ZERO: &[i64] = &[0];

/// The canonical context of the violation matrix: the agent reads p and
/// writes u. The matrix's equivalence theorem additionally needs
/// W ⊆ R and termination signalling, and its stated witnesses need a
/// time-tracking observer, so u is added to the read set and both flags
/// are set; the report header documents the additions.
pub fn fig1_context(synchronous: bool) -> SecurityContext {
    ctx(
        &[("u", B01), ("s", B01), ("h", B01), ("p", ZERO)],
        &["p", "u"],
        &["u"],
        true,
        synchronous,
    )
}

pub const FIG1_ROWS: [(&str, &str); 6] = [
    ("(i)", "p := s"),
    ("(ii)", "if u = 1 then p := s"),
    ("(iii)", "(if u = 1 then p := s); loop"),
    ("(iv)", "if u = 1 then { p := s; if s = 1 then loop }"),
    (
        "(v)",
        "(if u = 1 then p := s); if s && (u ^ h) = 1 then loop",
    ),
    ("(vi)", "(if u = 1 then p := s); if s && h = 1 then loop"),
];

pub const FIG1_COLUMNS: [PropertyId; 4] = [
    PropertyId::Rd,
    PropertyId::RdVarA,
    PropertyId::RdVarB,
    PropertyId::TiRd,
];

fn trio_ctx(synchronous: bool) -> SecurityContext {
    ctx(&[("p", ZERO), ("s", B01)], &["p"], &[], true, synchronous)
}

fn pi_ctx() -> SecurityContext {
    // the progress-insensitivity pair: an unclocked, untagged observer,
    // so the agent's knowledge coincides with what counting reveals
    ctx(
        &[("s", &[0, 1, 2, 3]), ("i", ZERO), ("p", ZERO)],
        &["p"],
        &[],
        false,
        false,
    )
}

fn integ_ctx() -> SecurityContext {
    ctx(&[("u", B01), ("t", B01)], &["t", "u"], &["u"], true, false)
}

fn te_ctx() -> SecurityContext {
    ctx(
        &[("s", B01), ("t", B01), ("u", B01)],
        &["t", "u"],
        &["u"],
        true,
        false,
    )
}

fn te_split_ctx() -> SecurityContext {
    // trusted sinks start zeroed: with free initials the secret branch
    // choice becomes observable through the fix history
    ctx(
        &[("s", B01), ("t1", ZERO), ("t2", ZERO), ("u", B01)],
        &["t1", "t2", "u"],
        &["u"],
        true,
        false,
    )
}

pub fn boundary_context(synchronous: bool) -> SecurityContext {
    ctx(
        &[("u", B01), ("s", B01), ("p", ZERO)],
        &["p", "u"],
        &["u"],
        true,
        synchronous,
    )
}

fn declass_ctx() -> SecurityContext {
    let mut c = ctx(
        &[("p", ZERO), ("s1", B01), ("s2", B01)],
        &["p"],
        &[],
        true,
        false,
    );
    c.declass.insert(
        "A".into(),
        crate::lang::Expr::bin(
            crate::lang::BinOp::Xor,
            crate::lang::Expr::var("s1"),
            crate::lang::Expr::var("s2"),
        ),
    );
    c
}

fn endorse_ctx() -> SecurityContext {
    let mut c = integ_ctx();
    c.endorse = EndorseMode::Event;
    c
}

/// Every named example program, under asynchronous contexts compatible
/// with the trace oracles (diverging runs keep finite views).
pub fn named_corpus() -> Vec<Entry> {
    let mut out = vec![Entry {
        name: "copy",
        source: "b := a",
        ctx: ctx(&[("a", B01), ("b", ZERO)], &["b"], &[], true, false),
    }];
    for (label, source) in FIG1_ROWS {
        out.push(Entry {
            name: match label {
                "(i)" => "fig1-i",
                "(ii)" => "fig1-ii",
                "(iii)" => "fig1-iii",
                "(iv)" => "fig1-iv",
                "(v)" => "fig1-v",
                _ => "fig1-vi",
            },
            source,
            ctx: fig1_context(false),
        });
    }
    out.extend([
        Entry {
            name: "conf-ii",
            source: "p := s; if s = 1 then loop",
            ctx: trio_ctx(false),
        },
        Entry {
            name: "conf-iii",
            source: "p := s; loop",
            ctx: trio_ctx(false),
        },
        Entry {
            name: "pi-ascending",
            source: "for i = 0 .. s do p := i",
            ctx: pi_ctx(),
        },
        Entry {
            name: "pi-descending",
            source: "for i = 0 .. s do p := s - i",
            ctx: pi_ctx(),
        },
        Entry {
            name: "integ-guarded",
            source: "u := 0; t := u",
            ctx: integ_ctx(),
        },
        Entry {
            name: "integ-direct",
            source: "t := u",
            ctx: integ_ctx(),
        },
        Entry {
            name: "te-i",
            source: "t := u",
            ctx: te_ctx(),
        },
        Entry {
            name: "te-ii",
            source: "if s = 1 then t := u",
            ctx: te_ctx(),
        },
        Entry {
            name: "te-iii",
            source: "if s = 1 then t1 := u else t2 := u",
            ctx: te_split_ctx(),
        },
        Entry {
            name: "endorse-first",
            source: "endorse(A, t); t := u",
            ctx: endorse_ctx(),
        },
        Entry {
            name: "endorse-last",
            source: "t := u; endorse(A, t)",
            ctx: endorse_ctx(),
        },
        Entry {
            name: "rd-else-loop",
            source: "if u = 1 then p := s else loop",
            ctx: boundary_context(false),
        },
        Entry {
            name: "rd-trailing-loop",
            source: "p := s; if u = 0 then loop",
            ctx: boundary_context(false),
        },
        Entry {
            name: "declass-xor",
            source: "p := s1 ^ s2",
            ctx: declass_ctx(),
        },
    ]);
    out
}

/// The frames the implication audit sweeps: the asynchronous corpus
/// plus the clocked variants whose verdict pairs the comparison
/// discussion names.
pub fn audit_corpus() -> Vec<Entry> {
    let mut out = named_corpus();
    for (label, source) in FIG1_ROWS {
        out.push(Entry {
            name: match label {
                "(i)" => "fig1-i-sync",
                "(ii)" => "fig1-ii-sync",
                "(iii)" => "fig1-iii-sync",
                "(iv)" => "fig1-iv-sync",
                "(v)" => "fig1-v-sync",
                _ => "fig1-vi-sync",
            },
            source,
            ctx: fig1_context(true),
        });
    }
    out.push(Entry {
        name: "rd-else-loop-sync",
        source: "if u = 1 then p := s else loop",
        ctx: boundary_context(true),
    });
    out.push(Entry {
        name: "rd-trailing-loop-sync",
        source: "p := s; if u = 0 then loop",
        ctx: boundary_context(true),
    });
    out.push(Entry {
        name: "conf-ii-sync",
        source: "p := s; if s = 1 then loop",
        ctx: trio_ctx(true),
    });
    out.push(Entry {
        name: "conf-iii-sync",
        source: "p := s; loop",
        ctx: trio_ctx(true),
    });
    out
}

// ---------------------------------------------------------------------
// the violation matrix

#[derive(Clone, Debug, Serialize)]
pub struct MatrixCell {
    pub property: String,
    pub status: Status,
    /// Rendered witness set, "-" when satisfied.
    pub witness: String,
    pub world: Option<WorldRef>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MatrixRow {
    pub label: String,
    pub program: String,
    pub cells: Vec<MatrixCell>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Figure1 {
    pub header: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<MatrixRow>,
}

/// Reproduce the six-program violation matrix with its canonical
/// context. The programs and context are embedded verbatim.
pub fn figure1_matrix(budget: usize, opts: &CheckOpts) -> Result<Figure1, props::CheckError> {
    let ctx = fig1_context(true);
    let mut rows = Vec::new();
    for (label, source) in FIG1_ROWS {
        let program = Program::new(source, ctx.declared()).map_err(FrameError::from)?;
        let frame = build_frame_opts(&program, &ctx, budget, 4096, opts.parallel)?;
        let mut cells = Vec::new();
        for id in FIG1_COLUMNS {
            let verdict = props::check(&frame, id, opts)?;
            let (witness, world) = match verdict.witnesses.first() {
                Some(w) => (w.phi.clone(), Some(w.world)),
                None => ("-".to_string(), None),
            };
            cells.push(MatrixCell {
                property: id.name().to_string(),
                status: verdict.status,
                witness,
                world,
            });
        }
        rows.push(MatrixRow {
            label: label.to_string(),
            program: source.to_string(),
            cells,
        });
    }
    Ok(Figure1 {
        header: vec![
            "agent A reads {p, u} and writes {u}; u, s, h range over {0, 1}, p over {0}"
                .to_string(),
            "the read set includes u and termination is signalled, as the equivalence theorem requires; the observer tracks time".to_string(),
        ],
        columns: FIG1_COLUMNS.iter().map(|c| c.name().to_string()).collect(),
        rows,
    })
}
