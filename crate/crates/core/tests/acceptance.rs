//! Acceptance suite: one test per criterion, each printing a pass line.

use secmc::corpus::{self, Entry};
use secmc::frame::{build_frame, check::check_frame_properties, Depth};
use secmc::lang::Program;
use secmc::logic::{self, Formula, Mode, RelName};
use secmc::oracle::{self, GenBounds, PairingStatus, TraceOpts};
use secmc::policy::SecurityContext;
use secmc::props::{self, CheckOpts, PropertyId, Status};
use secmc::value::Value;
use std::time::Instant;

const BUDGET: usize = 10_000;

fn opts() -> CheckOpts {
    CheckOpts::default()
}

fn prog(src: &str, decls: &[(&str, &[i64])]) -> Program {
    let declared: Vec<(String, Vec<Value>)> = decls
        .iter()
        .map(|(v, d)| (v.to_string(), d.iter().map(|n| Value::Int(*n)).collect()))
        .collect();
    Program::new(src, &declared).unwrap()
}

fn status(frame: &secmc::SecurityFrame, id: PropertyId) -> Status {
    props::check(frame, id, &opts()).unwrap().status
}

fn entry(name: &str) -> Entry {
    corpus::audit_corpus()
        .into_iter()
        .find(|e| e.name == name)
        .unwrap_or_else(|| panic!("missing corpus entry {name}"))
}

#[test]
fn criterion_01_figure1_matrix() {
    let start = Instant::now();
    let fig = corpus::figure1_matrix(BUDGET, &opts()).unwrap();

    let expect: [[Option<&str>; 4]; 6] = [
        [None, None, None, None],
        [Some("s@0=0"), Some("s@0=0"), Some("s@0=0"), Some("s@0=0")],
        [Some("s@0=0"), None, None, None],
        [Some("s@0=0"), Some("s@0=0"), None, None],
        [Some("s@0=0"), Some("s@0=0"), Some("s@0=0"), None],
        [Some("s@0=0"), Some("s@0=0"), Some("s@0=0"), Some("s@0=0 ∨ h@0=1")],
    ];
    for (row, want) in fig.rows.iter().zip(expect) {
        for (cell, wanted) in row.cells.iter().zip(want) {
            match wanted {
                None => assert_eq!(
                    cell.status,
                    Status::Satisfied,
                    "{} {}",
                    row.label,
                    cell.property
                ),
                Some(w) => {
                    assert_eq!(cell.status, Status::Violated, "{} {}", row.label, cell.property);
                    assert_eq!(cell.witness, *w, "{} {}", row.label, cell.property);
                    // every stated violation sits at the length-1 world
                    // where all variables are zero (run 0, depth 0)
                    assert_eq!(cell.world.unwrap().run, 0, "{} {}", row.label, cell.property);
                    assert_eq!(
                        cell.world.unwrap().depth,
                        Some(0),
                        "{} {}",
                        row.label,
                        cell.property
                    );
                }
            }
        }
    }

    // witness extensions, not just renderings: s@0=0 for the stated
    // cells, and the framing disjunction for row (vi) under TI-RD
    let ctx = corpus::fig1_context(true);
    for (label, source) in corpus::FIG1_ROWS {
        if label == "(i)" {
            continue;
        }
        let program = Program::new(source, ctx.declared()).unwrap();
        let frame = secmc::frame::build_frame_opts(&program, &ctx, BUDGET, 4096, true).unwrap();
        let rd = props::check(&frame, PropertyId::Rd, &opts()).unwrap();
        let s0 = logic::ext_atom(&frame, "s", 0, &Value::Int(0)).unwrap();
        assert_eq!(
            rd.witness_cuts.as_ref().unwrap().mask(&frame),
            s0.mask(&frame),
            "{label} RD witness extension"
        );
        if label == "(vi)" {
            let ti = props::check(&frame, PropertyId::TiRd, &opts()).unwrap();
            let h1 = logic::ext_atom(&frame, "h", 0, &Value::Int(1)).unwrap();
            let want = s0.mask(&frame).or(&h1.mask(&frame));
            assert_eq!(
                ti.witness_cuts.as_ref().unwrap().mask(&frame),
                want,
                "(vi) TI_RD witness extension"
            );
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 10, "figure1 took {elapsed:?}");
    println!("criterion 1 (figure 1 matrix, 24 verdicts + witnesses, {elapsed:?}): PASS");
}

#[test]
fn criterion_02_confidentiality_trio() {
    let decls: &[(&str, &[i64])] = &[("p", &[0]), ("s", &[0, 1])];
    let ctx = SecurityContext::new(&["A"], &[])
        .with_read("A", &["p"])
        .with_flags(true, false);

    let f1 = build_frame(&prog("p := s", decls), &ctx, BUDGET).unwrap();
    assert_eq!(status(&f1, PropertyId::Conf), Status::Violated);
    assert_eq!(status(&f1, PropertyId::TiConf), Status::Violated);

    let f2 = build_frame(&prog("p := s; if s = 1 then loop", decls), &ctx, BUDGET).unwrap();
    assert_eq!(status(&f2, PropertyId::Conf), Status::Violated);
    assert_eq!(status(&f2, PropertyId::TiConf), Status::Satisfied);
    assert_eq!(status(&f2, PropertyId::TiConfIntermediate), Status::Violated);

    let f3 = build_frame(&prog("p := s; loop", decls), &ctx, BUDGET).unwrap();
    assert_eq!(status(&f3, PropertyId::Conf), Status::Violated);
    assert_eq!(status(&f3, PropertyId::TiConf), Status::Satisfied);
    assert_eq!(status(&f3, PropertyId::TiConfIntermediate), Status::Satisfied);
    println!("criterion 2 (confidentiality trio): PASS");
}

#[test]
fn criterion_03_progress_insensitivity() {
    let asc = entry("pi-ascending").frame(BUDGET).unwrap();
    assert_eq!(status(&asc, PropertyId::PiConf), Status::Satisfied);
    assert_eq!(status(&asc, PropertyId::Conf), Status::Violated);
    assert_eq!(status(&asc, PropertyId::TiConf), Status::Violated);

    let desc = entry("pi-descending").frame(BUDGET).unwrap();
    assert_eq!(status(&desc, PropertyId::PiConf), Status::Violated);
    println!("criterion 3 (progress insensitivity): PASS");
}

#[test]
fn criterion_04_integrity_and_endorsement() {
    let guarded = entry("integ-guarded").frame(BUDGET).unwrap();
    assert_eq!(status(&guarded, PropertyId::Integ), Status::Satisfied);

    let direct = entry("integ-direct").frame(BUDGET).unwrap();
    let cause = props::check(&direct, PropertyId::CauseInteg, &opts()).unwrap();
    assert_eq!(cause.status, Status::Violated);
    let u0 = logic::ext_atom(&direct, "u", 0, &Value::Int(0)).unwrap();
    assert_eq!(
        cause.witness_cuts.as_ref().unwrap().mask(&direct),
        u0.mask(&direct),
        "cause-integrity witness must be u@0=0"
    );

    let before = entry("endorse-first").frame(BUDGET).unwrap();
    assert_eq!(status(&before, PropertyId::Integ), Status::Satisfied);
    let after = entry("endorse-last").frame(BUDGET).unwrap();
    assert_eq!(status(&after, PropertyId::Integ), Status::Violated);
    println!("criterion 4 (integrity and endorsement): PASS");
}

#[test]
fn criterion_05_transparent_endorsement() {
    let plain = entry("te-i").frame(BUDGET).unwrap();
    assert_eq!(status(&plain, PropertyId::TiTe), Status::Satisfied);

    let guarded = entry("te-ii").frame(BUDGET).unwrap();
    assert_eq!(status(&guarded, PropertyId::TiTe), Status::Violated);

    let split = entry("te-iii").frame(BUDGET).unwrap();
    assert_eq!(status(&split, PropertyId::TiTe), Status::Satisfied);
    println!("criterion 5 (transparent endorsement): PASS");
}

#[test]
fn criterion_06_rd_boundary_programs() {
    let else_loop = entry("rd-else-loop-sync").frame(BUDGET).unwrap();
    assert_eq!(status(&else_loop, PropertyId::TiRd), Status::Satisfied);
    assert_eq!(status(&else_loop, PropertyId::RdAlt), Status::Violated);

    let trailing = entry("rd-trailing-loop-sync").frame(BUDGET).unwrap();
    assert_eq!(status(&trailing, PropertyId::Rd), Status::Satisfied);
    assert_eq!(status(&trailing, PropertyId::RdAlt), Status::Violated);
    println!("criterion 6 (robust declassification boundary programs): PASS");
}

#[test]
fn criterion_07_declassification() {
    let frame = entry("declass-xor").frame(BUDGET).unwrap();
    // runs ordered by (p, s1, s2): world (0,1,1) is run 3
    let w = frame.world_index(3, Depth::At(0)).unwrap();
    let phi = Formula::box_(
        RelName::Kp("A".into()),
        Formula::eventually(Formula::At {
            var: "p".into(),
            tau: 1,
            value: Value::Int(0),
        }),
    );
    assert!(logic::eval(&frame, w, &phi).unwrap());
    assert_eq!(status(&frame, PropertyId::Conf), Status::Satisfied);

    // and without the refinement the same program leaks
    let mut ctx = entry("declass-xor").ctx.clone();
    ctx.declass.clear();
    let plain = build_frame(
        &Program::new("p := s1 ^ s2", ctx.declared()).unwrap(),
        &ctx,
        BUDGET,
    )
    .unwrap();
    assert_eq!(status(&plain, PropertyId::Conf), Status::Violated);
    println!("criterion 7 (what-declassification): PASS");
}

#[test]
fn criterion_08_theorem_differentials() {
    let start = Instant::now();
    let trace_opts = TraceOpts::default();
    let check_opts = opts();

    let mut programs = 0usize;
    let mut compared = 0usize;
    let mut skipped = 0usize;

    let named = corpus::named_corpus();
    assert!(named.len() >= 13, "need at least thirteen named programs");
    for entry in &named {
        let program = entry.program().unwrap();
        let report =
            oracle::differential(&program, &entry.ctx, &trace_opts, &check_opts).unwrap();
        assert_eq!(
            report.disagreements(),
            0,
            "{}: {:?}",
            entry.name,
            report.pairings
        );
        programs += 1;
        for p in &report.pairings {
            match p.status {
                PairingStatus::Agree => compared += 1,
                PairingStatus::Skipped => skipped += 1,
                PairingStatus::Disagree => unreachable!(),
            }
        }
    }

    for seed in 0..200 {
        let (source, program, ctx) = oracle::gen_entry(seed, GenBounds::default());
        let report = oracle::differential(&program, &ctx, &trace_opts, &check_opts).unwrap();
        assert_eq!(report.disagreements(), 0, "seed {seed}: {source}");
        programs += 1;
        for p in &report.pairings {
            match p.status {
                PairingStatus::Agree => compared += 1,
                PairingStatus::Skipped => skipped += 1,
                PairingStatus::Disagree => unreachable!(),
            }
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 300, "differentials took {elapsed:?}");
    println!(
        "criterion 8 (theorem differentials: {programs} programs, {compared} pairings agree, {skipped} skipped under failed assumptions, {elapsed:?}): PASS"
    );
}

#[test]
fn criterion_09_frame_invariants() {
    for entry in corpus::audit_corpus() {
        let frame = entry.frame(BUDGET).unwrap();
        let report = check_frame_properties(&frame);
        assert!(
            report.ok_for(frame.signals_termination),
            "{}: {report:?}",
            entry.name
        );
        // full and simplified robust declassification agree whenever
        // K^C = K^P (everywhere but the declassified frame)
        let eq = props::check_rd_equivalence(&frame, &opts()).unwrap();
        if entry.ctx.declass.is_empty() {
            assert_eq!(eq.status, Status::Satisfied, "{}: {}", entry.name, eq.detail);
        } else {
            assert_eq!(eq.status, Status::Unsupported, "{}", entry.name);
        }
    }
    println!("criterion 9 (frame invariants over the corpus): PASS");
}

#[test]
fn criterion_10_implication_audit() {
    let report = oracle::default_audit(&opts(), BUDGET);
    assert!(report.arrow_failures.is_empty(), "{:?}", report.arrow_failures);
    assert!(
        report.separation_failures.is_empty(),
        "{:?}",
        report.separation_failures
    );
    println!(
        "criterion 10 (implication audit over {} frames): PASS",
        report.frames_checked
    );
}

#[test]
fn criterion_11_search_mode_soundness() {
    let mut checked = 0usize;
    let mut entries = corpus::audit_corpus();
    entries.truncate(entries.len()); // corpus plus a few generated frames below
    for entry in entries {
        let frame = entry.frame(BUDGET).unwrap();
        if logic::exhaustive_count(&frame) > 100_000 {
            continue;
        }
        checked += 1;
        for id in PropertyId::all() {
            let runset = props::check(&frame, id, &opts()).unwrap().status;
            let exhaustive = props::check(
                &frame,
                id,
                &CheckOpts {
                    mode: Mode::Exhaustive,
                    ..opts()
                },
            )
            .unwrap()
            .status;
            assert_eq!(runset, exhaustive, "{} disagrees on {}", id, entry.name);
        }
    }
    for seed in 0..40 {
        let (_, program, ctx) = oracle::gen_entry(seed, GenBounds::default());
        let frame = secmc::frame::build_frame_opts(&program, &ctx, BUDGET, 4096, true).unwrap();
        if logic::exhaustive_count(&frame) > 100_000 {
            continue;
        }
        checked += 1;
        for id in PropertyId::all() {
            let runset = props::check(&frame, id, &opts()).unwrap().status;
            let exhaustive = props::check(
                &frame,
                id,
                &CheckOpts {
                    mode: Mode::Exhaustive,
                    ..opts()
                },
            )
            .unwrap()
            .status;
            assert_eq!(runset, exhaustive, "{} disagrees on seed frame", id);
        }
    }
    assert!(checked >= 10, "too few exhaustively checkable frames: {checked}");
    println!("criterion 11 (runset/exhaustive coincidence on {checked} frames): PASS");
}

#[test]
fn all_halting_corpus_collapses_ti_variants() {
    // when every run halts, the termination-insensitive verdicts
    // coincide with the plain ones
    for entry in corpus::named_corpus() {
        let frame = entry.frame(BUDGET).unwrap();
        if !frame.runs.iter().all(|r| r.halts) {
            continue;
        }
        assert_eq!(
            status(&frame, PropertyId::Conf),
            status(&frame, PropertyId::TiConf),
            "{}",
            entry.name
        );
        assert_eq!(
            status(&frame, PropertyId::Rd),
            status(&frame, PropertyId::TiRd),
            "{}",
            entry.name
        );
    }
    println!("all-halting collapse: PASS");
}
