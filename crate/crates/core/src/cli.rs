//! Command-line surface: check properties, run the trace oracles and
//! differentials, reproduce the violation matrix, export frames, audit
//! the implication diagrams, and fuzz with seeded random programs.
//!
//! Exit codes: 0 = everything satisfied / agreement; 1 = a violation or
//! disagreement was found (the analysis itself succeeded); 2 = usage
//! error or unsupported input.

use crate::corpus;
use crate::frame::{self, build_frame_opts, Depth, SecurityFrame};
use crate::lang::Program;
use crate::logic::{self, Mode};
use crate::oracle::{self, GenBounds, PairingStatus, TraceOpts, TraceProp};
use crate::policy::SecurityContext;
use crate::props::{self, CheckOpts, PropertyId, Status};
use crate::trace::DEFAULT_STEP_BUDGET;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::{Path, PathBuf};

pub const BUDGET_ENV: &str = "SECMC_BUDGET";

#[derive(Parser, Debug)]
#[command(
    name = "secmc",
    about = "Model checker for modal information-flow security properties",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct CommonOpts {
    /// Witness search mode: 'exhaustive' or 'runset:K'.
    #[arg(long, default_value = "runset:2")]
    mode: String,
    /// Step budget per run (also via the SECMC_BUDGET environment variable).
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Disable the data-parallel engine.
    #[arg(long)]
    sequential: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide modal security properties of a program under a policy.
    Check {
        #[command(flatten)]
        common: CommonOpts,
        /// Policy file (JSON).
        #[arg(long)]
        policy: PathBuf,
        /// Comma-separated property names (default: all).
        #[arg(long)]
        prop: Option<String>,
        /// Program file.
        program: PathBuf,
    },
    /// Run the trace-based reference definitions.
    Oracle {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        policy: PathBuf,
        /// Comma-separated trace property names (default: all).
        #[arg(long)]
        prop: Option<String>,
        program: PathBuf,
    },
    /// Compare modal and trace verdicts on every theorem pairing.
    Diff {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        policy: PathBuf,
        program: PathBuf,
    },
    /// Reproduce the six-program violation matrix.
    Figure1 {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Export a frame as DOT or JSON, or re-export an imported frame.
    Frame {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Emit DOT instead of JSON.
        #[arg(long)]
        dot: bool,
        /// Import a frame from its JSON export instead of building one.
        #[arg(long)]
        import: Option<PathBuf>,
        program: Option<PathBuf>,
    },
    /// Evaluate a modal formula at a world of the program's frame.
    Eval {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long)]
        policy: PathBuf,
        /// World as run:depth (e.g. 2:0) or run:limit.
        #[arg(long)]
        world: String,
        #[arg(long)]
        formula: String,
        program: PathBuf,
    },
    /// Verify the implication diagrams over a corpus.
    Audit {
        #[command(flatten)]
        common: CommonOpts,
        /// Corpus manifest (JSON array); defaults to the built-in corpus.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Differential-test seeded random programs.
    Fuzz {
        #[command(flatten)]
        common: CommonOpts,
        /// First seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of programs.
        #[arg(long, default_value_t = 200)]
        count: u64,
        #[arg(long, default_value_t = 3)]
        max_vars: usize,
        #[arg(long, default_value_t = 6)]
        max_stmts: usize,
    },
}

pub fn run_from_env() -> i32 {
    let args: Vec<String> = std::env::args().collect();
    run(&args)
}

pub fn run(args: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders --help/--version as "errors" with exit 0
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

type AnyError = Box<dyn std::error::Error>;

fn parse_mode(s: &str) -> Result<Mode, AnyError> {
    if s.eq_ignore_ascii_case("exhaustive") {
        return Ok(Mode::Exhaustive);
    }
    if let Some(k) = s.strip_prefix("runset:") {
        return Ok(Mode::Runset(k.parse()?));
    }
    Err(format!("unknown mode '{s}' (use 'exhaustive' or 'runset:K')").into())
}

fn budget_of(common: &CommonOpts) -> usize {
    common
        .budget
        .or_else(|| {
            std::env::var(BUDGET_ENV)
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(DEFAULT_STEP_BUDGET)
}

fn check_opts(common: &CommonOpts) -> Result<CheckOpts, AnyError> {
    Ok(CheckOpts {
        mode: parse_mode(&common.mode)?,
        agents: None,
        parallel: !common.sequential,
        ..CheckOpts::default()
    })
}

fn load_program(path: &Path, ctx: &SecurityContext) -> Result<Program, AnyError> {
    let text = std::fs::read_to_string(path)?;
    Ok(Program::new(&text, ctx.declared())?)
}

fn load_policy(path: &Path) -> Result<SecurityContext, AnyError> {
    let text = std::fs::read_to_string(path)?;
    Ok(SecurityContext::from_json(&text)?)
}

fn emit<T: Serialize>(value: &T, format: Format, text: impl FnOnce() -> String) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(value).unwrap()),
        Format::Text => println!("{}", text()),
    }
}

fn dispatch(cli: Cli) -> Result<i32, AnyError> {
    match cli.command {
        Command::Check {
            common,
            policy,
            prop,
            program,
        } => {
            let ctx = load_policy(&policy)?;
            let prog = load_program(&program, &ctx)?;
            let opts = check_opts(&common)?;
            let frame = build_frame_opts(&prog, &ctx, budget_of(&common), 4096, opts.parallel)?;
            let ids = parse_props(prop.as_deref())?;
            let mut verdicts = Vec::new();
            for id in &ids {
                let mut v = props::check(&frame, *id, &opts)?;
                v.warnings = props::audit_theorem_assumptions(&frame, &ctx, *id);
                verdicts.push(v);
            }
            let any_violated = verdicts.iter().any(|v| v.violated());
            emit(&verdicts, common.format, || render_verdicts(&verdicts));
            Ok(if any_violated { 1 } else { 0 })
        }
        Command::Oracle {
            common,
            policy,
            prop,
            program,
        } => {
            let ctx = load_policy(&policy)?;
            let prog = load_program(&program, &ctx)?;
            let opts = TraceOpts {
                budget: budget_of(&common),
                parallel: !common.sequential,
                ti_escape: true,
            };
            let props_list = match prop.as_deref() {
                None => TraceProp::all().to_vec(),
                Some(names) => names
                    .split(',')
                    .map(|n| {
                        TraceProp::parse(n.trim())
                            .ok_or_else(|| format!("unknown trace property '{n}'"))
                    })
                    .collect::<Result<_, _>>()?,
            };
            let mut verdicts = Vec::new();
            for p in props_list {
                verdicts.push(oracle::trace_check(&prog, &ctx, p, &opts)?);
            }
            let any_violated = verdicts.iter().any(|v| v.status == Status::Violated);
            emit(&verdicts, common.format, || {
                let mut s = String::new();
                for v in &verdicts {
                    s.push_str(&format!("{:<16} {:?}", v.property, v.status));
                    if let Some(w) = &v.witness {
                        s.push_str(&format!(
                            "  agent {} stores [{}] {}",
                            w.agent,
                            w.stores.join(", "),
                            w.detail
                        ));
                    }
                    s.push('\n');
                }
                s
            });
            Ok(if any_violated { 1 } else { 0 })
        }
        Command::Diff {
            common,
            policy,
            program,
        } => {
            let ctx = load_policy(&policy)?;
            let prog = load_program(&program, &ctx)?;
            let opts = TraceOpts {
                budget: budget_of(&common),
                parallel: !common.sequential,
                ti_escape: true,
            };
            let report = oracle::differential(&prog, &ctx, &opts, &check_opts(&common)?)?;
            emit(&report, common.format, || {
                let mut s = String::new();
                for p in &report.pairings {
                    s.push_str(&format!("{:<32} {:?}", p.pairing, p.status));
                    if !p.detail.is_empty() {
                        s.push_str(&format!("  ({})", p.detail));
                    }
                    s.push('\n');
                }
                s
            });
            Ok(if report.disagreements() > 0 { 1 } else { 0 })
        }
        Command::Figure1 { common } => {
            let fig = corpus::figure1_matrix(budget_of(&common), &check_opts(&common)?)?;
            let any_violated = fig
                .rows
                .iter()
                .any(|r| r.cells.iter().any(|c| c.status == Status::Violated));
            emit(&fig, common.format, || render_figure1(&fig));
            Ok(if any_violated { 1 } else { 0 })
        }
        Command::Frame {
            common,
            policy,
            dot,
            import,
            program,
        } => {
            let frame: SecurityFrame = match (import, policy, program) {
                (Some(path), _, _) => frame::export::from_json(&std::fs::read_to_string(path)?)?,
                (None, Some(policy), Some(program)) => {
                    let ctx = load_policy(&policy)?;
                    let prog = load_program(&program, &ctx)?;
                    build_frame_opts(&prog, &ctx, budget_of(&common), 4096, !common.sequential)?
                }
                _ => return Err("frame needs either --import or --policy and a program".into()),
            };
            if dot {
                print!("{}", frame::export::to_dot(&frame));
            } else {
                println!("{}", frame::export::to_json_string(&frame));
            }
            Ok(0)
        }
        Command::Eval {
            common,
            policy,
            world,
            formula,
            program,
        } => {
            let ctx = load_policy(&policy)?;
            let prog = load_program(&program, &ctx)?;
            let frame =
                build_frame_opts(&prog, &ctx, budget_of(&common), 4096, !common.sequential)?;
            let (run_str, depth_str) = world
                .split_once(':')
                .ok_or("world must be run:depth or run:limit")?;
            let run: usize = run_str.parse()?;
            let depth = if depth_str.eq_ignore_ascii_case("limit") {
                Depth::Limit
            } else {
                Depth::At(depth_str.parse()?)
            };
            let idx = frame
                .world_index(run, depth)
                .ok_or_else(|| format!("no world {world} in this frame"))?;
            let f = logic::parse_formula(&formula).map_err(|e| format!("formula: {e}"))?;
            let holds = logic::eval(&frame, idx, &f)?;
            emit(&serde_json::json!({"world": world, "holds": holds}), common.format, || {
                format!("{world} ⊨ {formula}: {holds}")
            });
            Ok(if holds { 0 } else { 1 })
        }
        Command::Audit { common, manifest } => {
            let opts = check_opts(&common)?;
            let budget = budget_of(&common);
            let report = match manifest {
                None => oracle::default_audit(&opts, budget),
                Some(path) => {
                    let entries = manifest_entries(&path)?;
                    audit_manifest(&entries, &opts, budget)?
                }
            };
            emit(&report, common.format, || {
                let mut s = format!("frames checked: {}\n", report.frames_checked);
                if report.ok() {
                    s.push_str("all implication arrows and separations hold\n");
                } else {
                    for f in &report.arrow_failures {
                        s.push_str(&format!(
                            "arrow {} => {} fails on {}\n",
                            f.stronger, f.weaker, f.entry
                        ));
                    }
                    for f in &report.separation_failures {
                        s.push_str(&format!("separation: {f}\n"));
                    }
                }
                s
            });
            Ok(if report.ok() { 0 } else { 1 })
        }
        Command::Fuzz {
            common,
            seed,
            count,
            max_vars,
            max_stmts,
        } => {
            let opts = TraceOpts {
                budget: budget_of(&common),
                parallel: !common.sequential,
                ti_escape: true,
            };
            let check = check_opts(&common)?;
            let bounds = GenBounds {
                max_vars,
                max_stmts,
            };
            let results: Vec<FuzzResult> = crate::par::map(
                (seed..seed + count).collect(),
                !common.sequential,
                |s| {
                    let (source, program, ctx) = oracle::gen_entry(s, bounds);
                    match oracle::differential(&program, &ctx, &opts, &check) {
                        Ok(report) => FuzzResult {
                            seed: s,
                            source,
                            disagreements: report.disagreements(),
                            detail: report
                                .pairings
                                .iter()
                                .filter(|p| p.status == PairingStatus::Disagree)
                                .map(|p| format!("{}: {}", p.pairing, p.detail))
                                .collect(),
                        },
                        Err(e) => FuzzResult {
                            seed: s,
                            source,
                            disagreements: 1,
                            detail: vec![format!("error: {e}")],
                        },
                    }
                },
            );
            let bad: Vec<&FuzzResult> = results.iter().filter(|r| r.disagreements > 0).collect();
            emit(&results, common.format, || {
                if bad.is_empty() {
                    format!("{count} seeded programs: full agreement on every pairing")
                } else {
                    bad.iter()
                        .map(|r| format!("seed {}: {} ({:?})", r.seed, r.source, r.detail))
                        .collect::<Vec<_>>()
                        .join("\n")
                }
            });
            Ok(if bad.is_empty() { 0 } else { 1 })
        }
    }
}

#[derive(Serialize)]
struct FuzzResult {
    seed: u64,
    source: String,
    disagreements: usize,
    detail: Vec<String>,
}

fn parse_props(list: Option<&str>) -> Result<Vec<PropertyId>, AnyError> {
    match list {
        None => Ok(PropertyId::all().to_vec()),
        Some(names) => names
            .split(',')
            .map(|n| {
                PropertyId::parse(n.trim())
                    .ok_or_else(|| format!("unknown property '{n}'").into())
            })
            .collect(),
    }
}

fn render_verdicts(verdicts: &[props::Verdict]) -> String {
    let mut s = String::new();
    for v in verdicts {
        s.push_str(&format!("{:<22} {:?}", v.property, v.status));
        if let Some(w) = v.witnesses.first() {
            let depth = w
                .world
                .depth
                .map(|d| d.to_string())
                .unwrap_or_else(|| "limit".into());
            s.push_str(&format!(
                "  at run {} depth {} (agent {}) with {}",
                w.world.run, depth, w.agent, w.phi
            ));
        }
        for warn in &v.warnings {
            s.push_str(&format!("\n  warning: {warn}"));
        }
        s.push('\n');
    }
    s
}

fn render_figure1(fig: &corpus::Figure1) -> String {
    let mut s = String::new();
    for h in &fig.header {
        s.push_str(&format!("# {h}\n"));
    }
    let width = fig
        .rows
        .iter()
        .map(|r| r.program.len())
        .max()
        .unwrap_or(10)
        .max(7);
    s.push_str(&format!("{:<6} {:<width$}", "", "program"));
    for c in &fig.columns {
        s.push_str(&format!(" | {c:<18}"));
    }
    s.push('\n');
    for row in &fig.rows {
        s.push_str(&format!("{:<6} {:<width$}", row.label, row.program));
        for cell in &row.cells {
            s.push_str(&format!(" | {:<18}", cell.witness));
        }
        s.push('\n');
    }
    s
}

#[derive(serde::Deserialize)]
struct ManifestEntry {
    name: String,
    #[serde(default)]
    program: Option<String>,
    #[serde(default)]
    program_path: Option<String>,
    #[serde(default)]
    policy: Option<serde_json::Value>,
    #[serde(default)]
    policy_path: Option<String>,
}

struct LoadedEntry {
    name: String,
    source: String,
    ctx: SecurityContext,
}

fn manifest_entries(path: &Path) -> Result<Vec<LoadedEntry>, AnyError> {
    let text = std::fs::read_to_string(path)?;
    let raw: Vec<ManifestEntry> = serde_json::from_str(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    for entry in raw {
        let source = match (&entry.program, &entry.program_path) {
            (Some(s), _) => s.clone(),
            (None, Some(p)) => std::fs::read_to_string(base.join(p))?,
            _ => return Err(format!("manifest entry {} has no program", entry.name).into()),
        };
        let ctx = match (&entry.policy, &entry.policy_path) {
            (Some(v), _) => SecurityContext::from_json(&v.to_string())?,
            (None, Some(p)) => load_policy(&base.join(p))?,
            _ => return Err(format!("manifest entry {} has no policy", entry.name).into()),
        };
        out.push(LoadedEntry {
            name: entry.name,
            source,
            ctx,
        });
    }
    Ok(out)
}

fn audit_manifest(
    entries: &[LoadedEntry],
    opts: &CheckOpts,
    budget: usize,
) -> Result<oracle::AuditReport, AnyError> {
    use std::collections::BTreeMap;
    let mut maps: Vec<(String, BTreeMap<PropertyId, Status>)> = Vec::new();
    for e in entries {
        let program = Program::new(&e.source, e.ctx.declared())?;
        let frame = build_frame_opts(&program, &e.ctx, budget, 4096, opts.parallel)?;
        let mut map = BTreeMap::new();
        for id in PropertyId::all() {
            map.insert(id, props::check(&frame, id, opts)?.status);
        }
        maps.push((e.name.clone(), map));
    }
    let mut report = oracle::AuditReport {
        frames_checked: maps.len(),
        arrow_failures: Vec::new(),
        separation_failures: Vec::new(),
    };
    for (name, map) in &maps {
        for (stronger, weaker) in oracle::implication_arrows() {
            if map[&stronger] == Status::Satisfied && map[&weaker] == Status::Violated {
                report.arrow_failures.push(oracle::ArrowFailure {
                    entry: name.clone(),
                    stronger: stronger.name().to_string(),
                    weaker: weaker.name().to_string(),
                });
            }
        }
    }
    Ok(report)
}
