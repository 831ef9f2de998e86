//! Frame export: DOT for rendering, JSON for the full relational
//! structure (re-importable; hand-built frames are accepted without
//! validation against any program).

use super::{AgentRels, Depth, FrameRun, Partition, SecurityFrame, World, WriteRel};
use crate::bitset::Mask;
use crate::frame::FrameError;
use crate::lang::Store;
use crate::value;
use serde_json::{json, Map};
use std::fmt::Write as _;

fn world_label(frame: &SecurityFrame, idx: usize) -> String {
    let w = frame.world(idx);
    let run = &frame.runs[w.run];
    match w.depth {
        Depth::At(d) => super::store_label(&frame.vars, &run.stores[d]),
        Depth::Limit => format!(
            "{}...",
            super::store_label(&frame.vars, &run.stores[run.max_depth()])
        ),
    }
}

/// Render the frame as a DOT digraph: runs as chains, K^C classes of the
/// first agent as clusters, write relations as styled extra edges.
pub fn to_dot(frame: &SecurityFrame) -> String {
    let mut out = String::new();
    writeln!(out, "digraph frame {{").unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    writeln!(out, "  node [shape=ellipse];").unwrap();

    let first_agent = frame.agents.first();
    if let Some(agent) = first_agent {
        let rels = frame.rels(agent).unwrap();
        for (ci, class) in rels.kc.classes.iter().enumerate() {
            writeln!(out, "  subgraph cluster_k{ci} {{").unwrap();
            writeln!(out, "    style=rounded; color=blue;").unwrap();
            for w in class.iter_set() {
                writeln!(out, "    w{w} [label=\"{}\"];", world_label(frame, w)).unwrap();
            }
            writeln!(out, "  }}").unwrap();
        }
    } else {
        for w in 0..frame.n_worlds() {
            writeln!(out, "  w{w} [label=\"{}\"];", world_label(frame, w)).unwrap();
        }
    }

    for r in 0..frame.runs.len() {
        let (a, b) = frame.span(r);
        for w in a..b.saturating_sub(1) {
            writeln!(out, "  w{w} -> w{};", w + 1).unwrap();
        }
    }

    if let Some(agent) = first_agent {
        let rels = frame.rels(agent).unwrap();
        // non-reflexive W^C pairs exist only between initial worlds; draw
        // each class as a chain to keep the graph readable
        for class in &rels.wc.classes {
            let members: Vec<usize> = class.iter_set().collect();
            for pair in members.windows(2) {
                writeln!(
                    out,
                    "  w{} -> w{} [dir=none, color=red, style=bold, constraint=false];",
                    pair[0], pair[1]
                )
                .unwrap();
            }
        }
        let wp_classes: Vec<Vec<usize>> = match &rels.wp {
            WriteRel::Part(p) => p.classes.iter().map(|c| c.iter_set().collect()).collect(),
            WriteRel::Explicit(rows) => rows
                .iter()
                .enumerate()
                .map(|(w, row)| row.iter_set().filter(|x| *x >= w).collect())
                .collect(),
        };
        for members in wp_classes {
            for pair in members.windows(2) {
                writeln!(
                    out,
                    "  w{} -> w{} [dir=none, color=blue, style=dashed, constraint=false];",
                    pair[0], pair[1]
                )
                .unwrap();
            }
        }
    }

    writeln!(out, "}}").unwrap();
    out
}

fn store_json(vars: &[String], store: &Store) -> serde_json::Value {
    serde_json::Value::Array(
        vars.iter()
            .map(|v| serde_json::to_value(&store[v]).unwrap())
            .collect(),
    )
}

fn partition_json(p: &Partition) -> serde_json::Value {
    serde_json::Value::Array(
        p.classes
            .iter()
            .map(|c| serde_json::to_value(c.iter_set().collect::<Vec<_>>()).unwrap())
            .collect(),
    )
}

/// Full relational structure with stable key order.
pub fn to_json(frame: &SecurityFrame) -> serde_json::Value {
    let runs: Vec<serde_json::Value> = frame
        .runs
        .iter()
        .map(|r| {
            json!({
                "stores": r.stores.iter().map(|s| store_json(&frame.vars, s)).collect::<Vec<_>>(),
                "halts": r.halts,
                "stuck": r.stuck,
                "diverging": r.diverging,
            })
        })
        .collect();
    let worlds: Vec<serde_json::Value> = frame
        .worlds
        .iter()
        .map(|w| match w.depth {
            Depth::At(d) => json!({"run": w.run, "depth": d}),
            Depth::Limit => json!({"run": w.run, "depth": "limit"}),
        })
        .collect();
    let mut relations = Map::new();
    for agent in &frame.agents {
        let rels = frame.rels(agent).unwrap();
        let wp = match &rels.wp {
            WriteRel::Part(p) => json!({"classes": partition_json(p)}),
            WriteRel::Explicit(rows) => {
                let mut pairs = Vec::new();
                for (a, row) in rows.iter().enumerate() {
                    for b in row.iter_set() {
                        if b > a {
                            pairs.push(json!([a, b]));
                        }
                    }
                }
                json!({ "pairs": pairs })
            }
        };
        relations.insert(
            agent.clone(),
            json!({
                "kc": partition_json(&rels.kc),
                "kp": partition_json(&rels.kp),
                "wc": partition_json(&rels.wc),
                "wp": wp,
                "count": partition_json(&rels.cnt),
            }),
        );
    }
    json!({
        "vars": frame.vars,
        "agents": frame.agents,
        "flags": {
            "signals_termination": frame.signals_termination,
            "synchronous": frame.synchronous,
        },
        "runs": runs,
        "worlds": worlds,
        "relations": relations,
    })
}

pub fn to_json_string(frame: &SecurityFrame) -> String {
    serde_json::to_string_pretty(&to_json(frame)).unwrap()
}

fn partition_from_json(
    v: &serde_json::Value,
    n: usize,
    what: &str,
) -> Result<Partition, FrameError> {
    let classes_raw = v
        .as_array()
        .ok_or_else(|| FrameError::Import(format!("{what}: expected an array of classes")))?;
    let mut class_of = vec![u32::MAX; n];
    let mut classes = Vec::new();
    for (ci, class) in classes_raw.iter().enumerate() {
        let mut mask = Mask::empty(n);
        for idx in class
            .as_array()
            .ok_or_else(|| FrameError::Import(format!("{what}: class must be an array")))?
        {
            let i = idx
                .as_u64()
                .ok_or_else(|| FrameError::Import(format!("{what}: world index")))?
                as usize;
            if i >= n {
                return Err(FrameError::Import(format!(
                    "{what}: world index {i} out of range"
                )));
            }
            mask.set(i);
            class_of[i] = ci as u32;
        }
        classes.push(mask);
    }
    if class_of.contains(&u32::MAX) {
        return Err(FrameError::Import(format!(
            "{what}: classes do not cover all worlds"
        )));
    }
    Ok(Partition { class_of, classes })
}

/// Rebuild a frame from its JSON export. Only structural consistency is
/// checked; the relations are taken as given.
pub fn from_json(text: &str) -> Result<SecurityFrame, FrameError> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| FrameError::Import(e.to_string()))?;
    let vars: Vec<String> = serde_json::from_value(v["vars"].clone())
        .map_err(|e| FrameError::Import(format!("vars: {e}")))?;
    let agents: Vec<String> = serde_json::from_value(v["agents"].clone())
        .map_err(|e| FrameError::Import(format!("agents: {e}")))?;
    let signals_termination = v["flags"]["signals_termination"].as_bool().unwrap_or(false);
    let synchronous = v["flags"]["synchronous"].as_bool().unwrap_or(false);

    let runs_raw = v["runs"]
        .as_array()
        .ok_or_else(|| FrameError::Import("runs must be an array".into()))?;
    let mut runs = Vec::new();
    for r in runs_raw {
        let stores_raw = r["stores"]
            .as_array()
            .ok_or_else(|| FrameError::Import("run stores must be an array".into()))?;
        let mut stores = Vec::new();
        for s in stores_raw {
            let vals = s
                .as_array()
                .ok_or_else(|| FrameError::Import("store must be an array".into()))?;
            if vals.len() != vars.len() {
                return Err(FrameError::Import("store arity mismatch".into()));
            }
            let mut store = Store::new();
            for (var, val) in vars.iter().zip(vals) {
                store.insert(
                    var.clone(),
                    value::from_json(val).map_err(FrameError::Import)?,
                );
            }
            stores.push(store);
        }
        if stores.is_empty() {
            return Err(FrameError::Import("run with no stores".into()));
        }
        runs.push(FrameRun {
            initial: stores[0].clone(),
            stores,
            halts: r["halts"].as_bool().unwrap_or(false),
            stuck: r["stuck"].as_bool().unwrap_or(false),
            diverging: r["diverging"].as_bool().unwrap_or(false),
        });
    }

    let mut worlds = Vec::new();
    let mut spans = Vec::new();
    for (ri, run) in runs.iter().enumerate() {
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

    let declared_worlds = v["worlds"]
        .as_array()
        .ok_or_else(|| FrameError::Import("worlds must be an array".into()))?;
    if declared_worlds.len() != n {
        return Err(FrameError::Import(format!(
            "world count mismatch: declared {}, derived {n}",
            declared_worlds.len()
        )));
    }

    let mut rels = Vec::new();
    for agent in &agents {
        let r = &v["relations"][agent];
        if r.is_null() {
            return Err(FrameError::Import(format!("missing relations for {agent}")));
        }
        let kc = partition_from_json(&r["kc"], n, "kc")?;
        let kp = partition_from_json(&r["kp"], n, "kp")?;
        let wc = partition_from_json(&r["wc"], n, "wc")?;
        let cnt = partition_from_json(&r["count"], n, "count")?;
        let wp = if r["wp"]["classes"].is_array() {
            WriteRel::Part(partition_from_json(&r["wp"]["classes"], n, "wp")?)
        } else if let Some(pairs) = r["wp"]["pairs"].as_array() {
            let mut rows = vec![Mask::empty(n); n];
            for (i, row) in rows.iter_mut().enumerate() {
                row.set(i);
            }
            for p in pairs {
                let (a, b) = (
                    p[0].as_u64().unwrap_or(u64::MAX) as usize,
                    p[1].as_u64().unwrap_or(u64::MAX) as usize,
                );
                if a >= n || b >= n {
                    return Err(FrameError::Import("wp pair out of range".into()));
                }
                rows[a].set(b);
                rows[b].set(a);
            }
            WriteRel::Explicit(rows)
        } else {
            return Err(FrameError::Import("wp must have classes or pairs".into()));
        };
        rels.push(AgentRels {
            kc,
            kp,
            wc,
            wp,
            cnt,
        });
    }

    let mut halting_runs = Mask::empty(n);
    let mut diverging_runs = Mask::empty(n);
    let mut halted = Mask::empty(n);
    for (ri, run) in runs.iter().enumerate() {
        let (a, b) = spans[ri];
        if run.halts {
            halting_runs.set_range(a, b);
            halted.set(a + run.stores.len() - 1);
        } else {
            diverging_runs.set_range(a, b);
        }
    }

    Ok(SecurityFrame {
        vars,
        agents,
        signals_termination,
        synchronous,
        runs,
        worlds,
        spans,
        rels,
        halting_runs,
        diverging_runs,
        halted,
    })
}
