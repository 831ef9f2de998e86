//! Security contexts (per-agent read/write sets plus policy refinements)
//! and the JSON policy file format.

use crate::lang::{self, Expr, LangError};
use crate::value::{self, Value};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EndorseMode {
    None,
    /// Per-agent sets of variables whose influence is endorsed outright.
    PerVariable(BTreeMap<String, BTreeSet<String>>),
    /// Endorsement events recorded in the reserved E variable.
    Event,
}

#[derive(Clone, Debug)]
pub struct SecurityContext {
    pub agents: Vec<String>,
    /// Declared domains in canonical (policy) order.
    pub domains: Vec<(String, Vec<Value>)>,
    pub read: BTreeMap<String, BTreeSet<String>>,
    pub write: BTreeMap<String, BTreeSet<String>>,
    pub signals_termination: bool,
    pub synchronous: bool,
    /// Per-agent declassification predicate over time-0 variable values.
    pub declass: BTreeMap<String, Expr>,
    pub endorse: EndorseMode,
}

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("policy JSON: {0}")]
    Json(String),
    #[error("policy references undeclared variable '{var}' in {place}")]
    UndeclaredVariable { var: String, place: String },
    #[error("policy references unknown agent '{0}'")]
    UnknownAgent(String),
    #[error("declassification predicate for '{agent}': {err}")]
    BadPredicate { agent: String, err: LangError },
}

impl SecurityContext {
    pub fn new(agents: &[&str], domains: &[(&str, &[i64])]) -> SecurityContext {
        SecurityContext {
            agents: agents.iter().map(|a| a.to_string()).collect(),
            domains: domains
                .iter()
                .map(|(v, d)| (v.to_string(), d.iter().map(|n| Value::Int(*n)).collect()))
                .collect(),
            read: BTreeMap::new(),
            write: BTreeMap::new(),
            signals_termination: false,
            synchronous: false,
            declass: BTreeMap::new(),
            endorse: EndorseMode::None,
        }
    }

    pub fn with_read(mut self, agent: &str, vars: &[&str]) -> Self {
        self.read
            .insert(agent.into(), vars.iter().map(|v| v.to_string()).collect());
        self
    }

    pub fn with_write(mut self, agent: &str, vars: &[&str]) -> Self {
        self.write
            .insert(agent.into(), vars.iter().map(|v| v.to_string()).collect());
        self
    }

    pub fn with_flags(mut self, signals_termination: bool, synchronous: bool) -> Self {
        self.signals_termination = signals_termination;
        self.synchronous = synchronous;
        self
    }

    pub fn read_set(&self, agent: &str) -> BTreeSet<String> {
        self.read.get(agent).cloned().unwrap_or_default()
    }

    pub fn write_set(&self, agent: &str) -> BTreeSet<String> {
        self.write.get(agent).cloned().unwrap_or_default()
    }

    pub fn declared(&self) -> &[(String, Vec<Value>)] {
        &self.domains
    }

    /// Validate internal consistency against a variable universe.
    pub fn validate(&self, vars: &[String]) -> Result<(), PolicyError> {
        let universe: BTreeSet<&String> = vars.iter().collect();
        for (agent, set) in self.read.iter().chain(self.write.iter()) {
            if !self.agents.iter().any(|a| a == agent) {
                return Err(PolicyError::UnknownAgent(agent.clone()));
            }
            for v in set {
                if !universe.contains(v) {
                    return Err(PolicyError::UndeclaredVariable {
                        var: v.clone(),
                        place: format!("read/write set of {agent}"),
                    });
                }
            }
        }
        for (agent, psi) in &self.declass {
            if !self.agents.iter().any(|a| a == agent) {
                return Err(PolicyError::UnknownAgent(agent.clone()));
            }
            let mut used = BTreeSet::new();
            psi.collect_vars(&mut used);
            for v in used {
                if !universe.contains(&v) {
                    return Err(PolicyError::UndeclaredVariable {
                        var: v,
                        place: format!("declassification predicate of {agent}"),
                    });
                }
            }
        }
        if let EndorseMode::PerVariable(map) = &self.endorse {
            for (agent, set) in map {
                if !self.agents.iter().any(|a| a == agent) {
                    return Err(PolicyError::UnknownAgent(agent.clone()));
                }
                for v in set {
                    if !universe.contains(v) {
                        return Err(PolicyError::UndeclaredVariable {
                            var: v.clone(),
                            place: format!("endorsed variables of {agent}"),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Parse the JSON policy file format.
    pub fn from_json(text: &str) -> Result<SecurityContext, PolicyError> {
        let raw: serde_json::Value =
            serde_json::from_str(text).map_err(|e| PolicyError::Json(e.to_string()))?;
        let obj = raw
            .as_object()
            .ok_or_else(|| PolicyError::Json("policy must be an object".into()))?;

        let agents: Vec<String> = match obj.get("agents") {
            Some(serde_json::Value::Array(xs)) => xs
                .iter()
                .map(|x| {
                    x.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| PolicyError::Json("agent names must be strings".into()))
                })
                .collect::<Result<_, _>>()?,
            _ => return Err(PolicyError::Json("missing 'agents' array".into())),
        };

        let mut domains = Vec::new();
        match obj.get("domains") {
            Some(serde_json::Value::Object(m)) => {
                for (var, dom) in m {
                    let xs = dom
                        .as_array()
                        .ok_or_else(|| PolicyError::Json(format!("domain of {var} not an array")))?;
                    let mut vals: Vec<Value> = xs
                        .iter()
                        .map(value::from_json)
                        .collect::<Result<_, _>>()
                        .map_err(PolicyError::Json)?;
                    vals.sort();
                    vals.dedup();
                    domains.push((var.clone(), vals));
                }
            }
            _ => return Err(PolicyError::Json("missing 'domains' object".into())),
        }

        let var_sets = |key: &str| -> Result<BTreeMap<String, BTreeSet<String>>, PolicyError> {
            let mut out = BTreeMap::new();
            if let Some(serde_json::Value::Object(m)) = obj.get(key) {
                for (agent, xs) in m {
                    let set = xs
                        .as_array()
                        .ok_or_else(|| PolicyError::Json(format!("{key} of {agent} not an array")))?
                        .iter()
                        .map(|x| {
                            x.as_str()
                                .map(str::to_string)
                                .ok_or_else(|| PolicyError::Json("variable names must be strings".into()))
                        })
                        .collect::<Result<_, _>>()?;
                    out.insert(agent.clone(), set);
                }
            }
            Ok(out)
        };
        let read = var_sets("read")?;
        let write = var_sets("write")?;

        let mut signals_termination = false;
        let mut synchronous = false;
        if let Some(serde_json::Value::Object(f)) = obj.get("flags") {
            signals_termination = f
                .get("signals_termination")
                .and_then(|v| v.as_bool())
                .unwrap_or(false);
            synchronous = f
                .get("synchronous")
                .and_then(|v| v.as_bool())
                .unwrap_or(false);
        }

        let mut declass = BTreeMap::new();
        if let Some(serde_json::Value::Object(m)) = obj.get("declass") {
            for (agent, src) in m {
                let src = src
                    .as_str()
                    .ok_or_else(|| PolicyError::Json("declass predicate must be a string".into()))?;
                let stmt = lang::parse(&format!("__declass := {src}")).map_err(|err| {
                    PolicyError::BadPredicate {
                        agent: agent.clone(),
                        err,
                    }
                })?;
                let psi = match &*stmt {
                    lang::Stmt::Assign(_, e) => e.clone(),
                    _ => unreachable!("wrapper is an assignment"),
                };
                declass.insert(agent.clone(), psi);
            }
        }

        let endorse = match obj.get("endorse") {
            None => EndorseMode::None,
            Some(serde_json::Value::Object(m)) => match m.get("mode").and_then(|v| v.as_str()) {
                None | Some("none") => EndorseMode::None,
                Some("event") => EndorseMode::Event,
                Some("per_variable") => {
                    let mut out = BTreeMap::new();
                    if let Some(serde_json::Value::Object(vars)) = m.get("vars") {
                        for (agent, xs) in vars {
                            let set = xs
                                .as_array()
                                .ok_or_else(|| {
                                    PolicyError::Json("endorse vars must be arrays".into())
                                })?
                                .iter()
                                .filter_map(|x| x.as_str().map(str::to_string))
                                .collect();
                            out.insert(agent.clone(), set);
                        }
                    }
                    EndorseMode::PerVariable(out)
                }
                Some(other) => {
                    return Err(PolicyError::Json(format!("unknown endorse mode '{other}'")))
                }
            },
            Some(_) => return Err(PolicyError::Json("'endorse' must be an object".into())),
        };

        Ok(SecurityContext {
            agents,
            domains,
            read,
            write,
            signals_termination,
            synchronous,
            declass,
            endorse,
        })
    }
}
