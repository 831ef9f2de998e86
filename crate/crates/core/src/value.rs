//! Runtime values: integers plus the list/set/pair data used by the
//! channel and endorsement sugar.

use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Name(String),
    List(Vec<Value>),
    Set(BTreeSet<Value>),
    Pair(Box<Value>, Box<Value>),
}

impl Value {
    pub fn empty_list() -> Value {
        Value::List(Vec::new())
    }

    pub fn empty_set() -> Value {
        Value::Set(BTreeSet::new())
    }

    pub fn bool(b: bool) -> Value {
        Value::Int(if b { 1 } else { 0 })
    }

    /// Guard truth: integers are truthy iff nonzero, other values have no
    /// truth value (a type error at the use site).
    pub fn truthy(&self) -> Option<bool> {
        match self {
            Value::Int(n) => Some(*n != 0),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Name(s) => write!(f, "{s}"),
            Value::List(xs) => {
                write!(f, "[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
            Value::Set(xs) => {
                write!(f, "{{")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "}}")
            }
            Value::Pair(a, b) => write!(f, "({a},{b})"),
        }
    }
}

// JSON form: numbers for ints, strings for names, arrays for lists,
// {"set":[..]} and {"pair":[a,b]} for the structured values.
impl Serialize for Value {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Int(n) => ser.serialize_i64(*n),
            Value::Name(s) => ser.serialize_str(s),
            Value::List(xs) => xs.serialize(ser),
            Value::Set(xs) => {
                use serde::ser::SerializeMap;
                let mut m = ser.serialize_map(Some(1))?;
                m.serialize_entry("set", &xs.iter().collect::<Vec<_>>())?;
                m.end()
            }
            Value::Pair(a, b) => {
                use serde::ser::SerializeMap;
                let mut m = ser.serialize_map(Some(1))?;
                m.serialize_entry("pair", &[a.as_ref(), b.as_ref()])?;
                m.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw = serde_json::Value::deserialize(de)?;
        from_json(&raw).map_err(D::Error::custom)
    }
}

pub fn from_json(v: &serde_json::Value) -> Result<Value, String> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(Value::Int)
            .ok_or_else(|| format!("non-integer number {n}")),
        serde_json::Value::String(s) => Ok(Value::Name(s.clone())),
        serde_json::Value::Array(xs) => Ok(Value::List(
            xs.iter().map(from_json).collect::<Result<_, _>>()?,
        )),
        serde_json::Value::Object(m) => {
            if let Some(serde_json::Value::Array(xs)) = m.get("set") {
                Ok(Value::Set(
                    xs.iter().map(from_json).collect::<Result<_, _>>()?,
                ))
            } else if let Some(serde_json::Value::Array(xs)) = m.get("pair") {
                if xs.len() != 2 {
                    return Err("pair must have exactly two components".into());
                }
                Ok(Value::Pair(
                    Box::new(from_json(&xs[0])?),
                    Box::new(from_json(&xs[1])?),
                ))
            } else {
                Err(format!("unrecognised value object {m:?}"))
            }
        }
        other => Err(format!("unrecognised value {other}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truthiness_is_int_only() {
        assert_eq!(Value::Int(0).truthy(), Some(false));
        assert_eq!(Value::Int(-3).truthy(), Some(true));
        assert_eq!(Value::empty_list().truthy(), None);
    }

    #[test]
    fn json_round_trip() {
        let v = Value::Set(
            [
                Value::Pair(Box::new(Value::Name("A".into())), Box::new(Value::Int(1))),
                Value::List(vec![Value::Int(0), Value::Int(1)]),
            ]
            .into_iter()
            .collect(),
        );
        let text = serde_json::to_string(&v).unwrap();
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v, back);
    }
}
