//! The JSON instance file.
//!
//! ```json
//! {"format": 1, "n": 3,
//!  "objective": {"sense": "max", "coeffs": [1, 1, 1]},
//!  "rows": [{"coeffs": [1, "1/2", 0], "sense": "<=", "rhs": 4}],
//!  "bounds": [{"lo": 0, "hi": null, "integer": true}, ...],
//!  "group": {"generators": ["(1,2,3)"]}}
//! ```
//!
//! Numbers are JSON integers or `"p/q"` strings. Infinite bounds are `null`
//! or `"inf"` / `"-inf"`. `bounds` and `group` may be omitted.

use std::path::Path;

use orbitcut::exact::{format_rational, parse_rational, Rational};
use orbitcut::group::{parse_generators, GroupError, GroupSpec, DEFAULT_MAX_WORD_LEN};
use orbitcut::solve::{Instance, InstanceError, Objective, ObjectiveSense, Row, RowSense, VarBound};
use serde_json::{json, Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Schema(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

fn schema(msg: impl Into<String>) -> FileError {
    FileError::Schema(msg.into())
}

/// A parsed instance with the generator strings it was written with and
/// any notes carried in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub instance: Instance,
    pub generators: Vec<String>,
    pub warnings: Vec<String>,
}

fn number(v: &Value, what: &str) -> Result<Rational, FileError> {
    let bad = || schema(format!("{what}: expected an integer or a \"p/q\" string, got {v}"));
    match v {
        Value::Number(n) if n.is_i64() || n.is_u64() => parse_rational(&n.to_string()).ok_or_else(bad),
        Value::String(s) => parse_rational(s).ok_or_else(bad),
        _ => Err(bad()),
    }
}

fn numbers(v: &Value, n: usize, what: &str) -> Result<Vec<Rational>, FileError> {
    let arr = v.as_array().ok_or_else(|| schema(format!("{what} must be an array")))?;
    if arr.len() != n {
        return Err(schema(format!("{what} has length {}, expected {n}", arr.len())));
    }
    arr.iter().map(|x| number(x, what)).collect()
}

fn bound(v: Option<&Value>, infinite: &str, what: &str) -> Result<Option<Rational>, FileError> {
    match v {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) if s == infinite || (infinite == "inf" && s == "+inf") => Ok(None),
        Some(x) => number(x, what).map(Some),
    }
}

pub fn parse(text: &str) -> Result<InstanceFile, FileError> {
    let doc: Value = serde_json::from_str(text)?;
    let obj = doc.as_object().ok_or_else(|| schema("instance must be a JSON object"))?;
    if let Some(f) = obj.get("format") {
        if f.as_u64() != Some(1) {
            return Err(schema(format!("unsupported format {f}")));
        }
    }
    let n = obj
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| schema("n must be a positive integer"))? as usize;
    if n == 0 {
        return Err(schema("n must be a positive integer"));
    }
    let o = obj.get("objective").ok_or_else(|| schema("missing objective"))?;
    let sense = match o.get("sense").and_then(Value::as_str) {
        Some("max") => ObjectiveSense::Max,
        Some("min") => ObjectiveSense::Min,
        Some("feasibility") => ObjectiveSense::Feasibility,
        other => return Err(schema(format!("objective sense must be max, min or feasibility, got {other:?}"))),
    };
    let coeffs = match o.get("coeffs") {
        None if sense == ObjectiveSense::Feasibility => vec![Rational::from_integer(0.into()); n],
        None => return Err(schema("objective coeffs missing")),
        Some(c) => numbers(c, n, "objective coeffs")?,
    };
    let mut rows = Vec::new();
    let empty = Vec::new();
    let row_values = match obj.get("rows") {
        None => &empty,
        Some(r) => r.as_array().ok_or_else(|| schema("rows must be an array"))?,
    };
    for (i, r) in row_values.iter().enumerate() {
        let what = format!("row {}", i + 1);
        let sense = match r.get("sense").and_then(Value::as_str) {
            Some("<=") => RowSense::Le,
            Some(">=") => RowSense::Ge,
            Some("=") | Some("==") => RowSense::Eq,
            other => return Err(schema(format!("{what}: sense must be <=, >= or =, got {other:?}"))),
        };
        rows.push(Row {
            coeffs: numbers(r.get("coeffs").unwrap_or(&Value::Null), n, &what)?,
            sense,
            rhs: number(r.get("rhs").unwrap_or(&Value::Null), &format!("{what} rhs"))?,
        });
    }
    let bounds = match obj.get("bounds") {
        None => vec![VarBound::free_integer(); n],
        Some(b) => {
            let arr = b.as_array().ok_or_else(|| schema("bounds must be an array"))?;
            if arr.len() != n {
                return Err(schema(format!("bounds has length {}, expected {n}", arr.len())));
            }
            arr.iter()
                .enumerate()
                .map(|(j, b)| {
                    let what = format!("bound of x{}", j + 1);
                    if !b.is_object() {
                        return Err(schema(format!("{what} must be an object with lo/hi")));
                    }
                    Ok(VarBound {
                        lo: bound(b.get("lo"), "-inf", &what)?,
                        hi: bound(b.get("hi"), "inf", &what)?,
                        integer: b.get("integer").map_or(Some(true), Value::as_bool).ok_or_else(|| schema(format!("{what}: integer must be a boolean")))?,
                    })
                })
                .collect::<Result<Vec<_>, FileError>>()?
        }
    };
    let generators: Vec<String> = match obj.get("group").and_then(|g| g.get("generators")) {
        None => Vec::new(),
        Some(g) => g
            .as_array()
            .ok_or_else(|| schema("group generators must be an array"))?
            .iter()
            .map(|s| s.as_str().map(str::to_string).ok_or_else(|| schema("generators must be strings")))
            .collect::<Result<_, _>>()?,
    };
    let group = if generators.is_empty() {
        GroupSpec::trivial(n)
    } else {
        parse_generators(&generators, n)?.analyzed(DEFAULT_MAX_WORD_LEN)
    };
    let warnings = match obj.get("warnings") {
        Some(Value::Array(w)) => w.iter().filter_map(|s| s.as_str().map(str::to_string)).collect(),
        _ => Vec::new(),
    };
    let instance = Instance {
        n,
        objective: Objective { sense, coeffs },
        rows,
        bounds,
        group,
    };
    instance.validate()?;
    Ok(InstanceFile {
        instance,
        generators,
        warnings,
    })
}

pub fn read(path: &Path) -> Result<InstanceFile, FileError> {
    parse(&std::fs::read_to_string(path)?)
}

fn num_value(q: &Rational) -> Value {
    if q.is_integer() {
        if let Ok(v) = q.numer().to_string().parse::<i64>() {
            return json!(v);
        }
    }
    Value::String(format_rational(q))
}

impl InstanceFile {
    pub fn to_value(&self) -> Value {
        let inst = &self.instance;
        let sense = match inst.objective.sense {
            ObjectiveSense::Max => "max",
            ObjectiveSense::Min => "min",
            ObjectiveSense::Feasibility => "feasibility",
        };
        let mut obj = Map::new();
        obj.insert("format".into(), json!(1));
        obj.insert("n".into(), json!(inst.n));
        obj.insert(
            "objective".into(),
            json!({"sense": sense, "coeffs": inst.objective.coeffs.iter().map(num_value).collect::<Vec<_>>()}),
        );
        let rows: Vec<Value> = inst
            .rows
            .iter()
            .map(|r| {
                let sense = match r.sense {
                    RowSense::Le => "<=",
                    RowSense::Ge => ">=",
                    RowSense::Eq => "=",
                };
                json!({"coeffs": r.coeffs.iter().map(num_value).collect::<Vec<_>>(), "sense": sense, "rhs": num_value(&r.rhs)})
            })
            .collect();
        obj.insert("rows".into(), Value::Array(rows));
        let bounds: Vec<Value> = inst
            .bounds
            .iter()
            .map(|b| json!({"lo": b.lo.as_ref().map(num_value), "hi": b.hi.as_ref().map(num_value), "integer": b.integer}))
            .collect();
        obj.insert("bounds".into(), Value::Array(bounds));
        obj.insert("group".into(), json!({"generators": self.generators}));
        if !self.warnings.is_empty() {
            obj.insert("warnings".into(), json!(self.warnings));
        }
        Value::Object(obj)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("instance files always serialize")
    }

    pub fn write(&self, path: &Path) -> Result<(), FileError> {
        std::fs::write(path, self.to_json_string() + "\n")?;
        Ok(())
    }
}
