//! MINLP-JSON documents for external solvers.
//!
//! ```json
//! {"format":1,"id":0,"tag":"S1","provenance":{...},
//!  "vars":[{"name":"x1","lo":0,"hi":3,"type":"integer"}],
//!  "objective":{"sense":"max","expr":{...}},
//!  "constraints":[{"expr":{...},"sense":"strict_neg","eps":1.0000000000000000e-6}]}
//! ```

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use super::{Instance, ObjectiveSense, RowSense};
use crate::synth::{var_name, Constraint, Expr, ExprFormatError, Num, Sense};

#[derive(Debug, Error)]
pub enum MinlpError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Expr(#[from] ExprFormatError),
    #[error("invalid document: {0}")]
    Schema(String),
    #[error("I/O: {0}")]
    Io(#[from] io::Error),
}

fn schema(msg: impl Into<String>) -> MinlpError {
    MinlpError::Schema(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VarType {
    Integer,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinlpVar {
    pub name: String,
    pub lo: Option<i64>,
    pub hi: Option<i64>,
    #[serde(rename = "type")]
    pub kind: VarType,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinlpObjective {
    pub sense: ObjectiveSense,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinlpDocument {
    pub format: u32,
    pub id: usize,
    pub tag: String,
    pub provenance: Value,
    pub vars: Vec<MinlpVar>,
    pub objective: MinlpObjective,
    pub constraints: Vec<Constraint>,
}

/// The instance rows as `expr (le_zero | eq) 0` constraints.
pub fn instance_constraints(inst: &Instance) -> Vec<Constraint> {
    inst.rows
        .iter()
        .map(|r| {
            let flip = r.sense == RowSense::Ge;
            let sign = |q: &crate::exact::Rational| if flip { -q.clone() } else { q.clone() };
            let (coeffs, vars): (Vec<Num>, Vec<String>) = r
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !num_traits::Zero::is_zero(*c))
                .map(|(j, c)| (Num::Rat(sign(c)), var_name(j)))
                .unzip();
            let expr = Expr::Add(vec![Expr::Dot(coeffs, vars), Expr::rat(-sign(&r.rhs))]);
            let sense = if r.sense == RowSense::Eq { Sense::Eq } else { Sense::LeZero };
            Constraint::new(expr, sense, 0.0)
        })
        .collect()
}

pub fn objective_expr(inst: &Instance) -> Expr {
    match inst.objective.sense {
        ObjectiveSense::Feasibility => Expr::int(0),
        _ => Expr::Dot(
            inst.objective.coeffs.iter().cloned().map(Num::Rat).collect(),
            (0..inst.n).map(var_name).collect(),
        ),
    }
}

impl MinlpDocument {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    pub fn write(&self, path: &Path) -> Result<(), MinlpError> {
        fs::write(path, self.to_json_string() + "\n")?;
        Ok(())
    }

    pub fn parse(text: &str) -> Result<MinlpDocument, MinlpError> {
        let v: Value = serde_json::from_str(text)?;
        let obj = v.as_object().ok_or_else(|| schema("document must be an object"))?;
        let get = |k: &str| obj.get(k).ok_or_else(|| schema(format!("missing {k}")));
        let format = get("format")?.as_u64().ok_or_else(|| schema("format must be an integer"))? as u32;
        if format != 1 {
            return Err(schema(format!("unsupported format {format}")));
        }
        let bound = |b: &Value| -> Result<Option<i64>, MinlpError> {
            match b {
                Value::Null => Ok(None),
                _ => b.as_i64().map(Some).ok_or_else(|| schema("bounds must be integers or null")),
            }
        };
        let vars = get("vars")?
            .as_array()
            .ok_or_else(|| schema("vars must be an array"))?
            .iter()
            .map(|var| {
                let name = var["name"].as_str().ok_or_else(|| schema("var without name"))?.to_string();
                let kind = match var["type"].as_str() {
                    Some("integer") => VarType::Integer,
                    Some("binary") => VarType::Binary,
                    other => return Err(schema(format!("bad var type {other:?}"))),
                };
                Ok(MinlpVar {
                    name,
                    lo: bound(&var["lo"])?,
                    hi: bound(&var["hi"])?,
                    kind,
                })
            })
            .collect::<Result<Vec<_>, MinlpError>>()?;
        let o = get("objective")?;
        let sense = match o["sense"].as_str() {
            Some("max") => ObjectiveSense::Max,
            Some("min") => ObjectiveSense::Min,
            Some("feasibility") => ObjectiveSense::Feasibility,
            other => return Err(schema(format!("bad objective sense {other:?}"))),
        };
        let objective = MinlpObjective {
            sense,
            expr: Expr::from_json(&o["expr"])?,
        };
        let constraints = get("constraints")?
            .as_array()
            .ok_or_else(|| schema("constraints must be an array"))?
            .iter()
            .map(|c| {
                let sense = c["sense"]
                    .as_str()
                    .and_then(Sense::parse)
                    .ok_or_else(|| schema("bad constraint sense"))?;
                let eps = c["eps"].as_f64().ok_or_else(|| schema("eps must be a number"))?;
                Ok(Constraint::new(Expr::from_json(&c["expr"])?, sense, eps))
            })
            .collect::<Result<Vec<_>, MinlpError>>()?;
        Ok(MinlpDocument {
            format,
            id: get("id")?.as_u64().ok_or_else(|| schema("id must be an integer"))? as usize,
            tag: get("tag")?.as_str().ok_or_else(|| schema("tag must be a string"))?.to_string(),
            provenance: get("provenance")?.clone(),
            vars,
            objective,
            constraints,
        })
    }

    pub fn read(path: &Path) -> Result<MinlpDocument, MinlpError> {
        MinlpDocument::parse(&fs::read_to_string(path)?)
    }

    /// Values of every constraint expression at an assignment.
    pub fn evaluate(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Vec<Option<f64>> {
        self.constraints.iter().map(|c| c.expr.eval(lookup)).collect()
    }

    /// Whether the assignment satisfies bounds and all constraints.
    pub fn is_satisfied(&self, lookup: &dyn Fn(&str) -> Option<f64>, tol: f64) -> bool {
        let bounds_ok = self.vars.iter().all(|v| match lookup(&v.name) {
            Some(x) => v.lo.is_none_or(|lo| x >= lo as f64) && v.hi.is_none_or(|hi| x <= hi as f64),
            None => false,
        });
        bounds_ok
            && self
                .constraints
                .iter()
                .all(|c| c.expr.eval(lookup).is_some_and(|v| c.accepts(v, tol)))
    }
}
