//! Linear instances, the exact LP relaxation, and the enumeration solver.

pub mod enumerate;
pub mod lp;
pub mod minlp;

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exact::{format_rational, rat, Rational};
use crate::group::GroupSpec;
use crate::engine::Subproblem;
use crate::synth::{var_name, AuxKind};
use enumerate::{SearchProblem, SearchStatus, SolveError};
use lp::{LpProblem, LpResult, LpRow, LpSense};
use minlp::{MinlpDocument, MinlpError, MinlpObjective, MinlpVar, VarType};

/// Default half-width of the enumeration box.
pub const DEFAULT_BOX: i64 = 50;

/// Default number of search nodes per subproblem.
pub const DEFAULT_NODE_LIMIT: u64 = 20_000_000;

/// Tolerance for evaluated equalities and non-strict inequalities.
pub const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("{what} has length {got}, expected {expected}")]
    LengthMismatch { what: String, expected: usize, got: usize },
    #[error("variable x{0} has lower bound above upper bound")]
    EmptyBound(usize),
    #[error("variable x{0} is continuous; only integer variables are supported")]
    Continuous(usize),
    #[error("group acts on {got} coordinates, instance has {expected}")]
    GroupDimension { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveSense {
    Max,
    Min,
    Feasibility,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Objective {
    pub sense: ObjectiveSense,
    pub coeffs: Vec<Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowSense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl RowSense {
    fn lp(self) -> LpSense {
        match self {
            RowSense::Le => LpSense::Le,
            RowSense::Ge => LpSense::Ge,
            RowSense::Eq => LpSense::Eq,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub coeffs: Vec<Rational>,
    pub sense: RowSense,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarBound {
    pub lo: Option<Rational>,
    pub hi: Option<Rational>,
    pub integer: bool,
}

impl VarBound {
    pub fn free_integer() -> Self {
        Self {
            lo: None,
            hi: None,
            integer: true,
        }
    }

    pub fn integer(lo: i64, hi: i64) -> Self {
        Self {
            lo: Some(rat(lo)),
            hi: Some(rat(hi)),
            integer: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub n: usize,
    pub objective: Objective,
    pub rows: Vec<Row>,
    pub bounds: Vec<VarBound>,
    pub group: GroupSpec,
}

impl Instance {
    pub fn validate(&self) -> Result<(), InstanceError> {
        let len = |what: &str, got: usize| {
            if got == self.n {
                Ok(())
            } else {
                Err(InstanceError::LengthMismatch {
                    what: what.to_string(),
                    expected: self.n,
                    got,
                })
            }
        };
        len("objective", self.objective.coeffs.len())?;
        len("bounds", self.bounds.len())?;
        for (i, r) in self.rows.iter().enumerate() {
            len(&format!("row {}", i + 1), r.coeffs.len())?;
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if let (Some(lo), Some(hi)) = (&b.lo, &b.hi) {
                if lo > hi {
                    return Err(InstanceError::EmptyBound(j + 1));
                }
            }
            if !b.integer {
                return Err(InstanceError::Continuous(j + 1));
            }
        }
        if self.group.n != self.n {
            return Err(InstanceError::GroupDimension {
                expected: self.n,
                got: self.group.n,
            });
        }
        Ok(())
    }

    fn lp_problem(&self) -> LpProblem {
        LpProblem {
            objective: vec![Rational::zero(); self.n],
            rows: self
                .rows
                .iter()
                .map(|r| LpRow {
                    coeffs: r.coeffs.clone(),
                    sense: r.sense.lp(),
                    rhs: r.rhs.clone(),
                })
                .collect(),
            lower: self.bounds.iter().map(|b| b.lo.clone()).collect(),
            upper: self.bounds.iter().map(|b| b.hi.clone()).collect(),
        }
    }

    /// Maximizes (or minimizes) `coeffs . x` over the linear relaxation.
    pub fn lp_optimize(&self, coeffs: &[Rational], maximize: bool) -> LpResult {
        let mut p = self.lp_problem();
        p.objective = coeffs.iter().map(|c| if maximize { c.clone() } else { -c.clone() }).collect();
        match lp::solve(&p) {
            LpResult::Optimal { x, value } => LpResult::Optimal {
                x,
                value: if maximize { value } else { -value },
            },
            other => other,
        }
    }

    /// Warnings for generators that do not map the instance onto itself.
    pub fn check_symmetry(&self) -> Vec<String> {
        let normalized: Vec<(Vec<Rational>, RowSense, Rational)> = self.rows.iter().map(normalize_row).collect();
        let mut warnings = Vec::new();
        for g in self.group.nontrivial_generators() {
            let mut problems = Vec::new();
            let rows_ok = self.rows.iter().all(|r| {
                let moved = Row {
                    coeffs: g.apply(&r.coeffs),
                    sense: r.sense,
                    rhs: r.rhs.clone(),
                };
                normalized.contains(&normalize_row(&moved))
            });
            if !rows_ok {
                problems.push("rows");
            }
            if g.apply(&self.bounds) != self.bounds {
                problems.push("bounds");
            }
            if self.objective.sense != ObjectiveSense::Feasibility && g.apply(&self.objective.coeffs) != self.objective.coeffs {
                problems.push("objective");
            }
            if !problems.is_empty() {
                warnings.push(format!("generator {g} does not preserve the {}", problems.join(", ")));
            }
        }
        warnings
    }
}

/// Scales a row to a canonical representative (`>=` folded into `<=`,
/// first nonzero coefficient of an equality made positive, gcd removed).
fn normalize_row(r: &Row) -> (Vec<Rational>, RowSense, Rational) {
    let (mut coeffs, mut rhs, sense) = match r.sense {
        RowSense::Ge => (r.coeffs.iter().map(|c| -c.clone()).collect(), -r.rhs.clone(), RowSense::Le),
        s => (r.coeffs.clone(), r.rhs.clone(), s),
    };
    let lead = coeffs.iter().find(|c| !c.is_zero()).cloned();
    if let Some(lead) = lead {
        let mut scale = lead.abs();
        if sense == RowSense::Eq && lead.is_negative() {
            scale = -scale;
        }
        for c in coeffs.iter_mut() {
            *c /= &scale;
        }
        rhs /= &scale;
    }
    (coeffs, sense, rhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Feasible,
    Infeasible,
    Unknown,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub status: Status,
    pub point: Option<Vec<Rational>>,
    pub objective: Option<Rational>,
}

impl Outcome {
    pub fn of(status: Status) -> Self {
        Self {
            status,
            point: None,
            objective: None,
        }
    }
}

impl Serialize for Outcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Outcome", 3)?;
        st.serialize_field("status", &self.status)?;
        st.serialize_field(
            "point",
            &self.point.as_ref().map(|p| p.iter().map(format_rational).collect::<Vec<_>>()),
        )?;
        st.serialize_field("objective", &self.objective.as_ref().map(format_rational))?;
        st.end()
    }
}

/// Exact LP relaxation of the instance's own objective.
pub fn lp_relax(inst: &Instance) -> Outcome {
    let maximize = inst.objective.sense != ObjectiveSense::Min;
    let coeffs = match inst.objective.sense {
        ObjectiveSense::Feasibility => vec![Rational::zero(); inst.n],
        _ => inst.objective.coeffs.clone(),
    };
    match inst.lp_optimize(&coeffs, maximize) {
        LpResult::Optimal { x, value } => Outcome {
            status: Status::Feasible,
            point: Some(x),
            objective: Some(value),
        },
        LpResult::Infeasible => Outcome::of(Status::Infeasible),
        LpResult::Unbounded => Outcome::of(Status::Unbounded),
    }
}

/// Integer enumeration box for the decision variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchBox {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
    /// Variables whose true range was cut by the default half-width.
    pub truncated: Vec<usize>,
}

impl SearchBox {
    pub fn is_truncated(&self) -> bool {
        !self.truncated.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| l > h)
    }
}

fn floor_i64(q: &Rational) -> i64 {
    q.numer().div_floor(q.denom()).to_i64().unwrap_or(i64::MAX / 4)
}

fn ceil_i64(q: &Rational) -> i64 {
    q.numer().div_ceil(q.denom()).to_i64().unwrap_or(i64::MIN / 4)
}

/// Instance bounds tightened by per-variable LP bounds, clipped to `[-half, half]`.
pub fn derive_box(inst: &Instance, half: i64) -> SearchBox {
    let mut lo = Vec::with_capacity(inst.n);
    let mut hi = Vec::with_capacity(inst.n);
    let mut truncated = Vec::new();
    for j in 0..inst.n {
        let mut unit = vec![Rational::zero(); inst.n];
        unit[j] = rat(1);
        let bound = |maximize: bool| match inst.lp_optimize(&unit, maximize) {
            LpResult::Optimal { value, .. } => Some(value),
            _ => None,
        };
        let (l, h) = (bound(false), bound(true));
        let l = l.map(|v| ceil_i64(&v));
        let h = h.map(|v| floor_i64(&v));
        let cut = l.is_none_or(|v| v < -half) || h.is_none_or(|v| v > half);
        if cut {
            truncated.push(j);
        }
        lo.push(l.unwrap_or(-half).max(-half));
        hi.push(h.unwrap_or(half).min(half));
    }
    SearchBox { lo, hi, truncated }
}

/// Result of one subproblem together with the search effort it took.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubOutcome {
    pub outcome: Outcome,
    pub nodes: u64,
}

fn search_problem(sub: &Subproblem, sbox: &SearchBox) -> Result<SearchProblem, SolveError> {
    let inst = &sub.base;
    let mut vars: Vec<(String, Option<i64>, Option<i64>)> =
        (0..inst.n).map(|j| (var_name(j), Some(sbox.lo[j]), Some(sbox.hi[j]))).collect();
    for set in &sub.added {
        for aux in &set.aux_vars {
            if vars.iter().any(|v| v.0 == aux.name) {
                continue;
            }
            vars.push(match aux.kind {
                AuxKind::Binary => (aux.name.clone(), Some(0), Some(1)),
                AuxKind::Integer => (aux.name.clone(), None, None),
            });
        }
    }
    let mut p = SearchProblem::new(vars, FEAS_TOL);
    for r in &inst.rows {
        let coeffs: Vec<(usize, Rational)> = r.coeffs.iter().cloned().enumerate().collect();
        let ord = match r.sense {
            RowSense::Le => std::cmp::Ordering::Less,
            RowSense::Ge => std::cmp::Ordering::Greater,
            RowSense::Eq => std::cmp::Ordering::Equal,
        };
        p.add_linear(&coeffs, ord, &r.rhs)?;
    }
    for set in &sub.added {
        for c in &set.constraints {
            p.add_constraint(c)?;
        }
    }
    if inst.objective.sense != ObjectiveSense::Feasibility {
        let coeffs: Vec<(usize, Rational)> = inst.objective.coeffs.iter().cloned().enumerate().collect();
        p.set_objective(&coeffs, inst.objective.sense == ObjectiveSense::Max)?;
    }
    Ok(p)
}

/// Solves one subproblem by exhaustive search over the box.
///
/// An exhausted box that was clipped cannot prove infeasibility, so such a
/// result is reported as unknown.
pub fn solve_subproblem(sub: &Subproblem, sbox: &SearchBox, node_limit: u64) -> Result<SubOutcome, SolveError> {
    let inst = &sub.base;
    if sbox.is_empty() {
        return Ok(SubOutcome {
            outcome: Outcome::of(Status::Infeasible),
            nodes: 0,
        });
    }
    let p = search_problem(sub, sbox)?;
    let res = p.solve(node_limit);
    let mut outcome = match res.status {
        SearchStatus::Feasible => Outcome::of(Status::Feasible),
        SearchStatus::Infeasible if sbox.is_truncated() => Outcome::of(Status::Unknown),
        SearchStatus::Infeasible => Outcome::of(Status::Infeasible),
        SearchStatus::Unknown => Outcome::of(Status::Unknown),
    };
    if let Some(a) = res.assignment {
        let x: Vec<Rational> = a[..inst.n].iter().map(|&v| rat(v)).collect();
        let value = match inst.objective.sense {
            ObjectiveSense::Feasibility => Rational::zero(),
            _ => inst.objective.coeffs.iter().zip(&x).map(|(c, v)| c * v).sum(),
        };
        outcome.point = Some(x);
        outcome.objective = Some(value);
    }
    Ok(SubOutcome {
        outcome,
        nodes: res.nodes,
    })
}

/// The subproblem as a self-contained MINLP document.
pub fn subproblem_document(sub: &Subproblem, sbox: &SearchBox) -> MinlpDocument {
    let inst = &sub.base;
    let mut vars: Vec<MinlpVar> = (0..inst.n)
        .map(|j| MinlpVar {
            name: var_name(j),
            lo: Some(sbox.lo[j]),
            hi: Some(sbox.hi[j]),
            kind: VarType::Integer,
        })
        .collect();
    let mut constraints = minlp::instance_constraints(inst);
    for set in &sub.added {
        for aux in &set.aux_vars {
            if vars.iter().any(|v| v.name == aux.name) {
                continue;
            }
            vars.push(match aux.kind {
                AuxKind::Binary => MinlpVar {
                    name: aux.name.clone(),
                    lo: Some(0),
                    hi: Some(1),
                    kind: VarType::Binary,
                },
                AuxKind::Integer => MinlpVar {
                    name: aux.name.clone(),
                    lo: None,
                    hi: None,
                    kind: VarType::Integer,
                },
            });
        }
        constraints.extend(set.constraints.iter().cloned());
    }
    MinlpDocument {
        format: 1,
        id: sub.id,
        tag: sub.tag.as_str().to_string(),
        provenance: serde_json::to_value(&sub.provenance).expect("provenance serializes"),
        vars,
        objective: MinlpObjective {
            sense: inst.objective.sense,
            expr: minlp::objective_expr(inst),
        },
        constraints,
    }
}

pub fn export_subproblem(sub: &Subproblem, sbox: &SearchBox, path: &std::path::Path) -> Result<(), MinlpError> {
    subproblem_document(sub, sbox).write(path)
}
