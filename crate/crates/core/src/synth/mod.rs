//! Constraint synthesis for core-point outer approximations.
//!
//! Decision variables are named `x1..xn` after their 1-based coordinate.
//! Auxiliary names are derived from the first support index of the cycle
//! they belong to, which keeps them unique across disjoint cycles.

pub mod expr;

use serde::Serialize;
use thiserror::Error;

pub use expr::{Expr, ExprFormatError, LinearForm, Num};

use crate::corepoint::{canonical_rotation, rotations};
use crate::exact::{rat, Rational};
use crate::group::Cycle;
use crate::spectral::fourier_table;

/// Default margin realizing strict inequalities.
pub const DEFAULT_EPS: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthError {
    #[error("base coordinate {0} is not on the cycle")]
    BaseNotActive(usize),
    #[error("point has length {got}, cycle has length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("residue {residue} outside 1..={k}")]
    ResidueOutOfRange { residue: usize, k: usize },
}

pub fn var_name(i: usize) -> String {
    format!("x{}", i + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    /// `expr <= -eps`
    StrictNeg,
    /// `expr >= eps`
    NonNeg,
    Eq,
    LeZero,
}

impl Sense {
    pub fn as_str(self) -> &'static str {
        match self {
            Sense::StrictNeg => "strict_neg",
            Sense::NonNeg => "non_neg",
            Sense::Eq => "eq",
            Sense::LeZero => "le_zero",
        }
    }

    pub fn parse(text: &str) -> Option<Sense> {
        Some(match text {
            "strict_neg" => Sense::StrictNeg,
            "non_neg" => Sense::NonNeg,
            "eq" => Sense::Eq,
            "le_zero" => Sense::LeZero,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constraint {
    pub expr: Expr,
    pub sense: Sense,
    #[serde(serialize_with = "expr::serialize_double")]
    pub eps: f64,
}

impl Constraint {
    pub fn new(expr: Expr, sense: Sense, eps: f64) -> Self {
        Self { expr, sense, eps }
    }

    /// Whether a numeric value of the expression satisfies the sense.
    /// `tol` absorbs rounding for the non-strict senses.
    pub fn accepts(&self, value: f64, tol: f64) -> bool {
        match self.sense {
            Sense::StrictNeg => value <= -self.eps,
            Sense::NonNeg if self.eps > 0.0 => value >= self.eps,
            Sense::NonNeg => value >= -tol,
            Sense::Eq => value.abs() <= tol,
            Sense::LeZero => value <= tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SetTag {
    S1,
    S2,
    S3,
    Sublayer,
    Smooth,
    Layer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AuxKind {
    Integer,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuxVar {
    pub name: String,
    pub kind: AuxKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintSet {
    pub tag: SetTag,
    pub constraints: Vec<Constraint>,
    pub aux_vars: Vec<AuxVar>,
}

impl ConstraintSet {
    fn new(tag: SetTag) -> Self {
        Self {
            tag,
            constraints: Vec::new(),
            aux_vars: Vec::new(),
        }
    }
}

/// How many rotations of an essential point the S1 cut ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationMode {
    /// Minimum over all distinct rotations.
    All,
    /// The canonical rotation only.
    Canonical,
}

/// Treatment of the linear factors in the singularity disjunction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum S2Variant {
    /// `-2 r P <= P <= 2 r P` for every factor.
    Literal,
    /// Signed linear factors use `-2 r B <= P <= 2 r B`.
    SignGuarded {
        #[serde(serialize_with = "crate::exact::serialize_rational")]
        bound: Rational,
    },
}

fn cycle_vars(cycle: &Cycle) -> Vec<String> {
    cycle.support().iter().map(|&i| var_name(i)).collect()
}

fn float_dot(coeffs: Vec<f64>, vars: &[String]) -> Expr {
    Expr::Dot(coeffs.into_iter().map(Num::Float).collect(), vars.to_vec())
}

fn rational_dot(coeffs: Vec<i64>, vars: &[String]) -> Expr {
    Expr::Dot(coeffs.into_iter().map(Num::int).collect(), vars.to_vec())
}

/// `<V_m,c>^2 + <U_m,c>^2`, or `<V_m,c>^2` alone when `2m = k`.
pub fn projection_length(cycle: &Cycle, m: usize) -> Expr {
    let k = cycle.len();
    let vars = cycle_vars(cycle);
    let table = fourier_table(k);
    let v = Expr::square(float_dot(table.v(m), &vars));
    if 2 * m == k {
        v
    } else {
        Expr::Add(vec![v, Expr::square(float_dot(table.u(m), &vars))])
    }
}

fn alternating(k: usize) -> Vec<i64> {
    (0..k).map(|j| if j % 2 == 0 { 1 } else { -1 }).collect()
}

/// `H(z) = 1 + sum_j z_j T_{-j}(c)` expanded over the cycle variables.
pub fn barycentric_cut(z: &[i64], cycle: &Cycle) -> Expr {
    let k = cycle.len();
    let vars = cycle_vars(cycle);
    let table = fourier_table(k);
    let mut terms = vec![Expr::int(1)];
    for m in 1..=(k - 1) / 2 {
        let w: Vec<f64> = (0..k)
            .map(|i| {
                let mut s = 0.0;
                for (j, &zj) in z.iter().enumerate() {
                    if zj != 0 {
                        let a = ((i + k - j) * m % k) as i64;
                        s += zj as f64 * table.cos(a);
                    }
                }
                2.0 * s
            })
            .collect();
        if w.iter().all(|x| *x == 0.0) {
            continue;
        }
        terms.push(Expr::quotient(float_dot(w, &vars), projection_length(cycle, m)));
    }
    if k.is_multiple_of(2) {
        let s: i64 = z.iter().zip(alternating(k)).map(|(a, b)| a * b).sum();
        if s != 0 {
            terms.push(Expr::quotient(Expr::int(s), rational_dot(alternating(k), &vars)));
        }
    }
    Expr::Add(terms)
}

/// Cuts off every `c` whose orbit polytope under `cycle` contains a
/// translate of `z` in the layer of `c`.
pub fn s1_for_point(z: &[i64], cycle: &Cycle, mode: RotationMode, eps: f64) -> Result<ConstraintSet, SynthError> {
    if z.len() != cycle.len() {
        return Err(SynthError::LengthMismatch {
            expected: cycle.len(),
            got: z.len(),
        });
    }
    let chosen = match mode {
        RotationMode::All => rotations(&canonical_rotation(z)),
        RotationMode::Canonical => vec![canonical_rotation(z)],
    };
    let mut cuts: Vec<Expr> = chosen.iter().map(|r| barycentric_cut(r, cycle)).collect();
    let expr = if cuts.len() == 1 { cuts.remove(0) } else { Expr::Min(cuts) };
    let mut set = ConstraintSet::new(SetTag::S1);
    set.constraints.push(Constraint::new(expr, Sense::StrictNeg, eps));
    Ok(set)
}

/// Keeps every denominator used by S1 cuts away from zero.
pub fn smoothness(cycle: &Cycle, eps: f64) -> ConstraintSet {
    let k = cycle.len();
    let mut set = ConstraintSet::new(SetTag::Smooth);
    for m in 1..=k / 2 {
        set.constraints.push(Constraint::new(projection_length(cycle, m), Sense::NonNeg, eps));
    }
    set
}

fn aux_prefix(cycle: &Cycle) -> usize {
    cycle.support().first().map_or(0, |i| i + 1)
}

/// Forces at least one eigenvalue factor of `Cir(c|cycle)` to vanish.
pub fn s2_singular(cycle: &Cycle, variant: &S2Variant) -> ConstraintSet {
    let k = cycle.len();
    let vars = cycle_vars(cycle);
    let prefix = aux_prefix(cycle);
    let mut factors: Vec<(usize, Expr, bool)> = vec![(0, rational_dot(vec![1; k], &vars), true)];
    for m in 1..=(k - 1) / 2 {
        factors.push((m, projection_length(cycle, m), false));
    }
    if k.is_multiple_of(2) {
        factors.push((k / 2, rational_dot(alternating(k), &vars), true));
    }
    let mut set = ConstraintSet::new(SetTag::S2);
    let mut binaries = Vec::new();
    for (m, p, signed) in factors {
        let r = format!("r{prefix}_{m}");
        set.aux_vars.push(AuxVar {
            name: r.clone(),
            kind: AuxKind::Binary,
        });
        binaries.push(r.clone());
        let scaled = |s: Rational, f: Expr| Expr::Mul(vec![Expr::rat(s), Expr::var(r.clone()), f]);
        let (lower, upper) = match (variant, signed) {
            (S2Variant::SignGuarded { bound }, true) => (
                Expr::Add(vec![scaled(-rat(2) * bound, Expr::int(1)), Expr::Mul(vec![Expr::int(-1), p.clone()])]),
                Expr::Add(vec![p.clone(), scaled(-rat(2) * bound, Expr::int(1))]),
            ),
            _ => (
                Expr::Add(vec![scaled(rat(-2), p.clone()), Expr::Mul(vec![Expr::int(-1), p.clone()])]),
                Expr::Add(vec![p.clone(), scaled(rat(-2), p)]),
            ),
        };
        set.constraints.push(Constraint::new(lower, Sense::LeZero, 0.0));
        set.constraints.push(Constraint::new(upper, Sense::LeZero, 0.0));
    }
    let count = binaries.len() as i64;
    set.constraints.push(Constraint::new(
        Expr::Add(vec![
            rational_dot(vec![1; binaries.len()], &binaries),
            Expr::int(-(count - 1)),
        ]),
        Sense::LeZero,
        0.0,
    ));
    set
}

/// Pins `c|cycle` to the translates of `z`, relative to coordinate `base`.
pub fn s3_anchor(z: &[i64], cycle: &Cycle, base: usize) -> Result<ConstraintSet, SynthError> {
    if z.len() != cycle.len() {
        return Err(SynthError::LengthMismatch {
            expected: cycle.len(),
            got: z.len(),
        });
    }
    let b = cycle.position(base).ok_or(SynthError::BaseNotActive(base))?;
    let base_var = var_name(base);
    let mut set = ConstraintSet::new(SetTag::S3);
    for (j, &i) in cycle.support().iter().enumerate() {
        if j == b {
            continue;
        }
        let expr = Expr::Add(vec![
            Expr::var(var_name(i)),
            Expr::Mul(vec![Expr::int(-1), Expr::var(base_var.clone())]),
            Expr::int(-(z[j] - z[b])),
        ]);
        set.constraints.push(Constraint::new(expr, Sense::Eq, 0.0));
    }
    Ok(set)
}

/// `sum_{j in cycle} x_j = k q + residue` with a fresh integer `q`.
pub fn sublayer(cycle: &Cycle, residue: usize) -> Result<ConstraintSet, SynthError> {
    let k = cycle.len();
    if residue == 0 || residue > k {
        return Err(SynthError::ResidueOutOfRange { residue, k });
    }
    let q = format!("q{}", aux_prefix(cycle));
    let mut set = ConstraintSet::new(SetTag::Sublayer);
    set.aux_vars.push(AuxVar {
        name: q.clone(),
        kind: AuxKind::Integer,
    });
    set.constraints.push(Constraint::new(
        Expr::Add(vec![
            rational_dot(vec![1; k], &cycle_vars(cycle)),
            Expr::Mul(vec![Expr::int(-(k as i64)), Expr::var(q)]),
            Expr::int(-(residue as i64)),
        ]),
        Sense::Eq,
        0.0,
    ));
    Ok(set)
}

/// `sum_{j in cycle} x_j = layer`.
pub fn layer_equality(cycle: &Cycle, layer: i64) -> ConstraintSet {
    let mut set = ConstraintSet::new(SetTag::Layer);
    set.constraints.push(Constraint::new(
        Expr::Add(vec![rational_dot(vec![1; cycle.len()], &cycle_vars(cycle)), Expr::int(-layer)]),
        Sense::Eq,
        0.0,
    ));
    set
}
