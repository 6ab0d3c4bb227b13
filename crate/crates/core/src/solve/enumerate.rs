//! Depth-first integer enumeration with linear bound propagation.
//!
//! Linear rows with rational coefficients are scaled to integers and
//! propagated exactly at every node. Everything else is compiled to an
//! index-based tree and evaluated once all of its variables are fixed.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::exact::Rational;
use crate::synth::{Constraint, Expr, Num, Sense};

/// Initial half-width for auxiliary integers without explicit bounds.
const AUX_RANGE: i64 = 1_000_000_000_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("constraint refers to unknown variable {0}")]
    UnknownVariable(String),
    #[error("scaled coefficients exceed the 128-bit range")]
    Overflow,
}

#[derive(Debug, Clone)]
enum Compiled {
    Const(f64),
    Var(usize),
    Add(Vec<Compiled>),
    Mul(Vec<Compiled>),
    Div(Box<Compiled>, Box<Compiled>),
    Square(Box<Compiled>),
    Dot(Vec<f64>, Vec<usize>),
    Min(Vec<Compiled>),
}

impl Compiled {
    fn build(e: &Expr, index: &HashMap<String, usize>) -> Result<Compiled, SolveError> {
        let var = |n: &String| index.get(n).copied().ok_or_else(|| SolveError::UnknownVariable(n.clone()));
        let all = |xs: &[Expr]| xs.iter().map(|x| Compiled::build(x, index)).collect::<Result<Vec<_>, _>>();
        Ok(match e {
            Expr::Const(n) => Compiled::Const(n.value()),
            Expr::Var(n) => Compiled::Var(var(n)?),
            Expr::Add(xs) => Compiled::Add(all(xs)?),
            Expr::Mul(xs) => Compiled::Mul(all(xs)?),
            Expr::Min(xs) => Compiled::Min(all(xs)?),
            Expr::Div(a, b) => Compiled::Div(Box::new(Compiled::build(a, index)?), Box::new(Compiled::build(b, index)?)),
            Expr::Square(a) => Compiled::Square(Box::new(Compiled::build(a, index)?)),
            Expr::Dot(c, v) => Compiled::Dot(
                c.iter().map(Num::value).collect(),
                v.iter().map(var).collect::<Result<Vec<_>, _>>()?,
            ),
        })
    }

    /// Same operation order as [`Expr::eval`], so results agree bit for bit.
    fn eval(&self, x: &[f64]) -> Option<f64> {
        let v = match self {
            Compiled::Const(c) => *c,
            Compiled::Var(i) => x[*i],
            Compiled::Add(xs) => {
                let mut acc = 0.0;
                for e in xs {
                    acc += e.eval(x)?;
                }
                acc
            }
            Compiled::Mul(xs) => {
                let mut acc = 1.0;
                for e in xs {
                    acc *= e.eval(x)?;
                }
                acc
            }
            Compiled::Div(a, b) => {
                let den = b.eval(x)?;
                if den == 0.0 {
                    return None;
                }
                a.eval(x)? / den
            }
            Compiled::Square(a) => {
                let v = a.eval(x)?;
                v * v
            }
            Compiled::Dot(c, idx) => {
                let mut acc = 0.0;
                for (ci, &i) in c.iter().zip(idx) {
                    acc += ci * x[i];
                }
                acc
            }
            Compiled::Min(xs) => {
                let mut best: Option<f64> = None;
                for e in xs {
                    let v = e.eval(x)?;
                    best = Some(best.map_or(v, |b| b.min(v)));
                }
                best?
            }
        };
        v.is_finite().then_some(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowKind {
    Le,
    Eq,
}

/// `sum a_j x_j (<= | =) rhs` over integers.
#[derive(Debug, Clone)]
struct IntRow {
    terms: Vec<(usize, i128)>,
    kind: RowKind,
    rhs: i128,
}

#[derive(Debug, Clone)]
struct Nonlinear {
    expr: Compiled,
    vars: Vec<usize>,
    constraint: Constraint,
}

/// A finite-domain integer search problem.
#[derive(Debug, Clone)]
pub struct SearchProblem {
    names: Vec<String>,
    index: HashMap<String, usize>,
    lo: Vec<i64>,
    hi: Vec<i64>,
    rows: Vec<IntRow>,
    nonlinear: Vec<Nonlinear>,
    /// Scaled objective to maximize.
    objective: Option<Vec<i128>>,
    tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    Feasible,
    Infeasible,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub status: SearchStatus,
    pub assignment: Option<Vec<i64>>,
    pub nodes: u64,
}

fn to_i128(v: &BigInt) -> Result<i128, SolveError> {
    v.to_i128().ok_or(SolveError::Overflow)
}

/// Integer coefficients proportional to `coeffs` and `constant`.
fn scale_to_integers(coeffs: &[(usize, Rational)], constant: &Rational) -> Result<(Vec<(usize, i128)>, i128), SolveError> {
    let mut l = constant.denom().clone();
    for (_, c) in coeffs {
        l = l.lcm(c.denom());
    }
    let lq = Rational::from_integer(l);
    let terms = coeffs
        .iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| Ok((*i, to_i128((c * &lq).numer())?)))
        .collect::<Result<Vec<_>, SolveError>>()?;
    Ok((terms, to_i128((constant * &lq).numer())?))
}

impl SearchProblem {
    /// Variables with their finite domains; auxiliaries may be unbounded.
    pub fn new(vars: Vec<(String, Option<i64>, Option<i64>)>, tol: f64) -> Self {
        let index = vars.iter().enumerate().map(|(i, v)| (v.0.clone(), i)).collect();
        Self {
            names: vars.iter().map(|v| v.0.clone()).collect(),
            index,
            lo: vars.iter().map(|v| v.1.unwrap_or(-AUX_RANGE)).collect(),
            hi: vars.iter().map(|v| v.2.unwrap_or(AUX_RANGE)).collect(),
            rows: Vec::new(),
            nonlinear: Vec::new(),
            objective: None,
            tol,
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    fn lookup(&self, name: &str) -> Result<usize, SolveError> {
        self.index_of(name).ok_or_else(|| SolveError::UnknownVariable(name.to_string()))
    }

    /// Adds `sum coeffs[j] x_j  sense  rhs` where negative `sense` means `<=`,
    /// positive `>=` and zero `=`.
    pub fn add_linear(&mut self, coeffs: &[(usize, Rational)], sense: std::cmp::Ordering, rhs: &Rational) -> Result<(), SolveError> {
        let (mut terms, mut r) = scale_to_integers(coeffs, rhs)?;
        let kind = match sense {
            std::cmp::Ordering::Less => RowKind::Le,
            std::cmp::Ordering::Equal => RowKind::Eq,
            std::cmp::Ordering::Greater => {
                for t in terms.iter_mut() {
                    t.1 = -t.1;
                }
                r = -r;
                RowKind::Le
            }
        };
        self.rows.push(IntRow { terms, kind, rhs: r });
        Ok(())
    }

    /// Adds a synthesized constraint, exactly when it is linear with rational data.
    pub fn add_constraint(&mut self, c: &Constraint) -> Result<(), SolveError> {
        let exact_sense = match c.sense {
            Sense::Eq => Some(std::cmp::Ordering::Equal),
            Sense::LeZero => Some(std::cmp::Ordering::Less),
            Sense::NonNeg if c.eps == 0.0 => Some(std::cmp::Ordering::Greater),
            _ => None,
        };
        if let (Some(sense), Some(form)) = (exact_sense, c.expr.as_linear()) {
            let coeffs = form
                .terms
                .iter()
                .map(|(v, q)| Ok((self.lookup(v)?, q.clone())))
                .collect::<Result<Vec<_>, SolveError>>()?;
            return self.add_linear(&coeffs, sense, &-form.constant);
        }
        let compiled = Compiled::build(&c.expr, &self.index)?;
        let mut vars: Vec<usize> = c.expr.vars().iter().map(|v| self.lookup(v)).collect::<Result<_, _>>()?;
        vars.sort_unstable();
        self.nonlinear.push(Nonlinear {
            expr: compiled,
            vars,
            constraint: c.clone(),
        });
        Ok(())
    }

    /// Maximize (`maximize = true`) or minimize `coeffs . x`.
    pub fn set_objective(&mut self, coeffs: &[(usize, Rational)], maximize: bool) -> Result<(), SolveError> {
        let (terms, _) = scale_to_integers(coeffs, &Rational::one())?;
        let mut dense = vec![0i128; self.names.len()];
        for (i, a) in terms {
            dense[i] = if maximize { a } else { -a };
        }
        self.objective = Some(dense);
        Ok(())
    }

    /// Checks a full assignment against every constraint.
    pub fn accepts(&self, x: &[i64]) -> bool {
        let in_box = x.iter().enumerate().all(|(i, v)| (self.lo[i]..=self.hi[i]).contains(v));
        let rows_ok = self.rows.iter().all(|r| {
            let act: i128 = r.terms.iter().map(|(i, a)| a * x[*i] as i128).sum();
            match r.kind {
                RowKind::Le => act <= r.rhs,
                RowKind::Eq => act == r.rhs,
            }
        });
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        rows_ok && in_box && self.nonlinear.iter().all(|nl| self.nonlinear_ok(nl, &xf))
    }

    fn nonlinear_ok(&self, nl: &Nonlinear, x: &[f64]) -> bool {
        nl.expr.eval(x).is_some_and(|v| nl.constraint.accepts(v, self.tol))
    }

    /// Tightens domains in place; `false` when some row cannot be met.
    fn propagate(&self, lo: &mut [i64], hi: &mut [i64]) -> bool {
        let mut changed = true;
        let mut rounds = 0;
        while changed && rounds < 64 {
            changed = false;
            rounds += 1;
            for r in &self.rows {
                let mut min_act: i128 = 0;
                let mut max_act: i128 = 0;
                for &(i, a) in &r.terms {
                    let (l, h) = (lo[i] as i128, hi[i] as i128);
                    if a > 0 {
                        min_act += a * l;
                        max_act += a * h;
                    } else {
                        min_act += a * h;
                        max_act += a * l;
                    }
                }
                if min_act > r.rhs || (r.kind == RowKind::Eq && max_act < r.rhs) {
                    return false;
                }
                for &(i, a) in &r.terms {
                    let (l, h) = (lo[i] as i128, hi[i] as i128);
                    // upper side: a x_i <= rhs - (min_act - own minimum)
                    let own_min = if a > 0 { a * l } else { a * h };
                    let slack = r.rhs - (min_act - own_min);
                    let (mut nl, mut nh) = (l, h);
                    if a > 0 {
                        nh = nh.min(Integer::div_floor(&slack, &a));
                    } else {
                        nl = nl.max(Integer::div_ceil(&slack, &a));
                    }
                    if r.kind == RowKind::Eq {
                        // lower side: a x_i >= rhs - (max_act - own maximum)
                        let own_max = if a > 0 { a * h } else { a * l };
                        let need = r.rhs - (max_act - own_max);
                        if a > 0 {
                            nl = nl.max(Integer::div_ceil(&need, &a));
                        } else {
                            nh = nh.min(Integer::div_floor(&need, &a));
                        }
                    }
                    if nl > nh {
                        return false;
                    }
                    if nl != l || nh != h {
                        lo[i] = nl as i64;
                        hi[i] = nh as i64;
                        changed = true;
                    }
                }
            }
        }
        true
    }

    pub fn solve(&self, node_limit: u64) -> SearchResult {
        let mut s = Search {
            p: self,
            nodes: 0,
            limit: node_limit,
            exhausted: false,
            best: None,
        };
        if node_limit == 0 {
            return SearchResult {
                status: SearchStatus::Unknown,
                assignment: None,
                nodes: 0,
            };
        }
        let (mut lo, mut hi) = (self.lo.clone(), self.hi.clone());
        s.node(&mut lo, &mut hi);
        let status = match (&s.best, s.exhausted) {
            (_, true) => SearchStatus::Unknown,
            (Some(_), false) => SearchStatus::Feasible,
            (None, false) => SearchStatus::Infeasible,
        };
        SearchResult {
            status,
            assignment: s.best.map(|b| b.0),
            nodes: s.nodes,
        }
    }
}

struct Search<'a> {
    p: &'a SearchProblem,
    nodes: u64,
    limit: u64,
    exhausted: bool,
    best: Option<(Vec<i64>, i128)>,
}

impl Search<'_> {
    /// Returns `true` to stop the whole search.
    fn node(&mut self, lo: &mut [i64], hi: &mut [i64]) -> bool {
        if self.nodes >= self.limit {
            self.exhausted = true;
            return true;
        }
        self.nodes += 1;
        if !self.p.propagate(lo, hi) {
            return false;
        }
        if let (Some(obj), Some((_, incumbent))) = (&self.p.objective, &self.best) {
            let bound: i128 = obj
                .iter()
                .enumerate()
                .map(|(i, &a)| if a > 0 { a * hi[i] as i128 } else { a * lo[i] as i128 })
                .sum();
            if bound <= *incumbent {
                return false;
            }
        }
        let x: Vec<f64> = lo.iter().map(|&v| v as f64).collect();
        for nl in &self.p.nonlinear {
            if nl.vars.iter().all(|&i| lo[i] == hi[i]) && !self.p.nonlinear_ok(nl, &x) {
                return false;
            }
        }
        let branch = (0..lo.len())
            .filter(|&i| lo[i] < hi[i])
            .min_by_key(|&i| (hi[i] as i128 - lo[i] as i128, i));
        let Some(i) = branch else {
            let value = self
                .p
                .objective
                .as_ref()
                .map_or(0, |obj| obj.iter().zip(lo.iter()).map(|(a, &v)| a * v as i128).sum());
            self.best = Some((lo.to_vec(), value));
            return self.p.objective.is_none();
        };
        let descending = self.p.objective.as_ref().is_some_and(|obj| obj[i] > 0);
        let (l, h) = (lo[i], hi[i]);
        let mut v = if descending { h } else { l };
        loop {
            let (mut clo, mut chi) = (lo.to_vec(), hi.to_vec());
            clo[i] = v;
            chi[i] = v;
            if self.node(&mut clo, &mut chi) {
                return true;
            }
            if descending {
                if v == l {
                    break;
                }
                v -= 1;
            } else {
                if v == h {
                    break;
                }
                v += 1;
            }
        }
        false
    }
}

/// Whether every value of `v` is an integer.
pub fn is_integral(v: &[Rational]) -> bool {
    v.iter().all(|q| q.is_integer())
}

/// Rounds exact integers for display; non-integers are truncated toward zero.
pub fn to_i64_vec(v: &[Rational]) -> Vec<i64> {
    v.iter().map(|q| q.to_integer().to_i64().unwrap_or(0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use std::cmp::Ordering;

    fn grid(n: usize, lo: i64, hi: i64) -> SearchProblem {
        SearchProblem::new((0..n).map(|i| (format!("x{}", i + 1), Some(lo), Some(hi))).collect(), 1e-9)
    }

    #[test]
    fn linear_feasibility() {
        let mut p = grid(2, 0, 5);
        p.add_linear(&[(0, rat(2)), (1, rat(2))], Ordering::Equal, &rat(7)).unwrap();
        assert_eq!(p.solve(1000).status, SearchStatus::Infeasible);
        let mut p = grid(2, 0, 5);
        p.add_linear(&[(0, rat(1)), (1, rat(1))], Ordering::Equal, &rat(7)).unwrap();
        let r = p.solve(1000);
        assert_eq!(r.status, SearchStatus::Feasible);
        assert!(p.accepts(r.assignment.as_ref().unwrap()));
        assert_eq!(p.solve(0).status, SearchStatus::Unknown);
    }

    #[test]
    fn optimization_matches_brute_force() {
        let mut p = grid(3, -3, 3);
        p.add_linear(&[(0, rat(1)), (1, rat(2)), (2, rat(-1))], Ordering::Less, &rat(2)).unwrap();
        p.add_constraint(&Constraint::new(
            Expr::Add(vec![Expr::square(Expr::var("x1")), Expr::square(Expr::var("x3")), Expr::int(-5)]),
            Sense::LeZero,
            0.0,
        ))
        .unwrap();
        p.set_objective(&[(0, rat(3)), (1, rat(1)), (2, rat(1))], true).unwrap();
        let r = p.solve(1_000_000);
        let x = r.assignment.unwrap();
        let value = 3 * x[0] + x[1] + x[2];
        let mut best = i64::MIN;
        for a in -3..=3i64 {
            for b in -3..=3i64 {
                for c in -3..=3i64 {
                    if a + 2 * b - c <= 2 && a * a + c * c <= 5 {
                        best = best.max(3 * a + b + c);
                    }
                }
            }
        }
        assert_eq!(value, best);
    }

    #[test]
    fn division_by_zero_rejects_node() {
        let mut p = grid(1, 0, 0);
        p.add_constraint(&Constraint::new(
            Expr::quotient(Expr::int(1), Expr::var("x1")),
            Sense::NonNeg,
            0.0,
        ))
        .unwrap();
        assert_eq!(p.solve(10).status, SearchStatus::Infeasible);
    }

    #[test]
    fn unbounded_auxiliary_is_propagated() {
        let mut p = SearchProblem::new(
            vec![("x1".into(), Some(0), Some(10)), ("q".into(), None, None)],
            1e-9,
        );
        p.add_linear(&[(0, rat(1)), (1, rat(-3))], Ordering::Equal, &rat(2)).unwrap();
        let mut seen = Vec::new();
        let mut q = p.clone();
        loop {
            let r = q.solve(10_000);
            let Some(x) = r.assignment else { break };
            seen.push(x[0]);
            q.add_linear(&[(0, rat(1))], Ordering::Greater, &rat(x[0] + 1)).unwrap();
        }
        assert_eq!(seen, vec![2, 5, 8]);
    }
}
