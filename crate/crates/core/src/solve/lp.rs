//! Dense two-phase primal simplex over exact rationals with Bland's rule.

use num_traits::{Signed, Zero};

use crate::exact::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpSense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct LpRow {
    pub coeffs: Vec<Rational>,
    pub sense: LpSense,
    pub rhs: Rational,
}

/// Maximize `objective . x` subject to rows and per-variable bounds.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub objective: Vec<Rational>,
    pub rows: Vec<LpRow>,
    pub lower: Vec<Option<Rational>>,
    pub upper: Vec<Option<Rational>>,
}

impl LpProblem {
    pub fn new(n: usize) -> Self {
        Self {
            objective: vec![Rational::zero(); n],
            rows: Vec::new(),
            lower: vec![None; n],
            upper: vec![None; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

/// `x_j = offset_j + sum_t coeff * y_t` with `y >= 0`.
struct Substitution {
    offset: Vec<Rational>,
    terms: Vec<Vec<(usize, Rational)>>,
    num_y: usize,
}

fn substitute(p: &LpProblem) -> (Substitution, Vec<LpRow>) {
    let n = p.num_vars();
    let mut offset = Vec::with_capacity(n);
    let mut terms = Vec::with_capacity(n);
    let mut extra_rows: Vec<(usize, Rational)> = Vec::new();
    let mut num_y = 0;
    let one = Rational::from_integer(1.into());
    for j in 0..n {
        match (&p.lower[j], &p.upper[j]) {
            (Some(lo), hi) => {
                offset.push(lo.clone());
                terms.push(vec![(num_y, one.clone())]);
                if let Some(hi) = hi {
                    extra_rows.push((num_y, hi - lo));
                }
                num_y += 1;
            }
            (None, Some(hi)) => {
                offset.push(hi.clone());
                terms.push(vec![(num_y, -one.clone())]);
                num_y += 1;
            }
            (None, None) => {
                offset.push(Rational::zero());
                terms.push(vec![(num_y, one.clone()), (num_y + 1, -one.clone())]);
                num_y += 2;
            }
        }
    }
    let sub = Substitution {
        offset,
        terms,
        num_y,
    };
    let mut rows = Vec::with_capacity(p.rows.len() + extra_rows.len());
    for row in &p.rows {
        let mut coeffs = vec![Rational::zero(); num_y];
        let mut rhs = row.rhs.clone();
        for (j, a) in row.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            rhs -= a * &sub.offset[j];
            for (t, c) in &sub.terms[j] {
                coeffs[*t] += a * c;
            }
        }
        rows.push(LpRow {
            coeffs,
            sense: row.sense,
            rhs,
        });
    }
    for (t, width) in extra_rows {
        let mut coeffs = vec![Rational::zero(); num_y];
        coeffs[t] = one.clone();
        rows.push(LpRow {
            coeffs,
            sense: LpSense::Le,
            rhs: width,
        });
    }
    (sub, rows)
}

struct Tableau {
    /// `rows[i]` holds coefficients followed by the right-hand side.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[r] = col;
    }

    /// Minimizes `cost . y` over columns with `allowed[j]`. `false` means unbounded.
    fn minimize(&mut self, cost: &[Rational], allowed: &[bool]) -> bool {
        loop {
            let mut entering = None;
            for j in 0..self.width {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !cost[b].is_zero() && !self.rows[i][j].is_zero() {
                        d -= &cost[b] * &self.rows[i][j];
                    }
                }
                if d.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if a.is_positive() {
                    let ratio = self.rhs(i) / a;
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, col),
                None => return false,
            }
        }
    }
}

pub fn solve(p: &LpProblem) -> LpResult {
    let (sub, mut rows) = substitute(p);
    for row in rows.iter_mut() {
        if row.rhs.is_negative() {
            for c in row.coeffs.iter_mut() {
                *c = -c.clone();
            }
            row.rhs = -row.rhs.clone();
            row.sense = match row.sense {
                LpSense::Le => LpSense::Ge,
                LpSense::Ge => LpSense::Le,
                LpSense::Eq => LpSense::Eq,
            };
        }
    }
    let m = rows.len();
    let num_y = sub.num_y;
    let num_slack = rows.iter().filter(|r| r.sense != LpSense::Eq).count();
    let num_art = rows.iter().filter(|r| r.sense != LpSense::Le).count();
    let width = num_y + num_slack + num_art;
    let mut table = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut s, mut a) = (num_y, num_y + num_slack);
    for row in &rows {
        let mut t = vec![Rational::zero(); width + 1];
        t[..num_y].clone_from_slice(&row.coeffs);
        t[width] = row.rhs.clone();
        match row.sense {
            LpSense::Le => {
                t[s] = Rational::from_integer(1.into());
                basis.push(s);
                s += 1;
            }
            LpSense::Ge => {
                t[s] = Rational::from_integer((-1).into());
                t[a] = Rational::from_integer(1.into());
                basis.push(a);
                s += 1;
                a += 1;
            }
            LpSense::Eq => {
                t[a] = Rational::from_integer(1.into());
                basis.push(a);
                a += 1;
            }
        }
        table.push(t);
    }
    let mut tab = Tableau {
        rows: table,
        basis,
        width,
    };
    let art_start = num_y + num_slack;
    if num_art > 0 {
        let mut cost = vec![Rational::zero(); width];
        for c in cost.iter_mut().skip(art_start) {
            *c = Rational::from_integer(1.into());
        }
        let allowed = vec![true; width];
        tab.minimize(&cost, &allowed);
        let infeas: Rational = (0..m)
            .filter(|&i| tab.basis[i] >= art_start)
            .map(|i| tab.rhs(i).clone())
            .sum();
        if infeas.is_positive() {
            return LpResult::Infeasible;
        }
        // drive zero-valued artificials out of the basis; drop redundant rows
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= art_start {
                match (0..art_start).find(|&j| !tab.rows[i][j].is_zero()) {
                    Some(j) => {
                        tab.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }
    let mut cost = vec![Rational::zero(); width];
    for (j, c) in p.objective.iter().enumerate() {
        for (t, coef) in &sub.terms[j] {
            cost[*t] -= c * coef;
        }
    }
    let allowed: Vec<bool> = (0..width).map(|j| j < art_start).collect();
    if !tab.minimize(&cost, &allowed) {
        return LpResult::Unbounded;
    }
    let mut y = vec![Rational::zero(); num_y];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < num_y {
            y[b] = tab.rhs(i).clone();
        }
    }
    let x: Vec<Rational> = (0..p.num_vars())
        .map(|j| {
            let mut v = sub.offset[j].clone();
            for (t, c) in &sub.terms[j] {
                v += c * &y[*t];
            }
            v
        })
        .collect();
    let value = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpResult::Optimal { x, value }
}

/// Checks `x` against every row and bound exactly.
pub fn is_feasible_point(p: &LpProblem, x: &[Rational]) -> bool {
    let rows_ok = p.rows.iter().all(|row| {
        let act: Rational = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
        match row.sense {
            LpSense::Le => act <= row.rhs,
            LpSense::Ge => act >= row.rhs,
            LpSense::Eq => act == row.rhs,
        }
    });
    let bounds_ok = x.iter().enumerate().all(|(j, v)| {
        p.lower[j].as_ref().is_none_or(|lo| v >= lo) && p.upper[j].as_ref().is_none_or(|hi| v <= hi)
    });
    rows_ok && bounds_ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, ratio};

    fn row(coeffs: &[i64], sense: LpSense, rhs: Rational) -> LpRow {
        LpRow {
            coeffs: coeffs.iter().map(|&c| rat(c)).collect(),
            sense,
            rhs,
        }
    }

    #[test]
    fn bounded_maximum() {
        let mut p = LpProblem::new(1);
        p.objective = vec![rat(1)];
        p.rows.push(row(&[1], LpSense::Le, ratio(3, 2)));
        assert_eq!(
            solve(&p),
            LpResult::Optimal {
                x: vec![ratio(3, 2)],
                value: ratio(3, 2)
            }
        );
    }

    #[test]
    fn unbounded_and_infeasible() {
        let mut p = LpProblem::new(1);
        p.objective = vec![rat(1)];
        assert_eq!(solve(&p), LpResult::Unbounded);
        p.rows.push(row(&[1], LpSense::Ge, rat(2)));
        p.rows.push(row(&[1], LpSense::Le, rat(1)));
        assert_eq!(solve(&p), LpResult::Infeasible);
    }

    #[test]
    fn mixed_senses_and_bounds() {
        // max x + y, x + 2y <= 4, x - y >= -1, x in [0, 3], y free
        let mut p = LpProblem::new(2);
        p.objective = vec![rat(1), rat(1)];
        p.rows.push(row(&[1, 2], LpSense::Le, rat(4)));
        p.rows.push(row(&[1, -1], LpSense::Ge, rat(-1)));
        p.lower[0] = Some(rat(0));
        p.upper[0] = Some(rat(3));
        match solve(&p) {
            LpResult::Optimal { x, value } => {
                assert_eq!(x, vec![rat(3), ratio(1, 2)]);
                assert_eq!(value, ratio(7, 2));
                assert!(is_feasible_point(&p, &x));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn redundant_equalities() {
        let mut p = LpProblem::new(2);
        p.objective = vec![rat(1), rat(0)];
        p.rows.push(row(&[1, 1], LpSense::Eq, rat(2)));
        p.rows.push(row(&[2, 2], LpSense::Eq, rat(4)));
        p.lower = vec![Some(rat(0)), Some(rat(0))];
        match solve(&p) {
            LpResult::Optimal { value, .. } => assert_eq!(value, rat(2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the textbook largest-coefficient rule.
        let mut p = LpProblem::new(4);
        p.objective = vec![ratio(3, 4), rat(-150), ratio(1, 50), rat(-6)];
        p.rows.push(LpRow {
            coeffs: vec![ratio(1, 4), rat(-60), ratio(-1, 25), rat(9)],
            sense: LpSense::Le,
            rhs: rat(0),
        });
        p.rows.push(LpRow {
            coeffs: vec![ratio(1, 2), rat(-90), ratio(-1, 50), rat(3)],
            sense: LpSense::Le,
            rhs: rat(0),
        });
        p.rows.push(row(&[0, 0, 1, 0], LpSense::Le, rat(1)));
        p.lower = vec![Some(rat(0)); 4];
        match solve(&p) {
            LpResult::Optimal { value, .. } => assert_eq!(value, ratio(1, 20)),
            other => panic!("{other:?}"),
        }
    }
}
