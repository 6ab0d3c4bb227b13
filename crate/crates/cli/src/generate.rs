//! Hard feasibility instances built from the orbit simplex of a core point.
//!
//! For each cycle the rows describe the simplex `conv(orbit(c))` through
//! its barycentric coordinates `lambda(x) = Cir(c)^{-1} x >= 0` on the layer
//! of `c`. Cutting every vertex with `lambda_i(x) <= 1/2` leaves a polytope
//! without integer points, because the only integer points of a core
//! point's orbit polytope are its vertices.

use std::sync::Arc;

use num_integer::Integer;
use num_traits::{One, Zero};
use orbitcut::corepoint::{is_lattice_free, Verdict};
use orbitcut::engine::{Provenance, SubTag, Subproblem};
use orbitcut::exact::{rat, ratio, Rational};
use orbitcut::group::{parse_generators, Cycle, GroupError, GroupSpec};
use orbitcut::solve::{
    derive_box, solve_subproblem, Instance, Objective, ObjectiveSense, Row, RowSense, Status, VarBound, DEFAULT_BOX,
    DEFAULT_NODE_LIMIT,
};
use orbitcut::spectral::{t_hat_exact, SpectralError};
use thiserror::Error;

use crate::file::InstanceFile;

#[derive(Debug, Error)]
pub enum GenError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("the generators must be pairwise disjoint cycles")]
    NotDisjoint,
    #[error("the group has no nontrivial cycle")]
    NoCycle,
    #[error("point is not a core point; {witness:?} lies in its orbit polytope")]
    NotCore { witness: Vec<i64> },
    #[error("circulant of the point on cycle {cycle} is singular")]
    Singular { cycle: String },
    #[error("enumeration did not certify infeasibility (status {0:?})")]
    NotCertified(Status),
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Clone, Copy)]
pub struct GenOptions {
    pub cuts: bool,
    pub certify: bool,
}

impl Default for GenOptions {
    fn default() -> Self {
        Self { cuts: true, certify: true }
    }
}

fn disjoint_cycles(gs: &GroupSpec) -> Result<Vec<Cycle>, GenError> {
    let mut cycles: Vec<Cycle> = Vec::new();
    for g in gs.nontrivial_generators() {
        for c in g.cycles() {
            if cycles.contains(&c) {
                continue;
            }
            if cycles.iter().any(|d| !d.is_disjoint(&c)) {
                return Err(GenError::NotDisjoint);
            }
            cycles.push(c);
        }
    }
    if cycles.is_empty() {
        return Err(GenError::NoCycle);
    }
    Ok(cycles)
}

fn scaled(coeffs: Vec<Rational>) -> (Vec<Rational>, Rational) {
    let l = coeffs.iter().fold(num_bigint::BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let l = Rational::from_integer(l);
    (coeffs.into_iter().map(|c| c * &l).collect(), l)
}

pub fn generate(generators: &[String], point: &[i64], opts: GenOptions) -> Result<InstanceFile, GenError> {
    let n = point.len();
    let gs = parse_generators(generators, n)?;
    let cycles = disjoint_cycles(&gs)?;
    let working = GroupSpec::from_cycles(n, cycles.clone());
    for c in &cycles {
        if let Err(SpectralError::SingularCirculant) = t_hat_exact(&c.restrict(point)) {
            return Err(GenError::Singular { cycle: c.to_string() });
        }
    }
    let cert = is_lattice_free(&working, point, 0).map_err(|e| GenError::Other(e.to_string()))?;
    if cert.verdict == Verdict::NotCore {
        return Err(GenError::NotCore {
            witness: cert.witness.unwrap_or_default(),
        });
    }
    let mut rows = Vec::new();
    let mut bounds: Vec<VarBound> = point.iter().map(|&v| VarBound::integer(v, v)).collect();
    for c in &cycles {
        let cr = c.restrict(point);
        let k = cr.len();
        let t_hat = t_hat_exact(&cr).map_err(|e| GenError::Other(e.to_string()))?;
        let (lo, hi) = (*cr.iter().min().unwrap(), *cr.iter().max().unwrap());
        for &j in c.support() {
            bounds[j] = VarBound::integer(lo, hi);
        }
        for i in 0..k {
            let mut coeffs = vec![Rational::zero(); n];
            for (pos, &j) in c.support().iter().enumerate() {
                coeffs[j] = t_hat[(i + k - pos) % k].clone();
            }
            let (coeffs, l) = scaled(coeffs);
            rows.push(Row {
                coeffs: coeffs.clone(),
                sense: RowSense::Ge,
                rhs: Rational::zero(),
            });
            if opts.cuts {
                rows.push(Row {
                    coeffs,
                    sense: RowSense::Le,
                    rhs: l * ratio(1, 2),
                });
            }
        }
        let mut ones = vec![Rational::zero(); n];
        for &j in c.support() {
            ones[j] = rat(1);
        }
        rows.push(Row {
            coeffs: ones,
            sense: RowSense::Eq,
            rhs: rat(cr.iter().sum()),
        });
    }
    for j in working.non_active() {
        let mut e = vec![Rational::zero(); n];
        e[j] = rat(1);
        rows.push(Row {
            coeffs: e,
            sense: RowSense::Eq,
            rhs: rat(point[j]),
        });
    }
    let instance = Instance {
        n,
        objective: Objective {
            sense: ObjectiveSense::Feasibility,
            coeffs: vec![Rational::zero(); n],
        },
        rows,
        bounds,
        group: gs.analyzed(orbitcut::group::DEFAULT_MAX_WORD_LEN),
    };
    let mut warnings = Vec::new();
    if !opts.cuts {
        warnings.push("vertex cuts omitted; the orbit vertices are feasible".to_string());
    } else if opts.certify {
        let status = certify(&instance);
        if status != Status::Infeasible {
            return Err(GenError::NotCertified(status));
        }
    } else {
        warnings.push("integer infeasibility was not certified by enumeration".to_string());
    }
    Ok(InstanceFile {
        instance,
        generators: generators.to_vec(),
        warnings,
    })
}

/// Exhaustive enumeration of the instance over its own bounds.
pub fn certify(inst: &Instance) -> Status {
    let sub = Subproblem {
        id: 0,
        tag: SubTag::Plain,
        provenance: Provenance::Plain,
        base: Arc::new(inst.clone()),
        added: Vec::new(),
    };
    let sbox = derive_box(inst, DEFAULT_BOX);
    match solve_subproblem(&sub, &sbox, DEFAULT_NODE_LIMIT) {
        Ok(out) => out.outcome.status,
        Err(_) => Status::Unknown,
    }
}
