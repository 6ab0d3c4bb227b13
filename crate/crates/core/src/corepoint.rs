//! Orbit polytopes, barycentric membership and core-point certificates.
//!
//! A point is a core point when the convex hull of its orbit contains no
//! integer points besides the orbit itself. Small vectors in cycle order
//! (entries in `-2..=2`) represent whole classes of such points up to
//! rotation and translation along the all-ones direction.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exact::{rat, Rational};
use crate::group::{self, Cycle, GroupError, GroupSpec};
use crate::solve::lp::{self, LpProblem, LpResult, LpRow, LpSense};
use crate::spectral::{self, SpectralError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoreError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("layers differ on the cycle support ({z} vs {c}) or are zero")]
    LayerMismatch { z: i64, c: i64 },
    #[error("coordinate {0} lies outside the cycle and differs")]
    NonActiveMismatch(usize),
    #[error("vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Barycentric coordinates of a point with respect to the rotations of `c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BaryCoords {
    #[serde(serialize_with = "crate::exact::serialize_rationals")]
    pub lambda: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    Inside(BaryCoords),
    Outside { index: usize, lambda: Vec<Rational> },
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Core,
    NotCore,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoreCertificate {
    pub point: Vec<i64>,
    pub verdict: Verdict,
    pub witness: Option<Vec<i64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PointKind {
    Universal,
    Atom,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EssentialSet {
    pub residue: usize,
    pub points: Vec<Vec<i64>>,
    pub kinds: Vec<PointKind>,
}

impl EssentialSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn rotate(z: &[i64], s: usize) -> Vec<i64> {
    let k = z.len();
    (0..k).map(|i| z[(i + s) % k]).collect()
}

/// Distinct rotations of `z`, starting with `z` itself.
pub fn rotations(z: &[i64]) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = Vec::new();
    for s in 0..z.len().max(1) {
        let r = rotate(z, s);
        if !out.contains(&r) {
            out.push(r);
        }
    }
    out
}

/// The lexicographically largest rotation.
pub fn canonical_rotation(z: &[i64]) -> Vec<i64> {
    (0..z.len().max(1))
        .map(|s| rotate(z, s))
        .max()
        .unwrap_or_default()
}

fn check_len(v: &[i64], n: usize) -> Result<(), CoreError> {
    if v.len() != n {
        return Err(CoreError::LengthMismatch {
            expected: n,
            got: v.len(),
        });
    }
    Ok(())
}

/// Solves `Cir(c|cycle) lambda = z|cycle` exactly.
///
/// `z` and `c` are full vectors; coordinates outside the cycle must agree.
pub fn membership(z: &[i64], c: &[i64], cycle: &Cycle) -> Result<Membership, CoreError> {
    check_len(z, c.len())?;
    for i in 0..c.len() {
        if !cycle.contains(i) && z[i] != c[i] {
            return Err(CoreError::NonActiveMismatch(i));
        }
    }
    let zr = cycle.restrict(z);
    let cr = cycle.restrict(c);
    let (lz, lc) = (zr.iter().sum::<i64>(), cr.iter().sum::<i64>());
    if lz != lc || lc == 0 {
        return Err(CoreError::LayerMismatch { z: lz, c: lc });
    }
    let t_hat = spectral::t_hat_exact(&cr)?;
    let k = cr.len();
    let lambda: Vec<Rational> = (0..k)
        .map(|i| {
            (0..k)
                .filter(|&j| zr[j] != 0)
                .map(|j| &t_hat[(i + k - j) % k] * rat(zr[j]))
                .sum()
        })
        .collect();
    match lambda.iter().position(|l| l.is_negative()) {
        Some(index) => Ok(Membership::Outside { index, lambda }),
        None => Ok(Membership::Inside(BaryCoords { lambda })),
    }
}

/// Exact LP feasibility of `p` as a convex combination of `vertices`.
pub fn in_hull(vertices: &[Vec<i64>], p: &[i64]) -> bool {
    let m = vertices.len();
    let mut lp = LpProblem::new(m);
    for (j, &pj) in p.iter().enumerate() {
        lp.rows.push(LpRow {
            coeffs: vertices.iter().map(|v| rat(v[j])).collect(),
            sense: LpSense::Eq,
            rhs: rat(pj),
        });
    }
    lp.rows.push(LpRow {
        coeffs: vec![rat(1); m],
        sense: LpSense::Eq,
        rhs: rat(1),
    });
    lp.lower = vec![Some(Rational::zero()); m];
    matches!(lp::solve(&lp), LpResult::Optimal { .. })
}

/// Calls `visit` on every integer point of the box in lexicographic order
/// until it returns `false`.
fn for_each_in_box(lo: &[i64], hi: &[i64], mut visit: impl FnMut(&[i64]) -> bool) {
    let n = lo.len();
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return;
    }
    let mut cur = lo.to_vec();
    loop {
        if !visit(&cur) {
            return;
        }
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if cur[i] < hi[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = lo[i];
        }
    }
}

/// Brute-force lattice-freeness of the orbit polytope of `z`.
pub fn is_lattice_free(gs: &GroupSpec, z: &[i64], box_margin: i64) -> Result<CoreCertificate, CoreError> {
    let orb = group::orbit(gs, z)?;
    let n = gs.n;
    let lo: Vec<i64> = (0..n).map(|j| orb.iter().map(|v| v[j]).min().unwrap_or(0) - box_margin).collect();
    let hi: Vec<i64> = (0..n).map(|j| orb.iter().map(|v| v[j]).max().unwrap_or(0) + box_margin).collect();
    let classes = gs.coordinate_orbits();
    let class_sums: Vec<i64> = classes.iter().map(|cl| cl.iter().map(|&i| z[i]).sum()).collect();
    let vertices: BTreeSet<&Vec<i64>> = orb.iter().collect();
    let mut witness = None;
    for_each_in_box(&lo, &hi, |p| {
        let sums_match = classes
            .iter()
            .zip(&class_sums)
            .all(|(cl, s)| cl.iter().map(|&i| p[i]).sum::<i64>() == *s);
        if sums_match && !vertices.contains(&p.to_vec()) && in_hull(&orb, p) {
            witness = Some(p.to_vec());
            return false;
        }
        true
    });
    Ok(CoreCertificate {
        point: z.to_vec(),
        verdict: if witness.is_some() { Verdict::NotCore } else { Verdict::Core },
        witness,
    })
}

/// Core test for the orbit of `c` under one cycle, via barycentric coordinates.
pub fn core_by_membership(c: &[i64], cycle: &Cycle) -> Result<CoreCertificate, CoreError> {
    let cr = cycle.restrict(c);
    spectral::t_hat_exact(&cr)?;
    let (lo, hi) = (*cr.iter().min().unwrap_or(&0), *cr.iter().max().unwrap_or(&0));
    let k = cr.len();
    let vertices: BTreeSet<Vec<i64>> = (0..k).map(|s| rotate(&cr, s)).collect();
    let layer: i64 = cr.iter().sum();
    let mut witness = None;
    let mut error = None;
    for_each_in_box(&vec![lo; k], &vec![hi; k], |p| {
        if p.iter().sum::<i64>() != layer || vertices.contains(p) {
            return true;
        }
        let mut full = c.to_vec();
        for (pos, &i) in cycle.support().iter().enumerate() {
            full[i] = p[pos];
        }
        match membership(&full, c, cycle) {
            Ok(Membership::Inside(_)) => {
                witness = Some(full);
                false
            }
            Ok(Membership::Outside { .. }) => true,
            Err(e) => {
                error = Some(e);
                false
            }
        }
    });
    if let Some(e) = error {
        return Err(e);
    }
    Ok(CoreCertificate {
        point: c.to_vec(),
        verdict: if witness.is_some() { Verdict::NotCore } else { Verdict::Core },
        witness,
    })
}

/// Binary vectors of length `k` with `ones` ones, in descending lexicographic order.
fn binaries_descending(k: usize, ones: usize, mut visit: impl FnMut(&[i64]) -> bool) {
    fn rec(cur: &mut Vec<i64>, k: usize, left: usize, visit: &mut dyn FnMut(&[i64]) -> bool) -> bool {
        if cur.len() == k {
            return visit(cur);
        }
        let room = k - cur.len();
        if left > 0 {
            cur.push(1);
            let go = rec(cur, k, left - 1, visit);
            cur.pop();
            if !go {
                return false;
            }
        }
        if room > left {
            cur.push(0);
            let go = rec(cur, k, left, visit);
            cur.pop();
            if !go {
                return false;
            }
        }
        true
    }
    rec(&mut Vec::with_capacity(k), k, ones, &mut visit);
}

fn universal_filtered(k_len: usize, residue: usize, budget: usize, keep: impl Fn(&[i64]) -> bool) -> Vec<Vec<i64>> {
    if budget == 0 || k_len == 0 {
        return Vec::new();
    }
    let ones = if residue.is_multiple_of(k_len) { k_len } else { residue % k_len };
    let mut out = Vec::new();
    binaries_descending(k_len, ones, |b| {
        if canonical_rotation(b) == b && keep(b) {
            out.push(b.to_vec());
        }
        out.len() < budget
    });
    out
}

/// Binary representatives of universal core points in layers `≡ residue (mod k_len)`,
/// one per rotation class, in canonical form and descending order.
pub fn universal_core_points(k_len: usize, residue: usize, budget: usize) -> Vec<Vec<i64>> {
    universal_filtered(k_len, residue, budget, |_| true)
}

/// Points `u + e_i - e_j` outside the rotation class of `u`, one per class,
/// ordered by squared norm.
pub fn atoms_near(u: &[i64], budget: usize) -> Vec<Vec<i64>> {
    let k = u.len();
    let own = canonical_rotation(u);
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut out: Vec<Vec<i64>> = Vec::new();
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let mut w = u.to_vec();
            w[i] += 1;
            w[j] -= 1;
            let canon = canonical_rotation(&w);
            if canon != own && seen.insert(canon.clone()) {
                out.push(canon);
            }
        }
    }
    out.sort_by_key(|w| w.iter().map(|v| v * v).sum::<i64>());
    out.truncate(budget);
    out
}

fn mirrored(z: &[i64]) -> Vec<i64> {
    canonical_rotation(&z.iter().rev().copied().collect::<Vec<_>>())
}

/// A bounded selection of universal points followed by atoms of the first one.
pub fn projected_essential_set(k_len: usize, residue: usize, budget: usize) -> EssentialSet {
    let universal = universal_filtered(k_len, residue, budget, |b| *b <= *mirrored(b));
    let mut points = universal.clone();
    let mut kinds = vec![PointKind::Universal; points.len()];
    if let Some(u) = universal.first() {
        for w in atoms_near(u, usize::MAX) {
            if points.len() >= budget {
                break;
            }
            let spread = w.iter().max().unwrap_or(&0) - w.iter().min().unwrap_or(&0);
            let in_range = w.iter().all(|v| (-2..=2).contains(v));
            if spread > 1 && in_range && !points.contains(&w) {
                points.push(w);
                kinds.push(PointKind::Atom);
            }
        }
    }
    EssentialSet { residue, points, kinds }
}

/// Average of the orbit of `x`.
pub fn barycenter(gs: &GroupSpec, x: &[i64]) -> Result<Vec<Rational>, CoreError> {
    let orb = group::orbit(gs, x)?;
    let count = rat(orb.len() as i64);
    Ok((0..gs.n)
        .map(|j| orb.iter().map(|v| rat(v[j])).sum::<Rational>() / &count)
        .collect())
}

pub fn equivalent(x: &[i64], y: &[i64], gs: &GroupSpec) -> Result<bool, CoreError> {
    check_len(x, gs.n)?;
    Ok(group::orbit(gs, y)?.iter().any(|g| g == x))
}

/// True when `x - g y` lies in the integer fixed lattice for some `g y` in the orbit of `y`.
pub fn isomorphic(x: &[i64], y: &[i64], gs: &GroupSpec) -> Result<bool, CoreError> {
    check_len(x, gs.n)?;
    let classes = gs.coordinate_orbits();
    Ok(group::orbit(gs, y)?.iter().any(|g| {
        classes.iter().all(|cl| {
            let d = x[cl[0]] - g[cl[0]];
            cl.iter().all(|&i| x[i] - g[i] == d)
        })
    }))
}

pub fn co_projective(x: &[i64], y: &[i64]) -> bool {
    x.len() == y.len() && x.iter().zip(y).map(|(a, b)| a - b).collect::<BTreeSet<_>>().len() <= 1
}
