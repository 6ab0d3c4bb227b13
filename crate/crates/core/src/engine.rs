//! Layer, residue and residue-tuple searches built from S1/S2/S3 subproblems.
//!
//! A [`Plan`] fixes every subproblem before anything is solved. It is a list
//! of stages; stages run in order, the subproblems inside a stage run in
//! parallel, and a stage marked `stop_if_feasible` ends the search once any
//! of its subproblems is feasible.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::corepoint::{projected_essential_set, EssentialSet};
use crate::exact::{format_rational, rat, Rational};
use crate::group::{Cycle, GroupSpec};
use crate::solve::enumerate::SolveError;
use crate::solve::lp::LpResult;
use crate::solve::minlp::MinlpError;
use crate::solve::{
    self, derive_box, lp_relax, Instance, InstanceError, ObjectiveSense, Outcome, SearchBox, Status, DEFAULT_BOX,
    DEFAULT_NODE_LIMIT,
};
use crate::synth::{self, ConstraintSet, RotationMode, S2Variant, SynthError, DEFAULT_EPS};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Export(#[from] MinlpError),
    #[error("{0}")]
    Algorithm(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SubTag {
    S1,
    S2,
    S3,
    Plain,
}

impl SubTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SubTag::S1 => "S1",
            SubTag::S2 => "S2",
            SubTag::S3 => "S3",
            SubTag::Plain => "plain",
        }
    }
}

/// Where a subproblem comes from. Cycle ordinals and residues are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Plain,
    Singular { cycles: Vec<usize> },
    Layer { layer: i64 },
    LayerAnchor { layer: i64, point: Vec<i64> },
    Residue { residue: usize },
    ResidueAnchor { residue: usize, point: Vec<i64> },
    Tuple { residues: Vec<usize> },
    TupleAnchor { cycle: usize, residue: usize, point: Vec<i64> },
    AnchorProduct { residues: Vec<usize>, points: Vec<Vec<i64>> },
    FixedSpace { residues: Vec<usize> },
}

#[derive(Debug, Clone)]
pub struct Subproblem {
    pub id: usize,
    pub tag: SubTag,
    pub provenance: Provenance,
    pub base: Arc<Instance>,
    pub added: Vec<ConstraintSet>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Algorithm {
    NoSymmetry,
    Layers,
    Residues,
    ResidueTuples,
}

impl Algorithm {
    pub fn number(self) -> Option<u8> {
        match self {
            Algorithm::NoSymmetry => None,
            Algorithm::Layers => Some(1),
            Algorithm::Residues => Some(2),
            Algorithm::ResidueTuples => Some(3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmChoice {
    Auto,
    Fixed(Algorithm),
}

/// Anchor probes for several cycles: one cycle at a time, or additionally
/// every combination of points across cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorMode {
    Sum,
    Product,
}

#[derive(Debug, Clone)]
pub struct EngineOptions {
    pub algorithm: AlgorithmChoice,
    pub budget: usize,
    pub eps: f64,
    pub box_half: i64,
    pub node_limit: u64,
    pub jobs: usize,
    pub rotations: RotationMode,
    pub s2_literal: bool,
    pub anchors: AnchorMode,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            algorithm: AlgorithmChoice::Auto,
            budget: 4,
            eps: DEFAULT_EPS,
            box_half: DEFAULT_BOX,
            node_limit: DEFAULT_NODE_LIMIT,
            jobs: 0,
            rotations: RotationMode::All,
            s2_literal: false,
            anchors: AnchorMode::Sum,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub s1: usize,
    pub s2: usize,
    pub s3: usize,
    pub plain: usize,
}

impl Counts {
    fn add(&mut self, tag: SubTag) {
        match tag {
            SubTag::S1 => self.s1 += 1,
            SubTag::S2 => self.s2 += 1,
            SubTag::S3 => self.s3 += 1,
            SubTag::Plain => self.plain += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScheduleEntry {
    pub id: usize,
    pub tag: SubTag,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stage {
    pub ids: Vec<usize>,
    pub stop_if_feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Schedule {
    pub algorithm: Algorithm,
    pub cycles: Vec<Cycle>,
    pub entries: Vec<ScheduleEntry>,
    pub stages: Vec<Stage>,
    pub counts: Counts,
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub schedule: Schedule,
    pub subproblems: Vec<Subproblem>,
    pub search_box: SearchBox,
    pub relaxation: Outcome,
    pub layer_range: Option<(i64, i64)>,
    pub warnings: Vec<String>,
    pub sense: ObjectiveSense,
}

struct Builder {
    base: Arc<Instance>,
    subproblems: Vec<Subproblem>,
    stages: Vec<Stage>,
    counts: Counts,
}

impl Builder {
    fn push(&mut self, tag: SubTag, provenance: Provenance, added: Vec<ConstraintSet>) -> usize {
        let id = self.subproblems.len();
        self.counts.add(tag);
        self.subproblems.push(Subproblem {
            id,
            tag,
            provenance,
            base: Arc::clone(&self.base),
            added,
        });
        id
    }

    fn stage(&mut self, ids: Vec<usize>, stop_if_feasible: bool) {
        if !ids.is_empty() {
            self.stages.push(Stage { ids, stop_if_feasible });
        }
    }
}

struct Synth<'a> {
    opts: &'a EngineOptions,
    search_box: &'a SearchBox,
    essential: HashMap<(usize, usize), EssentialSet>,
}

impl Synth<'_> {
    fn essential(&mut self, k: usize, residue: usize) -> EssentialSet {
        let budget = self.opts.budget;
        self.essential
            .entry((k, residue))
            .or_insert_with(|| projected_essential_set(k, residue, budget))
            .clone()
    }

    fn s2(&self, cycle: &Cycle) -> ConstraintSet {
        let variant = if self.opts.s2_literal {
            S2Variant::Literal
        } else {
            let b = &self.search_box;
            let bound: i64 = cycle.support().iter().map(|&i| b.lo[i].abs().max(b.hi[i].abs())).sum();
            S2Variant::SignGuarded { bound: rat(bound.max(1)) }
        };
        synth::s2_singular(cycle, &variant)
    }

    /// Smoothness plus one S1 cut per essential point of the residue class.
    fn cuts(&mut self, cycle: &Cycle, residue: usize) -> Result<Vec<ConstraintSet>, SynthError> {
        let mut sets = vec![synth::smoothness(cycle, self.opts.eps)];
        for z in self.essential(cycle.len(), residue).points {
            sets.push(synth::s1_for_point(&z, cycle, self.opts.rotations, self.opts.eps)?);
        }
        Ok(sets)
    }
}

fn residue_of(layer: i64, k: usize) -> usize {
    layer.rem_euclid(k as i64) as usize
}

fn floor_rat(q: &Rational) -> i64 {
    q.floor().to_integer().to_i64().unwrap_or(i64::MAX / 4)
}

fn ceil_rat(q: &Rational) -> i64 {
    q.ceil().to_integer().to_i64().unwrap_or(i64::MIN / 4)
}

fn choose(gs: &GroupSpec, n: usize, choice: AlgorithmChoice) -> Result<Algorithm, EngineError> {
    let cycles = &gs.selected_cycles;
    let auto = match cycles.len() {
        0 => Algorithm::NoSymmetry,
        1 if cycles[0].len() == n => Algorithm::Layers,
        1 => Algorithm::Residues,
        _ => Algorithm::ResidueTuples,
    };
    let AlgorithmChoice::Fixed(alg) = choice else {
        return Ok(auto);
    };
    let ok = match alg {
        Algorithm::NoSymmetry => true,
        Algorithm::Layers => cycles.len() == 1 && cycles[0].len() == n,
        Algorithm::Residues => !cycles.is_empty(),
        Algorithm::ResidueTuples => cycles.len() >= 2,
    };
    if ok {
        Ok(alg)
    } else {
        Err(EngineError::Algorithm(format!(
            "algorithm {:?} does not apply to the selected cycles ({} selected)",
            alg,
            cycles.len()
        )))
    }
}

/// Builds the complete schedule for an instance.
pub fn plan(inst: &Instance, opts: &EngineOptions) -> Result<Plan, EngineError> {
    inst.validate()?;
    let gs = &inst.group;
    let algorithm = choose(gs, inst.n, opts.algorithm)?;
    let mut warnings = inst.check_symmetry();
    let mut as_cycles = inst.clone();
    as_cycles.group = GroupSpec::from_cycles(inst.n, gs.selected_cycles.clone());
    for w in as_cycles.check_symmetry() {
        warnings.push(format!("selected cycle: {w}"));
    }
    if algorithm == Algorithm::NoSymmetry && !gs.generators.iter().all(|g| g.is_identity()) {
        warnings.push("no usable cycle was selected; solving without symmetry".to_string());
    }
    let relaxation = lp_relax(inst);
    let base = Arc::new(inst.clone());
    let mut b = Builder {
        base,
        subproblems: Vec::new(),
        stages: Vec::new(),
        counts: Counts::default(),
    };
    let cycles: Vec<Cycle> = match algorithm {
        Algorithm::Residues => gs.selected_cycles[..1].to_vec(),
        _ => gs.selected_cycles.clone(),
    };
    let search_box = derive_box(inst, opts.box_half);
    if search_box.is_truncated() {
        warnings.push(format!(
            "enumeration box clipped to [-{0}, {0}] for {1} variable(s); infeasible verdicts become unknown",
            opts.box_half,
            search_box.truncated.len()
        ));
    }
    let mut layer_range = None;
    if relaxation.status == Status::Feasible {
        let mut sy = Synth {
            opts,
            search_box: &search_box,
            essential: HashMap::new(),
        };
        match algorithm {
            Algorithm::NoSymmetry => {
                let id = b.push(SubTag::Plain, Provenance::Plain, Vec::new());
                b.stage(vec![id], false);
            }
            Algorithm::Layers => {
                layer_range = Some(plan_layers(inst, &cycles[0], &search_box, &mut sy, &mut b, &mut warnings)?);
            }
            Algorithm::Residues => plan_residues(&cycles[0], &mut sy, &mut b)?,
            Algorithm::ResidueTuples => plan_tuples(&cycles, &mut sy, &mut b)?,
        }
    }
    let entries = b
        .subproblems
        .iter()
        .map(|s| ScheduleEntry {
            id: s.id,
            tag: s.tag,
            provenance: s.provenance.clone(),
        })
        .collect();
    Ok(Plan {
        schedule: Schedule {
            algorithm,
            cycles,
            entries,
            stages: b.stages,
            counts: b.counts,
        },
        subproblems: b.subproblems,
        search_box,
        relaxation,
        layer_range,
        warnings,
        sense: inst.objective.sense,
    })
}

fn plan_layers(
    inst: &Instance,
    cycle: &Cycle,
    search_box: &SearchBox,
    sy: &mut Synth<'_>,
    b: &mut Builder,
    warnings: &mut Vec<String>,
) -> Result<(i64, i64), EngineError> {
    let n = inst.n;
    let s2 = b.push(SubTag::S2, Provenance::Singular { cycles: vec![1] }, vec![sy.s2(cycle)]);
    b.stage(vec![s2], false);
    let ones = vec![rat(1); n];
    let (box_lo, box_hi): (i64, i64) = (search_box.lo.iter().sum(), search_box.hi.iter().sum());
    let top = match inst.lp_optimize(&ones, true) {
        LpResult::Optimal { value, .. } => floor_rat(&value),
        _ => box_hi,
    };
    let bottom = match inst.lp_optimize(&ones, false) {
        LpResult::Optimal { value, .. } => ceil_rat(&value),
        _ => box_lo,
    };
    let coeffs = &inst.objective.coeffs;
    let uniform = coeffs.iter().all(|c| *c == coeffs[0]);
    let alpha = match inst.objective.sense {
        ObjectiveSense::Feasibility => Rational::zero(),
        ObjectiveSense::Max => coeffs[0].clone(),
        ObjectiveSense::Min => -coeffs[0].clone(),
    };
    let layers: Vec<i64> = if uniform {
        let (start, step) = if alpha.is_negative() { (bottom, 1) } else { (top, -1) };
        let mut out = Vec::new();
        let mut l = start;
        while (bottom..=top).contains(&l) && residue_of(l, n) != 0 {
            out.push(l);
            l += step;
        }
        out
    } else {
        warnings.push("objective is not constant on the cycle; scanning every layer without early stop".to_string());
        (bottom..=top).rev().filter(|&l| residue_of(l, n) != 0).collect()
    };
    for &layer in &layers {
        let residue = residue_of(layer, n);
        let eq = synth::layer_equality(cycle, layer);
        let mut probes = Vec::new();
        for z in sy.essential(n, residue).points {
            let anchor = synth::s3_anchor(&z, cycle, cycle.support()[0])?;
            probes.push(b.push(
                SubTag::S3,
                Provenance::LayerAnchor { layer, point: z },
                vec![eq.clone(), anchor],
            ));
        }
        b.stage(probes, uniform);
        let mut added = vec![eq];
        added.extend(sy.cuts(cycle, residue)?);
        let s1 = b.push(SubTag::S1, Provenance::Layer { layer }, added);
        b.stage(vec![s1], uniform);
    }
    Ok((bottom, top))
}

fn plan_residues(cycle: &Cycle, sy: &mut Synth<'_>, b: &mut Builder) -> Result<(), EngineError> {
    let k = cycle.len();
    let mut ids = Vec::new();
    for residue in 1..k {
        let sub = synth::sublayer(cycle, residue)?;
        for z in sy.essential(k, residue).points {
            let anchor = synth::s3_anchor(&z, cycle, cycle.support()[0])?;
            ids.push(b.push(
                SubTag::S3,
                Provenance::ResidueAnchor { residue, point: z },
                vec![sub.clone(), anchor],
            ));
        }
        let mut added = vec![sub];
        added.extend(sy.cuts(cycle, residue)?);
        ids.push(b.push(SubTag::S1, Provenance::Residue { residue }, added));
    }
    ids.push(b.push(SubTag::S2, Provenance::Singular { cycles: vec![1] }, vec![sy.s2(cycle)]));
    b.stage(ids, false);
    Ok(())
}

/// Every tuple of `[1..=k_1] x ... x [1..=k_d]` in lexicographic order.
pub fn residue_tuples(lengths: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &k in lengths {
        out = out
            .into_iter()
            .flat_map(|t| {
                (1..=k).map(move |r| {
                    let mut t = t.clone();
                    t.push(r);
                    t
                })
            })
            .collect();
    }
    out
}

fn plan_tuples(cycles: &[Cycle], sy: &mut Synth<'_>, b: &mut Builder) -> Result<(), EngineError> {
    let lengths: Vec<usize> = cycles.iter().map(Cycle::len).collect();
    let mut ids = Vec::new();
    for t in residue_tuples(&lengths) {
        let singular: Vec<bool> = t.iter().zip(&lengths).map(|(r, k)| r == k).collect();
        let mut added = Vec::new();
        for (a, cycle) in cycles.iter().enumerate() {
            if singular[a] {
                added.push(sy.s2(cycle));
            } else {
                added.push(synth::sublayer(cycle, t[a])?);
                added.extend(sy.cuts(cycle, t[a])?);
            }
        }
        let (tag, provenance) = if singular.iter().all(|s| *s) {
            (SubTag::S3, Provenance::FixedSpace { residues: t })
        } else if singular.iter().any(|s| *s) {
            (SubTag::S2, Provenance::Tuple { residues: t })
        } else {
            (SubTag::S1, Provenance::Tuple { residues: t })
        };
        ids.push(b.push(tag, provenance, added));
    }
    for (a, cycle) in cycles.iter().enumerate() {
        for residue in 1..cycle.len() {
            let sub = synth::sublayer(cycle, residue)?;
            for z in sy.essential(cycle.len(), residue).points {
                let anchor = synth::s3_anchor(&z, cycle, cycle.support()[0])?;
                ids.push(b.push(
                    SubTag::S3,
                    Provenance::TupleAnchor {
                        cycle: a + 1,
                        residue,
                        point: z,
                    },
                    vec![sub.clone(), anchor],
                ));
            }
        }
    }
    if sy.opts.anchors == AnchorMode::Product {
        let pure: Vec<usize> = lengths.iter().map(|k| k - 1).collect();
        for t in residue_tuples(&pure) {
            let sets: Vec<EssentialSet> = cycles.iter().zip(&t).map(|(c, &r)| sy.essential(c.len(), r)).collect();
            let sizes: Vec<usize> = sets.iter().map(EssentialSet::len).collect();
            for pick in residue_tuples(&sizes) {
                let mut added = Vec::new();
                let mut points = Vec::new();
                for (a, cycle) in cycles.iter().enumerate() {
                    let z = sets[a].points[pick[a] - 1].clone();
                    added.push(synth::sublayer(cycle, t[a])?);
                    added.push(synth::s3_anchor(&z, cycle, cycle.support()[0])?);
                    points.push(z);
                }
                ids.push(b.push(
                    SubTag::S3,
                    Provenance::AnchorProduct {
                        residues: t.clone(),
                        points,
                    },
                    added,
                ));
            }
        }
    }
    b.stage(ids, false);
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SubReport {
    pub id: usize,
    pub tag: SubTag,
    pub provenance: Provenance,
    /// `None` when an earlier stage ended the search.
    pub outcome: Option<Outcome>,
    pub nodes: u64,
    #[serde(skip)]
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BestByTag {
    #[serde(rename = "S1")]
    pub s1: Option<String>,
    #[serde(rename = "S2")]
    pub s2: Option<String>,
    #[serde(rename = "S3")]
    pub s3: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub total_ms: f64,
    pub per_subproblem_ms: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub format: u32,
    pub algorithm: Algorithm,
    pub verdict: Status,
    pub objective: Option<String>,
    #[serde(serialize_with = "serialize_point")]
    pub point: Option<Vec<Rational>>,
    pub best_by_tag: BestByTag,
    pub counts: Counts,
    pub dispatched: Counts,
    pub relaxation: Outcome,
    pub layer_range: Option<(i64, i64)>,
    pub search_box: SearchBox,
    pub warnings: Vec<String>,
    pub schedule: Schedule,
    pub subproblems: Vec<SubReport>,
    pub timing: Option<Timing>,
}

fn serialize_point<S: serde::Serializer>(p: &Option<Vec<Rational>>, s: S) -> Result<S::Ok, S::Error> {
    match p {
        Some(v) => s.collect_seq(v.iter().map(format_rational)),
        None => s.serialize_none(),
    }
}

impl Report {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

fn better(sense: ObjectiveSense, candidate: &Rational, incumbent: &Rational) -> bool {
    match sense {
        ObjectiveSense::Min => candidate < incumbent,
        _ => candidate > incumbent,
    }
}

/// Runs a plan and folds the outcomes into a report.
pub fn run(plan: &Plan, opts: &EngineOptions) -> Result<Report, EngineError> {
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| EngineError::Pool(e.to_string()))?;
    let mut results: Vec<Option<(solve::SubOutcome, f64)>> = vec![None; plan.subproblems.len()];
    for stage in &plan.schedule.stages {
        let solved: Vec<Result<(solve::SubOutcome, f64), EngineError>> = pool.install(|| {
            stage
                .ids
                .par_iter()
                .map(|&id| {
                    let t = Instant::now();
                    let out = solve::solve_subproblem(&plan.subproblems[id], &plan.search_box, opts.node_limit)?;
                    Ok((out, t.elapsed().as_secs_f64() * 1e3))
                })
                .collect()
        });
        let mut any_feasible = false;
        for (&id, r) in stage.ids.iter().zip(solved) {
            let r = r?;
            any_feasible |= r.0.outcome.status == Status::Feasible;
            results[id] = Some(r);
        }
        if stage.stop_if_feasible && any_feasible {
            break;
        }
    }
    let mut dispatched = Counts::default();
    let mut best_by_tag = BestByTag::default();
    let mut tag_best: HashMap<SubTag, Rational> = HashMap::new();
    let mut best: Option<(Vec<Rational>, Rational)> = None;
    let mut unknown = false;
    let mut subproblems = Vec::with_capacity(plan.subproblems.len());
    for (sub, r) in plan.subproblems.iter().zip(&results) {
        if let Some((out, _)) = r {
            dispatched.add(sub.tag);
            let o = &out.outcome;
            unknown |= o.status == Status::Unknown;
            if let (Status::Feasible, Some(p), Some(v)) = (o.status, &o.point, &o.objective) {
                let e = tag_best.entry(sub.tag).or_insert_with(|| v.clone());
                if better(plan.sense, v, e) {
                    *e = v.clone();
                }
                let replace = match &best {
                    None => true,
                    Some((_, bv)) => plan.sense != ObjectiveSense::Feasibility && better(plan.sense, v, bv),
                };
                if replace {
                    best = Some((p.clone(), v.clone()));
                }
            }
        }
        subproblems.push(SubReport {
            id: sub.id,
            tag: sub.tag,
            provenance: sub.provenance.clone(),
            outcome: r.as_ref().map(|x| x.0.outcome.clone()),
            nodes: r.as_ref().map_or(0, |x| x.0.nodes),
            wall_ms: r.as_ref().map_or(0.0, |x| x.1),
        });
    }
    for (tag, v) in &tag_best {
        let text = Some(format_rational(v));
        match tag {
            SubTag::S1 => best_by_tag.s1 = text,
            SubTag::S2 => best_by_tag.s2 = text,
            SubTag::S3 => best_by_tag.s3 = text,
            SubTag::Plain => {}
        }
    }
    let verdict = match plan.relaxation.status {
        Status::Infeasible => Status::Infeasible,
        Status::Unbounded => Status::Unbounded,
        _ if unknown => Status::Unknown,
        _ if best.is_some() => Status::Feasible,
        _ => Status::Infeasible,
    };
    let show_objective = plan.sense != ObjectiveSense::Feasibility;
    Ok(Report {
        format: 1,
        algorithm: plan.schedule.algorithm,
        verdict,
        objective: best.as_ref().filter(|_| show_objective).map(|b| format_rational(&b.1)),
        point: best.map(|b| b.0),
        best_by_tag,
        counts: plan.schedule.counts,
        dispatched,
        relaxation: plan.relaxation.clone(),
        layer_range: plan.layer_range,
        search_box: plan.search_box.clone(),
        warnings: plan.warnings.clone(),
        schedule: plan.schedule.clone(),
        timing: Some(Timing {
            total_ms: started.elapsed().as_secs_f64() * 1e3,
            per_subproblem_ms: subproblems.iter().map(|s| s.wall_ms).collect(),
        }),
        subproblems,
    })
}

/// Plans and runs in one call.
pub fn solve_instance(inst: &Instance, opts: &EngineOptions) -> Result<Report, EngineError> {
    run(&plan(inst, opts)?, opts)
}

/// Writes every scheduled subproblem as `NNN_TAG.json` into `dir`.
pub fn export_plan(plan: &Plan, dir: &Path) -> Result<Vec<std::path::PathBuf>, EngineError> {
    std::fs::create_dir_all(dir).map_err(MinlpError::Io)?;
    let mut paths = Vec::new();
    for sub in &plan.subproblems {
        let path = dir.join(format!("{:03}_{}.json", sub.id, sub.tag.as_str()));
        solve::export_subproblem(sub, &plan.search_box, &path)?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuple_enumeration() {
        let t = residue_tuples(&[3, 2]);
        assert_eq!(t.len(), 6);
        assert_eq!(t[0], vec![1, 1]);
        assert_eq!(t[5], vec![3, 2]);
    }
}
