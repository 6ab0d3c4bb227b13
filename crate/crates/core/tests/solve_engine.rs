use std::cmp::Ordering;
use std::sync::Arc;

use num_traits::Zero;
use orbitcut::engine::{plan, run, solve_instance, Algorithm, AlgorithmChoice, EngineOptions, Provenance, SubTag, Subproblem};
use orbitcut::exact::{rat, ratio, solve as exact_solve, Rational};
use orbitcut::group::{Cycle, GroupSpec, Permutation};
use orbitcut::solve::enumerate::{SearchProblem, SearchStatus};
use orbitcut::solve::lp::{self, LpProblem, LpResult, LpRow, LpSense};
use orbitcut::solve::{
    derive_box, lp_relax, solve_subproblem, subproblem_document, Instance, Objective, ObjectiveSense, Row, RowSense, Status,
    VarBound,
};
use orbitcut::synth::{self, S2Variant, SetTag};
use proptest::prelude::*;

fn for_each_point(lo: &[i64], hi: &[i64], mut f: impl FnMut(&[i64])) {
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return;
    }
    let mut x = lo.to_vec();
    loop {
        f(&x);
        let mut i = 0;
        loop {
            if i == x.len() {
                return;
            }
            if x[i] < hi[i] {
                x[i] += 1;
                break;
            }
            x[i] = lo[i];
            i += 1;
        }
    }
}

fn row_holds(coeffs: &[Rational], sense: RowSense, rhs: &Rational, x: &[i64]) -> bool {
    let v: Rational = coeffs.iter().zip(x).map(|(a, &b)| a * rat(b)).sum();
    match sense {
        RowSense::Le => v <= *rhs,
        RowSense::Ge => v >= *rhs,
        RowSense::Eq => v == *rhs,
    }
}

/// Feasibility and the best objective value by exhaustive enumeration.
fn brute_force(inst: &Instance) -> (bool, Option<Rational>) {
    let lo: Vec<i64> = inst.bounds.iter().map(|b| b.lo.as_ref().unwrap().to_integer().try_into().unwrap()).collect();
    let hi: Vec<i64> = inst.bounds.iter().map(|b| b.hi.as_ref().unwrap().to_integer().try_into().unwrap()).collect();
    let mut best: Option<Rational> = None;
    let mut feasible = false;
    for_each_point(&lo, &hi, |x| {
        if inst.rows.iter().all(|r| row_holds(&r.coeffs, r.sense, &r.rhs, x)) {
            feasible = true;
            let v: Rational = inst.objective.coeffs.iter().zip(x).map(|(a, &b)| a * rat(b)).sum();
            let better = match (&best, inst.objective.sense) {
                (None, _) => true,
                (Some(b), ObjectiveSense::Max) => v > *b,
                (Some(b), ObjectiveSense::Min) => v < *b,
                _ => false,
            };
            if better {
                best = Some(v);
            }
        }
    });
    (feasible, best.filter(|_| inst.objective.sense != ObjectiveSense::Feasibility))
}

/// All images of `row` under the group generated by `gens`.
fn row_orbit(row: &[i64], gens: &[Permutation]) -> Vec<Vec<i64>> {
    let mut out = vec![row.to_vec()];
    let mut i = 0;
    while i < out.len() {
        for g in gens {
            let img = g.apply(&out[i]);
            if !out.contains(&img) {
                out.push(img);
            }
        }
        i += 1;
    }
    out
}

#[derive(Debug, Clone)]
struct Spec {
    rows: Vec<(Vec<i64>, u8, i64)>,
    lo: i64,
    hi: i64,
    sense: u8,
    weight: i64,
    extra: Vec<i64>,
}

fn spec(n: usize) -> impl Strategy<Value = Spec> {
    (
        prop::collection::vec((prop::collection::vec(-2i64..=2, n), 0u8..3, -2i64..=5), 1..=2),
        -1i64..=0,
        1i64..=2,
        0u8..3,
        prop::sample::select(vec![-2i64, -1, 1, 2]),
        prop::collection::vec(-2i64..=2, n),
    )
        .prop_map(|(rows, lo, hi, sense, weight, extra)| Spec { rows, lo, hi, sense, weight, extra })
}

/// A symmetric instance: rows closed under the cycles, bounds uniform,
/// objective constant on every cycle and free on fixed coordinates.
fn build(n: usize, cycles: Vec<Cycle>, s: &Spec) -> Instance {
    let gens: Vec<Permutation> = cycles.iter().map(|c| Permutation::from_cycle(n, c)).collect();
    let mut rows = Vec::new();
    for (a, sense, rhs) in &s.rows {
        let sense = [RowSense::Le, RowSense::Ge, RowSense::Eq][*sense as usize];
        for coeffs in row_orbit(a, &gens) {
            rows.push(Row {
                coeffs: coeffs.into_iter().map(rat).collect(),
                sense,
                rhs: rat(*rhs),
            });
        }
    }
    let gs = GroupSpec::from_cycles(n, cycles);
    let active: Vec<bool> = (0..n).map(|i| gs.selected_cycles.iter().any(|c| c.contains(i))).collect();
    let sense = [ObjectiveSense::Max, ObjectiveSense::Min, ObjectiveSense::Feasibility][s.sense as usize];
    let coeffs = (0..n)
        .map(|i| {
            if active[i] {
                let which = gs.selected_cycles.iter().position(|c| c.contains(i)).unwrap() as i64;
                rat(s.weight + which)
            } else {
                rat(s.extra[i])
            }
        })
        .collect();
    Instance {
        n,
        objective: Objective { sense, coeffs },
        rows,
        bounds: vec![VarBound::integer(s.lo, s.hi); n],
        group: gs,
    }
}

fn check_against_oracle(inst: &Instance, expected_alg: Algorithm) -> Result<(), TestCaseError> {
    let report = solve_instance(inst, &EngineOptions::default()).unwrap();
    prop_assert_eq!(report.algorithm, expected_alg);
    prop_assert!(inst.check_symmetry().is_empty());
    let (feasible, best) = brute_force(inst);
    let expected = if feasible { Status::Feasible } else { Status::Infeasible };
    prop_assert_eq!(report.verdict, expected, "report {}", report.to_json_string());
    if let Some(best) = best {
        prop_assert_eq!(report.objective.clone(), Some(orbitcut::exact::format_rational(&best)));
    }
    if let Some(p) = &report.point {
        let x: Vec<i64> = p.iter().map(|q| q.to_integer().try_into().unwrap()).collect();
        prop_assert!(inst.rows.iter().all(|r| row_holds(&r.coeffs, r.sense, &r.rhs, &x)));
    }
    Ok(())
}

fn lp_vertex_oracle(p: &LpProblem) -> Option<Rational> {
    let n = p.num_vars();
    let mut planes: Vec<(Vec<Rational>, Rational)> = p.rows.iter().map(|r| (r.coeffs.clone(), r.rhs.clone())).collect();
    for j in 0..n {
        let mut e = vec![Rational::zero(); n];
        e[j] = rat(1);
        planes.push((e.clone(), p.lower[j].clone().unwrap()));
        planes.push((e, p.upper[j].clone().unwrap()));
    }
    let mut best: Option<Rational> = None;
    let m = planes.len();
    let mut pick = (0..n).collect::<Vec<usize>>();
    loop {
        let mat: Vec<Vec<Rational>> = pick.iter().map(|&i| planes[i].0.clone()).collect();
        let rhs: Vec<Rational> = pick.iter().map(|&i| planes[i].1.clone()).collect();
        if let Some(x) = exact_solve(&mat, &rhs) {
            if lp::is_feasible_point(p, &x) {
                let v: Rational = p.objective.iter().zip(&x).map(|(a, b)| a * b).sum();
                if best.as_ref().is_none_or(|b| v > *b) {
                    best = Some(v);
                }
            }
        }
        // next n-subset in lexicographic order
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < m - n + i {
                pick[i] += 1;
                for j in i + 1..n {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lp_optimum_matches_vertex_enumeration(
        n in 2usize..=3,
        rows in prop::collection::vec((prop::collection::vec(-4i64..=4, 3), 0u8..3, -6i64..=6, 1i64..=3), 1..=4),
        obj in prop::collection::vec(-3i64..=3, 3),
    ) {
        let mut p = LpProblem::new(n);
        p.objective = obj[..n].iter().map(|&v| rat(v)).collect();
        for (a, s, b, d) in rows {
            p.rows.push(LpRow {
                coeffs: a[..n].iter().map(|&v| rat(v)).collect(),
                sense: [LpSense::Le, LpSense::Ge, LpSense::Eq][s as usize],
                rhs: ratio(b, d),
            });
        }
        p.lower = vec![Some(rat(-5)); n];
        p.upper = vec![Some(rat(5)); n];
        let oracle = lp_vertex_oracle(&p);
        match lp::solve(&p) {
            LpResult::Optimal { x, value } => {
                prop_assert!(lp::is_feasible_point(&p, &x));
                let at_x: Rational = p.objective.iter().zip(&x).map(|(a, b)| a * b).sum();
                prop_assert_eq!(&at_x, &value);
                prop_assert_eq!(Some(value), oracle);
            }
            LpResult::Infeasible => prop_assert_eq!(oracle, None),
            LpResult::Unbounded => prop_assert!(false, "box-bounded LP reported unbounded"),
        }
    }

    #[test]
    fn enumeration_matches_brute_force(
        n in 1usize..=4,
        rows in prop::collection::vec((prop::collection::vec(-3i64..=3, 4), 0u8..3, -4i64..=4), 0..=3),
        obj in prop::collection::vec(-2i64..=2, 4),
        sense in 0u8..3,
    ) {
        let sense = [ObjectiveSense::Max, ObjectiveSense::Min, ObjectiveSense::Feasibility][sense as usize];
        let inst = Instance {
            n,
            objective: Objective { sense, coeffs: obj[..n].iter().map(|&v| rat(v)).collect() },
            rows: rows
                .iter()
                .map(|(a, s, b)| Row {
                    coeffs: a[..n].iter().map(|&v| rat(v)).collect(),
                    sense: [RowSense::Le, RowSense::Ge, RowSense::Eq][*s as usize],
                    rhs: rat(*b),
                })
                .collect(),
            bounds: vec![VarBound::integer(-3, 3); n],
            group: GroupSpec::trivial(n),
        };
        let mut sp = SearchProblem::new((0..n).map(|j| (format!("x{}", j + 1), Some(-3), Some(3))).collect(), 1e-9);
        for r in &inst.rows {
            let ord = match r.sense { RowSense::Le => Ordering::Less, RowSense::Ge => Ordering::Greater, RowSense::Eq => Ordering::Equal };
            sp.add_linear(&r.coeffs.iter().cloned().enumerate().collect::<Vec<_>>(), ord, &r.rhs).unwrap();
        }
        if sense != ObjectiveSense::Feasibility {
            sp.set_objective(&inst.objective.coeffs.iter().cloned().enumerate().collect::<Vec<_>>(), sense == ObjectiveSense::Max).unwrap();
        }
        let res = sp.solve(1_000_000);
        let (feasible, best) = brute_force(&inst);
        prop_assert_eq!(res.status == SearchStatus::Feasible, feasible);
        prop_assert_eq!(res.status == SearchStatus::Infeasible, !feasible);
        if let (Some(best), Some(a)) = (best, res.assignment) {
            let v: Rational = inst.objective.coeffs.iter().zip(&a).map(|(c, &x)| c * rat(x)).sum();
            prop_assert_eq!(v, best);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn layer_search_is_sound(n in 3usize..=5, s in spec(5)) {
        let s = Spec { rows: s.rows.iter().map(|(a, t, b)| (a[..n].to_vec(), *t, *b)).collect(), ..s };
        check_against_oracle(&build(n, vec![Cycle::full(n)], &s), Algorithm::Layers)?;
    }

    #[test]
    fn residue_search_is_sound(k in 3usize..=4, extra in 1usize..=2, s in spec(6)) {
        let n = k + extra;
        let s = Spec { rows: s.rows.iter().map(|(a, t, b)| (a[..n].to_vec(), *t, *b)).collect(), ..s };
        check_against_oracle(&build(n, vec![Cycle::full(k)], &s), Algorithm::Residues)?;
    }

    #[test]
    fn residue_tuple_search_is_sound(shape in 0usize..3, s in spec(6)) {
        let (n, cycles) = match shape {
            0 => (4, vec![Cycle::new(vec![0, 1]).unwrap(), Cycle::new(vec![2, 3]).unwrap()]),
            1 => (5, vec![Cycle::new(vec![0, 1, 2]).unwrap(), Cycle::new(vec![3, 4]).unwrap()]),
            _ => (6, vec![Cycle::new(vec![0, 1, 2]).unwrap(), Cycle::new(vec![3, 4]).unwrap()]),
        };
        let s = Spec { rows: s.rows.iter().map(|(a, t, b)| (a[..n].to_vec(), *t, *b)).collect(), lo: 0, ..s };
        check_against_oracle(&build(n, cycles, &s), Algorithm::ResidueTuples)?;
    }

    #[test]
    fn residue_schedule_counts(k in 2usize..=9, extra in 1usize..=2) {
        let n = k + extra;
        let s = Spec { rows: vec![], lo: 0, hi: 1, sense: 2, weight: 1, extra: vec![0; n] };
        let p = plan(&build(n, vec![Cycle::full(k)], &s), &EngineOptions::default()).unwrap();
        prop_assert_eq!(p.schedule.counts.s1, k - 1);
        prop_assert_eq!(p.schedule.counts.s2, 1);
    }

    #[test]
    fn tuple_schedule_counts(a in 2usize..=5, b in 2usize..=4) {
        let n = a + b;
        let cycles = vec![Cycle::new((0..a).collect()).unwrap(), Cycle::new((a..n).collect()).unwrap()];
        let s = Spec { rows: vec![], lo: 0, hi: 1, sense: 2, weight: 1, extra: vec![0; n] };
        let p = plan(&build(n, cycles, &s), &EngineOptions::default()).unwrap();
        prop_assert_eq!(p.schedule.counts.s1, (a - 1) * (b - 1));
        prop_assert_eq!(p.schedule.counts.s2, a * b - (a - 1) * (b - 1) - 1);
    }
}

fn simple(n: usize, rows: Vec<Row>, lo: i64, hi: i64, sense: ObjectiveSense) -> Instance {
    Instance {
        n,
        objective: Objective { sense, coeffs: vec![rat(1); n] },
        rows,
        bounds: vec![VarBound::integer(lo, hi); n],
        group: GroupSpec::from_cycles(n, vec![Cycle::full(n)]),
    }
}

fn sum_row(n: usize, sense: RowSense, rhs: Rational) -> Row {
    Row { coeffs: vec![rat(1); n], sense, rhs }
}

#[test]
fn infeasible_relaxation_dispatches_nothing() {
    let inst = simple(3, vec![sum_row(3, RowSense::Ge, rat(7))], 0, 2, ObjectiveSense::Feasibility);
    let report = solve_instance(&inst, &EngineOptions::default()).unwrap();
    assert_eq!(report.verdict, Status::Infeasible);
    assert!(report.subproblems.is_empty());
    assert_eq!(lp_relax(&inst).status, Status::Infeasible);
}

#[test]
fn fixed_space_layer_is_found_by_the_singular_subproblem() {
    // LP optimum layer 6 is a multiple of 3; (2,2,2) is feasible
    let inst = simple(3, vec![sum_row(3, RowSense::Le, rat(6))], 0, 5, ObjectiveSense::Max);
    let report = solve_instance(&inst, &EngineOptions::default()).unwrap();
    assert_eq!(report.verdict, Status::Feasible);
    assert_eq!(report.objective.as_deref(), Some("6"));
    assert_eq!(report.counts.s1, 0);
    assert_eq!(report.counts.s2, 1);
}

#[test]
fn layer_scan_stops_at_first_feasible_layer() {
    let inst = simple(3, vec![sum_row(3, RowSense::Le, ratio(17, 2))], 0, 5, ObjectiveSense::Max);
    let report = solve_instance(&inst, &EngineOptions::default()).unwrap();
    assert_eq!(report.objective.as_deref(), Some("8"));
    assert_eq!(report.layer_range, Some((0, 8)));
    let scanned: Vec<&Provenance> = report
        .subproblems
        .iter()
        .filter(|s| s.outcome.is_some() && s.tag == SubTag::S1)
        .map(|s| &s.provenance)
        .collect();
    assert!(scanned.len() <= 1);
}

#[test]
fn exhausted_node_budget_is_unknown() {
    let inst = simple(4, vec![sum_row(4, RowSense::Le, rat(5))], 0, 3, ObjectiveSense::Max);
    let opts = EngineOptions { node_limit: 0, ..EngineOptions::default() };
    let report = solve_instance(&inst, &opts).unwrap();
    assert_eq!(report.verdict, Status::Unknown);
}

#[test]
fn clipped_box_turns_infeasible_into_unknown() {
    let mut inst = simple(2, vec![sum_row(2, RowSense::Ge, rat(500))], 0, 5, ObjectiveSense::Feasibility);
    inst.bounds = vec![VarBound { lo: Some(rat(0)), hi: None, integer: true }; 2];
    let report = solve_instance(&inst, &EngineOptions { box_half: 10, ..EngineOptions::default() }).unwrap();
    assert!(report.search_box.is_truncated());
    assert_eq!(report.verdict, Status::Unknown);
    assert!(!report.warnings.is_empty());
}

#[test]
fn unbounded_relaxation_is_reported() {
    let mut inst = simple(2, vec![], 0, 5, ObjectiveSense::Max);
    inst.bounds = vec![VarBound::free_integer(); 2];
    let report = solve_instance(&inst, &EngineOptions::default()).unwrap();
    assert_eq!(report.verdict, Status::Unbounded);
}

#[test]
fn reports_are_deterministic_across_thread_counts() {
    let s = Spec {
        rows: vec![(vec![1, 2, 0, -1, 0], 0, 3), (vec![1, 1, 1, 1, 0], 1, 2)],
        lo: -1,
        hi: 2,
        sense: 0,
        weight: 1,
        extra: vec![0, 0, 0, 0, 3],
    };
    let inst = build(5, vec![Cycle::full(4)], &s);
    let strip = |jobs: usize| {
        let opts = EngineOptions { jobs, ..EngineOptions::default() };
        let p = plan(&inst, &opts).unwrap();
        let mut r = run(&p, &opts).unwrap();
        r.timing = None;
        (p.schedule, r.to_json_string())
    };
    let (s1, r1) = strip(1);
    let (s4, r4) = strip(4);
    assert_eq!(s1, s4);
    assert_eq!(r1, r4);
}

#[test]
fn forced_algorithm_must_fit_the_group() {
    let inst = simple(3, vec![], 0, 1, ObjectiveSense::Feasibility);
    let opts = EngineOptions { algorithm: AlgorithmChoice::Fixed(Algorithm::ResidueTuples), ..EngineOptions::default() };
    assert!(plan(&inst, &opts).is_err());
    let opts = EngineOptions { algorithm: AlgorithmChoice::Fixed(Algorithm::NoSymmetry), ..EngineOptions::default() };
    let p = plan(&inst, &opts).unwrap();
    assert_eq!(p.schedule.counts.plain, 1);
}

fn five_cycle_sub(added: Vec<orbitcut::synth::ConstraintSet>, tag: SubTag) -> (Subproblem, orbitcut::solve::SearchBox) {
    let inst = simple(5, vec![], 0, 2, ObjectiveSense::Feasibility);
    let sbox = derive_box(&inst, 50);
    (Subproblem { id: 0, tag, provenance: Provenance::Plain, base: Arc::new(inst), added }, sbox)
}

#[test]
fn exported_documents_have_the_expected_shape() {
    let cycle = Cycle::full(5);
    let z = vec![1, 1, 1, 0, 0];
    let (s1, b) = five_cycle_sub(
        vec![
            synth::sublayer(&cycle, 3).unwrap(),
            synth::smoothness(&cycle, 1e-6),
            synth::s1_for_point(&z, &cycle, synth::RotationMode::All, 1e-6).unwrap(),
        ],
        SubTag::S1,
    );
    assert_eq!(s1.added.iter().filter(|s| s.tag == SetTag::Smooth).map(|s| s.constraints.len()).sum::<usize>(), 2);
    let doc = subproblem_document(&s1, &b);
    assert_eq!(doc.tag, "S1");
    assert!(doc.vars.iter().any(|v| v.name == "q1"));
    let (s2, b) = five_cycle_sub(vec![synth::s2_singular(&cycle, &S2Variant::SignGuarded { bound: rat(10) })], SubTag::S2);
    let doc = subproblem_document(&s2, &b);
    let binaries = doc.vars.iter().filter(|v| v.kind == orbitcut::solve::minlp::VarType::Binary).count();
    assert_eq!(binaries, 3);
}

#[test]
fn anchor_that_violates_the_rows_is_infeasible() {
    let (mut sub, b) = five_cycle_sub(vec![synth::s3_anchor(&[2, 0, 0, 0, 0], &Cycle::full(5), 0).unwrap()], SubTag::S3);
    // every translate of (2,0,0,0,0) in [0,2]^5 has x1 = x2 + 2, excluded by x1 <= x2 + 1
    let mut inst = (*sub.base).clone();
    for coeffs in row_orbit(&[1, -1, 0, 0, 0], &[Permutation::from_cycle(5, &Cycle::full(5))]) {
        inst.rows.push(Row { coeffs: coeffs.into_iter().map(rat).collect(), sense: RowSense::Le, rhs: rat(1) });
    }
    sub.base = Arc::new(inst);
    let out = solve_subproblem(&sub, &b, 1_000_000).unwrap();
    assert_eq!(out.outcome.status, Status::Infeasible);
    let out = solve_subproblem(&sub, &b, 0).unwrap();
    assert_eq!(out.outcome.status, Status::Unknown);
}
