use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use orbitcut::exact::{bareiss_determinant, Rational};
use orbitcut::group::{
    classify, cycle_decomposition, fixed_space_basis, layer_of, orbit, parse_generators, Cycle, GroupSpec, Permutation,
};
use orbitcut::spectral::{circulant, det_circulant, eigenvalues, is_singular, partial_circulant, t_hat_exact, t_values_int};
use proptest::prelude::*;

fn permutation(max_n: usize) -> impl Strategy<Value = Permutation> {
    (1..=max_n)
        .prop_flat_map(|n| Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
        .prop_map(|images| Permutation::from_images(images).unwrap())
}

fn exact_det(c: &[i64]) -> BigInt {
    bareiss_determinant(&circulant(c.to_vec()).rows())
}

fn int_vec(n: std::ops::RangeInclusive<usize>, lo: i64, hi: i64) -> impl Strategy<Value = Vec<i64>> {
    n.prop_flat_map(move |n| prop::collection::vec(lo..=hi, n))
}

proptest! {
    #[test]
    fn display_parse_round_trip(p in permutation(9)) {
        let back = Permutation::parse(&p.to_string(), p.degree()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn inverse_cancels(p in permutation(9)) {
        prop_assert!(p.then(&p.inverse()).is_identity());
        prop_assert!(p.inverse().then(&p).is_identity());
    }

    #[test]
    fn decomposition_reproduces_permutation(p in permutation(10)) {
        let n = p.degree();
        let cycles = cycle_decomposition(&p);
        for (i, a) in cycles.iter().enumerate() {
            for b in &cycles[i + 1..] {
                prop_assert!(a.is_disjoint(b));
            }
        }
        let moved = (0..n).filter(|&i| p.image(i) != i).count();
        prop_assert_eq!(cycles.iter().map(Cycle::len).sum::<usize>(), moved);
        let forward = cycles.iter().fold(Permutation::identity(n), |acc, c| acc.then(&Permutation::from_cycle(n, c)));
        let backward = cycles.iter().rev().fold(Permutation::identity(n), |acc, c| acc.then(&Permutation::from_cycle(n, c)));
        prop_assert_eq!(&forward, &p);
        prop_assert_eq!(&backward, &p);
    }

    #[test]
    fn layers_are_permutation_invariant(p in permutation(8), seed in prop::collection::vec(-9i64..=9, 8)) {
        let z = &seed[..p.degree()];
        prop_assert_eq!(layer_of(&p.apply(z)), layer_of(z));
    }

    #[test]
    fn orbits_are_closed(p in permutation(6), seed in prop::collection::vec(0i64..=2, 6)) {
        let n = p.degree();
        let z = &seed[..n];
        let gs = GroupSpec { n, generators: vec![p.clone()], class: None, selected_cycles: Vec::new() };
        let orb = orbit(&gs, z).unwrap();
        prop_assert!(orb.contains(&z.to_vec()));
        for v in &orb {
            prop_assert!(orb.contains(&p.apply(v)));
        }
    }

    #[test]
    fn classification_ignores_generator_order(ps in prop::collection::vec(permutation(7), 1..4)) {
        let n = ps.iter().map(Permutation::degree).max().unwrap();
        let lifted: Vec<String> = ps
            .iter()
            .map(|p| p.to_string())
            .collect();
        let forward = parse_generators(&lifted, n).unwrap();
        let mut reversed_text = lifted.clone();
        reversed_text.reverse();
        let reversed = parse_generators(&reversed_text, n).unwrap();
        prop_assert_eq!(classify(&forward), classify(&reversed));
    }

    #[test]
    fn fixed_space_is_fixed_and_orthogonal(p in permutation(10)) {
        let n = p.degree();
        let gs = GroupSpec::from_cycles(n, cycle_decomposition(&p));
        let basis = fixed_space_basis(&gs).vectors;
        prop_assert_eq!(basis.len(), gs.selected_cycles.len() + gs.non_active().len());
        for v in &basis {
            prop_assert_eq!(&p.apply(v), v);
        }
        for (i, a) in basis.iter().enumerate() {
            for b in &basis[i + 1..] {
                prop_assert_eq!(a.iter().zip(b).map(|(x, y)| x * y).sum::<i64>(), 0);
            }
        }
    }

    #[test]
    fn exact_inverse_is_an_inverse(c in int_vec(1..=8, -6, 6)) {
        let n = c.len();
        match t_hat_exact(&c) {
            Err(_) => prop_assert!(exact_det(&c).is_zero()),
            Ok(th) => {
                let rows = circulant(c.iter().map(|&v| Rational::from_integer(v.into())).collect()).rows();
                let inv = circulant(th).rows();
                for i in 0..n {
                    for j in 0..n {
                        let v: Rational = (0..n).map(|l| &rows[i][l] * &inv[l][j]).sum();
                        prop_assert_eq!(v, Rational::from_integer((i == j).into()));
                    }
                }
            }
        }
    }

    #[test]
    fn float_and_exact_inverse_agree(c in int_vec(2..=9, -5, 5)) {
        prop_assume!(!exact_det(&c).is_zero());
        let tv = t_values_int(&c).unwrap();
        let exact = t_hat_exact(&c).unwrap();
        let n = c.len();
        prop_assert!(tv.t.iter().sum::<f64>().abs() <= 1e-9);
        for (i, (f, q)) in tv.t_hat.iter().zip(&exact).enumerate() {
            prop_assert!((f - q.to_f64().unwrap()).abs() <= 1e-9);
            prop_assert!((tv.t_hat[i] - (1.0 / tv.layer_sum + tv.t[i]) / n as f64).abs() <= 1e-12);
            prop_assert_eq!(tv.t_bar[i], tv.t_hat[(n - i) % n]);
        }
    }

    #[test]
    fn translation_keeps_t_values(c in int_vec(2..=8, -5, 5), t in -5i64..=5) {
        let ct: Vec<i64> = c.iter().map(|v| v + t).collect();
        let (Ok(a), Ok(b)) = (t_values_int(&c), t_values_int(&ct)) else { return Ok(()); };
        for (x, y) in a.t.iter().zip(&b.t) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn determinant_and_singularity(c in int_vec(1..=8, -3, 3)) {
        let exact = exact_det(&c).to_f64().unwrap();
        let cf: Vec<f64> = c.iter().map(|&v| v as f64).collect();
        let float = det_circulant(&cf);
        prop_assert!((float - exact).abs() <= 1e-8 * exact.abs().max(1.0));
        prop_assert_eq!(is_singular(&eigenvalues(&cf), &cf), exact == 0.0);
    }

    #[test]
    fn partial_circulant_shape(c in int_vec(3..=7, -4, 4), k in 2usize..=3) {
        let n = c.len();
        let m = partial_circulant(c.clone(), k);
        let rows = m.rows();
        prop_assert_eq!(rows.len(), n);
        for (i, row) in rows.iter().enumerate() {
            prop_assert_eq!(row.len(), k);
            for (j, v) in row.iter().enumerate() {
                if i < k {
                    prop_assert_eq!(*v, c[(i + k - j) % k]);
                } else {
                    prop_assert_eq!(*v, c[i]);
                }
            }
        }
    }
}
