use num_complex::Complex64;
use proptest::prelude::*;

use jetmorse::curvature::{eta, g_k, trace_free, CurvatureTensor};
use jetmorse::exact::ratio;
use jetmorse::hermitian::{
    det_diff_bound_holds, eigenvalues, operator_norm, signature, sphere_second_moment,
    trace_free_part, HermitianForm,
};
use jetmorse::jet_combinatorics::{ikrn_bounds, ikrn_enumerated, ikrn_exact, DEFAULT_TERM_CEILING};
use jetmorse::measures::{dirichlet_integral, nu_moment, SimplexPoint, SphereTuple};
use jetmorse::models::{random_tensor, ModelSpec};
use jetmorse::wps::{volume_closed_form, WeightSpec};

fn complex() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn hermitian(n: usize) -> impl Strategy<Value = HermitianForm> {
    prop::collection::vec(complex(), n * n).prop_map(move |raw| {
        HermitianForm::from_fn(n, |i, j| (raw[i * n + j] + raw[j * n + i].conj()) * 0.5).unwrap()
    })
}

fn hermitian_pair() -> impl Strategy<Value = (HermitianForm, HermitianForm)> {
    (1usize..=5).prop_flat_map(|n| (hermitian(n), hermitian(n)))
}

fn unit_vector(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(complex(), n).prop_filter_map("nonzero", |v| {
        let len = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        (len > 1e-3).then(|| v.iter().map(|z| z / len).collect())
    })
}

fn simplex(k: usize) -> impl Strategy<Value = SimplexPoint> {
    prop::collection::vec(0.01..1.0f64, k).prop_map(|x| {
        let total: f64 = x.iter().sum();
        SimplexPoint::new(x.iter().map(|v| v / total).collect()).unwrap()
    })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn volume_is_permutation_and_exponent_invariant(
        pairs in prop::collection::vec((1u64..6, 1u64..4), 1..4)
            .prop_filter("coprime weights", |p| p.iter().fold(0, |g, &(a, _)| gcd(g, a)) == 1),
        seed in any::<u64>(),
    ) {
        let (a, r): (Vec<u64>, Vec<u64>) = pairs.into_iter().unzip();
        let w = WeightSpec::new(a.clone(), r.clone(), None).unwrap();
        let v = volume_closed_form(&w);
        let mut perm: Vec<usize> = (0..a.len()).collect();
        perm.rotate_left(seed as usize % a.len());
        prop_assert_eq!(&volume_closed_form(&w.permuted(&perm).unwrap()), &v);
        let p = w.exponent() * 2.0 + 1.0;
        prop_assert_eq!(&volume_closed_form(&w.with_exponent(p).unwrap()), &v);
        let den: u64 = a.iter().zip(&r).map(|(x, y)| x.pow(*y as u32)).product();
        prop_assert_eq!(v, ratio(1, den));
    }

    #[test]
    fn ikrn_lies_in_its_bracket(k in 1u64..200, r in 1u64..5, n in 1u64..7) {
        let v = ikrn_exact(k, r, n).unwrap();
        let (lo, hi) = ikrn_bounds(k, r, n).unwrap();
        prop_assert!(lo <= v && v <= hi);
    }

    #[test]
    fn ikrn_recurrence_matches_enumeration(k in 1u64..8, r in 1u64..4, n in 0u64..5) {
        prop_assert_eq!(
            ikrn_exact(k, r, n).unwrap(),
            ikrn_enumerated(k, r, n, DEFAULT_TERM_CEILING).unwrap()
        );
    }

    #[test]
    fn dirichlet_integral_is_symmetric(r in prop::collection::vec(1u64..6, 1..6)) {
        let mut rev = r.clone();
        rev.reverse();
        prop_assert_eq!(dirichlet_integral(&r).unwrap(), dirichlet_integral(&rev).unwrap());
    }

    #[test]
    fn nu_first_moments_sum_to_one(k in 1usize..7, r in 1u64..4) {
        let total = (0..k)
            .map(|s| {
                let mut beta = vec![0; k];
                beta[s] = 1;
                nu_moment(k, r, &beta).unwrap()
            })
            .fold(ratio(0, 1), |acc, m| acc + m);
        prop_assert_eq!(total, ratio(1, 1));
    }

    #[test]
    fn determinant_difference_bound((a, b) in hermitian_pair()) {
        for q in 0..=a.dim() {
            prop_assert!(det_diff_bound_holds(&a, &b, q).unwrap());
        }
    }

    #[test]
    fn sphere_moment_sandwich(a in (1usize..=6).prop_flat_map(hermitian)) {
        let n = a.dim() as f64;
        let norm = operator_norm(&a).unwrap();
        let v = sphere_second_moment(&a);
        prop_assert!(norm * norm / (n * n) <= v * (1.0 + 1e-12));
        prop_assert!(v <= norm * norm * (1.0 + 1e-12));
    }

    #[test]
    fn signature_partitions_the_dimension(a in (1usize..=6).prop_flat_map(hermitian)) {
        let sig = signature(&a, 1e-9).unwrap();
        prop_assert_eq!(sig.plus + sig.minus + sig.zero, a.dim());
        let eigs = eigenvalues(&a).unwrap();
        prop_assert!(eigs.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((eigs.iter().sum::<f64>() - a.trace()).abs() < 1e-9 * (1.0 + a.frobenius_sq()));
    }

    #[test]
    fn trace_free_part_has_zero_trace(a in (1usize..=6).prop_flat_map(hermitian)) {
        prop_assert!(trace_free_part(&a).trace().abs() < 1e-12 * (1.0 + a.frobenius_sq()));
    }

    #[test]
    fn trace_free_tensor_has_zero_eta(n in 1usize..4, r in 1usize..4, seed in any::<u64>()) {
        let t = trace_free(&random_tensor(n, r, 1.0, seed).unwrap());
        let e = eta(&t);
        prop_assert!(e.frobenius_sq() < 1e-24);
    }

    #[test]
    fn g_k_is_additive(
        seeds in (any::<u64>(), any::<u64>()),
        x in simplex(3),
        u in prop::collection::vec(unit_vector(2), 3),
    ) {
        let t1 = random_tensor(2, 2, 1.0, seeds.0).unwrap();
        let t2 = random_tensor(2, 2, 0.5, seeds.1).unwrap();
        let u = SphereTuple::new(u).unwrap();
        let lhs = g_k(&t1.add(&t2).unwrap(), &x, &u).unwrap();
        let rhs = g_k(&t1, &x, &u).unwrap().add(&g_k(&t2, &x, &u).unwrap()).unwrap();
        prop_assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-12);
    }

    #[test]
    fn tensor_json_round_trips(n in 1usize..4, r in 1usize..4, seed in any::<u64>()) {
        let t = random_tensor(n, r, 1.0, seed).unwrap();
        let back = CurvatureTensor::from_json_str(&t.to_json_string()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn model_spec_json_round_trips(n in 1usize..4, r in 1usize..4, points in 1usize..5, seed in any::<u64>(), tf in any::<bool>()) {
        let spec = ModelSpec::Random { n, r, scale: 1.0, points, seed, trace_free: tf, total_volume: None };
        let back = ModelSpec::from_json_str(&spec.to_json_string()).unwrap();
        prop_assert_eq!(&back, &spec);
        let m = back.build().unwrap();
        prop_assert_eq!(m.points().len(), points);
    }
}
