use grouplab::empirical::{cap_measure, mc_mean, Mergeable, Moments, Sense};
use grouplab::laplacian::laplacian_eigenvalue_exact;
use grouplab::partitions::{level, littlewood_richardson, littlewood_richardson_su, partitions_of_level, step_vector, weyl_dimension};
use grouplab::sampling::{couple, gaussian_matrix, sample_haar};
use grouplab::{Family, GroupSpec, Partition, RngStream};
use num::{BigInt, Zero};
use proptest::prelude::*;
use rand::Rng;

fn partition(max_rows: usize, max_part: u32) -> impl Strategy<Value = Partition> {
    prop::collection::vec(0..=max_part, 0..=max_rows).prop_map(|mut v| {
        v.sort_unstable_by(|a, b| b.cmp(a));
        Partition::new(v).unwrap()
    })
}

fn sorted(mut v: Vec<(Partition, usize)>) -> Vec<(Partition, usize)> {
    v.sort_by(|a, b| a.0.parts().cmp(b.0.parts()));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_vector_round_trips(n in 2usize..12, lam in partition(11, 6)) {
        prop_assume!(lam.len() < n);
        prop_assert_eq!(step_vector(&lam, n).unwrap().to_partition(), lam);
    }

    #[test]
    fn conjugate_is_an_involution(lam in partition(8, 8)) {
        prop_assert_eq!(lam.conjugate().conjugate(), lam.clone());
        prop_assert_eq!(lam.conjugate().size(), lam.size());
    }

    #[test]
    fn enumerated_levels_round_trip(fam in 0usize..4, n in 3usize..10, d in 0u32..6) {
        let family = Family::ALL[fam];
        let g = GroupSpec::new(family, n.max(family.min_n())).unwrap();
        for lam in partitions_of_level(&g, d) {
            prop_assert_eq!(level(&g, &lam).unwrap(), d);
        }
    }

    #[test]
    fn lr_is_commutative(a in partition(3, 3), b in partition(3, 3)) {
        prop_assert_eq!(sorted(littlewood_richardson(&a, &b)), sorted(littlewood_richardson(&b, &a)));
    }

    #[test]
    fn lr_conserves_dimension(n in 2usize..7, a in partition(3, 3), b in partition(3, 3)) {
        prop_assume!(a.len() < n && b.len() < n);
        let g = GroupSpec::su(n);
        let lhs = weyl_dimension(&g, &a).unwrap() * weyl_dimension(&g, &b).unwrap();
        let mut rhs = BigInt::zero();
        for (nu, c) in littlewood_richardson_su(&a, &b, n) {
            rhs += weyl_dimension(&g, &nu).unwrap() * BigInt::from(c);
        }
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn laplacian_decreases_when_a_box_is_added(fam in 0usize..3, n in 3usize..10, lam in partition(4, 5)) {
        let family = [Family::SO, Family::SU, Family::Sp][fam];
        let rows = match family {
            Family::SO => n / 2,
            Family::SU => n - 1,
            _ => n,
        };
        prop_assume!(lam.len() <= rows);
        let mut bigger = lam.parts().to_vec();
        if bigger.is_empty() {
            bigger.push(0);
        }
        bigger[0] += 1;
        let bigger = Partition::new(bigger).unwrap();
        let a = laplacian_eigenvalue_exact(family, &lam, n).unwrap();
        let b = laplacian_eigenvalue_exact(family, &bigger, n).unwrap();
        prop_assert!(a <= num::BigRational::zero());
        prop_assert!(b < a);
    }

    #[test]
    fn haar_draws_are_unitary(fam in 0usize..3, n in 1usize..9, seed in any::<u64>()) {
        let family = [Family::SO, Family::SU, Family::Sp][fam];
        prop_assume!(n >= family.min_n());
        let g = GroupSpec::new(family, n).unwrap();
        let x = sample_haar(&g, &mut RngStream::new(seed, 0)).unwrap();
        prop_assert!(x.unitarity_defect() < 1e-10);
    }

    #[test]
    fn coupling_recovers_the_gaussian(n in 1usize..20, seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 0);
        let y = gaussian_matrix::<f64, _>(n, n, &mut rng);
        let c = couple(&y).unwrap();
        let back = c.x.matmul(c.g.as_matrix()).scaled((n as f64).sqrt());
        prop_assert!(back.max_abs_diff(&y) < 1e-9);
    }

    #[test]
    fn cap_measures_are_complementary(n in 2usize..40, t in -1.0f64..1.0) {
        let gt = cap_measure(n, t, Sense::Gt);
        prop_assert!((gt + cap_measure(n, t, Sense::Lt) - 1.0).abs() < 1e-12);
        prop_assert!((gt - cap_measure(n, -t, Sense::Lt)).abs() < 1e-12);
        prop_assert!(cap_measure(n, t + 0.01, Sense::Gt) <= gt + 1e-15);
    }

    #[test]
    fn moments_merge_matches_a_single_pass(xs in prop::collection::vec(-1e3f64..1e3, 0..200), cut in 0usize..200) {
        let cut = cut.min(xs.len());
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..cut].iter().for_each(|&x| a.push(x));
        xs[cut..].iter().for_each(|&x| b.push(x));
        a.merge(b);
        prop_assert_eq!(a.n, whole.n);
        prop_assert!((a.mean - whole.mean).abs() < 1e-9);
        prop_assert!((a.m2 - whole.m2).abs() < 1e-6 * (1.0 + whole.m2));
    }
}

#[test]
fn estimates_do_not_depend_on_thread_count() {
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| mc_mean(20_000, &RngStream::new(7, 3), |r| r.gen::<f64>()))
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
}
