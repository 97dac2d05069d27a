use std::sync::OnceLock;

use proptest::prelude::*;
use silab_core::estimator::{estimate, matrix_pair, matrix_single, Direction};
use silab_core::exec::Execution;
use silab_core::kernels::make_default_kernel;
use silab_core::lower_bound::gram_matrix;
use silab_core::noise_field::{derive_seed, simulate, simulate_deterministic, Field, GridSpec, Observation};
use silab_core::oracle::BiasProfile;
use silab_core::report::{parse_simple, CsvTable};
use silab_core::risk::log_log_fit;
use silab_core::selector::bandwidth_grid;
use silab_core::signals::{hypothesis_family, make_hoelder, HoelderSpec};
use silab_core::ProductKernel;

fn profile() -> &'static BiasProfile {
    static P: OnceLock<BiasProfile> = OnceLock::new();
    P.get_or_init(|| {
        let link = make_hoelder(&HoelderSpec::cusp(0.5, 1.0)).unwrap();
        BiasProfile::with_range(make_default_kernel(), link, 2.0, Execution::Sequential)
    })
}

fn constant_obs() -> &'static Observation {
    static O: OnceLock<Observation> = OnceLock::new();
    O.get_or_init(|| simulate_deterministic(&Field::constant(-1.3), GridSpec::with_n(128).unwrap()))
}

fn angle() -> impl Strategy<Value = Direction> {
    (0.0..std::f64::consts::TAU).prop_map(Direction::from_angle)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn single_matrix_has_det_one_over_h(theta in angle(), k in 0.0..14.0f64) {
        let h = 2f64.powf(-k);
        prop_assert!((matrix_single(&theta, h).det() * h - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn pair_matrix_det_follows_the_angle(theta in angle(), nu in angle(), k in 0.0..14.0f64) {
        let h = 2f64.powf(-k);
        let d = matrix_pair(&theta, &nu, h).det() * h;
        prop_assert!((0.25..=0.5).contains(&d));
        let expected = 0.5 / (1.0 + theta.dot(&nu).abs());
        prop_assert!((d - expected).abs() <= 1e-12);
    }

    #[test]
    fn pair_matrix_is_symmetric_in_its_directions(theta in angle(), nu in angle()) {
        let a = matrix_pair(&theta, &nu, 0.25).canonical();
        let b = matrix_pair(&nu, &theta, 0.25).canonical();
        prop_assert_eq!(a.key(), b.key());
    }

    #[test]
    fn constant_signal_is_reproduced(theta in angle(), k in 0.0..4.0f64, x1 in -0.5..0.5f64, x2 in -0.5..0.5f64) {
        let h = 2f64.powf(-k);
        let v = estimate(constant_obs(), &ProductKernel::default(), &theta, h, [x1, x2]);
        prop_assert!((v + 1.3).abs() <= 1e-10);
    }

    #[test]
    fn bias_profile_is_monotone_in_h(z in -1.5..1.5f64, a in 0.0..10.0f64, b in 0.0..10.0f64) {
        let p = profile();
        let (lo, hi) = (2f64.powf(-a.max(b)), 2f64.powf(-a.min(b)));
        prop_assert!(p.delta(lo, z) <= p.delta(hi, z) + 1e-15);
    }

    #[test]
    fn delta_star_dominates(y in -1.0..1.0f64, k in 0.0..10.0f64) {
        let p = profile();
        let h = 2f64.powf(-k);
        let s = p.delta_star(h, y);
        prop_assert!(s >= p.delta(h, y));
        prop_assert!(s >= p.maximal_delta(h, y));
    }

    #[test]
    fn bandwidth_grid_is_dyadic_and_floored(e in 0.001..0.36f64) {
        let g = bandwidth_grid(e);
        prop_assert_eq!(g[0], 1.0);
        for w in g.windows(2) {
            prop_assert_eq!(w[1] * 2.0, w[0]);
        }
        prop_assert!(*g.last().unwrap() >= e * e);
        prop_assert!(g.last().unwrap() * 0.5 < e * e);
    }

    #[test]
    fn power_laws_are_recovered(slope in -2.0..2.0f64, c in 0.1..10.0f64) {
        let xs: Vec<f64> = (1..7).map(|k| 2f64.powi(-k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| c * x.powf(slope)).collect();
        let (s, i, res) = log_log_fit(&xs, &ys).unwrap();
        prop_assert!((s - slope).abs() < 1e-9);
        prop_assert!((i - c.ln()).abs() < 1e-9);
        prop_assert!(res < 1e-9);
    }

    #[test]
    fn csv_round_trips(cells in proptest::collection::vec("[a-z0-9._-]{1,8}", 3)) {
        let mut t = CsvTable::new(vec!["k=v".into()], &["a", "b", "c"]);
        t.push(cells.clone());
        let back = parse_simple(&t.render());
        prop_assert_eq!(back, t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn simulation_is_seed_deterministic(master in any::<u64>(), i in 0u64..1000) {
        let grid = GridSpec::with_n(32).unwrap();
        let seed = derive_seed(master, i);
        let a = simulate(&Field::zero(), 0.1, grid, seed).unwrap();
        let b = simulate(&Field::zero(), 0.1, grid, seed).unwrap();
        prop_assert_eq!(&a, &b);
        let c = simulate(&Field::zero(), 0.1, grid, derive_seed(master, i + 1)).unwrap();
        prop_assert_ne!(a.increments(), c.increments());
    }

    #[test]
    fn gram_matrix_is_symmetric_with_nonnegative_diagonal(k in 5.0..7.0f64) {
        let fam = hypothesis_family(1.0, 1.0, 2f64.powf(-k), 0.5, &[0.0, 0.0], 2).unwrap();
        let g = gram_matrix(&fam, 128, Execution::Sequential);
        let n = fam.n;
        for i in 0..n {
            prop_assert!(g[i * n + i] >= 0.0);
            for j in 0..n {
                prop_assert!((g[i * n + j] - g[j * n + i]).abs() <= 1e-15 * g[i * n + i].max(1e-30));
            }
        }
    }
}
