use crate::couplings::{binomial_coupled_density, normal_quantile, FmTable, Gaussian};
use crate::metrics::{gaussian_pair_hellinger_sq, hellinger_sq};
use crate::transforms::{sigma, simulate_white_noise_from_means};
use crate::{
    analyze_path, count_pyramid, forward_map, inverse_map, make_density, reconstruct_path,
    CountPyramid, DensitySpec, DitherStream, DyadicIndex, FamilySpec, PointProcessSample,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn levels() -> impl Strategy<Value = (u32, u32)> {
    (0u32..5).prop_flat_map(|k0| (Just(k0), k0 + 1..=9))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pyramid_levels_sum_to_parents(
        points in prop::collection::vec(0.0f64..1.0, 0..400),
        (k0, k1) in levels(),
    ) {
        let sample = PointProcessSample::new(points).unwrap();
        let p = count_pyramid(&sample, k0, k1).unwrap();
        prop_assert!(p.validate().is_ok());
        prop_assert_eq!(p.total(), sample.count as u64);
        for k in k0..k1 {
            let (coarse, fine) = (p.level(k), p.level(k + 1));
            for (l, &c) in coarse.iter().enumerate() {
                prop_assert_eq!(c, fine[2 * l] + fine[2 * l + 1]);
            }
        }
    }

    #[test]
    fn inverse_recovers_counts(
        finest in prop::collection::vec(0u64..40, 512),
        (k0, k1) in levels(),
        seed in any::<u64>(),
        n in 1u64..5000,
    ) {
        let cells = 1usize << k1;
        let counts: Vec<u64> = finest[..cells].to_vec();
        let pyramid = CountPyramid::from_finest(k0, k1, counts).unwrap();
        let (stack, fwd) = forward_map(&pyramid, &DitherStream::new(seed, 0), n).unwrap();
        prop_assert!(fwd.is_clean());
        prop_assert!(stack.validate().is_ok());
        let (back, inv) = inverse_map(&stack).unwrap();
        prop_assert!(inv.is_clean());
        prop_assert_eq!(back, pyramid);
    }

    #[test]
    fn analyze_inverts_reconstruct(
        seed in any::<u64>(),
        (k0, k1) in levels(),
        n in 1u64..100_000,
    ) {
        let means = vec![1.0; 1 << k1];
        let path = simulate_white_noise_from_means(&means, n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let stack = analyze_path(&path, k0).unwrap();
        let back = reconstruct_path(&stack).unwrap();
        prop_assert_eq!(back.k1, path.k1);
        for (a, b) in back.averages.iter().zip(&path.averages) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn sigma_doubles_per_two_levels(k in 0u32..30, n in 1u64..u32::MAX as u64) {
        let ratio = sigma(k + 1, n) / sigma(k, n);
        prop_assert!((ratio - std::f64::consts::SQRT_2).abs() <= 4.0 * f64::EPSILON);
        prop_assert!((sigma(k, n) * sigma(k, n) * 4.0 * n as f64 - (k as f64).exp2()).abs() <= 1e-12 * (k as f64).exp2());
    }

    #[test]
    fn hellinger_in_unit_range(
        m1 in -5.0f64..5.0, m2 in -5.0f64..5.0,
        s1 in 0.2f64..3.0, s2 in 0.2f64..3.0,
    ) {
        let closed = gaussian_pair_hellinger_sq(m1, s1, m2, s2);
        prop_assert!((0.0..=2.0).contains(&closed));
        let quad = hellinger_sq(&Gaussian::new(m1, s1), &Gaussian::new(m2, s2)).unwrap();
        prop_assert!((0.0..=2.0).contains(&quad));
        prop_assert!((quad - closed).abs() <= 1e-8);
    }

    #[test]
    fn binomial_hellinger_in_unit_range(m in 0u64..200, p in 0.05f64..0.95, beta in -4.0f64..4.0) {
        let g = binomial_coupled_density(m, p).unwrap();
        let h = hellinger_sq(&g, &Gaussian::new(beta, 1.0)).unwrap();
        prop_assert!((0.0..=2.0 + 1e-12).contains(&h));
    }

    #[test]
    fn quantile_is_monotone(a in 1e-300f64..1.0, b in 1e-300f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(normal_quantile(lo).value <= normal_quantile(hi).value);
    }

    #[test]
    fn coupled_normal_is_odd(m in 0u64..3000, frac in 0.0f64..1.0, r_bits in 0u32..(1 << 20)) {
        let t = FmTable::new(m);
        let j = ((m as f64 + 1.0) * frac).floor().min(m as f64) as u64;
        let r = r_bits as f64 / (1u64 << 20) as f64;
        let z = t.coupled_normal(j, r);
        let mirrored = t.coupled_normal(m - j, 1.0 - r);
        prop_assert_eq!(z.saturated, mirrored.saturated);
        if !z.saturated {
            prop_assert_eq!(z.value, -mirrored.value);
        }
    }

    #[test]
    fn boundaries_are_odd(m in 1u64..3000) {
        let t = FmTable::new(m);
        for j in 1..=m {
            prop_assert_eq!(t.boundary(j), -t.boundary(m + 1 - j));
        }
    }

    #[test]
    fn cell_means_and_jensen_gap(level in 0u32..12, frac in 0.0f64..1.0, amp in -0.45f64..0.45) {
        let f = make_density(&DensitySpec::new(
            FamilySpec::Fourier { coefficients: vec![[1.0, 0.0], [amp / 2.0, 0.0]] },
            0.9 * (1.0 - amp.abs()),
        ))
        .unwrap();
        let position = ((frac * (level as f64).exp2()) as u64).min((1u64 << level) - 1);
        let idx = DyadicIndex::new(level, position).unwrap();
        prop_assert!(f.jensen_gap(idx).unwrap() >= 0.0);
        let (left, right) = idx.children();
        let sum = f.integrate_cell(left) + f.integrate_cell(right);
        prop_assert!((sum - f.integrate_cell(idx)).abs() <= 1e-15);
    }
}
