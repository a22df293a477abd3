use lpsq_core::corpus;
use lpsq_core::euclid::{
    self, euclid_square_function, nontangential_max, poisson_extension, rough_project,
    BandlimitedFn, ConeParams,
};
use lpsq_core::hardy::{analytic_projection, conjugate_function};
use lpsq_core::kernels::{diag_embed, pichorides_fn};
use lpsq_core::multipliers::{block_decomposition, delta_project, square_function};
use lpsq_core::orlicz::{
    khintchine_ratio, orlicz_norm, weak_quasinorm, KhintchineMode, OrliczParams,
};
use lpsq_core::{GridFunction, TrigPoly};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn l2_grid(g: &GridFunction) -> f64 {
    g.lp_norm(2.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn synthesize_analyze_round_trip(seed in any::<u64>(), dim in 1usize..=2) {
        let f = corpus::random_poly(&mut rng(seed), dim, 7, 12).unwrap();
        let g = f.synthesize(&vec![16; dim]).unwrap();
        prop_assert!(g.analyze().prune(1e-12).max_coeff_diff(&f) < 1e-10);
    }

    #[test]
    fn plancherel(seed in any::<u64>(), dim in 1usize..=3) {
        let f = corpus::random_poly(&mut rng(seed), dim, 5, 10).unwrap();
        let g = f.synthesize(&vec![16; dim]).unwrap();
        let a = l2_grid(&g);
        let b = f.coefficient_l2();
        prop_assert!((a - b).abs() <= 1e-10 * b.max(1.0));
    }

    #[test]
    fn blocks_reconstruct_and_are_orthogonal(seed in any::<u64>(), dim in 1usize..=2) {
        let f = corpus::random_poly(&mut rng(seed), dim, 40, 25).unwrap();
        let blocks = block_decomposition(&f);
        let mut sum = TrigPoly::zero(dim);
        let mut energy = 0.0;
        for piece in blocks.values() {
            sum = &sum + piece;
            energy += piece.coefficient_l2().powi(2);
        }
        prop_assert!(sum.max_coeff_diff(&f) < 1e-12);
        let total = f.coefficient_l2().powi(2);
        prop_assert!((energy - total).abs() <= 1e-10 * total.max(1.0));
    }

    #[test]
    fn delta_projection_is_idempotent(seed in any::<u64>(), k in -6i32..=6) {
        let f = corpus::random_poly(&mut rng(seed), 1, 64, 30).unwrap();
        let once = delta_project(&f, k, 0).unwrap();
        let twice = delta_project(&once, k, 0).unwrap();
        prop_assert!(once.max_coeff_diff(&twice) < 1e-15);
    }

    #[test]
    fn square_function_has_l2_norm_of_f(seed in any::<u64>(), dim in 1usize..=2) {
        let f = corpus::random_poly(&mut rng(seed), dim, 20, 15).unwrap();
        let s = square_function(&f, &vec![64; dim]).unwrap();
        let a = l2_grid(&s);
        let b = f.coefficient_l2();
        prop_assert!((a - b).abs() <= 1e-9 * b.max(1.0));
    }

    #[test]
    fn khintchine_p2_is_one(seed in any::<u64>(), dim in 1usize..=2) {
        let a = corpus::random_rademacher(&mut rng(seed), dim, 2, 5).unwrap();
        let r = khintchine_ratio(&a, 2.0, KhintchineMode::Exact).unwrap();
        prop_assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orlicz_norm_is_homogeneous(seed in any::<u64>(), c in 0.1f64..10.0, r in 1.0f64..3.0) {
        let f = corpus::random_poly(&mut rng(seed), 1, 10, 8).unwrap();
        let g = f.synthesize(&[64]).unwrap();
        let params = OrliczParams::new(r);
        let a = orlicz_norm(&g, &params).unwrap();
        let b = orlicz_norm(&g.map(|z| z * c), &params).unwrap();
        prop_assert!((b - c * a).abs() <= 1e-8 * (c * a));
    }

    #[test]
    fn weak_norm_is_below_l1(seed in any::<u64>(), dim in 1usize..=2) {
        let f = corpus::random_poly(&mut rng(seed), dim, 8, 10).unwrap();
        let g = f.synthesize(&vec![32; dim]).unwrap();
        prop_assert!(weak_quasinorm(&g) <= g.lp_norm(1.0).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn conjugate_function_preserves_mean_free_l2(seed in any::<u64>()) {
        let f = corpus::random_poly(&mut rng(seed), 1, 30, 12).unwrap();
        let f0 = f.filter(|n, _| n[0] != 0);
        let h = conjugate_function(&f0).unwrap();
        prop_assert!((h.coefficient_l2() - f0.coefficient_l2()).abs() < 1e-12);
        let p = analytic_projection(&f).unwrap();
        prop_assert!(p.is_analytic());
    }

    #[test]
    fn rough_projection_is_idempotent(seed in any::<u64>(), k in -3i32..=2) {
        let f = corpus::bandlimited_bumps(&mut rng(seed), 1, 32.0, 1024, false).unwrap();
        let once = rough_project(&f, k, 0).unwrap();
        let twice = rough_project(&once, k, 0).unwrap();
        prop_assert!(once.grid().max_abs_diff(twice.grid()) < 1e-12);
    }
}

#[test]
fn diagonal_embedding_matches_one_dimensional_values() {
    let f = pichorides_fn(2, 1).unwrap();
    for d in 1..=3 {
        let g = diag_embed(&f, d).unwrap();
        for (n, c) in f.iter() {
            assert_eq!(g.coeff(&vec![n[0]; d]), c);
        }
        assert_eq!(g.len(), f.len());
    }
}

#[test]
fn euclid_square_function_preserves_l2_for_mean_free_input() {
    let mut r = rng(21);
    for _ in 0..10 {
        let f = corpus::bandlimited_bumps(&mut r, 1, 32.0, 2048, false).unwrap();
        let s = euclid_square_function(&f).unwrap();
        let a = f.lp_norm(2.0).unwrap();
        let b = s.lp_norm(2.0).unwrap();
        assert!((a - b).abs() < 1e-9 * a, "{a} {b}");
    }
}

#[test]
fn nontangential_max_dominates_smallest_height() {
    let mut r = rng(33);
    let cone = ConeParams::new(1e-3, 4.0, 8, 2).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let f = corpus::bandlimited_bumps(&mut r, 1, 32.0, 1024, true).unwrap();
        let n = nontangential_max(&f, &cone).unwrap();
        let u = poisson_extension(&f, cone.heights()[0]).unwrap();
        let tol = 1e-12 * u.grid().sup_norm();
        let below = n
            .samples()
            .iter()
            .zip(u.samples())
            .all(|(a, b)| a.norm() >= b.norm() - tol);
        assert!(below);
        for p in [1.2, 1.5, 2.0] {
            let ratio = n.lp_norm(p).unwrap() / f.lp_norm(p).unwrap();
            assert!(ratio > 0.9, "{ratio}");
            worst = worst.max(ratio);
        }
    }
    println!("worst ratio {worst}");
    assert!(worst < 1.5, "{worst}");
}

#[test]
fn bandlimited_json_round_trip() {
    let f = corpus::bandlimited_bumps(&mut rng(5), 1, 16.0, 256, false).unwrap();
    let g = BandlimitedFn::from_json(&f.to_json()).unwrap();
    assert!(f.grid().max_abs_diff(g.grid()) < 1e-12);
    assert_eq!(euclid::rough_block(1.5), Some(0));
}

#[test]
fn json_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let f = corpus::random_poly(&mut rng(8), 2, 6, 9).unwrap();
    let path = dir.path().join("f.json");
    f.write_json(&path).unwrap();
    assert_eq!(TrigPoly::read_json(&path).unwrap(), f);

    let b = corpus::bandlimited_bumps(&mut rng(9), 1, 16.0, 256, true).unwrap();
    let path = dir.path().join("b.json");
    b.write_json(&path).unwrap();
    let c = BandlimitedFn::read_json(&path).unwrap();
    assert!(b.grid().max_abs_diff(c.grid()) < 1e-12);
}
