use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use salsi_core::saliency::{
    build_energy_grids, center_surround, compute_local_spectrum, decompose_spectrum, fuse_and_upsample,
    spectral_energy, CellGrid, LocalSpectrum, SpectralSplit,
};
use salsi_core::{compute_saliency, generate, Axis, Dims, DomeSpec, PipelineConfig, Volume3D};
use salsi_oracles::{naive_center_surround, naive_dft3, shifted_frequency};

fn random_window(rng: &mut ChaCha8Rng, l: usize) -> Vec<f64> {
    (0..l * l * l).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn fft_matches_naive_dft() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for l in [2, 3, 4, 5, 8] {
        for _ in 0..5 {
            let w = random_window(&mut rng, l);
            let fast = compute_local_spectrum(&w, l).unwrap();
            let slow = naive_dft3(&w, l);
            let err = fast
                .coeffs()
                .iter()
                .zip(&slow)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "L={l} err={err}");
        }
    }
}

#[test]
fn parseval_with_forward_normalization() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for l in [4, 6, 8] {
        let w = random_window(&mut rng, l);
        let energy = spectral_energy(&compute_local_spectrum(&w, l).unwrap());
        let direct = w.iter().map(|x| x * x).sum::<f64>() / (l * l * l) as f64;
        assert!((energy - direct).abs() / direct < 1e-9);
    }
}

#[test]
fn split_weights_follow_formula() {
    for l in [4, 5, 8] {
        for axis in Axis::ALL {
            let split = SpectralSplit::new(l, axis);
            let t = axis.position();
            for u in 0..l {
                for v in 0..l {
                    for w in 0..l {
                        let f = [u, v, w].map(|i| shifted_frequency(i, l));
                        let r2: f64 = f.iter().map(|x| x * x).sum();
                        let (wt, ws) = split.weights(u, v, w);
                        if r2 == 0.0 {
                            assert_eq!((wt, ws), (0.0, 0.0));
                            continue;
                        }
                        let plane2 = r2 - f[t] * f[t];
                        assert!((wt - f[t] / r2.sqrt()).abs() < 1e-15);
                        assert!((ws - (plane2 / r2).sqrt()).abs() < 1e-15);
                        assert!((wt * wt + ws * ws - 1.0).abs() < 1e-15);
                    }
                }
            }
        }
    }
}

#[test]
fn decomposition_preserves_non_dc_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for l in [4, 8] {
        let coeffs: Vec<Complex64> = (0..l * l * l)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let f = LocalSpectrum::new(l, coeffs).unwrap();
        let (ft, fs) = decompose_spectrum(&f, Axis::Inline);
        let split: f64 = ft.coeffs()[1..]
            .iter()
            .zip(&fs.coeffs()[1..])
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .sum();
        let whole: f64 = f.coeffs()[1..].iter().map(|c| c.norm_sqr()).sum();
        assert!((split - whole).abs() / whole < 1e-9);
        assert_eq!(ft.coeffs()[0], Complex64::new(0.0, 0.0));
        assert_eq!(fs.coeffs()[0], Complex64::new(0.0, 0.0));
    }
}

#[test]
fn remainder_windows_use_reflection() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dims = Dims::new(9, 8, 8);
    let v = Volume3D::new(dims, (0..dims.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    // rows 9, 10, 11 mirror rows 8, 7, 6
    let padded = Volume3D::from_fn(Dims::new(12, 8, 8), |m, n, k| {
        let src = if m < 9 { m } else { 17 - m };
        v.get(src, n, k)
    })
    .unwrap();
    for axis in Axis::ALL {
        let (et, es) = build_energy_grids(&v, 4, axis).unwrap();
        let (pt, ps) = build_energy_grids(&padded, 4, axis).unwrap();
        assert_eq!(et.dims(), Dims::new(3, 2, 2));
        assert_eq!(et, pt);
        assert_eq!(es, ps);
    }
}

#[test]
fn energy_grid_cells_match_direct_windows() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let dims = Dims::new(8, 12, 4);
    let v = Volume3D::new(dims, (0..dims.len()).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap();
    let (et, es) = build_energy_grids(&v, 4, Axis::Inline).unwrap();
    for cm in 0..2 {
        for cn in 0..3 {
            let mut w = Vec::new();
            for m in 0..4 {
                for n in 0..4 {
                    for k in 0..4 {
                        w.push(v.get(cm * 4 + m, cn * 4 + n, k));
                    }
                }
            }
            let f = compute_local_spectrum(&w, 4).unwrap();
            let (ft, fs) = decompose_spectrum(&f, Axis::Inline);
            let (a, b) = (spectral_energy(&ft), spectral_energy(&fs));
            assert!((et.get(cm, cn, 0) - a).abs() <= 1e-12 * a.max(1e-30));
            assert!((es.get(cm, cn, 0) - b).abs() <= 1e-12 * b.max(1e-30));
        }
    }
}

#[test]
fn center_surround_matches_naive_on_odd_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for dims in [Dims::new(1, 1, 5), Dims::new(2, 3, 1), Dims::new(4, 5, 6), Dims::new(7, 2, 3)] {
        let values: Vec<f64> = (0..dims.len()).map(|_| rng.gen_range(0.0..3.0)).collect();
        let g = CellGrid::new(dims, 8, values.clone()).unwrap();
        let expect = naive_center_surround(&values, (dims.m, dims.n, dims.k));
        assert_eq!(center_surround(&g).values(), expect.as_slice());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn upsampled_windows_are_piecewise_constant(
        cm in 1usize..4, cn in 1usize..4, ck in 1usize..4, l in 2usize..5, seed in any::<u64>()
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells = Dims::new(cm, cn, ck);
        let a: Vec<f64> = (0..cells.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let b: Vec<f64> = (0..cells.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let fused: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * x + 0.5 * y).collect();
        let lo = fused.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = fused.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let st = CellGrid::new(cells, l, a).unwrap();
        let ss = CellGrid::new(cells, l, b).unwrap();
        let target = Dims::new(cm * l, cn * l, ck * l);
        let s = fuse_and_upsample(&st, &ss, target).unwrap();
        prop_assert_eq!(s.dims(), target);
        for m in 0..target.m {
            for n in 0..target.n {
                for k in 0..target.k {
                    let f = fused[cells.index(m / l, n / l, k / l)];
                    let expect = if hi > lo { (f - lo) / (hi - lo) } else { 0.0 };
                    prop_assert_eq!(s.volume().get(m, n, k), expect);
                }
            }
        }
    }

    #[test]
    fn saliency_in_unit_range_with_input_dims(
        m in 3usize..14, n in 3usize..14, k in 3usize..14, seed in any::<u64>()
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = Dims::new(m, n, k);
        let v = Volume3D::new(dims, (0..dims.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let cfg = PipelineConfig { window: 4, ..Default::default() };
        let s = compute_saliency(&v, &cfg).unwrap();
        prop_assert_eq!(s.dims(), dims);
        prop_assert!(s.values().iter().all(|x| (0.0..=1.0).contains(x)));
    }
}

#[test]
fn dome_boundary_is_more_salient() {
    let case = generate(&DomeSpec::default()).unwrap();
    let s = compute_saliency(&case.volume, &PipelineConfig::default()).unwrap();
    let (mut band, mut nb, mut rest, mut nr) = (0.0, 0usize, 0.0, 0usize);
    for (&x, &g) in s.values().iter().zip(case.gt_boundary.bits()) {
        if g {
            band += x;
            nb += 1;
        } else {
            rest += x;
            nr += 1;
        }
    }
    let (band, rest) = (band / nb as f64, rest / nr as f64);
    assert!(band > rest, "band {band} vs rest {rest}");
}

#[test]
fn doubling_amplitude_leaves_saliency_unchanged() {
    let case = generate(&DomeSpec { dims: [32, 32, 32], center: [16.0; 3], radii: [9.0, 8.0, 8.0], ..DomeSpec::default() }).unwrap();
    let cfg = PipelineConfig { window: 4, ..Default::default() };
    let a = compute_saliency(&case.volume, &cfg).unwrap();
    let b = compute_saliency(&case.volume.scaled(2.0).unwrap(), &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn worker_count_does_not_change_output() {
    let case = generate(&DomeSpec { dims: [32, 32, 32], center: [16.0; 3], radii: [9.0, 8.0, 8.0], ..DomeSpec::default() }).unwrap();
    let cfg = PipelineConfig { window: 4, ..Default::default() };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| compute_saliency(&case.volume, &cfg).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(8));
}
