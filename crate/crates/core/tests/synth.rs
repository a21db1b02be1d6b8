use salsi_core::synth::{distance_to_ellipsoid, BAND_EPS};
use salsi_core::volume::save_volume_stem;
use salsi_core::{generate, load_volume, DomeSpec};
use salsi_oracles::ellipse_distance;

#[test]
fn fixed_seed_is_bit_identical() {
    let spec = DomeSpec { seed: 42, ..DomeSpec::default() };
    let a = generate(&spec).unwrap();
    let b = generate(&spec).unwrap();
    assert_eq!(a.volume, b.volume);
    let c = generate(&DomeSpec { seed: 43, ..spec }).unwrap();
    assert_ne!(a.volume, c.volume);
    assert_eq!(a.gt_boundary, c.gt_boundary);
}

#[test]
fn samples_survive_the_file_format() {
    let case = generate(&DomeSpec::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_volume_stem(&case.volume, dir.path().join("d")).unwrap();
    let back = load_volume(dir.path().join("d.json"), dir.path().join("d.raw")).unwrap();
    assert_eq!(back.data(), case.volume.data());
}

#[test]
fn band_matches_angular_scan_oracle() {
    // the default dome is a spheroid about the time axis
    let spec = DomeSpec::default();
    assert_eq!(spec.radii[1], spec.radii[2]);
    let case = generate(&spec).unwrap();
    let d = spec.volume_dims();
    let mut count = 0;
    let mut worst: f64 = 0.0;
    let mut memo = std::collections::HashMap::new();
    for m in 0..d.m {
        for n in 0..d.n {
            for k in 0..d.k {
                let x = m as f64 - spec.center[0];
                let rho2 = (n as f64 - spec.center[1]).powi(2) + (k as f64 - spec.center[2]).powi(2);
                // many voxels share a meridian-plane position
                let oracle = *memo
                    .entry((x.abs() as i64, rho2 as i64))
                    .or_insert_with(|| ellipse_distance(spec.radii[0], spec.radii[1], x.abs(), rho2.sqrt()));
                let fast = distance_to_ellipsoid(spec.radii, [x, n as f64 - spec.center[1], k as f64 - spec.center[2]]);
                worst = worst.max((oracle - fast).abs());
                if oracle <= spec.band_half_width + BAND_EPS {
                    count += 1;
                }
            }
        }
    }
    assert!(worst < 1e-8, "max distance disagreement {worst}");
    assert_eq!(case.gt_boundary.count(), count);
}

#[test]
fn triaxial_distance_agrees_with_sampling_bound() {
    // a dense surface sample gives an upper bound that converges from above
    let radii = [7.0, 5.0, 3.0];
    let pts = [[8.0, 1.0, 2.0], [1.0, 1.0, 1.0], [0.0, 6.0, 0.5], [-2.0, 0.0, -4.0], [0.5, 0.0, 0.0]];
    for p in pts {
        let fast = distance_to_ellipsoid(radii, p);
        let mut best = f64::INFINITY;
        let steps = 600;
        for i in 0..=steps {
            let phi = std::f64::consts::PI * i as f64 / steps as f64;
            for j in 0..2 * steps {
                let th = std::f64::consts::PI * j as f64 / steps as f64;
                let q = [radii[0] * phi.sin() * th.cos(), radii[1] * phi.sin() * th.sin(), radii[2] * phi.cos()];
                best = best.min(((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2) + (q[2] - p[2]).powi(2)).sqrt());
            }
        }
        assert!(fast <= best + 1e-12 && best - fast < 1e-3, "{p:?}: {fast} vs {best}");
    }
}

#[test]
fn boundary_shell_is_closed_along_axes() {
    let spec = DomeSpec::default();
    let case = generate(&spec).unwrap();
    let c = spec.center.map(|x| x as usize);
    let d = spec.volume_dims();
    for axis in 0..3 {
        let at = |t: usize| {
            let mut p = c;
            p[axis] = t;
            case.gt_boundary.get(p[0], p[1], p[2])
        };
        let extent = d.as_array()[axis];
        assert!((c[axis]..extent).any(at), "no crossing above centre on axis {axis}");
        assert!((0..=c[axis]).any(at), "no crossing below centre on axis {axis}");
    }
    assert!(case.gt_interior.get(c[0], c[1], c[2]));
    assert!(!case.gt_boundary.get(c[0], c[1], c[2]));
}

#[test]
fn amplitude_step_exceeds_noise() {
    let spec = DomeSpec::default();
    let case = generate(&spec).unwrap();
    let design = spec.design_contrast();
    assert!(design > 4.0 * spec.noise_sigma, "design contrast {design}");

    let (mut inside, mut ni, mut outside, mut no) = (0.0, 0usize, 0.0, 0usize);
    for (i, &v) in case.volume.data().iter().enumerate() {
        if case.gt_interior.bits()[i] {
            inside += v.abs();
            ni += 1;
        } else {
            outside += v.abs();
            no += 1;
        }
    }
    let measured = outside / no as f64 - inside / ni as f64;
    assert!(measured > spec.noise_sigma);
    // noise adds a little magnitude on both sides; the step stays close to design
    assert!((measured - design).abs() < 0.1, "measured {measured} vs design {design}");
}
