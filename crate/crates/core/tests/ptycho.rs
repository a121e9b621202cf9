use num_complex::Complex64;
use pftycho::field::{crop_centered, fast_fft2, ComplexField, RealField};
use pftycho::pft::pft_plan_2d;
use pftycho::ptycho::*;
use pftycho::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_object(n: usize, seed: u64) -> ComplexField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexField::from_fn(n, n, |_, _| Complex64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.5)))
}

#[test]
fn grid_scan_examples() {
    let g = grid_scan(512, 256, 128).unwrap();
    assert_eq!(g.len(), 9);
    assert_eq!(&g.offsets()[..4], &[(0, 0), (128, 0), (256, 0), (256, 128)]);
    assert_eq!(g.offsets()[6], (0, 256));
    assert_eq!(g.frame_shape(), (512, 512));
    assert!(g.mask_field().data().iter().all(|&v| v == 1.0));
    assert_eq!(g.uncovered_object_pixels(), 0);
    assert!(g.coverage().data().iter().all(|&c| c >= 1.0));
    for w in 0..8 {
        assert!((g.overlap_fraction(w, w + 1) - 0.5).abs() < 1e-12);
    }

    let big = grid_scan(16384, 8192, 4096).unwrap();
    assert_eq!(big.len(), 9);
    assert_eq!(big.uncovered_object_pixels(), 0);

    let one = grid_scan(64, 64, 64).unwrap();
    assert_eq!((one.len(), one.window_shape()), (1, (64, 64)));

    assert!(matches!(grid_scan(512, 256, 100), Err(Error::InvalidArgument(_))));
    assert!(matches!(grid_scan(512, 600, 100), Err(Error::InvalidArgument(_))));
    assert!(matches!(grid_scan(512, 128, 256), Err(Error::InvalidArgument(_))));
}

#[test]
fn circular_scan_small_geometry() {
    let c = circular_scan(512, 175, 150).unwrap();
    assert_eq!(c.len(), 16);
    assert_eq!(c.window_shape(), (351, 351));
    assert_eq!(c.uncovered_object_pixels(), 0);
    // row-wise raster, reversing direction on each row
    let o = c.offsets();
    assert!(o[0].1 < o[1].1 && o[0].0 == o[3].0 && o[4].1 > o[5].1 && o[4].0 > o[0].0);
    assert_eq!(o[3].1, o[4].1);
    for w in [0usize, 1, 2, 4] {
        let f = c.overlap_fraction(w, w + 1);
        assert!((f - 0.5).abs() <= 0.05, "overlap {f}");
    }
    let padded = c.clone().pad_to_multiple(64).unwrap();
    assert_eq!(padded.frame_shape(), (832, 832));
    assert_eq!(padded.uncovered_object_pixels(), 0);
    let (oi, _) = padded.object_offset();
    assert!(oi > 0 && oi + 512 <= 832);
    // coverage from the lattice shortcut agrees with brute force
    let cov = padded.coverage();
    let obj = padded.extract_object(&cov).unwrap();
    assert!(obj.data().iter().all(|&v| v >= 1.0));
}

#[test]
fn circular_scan_other_geometries() {
    let large = circular_scan(8200, 2553, 2188).unwrap();
    assert_eq!(large.len(), 16);
    assert_eq!(large.window_shape(), (5107, 5107));
    let f = large.overlap_fraction(0, 1);
    assert!((f - 0.5).abs() <= 0.05, "overlap {f}");

    // proportionally scaled radius and shift need a denser raster
    let scaled = circular_scan(512, 117, 100).unwrap();
    assert_eq!(scaled.len(), 36);

    let single = circular_scan(64, 60, 64).unwrap();
    assert_eq!(single.len(), 1);
    assert_eq!(single.uncovered_object_pixels(), 0);

    assert!(matches!(circular_scan(512, 40, 150), Err(Error::InvalidArgument(_))));
}

#[test]
fn gaussian_probe_values() {
    let p = gaussian_probe((351, 351), 1e6).unwrap();
    assert!(p.data().iter().all(|c| c.re >= 0.99999 && c.re <= 1.0 && c.im == 0.0));
    let flat = gaussian_probe((9, 9), 1e300).unwrap();
    assert!(flat.data().iter().all(|c| *c == Complex64::new(1.0, 0.0)));
    let g = gaussian_probe((101, 101), 50.0).unwrap();
    assert!((g[(50, 50)].re / g[(50, 100)].re - 0.5f64.exp()).abs() < 1e-12);
    assert!(gaussian_probe((3, 3), 0.0).is_err());
}

#[test]
fn identity_probe_exit_wave_is_the_patch() {
    let g = grid_scan(64, 32, 16).unwrap();
    let z = random_object(64, 1);
    let w = g.exit_wave(&z, &identity_probe((32, 32)), 4).unwrap();
    let (r0, c0) = g.offsets()[4];
    for i in 0..64 {
        for j in 0..64 {
            let inside = (r0..r0 + 32).contains(&i) && (c0..c0 + 32).contains(&j);
            assert_eq!(w[(i, j)], if inside { z[(i, j)] } else { Complex64::new(0.0, 0.0) });
        }
    }
}

#[test]
fn simulate_trivial_cases() {
    let g = grid_scan(64, 32, 16).unwrap();
    let probe = identity_probe((32, 32));
    let zero = simulate(&ComplexField::zeros(64, 64), &g, &probe, None).unwrap();
    assert_eq!(zero.len(), 9);
    assert!(zero.amplitudes.iter().all(|d| d.data().iter().all(|&v| v == 0.0)));
    let crops = crop_measurements(&zero, 8, 8).unwrap();
    assert!(crops.crops.unwrap().data.iter().all(|d| d.data().iter().all(|&v| v == 0.0)));

    let full = grid_scan(32, 32, 32).unwrap();
    let z = random_object(32, 2);
    let ms = simulate(&z, &full, &identity_probe((32, 32)), None).unwrap();
    let expect = fast_fft2(&z).unwrap().abs();
    assert!(ms.amplitudes[0].data().iter().zip(expect.data()).all(|(a, b)| (a - b).abs() < 1e-12));

    assert!(matches!(simulate(&random_object(48, 0), &g, &probe, None), Err(Error::InvalidArgument(_))));
    assert!(simulate(&z, &full, &identity_probe((16, 16)), None).is_err());
}

#[test]
fn poisson_noise_is_seeded() {
    let g = grid_scan(64, 32, 16).unwrap();
    let probe = identity_probe((32, 32));
    let z = random_object(64, 3);
    let noise = |seed| Some(PoissonNoise { scale: 10.0, seed });
    let a = simulate(&z, &g, &probe, noise(7)).unwrap();
    let b = simulate(&z, &g, &probe, noise(7)).unwrap();
    let c = simulate(&z, &g, &probe, noise(8)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.amplitudes, c.amplitudes);
    assert!(a.amplitudes.iter().all(|d| d.data().iter().all(|&v| v >= 0.0)));
    // at high photon counts the noise averages out
    let clean = simulate(&z, &g, &probe, None).unwrap();
    let bright = simulate(&z, &g, &probe, Some(PoissonNoise { scale: 1e8, seed: 1 })).unwrap();
    let num: f64 = bright.amplitudes.iter().zip(&clean.amplitudes).map(|(x, y)| x.data().iter().zip(y.data()).map(|(p, q)| (p - q).powi(2)).sum::<f64>()).sum();
    let den: f64 = clean.amplitudes.iter().map(|y| y.norm().powi(2)).sum();
    assert!((num / den).sqrt() < 1e-2);
    assert!(simulate(&z, &g, &probe, Some(PoissonNoise { scale: 0.0, seed: 1 })).is_err());
}

#[test]
fn crops_follow_field_conventions() {
    let g = grid_scan(64, 32, 16).unwrap();
    let z = random_object(64, 4);
    let ms = simulate(&z, &g, &identity_probe((32, 32)), None).unwrap();
    let half = crop_measurements(&ms, 32, 32).unwrap();
    let c = half.crops.as_ref().unwrap();
    assert_eq!(c.half_widths, (32, 32));
    assert_eq!(c.data[0], crop_centered(&ms.amplitudes[0], 32, 32).unwrap());
    // a half-size crop is the fully shifted spectrum
    assert_eq!(c.data[3][(32, 32)], ms.amplitudes[3][(0, 0)]);
    assert_eq!(c.data[3][(0, 0)], ms.amplitudes[3][(32, 32)]);
    assert!(crop_measurements(&ms, 33, 8).is_err());
}

#[test]
fn crops_agree_with_partial_transform() {
    let g = grid_scan(128, 64, 32).unwrap();
    let z = random_object(128, 5);
    let probe = gaussian_probe((64, 64), 40.0).unwrap();
    let ms = crop_measurements(&simulate(&z, &g, &probe, None).unwrap(), 8, 8).unwrap();
    let plan = pft_plan_2d(128, 128, 8, 8, 16, 16, 1e-7).unwrap();
    for j in 0..g.len() {
        let wave = g.exit_wave(&z, &probe, j).unwrap();
        let approx = plan.apply(&wave).unwrap().abs();
        let tol = 2e-7 * wave.l1_norm();
        let crop = &ms.crops.as_ref().unwrap().data[j];
        for (a, b) in approx.data().iter().zip(crop.data()) {
            assert!((a - b).abs() <= tol);
        }
    }
}

#[test]
fn measurement_set_roundtrip() {
    let dir = std::env::temp_dir().join(format!("pftycho-ms-{}", std::process::id()));
    let g = grid_scan(32, 16, 8).unwrap();
    let ms = simulate(&random_object(32, 6), &g, &identity_probe((16, 16)), Some(PoissonNoise { scale: 100.0, seed: 3 })).unwrap();
    let ms = crop_measurements(&ms, 4, 4).unwrap();
    ms.save(&dir).unwrap();
    assert_eq!(MeasurementSet::load(&dir).unwrap(), ms);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn phantom_objects() {
    let a = phantom_image(64, 48, 1);
    assert_eq!(a.shape(), (64, 48));
    let (lo, hi) = a.min_max();
    assert_eq!((lo, hi), (0.0, 1.0));
    assert_eq!(a, phantom_image(64, 48, 1));
    assert_ne!(a, phantom_image(64, 48, 2));

    let z = phantom_object(64, 9);
    assert!(z.abs().data().iter().all(|&m| m <= 1.0 + 1e-12));
    assert!(z.arg().data().iter().all(|&p| (-1e-12..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&p)));

    let bad = RealField::filled(4, 4, 1.5);
    assert!(object_from_images(&bad, &RealField::zeros(4, 4)).is_err());
    assert_eq!(normalize(&RealField::filled(2, 2, 3.0)), RealField::zeros(2, 2));
}
