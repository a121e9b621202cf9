use num_complex::Complex64;
use pftycho::field::{fast_fft2, fast_ifft2, ComplexField, RealField};
use pftycho::pft::pft_plan_2d;
use pftycho::ptycho::*;
use pftycho::solvers::*;
use pftycho::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexField {
    ComplexField::from_fn(rows, cols, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_probe(shape: (usize, usize), rng: &mut ChaCha8Rng) -> ComplexField {
    ComplexField::from_fn(shape.0, shape.1, |_, _| Complex64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(-1.0..1.0)))
}

/// Small consistent problem: 32² object, 8 windows of 16² on a shift of 8.
fn small_problem(seed: u64) -> (ComplexField, ScanPattern, ComplexField, MeasurementSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = phantom_object(32, seed);
    let pattern = grid_scan(32, 16, 8).unwrap();
    let probe = random_probe(pattern.window_shape(), &mut rng);
    let ms = simulate(&truth, &pattern, &probe, None).unwrap();
    (truth, pattern, probe, ms)
}

fn residual_norm(z: &ComplexField, probe: &ComplexField, pattern: &ScanPattern, d: &RealField, j: usize) -> f64 {
    let x = pattern.exit_wave(z, probe, j).unwrap();
    let p = project_modulus(&x, d).unwrap();
    x.zip_map(&p, |a, b| a - b).unwrap().norm()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn as_real_pairs(f: &ComplexField) -> Vec<f64> {
    f.data().iter().flat_map(|c| [c.re, c.im]).collect()
}

#[test]
fn projection_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = random_field(16, 12, &mut rng);
    let d = fast_fft2(&x).unwrap().abs();
    assert!(project_modulus(&x, &d).unwrap().max_abs_diff(&x).unwrap() < 1e-10);

    let d = RealField::from_fn(16, 12, |_, _| rng.gen_range(0.0..2.0));
    let zero = ComplexField::zeros(16, 12);
    let expect = fast_ifft2(&d.to_complex()).unwrap();
    assert!(project_modulus(&zero, &d).unwrap().max_abs_diff(&expect).unwrap() < 1e-14);

    let out = project_modulus(&x, &d).unwrap();
    let mags = fast_fft2(&out).unwrap().abs();
    for (a, b) in mags.data().iter().zip(d.data()) {
        assert!((a - b).abs() < 1e-12);
    }

    assert!(matches!(project_modulus(&x, &RealField::zeros(16, 16)), Err(Error::InvalidArgument(_))));
}

#[test]
fn truth_is_a_fixed_point() {
    let (truth, pattern, probe, ms) = small_problem(2);
    let z = pattern.embed_object(&truth).unwrap();
    let mut state = ReconState::new(z.clone(), probe.clone(), true);
    for j in 0..pattern.len() {
        pie_object_update(&mut state, &pattern, &ms, j, 1.0).unwrap();
        epie_probe_update(&mut state, &pattern, &ms, j, 1.0).unwrap();
    }
    assert!(state.z.max_abs_diff(&z).unwrap() < 1e-12);
    assert!(state.probe.max_abs_diff(&probe).unwrap() < 1e-12);
    assert!(objective_value(&state, &pattern, &ms).unwrap() <= 1e-18);
}

#[test]
fn zero_steps_change_nothing() {
    let (_, pattern, probe, ms) = small_problem(3);
    let z0 = random_object(32, 32, 3);
    let mut state = ReconState::new(z0.clone(), probe.clone(), true);
    pie_object_update(&mut state, &pattern, &ms, 4, 0.0).unwrap();
    epie_probe_update(&mut state, &pattern, &ms, 4, 0.0).unwrap();
    assert_eq!(state.z, z0);
    assert_eq!(state.probe, probe);

    let ms = crop_measurements(&ms, 4, 4).unwrap();
    let plan = pft_plan_2d(32, 32, 4, 4, 4, 4, 1e-7).unwrap();
    pft_object_update(&mut state, &pattern, &ms, 2, 0.0, &plan).unwrap();
    pft_probe_update(&mut state, &pattern, &ms, 2, 0.0, &plan).unwrap();
    assert_eq!(state.z, z0);
    assert_eq!(state.probe, probe);
}

#[test]
fn probe_and_stage_preconditions() {
    let (_, pattern, probe, ms) = small_problem(4);
    let mut state = ReconState::new(random_object(32, 32, 4), probe, false);
    assert!(matches!(epie_probe_update(&mut state, &pattern, &ms, 0, 1.0), Err(Error::InvalidState(_))));
    let plan = pft_plan_2d(32, 32, 4, 4, 4, 4, 1e-7).unwrap();
    assert!(matches!(pft_object_update(&mut state, &pattern, &ms, 0, 1.0, &plan), Err(Error::InvalidState(_))));
    let cropped = crop_measurements(&ms, 4, 4).unwrap();
    assert!(matches!(pft_probe_update(&mut state, &pattern, &cropped, 0, 1.0, &plan), Err(Error::InvalidState(_))));
    assert!(matches!(pie_object_update(&mut state, &pattern, &ms, 99, 1.0), Err(Error::InvalidArgument(_))));
    let wrong = pft_plan_2d(32, 32, 8, 8, 4, 4, 1e-7).unwrap();
    assert!(pft_object_update(&mut state, &pattern, &cropped, 0, 1.0, &wrong).is_err());
}

#[test]
fn one_object_update_reduces_its_residual() {
    let truth = phantom_object(512, 5);
    let pattern = grid_scan(512, 256, 128).unwrap();
    let probe = identity_probe(pattern.window_shape());
    let ms = simulate(&truth, &pattern, &probe, None).unwrap();
    let mut state = ReconState::new(random_object(512, 512, 5), probe.clone(), false);
    for j in [0, 4, 8] {
        let before = residual_norm(&state.z, &probe, &pattern, &ms.amplitudes[j], j);
        pie_object_update(&mut state, &pattern, &ms, j, 0.1).unwrap();
        let after = residual_norm(&state.z, &probe, &pattern, &ms.amplitudes[j], j);
        assert!(after < before, "window {j}: {after} >= {before}");
    }
}

/// Central differences of `objective_value` with respect to the real and imaginary parts of `field`.
fn numeric_gradient(state: &ReconState, pattern: &ScanPattern, ms: &MeasurementSet, probe_side: bool) -> Vec<f64> {
    let h = 1e-6;
    let n = if probe_side { state.probe.len() } else { state.z.len() };
    let mut grad = Vec::with_capacity(2 * n);
    for k in 0..n {
        for unit in [Complex64::new(h, 0.0), Complex64::new(0.0, h)] {
            let eval = |delta: Complex64| {
                let mut s = state.clone();
                let target = if probe_side { &mut s.probe } else { &mut s.z };
                target.data_mut()[k] += delta;
                objective_value(&s, pattern, ms).unwrap()
            };
            grad.push((eval(unit) - eval(-unit)) / (2.0 * h));
        }
    }
    grad
}

#[test]
fn updates_follow_the_objective_gradient() {
    // One 16×16 window covering the whole object, so the objective has a single term.
    let pattern = grid_scan(16, 16, 16).unwrap();
    for trial in 0..3 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + trial);
        let data_source = random_field(16, 16, &mut rng);
        let probe = random_probe((16, 16), &mut rng);
        let ms = simulate(&data_source, &pattern, &probe, None).unwrap();
        let state = ReconState::new(random_field(16, 16, &mut rng), random_probe((16, 16), &mut rng), true);

        let mut moved = state.clone();
        pie_object_update(&mut moved, &pattern, &ms, 0, 1e-3).unwrap();
        let dir = as_real_pairs(&state.z.zip_map(&moved.z, |a, b| a - b).unwrap());
        let fd = numeric_gradient(&state, &pattern, &ms, false);
        assert!(cosine(&dir, &fd) >= 0.99, "object trial {trial}: {}", cosine(&dir, &fd));

        let mut moved = state.clone();
        epie_probe_update(&mut moved, &pattern, &ms, 0, 1e-3).unwrap();
        let dir = as_real_pairs(&state.probe.zip_map(&moved.probe, |a, b| a - b).unwrap());
        let fd = numeric_gradient(&state, &pattern, &ms, true);
        assert!(cosine(&dir, &fd) >= 0.99, "probe trial {trial}: {}", cosine(&dir, &fd));
    }
}

#[test]
fn pft_update_at_truth_moves_within_the_transform_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let truth = phantom_object(64, 6);
    let pattern = grid_scan(64, 32, 16).unwrap();
    let probe = random_probe(pattern.window_shape(), &mut rng);
    let (m, eps) = (8, 1e-7);
    let ms = crop_measurements(&simulate(&truth, &pattern, &probe, None).unwrap(), m, m).unwrap();
    let plan = pft_plan_2d(64, 64, m, m, 8, 8, eps).unwrap();
    let z = pattern.embed_object(&truth).unwrap();
    let beta_pft = 1.0 / 4096.0;
    let probe_max = probe.data().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut state = ReconState::new(z.clone(), probe.clone(), false);
    for j in 0..pattern.len() {
        let before = state.z.clone();
        let x = pattern.exit_wave(&before, &probe, j).unwrap();
        let residual_bound = 4.0 * eps * x.l1_norm();
        let bound = beta_pft * probe_max * (4 * m * m) as f64 * residual_bound * 1.01;
        pft_object_update(&mut state, &pattern, &ms, j, beta_pft, &plan).unwrap();
        let moved = state.z.max_abs_diff(&before).unwrap();
        assert!(moved <= bound, "window {j}: {moved} > {bound}");
    }
}

#[test]
fn tv_step_examples() {
    let z = phantom_object(24, 7);
    assert_eq!(tv_step(&z, 0.0).unwrap(), z);
    assert!(tv_step(&z, -1.0).is_err());

    let flat = ComplexField::filled(10, 10, Complex64::from_polar(0.7, 0.4));
    assert!(tv_step(&flat, 0.1).unwrap().max_abs_diff(&flat).unwrap() < 1e-12);

    let mag = RealField::from_fn(16, 16, |_, j| if j < 8 { 0.2 } else { 0.9 });
    let phase = RealField::from_fn(16, 16, |i, _| if i < 5 { 0.1 } else { 1.2 });
    let z = ComplexField::from_polar(&mag, &phase).unwrap();
    let stepped = tv_step(&z, 0.05).unwrap();
    assert!(tv_value(&stepped.abs()) < tv_value(&mag));
    assert!(tv_value(&stepped.arg()) < tv_value(&phase));
}

#[test]
fn objective_examples() {
    let (truth, pattern, probe, ms) = small_problem(8);
    let state = ReconState::new(ComplexField::zeros(32, 32), probe.clone(), false);
    let expect: f64 = ms.amplitudes.iter().map(|d| fast_ifft2(&d.to_complex()).unwrap().norm_sqr()).sum::<f64>() / ms.len() as f64;
    let got = objective_value(&state, &pattern, &ms).unwrap();
    assert!((got - expect).abs() <= 1e-12 * expect);

    let z = pattern.embed_object(&truth).unwrap().zip_map(&random_object(32, 32, 8), |a, b| a + 0.3 * b).unwrap();
    let state = ReconState::new(z.clone(), probe.clone(), false);
    let mut total = 0.0;
    for j in 0..pattern.len() {
        let x = pattern.exit_wave(&z, &probe, j).unwrap();
        let p = project_modulus(&x, &ms.amplitudes[j]).unwrap();
        total += x.zip_map(&p, |a, b| a - b).unwrap().norm_sqr();
    }
    total /= pattern.len() as f64;
    let got = objective_value(&state, &pattern, &ms).unwrap();
    assert!((got - total).abs() <= 1e-12 * total, "{got} vs {total}");
}

#[test]
fn convergence_test_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = random_field(8, 8, &mut rng);
    assert!(converged(&a, &a, 1e-30).unwrap());

    let old = ComplexField::filled(4, 4, Complex64::new(1.0, 0.0));
    let new = ComplexField::filled(4, 4, Complex64::new(1.5, 0.0));
    assert!(converged(&new, &old, 0.5).unwrap());
    assert!(!converged(&new, &old, 0.4999).unwrap());

    let b = random_field(8, 8, &mut rng);
    let ratio = a.zip_map(&b, |x, y| x - y).unwrap().norm() / b.norm();
    assert!(converged(&a, &b, ratio * (1.0 + 1e-12)).unwrap());
    assert!(!converged(&a, &b, ratio * (1.0 - 1e-12)).unwrap());

    assert!(!converged(&a, &ComplexField::zeros(8, 8), 1e9).unwrap());
}

#[test]
fn config_validation() {
    assert!(SolverConfig::default().validate().is_ok());
    assert!(SolverConfig { beta: 0.0, ..Default::default() }.validate().is_err());
    assert!(SolverConfig { eps_stop: 0.0, ..Default::default() }.validate().is_err());
    assert!(SolverConfig { lambda_fft: -1.0, ..Default::default() }.validate().is_err());
    let d = SolverConfig::default();
    assert_eq!((d.beta, d.beta_pft, d.gamma_pft, d.eps_pft, d.eps_stop), (10.0, 1e-3, 2e-3, 1e-2, 5e-4));
}

fn small_blind_run() -> (MeasurementSet, ScanPattern, ComplexField, ComplexField, SolverConfig) {
    let truth = phantom_object(64, 10);
    let pattern = grid_scan(64, 32, 16).unwrap();
    let probe = gaussian_probe(pattern.window_shape(), 12.0).unwrap();
    let ms = crop_measurements(&simulate(&truth, &pattern, &probe, None).unwrap(), 8, 8).unwrap();
    let mut cfg = SolverConfig::desk_blind(64 * 64);
    cfg.pft = PftSettings { half_width: 8, p: 8, eps: 1e-7 };
    cfg.max_pft_iters = 4;
    cfg.max_fft_iters = 6;
    cfg.seed = 11;
    (ms, pattern, identity_probe((32, 32)), random_object(64, 64, 10), cfg)
}

fn same_trace(a: &SolveOutcome, b: &SolveOutcome) -> bool {
    let rows = |o: &SolveOutcome| {
        o.trace.rows().iter().map(|r| (r.iteration, r.stage, r.objective.to_bits(), r.metrics)).collect::<Vec<_>>()
    };
    rows(a) == rows(b)
}

#[test]
fn hybrid_without_warm_start_is_vanilla() {
    let (ms, pattern, probe, z0, cfg) = small_blind_run();
    let truth = phantom_object(64, 10);
    let vanilla = vanilla_solve(&ms, &pattern, &probe, &z0, &cfg, Some(&truth)).unwrap();
    let hybrid = hybrid_solve(&ms, &pattern, &probe, &z0, &SolverConfig { max_pft_iters: 0, ..cfg.clone() }, Some(&truth)).unwrap();
    assert!(same_trace(&vanilla, &hybrid));
    assert_eq!(vanilla.state.z, hybrid.state.z);
    assert_eq!(vanilla.state.probe, hybrid.state.probe);
    assert_eq!(hybrid.trace.transition(), None);

    let again = hybrid_solve(&ms, &pattern, &probe, &z0, &cfg, Some(&truth)).unwrap();
    let first = hybrid_solve(&ms, &pattern, &probe, &z0, &cfg, Some(&truth)).unwrap();
    assert!(same_trace(&again, &first));
    assert_eq!(again.state.z, first.state.z);
}

#[test]
fn loose_warm_start_tolerance_stops_after_one_sweep() {
    let (ms, pattern, probe, z0, cfg) = small_blind_run();
    let cfg = SolverConfig { eps_pft: 1e9, order: ProbeOrder::Sequential, ..cfg };
    let out = hybrid_solve(&ms, &pattern, &probe, &z0, &cfg, None).unwrap();
    assert_eq!(out.trace.transition(), Some(1));
    assert_eq!(out.trace.rows()[0].stage, Stage::Pft);
    assert!(out.trace.rows()[1..].iter().all(|r| r.stage == Stage::Fft));

    let one = hybrid_solve(&ms, &pattern, &probe, &z0, &SolverConfig { max_fft_iters: 0, ..cfg.clone() }, None).unwrap();
    let rest = vanilla_solve(&ms, &pattern, &one.state.probe, &one.state.z, &cfg, None).unwrap();
    assert_eq!(rest.state.z, out.state.z);
    assert_eq!(rest.state.probe, out.state.probe);
}

#[test]
fn sweep_budget_and_trace_options() {
    let (ms, pattern, probe, z0, cfg) = small_blind_run();
    let cfg = SolverConfig { sweep_budget: Some(7), trace_objective: false, ..cfg };
    let out = hybrid_solve(&ms, &pattern, &probe, &z0, &cfg, None).unwrap();
    assert_eq!(out.state.iteration, 7);
    assert!(out.trace.rows().iter().all(|r| r.objective.is_nan() && r.metrics.is_none()));
    assert_eq!(out.status, SolveStatus::MaxIterations);
}

#[test]
fn driver_rejects_inconsistent_inputs() {
    let (ms, pattern, probe, z0, cfg) = small_blind_run();
    let bad_cfg = SolverConfig { gamma: -1.0, ..cfg.clone() };
    assert!(hybrid_solve(&ms, &pattern, &probe, &z0, &bad_cfg, None).is_err());
    assert!(hybrid_solve(&ms, &pattern, &ComplexField::zeros(8, 8), &z0, &cfg, None).is_err());
    let mut uncropped = ms.clone();
    uncropped.crops = None;
    assert!(matches!(hybrid_solve(&uncropped, &pattern, &probe, &z0, &cfg, None), Err(Error::InvalidState(_))));
    assert!(vanilla_solve(&uncropped, &pattern, &probe, &z0, &cfg, None).is_ok());
}

#[test]
fn divergence_is_reported() {
    let (ms, pattern, probe, z0, cfg) = small_blind_run();
    let cfg = SolverConfig { gamma: 1e6, beta: 1e6, max_pft_iters: 0, ..cfg };
    let out = vanilla_solve(&ms, &pattern, &probe, &z0, &cfg, None).unwrap();
    assert!(matches!(out.status, SolveStatus::Diverged(_)), "{:?}", out.status);
}

#[test]
fn warm_start_sweeps_reduce_error_at_desk_scale() {
    let truth = phantom_object(512, 12);
    let pattern = grid_scan(512, 256, 128).unwrap();
    let probe = identity_probe(pattern.window_shape());
    let ms = crop_measurements(&simulate(&truth, &pattern, &probe, None).unwrap(), 64, 64).unwrap();
    let mut drops = Vec::new();
    for seed in 0..5 {
        let cfg = SolverConfig {
            max_pft_iters: 10,
            max_fft_iters: 0,
            eps_pft: 1e-12,
            seed,
            trace_objective: false,
            ..SolverConfig::desk_nonblind(512 * 512)
        };
        let z0 = random_object(512, 512, seed);
        let start = pftycho::metrics::relative_error(&z0, &truth).unwrap();
        let out = hybrid_solve(&ms, &pattern, &probe, &z0, &cfg, None).unwrap();
        let end = pftycho::metrics::relative_error(&out.state.z, &truth).unwrap();
        drops.push(start - end);
    }
    drops.sort_by(f64::total_cmp);
    assert!(drops[2] > 0.0, "{drops:?}");
}
