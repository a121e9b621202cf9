use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use pftycho::field::raw::{load_complex, save_complex};
use pftycho::field::{crop_centered, fast_fft2, ComplexField};
use pftycho::metrics::{register_template, ImageMetrics, MAGNITUDE_RANGE, PHASE_RANGE};
use pftycho::minimax::{ScopeTable, MAX_TERMS, TABLE_EPSILONS};
use pftycho::pft::{pft_apply_2d, pft_plan_2d};
use pftycho::ptycho::{
    crop_measurements, identity_probe, load_grayscale_png, load_truth, save_grayscale_png, simulate as simulate_data,
    MeasurementSet, PoissonNoise, ScanPattern,
};
use pftycho::solvers::{hybrid_solve, random_object, vanilla_solve, SolveOutcome, SolveStatus};

use crate::config::{ExperimentConfig, Mode};
use crate::manifest::Manifest;
use crate::{Algorithm, Diverged, Invalid};

const SUMMARY_HEADER: &str =
    "seed,status,iterations,transition,wall_s,rel_err,rel_err_mag,rel_err_phase,ssim_mag,ssim_phase,psnr_mag,psnr_phase";

fn measurements_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.experiment.output.join("measurements")
}

/// Magnitude over `[0, 1]` and phase over `[0, π/2]`, both to 8 bits.
fn save_object_pngs(dir: &Path, stem: &str, z: &ComplexField) -> Result<()> {
    save_grayscale_png(dir.join(format!("{stem}magnitude.png")), &z.abs(), 0.0, MAGNITUDE_RANGE)?;
    save_grayscale_png(dir.join(format!("{stem}phase.png")), &z.arg(), 0.0, PHASE_RANGE)?;
    Ok(())
}

fn record_image_scales(m: &mut Manifest) {
    m.set("images", "magnitude", "[0, 1] -> [0, 255]");
    m.set("images", "phase", format!("[0, {PHASE_RANGE}] -> [0, 255]"));
}

fn record_geometry(m: &mut Manifest, pattern: &ScanPattern) {
    let pair = |(a, b): (usize, usize)| toml::Value::Array(vec![(a as i64).into(), (b as i64).into()]);
    m.set("geometry", "probes", pattern.len() as i64);
    m.set("geometry", "object", pair(pattern.object_shape()));
    m.set("geometry", "frame", pair(pattern.frame_shape()));
    m.set("geometry", "window", pair(pattern.window_shape()));
    m.set("geometry", "object_offset", pair(pattern.object_offset()));
}

fn record_config(m: &mut Manifest, cfg: &ExperimentConfig) -> Result<()> {
    let table: toml::Table = toml::from_str(&cfg.to_toml())?;
    m.set_table("config", table);
    Ok(())
}

fn record_inputs(m: &mut Manifest, cfg: &ExperimentConfig) -> Result<()> {
    for p in [&cfg.object.magnitude, &cfg.object.phase].into_iter().flatten() {
        m.hash("inputs", Path::new(""), p)?;
    }
    Ok(())
}

fn files_in(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<_>>()?;
    files.retain(|p| p.is_file());
    files.sort();
    Ok(files)
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<()> {
    let truth = cfg.truth()?;
    let n = cfg.object_size(&truth)?;
    let pattern = cfg.pattern(n)?;
    let probe = cfg.true_probe(&pattern)?;
    let noise = cfg.noise.as_ref().map(|n| PoissonNoise { scale: n.scale, seed: n.seed });
    let ms = simulate_data(&truth, &pattern, &probe, noise)?;
    let m = cfg.pft.half_width;
    let ms = crop_measurements(&ms, m, m)?;

    let out = &cfg.experiment.output;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mdir = measurements_dir(cfg);
    if mdir.exists() {
        std::fs::remove_dir_all(&mdir)?;
    }
    ms.save(&mdir)?;
    save_complex(out.join("truth.ptyc"), &truth)?;
    save_complex(out.join("probe.ptyc"), &probe)?;
    save_object_pngs(out, "truth_", &truth)?;
    std::fs::write(out.join("config.toml"), cfg.to_toml())?;

    let mut manifest = Manifest::new("simulate");
    record_config(&mut manifest, cfg)?;
    record_inputs(&mut manifest, cfg)?;
    record_geometry(&mut manifest, &pattern);
    record_image_scales(&mut manifest);
    for f in files_in(&mdir)?.iter().chain(files_in(out)?.iter()) {
        manifest.hash("outputs", out, f)?;
    }
    manifest.write(&out.join("manifest.toml"))?;

    let (f1, f2) = pattern.frame_shape();
    println!("simulated {} diffraction patterns on a {f1}x{f2} frame into {}", ms.len(), mdir.display());
    Ok(())
}

struct SeedResult {
    seed: u64,
    outcome: SolveOutcome,
    metrics: ImageMetrics,
}

fn status_tag(s: &SolveStatus) -> &'static str {
    match s {
        SolveStatus::Converged => "converged",
        SolveStatus::MaxIterations => "max_iterations",
        SolveStatus::Diverged(_) => "diverged",
    }
}

fn summary_line(r: &SeedResult) -> String {
    let m = &r.metrics;
    let transition = r.outcome.trace.transition().map(|t| t.to_string()).unwrap_or_default();
    format!(
        "{},{},{},{},{:.3},{:.6},{:.6},{:.6},{:.6},{:.6},{:.3},{:.3}",
        r.seed,
        status_tag(&r.outcome.status),
        r.outcome.state.iteration,
        transition,
        r.outcome.state.elapsed,
        m.rel_err,
        m.rel_err_mag,
        m.rel_err_phase,
        m.ssim_mag,
        m.ssim_phase,
        m.psnr_mag.min(pftycho::metrics::PSNR_CAP),
        m.psnr_phase.min(pftycho::metrics::PSNR_CAP)
    )
}

pub fn reconstruct(cfg: &ExperimentConfig, algorithm: Algorithm) -> Result<()> {
    let mode = cfg.experiment.mode;
    match (algorithm, mode) {
        (Algorithm::Pie, Mode::Blind) => bail!(Invalid("`pie` assumes a known probe; use `epie` for blind experiments".into())),
        (Algorithm::Epie, Mode::Nonblind) => bail!(Invalid("`epie` estimates the probe; use `pie` for non-blind experiments".into())),
        _ => {}
    }
    let mdir = measurements_dir(cfg);
    if !mdir.join("manifest.txt").is_file() {
        bail!(Invalid(format!("no measurements in {}; run `pftycho simulate` first", mdir.display())));
    }
    let ms = MeasurementSet::load(&mdir)?;
    let truth = cfg.truth()?;
    let pattern = cfg.pattern(cfg.object_size(&truth)?)?;
    if pattern.len() != ms.len() {
        bail!(Invalid(format!("configuration describes {} windows but {} were simulated", pattern.len(), ms.len())));
    }
    let known = cfg.experiment.output.join("probe.ptyc");
    let known = if known.is_file() { load_complex(&known)? } else { cfg.true_probe(&pattern)? };
    let probe_init = match mode {
        Mode::Nonblind => known,
        Mode::Blind => identity_probe(pattern.window_shape()),
    };
    let (f1, f2) = pattern.frame_shape();
    let root = cfg.experiment.output.join(algorithm.name());
    std::fs::create_dir_all(&root)?;

    let mut results = Vec::new();
    let first = cfg.experiment.seed;
    for seed in first..first + cfg.experiment.seeds {
        let solver = cfg.solver(f1 * f2, seed)?;
        let z0 = random_object(f1, f2, seed);
        let outcome = match algorithm {
            Algorithm::Hybrid => hybrid_solve(&ms, &pattern, &probe_init, &z0, &solver, Some(&truth))?,
            _ => vanilla_solve(&ms, &pattern, &probe_init, &z0, &solver, Some(&truth))?,
        };
        let dir = root.join(format!("seed_{seed}"));
        std::fs::create_dir_all(&dir)?;
        let object = pattern.extract_object(&outcome.state.z)?;
        outcome.trace.write_csv(dir.join("trace.csv"))?;
        save_complex(dir.join("object.ptyc"), &object)?;
        save_complex(dir.join("probe.ptyc"), &outcome.state.probe)?;
        save_object_pngs(&dir, "", &object)?;
        if let Some(w) = &outcome.warm_start {
            save_object_pngs(&dir, "warm_", &pattern.extract_object(&w.z)?)?;
        }
        let metrics = ImageMetrics::compute(&object, &truth)?;
        let result = SeedResult { seed, outcome, metrics };
        std::fs::write(dir.join("summary.csv"), format!("{SUMMARY_HEADER}\n{}\n", summary_line(&result)))?;
        if let SolveStatus::Diverged(msg) = &result.outcome.status {
            log::error!("seed {seed}: {msg}");
        }
        results.push(result);
    }

    let mut table = format!("{SUMMARY_HEADER}\n");
    for r in &results {
        let _ = writeln!(table, "{}", summary_line(r));
    }
    std::fs::write(root.join("summary.csv"), &table)?;
    print!("{table}");

    let mut manifest = Manifest::new("reconstruct");
    manifest.set("run", "algorithm", algorithm.name());
    record_config(&mut manifest, cfg)?;
    record_inputs(&mut manifest, cfg)?;
    record_geometry(&mut manifest, &pattern);
    record_image_scales(&mut manifest);
    for f in files_in(&mdir)? {
        manifest.hash("measurements", &cfg.experiment.output, &f)?;
    }
    for r in &results {
        let dir = root.join(format!("seed_{}", r.seed));
        for f in files_in(&dir)? {
            manifest.hash("outputs", &root, &f)?;
        }
    }
    manifest.write(&root.join("manifest.toml"))?;

    let diverged: Vec<u64> = results.iter().filter(|r| matches!(r.outcome.status, SolveStatus::Diverged(_))).map(|r| r.seed).collect();
    if !diverged.is_empty() {
        bail!(Diverged(format!("reconstruction diverged for seeds {diverged:?}; partial outputs kept in {}", root.display())));
    }
    Ok(())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn median_time(trials: usize, mut f: impl FnMut() -> Result<()>) -> Result<f64> {
    let mut samples = Vec::with_capacity(trials);
    for _ in 0..trials {
        let t = Instant::now();
        f()?;
        samples.push(t.elapsed().as_secs_f64());
    }
    Ok(median(samples))
}

pub fn pft_bench(sizes: &[usize], m: usize, p: usize, eps: &[f64], trials: usize, seed: u64, out: Option<&Path>) -> Result<()> {
    if trials == 0 {
        bail!(Invalid("trials must be at least 1".into()));
    }
    let mut csv = String::from("n,half_width,p,eps,r,trials,threads,fft_ms,pft_ms,speedup,max_err,bound,status\n");
    let threads = rayon::current_num_threads();
    for &n in sizes {
        let z = random_object(n, n, seed);
        let t_fft = median_time(trials, || {
            std::hint::black_box(fast_fft2(&z)?);
            Ok(())
        })?;
        let exact = if 2 * m <= n { Some(crop_centered(&fast_fft2(&z)?, m, m)?) } else { None };
        for &e in eps {
            let row = (|| -> Result<String> {
                let plan = pft_plan_2d(n, n, m, m, p, p, e)?;
                let t_pft = median_time(trials, || {
                    std::hint::black_box(pft_apply_2d(&plan, &z)?);
                    Ok(())
                })?;
                let err = pft_apply_2d(&plan, &z)?.max_abs_diff(exact.as_ref().expect("plan implies the crop fits"))?;
                Ok(format!(
                    "{n},{m},{p},{e:e},{},{trials},{threads},{:.3},{:.3},{:.3},{err:.3e},{:.3e},ok",
                    plan.axes()[0].r(),
                    t_fft * 1e3,
                    t_pft * 1e3,
                    t_fft / t_pft,
                    2.0 * e * z.l1_norm()
                ))
            })();
            match row {
                Ok(r) => csv.push_str(&r),
                Err(err) => {
                    let msg = format!("{err:#}").replace(',', ";");
                    let _ = write!(csv, "{n},{m},{p},{e:e},,{trials},{threads},{:.3},,,,,error: {msg}", t_fft * 1e3);
                }
            }
            csv.push('\n');
        }
    }
    match out {
        Some(path) => std::fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

pub fn metrics(recon: &Path, truth: Option<&Path>, pngs: Option<(&Path, &Path)>) -> Result<()> {
    let z = load_complex(recon).with_context(|| format!("reading {}", recon.display()))?;
    let truth = match (truth, pngs) {
        (Some(t), _) => load_complex(t).with_context(|| format!("reading {}", t.display()))?,
        (None, Some((m, p))) => load_truth(m, p)?,
        (None, None) => bail!(Invalid("give --truth or both --truth-magnitude and --truth-phase".into())),
    };
    if z.shape() != truth.shape() {
        bail!(Invalid(format!("reconstruction is {:?} but the truth is {:?}", z.shape(), truth.shape())));
    }
    let m = ImageMetrics::compute(&z, &truth)?;
    println!("rel_err,rel_err_mag,rel_err_phase,ssim_mag,ssim_phase,psnr_mag,psnr_phase,rel_err_phase_aligned");
    println!(
        "{:.6},{:.6},{:.6},{:.6},{:.6},{:.3},{:.3},{:.6}",
        m.rel_err, m.rel_err_mag, m.rel_err_phase, m.ssim_mag, m.ssim_phase, m.psnr_mag, m.psnr_phase, m.rel_err_phase_aligned
    );
    Ok(())
}

pub fn register(image: &Path, template: &Path) -> Result<()> {
    let img = load_grayscale_png(image)?;
    let tpl = load_grayscale_png(template)?;
    let (r, c, score) = register_template(&img, &tpl)?;
    println!("row,col,score");
    println!("{r},{c},{score:.6}");
    Ok(())
}

pub fn scope_table(compute: bool) -> Result<()> {
    let text = if compute { ScopeTable::compute(&TABLE_EPSILONS, MAX_TERMS)?.to_text() } else { ScopeTable::builtin().to_text() };
    print!("{text}");
    Ok(())
}
