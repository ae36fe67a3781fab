//! Command implementations behind the `helmsman` binary: run a scenario
//! with ablation toggles, benchmark the point-cloud kernels, and emit the
//! shipped scenario suite.
//!
//! Exit codes are a total function of the episode outcome:
//! 0 reached, 10 collision, 11 stuck, 12 timeout, 64 configuration error,
//! 74 I/O error.

use crate::geometry::{PlanarPose, Vec3};
use crate::mariner::{select_preview_target, NeedleConfig};
use crate::vessel::{evaluate_cbf, Frame, PointCloud, VesselParams};
use crate::world_sim::{presets, run_episode, EpisodeError, EpisodeToggles, Outcome, Scenario};
use crate::HyperEllipsoid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const EXIT_REACHED: i32 = 0;
pub const EXIT_COLLISION: i32 = 10;
pub const EXIT_STUCK: i32 = 11;
pub const EXIT_TIMEOUT: i32 = 12;
pub const EXIT_CONFIG: i32 = 64;
pub const EXIT_IO: i32 = 74;

pub fn exit_code_for(outcome: Outcome) -> i32 {
    match outcome {
        Outcome::Reached => EXIT_REACHED,
        Outcome::Collision => EXIT_COLLISION,
        Outcome::Stuck => EXIT_STUCK,
        Outcome::Timeout => EXIT_TIMEOUT,
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub scenario_path: PathBuf,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub duration: Option<f64>,
    pub disable_vessel: bool,
    pub disable_mariner: bool,
}

/// Load, override, validate, run, and write `trajectory.csv` plus
/// `metrics.json` into the output directory.
pub fn cmd_run(opts: &RunOptions) -> i32 {
    let mut scenario = match Scenario::load(&opts.scenario_path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Some(seed) = opts.seed {
        scenario.seed = seed;
    }
    if let Some(dt) = opts.dt {
        scenario.rates.sim_dt = dt;
    }
    if let Some(duration) = opts.duration {
        scenario.duration_s = duration;
    }
    let toggles =
        EpisodeToggles { vessel_on: !opts.disable_vessel, mariner_on: !opts.disable_mariner };

    let (record, metrics) = match run_episode(&scenario, toggles) {
        Ok(out) => out,
        Err(EpisodeError::Scenario(e)) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
        Err(EpisodeError::Plan(e)) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };

    if let Err(e) = std::fs::create_dir_all(&opts.out_dir) {
        eprintln!("error: cannot create {}: {e}", opts.out_dir.display());
        return EXIT_IO;
    }
    let csv_path = opts.out_dir.join("trajectory.csv");
    let metrics_path = opts.out_dir.join("metrics.json");
    let write = || -> std::io::Result<()> {
        let mut csv = std::fs::File::create(&csv_path)?;
        record.write_csv(&mut csv)?;
        std::fs::write(&metrics_path, metrics.to_json_string())?;
        Ok(())
    };
    if let Err(e) = write() {
        eprintln!("error: writing outputs: {e}");
        return EXIT_IO;
    }

    println!(
        "{}: {:?} in {:.2} s sim time, path {:.2} m, min clearance {:.3}, min h {}",
        scenario.name,
        metrics.outcome,
        metrics.sim_time_s,
        metrics.path_length_m,
        metrics.min_true_clearance_alpha,
        metrics.min_h_soft.map_or("n/a".to_string(), |h| format!("{h:.3}")),
    );
    println!("wrote {} and {}", csv_path.display(), metrics_path.display());
    exit_code_for(metrics.outcome)
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelStats {
    pub median_us: f64,
    pub p95_us: f64,
    pub throughput_per_sec: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub points: usize,
    pub needles: usize,
    pub iters: usize,
    pub threads: usize,
    /// Barrier evaluation over the cloud; throughput in points/second.
    pub cbf: KernelStats,
    /// Full preview pass (scale every needle, select); throughput in
    /// needle-point pairs/second.
    pub mariner: KernelStats,
}

fn stats(mut samples_us: Vec<f64>, work_per_iter: f64) -> KernelStats {
    samples_us.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_us = samples_us[samples_us.len() / 2];
    let p95_idx = ((samples_us.len() as f64 * 0.95).ceil() as usize).min(samples_us.len()) - 1;
    KernelStats {
        median_us,
        p95_us: samples_us[p95_idx],
        throughput_per_sec: work_per_iter / (median_us * 1e-6),
    }
}

/// Synthesize a seeded sensor-like cloud and time both kernels.
pub fn run_bench(points: usize, needles: usize, iters: usize, seed: u64) -> BenchReport {
    assert!(points >= 1 && needles >= 1 && iters >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cloud_pts: Vec<Vec3> = (0..points)
        .map(|_| {
            let azimuth = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            let elevation = rng.gen_range(-0.26f64..0.26);
            let range = rng.gen_range(0.5..20.0);
            Vec3::new(
                range * elevation.cos() * azimuth.cos(),
                range * elevation.cos() * azimuth.sin(),
                range * elevation.sin(),
            )
        })
        .collect();
    let cloud = PointCloud::new(cloud_pts, Frame::Body);
    let shape = HyperEllipsoid { a: 0.8, b: 0.4, c: 0.4, d: 1 };
    let params = VesselParams {
        max_points: points.max(65_536),
        z_crop: None,
        ..VesselParams::default()
    };
    let pose = PlanarPose::new(Vec3::new(0.1, -0.2, 0.0), 0.3);
    let needle_cfg = NeedleConfig { count: needles, ..NeedleConfig::default() };
    let target = Vec3::new(5.0, 1.0, 0.0);

    // One untimed warm pass apiece to populate the worker pool.
    let eval = evaluate_cbf(&shape, &pose, &cloud, &params);
    assert!(eval.n_used == points);
    let _ = select_preview_target(&needle_cfg, &cloud, target);

    let mut cbf_samples = Vec::with_capacity(iters);
    for _ in 0..iters {
        let t0 = Instant::now();
        let eval = evaluate_cbf(&shape, &pose, &cloud, &params);
        cbf_samples.push(t0.elapsed().as_secs_f64() * 1e6);
        std::hint::black_box(eval.h);
    }
    let mut mariner_samples = Vec::with_capacity(iters);
    for _ in 0..iters {
        let t0 = Instant::now();
        let res = select_preview_target(&needle_cfg, &cloud, target);
        mariner_samples.push(t0.elapsed().as_secs_f64() * 1e6);
        std::hint::black_box(res.chosen_index);
    }

    BenchReport {
        points,
        needles,
        iters,
        threads: rayon::current_num_threads(),
        cbf: stats(cbf_samples, points as f64),
        mariner: stats(mariner_samples, (points * needles) as f64),
    }
}

pub fn cmd_bench(points: usize, needles: usize, iters: usize, seed: u64) -> i32 {
    let report = run_bench(points, needles, iters, seed);
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    EXIT_REACHED
}

/// Write the shipped scenario suite into a directory and reload each file to
/// prove it re-validates.
pub fn cmd_scenarios(out_dir: &Path) -> i32 {
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        eprintln!("error: cannot create {}: {e}", out_dir.display());
        return EXIT_IO;
    }
    for scenario in presets::all() {
        let path = out_dir.join(format!("{}.toml", scenario.name));
        if let Err(e) = scenario.save(&path) {
            eprintln!("error: writing {}: {e}", path.display());
            return EXIT_IO;
        }
        match Scenario::load(&path).and_then(|s| s.validate().map(|_| s)) {
            Ok(_) => println!("wrote {}", path.display()),
            Err(e) => {
                eprintln!("error: emitted scenario fails validation: {e}");
                return EXIT_CONFIG;
            }
        }
    }
    EXIT_REACHED
}
