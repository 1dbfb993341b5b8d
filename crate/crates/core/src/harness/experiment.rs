//! Builds scenarios from a config, runs the detectors and scores them
//! against the ground truth.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{Algorithm, BackgroundKind, BurstSet, ExperimentConfig, SweepVar};
use crate::bounds::{direct_coeff_bound, direct_time_bound, prony_relative_coeff_bound, prony_time_bound, sigma_tilde};
use crate::detect_direct::{self, DirectDetectorParams};
use crate::detect_prony::{self, PronyDetectorParams};
use crate::dynamics::Semigroup;
use crate::error::{Error, Result};
use crate::forcing::{BackgroundSource, BurstTrain};
use crate::hilbert::{GridFunction, SpatialGrid};
use crate::reconstruct::ShapeSpace;
use crate::sensing::{direct_measurements, fourier_measurements, Scenario};

/// Samplers `1, x, x²`.
pub fn fixture_samplers(grid: SpatialGrid<f64>) -> Vec<GridFunction<f64>> {
    vec![
        GridFunction::constant(grid, 1.0),
        GridFunction::from_real_fn(grid, |x| x),
        GridFunction::from_real_fn(grid, |x| x * x),
    ]
}

/// `V = span{1, sin x, cos x}` analysed by the fixture samplers.
pub fn fixture_space(grid: SpatialGrid<f64>) -> Result<ShapeSpace<f64>> {
    ShapeSpace::new(
        vec![
            GridFunction::constant(grid, 1.0),
            GridFunction::from_real_fn(grid, f64::sin),
            GridFunction::from_real_fn(grid, f64::cos),
        ],
        fixture_samplers(grid),
    )
}

pub fn background(kind: BackgroundKind, l: f64, offset: f64) -> BackgroundSource<f64> {
    match kind {
        BackgroundKind::Cos => BackgroundSource::CosProduct { lipschitz: l, offset },
        BackgroundKind::Exp => BackgroundSource::ExpDecay { lipschitz: l, offset },
        BackgroundKind::Constant => BackgroundSource::Constant { offset },
    }
}

/// `u̇ = −x²u + f + η` on `[0, 1]` with `u₀ = 0`.
pub fn build_scenario(cfg: &ExperimentConfig, beta: f64, l: f64, sigma: f64) -> Result<Scenario<f64>> {
    let grid = SpatialGrid::unit(cfg.grid_points)?;
    let bursts = match cfg.bursts {
        BurstSet::Fixture => BurstTrain::new(BurstTrain::fixture(grid).bursts().to_vec(), cfg.gamma)?,
        BurstSet::None => BurstTrain::empty(cfg.gamma)?,
    };
    Scenario::new(
        Semigroup::neg_x_squared(grid),
        GridFunction::zeros(grid),
        bursts,
        background(cfg.background, l, cfg.offset),
        fixture_samplers(grid),
        beta,
        sigma,
        cfg.seed,
    )?
    .with_steps_per_beta(cfg.steps_per_beta)
}

/// A recovered burst.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub t_est: f64,
    pub coeffs: Vec<Complex64>,
    pub shape: GridFunction<f64>,
}

/// Runs one detector on a scenario over `[0, t_end]`.
pub fn detect_events(cfg: &ExperimentConfig, algorithm: Algorithm, sc: &Scenario<f64>) -> Result<Vec<Estimate>> {
    let steps = (cfg.t_end / sc.beta).ceil() as usize;
    let gamma = sc.bursts.gamma();
    let raw: Vec<(f64, Vec<Complex64>)> = match algorithm {
        Algorithm::Direct => {
            let meas = direct_measurements(sc, steps + 2)?;
            let params = DirectDetectorParams::new(cfg.k, cfg.c, sc.background.lipschitz(), sc.sigma, sc.beta, cfg.rule)?;
            detect_direct::detect(&meas, &params, &sc.samplers, gamma)?
                .into_iter()
                .map(|e| (e.t_est, e.coeffs))
                .collect()
        }
        Algorithm::Prony => {
            let meas = fourier_measurements(sc, steps + 6)?;
            let params = PronyDetectorParams::from_scenario(sc, cfg.threshold)?;
            detect_prony::detect_all(&meas, &params, &sc.samplers, gamma)?
                .into_iter()
                .map(|e| (e.t_est, e.coeffs))
                .collect()
        }
    };
    let space = fixture_space(*sc.grid())?;
    raw.into_iter()
        .map(|(t_est, coeffs)| Ok(Estimate { shape: space.synthesize(&coeffs)?, t_est, coeffs }))
        .collect()
}

/// Greedy nearest-time assignment within `radius`; entry `j` is the event
/// matched to truth `j`.
pub fn match_events(truth: &[f64], est: &[f64], radius: f64) -> Vec<Option<usize>> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (j, &t) in truth.iter().enumerate() {
        for (i, &e) in est.iter().enumerate() {
            let d = (t - e).abs();
            if d < radius {
                pairs.push((d, j, i));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out = vec![None; truth.len()];
    let mut used = vec![false; est.len()];
    for (_, j, i) in pairs {
        if out[j].is_none() && !used[i] {
            out[j] = Some(i);
            used[i] = true;
        }
    }
    out
}

/// Scores of one sweep point.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub algorithm: Algorithm,
    pub var: SweepVar,
    pub value: f64,
    pub beta: f64,
    pub l: f64,
    pub sigma: f64,
    /// `√Σ|t_j − t̃_j|²`; infinite on a miss, NaN without bursts.
    pub ne_time: f64,
    pub te_time: f64,
    /// `√Σ|⟨f_j, g⟩ − 𝔣_j(g)|²` per sampler.
    pub ne_coeff: Vec<f64>,
    pub te_coeff: Vec<f64>,
    pub detected: usize,
    /// Some truth or some event went unmatched.
    pub miss: bool,
    /// Why the point violates the admissibility conditions, if it does.
    pub inadmissible: Option<String>,
    pub runtime_ms: f64,
    pub estimates: Vec<Estimate>,
    /// `(t_j, ⟨f_j, g⟩ per sampler)`.
    pub truth: Vec<(f64, Vec<Complex64>)>,
}

fn root_sum_sq(it: impl Iterator<Item = f64>) -> f64 {
    it.map(|x| x * x).sum::<f64>().sqrt()
}

/// Theoretical aggregate bounds `(time, coeff per sampler)`.
fn theory(cfg: &ExperimentConfig, algorithm: Algorithm, sc: &Scenario<f64>) -> Result<(f64, Vec<f64>)> {
    let bursts = sc.bursts.bursts();
    let n = (bursts.len() as f64).sqrt();
    let (beta, l, sigma) = (sc.beta, sc.background.lipschitz(), sc.sigma);
    match algorithm {
        Algorithm::Direct => {
            let d = sc.semigroup.estimate_d(beta, &sc.samplers, 33)?;
            let r = sc.samplers.iter().fold(0.0f64, |m, g| m.max(g.norm()));
            let coeff = sc
                .samplers
                .iter()
                .map(|g| {
                    root_sum_sq(
                        bursts.iter().map(|b| direct_coeff_bound(cfg.k, cfg.c, l, beta, g.norm(), sigma, d, r, b.shape.norm())),
                    )
                })
                .collect();
            Ok((n * direct_time_bound(beta), coeff))
        }
        Algorithm::Prony => {
            let st = sigma_tilde(sigma, beta);
            let rel = prony_relative_coeff_bound(l, beta, st);
            let coeff = sc
                .samplers
                .iter()
                .map(|g| {
                    let fg: Result<Vec<f64>> = bursts.iter().map(|b| Ok(b.shape.inner_product(g)?.norm())).collect();
                    fg.map(|v| root_sum_sq(v.into_iter().map(|x| rel * x)))
                })
                .collect::<Result<_>>()?;
            Ok((n * prony_time_bound(l, beta, st), coeff))
        }
    }
}

/// Runs one algorithm at one sweep point.
pub fn evaluate(cfg: &ExperimentConfig, algorithm: Algorithm, var: SweepVar, value: f64) -> Result<SweepPoint> {
    let start = Instant::now();
    let (beta, l, sigma) = cfg.point(var, value);
    let sc = build_scenario(cfg, beta, l, sigma)?;
    let truth: Vec<(f64, Vec<Complex64>)> = sc
        .bursts
        .bursts()
        .iter()
        .map(|b| Ok((b.time, sc.samplers.iter().map(|g| b.shape.inner_product(g)).collect::<Result<Vec<_>>>()?)))
        .collect::<Result<_>>()?;
    let (te_time, te_coeff) = theory(cfg, algorithm, &sc)?;
    let admissible = match algorithm {
        Algorithm::Direct => sc.check_direct_admissible(),
        Algorithm::Prony => sc.check_prony_admissible(),
    };
    let mut point = SweepPoint {
        algorithm,
        var,
        value,
        beta,
        l,
        sigma,
        ne_time: f64::NAN,
        te_time,
        ne_coeff: vec![f64::NAN; sc.samplers.len()],
        te_coeff,
        detected: 0,
        miss: false,
        inadmissible: None,
        runtime_ms: 0.0,
        estimates: Vec::new(),
        truth,
    };
    if let Err(Error::Domain(msg)) = admissible {
        point.inadmissible = Some(msg);
        point.miss = true;
        point.ne_time = f64::INFINITY;
        point.ne_coeff.iter_mut().for_each(|x| *x = f64::INFINITY);
        point.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
        return Ok(point);
    }
    admissible?;

    let est = detect_events(cfg, algorithm, &sc)?;
    let times: Vec<f64> = point.truth.iter().map(|t| t.0).collect();
    let est_times: Vec<f64> = est.iter().map(|e| e.t_est).collect();
    let matching = match_events(&times, &est_times, sc.bursts.gamma() / 2.0);
    point.detected = est.len();
    point.miss = matching.iter().any(Option::is_none) || est.len() != times.len();
    if !times.is_empty() {
        if point.miss {
            point.ne_time = f64::INFINITY;
            point.ne_coeff.iter_mut().for_each(|x| *x = f64::INFINITY);
        } else {
            let pairs: Vec<(usize, usize)> = matching.iter().enumerate().map(|(j, m)| (j, m.expect("matched"))).collect();
            point.ne_time = root_sum_sq(pairs.iter().map(|&(j, i)| times[j] - est_times[i]));
            for (s, ne) in point.ne_coeff.iter_mut().enumerate() {
                *ne = root_sum_sq(pairs.iter().map(|&(j, i)| (point.truth[j].1[s] - est[i].coeffs[s]).norm()));
            }
        }
    }
    point.estimates = est;
    point.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(point)
}

/// Every (algorithm, sweep value) pair of the config, evaluated on up to
/// `workers` threads (0 = all cores). Output order is algorithm-major.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    let sweep = cfg.sweep.as_ref().ok_or_else(|| Error::Invalid("config has no sweep".into()))?;
    let jobs: Vec<(Algorithm, f64)> = cfg
        .algorithm
        .algorithms()
        .into_iter()
        .flat_map(|a| sweep.values.iter().map(move |&v| (a, v)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    pool.install(|| jobs.par_iter().map(|&(a, v)| evaluate(cfg, a, sweep.var, v)).collect())
}
