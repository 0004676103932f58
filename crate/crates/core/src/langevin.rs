//! Classical Langevin dynamics of the two-photon-damped oscillator.
//!
//! The complex amplitude a obeys
//!
//! da = −iΩa dt + f(a) dt − σ a* dW,   σ = √(2γθ),
//!
//! with a single real Wiener process W and θ = k_BT/ħΩ. The rotating-wave
//! drift is f = −γa²a*. The non-RWA equation replaces it by
//! (iγ/2Ω)·d/dt(a*² − a²)·a*, which is closed either by its free-evolution
//! value (giving f = −γ(a*³ + a²a*)) or by a one-step finite difference.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// |a| beyond which a trajectory is declared blown up.
pub const OVERFLOW_LIMIT: f64 = 1e6;

/// Trajectories per reduction block. Blocks are summed in index order, so
/// results do not depend on the worker count.
const BLOCK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Rwa,
    Nonrwa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonRwaMode {
    /// d/dt(a*² − a²) → 2iΩ(a*² + a²).
    Substitute,
    /// Backward difference over the last step.
    Lag1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Calculus {
    /// Euler–Maruyama with the rotation applied exactly.
    Ito,
    /// Stochastic Heun (predictor–corrector).
    Stratonovich,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdeParams {
    /// γ/Ω.
    pub gamma: f64,
    /// k_BT/ħΩ.
    pub theta: f64,
    pub omega: f64,
    pub dt: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub calculus: Calculus,
    pub nonrwa_mode: NonRwaMode,
}

impl SdeParams {
    pub fn new(gamma: f64, theta: f64) -> Self {
        Self {
            gamma,
            theta,
            omega: 1.0,
            dt: 1e-3,
            n_traj: 1000,
            seed: 0,
            calculus: Calculus::Ito,
            nonrwa_mode: NonRwaMode::Substitute,
        }
    }

    /// σ = √(2γθ).
    pub fn noise_amplitude(&self) -> f64 {
        (2.0 * self.gamma * self.theta).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::Domain(format!("gamma must be nonnegative, got {}", self.gamma)));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(Error::Domain(format!("theta must be nonnegative, got {}", self.theta)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Step(format!("dt must be positive, got {}", self.dt)));
        }
        if self.n_traj == 0 {
            return Err(Error::Domain("n_traj must be positive".into()));
        }
        if !self.omega.is_finite() {
            return Err(Error::Domain("omega must be finite".into()));
        }
        Ok(())
    }
}

/// Temperature whose two-quantum occupation is `nbar`: θ = 2/ln(1 + 1/n).
pub fn theta_for_occupation(nbar: f64) -> Result<f64> {
    if !(nbar > 0.0) {
        return Err(Error::Domain(format!("occupation must be positive, got {nbar}")));
    }
    Ok(2.0 / (1.0 / nbar).ln_1p())
}

fn drift(a: C64, a_prev: C64, dt: f64, p: &SdeParams, variant: Variant) -> Result<C64> {
    let ac = a.conj();
    Ok(match variant {
        Variant::Rwa => -p.gamma * a * a * ac,
        Variant::Nonrwa => match p.nonrwa_mode {
            NonRwaMode::Substitute => -p.gamma * (ac * ac * ac + a * a * ac),
            NonRwaMode::Lag1 => {
                if p.omega == 0.0 {
                    return Err(Error::Domain("lag1 non-RWA drift needs omega != 0".into()));
                }
                let q = |z: C64| z.conj() * z.conj() - z * z;
                let rate = (q(a) - q(a_prev)) / dt;
                C64::new(0.0, p.gamma / (2.0 * p.omega)) * rate * ac
            }
        },
    })
}

fn guard(a: C64, t: f64) -> Result<C64> {
    let m = a.norm();
    if !(m <= OVERFLOW_LIMIT) {
        return Err(Error::Overflow { t, magnitude: m });
    }
    Ok(a)
}

fn step(a: C64, a_prev: C64, dw: f64, p: &SdeParams, variant: Variant) -> Result<C64> {
    let dt = p.dt;
    let sigma = p.noise_amplitude();
    let rot = C64::new(0.0, -p.omega);
    match p.calculus {
        Calculus::Ito => {
            let f = drift(a, a_prev, dt, p, variant)?;
            let inc = a + f * dt - sigma * a.conj() * dw;
            Ok(C64::from_polar(1.0, -p.omega * dt) * inc)
        }
        Calculus::Stratonovich => {
            let f0 = rot * a + drift(a, a_prev, dt, p, variant)?;
            let g0 = -sigma * a.conj();
            let pred = a + f0 * dt + g0 * dw;
            let f1 = rot * pred + drift(pred, a, dt, p, variant)?;
            let g1 = -sigma * pred.conj();
            Ok(a + 0.5 * (f0 + f1) * dt + 0.5 * (g0 + g1) * dw)
        }
    }
}

/// One step of the rotating-wave equation.
pub fn step_rwa(a: C64, dt: f64, dw: f64, params: &SdeParams) -> Result<C64> {
    let p = SdeParams { dt, ..*params };
    guard(step(a, a, dw, &p, Variant::Rwa)?, f64::NAN)
}

/// One step of the non-RWA equation; `a_prev` is the amplitude one step
/// earlier (only used by [`NonRwaMode::Lag1`]).
pub fn step_nonrwa(a: C64, a_prev: C64, dt: f64, dw: f64, params: &SdeParams, mode: NonRwaMode) -> Result<C64> {
    let p = SdeParams {
        dt,
        nonrwa_mode: mode,
        ..*params
    };
    guard(step(a, a_prev, dw, &p, Variant::Nonrwa)?, f64::NAN)
}

/// Time grid and optional late-time window for an ensemble run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleOptions {
    pub t_final: f64,
    /// Integration steps between recorded samples.
    pub sample_stride: usize,
    /// Window [t0, t1] over which each trajectory's |a|² is time-averaged.
    pub window: Option<(f64, f64)>,
}

/// Across-trajectory statistics of a windowed time average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStat {
    pub t0: f64,
    pub t1: f64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub times: Vec<f64>,
    pub mean_a: Vec<C64>,
    pub mean_abs2: Vec<f64>,
    /// Standard error of ⟨Re a⟩.
    pub stderr_a: Vec<f64>,
    pub stderr_abs2: Vec<f64>,
    /// Trajectories that entered the statistics.
    pub n_traj: usize,
    /// Trajectories dropped after an overflow.
    pub discarded: usize,
    pub window_abs2: Option<WindowStat>,
}

/// Running sums of deviations from a reference path (trajectory 0), which
/// keeps the variance free of cancellation and exactly zero for identical
/// paths.
#[derive(Debug, Clone)]
struct Sums {
    n: usize,
    discarded: usize,
    a: Vec<C64>,
    re2: Vec<f64>,
    abs2: Vec<f64>,
    abs4: Vec<f64>,
    win: f64,
    win2: f64,
}

#[derive(Debug, Clone)]
struct Reference {
    a: Vec<C64>,
    abs2: Vec<f64>,
    win: f64,
}

impl Sums {
    fn new(samples: usize) -> Self {
        Self {
            n: 0,
            discarded: 0,
            a: vec![C64::new(0.0, 0.0); samples],
            re2: vec![0.0; samples],
            abs2: vec![0.0; samples],
            abs4: vec![0.0; samples],
            win: 0.0,
            win2: 0.0,
        }
    }

    fn add(&mut self, path: &[C64], win: f64, r: &Reference) {
        self.n += 1;
        for (k, z) in path.iter().enumerate() {
            let dz = z - r.a[k];
            let dm = z.norm_sqr() - r.abs2[k];
            self.a[k] += dz;
            self.re2[k] += dz.re * dz.re;
            self.abs2[k] += dm;
            self.abs4[k] += dm * dm;
        }
        let dw = win - r.win;
        if dw.is_finite() {
            self.win += dw;
            self.win2 += dw * dw;
        }
    }

    fn merge(&mut self, other: &Sums) {
        self.n += other.n;
        self.discarded += other.discarded;
        for k in 0..self.a.len() {
            self.a[k] += other.a[k];
            self.re2[k] += other.re2[k];
            self.abs2[k] += other.abs2[k];
            self.abs4[k] += other.abs4[k];
        }
        self.win += other.win;
        self.win2 += other.win2;
    }
}

/// Mean and standard error from sums of deviations about `shift`.
fn mean_stderr(shift: f64, sum: f64, sum2: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    if n < 2 {
        return (shift + mean, 0.0);
    }
    let var = ((sum2 - sum * mean) / (nf - 1.0)).max(0.0);
    (shift + mean, (var / nf).sqrt())
}

/// Single trajectory; returns the sampled path and the window average.
fn trajectory(
    alpha0: C64,
    p: &SdeParams,
    variant: Variant,
    steps: usize,
    opts: &EnsembleOptions,
    window: (usize, usize),
    index: u64,
) -> Result<(Vec<C64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    rng.set_stream(index);
    let sqdt = p.dt.sqrt();
    let mut a = alpha0;
    // Free evolution backwards by one step seeds the lag-1 difference.
    let mut a_prev = alpha0 * C64::from_polar(1.0, p.omega * p.dt);
    let mut path = Vec::with_capacity(steps / opts.sample_stride + 1);
    path.push(a);
    let mut win = 0.0;
    let mut win_n = 0usize;
    for s in 1..=steps {
        let z: f64 = rng.sample(StandardNormal);
        let next = guard(step(a, a_prev, z * sqdt, p, variant)?, s as f64 * p.dt)?;
        a_prev = a;
        a = next;
        if s >= window.0 && s <= window.1 {
            win += a.norm_sqr();
            win_n += 1;
        }
        if s % opts.sample_stride == 0 {
            path.push(a);
        }
    }
    Ok((path, if win_n > 0 { win / win_n as f64 } else { f64::NAN }))
}

/// Ensemble of independent trajectories from a common initial amplitude.
///
/// Trajectory k draws its noise from ChaCha8 stream k of `seed`, so equal
/// seeds give common noise across variants and bit-identical statistics for
/// any thread count. Blown-up trajectories are dropped and counted.
pub fn run_ensemble(
    alpha0: C64,
    params: &SdeParams,
    variant: Variant,
    opts: &EnsembleOptions,
) -> Result<TrajectoryEnsemble> {
    params.validate()?;
    if opts.sample_stride == 0 {
        return Err(Error::Step("sample_stride must be at least 1".into()));
    }
    if variant == Variant::Nonrwa && params.nonrwa_mode == NonRwaMode::Lag1 && params.omega == 0.0 {
        return Err(Error::Domain("lag1 non-RWA drift needs omega != 0".into()));
    }
    let steps = (opts.t_final / params.dt).round() as usize;
    let samples = steps / opts.sample_stride + 1;
    let window = match opts.window {
        Some((t0, t1)) if t1 >= t0 => (
            (t0 / params.dt).ceil().max(1.0) as usize,
            ((t1 / params.dt).floor() as usize).min(steps),
        ),
        Some((t0, t1)) => {
            return Err(Error::Domain(format!("empty averaging window [{t0}, {t1}]")));
        }
        None => (usize::MAX, 0),
    };
    let reference = match trajectory(alpha0, params, variant, steps, opts, window, 0) {
        Ok((path, win)) => Reference {
            abs2: path.iter().map(|z| z.norm_sqr()).collect(),
            a: path,
            win: if win.is_finite() { win } else { 0.0 },
        },
        Err(Error::Overflow { .. }) => Reference {
            a: vec![C64::new(0.0, 0.0); samples],
            abs2: vec![0.0; samples],
            win: 0.0,
        },
        Err(e) => return Err(e),
    };
    let n_blocks = params.n_traj.div_ceil(BLOCK);
    let blocks: Vec<Result<Sums>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut sums = Sums::new(samples);
            let end = ((b + 1) * BLOCK).min(params.n_traj);
            for k in b * BLOCK..end {
                match trajectory(alpha0, params, variant, steps, opts, window, k as u64) {
                    Ok((path, win)) => sums.add(&path, win, &reference),
                    Err(Error::Overflow { t, magnitude }) => {
                        log::warn!("trajectory {k} overflowed at t={t:.3} (|a|={magnitude:.2e})");
                        sums.discarded += 1;
                    }
                    Err(e) => return Err(e),
                }
            }
            Ok(sums)
        })
        .collect();
    let mut total = Sums::new(samples);
    for b in blocks {
        total.merge(&b?);
    }
    if total.n == 0 {
        return Err(Error::Overflow {
            t: opts.t_final,
            magnitude: f64::INFINITY,
        });
    }
    let n = total.n;
    let nf = n as f64;
    let mut ens = TrajectoryEnsemble {
        times: (0..samples)
            .map(|k| (k * opts.sample_stride) as f64 * params.dt)
            .collect(),
        mean_a: total
            .a
            .iter()
            .zip(&reference.a)
            .map(|(z, r)| r + z / nf)
            .collect(),
        mean_abs2: Vec::with_capacity(samples),
        stderr_a: Vec::with_capacity(samples),
        stderr_abs2: Vec::with_capacity(samples),
        n_traj: n,
        discarded: total.discarded,
        window_abs2: None,
    };
    for k in 0..samples {
        let (_, se_re) = mean_stderr(0.0, total.a[k].re, total.re2[k], n);
        let (m2, se2) = mean_stderr(reference.abs2[k], total.abs2[k], total.abs4[k], n);
        ens.stderr_a.push(se_re);
        ens.mean_abs2.push(m2);
        ens.stderr_abs2.push(se2);
    }
    if let Some((t0, t1)) = opts.window {
        let (mean, stderr) = mean_stderr(reference.win, total.win, total.win2, n);
        ens.window_abs2 = Some(WindowStat { t0, t1, mean, stderr });
    }
    Ok(ens)
}
