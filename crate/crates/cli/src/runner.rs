//! Binds scenarios to the simulation kernels and collects result tables.

use std::f64::consts::SQRT_2;
use std::path::{Path, PathBuf};

use decolab::fock::default_dim;
use decolab::gravity::{evolve_density, steady_state};
use decolab::langevin::{run_ensemble, theta_for_occupation, EnsembleOptions};
use decolab::lindblad::{auto_dt, evolve, evolve_moments};
use decolab::phase_space::{fringe_spacing, negativity_volume, position_density, uniform_grid, visibility, wigner};
use decolab::{
    cat_density, coherent_state, Calculus, Complex64, Damping, DecoherenceForm, DensityMatrix, Error, FockSpace,
    GravityBathParams, NonRwaMode, PhaseSpaceGrid, QedParams, SdeParams, Variant,
};

use crate::error::{config, CliResult};
use crate::scenario::{Case, Model, Observable};
use crate::table::{Cell, Table};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default Wigner grid points per axis.
pub const DEFAULT_GRID_POINTS: usize = 201;

/// Position samples per expected fringe spacing.
const POINTS_PER_FRINGE: f64 = 16.0;

/// Every table produced by one case.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub stem: String,
    pub tables: Vec<Table>,
}

impl RunOutput {
    pub fn table(&self, file: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.file == file)
    }
}

/// Density matrix at a snapshot; `tau = None` is the τ → ∞ steady state.
struct Snapshot {
    tau: Option<f64>,
    rho: DensityMatrix,
}

/// Phase-space extent needed for the initial branches and, for damped
/// models, a thermal-like state of mean occupation `n_inf`.
struct Extent {
    max_alpha: f64,
    n_inf: f64,
}

impl Extent {
    /// Half-width beyond which e^{−x²/(2N+1)} drops below 1e−6.
    fn thermal(&self) -> f64 {
        (1e6f64.ln() * (2.0 * self.n_inf + 1.0)).sqrt()
    }

    fn wigner_range(&self) -> f64 {
        (SQRT_2 * self.max_alpha + 5.0).max(self.thermal()).max(8.0).ceil()
    }

    fn x_range(&self) -> f64 {
        (SQRT_2 * self.max_alpha + 6.0).max(self.thermal()).ceil()
    }
}

pub fn run_cases(cases: &[Case]) -> CliResult<Vec<RunOutput>> {
    cases.iter().map(run_case).collect()
}

pub fn run_case(case: &Case) -> CliResult<RunOutput> {
    let tables = match case.scenario.model {
        Model::Gravity => gravity(case)?,
        Model::QedLindblad => master_equation(case, Damping::TwoPhoton)?,
        Model::QedSinglePhoton => master_equation(case, Damping::SinglePhoton)?,
        Model::QedSde => langevin(case)?,
    };
    Ok(RunOutput {
        stem: case.stem.clone(),
        tables,
    })
}

pub fn write_outputs(outputs: &[RunOutput], dir: &Path) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for out in outputs {
        for t in &out.tables {
            paths.push(t.write_to(dir)?);
        }
    }
    Ok(paths)
}

fn table(case: &Case, suffix: &str, columns: &'static [&'static str]) -> Table {
    let mut t = Table::new(format!("{}_{}", case.stem, suffix), columns);
    t.meta("decolab_version", VERSION);
    t.meta("scenario", &case.stem);
    t.meta("scenario_sha256", &case.hash);
    t.meta("model", case.scenario.model.name());
    t.meta("seed", case.scenario.seed);
    t.meta("parameters", &case.document);
    t
}

fn tau_cell(tau: Option<f64>) -> Cell {
    tau.map_or(Cell::Empty, Cell::Num)
}

fn gravity(case: &Case) -> CliResult<Vec<Table>> {
    let s = &case.scenario;
    let (a1, a2) = s.amplitudes()?;
    let params = GravityBathParams {
        coupling_over_pi: s.coupling_over_pi.unwrap_or(1e-3),
        cutoff: s.cutoff.unwrap_or(1e3),
        beta: s.beta.unwrap_or(1.0),
        include_kerr_phase: s.include_kerr_phase.unwrap_or(false),
        include_freq_shift: s.include_freq_shift.unwrap_or(false),
    };
    params.validate()?;
    let form = s.form.unwrap_or(DecoherenceForm::ExactGamma);
    let max_alpha = a1.norm().max(a2.norm());
    let space = FockSpace::new(s.dim.unwrap_or_else(|| default_dim(max_alpha)))?;
    let rho0 = cat_density(a1, a2, space)?;
    let mut snaps = s
        .snapshot_times()?
        .into_iter()
        .map(|t| {
            Ok(Snapshot {
                tau: Some(t),
                rho: evolve_density(&rho0, t, &params, form)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    if s.steady_state {
        snaps.push(Snapshot {
            tau: None,
            rho: steady_state(&rho0),
        });
    }
    let extent = Extent { max_alpha, n_inf: 0.0 };
    phase_space_tables(case, &snaps, (a1, a2), &extent)
}

fn qed_params(case: &Case) -> CliResult<QedParams> {
    let s = &case.scenario;
    let p = QedParams {
        gamma: s.gamma.unwrap_or(1e-3),
        nbar: s.nbar.unwrap_or(3.0),
        omega: 1.0,
    };
    p.validate()?;
    Ok(p)
}

/// Integrates `rho0` through the sorted `times`, each segment with the
/// largest step not above `dt_max` that divides it.
fn evolve_through(
    rho0: &DensityMatrix,
    l: &decolab::Liouvillian,
    times: &[f64],
    dt_max: f64,
) -> CliResult<Vec<DensityMatrix>> {
    let mut state = rho0.clone();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &tau in times {
        let span = tau - t;
        if span > 0.0 {
            let n = (span / dt_max).ceil().max(1.0);
            let h = span / n;
            let mut snap = evolve(&state, l, &[n * h], h)?;
            state = snap.pop().expect("one snapshot requested").rho;
        }
        out.push(state.clone());
        t = tau;
    }
    Ok(out)
}

fn master_equation(case: &Case, damping: Damping) -> CliResult<Vec<Table>> {
    let s = &case.scenario;
    let (a1, a2) = s.amplitudes()?;
    let params = qed_params(case)?;
    let max_alpha = a1.norm().max(a2.norm());
    let space = FockSpace::new(s.dim.unwrap_or_else(|| damping.default_dim(max_alpha, params.nbar)))?;
    let rho0 = cat_density(a1, a2, space)?;
    // Interaction picture; both generators commute with the free rotation.
    let l = damping.build(space, &QedParams { omega: 0.0, ..params })?;
    let dt_max = s.dt.unwrap_or_else(|| auto_dt(&rho0, &l));
    if !(dt_max > 0.0) {
        return Err(config("dt must be positive"));
    }
    let mut tables = Vec::new();
    if s.wants(Observable::Moments) {
        let (t_max, t_step, _) = s.series_grid()?;
        let sub = (t_step / dt_max).ceil().max(1.0);
        let series = evolve_moments(&rho0, &l, t_max, t_step / sub, sub as usize)?;
        let mut t = table(case, "moments", &["tau", "re_mean_a", "im_mean_a", "mean_n", "stderr_n"]);
        t.meta("dim", space.dim());
        for k in 0..series.times.len() {
            let tau = series.times[k];
            let a = series.mean_a[k] * Complex64::from_polar(1.0, -params.omega * tau);
            t.push(vec![tau.into(), a.re.into(), a.im.into(), series.mean_n[k].into(), 0.0.into()]);
        }
        tables.push(t);
    }
    let needs_snapshots = [Observable::Wigner, Observable::Pdensity, Observable::Visibility, Observable::Negativity]
        .into_iter()
        .any(|o| s.wants(o));
    if needs_snapshots {
        let times = s.snapshot_times()?;
        let snaps: Vec<Snapshot> = evolve_through(&rho0, &l, &times, dt_max)?
            .into_iter()
            .zip(&times)
            .map(|(rho, &tau)| Snapshot {
                tau: Some(tau),
                rho: rho.rotated(params.omega * tau),
            })
            .collect();
        let n_inf = match damping {
            Damping::TwoPhoton => 2.0 * params.nbar + 1.0,
            Damping::SinglePhoton => params.nbar,
        };
        let extent = Extent { max_alpha, n_inf };
        tables.extend(phase_space_tables(case, &snaps, (a1, a2), &extent)?);
    }
    for t in &mut tables {
        if !t.meta.iter().any(|(k, _)| k == "dim") {
            t.meta("dim", space.dim());
        }
        t.meta("dt", dt_max);
    }
    Ok(tables)
}

fn phase_space_tables(
    case: &Case,
    snaps: &[Snapshot],
    (a1, a2): (Complex64, Complex64),
    extent: &Extent,
) -> CliResult<Vec<Table>> {
    let s = &case.scenario;
    let mut tables = Vec::new();
    let spacing = fringe_spacing(a1, a2);

    if s.wants(Observable::Wigner) || s.wants(Observable::Negativity) {
        let range = s.grid_range.unwrap_or_else(|| extent.wigner_range());
        let grid = PhaseSpaceGrid::new(
            (-range, range),
            (-range, range),
            s.grid_nx.unwrap_or(DEFAULT_GRID_POINTS),
            s.grid_np.unwrap_or(DEFAULT_GRID_POINTS),
        )?;
        let mut neg = table(case, "negativity", &["tau", "negativity"]);
        for (i, snap) in snaps.iter().enumerate() {
            let w = wigner(&snap.rho, &grid)?;
            if s.wants(Observable::Wigner) {
                let suffix = match snap.tau {
                    Some(_) => format!("wigner_{i}"),
                    None => "wigner_steady".to_string(),
                };
                let mut t = table(case, &suffix, &["x", "p", "w"]);
                match snap.tau {
                    Some(tau) => t.meta("tau", tau),
                    None => t.meta("tau", "steady state"),
                }
                for xi in 0..grid.nx {
                    for pj in 0..grid.np {
                        t.push(vec![grid.x(xi).into(), grid.p(pj).into(), w.at(xi, pj).into()]);
                    }
                }
                tables.push(t);
            }
            neg.push(vec![tau_cell(snap.tau), negativity_volume(&w).into()]);
        }
        if s.wants(Observable::Negativity) {
            tables.push(neg);
        }
    }

    if s.wants(Observable::Pdensity) || s.wants(Observable::Visibility) {
        let range = s.x_range.unwrap_or_else(|| extent.x_range());
        let points = s
            .x_points
            .unwrap_or_else(|| (2.0 * range * POINTS_PER_FRINGE / spacing).ceil() as usize + 1);
        let xs = uniform_grid(-range, range, points);
        let mut pd_table = table(case, "pdensity", &["tau", "x", "p_of_x"]);
        let mut vis = table(case, "visibility", &["tau", "nu", "fringe_spacing", "status"]);
        for snap in snaps {
            let pd = position_density(&snap.rho, &xs)?;
            if s.wants(Observable::Pdensity) {
                for (x, p) in pd.xs.iter().zip(&pd.values) {
                    pd_table.push(vec![tau_cell(snap.tau), (*x).into(), (*p).into()]);
                }
            }
            if s.wants(Observable::Visibility) {
                let row = match visibility(&pd, spacing) {
                    Ok(v) => vec![tau_cell(snap.tau), v.nu.into(), spacing.into(), "ok".into()],
                    Err(Error::NoFringe(_)) => vec![tau_cell(snap.tau), Cell::Empty, spacing.into(), "no_fringe".into()],
                    Err(e) => return Err(e.into()),
                };
                vis.push(row);
            }
        }
        if s.wants(Observable::Pdensity) {
            tables.push(pd_table);
        }
        if s.wants(Observable::Visibility) {
            tables.push(vis);
        }
    }
    Ok(tables)
}

fn langevin(case: &Case) -> CliResult<Vec<Table>> {
    let s = &case.scenario;
    let (alpha, _) = s.amplitudes()?;
    let gamma = s.gamma.unwrap_or(3e-3);
    let nbar = s.nbar.unwrap_or(3.0);
    let theta = match s.theta {
        Some(t) => t,
        None => theta_for_occupation(nbar)?,
    };
    let p = SdeParams {
        gamma,
        theta,
        omega: 1.0,
        dt: s.dt.unwrap_or(1e-3),
        n_traj: s.n_traj.unwrap_or(1000),
        seed: s.seed,
        calculus: s.calculus.unwrap_or(Calculus::Ito),
        nonrwa_mode: s.nonrwa_mode.unwrap_or(NonRwaMode::Substitute),
    };
    p.validate()?;
    let (t_max, t_step, _) = s.series_grid()?;
    let stride = t_step / p.dt;
    if (stride - stride.round()).abs() > 1e-9 * stride || stride.round() < 1.0 {
        return Err(config(format!("t_step = {t_step} is not a multiple of dt = {}", p.dt)));
    }
    let opts = EnsembleOptions {
        t_final: t_max,
        sample_stride: stride.round() as usize,
        window: None,
    };
    let columns: &'static [&'static str] = &["tau", "re_mean_a", "im_mean_a", "mean_n", "stderr_n"];
    let mut tables = Vec::new();
    for v in s.variants.clone().unwrap_or(vec![Variant::Rwa, Variant::Nonrwa]) {
        let ens = run_ensemble(alpha, &p, v, &opts)?;
        let name = match v {
            Variant::Rwa => "rwa",
            Variant::Nonrwa => "nonrwa",
        };
        let mut t = table(case, &format!("moments_{name}"), columns);
        t.meta("theta", theta);
        t.meta("trajectories", ens.n_traj);
        t.meta("discarded", ens.discarded);
        for k in 0..ens.times.len() {
            t.push(vec![
                ens.times[k].into(),
                ens.mean_a[k].re.into(),
                ens.mean_a[k].im.into(),
                ens.mean_abs2[k].into(),
                ens.stderr_abs2[k].into(),
            ]);
        }
        tables.push(t);
    }
    if s.quantum_reference.unwrap_or(true) {
        let params = QedParams { gamma, nbar, omega: 0.0 };
        params.validate()?;
        let space = FockSpace::new(s.dim.unwrap_or_else(|| Damping::TwoPhoton.default_dim(alpha.norm(), nbar)))?;
        let rho0 = DensityMatrix::pure(&coherent_state(alpha, space)?);
        let l = Damping::TwoPhoton.build(space, &params)?;
        let sub = (t_step / auto_dt(&rho0, &l)).ceil().max(1.0);
        let series = evolve_moments(&rho0, &l, t_max, t_step / sub, sub as usize)?;
        let mut t = table(case, "moments_quantum", columns);
        t.meta("dim", space.dim());
        for k in 0..series.times.len() {
            let tau = series.times[k];
            let a = series.mean_a[k] * Complex64::from_polar(1.0, -tau);
            t.push(vec![tau.into(), a.re.into(), a.im.into(), series.mean_n[k].into(), 0.0.into()]);
        }
        tables.push(t);
    }
    Ok(tables)
}
