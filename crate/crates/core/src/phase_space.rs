//! Phase-space observables: Wigner function, position density, fringe
//! visibility and Wigner negativity.
//!
//! Coordinates are dimensionless with a = (x + ip)/√2, so the vacuum is
//! W = e^{−x²−p²}/π and |α⟩ with real α sits at x = √2·α.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::DensityMatrix;

/// Boundary-to-peak ratio above which a grid is said not to cover the state.
pub const COVERAGE_TOLERANCE: f64 = 1e-6;

/// Uniform rectangular grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl PhaseSpaceGrid {
    pub fn new(x: (f64, f64), p: (f64, f64), nx: usize, np: usize) -> Result<Self> {
        if nx < 2 || np < 2 {
            return Err(Error::Domain(format!("grid needs at least 2x2 points, got {nx}x{np}")));
        }
        if !(x.1 > x.0 && p.1 > p.0) {
            return Err(Error::Domain("grid ranges must be increasing".into()));
        }
        Ok(Self {
            x_min: x.0,
            x_max: x.1,
            p_min: p.0,
            p_max: p.1,
            nx,
            np,
        })
    }

    /// [−range, range]² with n points per axis.
    pub fn square(range: f64, n: usize) -> Result<Self> {
        Self::new((-range, range), (-range, range), n, n)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.np).map(|j| self.p(j)).collect()
    }

    /// Warns when the grid is tighter than √2·|α|max + 4 on either axis.
    pub fn check_extent(&self, max_abs_alpha: f64) -> bool {
        let need = SQRT_2 * max_abs_alpha + 4.0;
        let ok = self.x_min <= -need && self.x_max >= need && self.p_min <= -need && self.p_max >= need;
        if !ok {
            log::warn!("phase-space grid does not reach ±{need:.2}");
        }
        ok
    }
}

/// W sampled on a grid; `values[i * np + j]` is W(x_i, p_j).
#[derive(Debug, Clone, PartialEq)]
pub struct WignerField {
    pub grid: PhaseSpaceGrid,
    pub values: Vec<f64>,
}

impl WignerField {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.np + j]
    }

    /// Σ W Δx Δp.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx() * self.grid.dp()
    }

    /// ∫ W dp at every x_i.
    pub fn marginal_x(&self) -> Vec<f64> {
        let np = self.grid.np;
        self.values
            .chunks(np)
            .map(|row| row.iter().sum::<f64>() * self.grid.dp())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn boundary_max(&self) -> f64 {
        let (nx, np) = (self.grid.nx, self.grid.np);
        let mut m = 0.0f64;
        for i in 0..nx {
            m = m.max(self.at(i, 0).abs()).max(self.at(i, np - 1).abs());
        }
        for j in 0..np {
            m = m.max(self.at(0, j).abs()).max(self.at(nx - 1, j).abs());
        }
        m
    }
}

/// Nonzero diagonals of ρ prepared for the Wigner sum: entry j of diagonal k
/// holds (−1)^j (ρ_{j,j+k} + conj ρ_{j+k,j}), halved for k = 0.
struct WignerKernel {
    diagonals: Vec<(usize, Vec<C64>)>,
}

impl WignerKernel {
    fn new(rho: &DensityMatrix) -> Self {
        let r = rho.entries();
        let d = rho.dim();
        let mut diagonals = Vec::new();
        for k in 0..d {
            let mut diag: Vec<C64> = (0..d - k)
                .map(|j| {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    let both = r[(j, j + k)] + r[(j + k, j)].conj();
                    both * if k == 0 { 0.5 * sign } else { sign }
                })
                .collect();
            while diag.last().is_some_and(|c| *c == C64::new(0.0, 0.0)) {
                diag.pop();
            }
            if !diag.is_empty() {
                diagonals.push((k, diag));
            }
        }
        Self { diagonals }
    }

    /// Σ_{mn} ρ_{mn} (−1)^m ⟨n|D(β)|m⟩, with the displacement elements
    /// generated diagonal by diagonal from the normalised Laguerre recurrence
    /// ⟨j+k|D(β)|j⟩ = e^{ik arg β} f_j.
    fn eval(&self, beta: C64) -> f64 {
        let x = beta.norm_sqr();
        let ln_x = x.ln();
        let angle = beta.arg();
        let mut acc = 0.0;
        let mut ln_fact_k = 0.0f64;
        let mut last_k = 0usize;
        for (k, diag) in &self.diagonals {
            let (k, kf) = (*k, *k as f64);
            for i in last_k + 1..=k {
                ln_fact_k += (i as f64).ln();
            }
            last_k = last_k.max(k);
            let mut f = if k == 0 {
                (-0.5 * x).exp()
            } else if x > 0.0 {
                (-0.5 * x + 0.5 * kf * ln_x - 0.5 * ln_fact_k).exp()
            } else {
                0.0
            };
            let mut f_prev = 0.0;
            let mut sum = C64::new(0.0, 0.0);
            for (j, c) in diag.iter().enumerate() {
                sum += c * f;
                let jf = j as f64;
                let next = ((2.0 * jf + 1.0 + kf - x) * f - (jf * (jf + kf)).sqrt() * f_prev)
                    / ((jf + 1.0) * (jf + kf + 1.0)).sqrt();
                f_prev = f;
                f = next;
            }
            acc += (C64::from_polar(1.0, kf * angle) * sum).re;
        }
        acc
    }
}

/// W(x, p) = (1/π) Tr[ρ D(α) Π D†(α)] = (1/π) Σ_{mn} ρ_{mn} (−1)^m ⟨n|D(2α)|m⟩
/// with α = (x + ip)/√2 and Π the parity operator; normalised so that
/// ∫W dx dp = 1.
pub fn wigner_at(rho: &DensityMatrix, x: f64, p: f64) -> f64 {
    WignerKernel::new(rho).eval(C64::new(x, p) * SQRT_2) / PI
}

/// Wigner function on `grid`.
///
/// Fails with a coverage error when |W| on the boundary exceeds 1e−6 of its
/// peak.
pub fn wigner(rho: &DensityMatrix, grid: &PhaseSpaceGrid) -> Result<WignerField> {
    let np = grid.np;
    let kernel = WignerKernel::new(rho);
    let values: Vec<f64> = (0..grid.nx * np)
        .into_par_iter()
        .map(|k| kernel.eval(C64::new(grid.x(k / np), grid.p(k % np)) * SQRT_2) / PI)
        .collect();
    let field = WignerField { grid: *grid, values };
    let peak = field.max_abs();
    let boundary = field.boundary_max();
    if boundary > COVERAGE_TOLERANCE * peak {
        return Err(Error::Coverage { boundary, peak });
    }
    Ok(field)
}

/// Σ max(0, −W) Δx Δp.
pub fn negativity_volume(w: &WignerField) -> f64 {
    w.values.iter().map(|v| (-v).max(0.0)).sum::<f64>() * w.grid.dx() * w.grid.dp()
}

/// `n` evenly spaced points on [min, max].
pub fn uniform_grid(min: f64, max: f64, n: usize) -> Vec<f64> {
    let h = (max - min) / (n.max(2) - 1) as f64;
    (0..n).map(|i| min + i as f64 * h).collect()
}

/// ψ_0(x) … ψ_{dim−1}(x) by the normalised three-term recurrence.
pub fn oscillator_eigenfunctions(x: f64, dim: usize) -> Vec<f64> {
    let mut psi = vec![0.0; dim];
    psi[0] = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if dim > 1 {
        psi[1] = SQRT_2 * x * psi[0];
    }
    for n in 1..dim.saturating_sub(1) {
        let nf = n as f64;
        psi[n + 1] = x * (2.0 / (nf + 1.0)).sqrt() * psi[n] - (nf / (nf + 1.0)).sqrt() * psi[n - 1];
    }
    psi
}

fn density_at(re: &DMatrix<f64>, x: f64) -> f64 {
    let psi = oscillator_eigenfunctions(x, re.nrows());
    let mut acc = 0.0;
    for n in 0..re.ncols() {
        let mut col = 0.0;
        for m in 0..re.nrows() {
            col += re[(m, n)] * psi[m];
        }
        acc += col * psi[n];
    }
    acc
}

/// P(x) = ⟨x|ρ|x⟩ on a 1-d grid.
///
/// When built from a density matrix the density can also be evaluated
/// between grid points, which [`visibility`] uses to refine extrema.
#[derive(Debug, Clone)]
pub struct PositionDensity {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    source: Option<Arc<DMatrix<f64>>>,
}

impl PositionDensity {
    /// Density known only through samples.
    pub fn from_samples(xs: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() != values.len() || xs.len() < 3 {
            return Err(Error::Domain("position density needs matching samples (≥ 3)".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("position grid must be increasing".into()));
        }
        Ok(Self {
            xs,
            values,
            source: None,
        })
    }

    /// P at an arbitrary x; falls back to linear interpolation for
    /// sample-only densities.
    pub fn eval(&self, x: f64) -> f64 {
        if let Some(re) = &self.source {
            return density_at(re, x);
        }
        let k = self.xs.partition_point(|&v| v < x).clamp(1, self.xs.len() - 1);
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let w = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        self.values[k - 1] * (1.0 - w) + self.values[k] * w
    }

    /// Trapezoid ∫ P dx.
    pub fn integral(&self) -> f64 {
        self.xs
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
            .sum()
    }

    /// Same density scaled by `s` (sample-only).
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            xs: self.xs.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
            source: None,
        }
    }
}

/// P(x) = Σ_{mn} ρ_{mn} ψ_m(x) ψ_n(x).
pub fn position_density(rho: &DensityMatrix, xs: &[f64]) -> Result<PositionDensity> {
    if xs.len() < 3 {
        return Err(Error::Domain("position grid needs at least 3 points".into()));
    }
    // ρ is Hermitian and ψ real, so only Re ρ contributes.
    let re = Arc::new(rho.entries().map(|z| z.re));
    let values: Vec<f64> = xs.par_iter().map(|&x| density_at(&re, x)).collect();
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let boundary = values[0].abs().max(values[values.len() - 1].abs());
    if boundary > COVERAGE_TOLERANCE * peak {
        return Err(Error::Coverage { boundary, peak });
    }
    let mut pd = PositionDensity::from_samples(xs.to_vec(), values)?;
    pd.source = Some(re);
    Ok(pd)
}

/// Fringe spacing at an overlap instant for branches α₁, α₂:
/// √2π/(|α₁| + |α₂|), i.e. π/(√2|α|) for a symmetric cat.
pub fn fringe_spacing(alpha1: C64, alpha2: C64) -> f64 {
    SQRT_2 * PI / (alpha1.norm() + alpha2.norm())
}

/// Result of a visibility measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visibility {
    pub nu: f64,
    pub x_max: f64,
    pub p_max: f64,
    pub x_min: f64,
    pub p_min: f64,
}

/// ν = (P_max − P_min)/(P_max + P_min), with P_max the local maximum nearest
/// x = 0 and P_min the first local minimum to its right.
///
/// `spacing` is the expected fringe spacing; no minimum within three
/// spacings is reported as [`Error::NoFringe`].
pub fn visibility(pd: &PositionDensity, spacing: f64) -> Result<Visibility> {
    let xs = &pd.xs;
    let v = &pd.values;
    let n = xs.len();
    if n < 3 {
        return Err(Error::Domain("too few samples for a visibility".into()));
    }
    let h = xs[1] - xs[0];
    if h > spacing / 8.0 {
        log::warn!("position grid step {h:.3e} resolves fewer than 8 points per fringe");
    }
    let imax = (1..n - 1)
        .filter(|&i| v[i] >= v[i - 1] && v[i] >= v[i + 1] && v[i] > 0.0)
        .min_by(|&a, &b| xs[a].abs().total_cmp(&xs[b].abs()))
        .ok_or_else(|| Error::NoFringe("position density has no interior maximum".into()))?;
    let reach = xs[imax] + 3.0 * spacing;
    let imin = (imax + 1..n - 1)
        .take_while(|&i| xs[i] <= reach)
        .find(|&i| v[i] <= v[i - 1] && v[i] <= v[i + 1] && v[i] < v[imax])
        .ok_or_else(|| {
            Error::NoFringe(format!(
                "no minimum within {:.3} to the right of x = {:.3}",
                3.0 * spacing,
                xs[imax]
            ))
        })?;
    let (x_max, p_max) = refine(pd, xs[imax - 1], xs[imax + 1], xs[imax], v[imax], true);
    let (x_min, p_min) = refine(pd, xs[imin - 1], xs[imin + 1], xs[imin], v[imin], false);
    let p_min = p_min.max(0.0);
    let nu = if p_max + p_min > 0.0 {
        ((p_max - p_min) / (p_max + p_min)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(Visibility {
        nu,
        x_max,
        p_max,
        x_min,
        p_min,
    })
}

/// Golden-section polish of a bracketed extremum; keeps the grid value when
/// no continuous density is available or refinement does not improve it.
fn refine(pd: &PositionDensity, lo: f64, hi: f64, x0: f64, v0: f64, maximize: bool) -> (f64, f64) {
    if pd.source.is_none() {
        return (x0, v0);
    }
    let sign = if maximize { -1.0 } else { 1.0 };
    let f = |x: f64| sign * pd.eval(x);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if (b - a).abs() < 1e-12 * (1.0 + x0.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let val = pd.eval(x);
    if sign * val < sign * v0 {
        (x, val)
    } else {
        (x0, v0)
    }
}
