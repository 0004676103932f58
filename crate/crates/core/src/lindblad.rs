//! Markovian master equations for the scalar-QED toy model.
//!
//! Two-photon damping:
//!
//! dρ/dt = −iΩ[a†a, ρ] + γ(n+1) D[a²]ρ + γn D[a†²]ρ,
//!
//! with D[J]ρ = JρJ† − ½{J†J, ρ}; the single-photon comparison model uses
//! J = a, a† instead. Density matrices are column-stacked,
//! vec(ρ)[r + c·dim] = ρ_{rc}, so that vec(AρB) = (Bᵀ ⊗ A) vec(ρ).
//!
//! The superoperator is stored sparse: every term is banded in the number
//! basis, and the dense dim²×dim² matrix would not fit for the larger
//! truncations needed at high temperature.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, FockSpace, Operator};

/// Trace drift that aborts an integration.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

/// Largest accepted dt·‖L‖₁.
pub const STABILITY_LIMIT: f64 = 0.5;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QedParams {
    /// γ/Ω = 1/Q.
    pub gamma: f64,
    /// Bath occupation n(2Ω).
    pub nbar: f64,
    /// Rotation rate; 0 selects the interaction picture.
    pub omega: f64,
}

impl QedParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::Domain(format!("gamma must be nonnegative, got {}", self.gamma)));
        }
        if !(self.nbar >= 0.0 && self.nbar.is_finite()) {
            return Err(Error::Domain(format!("nbar must be nonnegative, got {}", self.nbar)));
        }
        if !self.omega.is_finite() {
            return Err(Error::Domain("omega must be finite".into()));
        }
        if self.gamma > 0.05 {
            log::warn!("gamma = {} is large for the rotating-wave treatment", self.gamma);
        }
        Ok(())
    }
}

/// Which dissipator to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Damping {
    TwoPhoton,
    SinglePhoton,
}

impl Damping {
    pub fn build(self, space: FockSpace, params: &QedParams) -> Result<Liouvillian> {
        match self {
            Damping::TwoPhoton => build_two_photon(space, params),
            Damping::SinglePhoton => build_single_photon(space, params),
        }
    }

    /// Truncation for a run at occupation `nbar` from amplitudes up to
    /// `max_abs_alpha`: the larger of the coherent-state rule and the depth at
    /// which the stationary distribution falls below 1e−8.
    pub fn default_dim(self, max_abs_alpha: f64, nbar: f64) -> usize {
        let coherent = crate::fock::default_dim(max_abs_alpha);
        if !(nbar > 0.0) {
            return coherent;
        }
        let per_level = (1.0 / nbar).ln_1p();
        let step = match self {
            Damping::TwoPhoton => 2.0,
            Damping::SinglePhoton => 1.0,
        };
        let thermal = (step * 1e8f64.ln() / per_level).ceil() as usize + 2;
        coherent.max(thermal)
    }

    /// Stationary state reached from `rho0`.
    ///
    /// Single-photon damping thermalises to p_k ∝ (n/(n+1))^k. Two-photon
    /// damping conserves parity, so each parity sector keeps its initial
    /// weight and relaxes to p_{m+2}/p_m = n/(n+1).
    pub fn steady_state(self, rho0: &DensityMatrix, nbar: f64) -> Result<DensityMatrix> {
        let d = rho0.dim();
        let r = if nbar > 0.0 { nbar / (nbar + 1.0) } else { 0.0 };
        let mut pops = vec![0.0; d];
        match self {
            Damping::SinglePhoton => {
                let mut w = 1.0;
                for p in pops.iter_mut() {
                    *p = w;
                    w *= r;
                }
            }
            Damping::TwoPhoton => {
                let rho_pops = rho0.populations();
                for start in 0..2 {
                    let weight: f64 = rho_pops.iter().skip(start).step_by(2).sum();
                    let mut w = 1.0;
                    let mut total = 0.0;
                    for m in (start..d).step_by(2) {
                        pops[m] = w;
                        total += w;
                        w *= r;
                    }
                    for m in (start..d).step_by(2) {
                        pops[m] *= weight.max(0.0) / total;
                    }
                }
            }
        }
        DensityMatrix::diagonal(rho0.space(), &pops)
    }
}

/// Sparse row-compressed complex matrix.
#[derive(Debug, Clone)]
struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
    /// Real parts when every entry is real, for the cheaper product.
    real: Option<Vec<f64>>,
}

impl Csr {
    fn from_triplets(n: usize, mut trips: Vec<(usize, usize, C64)>) -> Self {
        trips.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(trips.len());
        let mut vals: Vec<C64> = Vec::with_capacity(trips.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trips {
            if last == Some((r, c)) {
                *vals.last_mut().expect("pushed above") += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        let real = vals.iter().all(|v| v.im == 0.0).then(|| vals.iter().map(|v| v.re).collect());
        Self {
            n,
            row_ptr,
            cols,
            vals,
            real,
        }
    }

    fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    fn matvec(&self, x: &[C64], y: &mut [C64]) {
        if let Some(real) = &self.real {
            let body = |(r, out): (usize, &mut C64)| {
                let span = self.row_ptr[r]..self.row_ptr[r + 1];
                let (mut re, mut im) = (0.0, 0.0);
                for (c, v) in self.cols[span.clone()].iter().zip(&real[span]) {
                    let xc = x[*c];
                    re += v * xc.re;
                    im += v * xc.im;
                }
                *out = C64::new(re, im);
            };
            if self.n >= 1 << 14 {
                y.par_iter_mut().enumerate().for_each(body);
            } else {
                y.iter_mut().enumerate().for_each(body);
            }
            return;
        }
        let body = |(r, out): (usize, &mut C64)| {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            let mut acc = ZERO;
            for (c, v) in self.cols[span.clone()].iter().zip(&self.vals[span]) {
                acc += v * x[*c];
            }
            *out = acc;
        };
        if self.n >= 1 << 14 {
            y.par_iter_mut().enumerate().for_each(body);
        } else {
            y.iter_mut().enumerate().for_each(body);
        }
    }

    fn one_norm(&self) -> f64 {
        let mut colsum = vec![0.0; self.n];
        for (c, v) in self.cols.iter().zip(&self.vals) {
            colsum[*c] += v.norm();
        }
        colsum.into_iter().fold(0.0, f64::max)
    }

    /// Submatrix on the (sorted) index set `keep`.
    fn restrict(&self, keep: &[usize]) -> Csr {
        let mut local = vec![usize::MAX; self.n];
        for (i, &g) in keep.iter().enumerate() {
            local[g] = i;
        }
        let mut trips = Vec::new();
        for (i, &g) in keep.iter().enumerate() {
            for (c, v) in self.row(g) {
                if local[c] != usize::MAX {
                    trips.push((i, local[c], v));
                }
            }
        }
        Csr::from_triplets(keep.len(), trips)
    }
}

/// Generator of a master equation acting on column-stacked ρ.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    space: FockSpace,
    matrix: Csr,
    /// Transposed sparsity pattern, for forward reachability.
    col_rows: Vec<Vec<usize>>,
}

fn sparse(op: &DMatrix<C64>) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for c in 0..op.ncols() {
        for r in 0..op.nrows() {
            let v = op[(r, c)];
            if v != ZERO {
                out.push((r, c, v));
            }
        }
    }
    out
}

impl Liouvillian {
    /// L ρ = −i[H, ρ] + Σ_k rate_k·D[J_k]ρ.
    pub fn from_lindblad(hamiltonian: &Operator, jumps: &[(f64, Operator)]) -> Self {
        let space = hamiltonian.space();
        let d = space.dim();
        let id = sparse(&DMatrix::identity(d, d));
        let mut trips = Vec::new();
        // vec(AρB): row (r, c), column (i, j), value A[r,i]·B[j,c].
        let mut push = |coef: C64, a: &[(usize, usize, C64)], b: &[(usize, usize, C64)]| {
            for &(r, i, av) in a {
                for &(j, c, bv) in b {
                    trips.push((r + c * d, i + j * d, coef * av * bv));
                }
            }
        };
        let h = sparse(hamiltonian.entries());
        push(C64::new(0.0, -1.0), &h, &id);
        push(C64::new(0.0, 1.0), &id, &h);
        for (rate, j) in jumps {
            if *rate == 0.0 {
                continue;
            }
            let jd = j.dagger();
            let jdj = sparse(&(jd.entries() * j.entries()));
            push(C64::new(*rate, 0.0), &sparse(j.entries()), &sparse(jd.entries()));
            push(C64::new(-0.5 * rate, 0.0), &jdj, &id);
            push(C64::new(-0.5 * rate, 0.0), &id, &jdj);
        }
        let matrix = Csr::from_triplets(d * d, trips);
        let mut col_rows = vec![Vec::new(); d * d];
        for r in 0..d * d {
            for (c, _) in matrix.row(r) {
                col_rows[c].push(r);
            }
        }
        Self {
            space,
            matrix,
            col_rows,
        }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn nnz(&self) -> usize {
        self.matrix.vals.len()
    }

    /// Dense dim²×dim² copy, for inspection and small-dim checks.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.matrix.n;
        let mut m = DMatrix::zeros(n, n);
        for r in 0..n {
            for (c, v) in self.matrix.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        self.matrix.one_norm()
    }

    /// max over columns of |Σ_n L[(n,n), col]|: zero for a trace-preserving
    /// generator.
    pub fn trace_defect(&self) -> f64 {
        let d = self.space.dim();
        let mut sums = vec![ZERO; d * d];
        for n in 0..d {
            for (c, v) in self.matrix.row(n + n * d) {
                sums[c] += v;
            }
        }
        sums.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// L applied to a density matrix.
    pub fn apply(&self, rho: &DensityMatrix) -> DMatrix<C64> {
        let d = self.space.dim();
        let x = rho.entries().as_slice();
        let mut y = vec![ZERO; d * d];
        self.matrix.matvec(x, &mut y);
        DMatrix::from_vec(d, d, y)
    }

    /// Indices reachable from `start` under repeated application of L.
    fn forward_closure(&self, start: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut stack: Vec<usize> = start.into_iter().collect();
        while let Some(c) = stack.pop() {
            if seen.insert(c) {
                stack.extend(self.col_rows[c].iter().copied().filter(|r| !seen.contains(r)));
            }
        }
        seen
    }

    /// Indices whose evolution feeds into `targets`.
    fn backward_closure(&self, targets: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut stack: Vec<usize> = targets.into_iter().collect();
        while let Some(r) = stack.pop() {
            if seen.insert(r) {
                stack.extend(self.matrix.row(r).map(|(c, _)| c).filter(|c| !seen.contains(c)));
            }
        }
        seen
    }
}

pub fn build_two_photon(space: FockSpace, params: &QedParams) -> Result<Liouvillian> {
    params.validate()?;
    let a = Operator::annihilation(space);
    let a2 = &a * &a;
    let h = scaled(&Operator::number(space), params.omega);
    Ok(Liouvillian::from_lindblad(
        &h,
        &[
            (params.gamma * (params.nbar + 1.0), a2.clone()),
            (params.gamma * params.nbar, a2.dagger()),
        ],
    ))
}

pub fn build_single_photon(space: FockSpace, params: &QedParams) -> Result<Liouvillian> {
    params.validate()?;
    let a = Operator::annihilation(space);
    let h = scaled(&Operator::number(space), params.omega);
    Ok(Liouvillian::from_lindblad(
        &h,
        &[
            (params.gamma * (params.nbar + 1.0), a.clone()),
            (params.gamma * params.nbar, a.dagger()),
        ],
    ))
}

fn scaled(op: &Operator, s: f64) -> Operator {
    Operator::from_entries(op.space(), op.entries().scale(s)).expect("same shape")
}

/// State restricted to the entries that can ever be nonzero or matter.
struct Reduced {
    keep: Vec<usize>,
    matrix: Csr,
    diag: Vec<usize>,
}

impl Reduced {
    fn new(l: &Liouvillian, rho0: &DensityMatrix, needed: Option<BTreeSet<usize>>) -> Self {
        let x = rho0.entries().as_slice();
        let support = (0..x.len()).filter(|&i| x[i] != ZERO);
        let mut set = l.forward_closure(support);
        if let Some(needed) = needed {
            let back = l.backward_closure(needed);
            set = set.intersection(&back).copied().collect();
        }
        let keep: Vec<usize> = set.into_iter().collect();
        let d = l.space.dim();
        let diag = keep
            .iter()
            .enumerate()
            .filter(|(_, &g)| g % d == g / d)
            .map(|(i, _)| i)
            .collect();
        let matrix = l.matrix.restrict(&keep);
        Self { keep, matrix, diag }
    }

    fn one_norm(&self) -> f64 {
        self.matrix.one_norm()
    }

    fn gather(&self, rho: &DensityMatrix) -> Vec<C64> {
        let x = rho.entries().as_slice();
        self.keep.iter().map(|&g| x[g]).collect()
    }

    fn trace(&self, v: &[C64]) -> C64 {
        self.diag.iter().map(|&i| v[i]).sum()
    }
}

struct Rk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        Self {
            k1: vec![ZERO; n],
            k2: vec![ZERO; n],
            k3: vec![ZERO; n],
            k4: vec![ZERO; n],
            tmp: vec![ZERO; n],
        }
    }

    fn step(&mut self, m: &Csr, x: &mut [C64], h: f64) {
        m.matvec(x, &mut self.k1);
        axpy(&mut self.tmp, x, 0.5 * h, &self.k1);
        m.matvec(&self.tmp, &mut self.k2);
        axpy(&mut self.tmp, x, 0.5 * h, &self.k2);
        m.matvec(&self.tmp, &mut self.k3);
        axpy(&mut self.tmp, x, h, &self.k3);
        m.matvec(&self.tmp, &mut self.k4);
        let w = h / 6.0;
        for (i, xi) in x.iter_mut().enumerate() {
            let v = *xi + w * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
            *xi = C64::new(flush(v.re), flush(v.im));
        }
    }
}

/// Components below this are set to zero so that amplitude creeping into
/// empty Fock levels never reaches subnormal range, where arithmetic is
/// orders of magnitude slower.
const FLUSH_BELOW: f64 = 1e-200;

fn flush(v: f64) -> f64 {
    if v.abs() < FLUSH_BELOW {
        0.0
    } else {
        v
    }
}

fn axpy(out: &mut [C64], x: &[C64], s: f64, k: &[C64]) {
    for i in 0..out.len() {
        out[i] = x[i] + s * k[i];
    }
}

fn check_stability(norm: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Step(format!("dt must be positive, got {dt}")));
    }
    if dt * norm >= STABILITY_LIMIT {
        return Err(Error::Stability(format!(
            "dt*|L|_1 = {:.3} exceeds {STABILITY_LIMIT}; reduce dt below {:.3e}",
            dt * norm,
            STABILITY_LIMIT / norm
        )));
    }
    Ok(())
}

/// Step index of `t` on the dt lattice.
fn step_index(t: f64, dt: f64) -> Result<usize> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Step(format!("snapshot time {t} must be nonnegative")));
    }
    let k = (t / dt).round();
    if (k * dt - t).abs() > 1e-9 * t.max(1.0) {
        return Err(Error::Step(format!("time {t} is not a multiple of dt = {dt}")));
    }
    Ok(k as usize)
}

fn check_trace(tr: C64, t: f64) -> Result<()> {
    let drift = (tr - 1.0).norm();
    if !(drift <= TRACE_DRIFT_LIMIT) {
        return Err(Error::Stability(format!("trace drift {drift:.3e} at t = {t:.4}")));
    }
    Ok(())
}

/// dt = 2π·1e−3, halved until dt·‖L‖₁ < 0.5 on the entries reachable
/// from `rho0`.
pub fn auto_dt(rho0: &DensityMatrix, l: &Liouvillian) -> f64 {
    stable_dt(Reduced::new(l, rho0, None).one_norm())
}

fn stable_dt(norm: f64) -> f64 {
    let mut dt = 2.0 * PI * 1e-3;
    while dt * norm >= STABILITY_LIMIT {
        dt *= 0.5;
    }
    dt
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub rho: DensityMatrix,
}

/// Fixed-step RK4 with snapshots at `times` (each a multiple of `dt`).
///
/// Snapshots are re-symmetrised, (ρ + ρ†)/2; positivity is never imposed.
pub fn evolve(rho0: &DensityMatrix, l: &Liouvillian, times: &[f64], dt: f64) -> Result<Vec<Snapshot>> {
    if rho0.space() != l.space {
        return Err(Error::Domain("state and generator dimensions differ".into()));
    }
    let red = Reduced::new(l, rho0, None);
    check_stability(red.one_norm(), dt)?;
    let mut order: Vec<(usize, usize)> = times
        .iter()
        .enumerate()
        .map(|(i, &t)| step_index(t, dt).map(|k| (k, i)))
        .collect::<Result<_>>()?;
    order.sort_unstable();
    let mut x = red.gather(rho0);
    let mut rk = Rk4::new(x.len());
    let d = rho0.dim();
    let mut out: Vec<Option<Snapshot>> = vec![None; times.len()];
    let mut step = 0usize;
    for (k, i) in order {
        while step < k {
            rk.step(&red.matrix, &mut x, dt);
            step += 1;
            if step.is_multiple_of(1024) {
                check_trace(red.trace(&x), step as f64 * dt)?;
            }
        }
        check_trace(red.trace(&x), times[i])?;
        let mut full = vec![ZERO; d * d];
        for (v, &g) in x.iter().zip(&red.keep) {
            full[g] = *v;
        }
        let rho = DensityMatrix::from_raw(rho0.space(), DMatrix::from_vec(d, d, full))?.symmetrized();
        out[i] = Some(Snapshot { t: times[i], rho });
    }
    Ok(out.into_iter().map(|s| s.expect("every time visited")).collect())
}

/// ⟨a⟩, ⟨a†a⟩ and ⟨a†a²⟩ on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSeries {
    pub dt: f64,
    pub times: Vec<f64>,
    pub mean_a: Vec<C64>,
    pub mean_n: Vec<f64>,
    pub mean_adag_a2: Vec<C64>,
}

/// Integrate only what the low moments depend on, recording every
/// `stride` steps up to `t_final`.
pub fn evolve_moments(
    rho0: &DensityMatrix,
    l: &Liouvillian,
    t_final: f64,
    dt: f64,
    stride: usize,
) -> Result<MomentSeries> {
    if rho0.space() != l.space {
        return Err(Error::Domain("state and generator dimensions differ".into()));
    }
    if stride == 0 {
        return Err(Error::Step("stride must be at least 1".into()));
    }
    let d = rho0.dim();
    let needed: BTreeSet<usize> = (0..d)
        .map(|n| n + n * d)
        .chain((1..d).map(|n| n + (n - 1) * d))
        .collect();
    let red = Reduced::new(l, rho0, Some(needed));
    check_stability(red.one_norm(), dt)?;
    let steps = step_index(t_final, dt)?;

    // Observable weights on the reduced vector.
    let mut w_a = Vec::new();
    let mut w_n = Vec::new();
    let mut w_a2 = Vec::new();
    for (i, &g) in red.keep.iter().enumerate() {
        let (r, c) = (g % d, g / d);
        if r == c {
            w_n.push((i, r as f64));
        } else if r == c + 1 {
            w_a.push((i, (r as f64).sqrt()));
            w_a2.push((i, (r as f64).sqrt() * c as f64));
        }
    }
    let mut series = MomentSeries {
        dt: dt * stride as f64,
        times: Vec::new(),
        mean_a: Vec::new(),
        mean_n: Vec::new(),
        mean_adag_a2: Vec::new(),
    };
    let record = |x: &[C64], t: f64, s: &mut MomentSeries| {
        s.times.push(t);
        s.mean_a.push(w_a.iter().map(|&(i, w)| x[i] * w).sum());
        s.mean_n.push(w_n.iter().map(|&(i, w)| x[i].re * w).sum());
        s.mean_adag_a2.push(w_a2.iter().map(|&(i, w)| x[i] * w).sum());
    };
    let mut x = red.gather(rho0);
    let mut rk = Rk4::new(x.len());
    record(&x, 0.0, &mut series);
    for step in 1..=steps {
        rk.step(&red.matrix, &mut x, dt);
        if step % stride == 0 {
            let t = step as f64 * dt;
            if red.diag.len() == d {
                check_trace(red.trace(&x), t)?;
            }
            record(&x, t, &mut series);
        }
    }
    Ok(series)
}

/// max over interior samples of |d⟨a⟩/dt − (−iΩ⟨a⟩ − γ⟨a†a²⟩ + 2γn⟨a⟩)|,
/// with the derivative taken by centred differences.
pub fn moment_residual(series: &MomentSeries, params: &QedParams) -> f64 {
    let h = series.dt;
    let a = &series.mean_a;
    let mut worst = 0.0f64;
    for k in 1..a.len().saturating_sub(1) {
        let deriv = (a[k + 1] - a[k - 1]) / (2.0 * h);
        let rhs = C64::new(0.0, -params.omega) * a[k] - params.gamma * series.mean_adag_a2[k]
            + 2.0 * params.gamma * params.nbar * a[k];
        worst = worst.max((deriv - rhs).norm());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{cat_density, coherent_state, parity_expectation, StateVector};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn qp(gamma: f64, nbar: f64, omega: f64) -> QedParams {
        QedParams { gamma, nbar, omega }
    }

    /// Dense oracle: −i[H,ρ] + Σ rate·(JρJ† − ½{J†J,ρ}) by matrix products.
    fn dense_rhs(rho: &DMatrix<C64>, h: &DMatrix<C64>, jumps: &[(f64, DMatrix<C64>)]) -> DMatrix<C64> {
        let i = c(0.0, 1.0);
        let mut out = (h * rho - rho * h) * (-i);
        for (k, j) in jumps {
            let jd = j.adjoint();
            let jdj = &jd * j;
            out += (j * rho * &jd - (&jdj * rho + rho * &jdj).scale(0.5)).scale(*k);
        }
        out
    }

    #[test]
    fn matches_dense_oracle() {
        let space = FockSpace::new(12).unwrap();
        let p = qp(0.02, 0.7, 1.0);
        let l = build_two_photon(space, &p).unwrap();
        let rho = cat_density(c(0.8, 0.3), c(-0.5, 0.9), space).unwrap();
        let a = Operator::annihilation(space);
        let a2 = (&a * &a).entries().clone();
        let want = dense_rhs(
            rho.entries(),
            Operator::number(space).entries(),
            &[(0.02 * 1.7, a2.clone()), (0.02 * 0.7, a2.adjoint())],
        );
        let got = l.apply(&rho);
        assert!((got - want).camax() < 1e-14);
    }

    #[test]
    fn ground_pair_stationary_at_zero_temperature() {
        let space = FockSpace::new(6).unwrap();
        let l = build_two_photon(space, &qp(0.1, 0.0, 1.0)).unwrap();
        for n in 0..2 {
            let rho = DensityMatrix::pure(&StateVector::basis(space, n).unwrap());
            assert!(l.apply(&rho).camax() == 0.0);
        }
        let l1 = build_single_photon(space, &qp(0.1, 0.0, 1.0)).unwrap();
        let vac = DensityMatrix::pure(&StateVector::basis(space, 0).unwrap());
        assert!(l1.apply(&vac).camax() == 0.0);
    }

    #[test]
    fn trace_preserving() {
        let space = FockSpace::new(12).unwrap();
        for damping in [Damping::TwoPhoton, Damping::SinglePhoton] {
            let l = damping.build(space, &qp(0.01, 3.0, 1.0)).unwrap();
            assert!(l.trace_defect() < 1e-12);
            let dense = l.to_dense();
            // Left action of the stacked identity.
            for col in 0..144 {
                let s: C64 = (0..12).map(|n| dense[(n + 12 * n, col)]).sum();
                assert!(s.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn energy_rate_matches_adjoint_oracle() {
        // d⟨N⟩/dt = Tr(N·Lρ) against Tr(L†(N)·ρ) with
        // L†(N) = γ Σ_k rate_k (J†NJ − ½{J†J, N}).
        let space = FockSpace::new(40).unwrap();
        let gamma = 0.01;
        let l = build_two_photon(space, &qp(gamma, 0.0, 1.0)).unwrap();
        let rho = DensityMatrix::pure(&coherent_state(c(2.0, 0.0), space).unwrap());
        let lr = l.apply(&rho);
        let nop = Operator::number(space);
        let rate = (nop.entries() * &lr).trace();
        let a = Operator::annihilation(space);
        let j = (&a * &a).entries().clone();
        let jd = j.adjoint();
        let adj = (&jd * nop.entries() * &j - (&jd * &j * nop.entries() + nop.entries() * &jd * &j).scale(0.5))
            .scale(gamma);
        let want = (&adj * rho.entries()).trace();
        assert_abs_diff_eq!(rate.re, want.re, epsilon = 1e-12);
        // For |α⟩: −2γ⟨a†²a²⟩ = −2γ|α|⁴.
        assert_abs_diff_eq!(rate.re, -2.0 * gamma * 16.0, epsilon = 1e-9);
    }

    #[test]
    fn free_rotation() {
        let space = FockSpace::new(30).unwrap();
        let l = build_two_photon(space, &qp(0.0, 0.0, 1.0)).unwrap();
        let rho = cat_density(c(2.0, 0.0), c(-1.0, 1.0), space).unwrap();
        let dt = 2.0 * PI / 6000.0;
        let snaps = evolve(&rho, &l, &[2.0 * PI, PI / 3.0], dt).unwrap();
        let want = rho.rotated(PI / 3.0);
        assert!((snaps[1].rho.entries() - want.entries()).camax() < 1e-9);
        assert!((snaps[0].rho.entries() - rho.entries()).camax() < 1e-8);
    }

    #[test]
    fn single_photon_amplitude_decay() {
        let space = FockSpace::new(30).unwrap();
        let gamma = 0.05;
        let l = build_single_photon(space, &qp(gamma, 0.0, 1.0)).unwrap();
        let rho = DensityMatrix::pure(&coherent_state(c(1.5, 0.0), space).unwrap());
        let series = evolve_moments(&rho, &l, 2.0, 1e-3, 100).unwrap();
        for (t, a) in series.times.iter().zip(&series.mean_a) {
            let want = C64::from_polar(1.5 * (-0.5 * gamma * t).exp(), -t);
            assert!((a - want).norm() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn rejects_off_lattice_times_and_large_steps() {
        let space = FockSpace::new(10).unwrap();
        let l = build_two_photon(space, &qp(0.01, 1.0, 1.0)).unwrap();
        let rho = DensityMatrix::pure(&StateVector::basis(space, 2).unwrap());
        assert_eq!(evolve(&rho, &l, &[0.15], 0.1).unwrap_err().kind(), "StepError");
        assert_eq!(evolve(&rho, &l, &[1.0], 1.0).unwrap_err().kind(), "StabilityError");
    }

    #[test]
    fn parity_conserved() {
        let space = FockSpace::new(30).unwrap();
        let l = build_two_photon(space, &qp(0.01, 2.0, 0.0)).unwrap();
        let rho = cat_density(c(2.0, 0.0), c(-2.0, 0.0), space)
            .unwrap()
            .mix(&DensityMatrix::pure(&StateVector::basis(space, 1).unwrap()), 0.6)
            .unwrap();
        let p0 = parity_expectation(&rho);
        let dt = auto_dt(&rho, &l);
        let times: Vec<f64> = (1..=5).map(|k| k as f64 * 2000.0 * dt).collect();
        for s in evolve(&rho, &l, &times, dt).unwrap() {
            assert!((parity_expectation(&s.rho) - p0).abs() < 1e-8);
        }
    }

    #[test]
    fn default_dims() {
        assert_eq!(Damping::TwoPhoton.default_dim(3.0, 0.0), 37);
        assert_eq!(Damping::TwoPhoton.default_dim(3.0, 3.0), 131);
        assert_eq!(Damping::SinglePhoton.default_dim(3.0, 3.0), 67);
        assert_eq!(Damping::TwoPhoton.default_dim(5.0, 0.01), 65);
    }

    #[test]
    fn steady_states() {
        let space = FockSpace::new(120).unwrap();
        let rho = cat_density(c(1.0, 0.0), c(-1.0, 0.0), space).unwrap();
        let ss = Damping::TwoPhoton.steady_state(&rho, 3.0).unwrap();
        assert_abs_diff_eq!(ss.mean_number(), 6.0, epsilon = 1e-4);
        let l = build_two_photon(space, &qp(0.01, 3.0, 1.0)).unwrap();
        assert!(l.apply(&ss).camax() < 1e-12);
        let th = Damping::SinglePhoton.steady_state(&rho, 0.5).unwrap();
        assert_abs_diff_eq!(th.mean_number(), 0.5, epsilon = 1e-10);
        let l1 = build_single_photon(space, &qp(0.01, 0.5, 1.0)).unwrap();
        assert!(l1.apply(&th).camax() < 1e-12);
    }
}
