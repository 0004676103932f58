//! Truncated Fock-space algebra.
//!
//! Everything downstream works in units with ħ = Ω = 1: time is τ = Ωt,
//! position is x√(MΩ/ħ) and momentum p/√(MΩħ), so that a = (x + ip)/√2.
//! States and operators are dense complex matrices over the number basis
//! |0⟩ … |dim−1⟩.

use std::fmt;
use std::ops::Mul;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Retained norm² below which a coherent state is rejected as truncated.
pub const TRUNCATION_TOLERANCE: f64 = 1e-6;

/// Number of retained Fock levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockSpace {
    dim: usize,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Dimension(dim));
        }
        Ok(Self { dim })
    }

    /// Space sized by [`default_dim`] for the largest of `amplitudes`.
    pub fn for_amplitudes(amplitudes: &[C64]) -> Self {
        let max = amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
        Self {
            dim: default_dim(max),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// ceil(|α|² + 6|α| + 10): keeps the Poisson tail of |α⟩ far below 1e-10.
pub fn default_dim(max_abs_alpha: f64) -> usize {
    let a = max_abs_alpha.abs();
    (a * a + 6.0 * a + 10.0).ceil() as usize
}

/// A dense operator on a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: FockSpace,
    entries: DMatrix<C64>,
}

impl Operator {
    pub fn from_entries(space: FockSpace, entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != space.dim || entries.ncols() != space.dim {
            return Err(Error::Domain(format!(
                "operator is {}x{}, space has dim {}",
                entries.nrows(),
                entries.ncols(),
                space.dim
            )));
        }
        Ok(Self { space, entries })
    }

    pub fn identity(space: FockSpace) -> Self {
        Self {
            space,
            entries: DMatrix::identity(space.dim, space.dim),
        }
    }

    /// Ladder operator a: ⟨n−1|a|n⟩ = √n.
    pub fn annihilation(space: FockSpace) -> Self {
        let d = space.dim;
        let mut m = DMatrix::zeros(d, d);
        for n in 1..d {
            m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        Self { space, entries: m }
    }

    pub fn creation(space: FockSpace) -> Self {
        Self::annihilation(space).dagger()
    }

    /// a†a = diag(0, 1, …, dim−1).
    pub fn number(space: FockSpace) -> Self {
        Self::diagonal(space, |n| n as f64)
    }

    /// (−1)^{a†a}.
    pub fn parity(space: FockSpace) -> Self {
        Self::diagonal(space, |n| if n % 2 == 0 { 1.0 } else { -1.0 })
    }

    fn diagonal(space: FockSpace, f: impl Fn(usize) -> f64) -> Self {
        let d = space.dim;
        let mut m = DMatrix::zeros(d, d);
        for n in 0..d {
            m[(n, n)] = C64::new(f(n), 0.0);
        }
        Self { space, entries: m }
    }

    /// Displacement D(β) = exp(βa† − β*a), restricted to the retained block.
    ///
    /// The entries are the exact infinite-space matrix elements ⟨m|D(β)|n⟩,
    /// not the exponential of the truncated generator.
    pub fn displacement(space: FockSpace, beta: C64) -> Self {
        Self {
            space,
            entries: displacement_elements(beta, space.dim),
        }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn dagger(&self) -> Self {
        Self {
            space: self.space,
            entries: self.entries.adjoint(),
        }
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        Operator {
            space: self.space,
            entries: &self.entries * &other.entries - &other.entries * &self.entries,
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        Operator {
            space: self.space,
            entries: &self.entries * &rhs.entries,
        }
    }
}

/// ⟨m|D(β)|n⟩ for 0 ≤ m, n < dim.
///
/// For m = j + k ≥ n = j the element is f_j e^{ik arg β} with
/// f_j = √(j!/(j+k)!) e^{−x/2} x^{k/2} L_j^{(k)}(x), x = |β|², obtained from
/// the Laguerre three-term recurrence in normalised form. |f_j| ≤ 1 keeps it
/// free of overflow for large |β|; elements above the diagonal follow from
/// D(β)† = D(−β).
pub(crate) fn displacement_elements(beta: C64, dim: usize) -> DMatrix<C64> {
    let mut d = DMatrix::zeros(dim, dim);
    let x = beta.norm_sqr();
    let ln_x = x.ln();
    let phase = if x > 0.0 { beta / x.sqrt() } else { C64::new(1.0, 0.0) };
    let mut ln_fact_k = 0.0f64;
    let mut ph = C64::new(1.0, 0.0);
    let mut f = vec![0.0f64; dim];
    for k in 0..dim {
        if k > 0 {
            ln_fact_k += (k as f64).ln();
            ph *= phase;
        }
        let len = dim - k;
        f[0] = if k == 0 {
            (-0.5 * x).exp()
        } else if x > 0.0 {
            (-0.5 * x + 0.5 * k as f64 * ln_x - 0.5 * ln_fact_k).exp()
        } else {
            0.0
        };
        for j in 0..len.saturating_sub(1) {
            let jf = j as f64;
            let kf = k as f64;
            let prev = if j > 0 { (jf * (jf + kf)).sqrt() * f[j - 1] } else { 0.0 };
            f[j + 1] = ((2.0 * jf + 1.0 + kf - x) * f[j] - prev) / ((jf + 1.0) * (jf + kf + 1.0)).sqrt();
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for j in 0..len {
            d[(j + k, j)] = ph * f[j];
            if k > 0 {
                d[(j, j + k)] = ph.conj() * (sign * f[j]);
            }
        }
    }
    d
}

/// Pure state in the number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: FockSpace,
    amplitudes: DVector<C64>,
    truncation_deficit: f64,
}

impl StateVector {
    pub fn basis(space: FockSpace, n: usize) -> Result<Self> {
        if n >= space.dim {
            return Err(Error::Domain(format!(
                "basis state {n} outside dim {}",
                space.dim
            )));
        }
        let mut amplitudes = DVector::zeros(space.dim);
        amplitudes[n] = C64::new(1.0, 0.0);
        Ok(Self {
            space,
            amplitudes,
            truncation_deficit: 0.0,
        })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    /// 1 − (norm² before renormalisation).
    pub fn truncation_deficit(&self) -> f64 {
        self.truncation_deficit
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn expectation(&self, op: &Operator) -> C64 {
        self.amplitudes.dotc(&(op.entries() * &self.amplitudes))
    }
}

/// Coherent state |α⟩ with c_{n+1} = c_n·α/√(n+1), renormalised after
/// truncation.
pub fn coherent_state(alpha: C64, space: FockSpace) -> Result<StateVector> {
    let d = space.dim;
    if alpha.norm_sqr() > 0.5 * d as f64 {
        log::warn!(
            "|alpha|^2 = {:.2} exceeds dim/2 = {}; truncation may be inadequate",
            alpha.norm_sqr(),
            d / 2
        );
    }
    let mut c = DVector::zeros(d);
    c[0] = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 1..d {
        c[n] = c[n - 1] * alpha / (n as f64).sqrt();
    }
    let norm_sq: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    // Underflow of e^{-|α|²/2} for huge |α| also lands here.
    if !(norm_sq >= 1.0 - TRUNCATION_TOLERANCE) {
        return Err(Error::Truncation {
            alpha: format!("{alpha}"),
            dim: d,
            norm_sq,
            deficit: 1.0 - norm_sq,
        });
    }
    c.unscale_mut(norm_sq.sqrt());
    Ok(StateVector {
        space,
        amplitudes: c,
        truncation_deficit: 1.0 - norm_sq,
    })
}

/// Density matrix in the number basis.
///
/// Invariants (checked by [`DensityMatrix::new`]): Hermitian to 1e-12 and
/// unit trace to 1e-10. Positivity is diagnosed, never enforced.
#[derive(Clone, PartialEq)]
pub struct DensityMatrix {
    space: FockSpace,
    entries: DMatrix<C64>,
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityMatrix")
            .field("dim", &self.space.dim)
            .field("trace", &self.trace())
            .finish()
    }
}

pub const HERMITICITY_TOLERANCE: f64 = 1e-12;
pub const TRACE_TOLERANCE: f64 = 1e-10;

impl DensityMatrix {
    pub fn new(space: FockSpace, entries: DMatrix<C64>) -> Result<Self> {
        let rho = Self::from_raw(space, entries)?;
        let herm = rho.hermiticity_error();
        if herm > HERMITICITY_TOLERANCE {
            return Err(Error::Domain(format!(
                "density matrix not Hermitian: max |rho - rho^dag| = {herm:.3e}"
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOLERANCE || tr.im.abs() > TRACE_TOLERANCE {
            return Err(Error::Domain(format!("density matrix trace is {tr}")));
        }
        Ok(rho)
    }

    pub(crate) fn from_raw(space: FockSpace, entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != space.dim || entries.ncols() != space.dim {
            return Err(Error::Domain(format!(
                "matrix is {}x{}, space has dim {}",
                entries.nrows(),
                entries.ncols(),
                space.dim
            )));
        }
        Ok(Self { space, entries })
    }

    pub fn pure(state: &StateVector) -> Self {
        Self {
            space: state.space,
            entries: &state.amplitudes * state.amplitudes.adjoint(),
        }
    }

    /// Diagonal state with the given populations (normalised to unit trace).
    pub fn diagonal(space: FockSpace, populations: &[f64]) -> Result<Self> {
        if populations.len() != space.dim {
            return Err(Error::Domain(format!(
                "{} populations for dim {}",
                populations.len(),
                space.dim
            )));
        }
        let total: f64 = populations.iter().sum();
        if !(total > 0.0) || populations.iter().any(|p| *p < 0.0) {
            return Err(Error::Domain("populations must be nonnegative with positive sum".into()));
        }
        let mut m = DMatrix::zeros(space.dim, space.dim);
        for (n, p) in populations.iter().enumerate() {
            m[(n, n)] = C64::new(p / total, 0.0);
        }
        Ok(Self { space, entries: m })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.space.dim).map(|n| self.entries[(n, n)].re).collect()
    }

    /// max |ρ − ρ†| over entries.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.space.dim;
        let mut worst = 0.0f64;
        for c in 0..d {
            for r in c..d {
                worst = worst.max((self.entries[(r, c)] - self.entries[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.entries + self.entries.adjoint()).scale(0.5);
        SymmetricEigen::new(h)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.entries + self.entries.adjoint()).scale(0.5);
        let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// Tr(ρ A).
    pub fn expectation(&self, op: &Operator) -> C64 {
        let d = self.space.dim;
        let mut acc = C64::new(0.0, 0.0);
        for c in 0..d {
            for r in 0..d {
                acc += self.entries[(c, r)] * op.entries[(r, c)];
            }
        }
        acc
    }

    /// ⟨a⟩ = Σ √(n+1) ρ_{n+1,n}.
    pub fn mean_a(&self) -> C64 {
        (0..self.space.dim - 1)
            .map(|n| self.entries[(n + 1, n)] * ((n + 1) as f64).sqrt())
            .sum()
    }

    /// ⟨a†a⟩.
    pub fn mean_number(&self) -> f64 {
        (0..self.space.dim)
            .map(|n| n as f64 * self.entries[(n, n)].re)
            .sum()
    }

    /// Free evolution e^{−iτN} ρ e^{iτN}: ρ_{mn} → ρ_{mn} e^{−i(m−n)τ}.
    pub fn rotated(&self, tau: f64) -> Self {
        let mut out = self.entries.clone();
        for c in 0..self.space.dim {
            for r in 0..self.space.dim {
                let phase = C64::from_polar(1.0, -(r as f64 - c as f64) * tau);
                out[(r, c)] *= phase;
            }
        }
        Self {
            space: self.space,
            entries: out,
        }
    }

    /// (ρ + ρ†)/2.
    pub fn symmetrized(mut self) -> Self {
        let h = (&self.entries + self.entries.adjoint()).scale(0.5);
        self.entries = h;
        self
    }

    /// Convex combination w·self + (1−w)·other.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::Domain("mixing states of different dimension".into()));
        }
        Ok(Self {
            space: self.space,
            entries: self.entries.scale(w) + other.entries.scale(1.0 - w),
        })
    }
}

/// ρ = N(|α₁⟩+|α₂⟩)(⟨α₁|+⟨α₂|), N = 1/(2 + 2 Re⟨α₁|α₂⟩).
pub fn cat_density(alpha1: C64, alpha2: C64, space: FockSpace) -> Result<DensityMatrix> {
    let s1 = coherent_state(alpha1, space)?;
    let s2 = coherent_state(alpha2, space)?;
    let norm = 2.0 + 2.0 * s1.inner(&s2).re;
    if norm <= 1e-300 {
        return Err(Error::Domain(format!(
            "cat branches {alpha1} and {alpha2} cancel"
        )));
    }
    let psi = (&s1.amplitudes + &s2.amplitudes).unscale(norm.sqrt());
    Ok(DensityMatrix {
        space,
        entries: &psi * psi.adjoint(),
    })
}

/// Bose occupation at twice the oscillator frequency: 1/(e^{2βħΩ} − 1).
pub fn thermal_occupation(beta_hw: f64) -> Result<f64> {
    if !(beta_hw > 0.0) {
        return Err(Error::Domain(format!(
            "inverse temperature must be positive, got {beta_hw}"
        )));
    }
    Ok(1.0 / (2.0 * beta_hw).exp_m1())
}

/// Inverse of [`thermal_occupation`]: βħΩ = ln(1 + 1/n)/2.
pub fn beta_for_occupation(nbar: f64) -> Result<f64> {
    if !(nbar > 0.0) {
        return Err(Error::Domain(format!(
            "occupation must be positive, got {nbar}"
        )));
    }
    Ok(0.5 * (1.0 / nbar).ln_1p())
}

/// Σ_n (−1)^n ρ_nn.
pub fn parity_expectation(rho: &DensityMatrix) -> f64 {
    rho.populations()
        .iter()
        .enumerate()
        .map(|(n, p)| if n % 2 == 0 { *p } else { -*p })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rejects_tiny_space() {
        assert_eq!(FockSpace::new(1), Err(Error::Dimension(1)));
        assert!(FockSpace::new(2).is_ok());
    }

    #[test]
    fn annihilation_dim2() {
        let a = Operator::annihilation(FockSpace::new(2).unwrap());
        let e = a.entries();
        assert_eq!(e[(0, 1)], c(1.0, 0.0));
        assert_eq!(e[(0, 0)], c(0.0, 0.0));
        assert_eq!(e[(1, 0)], c(0.0, 0.0));
        assert_eq!(e[(1, 1)], c(0.0, 0.0));
    }

    #[test]
    fn ladder_elements_exact() {
        let space = FockSpace::new(12).unwrap();
        let a = Operator::annihilation(space);
        for m in 0..12 {
            for n in 0..12 {
                let want = if m + 1 == n { (n as f64).sqrt() } else { 0.0 };
                assert_eq!(a.entries()[(m, n)], c(want, 0.0));
            }
        }
    }

    #[test]
    fn number_from_ladder() {
        let space = FockSpace::new(9).unwrap();
        let a = Operator::annihilation(space);
        let n = &a.dagger() * &a;
        for i in 0..9 {
            for j in 0..9 {
                let want = if i == j { i as f64 } else { 0.0 };
                assert_abs_diff_eq!(n.entries()[(i, j)].re, want, epsilon = 1e-14);
                assert_abs_diff_eq!(n.entries()[(i, j)].im, 0.0);
            }
        }
    }

    #[test]
    fn truncated_commutator() {
        // Oracle: explicit triple loop over the ladder matrices.
        let d = 7;
        let space = FockSpace::new(d).unwrap();
        let a = Operator::annihilation(space);
        let ad = a.dagger();
        let comm = a.commutator(&ad);
        let mut brute = vec![vec![0.0; d]; d];
        for i in 0..d {
            for j in 0..d {
                let mut s = 0.0;
                for k in 0..d {
                    s += a.entries()[(i, k)].re * ad.entries()[(k, j)].re
                        - ad.entries()[(i, k)].re * a.entries()[(k, j)].re;
                }
                brute[i][j] = s;
            }
        }
        for i in 0..d {
            for j in 0..d {
                let want = if i == j {
                    if i == d - 1 {
                        1.0 - d as f64
                    } else {
                        1.0
                    }
                } else {
                    0.0
                };
                assert_abs_diff_eq!(brute[i][j], want, epsilon = 1e-12);
                assert_abs_diff_eq!(comm.entries()[(i, j)].re, want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn vacuum_coherent_state() {
        let s = coherent_state(c(0.0, 0.0), FockSpace::new(5).unwrap()).unwrap();
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
        assert!(s.amplitudes().iter().skip(1).all(|z| *z == c(0.0, 0.0)));
        assert_eq!(s.truncation_deficit(), 0.0);
    }

    #[test]
    fn coherent_truncation_deficit() {
        // Oracle: Poisson tail Σ_{n≥60} e^{-9} 9^n/n!, summed in log space.
        let lam: f64 = 9.0;
        let mut tail = 0.0;
        let mut lg = 0.0f64; // ln n!
        for n in 1..400u32 {
            lg += (n as f64).ln();
            if n >= 60 {
                tail += (-lam + n as f64 * lam.ln() - lg).exp();
            }
        }
        let s = coherent_state(c(3.0, 0.0), FockSpace::new(60).unwrap()).unwrap();
        assert!(tail < 1e-10);
        assert!(s.truncation_deficit() < 1e-10);
        assert_abs_diff_eq!(s.truncation_deficit(), tail, epsilon = 1e-13);
    }

    #[test]
    fn coherent_mean_amplitude() {
        let space = FockSpace::new(60).unwrap();
        let s = coherent_state(c(3.0, 0.0), space).unwrap();
        // Oracle: Σ conj(c_n) √(n+1) c_{n+1}.
        let amp = s.amplitudes();
        let direct: C64 = (0..59)
            .map(|n| amp[n].conj() * ((n + 1) as f64).sqrt() * amp[n + 1])
            .sum();
        assert_abs_diff_eq!(direct.re, 3.0, epsilon = 1e-9);
        let via_op = s.expectation(&Operator::annihilation(space));
        assert_abs_diff_eq!(via_op.re, 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(via_op.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn coherent_truncation_error() {
        let err = coherent_state(c(6.0, 0.0), FockSpace::new(20).unwrap()).unwrap_err();
        assert_eq!(err.kind(), "TruncationError");
    }

    #[test]
    fn default_dimension() {
        assert_eq!(default_dim(5.0), 65);
        assert_eq!(default_dim(0.0), 10);
        assert_eq!(default_dim(3.0), 37);
    }

    #[test]
    fn cat_identical_branches_is_pure_coherent() {
        let space = FockSpace::new(40).unwrap();
        let alpha = c(2.0, 0.5);
        let cat = cat_density(alpha, alpha, space).unwrap();
        let pure = DensityMatrix::pure(&coherent_state(alpha, space).unwrap());
        assert!((cat.entries() - pure.entries()).camax() < 1e-14);
    }

    #[test]
    fn even_cat_has_even_support() {
        let cat = cat_density(c(3.0, 0.0), c(-3.0, 0.0), FockSpace::new(50).unwrap()).unwrap();
        for (n, p) in cat.populations().iter().enumerate() {
            if n % 2 == 1 {
                assert!(p.abs() < 1e-12, "population {n} = {p}");
            }
        }
        assert_abs_diff_eq!(parity_expectation(&cat), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn cat_unit_trace() {
        let cat = cat_density(c(3.0, 0.0), c(-5.0, 0.0), FockSpace::new(70).unwrap()).unwrap();
        assert_abs_diff_eq!(cat.trace().re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cat.trace().im, 0.0, epsilon = 1e-12);
        assert!(DensityMatrix::new(cat.space(), cat.entries().clone()).is_ok());
    }

    #[test]
    fn cat_rank_at_most_two() {
        // A coherent superposition is a pure state, so the bound is met with
        // rank one.
        let cat = cat_density(c(1.0, 0.0), c(-1.5, 0.3), FockSpace::new(30).unwrap()).unwrap();
        let ev = cat.eigenvalues();
        assert!((ev[0] - 1.0).abs() < 1e-12);
        assert!(ev[1].abs() < 1e-12 && ev[2].abs() < 1e-12);
        assert!(cat.hermiticity_error() < 1e-15);
    }

    #[test]
    fn thermal_occupation_values() {
        // 1/(e^2 − 1)
        assert_abs_diff_eq!(thermal_occupation(1.0).unwrap(), 0.156_517_642_749_665_5, epsilon = 1e-14);
        assert!(thermal_occupation(400.0).unwrap() < 1e-300);
        assert_eq!(thermal_occupation(0.0).unwrap_err().kind(), "DomainError");
        assert_eq!(thermal_occupation(-1.0).unwrap_err().kind(), "DomainError");
        let b = beta_for_occupation(3.0).unwrap();
        assert_abs_diff_eq!(b, (4.0f64 / 3.0).ln() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(thermal_occupation(b).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn parity_examples() {
        let space = FockSpace::new(2).unwrap();
        let vac = DensityMatrix::pure(&StateVector::basis(space, 0).unwrap());
        assert_eq!(parity_expectation(&vac), 1.0);
        let mixed = DensityMatrix::diagonal(space, &[1.0, 1.0]).unwrap();
        assert_eq!(parity_expectation(&mixed), 0.0);
    }

    #[test]
    fn displacement_matches_coherent_and_unitarity() {
        let beta = c(0.7, -0.4);
        let space = FockSpace::new(40).unwrap();
        let d = Operator::displacement(space, beta);
        let coh = coherent_state(beta, space).unwrap();
        for m in 0..40 {
            assert!((d.entries()[(m, 0)] - coh.amplitudes()[m]).norm() < 1e-14);
        }
        // Low-lying block is unitary up to the (tiny) truncation leakage.
        let dd = d.entries().adjoint() * d.entries();
        for i in 0..10 {
            for j in 0..10 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dd[(i, j)] - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn displacement_matches_series_exponential() {
        // Oracle: Taylor series of exp(βa† − β*a) in a large space, read off
        // the low block.
        let beta = c(0.3, 0.2);
        let big = 60;
        let space = FockSpace::new(big).unwrap();
        let a = Operator::annihilation(space);
        let gen = a.dagger().entries().scale(1.0) * beta - a.entries() * beta.conj();
        let mut term = DMatrix::<C64>::identity(big, big);
        let mut sum = term.clone();
        for k in 1..60 {
            term = &term * &gen / C64::new(k as f64, 0.0);
            sum += &term;
        }
        let d = displacement_elements(beta, 12);
        for m in 0..12 {
            for n in 0..12 {
                assert!((d[(m, n)] - sum[(m, n)]).norm() < 1e-13, "({m},{n})");
            }
        }
    }

    #[test]
    fn displacement_satisfies_ladder_identity() {
        // a†D = D(a† + β*) row by row, in a regime with O(1) elements.
        let beta = c(4.0, 3.0);
        let d = displacement_elements(beta, 60);
        for m in 1..59 {
            for n in 0..59 {
                let lhs = ((n + 1) as f64).sqrt() * d[(m, n + 1)];
                let rhs = (m as f64).sqrt() * d[(m - 1, n)] - beta.conj() * d[(m, n)];
                assert!((lhs - rhs).norm() < 1e-12, "({m},{n})");
            }
        }
    }

    #[test]
    fn displacement_bounded_far_from_origin() {
        let d = displacement_elements(c(19.8, -19.8), 131);
        assert!(d.iter().all(|z| z.norm().is_finite() && z.norm() <= 1.0 + 1e-12));
    }

    proptest! {
        #[test]
        fn coherent_ratio_recurrence(re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let alpha = c(re, im);
            let s = coherent_state(alpha, FockSpace::new(60).unwrap()).unwrap();
            let amp = s.amplitudes();
            for n in 0..40 {
                if amp[n].norm() > 1e-200 {
                    let ratio = amp[n + 1] / amp[n];
                    let want = alpha / ((n + 1) as f64).sqrt();
                    prop_assert!((ratio - want).norm() < 1e-12 * (1.0 + want.norm()));
                }
            }
        }

        #[test]
        fn parity_in_unit_interval(pops in proptest::collection::vec(0.0f64..1.0, 2..20)) {
            prop_assume!(pops.iter().sum::<f64>() > 1e-6);
            let space = FockSpace::new(pops.len()).unwrap();
            let rho = DensityMatrix::diagonal(space, &pops).unwrap();
            let p = parity_expectation(&rho);
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&p));
        }

        #[test]
        fn cat_hermitian_unit_trace(a1 in -2.5f64..2.5, b1 in -2.5f64..2.5, a2 in -2.5f64..2.5, b2 in -2.5f64..2.5) {
            let rho = cat_density(c(a1, b1), c(a2, b2), FockSpace::new(45).unwrap()).unwrap();
            prop_assert!(rho.hermiticity_error() < 1e-13);
            prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        }
    }
}
