//! Exact dephasing of the scalar-gravity toy model.
//!
//! Number-state outer products evolve independently,
//! ρ_{nn'}(t) = ρ_{nn'}(0)·e^{E(n,n',t)}, with
//!
//! E = −i(n−n')t − (C/π)(n−n')²·D(t) + optional renormalisation phases,
//!
//! where D(t) = 2∫₀^∞ dω coth(βω/2) sin²(ωt/2) e^{−ω/ω_c}/ω for the ohmic
//! bath with exponential cutoff.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::DensityMatrix;
use crate::quadrature::{integrate_pieces, Tolerance};
use crate::special::ln_gamma;

/// Bath and coupling parameters in oscillator units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GravityBathParams {
    /// C/π with C the redefined (dimensionless) coupling.
    pub coupling_over_pi: f64,
    /// ω_c/Ω.
    pub cutoff: f64,
    /// βħΩ.
    pub beta: f64,
    pub include_kerr_phase: bool,
    pub include_freq_shift: bool,
}

impl Default for GravityBathParams {
    fn default() -> Self {
        Self {
            coupling_over_pi: 1e-3,
            cutoff: 1e3,
            beta: 1.0,
            include_kerr_phase: false,
            include_freq_shift: false,
        }
    }
}

impl GravityBathParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("coupling_over_pi", self.coupling_over_pi),
            ("cutoff", self.cutoff),
            ("beta", self.beta),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if self.cutoff < 10.0 {
            log::warn!("cutoff {} is not large compared to the oscillator frequency", self.cutoff);
        }
        Ok(())
    }
}

/// Closed form used for D(t).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecoherenceForm {
    /// Exact Gamma-function evaluation of the integral.
    #[serde(rename = "exact_gamma")]
    ExactGamma,
    /// ω_c → ∞ limit: ½ln(1+t²ω_c²) + ln[(β/πt) sinh(πt/β)].
    #[serde(rename = "high_cutoff")]
    HighCutoff,
    /// t ≫ β asymptote: ln(βω_c/2π) + πt/β.
    #[serde(rename = "high_T")]
    HighTemperature,
}

impl DecoherenceForm {
    pub fn name(&self) -> &'static str {
        match self {
            Self::ExactGamma => "exact_gamma",
            Self::HighCutoff => "high_cutoff",
            Self::HighTemperature => "high_T",
        }
    }
}

/// ∫₀^∞ dω coth(βω/2) sin²(ωt/2) e^{−ω/ω_c}/ω by adaptive quadrature
/// (relative tolerance 1e-9).
pub fn decoherence_integral_oracle(t: f64, params: &GravityBathParams) -> Result<f64> {
    check_time(t)?;
    params.validate()?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let beta = params.beta;
    let wc = params.cutoff;
    let integrand = move |w: f64| {
        if w <= 0.0 {
            return 0.0;
        }
        let s = (0.5 * w * t).sin();
        let coth = 1.0 / (0.5 * beta * w).tanh();
        coth * s * s * (-w / wc).exp() / w
    };
    // e^{−42} ≈ 6e−19 truncates the tail far below the tolerance.
    let upper = 42.0 * wc;
    let period = 2.0 * PI / t;
    let mut points = vec![0.0];
    // Resolve the thermal scale and the first oscillation separately.
    let first = (0.25 * period).min(0.5 / beta).min(upper);
    let mut x = first;
    points.push(x);
    let step = period.min(0.25 * wc);
    while x < upper {
        x = (x + step).min(upper);
        points.push(x);
    }
    let est = integrate_pieces(integrand, &points, Tolerance::default())?;
    Ok(est.value)
}

/// D(t) in the selected closed form; D(0) = 0 for every form.
pub fn decoherence_factor(t: f64, params: &GravityBathParams, form: DecoherenceForm) -> Result<f64> {
    check_time(t)?;
    params.validate()?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let beta = params.beta;
    let wc = params.cutoff;
    let log_cut = 0.5 * (t * wc).mul_add(t * wc, 1.0).ln();
    match form {
        DecoherenceForm::ExactGamma => {
            let eps = 1.0 / (beta * wc);
            let lg0 = ln_gamma(C64::new(1.0 + eps, 0.0)).re;
            let lgt = ln_gamma(C64::new(1.0 + eps, t / beta)).re;
            Ok(log_cut + 2.0 * lg0 - 2.0 * lgt)
        }
        DecoherenceForm::HighCutoff => {
            if beta * wc <= 1.0 {
                return Err(Error::Domain(format!(
                    "high_cutoff form needs beta*cutoff > 1, got {}",
                    beta * wc
                )));
            }
            Ok(log_cut + ln_sinhc(PI * t / beta))
        }
        DecoherenceForm::HighTemperature => Ok((beta * wc / (2.0 * PI)).ln() + PI * t / beta),
    }
}

/// ln(sinh y / y) for y ≥ 0.
fn ln_sinhc(y: f64) -> f64 {
    if y < 1e-4 {
        y * y / 6.0
    } else if y < 20.0 {
        (y.sinh() / y).ln()
    } else {
        y - (2.0 * y).ln() + (-(-2.0 * y).exp()).ln_1p()
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
    }
    Ok(())
}

/// Per-time quantities shared by all entries of ρ.
#[derive(Debug, Clone, Copy)]
struct Exponent {
    t: f64,
    decay: f64,
    phase_rate: f64,
    kerr: bool,
    shift: bool,
}

impl Exponent {
    fn new(t: f64, params: &GravityBathParams, form: DecoherenceForm) -> Result<Self> {
        let d = decoherence_factor(t, params, form)?;
        let wt = params.cutoff * t;
        Ok(Self {
            t,
            decay: params.coupling_over_pi * d,
            phase_rate: params.coupling_over_pi * (wt - wt.atan()),
            kerr: params.include_kerr_phase,
            shift: params.include_freq_shift,
        })
    }

    fn at(&self, n: usize, np: usize) -> C64 {
        let dn = n as f64 - np as f64;
        let mut phase = -dn * self.t;
        if self.kerr {
            phase += self.phase_rate * dn * (n + np) as f64;
        }
        if self.shift {
            phase += self.phase_rate * dn;
        }
        C64::new(-dn * dn * self.decay, phase)
    }
}

/// Full exponent E(n, n', t) with ρ_{nn'}(t) = ρ_{nn'}(0)·e^E.
pub fn decoherence_exponent(
    n: usize,
    np: usize,
    t: f64,
    params: &GravityBathParams,
    form: DecoherenceForm,
) -> Result<C64> {
    Ok(Exponent::new(t, params, form)?.at(n, np))
}

/// ρ(t) from ρ(0), entry by entry.
pub fn evolve_density(
    rho0: &DensityMatrix,
    t: f64,
    params: &GravityBathParams,
    form: DecoherenceForm,
) -> Result<DensityMatrix> {
    let e = Exponent::new(t, params, form)?;
    let d = rho0.dim();
    let mut out = rho0.entries().clone();
    out.as_mut_slice()
        .par_chunks_mut(d)
        .enumerate()
        .for_each(|(c, col)| {
            for (r, z) in col.iter_mut().enumerate() {
                if r != c {
                    *z *= e.at(r, c).exp();
                }
            }
        });
    DensityMatrix::from_raw(rho0.space(), out)
}

/// Long-time limit: the number-state mixture with ρ(0)'s populations.
pub fn steady_state(rho0: &DensityMatrix) -> DensityMatrix {
    let d = rho0.dim();
    let mut out = rho0.entries().clone();
    for c in 0..d {
        for r in 0..d {
            if r != c {
                out[(r, c)] = C64::new(0.0, 0.0);
            }
        }
    }
    DensityMatrix::from_raw(rho0.space(), out).expect("same shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{cat_density, FockSpace};
    use approx::assert_relative_eq;

    fn params(beta: f64, cutoff: f64) -> GravityBathParams {
        GravityBathParams {
            beta,
            cutoff,
            ..Default::default()
        }
    }

    #[test]
    fn oracle_zero_at_origin() {
        assert_eq!(decoherence_integral_oracle(0.0, &GravityBathParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn oracle_matches_gamma_form_reference_point() {
        let p = params(1.0, 1e3);
        let i = decoherence_integral_oracle(5.0, &p).unwrap();
        let d = decoherence_factor(5.0, &p, DecoherenceForm::ExactGamma).unwrap();
        assert_relative_eq!(2.0 * i, d, max_relative = 1e-7);
    }

    #[test]
    fn oracle_matches_high_cutoff_at_t50() {
        let p = params(1.0, 1e3);
        let i = decoherence_integral_oracle(50.0, &p).unwrap();
        let d = decoherence_factor(50.0, &p, DecoherenceForm::HighCutoff).unwrap();
        assert_relative_eq!(2.0 * i, d, max_relative = 1e-3);
    }

    #[test]
    fn small_time_oracle() {
        // For t ≪ 1/ω_c the integrand is ≈ coth(βω/2) ω t²/4 e^{−ω/ω_c}.
        let p = params(1.0, 1e2);
        let t = 1e-4;
        let i = decoherence_integral_oracle(t, &p).unwrap();
        let d = decoherence_factor(t, &p, DecoherenceForm::ExactGamma).unwrap();
        assert_relative_eq!(2.0 * i, d, max_relative = 1e-6);
    }

    #[test]
    fn exponent_examples() {
        let p = GravityBathParams::default();
        for form in [
            DecoherenceForm::ExactGamma,
            DecoherenceForm::HighCutoff,
            DecoherenceForm::HighTemperature,
        ] {
            assert_eq!(decoherence_exponent(3, 3, 7.0, &p, form).unwrap(), C64::new(0.0, 0.0));
            assert_eq!(decoherence_exponent(0, 5, 0.0, &p, form).unwrap(), C64::new(0.0, 0.0));
        }
        let e = decoherence_exponent(4, 1, 20.0, &p, DecoherenceForm::HighTemperature).unwrap();
        let want = -9.0 * 1e-3 * ((1e3f64 / (2.0 * PI)).ln() + PI * 20.0);
        assert_relative_eq!(e.re, want, max_relative = 1e-14);
        assert_relative_eq!(e.im, -3.0 * 20.0, max_relative = 1e-14);
    }

    #[test]
    fn negative_time_rejected() {
        let p = GravityBathParams::default();
        let err = decoherence_exponent(0, 1, -1.0, &p, DecoherenceForm::ExactGamma).unwrap_err();
        assert_eq!(err.kind(), "DomainError");
    }

    #[test]
    fn high_cutoff_requires_large_cutoff() {
        let p = params(0.5, 1.5);
        let err = decoherence_factor(1.0, &p, DecoherenceForm::HighCutoff).unwrap_err();
        assert_eq!(err.kind(), "DomainError");
    }

    #[test]
    fn phases_combine_to_eq23() {
        let mut p = GravityBathParams::default();
        p.include_kerr_phase = true;
        p.include_freq_shift = true;
        let t = 2.0;
        let base = decoherence_exponent(5, 2, t, &GravityBathParams::default(), DecoherenceForm::ExactGamma).unwrap();
        let e = decoherence_exponent(5, 2, t, &p, DecoherenceForm::ExactGamma).unwrap();
        let wt: f64 = 1e3 * t;
        let extra = 1e-3 * 3.0 * 8.0 * (wt - wt.atan());
        assert_relative_eq!(e.im - base.im, extra, max_relative = 1e-12);
        assert_eq!(e.re, base.re);
    }

    #[test]
    fn evolve_identity_at_zero_and_hermitian() {
        let space = FockSpace::new(40).unwrap();
        let rho = cat_density(C64::new(3.0, 0.0), C64::new(-3.0, 0.0), space).unwrap();
        let p = GravityBathParams::default();
        let same = evolve_density(&rho, 0.0, &p, DecoherenceForm::ExactGamma).unwrap();
        assert_eq!(same.entries(), rho.entries());
        let later = evolve_density(&rho, 3.3, &p, DecoherenceForm::ExactGamma).unwrap();
        assert!(later.hermiticity_error() < 1e-13);
        let d = decoherence_factor(3.3, &p, DecoherenceForm::ExactGamma).unwrap();
        let ratio = later.get(0, 2).norm() / rho.get(0, 2).norm();
        assert_relative_eq!(ratio, (-4.0 * 1e-3 * d).exp(), max_relative = 1e-13);
    }

    #[test]
    fn steady_state_keeps_populations() {
        let space = FockSpace::new(40).unwrap();
        let rho = cat_density(C64::new(3.0, 0.0), C64::new(-3.0, 0.0), space).unwrap();
        let ss = steady_state(&rho);
        assert_eq!(ss.populations(), rho.populations());
        assert!((ss.trace().re - 1.0).abs() < 1e-14);
        assert_eq!(ss.get(0, 2), C64::new(0.0, 0.0));
    }

    #[test]
    fn d_is_nondecreasing() {
        let p = params(1.0, 1e3);
        let mut last = 0.0;
        for k in 0..200 {
            let t = 0.05 * k as f64;
            let d = decoherence_factor(t, &p, DecoherenceForm::ExactGamma).unwrap();
            assert!(d >= last - 1e-12, "t={t}");
            last = d;
        }
    }
}
