//! Complex log-gamma.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

const LANCZOS_G: f64 = 607.0 / 128.0;

// Godfrey's coefficients for g = 607/128.
const LANCZOS_COEFFS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_76e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

/// ln Γ(z) for complex z away from the poles.
///
/// The real part is exact to roughly 1e-13 relative; the imaginary part is
/// only defined modulo 2π. Everything is evaluated in log form so that
/// |Γ(1 + iy)| ~ e^{−πy/2} does not underflow for large y.
pub fn ln_gamma(z: C64) -> C64 {
    if z.re < 0.5 {
        // Γ(z)Γ(1−z) = π / sin(πz)
        return C64::new(PI.ln(), 0.0) - ln_sin(z * PI) - ln_gamma(C64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut x = C64::new(LANCZOS_COEFFS[0], 0.0);
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// Re ln Γ(z), i.e. ln |Γ(z)|.
pub fn ln_abs_gamma(z: C64) -> f64 {
    ln_gamma(z).re
}

/// ln sin(w) without overflow for large |Im w|.
fn ln_sin(w: C64) -> C64 {
    if w.im.abs() < 20.0 {
        return w.sin().ln();
    }
    if w.im < 0.0 {
        return ln_sin(w.conj()).conj();
    }
    // sin w = (e^{−iw}/(2i))·(e^{2iw} − 1) with |e^{2iw}| = e^{−2 Im w} ≪ 1.
    let i = C64::new(0.0, 1.0);
    -i * w + (-(2.0 * i * w).exp()).ln_1p_c() - (2.0 * i).ln()
}

trait Ln1p {
    fn ln_1p_c(self) -> C64;
}

impl Ln1p for C64 {
    fn ln_1p_c(self) -> C64 {
        if self.norm() < 1e-4 {
            self - self * self / 2.0
        } else {
            (C64::new(1.0, 0.0) + self).ln()
        }
    }
}
