use std::f64::consts::{FRAC_PI_2, PI};

use decolab::gravity::steady_state;
use decolab::phase_space::{
    fringe_spacing, negativity_volume, position_density, uniform_grid, visibility, wigner, wigner_at,
};
use decolab::{cat_density, Complex64, DensityMatrix, FockSpace, PhaseSpaceGrid, StateVector};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Even cat α = ±3 a quarter period later, when both branches sit at x = 0.
fn overlapping_cat() -> DensityMatrix {
    let space = FockSpace::new(50).unwrap();
    cat_density(c(3.0, 0.0), c(-3.0, 0.0), space).unwrap().rotated(FRAC_PI_2)
}

#[test]
fn wigner_marginal_is_position_density() {
    let states = [
        overlapping_cat(),
        cat_density(c(2.0, 1.0), c(-1.0, -2.5), FockSpace::new(50).unwrap()).unwrap(),
        steady_state(&overlapping_cat()),
    ];
    let grid = PhaseSpaceGrid::new((-9.0, 9.0), (-11.0, 11.0), 73, 441).unwrap();
    for rho in &states {
        let w = wigner(rho, &grid).unwrap();
        let pd = position_density(rho, &grid.xs()).unwrap();
        for (m, p) in w.marginal_x().iter().zip(&pd.values) {
            assert!((m - p).abs() < 1e-6, "marginal {m} vs density {p}");
        }
    }
}

#[test]
fn wigner_and_density_normalised() {
    let rho = overlapping_cat();
    let grid = PhaseSpaceGrid::square(11.0, 221).unwrap();
    let w = wigner(&rho, &grid).unwrap();
    assert!((w.integral() - 1.0).abs() < 1e-4, "integral {}", w.integral());
    let pd = position_density(&rho, &uniform_grid(-8.0, 8.0, 801)).unwrap();
    assert!((pd.integral() - 1.0).abs() < 1e-6);
    assert!(pd.values.iter().all(|&v| v >= -1e-12));
}

#[test]
fn fock_one_negativity_matches_closed_form() {
    // W₁ = (2r² − 1)e^{−r²}/π is negative for r² < ½; its negative volume is
    // ∫₀^½ (1 − 2u)e^{−u} du = 2e^{−½} − 1.
    let space = FockSpace::new(6).unwrap();
    let one = DensityMatrix::pure(&StateVector::basis(space, 1).unwrap());
    let w = wigner(&one, &PhaseSpaceGrid::square(6.0, 401).unwrap()).unwrap();
    let want = 2.0 * (-0.5f64).exp() - 1.0;
    let got = negativity_volume(&w);
    assert!((got / want - 1.0).abs() < 1e-3, "negativity {got} vs {want}");
}

#[test]
fn negativity_stable_under_grid_refinement() {
    let rho = cat_density(c(3.0, 0.0), c(-3.0, 0.0), FockSpace::new(50).unwrap()).unwrap();
    let coarse = negativity_volume(&wigner(&rho, &PhaseSpaceGrid::square(10.0, 241).unwrap()).unwrap());
    let fine = negativity_volume(&wigner(&rho, &PhaseSpaceGrid::square(10.0, 481).unwrap()).unwrap());
    assert!(coarse > 0.0);
    assert!((coarse / fine - 1.0).abs() < 0.01, "coarse {coarse} fine {fine}");
}

#[test]
fn vacuum_origin_value() {
    let vac = DensityMatrix::pure(&StateVector::basis(FockSpace::new(20).unwrap(), 0).unwrap());
    assert!((wigner_at(&vac, 0.0, 0.0) - 1.0 / PI).abs() < 1e-8);
}

#[test]
fn pure_cat_overlap_visibility_is_one() {
    let rho = overlapping_cat();
    let spacing = fringe_spacing(c(3.0, 0.0), c(-3.0, 0.0));
    let pd = position_density(&rho, &uniform_grid(-8.0, 8.0, 1601)).unwrap();
    let v = visibility(&pd, spacing).unwrap();
    assert!((v.nu - 1.0).abs() < 1e-6, "nu {}", v.nu);
    assert!((v.x_min - v.x_max - 0.5 * spacing).abs() < 1e-6);
}

#[test]
fn dephased_cat_still_oscillates_near_origin() {
    // A number-state mixture keeps ripples in P(x) but loses the fringes'
    // full contrast.
    let rho = steady_state(&overlapping_cat());
    let spacing = fringe_spacing(c(3.0, 0.0), c(-3.0, 0.0));
    let pd = position_density(&rho, &uniform_grid(-8.0, 8.0, 1601)).unwrap();
    let v = visibility(&pd, spacing).unwrap();
    assert!(v.nu > 0.1 && v.nu < 0.99, "nu {}", v.nu);
}
