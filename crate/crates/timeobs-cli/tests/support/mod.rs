//! Independent numerical oracles backing the acceptance suite.
//!
//! The scattering oracle solves the plane-wave matching conditions at the
//! barrier edges as a linear system instead of reusing closed-form
//! amplitudes, and reaches the delta barrier through a thin-rectangle
//! limit.  The arrival oracle evaluates the defining projected
//! free-propagator double integral on rotated rays instead of reusing the
//! error-function closed form.

use std::f64::consts::{FRAC_PI_8, PI};

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use timeobs::numerics::{integrate, QuadratureSpec};
use timeobs::scattering::UnitsConvention;

/// Transmission and reflection amplitudes (t, r) of a rectangular barrier
/// of the given height on [0, width], from the four continuity conditions
/// of the wavefunction and its derivative at the edges.
///
/// The interior momentum is kept complex, so energies below the top of
/// the barrier need no separate evanescent branch.
pub fn rectangular_amplitudes_by_matching(
    height: f64,
    width: f64,
    e: f64,
    units: &UnitsConvention,
) -> (Complex64, Complex64) {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let i = Complex64::i();
    let k = (2.0 * units.mass * e).sqrt() / units.hbar * one;
    let q = Complex64::new(2.0 * units.mass * (e - height), 0.0).sqrt() / units.hbar;
    let eikl = (i * k * width).exp();
    let eiql = (i * q * width).exp();

    // Unknowns (r, a, b, t) for psi = e^{ikx} + r e^{-ikx} on the left,
    // a e^{iqx} + b e^{-iqx} inside, t e^{ikx} on the right.
    #[rustfmt::skip]
    let m = Matrix4::new(
        one,    -one,             -one,                   zero,
        -i * k, -i * q,           i * q,                  zero,
        zero,   eiql,             one / eiql,             -eikl,
        zero,   i * q * eiql,     -i * q / eiql,          -i * k * eikl,
    );
    let rhs = Vector4::new(-one, -i * k, zero, zero);
    let sol = m
        .lu()
        .solve(&rhs)
        .expect("matching system is nonsingular away from q = 0");
    (sol[3], sol[0])
}

/// Delta-barrier amplitudes (t, r) from the thin-rectangle limit: the
/// matching solution at widths w, w/2, w/4 with height strength / w,
/// Richardson-extrapolated twice in the width.
pub fn delta_amplitudes_by_thin_limit(
    strength: f64,
    e: f64,
    units: &UnitsConvention,
) -> (Complex64, Complex64) {
    let w = 1e-4;
    let eval = |w: f64| rectangular_amplitudes_by_matching(strength / w, w, e, units);
    let (t1, r1) = eval(w);
    let (t2, r2) = eval(0.5 * w);
    let (t3, r3) = eval(0.25 * w);
    let second_order = |f1: Complex64, f2: Complex64, f3: Complex64| {
        let g1 = 2.0 * f2 - f1;
        let g2 = 2.0 * f3 - f2;
        (4.0 * g2 - g1) / 3.0
    };
    (second_order(t1, t2, t3), second_order(r1, r2, r3))
}

/// Matrix element of the positive-direction arrival operator between
/// momenta p1 and p2, from its definition: project onto x < X, propagate
/// freely through the window, project onto x > X, divide by the window.
///
/// In position space the element is a double integral of the conjugated
/// free propagator over the two half-lines.  Both rays are rotated by
/// exp(-i pi/8) into the wedge where the quadratic propagator phase
/// decays, which makes the integral absolutely convergent; the rays are
/// truncated where the Gaussian factor is far below the tolerance.
pub fn arrival_element_by_ray_quadrature(
    p1: f64,
    p2: f64,
    x: f64,
    dt: f64,
    units: &UnitsConvention,
) -> Complex64 {
    let hbar = units.hbar;
    let mass = units.mass;
    let i = Complex64::i();
    let ray = Complex64::from_polar(1.0, -FRAC_PI_8);
    let gauss = -i * mass / (2.0 * hbar * dt) * ray * ray;
    let lin1 = i * p1 * ray / hbar;
    let lin2 = i * p2 * ray / hbar;
    let cut = 16.0 * (hbar * dt / mass).sqrt();

    let inner_spec = QuadratureSpec::new(0.0, cut)
        .with_rel_tol(1e-9)
        .with_abs_tol(1e-14)
        .with_initial_panels(64);
    let outer_spec = QuadratureSpec::new(0.0, cut)
        .with_rel_tol(1e-8)
        .with_abs_tol(1e-13)
        .with_initial_panels(64);

    let rays = integrate(
        |u| {
            integrate(
                |v| {
                    let total = u + v;
                    Ok((lin1 * u + lin2 * v + gauss * total * total).exp())
                },
                &inner_spec,
            )
        },
        &outer_spec,
    )
    .expect("rotated-ray quadrature converges");

    let eps = p2 - p1;
    let prefactor = Complex64::new(0.0, mass / (2.0 * PI * hbar * dt)).sqrt() / dt
        * (i * eps * x / hbar).exp()
        * (-i * p2 * p2 * dt / (2.0 * mass * hbar)).exp();
    prefactor * ray * ray * rays
}
