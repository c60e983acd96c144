//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use nanospin::numeric::{integrate, QuadOptions};

/// Direct quadrature of `∫ d³r P₂(cos θ_Z) r⁻³` over a spheroid with
/// semi-axes `a` (symmetry axis) and `b`, tilted by `alpha` from the field.
///
/// The integral is taken in spherical coordinates attached to the spheroid
/// with an excluded ball of radius `r_min`; the field direction enters only
/// through `cos θ_Z = cos α cos θ + sin α sin θ cos φ`, so the azimuthal
/// integral is done numerically rather than by the addition theorem.
pub fn form_factor_quadrature(a: f64, b: f64, alpha: f64) -> f64 {
    let r_min = 1e-3 * a.min(b);
    let opts = QuadOptions { rel_tol: 1e-9, abs_tol: 1e-12, max_intervals: 2000 };
    let surface = |theta: f64| {
        let (s, c) = theta.sin_cos();
        (s * s / (b * b) + c * c / (a * a)).sqrt().recip()
    };
    let radial = |theta: f64| {
        // ∫ r² · r⁻³ dr = ∫ d(ln r)
        integrate(|_| 1.0, r_min.ln(), surface(theta).ln(), opts).unwrap().0
    };
    let outer = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let azimuthal = integrate(
            |phi: f64| {
                let cz = alpha.cos() * c + alpha.sin() * s * phi.cos();
                0.5 * (3.0 * cz * cz - 1.0)
            },
            0.0,
            2.0 * PI,
            opts,
        )
        .unwrap()
        .0;
        s * azimuthal * radial(theta)
    };
    integrate(outer, 0.0, PI, opts).unwrap().0
}

/// Least-squares line `y ≈ c₀ + c₁x`; returns the coefficient of determination.
pub fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    1.0 - ss_res / syy
}
