//! Free induction decay and NMR line shape of the cavity ensemble.
//!
//! For the dipolar anisotropy `ζ = 2` the FID is `F(t) = cos(Gt)^{N−1}` with
//! `G = 3g/2`, i.e. a binomial comb of lines at `G(N−1−2k)`. A phenomenological
//! `e^{−|t|/T₂}` turns each line into a Lorentzian of half width `1/T₂`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_dynamics::validate_grid;
use crate::numeric::{half_binomial_pmf, Compensated};

/// Interaction anisotropy for which the FID has the cosine-power form.
pub const DIPOLAR_ZETA: f64 = 2.0;

/// Default transverse decay time, seconds.
pub const DEFAULT_T2: f64 = 2e-3;

/// Required half-span of a spectral grid in units of `G(N−1)`.
pub const GRID_SPAN_FACTOR: f64 = 1.2;

fn check_spins(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::SpinCountOutOfRange { n, min: 2, max: usize::MAX });
    }
    Ok(())
}

fn line_spacing(g: f64) -> f64 {
    1.5 * g
}

/// `cos(3gt/2)^{N−1} e^{−|t|/T₂}`; `t2 = None` omits the decay.
pub fn fid(t: f64, n: usize, g: f64, t2: Option<f64>) -> Result<f64> {
    check_spins(n)?;
    if let Some(t2) = t2 {
        if !(t2 > 0.0) {
            return Err(Error::Domain(format!("T₂ must be positive, got {t2}")));
        }
    }
    Ok(fid_unchecked(t, n, g, t2))
}

fn fid_unchecked(t: f64, n: usize, g: f64, t2: Option<f64>) -> f64 {
    let c = (line_spacing(g) * t).cos();
    let power = match i32::try_from(n - 1) {
        Ok(p) => c.powi(p),
        Err(_) => c.signum().powi(((n - 1) % 2) as i32) * c.abs().powf((n - 1) as f64),
    };
    match t2 {
        Some(t2) => power * (-t.abs() / t2).exp(),
        None => power,
    }
}

/// Second and fourth moments of the unbroadened comb,
/// `(N−1)G²` and `(N−1)(3N−5)G⁴`.
pub fn moments(n: usize, g: f64) -> Result<(f64, f64)> {
    check_spins(n)?;
    let big_g2 = line_spacing(g).powi(2);
    let n = n as f64;
    Ok(((n - 1.0) * big_g2, (n - 1.0) * (3.0 * n - 5.0) * big_g2 * big_g2))
}

/// Lines of the `T₂ = ∞` spectrum as `(position, weight)`, ordered from the
/// highest frequency down.
pub fn delta_comb(n: usize, g: f64) -> Result<Vec<(f64, f64)>> {
    check_spins(n)?;
    let big_g = line_spacing(g);
    let m = (n - 1) as u64;
    Ok((0..=m)
        .map(|k| (big_g * (m as f64 - 2.0 * k as f64), half_binomial_pmf(m, k)))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineShape {
    pub n_spins: usize,
    pub g: f64,
    pub zeta: f64,
    pub t2: Option<f64>,
    pub t_grid: Vec<f64>,
    pub fid: Vec<f64>,
    pub omega_grid: Vec<f64>,
    pub spectrum: Vec<f64>,
    /// mass of the broadened comb inside the grid window before normalization
    pub window_mass: f64,
    pub m2: f64,
    pub m4: f64,
}

impl LineShape {
    /// Trapezoid integral of the emitted spectrum.
    pub fn trapezoid_mass(&self) -> f64 {
        trapezoid(&self.omega_grid, |i| self.spectrum[i])
    }

    /// Trapezoid `∫ω² ℑ dω` of the emitted spectrum.
    pub fn trapezoid_m2(&self) -> f64 {
        trapezoid(&self.omega_grid, |i| self.omega_grid[i].powi(2) * self.spectrum[i])
    }
}

fn trapezoid(x: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    let mut acc = Compensated::new();
    for i in 1..x.len() {
        acc.add(0.5 * (x[i] - x[i - 1]) * (f(i) + f(i - 1)));
    }
    acc.value()
}

fn check_spectrum_inputs(n: usize, g: f64, t2: f64, omega: &[f64]) -> Result<()> {
    check_spins(n)?;
    if !(t2 > 0.0 && t2.is_finite()) {
        return Err(Error::Domain(format!(
            "spectra need a finite positive T₂ (got {t2}); use delta_comb for the unbroadened lines"
        )));
    }
    if !(g.is_finite() && g != 0.0) {
        return Err(Error::Domain(format!("coupling {g} must be finite and non-zero")));
    }
    validate_grid(omega)?;
    let need = GRID_SPAN_FACTOR * line_spacing(g).abs() * (n - 1) as f64;
    let (lo, hi) = (omega[0], omega[omega.len() - 1]);
    if lo > -need || hi < need {
        return Err(Error::InvalidGrid(format!(
            "frequency grid [{lo}, {hi}] must cover ±{need} rad/s"
        )));
    }
    Ok(())
}

fn lorentzian(x: f64, gamma: f64) -> f64 {
    gamma / (PI * (x * x + gamma * gamma))
}

fn comb_window_mass(comb: &[(f64, f64)], gamma: f64, lo: f64, hi: f64) -> f64 {
    comb.iter()
        .map(|&(c, w)| w * (((hi - c) / gamma).atan() - ((lo - c) / gamma).atan()) / PI)
        .sum()
}

/// Analytic line shape: binomially weighted Lorentzians of half width `1/T₂`,
/// normalized to unit mass inside the grid window.
pub fn spectrum(n: usize, g: f64, t2: f64, omega_grid: &[f64]) -> Result<LineShape> {
    check_spectrum_inputs(n, g, t2, omega_grid)?;
    let gamma = 1.0 / t2;
    let comb = delta_comb(n, g)?;
    let (lo, hi) = (omega_grid[0], omega_grid[omega_grid.len() - 1]);
    let mass = comb_window_mass(&comb, gamma, lo, hi);
    let spectrum = omega_grid
        .par_iter()
        .map(|&w| comb.iter().map(|&(c, p)| p * lorentzian(w - c, gamma)).sum::<f64>() / mass)
        .collect();
    let (t_grid, _) = fid_sampling(n, g, t2, omega_grid);
    let fid = t_grid.iter().map(|&t| fid_unchecked(t, n, g, Some(t2))).collect();
    let (m2, m4) = moments(n, g)?;
    Ok(LineShape {
        n_spins: n,
        g,
        zeta: DIPOLAR_ZETA,
        t2: Some(t2),
        t_grid,
        fid,
        omega_grid: omega_grid.to_vec(),
        spectrum,
        window_mass: mass,
        m2,
        m4,
    })
}

/// Uniform FID samples on `[0, 40 T₂]` fine enough that spectral images sit
/// at least 100 times the largest frequency away.
fn fid_sampling(n: usize, g: f64, t2: f64, omega_grid: &[f64]) -> (Vec<f64>, f64) {
    let w_max = omega_grid
        .iter()
        .fold(line_spacing(g).abs() * (n - 1) as f64, |m, w| m.max(w.abs()));
    let t_max = 40.0 * t2;
    let steps = (t_max * 100.0 * w_max / (2.0 * PI)).ceil().max(64.0) as usize;
    let dt = t_max / steps as f64;
    ((0..=steps).map(|j| j as f64 * dt).collect(), dt)
}

/// Line shape by direct Fourier transform of the sampled FID,
/// `ℑ(ω) = (1/π) Δt [½F(0) + Σ_j F(t_j) cos(ω t_j)]`, normalized to unit
/// trapezoid mass on the grid.
pub fn spectrum_dft(n: usize, g: f64, t2: f64, omega_grid: &[f64]) -> Result<Vec<f64>> {
    check_spectrum_inputs(n, g, t2, omega_grid)?;
    let (t_grid, dt) = fid_sampling(n, g, t2, omega_grid);
    let samples: Vec<f64> = t_grid.iter().map(|&t| fid_unchecked(t, n, g, Some(t2))).collect();
    let raw: Vec<f64> = omega_grid
        .par_iter()
        .map(|&w| {
            let mut acc = Compensated::new();
            acc.add(0.5 * samples[0]);
            for (t, f) in t_grid.iter().zip(&samples).skip(1) {
                acc.add(f * (w * t).cos());
            }
            acc.value() * dt / PI
        })
        .collect();
    let mass = trapezoid(omega_grid, |i| raw[i]);
    Ok(raw.into_iter().map(|v| v / mass).collect())
}

/// `∫ω² ℑ dω` over `[lo, hi]` for the Lorentzian comb normalized to unit
/// mass on that window.
pub fn windowed_m2(n: usize, g: f64, t2: f64, lo: f64, hi: f64) -> Result<f64> {
    check_spins(n)?;
    if !(t2 > 0.0 && t2.is_finite()) || !(lo < hi) {
        return Err(Error::Domain("windowed moment needs finite T₂ > 0 and lo < hi".into()));
    }
    let gamma = 1.0 / t2;
    let comb = delta_comb(n, g)?;
    // antiderivative of (u + c)² L(u) in u
    let prim = |u: f64, c: f64| {
        (gamma / PI) * (u - gamma * (u / gamma).atan())
            + c * (gamma / PI) * (u * u + gamma * gamma).ln()
            + c * c * (u / gamma).atan() / PI
    };
    let second: f64 = comb.iter().map(|&(c, w)| w * (prim(hi - c, c) - prim(lo - c, c))).sum();
    Ok(second / comb_window_mass(&comb, gamma, lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(half: f64, points: usize) -> Vec<f64> {
        crate::exact_dynamics::linspace(-half, half, points)
    }

    #[test]
    fn fid_basics() {
        assert_eq!(fid(0.0, 9, 1.0, Some(2.0)).unwrap(), 1.0);
        assert!(fid(PI / 3.0, 2, 1.0, None).unwrap().abs() < 1e-15);
        for t in [0.1, 0.77, 3.0] {
            assert!((fid(t, 2, 1.0, None).unwrap() - (1.5 * t).cos()).abs() < 1e-15);
        }
        assert!(fid(0.0, 1, 1.0, None).is_err());
    }

    #[test]
    fn odd_n_fid_is_periodic() {
        let period = 2.0 * PI / 3.0;
        for n in [3, 5, 9] {
            for j in 0..40 {
                let t = 0.037 * j as f64;
                let a = fid(t, n, 1.0, None).unwrap();
                let b = fid(t + period, n, 1.0, None).unwrap();
                assert!((a - b).abs() < 1e-13);
                assert!((a - fid(-t, n, 1.0, None).unwrap()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn large_exponent_path_matches_powi() {
        let t = 0.01;
        let c = (1.5f64 * t).cos();
        let direct = c.abs().powf(100.0);
        assert!((fid(t, 101, 1.0, None).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn moments_two_spins() {
        let (m2, m4) = moments(2, 1.0).unwrap();
        assert_eq!(m2, 9.0 / 4.0);
        assert_eq!(m4, 81.0 / 16.0);
        assert_eq!(m4 / (m2 * m2), 1.0);
    }

    #[test]
    fn moments_are_comb_moments() {
        for n in [2, 3, 7, 20] {
            let comb = delta_comb(n, 0.8).unwrap();
            let m2: f64 = comb.iter().map(|(c, w)| w * c * c).sum();
            let m4: f64 = comb.iter().map(|(c, w)| w * c.powi(4)).sum();
            let (a2, a4) = moments(n, 0.8).unwrap();
            assert!((m2 / a2 - 1.0).abs() < 1e-13);
            assert!((m4 / a4 - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn triplet() {
        let comb = delta_comb(3, 1.0).unwrap();
        assert_eq!(comb, vec![(3.0, 0.25), (0.0, 0.5), (-3.0, 0.25)]);
    }

    #[test]
    fn spectrum_rejects_bad_input() {
        let w = grid(20.0, 101);
        assert!(spectrum(9, 1.0, f64::INFINITY, &w).is_err());
        assert!(spectrum(9, 1.0, 0.0, &w).is_err());
        assert!(matches!(spectrum(9, 1.0, 5.0, &grid(12.0, 101)), Err(Error::InvalidGrid(_))));
        assert!(spectrum(9, 1.0, 5.0, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn spectrum_is_normalized_and_symmetric() {
        let w = grid(40.0, 8001);
        let s = spectrum(5, 1.0, 5.0, &w).unwrap();
        assert!((s.trapezoid_mass() - 1.0).abs() < 1e-6);
        for i in 0..w.len() {
            let j = w.len() - 1 - i;
            assert!((s.spectrum[i] - s.spectrum[j]).abs() < 1e-12 * s.spectrum[i]);
        }
        assert_eq!(s.fid[0], 1.0);
        assert!(s.window_mass < 1.0);
    }

    #[test]
    fn dft_matches_analytic() {
        let w = grid(9.0, 601);
        let a = spectrum(2, 1.0, 5.0, &w).unwrap();
        let d = spectrum_dft(2, 1.0, 5.0, &w).unwrap();
        let sup = a.spectrum.iter().zip(&d).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(sup < 1e-4, "{sup}");
    }

    #[test]
    fn windowed_m2_matches_quadrature() {
        let w = grid(30.0, 60001);
        let s = spectrum(9, 1.0, 20.0, &w).unwrap();
        let closed = windowed_m2(9, 1.0, 20.0, w[0], w[w.len() - 1]).unwrap();
        assert!((s.trapezoid_m2() / closed - 1.0).abs() < 1e-6);
    }

    #[test]
    fn trapezoid_m2_near_comb_m2_on_minimal_grid() {
        let half = GRID_SPAN_FACTOR * 1.5 * 8.0;
        let s = spectrum(9, 1.0, 20.0, &grid(half, 20001)).unwrap();
        assert!((s.trapezoid_m2() / s.m2 - 1.0).abs() < 0.02);
    }

    #[test]
    fn m2_from_fid_curvature() {
        for n in [2, 5, 12] {
            let h = 1e-4;
            let f = |t: f64| fid(t, n, 1.0, None).unwrap();
            let curvature = -(f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
            let (m2, _) = moments(n, 1.0).unwrap();
            assert!((curvature / m2 - 1.0).abs() < 1e-6, "n={n}");
        }
    }
}
