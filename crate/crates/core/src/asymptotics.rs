//! Large-`N` pulse shapes.
//!
//! Replacing the binomial weights by a Gaussian turns the oscillating part of
//! `P₁` into cosine–Gaussian sums over `n = I_B + ½`, which the Poisson identity
//!
//! ```text
//! Σ_ℓ cos(2πεℓ) e^{−aℓ²} = √(π/a) Σ_k e^{−π²(k+ε)²/a}
//! ```
//!
//! turns into a comb of narrow Gaussians centred on `τ = kπ`. `n` runs over the
//! integers for even `N` and over the half-integers for odd `N`; the latter
//! picks up a factor `(−1)^k` on the resummed side.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact_dynamics::{parity, ExactPolarization, Parity};
use crate::numeric::{bisect, Compensated};

/// Terms with Gaussian exponent above this are dropped (16 standard deviations).
const EXPONENT_CUTOFF: f64 = 128.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `Σ_ℓ cos(2πεℓ) e^{−aℓ²}`
    Left,
    /// `√(π/a) Σ_k e^{−π²(k+ε)²/a}`
    Right,
}

/// Summation lattice for `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Lattice {
    Integer,
    HalfInteger,
}

impl Lattice {
    pub fn for_spins(n: usize) -> Self {
        match parity(n) {
            Parity::Even => Lattice::Integer,
            Parity::Odd => Lattice::HalfInteger,
        }
    }

    fn offset(self) -> f64 {
        match self {
            Lattice::Integer => 0.0,
            Lattice::HalfInteger => 0.5,
        }
    }
}

fn check_width(a: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("Gaussian width a={a} must be positive and finite")));
    }
    Ok(())
}

/// `cos(2π x)` with `x` first reduced modulo 1.
fn cos_turns(x: f64) -> f64 {
    (2.0 * PI * x.rem_euclid(1.0)).cos()
}

pub fn poisson_theta(epsilon: f64, a: f64, side: Side) -> Result<f64> {
    check_width(a)?;
    Ok(match side {
        Side::Left => lattice_sum(epsilon, a, Lattice::Integer, 0),
        Side::Right => comb_sum(epsilon, a, Lattice::Integer, 0),
    })
}

/// `Σ_{n ∈ lattice} n^{2p} cos(2πεn) e^{−an²}` over the whole (two-sided) lattice.
fn lattice_sum(epsilon: f64, a: f64, lattice: Lattice, p: i32) -> f64 {
    let off = lattice.offset();
    let n_max = (EXPONENT_CUTOFF / a).sqrt().ceil() as i64 + 1;
    let mut acc = Compensated::new();
    if off == 0.0 && p == 0 {
        acc.add(1.0);
    }
    for l in 1..=n_max {
        let n = l as f64 - off;
        // n and −n contribute equally
        acc.add(2.0 * n.powi(2 * p) * cos_turns(epsilon * n) * (-a * n * n).exp());
    }
    acc.value()
}

/// Resummed side of the identity; `p = 1` gives the `n²`-weighted sum
/// `−∂/∂a` of the `p = 0` sum.
fn comb_sum(epsilon: f64, a: f64, lattice: Lattice, p: i32) -> f64 {
    let centre = -epsilon.round();
    let reach = (EXPONENT_CUTOFF * a).sqrt() / PI;
    let k_lo = (centre - reach - 2.0).floor() as i64;
    let k_hi = (centre + reach + 2.0).ceil() as i64;
    let mut acc = Compensated::new();
    for k in k_lo..=k_hi {
        let shift = k as f64 + epsilon;
        let x = PI * PI * shift * shift / a;
        if x > EXPONENT_CUTOFF {
            continue;
        }
        let sign = if lattice == Lattice::HalfInteger && k.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
        let shape = if p == 0 { 1.0 } else { 1.0 - 2.0 * x };
        acc.add(sign * shape * (-x).exp());
    }
    let scale = if p == 0 { (PI / a).sqrt() } else { PI.sqrt() / (2.0 * a.powf(1.5)) };
    scale * acc.value()
}

/// `S₁ = Σ_{n>0} cos(θn) e^{−an²}` by direct summation.
pub fn s1_direct(theta: f64, a: f64, lattice: Lattice) -> Result<f64> {
    check_width(a)?;
    let full = lattice_sum(theta / (2.0 * PI), a, lattice, 0);
    Ok(match lattice {
        Lattice::Integer => 0.5 * (full - 1.0),
        Lattice::HalfInteger => 0.5 * full,
    })
}

/// `S₁` from the resummed Gaussian comb.
pub fn s1_resummed(theta: f64, a: f64, lattice: Lattice) -> Result<f64> {
    check_width(a)?;
    let full = comb_sum(theta / (2.0 * PI), a, lattice, 0);
    Ok(match lattice {
        Lattice::Integer => 0.5 * (full - 1.0),
        Lattice::HalfInteger => 0.5 * full,
    })
}

/// `S₂ = Σ_{n>0} n² cos(θn) e^{−an²}` by direct summation.
pub fn s2_direct(theta: f64, a: f64, lattice: Lattice) -> Result<f64> {
    check_width(a)?;
    Ok(0.5 * lattice_sum(theta / (2.0 * PI), a, lattice, 1))
}

/// `S₂ = −∂S₁/∂a` from the resummed comb.
pub fn s2_resummed(theta: f64, a: f64, lattice: Lattice) -> Result<f64> {
    check_width(a)?;
    Ok(0.5 * comb_sum(theta / (2.0 * PI), a, lattice, 1))
}

fn check_spins(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::SpinCountOutOfRange { n, min, max: usize::MAX });
    }
    Ok(())
}

/// `S₁(τ) = Σ_n cos(2τn) e^{−n²/(N/2)}` over the lattice of `N`.
pub fn s1(tau: f64, n: usize) -> Result<f64> {
    check_spins(n, 2)?;
    s1_resummed(2.0 * tau, 2.0 / n as f64, Lattice::for_spins(n))
}

/// `S₂(τ) = Σ_n n² cos(2τn) e^{−n²/(N/2)}` over the lattice of `N`.
pub fn s2(tau: f64, n: usize) -> Result<f64> {
    check_spins(n, 2)?;
    s2_resummed(2.0 * tau, 2.0 / n as f64, Lattice::for_spins(n))
}

/// Gaussian-comb pulse train
/// `1/3 + (2/3) Σ_k (±1)^k (1 − π²(k + τ/π)² N) e^{−π²(k + τ/π)² N/2}`,
/// with the alternating sign for odd `N`.
pub fn p1_profile_asymptotic(tau: f64, n: usize) -> Result<f64> {
    check_spins(n, 50)?;
    let nf = n as f64;
    let eps = tau / PI;
    let centre = -eps.round();
    let reach = (2.0 * EXPONENT_CUTOFF / nf).sqrt() / PI;
    let odd = parity(n) == Parity::Odd;
    let mut acc = Compensated::new();
    for k in (centre - reach - 1.0).floor() as i64..=(centre + reach + 1.0).ceil() as i64 {
        let shift = k as f64 + eps;
        let x = PI * PI * shift * shift * nf;
        if 0.5 * x > EXPONENT_CUTOFF {
            continue;
        }
        let sign = if odd && k.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
        acc.add(sign * (1.0 - x) * (-0.5 * x).exp());
    }
    Ok(1.0 / 3.0 + 2.0 / 3.0 * acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseMetrics {
    pub n_spins: usize,
    pub g: f64,
    /// interval between successive pulses, `2π/g`
    pub period_t: f64,
    /// full period of `P₁` including sign alternation: `4π/g` odd, `2π/g` even
    pub full_period_t: f64,
    /// `4π/(g√N)` for odd `N`, `2π/(g√N)` for even `N`
    pub width_t: f64,
    /// full width at half maximum of `P₁ − P̄₁` around `t = 0`
    pub fwhm_t: f64,
    pub plateau_value: f64,
}

impl PulseMetrics {
    pub fn fwhm_over_width(&self) -> f64 {
        self.fwhm_t / self.width_t
    }
}

pub fn pulse_metrics(n: usize, g: f64) -> Result<PulseMetrics> {
    check_spins(n, 50)?;
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::Domain(format!("pulse metrics need g > 0, got {g}")));
    }
    let exact = ExactPolarization::new(n)?;
    let plateau = exact.time_average();
    let half = 0.5 * (1.0 - plateau);
    let sqrt_n = (n as f64).sqrt();
    // the excess crosses half height before its first zero near τ = 1/√N
    let tau_half = bisect(|tau| exact.p1(tau) - plateau - half, 0.0, 1.0 / sqrt_n, 1e-15)
        .ok_or_else(|| Error::NoSolution("no half-maximum crossing below 1/sqrt(N)".into()))?;
    let (full_period_t, width_t) = match parity(n) {
        Parity::Odd => (4.0 * PI / g, 4.0 * PI / (g * sqrt_n)),
        Parity::Even => (2.0 * PI / g, 2.0 * PI / (g * sqrt_n)),
    };
    Ok(PulseMetrics {
        n_spins: n,
        g,
        period_t: 2.0 * PI / g,
        full_period_t,
        width_t,
        // τ = g t / 2 and the pulse is symmetric about t = 0
        fwhm_t: 4.0 * tau_half / g,
        plateau_value: plateau,
    })
}
