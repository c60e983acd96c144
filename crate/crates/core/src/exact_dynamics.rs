//! Closed-form polarization of the initially polarized spin.
//!
//! For a cluster of `N` spins with all-to-all coupling `g` the polarization of
//! spin 1 at dimensionless time `τ = g t / 2` is
//!
//! ```text
//! P₁(τ) = P̄₁ + 2^{4−N}/(3N) · Σ_k A_k(N) cos(τ (N − 2k))
//! A_k(N) = ((N+1)/2 − k)((N−1)/2 − k) · C(N, k)
//! ```
//!
//! with `k ≤ N/2 − 1` (even `N`) or `k ≤ (N−1)/2` (odd `N`), and the time
//! average `P̄₁ = (N+2)/(3N)` for odd `N`, `(N + 2 − 2^{1−N} C(N, N/2))/(3N)`
//! for even `N`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{binomial_exact, half_binomial_pmf, ln_half_binomial_pmf, Compensated};

/// Largest `N` for which the weights are built with exact integer arithmetic.
pub const EXACT_WEIGHT_LIMIT: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

/// Spin count and coupling `g` (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    n_spins: usize,
    g: f64,
}

impl ClusterSpec {
    pub fn new(n_spins: usize, g: f64) -> Result<Self> {
        if n_spins < 2 {
            return Err(Error::SpinCountOutOfRange { n: n_spins, min: 2, max: usize::MAX });
        }
        if !g.is_finite() {
            return Err(Error::Domain(format!("coupling g={g} must be finite")));
        }
        Ok(Self { n_spins, g })
    }

    /// Cluster parameterized by `τ` only (`g` unknown or irrelevant).
    pub fn dimensionless(n_spins: usize) -> Result<Self> {
        Self::new(n_spins, 0.0)
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn parity(&self) -> Parity {
        parity(self.n_spins)
    }

    /// Size of the fragment of spins `2..=N`.
    pub fn fragment_size(&self) -> usize {
        self.n_spins - 1
    }

    pub fn tau(&self, t: f64) -> f64 {
        0.5 * self.g * t
    }

    pub fn time(&self, tau: f64) -> Result<f64> {
        if self.g == 0.0 {
            return Err(Error::Domain("t-parameterization needs a non-zero coupling".into()));
        }
        Ok(2.0 * tau / self.g)
    }

    /// Period of `P₁` in `τ`: `2π` for odd `N`, `π` for even `N`.
    pub fn period_tau(&self) -> f64 {
        period_tau(self.n_spins)
    }
}

pub fn parity(n: usize) -> Parity {
    if n.is_multiple_of(2) {
        Parity::Even
    } else {
        Parity::Odd
    }
}

fn period_tau(n: usize) -> f64 {
    match parity(n) {
        Parity::Odd => 2.0 * PI,
        Parity::Even => PI,
    }
}

/// `A_k(N)`. Exact integer arithmetic for `N ≤ 60`, log space above (the
/// result overflows to infinity once `C(N, k)` leaves the `f64` range).
pub fn coefficient_a(k: usize, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::SpinCountOutOfRange { n, min: 2, max: usize::MAX });
    }
    if k > n / 2 {
        return Err(Error::IndexOutOfRange { index: k, max: n / 2 });
    }
    let (twice_a, twice_b) = doubled_factors(k, n);
    if n <= EXACT_WEIGHT_LIMIT {
        let c = binomial_exact(n as u64, k as u64).expect("fits for n <= 60") as i128;
        return Ok((twice_a * twice_b) as f64 * c as f64 / 4.0);
    }
    if twice_b == 0 {
        return Ok(0.0);
    }
    let sign = (twice_a * twice_b).signum() as f64;
    let ln_abs = ((twice_a * twice_b).abs() as f64 / 4.0).ln()
        + ln_half_binomial_pmf(n as u64, k as u64)
        + n as f64 * std::f64::consts::LN_2;
    Ok(sign * ln_abs.exp())
}

/// `(N + 1 − 2k, N − 1 − 2k)`, i.e. twice the two linear factors of `A_k`.
fn doubled_factors(k: usize, n: usize) -> (i128, i128) {
    let (n, k) = (n as i128, k as i128);
    (n + 1 - 2 * k, n - 1 - 2 * k)
}

/// `2^{4−N} A_k(N) / (3N)`, the weight of `cos(τ(N − 2k))` in `P₁`.
pub fn oscillation_weight(k: usize, n: usize) -> f64 {
    let (twice_a, twice_b) = doubled_factors(k, n);
    if twice_b == 0 {
        return 0.0;
    }
    if n <= EXACT_WEIGHT_LIMIT {
        let c = binomial_exact(n as u64, k as u64).expect("fits for n <= 60") as i128;
        let numerator = (twice_a * twice_b * c) as f64;
        // 2^{4−N}/(3N) · num/4 = num / (3N · 2^{N−2})
        return numerator / (3 * n) as f64 * (2.0 - n as f64).exp2();
    }
    let sign = (twice_a * twice_b).signum() as f64;
    let ln_abs = (16.0 / (3.0 * n as f64)).ln()
        + (twice_a.abs() as f64 / 2.0).ln()
        + (twice_b.abs() as f64 / 2.0).ln()
        + ln_half_binomial_pmf(n as u64, k as u64);
    sign * ln_abs.exp()
}

/// `P̄₁`, the time average of the first-spin polarization.
pub fn p1_time_average(n: usize) -> f64 {
    let nf = n as f64;
    match parity(n) {
        Parity::Odd => (nf + 2.0) / (3.0 * nf),
        Parity::Even => {
            let central = 2.0 * half_binomial_pmf(n as u64, n as u64 / 2);
            (nf + 2.0 - central) / (3.0 * nf)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillation {
    /// `N − 2k`, the angular frequency in units of `τ⁻¹`.
    pub frequency: f64,
    pub weight: f64,
}

/// Precomputed closed form for a fixed `N`.
#[derive(Debug, Clone)]
pub struct ExactPolarization {
    n: usize,
    time_average: f64,
    /// sorted by decreasing |weight|
    terms: Vec<Oscillation>,
}

impl ExactPolarization {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::SpinCountOutOfRange { n, min: 2, max: usize::MAX });
        }
        let k_max = match parity(n) {
            Parity::Even => n / 2 - 1,
            Parity::Odd => (n - 1) / 2,
        };
        let mut terms: Vec<Oscillation> = (0..=k_max)
            .map(|k| Oscillation {
                frequency: (n - 2 * k) as f64,
                weight: oscillation_weight(k, n),
            })
            .filter(|o| o.weight != 0.0)
            .collect();
        terms.sort_by(|x, y| y.weight.abs().total_cmp(&x.weight.abs()));
        Ok(Self { n, time_average: p1_time_average(n), terms })
    }

    pub fn n_spins(&self) -> usize {
        self.n
    }

    pub fn time_average(&self) -> f64 {
        self.time_average
    }

    pub fn oscillations(&self) -> &[Oscillation] {
        &self.terms
    }

    /// Sum of the oscillation weights, `P₁(0) − P̄₁`.
    pub fn weight_sum(&self) -> f64 {
        self.terms.iter().map(|o| o.weight).collect::<Compensated>().value()
    }

    /// `τ` folded into one period; every frequency is an integer multiple of
    /// the base frequency, so the fold is exact up to rounding of the input.
    fn fold(&self, tau: f64) -> f64 {
        tau.rem_euclid(period_tau(self.n))
    }

    pub fn oscillating(&self, tau: f64) -> f64 {
        let tau = self.fold(tau);
        let mut acc = Compensated::new();
        for o in &self.terms {
            acc.add(o.weight * (o.frequency * tau).cos());
        }
        acc.value()
    }

    pub fn p1(&self, tau: f64) -> f64 {
        let tau = self.fold(tau);
        let mut acc = Compensated::new();
        acc.add(self.time_average);
        for o in &self.terms {
            acc.add(o.weight * (o.frequency * tau).cos());
        }
        acc.value()
    }

    /// `P₁` with each `cos(fτ)` term damped by `exp(−(f/2)² s)`; `s = 0`
    /// reproduces [`Self::p1`] exactly.
    pub fn p1_damped(&self, tau: f64, s: f64) -> f64 {
        let tau = self.fold(tau);
        let mut acc = Compensated::new();
        acc.add(self.time_average);
        for o in &self.terms {
            let half = 0.5 * o.frequency;
            acc.add(o.weight * (-half * half * s).exp() * (o.frequency * tau).cos());
        }
        acc.value()
    }

    /// Polarization of any spin other than the first, `(1 − P₁)/(N − 1)`.
    pub fn p_other(&self, tau: f64) -> f64 {
        (1.0 - self.p1(tau)) / (self.n - 1) as f64
    }
}

pub fn p1_exact(cluster: &ClusterSpec, tau: f64) -> f64 {
    ExactPolarization::new(cluster.n_spins).expect("validated cluster").p1(tau)
}

pub fn p_other(cluster: &ClusterSpec, tau: f64) -> f64 {
    ExactPolarization::new(cluster.n_spins).expect("validated cluster").p_other(tau)
}

/// Sampling points, either in dimensionless `τ` or in seconds.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeGrid {
    Tau(Vec<f64>),
    Time(Vec<f64>),
}

impl TimeGrid {
    /// `points` evenly spaced samples of `[start, end]`.
    pub fn linspace_tau(start: f64, end: f64, points: usize) -> Self {
        Self::Tau(linspace(start, end, points))
    }

    pub fn linspace_time(start: f64, end: f64, points: usize) -> Self {
        Self::Time(linspace(start, end, points))
    }

    fn values(&self) -> &[f64] {
        match self {
            Self::Tau(v) | Self::Time(v) => v,
        }
    }
}

pub fn linspace(start: f64, end: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (points - 1) as f64;
            (0..points)
                .map(|i| if i == points - 1 { end } else { start + step * i as f64 })
                .collect()
        }
    }
}

pub(crate) fn validate_grid(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidGrid("non-finite grid point".into()));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Sampled `P₁` and other-spin polarization on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolarizationTrace {
    pub cluster: ClusterSpec,
    pub tau: Vec<f64>,
    /// Seconds; absent for traces of a cluster with `g = 0`.
    pub t: Option<Vec<f64>>,
    pub p1: Vec<f64>,
    pub p_other: Vec<f64>,
}

impl PolarizationTrace {
    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    /// Largest violation of `P₁ + (N − 1) P_other = 1`.
    pub fn conservation_error(&self) -> f64 {
        let others = (self.cluster.n_spins - 1) as f64;
        self.p1
            .iter()
            .zip(&self.p_other)
            .map(|(p1, po)| (p1 + others * po - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Evaluates the closed form over a grid. Grid points are independent, so the
/// parallel evaluation is bitwise identical to a sequential one.
pub fn trace(cluster: &ClusterSpec, grid: &TimeGrid) -> Result<PolarizationTrace> {
    validate_grid(grid.values())?;
    let (tau, t) = match grid {
        TimeGrid::Tau(tau) => {
            let t = (cluster.g != 0.0).then(|| tau.iter().map(|&x| 2.0 * x / cluster.g).collect());
            (tau.clone(), t)
        }
        TimeGrid::Time(t) => {
            if cluster.g == 0.0 {
                return Err(Error::Domain("time grid requires a non-zero coupling".into()));
            }
            (t.iter().map(|&x| cluster.tau(x)).collect(), Some(t.clone()))
        }
    };
    let exact = ExactPolarization::new(cluster.n_spins)?;
    let p1: Vec<f64> = tau.par_iter().map(|&x| exact.p1(x)).collect();
    let others = (cluster.n_spins - 1) as f64;
    let p_other = p1.iter().map(|p| (1.0 - p) / others).collect();
    Ok(PolarizationTrace { cluster: *cluster, tau, t, p1, p_other })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_examples() {
        assert_eq!(coefficient_a(0, 3).unwrap(), 2.0);
        assert_eq!(coefficient_a(1, 3).unwrap(), 0.0);
        assert_eq!(coefficient_a(0, 2).unwrap(), 0.75);
        assert!(matches!(coefficient_a(2, 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn coefficient_paths_agree_across_switch() {
        // evaluate the log-space formula below the switch and compare
        for n in [20usize, 41, 60] {
            for k in 0..=n / 2 {
                let exact = coefficient_a(k, n).unwrap();
                let (ta, tb) = doubled_factors(k, n);
                let logged = if tb == 0 {
                    0.0
                } else {
                    (ta * tb).signum() as f64
                        * (((ta * tb).abs() as f64 / 4.0).ln()
                            + ln_half_binomial_pmf(n as u64, k as u64)
                            + n as f64 * std::f64::consts::LN_2)
                            .exp()
                };
                let scale = exact.abs().max(1.0);
                assert!((exact - logged).abs() / scale < 1e-13, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn weight_paths_agree() {
        for n in 2..=EXACT_WEIGHT_LIMIT {
            for k in 0..n / 2 {
                let exact = oscillation_weight(k, n);
                let (ta, tb) = doubled_factors(k, n);
                if tb == 0 {
                    continue;
                }
                let ln_w = (16.0 / (3.0 * n as f64)).ln()
                    + (ta.abs() as f64 / 2.0).ln()
                    + (tb.abs() as f64 / 2.0).ln()
                    + ln_half_binomial_pmf(n as u64, k as u64);
                let logged = (ta * tb).signum() as f64 * ln_w.exp();
                let tol = 8.0 * f64::EPSILON * (1.0 + ln_w.abs());
                assert!((exact - logged).abs() <= tol * exact.abs(), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn two_and_three_spin_closed_forms() {
        let two = ExactPolarization::new(2).unwrap();
        for tau in [0.0, 0.3, 1.1, 2.9] {
            assert!((two.p1(tau) - (0.5 + 0.5 * (2.0 * tau).cos())).abs() < 1e-15);
        }
        assert!(two.p1(PI / 2.0).abs() < 1e-15);
        let three = ExactPolarization::new(3).unwrap();
        for tau in [0.0f64, 0.4, 2.0] {
            let expected = 5.0 / 9.0 + 4.0 / 9.0 * (3.0 * tau).cos();
            assert!((three.p1(tau) - expected).abs() < 1e-15);
        }
        assert!((three.p1(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn time_averages() {
        assert!((p1_time_average(2) - 0.5).abs() < 1e-15);
        assert!((p1_time_average(3) - 5.0 / 9.0).abs() < 1e-15);
        let n = 1_000_000usize;
        let nf = n as f64;
        let asym = (nf + 2.0 - 2.0 * (PI * nf / 2.0).powf(-0.5)) / (3.0 * nf);
        assert!((p1_time_average(n) / asym - 1.0).abs() < 1e-9);
    }

    #[test]
    fn weight_sum_identity() {
        for n in 2..=200 {
            let exact = ExactPolarization::new(n).unwrap();
            let total = exact.time_average() + exact.weight_sum();
            assert!((total - 1.0).abs() < 1e-12, "n={n}: {total}");
            assert!((exact.p1(0.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn large_clusters_start_fully_polarized() {
        for n in [1_001usize, 4_096, 10_000] {
            let exact = ExactPolarization::new(n).unwrap();
            assert!((exact.p1(0.0) - 1.0).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn other_spin_examples() {
        let two = ClusterSpec::dimensionless(2).unwrap();
        assert_eq!(p_other(&two, 0.0), 0.0);
        assert!((p_other(&two, PI / 2.0) - 1.0).abs() < 1e-15);
        let three_avg = (1.0 - p1_time_average(3)) / 2.0;
        assert!((three_avg - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn two_spin_trace_grid() {
        let cluster = ClusterSpec::dimensionless(2).unwrap();
        let tr = trace(&cluster, &TimeGrid::Tau(vec![0.0, PI / 2.0, PI])).unwrap();
        let expected = [1.0, 0.0, 1.0];
        for (got, want) in tr.p1.iter().zip(expected) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!(tr.t.is_none());
        assert!(tr.conservation_error() < 1e-15);
    }

    #[test]
    fn grid_errors() {
        let cluster = ClusterSpec::dimensionless(4).unwrap();
        assert!(matches!(trace(&cluster, &TimeGrid::Tau(vec![])), Err(Error::InvalidGrid(_))));
        assert!(matches!(
            trace(&cluster, &TimeGrid::Tau(vec![1.0, 0.5])),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(trace(&cluster, &TimeGrid::Time(vec![0.0, 1.0])), Err(Error::Domain(_))));
        assert!(ClusterSpec::new(1, 1.0).is_err());
    }

    #[test]
    fn time_grid_uses_tau_half_gt() {
        let cluster = ClusterSpec::new(5, 4.0).unwrap();
        let tr = trace(&cluster, &TimeGrid::Time(vec![0.0, 0.25, 0.5])).unwrap();
        assert_eq!(tr.tau, vec![0.0, 0.5, 1.0]);
        assert_eq!(cluster.time(1.0).unwrap(), 0.5);
    }
}
