//! Polarization in a cavity whose volume, and hence coupling, fluctuates.
//!
//! With `g(t) = ⟨g⟩ + δg(t)` the phase `τ` becomes `½∫₀ᵗ g dt'`. For Gaussian
//! `δg` with `⟨δg(t₁)δg(t₂)⟩ = σ² γ(|t₁ − t₂|)` each frequency `n = I_B + ½` of
//! the oscillating part is damped by `exp(−n² σ² T²)` with
//! `T² = ∫₀ᵗ (t − t') γ(t') dt'`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{s1_resummed, s2_resummed, Lattice};
use crate::error::{Error, Result};
use crate::exact_dynamics::{parity, validate_grid, ExactPolarization, Parity};
use crate::numeric::{integrate, Compensated, QuadOptions};

/// Correlation function `γ(t)` of the coupling noise.
#[derive(Clone)]
pub enum Kernel {
    /// `γ(t) = e^{−t/t_c}` (Ornstein–Uhlenbeck)
    Exponential,
    /// user-supplied `γ(t)`, `t` in seconds
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Exponential => f.write_str("Exponential"),
            Kernel::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NoiseModel {
    mean_g: f64,
    variance: f64,
    t_c: f64,
    kernel: Kernel,
}

impl NoiseModel {
    pub fn exponential(mean_g: f64, variance: f64, t_c: f64) -> Result<Self> {
        Self::validate(mean_g, variance, t_c)?;
        Ok(Self { mean_g, variance, t_c, kernel: Kernel::Exponential })
    }

    /// Custom kernel; `γ(0) = 1` and `|γ| ≤ 1` are checked on `[0, 50 t_c]`.
    pub fn with_kernel(
        mean_g: f64,
        variance: f64,
        t_c: f64,
        kernel: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::validate(mean_g, variance, t_c)?;
        if (kernel(0.0) - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("kernel must satisfy γ(0) = 1, got {}", kernel(0.0))));
        }
        for i in 0..=1000 {
            let t = 0.05 * t_c * i as f64;
            let v = kernel(t);
            if !v.is_finite() || v.abs() > 1.0 + 1e-12 {
                return Err(Error::Domain(format!("kernel must satisfy |γ(t)| ≤ 1, γ({t}) = {v}")));
            }
        }
        Ok(Self { mean_g, variance, t_c, kernel: Kernel::Custom(Arc::new(kernel)) })
    }

    fn validate(mean_g: f64, variance: f64, t_c: f64) -> Result<()> {
        if !mean_g.is_finite() {
            return Err(Error::Domain(format!("mean coupling {mean_g} must be finite")));
        }
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(Error::Domain(format!("variance {variance} must be non-negative")));
        }
        if !(t_c > 0.0 && t_c.is_finite()) {
            return Err(Error::Domain(format!("correlation time {t_c} must be positive")));
        }
        Ok(())
    }

    pub fn mean_g(&self) -> f64 {
        self.mean_g
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn t_c(&self) -> f64 {
        self.t_c
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn relative_variance(&self) -> f64 {
        self.variance / (self.mean_g * self.mean_g)
    }

    pub fn correlation(&self, t: f64) -> f64 {
        match &self.kernel {
            Kernel::Exponential => (-t.abs() / self.t_c).exp(),
            Kernel::Custom(f) => f(t.abs()),
        }
    }

    /// `t_c² σ²`; the long-correlation regime is `≫ 1`.
    pub fn regime_parameter(&self) -> f64 {
        self.t_c * self.t_c * self.variance
    }
}

/// `x − 1 + e^{−x}` without cancellation for small `x`.
fn exp_kernel_integral(x: f64) -> f64 {
    if x < 1.0 {
        // Σ_{k≥2} (−x)^k / k!
        let mut term = 0.5 * x * x;
        let mut sum = 0.0f64;
        let mut k = 2.0;
        while term.abs() > 1e-17 * sum.abs() {
            sum += term;
            k += 1.0;
            term *= -x / k;
        }
        sum
    } else {
        x + (-x).exp_m1()
    }
}

/// `T²(t) = ∫₀ᵗ (t − t') γ(t') dt'`.
pub fn t_squared(t: f64, model: &NoiseModel) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("T² needs t ≥ 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    match &model.kernel {
        Kernel::Exponential => Ok(model.t_c * model.t_c * exp_kernel_integral(t / model.t_c)),
        Kernel::Custom(f) => {
            let opts = QuadOptions { rel_tol: 1e-10, abs_tol: 0.0, max_intervals: 4000 };
            integrate(|s| (t - s) * f(s), 0.0, t, opts).map(|(v, _)| v)
        }
    }
}

/// Noise-averaged `P₁` from the exact frequency decomposition.
#[derive(Debug, Clone)]
pub struct NoiseAverage {
    exact: ExactPolarization,
    model: NoiseModel,
}

impl NoiseAverage {
    pub fn new(n: usize, model: &NoiseModel) -> Result<Self> {
        Ok(Self { exact: ExactPolarization::new(n)?, model: model.clone() })
    }

    pub fn p1(&self, t: f64) -> Result<f64> {
        let s = self.model.variance * t_squared(t, &self.model)?;
        Ok(self.exact.p1_damped(0.5 * self.model.mean_g * t, s))
    }
}

pub fn p1_noise_analytic(n: usize, t: f64, model: &NoiseModel) -> Result<f64> {
    NoiseAverage::new(n, model)?.p1(t)
}

/// Below this the Gaussian replacement of the binomial weights is flagged.
pub const GAUSSIAN_APPROX_MIN_SPINS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SumRoute {
    Direct,
    Resummed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxValue {
    pub value: f64,
    /// `value − 1/3`, computed without the cancellation against 1/3
    pub excess: f64,
    /// Gaussian width `a = 2/N + σ² T²`
    pub width: f64,
    /// set when `N` is below [`GAUSSIAN_APPROX_MIN_SPINS`]
    pub small_n: bool,
}

fn prefactor(n: usize) -> f64 {
    16.0 / (3.0 * (n as f64).powf(1.5) * (PI / 2.0).sqrt())
}

/// `1/3 + 16/(3N^{3/2}√(π/2)) Σ_n cos(⟨g⟩tn)(n² − ¼) e^{−an²}` with `n` over
/// the integers (even `N`) or half-integers (odd `N`) up to `N/2`.
pub fn p1_noise_gaussian_approx(n: usize, t: f64, model: &NoiseModel) -> Result<ApproxValue> {
    p1_noise_gaussian_approx_with(n, t, model, SumRoute::Direct)
}

pub fn p1_noise_gaussian_approx_with(n: usize, t: f64, model: &NoiseModel, route: SumRoute) -> Result<ApproxValue> {
    if n < 2 {
        return Err(Error::SpinCountOutOfRange { n, min: 2, max: usize::MAX });
    }
    let a = 2.0 / n as f64 + model.variance * t_squared(t, model)?;
    let lattice = Lattice::for_spins(n);
    let theta = model.mean_g * t;
    let sum = match route {
        SumRoute::Direct => {
            let period = match lattice {
                Lattice::Integer => 2.0 * PI,
                Lattice::HalfInteger => 4.0 * PI,
            };
            let theta = theta.rem_euclid(period);
            let first = if lattice == Lattice::Integer { 1.0 } else { 0.5 };
            let mut acc = Compensated::new();
            let mut x = first;
            while x <= n as f64 / 2.0 {
                acc.add((theta * x).cos() * (x * x - 0.25) * (-a * x * x).exp());
                x += 1.0;
            }
            acc.value()
        }
        SumRoute::Resummed => s2_resummed(theta, a, lattice)? - 0.25 * s1_resummed(theta, a, lattice)?,
    };
    let excess = prefactor(n) * sum;
    Ok(ApproxValue {
        value: 1.0 / 3.0 + excess,
        excess,
        width: a,
        small_n: n < GAUSSIAN_APPROX_MIN_SPINS,
    })
}

/// How the width `a` of the envelope at `t = 2πm/⟨g⟩` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// long correlation if `t_c² σ² ≥ 1`, short otherwise
    Auto,
    /// `σ² T² = 2π² m² σ²/⟨g⟩²` (`T² ≈ t²/2`)
    LongCorrelation,
    /// `σ² T² = 2π m t_c σ²/⟨g⟩` (`T² ≈ t_c t`)
    ShortCorrelation,
    /// `σ² T²` from the full kernel integral
    ExactT2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeOptions {
    pub regime: Regime,
    /// keep the `2/N` term in `a`
    pub finite_size_term: bool,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        Self { regime: Regime::Auto, finite_size_term: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub value: f64,
    /// signed deviation from 1/3
    pub excess: f64,
    /// `ln |excess|`, finite even where `excess` underflows
    pub ln_magnitude: f64,
    pub width: f64,
    pub regime: Regime,
}

/// Height of the `m`-th noise-damped peak, `1/3 ± 4√2/(N^{3/2}√π) e^{−a}`.
/// The sign alternates with `m` for odd `N` (negative for odd `m`).
pub fn peak_envelope(n: usize, m: u32, model: &NoiseModel, opts: EnvelopeOptions) -> Result<Envelope> {
    if n < GAUSSIAN_APPROX_MIN_SPINS {
        return Err(Error::SpinCountOutOfRange { n, min: GAUSSIAN_APPROX_MIN_SPINS, max: usize::MAX });
    }
    if m < 1 {
        return Err(Error::Domain("peak index m must be at least 1".into()));
    }
    if model.mean_g == 0.0 {
        return Err(Error::Domain("peak times need a non-zero mean coupling".into()));
    }
    let regime = match (opts.regime, &model.kernel) {
        (Regime::Auto, Kernel::Custom(_)) => Regime::ExactT2,
        (Regime::Auto, Kernel::Exponential) if model.regime_parameter() >= 1.0 => Regime::LongCorrelation,
        (Regime::Auto, Kernel::Exponential) => Regime::ShortCorrelation,
        (r, _) => r,
    };
    let mf = m as f64;
    let g = model.mean_g.abs();
    let damping = match regime {
        Regime::LongCorrelation => 2.0 * PI * PI * mf * mf * model.variance / (g * g),
        Regime::ShortCorrelation => 2.0 * PI * mf * model.t_c * model.variance / g,
        Regime::ExactT2 => model.variance * t_squared(2.0 * PI * mf / g, model)?,
        Regime::Auto => unreachable!("resolved above"),
    };
    let a = damping + if opts.finite_size_term { 2.0 / n as f64 } else { 0.0 };
    let sign = if parity(n) == Parity::Odd && m % 2 == 1 { -1.0 } else { 1.0 };
    let ln_amplitude = (4.0 * 2f64.sqrt() / ((n as f64).powf(1.5) * PI.sqrt())).ln();
    let excess = sign * (ln_amplitude - a).exp();
    Ok(Envelope { value: 1.0 / 3.0 + excess, excess, ln_magnitude: ln_amplitude - a, width: a, regime })
}

/// Realizations per reduction block. Blocks are reduced in index order, so
/// the result does not depend on how blocks are spread over threads.
pub const REALIZATION_BLOCK: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloTrace {
    pub t: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_realizations: usize,
    pub seed: u64,
}

/// Running mean and sum of squared deviations per grid point.
#[derive(Debug, Clone)]
struct Moments {
    count: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self { count: 0.0, mean: vec![0.0; len], m2: vec![0.0; len] }
    }

    fn push(&mut self, sample: &[f64]) {
        self.count += 1.0;
        for ((mu, m2), &x) in self.mean.iter_mut().zip(&mut self.m2).zip(sample) {
            let d = x - *mu;
            *mu += d / self.count;
            *m2 += d * (x - *mu);
        }
    }

    fn merge(&mut self, other: &Moments) {
        let total = self.count + other.count;
        if other.count == 0.0 {
            return;
        }
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * other.count / total;
            self.m2[i] += other.m2[i] + d * d * self.count * other.count / total;
        }
        self.count = total;
    }
}

/// Generator for realization `index`: one ChaCha stream per realization.
pub fn realization_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Exact discretization of the OU process with unit correlation `e^{−|Δ|/t_c}`:
/// a stationary draw at `t = 0`, then `δg ← ρ δg + √(σ²(1 − ρ²)) ξ` per step.
pub fn ou_path<R: Rng>(model: &NoiseModel, steps: &[f64], rng: &mut R) -> Vec<f64> {
    let sigma = model.variance.sqrt();
    let mut x = sigma * rng.sample::<f64, _>(StandardNormal);
    let mut path = Vec::with_capacity(steps.len() + 1);
    path.push(x);
    for &h in steps {
        let rho = (-h / model.t_c).exp();
        let kick = sigma * (-(rho * rho)).ln_1p().exp().sqrt();
        x = rho * x + kick * rng.sample::<f64, _>(StandardNormal);
        path.push(x);
    }
    path
}

/// Averages `P₁(½∫₀ᵗ g dt')` over OU realizations of `g`. The phase is
/// integrated with the trapezoid rule from `t = 0`, so the grid must start at
/// `t ≥ 0` and every step (including the one from 0) must be at most `t_c/10`.
pub fn monte_carlo(
    n: usize,
    grid: &[f64],
    model: &NoiseModel,
    n_realizations: usize,
    seed: u64,
) -> Result<MonteCarloTrace> {
    if n_realizations < 2 {
        return Err(Error::Domain(format!("need at least 2 realizations, got {n_realizations}")));
    }
    if !matches!(model.kernel, Kernel::Exponential) {
        return Err(Error::Domain("Monte Carlo sampling supports only the exponential kernel".into()));
    }
    validate_grid(grid)?;
    if grid[0] < 0.0 {
        return Err(Error::InvalidGrid("noise grid must start at t ≥ 0".into()));
    }
    let limit = model.t_c / 10.0;
    let mut steps = Vec::with_capacity(grid.len());
    let mut prev = 0.0;
    for &t in grid {
        let h = t - prev;
        if h > limit * (1.0 + 1e-12) {
            return Err(Error::StepSize { step: h, limit });
        }
        steps.push(h);
        prev = t;
    }
    let exact = ExactPolarization::new(n)?;
    let starts_at_zero = grid[0] == 0.0;
    // the step from t = 0 to grid[0] has zero length when the grid starts at 0
    let path_steps: &[f64] = if starts_at_zero { &steps[1..] } else { &steps };

    let realization = |index: usize, out: &mut Vec<f64>| {
        let mut rng = realization_rng(seed, index as u64);
        let dg = ou_path(model, path_steps, &mut rng);
        out.clear();
        let mut phase = 0.0;
        let mut j = 0;
        if starts_at_zero {
            out.push(exact.p1(0.0));
        }
        for (i, &h) in path_steps.iter().enumerate() {
            let g0 = model.mean_g + dg[i];
            let g1 = model.mean_g + dg[i + 1];
            phase += 0.25 * h * (g0 + g1);
            out.push(exact.p1(phase));
            j += 1;
        }
        debug_assert_eq!(j, path_steps.len());
    };

    let n_blocks = n_realizations.div_ceil(REALIZATION_BLOCK);
    let blocks: Vec<Moments> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut stats = Moments::new(grid.len());
            let mut sample = Vec::with_capacity(grid.len());
            let end = ((b + 1) * REALIZATION_BLOCK).min(n_realizations);
            for index in b * REALIZATION_BLOCK..end {
                realization(index, &mut sample);
                stats.push(&sample);
            }
            stats
        })
        .collect();
    let mut total = Moments::new(grid.len());
    for b in &blocks {
        total.merge(b);
    }
    let count = total.count;
    let stderr = total.m2.iter().map(|m2| (m2 / (count - 1.0) / count).sqrt()).collect();
    Ok(MonteCarloTrace { t: grid.to_vec(), mean: total.mean, stderr, n_realizations, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_dynamics::p1_exact;
    use crate::exact_dynamics::ClusterSpec;

    fn model(var: f64, t_c: f64) -> NoiseModel {
        NoiseModel::exponential(1.0, var, t_c).unwrap()
    }

    #[test]
    fn t_squared_limits() {
        let m = model(1.0, 2.0);
        assert_eq!(t_squared(0.0, &m).unwrap(), 0.0);
        // T² = (t²/2)(1 − x/3 + x²/12 − x³/60 + …), x = t/t_c
        let t = 2.0e-4;
        let x = t / 2.0;
        let ratio = t_squared(t, &m).unwrap() / (t * t / 2.0);
        assert!((ratio - (1.0 - x / 3.0 + x * x / 12.0 - x * x * x / 60.0)).abs() < 1e-14);
        let t = 2.0e-6;
        assert!((t_squared(t, &m).unwrap() / (t * t / 2.0) - 1.0).abs() < 1e-6);
        let t = 2.0e4;
        assert!((t_squared(t, &m).unwrap() / (2.0 * t) - 1.0).abs() < 1e-3);
        assert!(t_squared(-1.0, &m).is_err());
    }

    #[test]
    fn t_squared_branches_join() {
        let m = model(1.0, 1.0);
        let h = 1e-9;
        let below = t_squared(1.0 - h, &m).unwrap();
        let above = t_squared(1.0, &m).unwrap();
        // dT²/dt = t_c(1 − e^{−x})
        let slope = 1.0 - (-1f64).exp();
        assert!((above - below - h * slope).abs() < 1e-15);
        assert!((above - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn custom_kernel_matches_exponential() {
        let t_c = 0.7;
        let custom = NoiseModel::with_kernel(1.0, 1.0, t_c, move |t| (-t / t_c).exp()).unwrap();
        let closed = model(1.0, t_c);
        for t in [0.01, 0.5, 3.0, 40.0] {
            let a = t_squared(t, &custom).unwrap();
            let b = t_squared(t, &closed).unwrap();
            assert!((a / b - 1.0).abs() < 1e-9, "t={t}");
        }
        assert!(NoiseModel::with_kernel(1.0, 1.0, 1.0, |_| 0.5).is_err());
        assert!(NoiseModel::with_kernel(1.0, 1.0, 1.0, |t| 1.0 + t).is_err());
    }

    #[test]
    fn invalid_models() {
        assert!(NoiseModel::exponential(1.0, -1.0, 1.0).is_err());
        assert!(NoiseModel::exponential(1.0, 1.0, 0.0).is_err());
        assert!(NoiseModel::exponential(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn noiseless_reduction() {
        let m = model(0.0, 1.0);
        for n in [2, 7, 134] {
            let cluster = ClusterSpec::new(n, 1.0).unwrap();
            for j in 0..50 {
                let t = 0.731 * j as f64;
                let gap = (p1_noise_analytic(n, t, &m).unwrap() - p1_exact(&cluster, t / 2.0)).abs();
                assert!(gap < 1e-12, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn late_times_reach_the_time_average() {
        let m = model(1e-2, 10.0);
        for n in [134, 135] {
            let late = p1_noise_analytic(n, 1e7, &m).unwrap();
            assert!((late - crate::exact_dynamics::p1_time_average(n)).abs() < 1e-12);
        }
        let approx = p1_noise_gaussian_approx(134, 1e7, &m).unwrap();
        assert!((approx.value - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn gaussian_approx_routes_agree() {
        let m = model(1e-4, 50.0);
        for n in [200, 201] {
            for t in [0.0, 0.3, 2.0 * PI, 4.0 * PI + 0.1, 100.0] {
                let d = p1_noise_gaussian_approx_with(n, t, &m, SumRoute::Direct).unwrap();
                let r = p1_noise_gaussian_approx_with(n, t, &m, SumRoute::Resummed).unwrap();
                assert!((d.value - r.value).abs() < 1e-12, "n={n} t={t}");
            }
        }
        assert!(p1_noise_gaussian_approx(20, 0.0, &m).unwrap().small_n);
    }

    #[test]
    fn gaussian_approx_starts_near_one() {
        let m = model(0.0, 1.0);
        for n in [100, 400, 1600] {
            let v = p1_noise_gaussian_approx(n, 0.0, &m).unwrap().value;
            assert!((v - 1.0).abs() < 2.0 / n as f64, "n={n}: {v}");
        }
    }

    #[test]
    fn approx_tracks_exact_at_peaks() {
        let m = model(1e-4, 50.0);
        let n = 200;
        for k in 0..6 {
            let t = 2.0 * PI * k as f64;
            let exact = p1_noise_analytic(n, t, &m).unwrap();
            let approx = p1_noise_gaussian_approx(n, t, &m).unwrap().value;
            assert!((exact - approx).abs() < 2.0 / (n as f64).sqrt(), "t={t}");
        }
    }

    #[test]
    fn envelope_matches_approx_peaks() {
        let m = model(4e-3, 1e6);
        let opts = EnvelopeOptions { regime: Regime::ExactT2, ..Default::default() };
        for k in 5..=20 {
            let env = peak_envelope(400, k, &m, opts).unwrap();
            let approx = p1_noise_gaussian_approx(400, 2.0 * PI * k as f64, &m).unwrap();
            assert!((approx.excess / env.excess - 1.0).abs() < 0.05, "m={k}");
        }
    }

    #[test]
    fn envelope_signs_and_limit() {
        let m = model(1e-2, 1e4);
        let even = peak_envelope(400, 30, &m, EnvelopeOptions::default()).unwrap();
        assert_eq!(even.regime, Regime::LongCorrelation);
        assert!((even.value - 1.0 / 3.0).abs() < 1e-9);
        let odd1 = peak_envelope(401, 1, &m, EnvelopeOptions::default()).unwrap();
        let odd2 = peak_envelope(401, 2, &m, EnvelopeOptions::default()).unwrap();
        assert!(odd1.excess < 0.0 && odd2.excess > 0.0);
        assert!(peak_envelope(40, 1, &m, EnvelopeOptions::default()).is_err());
        assert!(peak_envelope(400, 0, &m, EnvelopeOptions::default()).is_err());
        let short = model(0.1, 0.01);
        let e = peak_envelope(400, 3, &short, EnvelopeOptions::default()).unwrap();
        assert_eq!(e.regime, Regime::ShortCorrelation);
        let dropped = peak_envelope(400, 3, &short, EnvelopeOptions { finite_size_term: false, ..Default::default() })
            .unwrap();
        assert!((e.width - dropped.width - 2.0 / 400.0).abs() < 1e-15);
    }

    #[test]
    fn damping_is_monotone() {
        let m = model(1.0, 0.3);
        let mut prev = 0.0;
        for j in 0..2000 {
            let t2 = t_squared(0.01 * j as f64, &m).unwrap();
            assert!(t2 >= prev);
            prev = t2;
        }
    }

    #[test]
    fn noiseless_monte_carlo_is_deterministic_trace() {
        let m = model(0.0, 1.0);
        let grid: Vec<f64> = (0..200).map(|j| 0.05 * j as f64).collect();
        let mc = monte_carlo(9, &grid, &m, 4, 1).unwrap();
        for (t, (mu, se)) in grid.iter().zip(mc.mean.iter().zip(&mc.stderr)) {
            assert!((mu - p1_exact(&ClusterSpec::new(9, 1.0).unwrap(), t / 2.0)).abs() < 1e-12);
            assert_eq!(*se, 0.0);
        }
    }

    #[test]
    fn monte_carlo_errors() {
        let m = model(1e-4, 1.0);
        assert!(matches!(monte_carlo(9, &[0.0, 0.5], &m, 10, 0), Err(Error::StepSize { .. })));
        assert!(monte_carlo(9, &[0.0, 0.05], &m, 1, 0).is_err());
        assert!(monte_carlo(9, &[0.05, 0.0], &m, 10, 0).is_err());
        let custom = NoiseModel::with_kernel(1.0, 1.0, 1.0, |t| (-t).exp()).unwrap();
        assert!(monte_carlo(9, &[0.0, 0.05], &custom, 10, 0).is_err());
    }

    #[test]
    fn ou_autocovariance() {
        let t_c = 1.0;
        let var = 2.5;
        let m = model(var, t_c);
        let h = 0.05;
        let lags = [0usize, 20, 40];
        let paths = 200;
        let len = 4000;
        let steps = vec![h; len - 1];
        let estimates: Vec<[f64; 3]> = (0..paths)
            .map(|p| {
                let path = ou_path(&m, &steps, &mut realization_rng(7, p));
                let mut out = [0.0; 3];
                for (slot, &lag) in out.iter_mut().zip(&lags) {
                    let pairs = len - lag;
                    *slot = (0..pairs).map(|i| path[i] * path[i + lag]).sum::<f64>() / pairs as f64;
                }
                out
            })
            .collect();
        for (i, &lag) in lags.iter().enumerate() {
            let vals: Vec<f64> = estimates.iter().map(|e| e[i]).collect();
            let mean = vals.iter().sum::<f64>() / paths as f64;
            let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (paths - 1) as f64).sqrt();
            let se = sd / (paths as f64).sqrt();
            let expected = var * (-(lag as f64) * h / t_c).exp();
            assert!((mean - expected).abs() < 3.0 * se, "lag={lag}: {mean} vs {expected} ± {se}");
        }
    }
}
