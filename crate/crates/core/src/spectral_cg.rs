//! Second route to `P₁(τ)`: couple spin 1 (spin ½) to the total spin `I_B` of
//! the remaining `N_B = N − 1` spins and sum the evolution phases of the
//! effective Hamiltonian `−(g/2) I²` over Clebsch–Gordan matrix elements.
//!
//! Quantum numbers are [`HalfInt`]s stored as doubled integers, so equality and
//! range checks are exact.

use std::fmt;

use crate::error::{Error, Result};
use crate::numeric::{binomial_exact, ln_binomial, Compensated};

/// Largest cluster accepted by [`p1_via_cg`].
pub const MAX_CG_SPINS: usize = 24;

/// A half-integer `d/2`, stored as `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const HALF: HalfInt = HalfInt(1);
    pub const MINUS_HALF: HalfInt = HalfInt(-1);
    pub const ZERO: HalfInt = HalfInt(0);

    pub const fn from_doubled(d: i64) -> Self {
        Self(d)
    }

    pub const fn doubled(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// `x(x + 1)`
    pub fn casimir(self) -> f64 {
        let d = self.0 as f64;
        d * (d + 2.0) / 4.0
    }

    /// `-self, -self + 1, ..., self`
    pub fn projections(self) -> impl Iterator<Item = HalfInt> {
        (-self.0..=self.0).step_by(2).map(HalfInt)
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl std::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// `⟨½ m_A; I_B (m − m_A) | I m⟩` with the Condon–Shortley phase convention.
///
/// Returns zero when `|m − m_A| > I_B`; any other inconsistency of the quantum
/// numbers is an error.
pub fn cg(m_a: HalfInt, i_b: HalfInt, i: HalfInt, m: HalfInt) -> Result<f64> {
    let bad = |why: &str| Err(Error::QuantumNumbers(format!("m_A={m_a} I_B={i_b} I={i} m={m}: {why}")));
    if m_a != HalfInt::HALF && m_a != HalfInt::MINUS_HALF {
        return bad("m_A must be ±1/2");
    }
    if i_b.0 < 0 {
        return bad("I_B must be non-negative");
    }
    let upper = i == i_b + HalfInt::HALF;
    if !upper && i != i_b - HalfInt::HALF {
        return bad("I must be I_B ± 1/2");
    }
    if i.0 < 0 {
        return bad("I_B = 0 only couples to I = 1/2");
    }
    if m.0.abs() > i.0 || (m.0 - i.0) % 2 != 0 {
        return bad("m must be one of -I..I");
    }
    if (m - m_a).0.abs() > i_b.0 {
        return Ok(0.0);
    }
    let two_j1 = (2 * i_b.0 + 2) as f64; // 2(2 I_B + 1)
    let plus = ((i_b.0 + 1 + m.0) as f64 / two_j1).sqrt();
    let minus = ((i_b.0 + 1 - m.0) as f64 / two_j1).sqrt();
    Ok(match (upper, m_a == HalfInt::HALF) {
        (true, true) => plus,
        (true, false) => minus,
        (false, true) => minus,
        (false, false) => -plus,
    })
}

/// `Σ_{m_A} m_A ⟨½ m_A; I_B m−m_A | I m⟩⟨½ m_A; I_B m−m_A | I' m⟩`, the matrix
/// element of `I_{1z}` between coupled states of equal `m`.
pub fn iz_element(i_b: HalfInt, i: HalfInt, i_prime: HalfInt, m: HalfInt) -> Result<f64> {
    let mut acc = 0.0;
    for m_a in [HalfInt::HALF, HalfInt::MINUS_HALF] {
        acc += m_a.value() * cg(m_a, i_b, i, m)? * cg(m_a, i_b, i_prime, m)?;
    }
    Ok(acc)
}

/// Coefficients `⟨½ m_A; I_B m−m_A | I m⟩` for both `I = I_B ± ½` at one `I_B`.
#[derive(Debug, Clone)]
pub struct CouplingTable {
    pub i_b: HalfInt,
    /// `(I, m, [C(m_A = +½), C(m_A = −½)])`
    pub entries: Vec<(HalfInt, HalfInt, [f64; 2])>,
}

impl CouplingTable {
    pub fn new(i_b: HalfInt) -> Result<Self> {
        if i_b.0 < 0 {
            return Err(Error::QuantumNumbers(format!("I_B={i_b} is negative")));
        }
        let mut entries = Vec::new();
        for i in total_spins(i_b) {
            for m in i.projections() {
                entries.push((
                    i,
                    m,
                    [cg(HalfInt::HALF, i_b, i, m)?, cg(HalfInt::MINUS_HALF, i_b, i, m)?],
                ));
            }
        }
        Ok(Self { i_b, entries })
    }

    /// Largest `|Σ_{m_A} C² − 1|` over all `(I, m)`.
    pub fn normalization_error(&self) -> f64 {
        self.entries
            .iter()
            .map(|(_, _, [p, q])| (p * p + q * q - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest overlap between the `I = I_B + ½` and `I = I_B − ½` states of
    /// equal `m`; zero for a unitary coupling.
    pub fn orthogonality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, m, [p, q]) in &self.entries {
            if *i != self.i_b + HalfInt::HALF {
                continue;
            }
            if let Some((_, _, [r, s])) =
                self.entries.iter().find(|(j, n, _)| *j == self.i_b - HalfInt::HALF && n == m)
            {
                worst = worst.max((p * r + q * s).abs());
            }
        }
        worst
    }
}

fn total_spins(i_b: HalfInt) -> Vec<HalfInt> {
    if i_b.0 == 0 {
        vec![HalfInt::HALF]
    } else {
        vec![i_b - HalfInt::HALF, i_b + HalfInt::HALF]
    }
}

/// Allowed fragment spins `I_B^min, ..., N_B/2`.
pub fn fragment_spins(n_b: usize) -> impl Iterator<Item = HalfInt> {
    let n_b = n_b as i64;
    ((n_b % 2)..=n_b).step_by(2).map(HalfInt)
}

fn check_fragment_spin(i_b: HalfInt, n_b: usize) -> Result<()> {
    let d = i_b.0;
    if d < 0 || d > n_b as i64 || (n_b as i64 - d) % 2 != 0 {
        return Err(Error::QuantumNumbers(format!("I_B={i_b} is not reachable with {n_b} spins")));
    }
    Ok(())
}

/// `w(I_B) = (2I_B + 1)/(N_B + 1) · C(N_B + 1, N_B/2 + I_B + 1)`, the number of
/// spin-`I_B` multiplets among `N_B` spins ½.
pub fn multiplicity_w(i_b: HalfInt, n_b: usize) -> Result<f64> {
    check_fragment_spin(i_b, n_b)?;
    let top = n_b as u64 + 1;
    let pick = (n_b as u64 + i_b.0 as u64) / 2 + 1;
    let factor = (i_b.0 + 1) as u128;
    if let Some(c) = binomial_exact(top, pick) {
        if let Some(num) = c.checked_mul(factor) {
            return Ok((num / top as u128) as f64);
        }
    }
    Ok(factor as f64 / top as f64 * ln_binomial(top, pick).exp())
}

/// Multiplicities of every fragment spin for `N_B` spins.
#[derive(Debug, Clone)]
pub struct MultiplicityTable {
    pub n_b: usize,
    pub w: Vec<(HalfInt, f64)>,
}

impl MultiplicityTable {
    pub fn new(n_b: usize) -> Result<Self> {
        let w = fragment_spins(n_b)
            .map(|i_b| multiplicity_w(i_b, n_b).map(|w| (i_b, w)))
            .collect::<Result<_>>()?;
        Ok(Self { n_b, w })
    }

    /// `Σ (2I_B + 1) w(I_B)`, which should equal `2^{N_B}`.
    pub fn dimension(&self) -> f64 {
        self.w.iter().map(|(i_b, w)| (i_b.0 + 1) as f64 * w).sum()
    }

    /// `Σ_{I_B ≥ |m_B|} w(I_B)`, the number of fragment states with projection `m_B`.
    pub fn states_with_projection(&self, m_b: HalfInt) -> f64 {
        self.w.iter().filter(|(i_b, _)| i_b.0 >= m_b.0.abs()).map(|(_, w)| w).sum()
    }
}

fn check_cg_range(n: usize) -> Result<()> {
    if !(2..=MAX_CG_SPINS).contains(&n) {
        return Err(Error::SpinCountOutOfRange { n, min: 2, max: MAX_CG_SPINS });
    }
    Ok(())
}

/// Full double sum over `(I, I')` pairs and magnetic numbers.
pub fn p1_via_cg(n: usize, tau: f64) -> Result<f64> {
    check_cg_range(n)?;
    let n_b = n - 1;
    let norm = (1.0 - n_b as f64).exp2();
    let mut acc = Compensated::new();
    for i_b in fragment_spins(n_b) {
        let w = multiplicity_w(i_b, n_b)?;
        let spins = total_spins(i_b);
        for &i in &spins {
            for &ip in &spins {
                let phase = (tau * (i.casimir() - ip.casimir())).cos();
                let top = i.min(ip);
                for m in top.projections() {
                    let elem = iz_element(i_b, i, ip, m)?;
                    acc.add(norm * w * phase * elem * elem);
                }
            }
        }
    }
    Ok(acc.value())
}

/// Time-independent part: the diagonal `I = I'` terms only.
pub fn stationary_via_cg(n: usize) -> Result<f64> {
    check_cg_range(n)?;
    let n_b = n - 1;
    let norm = (1.0 - n_b as f64).exp2();
    let mut acc = Compensated::new();
    for i_b in fragment_spins(n_b) {
        let w = multiplicity_w(i_b, n_b)?;
        for i in total_spins(i_b) {
            for m in i.projections() {
                let elem = iz_element(i_b, i, i, m)?;
                acc.add(norm * w * elem * elem);
            }
        }
    }
    Ok(acc.value())
}

/// Time-independent part after the `m` and `I` sums are done:
/// `2^{−N_B}/(N_B + 1) Σ_{I_B} C(N_B + 1, N_B/2 + I_B + 1)(1 + (4/3) I_B(I_B + 1))`.
pub fn stationary_binomial_form(n: usize) -> Result<f64> {
    check_cg_range(n)?;
    let n_b = n - 1;
    let mut acc = Compensated::new();
    for i_b in fragment_spins(n_b) {
        let c = binomial_exact(n as u64, (n_b as u64 + i_b.0 as u64) / 2 + 1).expect("small n") as f64;
        acc.add(c * (1.0 + 4.0 / 3.0 * i_b.casimir()));
    }
    Ok(acc.value() * (-(n_b as f64)).exp2() / n as f64)
}

/// Oscillating part from the `I = I_B + ½`, `I' = I_B − ½` matrix elements.
pub fn oscillating_via_cg(n: usize, tau: f64) -> Result<f64> {
    check_cg_range(n)?;
    let n_b = n - 1;
    let norm = (1.0 - n_b as f64).exp2();
    let mut acc = Compensated::new();
    for i_b in fragment_spins(n_b).filter(|s| s.0 > 0) {
        let w = multiplicity_w(i_b, n_b)?;
        let (upper, lower) = (i_b + HalfInt::HALF, i_b - HalfInt::HALF);
        let phase = 2.0 * (2.0 * tau * (i_b.value() + 0.5)).cos();
        for m in lower.projections() {
            let elem = iz_element(i_b, upper, lower, m)?;
            acc.add(norm * w * phase * elem * elem);
        }
    }
    Ok(acc.value())
}

/// Oscillating part after the `m` sum:
/// `2^{3−N_B}/(3(N_B + 1)) Σ_{I_B ≥ ½} C(N_B + 1, N_B/2 + I_B + 1) I_B(I_B + 1) cos(2τ(I_B + ½))`.
pub fn oscillating_binomial_form(n: usize, tau: f64) -> Result<f64> {
    check_cg_range(n)?;
    let n_b = n - 1;
    let mut acc = Compensated::new();
    for i_b in fragment_spins(n_b).filter(|s| s.0 > 0) {
        let c = binomial_exact(n as u64, (n_b as u64 + i_b.0 as u64) / 2 + 1).expect("small n") as f64;
        acc.add(c * i_b.casimir() * (2.0 * tau * (i_b.value() + 0.5)).cos());
    }
    Ok(acc.value() * (3.0 - n_b as f64).exp2() / (3 * n) as f64)
}

/// Left side of `Σ_{μ=−I_B}^{I_B} (2μ + 1)² = (2I_B + 1)(1 + (4/3) I_B(I_B + 1))`.
pub fn mu_square_sum(i_b: HalfInt) -> f64 {
    i_b.projections().map(|mu| (2.0 * mu.value() + 1.0).powi(2)).sum()
}

/// Right side of the same identity.
pub fn mu_square_sum_closed(i_b: HalfInt) -> f64 {
    (i_b.0 + 1) as f64 * (1.0 + 4.0 / 3.0 * i_b.casimir())
}
