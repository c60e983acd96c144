//! Ellipsoidal cavity geometry: shape integral, form factor, effective
//! coupling, and the inverse problem from pulse observables.
//!
//! Units are CGS-Gaussian. Lengths enter in nanometres and are converted to
//! centimetres before they meet `ħ` and `γ`:
//!
//! * `γ` in rad·s⁻¹·G⁻¹, `ħ` in erg·s, volume in cm³, so `γ²ħ/V` is in s⁻¹.
//! * concentrations enter in nm⁻³ and are converted to cm⁻³.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::bisect;

/// Reduced Planck constant, erg·s.
pub const HBAR_CGS: f64 = 1.054_571_817e-27;
/// Proton gyromagnetic ratio, rad·s⁻¹·G⁻¹.
pub const PROTON_GAMMA: f64 = 2.675_221_874_4e4;
/// cm³ per nm³.
pub const NM3_TO_CM3: f64 = 1e-21;
/// `arccos(1/√3)`, where `P₂(cos α)` vanishes.
pub const MAGIC_ANGLE: f64 = 0.955_316_618_124_509_3;

/// Shape integral range limits: needle (`a/b → ∞`) and disk (`a/b → 0`).
pub const SHAPE_INTEGRAL_MAX: f64 = 2.0 / 3.0;
pub const SHAPE_INTEGRAL_MIN: f64 = -4.0 / 3.0;

const SERIES_SWITCH: f64 = 0.1;
const ASPECT_BRACKET: (f64, f64) = (1e-6, 1e6);
const DEGENERATE_P2: f64 = 1e-9;

/// Spheroidal cavity with symmetry semi-axis `a` and transverse semi-axis `b`
/// (nm), tilted by `alpha` (rad) from the external field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    a: f64,
    b: f64,
    alpha: f64,
}

impl CavityGeometry {
    pub fn new(a: f64, b: f64, alpha: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || !(b > 0.0 && b.is_finite()) {
            return Err(Error::Domain(format!("semi-axes must be positive, got a={a}, b={b}")));
        }
        if !(0.0..=PI).contains(&alpha) {
            return Err(Error::Domain(format!("alpha={alpha} outside [0, pi]")));
        }
        Ok(Self { a, b, alpha })
    }

    /// Builds the geometry with a given volume (nm³) and aspect ratio `a/b`.
    pub fn from_volume(volume: f64, aspect: f64, alpha: f64) -> Result<Self> {
        if !(volume > 0.0) || !(aspect > 0.0) {
            return Err(Error::Domain(format!("volume={volume}, aspect={aspect}")));
        }
        // V = 4π/3 · a · b², a = aspect · b
        let b = (3.0 * volume / (4.0 * PI * aspect)).cbrt();
        Self::new(aspect * b, b, alpha)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn aspect(&self) -> f64 {
        self.a / self.b
    }

    /// nm³
    pub fn volume(&self) -> f64 {
        4.0 * PI / 3.0 * self.a * self.b * self.b
    }
}

/// Spin-carrying gas: gyromagnetic ratio (rad·s⁻¹·G⁻¹), concentration (nm⁻³)
/// and the number of spins in the cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasSpec {
    pub gamma: f64,
    pub concentration: f64,
    pub n_spins: usize,
}

impl GasSpec {
    pub fn new(gamma: f64, concentration: f64, n_spins: usize) -> Result<Self> {
        if !(gamma > 0.0) || !(concentration > 0.0) {
            return Err(Error::Domain(format!(
                "gamma={gamma} and concentration={concentration} must be positive"
            )));
        }
        if n_spins < 2 {
            return Err(Error::SpinCountOutOfRange { n: n_spins, min: 2, max: usize::MAX });
        }
        Ok(Self { gamma, concentration, n_spins })
    }

    /// Gas filling `geom` at `n_spins / volume`.
    pub fn filling(geom: &CavityGeometry, gamma: f64, n_spins: usize) -> Result<Self> {
        Self::new(gamma, n_spins as f64 / geom.volume(), n_spins)
    }
}

/// `P₂(x) = (3x² − 1)/2` for `|x| ≤ 1`.
pub fn legendre_p2(x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0 + 1e-12) {
        return Err(Error::Domain(format!("P2 argument {x} outside [-1, 1]")));
    }
    Ok(0.5 * (3.0 * x * x - 1.0))
}

/// Dimensionless shape integral `I(a/b)`, ranging over `(−4/3, 2/3]`.
///
/// With `ε² = 1 − (b/a)²` the prolate branch is
/// `2/3 + 2(1/ε² − 1)(1 − artanh(ε)/ε)` and the oblate branch
/// `2/3 − 2(1/|ε|² + 1)(1 − arctan|ε|/|ε|)`. Near the sphere both lose all
/// precision to cancellation, so `|ε²| < 0.1` uses the power series
/// `I = Σ_{k≥1} 4 ε^{2k} / ((2k+1)(2k+3))`, whose leading term is `(4/15)ε²`.
pub fn shape_integral(aspect: f64) -> Result<f64> {
    if !(aspect > 0.0 && aspect.is_finite()) {
        return Err(Error::Domain(format!("aspect ratio {aspect} must be positive")));
    }
    let r = aspect.recip();
    let e2 = (1.0 - r) * (1.0 + r);
    if e2.abs() < SERIES_SWITCH {
        return Ok(shape_integral_series(e2));
    }
    if e2 > 0.0 {
        let e = e2.sqrt();
        // artanh(ε) = ln((1 + ε)/r) since 1 − ε² = r²
        let atanh_over_e = ((1.0 + e) / r).ln() / e;
        Ok(2.0 / 3.0 + 2.0 * (r * r / e2) * (1.0 - atanh_over_e))
    } else {
        let y2 = -e2;
        let y = y2.sqrt();
        Ok(2.0 / 3.0 - 2.0 * (y2.recip() + 1.0) * (1.0 - y.atan() / y))
    }
}

fn shape_integral_series(e2: f64) -> f64 {
    let mut sum = 0.0;
    let mut power = 1.0;
    for k in 1..80 {
        power *= e2;
        let kf = k as f64;
        let term = 4.0 * power / ((2.0 * kf + 1.0) * (2.0 * kf + 3.0));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    sum
}

/// `F = π · I(a/b) · P₂(cos α)`.
pub fn form_factor(geom: &CavityGeometry) -> f64 {
    let p2 = legendre_p2(geom.alpha.cos()).expect("cos is bounded");
    PI * shape_integral(geom.aspect()).expect("validated aspect") * p2
}

/// Effective pair coupling `g = γ²ħF/V` in rad/s (perfect gas).
pub fn coupling_g(geom: &CavityGeometry, gas: &GasSpec) -> f64 {
    let volume_cm3 = geom.volume() * NM3_TO_CM3;
    gas.gamma * gas.gamma * HBAR_CGS * form_factor(geom) / volume_cm3
}

/// Pulse observables implied by a coupling: the peak spacing `2π/|g|` and the
/// pulse width `4π/(|g|√N)`.
pub fn forward_observables(g: f64, n_spins: usize) -> (f64, f64) {
    let g = g.abs();
    (2.0 * PI / g, 4.0 * PI / (g * (n_spins as f64).sqrt()))
}

/// Result of inverting pulse observables into cavity parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inversion {
    /// nm³
    pub volume: f64,
    /// `a/b` of the root with `g > 0` when attainable, otherwise of the `g < 0` root.
    pub aspect: f64,
    pub shape_integral: f64,
    /// sign of `g` implied by `aspect`
    pub coupling_sign: f64,
    /// The period only fixes `|g|`; when the opposite sign of `g` is also
    /// attainable its aspect ratio is reported here.
    pub mirror_aspect: Option<f64>,
}

/// Recovers cavity volume and aspect ratio from the pulse period `T` (s),
/// pulse width `ΔT` (s, the `4π/(g√N)` convention), concentration (nm⁻³) and
/// the known tilt `alpha`:
///
/// `V = (4/c)(T/ΔT)²` and `I(a/b)·P₂(cos α) = 8T/(c γ²ħ ΔT²)`.
pub fn invert_measurement(
    period: f64,
    width: f64,
    concentration: f64,
    alpha: f64,
    gamma: f64,
) -> Result<Inversion> {
    if !(period > 0.0) || !(width > 0.0) || !(concentration > 0.0) || !(gamma > 0.0) {
        return Err(Error::Domain("period, width, concentration and gamma must be positive".into()));
    }
    if period / width <= 1.0 {
        return Err(Error::Domain(format!("T/ΔT = {} must exceed 1", period / width)));
    }
    if !(0.0..=PI).contains(&alpha) {
        return Err(Error::Domain(format!("alpha={alpha} outside [0, pi]")));
    }
    let p2 = legendre_p2(alpha.cos())?;
    if p2.abs() < DEGENERATE_P2 {
        return Err(Error::Degenerate(format!(
            "P2(cos alpha) = {p2:e}: the coupling vanishes at the magic angle and the shape is unidentifiable"
        )));
    }
    let ratio = period / width;
    let volume = 4.0 / concentration * ratio * ratio;
    let conc_cm3 = concentration / NM3_TO_CM3;
    let rhs = 8.0 * period / (conc_cm3 * gamma * gamma * HBAR_CGS * width * width);
    let target = rhs / p2;
    match aspect_from_shape_integral(target) {
        Ok(aspect) => Ok(Inversion {
            volume,
            aspect,
            shape_integral: target,
            coupling_sign: 1.0,
            mirror_aspect: aspect_from_shape_integral(-target).ok(),
        }),
        Err(Error::NoSolution(_)) => {
            let aspect = aspect_from_shape_integral(-target)?;
            Ok(Inversion { volume, aspect, shape_integral: -target, coupling_sign: -1.0, mirror_aspect: None })
        }
        Err(e) => Err(e),
    }
}

/// Inverse of [`shape_integral`] by bisection in `ln(a/b)` over `[1e-6, 1e6]`.
pub fn aspect_from_shape_integral(target: f64) -> Result<f64> {
    if target == 0.0 {
        return Ok(1.0);
    }
    let (lo, hi) = ASPECT_BRACKET;
    let i_lo = shape_integral(lo)?;
    let i_hi = shape_integral(hi)?;
    if !(target > i_lo && target < i_hi) {
        return Err(Error::NoSolution(format!(
            "shape integral {target} outside attainable range ({i_lo}, {i_hi})"
        )));
    }
    let f = |ln_aspect: f64| shape_integral(ln_aspect.exp()).expect("positive") - target;
    let root = bisect(f, lo.ln(), hi.ln(), 1e-13)
        .ok_or_else(|| Error::NoSolution(format!("no bracketed root for I = {target}")))?;
    Ok(root.exp())
}
