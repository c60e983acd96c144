//! Numerical building blocks shared by the physics modules.

pub mod binomial;
pub mod eigen;
pub mod quadrature;
pub mod summation;

pub use binomial::{binomial_exact, half_binomial_pmf, ln_binomial, ln_half_binomial_pmf};
pub use eigen::{DenseMatrix, SymmetricEigen};
pub use quadrature::{integrate, QuadOptions};
pub use summation::{compensated_sum, Compensated};

/// Bisection for a sign change of `f` on `[lo, hi]`; stops when the bracket is
/// narrower than `tol` (absolute) or after 200 halvings.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Some(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
