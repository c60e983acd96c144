//! Binomial coefficients, exact for small arguments and in log space otherwise.
//!
//! The log-space path evaluates the symmetric binomial probability
//! `2^-n C(n, k)` with the saddle-point decomposition (Stirling remainder plus
//! deviance term) instead of differencing three log-factorials, so the result
//! keeps full relative precision even when `n` is in the millions.

use std::f64::consts::{LN_2, PI};

/// Exact `C(n, k)` as `u128`, or `None` on overflow.
pub fn binomial_exact(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// `ln(n!) - ln(sqrt(2 pi n) (n/e)^n)` for integer `n`.
pub fn stirling_remainder(n: u64) -> f64 {
    const TABLE: [f64; 16] = [
        0.0,
        0.081_061_466_795_327_258_22,
        0.041_340_695_955_409_294_09,
        0.027_677_925_684_998_339_15,
        0.020_790_672_103_765_093_11,
        0.016_644_691_189_821_192_16,
        0.013_876_128_823_070_747_99,
        0.011_896_709_945_891_770_10,
        0.010_411_265_261_972_096_50,
        0.009_255_462_182_712_732_918,
        0.008_330_563_433_362_871_256,
        0.007_573_675_487_951_840_795,
        0.006_942_840_107_209_529_866,
        0.006_408_994_188_004_207_068,
        0.005_951_370_112_758_847_736,
        0.005_554_733_551_962_801_371,
    ];
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;

    if n < TABLE.len() as u64 {
        return TABLE[n as usize];
    }
    let x = n as f64;
    let xx = x * x;
    if n > 500 {
        (S0 - S1 / xx) / x
    } else if n > 80 {
        (S0 - (S1 - S2 / xx) / xx) / x
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / xx) / xx) / xx) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x
    }
}

/// Deviance `x ln(x/m) + m - x`.
///
/// Uses the odd series in `v = (x-m)/(x+m)` for `|v| < 1/2`; past that the
/// direct form cancels by at most a factor of about three.
pub fn deviance(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.5 * (x + m) {
        let mut v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let next = s + ej / (2 * j + 1) as f64;
            if next == s {
                return next;
            }
            s = next;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// `ln(2^-n C(n, k))`, the log of the symmetric binomial probability.
pub fn ln_half_binomial_pmf(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return -(n as f64) * LN_2;
    }
    let nf = n as f64;
    let kf = k as f64;
    let half = 0.5 * nf;
    let lc = stirling_remainder(n)
        - stirling_remainder(k)
        - stirling_remainder(n - k)
        - deviance(kf, half)
        - deviance(nf - kf, half);
    let lf = (2.0 * PI).ln() + kf.ln() + (-kf / nf).ln_1p();
    lc - 0.5 * lf
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    ln_half_binomial_pmf(n, k) + n as f64 * LN_2
}

/// `2^-n C(n, k)`; exact rational arithmetic while `C(n, k)` fits in `u128`.
pub fn half_binomial_pmf(n: u64, k: u64) -> f64 {
    if n <= 120 {
        if let Some(c) = binomial_exact(n, k) {
            return c as f64 * (-(n as f64)).exp2();
        }
    }
    ln_half_binomial_pmf(n, k).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_small_values() {
        assert_eq!(binomial_exact(3, 0), Some(1));
        assert_eq!(binomial_exact(10, 5), Some(252));
        assert_eq!(binomial_exact(60, 30), Some(118_264_581_564_861_424));
        assert_eq!(binomial_exact(4, 7), Some(0));
        assert!(binomial_exact(300, 150).is_none());
    }

    #[test]
    fn log_path_matches_exact_path() {
        for n in 1..=120u64 {
            for k in 0..=n {
                let exact = binomial_exact(n, k).unwrap() as f64 * (-(n as f64)).exp2();
                let ln_p = ln_half_binomial_pmf(n, k);
                let logged = ln_p.exp();
                // exp amplifies the absolute rounding of ln p
                let tol = 8.0 * f64::EPSILON * (1.0 + ln_p.abs());
                assert!(
                    (logged / exact - 1.0).abs() < tol,
                    "n={n} k={k}: {logged} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn stirling_remainder_continuity_at_table_edge() {
        // series branch evaluated one below its range should still be close
        let x = 15.0f64;
        let xx = x * x;
        let series = (1.0 / 12.0
            - (1.0 / 360.0 - (1.0 / 1260.0 - (1.0 / 1680.0 - 1.0 / (1188.0 * xx)) / xx) / xx)
                / xx)
            / x;
        assert!((series - stirling_remainder(15)).abs() < 1e-15);
    }

    #[test]
    fn large_n_pmf_sums_to_one() {
        let n = 100_000u64;
        let total: f64 = (0..=n).map(|k| half_binomial_pmf(n, k)).sum();
        assert!((total - 1.0).abs() < 1e-12, "{total}");
    }

    #[test]
    fn central_pmf_asymptote() {
        let n = 1_000_000u64;
        let p = half_binomial_pmf(n, n / 2);
        let nf = n as f64;
        let asym = (2.0 / (PI * nf)).sqrt() * (1.0 - 1.0 / (4.0 * nf));
        assert!((p / asym - 1.0).abs() < 1e-11);
    }
}
