//! Scalar numerics shared by the detection code: adaptive quadrature,
//! bracketed minimization, root bracketing and the standard normal CDF.

pub mod quadrature;
pub mod scalar;

use libm::erfc;

/// Standard normal CDF Φ(z).
pub fn std_normal_cdf(z: f64) -> f64 {
    if z == f64::INFINITY {
        return 1.0;
    }
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Upper tail 1 − Φ(z), accurate for large z.
pub fn std_normal_sf(z: f64) -> f64 {
    std_normal_cdf(-z)
}

pub fn std_normal_log_pdf(z: f64) -> f64 {
    const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
    -0.5 * z * z - LN_SQRT_2PI
}

/// ln(eᵃ + eᵇ) without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normal_cdf_table_values() {
        assert_abs_diff_eq!(std_normal_cdf(0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(std_normal_cdf(1.959964), 0.975, epsilon = 1e-7);
        assert_abs_diff_eq!(
            std_normal_cdf(-0.5),
            0.308_537_538_725_986_9,
            epsilon = 1e-14
        );
        // Reference values from 30-digit arithmetic.
        assert_abs_diff_eq!(
            std_normal_cdf(-std::f64::consts::FRAC_1_SQRT_2),
            0.239_750_061_093_476_73,
            epsilon = 1e-16
        );
        assert_abs_diff_eq!(
            std_normal_sf(7.0),
            1.279_812_543_885_835e-12,
            epsilon = 1e-24
        );
        assert_eq!(std_normal_cdf(f64::NEG_INFINITY), 0.0);
        assert!(std_normal_sf(10.0) > 0.0);
    }

    #[test]
    fn log_add_exp_handles_extremes() {
        assert_abs_diff_eq!(log_add_exp(0.0, 0.0), 2f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(
            log_add_exp(-1000.0, -1000.0),
            -1000.0 + 2f64.ln(),
            epsilon = 1e-12
        );
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 3.0), 3.0);
    }
}
