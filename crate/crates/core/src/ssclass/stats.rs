//! Small numerical helpers for the mixture models.

use std::f64::consts::PI;

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// e^{-x} I0(x) for x ≥ 0 (polynomial fits, relative error below 2e-7).
pub(crate) fn bessel_i0e(x: f64) -> f64 {
    let x = x.abs();
    if x <= 3.75 {
        let t = (x / 3.75).powi(2);
        let i0 = 1.0
            + t * (3.5156229 + t * (3.0899424 + t * (1.2067492 + t * (0.2659732 + t * (0.0360768 + t * 0.0045813)))));
        i0 * (-x).exp()
    } else {
        let t = 3.75 / x;
        let p = 0.39894228
            + t * (0.01328592
                + t * (0.00225319
                    + t * (-0.00157565
                        + t * (0.00916281 + t * (-0.02057706 + t * (0.02635537 + t * (-0.01647633 + t * 0.00392377)))))));
        p / x.sqrt()
    }
}

/// e^{-x} I1(x) for x ≥ 0.
pub(crate) fn bessel_i1e(x: f64) -> f64 {
    let x = x.abs();
    if x <= 3.75 {
        let t = (x / 3.75).powi(2);
        let i1 = x
            * (0.5
                + t * (0.87890594 + t * (0.51498869 + t * (0.15084934 + t * (0.02658733 + t * (0.00301532 + t * 0.00032411))))));
        i1 * (-x).exp()
    } else {
        let t = 3.75 / x;
        let p = 0.39894228
            + t * (-0.03988024
                + t * (-0.00362018
                    + t * (0.00163801
                        + t * (-0.01031555 + t * (0.02282967 + t * (-0.02895312 + t * (0.01787654 - t * 0.00420059)))))));
        p / x.sqrt()
    }
}

/// Mean resultant length of a von Mises distribution, I1(κ)/I0(κ).
pub(crate) fn mean_resultant(kappa: f64) -> f64 {
    if kappa <= 0.0 {
        return 0.0;
    }
    bessel_i1e(kappa) / bessel_i0e(kappa)
}

/// Solves A(κ) = r: a closed-form start followed by Newton steps.
pub(crate) fn inverse_mean_resultant(r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    if r >= 1.0 {
        return f64::INFINITY;
    }
    let mut k = if r < 0.53 {
        2.0 * r + r.powi(3) + 5.0 * r.powi(5) / 6.0
    } else if r < 0.85 {
        -0.4 + 1.39 * r + 0.43 / (1.0 - r)
    } else {
        1.0 / (r.powi(3) - 4.0 * r * r + 3.0 * r)
    };
    for _ in 0..20 {
        let a = mean_resultant(k);
        let da = 1.0 - a * a - a / k;
        if da <= 0.0 {
            break;
        }
        let next = (k - (a - r) / da).max(k / 2.0);
        if (next - k).abs() <= 1e-12 * k {
            k = next;
            break;
        }
        k = next;
    }
    k
}

pub(crate) fn gaussian_log_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * PI).ln()
}

/// Log density per radian; `x` and `mu` in degrees.
pub(crate) fn von_mises_log_pdf(x: f64, mu: f64, kappa: f64) -> f64 {
    let d = (x - mu).to_radians();
    kappa * (d.cos() - 1.0) - (2.0 * PI).ln() - bessel_i0e(kappa).ln()
}
