//! Kernels of the k-series in q = e^{-x}, evaluated without cancellation.

use num_complex::Complex64;

/// e^z - 1 for complex z, accurate near zero.
pub fn expm1(z: Complex64) -> Complex64 {
    let (a, b) = (z.re, z.im);
    let half = (0.5 * b).sin();
    Complex64::new(a.exp_m1() * b.cos() - 2.0 * half * half, a.exp() * b.sin())
}

/// log(1 + z) for complex z, accurate near zero.
pub fn log1p(z: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * z.re + z.norm_sqr()).ln_1p();
    let im = z.im.atan2(1.0 + z.re);
    Complex64::new(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// log(1 - q)
    K0,
    /// q / (1 - q) = 1 / (e^x - 1)
    K1,
    /// q / (1 - q)^2 = e^x / (e^x - 1)^2
    K2,
    /// q (1 + q) / (1 - q)^3
    K3,
    /// q (1 + 4q + q^2) / (1 - q)^4
    K4,
}

impl Kernel {
    /// Value at x with Re x > 0.
    pub fn eval(self, x: Complex64) -> Complex64 {
        let q = (-x).exp();
        let one_minus_q = -expm1(-x);
        match self {
            Kernel::K0 => {
                if q.norm() < 0.5 {
                    log1p(-q)
                } else {
                    one_minus_q.ln()
                }
            }
            Kernel::K1 => q / one_minus_q,
            Kernel::K2 => q / (one_minus_q * one_minus_q),
            Kernel::K3 => q * (1.0 + q) / one_minus_q.powi(3),
            Kernel::K4 => q * (1.0 + 4.0 * q + q * q) / one_minus_q.powi(4),
        }
    }

    /// Upper bound on |kernel| given |q| < 1.
    pub fn majorant(self, aq: f64) -> f64 {
        let om = 1.0 - aq;
        match self {
            Kernel::K0 | Kernel::K1 => aq / om,
            Kernel::K2 => aq / (om * om),
            Kernel::K3 => aq * (1.0 + aq) / (om * om * om),
            Kernel::K4 => aq * (1.0 + 4.0 * aq + aq * aq) / (om * om * om * om),
        }
    }
}
