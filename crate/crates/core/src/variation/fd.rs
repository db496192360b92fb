//! Finite-difference stencils in a complex parameter.

use num_complex::Complex64;

use crate::error::Result;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// d/d eps = (d/dx - i d/dy) / 2 by central differences:
/// (F(h) - F(-h) - i (F(ih) - F(-ih))) / (4h).
pub fn holomorphic_derivative<F>(f: F, h: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let i = Complex64::new(0.0, 1.0);
    let (xp, xm) = (f(re(h))?, f(re(-h))?);
    let (yp, ym) = (f(i * h)?, f(-i * h)?);
    Ok((xp - xm - i * (yp - ym)) / (4.0 * h))
}

/// Mixed derivative (d_xx + d_yy) / 4 by the 5-point stencil.
pub fn mixed_derivative<F>(f: F, h: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let i = Complex64::new(0.0, 1.0);
    let c = f(re(0.0))?;
    let sum = f(re(h))? + f(re(-h))? + f(i * h)? + f(-i * h)?;
    Ok((sum - c * 4.0) / (4.0 * h * h))
}

/// Central first derivative of a real function.
pub fn central_first<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central second derivative of a real function.
pub fn central_second<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// Fourth-order central first derivative.
pub fn central_first_o4<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Fourth-order central second derivative.
pub fn central_second_o4<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h)
}
