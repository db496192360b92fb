use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 40;

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Adaptive Gauss-Kronrod (7, 15) on [a, b] to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    let mut stack = vec![(a, b, 0u32)];
    let mut value = NeumaierSum::new();
    let mut error = 0.0;
    let mut intervals = 0;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, e) = gk15(&f, lo, hi);
        let budget = tol * (hi - lo) / (b - a);
        if e <= budget || depth >= MAX_DEPTH {
            if e > budget {
                return Err(Error::QuadratureFailure { estimate: e });
            }
            value.add(v);
            error += e;
            intervals += 1;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    let value = value.value();
    if !value.is_finite() {
        return Err(Error::QuadratureFailure { estimate: f64::INFINITY });
    }
    Ok(Quadrature { value, error, intervals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_smooth() {
        let q = integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0, 1e-13).unwrap();
        assert!((q.value - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
        let q = integrate(|x| (-x * x).exp(), -10.0, 10.0, 1e-13).unwrap();
        assert!((q.value - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }
}
