//! Quick invariant checks run by `selberg selftest`.

use std::fmt;

use nalgebra::DMatrix;

use selberg_core::curvature::remainder_decay_fit;
use selberg_core::determinant::{
    hs_norm_resolvent_sq, ln_gamma, log_barnes_g, tanh_integral_identity, BarnesEvalParams,
};
use selberg_core::spectrum::{bolza_systole, enumerate_spectrum, genus2_octagon_generators, LengthSpectrum};
use selberg_core::variation::fd::{holomorphic_derivative, mixed_derivative};
use selberg_core::variation::{
    first_variation_logz, hessian_report, second_variation_logz, DirectionData, DirectionEntry, FamilyMember,
    SyntheticFamily,
};
use selberg_core::zeta::{a_gamma, b_gamma, log_hier_zeta, log_ruelle, log_selberg_zeta, KPolicy, ZetaEvalParams};
use selberg_core::{Complex64, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Runs `f`, which returns the worst observed error, against `tol`.
fn check(name: &'static str, tol: f64, f: impl FnOnce() -> Result<f64>) -> CheckResult {
    match f() {
        Ok(err) => CheckResult { name, passed: err <= tol, detail: format!("max error {err:.3e} (tol {tol:.0e})") },
        Err(e) => CheckResult { name, passed: false, detail: e.to_string() },
    }
}

fn bolza() -> Result<LengthSpectrum> {
    enumerate_spectrum(&genus2_octagon_generators(), 4.5)
}

pub fn run_all() -> Vec<CheckResult> {
    vec![
        check("bolza systole", 1e-9, || {
            let sp = bolza()?;
            let sys = sp.systoles()?;
            Ok((sys.l0 - bolza_systole()).abs())
        }),
        check("hierarchy collapse", 1e-12, || {
            let sp = bolza()?;
            let mut worst = 0.0f64;
            for s in [2.0, 3.0, 5.0] {
                let p = ZetaEvalParams::real(s)?;
                worst = worst.max(rel(log_hier_zeta(&sp, 1, &p)?.value, log_selberg_zeta(&sp, &p)?.value));
                worst = worst.max(rel(log_hier_zeta(&sp, 0, &p)?.value, log_ruelle(&sp, c(s))?.value));
            }
            Ok(worst)
        }),
        check("pascal recurrence", 1e-11, || {
            let sp = bolza()?;
            let mut worst = 0.0f64;
            for s in [2.0, 3.5] {
                let (p, p1) = (ZetaEvalParams::real(s)?, ZetaEvalParams::real(s + 1.0)?);
                for t in 1..=4 {
                    let d = log_hier_zeta(&sp, t + 1, &p)?.value
                        - log_hier_zeta(&sp, t, &p)?.value
                        - log_hier_zeta(&sp, t + 1, &p1)?.value;
                    worst = worst.max(d.norm());
                }
            }
            Ok(worst)
        }),
        check("barnes functional equation", 1e-9, || {
            let b = BarnesEvalParams::default();
            let mut worst = 0.0f64;
            for z in [0.5, 1.5, 2.5, 3.5] {
                let d = log_barnes_g(c(z + 1.0), &b)?.value - log_barnes_g(c(z), &b)?.value - ln_gamma(c(z))?;
                worst = worst.max((d.exp() - 1.0).norm());
            }
            worst = worst.max((log_barnes_g(c(4.0), &b)?.value.exp() - 2.0).norm());
            Ok(worst)
        }),
        check("residue identity", 1e-8, || {
            let mut worst = 0.0f64;
            for alpha in [0.7, 1.3] {
                let r = tanh_integral_identity(alpha)?;
                worst = worst.max((r.lhs - r.rhs).abs());
            }
            Ok(worst)
        }),
        check("second variation vs stencil", 1e-5, || {
            let fam = SyntheticFamily::new(
                vec![
                    FamilyMember::new(1.0, Complex64::new(0.05, 0.02), 0.3),
                    FamilyMember::new(1.6, Complex64::new(-0.03, 0.04), 0.2),
                ],
                2,
            )?;
            let base = fam.base_spectrum()?;
            let dir = fam.direction(1.0)?;
            let p = ZetaEvalParams::real(2.0)?;
            let f = |e: Complex64| Ok(log_selberg_zeta(&fam.spectrum_at(e)?, &p)?.value);
            let e1 = rel(first_variation_logz(&base, &dir, &p)?, holomorphic_derivative(f, 1e-4)?);
            let e2 = rel(second_variation_logz(&base, &dir, &p)?.second, mixed_derivative(f, 1e-3)?);
            Ok(e1.max(e2))
        }),
        check("large-s asymptotics", 0.06, || {
            let s = 50.0f64;
            let damp = s.exp() * (1.0 - (-1.0f64).exp());
            let ra = a_gamma(1.0, c(s), KPolicy::default())?.value.re * damp / s;
            let rb = -b_gamma(1.0, c(s), KPolicy::default())?.value.re * damp / (s * s);
            Ok((ra - 1.0).abs().max((rb - 1.0).abs()))
        }),
        check("hessian signature", 0.0, || {
            let sp = LengthSpectrum::from_lengths(2, 2.0, &[(1.0, 1), (1.4, 1)])?;
            let e = |index, dl: f64, ddl| DirectionEntry { index, dl: c(dl), ddl };
            let dirs = [
                DirectionData::new(vec![e(0, 0.1, 0.0)], 1.0, None)?,
                DirectionData::new(vec![e(0, 0.0, 0.1)], 1.0, None)?,
            ];
            let gram = DMatrix::<Complex64>::identity(2, 2);
            let r = hessian_report(&sp, &dirs, &gram, &ZetaEvalParams::real(200.0)?)?;
            let sig = r.signature;
            Ok(if (sig.neg, sig.pos, sig.zero) == (1, 1, 0) { 0.0 } else { 1.0 })
        }),
        check("remainder decay", 0.05, || {
            let sp = LengthSpectrum::from_lengths(2, 2.0, &[(1.0, 1)])?;
            let dir = DirectionData::new(vec![DirectionEntry { index: 0, dl: c(0.1), ddl: 0.0 }], 1.0, None)?;
            let ms: Vec<u32> = (5..=30).collect();
            Ok((remainder_decay_fit(&sp, &dir, &ms)?.slope + 1.0).abs())
        }),
        check("resolvent norm positive", 0.0, || {
            let sp = bolza()?;
            let mut bad = 0.0;
            for s in [1.3, 2.2, 3.7] {
                if !(hs_norm_resolvent_sq(&sp, &ZetaEvalParams::real(s)?)?.value > 0.0) {
                    bad += 1.0;
                }
            }
            Ok(bad)
        }),
    ]
}
