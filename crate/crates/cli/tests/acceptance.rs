//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use selberg_core::curvature::remainder_decay_fit;
use selberg_core::determinant::{ln_gamma, log_barnes_g, tanh_integral_identity, BarnesEvalParams, GLAISHER_LOG};
use selberg_core::spectrum::{enumerate_spectrum, enumerate_spectrum_with, genus2_octagon_generators, EnumerationConfig, LengthSpectrum};
use selberg_core::variation::fd::{holomorphic_derivative, mixed_derivative};
use selberg_core::variation::{
    first_variation_logz, hessian_report, second_variation_logz, DirectionData, DirectionEntry, FamilyMember,
    SyntheticFamily,
};
use selberg_core::zeta::{
    a_gamma, b_gamma, dlog_ds_local, log_hier_zeta, log_ruelle, log_selberg_zeta, KPolicy, LocalWeight, ZetaEvalParams,
};
use selberg_core::Complex64;

type Outcome = Result<String, String>;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit: f64, detail: String) -> Outcome {
    let t = elapsed.as_secs_f64();
    ensure(t < limit, format!("{detail}; {t:.3} s (limit {limit} s)"))
}

fn entry(index: usize, dl: f64, ddl: f64) -> DirectionEntry {
    DirectionEntry { index, dl: c(dl), ddl }
}

fn bolza(cutoff: f64) -> LengthSpectrum {
    enumerate_spectrum(&genus2_octagon_generators(), cutoff).expect("octagon enumeration")
}

fn hierarchy_collapse(sp: &mut Option<LengthSpectrum>) -> Outcome {
    let t = Instant::now();
    let sp = &*sp.insert(bolza(4.5));
    let enumeration = t.elapsed().as_secs_f64();
    let mut worst = 0.0f64;
    for s in [2.0, 3.0, 5.0] {
        let p = ZetaEvalParams::real(s).unwrap();
        let z = log_selberg_zeta(sp, &p).unwrap().value;
        let r = log_ruelle(sp, c(s)).unwrap().value;
        worst = worst.max(rel(log_hier_zeta(sp, 1, &p).unwrap().value, z));
        worst = worst.max(rel(log_hier_zeta(sp, 0, &p).unwrap().value, r));
    }
    let el = t.elapsed();
    ensure(worst < 1e-12, format!("max rel {worst:.2e}; enumeration {enumeration:.3} s")).and_then(|d| within(el, 1.0, d))
}

fn pascal(sp: &LengthSpectrum) -> Outcome {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for s in [2.0, 3.5] {
        let p = ZetaEvalParams::real(s).unwrap();
        let p1 = ZetaEvalParams::real(s + 1.0).unwrap();
        for k in 1..=4 {
            let d = log_hier_zeta(sp, k + 1, &p).unwrap().value
                - log_hier_zeta(sp, k, &p).unwrap().value
                - log_hier_zeta(sp, k + 1, &p1).unwrap().value;
            worst = worst.max(d.norm());
        }
    }
    let el = t.elapsed();
    ensure(worst < 1e-11, format!("max residual {worst:.2e}")).and_then(|d| within(el, 1.0, d))
}

/// g(x) = log(1 - e^{-x}); g(x + d) - g(x) written without cancellation.
fn log_step(x: f64, d: f64) -> f64 {
    let q = (-x).exp() / -(-x).exp_m1();
    (q * -(-d).exp_m1()).ln_1p()
}

/// Central differences in s of sum_k w(k) log(1 - e^{-l(s+k)}), with every
/// increment of the log-series formed termwise by `log_step`.
fn series_differences(l: f64, s: f64, h: f64, w: impl Fn(f64) -> f64) -> (f64, f64) {
    let d = l * h;
    let (mut first, mut second) = (0.0, 0.0);
    for k in (0..=400).rev() {
        let x = l * (s + k as f64);
        let wk = w(k as f64);
        // f(s+h) - f(s-h) and f(s+h) - 2 f(s) + f(s-h)
        first += wk * log_step(x - d, 2.0 * d);
        second += wk * (log_step(x, d) - log_step(x - d, d));
    }
    (first / (2.0 * h), second / (h * h))
}

fn derivative_series() -> Outcome {
    let weights: [(LocalWeight, fn(f64) -> f64); 3] =
        [(LocalWeight::One, |_| 1.0), (LocalWeight::K, |k| k), (LocalWeight::K2, |k| k * k)];
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for l in [0.5, 1.0, 3.0] {
        for s in [1.5, 2.0, 10.0] {
            for (w, wf) in weights {
                let (f1, f2) = series_differences(l, s, 1e-5, wf);
                let a1 = dlog_ds_local(l, c(s), 1, w, KPolicy::default()).unwrap().value.re;
                let a2 = dlog_ds_local(l, c(s), 2, w, KPolicy::default()).unwrap().value.re;
                e1 = e1.max(((a1 - f1) / a1).abs());
                e2 = e2.max(((a2 - f2) / a2).abs());
            }
        }
    }
    ensure(e1 < 1e-8 && e2 < 1e-6, format!("order 1 max rel {e1:.2e} (tol 1e-8), order 2 max rel {e2:.2e} (tol 1e-6)"))
}

fn variation_stencils() -> Outcome {
    let fam = SyntheticFamily::new(
        vec![
            FamilyMember::new(1.0, Complex64::new(0.05, 0.02), 0.3),
            FamilyMember::new(1.6, Complex64::new(-0.03, 0.04), 0.2),
            FamilyMember::new(2.3, Complex64::new(0.01, -0.06), 0.5),
        ],
        2,
    )
    .unwrap();
    let base = fam.base_spectrum().unwrap();
    let dir = fam.direction(1.0).unwrap();
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for s in [2.0, 5.0] {
        let p = ZetaEvalParams::real(s).unwrap();
        let f = |e: Complex64| Ok(log_selberg_zeta(&fam.spectrum_at(e)?, &p)?.value);
        e1 = e1.max(rel(first_variation_logz(&base, &dir, &p).unwrap(), holomorphic_derivative(f, 1e-4).unwrap()));
        e2 = e2.max(rel(second_variation_logz(&base, &dir, &p).unwrap().second, mixed_derivative(f, 1e-3).unwrap()));
    }
    ensure(e1 < 1e-6 && e2 < 1e-5, format!("first max rel {e1:.2e} (tol 1e-6), second max rel {e2:.2e} (tol 1e-5)"))
}

fn asymptotics() -> Outcome {
    let l = 1.0f64;
    let (mut last_a, mut last_b) = (f64::INFINITY, f64::INFINITY);
    let mut lines = Vec::new();
    let mut ok = true;
    for s in [25.0, 50.0, 100.0, 200.0] {
        let damp = (s * l).exp() * (1.0 - (-l).exp());
        let ra = a_gamma(l, c(s), KPolicy::default()).unwrap().value.re * damp / (s * l);
        let rb = -b_gamma(l, c(s), KPolicy::default()).unwrap().value.re * damp / (l * l * s * s);
        let (da, db) = ((ra - 1.0).abs(), (rb - 1.0).abs());
        ok &= da < 3.0 / s && db < 5.0 / s && da < last_a && db < last_b;
        lines.push(format!("s={s}: |A-1|={da:.3e} |B-1|={db:.3e}"));
        last_a = da;
        last_b = db;
    }
    ensure(ok, lines.join(", "))
}

fn sign_dichotomy() -> Outcome {
    let sp = LengthSpectrum::from_lengths(2, 3.0, &[(1.0, 1), (1.6, 2), (2.5, 1)]).unwrap();
    let moving = DirectionData::new(vec![entry(0, 0.1, 0.05), entry(1, 0.2, 0.3), entry(2, -0.1, 0.2)], 1.0, None).unwrap();
    let fixed = DirectionData::new(vec![entry(0, 0.0, 0.2), entry(1, 0.3, 0.0), entry(2, 0.1, 0.1)], 1.0, None).unwrap();
    let mut ok = true;
    let mut worst = (f64::NEG_INFINITY, f64::INFINITY);
    for s in [30.0, 40.0, 60.0, 100.0, 150.0, 200.0] {
        let p = ZetaEvalParams::real(s).unwrap();
        let a = second_variation_logz(&sp, &moving, &p).unwrap().second.re;
        let b = second_variation_logz(&sp, &fixed, &p).unwrap().second.re;
        ok &= a < 0.0 && b > 0.0;
        worst = (worst.0.max(a), worst.1.min(b));
    }
    ensure(ok, format!("systole moving: max {:.3e} < 0; systole fixed: min {:.3e} > 0", worst.0, worst.1))
}

fn signature() -> Outcome {
    let sp = LengthSpectrum::from_lengths(2, 2.0, &[(1.0, 1), (1.4, 1)]).unwrap();
    let dirs = [
        DirectionData::new(vec![entry(0, 0.1, 0.0)], 1.0, None).unwrap(),
        DirectionData::new(vec![entry(0, 0.0, 0.1)], 1.0, None).unwrap(),
    ];
    let gram = DMatrix::<Complex64>::identity(2, 2);
    let r = hessian_report(&sp, &dirs, &gram, &ZetaEvalParams::real(200.0).unwrap()).unwrap();
    let sig = r.signature;
    let mags: Vec<f64> = r.eigenvalues.iter().map(|x| x.abs()).collect();
    let sep = mags.iter().cloned().fold(0.0, f64::max) / mags.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(
        (sig.neg, sig.pos, sig.zero) == (1, 1, 0) && sep > 10.0,
        format!("signature ({} neg, {} pos, {} zero), eigenvalues {:?}, separation {sep:.2}", sig.neg, sig.pos, sig.zero, r.eigenvalues),
    )
}

fn residue_identity() -> Outcome {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for alpha in [0.3, 0.7, 1.3, 2.2, 3.6] {
        let r = tanh_integral_identity(alpha).unwrap();
        worst = worst.max((r.lhs - r.rhs).abs());
    }
    let el = t.elapsed();
    ensure(worst < 1e-8, format!("max abs {worst:.2e}")).and_then(|d| within(el, 5.0, d))
}

fn barnes() -> Outcome {
    let p = BarnesEvalParams::default();
    let g = |z: f64| log_barnes_g(c(z), &p).unwrap().value;
    let ints =
        [(1.0, 1.0), (2.0, 1.0), (3.0, 1.0), (4.0, 2.0)].iter().map(|&(z, v)| (g(z).exp() - v).norm()).fold(0.0, f64::max);
    let fe = [0.5, 1.5, 2.5, 3.5]
        .iter()
        .map(|&z| ((g(z + 1.0) - g(z) - ln_gamma(c(z)).unwrap()).exp() - 1.0).norm())
        .fold(0.0, f64::max);
    let closed = (2f64.ln() / 24.0 + 0.125 - 0.25 * std::f64::consts::PI.ln() - 1.5 * GLAISHER_LOG).exp();
    let half = (g(0.5).exp() - closed).norm();
    ensure(
        ints < 1e-10 && fe < 1e-9 && half < 1e-9,
        format!("integers {ints:.2e}, functional equation {fe:.2e}, G(1/2) {half:.2e}"),
    )
}

fn decay() -> Outcome {
    let t = Instant::now();
    let ms: Vec<u32> = (5..=30).collect();
    let mut parts = Vec::new();
    let mut ok = true;
    for (l0, lo, hi) in [(1.0, -1.05, -0.95), (0.7, -0.735, -0.665)] {
        let sp = LengthSpectrum::from_lengths(2, 2.0, &[(l0, 1)]).unwrap();
        let dir = DirectionData::new(vec![entry(0, 0.1, 0.0)], 1.0, None).unwrap();
        let f = remainder_decay_fit(&sp, &dir, &ms).unwrap();
        ok &= f.slope >= lo && f.slope <= hi && f.r_squared > 0.999;
        parts.push(format!("l0={l0}: slope {:.5} r2 {:.7}", f.slope, f.r_squared));
    }
    let el = t.elapsed();
    ensure(ok, parts.join(", ")).and_then(|d| within(el, 2.0, d))
}

fn completeness() -> Outcome {
    let gens = genus2_octagon_generators();
    let lo = enumerate_spectrum(&gens, 3.5).unwrap();
    let hi = enumerate_spectrum(&gens, 4.5).unwrap();
    let shared: Vec<_> = hi.entries().iter().filter(|e| e.length <= 3.5).cloned().collect();
    let agree = lo.entries() == &shared[..];
    let l0 = 2.0 * (1.0 + 2f64.sqrt()).acosh();
    let sys = lo.systoles().unwrap();
    let cfg = EnumerationConfig { budget: 4.0 * EnumerationConfig::default().budget, ..Default::default() };
    let (big, _) = enumerate_spectrum_with(&gens, 4.5, &cfg).unwrap();
    let stable = big.entries().iter().map(|e| e.multiplicity).eq(hi.entries().iter().map(|e| e.multiplicity));
    ensure(
        agree && (sys.l0 - l0).abs() < 1e-9 && stable,
        format!(
            "entries <= 3.5 agree: {agree}; systole error {:.2e}, multiplicity {}; stable under 4x budget: {stable}",
            (sys.l0 - l0).abs(),
            sys.count
        ),
    )
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_selberg");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = dir.path().join("bolza.json");
    let status = Command::new(bin)
        .args(["spectrum", "--genus2-octagon", "--cutoff", "4.5", "--out"])
        .arg(&spec)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!("spectrum command failed: {}", String::from_utf8_lossy(&status.stderr)));
    }
    let mut outputs = Vec::new();
    for threads in ["1", "4", "8"] {
        let out = dir.path().join(format!("z{threads}.csv"));
        let r = Command::new(bin)
            .args(["zeta", "--s", "1.5:10:0.25", "--family", "selberg,ruelle,hier:3", "--threads", threads, "--spectrum"])
            .arg(&spec)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        if !r.status.success() {
            return Err(format!("zeta --threads {threads} failed: {}", String::from_utf8_lossy(&r.stderr)));
        }
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    ensure(same && !outputs[0].is_empty(), format!("{} bytes, identical across 1/4/8 threads: {same}", outputs[0].len()))
}

fn main() -> ExitCode {
    let mut sp = None;
    let first = hierarchy_collapse(&mut sp);
    let sp = sp.unwrap_or_else(|| bolza(4.5));
    let first = std::cell::Cell::new(Some(first));
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("hierarchy collapse", Box::new(|| first.take().expect("run once"))),
        ("pascal recurrence", Box::new(|| pascal(&sp))),
        ("analytic vs finite-difference s-derivatives", Box::new(derivative_series)),
        ("second variation vs stencil", Box::new(variation_stencils)),
        ("large-s asymptotics of A and B", Box::new(asymptotics)),
        ("sign dichotomy", Box::new(sign_dichotomy)),
        ("hessian signature", Box::new(signature)),
        ("residue identity", Box::new(residue_identity)),
        ("barnes G", Box::new(barnes)),
        ("remainder decay", Box::new(decay)),
        ("spectrum completeness", Box::new(completeness)),
        ("thread-count determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {:>2} {name}: {detail}", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
