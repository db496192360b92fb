use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use selberg_core::curvature::{remainder_decay_fit, ricci_from_variation};
use selberg_core::determinant::{hs_norm_resolvent_sq, log_det_laplacian, BarnesEvalParams};
use selberg_core::moebius::MoebiusElement;
use selberg_core::spectrum::{
    enumerate_spectrum_with, genus2_octagon_generators, load_spectrum, save_spectrum, systoles, EnumerationConfig,
    LengthSpectrum, MultiplicityConvention,
};
use selberg_core::variation::{load_direction, save_direction, second_variation_logz, DirectionData, DirectionEntry};
use selberg_core::zeta::{log_hier_zeta, log_ruelle, log_selberg_zeta, KPolicy, ZetaEvalParams};
use selberg_core::Complex64;

use crate::config::{parse_families, parse_m_grid, parse_s_grid, resolve_format, resolve_threads, Family, Format, OutputTarget};
use crate::error::{CliError, CliResult};
use crate::report::{emit_report, format_float, Schema};
use crate::selftest;

#[derive(Debug, Parser)]
#[command(name = "selberg", version, about = "Selberg zeta functions, determinants and their variations on compact hyperbolic surfaces")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads; overrides SELBERG_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate primitive closed geodesics up to a length cutoff.
    Spectrum(SpectrumArgs),
    /// Tabulate log Z, log R and hierarchy zetas on an s grid.
    Zeta(ZetaArgs),
    /// First and second variations of log Z along a direction.
    Variation(VariationArgs),
    /// log det(Delta + s(s-1)) and the Hilbert-Schmidt resolvent norm.
    Determinant(DeterminantArgs),
    /// Ricci curvature of the Hodge bundles at integer m.
    Curvature(CurvatureArgs),
    /// Run the built-in invariant checks.
    Selftest,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Use the regular-octagon genus 2 surface.
    #[arg(long, conflicts_with = "generators")]
    pub genus2_octagon: bool,
    /// JSON file {"genus": g, "generators": [[a, b, c, d], ...]}.
    #[arg(long)]
    pub generators: Option<PathBuf>,
    #[arg(long)]
    pub cutoff: f64,
    /// Word budget for the enumeration.
    #[arg(long)]
    pub budget: Option<f64>,
    /// Count gamma and gamma^-1 separately.
    #[arg(long)]
    pub oriented: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to the output extension, else csv.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    #[arg(long)]
    pub spectrum: PathBuf,
    /// Fixed number of k terms instead of the adaptive rule.
    #[arg(long)]
    pub k_terms: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DirectionArgs {
    /// Direction JSON file.
    #[arg(long, conflicts_with = "random_direction")]
    pub direction: Option<PathBuf>,
    /// Draw dl, ddl at random for every spectrum entry.
    #[arg(long)]
    pub random_direction: bool,
    /// Seed for --random-direction.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the direction actually used.
    #[arg(long)]
    pub save_direction: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ZetaArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// s grid: start:stop:step, a comma list, or one value.
    #[arg(long)]
    pub s: String,
    #[arg(long, default_value = "selberg")]
    pub family: String,
    #[command(flatten)]
    pub table: TableArgs,
}

#[derive(Debug, Args)]
pub struct VariationArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub direction: DirectionArgs,
    #[arg(long)]
    pub s: String,
    #[command(flatten)]
    pub table: TableArgs,
}

#[derive(Debug, Args)]
pub struct DeterminantArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub s: String,
    /// Terms in the Barnes canonical product.
    #[arg(long)]
    pub product_terms: Option<usize>,
    /// Add the Hilbert-Schmidt norm column (s must avoid the integers).
    #[arg(long)]
    pub hs_norm: bool,
    #[command(flatten)]
    pub table: TableArgs,
}

#[derive(Debug, Args)]
pub struct CurvatureArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub direction: DirectionArgs,
    /// Integer m grid.
    #[arg(long, default_value = "5:30:1")]
    pub m: String,
    /// Also fit the decay rate of the remainder.
    #[arg(long)]
    pub fit: bool,
    #[command(flatten)]
    pub table: TableArgs,
}

/// Runs a parsed command; the caller maps errors to exit codes.
pub fn run(config: RunConfig) -> CliResult<()> {
    let env = std::env::var("SELBERG_THREADS").ok();
    match resolve_threads(config.threads, env.as_deref())? {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Validation(format!("cannot start {n} threads: {e}")))?;
            pool.install(|| execute(config.command))
        }
        None => execute(config.command),
    }
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Spectrum(a) => spectrum(a),
        Command::Zeta(a) => zeta(a),
        Command::Variation(a) => variation(a),
        Command::Determinant(a) => determinant(a),
        Command::Curvature(a) => curvature(a),
        Command::Selftest => {
            let results = selftest::run_all();
            let mut out = io::stdout().lock();
            for r in &results {
                writeln!(out, "{r}")?;
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                return Err(CliError::Computation(selberg_core::Error::Validation(format!(
                    "{failed} of {} self-test checks failed",
                    results.len()
                ))));
            }
            Ok(())
        }
    }
}

#[derive(Deserialize)]
struct GeneratorFile {
    genus: Option<u32>,
    generators: Vec<[f64; 4]>,
}

fn read_generators(path: &Path) -> CliResult<(Vec<MoebiusElement>, Option<u32>)> {
    let text = std::fs::read_to_string(path)?;
    let file: GeneratorFile =
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let gens = file
        .generators
        .iter()
        .map(|&[a, b, c, d]| MoebiusElement::new(a, b, c, d))
        .collect::<selberg_core::Result<Vec<_>>>()
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    if gens.is_empty() {
        return Err(CliError::Validation(format!("{}: no generators", path.display())));
    }
    Ok((gens, file.genus))
}

fn spectrum(a: SpectrumArgs) -> CliResult<()> {
    if !(a.cutoff.is_finite() && a.cutoff > 0.0) {
        return Err(CliError::Validation(format!("cutoff {} must be positive", a.cutoff)));
    }
    let (gens, genus) = match (&a.generators, a.genus2_octagon) {
        (Some(p), false) => read_generators(p)?,
        (None, true) => (genus2_octagon_generators(), Some(2)),
        _ => return Err(CliError::Validation("give either --genus2-octagon or --generators".into())),
    };
    let mut cfg = EnumerationConfig { genus, ..Default::default() };
    if let Some(b) = a.budget {
        if !(b > 0.0) {
            return Err(CliError::Validation(format!("budget {b} must be positive")));
        }
        cfg.budget = b;
    }
    if a.oriented {
        cfg.convention = MultiplicityConvention::Oriented;
    }
    let (sp, stats) = enumerate_spectrum_with(&gens, a.cutoff, &cfg)?;
    save_spectrum(&sp, &a.out)?;
    let mut out = io::stdout().lock();
    writeln!(out, "entries {} classes {} ball_elements {}", sp.len(), sp.class_count(), stats.ball_elements)?;
    if let Ok(sys) = systoles(&sp) {
        writeln!(out, "systole {} multiplicity {}", format_float(sys.l0), sys.count)?;
    }
    Ok(())
}

fn params(s: f64, k_terms: Option<usize>) -> CliResult<ZetaEvalParams> {
    let p = ZetaEvalParams::real(s).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(match k_terms {
        Some(k) => p.with_k_policy(KPolicy::Fixed(k)),
        None => p,
    })
}

fn write_table(rows: &[Vec<f64>], schema: &Schema, table: &TableArgs) -> CliResult<()> {
    let target = OutputTarget { path: table.out.clone(), format: resolve_format(table.format, table.out.as_deref()) };
    match &target.path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?);
            emit_report(rows, schema, target.format, &mut w)?;
            w.flush()?;
        }
        None => emit_report(rows, schema, target.format, io::stdout().lock())?,
    }
    Ok(())
}

/// Summary lines go to stdout when the table goes to a file, else to stderr.
fn summary(table: &TableArgs, line: &str) -> CliResult<()> {
    if table.out.is_some() {
        writeln!(io::stdout().lock(), "{line}")?;
    } else {
        writeln!(io::stderr().lock(), "{line}")?;
    }
    Ok(())
}

fn zeta(a: ZetaArgs) -> CliResult<()> {
    let grid = parse_s_grid(&a.s)?;
    let families = parse_families(&a.family)?;
    let sp = load_spectrum(&a.source.spectrum)?;
    let mut cols = vec!["s".to_string()];
    cols.extend(families.iter().map(Family::column));
    cols.push("k_tail_bound".into());
    let schema = Schema { table: "zeta".into(), columns: cols };
    let mut rows = Vec::with_capacity(grid.len());
    for &s in &grid {
        let p = params(s, a.source.k_terms)?;
        let mut row = vec![s];
        let mut bound = 0.0f64;
        for f in &families {
            let v = match f {
                Family::Selberg => log_selberg_zeta(&sp, &p)?,
                Family::Ruelle => log_ruelle(&sp, Complex64::new(s, 0.0))?,
                Family::Hier(t) => log_hier_zeta(&sp, *t, &p)?,
            };
            row.push(v.value.re);
            bound = bound.max(v.k_tail_bound);
        }
        row.push(bound);
        rows.push(row);
    }
    write_table(&rows, &schema, &a.table)
}

fn random_direction(sp: &LengthSpectrum, seed: u64) -> CliResult<DirectionData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..sp.len())
        .map(|index| DirectionEntry {
            index,
            dl: Complex64::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1)),
            ddl: rng.gen_range(0.01..0.1),
        })
        .collect();
    Ok(DirectionData::new(entries, 1.0, None)?)
}

fn direction(d: &DirectionArgs, sp: &LengthSpectrum) -> CliResult<DirectionData> {
    let dir = match (&d.direction, d.random_direction) {
        (Some(p), false) => load_direction(p)?,
        (None, true) => random_direction(sp, d.seed)?,
        _ => return Err(CliError::Validation("give either --direction or --random-direction".into())),
    };
    dir.resolve(sp)?;
    if let Some(p) = &d.save_direction {
        save_direction(&dir, p)?;
    }
    Ok(dir)
}

fn variation(a: VariationArgs) -> CliResult<()> {
    let grid = parse_s_grid(&a.s)?;
    let sp = load_spectrum(&a.source.spectrum)?;
    let dir = direction(&a.direction, &sp)?;
    let schema = Schema::new(
        "variation",
        &["s", "first_re", "first_im", "second", "dominant", "remainder_estimate", "k_tail_bound"],
    );
    let mut rows = Vec::with_capacity(grid.len());
    for &s in &grid {
        let v = second_variation_logz(&sp, &dir, &params(s, a.source.k_terms)?)?;
        let dominant = v.dominant_term.map_or(f64::NAN, |d| d.value);
        rows.push(vec![s, v.first.re, v.first.im, v.second.re, dominant, v.remainder_estimate, v.k_tail_bound]);
    }
    write_table(&rows, &schema, &a.table)
}

fn determinant(a: DeterminantArgs) -> CliResult<()> {
    let grid = parse_s_grid(&a.s)?;
    let sp = load_spectrum(&a.source.spectrum)?;
    let barnes = match a.product_terms {
        Some(n) if n < 10 => return Err(CliError::Validation(format!("product_terms {n} must be at least 10"))),
        Some(n) => BarnesEvalParams::with_product_terms(n),
        None => BarnesEvalParams::default(),
    };
    let mut cols = vec!["s", "log_det", "log_z", "prefactor"];
    if a.hs_norm {
        cols.push("hs_norm");
    }
    cols.extend(["barnes_tail", "k_tail_bound"]);
    let schema = Schema::new("determinant", &cols);
    let mut rows = Vec::with_capacity(grid.len());
    for &s in &grid {
        let p = params(s, a.source.k_terms)?;
        let d = log_det_laplacian(&sp, &p, &barnes)?;
        let mut row = vec![s, d.value.re, d.log_z.value.re, d.prefactor.re];
        let mut bound = d.log_z.k_tail_bound;
        if a.hs_norm {
            let h = hs_norm_resolvent_sq(&sp, &p)?;
            row.push(h.value);
            bound = bound.max(h.k_tail_bound);
        }
        row.extend([d.barnes_tail, bound]);
        rows.push(row);
    }
    write_table(&rows, &schema, &a.table)
}

fn curvature(a: CurvatureArgs) -> CliResult<()> {
    let ms = parse_m_grid(&a.m)?;
    if a.source.k_terms.is_some() {
        return Err(CliError::Validation("--k-terms is not supported by curvature".into()));
    }
    let sp = load_spectrum(&a.source.spectrum)?;
    let dir = direction(&a.direction, &sp)?;
    let schema = Schema::new("curvature", &["m", "ricci", "leading", "remainder", "k_tail_bound"]);
    let mut rows = Vec::with_capacity(ms.len());
    for &m in &ms {
        let r = ricci_from_variation(&sp, &dir, m)?;
        let bound = second_variation_logz(&sp, &dir, &params(m as f64, None)?)?.k_tail_bound;
        rows.push(vec![m as f64, r.ricci, r.leading, r.remainder, bound]);
    }
    write_table(&rows, &schema, &a.table)?;
    if a.fit {
        let f = remainder_decay_fit(&sp, &dir, &ms)?;
        summary(
            &a.table,
            &format!(
                "fit slope {} intercept {} r_squared {} power {}",
                format_float(f.slope),
                format_float(f.intercept),
                format_float(f.r_squared),
                f.power
            ),
        )?;
    }
    Ok(())
}
