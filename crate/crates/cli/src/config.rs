use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// Relative slack on the stop value of a grid.
const GRID_TOL: f64 = 1e-9;
const MAX_GRID_POINTS: usize = 1_000_000;

/// Parses "start:stop:step" (stop included up to rounding), a comma list, or a single value.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = |why: &str| CliError::Validation(format!("grid '{spec}': {why}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad(&format!("'{t}' is not a number"))).and_then(|x| {
        if x.is_finite() {
            Ok(x)
        } else {
            Err(bad("values must be finite"))
        }
    });
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.len() {
        1 => spec.split(',').map(num).collect::<CliResult<Vec<_>>>()?,
        3 => {
            let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if step <= 0.0 {
                return Err(bad("step must be positive"));
            }
            if stop < start {
                return Err(bad("stop is below start"));
            }
            let span = (stop - start) / step;
            if span > MAX_GRID_POINTS as f64 {
                return Err(bad("too many points"));
            }
            let n = (span * (1.0 + GRID_TOL) + GRID_TOL).floor() as usize + 1;
            (0..n).map(|i| start + i as f64 * step).collect()
        }
        _ => return Err(bad("expected start:stop:step")),
    };
    if grid.is_empty() {
        return Err(bad("grid is empty"));
    }
    Ok(grid)
}

/// A grid of s values for the zeta-family commands; requires s > 1.
pub fn parse_s_grid(spec: &str) -> CliResult<Vec<f64>> {
    let grid = parse_grid(spec)?;
    if let Some(s) = grid.iter().find(|&&s| s <= 1.0) {
        return Err(CliError::Validation(format!("s = {s} is outside Re(s) > 1")));
    }
    Ok(grid)
}

/// A grid of integer m values, each at least 2.
pub fn parse_m_grid(spec: &str) -> CliResult<Vec<u32>> {
    parse_grid(spec)?
        .into_iter()
        .map(|x| {
            let m = x.round();
            if (x - m).abs() > 1e-9 || m < 2.0 || m > u32::MAX as f64 {
                Err(CliError::Validation(format!("m = {x} must be an integer >= 2")))
            } else {
                Ok(m as u32)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Selberg,
    Ruelle,
    Hier(u32),
}

impl Family {
    pub fn column(&self) -> String {
        match self {
            Family::Selberg => "logZ".into(),
            Family::Ruelle => "logR".into(),
            Family::Hier(t) => format!("logz{t}"),
        }
    }
}

/// Parses "selberg,ruelle,hier:3".
pub fn parse_families(spec: &str) -> CliResult<Vec<Family>> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim) {
        let f = match item {
            "selberg" => Family::Selberg,
            "ruelle" => Family::Ruelle,
            _ => match item.strip_prefix("hier:") {
                Some(t) => Family::Hier(
                    t.parse().map_err(|_| CliError::Validation(format!("hierarchy index '{t}' must be a nonnegative integer")))?,
                ),
                None => return Err(CliError::Validation(format!("unknown zeta family '{item}'"))),
            },
        };
        if out.contains(&f) {
            return Err(CliError::Validation(format!("family '{item}' listed twice")));
        }
        out.push(f);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Explicit flag, else the output extension, else CSV.
pub fn resolve_format(flag: Option<Format>, out: Option<&Path>) -> Format {
    flag.unwrap_or_else(|| match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
        _ => Format::Csv,
    })
}

/// The --threads flag beats SELBERG_THREADS; None leaves the rayon default.
pub fn resolve_threads(flag: Option<usize>, env: Option<&str>) -> CliResult<Option<usize>> {
    let n = match (flag, env) {
        (Some(n), _) => n,
        (None, Some(v)) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("SELBERG_THREADS='{v}' is not a positive integer")))?,
        (None, None) => return Ok(None),
    };
    if n == 0 {
        return Err(CliError::Validation("thread count must be positive".into()));
    }
    Ok(Some(n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputTarget {
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("2:10:0.5").unwrap().len(), 17);
        assert_eq!(parse_grid("0.1:0.3:0.1").unwrap().len(), 3);
        assert_eq!(parse_grid("2,3,5").unwrap(), vec![2.0, 3.0, 5.0]);
        assert_eq!(parse_grid("4").unwrap(), vec![4.0]);
        assert!(parse_grid("2:1:0.5").is_err());
        assert!(parse_grid("2:3:0").is_err());
        assert!(parse_grid("2:x:1").is_err());
        assert!(parse_grid("1:2").is_err());
        assert!(parse_s_grid("1:3:1").is_err());
        assert_eq!(parse_m_grid("5:30:1").unwrap().len(), 26);
        assert!(parse_m_grid("1:3:1").is_err());
        assert!(parse_m_grid("2.5").is_err());
    }

    #[test]
    fn families() {
        let f = parse_families("selberg,ruelle,hier:3").unwrap();
        assert_eq!(f, vec![Family::Selberg, Family::Ruelle, Family::Hier(3)]);
        assert_eq!(f[2].column(), "logz3");
        assert!(parse_families("selberg,selberg").is_err());
        assert!(parse_families("hier:x").is_err());
        assert!(parse_families("riemann").is_err());
    }

    #[test]
    fn threads_and_format() {
        assert_eq!(resolve_threads(Some(4), Some("8")).unwrap(), Some(4));
        assert_eq!(resolve_threads(None, Some("8")).unwrap(), Some(8));
        assert_eq!(resolve_threads(None, None).unwrap(), None);
        assert!(resolve_threads(None, Some("many")).is_err());
        assert!(resolve_threads(Some(0), None).is_err());
        assert_eq!(resolve_format(None, Some(Path::new("z.JSON"))), Format::Json);
        assert_eq!(resolve_format(None, Some(Path::new("z.csv"))), Format::Csv);
        assert_eq!(resolve_format(Some(Format::Json), Some(Path::new("z.csv"))), Format::Json);
    }
}
