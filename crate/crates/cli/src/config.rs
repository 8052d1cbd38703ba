use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use qlelab::io::{parse_json, DataConfig};
use qlelab::{Error, Result};

const OP: &str = "cli::config";

#[derive(Debug, Parser)]
#[command(name = "qlelab", version, about = "Quasilocal energy of spacelike 2-surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Isometric embedding of a metric file into Euclidean space.
    Embed(Flags),
    /// Energy report at one observer.
    Energy(Flags),
    /// Infimum of the energy over observers.
    Infimum(Flags),
    /// Large-sphere sweep over a list of radii.
    Sweep(Flags),
    /// Randomised invariant suite.
    Verify(Flags),
}

impl Command {
    pub fn flags(&self) -> &Flags {
        match self {
            Command::Embed(f) | Command::Energy(f) | Command::Infimum(f) | Command::Sweep(f) | Command::Verify(f) => f,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Embed(_) => "embed",
            Command::Energy(_) => "energy",
            Command::Infimum(_) => "infimum",
            Command::Sweep(_) => "sweep",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Flat JSON config; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Machine-readable output (JSON, or CSV for sweep).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// flat, schwarzschild or composite.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub mass: Option<f64>,
    /// Comma-separated "px,py,pz".
    #[arg(long, allow_hyphen_values = true)]
    pub momentum: Option<String>,
    /// Coordinate radius of the sphere.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Observer boost "a1,a2,a3".
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// "r1,r2,..." or "start:stop:geometric[:n]" or "start:stop:linear:n".
    #[arg(long)]
    pub radii: Option<String>,
    /// Surface file placing the surface in the data chart.
    #[arg(long)]
    pub surface: Option<PathBuf>,
    /// Metric file for `embed`.
    #[arg(long)]
    pub metric: Option<PathBuf>,
    #[arg(long)]
    pub band_limit: Option<usize>,
    /// Weyl residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// CSV row output for `energy`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Keys accepted in a config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    out: Option<PathBuf>,
    threads: Option<usize>,
    seed: Option<u64>,
    family: Option<String>,
    mass: Option<f64>,
    momentum: Option<[f64; 3]>,
    radius: Option<f64>,
    a: Option<[f64; 3]>,
    radii: Option<Radii>,
    surface: Option<PathBuf>,
    metric: Option<PathBuf>,
    band_limit: Option<usize>,
    tol: Option<f64>,
    csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Radii {
    List(Vec<f64>),
    Range(String),
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: u64,
    pub data: Option<DataConfig>,
    pub radius: Option<f64>,
    pub a: [f64; 3],
    pub radii: Option<Vec<f64>>,
    pub surface: Option<PathBuf>,
    pub metric: Option<PathBuf>,
    pub band_limit: Option<usize>,
    pub tol: Option<f64>,
    pub csv: Option<PathBuf>,
}

pub fn read_text(path: &Path, what: &str) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument { op: OP, msg: format!("cannot read {what} {}: {e}", path.display()) })
}

fn invalid(msg: String) -> Error {
    Error::InvalidArgument { op: OP, msg }
}

pub fn parse_vector(text: &str, what: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(invalid(format!("{what} must have three comma-separated components, got '{text}'")));
    }
    let mut v = [0.0f64; 3];
    for (slot, p) in v.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| invalid(format!("{what}: '{p}' is not a number")))?;
        if !slot.is_finite() {
            return Err(invalid(format!("{what}: component '{p}' is not finite")));
        }
    }
    Ok(v)
}

/// Parses a radius list or range.
pub fn parse_radii(text: &str) -> Result<Vec<f64>> {
    let num = |s: &str| -> Result<f64> {
        let v: f64 = s.trim().parse().map_err(|_| invalid(format!("radii: '{s}' is not a number")))?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(invalid(format!("radii: {v} is not a positive radius")))
        }
    };
    if !text.contains(':') {
        let list = text.split(',').map(num).collect::<Result<Vec<f64>>>()?;
        return Ok(list);
    }
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() < 3 || parts.len() > 4 {
        return Err(invalid(format!("radii range '{text}' must be start:stop:kind[:n]")));
    }
    let (start, stop) = (num(parts[0])?, num(parts[1])?);
    if stop < start {
        return Err(invalid(format!("radii range '{text}' has stop < start")));
    }
    let count = parts
        .get(3)
        .map(|s| s.trim().parse::<usize>().map_err(|_| invalid(format!("radii: '{s}' is not a count"))))
        .transpose()?;
    if count == Some(0) {
        return Err(invalid("radii: count must be positive".into()));
    }
    match (parts[2].trim(), count) {
        ("geometric", None) => {
            let mut out = vec![start];
            let mut r = start;
            while r * 2.0 <= stop * (1.0 + 1e-12) {
                r *= 2.0;
                out.push(r);
            }
            Ok(out)
        }
        ("geometric", Some(n)) => Ok(spaced(n, |t| start * (stop / start).powf(t))),
        ("linear", Some(n)) => Ok(spaced(n, |t| start + (stop - start) * t)),
        ("linear", None) => Err(invalid("radii: a linear range needs a count".into())),
        (kind, _) => Err(invalid(format!("radii: unknown spacing '{kind}' (expected geometric or linear)"))),
    }
}

fn spaced(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    if n == 1 {
        return vec![f(0.0)];
    }
    (0..n).map(|i| f(i as f64 / (n - 1) as f64)).collect()
}

impl RunConfig {
    pub fn resolve(flags: &Flags) -> Result<Self> {
        let file: FileConfig = match &flags.config {
            Some(p) => parse_json(&read_text(p, "config")?, "config")?,
            None => FileConfig::default(),
        };
        let momentum = match &flags.momentum {
            Some(s) => Some(parse_vector(s, "momentum")?),
            None => file.momentum,
        };
        let a = match &flags.a {
            Some(s) => parse_vector(s, "a")?,
            None => file.a.unwrap_or([0.0; 3]),
        };
        let radii = match (&flags.radii, file.radii) {
            (Some(s), _) => Some(parse_radii(s)?),
            (None, Some(Radii::Range(s))) => Some(parse_radii(&s)?),
            (None, Some(Radii::List(v))) => Some(parse_radii(
                &v.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(","),
            )?),
            (None, None) => None,
        };
        let family = flags.family.clone().or(file.family);
        let mass = flags.mass.or(file.mass);
        let data = match family {
            Some(family) => Some(DataConfig { family, mass, momentum }),
            None if mass.is_some() || momentum.is_some() => {
                return Err(invalid("mass or momentum given without a family".into()))
            }
            None => None,
        };
        let cfg = RunConfig {
            out: flags.out.clone().or(file.out),
            threads: flags.threads.or(file.threads),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            data,
            radius: flags.radius.or(file.radius),
            a,
            radii,
            surface: flags.surface.clone().or(file.surface),
            metric: flags.metric.clone().or(file.metric),
            band_limit: flags.band_limit.or(file.band_limit),
            tol: flags.tol.or(file.tol),
            csv: flags.csv.clone().or(file.csv),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.threads == Some(0) {
            return Err(invalid("threads must be at least 1".into()));
        }
        if let Some(r) = self.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(invalid(format!("radius must be positive, got {r}")));
            }
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid(format!("tol must be positive, got {t}")));
            }
        }
        if self.a.iter().any(|c| !c.is_finite()) {
            return Err(invalid("a must be finite".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radii_ranges() {
        assert_eq!(parse_radii("25:200:geometric").unwrap(), vec![25.0, 50.0, 100.0, 200.0]);
        assert_eq!(parse_radii("25, 50").unwrap(), vec![25.0, 50.0]);
        let g = parse_radii("1:100:geometric:3").unwrap();
        assert!((g[1] - 10.0).abs() < 1e-12 && (g[2] - 100.0).abs() < 1e-12);
        assert_eq!(parse_radii("1:3:linear:3").unwrap(), vec![1.0, 2.0, 3.0]);
        for bad in ["", "0,1", "5:1:geometric", "1:2:cubic", "1:2:linear", "a,b", "1:2:geometric:0"] {
            assert!(parse_radii(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn vectors() {
        assert_eq!(parse_vector("0.3,-1,0", "p").unwrap(), [0.3, -1.0, 0.0]);
        assert!(parse_vector("1,2", "p").is_err());
        assert!(parse_vector("1,x,2", "p").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("qlelab-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        std::fs::write(&path, r#"{"family": "composite", "mass": 2, "momentum": [0.1, 0, 0], "radii": [10, 20]}"#).unwrap();
        let flags = Flags {
            config: Some(path.clone()),
            mass: Some(1.0),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&flags).unwrap();
        let d = cfg.data.unwrap();
        assert_eq!((d.mass, d.momentum), (Some(1.0), Some([0.1, 0.0, 0.0])));
        assert_eq!(cfg.radii, Some(vec![10.0, 20.0]));

        std::fs::write(&path, r#"{"family": "flat", "colour": 1}"#).unwrap();
        assert!(RunConfig::resolve(&flags).is_err());
        std::fs::remove_dir_all(dir).unwrap();
    }
}
