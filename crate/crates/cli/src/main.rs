mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;
use log::info;
use nalgebra::Vector3;

use qlelab::embedding::{solve_weyl, WeylOptions, WeylSolution};
use qlelab::energy::{BoostVector, EnergyFunctional};
use qlelab::io::{parse_json, MetricFile, SurfaceFile, WeylReport};
use qlelab::optimizer::{
    default_a_samples, large_sphere_sweep, minimize_functional, MinimizerOptions, SweepOptions,
};
use qlelab::spacetime::{InitialData, SurfaceData, SurfacePlacement};
use qlelab::sphere::{make_grid, DEFAULT_BAND_LIMIT};
use qlelab::verify::run_suite;
use qlelab::{Error, Result};

use config::{read_text, Cli, Command, RunConfig};

const OP: &str = "cli::run";
const VERIFY_BAND_LIMIT: usize = 16;

/// Machine output plus a human summary.
struct Outcome {
    body: String,
    summary: String,
    failed: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument { .. } | Error::GridMismatch { .. } => 2,
        Error::NoConvergence { .. } => 4,
        Error::SingularMetric { .. }
        | Error::NotConvex { .. }
        | Error::NotSpacelike { .. }
        | Error::NumericalDomain { .. }
        | Error::SingularPoint { .. } => 3,
    }
}

fn missing(what: &str, command: &str) -> Error {
    Error::InvalidArgument {
        op: OP,
        msg: format!("{command} needs {what}"),
    }
}

fn weyl_options(cfg: &RunConfig) -> WeylOptions {
    let mut w = WeylOptions::default();
    if let Some(t) = cfg.tol {
        w.tol = t;
    }
    w
}

fn initial_data(cfg: &RunConfig, command: &str) -> Result<InitialData> {
    cfg.data.as_ref().ok_or_else(|| missing("--family", command))?.build()
}

/// Surface data from a surface file or a coordinate sphere, and its embedding.
fn surface_setup(cfg: &RunConfig, command: &str) -> Result<(SurfaceData, WeylSolution)> {
    let data = initial_data(cfg, command)?;
    let opts = weyl_options(cfg);
    match (&cfg.surface, cfg.radius) {
        (Some(_), Some(_)) => Err(Error::InvalidArgument {
            op: OP,
            msg: "give either --surface or --radius, not both".into(),
        }),
        (Some(path), None) => {
            let file: SurfaceFile = parse_json(&read_text(path, "surface file")?, "surface file")?;
            if cfg.band_limit.is_some_and(|l| l != file.band_limit) {
                return Err(Error::InvalidArgument {
                    op: OP,
                    msg: "--band-limit disagrees with the surface file".into(),
                });
            }
            let placed = file.build()?;
            let sd = SurfaceData::extract(&data, &SurfacePlacement::from_surface(&placed))?;
            let weyl = solve_weyl(sd.metric(), Some(&placed), &opts)?;
            Ok((sd, weyl))
        }
        (None, Some(r)) => {
            let grid = make_grid(cfg.band_limit.unwrap_or(DEFAULT_BAND_LIMIT))?;
            let placement = SurfacePlacement::coordinate_sphere(grid, r)?;
            let sd = SurfaceData::extract(&data, &placement)?;
            let weyl = solve_weyl(sd.metric(), None, &opts)?;
            Ok((sd, weyl))
        }
        (None, None) => Err(missing("--surface or --radius", command)),
    }
}

fn fmt3(v: [f64; 3]) -> String {
    format!("({:.6e}, {:.6e}, {:.6e})", v[0], v[1], v[2])
}

fn embed(cfg: &RunConfig) -> Result<Outcome> {
    let path = cfg.metric.as_ref().ok_or_else(|| missing("--metric", "embed"))?;
    let file: MetricFile = parse_json(&read_text(path, "metric file")?, "metric file")?;
    let h = file.build()?;
    let sol = solve_weyl(&h, None, &weyl_options(cfg))?;
    let report = WeylReport::from(&sol);
    Ok(Outcome {
        summary: format!(
            "embed: residual {:.3e} after {} iterations, area {:.12}",
            report.residual, report.iterations, report.area
        ),
        body: output::json(&report),
        failed: false,
    })
}

fn energy(cfg: &RunConfig) -> Result<(Outcome, Option<String>)> {
    let (sd, weyl) = surface_setup(cfg, "energy")?;
    let f = EnergyFunctional::new(&weyl.surface, &sd)?;
    let rep = f.report(&BoostVector::new(cfg.a)?)?;
    let summary = format!(
        "energy: E = {:.12}, m_LY = {:.12}, bounds [{:.12}, {:.12}], V = {}",
        rep.energy,
        rep.m_ly,
        rep.lower,
        rep.upper,
        fmt3(rep.v)
    );
    Ok((
        Outcome {
            body: output::json(&rep),
            summary,
            failed: false,
        },
        Some(output::energy_csv(&rep)),
    ))
}

fn infimum(cfg: &RunConfig) -> Result<Outcome> {
    let (sd, weyl) = surface_setup(cfg, "infimum")?;
    let f = EnergyFunctional::new(&weyl.surface, &sd)?;
    let opts = MinimizerOptions {
        seed: cfg.seed,
        ..Default::default()
    };
    let res = minimize_functional(&f, &Vector3::from(cfg.a), &opts)?;
    let closed = res
        .closed_form_value
        .map_or("none".to_string(), |v| format!("{v:.12}"));
    Ok(Outcome {
        summary: format!(
            "infimum: {} value {:.12} (closed form {closed}) at a = {}, {} iterations",
            res.status.as_str(),
            res.value,
            fmt3(res.a_star),
            res.iterations
        ),
        body: output::json(&res),
        failed: false,
    })
}

fn sweep(cfg: &RunConfig) -> Result<Outcome> {
    let data = initial_data(cfg, "sweep")?;
    let radii = cfg.radii.as_ref().ok_or_else(|| missing("--radii", "sweep"))?;
    let grid = make_grid(cfg.band_limit.unwrap_or(DEFAULT_BAND_LIMIT))?;
    let opts = SweepOptions {
        weyl: weyl_options(cfg),
        minimizer: MinimizerOptions {
            seed: cfg.seed,
            ..Default::default()
        },
    };
    let rows = large_sphere_sweep(&data, radii, &grid, &default_a_samples(), &opts);
    let mut summary = String::from("sweep:");
    for row in &rows {
        match &row.error {
            Some(e) => summary.push_str(&format!("\n  r = {:.6e}: failed: {e}", row.r)),
            None => summary.push_str(&format!(
                "\n  r = {:.6e}: m_LY {:.10}, inf {:.10}, eps_max {:.3e}",
                row.r, row.m_ly, row.inf_numeric, row.eps_max
            )),
        }
    }
    Ok(Outcome {
        body: output::sweep_csv(&rows),
        summary,
        failed: false,
    })
}

fn verify(cfg: &RunConfig) -> Result<Outcome> {
    let band_limit = cfg.band_limit.unwrap_or(VERIFY_BAND_LIMIT);
    let checks = run_suite(cfg.seed, band_limit)?;
    let failures = checks.iter().filter(|c| !c.passed).count();
    let mut summary = format!("verify: seed {}, band limit {band_limit}", cfg.seed);
    for c in &checks {
        summary.push_str(&format!(
            "\n  {} {:<32} worst {:.3e} (tol {:.1e})",
            if c.passed { "ok  " } else { "FAIL" },
            c.name,
            c.worst,
            c.tolerance
        ));
    }
    summary.push_str(&format!("\n{} of {} checks passed", checks.len() - failures, checks.len()));
    Ok(Outcome {
        body: output::json(&checks),
        summary,
        failed: failures > 0,
    })
}

fn run(command: &Command) -> Result<bool> {
    let cfg = RunConfig::resolve(command.flags())?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument {
                op: OP,
                msg: format!("thread pool: {e}"),
            })?;
    }
    info!("{} with {:?}", command.name(), cfg);
    let (outcome, csv) = match command {
        Command::Embed(_) => (embed(&cfg)?, None),
        Command::Energy(_) => energy(&cfg)?,
        Command::Infimum(_) => (infimum(&cfg)?, None),
        Command::Sweep(_) => (sweep(&cfg)?, None),
        Command::Verify(_) => (verify(&cfg)?, None),
    };
    if let (Some(path), Some(row)) = (&cfg.csv, &csv) {
        output::write_atomic(path, row)?;
    }
    match &cfg.out {
        Some(path) => {
            output::write_atomic(path, &outcome.body)?;
            println!("{}", outcome.summary);
        }
        None => {
            print!("{}", outcome.body);
            eprintln!("{}", outcome.summary);
        }
    }
    Ok(!outcome.failed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QLELAB_LOG", "warn")).init();
    match run(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qlelab {}: {e}", cli.command.name());
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(exit_code(&Error::InvalidArgument { op: "x", msg: String::new() }), 2);
        assert_eq!(exit_code(&Error::NotSpacelike { op: "x", node: 0, value: -1.0 }), 3);
        assert_eq!(
            exit_code(&Error::NoConvergence {
                op: "x",
                iterations: 1,
                best_residual: 1.0
            }),
            4
        );
    }
}
