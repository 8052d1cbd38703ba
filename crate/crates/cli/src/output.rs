use std::io::Write;
use std::path::Path;

use qlelab::energy::EnergyReport;
use qlelab::optimizer::SweepRow;
use qlelab::{Error, Result};

const OP: &str = "cli::write";

pub const SWEEP_HEADER: &str = "r,m_LY,V1,V2,V3,causal,C_r,inf_numeric,inf_closed,eps_max";
pub const ENERGY_HEADER: &str = "E,E_tilde,boost_term,m_LY,C,lower,upper";

/// 17 significant digits.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "NaN".to_string()
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for row in rows {
        let causal = row.causal.map_or("error", |c| c.as_str());
        let fields = [
            num(row.r),
            num(row.m_ly),
            num(row.v[0]),
            num(row.v[1]),
            num(row.v[2]),
            causal.to_string(),
            num(row.c),
            num(row.inf_numeric),
            num(row.inf_closed.unwrap_or(f64::NAN)),
            num(row.eps_max),
        ];
        s.push_str(&fields.join(","));
        s.push('\n');
    }
    s
}

pub fn energy_csv(rep: &EnergyReport) -> String {
    let fields = [rep.energy, rep.e_tilde, rep.boost_term, rep.m_ly, rep.c, rep.lower, rep.upper].map(num);
    format!("{ENERGY_HEADER}\n{}\n", fields.join(","))
}

pub fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialise");
    s.push('\n');
    s
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::InvalidArgument {
        op: OP,
        msg: format!("{}: {e}", path.display()),
    }
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path.file_name().ok_or_else(|| Error::InvalidArgument {
        op: OP,
        msg: format!("{} is not a file path", path.display()),
    })?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(io_error(path, e));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(1.0), "1.0000000000000000e0");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(num(f64::NAN), "NaN");
        let x = std::f64::consts::PI * 1e-7;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = std::env::temp_dir().join(format!("qlelab-out-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("x.csv");
        write_atomic(&p, "a\n").unwrap();
        write_atomic(&p, "b\n").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "b\n");
        assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 1);
        assert!(write_atomic(&dir.join("missing").join("x"), "c").is_err());
        std::fs::remove_dir_all(dir).unwrap();
    }
}
