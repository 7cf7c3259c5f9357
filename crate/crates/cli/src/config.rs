use std::path::Path;

use anyhow::{bail, Context, Result};
use jetx::envelope::default_grid;
use jetx::{GridSpec, Jet, Modulus, ModulusSpec};

pub const MIN_RES: usize = 17;
pub const MAX_RES: usize = 2049;
/// Cap on `n·∏shape`.
pub const MAX_WORK: usize = 20_000_000;

pub fn load_jet(path: &Path) -> Result<Jet> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read jet file {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| {
        let kind = match e.classify() {
            serde_json::error::Category::Data => "schema error",
            _ => "parse error",
        };
        anyhow::anyhow!("{kind} in {}: {e}", path.display())
    })
}

pub fn parse_modulus(text: &str) -> Result<Modulus> {
    let spec: ModulusSpec =
        serde_json::from_str(text).map_err(|e| anyhow::anyhow!("parse error in --modulus: {e}"))?;
    Ok(Modulus::try_from(spec)?)
}

/// `"lo,hi;lo,hi;..."`, one pair per axis.
pub fn parse_box(text: &str) -> Result<Vec<[f64; 2]>> {
    text.split(';')
        .map(|axis| {
            let parts: Vec<&str> = axis.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                bail!("--box axis {axis:?} is not of the form lo,hi");
            }
            let lo: f64 = parts[0]
                .parse()
                .with_context(|| format!("bad number {:?}", parts[0]))?;
            let hi: f64 = parts[1]
                .parse()
                .with_context(|| format!("bad number {:?}", parts[1]))?;
            Ok([lo, hi])
        })
        .collect()
}

/// `"k"` for every axis or `"k,k,..."` per axis.
pub fn parse_res(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|k| {
            k.trim()
                .parse()
                .with_context(|| format!("bad resolution {k:?}"))
        })
        .collect()
}

/// The grid for a run: the given box and resolution, falling back to the
/// defaults for the jet.
pub fn build_grid(jet: &Jet, bx: Option<&str>, res: Option<&str>) -> Result<GridSpec> {
    let n = jet.dim();
    let default = default_grid(jet)?;
    let (lo, hi) = match bx {
        Some(text) => {
            let b = parse_box(text)?;
            if b.len() != n {
                bail!(
                    "schema error: --box has {} axes, the jet has dimension {n}",
                    b.len()
                );
            }
            (
                b.iter().map(|a| a[0]).collect(),
                b.iter().map(|a| a[1]).collect(),
            )
        }
        None => (default.lo.clone(), default.hi.clone()),
    };
    let shape = match res {
        Some(text) => {
            let r = parse_res(text)?;
            match r.len() {
                1 => vec![r[0]; n],
                k if k == n => r,
                k => bail!("schema error: --res has {k} entries, the jet has dimension {n}"),
            }
        }
        None => default.shape.clone(),
    };
    check_shape(&shape)?;
    Ok(GridSpec::new(lo, hi, shape)?)
}

pub fn check_shape(shape: &[usize]) -> Result<()> {
    if let Some(k) = shape.iter().find(|&&k| !(MIN_RES..=MAX_RES).contains(&k)) {
        bail!("resolution {k} is outside [{MIN_RES}, {MAX_RES}]");
    }
    let work = shape
        .iter()
        .try_fold(shape.len(), |acc, &k| acc.checked_mul(k))
        .unwrap_or(usize::MAX);
    if work > MAX_WORK {
        bail!("grid too large: n·nodes = {work} exceeds {MAX_WORK}");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_and_res() {
        assert_eq!(
            parse_box("-1,1; 0,2.5").unwrap(),
            vec![[-1.0, 1.0], [0.0, 2.5]]
        );
        assert!(parse_box("-1;1").is_err());
        assert_eq!(parse_res("33, 65").unwrap(), vec![33, 65]);
        assert!(parse_res("x").is_err());
    }

    #[test]
    fn shape_limits() {
        assert!(check_shape(&[17]).is_ok());
        assert!(check_shape(&[16]).is_err());
        assert!(check_shape(&[2050]).is_err());
        assert!(check_shape(&[2049, 2049]).is_ok());
        assert!(check_shape(&[257, 257, 257]).is_err());
        assert!(check_shape(&[129, 129, 129, 129]).is_err());
    }
}
