use std::fs;
use std::path::Path;

use serde_json::Value;
use sha2::{Digest, Sha256};

use pqsys::json::{MatrixJson, SqsDataJson, SystemJson};
use pqsys::transfer::{circle_grid, disk_grid};
use pqsys::{ComplexMatrix, PartitionedContraction, SqsFunctionData, C64};

/// A failure to read or interpret the command line or an input file.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub type InputResult<T> = std::result::Result<T, InputError>;

/// Raw bytes of every input file, hashed together for the report.
#[derive(Default)]
pub struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> InputResult<String> {
        let text = fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
        self.hasher.update(path.file_name().map(|n| n.as_encoded_bytes()).unwrap_or_default());
        self.hasher.update(text.as_bytes());
        Ok(text)
    }

    pub fn digest(self) -> String {
        hex::encode(self.hasher.finalize())
    }

    pub fn value(&mut self, path: &Path) -> InputResult<Value> {
        let text = self.read(path)?;
        serde_json::from_str(&text).map_err(|e| InputError(format!("{}: malformed JSON: {e}", path.display())))
    }

    pub fn system(&mut self, path: &Path) -> InputResult<PartitionedContraction> {
        let value = self.value(path)?;
        system_from_value(value, path)
    }

    pub fn data(&mut self, path: &Path) -> InputResult<SqsFunctionData> {
        let value = self.value(path)?;
        data_from_value(value, path)
    }

    pub fn matrix(&mut self, path: &Path) -> InputResult<ComplexMatrix> {
        let value = self.value(path)?;
        let j: MatrixJson = serde_json::from_value(value).map_err(|e| describe(path, "matrix", e))?;
        (&j).try_into().map_err(|e: pqsys::Error| InputError(format!("{}: {e}", path.display())))
    }
}

fn describe(path: &Path, what: &str, e: impl std::fmt::Display) -> InputError {
    InputError(format!("{}: not a valid {what} file: {e}", path.display()))
}

pub fn system_from_value(value: Value, path: &Path) -> InputResult<PartitionedContraction> {
    let j: SystemJson = serde_json::from_value(value).map_err(|e| describe(path, "system", e))?;
    (&j).try_into().map_err(|e: pqsys::Error| describe(path, "system", e))
}

pub fn data_from_value(value: Value, path: &Path) -> InputResult<SqsFunctionData> {
    let j: SqsDataJson = serde_json::from_value(value).map_err(|e| describe(path, "measure", e))?;
    (&j).try_into().map_err(|e: pqsys::Error| describe(path, "measure", e))
}

/// `re,im` or just `re`.
pub fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|_| format!("{p:?} is not a number"));
    let z = match parts.as_slice() {
        [re] => C64::new(num(re)?, 0.0),
        [re, im] => C64::new(num(re)?, num(im)?),
        _ => return Err(format!("expected re,im but got {s:?}")),
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

/// `circle:N`, `circle:N:r`, `disk:N` or `disk:N:r`.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Circle(usize, f64),
    Disk(usize, f64),
}

impl Grid {
    pub fn points(&self) -> Vec<C64> {
        match *self {
            Grid::Circle(n, r) => circle_grid(n, r),
            Grid::Disk(n, r) => disk_grid(n, r),
        }
    }
}

pub fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let (kind, n, r) = match parts.as_slice() {
        [kind, n] => (*kind, *n, None),
        [kind, n, r] => (*kind, *n, Some(*r)),
        _ => return Err(format!("expected circle:N or disk:N but got {s:?}")),
    };
    let n: usize = n.parse().map_err(|_| format!("{n:?} is not a point count"))?;
    if n == 0 {
        return Err("the grid needs at least one point".into());
    }
    let r = match r {
        Some(r) => r.parse::<f64>().ok().filter(|r| r.is_finite() && *r > 0.0).ok_or(format!("{r:?} is not a positive radius"))?,
        None if kind == "disk" => 0.9,
        None => 1.0,
    };
    match kind {
        "circle" => Ok(Grid::Circle(n, r)),
        "disk" => Ok(Grid::Disk(n, r)),
        other => Err(format!("unknown grid kind {other:?}")),
    }
}

/// `name=value`.
pub fn parse_tol(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or(format!("expected name=value but got {s:?}"))?;
    let value: f64 = value.trim().parse().map_err(|_| format!("{value:?} is not a number"))?;
    Ok((name.trim().to_string(), value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_values() {
        assert_eq!(parse_complex("0.5,-0.25").unwrap(), C64::new(0.5, -0.25));
        assert_eq!(parse_complex("-1").unwrap(), C64::new(-1.0, 0.0));
        assert!(parse_complex("a,b").is_err());
        assert_eq!(parse_grid("circle:64").unwrap(), Grid::Circle(64, 1.0));
        assert_eq!(parse_grid("disk:9:0.5").unwrap(), Grid::Disk(9, 0.5));
        assert!(parse_grid("ring:4").is_err());
        assert!(parse_grid("circle:0").is_err());
        assert_eq!(parse_tol("eq_tol=1e-8").unwrap(), ("eq_tol".to_string(), 1e-8));
        assert!(parse_tol("eq_tol").is_err());
    }
}
