//! Grid specs, config-file loading and flag/file merging.

use std::fmt;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{CliError, Common, Format};

/// Upper bound on cells of any map command.
pub const MAX_CELLS: usize = 1_000_000;

/// `start:stop:count`, linear, or `log:start:stop:count`, geometric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log: bool,
}

impl GridSpec {
    pub const fn linear(start: f64, stop: f64, count: usize) -> Self {
        GridSpec {
            start,
            stop,
            count,
            log: false,
        }
    }

    pub const fn geometric(start: f64, stop: f64, count: usize) -> Self {
        GridSpec {
            start,
            stop,
            count,
            log: true,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = self.count - 1;
        (0..self.count)
            .map(|i| {
                let u = i as f64 / last as f64;
                match (i, self.log) {
                    (0, _) => self.start,
                    (i, _) if i == last => self.stop,
                    (_, true) => self.start * (self.stop / self.start).powf(u),
                    (_, false) => self.start + u * (self.stop - self.start),
                }
            })
            .collect()
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (log, body) = match s.strip_prefix("log:") {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let parts: Vec<&str> = body.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err(format!("grid `{s}` must be start:stop:count or log:start:stop:count"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("grid `{s}`: {e}"));
        let (start, stop) = (num(start)?, num(stop)?);
        let count: usize = count.trim().parse().map_err(|e| format!("grid `{s}`: {e}"))?;
        if !(start.is_finite() && stop.is_finite()) {
            return Err(format!("grid `{s}` has non-finite bounds"));
        }
        if count == 0 {
            return Err(format!("grid `{s}` needs at least one point"));
        }
        if count > 1 && stop <= start {
            return Err(format!("grid `{s}` must increase"));
        }
        if log && start <= 0.0 {
            return Err(format!("log grid `{s}` needs positive bounds"));
        }
        Ok(GridSpec {
            start,
            stop,
            count,
            log,
        })
    }
}

impl TryFrom<String> for GridSpec {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<GridSpec> for String {
    fn from(g: GridSpec) -> String {
        g.to_string()
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = if self.log { "log:" } else { "" };
        write!(f, "{prefix}{}:{}:{}", self.start, self.stop, self.count)
    }
}

pub fn check_cells(cells: usize) -> Result<(), CliError> {
    if cells > MAX_CELLS {
        return Err(CliError::Validation(format!(
            "{cells} grid cells exceed the limit of {MAX_CELLS}"
        )));
    }
    Ok(())
}

/// Read a flat TOML file into the command's section type and complete
/// `common` from its `out` and `format` keys. Unknown keys are rejected by
/// the section's `deny_unknown_fields`.
pub fn load<T: DeserializeOwned + Default>(common: &mut Common) -> Result<T, CliError> {
    let Some(path) = common.config.clone() else {
        return Ok(T::default());
    };
    let invalid = |msg: String| CliError::Validation(format!("config {}: {msg}", path.display()));
    let text = std::fs::read_to_string(&path).map_err(|e| invalid(e.to_string()))?;
    let mut table: toml::Table = toml::from_str(&text).map_err(|e| invalid(e.message().to_string()))?;
    if let Some(v) = table.remove("out") {
        let out = v.as_str().ok_or_else(|| invalid("`out` must be a string".into()))?;
        common.out.get_or_insert_with(|| out.into());
    }
    if let Some(v) = table.remove("format") {
        let format: Format = v
            .try_into()
            .map_err(|e: toml::de::Error| invalid(e.message().to_string()))?;
        common.format.get_or_insert(format);
    }
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| invalid(e.message().to_string()))
}

/// Fill every unset field of `$cli` from `$file`, then from `$default`.
macro_rules! resolve {
    ($cli:expr, $file:expr, $default:expr; $($field:ident),+ $(,)?) => {
        $(
            if $cli.$field.is_none() {
                $cli.$field = $file.$field.take().or($default.$field);
            }
        )+
    };
}
pub(crate) use resolve;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grids() {
        let g: GridSpec = "-5:5:201".parse().unwrap();
        let v = g.values();
        assert_eq!(v.len(), 201);
        assert_eq!(v[0], -5.0);
        assert_eq!(v[100], 0.0);
        assert_eq!(v[200], 5.0);
        let l: GridSpec = "log:1e12:1e14:3".parse().unwrap();
        let v = l.values();
        assert!((v[1] - 1e13).abs() < 1e-2);
        assert_eq!((v[0], v[2]), (1e12, 1e14));
        assert_eq!(l.to_string().parse::<GridSpec>().unwrap(), l);
    }

    #[test]
    fn rejects_bad_grids() {
        for s in ["1:2", "2:1:5", "0:1:0", "log:0:1:3", "a:b:c", "1:2:3:4"] {
            assert!(s.parse::<GridSpec>().is_err(), "{s}");
        }
        assert!("3:3:1".parse::<GridSpec>().is_ok());
    }
}
