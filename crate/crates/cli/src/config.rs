//! Parameter resolution: command-line flags override values from a
//! `key = value` config file, which override environment defaults.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

pub const SEED_ENV: &str = "PERCLAT_SEED";
pub const OUT_DIR_ENV: &str = "PERCLAT_OUT_DIR";

/// Parses a `key = value` document. Blank lines and `#` comments are
/// ignored; keys may use `-` or `_`.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("config line {}: expected key = value", n + 1)))?;
        let key = normalize(k.trim());
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Validation(format!("config line {}: duplicate key {key}", n + 1)));
        }
    }
    Ok(out)
}

fn normalize(key: &str) -> String {
    key.replace('_', "-")
}

pub fn load_config(path: Option<&Path>) -> Result<BTreeMap<String, String>, CliError> {
    match path {
        None => Ok(BTreeMap::new()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Validation(format!("config file {}: {e}", p.display())))?;
            parse_config(&text)
        }
    }
}

/// Comma-separated list value.
#[derive(Clone, Debug, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(|x| x.parse::<T>().map_err(|e| format!("{x:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(List)
    }
}

impl<T: fmt::Display> fmt::Display for List<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Resolves parameters and records the effective value of each one.
pub struct Resolver {
    file: BTreeMap<String, String>,
    used: BTreeSet<String>,
    echo: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Self {
            file,
            used: BTreeSet::new(),
            echo: BTreeMap::new(),
        }
    }

    /// Flag, then file, then `default`; the key must resolve somehow.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: Option<T>) -> Result<T, CliError>
    where
        T: FromStr + fmt::Display,
        T::Err: fmt::Display,
    {
        self.opt(key, flag)?
            .or(default)
            .map(|v| {
                self.echo.insert(key.to_string(), v.to_string());
                v
            })
            .ok_or_else(|| CliError::Validation(format!("missing required parameter {key}")))
    }

    /// Flag, then file; `None` if neither is given.
    pub fn opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + fmt::Display,
        T::Err: fmt::Display,
    {
        self.used.insert(key.to_string());
        let v = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(raw) => Some(
                    raw.parse::<T>()
                        .map_err(|e| CliError::Validation(format!("config key {key} = {raw:?}: {e}")))?,
                ),
                None => None,
            },
        };
        if let Some(v) = &v {
            self.echo.insert(key.to_string(), v.to_string());
        }
        Ok(v)
    }

    /// Flag, then file, then the environment variable, then `default`.
    pub fn with_env<T>(&mut self, key: &str, flag: Option<T>, env: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr + fmt::Display,
        T::Err: fmt::Display,
    {
        let from_env = match std::env::var(env) {
            Ok(raw) if !raw.is_empty() => Some(
                raw.parse::<T>()
                    .map_err(|e| CliError::Validation(format!("environment {env} = {raw:?}: {e}")))?,
            ),
            _ => None,
        };
        let resolved = self.opt(key, flag)?;
        let v = resolved.or(from_env).unwrap_or(default);
        self.echo.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    /// Like [`with_env`](Self::with_env) but kept out of the configuration
    /// echo: run plumbing (worker count, output location) must not change
    /// the bytes of the output.
    pub fn plumbing<T>(&mut self, key: &str, flag: Option<T>, env: Option<&str>) -> Result<Option<T>, CliError>
    where
        T: FromStr + fmt::Display,
        T::Err: fmt::Display,
    {
        let v = self.opt(key, flag)?;
        self.echo.remove(key);
        if v.is_some() {
            return Ok(v);
        }
        match env.map(std::env::var) {
            Some(Ok(raw)) if !raw.is_empty() => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| CliError::Validation(format!("environment {} = {raw:?}: {e}", env.unwrap_or_default()))),
            _ => Ok(None),
        }
    }

    /// Rejects config keys that no parameter consumed.
    pub fn finish(self) -> Result<BTreeMap<String, String>, CliError> {
        if let Some(k) = self.file.keys().find(|k| !self.used.contains(*k)) {
            return Err(CliError::Validation(format!("unknown config key {k}")));
        }
        Ok(self.echo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documents() {
        let c = parse_config("# comment\nseed = 4\ngrid_l = 1, 2 # trailing\n\n").unwrap();
        assert_eq!(c["seed"], "4");
        assert_eq!(c["grid-l"], "1, 2");
        assert!(parse_config("novalue").is_err());
        assert!(parse_config("a = 1\na = 2").is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut r = Resolver::new(parse_config("trials = 10\nhorizon = 5").unwrap());
        assert_eq!(r.get::<u64>("trials", Some(20), None).unwrap(), 20);
        assert_eq!(r.get::<u64>("horizon", None, Some(9)).unwrap(), 5);
        assert_eq!(r.get::<u64>("dstar", None, Some(2)).unwrap(), 2);
        assert!(r.get::<u64>("missing", None, None).is_err());
        let echo = r.finish().unwrap();
        assert_eq!(echo["trials"], "20");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut r = Resolver::new(parse_config("trials = 10\ntypo = 1").unwrap());
        r.get::<u64>("trials", None, None).unwrap();
        assert!(r.finish().is_err());
    }

    #[test]
    fn lists() {
        let l: List<f64> = "0.75, 1,2".parse().unwrap();
        assert_eq!(l.0, vec![0.75, 1.0, 2.0]);
        assert_eq!(l.to_string(), "0.75,1,2");
        assert!("1,x".parse::<List<f64>>().is_err());
    }
}
