//! Resolved experiment configuration: a `key=value` file overlaid with
//! command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Keys understood in config files. Flags use the same names with `-`
/// in place of `_`.
pub const KEYS: &[&str] = &[
    "rays",
    "mu",
    "alpha",
    "gamma",
    "t",
    "t_grid",
    "s",
    "steps",
    "n_paths",
    "seed",
    "suite",
    "scale",
    "x0",
    "start_ray",
    "name",
    "beta",
    "x",
    "k",
    "l",
    "functional",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    /// Parses `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::invalid("config", format!("{origin}:{}: expected key=value", i + 1))
            })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(CliError::invalid(
                    "config",
                    format!("{origin}:{}: unknown key `{key}`", i + 1),
                ));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::invalid("config", format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    /// Fills `key` unless already present.
    pub fn or_default(&mut self, key: &str, value: impl Display) {
        self.values
            .entry(key.to_string())
            .or_insert_with(|| value.to_string());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &'static str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| CliError::invalid(key, format!("cannot parse `{v}`: {e}")))
            })
            .transpose()
    }

    pub fn require<T: FromStr>(&self, key: &'static str) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        self.get(key)?
            .ok_or_else(|| CliError::invalid(key, "is required"))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &'static str) -> Result<Option<Vec<T>>, CliError>
    where
        T::Err: Display,
    {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        let item = item.trim();
                        item.parse().map_err(|e| {
                            CliError::invalid(key, format!("cannot parse `{item}`: {e}"))
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn require_list<T: FromStr>(&self, key: &'static str) -> Result<Vec<T>, CliError>
    where
        T::Err: Display,
    {
        self.list(key)?
            .ok_or_else(|| CliError::invalid(key, "is required"))
    }

    /// Canonical `key=value` lines, hashed into CSV headers.
    pub fn canonical(&self) -> String {
        self.values
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_lists() {
        let c = Config::parse("# run\nmu = 0.3, 0.7\ngamma=-1 # tail\n\n", "f").unwrap();
        assert_eq!(c.require_list::<f64>("mu").unwrap(), vec![0.3, 0.7]);
        assert_eq!(c.require::<f64>("gamma").unwrap(), -1.0);
        assert_eq!(c.get::<f64>("t").unwrap(), None);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(Config::parse("colour=blue", "f").is_err());
        assert!(Config::parse("mu 0.5", "f").is_err());
        let c = Config::parse("steps=ten", "f").unwrap();
        let err = c.require::<usize>("steps").unwrap_err();
        assert!(err.to_string().contains("steps"));
    }

    #[test]
    fn canonical_form_is_order_independent() {
        let a = Config::parse("mu=1\ngamma=0", "a").unwrap();
        let b = Config::parse("gamma=0\nmu=1", "b").unwrap();
        assert_eq!(a.canonical(), b.canonical());
    }
}
