//! Flat key-value configuration files whose keys mirror the long flag
//! names, e.g.
//!
//! ```text
//! # case study
//! rho-xy = -0.11
//! sigma-ratio = 42.94
//! r2x = 0.1 0.5
//! ```

use std::collections::BTreeMap;

use super::CliError;

pub const KEYS: &[&str] = &[
    "rho-xy",
    "sigma-ratio",
    "r2x",
    "r2y",
    "rho-hxhy",
    "exclude",
    "samples",
    "seed",
    "resolution",
    "steps",
    "format",
    "out",
];

#[derive(Debug, Default, Clone, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, Vec<String>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = match line.split_once('=') {
                Some((k, v)) => (k.trim(), v.trim()),
                None => line
                    .split_once(char::is_whitespace)
                    .map(|(k, v)| (k, v.trim()))
                    .unwrap_or((line, "")),
            };
            let key = key.trim_start_matches("--");
            if !KEYS.contains(&key) {
                return Err(CliError::invalid(format!(
                    "config line {}: unknown key '{key}'",
                    i + 1
                )));
            }
            let fields: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
            if fields.is_empty() {
                return Err(CliError::invalid(format!(
                    "config line {}: '{key}' has no value",
                    i + 1
                )));
            }
            values.insert(key.to_string(), fields);
        }
        Ok(Self { values })
    }

    fn fields(&self, key: &str) -> Option<&[String]> {
        self.values.get(key).map(Vec::as_slice)
    }

    pub fn string(&self, key: &str) -> Option<String> {
        self.fields(key).map(|f| f.join(" "))
    }

    pub fn number<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.fields(key) {
            None => Ok(None),
            Some([v]) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::invalid(format!("config '{key}': cannot parse '{v}'"))),
            Some(_) => Err(CliError::invalid(format!(
                "config '{key}': expected one value"
            ))),
        }
    }

    pub fn pair(&self, key: &str) -> Result<Option<(f64, f64)>, CliError> {
        match self.fields(key) {
            None => Ok(None),
            Some([a, b]) => {
                let parse = |s: &String| {
                    s.parse::<f64>().map_err(|_| {
                        CliError::invalid(format!("config '{key}': cannot parse '{s}'"))
                    })
                };
                Ok(Some((parse(a)?, parse(b)?)))
            }
            Some(_) => Err(CliError::invalid(format!(
                "config '{key}': expected two values"
            ))),
        }
    }
}
