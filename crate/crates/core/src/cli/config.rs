//! `key = value` run files. Keys use the long flag names, with `-` or `_`.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use super::CliError;

const KNOWN_KEYS: [&str; 13] = [
    "lambda",
    "eps",
    "quad_tol",
    "log_r_min",
    "log_r_max",
    "points",
    "directions",
    "seed",
    "threads",
    "out",
    "format",
    "spec",
    "radii",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "config line {}: expected key = value, got {raw:?}",
                    lineno + 1
                )));
            };
            let key = k.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!(
                    "config line {}: unknown key {key:?}",
                    lineno + 1
                )));
            }
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!(
                    "config line {}: duplicate key {key:?}",
                    lineno + 1
                )));
            }
        }
        Ok(ConfigFile { values })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>().map_err(|_| {
                    CliError::Usage(format!("config value for {key} is invalid: {v:?}"))
                })
            })
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_dashes() {
        let c = ConfigFile::parse("# run\nlambda = 1.5\nquad-tol=1e-7  # tighter\n\n").unwrap();
        assert_eq!(c.get::<f64>("lambda").unwrap(), Some(1.5));
        assert_eq!(c.get::<f64>("quad_tol").unwrap(), Some(1e-7));
        assert_eq!(c.get::<u64>("seed").unwrap(), None);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(ConfigFile::parse("lambda 1.5").is_err());
        assert!(ConfigFile::parse("colour = red").is_err());
        assert!(ConfigFile::parse("seed = 1\nseed = 2").is_err());
        let c = ConfigFile::parse("points = many").unwrap();
        assert!(c.get::<usize>("points").is_err());
    }
}
