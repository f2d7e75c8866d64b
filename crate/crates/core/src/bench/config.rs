use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Flat `key = value` settings. Blank lines and lines starting with `#`
/// are ignored; keys use the long flag names without dashes
/// (`data-dir`, `seeds`, ...). `_` and `-` are interchangeable in keys.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvConfig {
    entries: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('_', "-").to_ascii_lowercase()
}

impl KvConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(origin, i + 1, "expected `key = value`"))?;
            let key = normalize(key);
            if key.is_empty() {
                return Err(Error::parse(origin, i + 1, "empty key"));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::parse(origin, i + 1, format!("key {key:?} given twice")));
            }
        }
        Ok(KvConfig { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text, path)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(&normalize(key)).map(String::as_str)
    }

    /// Parsed value of `key`, if present.
    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|e: T::Err| Error::Config(format!("config key {key}: cannot parse {v:?}: {e}")))
            })
            .transpose()
    }

    /// Keys not in `known`, for reporting typos.
    pub fn unknown_keys<'a>(&'a self, known: &[&str]) -> Vec<&'a str> {
        self.entries
            .keys()
            .filter(|k| !known.contains(&k.as_str()))
            .map(String::as_str)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_normalizes() {
        let cfg = KvConfig::parse("# run\ndataset = texas\ndata_dir=/d\n\nseeds = 3\n", Path::new("c")).unwrap();
        assert_eq!(cfg.get("dataset"), Some("texas"));
        assert_eq!(cfg.get("data-dir"), Some("/d"));
        assert_eq!(cfg.parsed::<usize>("seeds").unwrap(), Some(3));
        assert_eq!(cfg.parsed::<usize>("k").unwrap(), None);
        assert!(cfg.parsed::<u8>("dataset").is_err());
        assert_eq!(cfg.unknown_keys(&["dataset", "seeds"]), vec!["data-dir"]);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(KvConfig::parse("dataset texas\n", Path::new("c")).is_err());
        assert!(KvConfig::parse("k=1\nk=2\n", Path::new("c")).is_err());
    }
}
