//! Parameter resolution: command-line flag, then config file, then default.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context as _, Result};

/// `key = value` lines; `#` starts a comment; `_` and `-` in keys are equivalent.
#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, (String, usize)>,
    used: BTreeSet<String>,
    resolved: Vec<(String, String)>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}

impl Resolver {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut file = BTreeMap::new();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`, got `{raw}`", index + 1))?;
            let key = normalize(key);
            if key.is_empty() {
                bail!("line {}: empty key", index + 1);
            }
            if file.insert(key.clone(), (value.trim().to_string(), index + 1)).is_some() {
                bail!("line {}: duplicate key `{key}`", index + 1);
            }
        }
        Ok(Self { file, ..Self::default() })
    }

    fn file_value<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        let key = normalize(key);
        self.used.insert(key.clone());
        match self.file.get(&key) {
            None => Ok(None),
            Some((text, line)) => text
                .parse()
                .map(Some)
                .map_err(|e| anyhow!("config line {line}: invalid value `{text}` for `{key}`: {e}")),
        }
    }

    fn pick<T: FromStr>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        let file = self.file_value(key)?;
        Ok(flag.or(file))
    }

    fn record(&mut self, key: &str, value: String) {
        self.resolved.push((normalize(key), value));
    }

    pub fn value<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        let v = self.pick(key, flag)?.unwrap_or(default);
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn required<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T::Err: Display,
    {
        let v = self
            .pick(key, flag)?
            .ok_or_else(|| anyhow!("missing parameter `{key}` (pass --{key} or set it in the config file)"))?;
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn optional<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        let v = self.pick(key, flag)?;
        self.record(key, v.as_ref().map_or_else(|| "none".to_string(), T::to_string));
        Ok(v)
    }

    /// A boolean switch: set by the flag, else by the file, else `false`.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool> {
        self.value(key, flag.then_some(true), false)
    }

    /// Resolves without embedding the value in the run record.
    pub fn unrecorded<T: FromStr>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.pick(key, flag)
    }

    /// The resolved parameters in resolution order; fails on unknown file keys.
    pub fn finish(&self) -> Result<Vec<(String, String)>> {
        let unknown: Vec<&str> = self.file.keys().filter(|k| !self.used.contains(*k)).map(String::as_str).collect();
        if !unknown.is_empty() {
            bail!("unknown config keys for this command: {}", unknown.join(", "));
        }
        Ok(self.resolved.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_beats_file_beats_default() {
        let mut r = Resolver::parse("n = 9\ng_mean = 2.5 # comment\n\n# full comment\nseed=4").unwrap();
        assert_eq!(r.value("n", Some(11usize), 2).unwrap(), 11);
        assert_eq!(r.value("g-mean", None, 1.0f64).unwrap(), 2.5);
        assert_eq!(r.value("seed", None, 0u64).unwrap(), 4);
        assert_eq!(r.value("points", None, 100usize).unwrap(), 100);
        let resolved = r.finish().unwrap();
        assert_eq!(resolved[0], ("n".into(), "11".into()));
        assert_eq!(resolved[1], ("g-mean".into(), "2.5".into()));
    }

    #[test]
    fn bad_files_are_rejected() {
        assert!(Resolver::parse("n 9").is_err());
        assert!(Resolver::parse("n = 1\nn = 2").is_err());
        let mut r = Resolver::parse("n = nine").unwrap();
        assert!(r.value("n", None, 1usize).is_err());
        let mut r = Resolver::parse("typo = 1").unwrap();
        r.value("n", None, 1usize).unwrap();
        assert!(r.finish().is_err());
    }

    #[test]
    fn missing_required_names_the_key() {
        let mut r = Resolver::default();
        let err = r.required::<f64>("period", None).unwrap_err();
        assert!(err.to_string().contains("--period"));
    }
}
