//! Flat `section.key = value` configuration files, one pair per line, with
//! `#` comments. Lookups are tracked so unknown keys can be reported.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: BTreeMap<String, (String, usize)>,
    used: RefCell<BTreeSet<String>>,
}

fn valid_key(k: &str) -> bool {
    !k.is_empty()
        && k.split('.').all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| Error::Parse { line, msg: format!("expected key = value, got {l:?}") })?;
            let (k, v) = (k.trim(), v.trim());
            if !valid_key(k) {
                return Err(Error::Parse { line, msg: format!("invalid key {k:?}") });
            }
            if v.is_empty() {
                return Err(Error::Parse { line, msg: format!("missing value for {k}") });
            }
            if entries.insert(k.to_string(), (v.to_string(), line)).is_some() {
                return Err(Error::Parse { line, msg: format!("duplicate key {k}") });
            }
        }
        Ok(Config { entries, used: RefCell::default() })
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), (value.to_string(), 0));
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.used.borrow_mut().insert(key.to_string());
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.str(key).ok_or_else(|| Error::Parse { line: 0, msg: format!("missing required key {key}") })
    }

    /// Typed lookup; `None` when absent.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        let Some(v) = self.str(key) else { return Ok(None) };
        let line = self.entries[key].1;
        v.parse::<T>()
            .map(Some)
            .map_err(|_| Error::Parse { line, msg: format!("{key}: cannot parse {v:?} as {}", short_type::<T>()) })
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn get_req<T: FromStr>(&self, key: &str) -> Result<T> {
        self.require(key)?;
        Ok(self.get(key)?.unwrap())
    }

    /// Comma-separated list of numbers.
    pub fn list_f64(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.str(key) else { return Ok(None) };
        let line = self.entries[key].1;
        v.split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse { line, msg: format!("{key}: cannot parse {t:?} as a number") })
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    /// Error on the first key never looked up.
    pub fn check_unused(&self) -> Result<()> {
        let used = self.used.borrow();
        match self.entries.iter().find(|(k, _)| !used.contains(*k)) {
            Some((k, (_, line))) => Err(Error::Parse { line: *line, msg: format!("unknown key {k}") }),
            None => Ok(()),
        }
    }

    /// Canonical text: sorted keys, one pair per line.
    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(k, (v, _))| format!("{k} = {v}\n")).collect()
    }
}

fn short_type<T>() -> &'static str {
    let n = std::any::type_name::<T>();
    n.rsplit("::").next().unwrap_or(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_lookup() {
        let c = Config::parse("# demo\nsolver.max_iters = 500\nkernel=auto # trailing\n\nsolver.tol = 1e-9\n").unwrap();
        assert_eq!(c.get::<usize>("solver.max_iters").unwrap(), Some(500));
        assert_eq!(c.str("kernel"), Some("auto"));
        assert!(c.check_unused().is_err());
        assert_eq!(c.get_or("solver.tol", 0.0).unwrap(), 1e-9);
        c.check_unused().unwrap();
        assert_eq!(c.get_or("missing", 3usize).unwrap(), 3);
    }

    #[test]
    fn errors_carry_lines() {
        assert!(matches!(Config::parse("a = 1\nbroken\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Config::parse("a = 1\na = 2\n"), Err(Error::Parse { line: 2, .. })));
        assert!(Config::parse("bad key = 1\n").is_err());
        assert!(Config::parse("a.=1\n").is_err());
        assert!(Config::parse("a =\n").is_err());
        let c = Config::parse("\n\nn = x\n").unwrap();
        assert!(matches!(c.get::<usize>("n"), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn round_trip() {
        let c = Config::parse("b = 2\na.x = hello world\n").unwrap();
        let d = Config::parse(&c.to_text()).unwrap();
        assert_eq!(c.to_text(), d.to_text());
        assert_eq!(c.to_text(), "a.x = hello world\nb = 2\n");
        assert_eq!(d.list_f64("b").unwrap(), Some(vec![2.0]));
    }
}
