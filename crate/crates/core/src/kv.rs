//! The flat `key = value` configuration format shared by PUF configs,
//! learner configs and experiment manifests.
//!
//! Blank lines and lines starting with `#` are ignored. Keys may appear once.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct KvMap {
    entries: BTreeMap<String, (usize, String)>,
}

impl KvMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (k, v) = trimmed.split_once('=').ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected `key = value`, got {trimmed:?}"),
            })?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Parse { line, msg: "empty key".into() });
            }
            if entries.insert(k.to_string(), (line, v.trim().to_string())).is_some() {
                return Err(Error::Parse { line, msg: format!("duplicate key {k:?}") });
            }
        }
        Ok(KvMap { entries })
    }

    pub fn insert(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), (0, value.to_string()));
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Copies every entry of `other` over this map.
    pub fn merge(&mut self, other: KvMap) {
        self.entries.extend(other.entries);
    }

    /// Entries in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, (_, v))| (k.as_str(), v.as_str()))
    }

    /// Removes and parses `key`, if present.
    pub fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|e| Error::Parse {
                line,
                msg: format!("bad value for {key:?}: {e}"),
            }),
        }
    }

    pub fn take_or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.take(key)?.unwrap_or(default))
    }

    pub fn take_required<T: FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.take(key)?
            .ok_or_else(|| Error::InvalidConfig(format!("missing required key {key:?}")))
    }

    /// Removes every key starting with `prefix` and returns them with the prefix stripped.
    pub fn take_prefixed(&mut self, prefix: &str) -> KvMap {
        let keys: Vec<String> = self
            .entries
            .keys()
            .filter(|k| k.starts_with(prefix))
            .cloned()
            .collect();
        let mut out = KvMap::default();
        for k in keys {
            let v = self.entries.remove(&k).unwrap();
            out.entries.insert(k[prefix.len()..].to_string(), v);
        }
        out
    }

    /// Fails if any key was not consumed.
    pub fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((k, (line, _))) => Err(Error::Parse { line, msg: format!("unknown key {k:?}") }),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, (_, v)) in &self.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

/// Comma-separated list value, e.g. `256, 128, 64`.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|e: T::Err| Error::InvalidConfig(format!("bad list element {p:?}: {e}"))))
        .collect()
}
