//! Enumeration budgets.
//!
//! Every exhaustive enumeration in the crate checks its size against one of
//! these limits up front and fails with an explicit error instead of running
//! unbounded or silently truncating.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    /// Suffix pairs enumerated by brute-force partial distances.
    pub suffix_pairs: u64,
    /// Raw (pre-merge) output alphabet of a one-step transform.
    pub alphabet: u64,
    /// Paths of an exhaustive polarization tree.
    pub paths: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            suffix_pairs: 1 << 26,
            alphabet: 1 << 22,
            paths: 1 << 16,
        }
    }
}

impl Budgets {
    /// Parses an override string.
    ///
    /// Accepts either a single integer applied to every budget, or a
    /// comma-separated list of `suffix=<n>`, `alphabet=<n>`, `paths=<n>`.
    /// Unmentioned budgets keep their defaults.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut out = Self::default();
        if let Ok(all) = s.parse::<u64>() {
            if all == 0 {
                return Err(Error::Parse("budget must be positive".into()));
            }
            return Ok(Self {
                suffix_pairs: all,
                alphabet: all,
                paths: all,
            });
        }
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("budget entry `{part}` is not key=value")))?;
            let value: u64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("budget value `{value}` is not an integer")))?;
            if value == 0 {
                return Err(Error::Parse("budget must be positive".into()));
            }
            match key.trim() {
                "suffix" => out.suffix_pairs = value,
                "alphabet" => out.alphabet = value,
                "paths" => out.paths = value,
                other => return Err(Error::Parse(format!("unknown budget `{other}`"))),
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(Budgets::parse("100").unwrap().paths, 100);
        let b = Budgets::parse("paths=7, alphabet=9").unwrap();
        assert_eq!((b.paths, b.alphabet, b.suffix_pairs), (7, 9, 1 << 26));
        assert!(Budgets::parse("bogus=1").is_err());
        assert!(Budgets::parse("0").is_err());
        assert!(Budgets::parse("paths").is_err());
    }
}
