//! Provenance stamped into every written artifact.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunMeta {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

impl RunMeta {
    pub fn new(config_hash: impl Into<String>, seed: u64) -> Self {
        Self {
            config_hash: config_hash.into(),
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    /// Hash of the canonical JSON serialization of `config`.
    pub fn for_config<T: Serialize>(config: &T, seed: u64) -> Result<Self> {
        Ok(Self::new(hash_json(config)?, seed))
    }

    /// First line of CSV outputs; readers skip it as a comment.
    pub fn csv_comment(&self) -> String {
        format!(
            "# config_hash={} seed={} version={}",
            self.config_hash, self.seed, self.version
        )
    }

    /// Parse a line written by [`RunMeta::csv_comment`].
    pub fn from_csv_comment(line: &str) -> Result<Self> {
        let body = line
            .strip_prefix("# ")
            .ok_or_else(|| Error::Schema { context: "csv metadata".into(), message: "missing '# ' prefix".into() })?;
        let mut hash = None;
        let mut seed = None;
        let mut version = None;
        for part in body.split_whitespace() {
            match part.split_once('=') {
                Some(("config_hash", v)) => hash = Some(v.to_string()),
                Some(("seed", v)) => seed = v.parse().ok(),
                Some(("version", v)) => version = Some(v.to_string()),
                _ => {}
            }
        }
        match (hash, seed, version) {
            (Some(config_hash), Some(seed), Some(version)) => Ok(Self { config_hash, seed, version }),
            _ => Err(Error::Schema {
                context: "csv metadata".into(),
                message: format!("incomplete metadata line '{line}'"),
            }),
        }
    }
}

pub fn hash_json<T: Serialize>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comment_round_trip() {
        let m = RunMeta::new("abc123", 7);
        assert_eq!(RunMeta::from_csv_comment(&m.csv_comment()).unwrap(), m);
        assert!(RunMeta::from_csv_comment("config_hash=1").is_err());
    }

    #[test]
    fn hash_is_stable() {
        let a = hash_json(&serde_json::json!({"x": 1})).unwrap();
        assert_eq!(a.len(), 64);
        assert_eq!(a, hash_json(&serde_json::json!({"x": 1})).unwrap());
        assert_ne!(a, hash_json(&serde_json::json!({"x": 2})).unwrap());
    }
}
