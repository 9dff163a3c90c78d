//! Optional TOML defaults and their merge with flags and the environment.
//!
//! Precedence for every setting: command-line flag, then config file, then
//! `KSTAR_THREADS` (threads only), then the built-in default.

use std::path::Path;

use serde::Deserialize;

use crate::CliError;

pub const THREADS_ENV: &str = "KSTAR_THREADS";
pub const EPOCH_TIMESTAMP: &str = "1970-01-01T00:00:00Z";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub metric: Option<String>,
    pub threads: Option<usize>,
    pub bins: Option<usize>,
    pub format: Option<String>,
    pub fixed_timestamp: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Worker count from flag, config, then environment; `None` lets rayon pick.
pub fn resolve_threads(flag: Option<usize>, file: &FileConfig) -> Result<Option<usize>, CliError> {
    let n = match flag.or(file.threads) {
        Some(n) => n,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| {
                CliError::Config(format!(
                    "{THREADS_ENV} must be a non-negative integer, got {v:?}"
                ))
            })?,
            Err(_) => 0,
        },
    };
    Ok((n > 0).then_some(n))
}

pub fn resolve_timestamp(flag: Option<String>, file: &FileConfig) -> String {
    flag.or_else(|| file.fixed_timestamp.clone())
        .unwrap_or_else(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_beats_config() {
        let file = FileConfig {
            threads: Some(3),
            ..Default::default()
        };
        assert_eq!(resolve_threads(Some(5), &file).unwrap(), Some(5));
        assert_eq!(resolve_threads(None, &file).unwrap(), Some(3));
        assert_eq!(resolve_threads(Some(0), &file).unwrap(), None);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(toml::from_str::<FileConfig>("metrc = \"cosine\"").is_err());
        let c: FileConfig = toml::from_str("metric = \"cosine\"\nfixed-timestamp = \"x\"").unwrap();
        assert_eq!(c.metric.as_deref(), Some("cosine"));
        assert_eq!(resolve_timestamp(None, &c), "x");
    }
}
