use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Deserialize;

pub const THREADS_ENV: &str = "PSTIRLING_THREADS";
pub const CACHE_ENV: &str = "PSTIRLING_CACHE_DIR";

/// Settings shared by every command. Keys match the long flag names; a flag on the
/// command line wins over the file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub prec: Option<u32>,
    pub cap: Option<u32>,
    pub depth: Option<u32>,
    pub max_log_modulus: Option<u32>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub golden: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if let (Some(cap), Some(prec)) = (self.cap, self.prec) {
            if cap < prec {
                bail!("cap {cap} is below the default precision {prec}");
            }
        }
        if let (Some(cap), Some(depth)) = (self.cap, self.depth) {
            if depth > cap {
                bail!("witness depth {depth} exceeds cap {cap}");
            }
        }
        Ok(())
    }

    /// Thread count from the environment, then the file.
    pub fn threads(&self) -> anyhow::Result<Option<usize>> {
        match std::env::var(THREADS_ENV) {
            Ok(v) => Ok(Some(v.trim().parse().with_context(|| format!("{THREADS_ENV}={v}"))?)),
            Err(_) => Ok(self.threads),
        }
    }

    pub fn cache_dir() -> Option<PathBuf> {
        std::env::var_os(CACHE_ENV).map(PathBuf::from)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_validates() {
        let cfg: RunConfig = toml::from_str("prec = 64\ncap = 512\ndepth = 48\nmax-log-modulus = 10\n").unwrap();
        assert_eq!(cfg.depth, Some(48));
        assert!(cfg.validate().is_ok());
        let bad: RunConfig = toml::from_str("cap = 32\ndepth = 48\n").unwrap();
        assert!(bad.validate().is_err());
        assert!(toml::from_str::<RunConfig>("colour = 1\n").is_err());
    }
}
