//! Run configuration: defaults, then the config file, then `ILAB_THREADS` /
//! `ILAB_SEED`, then command-line flags.
//!
//! The config file is plain `key = value` lines; `#` starts a comment.
//! Keys: `threads`, `seed`, `block_size`, `output`, `format`.

use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub threads: usize,
    pub seed: u64,
    pub block_size: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            threads: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            seed: ilab_core::selftest::DEFAULT_SEED,
            block_size: ilab_core::expsum::DEFAULT_BLOCK,
            output: None,
            format: Format::Json,
        }
    }
}

fn parse_u64(key: &str, v: &str) -> Result<u64, String> {
    v.trim().parse().map_err(|_| format!("{key}: not a non-negative integer: {v:?}"))
}

impl RunConfig {
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "threads" => self.threads = parse_u64(key, value)? as usize,
            "seed" => self.seed = parse_u64(key, value)?,
            "block_size" => self.block_size = parse_u64(key, value)?,
            "output" => self.output = Some(PathBuf::from(value.trim())),
            "format" => {
                self.format = match value.trim() {
                    "json" => Format::Json,
                    "csv" => Format::Csv,
                    v => return Err(format!("format: expected json or csv, got {v:?}")),
                }
            }
            _ => return Err(format!("unknown config key {key:?}")),
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("{}:{}: expected key = value", path.display(), i + 1))?;
            self.apply(k.trim(), v).map_err(|e| format!("{}:{}: {e}", path.display(), i + 1))?;
        }
        Ok(())
    }

    pub fn apply_env(&mut self) -> Result<(), String> {
        for (var, key) in [("ILAB_THREADS", "threads"), ("ILAB_SEED", "seed")] {
            if let Ok(v) = std::env::var(var) {
                self.apply(key, &v).map_err(|e| format!("{var}: {e}"))?;
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.threads == 0 {
            return Err("threads must be positive".into());
        }
        if !self.block_size.is_power_of_two() {
            return Err(format!("block_size must be a power of two, got {}", self.block_size));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ilab.conf");
        std::fs::write(&p, "# run\nthreads = 3\nseed=42 # inline\nblock_size = 1024\nformat = csv\n").unwrap();
        let mut c = RunConfig::default();
        c.apply_file(&p).unwrap();
        assert_eq!((c.threads, c.seed, c.block_size, c.format), (3, 42, 1024, Format::Csv));
        c.validate().unwrap();
        c.block_size = 1000;
        assert!(c.validate().is_err());
        std::fs::write(&p, "colour = blue\n").unwrap();
        assert!(RunConfig::default().apply_file(&p).is_err());
    }
}
