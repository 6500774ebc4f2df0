//! Settings read from a TOML file.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

use tracegen_core::pipeline::PipelineOptions;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub generation: GenerationSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub path: Option<PathBuf>,
    pub timeout_ms: Option<u64>,
    pub seed: Option<u64>,
    pub memory_mb: Option<u64>,
    /// Set to false for solvers without string/integer conversions.
    pub numeric_to_string: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationSection {
    pub max_rejections: Option<usize>,
    pub max_steps: Option<u64>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn apply(&self, mut opts: PipelineOptions) -> PipelineOptions {
        let s = &self.solver;
        if let Some(p) = &s.path {
            opts.solver.path = p.clone();
        }
        if let Some(t) = s.timeout_ms {
            opts.solver.timeout_ms = t;
        }
        if let Some(seed) = s.seed {
            opts.solver.seed = seed;
        }
        if s.memory_mb.is_some() {
            opts.solver.memory_mb = s.memory_mb;
        }
        if let Some(b) = s.numeric_to_string {
            opts.solver.capabilities.numeric_to_string = b;
        }
        if let Some(m) = self.generation.max_rejections {
            opts.max_rejections = m;
        }
        if let Some(m) = self.generation.max_steps {
            opts.interp.max_steps = m;
        }
        opts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_keys_override_defaults() {
        let c: Config = toml::from_str("[solver]\npath = \"/opt/z3\"\ntimeout_ms = 500\nseed = 9\n").unwrap();
        let o = c.apply(PipelineOptions::default());
        assert_eq!(o.solver.path, PathBuf::from("/opt/z3"));
        assert_eq!(o.solver.timeout_ms, 500);
        assert_eq!(o.solver.seed, 9);
        assert_eq!(o.max_rejections, PipelineOptions::default().max_rejections);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Config>("[solver]\ntimeout = 5\n").is_err());
    }
}
