use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::environment::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::policy::PolicyClass;
use crate::scheduler::{compute_schedule_params, ScheduleParams, Variant};

/// Where the policy class comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicySource {
    /// JSON file as written by [`PolicyClass::to_json`].
    Path(PathBuf),
    Random { count: usize, seed: u64 },
    /// Every deterministic table over the environment's contexts.
    AllTables,
}

fn default_delta() -> f64 {
    0.05
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: PathBuf,
    pub policies: PolicySource,
    /// Single algorithm; merged with `algorithms`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<String>,
    #[serde(default)]
    pub algorithms: Vec<String>,
    /// Optional; must equal the environment's horizon when given.
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_scale")]
    pub constant_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op_constant_scale: Option<f64>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub workers: Option<usize>,
    pub constant_scale: Option<f64>,
    pub seed_offset: Option<u64>,
}

impl ExperimentConfig {
    /// Reads a config file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.env = base.join(&cfg.env);
        cfg.output_dir = base.join(&cfg.output_dir);
        if let PolicySource::Path(p) = &mut cfg.policies {
            *p = base.join(&*p);
        }
        cfg.check().map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(w) = o.workers {
            self.workers = Some(w);
        }
        if let Some(s) = o.constant_scale {
            self.constant_scale = s;
        }
        if let Some(k) = o.seed_offset {
            for s in &mut self.seeds {
                *s = s.wrapping_add(k);
            }
        }
    }

    pub fn variants(&self) -> Result<Vec<Variant>> {
        let mut out = Vec::new();
        for name in self.algorithm.iter().chain(&self.algorithms) {
            let v = Variant::from_name(name)?;
            if !out.contains(&v) {
                out.push(v);
            }
        }
        if out.is_empty() {
            return Err(Error::input("no algorithm given"));
        }
        Ok(out)
    }

    pub fn check(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::input("seeds must be non-empty"));
        }
        self.variants()?;
        if !(self.constant_scale > 0.0 && self.constant_scale <= 1.0) {
            return Err(Error::input(format!(
                "constant_scale={} must lie in (0, 1]",
                self.constant_scale
            )));
        }
        if let Some(s) = self.op_constant_scale {
            if !(s > 0.0 && s <= 1.0) {
                return Err(Error::input(format!("op_constant_scale={s} must lie in (0, 1]")));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::input("workers must be at least 1"));
        }
        Ok(())
    }
}

/// A config with its environment and policy class loaded.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub env: EnvironmentSpec,
    pub class: PolicyClass,
    pub params: ScheduleParams,
    pub variants: Vec<Variant>,
}

impl Experiment {
    pub fn new(config: ExperimentConfig, env: EnvironmentSpec, class: PolicyClass) -> Result<Self> {
        config.check()?;
        if let Some(t) = config.horizon {
            if t != env.horizon {
                return Err(Error::input(format!(
                    "config T={t} but the environment has T={}",
                    env.horizon
                )));
            }
        }
        if class.k() != env.k || class.num_contexts() != env.contexts {
            return Err(Error::input(format!(
                "policy class (K={}, {} contexts) does not fit the environment (K={}, {} contexts)",
                class.k(),
                class.num_contexts(),
                env.k,
                env.contexts
            )));
        }
        let params = compute_schedule_params(env.horizon, env.k, class.len(), config.delta)?
            .with_constant_scale(config.constant_scale)?
            .with_op_constant_scale(config.op_constant_scale)?;
        let variants = config.variants()?;
        Ok(Self {
            config,
            env,
            class,
            params,
            variants,
        })
    }

    pub fn load(config: ExperimentConfig) -> Result<Self> {
        let env = EnvironmentSpec::load(&config.env)?;
        let class = match &config.policies {
            PolicySource::Path(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                PolicyClass::from_json(&text)?
            }
            PolicySource::Random { count, seed } => PolicyClass::random(*count, env.k, env.contexts, *seed)?,
            PolicySource::AllTables => PolicyClass::all_tables(env.k, env.contexts)?,
        };
        Self::new(config, env, class)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_resolves_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.json");
        std::fs::write(
            &path,
            r#"{"env": "env.json", "policies": {"random": {"count": 5, "seed": 1}},
                "algorithm": "ada_replay", "algorithms": ["uniform_random", "ada_replay"],
                "seeds": [1, 2], "output_dir": "out", "constant_scale": 1e-4}"#,
        )
        .unwrap();
        let cfg = ExperimentConfig::load(&path).unwrap();
        assert_eq!(cfg.env, dir.path().join("env.json"));
        assert_eq!(cfg.output_dir, dir.path().join("out"));
        assert_eq!(cfg.variants().unwrap(), vec![Variant::AdaReplay, Variant::UniformRandom]);
        assert_eq!(cfg.delta, 0.05);
        let mut c2 = cfg.clone();
        c2.apply(Overrides {
            workers: Some(3),
            constant_scale: Some(0.5),
            seed_offset: Some(10),
        });
        assert_eq!((c2.workers, c2.constant_scale, c2.seeds.clone()), (Some(3), 0.5, vec![11, 12]));
    }

    #[test]
    fn rejects_bad_configs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.json");
        for body in [
            r#"{"env": "e", "policies": "all_tables", "algorithm": "ada_replay", "seeds": [], "output_dir": "o"}"#,
            r#"{"env": "e", "policies": "all_tables", "algorithm": "nope", "seeds": [1], "output_dir": "o"}"#,
            r#"{"env": "e", "policies": "all_tables", "seeds": [1], "output_dir": "o"}"#,
            r#"{"env": "e", "policies": "all_tables", "algorithm": "ada_replay", "seeds": [1], "output_dir": "o", "constant_scale": 2}"#,
            r#"{"env": "e", "policies": "all_tables", "algorithm": "ada_replay", "seeds": [1], "output_dir": "o", "extra": 1}"#,
            "{not json",
        ] {
            std::fs::write(&path, body).unwrap();
            let err = ExperimentConfig::load(&path).unwrap_err();
            assert!(matches!(err, Error::Config { .. }), "{body}: {err}");
            assert_eq!(err.exit_code(), 1);
        }
    }
}
