//! Task configuration: TOML file with `[task]`, `[env]`, and `[ppo]`
//! sections, environment-variable overrides, validation, and the canonical
//! digest that ties checkpoints to the task they were trained for.
//!
//! Override any key with `SUPERVISOR_<SECTION>_<KEY>=<value>`, e.g.
//! `SUPERVISOR_PPO_TOTAL_STEPS=50000` or `SUPERVISOR_TASK_SEED=9`. Values
//! parse as TOML literals (integer, float, bool) and fall back to strings.

use crate::envs::AnyEnv;
use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use std::path::Path;
use supervisor_core::envs::{CombatConfig, CombatEnv, SwitchConfig, SwitchEnv, TrafficConfig, TrafficEnv};
use supervisor_core::mdp::{MultiAgentEnv, ObservationMode};
use supervisor_core::ppo::{config_digest, PpoConfig};

pub const ENV_OVERRIDE_PREFIX: &str = "SUPERVISOR_";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvName {
    Switch,
    Traffic,
    Combat,
}

impl EnvName {
    pub fn parse(name: &str) -> anyhow::Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "switch" => Ok(EnvName::Switch),
            "traffic" | "trafficjunction" => Ok(EnvName::Traffic),
            "combat" => Ok(EnvName::Combat),
            other => bail!("unknown environment '{other}' (expected switch, traffic, combat)"),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            EnvName::Switch => "switch",
            EnvName::Traffic => "traffic",
            EnvName::Combat => "combat",
        }
    }
}

fn default_models() -> usize {
    5
}
fn default_eval_rollouts() -> usize {
    20
}
fn default_eval_step_cap() -> usize {
    5_000
}
fn default_observation() -> String {
    "individual".into()
}
fn default_spawn_probability() -> f64 {
    0.3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskSection {
    env: String,
    agents: usize,
    #[serde(default = "default_observation")]
    observation: String,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_models")]
    models: usize,
    #[serde(default = "default_eval_rollouts")]
    eval_rollouts: usize,
    #[serde(default = "default_eval_step_cap")]
    eval_step_cap: usize,
    #[serde(default)]
    allow_any_agent_count: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct EnvSection {
    step_cost: f64,
    spawn_probability: f64,
    turning_routes: bool,
    max_env_steps: Option<usize>,
}

impl Default for EnvSection {
    fn default() -> Self {
        EnvSection {
            step_cost: 0.0,
            spawn_probability: default_spawn_probability(),
            turning_routes: false,
            max_env_steps: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PpoSection {
    clip_epsilon: f64,
    gamma: f64,
    entropy_coef: f64,
    learning_rate: f64,
    steps_per_episode: usize,
    steps_per_batch: usize,
    updates_per_iteration: usize,
    total_steps: usize,
    normalize_advantages: bool,
}

impl Default for PpoSection {
    fn default() -> Self {
        let d = PpoConfig::default();
        PpoSection {
            clip_epsilon: d.clip_epsilon,
            gamma: d.gamma,
            entropy_coef: d.entropy_coef,
            learning_rate: d.learning_rate,
            steps_per_episode: d.steps_per_episode,
            steps_per_batch: d.steps_per_batch,
            updates_per_iteration: d.updates_per_iteration,
            total_steps: d.total_steps,
            normalize_advantages: d.normalize_advantages,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    task: TaskSection,
    #[serde(default)]
    env: EnvSection,
    #[serde(default)]
    ppo: PpoSection,
}

/// Fully resolved task configuration.
#[derive(Debug, Clone)]
pub struct TaskConfig {
    pub env: EnvName,
    pub agents: usize,
    pub observation: ObservationMode,
    pub seed: u64,
    pub models: usize,
    pub eval_rollouts: usize,
    pub eval_step_cap: usize,
    pub allow_any_agent_count: bool,
    pub step_cost: f64,
    pub spawn_probability: f64,
    pub turning_routes: bool,
    pub max_env_steps: Option<usize>,
    /// Base hyperparameters; `seed` is re-derived per model at training time.
    pub ppo: PpoConfig,
}

impl TaskConfig {
    /// Loads a config file and applies `SUPERVISOR_*` environment overrides.
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let overrides: Vec<(String, String)> = std::env::vars()
            .filter(|(k, _)| k.starts_with(ENV_OVERRIDE_PREFIX))
            .collect();
        Self::from_toml(&text, &overrides)
    }

    /// Parses a TOML config with explicit `SUPERVISOR_*` override pairs.
    pub fn from_toml(text: &str, overrides: &[(String, String)]) -> anyhow::Result<Self> {
        let mut table: toml::Table = toml::from_str(text).context("parsing config TOML")?;
        for (key, value) in overrides {
            apply_override(&mut table, key, value)?;
        }
        let file: FileConfig = toml::Value::Table(table)
            .try_into()
            .context("interpreting config fields")?;
        Self::resolve(file)
    }

    fn resolve(file: FileConfig) -> anyhow::Result<Self> {
        let env = EnvName::parse(&file.task.env)?;
        let observation = match file.task.observation.to_ascii_lowercase().as_str() {
            "individual" | "v0" => ObservationMode::Individual,
            "collective" | "v1" => ObservationMode::Collective,
            other => bail!("unknown observation mode '{other}' (individual or collective)"),
        };
        let config = TaskConfig {
            env,
            agents: file.task.agents,
            observation,
            seed: file.task.seed,
            models: file.task.models,
            eval_rollouts: file.task.eval_rollouts,
            eval_step_cap: file.task.eval_step_cap,
            allow_any_agent_count: file.task.allow_any_agent_count,
            step_cost: file.env.step_cost,
            spawn_probability: file.env.spawn_probability,
            turning_routes: file.env.turning_routes,
            max_env_steps: file.env.max_env_steps,
            ppo: PpoConfig {
                clip_epsilon: file.ppo.clip_epsilon,
                gamma: file.ppo.gamma,
                entropy_coef: file.ppo.entropy_coef,
                learning_rate: file.ppo.learning_rate,
                steps_per_episode: file.ppo.steps_per_episode,
                steps_per_batch: file.ppo.steps_per_batch,
                updates_per_iteration: file.ppo.updates_per_iteration,
                total_steps: file.ppo.total_steps,
                seed: file.task.seed,
                normalize_advantages: file.ppo.normalize_advantages,
            },
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if !self.allow_any_agent_count {
            let valid = match self.env {
                EnvName::Switch => (2..=4).contains(&self.agents),
                EnvName::Traffic => [4, 7, 10].contains(&self.agents),
                EnvName::Combat => (5..=7).contains(&self.agents),
            };
            if !valid {
                bail!(
                    "{} does not support {} agents (switch 2-4, traffic 4/7/10, combat 5-7); \
                     set allow_any_agent_count to override",
                    self.env.as_str(),
                    self.agents
                );
            }
        }
        if self.models == 0 || self.eval_rollouts == 0 || self.eval_step_cap == 0 {
            bail!("models, eval_rollouts, and eval_step_cap must be positive");
        }
        self.ppo.validate()?;
        Ok(())
    }

    /// Constructs the configured environment.
    pub fn build_env(&self) -> anyhow::Result<AnyEnv> {
        Ok(match self.env {
            EnvName::Switch => {
                let mut c = SwitchConfig {
                    step_cost: self.step_cost,
                    ..SwitchConfig::default()
                };
                if let Some(steps) = self.max_env_steps {
                    c.max_env_steps = steps;
                }
                AnyEnv::Switch(SwitchEnv::new(self.agents, c)?)
            }
            EnvName::Traffic => {
                let mut c = TrafficConfig {
                    spawn_probability: self.spawn_probability,
                    turning_routes: self.turning_routes,
                    ..TrafficConfig::default()
                };
                if let Some(steps) = self.max_env_steps {
                    c.max_env_steps = steps;
                }
                AnyEnv::Traffic(TrafficEnv::new(self.agents, c)?)
            }
            EnvName::Combat => {
                let mut c = CombatConfig::default();
                if let Some(steps) = self.max_env_steps {
                    c.max_env_steps = steps;
                }
                AnyEnv::Combat(CombatEnv::new(self.agents, c)?)
            }
        })
    }

    /// Network input/output widths for this task: `(M, N) = (|s| + n, |A|)`.
    pub fn network_shape(&self) -> anyhow::Result<(usize, usize)> {
        let env = self.build_env()?;
        Ok((
            env.observation_len(self.observation) + env.agent_count(),
            env.action_count(),
        ))
    }

    /// Canonical identity of the model this task trains, hashed into
    /// checkpoint headers.
    pub fn model_identity(&self) -> anyhow::Result<String> {
        let (inputs, actions) = self.network_shape()?;
        Ok(format!(
            "{};{};{};{};{}",
            self.env.as_str(),
            self.agents,
            self.observation,
            inputs,
            actions
        ))
    }

    pub fn digest(&self) -> anyhow::Result<u64> {
        Ok(config_digest(&self.model_identity()?))
    }

    /// The full effective configuration as TOML, for reproducibility dumps.
    pub fn effective_toml(&self) -> String {
        let file = FileConfig {
            task: TaskSection {
                env: self.env.as_str().into(),
                agents: self.agents,
                observation: self.observation.to_string(),
                seed: self.seed,
                models: self.models,
                eval_rollouts: self.eval_rollouts,
                eval_step_cap: self.eval_step_cap,
                allow_any_agent_count: self.allow_any_agent_count,
            },
            env: EnvSection {
                step_cost: self.step_cost,
                spawn_probability: self.spawn_probability,
                turning_routes: self.turning_routes,
                max_env_steps: self.max_env_steps,
            },
            ppo: PpoSection {
                clip_epsilon: self.ppo.clip_epsilon,
                gamma: self.ppo.gamma,
                entropy_coef: self.ppo.entropy_coef,
                learning_rate: self.ppo.learning_rate,
                steps_per_episode: self.ppo.steps_per_episode,
                steps_per_batch: self.ppo.steps_per_batch,
                updates_per_iteration: self.ppo.updates_per_iteration,
                total_steps: self.ppo.total_steps,
                normalize_advantages: self.ppo.normalize_advantages,
            },
        };
        toml::to_string(&file).expect("config serializes")
    }
}

fn apply_override(table: &mut toml::Table, key: &str, value: &str) -> anyhow::Result<()> {
    let remainder = &key[ENV_OVERRIDE_PREFIX.len()..];
    let Some((section, field)) = remainder.split_once('_') else {
        bail!("override {key} needs the form {ENV_OVERRIDE_PREFIX}SECTION_KEY");
    };
    let section = section.to_ascii_lowercase();
    if !["task", "env", "ppo"].contains(&section.as_str()) {
        bail!("override {key}: unknown section '{section}'");
    }
    let field = field.to_ascii_lowercase();
    let parsed = parse_literal(value);
    table
        .entry(section)
        .or_insert_with(|| toml::Value::Table(toml::Table::new()))
        .as_table_mut()
        .map(|t| t.insert(field, parsed))
        .ok_or_else(|| anyhow::anyhow!("override {key}: section is not a table"))?;
    Ok(())
}

fn parse_literal(value: &str) -> toml::Value {
    if let Ok(i) = value.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    if let Ok(f) = value.parse::<f64>() {
        return toml::Value::Float(f);
    }
    if let Ok(b) = value.parse::<bool>() {
        return toml::Value::Boolean(b);
    }
    toml::Value::String(value.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[task]\nenv = \"switch\"\nagents = 2\n";

    #[test]
    fn minimal_config_fills_defaults() {
        let c = TaskConfig::from_toml(MINIMAL, &[]).unwrap();
        assert_eq!(c.env, EnvName::Switch);
        assert_eq!(c.agents, 2);
        assert_eq!(c.observation, ObservationMode::Individual);
        assert_eq!(c.models, 5);
        assert_eq!(c.eval_rollouts, 20);
        assert_eq!(c.eval_step_cap, 5_000);
        assert_eq!(c.ppo.clip_epsilon, 0.2);
        assert_eq!(c.ppo.gamma, 0.99);
        assert_eq!(c.ppo.entropy_coef, 0.01);
        assert_eq!(c.ppo.learning_rate, 0.0002);
    }

    #[test]
    fn agent_ranges_enforced_per_env() {
        let bad = "[task]\nenv = \"traffic\"\nagents = 5\n";
        assert!(TaskConfig::from_toml(bad, &[]).is_err());
        let ok = "[task]\nenv = \"traffic\"\nagents = 5\nallow_any_agent_count = true\n";
        assert!(TaskConfig::from_toml(ok, &[]).is_ok());
        let combat_ok = "[task]\nenv = \"combat\"\nagents = 5\n";
        assert!(TaskConfig::from_toml(combat_ok, &[]).is_ok());
    }

    #[test]
    fn environment_overrides_apply() {
        let overrides = vec![
            ("SUPERVISOR_TASK_SEED".to_string(), "41".to_string()),
            ("SUPERVISOR_PPO_TOTAL_STEPS".to_string(), "1234".to_string()),
            ("SUPERVISOR_ENV_STEP_COST".to_string(), "-0.05".to_string()),
        ];
        let c = TaskConfig::from_toml(MINIMAL, &overrides).unwrap();
        assert_eq!(c.seed, 41);
        assert_eq!(c.ppo.total_steps, 1234);
        assert_eq!(c.step_cost, -0.05);
        assert_eq!(c.ppo.seed, 41);
    }

    #[test]
    fn unknown_fields_rejected() {
        let bad = "[task]\nenv = \"switch\"\nagents = 2\ntypo_field = 1\n";
        assert!(TaskConfig::from_toml(bad, &[]).is_err());
    }

    #[test]
    fn effective_toml_round_trips() {
        let overrides = vec![("SUPERVISOR_PPO_GAMMA".to_string(), "0.5".to_string())];
        let c = TaskConfig::from_toml(MINIMAL, &overrides).unwrap();
        let dumped = c.effective_toml();
        let reparsed = TaskConfig::from_toml(&dumped, &[]).unwrap();
        assert_eq!(reparsed.ppo.gamma, 0.5);
        assert_eq!(reparsed.agents, c.agents);
        assert_eq!(reparsed.seed, c.seed);
    }

    #[test]
    fn network_shape_matches_task() {
        // Switch2 individual: M = 2*2 + 2 = 6, N = 5.
        let c = TaskConfig::from_toml(MINIMAL, &[]).unwrap();
        assert_eq!(c.network_shape().unwrap(), (6, 5));
        // Combat5 individual: M = 7*5 + 5 = 40, N = 10.
        let combat = "[task]\nenv = \"combat\"\nagents = 5\n";
        let c = TaskConfig::from_toml(combat, &[]).unwrap();
        assert_eq!(c.network_shape().unwrap(), (40, 10));
    }

    #[test]
    fn digest_tracks_identity() {
        let a = TaskConfig::from_toml(MINIMAL, &[]).unwrap();
        let b = TaskConfig::from_toml("[task]\nenv = \"switch\"\nagents = 3\n", &[]).unwrap();
        assert_ne!(a.digest().unwrap(), b.digest().unwrap());
        assert_eq!(a.digest().unwrap(), a.digest().unwrap());
    }
}
