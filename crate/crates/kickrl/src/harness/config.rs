//! Flat `key = value` experiment configuration with dotted section
//! prefixes, `#` comments, and defaults for every key.

use crate::dqn::AgentConfig;
use crate::harness::HarnessError;
use crate::kicksim::SimConfig;
use crate::obs::Encoding;
use std::fmt::Write as _;
use std::path::PathBuf;

/// Everything one experiment run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub encoding: Encoding,
    pub episodes: u32,
    pub seeds: Vec<u64>,
    pub sim: SimConfig,
    pub agent: AgentConfig,
    pub moving_average_window: usize,
    /// Base directory; each run writes into `<output_dir>/<encoding>/`.
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            encoding: Encoding::Rcs,
            episodes: 3000,
            seeds: vec![1, 2, 3, 4, 5],
            sim: SimConfig::default(),
            agent: AgentConfig::default(),
            moving_average_window: 250,
            output_dir: PathBuf::from("runs"),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.episodes < 1 {
            return Err(HarnessError::Config("episodes must be >= 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("seeds must be nonempty".into()));
        }
        if self.moving_average_window < 1 {
            return Err(HarnessError::Config(
                "moving_average_window must be >= 1".into(),
            ));
        }
        self.sim.validate().map_err(HarnessError::Config)?;
        self.agent.validate().map_err(HarnessError::Config)?;
        Ok(())
    }

    /// Directory this configuration's results land in.
    pub fn run_dir(&self) -> PathBuf {
        self.output_dir.join(self.encoding.to_string())
    }

    /// Renders the full configuration in the config-file syntax.
    /// `parse_config(cfg.to_config_string())` reproduces `cfg` exactly.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# kick-motion experiment configuration");
        let _ = writeln!(s, "encoding = {}", self.encoding);
        let _ = writeln!(s, "episodes = {}", self.episodes);
        let _ = writeln!(
            s,
            "seeds = {}",
            self.seeds
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        let _ = writeln!(s, "moving_average_window = {}", self.moving_average_window);
        let _ = writeln!(s, "output_dir = {}", self.output_dir.display());
        let _ = writeln!(s);
        let m = &self.sim;
        let _ = writeln!(s, "sim.dt = {}", m.dt);
        let _ = writeln!(s, "sim.episode_steps = {}", m.episode_steps);
        let _ = writeln!(s, "sim.robot_radius = {}", m.robot_radius);
        let _ = writeln!(s, "sim.ball_radius = {}", m.ball_radius);
        let _ = writeln!(s, "sim.spawn_distance = {}", m.spawn_distance);
        let _ = writeln!(s, "sim.ball_speed_min = {}", m.ball_speed_range.0);
        let _ = writeln!(s, "sim.ball_speed_max = {}", m.ball_speed_range.1);
        let _ = writeln!(s, "sim.ball_aim_radius = {}", m.ball_aim_radius);
        let _ = writeln!(s, "sim.forward_speed = {}", m.forward_speed);
        let _ = writeln!(s, "sim.kick_restitution = {}", m.kick_restitution);
        let _ = writeln!(s);
        let a = &self.agent;
        let _ = writeln!(s, "agent.gamma = {}", a.gamma);
        let _ = writeln!(s, "agent.learning_rate = {}", a.learning_rate);
        let _ = writeln!(s, "agent.batch_size = {}", a.batch_size);
        let _ = writeln!(s, "agent.replay_capacity = {}", a.replay_capacity);
        let _ = writeln!(s, "agent.target_sync_interval = {}", a.target_sync_interval);
        let _ = writeln!(s, "agent.epsilon_start = {}", a.epsilon_start);
        let _ = writeln!(s, "agent.epsilon_end = {}", a.epsilon_end);
        let _ = writeln!(
            s,
            "agent.epsilon_decay_episodes = {}",
            a.epsilon_decay_episodes
        );
        let _ = writeln!(s, "agent.warmup_transitions = {}", a.warmup_transitions);
        let _ = writeln!(s, "agent.hidden_width = {}", a.hidden_width);
        s
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T, HarnessError> {
    value.parse().map_err(|_| {
        HarnessError::Config(format!("line {line}: bad value {value:?} for key {key}"))
    })
}

/// Parses config-file text. Keys not present keep their defaults; unknown
/// keys are errors.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = ExperimentConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            HarnessError::Config(format!("line {line_no}: expected `key = value`, got {raw:?}"))
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "encoding" => cfg.encoding = value.parse().map_err(HarnessError::Config)?,
            "episodes" => cfg.episodes = parse_value(key, value, line_no)?,
            "seeds" => {
                cfg.seeds = value
                    .split(',')
                    .map(|t| parse_value(key, t.trim(), line_no))
                    .collect::<Result<_, _>>()?;
            }
            "moving_average_window" => {
                cfg.moving_average_window = parse_value(key, value, line_no)?
            }
            "output_dir" => cfg.output_dir = PathBuf::from(value),
            "sim.dt" => cfg.sim.dt = parse_value(key, value, line_no)?,
            "sim.episode_steps" => cfg.sim.episode_steps = parse_value(key, value, line_no)?,
            "sim.robot_radius" => cfg.sim.robot_radius = parse_value(key, value, line_no)?,
            "sim.ball_radius" => cfg.sim.ball_radius = parse_value(key, value, line_no)?,
            "sim.spawn_distance" => cfg.sim.spawn_distance = parse_value(key, value, line_no)?,
            "sim.ball_speed_min" => cfg.sim.ball_speed_range.0 = parse_value(key, value, line_no)?,
            "sim.ball_speed_max" => cfg.sim.ball_speed_range.1 = parse_value(key, value, line_no)?,
            "sim.ball_aim_radius" => cfg.sim.ball_aim_radius = parse_value(key, value, line_no)?,
            "sim.forward_speed" => cfg.sim.forward_speed = parse_value(key, value, line_no)?,
            "sim.kick_restitution" => {
                cfg.sim.kick_restitution = parse_value(key, value, line_no)?
            }
            "agent.gamma" => cfg.agent.gamma = parse_value(key, value, line_no)?,
            "agent.learning_rate" => cfg.agent.learning_rate = parse_value(key, value, line_no)?,
            "agent.batch_size" => cfg.agent.batch_size = parse_value(key, value, line_no)?,
            "agent.replay_capacity" => {
                cfg.agent.replay_capacity = parse_value(key, value, line_no)?
            }
            "agent.target_sync_interval" => {
                cfg.agent.target_sync_interval = parse_value(key, value, line_no)?
            }
            "agent.epsilon_start" => cfg.agent.epsilon_start = parse_value(key, value, line_no)?,
            "agent.epsilon_end" => cfg.agent.epsilon_end = parse_value(key, value, line_no)?,
            "agent.epsilon_decay_episodes" => {
                cfg.agent.epsilon_decay_episodes = parse_value(key, value, line_no)?
            }
            "agent.warmup_transitions" => {
                cfg.agent.warmup_transitions = parse_value(key, value, line_no)?
            }
            "agent.hidden_width" => cfg.agent.hidden_width = parse_value(key, value, line_no)?,
            _ => {
                return Err(HarnessError::Config(format!(
                    "line {line_no}: unknown key {key:?}"
                )))
            }
        }
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_text() {
        let cfg = ExperimentConfig::default();
        let parsed = parse_config(&cfg.to_config_string()).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn nondefault_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.encoding = Encoding::RcsPlus(4);
        cfg.episodes = 123;
        cfg.seeds = vec![42, 7];
        cfg.sim.dt = 0.025;
        cfg.agent.learning_rate = 5e-4;
        cfg.output_dir = PathBuf::from("out/ablate");
        let parsed = parse_config(&cfg.to_config_string()).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let cfg = parse_config(
            "# header\n\nepisodes = 9   # trailing comment\n  encoding = rcs+2\n",
        )
        .unwrap();
        assert_eq!(cfg.episodes, 9);
        assert_eq!(cfg.encoding, Encoding::RcsPlus(2));
        assert_eq!(cfg.agent, AgentConfig::default());
    }

    #[test]
    fn unknown_key_is_an_error() {
        let err = parse_config("sim.gravity = 9.8\n").unwrap_err();
        assert!(err.to_string().contains("unknown key"));
    }

    #[test]
    fn malformed_line_is_an_error() {
        assert!(parse_config("episodes 9\n").is_err());
        assert!(parse_config("episodes = many\n").is_err());
    }

    #[test]
    fn run_dir_appends_encoding() {
        let mut cfg = ExperimentConfig::default();
        cfg.encoding = Encoding::RcsPlus(4);
        cfg.output_dir = PathBuf::from("runs");
        assert_eq!(cfg.run_dir(), PathBuf::from("runs/rcs+4"));
    }

    #[test]
    fn validation_rejects_bad_fields() {
        let mut cfg = ExperimentConfig::default();
        cfg.seeds.clear();
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.sim.dt = 0.0;
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::default();
        cfg.agent.gamma = 1.0;
        assert!(cfg.validate().is_err());
    }
}
