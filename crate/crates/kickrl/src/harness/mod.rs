//! Experiment driver: seeded training jobs per observation encoding,
//! moving-average learning curves, cross-encoding comparison, and CSV/SVG
//! outputs.

mod config;
mod csvio;
pub mod metrics;
mod svg;

pub use config::{parse_config, ExperimentConfig};
pub use csvio::{read_csv, write_csv, CsvRow, CSV_HEADER};
pub use metrics::{compare_encodings, moving_average, ComparisonReport, EncodingSummary};
pub use svg::emit_plot;

use crate::dqn::{epsilon_for_episode, DqnAgent, Transition};
use crate::kicksim::{reset, step, Action, SimConfig};
use crate::obs::{observe, Encoding};
use metrics::CompensatedSum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Outcome of one training episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    /// 0-based episode index within the seed's run.
    pub episode_index: u32,
    pub total_reward: f64,
    pub contact_happened: bool,
    /// 1-based step of the first contact, when one happened.
    pub first_contact_step: Option<u32>,
    /// Exploration rate the episode ran with.
    pub epsilon: f64,
}

/// All artifacts of one experiment: the configuration, per-seed episode
/// logs, derived moving averages, and the wall-clock cost.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: ExperimentConfig,
    /// One inner vec per seed, in `config.seeds` order.
    pub per_seed: Vec<Vec<EpisodeLog>>,
    /// Moving-average series matching `per_seed`.
    pub moving_averages: Vec<Vec<f64>>,
    /// Wall clock spent; zero for results loaded from disk.
    pub duration: Duration,
}

/// Independent, documented random streams derived from one 64-bit seed.
/// Keeping the environment stream separate means the ball trajectories for a
/// seed are identical across encodings.
mod streams {
    pub const ENV: u64 = 0;
    pub const POLICY: u64 = 1;
    pub const DUMMY: u64 = 2;
    pub const INIT: u64 = 3;
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Plays one episode, pushing every transition to the agent's replay and
/// running one training update per environment step.
pub fn run_episode(
    agent: &mut DqnAgent,
    sim: &SimConfig,
    encoding: Encoding,
    episode_index: u32,
    epsilon: f64,
    env_rng: &mut ChaCha8Rng,
    policy_rng: &mut ChaCha8Rng,
    dummy_rng: &mut ChaCha8Rng,
) -> Result<EpisodeLog, HarnessError> {
    if encoding.dim() != agent.net().input_dim() {
        return Err(HarnessError::Config(format!(
            "encoding {encoding} is {}-dimensional but the agent expects {} inputs",
            encoding.dim(),
            agent.net().input_dim()
        )));
    }

    let mut scene = reset(env_rng, sim);
    let mut obs = observe(&scene, encoding, dummy_rng);
    let mut total = CompensatedSum::default();
    let mut first_contact_step = None;

    for _ in 0..sim.episode_steps {
        let action = agent.act(&obs, epsilon, policy_rng);
        let outcome = step(&scene, Action::from_index(action), sim)
            .expect("episode loop stays within episode bounds");
        let next_obs = observe(&outcome.next, encoding, dummy_rng);
        agent.record(Transition {
            obs,
            action,
            reward: outcome.reward,
            next_obs: next_obs.clone(),
            terminal: outcome.terminal,
        });
        agent.train_step(policy_rng);
        total.add(outcome.reward);
        if outcome.first_contact {
            first_contact_step = Some(outcome.next.step_index);
        }
        scene = outcome.next;
        obs = next_obs;
    }

    let total_reward = total.total();
    // Worst case: penalties every pre-contact step plus a dead-stop contact
    // on the far side of the robot (bonus 3*cos(pi) = -3). A no-contact
    // episode sits above this at exactly steps * -0.1.
    let floor = crate::kicksim::NO_CONTACT_REWARD * (sim.episode_steps as f64 - 1.0)
        - crate::kicksim::ANGLE_REWARD_GAIN;
    let ceiling = crate::kicksim::ANGLE_REWARD_GAIN
        + crate::kicksim::SPEED_REWARD_GAIN * sim.forward_speed;
    debug_assert!(
        total_reward >= floor - 1e-9 && total_reward <= ceiling + 1e-9,
        "episode return {total_reward} outside [{floor}, {ceiling}]"
    );
    Ok(EpisodeLog {
        episode_index,
        total_reward,
        contact_happened: first_contact_step.is_some(),
        first_contact_step,
        epsilon,
    })
}

fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<EpisodeLog>, HarnessError> {
    let mut env_rng = stream_rng(seed, streams::ENV);
    let mut policy_rng = stream_rng(seed, streams::POLICY);
    let mut dummy_rng = stream_rng(seed, streams::DUMMY);
    let mut init_rng = stream_rng(seed, streams::INIT);
    let mut agent = DqnAgent::new(cfg.agent.clone(), cfg.encoding.dim(), &mut init_rng);

    (0..cfg.episodes)
        .map(|ep| {
            let epsilon = epsilon_for_episode(&cfg.agent, ep);
            run_episode(
                &mut agent,
                &cfg.sim,
                cfg.encoding,
                ep,
                epsilon,
                &mut env_rng,
                &mut policy_rng,
                &mut dummy_rng,
            )
        })
        .collect()
}

/// Trains one agent per seed, in parallel, and persists the results under
/// `cfg.run_dir()`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunResult, HarnessError> {
    cfg.validate()?;
    let started = Instant::now();

    let per_seed: Vec<Vec<EpisodeLog>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_seed(cfg, seed))
        .collect::<Result<_, _>>()?;

    let moving_averages = per_seed
        .iter()
        .map(|logs| {
            let totals: Vec<f64> = logs.iter().map(|l| l.total_reward).collect();
            moving_average(&totals, cfg.moving_average_window)
        })
        .collect();

    let result = RunResult {
        config: cfg.clone(),
        per_seed,
        moving_averages,
        duration: started.elapsed(),
    };
    save_run(&result)?;
    Ok(result)
}

fn csv_rows(result: &RunResult) -> Vec<CsvRow> {
    let mut rows = Vec::new();
    for ((&seed, logs), ma) in result
        .config
        .seeds
        .iter()
        .zip(&result.per_seed)
        .zip(&result.moving_averages)
    {
        for (log, &avg) in logs.iter().zip(ma) {
            rows.push(CsvRow {
                seed,
                episode: log.episode_index + 1,
                total_reward: log.total_reward,
                moving_average: avg,
                epsilon: log.epsilon,
                contact_happened: log.contact_happened,
            });
        }
    }
    rows
}

/// Writes `config.txt` and `episodes.csv` into the run directory. Every byte
/// is a pure function of the configuration and seeds.
pub fn save_run(result: &RunResult) -> Result<(), HarnessError> {
    let dir = result.config.run_dir();
    std::fs::create_dir_all(&dir).map_err(|source| HarnessError::Io {
        path: dir.clone(),
        source,
    })?;
    let cfg_path = dir.join("config.txt");
    std::fs::write(&cfg_path, result.config.to_config_string()).map_err(|source| {
        HarnessError::Io {
            path: cfg_path,
            source,
        }
    })?;
    write_csv(&csv_rows(result), &dir.join("episodes.csv"))
}

/// Reads a run directory written by [`save_run`] back into a `RunResult`.
///
/// The stored moving-average column is cross-checked against recomputation
/// from the stored totals.
pub fn load_run(dir: &Path) -> Result<RunResult, HarnessError> {
    let cfg_path = dir.join("config.txt");
    let text = std::fs::read_to_string(&cfg_path).map_err(|source| HarnessError::Io {
        path: cfg_path.clone(),
        source,
    })?;
    let config = parse_config(&text)?;
    let rows = read_csv(&dir.join("episodes.csv"))?;

    let mut per_seed: Vec<Vec<EpisodeLog>> = Vec::with_capacity(config.seeds.len());
    let mut stored_ma: Vec<Vec<f64>> = Vec::with_capacity(config.seeds.len());
    let mut rows = rows.into_iter().peekable();
    for &seed in &config.seeds {
        let mut logs = Vec::with_capacity(config.episodes as usize);
        let mut ma = Vec::with_capacity(config.episodes as usize);
        for episode in 1..=config.episodes {
            let row = rows.next().ok_or_else(|| {
                HarnessError::Config(format!(
                    "{}: missing row for seed {seed} episode {episode}",
                    dir.display()
                ))
            })?;
            if row.seed != seed || row.episode != episode {
                return Err(HarnessError::Config(format!(
                    "{}: expected seed {seed} episode {episode}, found seed {} episode {}",
                    dir.display(),
                    row.seed,
                    row.episode
                )));
            }
            logs.push(EpisodeLog {
                episode_index: episode - 1,
                total_reward: row.total_reward,
                contact_happened: row.contact_happened,
                first_contact_step: None,
                epsilon: row.epsilon,
            });
            ma.push(row.moving_average);
        }
        per_seed.push(logs);
        stored_ma.push(ma);
    }
    if rows.next().is_some() {
        return Err(HarnessError::Config(format!(
            "{}: more rows than seeds x episodes",
            dir.display()
        )));
    }

    for (logs, stored) in per_seed.iter().zip(&stored_ma) {
        let totals: Vec<f64> = logs.iter().map(|l| l.total_reward).collect();
        if moving_average(&totals, config.moving_average_window) != *stored {
            return Err(HarnessError::Config(format!(
                "{}: stored moving_average column does not match the totals",
                dir.display()
            )));
        }
    }

    Ok(RunResult {
        config,
        per_seed,
        moving_averages: stored_ma,
        duration: Duration::ZERO,
    })
}
