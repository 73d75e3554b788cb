//! Experiment configuration and its `key = value` text form.
//!
//! Keys may be written fully dotted (`amcb.tau = 0.5`) or inside a section
//! (`[amcb]` followed by `tau = 0.5`). `#` starts a comment. Lists are
//! comma-separated. Unknown keys and ill-typed values are rejected.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::data::SyntheticSpec;
use crate::amcb::{DEFAULT_EPSILON, DEFAULT_TAU};
use crate::error::{Error, Result};
use crate::learner::LearnerConfig;
use crate::policy::{RewardMode, DEFAULT_CLIP, DEFAULT_EMA, DEFAULT_HIDDEN, DEFAULT_POLICY_LR};
use crate::selection::{DEFAULT_BETA, DEFAULT_KAPPA, MAX_LLOYD_ITERS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSettings {
    pub hidden: usize,
    pub lr: f64,
    pub epochs: usize,
    pub weight_decay: f64,
    pub kl_coeff: f64,
    pub warm_start: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardSettings {
    pub mode: RewardMode,
    pub ema: f64,
    pub curves: Vec<PathBuf>,
    /// Accepted and logged; the update uses a one-step return.
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySettings {
    pub lr: f64,
    pub clip: f64,
    pub hidden: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Dataset file; when absent the synthetic spec is generated.
    pub data_path: Option<PathBuf>,
    pub synthetic: SyntheticSpec,
    pub val_fraction: f64,
    pub seed_size: usize,
    pub budget: usize,
    pub rounds: usize,
    pub learner: LearnerSettings,
    pub tau: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub kappa: f64,
    pub kmeans_iters: usize,
    pub reward: RewardSettings,
    pub policy: PolicySettings,
    /// Directory for per-round learner checkpoints; `None` disables them.
    pub checkpoint_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            data_path: None,
            synthetic: SyntheticSpec::default(),
            val_fraction: 0.2,
            seed_size: 60,
            budget: 30,
            rounds: 10,
            learner: LearnerSettings {
                hidden: 32,
                lr: 0.1,
                epochs: 30,
                weight_decay: 1e-4,
                kl_coeff: 0.01,
                warm_start: true,
            },
            tau: DEFAULT_TAU,
            epsilon: DEFAULT_EPSILON,
            beta: DEFAULT_BETA,
            kappa: DEFAULT_KAPPA,
            kmeans_iters: MAX_LLOYD_ITERS,
            reward: RewardSettings {
                mode: RewardMode::Absolute,
                ema: DEFAULT_EMA,
                curves: Vec::new(),
                gamma: 0.99,
            },
            policy: PolicySettings {
                lr: DEFAULT_POLICY_LR,
                clip: DEFAULT_CLIP,
                hidden: DEFAULT_HIDDEN,
            },
            checkpoint_dir: None,
        }
    }
}

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("seed", "master seed for every random stream"),
    ("data.path", "dataset file; empty = generate synthetic data"),
    ("data.dims", "synthetic per-modality feature dimensions"),
    ("data.classes", "synthetic class count"),
    ("data.samples", "synthetic sample count"),
    ("data.informativeness", "synthetic per-modality signal strength in [0,1]"),
    ("data.noise", "synthetic isotropic noise standard deviation"),
    ("data.drift_threshold", "classes below it are separable by modality 1, the rest by modality 2; 0 = off"),
    ("split.val_fraction", "per-class validation share"),
    ("split.seed_size", "initial labeled set size"),
    ("al.budget", "samples acquired per round"),
    ("al.rounds", "acquisition rounds"),
    ("learner.hidden", "shared representation width"),
    ("learner.lr", "gradient-descent step size"),
    ("learner.epochs", "full-batch epochs per round"),
    ("learner.weight_decay", "L2 penalty on all parameters"),
    ("learner.kl_coeff", "weight of the non-target evidence regularizer"),
    ("learner.warm_start", "continue from the previous round's parameters"),
    ("amcb.tau", "softmax temperature on contribution gaps"),
    ("amcb.epsilon", "weight floor; 0 disables"),
    ("select.beta", "diversity weight in the unified score"),
    ("select.kappa", "candidate multiplier (K = ceil(kappa * budget))"),
    ("select.kmeans_iters", "Lloyd iterations (at most 5)"),
    ("reward.mode", "relative | absolute | incremental"),
    ("reward.ema", "exponential smoothing coefficient"),
    ("reward.curves", "baseline curve files for relative reward"),
    ("reward.gamma", "discount; accepted but unused by the one-step update"),
    ("policy.lr", "REINFORCE step size"),
    ("policy.clip", "advantage clipping bound"),
    ("policy.hidden", "policy hidden width"),
    ("log.checkpoint_dir", "directory for per-round learner checkpoints; empty = none"),
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for {key}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "seed" => self.seed = parse(key, v)?,
            "data.path" => self.data_path = (!v.is_empty()).then(|| PathBuf::from(v)),
            "data.dims" => self.synthetic.dims = parse_list(key, v)?,
            "data.classes" => self.synthetic.classes = parse(key, v)?,
            "data.samples" => self.synthetic.samples = parse(key, v)?,
            "data.informativeness" => self.synthetic.informativeness = parse_list(key, v)?,
            "data.noise" => self.synthetic.noise = parse(key, v)?,
            "data.drift_threshold" => {
                let t: usize = parse(key, v)?;
                self.synthetic.drift_threshold = (t > 0).then_some(t);
            }
            "split.val_fraction" => self.val_fraction = parse(key, v)?,
            "split.seed_size" => self.seed_size = parse(key, v)?,
            "al.budget" => self.budget = parse(key, v)?,
            "al.rounds" => self.rounds = parse(key, v)?,
            "learner.hidden" => self.learner.hidden = parse(key, v)?,
            "learner.lr" => self.learner.lr = parse(key, v)?,
            "learner.epochs" => self.learner.epochs = parse(key, v)?,
            "learner.weight_decay" => self.learner.weight_decay = parse(key, v)?,
            "learner.kl_coeff" => self.learner.kl_coeff = parse(key, v)?,
            "learner.warm_start" => self.learner.warm_start = parse(key, v)?,
            "amcb.tau" => self.tau = parse(key, v)?,
            "amcb.epsilon" => self.epsilon = parse(key, v)?,
            "select.beta" => self.beta = parse(key, v)?,
            "select.kappa" => self.kappa = parse(key, v)?,
            "select.kmeans_iters" => self.kmeans_iters = parse(key, v)?,
            "reward.mode" => self.reward.mode = v.parse().map_err(|e: Error| Error::Config(e.to_string()))?,
            "reward.ema" => self.reward.ema = parse(key, v)?,
            "reward.curves" => self.reward.curves = parse_list(key, v)?,
            "reward.gamma" => self.reward.gamma = parse(key, v)?,
            "policy.lr" => self.policy.lr = parse(key, v)?,
            "policy.clip" => self.policy.clip = parse(key, v)?,
            "policy.hidden" => self.policy.hidden = parse(key, v)?,
            "log.checkpoint_dir" => self.checkpoint_dir = (!v.is_empty()).then(|| PathBuf::from(v)),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Current value of `key` in its text form.
    pub fn get(&self, key: &str) -> Option<String> {
        let s = &self.synthetic;
        Some(match key {
            "seed" => self.seed.to_string(),
            "data.path" => self
                .data_path
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
            "data.dims" => join(&s.dims),
            "data.classes" => s.classes.to_string(),
            "data.samples" => s.samples.to_string(),
            "data.informativeness" => join(&s.informativeness),
            "data.noise" => s.noise.to_string(),
            "data.drift_threshold" => s.drift_threshold.unwrap_or(0).to_string(),
            "split.val_fraction" => self.val_fraction.to_string(),
            "split.seed_size" => self.seed_size.to_string(),
            "al.budget" => self.budget.to_string(),
            "al.rounds" => self.rounds.to_string(),
            "learner.hidden" => self.learner.hidden.to_string(),
            "learner.lr" => self.learner.lr.to_string(),
            "learner.epochs" => self.learner.epochs.to_string(),
            "learner.weight_decay" => self.learner.weight_decay.to_string(),
            "learner.kl_coeff" => self.learner.kl_coeff.to_string(),
            "learner.warm_start" => self.learner.warm_start.to_string(),
            "amcb.tau" => self.tau.to_string(),
            "amcb.epsilon" => self.epsilon.to_string(),
            "select.beta" => self.beta.to_string(),
            "select.kappa" => self.kappa.to_string(),
            "select.kmeans_iters" => self.kmeans_iters.to_string(),
            "reward.mode" => self.reward.mode.to_string(),
            "reward.ema" => self.reward.ema.to_string(),
            "reward.curves" => self
                .reward
                .curves
                .iter()
                .map(|p| p.display().to_string())
                .collect::<Vec<_>>()
                .join(","),
            "reward.gamma" => self.reward.gamma.to_string(),
            "policy.lr" => self.policy.lr.to_string(),
            "policy.clip" => self.policy.clip.to_string(),
            "policy.hidden" => self.policy.hidden.to_string(),
            "log.checkpoint_dir" => self
                .checkpoint_dir
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
            _ => return None,
        })
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut section = String::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", n + 1)))?;
            let k = k.trim();
            let key = if section.is_empty() || k.contains('.') {
                k.to_string()
            } else {
                format!("{section}.{k}")
            };
            self.set(&key, v)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
        self.set(k.trim(), v)
    }

    /// Full config in sectioned `key = value` form, with descriptions.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for (key, doc) in KEYS {
            let (sec, name) = key.split_once('.').unwrap_or(("", key));
            if sec != section {
                let _ = writeln!(out, "\n[{sec}]");
                section = sec;
            }
            let _ = writeln!(out, "# {doc}");
            let _ = writeln!(out, "{name} = {}", self.get(key).unwrap_or_default());
        }
        out.trim_start().to_string()
    }

    /// Two-modality drift benchmark: modality 1 separates only the first two
    /// of six classes, modality 2 (half the signal strength) the other four.
    /// The learner trains harder than the default so the weak modality is
    /// learned within the episode.
    pub fn drift_benchmark(seed: u64) -> Self {
        let mut cfg = Self {
            seed,
            ..Self::default()
        };
        cfg.synthetic = SyntheticSpec {
            dims: vec![16, 16],
            classes: 6,
            samples: 3000,
            informativeness: vec![1.0, 0.5],
            noise: 1.0,
            drift_threshold: Some(2),
        };
        cfg.learner.lr = 1.0;
        cfg.learner.epochs = 90;
        cfg
    }

    pub fn learner_config(&self, dims: Vec<usize>, classes: usize) -> LearnerConfig {
        LearnerConfig {
            dims,
            hidden_dim: self.learner.hidden,
            classes,
            learning_rate: self.learner.lr,
            epochs: self.learner.epochs,
            weight_decay: self.learner.weight_decay,
            kl_coeff: self.learner.kl_coeff,
            warm_start: self.learner.warm_start,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.budget == 0 || self.rounds == 0 {
            return fail("al.budget and al.rounds must be at least 1");
        }
        if !(self.tau > 0.0) || self.epsilon < 0.0 {
            return fail("amcb.tau must be positive and amcb.epsilon nonnegative");
        }
        if self.beta < 0.0 || !(self.kappa >= 1.0) {
            return fail("select.beta must be nonnegative and select.kappa at least 1");
        }
        if self.kmeans_iters > MAX_LLOYD_ITERS {
            return fail("select.kmeans_iters must be at most 5");
        }
        if !(0.0..1.0).contains(&self.reward.ema) || !(self.policy.clip > 0.0) {
            return fail("reward.ema must be in [0,1) and policy.clip positive");
        }
        if self.seed_size == 0 {
            return fail("split.seed_size must be at least 1");
        }
        if self.data_path.is_none() {
            self.synthetic
                .validate()
                .map_err(|e| Error::Config(format!("synthetic data: {e}")))?;
        }
        Ok(())
    }
}
