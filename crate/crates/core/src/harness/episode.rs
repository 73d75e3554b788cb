//! Full active-learning episodes: the policy-driven loop and the baseline loop.

use std::path::Path;
use std::time::Instant;

use super::config::ExperimentConfig;
use super::data::{generate_synthetic, Dataset};
use super::log::{EpisodeLog, EpisodeSummary, RoundRecord, StageTimings};
use super::shapley::shapley_contributions;
use super::split::stratified_split;
use crate::amcb::{contribution_gaps, update_weights, ContributionGaps};
use crate::efda::fuse_evidence;
use crate::error::{Error, Result};
use crate::learner::{
    evaluate, fit_temperatures, init_model, predict, train, EvalReport, LearnerConfig, ModelParams,
    TemperatureSet, TrainDiagnostics,
};
use crate::policy::{
    build_state, candidate_features, reinforce_update, sample_batch, LearningCurve, PolicyParams,
    RewardTracker, StateHistory,
};
use crate::rng::RngStream;
use crate::selection::{
    budgeted_kmeanspp, candidate_set, score_pool, select_baseline, BaselineEntry, PoolEntry, Strategy,
};
use crate::types::{ModalityWeights, MultimodalInstance, PoolPartition};

pub const RL_METHOD: &str = "rl-mba";

/// Everything an episode produces.
#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    pub log: EpisodeLog,
    pub curve: LearningCurve,
    pub params: ModelParams,
    /// Final policy; `None` for baselines.
    pub policy: Option<PolicyParams>,
}

/// Loads `data.path` or generates the synthetic dataset for `cfg.seed`.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    match &cfg.data_path {
        Some(p) => Dataset::load(p),
        None => generate_synthetic(&cfg.synthetic, &RngStream::new(cfg.seed, "data")),
    }
}

/// Learner state carried between rounds.
struct Learner {
    config: LearnerConfig,
    init: RngStream,
    params: ModelParams,
    temps: TemperatureSet,
    report: EvalReport,
    diag: TrainDiagnostics,
    delta: ContributionGaps,
    w: ModalityWeights,
}

impl Learner {
    /// Trains on the seed set with uniform weights, then derives the first
    /// contribution gaps and weights.
    fn start(cfg: &ExperimentConfig, dataset: &Dataset, part: &PoolPartition) -> Result<Self> {
        let config = cfg.learner_config(dataset.dims.clone(), dataset.classes);
        config.validate()?;
        let init = RngStream::new(cfg.seed, "learner/init");
        let m = dataset.modalities();
        let w = ModalityWeights::uniform(m);
        let fresh = init_model(&config, &init);
        let (params, diag) = train(&fresh, &dataset.select(&part.labeled), &w, &config)?;
        let mut learner = Self {
            config,
            init,
            temps: TemperatureSet::ones(m),
            report: EvalReport {
                modality: Vec::new(),
                multimodal: Default::default(),
            },
            params,
            diag,
            delta: ContributionGaps(vec![0.0; m]),
            w,
        };
        learner.validate(dataset, part)?;
        learner.w = update_weights(&learner.delta, cfg.tau, cfg.epsilon)?;
        Ok(learner)
    }

    fn retrain(&mut self, dataset: &Dataset, part: &PoolPartition) -> Result<()> {
        let start = if self.config.warm_start {
            self.params.clone()
        } else {
            init_model(&self.config, &self.init)
        };
        let (params, diag) = train(&start, &dataset.select(&part.labeled), &self.w, &self.config)?;
        self.params = params;
        self.diag = diag;
        Ok(())
    }

    /// Refits temperatures, evaluates and recomputes the contribution gaps.
    fn validate(&mut self, dataset: &Dataset, part: &PoolPartition) -> Result<()> {
        let val = dataset.select(&part.validation);
        self.temps = fit_temperatures(&self.params, &val)?;
        self.report = evaluate(&self.params, &val, &self.temps, &self.w, None)?;
        let per_modality: Vec<f64> = self.report.modality.iter().map(|r| r.top1).collect();
        self.delta = contribution_gaps(&per_modality, self.report.multimodal.top1)?;
        Ok(())
    }

    fn predict_pool(&self, pool: &[&MultimodalInstance]) -> Result<Vec<PoolEntry>> {
        pool.iter()
            .map(|x| {
                let p = predict(&self.params, x, &self.w, &self.temps)?;
                Ok(PoolEntry {
                    id: x.id,
                    alphas: p.alphas,
                    fused: p.encoded.fused,
                })
            })
            .collect()
    }
}

fn prepare(cfg: &ExperimentConfig) -> Result<(Dataset, PoolPartition)> {
    cfg.validate()?;
    let dataset = load_dataset(cfg)?;
    let part = stratified_split(&dataset, cfg.val_fraction, cfg.seed_size, &RngStream::new(cfg.seed, "split"))?;
    let need = cfg.budget * cfg.rounds;
    if part.unlabeled.len() < need {
        return Err(Error::BudgetExhausted(format!(
            "pool holds {} samples but {} rounds of {} need {need}",
            part.unlabeled.len(),
            cfg.rounds,
            cfg.budget
        )));
    }
    Ok((dataset, part))
}

fn seconds(since: Instant) -> f64 {
    StageTimings::round_ms(since.elapsed().as_secs_f64())
}

fn save_checkpoint(cfg: &ExperimentConfig, method: &str, round: usize, params: &ModelParams) -> Result<Option<String>> {
    let Some(dir) = &cfg.checkpoint_dir else {
        return Ok(None);
    };
    std::fs::create_dir_all(dir)?;
    let name = format!("{method}-seed{}-round{round:03}.json", cfg.seed);
    params.save(&Path::new(dir).join(&name))?;
    Ok(Some(name))
}

/// Round record fields that do not depend on how the batch was chosen.
struct RoundCommon {
    weights: Vec<f64>,
    selected: Vec<usize>,
    candidates: usize,
    timings: StageTimings,
}

fn finish_round(
    cfg: &ExperimentConfig,
    method: &str,
    round: usize,
    learner: &Learner,
    dataset: &Dataset,
    part: &PoolPartition,
    common: RoundCommon,
) -> Result<RoundRecord> {
    let val = dataset.select(&part.validation);
    let shapley = shapley_contributions(&learner.params, &val, &learner.temps, &learner.w)?;
    Ok(RoundRecord {
        round,
        weights: common.weights,
        delta: learner.delta.as_slice().to_vec(),
        next_weights: Vec::new(),
        val: learner.report.multimodal,
        modality_top1: learner.report.modality.iter().map(|r| r.top1).collect(),
        temperatures: learner.temps.as_slice().to_vec(),
        reward: None,
        state: Vec::new(),
        log_prob: None,
        selected: common.selected,
        candidates: common.candidates,
        labeled: part.labeled.len(),
        unlabeled: part.unlabeled.len(),
        phi: shapley.phi,
        train: learner.diag,
        checkpoint: save_checkpoint(cfg, method, round, &learner.params)?,
        timings: common.timings,
    })
}

fn summary(
    cfg: &ExperimentConfig,
    method: &str,
    initial_top1: f64,
    initial_weights: Vec<f64>,
    learner: &Learner,
    part: &PoolPartition,
    reward_mode: Option<String>,
) -> EpisodeSummary {
    EpisodeSummary {
        method: method.to_string(),
        seed: cfg.seed,
        rounds: cfg.rounds,
        initial_top1,
        final_top1: learner.report.multimodal.top1,
        initial_weights,
        final_weights: learner.w.as_slice().to_vec(),
        labeled: part.labeled.len(),
        reward_mode,
    }
}

/// Runs the policy-driven episode, loading relative-reward curves from
/// `cfg.reward.curves`.
pub fn run_episode(cfg: &ExperimentConfig) -> Result<EpisodeOutcome> {
    let curves = cfg
        .reward
        .curves
        .iter()
        .map(|p| LearningCurve::load(p))
        .collect::<Result<Vec<_>>>()?;
    run_episode_with_curves(cfg, curves)
}

/// Runs the policy-driven episode with in-memory baseline curves.
pub fn run_episode_with_curves(cfg: &ExperimentConfig, curves: Vec<LearningCurve>) -> Result<EpisodeOutcome> {
    let (dataset, mut part) = prepare(cfg)?;
    let m = dataset.modalities();
    let root = RngStream::new(cfg.seed, "episode");
    let mut learner = Learner::start(cfg, &dataset, &part)?;
    let initial_top1 = learner.report.multimodal.top1;
    let initial_weights = learner.w.as_slice().to_vec();

    let mut tracker = RewardTracker::new(cfg.reward.mode, cfg.reward.ema, cfg.policy.clip, curves, initial_top1)?;
    let mut policy = PolicyParams::new(
        crate::policy::state_len(m) + m + 3,
        cfg.policy.hidden,
        &root.child("policy/init"),
    );
    let mut history = StateHistory::new();
    let mut rounds = Vec::with_capacity(cfg.rounds);

    for t in 1..=cfg.rounds {
        let stream = root.child(&format!("round{t}"));
        let mut timings = StageTimings::default();
        let w_used = learner.w.clone();

        let clock = Instant::now();
        let pool = learner.predict_pool(&dataset.select(&part.unlabeled))?;
        timings.pred = seconds(clock);

        let clock = Instant::now();
        let points: Vec<Vec<f64>> = pool.iter().map(|e| e.fused.clone()).collect();
        let fit = budgeted_kmeanspp(&points, cfg.budget, cfg.kmeans_iters, &stream.child("kmeans"))?;
        let scored = score_pool(&pool, &learner.w, &fit.centroids, cfg.beta)?;
        let state = build_state(
            &learner.report.multimodal,
            &learner.delta,
            &learner.w,
            &scored,
            &learner.diag,
            &mut history,
        );
        let cands = candidate_set(&scored, cfg.budget, cfg.kappa)?;
        let feats: Vec<Vec<f64>> = cands
            .ids
            .iter()
            .map(|id| {
                let item = scored
                    .get(*id)
                    .ok_or_else(|| Error::Precondition(format!("candidate {id} missing from scored pool")))?;
                Ok(candidate_features(item, &learner.w))
            })
            .collect::<Result<_>>()?;
        let logits = policy.logits(&state.values, &feats)?;
        let action = sample_batch(&logits, &cands.ids, cfg.budget, &mut stream.child("sample").rng())?;
        timings.sel = seconds(clock);

        part.acquire(&action.ids)?;

        let clock = Instant::now();
        learner.retrain(&dataset, &part)?;
        timings.train = seconds(clock);

        let clock = Instant::now();
        learner.validate(&dataset, &part)?;
        timings.val = seconds(clock);

        let clock = Instant::now();
        let trace = tracker.observe(learner.report.multimodal.top1, t)?;
        policy = reinforce_update(&policy, &state, &feats, &action, trace.advantage, cfg.policy.lr)?;
        timings.policy_update = seconds(clock);

        let mut record = finish_round(
            cfg,
            RL_METHOD,
            t,
            &learner,
            &dataset,
            &part,
            RoundCommon {
                weights: w_used.as_slice().to_vec(),
                selected: action.ids.clone(),
                candidates: cands.len(),
                timings,
            },
        )?;
        learner.w = update_weights(&learner.delta, cfg.tau, cfg.epsilon)?;
        record.next_weights = learner.w.as_slice().to_vec();
        record.reward = Some(trace);
        record.state = state.raw;
        record.log_prob = Some(action.log_prob);
        rounds.push(record);
    }

    let log = EpisodeLog {
        summary: summary(
            cfg,
            RL_METHOD,
            initial_top1,
            initial_weights,
            &learner,
            &part,
            Some(cfg.reward.mode.to_string()),
        ),
        rounds,
    };
    Ok(EpisodeOutcome {
        curve: log.curve(),
        log,
        params: learner.params,
        policy: Some(policy),
    })
}

/// Same loop with `strategy` choosing each batch. Weighting, training and
/// validation are unchanged.
pub fn run_baseline_episode(cfg: &ExperimentConfig, strategy: Strategy) -> Result<EpisodeOutcome> {
    let (dataset, mut part) = prepare(cfg)?;
    let root = RngStream::new(cfg.seed, format!("baseline/{strategy}"));
    let mut learner = Learner::start(cfg, &dataset, &part)?;
    let initial_top1 = learner.report.multimodal.top1;
    let initial_weights = learner.w.as_slice().to_vec();
    let mut rounds = Vec::with_capacity(cfg.rounds);

    for t in 1..=cfg.rounds {
        let stream = root.child(&format!("round{t}"));
        let mut timings = StageTimings::default();
        let w_used = learner.w.clone();

        let clock = Instant::now();
        let unlabeled = dataset.select(&part.unlabeled);
        let entries: Vec<BaselineEntry> = unlabeled
            .iter()
            .map(|x| {
                let p = predict(&learner.params, x, &learner.w, &learner.temps)?;
                Ok(BaselineEntry {
                    id: x.id,
                    fused_probs: fuse_evidence(&p.alphas, &learner.w)?.expected_probs(),
                    head_probs: p.fusion_probs,
                    fused: p.encoded.fused,
                })
            })
            .collect::<Result<_>>()?;
        let labeled_features = if strategy == Strategy::Coreset {
            dataset
                .select(&part.labeled)
                .iter()
                .map(|x| Ok(predict(&learner.params, x, &learner.w, &learner.temps)?.encoded.fused))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        timings.pred = seconds(clock);

        let clock = Instant::now();
        let selected = select_baseline(strategy, &entries, &labeled_features, cfg.budget, &stream.child("select"))?;
        timings.sel = seconds(clock);

        part.acquire(&selected)?;

        let clock = Instant::now();
        learner.retrain(&dataset, &part)?;
        timings.train = seconds(clock);

        let clock = Instant::now();
        learner.validate(&dataset, &part)?;
        timings.val = seconds(clock);

        let mut record = finish_round(
            cfg,
            strategy.name(),
            t,
            &learner,
            &dataset,
            &part,
            RoundCommon {
                weights: w_used.as_slice().to_vec(),
                selected,
                candidates: entries.len(),
                timings,
            },
        )?;
        learner.w = update_weights(&learner.delta, cfg.tau, cfg.epsilon)?;
        record.next_weights = learner.w.as_slice().to_vec();
        rounds.push(record);
    }

    let log = EpisodeLog {
        summary: summary(cfg, strategy.name(), initial_top1, initial_weights, &learner, &part, None),
        rounds,
    };
    Ok(EpisodeOutcome {
        curve: log.curve(),
        log,
        params: learner.params,
        policy: None,
    })
}
