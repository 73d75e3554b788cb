//! JSON-lines episode logs.
//!
//! Every line is an object with a `record` field: `"round"` for per-round
//! entries and `"summary"` for the terminal entry. Readers skip records of
//! other kinds and ignore unknown fields, so older readers keep working on
//! newer logs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::TrainDiagnostics;
use crate::policy::{LearningCurve, RewardTrace};
use crate::types::MetricsReport;

/// The five timed stages of a round, in execution order.
pub const STAGES: [&str; 5] = ["Pred", "Sel", "Train", "Val", "Policy Update"];

/// Wall-clock seconds per stage, rounded to milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    #[serde(rename = "Pred")]
    pub pred: f64,
    #[serde(rename = "Sel")]
    pub sel: f64,
    #[serde(rename = "Train")]
    pub train: f64,
    #[serde(rename = "Val")]
    pub val: f64,
    #[serde(rename = "Policy Update")]
    pub policy_update: f64,
}

impl StageTimings {
    pub fn round_ms(seconds: f64) -> f64 {
        (seconds * 1000.0).round() / 1000.0
    }

    pub fn total(&self) -> f64 {
        self.pred + self.sel + self.train + self.val + self.policy_update
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    /// Fusion weights used for this round's scoring and training.
    pub weights: Vec<f64>,
    /// Contribution gaps measured after this round's training.
    pub delta: Vec<f64>,
    /// Weights derived from `delta`, used by the next round.
    pub next_weights: Vec<f64>,
    /// Multimodal-head validation metrics after training.
    pub val: MetricsReport,
    pub modality_top1: Vec<f64>,
    pub temperatures: Vec<f64>,
    #[serde(default)]
    pub reward: Option<RewardTrace>,
    /// Raw (unstandardized) policy state.
    #[serde(default)]
    pub state: Vec<f64>,
    #[serde(default)]
    pub log_prob: Option<f64>,
    pub selected: Vec<usize>,
    pub candidates: usize,
    pub labeled: usize,
    pub unlabeled: usize,
    pub phi: Vec<f64>,
    pub train: TrainDiagnostics,
    #[serde(default)]
    pub checkpoint: Option<String>,
    #[serde(default)]
    pub timings: StageTimings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    /// `rl-mba` or a baseline strategy name.
    pub method: String,
    pub seed: u64,
    pub rounds: usize,
    pub initial_top1: f64,
    pub final_top1: f64,
    pub initial_weights: Vec<f64>,
    pub final_weights: Vec<f64>,
    pub labeled: usize,
    #[serde(default)]
    pub reward_mode: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
enum Line {
    Round(Box<RoundRecord>),
    Summary(EpisodeSummary),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub rounds: Vec<RoundRecord>,
    pub summary: EpisodeSummary,
}

impl EpisodeLog {
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.rounds {
            out.push_str(&serde_json::to_string(&Line::Round(Box::new(r.clone())))?);
            out.push('\n');
        }
        out.push_str(&serde_json::to_string(&Line::Summary(self.summary.clone()))?);
        out.push('\n');
        Ok(out)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut rounds = Vec::new();
        let mut summary = None;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let value: serde_json::Value = serde_json::from_str(line)
                .map_err(|e| Error::Parse(format!("log line {}: {e}", n + 1)))?;
            match value.get("record").and_then(|r| r.as_str()) {
                Some("round") | Some("summary") => {}
                _ => continue,
            }
            match serde_json::from_value(value)
                .map_err(|e| Error::Parse(format!("log line {}: {e}", n + 1)))?
            {
                Line::Round(r) => rounds.push(*r),
                Line::Summary(s) => summary = Some(s),
            }
        }
        let summary = summary.ok_or_else(|| Error::Parse("log has no summary record".into()))?;
        Ok(Self { rounds, summary })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_jsonl()?)?;
        Ok(())
    }

    /// Copy with every timing zeroed, for reproducibility comparisons.
    pub fn without_timings(&self) -> Self {
        let mut out = self.clone();
        for r in &mut out.rounds {
            r.timings = StageTimings::default();
        }
        out
    }

    /// Validation Top-1 per round.
    pub fn curve(&self) -> LearningCurve {
        LearningCurve::new(
            self.summary.method.clone(),
            self.rounds.iter().map(|r| (r.round, r.val.top1)),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EpisodeLog {
        let round = RoundRecord {
            round: 1,
            weights: vec![0.5, 0.5],
            delta: vec![0.1, -0.2],
            next_weights: vec![0.6, 0.4],
            val: MetricsReport {
                top1: 0.4,
                nll: 1.2,
                ece: 0.05,
            },
            modality_top1: vec![0.5, 0.2],
            temperatures: vec![1.0, 2.0],
            reward: None,
            state: vec![0.0; 9],
            log_prob: Some(-3.2),
            selected: vec![4, 9],
            candidates: 10,
            labeled: 12,
            unlabeled: 30,
            phi: vec![0.2, 0.1],
            train: TrainDiagnostics {
                loss_slope: -0.1,
                grad_norm: 0.3,
                final_loss: 1.5,
            },
            checkpoint: None,
            timings: StageTimings {
                pred: 0.012,
                sel: 0.003,
                train: 0.2,
                val: 0.05,
                policy_update: 0.001,
            },
        };
        EpisodeLog {
            rounds: vec![round],
            summary: EpisodeSummary {
                method: "rl-mba".into(),
                seed: 3,
                rounds: 1,
                initial_top1: 0.3,
                final_top1: 0.4,
                initial_weights: vec![0.5, 0.5],
                final_weights: vec![0.6, 0.4],
                labeled: 12,
                reward_mode: Some("absolute".into()),
            },
        }
    }

    #[test]
    fn round_trip() {
        let log = sample();
        let text = log.to_jsonl().unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(EpisodeLog::parse(&text).unwrap(), log);
    }

    #[test]
    fn timing_keys_are_stage_names() {
        let text = sample().to_jsonl().unwrap();
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        let keys: Vec<&str> = first["timings"].as_object().unwrap().keys().map(String::as_str).collect();
        let mut want = STAGES.to_vec();
        want.sort_unstable();
        let mut got = keys.clone();
        got.sort_unstable();
        assert_eq!(got, want);
    }

    #[test]
    fn unknown_fields_and_records_are_ignored() {
        let text = sample().to_jsonl().unwrap();
        let mut extended = String::from("{\"record\":\"header\",\"version\":9}\n");
        for line in text.lines() {
            let mut v: serde_json::Value = serde_json::from_str(line).unwrap();
            v["future_field"] = serde_json::json!({"x": 1});
            extended.push_str(&v.to_string());
            extended.push('\n');
        }
        assert_eq!(EpisodeLog::parse(&extended).unwrap(), sample());
    }

    #[test]
    fn missing_summary_is_an_error() {
        let text = sample().to_jsonl().unwrap();
        let first = text.lines().next().unwrap();
        assert!(EpisodeLog::parse(first).is_err());
    }
}
