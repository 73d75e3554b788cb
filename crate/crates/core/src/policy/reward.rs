//! Round rewards, exponential smoothing and the moving-average baseline.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const DEFAULT_EMA: f64 = 0.9;
pub const DEFAULT_CLIP: f64 = 1.0;

/// Header line of a learning-curve file.
pub const CURVE_HEADER: &str = "round,top1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardMode {
    Relative,
    Absolute,
    Incremental,
}

impl RewardMode {
    pub const ALL: [RewardMode; 3] = [RewardMode::Relative, RewardMode::Absolute, RewardMode::Incremental];

    pub fn name(self) -> &'static str {
        match self {
            RewardMode::Relative => "relative",
            RewardMode::Absolute => "absolute",
            RewardMode::Incremental => "incremental",
        }
    }
}

impl fmt::Display for RewardMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RewardMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relative" => Ok(RewardMode::Relative),
            "absolute" => Ok(RewardMode::Absolute),
            "incremental" => Ok(RewardMode::Incremental),
            other => Err(invalid(format!("unknown reward mode '{other}'"))),
        }
    }
}

/// Validation Top-1 per round of a precomputed strategy run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub name: String,
    pub top1: BTreeMap<usize, f64>,
}

impl LearningCurve {
    pub fn new(name: impl Into<String>, points: impl IntoIterator<Item = (usize, f64)>) -> Self {
        Self {
            name: name.into(),
            top1: points.into_iter().collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CURVE_HEADER);
        out.push('\n');
        for (round, top1) in &self.top1 {
            out.push_str(&format!("{round},{top1}\n"));
        }
        out
    }

    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == CURVE_HEADER => {}
            _ => return Err(Error::Parse(format!("curve file must start with '{CURVE_HEADER}'"))),
        }
        let mut top1 = BTreeMap::new();
        for line in lines {
            let (r, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad curve row '{line}'")))?;
            let round: usize = r.trim().parse().map_err(|_| Error::Parse(format!("bad round '{r}'")))?;
            let value: f64 = v.trim().parse().map_err(|_| Error::Parse(format!("bad top1 '{v}'")))?;
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::Parse(format!("top1 {value} outside [0,1]")));
            }
            if top1.insert(round, value).is_some() {
                return Err(Error::Parse(format!("round {round} listed twice")));
            }
        }
        Ok(Self {
            name: name.into(),
            top1,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::parse(name, &std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// One round's reward bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardTrace {
    pub mode: RewardMode,
    pub raw: f64,
    pub smoothed: f64,
    pub baseline: f64,
    /// Clipped `smoothed - baseline`.
    pub advantage: f64,
}

/// Raw reward before smoothing.
pub fn raw_reward(
    mode: RewardMode,
    top1: f64,
    round: usize,
    curves: &[LearningCurve],
    previous_top1: f64,
) -> Result<f64> {
    match mode {
        RewardMode::Absolute => Ok(top1),
        RewardMode::Incremental => Ok(top1 - previous_top1),
        RewardMode::Relative => {
            if curves.is_empty() {
                return Err(Error::Config("relative reward needs at least one baseline curve".into()));
            }
            let mut sum = 0.0;
            for c in curves {
                sum += c.top1.get(&round).copied().ok_or_else(|| {
                    Error::Config(format!("baseline curve '{}' has no round {round}", c.name))
                })?;
            }
            Ok(top1 - sum / curves.len() as f64)
        }
    }
}

/// Tracks smoothing, baseline and previous accuracy across an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardTracker {
    pub mode: RewardMode,
    pub ema: f64,
    pub clip: f64,
    curves: Vec<LearningCurve>,
    previous_top1: f64,
    smoothed: Option<f64>,
    smoothed_sum: f64,
    rounds: usize,
}

impl RewardTracker {
    /// `initial_top1` is the validation accuracy before the first acquisition.
    pub fn new(mode: RewardMode, ema: f64, clip: f64, curves: Vec<LearningCurve>, initial_top1: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&ema) {
            return Err(invalid("ema coefficient must be in [0,1)"));
        }
        if !(clip.is_finite() && clip > 0.0) {
            return Err(invalid("clip must be positive"));
        }
        if mode == RewardMode::Relative && curves.is_empty() {
            return Err(Error::Config("relative reward needs at least one baseline curve".into()));
        }
        Ok(Self {
            mode,
            ema,
            clip,
            curves,
            previous_top1: initial_top1,
            smoothed: None,
            smoothed_sum: 0.0,
            rounds: 0,
        })
    }

    /// Records round `round`'s validation Top-1 and returns its trace.
    pub fn observe(&mut self, top1: f64, round: usize) -> Result<RewardTrace> {
        let raw = raw_reward(self.mode, top1, round, &self.curves, self.previous_top1)?;
        let prev = self.smoothed.unwrap_or(raw);
        let smoothed = self.ema * prev + (1.0 - self.ema) * raw;
        let baseline = if self.rounds == 0 {
            0.0
        } else {
            self.smoothed_sum / self.rounds as f64
        };
        let advantage = (smoothed - baseline).clamp(-self.clip, self.clip);
        self.previous_top1 = top1;
        self.smoothed = Some(smoothed);
        self.smoothed_sum += smoothed;
        self.rounds += 1;
        Ok(RewardTrace {
            mode: self.mode,
            raw,
            smoothed,
            baseline,
            advantage,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_with_zero_curves_is_accuracy() {
        let zero = LearningCurve::new("z", (1..=3).map(|r| (r, 0.0)));
        assert_eq!(raw_reward(RewardMode::Relative, 0.61, 2, &[zero], 0.0).unwrap(), 0.61);
    }

    #[test]
    fn relative_against_three_curves() {
        let curves = vec![
            LearningCurve::new("a", [(4, 0.46)]),
            LearningCurve::new("b", [(4, 0.47)]),
            LearningCurve::new("c", [(4, 0.45)]),
        ];
        let r = raw_reward(RewardMode::Relative, 0.48, 4, &curves, 0.0).unwrap();
        assert!((r - 0.02).abs() < 1e-12);
    }

    #[test]
    fn relative_without_curves_is_config_error() {
        assert!(matches!(
            raw_reward(RewardMode::Relative, 0.5, 1, &[], 0.0),
            Err(Error::Config(_))
        ));
        assert!(RewardTracker::new(RewardMode::Relative, 0.9, 1.0, vec![], 0.0).is_err());
        let c = LearningCurve::new("a", [(1, 0.4)]);
        assert!(raw_reward(RewardMode::Relative, 0.5, 2, &[c], 0.0).is_err());
    }

    #[test]
    fn incremental_flat_curve_is_zero() {
        let mut t = RewardTracker::new(RewardMode::Incremental, 0.9, 1.0, vec![], 0.3).unwrap();
        let first = t.observe(0.5, 1).unwrap();
        assert!((first.raw - 0.2).abs() < 1e-15);
        for round in 2..6 {
            assert_eq!(t.observe(0.5, round).unwrap().raw, 0.0);
        }
    }

    #[test]
    fn smoothing_and_baseline() {
        let mut t = RewardTracker::new(RewardMode::Absolute, 0.5, 0.05, vec![], 0.0).unwrap();
        let a = t.observe(0.4, 1).unwrap();
        assert_eq!(a.smoothed, 0.4);
        assert_eq!(a.baseline, 0.0);
        assert_eq!(a.advantage, 0.05);
        let b = t.observe(0.6, 2).unwrap();
        assert!((b.smoothed - 0.5).abs() < 1e-15);
        assert_eq!(b.baseline, 0.4);
        assert!((b.advantage - 0.05).abs() < 1e-15);
        let c = t.observe(0.0, 3).unwrap();
        assert!((c.smoothed - 0.25).abs() < 1e-15);
        assert!((c.baseline - 0.45).abs() < 1e-15);
        assert!((c.advantage + 0.05).abs() < 1e-15);
    }

    #[test]
    fn curve_file_round_trip_and_errors() {
        let c = LearningCurve::new("random", [(1, 0.25), (2, 0.5)]);
        let parsed = LearningCurve::parse("random", &c.to_csv()).unwrap();
        assert_eq!(parsed, c);
        assert!(LearningCurve::parse("x", "round,acc\n1,0.5\n").is_err());
        assert!(LearningCurve::parse("x", "round,top1\n1,1.5\n").is_err());
        assert!(LearningCurve::parse("x", "round,top1\n1,0.5\n1,0.6\n").is_err());
    }
}
