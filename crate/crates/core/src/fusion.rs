//! Weighted-mean fusion of the per-model probabilities.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::category::Source;
use crate::score::{Probability, ProbabilityScore};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FusionError {
    #[error("no score with positive weight to fuse")]
    NoUsableScores,
    #[error("missing scores for {}", list(.0))]
    MissingSource(Vec<Source>),
    #[error("`{0}` is not a fusable source")]
    UnknownSource(Source),
    #[error("source `{0}` given more than once")]
    DuplicateSource(Source),
    #[error("invalid fusion config: {0}")]
    InvalidConfig(String),
}

fn list(sources: &[Source]) -> String {
    sources.iter().map(|s| s.id()).collect::<Vec<_>>().join(", ")
}

impl FusionError {
    pub fn code(&self) -> &'static str {
        match self {
            FusionError::NoUsableScores => "NoUsableScores",
            FusionError::MissingSource(_) => "MissingSource",
            FusionError::UnknownSource(_) => "UnknownSource",
            FusionError::DuplicateSource(_) => "DuplicateSource",
            FusionError::InvalidConfig(_) => "InvalidConfig",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Drop absent sources and renormalize over the rest.
    #[default]
    Renormalize,
    /// Every one of the ten sources must be present.
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FusionConfig {
    weights: BTreeMap<Source, f64>,
    missing_policy: MissingPolicy,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig::equal(MissingPolicy::Renormalize)
    }
}

impl FusionConfig {
    /// Weight 1 for each of the ten sources.
    pub fn equal(missing_policy: MissingPolicy) -> Self {
        FusionConfig {
            weights: Source::model_sources().map(|s| (s, 1.0)).collect(),
            missing_policy,
        }
    }

    /// Needs a finite, non-negative weight for each of the ten sources and at
    /// least one positive weight.
    pub fn new(weights: BTreeMap<Source, f64>, missing_policy: MissingPolicy) -> Result<Self, FusionError> {
        if let Some(bad) = weights.keys().find(|s| **s == Source::Fused) {
            return Err(FusionError::UnknownSource(*bad));
        }
        let missing: Vec<Source> = Source::model_sources().filter(|s| !weights.contains_key(s)).collect();
        if !missing.is_empty() {
            return Err(FusionError::InvalidConfig(format!("no weight for {}", list(&missing))));
        }
        if let Some((s, w)) = weights.iter().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(FusionError::InvalidConfig(format!("weight {w} for `{s}` must be finite and >= 0")));
        }
        if !weights.values().any(|&w| w > 0.0) {
            return Err(FusionError::InvalidConfig("all weights are zero".into()));
        }
        Ok(FusionConfig {
            weights,
            missing_policy,
        })
    }

    pub fn weight(&self, source: Source) -> f64 {
        self.weights.get(&source).copied().unwrap_or(0.0)
    }

    pub fn weights(&self) -> &BTreeMap<Source, f64> {
        &self.weights
    }

    pub fn missing_policy(&self) -> MissingPolicy {
        self.missing_policy
    }

    pub fn from_json(text: &str) -> Result<Self, FusionError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            weights: BTreeMap<Source, f64>,
            #[serde(default)]
            missing_policy: MissingPolicy,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| FusionError::InvalidConfig(e.to_string()))?;
        FusionConfig::new(raw.weights, raw.missing_policy)
    }
}

impl<'de> Deserialize<'de> for FusionConfig {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(deserializer)?;
        FusionConfig::from_json(&v.to_string()).map_err(serde::de::Error::custom)
    }
}

/// Per-source probabilities and their fusion, as returned to the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenResult {
    pub per_source: BTreeMap<Source, Probability>,
    pub fused: Probability,
    /// Sources that contributed with positive weight.
    pub sources_used: BTreeSet<Source>,
    pub timestamp: DateTime<Utc>,
}

impl ScreenResult {
    pub fn fused_score(&self) -> ProbabilityScore {
        ProbabilityScore::new(Source::Fused, self.fused)
    }
}

/// `sum(w_i * s_i) / sum(w_i)` over the provided sources, stamped with `at`.
///
/// Scores are summed in source order, so the result does not depend on the
/// order they are supplied in. The quotient is clamped into the range of the
/// contributing scores, which the exact weighted mean always lies in.
pub fn fuse_at(
    scores: impl IntoIterator<Item = ProbabilityScore>,
    cfg: &FusionConfig,
    at: DateTime<Utc>,
) -> Result<ScreenResult, FusionError> {
    let mut per_source = BTreeMap::new();
    for s in scores {
        if s.source == Source::Fused {
            return Err(FusionError::UnknownSource(s.source));
        }
        if per_source.insert(s.source, s.value).is_some() {
            return Err(FusionError::DuplicateSource(s.source));
        }
    }
    if cfg.missing_policy == MissingPolicy::Fail {
        let missing: Vec<Source> = Source::model_sources().filter(|s| !per_source.contains_key(s)).collect();
        if !missing.is_empty() {
            return Err(FusionError::MissingSource(missing));
        }
    }

    let mut num = 0.0;
    let mut den = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut sources_used = BTreeSet::new();
    for (&source, p) in &per_source {
        let w = cfg.weight(source);
        if w <= 0.0 {
            continue;
        }
        let s = p.value();
        num += w * s;
        den += w;
        lo = lo.min(s);
        hi = hi.max(s);
        sources_used.insert(source);
    }
    if sources_used.is_empty() {
        return Err(FusionError::NoUsableScores);
    }
    let fused = Probability::new((num / den).clamp(lo, hi)).expect("mean of probabilities");
    Ok(ScreenResult {
        per_source,
        fused,
        sources_used,
        timestamp: at,
    })
}

/// [`fuse_at`] stamped with the current time.
pub fn fuse(scores: impl IntoIterator<Item = ProbabilityScore>, cfg: &FusionConfig) -> Result<ScreenResult, FusionError> {
    fuse_at(scores, cfg, Utc::now())
}
