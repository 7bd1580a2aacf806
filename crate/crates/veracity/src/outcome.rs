//! Per-record classification: each explanation statement becomes a
//! Fidelity outcome and an Attunement outcome, and the pair is fused into
//! a Veracity outcome mass under one of three combiner modes.
//!
//! Records whose user preference cannot be established are classified for
//! Fidelity only; they carry no Attunement or Veracity mass.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::sdt::{OutcomeKind, OutcomeMass};

/// One explanation statement of the form "this item has feature F, which
/// you may like", with either clause possibly asserted negatively.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplanationRecord {
    pub user: String,
    pub item: String,
    pub feature: String,
    pub claim_has: bool,
    pub claim_likes: bool,
}

impl ExplanationRecord {
    /// All three identifiers must be non-empty.
    pub fn validate(&self) -> Result<(), String> {
        for (name, value) in [
            ("user", &self.user),
            ("item", &self.item),
            ("feature", &self.feature),
        ] {
            if value.is_empty() {
                return Err(format!("field '{name}' must be non-empty"));
            }
        }
        Ok(())
    }
}

/// Established user stance toward a feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preference {
    Liked,
    Disliked,
    Unknown,
}

/// What is actually true about the item and the user.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundTruthVerdict {
    pub item_has_feature: bool,
    pub user_preference: Preference,
}

/// Rule for resolving mixed-correctness Fidelity/Attunement pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombinerMode {
    /// Full weight to the incorrect outcome.
    Restrictive,
    /// Half weight to each side.
    Balanced,
    /// Full weight to the correct outcome.
    Permissive,
}

impl CombinerMode {
    pub const ALL: [CombinerMode; 3] = [
        CombinerMode::Restrictive,
        CombinerMode::Balanced,
        CombinerMode::Permissive,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CombinerMode::Restrictive => "restrictive",
            CombinerMode::Balanced => "balanced",
            CombinerMode::Permissive => "permissive",
        }
    }
}

impl fmt::Display for CombinerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CombinerMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "restrictive" => Ok(CombinerMode::Restrictive),
            "balanced" => Ok(CombinerMode::Balanced),
            "permissive" => Ok(CombinerMode::Permissive),
            other => Err(format!(
                "unknown combiner mode '{other}' (expected restrictive, balanced, or permissive)"
            )),
        }
    }
}

/// Classification result for one record. `attunement` is `None` when the
/// user preference was Unknown, in which case `veracity` is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordOutcome {
    pub fidelity: OutcomeKind,
    pub attunement: Option<OutcomeKind>,
    pub veracity: BTreeMap<CombinerMode, OutcomeMass>,
}

impl RecordOutcome {
    pub fn included_in_attunement(&self) -> bool {
        self.attunement.is_some()
    }
}

fn classify(response: bool, signal: bool) -> OutcomeKind {
    match (signal, response) {
        (true, true) => OutcomeKind::Hit,
        (true, false) => OutcomeKind::Miss,
        (false, true) => OutcomeKind::FalseAlarm,
        (false, false) => OutcomeKind::CorrectRejection,
    }
}

/// Fidelity outcome: signal is "item truly has the feature", response is
/// the explanation's claim about it.
pub fn classify_fidelity(claims_item_has_feature: bool, item_has_feature: bool) -> OutcomeKind {
    classify(claims_item_has_feature, item_has_feature)
}

/// Attunement outcome: signal is "user likes the feature". Returns `None`
/// when the preference is Unknown; the record is excluded from Attunement.
pub fn classify_attunement(
    claims_user_likes_feature: bool,
    preference: Preference,
) -> Option<OutcomeKind> {
    match preference {
        Preference::Unknown => None,
        Preference::Liked => Some(classify(claims_user_likes_feature, true)),
        Preference::Disliked => Some(classify(claims_user_likes_feature, false)),
    }
}

/// Fuses a Fidelity/Attunement outcome pair into a Veracity mass.
pub fn combine(fidelity: OutcomeKind, attunement: OutcomeKind, mode: CombinerMode) -> OutcomeMass {
    if fidelity == attunement {
        return OutcomeMass::pure(fidelity);
    }
    match (fidelity.is_correct(), attunement.is_correct()) {
        // One Hit and one CorrectRejection, or one Miss and one FalseAlarm:
        // all modes split evenly.
        (true, true) | (false, false) => OutcomeMass::split(fidelity, attunement),
        (fid_correct, _) => {
            let (correct, incorrect) = if fid_correct {
                (fidelity, attunement)
            } else {
                (attunement, fidelity)
            };
            match mode {
                CombinerMode::Restrictive => OutcomeMass::pure(incorrect),
                CombinerMode::Permissive => OutcomeMass::pure(correct),
                CombinerMode::Balanced => OutcomeMass::split(correct, incorrect),
            }
        }
    }
}

/// Classifies one record against ground truth for the requested modes.
pub fn classify_record(
    record: &ExplanationRecord,
    verdict: &GroundTruthVerdict,
    modes: &[CombinerMode],
) -> RecordOutcome {
    debug_assert!(!modes.is_empty());
    let fidelity = classify_fidelity(record.claim_has, verdict.item_has_feature);
    let attunement = classify_attunement(record.claim_likes, verdict.user_preference);
    let veracity = match attunement {
        Some(att) => modes
            .iter()
            .map(|&mode| (mode, combine(fidelity, att, mode)))
            .collect(),
        None => BTreeMap::new(),
    };
    RecordOutcome {
        fidelity,
        attunement,
        veracity,
    }
}
