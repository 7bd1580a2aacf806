//! Seeded synthetic datasets under a parametric Bernoulli claim-accuracy
//! model, plus the closed-form expectation oracle used to validate the
//! full pipeline.
//!
//! Each record is independent: true item-feature and user-preference
//! states are drawn from the signal prevalences, then the two claims are
//! drawn from the per-state accuracy probabilities. Ground truth uses
//! fresh identifiers per record, and preferences are realized as
//! engineered ratings (5 for Liked, 1 for Disliked) on a dedicated
//! carrier item per (user, feature) pair so the synthetic and real
//! pipelines share one ingestion path.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::outcome::{combine, CombinerMode, ExplanationRecord};
use crate::sdt::{a_prime, b_double_prime, OutcomeKind, OutcomeMass};

/// Parameters of the generative model.
///
/// Accuracy pairs are (q1, q0): the probability of an affirmative claim
/// given the true state is present / absent. Prevalences are the
/// probability that the true state is present.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeneratorParams {
    pub n_records: usize,
    /// (q1_f, q0_f): P(claim_has | item has feature), P(claim_has | not).
    pub fidelity_accuracy: (f64, f64),
    /// (q1_a, q0_a): P(claim_likes | user likes), P(claim_likes | not).
    pub attunement_accuracy: (f64, f64),
    /// (pi_f, pi_a): P(item truly has feature), P(user truly likes it).
    pub signal_prevalence: (f64, f64),
    pub seed: u64,
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("q1_f", self.fidelity_accuracy.0),
            ("q0_f", self.fidelity_accuracy.1),
            ("q1_a", self.attunement_accuracy.0),
            ("q0_a", self.attunement_accuracy.1),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be in [0, 1], got {p}"
                )));
            }
        }
        for (name, p) in [
            ("pi_f", self.signal_prevalence.0),
            ("pi_a", self.signal_prevalence.1),
        ] {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be in open (0, 1), got {p}"
                )));
            }
        }
        if self.n_records == 0 {
            return Err(Error::InvalidParams("n_records must be positive".into()));
        }
        Ok(())
    }
}

/// The four quality cases: claim accuracy at chance or informative on
/// each dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CasePreset {
    /// Both dimensions at chance.
    Case1,
    /// Fidelity informative, attunement at chance.
    Case2,
    /// Attunement informative, fidelity at chance.
    Case3,
    /// Both dimensions informative.
    Case4,
}

const CHANCE: (f64, f64) = (0.5, 0.5);
const ACCURATE: (f64, f64) = (0.9, 0.1);

impl CasePreset {
    pub const ALL: [CasePreset; 4] = [
        CasePreset::Case1,
        CasePreset::Case2,
        CasePreset::Case3,
        CasePreset::Case4,
    ];

    pub fn params(self, n_records: usize, seed: u64) -> GeneratorParams {
        let (fidelity_accuracy, attunement_accuracy) = match self {
            CasePreset::Case1 => (CHANCE, CHANCE),
            CasePreset::Case2 => (ACCURATE, CHANCE),
            CasePreset::Case3 => (CHANCE, ACCURATE),
            CasePreset::Case4 => (ACCURATE, ACCURATE),
        };
        GeneratorParams {
            n_records,
            fidelity_accuracy,
            attunement_accuracy,
            signal_prevalence: (0.5, 0.5),
            seed,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CasePreset::Case1 => "case1",
            CasePreset::Case2 => "case2",
            CasePreset::Case3 => "case3",
            CasePreset::Case4 => "case4",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            CasePreset::Case1 => "random features, random preference capture",
            CasePreset::Case2 => "accurate item features, random preference capture",
            CasePreset::Case3 => "random features, accurate preference capture",
            CasePreset::Case4 => "accurate item features and preference capture",
        }
    }
}

impl fmt::Display for CasePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CasePreset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "case1" => Ok(CasePreset::Case1),
            "case2" => Ok(CasePreset::Case2),
            "case3" => Ok(CasePreset::Case3),
            "case4" => Ok(CasePreset::Case4),
            other => Err(format!("unknown preset '{other}' (expected case1..case4)")),
        }
    }
}

/// A generated dataset in the exact row order it will be serialized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticDataset {
    /// (item_id, feature_id) rows of items.tsv.
    pub items: Vec<(String, String)>,
    /// (user_id, item_id, rating) rows of ratings.tsv.
    pub ratings: Vec<(String, String, u8)>,
    pub explanations: Vec<ExplanationRecord>,
}

impl SyntheticDataset {
    pub fn items_tsv(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (item, feature) in &self.items {
            writeln!(out, "{item}\t{feature}").expect("write to vec");
        }
        out
    }

    pub fn ratings_tsv(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (user, item, rating) in &self.ratings {
            writeln!(out, "{user}\t{item}\t{rating}").expect("write to vec");
        }
        out
    }

    pub fn explanations_jsonl(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for record in &self.explanations {
            let line = serde_json::to_string(record).expect("serialize record");
            writeln!(out, "{line}").expect("write to vec");
        }
        out
    }
}

/// Draws one dataset. Identical seed and params give byte-identical
/// output: the per-record draw order (true states, then claims) is fixed
/// and the ChaCha stream is platform-independent.
pub fn generate(params: &GeneratorParams) -> Result<SyntheticDataset> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (q1_f, q0_f) = params.fidelity_accuracy;
    let (q1_a, q0_a) = params.attunement_accuracy;
    let (pi_f, pi_a) = params.signal_prevalence;

    let mut dataset = SyntheticDataset {
        items: Vec::new(),
        ratings: Vec::new(),
        explanations: Vec::with_capacity(params.n_records),
    };

    for index in 0..params.n_records {
        let item_truly_has = rng.random_bool(pi_f);
        let user_truly_likes = rng.random_bool(pi_a);
        let claim_has = rng.random_bool(if item_truly_has { q1_f } else { q0_f });
        let claim_likes = rng.random_bool(if user_truly_likes { q1_a } else { q0_a });

        let user = format!("u{index}");
        let item = format!("i{index}");
        let feature = format!("f{index}");
        let carrier = format!("c{index}");

        if item_truly_has {
            dataset.items.push((item.clone(), feature.clone()));
        } else {
            // Keep the item known to the store without the probed feature.
            dataset.items.push((item.clone(), format!("x{index}")));
        }
        // Carrier item realizes the preference through the threshold rule.
        dataset.items.push((carrier.clone(), feature.clone()));
        dataset
            .ratings
            .push((user.clone(), carrier, if user_truly_likes { 5 } else { 1 }));
        dataset.explanations.push(ExplanationRecord {
            user,
            item,
            feature,
            claim_has,
            claim_likes,
        });
    }
    Ok(dataset)
}

/// Expected outcome proportions and metrics for one dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedDimension {
    /// Exact outcome probabilities; sums to 1.
    pub mass: OutcomeMass,
    pub hit_rate: Option<f64>,
    pub false_alarm_rate: Option<f64>,
    pub a_prime: Option<f64>,
    pub b_double_prime: Option<f64>,
}

/// Closed-form expectations for fidelity, attunement, and every requested
/// Veracity mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedMatrix {
    pub fidelity: ExpectedDimension,
    pub attunement: ExpectedDimension,
    pub veracity: BTreeMap<CombinerMode, ExpectedDimension>,
}

fn dimension_probabilities(prevalence: f64, accuracy: (f64, f64)) -> [(OutcomeKind, f64); 4] {
    let (q1, q0) = accuracy;
    [
        (OutcomeKind::Hit, prevalence * q1),
        (OutcomeKind::Miss, prevalence * (1.0 - q1)),
        (OutcomeKind::FalseAlarm, (1.0 - prevalence) * q0),
        (
            OutcomeKind::CorrectRejection,
            (1.0 - prevalence) * (1.0 - q0),
        ),
    ]
}

fn dimension_from_probs(probs: &BTreeMap<OutcomeKind, f64>) -> ExpectedDimension {
    let get = |k: OutcomeKind| probs.get(&k).copied().unwrap_or(0.0);
    let (h, m, fa, cr) = (
        get(OutcomeKind::Hit),
        get(OutcomeKind::Miss),
        get(OutcomeKind::FalseAlarm),
        get(OutcomeKind::CorrectRejection),
    );
    let mass = OutcomeMass::new(h, m, fa, cr).expect("probabilities form a distribution");
    let signal = h + m;
    let noise = fa + cr;
    let hit_rate = (signal > 0.0).then(|| h / signal);
    let false_alarm_rate = (noise > 0.0).then(|| fa / noise);
    let (ap, bd) = match (hit_rate, false_alarm_rate) {
        (Some(hr), Some(far)) => (
            Some(a_prime(hr, far).expect("rates in range")),
            b_double_prime(hr, far).expect("rates in range"),
        ),
        _ => (None, None),
    };
    ExpectedDimension {
        mass,
        hit_rate,
        false_alarm_rate,
        a_prime: ap,
        b_double_prime: bd,
    }
}

/// Exact expectations under the generative model: per-dimension outcome
/// probabilities, and per-mode Veracity masses summed over the 16 joint
/// conditions (the two dimensions are independent by construction).
pub fn expected_matrix(params: &GeneratorParams, modes: &[CombinerMode]) -> Result<ExpectedMatrix> {
    params.validate()?;
    let fid_probs = dimension_probabilities(params.signal_prevalence.0, params.fidelity_accuracy);
    let att_probs = dimension_probabilities(params.signal_prevalence.1, params.attunement_accuracy);

    let as_map = |probs: &[(OutcomeKind, f64); 4]| probs.iter().copied().collect();
    let fidelity = dimension_from_probs(&as_map(&fid_probs));
    let attunement = dimension_from_probs(&as_map(&att_probs));

    let mut veracity = BTreeMap::new();
    for &mode in modes {
        let mut probs: BTreeMap<OutcomeKind, f64> =
            OutcomeKind::ALL.iter().map(|&k| (k, 0.0)).collect();
        for &(f_kind, f_p) in &fid_probs {
            for &(a_kind, a_p) in &att_probs {
                let mass = combine(f_kind, a_kind, mode);
                for kind in OutcomeKind::ALL {
                    *probs.get_mut(&kind).unwrap() += f_p * a_p * mass.component(kind);
                }
            }
        }
        veracity.insert(mode, dimension_from_probs(&probs));
    }
    Ok(ExpectedMatrix {
        fidelity,
        attunement,
        veracity,
    })
}
