//! Objective information-quality scoring for explainable-recommender
//! explanations.
//!
//! Each explanation statement ("this item has feature F, which you may
//! like") is classified into signal-detection outcomes along two
//! dimensions: Fidelity (is the item claim true?) and Attunement (is the
//! preference claim true?). The pair is fused into a Veracity outcome
//! under a restrictive, permissive, or balanced combiner, and each
//! dimension's confusion matrix yields nonparametric sensitivity A' and
//! bias B''D.
//!
//! The crate ships a library, a CLI (`veracity`), and a synthetic
//! experiment harness that generates seeded datasets at four quality
//! levels and compares the combiner modes with a paired t-test.

pub mod error;
pub mod ground_truth;
pub mod harness;
pub mod outcome;
pub mod report;
pub mod sdt;
pub mod synthesis;

pub use error::{Error, Result};
pub use harness::{evaluate_bytes, experiment, paired_t_test, simulate, EvalOptions};
pub use outcome::{
    classify_attunement, classify_fidelity, classify_record, combine, CombinerMode,
    ExplanationRecord, GroundTruthVerdict, Preference,
};
pub use sdt::{a_prime, b_double_prime, ConfusionMatrix, OutcomeKind, OutcomeMass, SdtMetrics};
pub use synthesis::{expected_matrix, generate, CasePreset, GeneratorParams};
