//! Serializable report structures with stable, golden-file-friendly
//! output: struct key order is canonical, floats are rounded to 6
//! decimals before serialization, and undefined metrics are JSON null
//! with an accompanying reason string (never NaN).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::sdt::{ConfusionMatrix, SdtMetrics};
use crate::synthesis::GeneratorParams;

/// Rounds to 6 decimal places; report floats all pass through here.
pub fn round6(value: f64) -> f64 {
    (value * 1e6).round() / 1e6
}

fn serialize_f64_6<S: serde::Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round6(*value))
}

fn serialize_opt_f64_6<S: serde::Serializer>(value: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match value {
        Some(v) => s.serialize_some(&round6(*v)),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixReport {
    #[serde(serialize_with = "serialize_f64_6")]
    pub hits: f64,
    #[serde(serialize_with = "serialize_f64_6")]
    pub misses: f64,
    #[serde(serialize_with = "serialize_f64_6")]
    pub false_alarms: f64,
    #[serde(serialize_with = "serialize_f64_6")]
    pub correct_rejections: f64,
    pub record_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    #[serde(serialize_with = "serialize_opt_f64_6")]
    pub hr: Option<f64>,
    #[serde(serialize_with = "serialize_opt_f64_6")]
    pub far: Option<f64>,
    #[serde(serialize_with = "serialize_opt_f64_6")]
    pub a_prime: Option<f64>,
    #[serde(serialize_with = "serialize_opt_f64_6")]
    pub b_double_prime: Option<f64>,
}

/// One dimension's confusion matrix and metrics, with reasons for any
/// undefined metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricBlock {
    pub matrix: MatrixReport,
    pub metrics: MetricsReport,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub undefined: BTreeMap<String, String>,
}

impl MetricBlock {
    pub fn from_matrix(matrix: &ConfusionMatrix) -> Self {
        let m: SdtMetrics = matrix.metrics();
        let mut undefined = BTreeMap::new();
        if m.hit_rate.is_none() {
            undefined.insert("hr".into(), "zero signal-trial mass".into());
        }
        if m.false_alarm_rate.is_none() {
            undefined.insert("far".into(), "zero noise-trial mass".into());
        }
        if m.a_prime.is_none() {
            undefined.insert("a_prime".into(), "hit or false-alarm rate undefined".into());
        }
        if m.b_double_prime.is_none() {
            let reason = if m.hit_rate.is_some() && m.false_alarm_rate.is_some() {
                "zero denominator"
            } else {
                "hit or false-alarm rate undefined"
            };
            undefined.insert("b_double_prime".into(), reason.into());
        }
        MetricBlock {
            matrix: MatrixReport {
                hits: matrix.hits(),
                misses: matrix.misses(),
                false_alarms: matrix.false_alarms(),
                correct_rejections: matrix.correct_rejections(),
                record_count: matrix.record_count(),
            },
            metrics: MetricsReport {
                hr: m.hit_rate,
                far: m.false_alarm_rate,
                a_prime: m.a_prime,
                b_double_prime: m.b_double_prime,
            },
            undefined,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub total_records: u64,
    pub excluded_unknown_preference: u64,
    pub orphaned_ratings: u64,
    pub unknown_items: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputProvenance {
    pub tool_version: String,
    pub items_digest: String,
    pub ratings_digest: String,
    pub explanations_digest: String,
    pub seed: Option<u64>,
    pub modes: Vec<String>,
    pub threshold: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamsReport {
    pub preset: Option<String>,
    #[serde(flatten)]
    pub generator: GeneratorParams,
}

/// Full evaluation report: provenance, counts, and metric blocks for
/// fidelity, attunement, and each requested Veracity mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub inputs: InputProvenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsReport>,
    pub counts: Counts,
    pub fidelity: MetricBlock,
    pub attunement: MetricBlock,
    pub veracity: BTreeMap<String, MetricBlock>,
}

fn csv_cell(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.6}", round6(v)),
        None => "n/a".to_string(),
    }
}

impl MetricReport {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    /// Flat CSV: one row per dimension, undefined metrics as "n/a".
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "dimension,hits,misses,false_alarms,correct_rejections,record_count,hr,far,a_prime,b_double_prime\n",
        );
        let mut rows: Vec<(String, &MetricBlock)> = vec![
            ("fidelity".into(), &self.fidelity),
            ("attunement".into(), &self.attunement),
        ];
        for (mode, block) in &self.veracity {
            rows.push((format!("veracity_{mode}"), block));
        }
        for (name, block) in rows {
            out.push_str(&format!(
                "{name},{:.6},{:.6},{:.6},{:.6},{},{},{},{},{}\n",
                round6(block.matrix.hits),
                round6(block.matrix.misses),
                round6(block.matrix.false_alarms),
                round6(block.matrix.correct_rejections),
                block.matrix.record_count,
                csv_cell(block.metrics.hr),
                csv_cell(block.metrics.far),
                csv_cell(block.metrics.a_prime),
                csv_cell(block.metrics.b_double_prime),
            ));
        }
        out
    }
}
