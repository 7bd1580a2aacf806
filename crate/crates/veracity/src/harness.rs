//! Pipeline orchestration: ingestion, per-record classification,
//! aggregation into reports, the four-case experiment, and the paired
//! t-test comparing Permissive and Restrictive Veracity sensitivity.
//!
//! All aggregation is sequential in record order, so identical inputs
//! yield bit-identical reports.

use std::collections::BTreeMap;
use std::io::Cursor;

use serde::ser::SerializeMap;
use serde::Serialize;
use sha2::{Digest, Sha256};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::ground_truth::{derive_preferences, load_item_features, load_ratings, verdict};
use crate::outcome::{classify_record, CombinerMode, ExplanationRecord};
use crate::report::{round6, Counts, InputProvenance, MetricBlock, MetricReport, ParamsReport};
use crate::sdt::ConfusionMatrix;
use crate::synthesis::{generate, CasePreset, GeneratorParams, SyntheticDataset};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalOptions {
    pub modes: Vec<CombinerMode>,
    pub like_threshold: u8,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            modes: CombinerMode::ALL.to_vec(),
            like_threshold: 3,
        }
    }
}

impl EvalOptions {
    fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::InvalidParams(
                "at least one combiner mode required".into(),
            ));
        }
        Ok(())
    }
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Parses explanations.jsonl: one object per line with exactly the fields
/// user, item, feature, claim_has, claim_likes. Blank lines are skipped.
pub fn load_explanations(bytes: &[u8], source_name: &str) -> Result<Vec<ExplanationRecord>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        source_name: source_name.to_string(),
        line: 0,
        message: format!("not valid UTF-8: {e}"),
    })?;
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: ExplanationRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            source_name: source_name.to_string(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        record.validate().map_err(|message| Error::Parse {
            source_name: source_name.to_string(),
            line: idx + 1,
            message,
        })?;
        records.push(record);
    }
    Ok(records)
}

struct Pipeline {
    fidelity: ConfusionMatrix,
    attunement: ConfusionMatrix,
    veracity: BTreeMap<CombinerMode, ConfusionMatrix>,
    total_records: u64,
    excluded_unknown_preference: u64,
    unknown_items: u64,
}

fn run_pipeline(
    items: &[u8],
    ratings: &[u8],
    explanations: &[ExplanationRecord],
    items_name: &str,
    ratings_name: &str,
    opts: &EvalOptions,
) -> Result<(Pipeline, u64)> {
    let store = load_item_features(Cursor::new(items), items_name)?;
    let rating_events = load_ratings(Cursor::new(ratings), ratings_name)?;
    let prefs = derive_preferences(&rating_events, &store, opts.like_threshold)?;

    let mut state = Pipeline {
        fidelity: ConfusionMatrix::new(),
        attunement: ConfusionMatrix::new(),
        veracity: opts
            .modes
            .iter()
            .map(|&m| (m, ConfusionMatrix::new()))
            .collect(),
        total_records: 0,
        excluded_unknown_preference: 0,
        unknown_items: 0,
    };

    for record in explanations {
        let v = verdict(&store, &prefs, &record.item, &record.feature, &record.user);
        if !store.known_item(&record.item) {
            state.unknown_items += 1;
        }
        let outcome = classify_record(record, &v, &opts.modes);
        state.total_records += 1;
        state
            .fidelity
            .accumulate(&crate::sdt::OutcomeMass::pure(outcome.fidelity));
        match outcome.attunement {
            Some(att) => {
                state
                    .attunement
                    .accumulate(&crate::sdt::OutcomeMass::pure(att));
                for (mode, mass) in &outcome.veracity {
                    state
                        .veracity
                        .get_mut(mode)
                        .expect("mode matrices prebuilt")
                        .accumulate(mass);
                }
            }
            None => state.excluded_unknown_preference += 1,
        }
    }
    Ok((state, prefs.orphaned_ratings()))
}

fn build_report(
    state: Pipeline,
    orphaned_ratings: u64,
    inputs: InputProvenance,
    params: Option<ParamsReport>,
) -> MetricReport {
    MetricReport {
        inputs,
        params,
        counts: Counts {
            total_records: state.total_records,
            excluded_unknown_preference: state.excluded_unknown_preference,
            orphaned_ratings,
            unknown_items: state.unknown_items,
        },
        fidelity: MetricBlock::from_matrix(&state.fidelity),
        attunement: MetricBlock::from_matrix(&state.attunement),
        veracity: state
            .veracity
            .iter()
            .map(|(mode, matrix)| (mode.label().to_string(), MetricBlock::from_matrix(matrix)))
            .collect(),
    }
}

fn provenance(
    items: &[u8],
    ratings: &[u8],
    explanations: &[u8],
    seed: Option<u64>,
    opts: &EvalOptions,
) -> InputProvenance {
    InputProvenance {
        tool_version: TOOL_VERSION.to_string(),
        items_digest: digest(items),
        ratings_digest: digest(ratings),
        explanations_digest: digest(explanations),
        seed,
        modes: opts.modes.iter().map(|m| m.label().to_string()).collect(),
        threshold: opts.like_threshold,
    }
}

/// Full evaluation over raw input bytes. Names are used in parse errors.
pub fn evaluate_bytes(
    items: &[u8],
    ratings: &[u8],
    explanations: &[u8],
    names: [&str; 3],
    opts: &EvalOptions,
) -> Result<MetricReport> {
    opts.validate()?;
    let records = load_explanations(explanations, names[2])?;
    let (state, orphaned) = run_pipeline(items, ratings, &records, names[0], names[1], opts)?;
    let inputs = provenance(items, ratings, explanations, None, opts);
    Ok(build_report(state, orphaned, inputs, None))
}

/// One classified record in the diagnostic per-record stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordRow {
    pub index: usize,
    pub user: String,
    pub item: String,
    pub feature: String,
    pub fidelity: String,
    /// `None` when the user preference was Unknown.
    pub attunement: Option<String>,
    pub excluded: bool,
    #[serde(serialize_with = "serialize_veracity_masses")]
    pub veracity: BTreeMap<String, [f64; 4]>,
}

fn serialize_veracity_masses<S: serde::Serializer>(
    value: &BTreeMap<String, [f64; 4]>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(value.len()))?;
    for (mode, [h, m, fa, cr]) in value {
        map.serialize_entry(
            mode,
            &serde_json::json!({
                "hit": round6(*h),
                "miss": round6(*m),
                "false_alarm": round6(*fa),
                "correct_rejection": round6(*cr),
            }),
        )?;
    }
    map.end()
}

impl RecordRow {
    pub fn to_csv_row(&self, modes: &[CombinerMode]) -> String {
        let mut cells = vec![
            self.index.to_string(),
            self.user.clone(),
            self.item.clone(),
            self.feature.clone(),
            self.fidelity.clone(),
            self.attunement.clone().unwrap_or_else(|| "excluded".into()),
        ];
        for mode in modes {
            match self.veracity.get(mode.label()) {
                Some([h, m, fa, cr]) => {
                    for v in [h, m, fa, cr] {
                        cells.push(format!("{:.6}", round6(*v)));
                    }
                }
                None => cells.extend(std::iter::repeat_n("n/a".to_string(), 4)),
            }
        }
        cells.join(",")
    }

    pub fn csv_header(modes: &[CombinerMode]) -> String {
        let mut cells = vec![
            "index".to_string(),
            "user".into(),
            "item".into(),
            "feature".into(),
            "fidelity".into(),
            "attunement".into(),
        ];
        for mode in modes {
            for outcome in ["hit", "miss", "false_alarm", "correct_rejection"] {
                cells.push(format!("{}_{outcome}", mode.label()));
            }
        }
        cells.join(",")
    }
}

/// Per-record diagnostic classification, in input order.
pub fn classify_bytes(
    items: &[u8],
    ratings: &[u8],
    explanations: &[u8],
    names: [&str; 3],
    opts: &EvalOptions,
) -> Result<Vec<RecordRow>> {
    opts.validate()?;
    let records = load_explanations(explanations, names[2])?;
    let store = load_item_features(Cursor::new(items), names[0])?;
    let rating_events = load_ratings(Cursor::new(ratings), names[1])?;
    let prefs = derive_preferences(&rating_events, &store, opts.like_threshold)?;

    let rows = records
        .iter()
        .enumerate()
        .map(|(index, record)| {
            let v = verdict(&store, &prefs, &record.item, &record.feature, &record.user);
            let outcome = classify_record(record, &v, &opts.modes);
            RecordRow {
                index,
                user: record.user.clone(),
                item: record.item.clone(),
                feature: record.feature.clone(),
                fidelity: outcome.fidelity.label().to_string(),
                attunement: outcome.attunement.map(|k| k.label().to_string()),
                excluded: outcome.attunement.is_none(),
                veracity: outcome
                    .veracity
                    .iter()
                    .map(|(mode, mass)| {
                        (
                            mode.label().to_string(),
                            [
                                mass.component(crate::sdt::OutcomeKind::Hit),
                                mass.component(crate::sdt::OutcomeKind::Miss),
                                mass.component(crate::sdt::OutcomeKind::FalseAlarm),
                                mass.component(crate::sdt::OutcomeKind::CorrectRejection),
                            ],
                        )
                    })
                    .collect(),
            }
        })
        .collect();
    Ok(rows)
}

/// Generates a dataset and evaluates it through the identical ingestion
/// path used for real files; the report's digests cover the exact bytes
/// that would be persisted.
pub fn simulate(
    params: &GeneratorParams,
    preset: Option<CasePreset>,
    opts: &EvalOptions,
) -> Result<(MetricReport, SyntheticDataset)> {
    opts.validate()?;
    let dataset = generate(params)?;
    let items = dataset.items_tsv();
    let ratings = dataset.ratings_tsv();
    let explanations = dataset.explanations_jsonl();

    let records = load_explanations(&explanations, "explanations.jsonl")?;
    let (state, orphaned) =
        run_pipeline(&items, &ratings, &records, "items.tsv", "ratings.tsv", opts)?;
    let inputs = provenance(&items, &ratings, &explanations, Some(params.seed), opts);
    let params_report = ParamsReport {
        preset: preset.map(|p| p.label().to_string()),
        generator: *params,
    };
    Ok((
        build_report(state, orphaned, inputs, Some(params_report)),
        dataset,
    ))
}

/// Paired t-test summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TTestResult {
    #[serde(serialize_with = "serialize_t_statistic")]
    pub t_statistic: f64,
    pub degrees_of_freedom: u64,
    #[serde(serialize_with = "serialize_p")]
    pub p_value_two_sided: f64,
    pub n_pairs: usize,
    #[serde(serialize_with = "serialize_p")]
    pub mean_difference: f64,
}

fn serialize_t_statistic<S: serde::Serializer>(
    value: &f64,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    // Zero variance with nonzero mean gives an infinite t; JSON numbers
    // cannot hold infinity, so spell it out.
    if value.is_infinite() {
        s.serialize_str(if *value > 0.0 { "+inf" } else { "-inf" })
    } else {
        s.serialize_f64(round6(*value))
    }
}

fn serialize_p<S: serde::Serializer>(value: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(round6(*value))
}

/// Two-sided paired t-test over (a, b) pairs on the differences a - b,
/// with the sample (n-1) standard deviation.
pub fn paired_t_test(pairs: &[(f64, f64)]) -> Result<TTestResult> {
    if pairs.len() < 2 {
        return Err(Error::InsufficientPairs(pairs.len()));
    }
    let n = pairs.len();
    let diffs: Vec<f64> = pairs.iter().map(|(a, b)| a - b).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let variance = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let df = (n - 1) as u64;

    let (t, p) = if variance == 0.0 {
        if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (mean.signum() * f64::INFINITY, 0.0)
        }
    } else {
        let t = mean / (variance.sqrt() / (n as f64).sqrt());
        let dist = StudentsT::new(0.0, 1.0, df as f64)
            .map_err(|e| Error::Invariant(format!("t-distribution construction: {e}")))?;
        let p = 2.0 * dist.sf(t.abs());
        (t, p.clamp(0.0, 1.0))
    };
    Ok(TTestResult {
        t_statistic: t,
        degrees_of_freedom: df,
        p_value_two_sided: p,
        n_pairs: n,
        mean_difference: mean,
    })
}

/// Mean metric values for one case across replicates; `None` when no
/// replicate produced a defined value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanMetrics {
    pub a_prime: Option<f64>,
    pub b_double_prime: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseRow {
    pub case: String,
    pub description: String,
    pub replicates: u32,
    pub fidelity: MeanMetrics,
    pub attunement: MeanMetrics,
    pub veracity: BTreeMap<String, MeanMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub cases: Vec<CaseRow>,
    /// Paired over per-replicate Veracity A' (Permissive - Restrictive),
    /// pooled across cases.
    pub t_test: TTestResult,
    /// Replicates dropped from the pairing because A' was undefined in
    /// either mode.
    pub dropped_pairs: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentOptions {
    pub replicates: u32,
    pub n_records: usize,
    pub base_seed: u64,
    pub modes: Vec<CombinerMode>,
    pub like_threshold: u8,
}

#[derive(Default)]
struct MeanAccumulator {
    sum: f64,
    count: u32,
}

impl MeanAccumulator {
    fn add(&mut self, value: Option<f64>) {
        if let Some(v) = value {
            self.sum += v;
            self.count += 1;
        }
    }

    fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / f64::from(self.count))
    }
}

/// Runs all four case presets for the given number of replicates, with
/// seeds derived as base_seed + case_index * replicates + replicate.
pub fn experiment(opts: &ExperimentOptions) -> Result<ExperimentResult> {
    if opts.replicates < 2 {
        return Err(Error::InvalidParams(format!(
            "experiment requires at least 2 replicates for the paired t-test, got {}",
            opts.replicates
        )));
    }
    for required in [CombinerMode::Restrictive, CombinerMode::Permissive] {
        if !opts.modes.contains(&required) {
            return Err(Error::InvalidParams(format!(
                "experiment requires the {required} mode for the paired t-test"
            )));
        }
    }
    let eval_opts = EvalOptions {
        modes: opts.modes.clone(),
        like_threshold: opts.like_threshold,
    };

    let mut cases = Vec::with_capacity(4);
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    let mut dropped_pairs = 0u64;

    for (case_index, preset) in CasePreset::ALL.into_iter().enumerate() {
        let mut fid_a = MeanAccumulator::default();
        let mut fid_b = MeanAccumulator::default();
        let mut att_a = MeanAccumulator::default();
        let mut att_b = MeanAccumulator::default();
        let mut ver: BTreeMap<CombinerMode, (MeanAccumulator, MeanAccumulator)> = opts
            .modes
            .iter()
            .map(|&m| (m, Default::default()))
            .collect();

        for replicate in 0..opts.replicates {
            let seed = opts
                .base_seed
                .wrapping_add(case_index as u64 * u64::from(opts.replicates))
                .wrapping_add(u64::from(replicate));
            let params = preset.params(opts.n_records, seed);
            let (report, _) = simulate(&params, Some(preset), &eval_opts)?;

            fid_a.add(report.fidelity.metrics.a_prime);
            fid_b.add(report.fidelity.metrics.b_double_prime);
            att_a.add(report.attunement.metrics.a_prime);
            att_b.add(report.attunement.metrics.b_double_prime);
            for (&mode, (acc_a, acc_b)) in ver.iter_mut() {
                let block = &report.veracity[mode.label()];
                acc_a.add(block.metrics.a_prime);
                acc_b.add(block.metrics.b_double_prime);
            }

            let permissive = report.veracity[CombinerMode::Permissive.label()]
                .metrics
                .a_prime;
            let restrictive = report.veracity[CombinerMode::Restrictive.label()]
                .metrics
                .a_prime;
            match (permissive, restrictive) {
                (Some(p), Some(r)) => pairs.push((p, r)),
                _ => dropped_pairs += 1,
            }
        }

        cases.push(CaseRow {
            case: preset.label().to_string(),
            description: preset.description().to_string(),
            replicates: opts.replicates,
            fidelity: MeanMetrics {
                a_prime: fid_a.mean(),
                b_double_prime: fid_b.mean(),
            },
            attunement: MeanMetrics {
                a_prime: att_a.mean(),
                b_double_prime: att_b.mean(),
            },
            veracity: ver
                .iter()
                .map(|(mode, (a, b))| {
                    (
                        mode.label().to_string(),
                        MeanMetrics {
                            a_prime: a.mean(),
                            b_double_prime: b.mean(),
                        },
                    )
                })
                .collect(),
        });
    }

    let t_test = paired_t_test(&pairs)?;
    Ok(ExperimentResult {
        cases,
        t_test,
        dropped_pairs,
    })
}

fn mean_cell(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.6}", round6(v)),
        None => "n/a".to_string(),
    }
}

impl ExperimentResult {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("result serializes");
        out.push('\n');
        out
    }

    /// Four case rows in Table-style layout, followed by t-test summary
    /// comment lines.
    pub fn to_csv(&self) -> String {
        let mode_labels: Vec<&String> = self
            .cases
            .first()
            .map(|c| c.veracity.keys().collect())
            .unwrap_or_default();
        let mut header = String::from(
            "case,description,fidelity_a_prime,fidelity_b_double_prime,attunement_a_prime,attunement_b_double_prime",
        );
        for mode in &mode_labels {
            header.push_str(&format!(
                ",veracity_{mode}_a_prime,veracity_{mode}_b_double_prime"
            ));
        }
        let mut out = header;
        out.push('\n');
        for row in &self.cases {
            out.push_str(&format!(
                "{},\"{}\",{},{},{},{}",
                row.case,
                row.description,
                mean_cell(row.fidelity.a_prime),
                mean_cell(row.fidelity.b_double_prime),
                mean_cell(row.attunement.a_prime),
                mean_cell(row.attunement.b_double_prime),
            ));
            for mode in &mode_labels {
                let m = &row.veracity[*mode];
                out.push_str(&format!(
                    ",{},{}",
                    mean_cell(m.a_prime),
                    mean_cell(m.b_double_prime)
                ));
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "# paired_t_test permissive_vs_restrictive: t={}, df={}, p={:.6}, n_pairs={}, mean_difference={:.6}, dropped={}\n",
            if self.t_test.t_statistic.is_infinite() {
                if self.t_test.t_statistic > 0.0 { "+inf".to_string() } else { "-inf".to_string() }
            } else {
                format!("{:.6}", round6(self.t_test.t_statistic))
            },
            self.t_test.degrees_of_freedom,
            round6(self.t_test.p_value_two_sided),
            self.t_test.n_pairs,
            round6(self.t_test.mean_difference),
            self.dropped_pairs,
        ));
        out
    }
}
