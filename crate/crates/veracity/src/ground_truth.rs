//! Ground truth: item-feature membership, user ratings, and per-(user,
//! feature) preference labels derived by the rating-threshold rule.
//!
//! A rating at or above the threshold marks every feature of the rated
//! item as liked once; below, disliked once. The final label is the
//! majority of tallies, with ties (including no evidence) mapping to
//! Unknown.
//!
//! Files are closed-world: a feature not listed for an item is truly
//! absent, and an item absent from the store has no features.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use crate::error::{Error, Result};
use crate::outcome::{GroundTruthVerdict, Preference};

/// Item -> feature-set membership with the derived feature vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ItemFeatureStore {
    features_by_item: BTreeMap<String, BTreeSet<String>>,
}

impl ItemFeatureStore {
    pub fn has_feature(&self, item_id: &str, feature_id: &str) -> bool {
        self.features_by_item
            .get(item_id)
            .is_some_and(|set| set.contains(feature_id))
    }

    pub fn known_item(&self, item_id: &str) -> bool {
        self.features_by_item.contains_key(item_id)
    }

    pub fn features(&self, item_id: &str) -> Option<&BTreeSet<String>> {
        self.features_by_item.get(item_id)
    }

    /// Union of all per-item feature sets.
    pub fn vocabulary(&self) -> BTreeSet<&str> {
        self.features_by_item
            .values()
            .flatten()
            .map(String::as_str)
            .collect()
    }

    pub fn item_count(&self) -> usize {
        self.features_by_item.len()
    }
}

/// One rating of one item by one user, on the 1..=5 scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingEvent {
    pub user_id: String,
    pub item_id: String,
    pub rating: u8,
}

fn parse_error(source_name: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source_name.to_string(),
        line,
        message: message.into(),
    }
}

/// Lines of a TSV stream with comments and blank lines stripped,
/// numbered from 1.
fn tsv_lines(reader: impl BufRead, source_name: &str) -> Result<Vec<(usize, String)>> {
    let mut lines = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let text = line.map_err(|e| Error::Io {
            path: source_name.to_string(),
            source: e,
        })?;
        let trimmed = text.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        lines.push((idx + 1, trimmed.to_string()));
    }
    Ok(lines)
}

/// Parses items.tsv: two tab-separated columns, item_id and feature_id.
/// Duplicate pairs are idempotent.
pub fn load_item_features(reader: impl BufRead, source_name: &str) -> Result<ItemFeatureStore> {
    let mut store = ItemFeatureStore::default();
    for (line_no, line) in tsv_lines(reader, source_name)? {
        let fields: Vec<&str> = line.split('\t').collect();
        let [item_id, feature_id] = fields.as_slice() else {
            return Err(parse_error(
                source_name,
                line_no,
                format!("expected 2 tab-separated columns, got {}", fields.len()),
            ));
        };
        if item_id.is_empty() || feature_id.is_empty() {
            return Err(parse_error(source_name, line_no, "empty identifier"));
        }
        store
            .features_by_item
            .entry(item_id.to_string())
            .or_default()
            .insert(feature_id.to_string());
    }
    Ok(store)
}

/// Parses ratings.tsv: user_id, item_id, rating, with an optional ignored
/// fourth column (e.g. a timestamp). Events are returned in file order.
pub fn load_ratings(reader: impl BufRead, source_name: &str) -> Result<Vec<RatingEvent>> {
    let mut events = Vec::new();
    for (line_no, line) in tsv_lines(reader, source_name)? {
        let fields: Vec<&str> = line.split('\t').collect();
        let (user_id, item_id, rating_text) = match fields.as_slice() {
            [u, i, r] | [u, i, r, _] => (*u, *i, *r),
            _ => {
                return Err(parse_error(
                    source_name,
                    line_no,
                    format!(
                        "expected 3 or 4 tab-separated columns, got {}",
                        fields.len()
                    ),
                ))
            }
        };
        if user_id.is_empty() || item_id.is_empty() {
            return Err(parse_error(source_name, line_no, "empty identifier"));
        }
        let rating: u8 = rating_text.parse().map_err(|_| {
            parse_error(
                source_name,
                line_no,
                format!("non-integer rating '{rating_text}'"),
            )
        })?;
        if !(1..=5).contains(&rating) {
            return Err(parse_error(
                source_name,
                line_no,
                format!("rating {rating} out of range 1..=5"),
            ));
        }
        events.push(RatingEvent {
            user_id: user_id.to_string(),
            item_id: item_id.to_string(),
            rating,
        });
    }
    Ok(events)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    liked: u64,
    disliked: u64,
}

/// Per-(user, feature) preference labels with their evidence tallies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PreferenceTable {
    tallies: BTreeMap<(String, String), Tally>,
    orphaned_ratings: u64,
}

impl PreferenceTable {
    /// Liked iff liked tallies outnumber disliked, Disliked for the
    /// reverse, Unknown on ties and absent pairs.
    pub fn preference(&self, user_id: &str, feature_id: &str) -> Preference {
        match self
            .tallies
            .get(&(user_id.to_string(), feature_id.to_string()))
        {
            Some(t) if t.liked > t.disliked => Preference::Liked,
            Some(t) if t.disliked > t.liked => Preference::Disliked,
            _ => Preference::Unknown,
        }
    }

    pub fn tallies(&self, user_id: &str, feature_id: &str) -> (u64, u64) {
        self.tallies
            .get(&(user_id.to_string(), feature_id.to_string()))
            .map_or((0, 0), |t| (t.liked, t.disliked))
    }

    /// Ratings whose item was absent from the feature store.
    pub fn orphaned_ratings(&self) -> u64 {
        self.orphaned_ratings
    }

    pub fn pair_count(&self) -> usize {
        self.tallies.len()
    }
}

/// Applies the threshold rule to every rating event. A rating for an item
/// absent from the store contributes nothing and is counted as orphaned.
pub fn derive_preferences(
    ratings: &[RatingEvent],
    store: &ItemFeatureStore,
    like_threshold: u8,
) -> Result<PreferenceTable> {
    if !(1..=5).contains(&like_threshold) {
        return Err(Error::InvalidParams(format!(
            "like threshold {like_threshold} out of range 1..=5"
        )));
    }
    let mut table = PreferenceTable::default();
    for event in ratings {
        let Some(features) = store.features(&event.item_id) else {
            table.orphaned_ratings += 1;
            continue;
        };
        let liked = event.rating >= like_threshold;
        for feature in features {
            let tally = table
                .tallies
                .entry((event.user_id.clone(), feature.clone()))
                .or_default();
            if liked {
                tally.liked += 1;
            } else {
                tally.disliked += 1;
            }
        }
    }
    Ok(table)
}

/// Answers the two ground-truth questions for one record. Unknown items
/// are treated as featureless; callers track them via
/// [`ItemFeatureStore::known_item`].
pub fn verdict(
    store: &ItemFeatureStore,
    prefs: &PreferenceTable,
    item_id: &str,
    feature_id: &str,
    user_id: &str,
) -> GroundTruthVerdict {
    GroundTruthVerdict {
        item_has_feature: store.has_feature(item_id, feature_id),
        user_preference: prefs.preference(user_id, feature_id),
    }
}
