//! Filename-safe model names.

use std::collections::BTreeSet;

use crate::ml_engine::Algorithm;

pub const MAX_MODEL_NAME_LEN: usize = 30;

/// Lowercase ASCII words of `text` (runs of letters and digits).
fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_ascii_alphanumeric()).filter(|w| !w.is_empty()).map(str::to_ascii_lowercase).collect()
}

/// Joins as many leading words as fit in `budget` characters with `sep`;
/// a single overlong word is cut.
fn fit_words(words: &[String], sep: &str, budget: usize) -> String {
    let mut out = String::new();
    for w in words {
        let extra = if out.is_empty() { w.len() } else { sep.len() + w.len() };
        if out.len() + extra > budget {
            break;
        }
        if !out.is_empty() {
            out.push_str(sep);
        }
        out.push_str(w);
    }
    if out.is_empty() {
        if let Some(w) = words.first() {
            out = w.chars().take(budget).collect();
        }
    }
    out
}

/// The undisambiguated name: `<target>_<algorithm>` for feature models,
/// `<item>recommender` for recommenders.
pub fn base_model_name(algorithm: Algorithm, target_or_item: &str) -> String {
    let ws = words(target_or_item);
    let base = match algorithm {
        Algorithm::Recommender => {
            let suffix = "recommender";
            let head = fit_words(&ws, "", MAX_MODEL_NAME_LEN - suffix.len());
            format!("{head}{suffix}")
        }
        _ => {
            let suffix = algorithm.token();
            let head = fit_words(&ws, "_", MAX_MODEL_NAME_LEN - suffix.len() - 1);
            if head.is_empty() {
                suffix.to_string()
            } else {
                format!("{head}_{suffix}")
            }
        }
    };
    base.chars().take(MAX_MODEL_NAME_LEN).collect()
}

fn mix(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// A name for a new model that is not in `existing`. On collision a
/// four-digit number derived from the base name is appended.
pub fn generate_model_name(algorithm: Algorithm, target_or_item: &str, existing: &BTreeSet<String>) -> String {
    let base = base_model_name(algorithm, target_or_item);
    if !existing.contains(&base) {
        return base;
    }
    let stem: String = base.chars().take(MAX_MODEL_NAME_LEN - 4).collect();
    let seed = base.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3));
    (0u64..)
        .map(|attempt| format!("{stem}{:04}", mix(seed.wrapping_add(attempt)) % 10_000))
        .find(|n| !existing.contains(n))
        .expect("fewer than 10000 collisions")
}
