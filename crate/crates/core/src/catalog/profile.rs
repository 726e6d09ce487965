//! Profile texts for datasets and models, and parsing of model profiles back
//! into their key fields.

use std::collections::BTreeMap;

use super::{CatalogError, DatasetProfile, ModelCard, Target};
use crate::ml_engine::{Metrics, Task};

/// Model profile section headers, in rendering order.
pub const MODEL_SECTIONS: [&str; 7] = [
    "Model Name",
    "Dataset Name",
    "Model Overview",
    "Intended Use",
    "Technical Details",
    "Model Performance",
    "Limitations",
];

const METRIC_LABELS: [(&str, &str); 5] = [
    ("mse", "Mean Squared Error (MSE)"),
    ("r2", "R² Score"),
    ("accuracy", "Accuracy"),
    ("precision", "Precision"),
    ("recall", "Recall"),
];

/// Python `repr` of a string: single quotes unless the text contains a single
/// quote and no double quote.
pub fn py_str(s: &str) -> String {
    let quote = if s.contains('\'') && !s.contains('"') { '"' } else { '\'' };
    let mut out = String::with_capacity(s.len() + 2);
    out.push(quote);
    for c in s.chars() {
        if c == '\\' || c == quote {
            out.push('\\');
        }
        out.push(c);
    }
    out.push(quote);
    out
}

/// Python `repr` of a list of strings, e.g. `['age', 'bmi']`.
pub fn py_list(items: &[String]) -> String {
    let inner: Vec<String> = items.iter().map(|s| py_str(s)).collect();
    format!("[{}]", inner.join(", "))
}

/// Every quoted string literal in `text`, in order. Understands both quote
/// styles and backslash escapes.
pub fn quoted_strings(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\'' && c != '"' {
            continue;
        }
        let mut s = String::new();
        let mut closed = false;
        while let Some(d) = chars.next() {
            match d {
                '\\' => s.extend(chars.next()),
                _ if d == c => {
                    closed = true;
                    break;
                }
                _ => s.push(d),
            }
        }
        if closed {
            out.push(s);
        }
    }
    out
}

/// Formats a metric the way profiles print it.
pub fn format_metric(v: f64) -> String {
    format!("{v:.6}")
}

/// Rounds a metric to the printed precision so render and parse agree.
pub fn round_metric(v: f64) -> f64 {
    format_metric(v).parse().unwrap_or(v)
}

pub fn metric_label(key: &str) -> &str {
    METRIC_LABELS.iter().find(|(k, _)| *k == key).map_or(key, |(_, l)| l)
}

fn metric_key(label: &str) -> Option<&'static str> {
    let l = label.to_lowercase();
    if l.contains("mse") || l.contains("mean squared error") {
        Some("mse")
    } else if l.contains("r²") || l.contains("r2") || l.starts_with("r-squared") {
        Some("r2")
    } else {
        ["accuracy", "precision", "recall"].into_iter().find(|k| l.starts_with(k))
    }
}

/// Metric keys in display order: the known ones first, then any others by name.
fn ordered_metrics(metrics: &Metrics) -> Vec<(&str, f64)> {
    let mut out: Vec<(&str, f64)> =
        METRIC_LABELS.iter().filter_map(|(k, _)| metrics.get(*k).map(|v| (*k, *v))).collect();
    out.extend(
        metrics.iter().filter(|(k, _)| !METRIC_LABELS.iter().any(|(m, _)| m == k)).map(|(k, v)| (k.as_str(), *v)),
    );
    out
}

/// First token of the name split on `_`.
pub fn domain_token(name: &str) -> &str {
    name.split('_').next().unwrap_or(name)
}

pub fn render_dataset_profile(p: &DatasetProfile) -> String {
    let names: Vec<String> = p.columns.iter().map(|c| c.name.clone()).collect();
    let types: Vec<String> = p
        .columns
        .iter()
        .map(|c| {
            if c.is_numeric() {
                format!("{} numeric", c.name)
            } else {
                format!("{} categorical with {} distinct values", c.name, c.distinct_hint)
            }
        })
        .collect();
    let mut s = String::new();
    s.push_str(&format!("Dataset Name: {}\n\n", p.name));
    s.push_str("Overview:\n");
    s.push_str(&format!(
        "This dataset contains {} rows structured in several columns: {}.\n",
        p.row_count,
        py_list(&names)
    ));
    s.push_str(&format!("Column types: {}.\n", types.join("; ")));
    s.push_str("A sample of the data showing its typical content and structure:\n");
    s.push_str(&names.join(", "));
    s.push('\n');
    for row in &p.sample_rows {
        s.push_str(&row.join(", "));
        s.push('\n');
    }
    s.push_str("\nUsage:\n");
    s.push_str(&format!(
        "This dataset is primarily used for building predictive models in the {} domain.\n",
        domain_token(&p.name)
    ));
    s
}

/// Pulls the dataset name out of a dataset profile.
pub fn parse_dataset_name(text: &str) -> Result<String, CatalogError> {
    let sections = split_sections(text, &["Dataset Name", "Overview", "Usage"]);
    sections
        .get("Dataset Name")
        .and_then(|s| s.value())
        .ok_or_else(|| CatalogError::ProfileFormat("missing \"Dataset Name:\" section".into()))
}

fn intended_use(task: Task) -> &'static str {
    match task {
        Task::Regression => {
            "Estimating a continuous quantity for new records that resemble the training data, \
             for example to support pricing, planning or forecasting decisions."
        }
        Task::BinaryClassification => {
            "Estimating the probability that a new record belongs to the positive class, \
             for screening or triage decisions that tolerate occasional mistakes."
        }
        Task::Recommendation => {
            "Suggesting items a known user has not interacted with yet, \
             for example in e-commerce or entertainment catalogs."
        }
    }
}

/// The limitation text recorded for models of `task` unless a caller supplies one.
pub fn default_limitations(task: Task) -> &'static str {
    match task {
        Task::Regression => {
            "- Assumes a linear relationship between the inputs and the target; curved effects and interactions are missed.\n\
             - Strongly correlated inputs or outliers make the coefficients unstable."
        }
        Task::BinaryClassification => {
            "- The decision boundary is linear in the standardized inputs.\n\
             - Predicted probabilities are only as well calibrated as the training sample is representative."
        }
        Task::Recommendation => {
            "- Users and items unseen during training cannot be scored.\n\
             - Quality drops when interactions are sparse or concentrated on few items."
        }
    }
}

pub fn render_model_profile(card: &ModelCard) -> String {
    let mut s = String::new();
    s.push_str(&format!("Model Name: {}\n\n", card.name));
    s.push_str(&format!("Dataset Name: {}\n\n", card.dataset_name));

    s.push_str("Model Overview:\n");
    match &card.target {
        Target::Column(target) => s.push_str(&format!(
            "The {} model is a {} model trained on the {} dataset to predict {} from the input features {}.",
            card.name,
            card.algorithm.display_name().to_lowercase(),
            card.dataset_name,
            target,
            card.feature_order.join(", "),
        )),
        Target::Interaction { user_col, item_col } => s.push_str(&format!(
            "The {} model is a recommendation model trained on the {} dataset. It links user IDs from column {} \
             with item IDs from column {} to predict which {} a user will prefer.",
            card.name,
            card.dataset_name,
            py_str(user_col),
            py_str(item_col),
            item_col,
        )),
    }
    if !card.query.is_empty() {
        let query = card.query.split_whitespace().collect::<Vec<_>>().join(" ");
        s.push_str(&format!(" It was trained for the request: {}.", py_str(&query)));
    }
    match &card.filter {
        Some(f) => s.push_str(&format!(" Training used {} rows where {}.", card.training_rows, f)),
        None => s.push_str(&format!(" Training used {} rows.", card.training_rows)),
    }
    s.push_str("\n\n");

    s.push_str("Intended Use:\n");
    s.push_str(intended_use(card.task));
    s.push_str("\n\n");

    s.push_str("Technical Details:\n");
    s.push_str(&format!("- Algorithm Type: {}\n", card.algorithm.display_name()));
    s.push_str(&format!("- Input Features: {}\n", py_list(&card.feature_order)));
    match &card.target {
        Target::Column(t) => match card.task {
            Task::BinaryClassification => s.push_str(&format!("- Output: Probability that {t} is positive\n")),
            _ => s.push_str(&format!("- Output: Predicted value of {t}\n")),
        },
        Target::Interaction { item_col, .. } => {
            s.push_str(&format!("- Output: Probability scores indicating user preference for each {item_col}\n"))
        }
    }
    s.push('\n');

    s.push_str("Model Performance:\n");
    for (k, v) in ordered_metrics(&card.metrics) {
        s.push_str(&format!("- {}: {}\n", metric_label(k), format_metric(v)));
    }
    s.push('\n');

    s.push_str("Limitations:\n");
    s.push_str(card.limitations.trim_end());
    s.push('\n');
    s
}

/// Fields recovered from a model profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedModelProfile {
    pub name: String,
    pub dataset_name: String,
    pub algorithm: String,
    pub feature_order: Vec<String>,
    pub metrics: Metrics,
}

#[derive(Debug, Default)]
struct Section {
    inline: String,
    body: Vec<String>,
}

impl Section {
    /// The text on the header line, or else the first body line.
    fn value(&self) -> Option<String> {
        let v = if self.inline.is_empty() { self.body.first().map(String::as_str).unwrap_or("") } else { &self.inline };
        let v = v.trim();
        (!v.is_empty()).then(|| v.to_string())
    }

    fn lines(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.inline.as_str()).chain(self.body.iter().map(String::as_str)).filter(|l| !l.is_empty())
    }
}

fn strip_bullet(line: &str) -> &str {
    let t = line.trim();
    t.strip_prefix('-').map_or(t, str::trim_start)
}

/// Splits `text` into the named sections. A header is a line (optionally
/// bulleted) starting with `<Header>:`; everything up to the next header
/// belongs to it.
fn split_sections<'h>(text: &str, headers: &[&'h str]) -> BTreeMap<&'h str, Section> {
    let mut out: BTreeMap<&str, Section> = BTreeMap::new();
    let mut current: Option<&str> = None;
    for raw in text.lines() {
        let line = strip_bullet(raw);
        let hit = headers.iter().find_map(|h| {
            let rest = line.strip_prefix(h)?.trim_start().strip_prefix(':')?;
            Some((*h, rest.trim()))
        });
        if let Some((h, rest)) = hit {
            if !out.contains_key(h) {
                out.insert(h, Section { inline: rest.to_string(), body: Vec::new() });
                current = Some(h);
                continue;
            }
        }
        if let Some(h) = current {
            let t = raw.trim();
            if !t.is_empty() {
                out.get_mut(h).expect("section exists").body.push(t.to_string());
            }
        }
    }
    out
}

/// Extracts a `Label: value` entry from section lines.
fn field<'a>(lines: impl Iterator<Item = &'a str>, label: &str) -> Option<&'a str> {
    lines.into_iter().find_map(|l| {
        let l = strip_bullet(l);
        let rest = l.strip_prefix(label)?.trim_start().strip_prefix(':')?;
        Some(rest.trim())
    })
}

pub fn parse_model_profile(text: &str) -> Result<ParsedModelProfile, CatalogError> {
    let sections = split_sections(text, &MODEL_SECTIONS);
    for h in MODEL_SECTIONS {
        if !sections.contains_key(h) {
            return Err(CatalogError::ProfileFormat(format!("missing \"{h}:\" section")));
        }
    }
    let value =
        |h: &str| sections[h].value().ok_or_else(|| CatalogError::ProfileFormat(format!("empty \"{h}:\" section")));
    let name = value("Model Name")?;
    let dataset_name = value("Dataset Name")?;

    let tech = &sections["Technical Details"];
    let algorithm = field(tech.lines(), "Algorithm Type")
        .ok_or_else(|| CatalogError::ProfileFormat("missing Algorithm Type".into()))?
        .to_string();
    let features = field(tech.lines(), "Input Features")
        .ok_or_else(|| CatalogError::ProfileFormat("missing Input Features".into()))?;
    let feature_order = quoted_strings(features);

    let mut metrics = Metrics::new();
    for line in sections["Model Performance"].lines() {
        let line = strip_bullet(line);
        let Some((label, v)) = line.rsplit_once(':') else { continue };
        let Some(key) = metric_key(label.trim()) else { continue };
        let v = v.trim().trim_end_matches(',').trim();
        let v: f64 = v.parse().map_err(|_| CatalogError::ProfileFormat(format!("bad metric value {v:?}")))?;
        metrics.insert(key.to_string(), v);
    }
    Ok(ParsedModelProfile { name, dataset_name, algorithm, feature_order, metrics })
}
