use super::text::{
    column_tokens, is_task_verb, stem, stems_with_joins, token_match, tokenize, words, Token, TokenKind, NEGATIONS,
    STOPWORDS,
};
use super::{ColumnSelection, Intent, LanguageProvider, ProviderError};
use crate::catalog::Target;
use crate::ml_engine::{Algorithm, Task};
use crate::table::ColumnMeta;

/// Deterministic keyword and pattern rules; never calls out.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleBasedProvider;

const AFFIRM: &[&str] = &[
    "y",
    "yes",
    "yeah",
    "yep",
    "yup",
    "sure",
    "ok",
    "okay",
    "confirm",
    "confirmed",
    "correct",
    "go ahead",
    "proceed",
    "do it",
    "yes please",
    "please do",
    "sounds good",
    "use it",
    "go",
];
const AFFIRM_LEAD: &[&str] = &["y", "yes", "yeah", "yep", "yup", "sure", "ok", "okay"];
const AFFIRM_PHRASES: &[&str] =
    &["use matched", "use the matched", "use this model", "use that model", "use the suggested", "use the match"];

const CHANGE_EXACT: &[&str] = &["new", "n", "no", "nope", "change", "other", "another", "no thanks", "train"];
const CHANGE_PHRASES: &[&str] = &[
    "new model",
    "another model",
    "different model",
    "other model",
    "train a new",
    "train new",
    "train a model",
    "train another",
    "select another",
    "choose another",
    "use new",
    "use a new",
    "new one",
    "another one",
    "something else",
];

const GUIDE_PHRASES: &[&str] = &[
    "help",
    "guide",
    "how to use",
    "how do i use",
    "how does this work",
    "instructions",
    "what can you do",
    "manual",
    "tutorial",
];

const RESTRICTIONS: &[&str] = &[
    "only consider",
    "consider only",
    "only use",
    "use only",
    "only include",
    "only keep",
    "only for",
    "only data",
    "restrict to",
    "restricted to",
    "limited to",
    "limit to",
    "from the past",
    "in the past",
    "in the last",
    "over the past",
    "during the last",
    "filter",
    "exclude",
    "excluding",
];

const COMPARISONS: &[&str] = &[
    "less than",
    "greater than",
    "more than",
    "fewer than",
    "lower than",
    "higher than",
    "older than",
    "younger than",
    "at least",
    "at most",
    "below",
    "above",
    "under",
    "over",
    "equal to",
    "equals",
];

/// Words that end the object phrase after a task verb.
const OBJECT_BOUNDARY: &[&str] = &[
    "for", "given", "based", "using", "when", "where", "if", "who", "whose", "which", "that", "from", "by", "living",
    "having", "has", "have", "in", "on", "at", "to",
];

const USER_MARKERS: &[&str] = &[
    "user", "customer", "client", "member", "account", "listener", "buyer", "person", "visitor", "reader", "viewer",
    "player", "uid",
];
const ID_MARKERS: &[&str] = &["id", "user", "userid", "customer", "client", "member", "account", "uid", "number"];

/// Extra phrasings for column-name tokens, keyed by stem.
const SYNONYMS: &[(&str, &[&str])] = &[
    ("age", &["year old", "years old", "yo", "aged", "age"]),
    ("bmi", &["body mass index"]),
    ("children", &["child", "kid", "dependent"]),
    ("child", &["children", "kid", "dependent"]),
    ("sex", &["gender"]),
    ("gender", &["sex"]),
    ("smoker", &["smoke", "smoking"]),
    ("sleep", &["slept"]),
    ("studied", &["study", "studying"]),
    ("hour", &["hr", "hrs"]),
];

/// Extra phrasings for category values.
const VALUE_SYNONYMS: &[(&str, &[&str])] =
    &[("female", &["woman", "women", "girl", "lady"]), ("male", &["man", "men", "boy", "gentleman"])];

const YES_VALUES: &[&str] = &["yes", "y", "true", "t", "1"];
const NO_VALUES: &[&str] = &["no", "n", "false", "f", "0"];

fn normalized(text: &str) -> String {
    words(text).join(" ")
}

fn has_phrase(norm: &str, phrase: &str) -> bool {
    format!(" {norm} ").contains(&format!(" {phrase} "))
}

/// The algorithm a message names, by token, display name or model-type word
/// such as `RegressionModel`.
pub fn find_algorithm(message: &str) -> Option<Algorithm> {
    let norm = normalized(message);
    const TABLE: [(Algorithm, &[&str]); 3] = [
        (
            Algorithm::LogisticClassifier,
            &[
                "classificationmodel",
                "logisticclassifier",
                "logistic classifier",
                "logistic regression",
                "logistic",
                "classifier",
                "classification",
            ],
        ),
        (
            Algorithm::Recommender,
            &[
                "recommender",
                "recommendationmodel",
                "recommendermodel",
                "collaborative filtering",
                "recommendation model",
            ],
        ),
        (
            Algorithm::LinearRegression,
            &["regressionmodel", "linearregression", "linear regression", "linear", "regression"],
        ),
    ];
    TABLE.iter().find(|(_, ps)| ps.iter().any(|p| has_phrase(&norm, p))).map(|(a, _)| *a)
}

fn classify(message: &str) -> Intent {
    let ws = words(message);
    if ws.is_empty() {
        return Intent::Chat;
    }
    let norm = ws.join(" ");
    let has_verb = ws.iter().any(|w| is_task_verb(w));
    let any = |ps: &[&str]| ps.iter().any(|p| has_phrase(&norm, p));

    if AFFIRM.contains(&norm.as_str())
        || (AFFIRM_LEAD.contains(&ws[0].as_str()) && ws.len() <= 5 && !has_verb)
        || any(AFFIRM_PHRASES)
    {
        return Intent::Confirm;
    }
    if CHANGE_EXACT.contains(&norm.as_str()) || any(CHANGE_PHRASES) {
        return Intent::Change;
    }
    if !has_verb && find_algorithm(message).is_some() {
        return Intent::Selection;
    }
    if any(GUIDE_PHRASES) {
        return Intent::Guide;
    }
    if has_verb {
        return Intent::Query;
    }
    Intent::Chat
}

fn needs_filter(query: &str) -> bool {
    let norm = normalized(query);
    if RESTRICTIONS.iter().any(|p| has_phrase(&norm, p)) {
        return true;
    }
    let ws: Vec<&str> = norm.split(' ').collect();
    let Some(verb) = ws.iter().position(|w| is_task_verb(w)) else { return false };
    let before = ws[..verb].join(" ");
    COMPARISONS.iter().any(|p| has_phrase(&before, p))
}

/// Stems naming what the query asks for: the words after the first task verb
/// up to a boundary word, number or clause end, without stopwords.
pub(crate) fn object_phrase(tokens: &[Token]) -> Vec<String> {
    let start = tokens.iter().position(|t| is_task_verb(&t.text)).map_or(0, |i| i + 1);
    let Some(first) = tokens.get(start) else { return Vec::new() };
    tokens[start..]
        .iter()
        .take_while(|t| {
            t.clause == first.clause && t.kind == TokenKind::Word && !OBJECT_BOUNDARY.contains(&t.text.as_str())
        })
        .filter(|t| !STOPWORDS.contains(&t.text.as_str()))
        .map(|t| t.stem.clone())
        .collect()
}

fn overlap(phrase: &[String], column: &str) -> usize {
    let col = column_tokens(column);
    phrase.iter().filter(|p| col.iter().any(|c| token_match(p, c))).count()
}

/// Index of the highest-scoring column, first on ties; `None` if all score 0.
fn best(scores: impl Iterator<Item = usize>) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for (i, s) in scores.enumerate() {
        if s > 0 && best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

fn select(query: &str, columns: &[String], task: Task) -> Result<ColumnSelection, ProviderError> {
    let tokens = tokenize(query);
    let phrase = object_phrase(&tokens);
    if phrase.is_empty() {
        return Err(ProviderError::NoTargetMatch(query.trim().to_string()));
    }
    let miss = || ProviderError::NoTargetMatch(phrase.join(" "));
    match task {
        Task::Regression | Task::BinaryClassification => {
            let t = best(columns.iter().map(|c| overlap(&phrase, c))).ok_or_else(miss)?;
            let features = columns.iter().enumerate().filter(|(i, _)| *i != t).map(|(_, c)| c.clone()).collect();
            Ok(ColumnSelection { task, features, target: Target::Column(columns[t].clone()) })
        }
        Task::Recommendation => {
            let item = best(columns.iter().map(|c| overlap(&phrase, c))).ok_or_else(miss)?;
            let rest: Vec<String> = tokens
                .iter()
                .filter(|t| t.kind == TokenKind::Word && !is_task_verb(&t.text) && !phrase.contains(&t.stem))
                .map(|t| t.stem.clone())
                .collect();
            // only columns that look like user identifiers qualify
            let user_score = |c: &String| {
                let toks = column_tokens(c);
                let marker = toks.iter().any(|t| USER_MARKERS.iter().any(|m| token_match(t, m)));
                let id = toks.iter().any(|t| t == "id");
                if marker || id {
                    1 + overlap(&rest, c) + if marker { 2 } else { 0 }
                } else {
                    0
                }
            };
            let scores: Vec<usize> =
                columns.iter().enumerate().map(|(i, c)| if i == item { 0 } else { user_score(c) }).collect();
            let user = best(scores.into_iter()).ok_or_else(|| ProviderError::NoTargetMatch("user".into()))?;
            let (user_col, item_col) = (columns[user].clone(), columns[item].clone());
            Ok(ColumnSelection {
                task,
                features: vec![user_col.clone(), item_col.clone()],
                target: Target::Interaction { user_col, item_col },
            })
        }
    }
}

/// Ways of referring to a column: its own tokens plus synonym phrases.
fn aliases(name: &str) -> Vec<Vec<String>> {
    let base = column_tokens(name);
    let mut out = vec![base.clone()];
    for (key, phrases) in SYNONYMS {
        if base.iter().any(|t| t == key) {
            out.extend(phrases.iter().map(|p| words(p).iter().map(|w| stem(w)).collect()));
        }
    }
    out
}

/// How many alias tokens occur in `tokens`, and the position of the first hit.
fn alias_hits(tokens: &[&Token], alias: &[String]) -> (usize, Option<usize>) {
    let stems = stems_with_joins(tokens);
    let mut count = 0;
    let mut first: Option<usize> = None;
    for a in alias {
        if let Some((pos, _)) = stems.iter().find(|(_, s)| token_match(s, a)) {
            count += 1;
            first = Some(first.map_or(*pos, |f: usize| f.min(*pos)));
        }
    }
    (count, first)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Mention {
    pos: usize,
    negated: bool,
}

fn negated_at(tokens: &[&Token], pos: usize) -> bool {
    let from = pos.saturating_sub(2);
    tokens[from..pos].iter().any(|t| NEGATIONS.contains(&t.text.as_str()))
}

/// First place where at least half of some alias's tokens appear within a
/// short window, with its negation status. `nonsmoker`-style words count as
/// negated mentions of `smoker`.
pub(crate) fn find_mention(tokens: &[&Token], aliases: &[Vec<String>]) -> Option<Mention> {
    let mut found: Option<Mention> = None;
    for alias in aliases.iter().filter(|a| !a.is_empty()) {
        let need = alias.len().div_ceil(2);
        for start in 0..tokens.len() {
            let end = (start + alias.len() + 2).min(tokens.len());
            let (hits, first) = alias_hits(&tokens[start..end], alias);
            let anchored = first == Some(0);
            if hits >= need && anchored {
                let m = Mention { pos: start, negated: negated_at(tokens, start) };
                if found.is_none_or(|f| m.pos < f.pos) {
                    found = Some(m);
                }
                break;
            }
            let t = &tokens[start];
            if let Some(rest) = t.text.strip_prefix("non") {
                if rest.len() >= 4 && alias.len() == 1 && token_match(&stem(rest), &alias[0]) {
                    let m = Mention { pos: start, negated: true };
                    if found.is_none_or(|f| m.pos < f.pos) {
                        found = Some(m);
                    }
                    break;
                }
            }
        }
    }
    found
}

pub(crate) fn value_aliases(value: &str) -> Vec<Vec<String>> {
    let base: Vec<String> = words(value).iter().map(|w| stem(w)).collect();
    let mut out = vec![base.clone()];
    if let [single] = base.as_slice() {
        for (key, syns) in VALUE_SYNONYMS {
            if single == key {
                out.extend(syns.iter().map(|s| vec![stem(s)]));
            }
        }
    }
    out
}

/// `Some((yes_index, no_index))` when the two categories read as yes/no.
fn yes_no(categories: &[String]) -> Option<(usize, usize)> {
    if categories.len() != 2 {
        return None;
    }
    let is = |c: &String, set: &[&str]| set.contains(&c.to_lowercase().as_str());
    match (is(&categories[0], YES_VALUES), is(&categories[1], NO_VALUES)) {
        (true, true) => Some((0, 1)),
        _ if is(&categories[1], YES_VALUES) && is(&categories[0], NO_VALUES) => Some((1, 0)),
        _ => None,
    }
}

/// Index into `categories` chosen by the query, if any.
pub(crate) fn pick_category(tokens: &[&Token], column: &str, categories: &[String]) -> Option<usize> {
    if let Some((yes, no)) = yes_no(categories) {
        let m = find_mention(tokens, &aliases(column))?;
        return Some(if m.negated { no } else { yes });
    }
    let mut mentions: Vec<(Mention, usize)> = categories
        .iter()
        .enumerate()
        .filter_map(|(i, v)| find_mention(tokens, &value_aliases(v)).map(|m| (m, i)))
        .collect();
    mentions.sort_by_key(|(m, _)| m.pos);
    if let Some((_, i)) = mentions.iter().find(|(m, _)| !m.negated) {
        return Some(*i);
    }
    if let (Some((_, i)), 2) = (mentions.first(), categories.len()) {
        return Some(1 - i);
    }
    None
}

enum FeatureKind<'a> {
    Numeric,
    OneHot { source: &'a ColumnMeta, value: usize },
    Categorical(&'a ColumnMeta),
}

fn feature_kind<'a>(name: &str, columns: &'a [ColumnMeta]) -> FeatureKind<'a> {
    if let Some(c) = columns.iter().find(|c| c.name == name) {
        return if c.is_numeric() { FeatureKind::Numeric } else { FeatureKind::Categorical(c) };
    }
    for c in columns.iter().filter(|c| !c.is_numeric()) {
        if let Some(v) = c.categories.iter().position(|v| format!("{}_{}", c.name, v) == name) {
            return FeatureKind::OneHot { source: c, value: v };
        }
    }
    FeatureKind::Numeric
}

fn extract(query: &str, feature_order: &[String], columns: &[ColumnMeta]) -> Result<Vec<f64>, ProviderError> {
    let tokens = tokenize(query);
    let all: Vec<&Token> = tokens.iter().collect();
    let mut values: Vec<Option<f64>> = vec![None; feature_order.len()];
    let kinds: Vec<FeatureKind> = feature_order.iter().map(|f| feature_kind(f, columns)).collect();

    // categorical features, one decision per source column
    let mut decided: Vec<(&str, Option<usize>)> = Vec::new();
    for (i, kind) in kinds.iter().enumerate() {
        match kind {
            FeatureKind::OneHot { source, value } => {
                let choice = match decided.iter().find(|(n, _)| *n == source.name) {
                    Some((_, c)) => *c,
                    None => {
                        let c = pick_category(&all, &source.name, &source.categories);
                        decided.push((&source.name, c));
                        c
                    }
                };
                values[i] = choice.map(|c| f64::from(u8::from(c == *value)));
            }
            FeatureKind::Categorical(meta) => {
                values[i] = pick_category(&all, &meta.name, &meta.categories).map(|c| match yes_no(&meta.categories) {
                    Some((yes, _)) => f64::from(u8::from(c == yes)),
                    None => c as f64,
                });
            }
            FeatureKind::Numeric => {}
        }
    }

    // numeric features: greedy matching of (feature, number) pairs by alias
    // overlap within a clause, then distance
    let n_clauses = tokens.last().map_or(0, |t| t.clause + 1);
    let clauses: Vec<Vec<&Token>> = (0..n_clauses).map(|c| tokens.iter().filter(|t| t.clause == c).collect()).collect();
    let mut candidates: Vec<(usize, usize, usize, usize, usize)> = Vec::new(); // (score, distance, feature, clause, token)
    for (fi, kind) in kinds.iter().enumerate() {
        if !matches!(kind, FeatureKind::Numeric) {
            continue;
        }
        let feature_aliases = aliases(&feature_order[fi]);
        for (ci, clause) in clauses.iter().enumerate() {
            let Some((score, pos)) = feature_aliases
                .iter()
                .filter_map(|a| match alias_hits(clause, a) {
                    (n, Some(p)) if n > 0 => Some((n, p)),
                    _ => None,
                })
                .max_by_key(|(n, p)| (*n, std::cmp::Reverse(*p)))
            else {
                continue;
            };
            for (ti, t) in clause.iter().enumerate() {
                if t.number().is_some() {
                    candidates.push((score, ti.abs_diff(pos), fi, ci, ti));
                }
            }
        }
    }
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)).then(a.3.cmp(&b.3)));
    let mut used: Vec<(usize, usize)> = Vec::new();
    for (_, _, fi, ci, ti) in candidates {
        if values[fi].is_some() || used.contains(&(ci, ti)) {
            continue;
        }
        values[fi] = clauses[ci][ti].number();
        used.push((ci, ti));
    }

    let mut missing: Vec<String> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        if v.is_none() {
            let name = match &kinds[i] {
                FeatureKind::OneHot { source, .. } => source.name.clone(),
                _ => feature_order[i].clone(),
            };
            if !missing.contains(&name) {
                missing.push(name);
            }
        }
    }
    if !missing.is_empty() {
        return Err(ProviderError::MissingFeature(missing));
    }
    Ok(values.into_iter().map(|v| v.expect("checked above")).collect())
}

fn user_id(query: &str) -> Result<String, ProviderError> {
    let tokens = tokenize(query);
    let has_digit = |t: &Token| t.raw.chars().any(|c| c.is_ascii_digit());
    for (i, t) in tokens.iter().enumerate() {
        if ID_MARKERS.contains(&t.stem.as_str()) {
            if let Some(id) = tokens[i + 1..].iter().take(2).find(|t| has_digit(t)) {
                return Ok(id.raw.clone());
            }
        }
    }
    let mut ints: Vec<&str> = tokens
        .iter()
        .filter(|t| t.kind != TokenKind::Word && t.raw.chars().all(|c| c.is_ascii_digit()))
        .map(|t| t.raw.as_str())
        .collect();
    ints.dedup();
    match ints.as_slice() {
        [one] => Ok(one.to_string()),
        _ => Err(ProviderError::NoUserId),
    }
}

impl LanguageProvider for RuleBasedProvider {
    fn classify_intent(&self, message: &str) -> Intent {
        classify(message)
    }

    fn needs_preprocessing(&self, query: &str) -> bool {
        needs_filter(query)
    }

    fn select_columns(&self, query: &str, columns: &[String], task: Task) -> Result<ColumnSelection, ProviderError> {
        select(query, columns, task)
    }

    fn extract_feature_values(
        &self,
        query: &str,
        feature_order: &[String],
        columns: &[ColumnMeta],
    ) -> Result<Vec<f64>, ProviderError> {
        extract(query, feature_order, columns)
    }

    fn extract_user_id(&self, query: &str) -> Result<String, ProviderError> {
        user_id(query)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::ColumnType;
    use proptest::prelude::*;

    fn numeric(name: &str) -> ColumnMeta {
        ColumnMeta { name: name.into(), dtype: ColumnType::Numeric, distinct_hint: 10, categories: vec![] }
    }

    fn categorical(name: &str, values: &[&str]) -> ColumnMeta {
        ColumnMeta {
            name: name.into(),
            dtype: ColumnType::Categorical,
            distinct_hint: values.len(),
            categories: values.iter().map(|v| v.to_string()).collect(),
        }
    }

    fn insurance_columns() -> Vec<ColumnMeta> {
        vec![
            numeric("age"),
            categorical("sex", &["female", "male"]),
            numeric("bmi"),
            numeric("children"),
            categorical("smoker", &["no", "yes"]),
            categorical("region", &["northeast", "northwest", "southeast", "southwest"]),
            numeric("charges"),
        ]
    }

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    const INSURANCE_QUERY: &str = "predict insurance charge for a 19 year old female, non-smoker, living in northeast with a BMI of 27.9 and no children";

    #[test]
    fn intents() {
        let p = RuleBasedProvider;
        for (msg, want) in [
            ("y", Intent::Confirm),
            ("yes", Intent::Confirm),
            ("I want to use matched model and dataset", Intent::Confirm),
            ("new", Intent::Change),
            ("I want to use new model", Intent::Change),
            ("Can I select another model?", Intent::Change),
            ("I want to train a new model", Intent::Change),
            ("ClassificationModel", Intent::Selection),
            ("I want to use model RegressionModel", Intent::Selection),
            ("linear_regression", Intent::Selection),
            ("how to use this system", Intent::Guide),
            ("help", Intent::Guide),
            ("user guide", Intent::Guide),
            (INSURANCE_QUERY, Intent::Query),
            ("please recommend playlist based on user id 4407", Intent::Query),
            ("good morning", Intent::Chat),
            ("quantum_forest", Intent::Chat),
        ] {
            assert_eq!(p.classify_intent(msg), want, "{msg}");
        }
    }

    #[test]
    fn preprocessing_detection() {
        let p = RuleBasedProvider;
        assert!(p.needs_preprocessing(&format!("only consider female data from the dataset, {INSURANCE_QUERY}")));
        assert!(!p.needs_preprocessing(INSURANCE_QUERY));
        assert!(p.needs_preprocessing("only consider house age less than 30, predict real estate price"));
        assert!(p.needs_preprocessing("for houses with age less than 30, predict the price"));
        assert!(!p.needs_preprocessing("predict price for a house with age less than 30"));
    }

    #[test]
    fn insurance_target_selection() {
        let cols = strings(&[
            "age",
            "bmi",
            "children",
            "charges",
            "sex_female",
            "sex_male",
            "smoker_no",
            "smoker_yes",
            "region_northeast",
            "region_northwest",
            "region_southeast",
            "region_southwest",
        ]);
        let sel = RuleBasedProvider.select_columns(INSURANCE_QUERY, &cols, Task::Regression).unwrap();
        assert_eq!(sel.target, Target::Column("charges".into()));
        assert_eq!(
            sel.features,
            strings(&[
                "age",
                "bmi",
                "children",
                "sex_female",
                "sex_male",
                "smoker_no",
                "smoker_yes",
                "region_northeast",
                "region_northwest",
                "region_southeast",
                "region_southwest"
            ])
        );
        let err = RuleBasedProvider.select_columns("predict unicorn horn length", &cols, Task::Regression);
        assert!(matches!(err, Err(ProviderError::NoTargetMatch(_))));
    }

    #[test]
    fn recommendation_columns() {
        let cols = strings(&["user_id", "artistname", "trackname", "playlistname"]);
        let sel = RuleBasedProvider
            .select_columns("recommend playlists based on user names", &cols, Task::Recommendation)
            .unwrap();
        assert_eq!(sel.target, Target::Interaction { user_col: "user_id".into(), item_col: "playlistname".into() });
        let cols = strings(&["customer_id", "product_id", "quantity"]);
        let sel = RuleBasedProvider
            .select_columns("recommend product id based on customer id 7172", &cols, Task::Recommendation)
            .unwrap();
        assert_eq!(sel.features, strings(&["customer_id", "product_id"]));
    }

    #[test]
    fn insurance_extraction_handles_negation() {
        let order = strings(&[
            "sex_female",
            "sex_male",
            "smoker_no",
            "smoker_yes",
            "region_northeast",
            "region_northwest",
            "region_southeast",
            "region_southwest",
            "age",
            "bmi",
            "children",
        ]);
        let v = RuleBasedProvider.extract_feature_values(INSURANCE_QUERY, &order, &insurance_columns()).unwrap();
        // a non-smoker lands in the smoker_no cell
        assert_eq!(v, vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 19.0, 27.9, 0.0]);
        let smoker = "predict insurance charge for a 19 year old female smoker living in northeast with a BMI of 27.9 and no children";
        let v = RuleBasedProvider.extract_feature_values(smoker, &order, &insurance_columns()).unwrap();
        assert_eq!(v, vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 19.0, 27.9, 0.0]);
    }

    #[test]
    fn missing_bmi_reported() {
        let order = strings(&["age", "bmi", "children"]);
        let q = "predict insurance charge for a 19 year old with no children";
        assert_eq!(
            RuleBasedProvider.extract_feature_values(q, &order, &insurance_columns()),
            Err(ProviderError::MissingFeature(vec!["bmi".into()]))
        );
    }

    #[test]
    fn student_extraction() {
        let cols = vec![
            numeric("Hours Studied"),
            numeric("Previous Scores"),
            categorical("Extracurricular Activities", &["No", "Yes"]),
            numeric("Sleep Hours"),
            numeric("Sample Question Papers Practiced"),
            numeric("Performance Index"),
        ];
        let q = "predict student performance for a student who studied 7 hours, previous scores of 99, with extra-curricular activities, 9 hours of sleep and practiced 1 sample question paper";
        let raw_order = strings(&[
            "Hours Studied",
            "Previous Scores",
            "Extracurricular Activities",
            "Sleep Hours",
            "Sample Question Papers Practiced",
        ]);
        assert_eq!(
            RuleBasedProvider.extract_feature_values(q, &raw_order, &cols).unwrap(),
            vec![7.0, 99.0, 1.0, 9.0, 1.0]
        );
        let encoded = strings(&[
            "Hours Studied",
            "Previous Scores",
            "Sleep Hours",
            "Sample Question Papers Practiced",
            "Extracurricular Activities_No",
            "Extracurricular Activities_Yes",
        ]);
        assert_eq!(
            RuleBasedProvider.extract_feature_values(q, &encoded, &cols).unwrap(),
            vec![7.0, 99.0, 9.0, 1.0, 0.0, 1.0]
        );
        let without = q.replace("with extra-curricular", "without extra-curricular");
        assert_eq!(RuleBasedProvider.extract_feature_values(&without, &raw_order, &cols).unwrap()[2], 0.0);
    }

    #[test]
    fn real_estate_extraction() {
        let cols: Vec<ColumnMeta> = [
            "X1 transaction date",
            "X2 house age",
            "X3 distance to the nearest MRT station",
            "X4 number of convenience stores",
            "X5 latitude",
            "X6 longitude",
        ]
        .iter()
        .map(|n| numeric(n))
        .collect();
        let order: Vec<String> = cols.iter().map(|c| c.name.clone()).collect();
        let q = "predict real estate price with transaction date 2012.917, house age 32, distance to the nearest MRT station 84.87882, number of convenience stores 10, latitude 24.98298, longitude 121.54024";
        assert_eq!(
            RuleBasedProvider.extract_feature_values(q, &order, &cols).unwrap(),
            vec![2012.917, 32.0, 84.87882, 10.0, 24.98298, 121.54024]
        );
    }

    #[test]
    fn user_ids() {
        let p = RuleBasedProvider;
        assert_eq!(p.extract_user_id("please recommend playlist based on user id 4407").unwrap(), "4407");
        assert_eq!(p.extract_user_id("recommend product id based on customer id 7172").unwrap(), "7172");
        assert_eq!(p.extract_user_id("recommend items for user u03").unwrap(), "u03");
        assert_eq!(p.extract_user_id("recommend me something"), Err(ProviderError::NoUserId));
    }

    #[test]
    fn algorithms_by_name() {
        assert_eq!(find_algorithm("RegressionModel"), Some(Algorithm::LinearRegression));
        assert_eq!(find_algorithm("logistic regression please"), Some(Algorithm::LogisticClassifier));
        assert_eq!(find_algorithm("recommender"), Some(Algorithm::Recommender));
        assert_eq!(find_algorithm("quantum_forest"), None);
    }

    proptest! {
        #[test]
        fn intent_is_total(msg in "\\PC{0,80}") {
            let _ = RuleBasedProvider.classify_intent(&msg);
        }

        #[test]
        fn extraction_shape(age in 1u32..99, bmi in 10.0f64..50.0, kids in 0u32..6, female in any::<bool>(), smoker in any::<bool>(), region in 0usize..4) {
            let regions = ["northeast", "northwest", "southeast", "southwest"];
            let q = format!(
                "predict charges for a {} year old {}, {}, living in {} with a BMI of {:.2} and {} children",
                age,
                if female { "female" } else { "male" },
                if smoker { "smoker" } else { "non-smoker" },
                regions[region],
                bmi,
                kids,
            );
            let order = strings(&[
                "age", "bmi", "children", "sex_female", "sex_male", "smoker_no", "smoker_yes",
                "region_northeast", "region_northwest", "region_southeast", "region_southwest",
            ]);
            let v = RuleBasedProvider.extract_feature_values(&q, &order, &insurance_columns()).unwrap();
            prop_assert_eq!(v.len(), order.len());
            prop_assert_eq!(v[0], age as f64);
            let written: f64 = format!("{:.2}", bmi).parse().unwrap();
            prop_assert!((v[1] - written).abs() < 1e-12);
            prop_assert_eq!(v[2], kids as f64);
            prop_assert_eq!(v[3] + v[4], 1.0);
            prop_assert_eq!(v[3], if female { 1.0 } else { 0.0 });
            prop_assert_eq!(v[6], if smoker { 1.0 } else { 0.0 });
            prop_assert_eq!(v[5] + v[6], 1.0);
            prop_assert_eq!(v[7..].iter().sum::<f64>(), 1.0);
            prop_assert_eq!(v[7 + region], 1.0);
        }
    }
}
