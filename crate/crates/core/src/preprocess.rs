//! Row filters taken from the restriction clauses of a query ("only consider
//! female data", "house age less than 30") and applied to a dataset before
//! training.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::profile::py_str;
use crate::lm_provider::rules::pick_category;
use crate::lm_provider::text::{column_tokens, is_task_verb, token_match, tokenize, Token, TokenKind, STOPWORDS};
use crate::table::{parse_number, ColumnMeta, Table};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PreprocessError {
    #[error("could not apply the restriction {0:?} to any column")]
    UnresolvedClause(String),
    #[error("no rows are left after filtering")]
    EmptyResult,
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("column {column:?} cannot be compared with {value}")]
    TypeMismatch { column: String, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Op::Eq => "==",
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FilterValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub column: String,
    pub op: Op,
    pub value: FilterValue,
}

impl Clause {
    fn matches(&self, cell: &str) -> bool {
        match &self.value {
            FilterValue::Text(v) => self.op == Op::Eq && cell == v,
            FilterValue::Number(v) => {
                let Some(x) = parse_number(cell) else { return false };
                match self.op {
                    Op::Eq => x == *v,
                    Op::Lt => x < *v,
                    Op::Le => x <= *v,
                    Op::Gt => x > *v,
                    Op::Ge => x >= *v,
                }
            }
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            FilterValue::Number(v) => write!(f, "{} {} {}", py_str(&self.column), self.op, v),
            FilterValue::Text(v) => write!(f, "{} {} {}", py_str(&self.column), self.op, py_str(v)),
        }
    }
}

/// Conjunction of clauses; the empty predicate keeps every row.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Predicate {
    pub clauses: Vec<Clause>,
}

impl Predicate {
    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Readable form such as `'sex' == 'female' and 'age' < 30`.
    pub fn describe(&self) -> String {
        self.clauses.iter().map(Clause::to_string).collect::<Vec<_>>().join(" and ")
    }

    /// Every column exists, numbers go with numeric columns and text with
    /// categorical ones, and ordering comparisons are numeric.
    pub fn validate(&self, schema: &[ColumnMeta]) -> Result<(), PreprocessError> {
        for c in &self.clauses {
            let meta = schema
                .iter()
                .find(|m| m.name == c.column)
                .ok_or_else(|| PreprocessError::UnknownColumn(c.column.clone()))?;
            let numeric_value = matches!(c.value, FilterValue::Number(_));
            if numeric_value != meta.is_numeric() || (c.op != Op::Eq && !numeric_value) {
                let value = c.to_string();
                return Err(PreprocessError::TypeMismatch { column: c.column.clone(), value });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Rows of `table` satisfying every clause, in their original order.
pub fn apply_filter(table: &Table, predicate: &Predicate) -> Result<Table, PreprocessError> {
    let mut cols = Vec::with_capacity(predicate.clauses.len());
    for c in &predicate.clauses {
        cols.push(table.column_index(&c.column).ok_or_else(|| PreprocessError::UnknownColumn(c.column.clone()))?);
    }
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .filter(|r| predicate.clauses.iter().zip(&cols).all(|(c, &i)| c.matches(&r[i])))
        .cloned()
        .collect();
    if rows.is_empty() {
        return Err(PreprocessError::EmptyResult);
    }
    Ok(Table { headers: table.headers.clone(), rows })
}

const RESTRICTION_WORDS: &[&str] = &[
    "only",
    "consider",
    "considering",
    "use",
    "using",
    "include",
    "including",
    "keep",
    "restrict",
    "restricted",
    "limit",
    "limited",
    "data",
    "dataset",
    "row",
    "record",
    "entry",
    "sample",
    "case",
    "where",
    "whose",
    "with",
    "for",
    "from",
    "filter",
    "filtered",
    "than",
    "equal",
    "exactly",
    "least",
    "most",
    "people",
    "person",
];

const TIME_UNITS: &[&str] = &["day", "week", "month", "year", "quarter", "hour", "decade"];

/// Comparison phrases, longest first so "no more than" wins over "more than".
const COMPARATORS: &[(&str, Op)] = &[
    ("no more than", Op::Le),
    ("not more than", Op::Le),
    ("no less than", Op::Ge),
    ("not less than", Op::Ge),
    ("less than or equal to", Op::Le),
    ("greater than or equal to", Op::Ge),
    ("less than", Op::Lt),
    ("fewer than", Op::Lt),
    ("lower than", Op::Lt),
    ("smaller than", Op::Lt),
    ("younger than", Op::Lt),
    ("greater than", Op::Gt),
    ("more than", Op::Gt),
    ("higher than", Op::Gt),
    ("larger than", Op::Gt),
    ("older than", Op::Gt),
    ("at least", Op::Ge),
    ("at most", Op::Le),
    ("equal to", Op::Eq),
    ("equals", Op::Eq),
    ("exactly", Op::Eq),
    ("below", Op::Lt),
    ("under", Op::Lt),
    ("above", Op::Gt),
    ("over", Op::Gt),
];

const RESTRICTION_PHRASES: &[&str] = &[
    "only consider",
    "consider only",
    "only use",
    "use only",
    "only include",
    "only keep",
    "restrict to",
    "restricted to",
    "limited to",
    "limit to",
    "filter",
    "only",
];

fn has_phrase(texts: &[&str], phrase: &str) -> Option<usize> {
    let p: Vec<&str> = phrase.split(' ').collect();
    texts.windows(p.len()).position(|w| w == p.as_slice())
}

fn is_time_window(texts: &[&str]) -> bool {
    texts.windows(2).enumerate().any(|(i, w)| {
        matches!(w[0], "past" | "last" | "previous" | "recent")
            && texts[i + 1..].iter().take(3).any(|t| TIME_UNITS.iter().any(|u| t.trim_end_matches('s') == *u))
    })
}

/// Best column for the words `phrase` by stem overlap, first in schema order
/// on ties.
fn match_column<'a>(phrase: &[&Token], schema: &'a [ColumnMeta], numeric: bool) -> Option<&'a ColumnMeta> {
    let stems: Vec<&str> = phrase
        .iter()
        .filter(|t| t.kind == TokenKind::Word)
        .map(|t| t.stem.as_str())
        .filter(|s| !STOPWORDS.contains(s) && !RESTRICTION_WORDS.contains(s))
        .collect();
    let mut best: Option<(&ColumnMeta, usize)> = None;
    for meta in schema.iter().filter(|m| m.is_numeric() == numeric) {
        let col = column_tokens(&meta.name);
        let score = stems.iter().filter(|s| col.iter().any(|c| token_match(s, c))).count();
        if score > 0 && best.is_none_or(|(_, b)| score > b) {
            best = Some((meta, score));
        }
    }
    best.map(|(m, _)| m)
}

/// Comparison clauses in one query clause, e.g. `house age less than 30`.
/// `older`/`younger` imply an age column when no other words name one.
fn comparisons(tokens: &[&Token], schema: &[ColumnMeta]) -> Result<Vec<Clause>, PreprocessError> {
    let texts: Vec<&str> = tokens.iter().map(|t| t.text.as_str()).collect();
    let mut out = Vec::new();
    let mut from = 0;
    while from < texts.len() {
        let hit = COMPARATORS
            .iter()
            .filter_map(|(p, op)| has_phrase(&texts[from..], p).map(|i| (from + i, p.split(' ').count(), *op, *p)))
            .min_by_key(|(i, len, _, _)| (*i, std::cmp::Reverse(*len)));
        let Some((at, len, op, phrase)) = hit else { break };
        let after = at + len;
        let Some(num_at) = tokens[after..].iter().take(3).position(|t| t.number().is_some()).map(|p| after + p) else {
            from = after;
            continue;
        };
        let value = tokens[num_at].number().expect("position found a number");
        let age = tokenize("age");
        let mut words: Vec<&Token> = tokens[from..at].to_vec();
        if phrase.starts_with("older") || phrase.starts_with("younger") {
            words.extend(&age);
        }
        // "30 years or older" style phrases are not handled; the column
        // phrase may also follow the number ("under 30 years of age")
        let tail_end = tokens[num_at + 1..]
            .iter()
            .position(|t| COMPARATORS.iter().any(|(p, _)| p.split(' ').next() == Some(t.text.as_str())))
            .map_or(tokens.len(), |p| num_at + 1 + p);
        let column = match_column(&words, schema, true)
            .or_else(|| match_column(&tokens[num_at + 1..tail_end], schema, true))
            .ok_or_else(|| PreprocessError::UnresolvedClause(texts[from..=num_at].join(" ")))?;
        out.push(Clause { column: column.name.clone(), op, value: FilterValue::Number(value) });
        from = num_at + 1;
    }
    Ok(out)
}

/// Category clauses: each categorical column whose value is named.
fn categories(tokens: &[&Token], schema: &[ColumnMeta]) -> Vec<Clause> {
    schema
        .iter()
        .filter(|m| !m.is_numeric() && !m.categories.is_empty())
        .filter_map(|m| {
            pick_category(tokens, &m.name, &m.categories).map(|i| Clause {
                column: m.name.clone(),
                op: Op::Eq,
                value: FilterValue::Text(m.categories[i].clone()),
            })
        })
        .collect()
}

/// Filter clauses of `query` against `schema`. Clauses before the task verb
/// and clauses anywhere that start with a restriction phrase are read; a
/// restriction that names no column is an error rather than ignored.
pub fn parse_filter(query: &str, schema: &[ColumnMeta]) -> Result<Predicate, PreprocessError> {
    let tokens = tokenize(query);
    let verb_clause = tokens.iter().find(|t| is_task_verb(&t.text)).map(|t| t.clause);
    let n_clauses = tokens.last().map_or(0, |t| t.clause + 1);
    let mut clauses: Vec<Clause> = Vec::new();
    // a bare "only use rows" waits for the clause that follows it
    let mut pending: Option<String> = None;
    for c in 0..n_clauses {
        let mut part: Vec<&Token> = tokens.iter().filter(|t| t.clause == c).collect();
        let texts: Vec<&str> = part.iter().map(|t| t.text.as_str()).collect();
        let restricted = RESTRICTION_PHRASES.iter().any(|p| has_phrase(&texts, p).is_some());
        let before_verb = verb_clause.is_none_or(|v| c < v);
        if verb_clause == Some(c) {
            // only the words ahead of the verb can restrict rows here
            let v = part.iter().position(|t| is_task_verb(&t.text)).unwrap_or(0);
            if !restricted || v == 0 {
                continue;
            }
            part.truncate(v);
        } else if !before_verb && !restricted {
            continue;
        }
        let texts: Vec<&str> = part.iter().map(|t| t.text.as_str()).collect();
        let raw = part.iter().map(|t| t.raw.as_str()).collect::<Vec<_>>().join(" ");
        if is_time_window(&texts) {
            return Err(PreprocessError::UnresolvedClause(raw));
        }
        let found = comparisons(&part, schema)?;
        let found = if found.is_empty() { categories(&part, schema) } else { found };
        if found.is_empty() && restricted {
            let bare = part
                .iter()
                .all(|t| RESTRICTION_WORDS.contains(&t.stem.as_str()) || STOPWORDS.contains(&t.stem.as_str()));
            if !bare {
                return Err(PreprocessError::UnresolvedClause(raw));
            }
            pending.get_or_insert(raw);
            continue;
        }
        if !found.is_empty() {
            pending = None;
        }
        for f in found {
            if !clauses.contains(&f) {
                clauses.push(f);
            }
        }
    }
    if let Some(raw) = pending {
        return Err(PreprocessError::UnresolvedClause(raw));
    }
    let predicate = Predicate { clauses };
    predicate.validate(schema)?;
    Ok(predicate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn insurance() -> Table {
        let csv = "age,sex,bmi,children,smoker,region,charges\n\
            19,female,27.9,0,yes,southwest,16884.924\n\
            18,male,33.77,1,no,southeast,1725.5523\n\
            28,male,33,3,no,southeast,4449.462\n\
            33,male,22.705,0,no,northwest,21984.47061\n\
            32,male,28.88,0,no,northwest,3866.8552\n\
            31,female,25.74,0,no,southeast,3756.6216\n\
            46,female,33.44,1,no,southeast,8240.5896\n\
            37,female,27.74,3,no,northwest,7281.5056\n";
        Table::from_csv(csv.as_bytes()).unwrap()
    }

    fn real_estate() -> Table {
        let csv = "No,X1 transaction date,X2 house age,X3 distance to the nearest MRT station,X4 number of convenience stores,X5 latitude,X6 longitude,Y house price of unit area\n\
            1,2012.917,32,84.87882,10,24.98298,121.54024,37.9\n\
            2,2012.917,19.5,306.5947,9,24.98034,121.53951,42.2\n\
            3,2013.583,13.3,561.9845,5,24.98746,121.54391,47.3\n\
            4,2013.500,13.3,561.9845,5,24.98746,121.54391,54.8\n\
            5,2012.833,5,390.5684,5,24.97937,121.54245,43.1\n\
            6,2012.667,7.1,2175.03,3,24.96305,121.51254,32.1\n\
            7,2012.667,34.5,623.4731,7,24.97933,121.53642,40.3\n\
            8,2013.417,20.3,287.6025,6,24.98042,121.54228,46.7\n\
            9,2013.500,31.7,5512.038,1,24.95095,121.48458,18.8\n\
            10,2013.417,17.9,1783.18,3,24.96731,121.51486,22.1\n";
        Table::from_csv(csv.as_bytes()).unwrap()
    }

    fn eq(column: &str, v: &str) -> Clause {
        Clause { column: column.into(), op: Op::Eq, value: FilterValue::Text(v.into()) }
    }

    fn num(column: &str, op: Op, v: f64) -> Clause {
        Clause { column: column.into(), op, value: FilterValue::Number(v) }
    }

    #[test]
    fn female_restriction() {
        let q = "only consider female data from the dataset, predict insurance charge for a 19 year old female, non-smoker, living in northeast with a BMI of 27.9 and no children";
        let p = parse_filter(q, &insurance().infer_schema()).unwrap();
        assert_eq!(p.clauses, vec![eq("sex", "female")]);
        assert_eq!(p.describe(), "'sex' == 'female'");
    }

    #[test]
    fn house_age_restriction() {
        let q = "only consider house age less than 30, predict real estate price with transaction date 2012.917, house age 32, distance to the nearest MRT station 84.87882, number of convenience stores 10, latitude 24.98298, longitude 121.54024";
        let t = real_estate();
        let p = parse_filter(q, &t.infer_schema()).unwrap();
        assert_eq!(p.clauses, vec![num("X2 house age", Op::Lt, 30.0)]);
        let kept = apply_filter(&t, &p).unwrap();
        let ids: Vec<&str> = kept.rows.iter().map(|r| r[0].as_str()).collect();
        assert_eq!(ids, ["2", "3", "4", "5", "6", "8", "10"]);
    }

    #[test]
    fn other_phrasings() {
        let schema = insurance().infer_schema();
        let p = parse_filter("for people older than 30 and bmi at most 30, predict charges", &schema).unwrap();
        assert_eq!(p.clauses, vec![num("age", Op::Gt, 30.0), num("bmi", Op::Le, 30.0)]);
        let p = parse_filter("only consider non-smokers, predict charges for a 20 year old", &schema).unwrap();
        assert_eq!(p.clauses, vec![eq("smoker", "no")]);
        let p = parse_filter("only use rows with at least 1 children, predict charges", &schema).unwrap();
        assert_eq!(p.clauses, vec![num("children", Op::Ge, 1.0)]);
        let p = parse_filter("predict charges for a 19 year old female", &schema).unwrap();
        assert!(p.is_empty());
    }

    #[test]
    fn unresolved_restrictions() {
        let schema = insurance().infer_schema();
        assert!(matches!(
            parse_filter("only consider sparkly data, predict charges", &schema),
            Err(PreprocessError::UnresolvedClause(_))
        ));
        assert!(matches!(
            parse_filter("only consider data from the past six months, predict charges", &schema),
            Err(PreprocessError::UnresolvedClause(_))
        ));
    }

    #[test]
    fn filter_counts_match_linear_scan() {
        let t = insurance();
        let kept = apply_filter(&t, &Predicate { clauses: vec![eq("sex", "female")] }).unwrap();
        let oracle = t.rows.iter().filter(|r| r[1] == "female").count();
        assert_eq!(kept.len(), oracle);
        assert_eq!(apply_filter(&t, &Predicate::default()).unwrap(), t);
        assert_eq!(
            apply_filter(&t, &Predicate { clauses: vec![num("age", Op::Lt, 0.0)] }),
            Err(PreprocessError::EmptyResult)
        );
        assert!(matches!(
            apply_filter(&t, &Predicate { clauses: vec![eq("colour", "red")] }),
            Err(PreprocessError::UnknownColumn(_))
        ));
    }

    #[test]
    fn validation() {
        let schema = insurance().infer_schema();
        assert!(Predicate { clauses: vec![num("sex", Op::Lt, 3.0)] }.validate(&schema).is_err());
        assert!(Predicate { clauses: vec![eq("age", "old")] }.validate(&schema).is_err());
        assert!(Predicate { clauses: vec![num("age", Op::Eq, 19.0)] }.validate(&schema).is_ok());
    }

    fn clause_strategy() -> impl Strategy<Value = Clause> {
        prop_oneof![
            (
                prop::sample::select(vec!["age", "bmi", "children", "charges"]),
                prop::sample::select(vec![Op::Eq, Op::Lt, Op::Le, Op::Gt, Op::Ge]),
                0.0f64..60.0
            )
                .prop_map(|(c, op, v)| num(c, op, v.round())),
            prop::sample::select(vec![("sex", "female"), ("sex", "male"), ("smoker", "no"), ("region", "southeast")])
                .prop_map(|(c, v)| eq(c, v)),
        ]
    }

    fn kept(t: &Table, p: &Predicate) -> Vec<Vec<String>> {
        apply_filter(t, p).map(|t| t.rows).unwrap_or_default()
    }

    proptest! {
        #[test]
        fn filter_is_ordered_subset(clauses in prop::collection::vec(clause_strategy(), 0..4)) {
            let t = insurance();
            let p = Predicate { clauses };
            let rows = kept(&t, &p);
            let mut it = t.rows.iter();
            for r in &rows {
                prop_assert!(it.any(|x| x == r), "not an order-preserving subsequence");
            }
        }

        #[test]
        fn filter_is_idempotent(clauses in prop::collection::vec(clause_strategy(), 0..4)) {
            let t = insurance();
            let p = Predicate { clauses };
            if let Ok(once) = apply_filter(&t, &p) {
                prop_assert_eq!(apply_filter(&once, &p).unwrap(), once);
            }
        }

        #[test]
        fn conjunction_is_intersection(clauses in prop::collection::vec(clause_strategy(), 1..4)) {
            let t = insurance();
            let all = kept(&t, &Predicate { clauses: clauses.clone() });
            let each: Vec<Vec<Vec<String>>> =
                clauses.iter().map(|c| kept(&t, &Predicate { clauses: vec![c.clone()] })).collect();
            let oracle: Vec<Vec<String>> =
                t.rows.iter().filter(|r| each.iter().all(|k| k.contains(r))).cloned().collect();
            prop_assert_eq!(all, oracle);
        }
    }
}
