use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::MlError;
use crate::table::{parse_number, ColumnMeta, Table};

/// Categorical columns with more distinct values than this are not one-hot encoded.
pub const MAX_ONE_HOT_VALUES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EncodedKind {
    Numeric,
    OneHot(String),
}

/// One column of the encoded design matrix and the raw column it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedColumn {
    pub name: String,
    pub source: String,
    pub kind: EncodedKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub feature_names: Vec<String>,
    /// Row-major, `rows.len() == n`, each row has `feature_names.len()` cells.
    pub rows: Vec<Vec<f64>>,
    pub target: Option<Vec<f64>>,
}

impl DesignMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    pub matrix: DesignMatrix,
    pub dropped_rows: usize,
}

/// Encoded column layout of a table: numeric columns in schema order, then one
/// `<column>_<value>` indicator per distinct value of each categorical column
/// (values ascending), groups in schema order.
pub fn encoded_columns(table: &Table, schema: &[ColumnMeta]) -> Vec<EncodedColumn> {
    let mut out: Vec<EncodedColumn> = schema
        .iter()
        .filter(|c| c.is_numeric())
        .map(|c| EncodedColumn { name: c.name.clone(), source: c.name.clone(), kind: EncodedKind::Numeric })
        .collect();
    for col in schema.iter().filter(|c| !c.is_numeric()) {
        let Some(ci) = table.column_index(&col.name) else { continue };
        let values: BTreeSet<&str> = table.rows.iter().map(|r| r[ci].as_str()).filter(|s| !s.is_empty()).collect();
        if values.len() > MAX_ONE_HOT_VALUES {
            continue;
        }
        out.extend(values.into_iter().map(|v| EncodedColumn {
            name: format!("{}_{}", col.name, v),
            source: col.name.clone(),
            kind: EncodedKind::OneHot(v.to_string()),
        }));
    }
    out
}

/// Columns that only number the rows: named like a row index, or numeric
/// columns whose values are exactly `1..=n` or `0..n` in file order.
pub fn identifier_columns(table: &Table, schema: &[ColumnMeta]) -> Vec<String> {
    const ID_NAMES: [&str; 6] = ["no", "id", "index", "unnamed: 0", "row", "row_id"];
    schema
        .iter()
        .filter(|c| {
            let lname = c.name.trim().to_ascii_lowercase();
            if ID_NAMES.contains(&lname.as_str()) || lname.is_empty() {
                return true;
            }
            if !c.is_numeric() {
                return false;
            }
            let Some(ci) = table.column_index(&c.name) else { return false };
            let vals: Option<Vec<f64>> = table.rows.iter().map(|r| parse_number(&r[ci])).collect();
            let Some(vals) = vals else { return false };
            vals.len() > 2 && (0..2).any(|start| vals.iter().enumerate().all(|(i, v)| *v == (i + start) as f64))
        })
        .map(|c| c.name.clone())
        .collect()
}

/// Builds the design matrix for `features` (encoded names) and an optional
/// encoded `target`. Rows with an unusable cell in any needed raw column are
/// dropped and counted. If the target is a one-hot indicator, features from
/// the same raw column are left out.
pub fn encode(
    table: &Table,
    schema: &[ColumnMeta],
    features: &[String],
    target: Option<&str>,
) -> Result<Encoding, MlError> {
    let layout = encoded_columns(table, schema);
    let lookup = |name: &str| -> Result<EncodedColumn, MlError> {
        layout.iter().find(|c| c.name == name).cloned().ok_or_else(|| MlError::UnknownColumn(name.to_string()))
    };
    let target_col = target.map(lookup).transpose()?;
    let mut feature_cols = Vec::with_capacity(features.len());
    for f in features {
        let col = lookup(f)?;
        if let Some(t) = &target_col {
            if col.name == t.name || (t.kind != EncodedKind::Numeric && col.source == t.source) {
                continue;
            }
        }
        feature_cols.push(col);
    }

    let mut needed: Vec<&str> = feature_cols.iter().map(|c| c.source.as_str()).collect();
    if let Some(t) = &target_col {
        needed.push(&t.source);
    }
    needed.sort_unstable();
    needed.dedup();
    let needed: Vec<(usize, bool)> = needed
        .iter()
        .map(|name| {
            let ci = table.column_index(name).ok_or_else(|| MlError::UnknownColumn(name.to_string()))?;
            let numeric = schema.iter().find(|c| c.name == *name).is_some_and(ColumnMeta::is_numeric);
            Ok((ci, numeric))
        })
        .collect::<Result<_, MlError>>()?;

    let cell_value = |row: &[String], col: &EncodedColumn| -> f64 {
        let ci = table.column_index(&col.source).expect("validated above");
        match &col.kind {
            EncodedKind::Numeric => parse_number(&row[ci]).expect("validated row"),
            EncodedKind::OneHot(v) => f64::from(u8::from(row[ci] == *v)),
        }
    };

    let mut rows = Vec::new();
    let mut targets = Vec::new();
    let mut dropped = 0;
    for row in &table.rows {
        let usable = needed.iter().all(|&(ci, numeric)| {
            let cell = row[ci].as_str();
            if numeric {
                parse_number(cell).is_some()
            } else {
                !cell.is_empty()
            }
        });
        if !usable {
            dropped += 1;
            continue;
        }
        rows.push(feature_cols.iter().map(|c| cell_value(row, c)).collect());
        if let Some(t) = &target_col {
            targets.push(cell_value(row, t));
        }
    }
    if rows.is_empty() {
        return Err(MlError::AllRowsDropped { dropped });
    }
    Ok(Encoding {
        matrix: DesignMatrix {
            feature_names: feature_cols.into_iter().map(|c| c.name).collect(),
            rows,
            target: target_col.map(|_| targets),
        },
        dropped_rows: dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(csv: &str) -> (Table, Vec<ColumnMeta>) {
        let t = Table::from_csv(csv.as_bytes()).unwrap();
        let s = t.infer_schema();
        (t, s)
    }

    const INSURANCE_HEAD: &str = "age,sex,bmi,children,smoker,region,charges
19,female,27.9,0,yes,southwest,16884.924
18,male,33.77,1,no,southeast,1725.5523
28,male,33,3,no,southeast,4449.462
33,male,22.705,0,no,northwest,21984.47061
32,male,28.88,0,no,northwest,3866.8552
31,female,25.74,0,no,southeast,3756.6216
46,female,33.44,1,no,southeast,8240.5896
37,female,27.74,3,no,northwest,7281.5056
37,male,29.83,2,no,northeast,6406.4107
60,female,25.84,0,no,northwest,28923.13692
";

    #[test]
    fn insurance_layout_matches_dummy_order() {
        let (t, s) = table(INSURANCE_HEAD);
        let names: Vec<String> = encoded_columns(&t, &s).into_iter().map(|c| c.name).collect();
        assert_eq!(
            names,
            [
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
                "region_southwest"
            ]
        );
    }

    #[test]
    fn encode_insurance_features() {
        let (t, s) = table(INSURANCE_HEAD);
        let feats: Vec<String> = [
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
            "region_southwest",
        ]
        .map(String::from)
        .to_vec();
        let enc = encode(&t, &s, &feats, Some("charges")).unwrap();
        assert_eq!(enc.matrix.n_features(), 11);
        assert_eq!(enc.matrix.n_rows(), 10);
        assert_eq!(enc.dropped_rows, 0);
        assert_eq!(enc.matrix.rows[0], vec![19.0, 27.9, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(enc.matrix.target.as_ref().unwrap()[0], 16884.924);
        // one-hot groups are exclusive in every row
        for row in &enc.matrix.rows {
            assert_eq!(row[3] + row[4], 1.0);
            assert_eq!(row[5] + row[6], 1.0);
            assert_eq!(row[7..11].iter().sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn single_value_column_is_all_ones() {
        let (t, s) = table("c,y\nx,1\nx,2\nx,3\n");
        let enc = encode(&t, &s, &["c_x".to_string()], Some("y")).unwrap();
        assert!(enc.matrix.rows.iter().all(|r| r == &vec![1.0]));
    }

    #[test]
    fn unparseable_numeric_row_dropped() {
        // "abc" makes the column categorical, so build the schema by hand
        let t = Table::from_csv("a,y\n1,2\nabc,3\n4,5\n".as_bytes()).unwrap();
        let mut s = t.infer_schema();
        s[0].dtype = crate::table::ColumnType::Numeric;
        s[0].categories.clear();
        let enc = encode(&t, &s, &["a".to_string()], Some("y")).unwrap();
        assert_eq!(enc.dropped_rows, 1);
        assert_eq!(enc.matrix.rows, vec![vec![1.0], vec![4.0]]);
    }

    #[test]
    fn all_rows_dropped() {
        let t = Table::from_csv("a,y\nabc,3\n".as_bytes()).unwrap();
        let mut s = t.infer_schema();
        s[0].dtype = crate::table::ColumnType::Numeric;
        assert!(matches!(encode(&t, &s, &["a".to_string()], Some("y")), Err(MlError::AllRowsDropped { dropped: 1 })));
    }

    #[test]
    fn one_hot_target_excludes_its_siblings() {
        let (t, s) = table(INSURANCE_HEAD);
        let feats: Vec<String> = ["age", "smoker_no", "smoker_yes"].map(String::from).to_vec();
        let enc = encode(&t, &s, &feats, Some("smoker_yes")).unwrap();
        assert_eq!(enc.matrix.feature_names, vec!["age"]);
        assert_eq!(enc.matrix.target.unwrap()[0], 1.0);
    }

    #[test]
    fn identifier_detection() {
        let (t, s) = table("No,x,y\n1,5,2\n2,3,4\n3,9,1\n");
        assert_eq!(identifier_columns(&t, &s), vec!["No"]);
        let (t, s) = table("seq,y\n0,2\n1,4\n2,1\n");
        assert_eq!(identifier_columns(&t, &s), vec!["seq"]);
        let (t, s) = table("hours,y\n1,2\n2,4\n2,1\n");
        assert!(identifier_columns(&t, &s).is_empty());
    }
}
