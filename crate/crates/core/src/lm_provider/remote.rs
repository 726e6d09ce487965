use std::time::Duration;

use serde::Deserialize;
use serde_json::{json, Value};

use super::rules::RuleBasedProvider;
use super::{ColumnSelection, Intent, LanguageProvider, ProviderError};
use crate::catalog::Target;
use crate::ml_engine::Task;
use crate::table::ColumnMeta;

pub const TOKEN_ENV: &str = "PQA_PROVIDER_TOKEN";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default)]
pub struct RemoteConfig {
    /// URL that receives `{"operation", "input"}` and answers `{"result"}`.
    pub endpoint: String,
    /// Bearer token; read from [`TOKEN_ENV`] when unset.
    pub token: Option<String>,
    pub timeout_ms: u64,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig { endpoint: String::new(), token: None, timeout_ms: 10_000 }
    }
}

/// Calls a remote language service and validates each answer against the
/// same shapes the rules produce. Any transport failure or malformed answer
/// is logged and the rule-based result is returned instead.
pub struct RemoteProvider {
    config: RemoteConfig,
    token: Option<String>,
    client: reqwest::blocking::Client,
    fallback: RuleBasedProvider,
}

impl RemoteProvider {
    pub fn new(config: RemoteConfig) -> Result<Self, ProviderError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| ProviderError::Remote(e.to_string()))?;
        let token = config.token.clone().or_else(|| std::env::var(TOKEN_ENV).ok()).filter(|t| !t.is_empty());
        Ok(RemoteProvider { config, token, client, fallback: RuleBasedProvider })
    }

    fn call(&self, operation: &str, input: Value) -> Result<Value, ProviderError> {
        let mut req = self.client.post(&self.config.endpoint).json(&json!({ "operation": operation, "input": input }));
        if let Some(t) = &self.token {
            req = req.bearer_auth(t);
        }
        let resp = req.send().map_err(|e| ProviderError::Remote(e.to_string()))?;
        if !resp.status().is_success() {
            return Err(ProviderError::Remote(format!("status {}", resp.status())));
        }
        let mut body: Value = resp.json().map_err(|e| ProviderError::Remote(e.to_string()))?;
        match body.get_mut("result") {
            Some(v) => Ok(v.take()),
            None => Err(ProviderError::Remote("answer has no result field".into())),
        }
    }

    /// Runs `op` remotely and parses it with `parse`; on failure logs and
    /// returns `fallback()`.
    fn with_fallback<T>(
        &self,
        operation: &str,
        input: Value,
        parse: impl FnOnce(Value) -> Result<T, ProviderError>,
        fallback: impl FnOnce() -> T,
    ) -> T {
        match self.call(operation, input).and_then(parse) {
            Ok(v) => v,
            Err(e) => {
                tracing::warn!(operation, error = %e, "remote provider failed, using rules");
                fallback()
            }
        }
    }
}

fn malformed(what: &str) -> ProviderError {
    ProviderError::Remote(format!("malformed {what}"))
}

/// A remote answer is either the value itself or `{"error": kind, ...}`
/// mirroring [`ProviderError`].
fn remote_error(v: &Value) -> Option<ProviderError> {
    let kind = v.get("error")?.as_str()?;
    Some(match kind {
        "no_target_match" => ProviderError::NoTargetMatch(v["detail"].as_str().unwrap_or_default().to_string()),
        "missing_feature" => ProviderError::MissingFeature(
            v["features"].as_array()?.iter().filter_map(|f| f.as_str().map(String::from)).collect(),
        ),
        "no_user_id" => ProviderError::NoUserId,
        _ => return None,
    })
}

fn parse_selection(
    v: Value,
    columns: &[String],
    task: Task,
) -> Result<Result<ColumnSelection, ProviderError>, ProviderError> {
    if let Some(e) = remote_error(&v) {
        return Ok(Err(e));
    }
    let sel: ColumnSelection = serde_json::from_value(v).map_err(|_| malformed("column selection"))?;
    let known = |c: &String| columns.contains(c);
    let valid = sel.task == task
        && !sel.features.is_empty()
        && sel.features.iter().all(known)
        && match &sel.target {
            Target::Column(t) => known(t) && !sel.features.contains(t),
            Target::Interaction { user_col, item_col } => {
                known(user_col) && known(item_col) && sel.features == [user_col.clone(), item_col.clone()]
            }
        };
    if valid {
        Ok(Ok(sel))
    } else {
        Err(malformed("column selection"))
    }
}

impl LanguageProvider for RemoteProvider {
    fn classify_intent(&self, message: &str) -> Intent {
        self.with_fallback(
            "classify_intent",
            json!({ "message": message }),
            |v| v.as_str().and_then(Intent::parse).ok_or_else(|| malformed("intent")),
            || self.fallback.classify_intent(message),
        )
    }

    fn needs_preprocessing(&self, query: &str) -> bool {
        self.with_fallback(
            "needs_preprocessing",
            json!({ "query": query }),
            |v| match v {
                Value::Bool(b) => Ok(b),
                Value::String(s) if matches!(s.to_lowercase().as_str(), "yes" | "no") => {
                    Ok(s.eq_ignore_ascii_case("yes"))
                }
                _ => Err(malformed("yes/no answer")),
            },
            || self.fallback.needs_preprocessing(query),
        )
    }

    fn select_columns(&self, query: &str, columns: &[String], task: Task) -> Result<ColumnSelection, ProviderError> {
        self.with_fallback(
            "select_columns",
            json!({ "query": query, "columns": columns, "task": task }),
            |v| parse_selection(v, columns, task),
            || self.fallback.select_columns(query, columns, task),
        )
    }

    fn extract_feature_values(
        &self,
        query: &str,
        feature_order: &[String],
        columns: &[ColumnMeta],
    ) -> Result<Vec<f64>, ProviderError> {
        self.with_fallback(
            "extract_feature_values",
            json!({ "query": query, "feature_order": feature_order, "columns": columns }),
            |v| {
                if let Some(e) = remote_error(&v) {
                    return Ok(Err(e));
                }
                let values: Vec<f64> = serde_json::from_value(v).map_err(|_| malformed("feature values"))?;
                if values.len() == feature_order.len() && values.iter().all(|x| x.is_finite()) {
                    Ok(Ok(values))
                } else {
                    Err(malformed("feature values"))
                }
            },
            || self.fallback.extract_feature_values(query, feature_order, columns),
        )
    }

    fn extract_user_id(&self, query: &str) -> Result<String, ProviderError> {
        self.with_fallback(
            "extract_user_id",
            json!({ "query": query }),
            |v| {
                if let Some(e) = remote_error(&v) {
                    return Ok(Err(e));
                }
                match v {
                    Value::String(s) if !s.trim().is_empty() => Ok(Ok(s.trim().to_string())),
                    Value::Number(n) => Ok(Ok(n.to_string())),
                    _ => Err(malformed("user id")),
                }
            },
            || self.fallback.extract_user_id(query),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::mpsc;
    use std::thread;

    /// Serves one canned JSON body per connection and reports each request.
    fn mock(bodies: Vec<String>) -> (String, mpsc::Receiver<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/provider", listener.local_addr().unwrap());
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for body in bodies {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut head = String::new();
                let mut len = 0usize;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                    head.push_str(&line);
                    if line == "\r\n" {
                        break;
                    }
                }
                let mut buf = vec![0; len];
                reader.read_exact(&mut buf).unwrap();
                tx.send(format!("{head}{}", String::from_utf8_lossy(&buf))).unwrap();
                let mut stream = stream;
                write!(
                    stream,
                    "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
            }
        });
        (url, rx)
    }

    fn provider(url: String) -> RemoteProvider {
        RemoteProvider::new(RemoteConfig { endpoint: url, token: Some("secret".into()), timeout_ms: 5_000 }).unwrap()
    }

    #[test]
    fn valid_answers_are_used() {
        let (url, rx) = mock(vec![
            r#"{"result":"guide"}"#.into(),
            r#"{"result":"yes"}"#.into(),
            r#"{"result":[1.5,2.0]}"#.into(),
            r#"{"result":"u-17"}"#.into(),
        ]);
        let p = provider(url);
        assert_eq!(p.classify_intent("predict charges"), Intent::Guide);
        let req = rx.recv().unwrap();
        assert!(req.contains("authorization: Bearer secret") || req.contains("Authorization: Bearer secret"));
        assert!(req.contains(r#""operation":"classify_intent""#));
        assert!(p.needs_preprocessing("predict charges"));
        let cols = vec![ColumnMeta {
            name: "a".into(),
            dtype: crate::table::ColumnType::Numeric,
            distinct_hint: 1,
            categories: vec![],
        }];
        assert_eq!(p.extract_feature_values("q", &["a".into(), "b".into()], &cols).unwrap(), vec![1.5, 2.0]);
        assert_eq!(p.extract_user_id("recommend for user 5").unwrap(), "u-17");
    }

    #[test]
    fn malformed_answers_fall_back() {
        let (url, _rx) = mock(vec![
            r#"{"result":"dance"}"#.into(),
            r#"{"nothing":1}"#.into(),
            r#"{"result":[1.0, 2.0]}"#.into(),
            r#"{"result":{"task":"regression","features":["zz"],"target":"charges"}}"#.into(),
        ]);
        let p = provider(url);
        assert_eq!(p.classify_intent("help"), Intent::Guide);
        assert!(!p.needs_preprocessing("predict charges for a 19 year old"));
        let cols = vec![ColumnMeta {
            name: "age".into(),
            dtype: crate::table::ColumnType::Numeric,
            distinct_hint: 1,
            categories: vec![],
        }];
        assert_eq!(p.extract_feature_values("a 19 year old", &["age".into()], &cols).unwrap(), vec![19.0]);
        let names = vec!["age".to_string(), "charges".to_string()];
        let sel = p.select_columns("predict charges", &names, Task::Regression).unwrap();
        assert_eq!(sel.target, Target::Column("charges".into()));
    }

    #[test]
    fn unreachable_endpoint_falls_back() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/", listener.local_addr().unwrap());
        drop(listener);
        let p = provider(url);
        assert_eq!(p.classify_intent("yes"), Intent::Confirm);
        assert_eq!(p.extract_user_id("recommend playlist based on user id 4407").unwrap(), "4407");
    }

    #[test]
    fn remote_errors_pass_through() {
        let (url, _rx) = mock(vec![r#"{"result":{"error":"missing_feature","features":["bmi"]}}"#.into()]);
        let p = provider(url);
        assert_eq!(
            p.extract_feature_values("q", &["bmi".into()], &[]),
            Err(ProviderError::MissingFeature(vec!["bmi".into()]))
        );
    }
}
