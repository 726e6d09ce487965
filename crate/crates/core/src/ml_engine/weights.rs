//! Binary weights file.
//!
//! Layout: 8-byte magic, `u32` version, `u8` kind tag, then the model body.
//! Integers are little-endian `u64` lengths, floats little-endian `f64`,
//! strings are length-prefixed UTF-8 and the training config is stored as a
//! JSON string. Values round-trip bit for bit.

use std::path::Path;

use super::{LinearModel, LogisticModel, MlError, RecommenderModel, TrainConfig, TrainedModel};

pub const WEIGHTS_MAGIC: &[u8; 8] = b"PQAWGT1\0";
const VERSION: u32 = 1;

const TAG_LINEAR: u8 = 1;
const TAG_LOGISTIC: u8 = 2;
const TAG_RECOMMENDER: u8 = 3;

struct Writer(Vec<u8>);

impl Writer {
    fn len(&mut self, n: usize) {
        self.0.extend_from_slice(&(n as u64).to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn floats(&mut self, v: &[f64]) {
        self.len(v.len());
        v.iter().for_each(|x| self.f64(*x));
    }

    fn str(&mut self, s: &str) {
        self.len(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }

    fn strings(&mut self, v: &[String]) {
        self.len(v.len());
        v.iter().for_each(|s| self.str(s));
    }

    fn config(&mut self, c: &TrainConfig) {
        self.str(&serde_json::to_string(c).expect("config serializes"));
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], MlError> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.buf.len());
        let end = end.ok_or_else(|| MlError::Format(format!("truncated at byte {}", self.pos)))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u64(&mut self) -> Result<u64, MlError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    /// A length that must fit in the rest of the buffer at `unit` bytes per element.
    fn len(&mut self, unit: usize) -> Result<usize, MlError> {
        let n = self.u64()?;
        let remaining = (self.buf.len() - self.pos) as u64;
        if n.saturating_mul(unit.max(1) as u64) > remaining {
            return Err(MlError::Format(format!("length {n} exceeds remaining {remaining} bytes")));
        }
        Ok(n as usize)
    }

    fn f64(&mut self) -> Result<f64, MlError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn floats(&mut self) -> Result<Vec<f64>, MlError> {
        let n = self.len(8)?;
        (0..n).map(|_| self.f64()).collect()
    }

    fn str(&mut self) -> Result<String, MlError> {
        let n = self.len(1)?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|e| MlError::Format(e.to_string()))
    }

    fn strings(&mut self) -> Result<Vec<String>, MlError> {
        let n = self.len(8)?;
        (0..n).map(|_| self.str()).collect()
    }

    fn config(&mut self) -> Result<TrainConfig, MlError> {
        serde_json::from_str(&self.str()?).map_err(|e| MlError::Format(format!("train config: {e}")))
    }
}

fn expect_len(what: &str, actual: usize, expected: usize) -> Result<(), MlError> {
    if actual != expected {
        return Err(MlError::Format(format!("{what}: expected {expected} values, found {actual}")));
    }
    Ok(())
}

pub fn write_weights(model: &TrainedModel) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(WEIGHTS_MAGIC);
    w.0.extend_from_slice(&VERSION.to_le_bytes());
    match model {
        TrainedModel::Linear(m) => {
            w.0.push(TAG_LINEAR);
            w.config(&m.config);
            w.strings(&m.feature_order);
            w.floats(&m.coefficients);
            w.f64(m.intercept);
        }
        TrainedModel::Logistic(m) => {
            w.0.push(TAG_LOGISTIC);
            w.config(&m.config);
            w.strings(&m.feature_order);
            w.floats(&m.means);
            w.floats(&m.stds);
            w.floats(&m.coefficients);
            w.f64(m.intercept);
        }
        TrainedModel::Recommender(m) => {
            w.0.push(TAG_RECOMMENDER);
            w.config(&m.config);
            w.len(m.dim);
            w.strings(&m.user_vocab);
            w.strings(&m.item_vocab);
            w.floats(&m.user_factors);
            w.floats(&m.item_factors);
            w.floats(&m.weights);
            w.f64(m.bias);
            w.len(m.seen.len());
            for items in &m.seen {
                w.len(items.len());
                items.iter().for_each(|i| w.0.extend_from_slice(&i.to_le_bytes()));
            }
        }
    }
    w.0
}

pub fn read_weights(bytes: &[u8]) -> Result<TrainedModel, MlError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(8).ok() != Some(WEIGHTS_MAGIC.as_slice()) {
        return Err(MlError::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(MlError::Format(format!("unsupported version {version}")));
    }
    let tag = r.take(1)?[0];
    let model = match tag {
        TAG_LINEAR => {
            let config = r.config()?;
            let feature_order = r.strings()?;
            let coefficients = r.floats()?;
            expect_len("coefficients", coefficients.len(), feature_order.len())?;
            let intercept = r.f64()?;
            TrainedModel::Linear(LinearModel { feature_order, coefficients, intercept, config })
        }
        TAG_LOGISTIC => {
            let config = r.config()?;
            let feature_order = r.strings()?;
            let f = feature_order.len();
            let means = r.floats()?;
            let stds = r.floats()?;
            let coefficients = r.floats()?;
            expect_len("means", means.len(), f)?;
            expect_len("stds", stds.len(), f)?;
            expect_len("coefficients", coefficients.len(), f)?;
            let intercept = r.f64()?;
            TrainedModel::Logistic(LogisticModel { feature_order, means, stds, coefficients, intercept, config })
        }
        TAG_RECOMMENDER => {
            let config = r.config()?;
            let dim = r.u64()? as usize;
            let user_vocab = r.strings()?;
            let item_vocab = r.strings()?;
            let user_factors = r.floats()?;
            let item_factors = r.floats()?;
            let weights = r.floats()?;
            expect_len("user factors", user_factors.len(), user_vocab.len().saturating_mul(dim))?;
            expect_len("item factors", item_factors.len(), item_vocab.len().saturating_mul(dim))?;
            expect_len("weights", weights.len(), dim)?;
            let bias = r.f64()?;
            let n_users = r.len(8)?;
            expect_len("seen lists", n_users, user_vocab.len())?;
            let mut seen = Vec::with_capacity(n_users);
            for _ in 0..n_users {
                let n = r.len(4)?;
                let items: Vec<u32> = (0..n)
                    .map(|_| r.take(4).map(|b| u32::from_le_bytes(b.try_into().expect("4 bytes"))))
                    .collect::<Result<_, _>>()?;
                if items.iter().any(|i| *i as usize >= item_vocab.len()) {
                    return Err(MlError::Format("seen item out of range".into()));
                }
                seen.push(items);
            }
            TrainedModel::Recommender(RecommenderModel {
                user_vocab,
                item_vocab,
                dim,
                user_factors,
                item_factors,
                weights,
                bias,
                seen,
                config,
            })
        }
        other => return Err(MlError::Format(format!("unknown model kind tag {other}"))),
    };
    if r.pos != bytes.len() {
        return Err(MlError::Format(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(model)
}

pub fn save_weights(model: &TrainedModel, path: &Path) -> Result<(), MlError> {
    crate::fsutil::write_atomic(path, &write_weights(model))?;
    Ok(())
}

pub fn load_weights(path: &Path) -> Result<TrainedModel, MlError> {
    read_weights(&std::fs::read(path)?)
}
