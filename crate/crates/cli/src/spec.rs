//! Chain-spec documents.
//!
//! A document is a JSON object with exactly the keys `model`, `params` and
//! an optional `analysis`:
//!
//! ```json
//! { "model": "bdmc",
//!   "params": { "p": "3/5", "r": "1/10", "q": "3/10", "r0": 0.5 },
//!   "analysis": { "eps": 1e-5, "k_max": 400 } }
//! ```
//!
//! Numbers may be JSON numbers, decimal strings or rational strings `"a/b"`.

use std::fmt;
use std::path::Path;

use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;
use serde_json::{Map, Value};
use specgap_core::SparseRow;

use crate::model::{ModelConfig, Target};

#[derive(Debug)]
pub enum SpecError {
    /// Malformed text: not JSON, or a number that does not parse.
    Parse(String),
    /// Well-formed text that does not describe a model.
    Schema(String),
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecError::Parse(m) => write!(f, "parse error: {m}"),
            SpecError::Schema(m) => write!(f, "schema error: {m}"),
        }
    }
}

impl std::error::Error for SpecError {}

fn schema(msg: impl Into<String>) -> SpecError {
    SpecError::Schema(msg.into())
}

/// Parses `"3"`, `"0.25"`, `"1e-5"` or `"1/3"`. Integer ratios are divided
/// once, so `"1/3"` is the correctly rounded double.
pub fn parse_number(text: &str) -> Result<f64, SpecError> {
    let text = text.trim();
    let bad = || SpecError::Parse(format!("not a number: {text:?}"));
    let value = match text.split_once('/') {
        Some((num, den)) => {
            let (num, den) = (num.trim(), den.trim());
            let ratio = match (num.parse::<i64>(), den.parse::<i64>()) {
                (Ok(n), Ok(d)) => {
                    if d == 0 {
                        return Err(SpecError::Parse(format!("zero denominator in {text:?}")));
                    }
                    n as f64 / d as f64
                }
                _ => {
                    let n: f64 = num.parse().map_err(|_| bad())?;
                    let d: f64 = den.parse().map_err(|_| bad())?;
                    if d == 0.0 {
                        return Err(SpecError::Parse(format!("zero denominator in {text:?}")));
                    }
                    n / d
                }
            };
            ratio
        }
        None => text.parse::<f64>().map_err(|_| bad())?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// A number given either as a JSON number or as a (possibly rational) string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct NumVisitor;
        impl Visitor<'_> for NumVisitor {
            type Value = Num;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a string such as \"1/3\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Ok(Num(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                parse_number(v).map(Num).map_err(E::custom)
            }
        }
        d.deserialize_any(NumVisitor)
    }
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Analysis {
    pub eps: Option<Num>,
    pub k_max: Option<usize>,
    pub k_start: Option<usize>,
    pub window: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    model: String,
    params: Map<String, Value>,
    #[serde(default)]
    analysis: Analysis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub model: ModelConfig,
    pub analysis: Analysis,
}

pub fn load(path: &Path) -> Result<Document, SpecError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SpecError::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_document(&text)
}

pub fn parse_document(text: &str) -> Result<Document, SpecError> {
    let raw: RawDocument = serde_json::from_str(text).map_err(|e| {
        use serde_json::error::Category;
        match e.classify() {
            Category::Data => SpecError::Schema(e.to_string()),
            _ => SpecError::Parse(e.to_string()),
        }
    })?;
    let mut params = Params {
        map: raw.params,
        model: raw.model.clone(),
    };
    let model = match raw.model.as_str() {
        "rw" => {
            let g = params.usize("g")?;
            let d = params.usize("d")?;
            let a = params.probabilities("a")?;
            let boundary = params.rows("boundary")?;
            ModelConfig::Walk { g, d, a, boundary }
        }
        "rw-g2d1" => ModelConfig::TwoDownOneUp {
            a: params.probability("a")?,
            b: params.probability("b")?,
        },
        "bdmc" => {
            let p = params.probability("p")?;
            let q = params.probability("q")?;
            let r = match params.optional("r")? {
                Some(r) => r,
                None => 1.0 - p - q,
            };
            ModelConfig::Bdmc {
                p,
                r,
                q,
                r0: params.probability("r0")?,
            }
        }
        "mh" => {
            let target = match params.string("target")?.as_str() {
                "poisson" => Target::Poisson {
                    lambda: params.optional("lambda")?.unwrap_or(1.0),
                },
                "linear-geometric" => Target::LinearGeometric {
                    tau: params.probability("tau")?,
                },
                "geometric" => Target::Geometric {
                    tau: params.probability("tau")?,
                },
                other => {
                    return Err(schema(format!(
                        "unknown target {other:?}; expected poisson, linear-geometric or geometric"
                    )))
                }
            };
            ModelConfig::MetropolisHastings {
                target,
                q: params.probability("q")?,
                r: params.optional("r")?.unwrap_or(0.5),
            }
        }
        "explicit" => ModelConfig::Explicit {
            boundary: params.rows("boundary")?,
            band: params.probabilities("band")?,
        },
        other => {
            return Err(schema(format!(
                "unknown model {other:?}; expected rw, rw-g2d1, bdmc, mh or explicit"
            )))
        }
    };
    params.finish()?;
    Ok(Document {
        model,
        analysis: raw.analysis,
    })
}

struct Params {
    map: Map<String, Value>,
    model: String,
}

impl Params {
    fn take(&mut self, key: &str) -> Result<Value, SpecError> {
        self.map
            .remove(key)
            .ok_or_else(|| schema(format!("model {:?} needs params.{key}", self.model)))
    }

    fn number_of(key: &str, v: &Value) -> Result<f64, SpecError> {
        match v {
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| SpecError::Parse(format!("params.{key}: {n} is not finite"))),
            Value::String(s) => parse_number(s),
            other => Err(schema(format!("params.{key} must be a number, got {other}"))),
        }
    }

    fn number(&mut self, key: &str) -> Result<f64, SpecError> {
        let v = self.take(key)?;
        Self::number_of(key, &v)
    }

    fn optional(&mut self, key: &str) -> Result<Option<f64>, SpecError> {
        match self.map.remove(key) {
            Some(v) => Self::number_of(key, &v).map(Some),
            None => Ok(None),
        }
    }

    fn probability(&mut self, key: &str) -> Result<f64, SpecError> {
        let x = self.number(key)?;
        check_probability(key, x)
    }

    fn usize(&mut self, key: &str) -> Result<usize, SpecError> {
        match self.take(key)? {
            Value::Number(n) if n.as_u64().is_some() => Ok(n.as_u64().unwrap() as usize),
            other => Err(schema(format!("params.{key} must be a nonnegative integer, got {other}"))),
        }
    }

    fn string(&mut self, key: &str) -> Result<String, SpecError> {
        match self.take(key)? {
            Value::String(s) => Ok(s),
            other => Err(schema(format!("params.{key} must be a string, got {other}"))),
        }
    }

    fn probabilities(&mut self, key: &str) -> Result<Vec<f64>, SpecError> {
        match self.take(key)? {
            Value::Array(items) => items
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let k = format!("{key}[{i}]");
                    check_probability(&k, Self::number_of(&k, v)?)
                })
                .collect(),
            other => Err(schema(format!("params.{key} must be an array, got {other}"))),
        }
    }

    /// Rows as arrays of `[column, probability]` pairs.
    fn rows(&mut self, key: &str) -> Result<Vec<SparseRow>, SpecError> {
        let Value::Array(rows) = self.take(key)? else {
            return Err(schema(format!("params.{key} must be an array of rows")));
        };
        rows.iter()
            .enumerate()
            .map(|(i, row)| {
                let Value::Array(entries) = row else {
                    return Err(schema(format!("params.{key}[{i}] must be an array of pairs")));
                };
                entries
                    .iter()
                    .enumerate()
                    .map(|(e, pair)| {
                        let at = format!("{key}[{i}][{e}]");
                        match pair.as_array().map(Vec::as_slice) {
                            Some([Value::Number(col), p]) if col.as_u64().is_some() => Ok((
                                col.as_u64().unwrap() as usize,
                                check_probability(&at, Self::number_of(&at, p)?)?,
                            )),
                            _ => Err(schema(format!("params.{at} must be [column, probability]"))),
                        }
                    })
                    .collect()
            })
            .collect()
    }

    fn finish(self) -> Result<(), SpecError> {
        match self.map.keys().next() {
            Some(k) => Err(schema(format!(
                "unexpected params.{k} for model {:?}",
                self.model
            ))),
            None => Ok(()),
        }
    }
}

fn check_probability(key: &str, x: f64) -> Result<f64, SpecError> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(schema(format!("params.{key} = {x} is not a probability")))
    }
}
