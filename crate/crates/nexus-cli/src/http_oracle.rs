//! HTTP adapter of the semantic oracle.
//!
//! Protocol, all endpoints under one base URL:
//!   POST /annotate  {"columns": [{"table", "column"}]}                → {"entity_types": [str]}
//!   POST /match     {"pairs": [{"a": {"table", "column", "entity_type"}, "b": {...}}]} → {"matches": [bool]}
//!   POST /score     {"pairs": [{"a": {"table", "column"}, "b": {...}}]} → {"predictions": [{"joins", "confidence"}]}
//!
//! A bearer token, when present, rides in the Authorization header. Failed
//! requests are retried under a fixed 3-attempt exponential backoff; a
//! malformed response body is a protocol error and is not retried.
//! `annotate_many` keeps a bounded number of requests in flight and merges
//! results in input order.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use nexus_core::oracle::{ColumnRef, JoinPrediction, SemanticOracle, TypedColumn};
use nexus_core::score::ConfidenceLevel;
use nexus_core::Error;

const ATTEMPTS: u32 = 3;
const BACKOFF_BASE: Duration = Duration::from_millis(200);
const DEFAULT_CONCURRENCY: usize = 4;
const REQUEST_TIMEOUT: Duration = Duration::from_secs(60);

pub struct HttpOracle {
    agent: ureq::Agent,
    base: String,
    token: Option<String>,
    prompt_template: Option<String>,
    concurrency: usize,
}

impl HttpOracle {
    pub fn new(base: &str, token: Option<String>, prompt_template: Option<String>) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(REQUEST_TIMEOUT))
            .build();
        HttpOracle {
            agent: ureq::Agent::new_with_config(config),
            base: base.trim_end_matches('/').to_string(),
            token,
            prompt_template,
            concurrency: DEFAULT_CONCURRENCY,
        }
    }

    fn post<B: Serialize, R: DeserializeOwned>(&self, endpoint: &str, body: &B) -> Result<R, Error> {
        let url = format!("{}/{endpoint}", self.base);
        let mut last_failure = String::new();
        for attempt in 0..ATTEMPTS {
            if attempt > 0 {
                std::thread::sleep(BACKOFF_BASE * (1 << (attempt - 1)));
            }
            let mut request = self.agent.post(&url);
            if let Some(token) = &self.token {
                request = request.header("Authorization", format!("Bearer {token}"));
            }
            match request.send_json(body) {
                Ok(mut response) => {
                    return response.body_mut().read_json::<R>().map_err(|e| {
                        Error::Protocol(format!("{url}: malformed response: {e}"))
                    });
                }
                Err(e) => last_failure = e.to_string(),
            }
        }
        Err(Error::Oracle(format!("{url}: {last_failure} (after {ATTEMPTS} attempts)")))
    }

    fn prompt_template(&self) -> Option<&str> {
        self.prompt_template.as_deref()
    }
}

#[derive(Serialize)]
struct ColumnRefDoc<'a> {
    table: &'a str,
    column: &'a str,
}

impl<'a> From<&'a ColumnRef> for ColumnRefDoc<'a> {
    fn from(c: &'a ColumnRef) -> Self {
        ColumnRefDoc { table: &c.table, column: &c.column }
    }
}

#[derive(Serialize)]
struct TypedColumnDoc<'a> {
    table: &'a str,
    column: &'a str,
    entity_type: &'a str,
}

impl<'a> From<&'a TypedColumn> for TypedColumnDoc<'a> {
    fn from(c: &'a TypedColumn) -> Self {
        TypedColumnDoc { table: &c.table, column: &c.column, entity_type: &c.entity_type }
    }
}

#[derive(Serialize)]
struct PairDoc<T> {
    a: T,
    b: T,
}

#[derive(Serialize)]
struct AnnotateRequest<'a> {
    columns: Vec<ColumnRefDoc<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    prompt_template: Option<&'a str>,
}

#[derive(Deserialize)]
struct AnnotateResponse {
    entity_types: Vec<String>,
}

#[derive(Serialize)]
struct MatchRequest<'a> {
    pairs: Vec<PairDoc<TypedColumnDoc<'a>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    prompt_template: Option<&'a str>,
}

#[derive(Deserialize)]
struct MatchResponse {
    matches: Vec<bool>,
}

#[derive(Serialize)]
struct ScoreRequest<'a> {
    pairs: Vec<PairDoc<ColumnRefDoc<'a>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    prompt_template: Option<&'a str>,
}

#[derive(Deserialize)]
struct PredictionDoc {
    joins: bool,
    confidence: ConfidenceLevel,
}

#[derive(Deserialize)]
struct ScoreResponse {
    predictions: Vec<PredictionDoc>,
}

fn expect_len<T>(items: Vec<T>, want: usize, what: &str) -> Result<Vec<T>, Error> {
    if items.len() != want {
        return Err(Error::Protocol(format!(
            "{what}: expected {want} entries, got {}",
            items.len()
        )));
    }
    Ok(items)
}

impl SemanticOracle for HttpOracle {
    fn annotate(&self, columns: &[ColumnRef]) -> Result<Vec<String>, Error> {
        let request = AnnotateRequest {
            columns: columns.iter().map(ColumnRefDoc::from).collect(),
            prompt_template: self.prompt_template(),
        };
        let response: AnnotateResponse = self.post("annotate", &request)?;
        expect_len(response.entity_types, columns.len(), "annotate")
    }

    fn soft_match(&self, a: &TypedColumn, b: &TypedColumn) -> Result<bool, Error> {
        let request = MatchRequest {
            pairs: vec![PairDoc { a: TypedColumnDoc::from(a), b: TypedColumnDoc::from(b) }],
            prompt_template: self.prompt_template(),
        };
        let response: MatchResponse = self.post("match", &request)?;
        Ok(expect_len(response.matches, 1, "match")?[0])
    }

    fn predict_joins(&self, pairs: &[(ColumnRef, ColumnRef)]) -> Result<Vec<JoinPrediction>, Error> {
        let request = ScoreRequest {
            pairs: pairs
                .iter()
                .map(|(a, b)| PairDoc { a: ColumnRefDoc::from(a), b: ColumnRefDoc::from(b) })
                .collect(),
            prompt_template: self.prompt_template(),
        };
        let response: ScoreResponse = self.post("score", &request)?;
        Ok(expect_len(response.predictions, pairs.len(), "score")?
            .into_iter()
            .map(|p| JoinPrediction { joins: p.joins, confidence: p.confidence })
            .collect())
    }

    fn annotate_many(&self, batches: &[&[ColumnRef]]) -> Vec<Result<Vec<String>, Error>> {
        let n = batches.len();
        let workers = self.concurrency.min(n);
        if workers <= 1 {
            return batches.iter().map(|batch| self.annotate(batch)).collect();
        }
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<Result<Vec<String>, Error>>>> =
            (0..n).map(|_| Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let k = next.fetch_add(1, Ordering::Relaxed);
                    if k >= n {
                        break;
                    }
                    let result = self.annotate(batches[k]);
                    *slots[k].lock().expect("slot lock") = Some(result);
                });
            }
        });
        slots
            .into_iter()
            .map(|slot| slot.into_inner().expect("slot lock").expect("worker filled every slot"))
            .collect()
    }
}
