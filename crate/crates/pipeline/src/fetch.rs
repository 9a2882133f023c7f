//! Blocking client for encoder endpoints that answer with EMB1 bodies.

use std::io::Read;
use std::path::PathBuf;
use std::thread;
use std::time::Duration;

use log::warn;
use serde::Serialize;
use vidtopic_core::corpus::{EmbeddingMatrix, Modality};
use vidtopic_core::Error as CoreError;

use crate::config::HttpConfig;
use crate::error::{PipelineError, Result};

/// Request items for one modality.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Payload {
    Texts(Vec<String>),
    AudioSpans(Vec<AudioSpan>),
    Images(Vec<PathBuf>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AudioSpan {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    pub start: f64,
    pub end: f64,
}

impl Payload {
    pub fn len(&self) -> usize {
        match self {
            Payload::Texts(v) => v.len(),
            Payload::AudioSpans(v) => v.len(),
            Payload::Images(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Serialize)]
struct EncodeRequest<'a> {
    modality: Modality,
    items: &'a Payload,
}

enum Failure {
    Retry(String),
    Fatal(String),
}

/// POSTs `payload` to `url` and parses the EMB1 response. Transport errors
/// and 5xx answers are retried with exponential backoff; the row count must
/// match the payload.
pub fn fetch_embeddings(
    url: &str,
    modality: Modality,
    payload: &Payload,
    http: &HttpConfig,
) -> Result<EmbeddingMatrix> {
    let body = serde_json::to_vec(&EncodeRequest {
        modality,
        items: payload,
    })
    .expect("request serializes");
    let agent = ureq::AgentBuilder::new()
        .timeout(Duration::from_secs(http.timeout_secs))
        .build();

    let mut last = String::new();
    for attempt in 1..=http.attempts {
        match post_once(&agent, url, &body) {
            Ok(bytes) => {
                let mut m = EmbeddingMatrix::from_emb1(&bytes)?;
                if m.rows != payload.len() {
                    return Err(CoreError::Alignment {
                        expected: payload.len(),
                        found: m.rows,
                    }
                    .into());
                }
                m.modality = modality;
                return Ok(m);
            }
            Err(Failure::Fatal(message)) => {
                return Err(PipelineError::Fetch {
                    url: url.into(),
                    attempts: attempt,
                    message,
                })
            }
            Err(Failure::Retry(message)) => {
                warn!("{url}: attempt {attempt} failed: {message}");
                last = message;
                if attempt < http.attempts {
                    thread::sleep(Duration::from_millis(http.backoff_ms << (attempt - 1)));
                }
            }
        }
    }
    Err(PipelineError::Fetch {
        url: url.into(),
        attempts: http.attempts,
        message: last,
    })
}

fn post_once(agent: &ureq::Agent, url: &str, body: &[u8]) -> std::result::Result<Vec<u8>, Failure> {
    let resp = match agent
        .post(url)
        .set("content-type", "application/json")
        .send_bytes(body)
    {
        Ok(r) => r,
        Err(ureq::Error::Status(code, r)) => {
            let msg = format!("HTTP {code} {}", r.status_text());
            return Err(if code >= 500 {
                Failure::Retry(msg)
            } else {
                Failure::Fatal(msg)
            });
        }
        Err(ureq::Error::Transport(t)) => return Err(Failure::Retry(t.to_string())),
    };
    let mut buf = Vec::new();
    resp.into_reader()
        .read_to_end(&mut buf)
        .map_err(|e| Failure::Retry(e.to_string()))?;
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_shapes() {
        let t = Payload::Texts(vec!["a".into()]);
        let j = serde_json::to_string(&EncodeRequest { modality: Modality::Text, items: &t }).unwrap();
        assert_eq!(j, r#"{"modality":"text","items":["a"]}"#);
        let a = Payload::AudioSpans(vec![AudioSpan { file: Some("m.wav".into()), start: 0.0, end: 1.5 }]);
        let j = serde_json::to_string(&EncodeRequest { modality: Modality::Audio, items: &a }).unwrap();
        assert_eq!(j, r#"{"modality":"audio","items":[{"file":"m.wav","start":0.0,"end":1.5}]}"#);
    }
}
