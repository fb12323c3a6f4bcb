//! Annotation backend: serves dialect-variant candidates to annotators,
//! records their judgments in an append-only log and exposes agreement and
//! dictionary exports over HTTP+JSON.
//!
//! Endpoints:
//!
//! - `GET /candidates?annotator=&dialect=&n=&review=` next unjudged candidates (n ≤ 50)
//! - `POST /judgments` body `{"annotator_id", "candidate_id", "decision"}`
//! - `GET /agreement?a=&b=` Cohen's kappa between two annotators
//! - `GET /dictionary/export?policy=&format=` dictionary as JSON or TSV
//! - `GET /progress` judged/total counts per dialect and annotator
//!
//! Anything else is served from the optional static directory. There is no
//! authentication: annotator ids are trusted, so bind to a local address.

mod http;
mod store;

pub use http::{router, serve, ServiceConfig, MAX_BATCH};
pub use store::{Ack, CandidateView, DialectProgress, Store, StoreError};
