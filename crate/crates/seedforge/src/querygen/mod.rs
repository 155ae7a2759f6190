//! Search-query generation through a pluggable chat-completion client.
//!
//! Every harvesting module that needs queries builds them here: fixed prompt
//! templates, a line-oriented response parser, one re-prompt on shortfall,
//! and deterministic behavior under the stub client used in tests.

mod http;
mod ops;
mod parse;
pub mod prompts;
mod stub;

pub use http::HttpLlmClient;
pub use ops::{
    expand_features, gen_bugtracker_queries, gen_feature_descriptors, gen_github_queries,
    gen_web_queries, default_params_for, BUGTRACKER_QUERY_COUNT, EXPANSIONS_PER_DESCRIPTOR,
    FEATURE_DESCRIPTOR_COUNT, GITHUB_QUERY_COUNT, WEB_QUERY_COUNT,
};
pub use parse::parse_response;
pub use stub::{prompt_key, StubLlmClient};

use crate::corpus::SourceModule;
use thiserror::Error;

/// Sampling parameters for one completion call.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub model_name: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            model_name: "gpt-4o".to_string(),
            // high temperature: we want diverse queries, not the single
            // most likely one
            temperature: 1.0,
            max_output_tokens: 2048,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LlmError {
    /// Network, auth, or quota failure — the client never produced output.
    #[error("llm client error: {0}")]
    Client(String),
    /// The endpoint answered but the payload was not usable.
    #[error("malformed llm response: {0}")]
    Malformed(String),
}

/// A chat-completion backend. Implementations must be safe for concurrent
/// calls from multiple harvesting modules.
pub trait LlmClient: Send + Sync {
    fn complete(&self, prompt: &str, params: &ModelParams) -> Result<String, LlmError>;
}

/// The queries generated for one module, with their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryPlan {
    pub module: SourceModule,
    /// Non-empty, trimmed, pairwise distinct after case-folding.
    pub queries: Vec<String>,
    pub prompt_used: String,
    pub model_name: String,
}

impl QueryPlan {
    pub fn empty(module: SourceModule) -> Self {
        QueryPlan {
            module,
            queries: Vec::new(),
            prompt_used: String::new(),
            model_name: String::new(),
        }
    }

    /// Checks the QueryPlan invariants; used by tests and debug assertions.
    pub fn well_formed(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.queries.iter().all(|q| {
            !q.is_empty()
                && q.trim() == q
                && q.len() <= parse::MAX_QUERY_LEN
                && seen.insert(q.to_lowercase())
        })
    }
}
