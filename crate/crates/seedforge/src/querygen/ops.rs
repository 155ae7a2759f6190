//! The per-module query-generation operations.

use super::{parse_response, prompts, LlmClient, LlmError, ModelParams, QueryPlan};
use crate::corpus::{FileTypeSpec, SourceModule};

pub const GITHUB_QUERY_COUNT: usize = 50;
pub const WEB_QUERY_COUNT: usize = 20;
pub const FEATURE_DESCRIPTOR_COUNT: usize = 33;
pub const EXPANSIONS_PER_DESCRIPTOR: usize = 3;
/// Not pinned upstream; matches the web-search scale.
pub const BUGTRACKER_QUERY_COUNT: usize = 20;

/// Default sampling parameters per module.
pub fn default_params_for(module: SourceModule) -> ModelParams {
    let model_name = match module {
        SourceModule::Github | SourceModule::Feature => "gpt-4.1",
        _ => "gpt-4o",
    };
    ModelParams {
        model_name: model_name.to_string(),
        ..ModelParams::default()
    }
}

/// Shared engine: one completion, a single re-prompt on shortfall or
/// malformed payload, dedup, truncation to `want`.
///
/// Error policy: a client (network/auth) failure on the *first* call aborts
/// with `Err` — the module then runs with an empty plan. Failures during the
/// retry are tolerated: the shortfall is accepted with a warning.
fn gen_queries(
    label: &str,
    prompt: String,
    want: usize,
    client: &dyn LlmClient,
    params: &ModelParams,
) -> Result<(Vec<String>, String), LlmError> {
    let raw = match client.complete(&prompt, params) {
        Ok(raw) => raw,
        Err(LlmError::Malformed(msg)) => {
            log::warn!("{label}: malformed response ({msg}); retrying once");
            match client.complete(&prompt, params) {
                Ok(raw) => raw,
                Err(e) => {
                    log::warn!("{label}: retry failed ({e}); accepting empty plan");
                    return Ok((Vec::new(), prompt));
                }
            }
        }
        Err(e) => return Err(e),
    };

    let mut queries = parse_response(&raw);
    if queries.len() > want {
        log::warn!(
            "{label}: model returned {} queries, keeping the first {want}",
            queries.len()
        );
        queries.truncate(want);
    }

    if queries.len() < want {
        let retry_prompt = format!("{}{}", prompt, prompts::retry_suffix(want, queries.len()));
        log::warn!(
            "{label}: {} of {want} queries after dedup; re-prompting once",
            queries.len()
        );
        match client.complete(&retry_prompt, params) {
            Ok(raw) => {
                let lower: std::collections::HashSet<String> =
                    queries.iter().map(|q| q.to_lowercase()).collect();
                for q in parse_response(&raw) {
                    if queries.len() >= want {
                        break;
                    }
                    if !lower.contains(&q.to_lowercase()) {
                        queries.push(q);
                    }
                }
            }
            Err(e) => {
                log::warn!("{label}: retry failed ({e}); accepting shortfall");
            }
        }
        if queries.len() < want {
            log::warn!("{label}: proceeding with {} of {want} queries", queries.len());
        }
    }

    Ok((queries, prompt))
}

/// 50 repository-search queries.
pub fn gen_github_queries(
    spec: &FileTypeSpec,
    client: &dyn LlmClient,
    params: &ModelParams,
) -> Result<QueryPlan, LlmError> {
    let prompt = prompts::github_prompt(spec, GITHUB_QUERY_COUNT);
    let (queries, prompt_used) =
        gen_queries("github queries", prompt, GITHUB_QUERY_COUNT, client, params)?;
    Ok(QueryPlan {
        module: SourceModule::Github,
        queries,
        prompt_used,
        model_name: params.model_name.clone(),
    })
}

/// 20 web-search queries mixing characteristic and seed-hunting styles.
pub fn gen_web_queries(
    spec: &FileTypeSpec,
    client: &dyn LlmClient,
    params: &ModelParams,
) -> Result<QueryPlan, LlmError> {
    let prompt = prompts::web_prompt(spec, WEB_QUERY_COUNT);
    let (queries, prompt_used) =
        gen_queries("web queries", prompt, WEB_QUERY_COUNT, client, params)?;
    Ok(QueryPlan {
        module: SourceModule::Web,
        queries,
        prompt_used,
        model_name: params.model_name.clone(),
    })
}

/// 33 feature descriptors for the target format.
pub fn gen_feature_descriptors(
    spec: &FileTypeSpec,
    client: &dyn LlmClient,
    params: &ModelParams,
) -> Result<Vec<String>, LlmError> {
    let prompt = prompts::feature_descriptor_prompt(spec, FEATURE_DESCRIPTOR_COUNT);
    let (descriptors, _) = gen_queries(
        "feature descriptors",
        prompt,
        FEATURE_DESCRIPTOR_COUNT,
        client,
        params,
    )?;
    Ok(descriptors)
}

/// 3 search queries per descriptor, concatenated and deduplicated in order.
/// A failing descriptor is skipped with a warning; it never aborts the plan.
pub fn expand_features(
    descriptors: &[String],
    client: &dyn LlmClient,
    params: &ModelParams,
) -> Result<QueryPlan, LlmError> {
    let mut queries: Vec<String> = Vec::new();
    let mut lower = std::collections::HashSet::new();
    let mut prompt_used = String::new();
    for descriptor in descriptors {
        let prompt = prompts::feature_expand_prompt(descriptor);
        if prompt_used.is_empty() {
            prompt_used = prompt.clone();
        }
        let raw = match client.complete(&prompt, params) {
            Ok(raw) => raw,
            Err(e) => {
                log::warn!("feature expansion for {descriptor:?} failed ({e}); skipping");
                continue;
            }
        };
        let mut per = parse_response(&raw);
        if per.len() > EXPANSIONS_PER_DESCRIPTOR {
            per.truncate(EXPANSIONS_PER_DESCRIPTOR);
        }
        for q in per {
            if lower.insert(q.to_lowercase()) {
                queries.push(q);
            }
        }
    }
    Ok(QueryPlan {
        module: SourceModule::Feature,
        queries,
        prompt_used,
        model_name: params.model_name.clone(),
    })
}

/// Bug-tracker queries (default 20).
pub fn gen_bugtracker_queries(
    spec: &FileTypeSpec,
    client: &dyn LlmClient,
    params: &ModelParams,
) -> Result<QueryPlan, LlmError> {
    let prompt = prompts::bugtracker_prompt(spec, BUGTRACKER_QUERY_COUNT);
    let (queries, prompt_used) = gen_queries(
        "bugtracker queries",
        prompt,
        BUGTRACKER_QUERY_COUNT,
        client,
        params,
    )?;
    Ok(QueryPlan {
        module: SourceModule::BugTracker,
        queries,
        prompt_used,
        model_name: params.model_name.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SignatureTable;
    use crate::querygen::StubLlmClient;

    fn png_spec() -> FileTypeSpec {
        FileTypeSpec::extension("png", SignatureTable::bundled()).unwrap()
    }

    fn numbered(prefix: &str, n: usize) -> String {
        (0..n).map(|i| format!("{prefix} {i}\n")).collect()
    }

    #[test]
    fn github_stub_passthrough_50() {
        let spec = png_spec();
        let params = default_params_for(SourceModule::Github);
        let stub = StubLlmClient::with_responses::<_, String, String>(std::iter::empty());
        stub.insert_for_prompt(
            &prompts::github_prompt(&spec, GITHUB_QUERY_COUNT),
            numbered("repo query", 50),
        );
        let plan = gen_github_queries(&spec, &stub, &params).unwrap();
        assert_eq!(plan.queries.len(), 50);
        assert!(plan.well_formed());
        assert_eq!(plan.module, SourceModule::Github);
    }

    #[test]
    fn duplicates_cause_tolerated_shortfall() {
        let spec = png_spec();
        let params = default_params_for(SourceModule::Github);
        // 50 lines, two of them identical → 49 distinct; no canned retry
        // response, so the retry errors and the shortfall is accepted.
        let mut lines = numbered("q", 49);
        lines.push_str("q 0\n");
        let stub = StubLlmClient::with_responses::<_, String, String>(std::iter::empty());
        stub.insert_for_prompt(&prompts::github_prompt(&spec, GITHUB_QUERY_COUNT), lines);
        let plan = gen_github_queries(&spec, &stub, &params).unwrap();
        assert_eq!(plan.queries.len(), 49);
    }

    #[test]
    fn shortfall_retry_merges_new_queries() {
        let spec = png_spec();
        let params = default_params_for(SourceModule::Web);
        let prompt = prompts::web_prompt(&spec, WEB_QUERY_COUNT);
        let stub = StubLlmClient::with_responses::<_, String, String>(std::iter::empty());
        stub.insert_for_prompt(&prompt, numbered("first", 18));
        let retry_prompt = format!("{}{}", prompt, prompts::retry_suffix(20, 18));
        stub.insert_for_prompt(&retry_prompt, "first 0\nextra A\nextra B\nextra C\n");
        let plan = gen_web_queries(&spec, &stub, &params).unwrap();
        assert_eq!(plan.queries.len(), 20);
        assert!(plan.queries.contains(&"extra A".to_string()));
        assert!(plan.queries.contains(&"extra B".to_string()));
        // the duplicate "first 0" from the retry is not double-counted
        assert!(plan.well_formed());
    }

    #[test]
    fn client_error_aborts_plan() {
        let spec = png_spec();
        let params = default_params_for(SourceModule::Github);
        let stub = StubLlmClient::with_responses::<_, String, String>(std::iter::empty());
        let err = gen_github_queries(&spec, &stub, &params).unwrap_err();
        assert!(matches!(err, LlmError::Client(_)));
    }

    #[test]
    fn overcount_truncated() {
        let spec = png_spec();
        let params = default_params_for(SourceModule::Feature);
        let stub = StubLlmClient::with_responses::<_, String, String>(std::iter::empty());
        stub.insert_for_prompt(
            &prompts::feature_descriptor_prompt(&spec, FEATURE_DESCRIPTOR_COUNT),
            numbered("feature", 35),
        );
        let descriptors = gen_feature_descriptors(&spec, &stub, &params).unwrap();
        assert_eq!(descriptors.len(), 33);
        assert_eq!(descriptors[0], "feature 0");
        assert_eq!(descriptors[32], "feature 32");
    }

    #[test]
    fn expansion_three_per_descriptor() {
        let params = default_params_for(SourceModule::Feature);
        let descriptors: Vec<String> = (0..33).map(|i| format!("feature {i}")).collect();
        let stub = StubLlmClient::with_responses::<_, String, String>(std::iter::empty());
        for d in &descriptors {
            stub.insert_for_prompt(
                &prompts::feature_expand_prompt(d),
                format!("{d} query one\n{d} query two\n{d} query three\n"),
            );
        }
        let plan = expand_features(&descriptors, &stub, &params).unwrap();
        assert_eq!(plan.queries.len(), 99);
        assert!(plan.well_formed());
        assert_eq!(plan.module, SourceModule::Feature);
    }

    #[test]
    fn expansion_skips_failing_descriptor() {
        let params = default_params_for(SourceModule::Feature);
        let descriptors = vec!["ok one".to_string(), "broken".to_string()];
        let stub = StubLlmClient::with_responses::<_, String, String>(std::iter::empty());
        stub.insert_for_prompt(
            &prompts::feature_expand_prompt("ok one"),
            "a\nb\nc\n",
        );
        let plan = expand_features(&descriptors, &stub, &params).unwrap();
        assert_eq!(plan.queries.len(), 3);
    }

    #[test]
    fn expansion_dedups_overlap() {
        let params = default_params_for(SourceModule::Feature);
        let descriptors = vec!["d1".to_string(), "d2".to_string()];
        let stub = StubLlmClient::with_responses::<_, String, String>(std::iter::empty());
        stub.insert_for_prompt(&prompts::feature_expand_prompt("d1"), "shared\nuniq1\nuniq2\n");
        stub.insert_for_prompt(&prompts::feature_expand_prompt("d2"), "SHARED\nuniq3\nuniq4\n");
        let plan = expand_features(&descriptors, &stub, &params).unwrap();
        assert_eq!(plan.queries.len(), 5);
    }

    #[test]
    fn bugtracker_default_count() {
        let spec = FileTypeSpec::extension("tiff", SignatureTable::bundled()).unwrap();
        let params = default_params_for(SourceModule::BugTracker);
        let stub = StubLlmClient::with_responses::<_, String, String>(std::iter::empty());
        stub.insert_for_prompt(
            &prompts::bugtracker_prompt(&spec, BUGTRACKER_QUERY_COUNT),
            numbered("tiff crash", 20),
        );
        let plan = gen_bugtracker_queries(&spec, &stub, &params).unwrap();
        assert_eq!(plan.queries.len(), 20);
    }

    #[test]
    fn stub_determinism() {
        let spec = png_spec();
        let params = default_params_for(SourceModule::Web);
        let stub = StubLlmClient::with_responses::<_, String, String>(std::iter::empty());
        stub.insert_for_prompt(&prompts::web_prompt(&spec, WEB_QUERY_COUNT), numbered("w", 20));
        let a = gen_web_queries(&spec, &stub, &params).unwrap();
        let b = gen_web_queries(&spec, &stub, &params).unwrap();
        assert_eq!(a, b);
    }
}
