use super::{FileTypeSpec, SpecMode, Validation};

/// The result of checking one candidate against the target spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationOutcome {
    Accepted(Validation),
    Rejected,
}

impl ValidationOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, ValidationOutcome::Accepted(_))
    }
}

/// Extracts the lowercase extension from a file name or URL path, ignoring
/// query strings and fragments. Returns `None` when there is no dot-separated
/// suffix.
pub fn extension_of(name_hint: &str) -> Option<String> {
    let without_query = name_hint.split(['?', '#']).next().unwrap_or(name_hint);
    let last_segment = without_query.rsplit(['/', '\\']).next().unwrap_or(without_query);
    let (stem, ext) = last_segment.rsplit_once('.')?;
    if stem.is_empty() || ext.is_empty() {
        return None;
    }
    if !ext.chars().all(|c| c.is_ascii_alphanumeric()) {
        return None;
    }
    Some(ext.to_ascii_lowercase())
}

/// Decides whether a candidate file belongs in the corpus.
///
/// Extension mode accepts when the name hint carries a matching extension
/// (checked first, case-insensitive, aliases included) or when any magic
/// signature matches at its offset. Description mode performs no filtering:
/// every candidate is accepted as [`Validation::Unfiltered`].
pub fn validate_file(spec: &FileTypeSpec, name_hint: &str, content: &[u8]) -> ValidationOutcome {
    match spec.mode {
        SpecMode::Description => ValidationOutcome::Accepted(Validation::Unfiltered),
        SpecMode::Extension => {
            if let Some(ext) = extension_of(name_hint) {
                if spec.extension_matches(&ext) {
                    return ValidationOutcome::Accepted(Validation::ByExtension);
                }
            }
            if spec.magic_signatures.iter().any(|sig| sig.matches(content)) {
                return ValidationOutcome::Accepted(Validation::ByMagic);
            }
            ValidationOutcome::Rejected
        }
    }
}
