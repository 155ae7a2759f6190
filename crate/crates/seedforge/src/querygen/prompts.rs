//! Prompt templates. Each template interpolates exactly one target phrase —
//! the extension in Extension mode or the free-text description otherwise —
//! and instructs the model to answer one query per line with no decoration.

use crate::corpus::{FileTypeSpec, SpecMode};

const FORMAT_RULES: &str = "Rules:\n\
- answer with exactly one search query per line\n\
- no numbering, bullets, quotes, or commentary\n\
- queries must be pairwise distinct\n";

/// Human phrase naming the target type, used inside every template.
fn describe_target(spec: &FileTypeSpec) -> String {
    match spec.mode {
        SpecMode::Extension => format!("files with the .{} extension", spec.primary_extension),
        SpecMode::Description => format!("files of this kind: {}", spec.description),
    }
}

pub fn github_prompt(spec: &FileTypeSpec, count: usize) -> String {
    format!(
        "You are helping assemble a seed corpus for fuzz testing.\n\
         Generate exactly {count} diverse search queries for a code-hosting site's repository search.\n\
         The queries should surface repositories that are broadly used or directly relevant to \
         software testing, and that are likely to contain {target}.\n\
         Vary the angle: popular libraries handling the format, test suites, sample collections, \
         conformance corpora, parsers and tooling.\n{rules}",
        count = count,
        target = describe_target(spec),
        rules = FORMAT_RULES,
    )
}

pub fn web_prompt(spec: &FileTypeSpec, count: usize) -> String {
    format!(
        "You are helping assemble a seed corpus for fuzz testing.\n\
         Generate exactly {count} distinct web search queries to find {target} on the open web.\n\
         Mix two styles in roughly equal measure:\n\
         1. queries describing characteristic instances of the format (like \"small PNG clipart\")\n\
         2. queries explicitly hunting test or fuzzing seed files (like \"fuzzing seed JPG files\")\n\
         {rules}",
        count = count,
        target = describe_target(spec),
        rules = FORMAT_RULES,
    )
}

pub fn feature_descriptor_prompt(spec: &FileTypeSpec, count: usize) -> String {
    format!(
        "Consider {target}.\n\
         List exactly {count} distinct feature descriptors for this format. A feature descriptor \
         is a short phrase naming one specific capability, structure, or characteristic an \
         instance can exhibit — for example \"PNG with a visible watermark\" names a feature of PNG.\n\
         Cover different areas of the format: metadata, compression options, color or encoding \
         variants, embedded content, edge-case structures.\n\
         Rules:\n\
         - exactly one feature descriptor per line\n\
         - no numbering, bullets, quotes, or commentary\n\
         - descriptors must be pairwise distinct\n",
        count = count,
        target = describe_target(spec),
    )
}

pub fn feature_expand_prompt(descriptor: &str) -> String {
    format!(
        "Turn the following file-format feature descriptor into exactly 3 complete web search \
         queries that would locate real example files exhibiting that feature.\n\
         Feature descriptor: {descriptor}\n{rules}",
        descriptor = descriptor,
        rules = FORMAT_RULES,
    )
}

pub fn bugtracker_prompt(spec: &FileTypeSpec, count: usize) -> String {
    format!(
        "You are helping assemble a seed corpus for fuzz testing.\n\
         Generate exactly {count} search queries for public software bug trackers to find bug \
         reports that include a reproducing test case attached as {target}.\n\
         Name the file type in every query, and aim at crash reports, malformed-file reports, \
         and parser bugs in software handling the format.\n{rules}",
        count = count,
        target = describe_target(spec),
        rules = FORMAT_RULES,
    )
}

/// Deterministic follow-up used when the first response came up short.
pub fn retry_suffix(needed: usize, have: usize) -> String {
    format!(
        "\n\nYour previous answer yielded {have} usable distinct queries but {needed} are \
         required. Provide {more} additional queries, distinct from each other and from the \
         previous ones, following the same rules.",
        have = have,
        needed = needed,
        more = needed - have,
    )
}
