//! seedforge assembles fuzzing seed corpora from public sources.
//!
//! The pipeline asks an LLM for search queries, harvests candidate files from
//! GitHub, the open web, bug trackers, and Common Crawl, then validates,
//! deduplicates, balances, and (optionally) minimizes the merged corpus. A
//! companion `stats` subcommand compares fuzzing trial results with one-sided
//! Wilcoxon signed-rank tests and t-based confidence intervals.

pub mod assembly;
pub mod budget;
pub mod cli;
pub mod corpus;
pub mod fetch;
pub mod parallel;
pub(crate) mod proc;
pub mod bugtracker;
pub mod commoncrawl;
pub mod feature;
pub mod github;
pub mod pipeline;
pub mod querygen;
pub mod stats;
pub mod web;

#[cfg(test)]
pub(crate) mod testutil;
