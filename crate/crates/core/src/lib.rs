#![forbid(unsafe_code)]
//! Authorship attribution from the dynamics of word co-occurrence networks.
//!
//! A book is preprocessed into a lemma stream, cut into partitions of `W`
//! lemmas, and each partition becomes a small directed co-occurrence network.
//! Twelve global topological metrics per network form twelve time series per
//! book; the first four moments of each series give a 48-attribute feature
//! vector that is fed to standard classifiers.
//!
//! Module map:
//!
//! - [`corpus`]: tokenizing, tagging, lemmatizing and stopword removal
//! - [`netbuild`]: partitioning and network construction
//! - [`graphmetrics`]: the twelve per-partition measurements
//! - [`serieslab`]: metric series, stationarity tests, moments
//! - [`featurespace`]: the feature matrix, normalization, attribute selection
//! - [`manifold`]: PCA and Isomap
//! - [`classify`]: classifiers, stratified cross-validation, scoring
//! - [`pipeline`]: configuration, staged execution and the experiment harness

pub mod classify;
pub mod corpus;
pub mod error;
pub mod featurespace;
pub mod graphmetrics;
pub mod manifold;
pub mod netbuild;
pub mod pipeline;
pub mod serieslab;

pub use error::{Error, Result};
