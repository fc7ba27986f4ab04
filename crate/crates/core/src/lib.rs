//! Decomposes the effect of an encouragement intervention (such as user
//! training for an AI assistant) into an *adoption* effect for users the
//! encouragement brings in and an *effectiveness* effect for users who would
//! have adopted anyway.
//!
//! The pieces:
//!
//! - [`trial`]: the three-arm record model and delimited-text ingestion;
//! - [`descriptives`]: arm summaries, Welch t-tests, the two-proportion
//!   z-test, text metrics, and the adoption-by-quartile cross-tab;
//! - [`strata`]: principal-stratification engine with sharp
//!   partial-identification bounds and the mean-dominance gamma sweep;
//! - [`bootstrap`]: percentile-bootstrap confidence intervals for the
//!   partially identified effects;
//! - [`theory`]: a generative adoption model producing synthetic trials
//!   with ground-truth strata and effects;
//! - [`study`]: estimator-versus-truth coverage studies on generated data;
//! - [`report`]: deterministic text/CSV/JSON report rendering.

pub mod bootstrap;
pub mod descriptives;
pub mod dist;
pub mod error;
pub mod report;
pub mod strata;
pub mod study;
pub mod text;
pub mod theory;
pub mod trial;

pub use error::{Error, Result};

pub use bootstrap::{bootstrap_bounds, percentile, BootstrapConfig, BoundCi, CiMethod};
pub use descriptives::{
    adoption_by_quartile, summarize, two_proportion_z_test, welch_t_test, ArmSummary, Metric,
    QuartileCell, QuartileTable, Tail, TestResult,
};
pub use strata::{
    analyze, baseline_outcomes, crossover_gamma, dominance_bounds, gamma_sweep, stratum_proportions,
    support_bounds, BaselineOutcomes, Effect, EffectBounds, GammaRow, GammaSweep, OutcomeSupport,
    PrincipalBounds, StrataAnalysis, StrataInput, StratumProportions,
};
pub use study::{run_study, StudyConfig, StudyReport};
pub use text::{flesch_kincaid, sentence_count, syllable_count, word_count};
pub use theory::{
    adopts, classify_stratum, derive_seed, expected_loss, generate_trial, productivity, Agent,
    ErrorFamily, Stratum, TheoryConfig, ThetaDistribution, TrialTruth,
};
pub use trial::{
    load_dataset, load_dataset_with, read_dataset, write_dataset, Arm, ExamRecord, GradeScale,
    IssueScore, Rubric, TrialDataset,
};
