//! End-to-end validation: run the estimator on generated trials and measure
//! how often the identified bounds contain the generator's ground truth.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::strata::{self, StrataInput};
use crate::theory::{derive_seed, generate_trial, TheoryConfig, ThetaDistribution};

/// Settings for a simulation study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StudyConfig {
    pub trials: usize,
    pub n_per_arm: usize,
    pub noise_sd: f64,
    pub seed: u64,
    pub theta: ThetaDistribution,
    pub theory: TheoryConfig,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            trials: 100,
            n_per_arm: 120,
            noise_sd: 0.15,
            seed: 0,
            theta: ThetaDistribution::Uniform,
            theory: TheoryConfig::default(),
        }
    }
}

/// Outcome of one generated trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    /// `None` when the resample had no induced users or the estimator
    /// rejected the draw; such trials are excluded from coverage.
    pub usable: bool,
    pub pi_error: Option<[f64; 3]>,
    pub adoption_covered: Option<bool>,
    pub effectiveness_covered: Option<bool>,
}

/// Aggregates over a study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub trials: usize,
    /// Trials where the sample had induced users and the pipeline ran.
    pub usable_trials: usize,
    /// Fraction of usable trials whose support bounds contain the true
    /// adoption effect.
    pub adoption_coverage: Option<f64>,
    pub effectiveness_coverage: Option<f64>,
    /// Mean estimation error (estimate minus truth) for the three stratum
    /// shares: always, induced, never.
    pub pi_bias: Option<[f64; 3]>,
    pub per_trial: Vec<TrialResult>,
}

/// Generate `trials` datasets, estimate each, and score coverage of the
/// generator's true effects by the support bounds. Deterministic in the
/// seed: trial `t` uses `derive_seed(seed, t)`.
pub fn run_study(config: &StudyConfig) -> Result<StudyReport> {
    config.theory.validate()?;
    let per_trial: Vec<TrialResult> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_one(config, t))
        .collect::<Result<_>>()?;

    let usable: Vec<&TrialResult> = per_trial.iter().filter(|r| r.usable).collect();
    let usable_trials = usable.len();
    let rate = |pick: fn(&TrialResult) -> Option<bool>| -> Option<f64> {
        let hits: Vec<bool> = usable.iter().filter_map(|r| pick(r)).collect();
        if hits.is_empty() {
            None
        } else {
            Some(hits.iter().filter(|&&h| h).count() as f64 / hits.len() as f64)
        }
    };
    let adoption_coverage = rate(|r| r.adoption_covered);
    let effectiveness_coverage = rate(|r| r.effectiveness_covered);
    let pi_bias = if usable_trials > 0 {
        let mut acc = [0.0; 3];
        for r in &usable {
            let e = r.pi_error.expect("usable trials carry pi errors");
            for k in 0..3 {
                acc[k] += e[k];
            }
        }
        Some(acc.map(|s| s / usable_trials as f64))
    } else {
        None
    };

    Ok(StudyReport {
        trials: config.trials,
        usable_trials,
        adoption_coverage,
        effectiveness_coverage,
        pi_bias,
        per_trial,
    })
}

fn run_one(config: &StudyConfig, trial: usize) -> Result<TrialResult> {
    let seed = derive_seed(config.seed, trial as u64);
    let (dataset, truth) = generate_trial(
        config.n_per_arm,
        &config.theta,
        config.noise_sd,
        &config.theory,
        seed,
    )?;

    let unusable = TrialResult {
        trial,
        seed,
        usable: false,
        pi_error: None,
        adoption_covered: None,
        effectiveness_covered: None,
    };

    let Ok(input) = StrataInput::from_dataset(&dataset) else {
        return Ok(unusable);
    };
    let Ok(props) = strata::stratum_proportions(&input) else {
        return Ok(unusable); // no induced users in the sample, or reversed rates
    };
    let Ok(base) = strata::baseline_outcomes(&input, &props) else {
        return Ok(unusable);
    };
    let Ok(bounds) = strata::support_bounds(&input, &props, &base) else {
        return Ok(unusable);
    };

    let contains = |b: Option<crate::strata::PrincipalBounds>, tau: Option<f64>| {
        match (b, tau) {
            (Some(b), Some(tau)) => Some(b.lower <= tau && tau <= b.upper),
            _ => None,
        }
    };
    Ok(TrialResult {
        trial,
        seed,
        usable: true,
        pi_error: Some([
            props.pi_a - truth.pi_always,
            props.pi_c - truth.pi_induced,
            props.pi_n - truth.pi_never,
        ]),
        adoption_covered: contains(bounds.adoption, truth.tau_adoption),
        effectiveness_covered: contains(bounds.effectiveness, truth.tau_effectiveness),
    })
}
