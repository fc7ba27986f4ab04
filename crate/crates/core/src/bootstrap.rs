//! Percentile-bootstrap confidence intervals for the partially identified
//! adoption and effectiveness effects.
//!
//! Units are resampled with replacement *within* each assignment arm, so
//! every replicate preserves the arm sizes of the original design. Replicate
//! `r` draws from stream `r` of a ChaCha8 generator seeded with the
//! configured seed; results are reduced in replicate order, which makes the
//! output identical for any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::strata::{
    baseline_outcomes, dominance_bounds, stratum_proportions, CellSums, Effect, OutcomeSupport,
    StrataInput,
};
use crate::trial::{Arm, TrialDataset};

/// Linear-interpolation empirical quantile of an ascending-sorted list.
///
/// With `n` values the quantile `q` sits at fractional rank `q * (n - 1)`;
/// `q = 0` is the minimum and `q = 1` the maximum.
pub fn percentile(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::validation("percentile of an empty list"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::validation(format!("quantile {q} outside [0, 1]")));
    }
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]), "input must be sorted");
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// How replicate intervals are turned into a confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    /// Percentiles of the replicate lower and upper bounds. A critical-value
    /// adjustment in the style of Imbens–Manski would tighten this toward
    /// coverage of the parameter rather than the whole identified set; it is
    /// left as an extension hook.
    PercentileOnBounds,
}

/// Bootstrap settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootstrapConfig {
    pub replications: usize,
    /// Confidence level in (0, 1).
    pub level: f64,
    pub seed: u64,
    pub method: CiMethod,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            replications: 2000,
            level: 0.95,
            seed: 0,
            method: CiMethod::PercentileOnBounds,
        }
    }
}

impl BootstrapConfig {
    fn validate(&self) -> Result<()> {
        if self.replications < 100 {
            return Err(Error::validation(
                "bootstrap needs at least 100 replications for interval output",
            ));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::validation(format!(
                "confidence level must lie in (0, 1), got {}",
                self.level
            )));
        }
        Ok(())
    }
}

/// Confidence interval for one effect at one `gamma`.
///
/// `lower_ci <= upper_ci` always holds; the point bounds are not guaranteed
/// to sit inside the interval on small samples. `n_failed` counts replicates
/// that contributed nothing to this interval: monotonicity violations,
/// support violations, or an empty stratum in the resample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCi {
    pub effect: Effect,
    pub gamma: f64,
    pub lower_ci: f64,
    pub upper_ci: f64,
    pub point_lower: f64,
    pub point_upper: f64,
    pub n_failed: usize,
}

/// Interval bounds for both effects in one replicate, per gamma.
type ReplicateRow = (Option<(f64, f64)>, Option<(f64, f64)>);

/// One arm's records reduced to what resampling needs.
struct ArmData {
    used: Vec<bool>,
    outcome: Vec<f64>,
}

impl ArmData {
    fn from_dataset(dataset: &TrialDataset, arm: Arm) -> Result<Self> {
        let mut used = Vec::new();
        let mut outcome = Vec::new();
        for rec in dataset.arm_records(arm) {
            used.push(rec.adopted == Some(true));
            outcome.push(rec.grade_point);
        }
        if used.is_empty() {
            return Err(Error::validation(format!("arm {arm} is empty")));
        }
        Ok(ArmData { used, outcome })
    }

    fn len(&self) -> usize {
        self.used.len()
    }
}

/// Percentile-bootstrap confidence intervals over the gamma grid.
///
/// Output rows are ordered by ascending gamma, adoption before
/// effectiveness. Deterministic for a fixed seed.
pub fn bootstrap_bounds(
    dataset: &TrialDataset,
    gammas: &[f64],
    config: &BootstrapConfig,
) -> Result<Vec<BoundCi>> {
    bootstrap_bounds_with(dataset, gammas, config, resample_with_replacement)
}

/// Resampler seam: tests can substitute a degenerate resampler.
fn bootstrap_bounds_with<F>(
    dataset: &TrialDataset,
    gammas: &[f64],
    config: &BootstrapConfig,
    resample: F,
) -> Result<Vec<BoundCi>>
where
    F: Fn(&mut ChaCha8Rng, usize) -> Vec<usize> + Sync,
{
    config.validate()?;
    if gammas.is_empty() {
        return Err(Error::validation("bootstrap requires at least one gamma"));
    }
    let mut sorted_gammas = gammas.to_vec();
    sorted_gammas.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));

    let arm0 = ArmData::from_dataset(dataset, Arm::AiOnly)?;
    let arm1 = ArmData::from_dataset(dataset, Arm::AiTrained)?;
    let (y_min, y_max) = dataset.support();
    let support = OutcomeSupport::new(y_min, y_max)?;

    // Point estimates on the full sample; errors here (no induced users,
    // support violations) are the caller's to handle.
    let full_input = StrataInput::from_dataset(dataset)?;
    let props = stratum_proportions(&full_input)?;
    let base = baseline_outcomes(&full_input, &props)?;
    let point: Vec<_> = sorted_gammas
        .iter()
        .map(|&g| dominance_bounds(&full_input, &props, &base, g))
        .collect::<Result<_>>()?;

    let replicate_rows: Vec<Option<Vec<ReplicateRow>>> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(r as u64);
            run_replicate(&mut rng, &arm0, &arm1, support, &sorted_gammas, &resample)
        })
        .collect();

    let n_error = replicate_rows.iter().filter(|r| r.is_none()).count();
    if n_error * 5 > config.replications {
        return Err(Error::assumption(
            "bootstrap unstable: monotonicity frequently violated in resamples",
        ));
    }

    let alpha = 1.0 - config.level;
    let mut out = Vec::new();
    for (gi, &gamma) in sorted_gammas.iter().enumerate() {
        for effect in [Effect::Adoption, Effect::Effectiveness] {
            let point_bounds = match effect {
                Effect::Adoption => point[gi].adoption,
                Effect::Effectiveness => point[gi].effectiveness,
            };
            let Some(point_bounds) = point_bounds else {
                continue; // stratum empty on the full sample
            };
            let mut lowers = Vec::with_capacity(config.replications);
            let mut uppers = Vec::with_capacity(config.replications);
            for row in replicate_rows.iter().flatten() {
                let cell = match effect {
                    Effect::Adoption => row[gi].0,
                    Effect::Effectiveness => row[gi].1,
                };
                if let Some((lo, hi)) = cell {
                    lowers.push(lo);
                    uppers.push(hi);
                }
            }
            if lowers.is_empty() {
                return Err(Error::assumption(format!(
                    "bootstrap produced no usable replicates for the {effect} effect"
                )));
            }
            lowers.sort_by(|a, b| a.total_cmp(b));
            uppers.sort_by(|a, b| a.total_cmp(b));
            let lower_ci = percentile(&lowers, alpha / 2.0)?;
            let upper_ci = percentile(&uppers, 1.0 - alpha / 2.0)?;
            debug_assert!(lower_ci <= upper_ci);
            out.push(BoundCi {
                effect,
                gamma,
                lower_ci,
                upper_ci,
                point_lower: point_bounds.lower,
                point_upper: point_bounds.upper,
                n_failed: config.replications - lowers.len(),
            });
        }
    }
    Ok(out)
}

/// Standard with-replacement index resampler.
fn resample_with_replacement(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

fn run_replicate<F>(
    rng: &mut ChaCha8Rng,
    arm0: &ArmData,
    arm1: &ArmData,
    support: OutcomeSupport,
    gammas: &[f64],
    resample: &F,
) -> Option<Vec<ReplicateRow>>
where
    F: Fn(&mut ChaCha8Rng, usize) -> Vec<usize>,
{
    let mut cells = CellSums::default();
    for idx in resample(rng, arm0.len()) {
        cells.add(0, arm0.used[idx], arm0.outcome[idx]);
    }
    for idx in resample(rng, arm1.len()) {
        cells.add(1, arm1.used[idx], arm1.outcome[idx]);
    }
    let input = cells.into_input(support).ok()?;
    let props = stratum_proportions(&input).ok()?;
    let base = baseline_outcomes(&input, &props).ok()?;
    let mut rows = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        let bounds = dominance_bounds(&input, &props, &base, gamma).ok()?;
        rows.push((
            bounds.adoption.map(|b| (b.lower, b.upper)),
            bounds.effectiveness.map(|b| (b.lower, b.upper)),
        ));
    }
    Some(rows)
}
