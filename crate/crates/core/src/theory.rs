//! Generative model of assistant adoption and productivity.
//!
//! An agent of ability `theta` in [0, 1] doing a task of complexity `c`
//! produces
//!
//! ```text
//! Y = theta + D * (1 - theta) * [A * e_T - L(c, e_T)]
//! ```
//!
//! where `D` is the adoption decision, `A` the capability of the tool,
//! `e_T` effectiveness of use with (`T = 1`) or without (`T = 0`) training,
//! and `L(c, e) = p(c, e) * l(c)` the expected loss from tool errors. The
//! agent adopts when the net gain `(1 - theta) * [A * e_T - L(c, e_T)]`
//! strictly exceeds the adoption cost `k_T`. Training never lowers
//! effectiveness and never raises the cost, which rules out defiers; agents
//! split into always users, induced users (adopt only when trained), and
//! never users, with the induced band sitting *above* the always band in
//! ability.
//!
//! `generate_trial` draws a synthetic three-arm trial on the grade-point
//! scale together with the exact stratum shares and effects, for end-to-end
//! validation of the estimator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta as BetaDist, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trial::{Arm, ExamRecord, GradeScale, IssueScore, Rubric, TrialDataset};

/// Error-probability and error-cost families. Every variant keeps
/// `dp/dc > 0`, `dp/de < 0`, and `dl/dc > 0` on the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ErrorFamily {
    /// `p(c, e) = c * (1 - e)`, `l(c) = lambda * c`.
    Bilinear { lambda: f64 },
    /// `p(c, e) = c^q * (1 - e)`, `l(c) = lambda * c^q` with `q > 0`.
    Power { lambda: f64, exponent: f64 },
}

impl ErrorFamily {
    pub fn error_prob(&self, c: f64, e: f64) -> f64 {
        match *self {
            ErrorFamily::Bilinear { .. } => c * (1.0 - e),
            ErrorFamily::Power { exponent, .. } => c.powf(exponent) * (1.0 - e),
        }
    }

    pub fn error_cost(&self, c: f64) -> f64 {
        match *self {
            ErrorFamily::Bilinear { lambda } => lambda * c,
            ErrorFamily::Power { lambda, exponent } => lambda * c.powf(exponent),
        }
    }

    fn validate(&self) -> Result<()> {
        let (lambda, exponent) = match *self {
            ErrorFamily::Bilinear { lambda } => (lambda, 1.0),
            ErrorFamily::Power { lambda, exponent } => (lambda, exponent),
        };
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::validation("error cost scale must be positive"));
        }
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::validation("error family exponent must be positive"));
        }
        Ok(())
    }
}

/// Parameters of the adoption model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TheoryConfig {
    /// Base capability `A` of the tool.
    pub ability: f64,
    /// Effectiveness of use without training, in [0, 1].
    pub e_untrained: f64,
    /// Effectiveness of use with training; at least `e_untrained`.
    pub e_trained: f64,
    /// Adoption cost without training.
    pub cost_untrained: f64,
    /// Adoption cost with training; at most `cost_untrained`.
    pub cost_trained: f64,
    /// Task complexity `c` in [0, 1].
    pub complexity: f64,
    pub errors: ErrorFamily,
    /// Affine image of model productivity [0, 1] on the outcome scale.
    pub y_scale: (f64, f64),
}

impl Default for TheoryConfig {
    fn default() -> Self {
        TheoryConfig {
            ability: 1.0,
            e_untrained: 0.5,
            e_trained: 0.8,
            cost_untrained: 0.2,
            cost_trained: 0.08,
            complexity: 0.6,
            errors: ErrorFamily::Bilinear { lambda: 1.0 },
            y_scale: (1.0, 4.3),
        }
    }
}

impl TheoryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ability > 0.0 && self.ability.is_finite()) {
            return Err(Error::validation("ability must be positive"));
        }
        for (name, e) in [("e_untrained", self.e_untrained), ("e_trained", self.e_trained)] {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::validation(format!("{name} must lie in [0, 1]")));
            }
        }
        if self.e_trained < self.e_untrained {
            return Err(Error::validation(
                "training must not hurt effectiveness (e_trained >= e_untrained)",
            ));
        }
        for (name, k) in [
            ("cost_untrained", self.cost_untrained),
            ("cost_trained", self.cost_trained),
        ] {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::validation(format!("{name} must be positive")));
            }
        }
        if self.cost_trained > self.cost_untrained {
            return Err(Error::validation(
                "training must not raise the adoption cost (cost_trained <= cost_untrained)",
            ));
        }
        if !(0.0..=1.0).contains(&self.complexity) {
            return Err(Error::validation("complexity must lie in [0, 1]"));
        }
        self.errors.validate()?;
        if !(self.y_scale.0 < self.y_scale.1)
            || !self.y_scale.0.is_finite()
            || !self.y_scale.1.is_finite()
        {
            return Err(Error::validation("y_scale must be a proper interval"));
        }
        Ok(())
    }

    fn effectiveness(&self, trained: bool) -> f64 {
        if trained {
            self.e_trained
        } else {
            self.e_untrained
        }
    }

    fn adoption_cost(&self, trained: bool) -> f64 {
        if trained {
            self.cost_trained
        } else {
            self.cost_untrained
        }
    }

    /// Net gain per unit of `(1 - theta)`: `A * e_T - L(c, e_T)`.
    pub fn net_gain(&self, trained: bool) -> f64 {
        let e = self.effectiveness(trained);
        self.ability * e - self.errors.error_prob(self.complexity, e) * self.errors.error_cost(self.complexity)
    }

    /// Ability cutoff below which agents adopt even untrained, if any agent does.
    pub fn always_cutoff(&self) -> Option<f64> {
        let net = self.net_gain(false);
        (net > 0.0).then(|| 1.0 - self.adoption_cost(false) / net)
    }

    /// Ability cutoff below which agents adopt when trained.
    pub fn induced_cutoff(&self) -> Option<f64> {
        let net = self.net_gain(true);
        (net > 0.0).then(|| 1.0 - self.adoption_cost(true) / net)
    }
}

/// Expected loss `L(c, e) = p(c, e) * l(c)` under the configured family.
pub fn expected_loss(c: f64, e: f64, config: &TheoryConfig) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) || !(0.0..=1.0).contains(&e) {
        return Err(Error::validation(format!(
            "expected_loss arguments must lie in [0, 1], got c={c}, e={e}"
        )));
    }
    Ok(config.errors.error_prob(c, e) * config.errors.error_cost(c))
}

/// Model productivity of one agent given adoption and training status.
pub fn productivity(theta: f64, adopt: bool, trained: bool, config: &TheoryConfig) -> f64 {
    debug_assert!((0.0..=1.0).contains(&theta));
    if adopt {
        theta + (1.0 - theta) * config.net_gain(trained)
    } else {
        theta
    }
}

/// Adoption rule: use the tool when the net gain strictly exceeds the cost.
pub fn adopts(theta: f64, trained: bool, config: &TheoryConfig) -> bool {
    debug_assert!((0.0..=1.0).contains(&theta));
    (1.0 - theta) * config.net_gain(trained) > config.adoption_cost(trained)
}

/// Principal stratum of an agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    Always,
    Induced,
    Never,
}

/// Stratum implied by the adoption rule in both training states. Boundary
/// abilities fall on the non-adopting side of each cutoff because the
/// adoption inequality is strict.
pub fn classify_stratum(theta: f64, config: &TheoryConfig) -> Stratum {
    if adopts(theta, false, config) {
        Stratum::Always
    } else if adopts(theta, true, config) {
        Stratum::Induced
    } else {
        Stratum::Never
    }
}

/// A synthetic agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Agent {
    pub theta: f64,
    pub stratum: Stratum,
}

/// Ability distribution for generated populations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "distribution", rename_all = "snake_case")]
pub enum ThetaDistribution {
    Uniform,
    Beta { alpha: f64, beta: f64 },
}

impl Default for ThetaDistribution {
    fn default() -> Self {
        ThetaDistribution::Uniform
    }
}

impl ThetaDistribution {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<f64> {
        match *self {
            ThetaDistribution::Uniform => Ok(rng.gen_range(0.0..1.0)),
            ThetaDistribution::Beta { alpha, beta } => {
                let dist = BetaDist::new(alpha, beta).map_err(|e| {
                    Error::validation(format!("invalid beta parameters: {e}"))
                })?;
                Ok(dist.sample(rng))
            }
        }
    }
}

/// Ground truth attached to a generated trial: exact stratum shares and the
/// two effects computed from noiseless potential outcomes on the grade grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialTruth {
    pub pi_always: f64,
    pub pi_induced: f64,
    pub pi_never: f64,
    /// E[Y(1,1) - Y(0,0) | induced]; `None` when no agent is induced.
    pub tau_adoption: Option<f64>,
    /// E[Y(1,1) - Y(0,1) | always]; `None` when no agent is an always user.
    pub tau_effectiveness: Option<f64>,
    pub no_induced_users: bool,
    pub n_agents: usize,
}

/// Derive a per-trial seed from a base seed (SplitMix64 over the index).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generate a three-arm trial of `n_per_arm` agents each, deterministic in
/// `seed`.
///
/// Observed outcomes are the affine image of productivity plus Gaussian
/// noise, clipped to the outcome support and snapped to the grade grid.
/// Snapping moves any individual outcome by at most half a grid step, so
/// the truth record's effects (snapped, noiseless) stay aligned with what
/// the estimator consumes.
pub fn generate_trial(
    n_per_arm: usize,
    theta_distribution: &ThetaDistribution,
    noise_sd: f64,
    config: &TheoryConfig,
    seed: u64,
) -> Result<(TrialDataset, TrialTruth)> {
    if n_per_arm < 2 {
        return Err(Error::validation("n_per_arm must be at least 2"));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::validation("noise_sd must be a finite nonnegative number"));
    }
    config.validate()?;

    let scale = GradeScale::default();
    let rubric = Rubric::default();
    let (y_lo, y_hi) = config.y_scale;
    let map = |p: f64| y_lo + (y_hi - y_lo) * p;
    let snap = |y: f64| scale.snap(y);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sd)
        .map_err(|e| Error::validation(format!("invalid noise distribution: {e}")))?;

    let n_total = 3 * n_per_arm;
    let mut records = Vec::with_capacity(n_total);
    let mut stratum_counts = [0usize; 3];
    let mut adoption_gain_sum = 0.0; // induced users: Y(1,1) - Y(0,0)
    let mut effectiveness_gain_sum = 0.0; // always users: Y(1,1) - Y(0,1)

    for idx in 0..n_total {
        let theta = theta_distribution.sample(&mut rng)?;
        let eps = if noise_sd > 0.0 { noise.sample(&mut rng) } else { 0.0 };

        let stratum = classify_stratum(theta, config);
        stratum_counts[stratum as usize] += 1;

        // Noiseless potential outcomes on the grade grid.
        let g_no_use = snap(map(productivity(theta, false, false, config)));
        let g_use_untrained = snap(map(productivity(theta, true, false, config)));
        let g_use_trained = snap(map(productivity(theta, true, true, config)));
        match stratum {
            Stratum::Induced => adoption_gain_sum += g_use_trained - g_no_use,
            Stratum::Always => effectiveness_gain_sum += g_use_trained - g_use_untrained,
            Stratum::Never => {}
        }

        // Arms are filled in blocks; thetas are i.i.d., so block assignment
        // is random assignment.
        let arm = match idx / n_per_arm {
            0 => Arm::NoAi,
            1 => Arm::AiOnly,
            _ => Arm::AiTrained,
        };
        let trained = arm == Arm::AiTrained;
        let adopted = match arm {
            Arm::NoAi => None,
            _ => Some(adopts(theta, trained, config)),
        };
        let uses = adopted == Some(true);
        let observed = snap(map(productivity(theta, uses, trained, config)) + eps);

        records.push(filler_record(idx, arm, adopted, observed, &scale, &rubric));
    }

    let dataset = TrialDataset::new(records, &scale, &rubric)?;
    let n_always = stratum_counts[Stratum::Always as usize];
    let n_induced = stratum_counts[Stratum::Induced as usize];
    let n_never = stratum_counts[Stratum::Never as usize];
    let truth = TrialTruth {
        pi_always: n_always as f64 / n_total as f64,
        pi_induced: n_induced as f64 / n_total as f64,
        pi_never: n_never as f64 / n_total as f64,
        tau_adoption: (n_induced > 0).then(|| adoption_gain_sum / n_induced as f64),
        tau_effectiveness: (n_always > 0).then(|| effectiveness_gain_sum / n_always as f64),
        no_induced_users: n_induced == 0,
        n_agents: n_total,
    };
    Ok((dataset, truth))
}

/// Fill the non-outcome columns with values derived deterministically from
/// the observed grade, keeping every record valid against the rubric.
fn filler_record(
    idx: usize,
    arm: Arm,
    adopted: Option<bool>,
    grade_point: f64,
    scale: &GradeScale,
    rubric: &Rubric,
) -> ExamRecord {
    let (y_min, y_max) = scale.support();
    let frac = (grade_point - y_min) / (y_max - y_min);
    let mut issues = [IssueScore {
        issue_id: 0,
        spotted: false,
        score: None,
        max_score: 0,
    }; 4];
    for (k, slot) in issues.iter_mut().enumerate() {
        let spotted = frac >= 0.18 * k as f64;
        *slot = IssueScore {
            issue_id: (k + 1) as u8,
            spotted,
            score: spotted.then(|| (frac * rubric.max_scores[k] as f64).round() as u32),
            max_score: rubric.max_scores[k],
        };
    }
    ExamRecord {
        unit_id: format!("sim{idx:05}"),
        arm,
        adopted,
        issues,
        grade_point,
        answer_text: None,
        word_count: (500.0 + 700.0 * frac).round() as u64,
        fk_grade: 10.0 + 4.0 * frac,
        rule_misstatements: ((1.0 - frac) * 4.0).round().min(4.0) as u32,
        case_hallucinations: 0,
        case_misstatements: 0,
        cases_cited: (3.0 + 5.0 * frac).round() as u32,
        permission: None,
        helpfulness: None,
        prior_llm_training: None,
    }
}
