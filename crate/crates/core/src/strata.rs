//! Principal-stratification engine for an encouragement design.
//!
//! Assignment `Z` encourages (trains) use; `D` records actual use. Under
//! monotone treatment response the population splits into always users
//! (use either way), induced users (use only when encouraged), and never
//! users. Stratum shares and baseline outcomes are point-identified; the
//! two effects of interest are only partially identified:
//!
//! - the *adoption effect*: outcome gain for induced users from
//!   encouragement-triggered use, and
//! - the *effectiveness effect*: outcome gain for always users from being
//!   encouraged, conditional on use.
//!
//! `support_bounds` gives sharp intervals using only the fact that outcomes
//! live in a bounded support; `dominance_bounds` tightens them under a mean
//! dominance assumption relaxed by a tolerance `gamma`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::trial::{Arm, TrialDataset};

/// Comparison slack for proportions built from integer counts.
const PROPORTION_EPS: f64 = 1e-12;
/// Slack for support-membership checks on derived means.
const SUPPORT_EPS: f64 = 1e-9;

/// Closed outcome support `[y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeSupport {
    pub y_min: f64,
    pub y_max: f64,
}

impl OutcomeSupport {
    pub fn new(y_min: f64, y_max: f64) -> Result<Self> {
        if !y_min.is_finite() || !y_max.is_finite() || y_min >= y_max {
            return Err(Error::validation(format!(
                "invalid outcome support [{y_min}, {y_max}]"
            )));
        }
        Ok(OutcomeSupport { y_min, y_max })
    }

    fn contains(&self, y: f64) -> bool {
        y >= self.y_min - SUPPORT_EPS && y <= self.y_max + SUPPORT_EPS
    }

    pub fn width(&self) -> f64 {
        self.y_max - self.y_min
    }
}

/// Cell counts and conditional outcome means of the two assistant arms.
///
/// `Z = 0` is the untrained (encouragement-absent) arm, `Z = 1` the trained
/// arm; `D` is self-reported use. A cell mean is `None` when the cell is
/// empty; operations that need a missing mean report which one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrataInput {
    pub n_z0: usize,
    pub n_z0_d1: usize,
    pub n_z1: usize,
    pub n_z1_d1: usize,
    /// Mean outcome of non-users in the untrained arm, E[Y | Z=0, D=0].
    pub mean_y_z0_d0: Option<f64>,
    /// Mean outcome of users in the untrained arm, E[Y | Z=0, D=1].
    pub mean_y_z0_d1: Option<f64>,
    /// Mean outcome of non-users in the trained arm, E[Y | Z=1, D=0].
    pub mean_y_z1_d0: Option<f64>,
    /// Mean outcome of users in the trained arm, E[Y | Z=1, D=1].
    pub mean_y_z1_d1: Option<f64>,
    pub support: OutcomeSupport,
}

impl StrataInput {
    /// Build from complete summary statistics, e.g. published tables.
    #[allow(clippy::too_many_arguments)]
    pub fn from_summary(
        n_z0: usize,
        n_z0_d1: usize,
        n_z1: usize,
        n_z1_d1: usize,
        mean_y_z0_d0: f64,
        mean_y_z0_d1: f64,
        mean_y_z1_d0: f64,
        mean_y_z1_d1: f64,
        support: OutcomeSupport,
    ) -> Result<Self> {
        let input = StrataInput {
            n_z0,
            n_z0_d1,
            n_z1,
            n_z1_d1,
            mean_y_z0_d0: Some(mean_y_z0_d0),
            mean_y_z0_d1: Some(mean_y_z0_d1),
            mean_y_z1_d0: Some(mean_y_z1_d0),
            mean_y_z1_d1: Some(mean_y_z1_d1),
            support,
        };
        input.validate()?;
        Ok(input)
    }

    /// Extract counts and cell means from the assistant arms of a dataset.
    ///
    /// The control arm carries no adoption information and is excluded.
    pub fn from_dataset(dataset: &TrialDataset) -> Result<Self> {
        let (y_min, y_max) = dataset.support();
        let support = OutcomeSupport::new(y_min, y_max)?;

        let mut cells = CellSums::default();
        for rec in dataset.arm_records(Arm::AiOnly) {
            cells.add(0, rec.adopted == Some(true), rec.grade_point);
        }
        for rec in dataset.arm_records(Arm::AiTrained) {
            cells.add(1, rec.adopted == Some(true), rec.grade_point);
        }
        cells.into_input(support)
    }

    fn validate(&self) -> Result<()> {
        if self.n_z0 == 0 || self.n_z1 == 0 {
            return Err(Error::validation("both assignment arms must be non-empty"));
        }
        if self.n_z0_d1 > self.n_z0 || self.n_z1_d1 > self.n_z1 {
            return Err(Error::validation("user count exceeds arm size"));
        }
        for (name, mean) in [
            ("mean_y_z0_d0", self.mean_y_z0_d0),
            ("mean_y_z0_d1", self.mean_y_z0_d1),
            ("mean_y_z1_d0", self.mean_y_z1_d0),
            ("mean_y_z1_d1", self.mean_y_z1_d1),
        ] {
            if let Some(m) = mean {
                if !m.is_finite() || !self.support.contains(m) {
                    return Err(Error::validation(format!(
                        "{name} = {m} lies outside the outcome support [{}, {}]",
                        self.support.y_min, self.support.y_max
                    )));
                }
            }
        }
        Ok(())
    }

    fn require_mean(&self, which: &str) -> Result<f64> {
        let value = match which {
            "mean_y_z0_d0" => self.mean_y_z0_d0,
            "mean_y_z0_d1" => self.mean_y_z0_d1,
            "mean_y_z1_d0" => self.mean_y_z1_d0,
            "mean_y_z1_d1" => self.mean_y_z1_d1,
            _ => unreachable!(),
        };
        value.ok_or_else(|| Error::validation(format!("missing required quantity `{which}`")))
    }
}

/// Accumulator for the four (Z, D) cells.
#[derive(Default)]
pub(crate) struct CellSums {
    n: [[usize; 2]; 2],
    sum: [[f64; 2]; 2],
}

impl CellSums {
    pub(crate) fn add(&mut self, z: usize, d: bool, y: f64) {
        let d = usize::from(d);
        self.n[z][d] += 1;
        self.sum[z][d] += y;
    }

    pub(crate) fn into_input(self, support: OutcomeSupport) -> Result<StrataInput> {
        let mean = |z: usize, d: usize| -> Option<f64> {
            if self.n[z][d] == 0 {
                None
            } else {
                // Cell values live in the support, so clip float noise only.
                Some((self.sum[z][d] / self.n[z][d] as f64).clamp(support.y_min, support.y_max))
            }
        };
        let input = StrataInput {
            n_z0: self.n[0][0] + self.n[0][1],
            n_z0_d1: self.n[0][1],
            n_z1: self.n[1][0] + self.n[1][1],
            n_z1_d1: self.n[1][1],
            mean_y_z0_d0: mean(0, 0),
            mean_y_z0_d1: mean(0, 1),
            mean_y_z1_d0: mean(1, 0),
            mean_y_z1_d1: mean(1, 1),
            support,
        };
        if input.n_z0 == 0 || input.n_z1 == 0 {
            return Err(Error::validation(
                "strata analysis needs both assistant arms to be non-empty",
            ));
        }
        input.validate()?;
        Ok(input)
    }
}

/// Point-identified stratum shares and the two mixture weight systems.
///
/// The trained user cell mixes always and induced users (`w_*_treated`);
/// the untrained non-user cell mixes never and induced users
/// (`w_*_untreated`). The two systems share a symbol in common notation but
/// are distinct quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StratumProportions {
    /// Share of always users, P(D=1 | Z=0).
    pub pi_a: f64,
    /// Share of never users, P(D=0 | Z=1).
    pub pi_n: f64,
    /// Share of induced users, P(D=0 | Z=0) - P(D=0 | Z=1).
    pub pi_c: f64,
    /// Always-user weight in the trained user cell.
    pub w_a_treated: f64,
    /// Induced-user weight in the trained user cell.
    pub w_c_treated: f64,
    /// Never-user weight in the untrained non-user cell.
    pub w_n_untreated: f64,
    /// Induced-user weight in the untrained non-user cell.
    pub w_c_untreated: f64,
}

/// Stratum shares from the arm-level use counts.
pub fn stratum_proportions(input: &StrataInput) -> Result<StratumProportions> {
    input.validate()?;
    let pi_a = input.n_z0_d1 as f64 / input.n_z0 as f64;
    let pi_n = (input.n_z1 - input.n_z1_d1) as f64 / input.n_z1 as f64;
    let untreated_nonuse = (input.n_z0 - input.n_z0_d1) as f64 / input.n_z0 as f64;
    let pi_c = untreated_nonuse - pi_n;
    if pi_c < -PROPORTION_EPS {
        return Err(Error::assumption(
            "monotonicity violated: treated adoption below untreated adoption",
        ));
    }
    if pi_c <= PROPORTION_EPS {
        return Err(Error::assumption(
            "no induced users: adoption effect unidentified",
        ));
    }
    let treated_use = pi_a + pi_c;
    let untreated_nonuse = pi_n + pi_c;
    Ok(StratumProportions {
        pi_a,
        pi_n,
        pi_c,
        w_a_treated: pi_a / treated_use,
        w_c_treated: pi_c / treated_use,
        w_n_untreated: pi_n / untreated_nonuse,
        w_c_untreated: pi_c / untreated_nonuse,
    })
}

/// Point-identified baseline (unencouraged-state) mean outcomes per stratum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselineOutcomes {
    /// E[Y(0,0) | never]; `None` when there are no never users.
    pub never_baseline: Option<f64>,
    /// E[Y(0,1) | always]; `None` when there are no always users.
    pub always_baseline: Option<f64>,
    /// E[Y(0,0) | induced], deconvolved from the untrained non-user cell.
    pub induced_baseline: f64,
}

/// Baseline outcomes under exclusion for never users.
///
/// The untrained non-user cell is a mixture of never and induced users;
/// exclusion pins the never component at the trained non-user mean, and the
/// induced baseline is what remains.
pub fn baseline_outcomes(
    input: &StrataInput,
    props: &StratumProportions,
) -> Result<BaselineOutcomes> {
    let mean_untrained_nonuser = input.require_mean("mean_y_z0_d0")?;

    let always_baseline = if props.pi_a > 0.0 {
        Some(input.require_mean("mean_y_z0_d1")?)
    } else {
        None
    };
    let never_baseline = if props.pi_n > 0.0 {
        Some(input.require_mean("mean_y_z1_d0")?)
    } else {
        None
    };

    let induced_baseline = match never_baseline {
        Some(never) => (mean_untrained_nonuser - props.w_n_untreated * never) / props.w_c_untreated,
        None => mean_untrained_nonuser,
    };
    if !input.support.contains(induced_baseline) {
        return Err(Error::assumption(format!(
            "deconvolved induced-user baseline {induced_baseline:.4} violates the outcome \
             support [{}, {}]; assumptions inconsistent with data",
            input.support.y_min, input.support.y_max
        )));
    }
    Ok(BaselineOutcomes {
        never_baseline,
        always_baseline,
        induced_baseline,
    })
}

/// Which partially identified effect a bound refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Effect {
    /// Gain for induced users: E[Y(1,1) - Y(0,0) | induced].
    Adoption,
    /// Gain for always users: E[Y(1,1) - Y(0,1) | always].
    Effectiveness,
}

impl Effect {
    pub fn label(self) -> &'static str {
        match self {
            Effect::Adoption => "adoption",
            Effect::Effectiveness => "effectiveness",
        }
    }
}

impl std::fmt::Display for Effect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A sharp interval for one effect, with flags recording whether a support
/// clamp was binding on either end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrincipalBounds {
    pub effect: Effect,
    pub lower: f64,
    pub upper: f64,
    pub lower_clamped: bool,
    pub upper_clamped: bool,
}

/// Bounds for both effects. An absent side means the corresponding stratum
/// is empty and the effect is undefined rather than unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectBounds {
    pub adoption: Option<PrincipalBounds>,
    pub effectiveness: Option<PrincipalBounds>,
}

/// Largest mean the always-user treated outcome can take given the observed
/// trained-user cell mean and the support floor on the induced component.
fn always_mean_cap(m11: f64, props: &StratumProportions, support: &OutcomeSupport) -> f64 {
    if props.pi_a == 0.0 {
        return support.y_max;
    }
    let mixture_cap = (m11 - props.w_c_treated * support.y_min) / props.w_a_treated;
    mixture_cap.min(support.y_max)
}

/// Sharp bounds using only the bounded outcome support.
pub fn support_bounds(
    input: &StrataInput,
    props: &StratumProportions,
    base: &BaselineOutcomes,
) -> Result<EffectBounds> {
    let m11 = input.require_mean("mean_y_z1_d1")?;
    let support = &input.support;

    let adoption = {
        let inner = if props.pi_a == 0.0 {
            m11
        } else {
            (m11 - props.w_a_treated * support.y_max) / props.w_c_treated
        };
        let lower_pre = inner.max(support.y_min);
        Some(PrincipalBounds {
            effect: Effect::Adoption,
            lower: lower_pre - base.induced_baseline,
            upper: support.y_max - base.induced_baseline,
            lower_clamped: inner < support.y_min,
            upper_clamped: false,
        })
    };

    let effectiveness = match base.always_baseline {
        None => None,
        Some(always_baseline) => {
            let inner = (m11 - props.w_c_treated * support.y_min) / props.w_a_treated;
            let upper_pre = inner.min(support.y_max);
            Some(PrincipalBounds {
                effect: Effect::Effectiveness,
                lower: support.y_min - always_baseline,
                upper: upper_pre - always_baseline,
                lower_clamped: false,
                upper_clamped: inner > support.y_max,
            })
        }
    };

    Ok(EffectBounds {
        adoption,
        effectiveness,
    })
}

/// Sharp bounds under mean dominance with tolerance `gamma`.
///
/// Dominance asserts trained induced users perform at least as well as
/// trained always users up to `gamma`. It caps the always component of the
/// trained user cell at `m11 + w_c * gamma` (never above what the mixture
/// and support admit) and thereby lifts the induced component's floor. On
/// the unclamped branch the components are `m11 - w_a * gamma` and
/// `m11 + w_c * gamma`.
pub fn dominance_bounds(
    input: &StrataInput,
    props: &StratumProportions,
    base: &BaselineOutcomes,
    gamma: f64,
) -> Result<EffectBounds> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::validation(format!(
            "gamma must be a finite nonnegative number, got {gamma}"
        )));
    }
    let m11 = input.require_mean("mean_y_z1_d1")?;
    let support = &input.support;

    let (always_upper, always_upper_clamped, induced_lower, induced_lower_clamped);
    if props.pi_a == 0.0 {
        // Pure induced mixture: the trained user cell pins the induced mean.
        always_upper = None;
        always_upper_clamped = false;
        induced_lower = m11.max(support.y_min);
        induced_lower_clamped = false;
    } else {
        let cap = always_mean_cap(m11, props, support);
        let raw = m11 + props.w_c_treated * gamma;
        let u = raw.min(cap);
        always_upper = Some(u);
        always_upper_clamped = raw > cap;
        let inner = (m11 - props.w_a_treated * u) / props.w_c_treated;
        induced_lower = inner.max(support.y_min);
        induced_lower_clamped = inner < support.y_min;
    }

    let adoption = Some(PrincipalBounds {
        effect: Effect::Adoption,
        lower: induced_lower - base.induced_baseline,
        upper: support.y_max - base.induced_baseline,
        lower_clamped: induced_lower_clamped,
        upper_clamped: false,
    });

    let effectiveness = match (base.always_baseline, always_upper) {
        (Some(always_baseline), Some(u)) => Some(PrincipalBounds {
            effect: Effect::Effectiveness,
            lower: support.y_min - always_baseline,
            upper: u - always_baseline,
            lower_clamped: false,
            upper_clamped: always_upper_clamped,
        }),
        _ => None,
    };

    Ok(EffectBounds {
        adoption,
        effectiveness,
    })
}

/// Smallest `gamma >= 0` at which the adoption lower bound meets the
/// effectiveness upper bound, if the curves cross at all.
///
/// On the unclamped branch the adoption lower bound falls at rate
/// `w_a_treated` and the effectiveness upper bound rises at rate
/// `w_c_treated`, so their gap closes at unit rate and the crossing sits at
/// `always_baseline - induced_baseline`. Past the point where the support
/// caps bind, both curves are flat and no later crossing can occur.
pub fn crossover_gamma(
    input: &StrataInput,
    props: &StratumProportions,
    base: &BaselineOutcomes,
) -> Result<Option<f64>> {
    let always_baseline = base.always_baseline.ok_or_else(|| {
        Error::validation("crossover is undefined without always users")
    })?;
    let m11 = input.require_mean("mean_y_z1_d1")?;
    let gap_at_zero = always_baseline - base.induced_baseline;
    if gap_at_zero < -PROPORTION_EPS {
        return Ok(None);
    }
    let gap_at_zero = gap_at_zero.max(0.0);
    let cap = always_mean_cap(m11, props, &input.support);
    let gamma_flat = (cap - m11) / props.w_c_treated;
    if gap_at_zero > gamma_flat + PROPORTION_EPS {
        return Ok(None);
    }
    Ok(Some(gap_at_zero))
}

/// One row of a gamma sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaRow {
    pub gamma: f64,
    pub adoption: Option<PrincipalBounds>,
    pub effectiveness: Option<PrincipalBounds>,
}

/// Dominance bounds across a grid of `gamma` values, the support-only
/// limiting bounds, and the crossover point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaSweep {
    /// Rows in ascending `gamma` order.
    pub rows: Vec<GammaRow>,
    /// Support-only bounds: the limit of the rows as `gamma` grows.
    pub support: EffectBounds,
    pub crossover_gamma: Option<f64>,
}

/// Run the full sweep for the given `gamma` grid.
pub fn gamma_sweep(input: &StrataInput, gammas: &[f64]) -> Result<GammaSweep> {
    if gammas.is_empty() {
        return Err(Error::validation("gamma sweep requires at least one gamma"));
    }
    let props = stratum_proportions(input)?;
    let base = baseline_outcomes(input, &props)?;

    let mut sorted = gammas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut rows = Vec::with_capacity(sorted.len());
    for gamma in sorted {
        let bounds = dominance_bounds(input, &props, &base, gamma)?;
        rows.push(GammaRow {
            gamma,
            adoption: bounds.adoption,
            effectiveness: bounds.effectiveness,
        });
    }
    let support = support_bounds(input, &props, &base)?;
    let crossover = if props.pi_a > 0.0 {
        crossover_gamma(input, &props, &base)?
    } else {
        None
    };
    Ok(GammaSweep {
        rows,
        support,
        crossover_gamma: crossover,
    })
}

/// Everything the estimator identifies from one input, bundled for reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrataAnalysis {
    pub input: StrataInput,
    pub proportions: StratumProportions,
    pub baselines: BaselineOutcomes,
    pub sweep: GammaSweep,
}

/// Proportions, baselines, and the full sweep in one call.
pub fn analyze(input: &StrataInput, gammas: &[f64]) -> Result<StrataAnalysis> {
    let proportions = stratum_proportions(input)?;
    let baselines = baseline_outcomes(input, &proportions)?;
    let sweep = gamma_sweep(input, gammas)?;
    Ok(StrataAnalysis {
        input: *input,
        proportions,
        baselines,
        sweep,
    })
}
