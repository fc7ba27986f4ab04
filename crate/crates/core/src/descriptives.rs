//! Arm-level summaries, Welch t-tests, the two-proportion z-test, and the
//! adoption-by-quartile cross-tab.

use serde::{Deserialize, Serialize};

use crate::bootstrap::percentile;
use crate::dist::{normal_sf, student_t_sf};
use crate::error::{Error, Result};
use crate::trial::{Arm, ExamRecord, TrialDataset};

/// Alternative hypothesis for a test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// Two-sided alternative.
    TwoSided,
    /// One-sided: second group exceeds the first.
    Greater,
    /// One-sided: second group falls short of the first.
    Less,
}

impl Tail {
    pub fn label(self) -> &'static str {
        match self {
            Tail::TwoSided => "two_sided",
            Tail::Greater => "greater",
            Tail::Less => "less",
        }
    }

    pub fn is_one_tailed(self) -> bool {
        !matches!(self, Tail::TwoSided)
    }
}

impl std::str::FromStr for Tail {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_sided" | "two-sided" | "two" => Ok(Tail::TwoSided),
            "greater" => Ok(Tail::Greater),
            "less" => Ok(Tail::Less),
            other => Err(Error::validation(format!(
                "unknown tail `{other}`; expected two_sided, greater, or less"
            ))),
        }
    }
}

/// A numeric per-record measure addressable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    GradePoint,
    IssuesMissed,
    /// Flesch–Kincaid grade level of the answer.
    Complexity,
    /// Word count of the answer.
    Length,
    RuleMisstatements,
    CaseHallucinations,
    CaseMisstatements,
    CasesCited,
    Permission,
    Helpfulness,
}

impl Metric {
    pub const ALL: [Metric; 10] = [
        Metric::GradePoint,
        Metric::IssuesMissed,
        Metric::Complexity,
        Metric::Length,
        Metric::RuleMisstatements,
        Metric::CaseHallucinations,
        Metric::CaseMisstatements,
        Metric::CasesCited,
        Metric::Permission,
        Metric::Helpfulness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::GradePoint => "grade_point",
            Metric::IssuesMissed => "issues_missed",
            Metric::Complexity => "complexity",
            Metric::Length => "length",
            Metric::RuleMisstatements => "rule_misstatements",
            Metric::CaseHallucinations => "case_hallucinations",
            Metric::CaseMisstatements => "case_misstatements",
            Metric::CasesCited => "cases_cited",
            Metric::Permission => "permission",
            Metric::Helpfulness => "helpfulness",
        }
    }

    /// Value of this metric for one record, when present.
    pub fn extract(self, rec: &ExamRecord) -> Option<f64> {
        match self {
            Metric::GradePoint => Some(rec.grade_point),
            Metric::IssuesMissed => Some(rec.issues_missed() as f64),
            Metric::Complexity => Some(rec.fk_grade),
            Metric::Length => Some(rec.word_count as f64),
            Metric::RuleMisstatements => Some(rec.rule_misstatements as f64),
            Metric::CaseHallucinations => Some(rec.case_hallucinations as f64),
            Metric::CaseMisstatements => Some(rec.case_misstatements as f64),
            Metric::CasesCited => Some(rec.cases_cited as f64),
            Metric::Permission => rec.permission.map(f64::from),
            Metric::Helpfulness => rec.helpfulness.map(f64::from),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let valid: Vec<&str> = Metric::ALL.iter().map(|m| m.name()).collect();
                Error::validation(format!(
                    "unknown metric `{s}`; valid metrics: {}",
                    valid.join(", ")
                ))
            })
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Mean and sample standard deviation of one metric within one arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArmSummary {
    pub arm: Arm,
    pub metric: Metric,
    pub n: usize,
    pub mean: f64,
    /// Sample SD (n-1 denominator); undefined for a single observation.
    pub sd: Option<f64>,
}

impl ArmSummary {
    /// Build a summary directly from reported moments, e.g. published tables.
    pub fn from_moments(arm: Arm, metric: Metric, n: usize, mean: f64, sd: f64) -> Self {
        ArmSummary {
            arm,
            metric,
            n,
            mean,
            sd: Some(sd),
        }
    }
}

/// Result of a two-sample test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    /// Degrees of freedom (Welch tests only).
    pub df: Option<f64>,
    pub p_value: f64,
    pub tail: Tail,
    /// Raw difference: second-group mean (or proportion) minus first.
    pub effect: f64,
}

/// Mean and sample SD of a metric over one arm's records.
pub fn summarize(dataset: &TrialDataset, arm: Arm, metric: Metric) -> Result<ArmSummary> {
    let values: Vec<f64> = dataset
        .arm_records(arm)
        .filter_map(|r| metric.extract(r))
        .collect();
    if values.is_empty() {
        return Err(Error::validation(format!(
            "arm {arm} has no observations for metric {metric}"
        )));
    }
    let n = values.len();
    // Welford's online update keeps the variance numerically stable.
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, v) in values.iter().enumerate() {
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let sd = if n >= 2 {
        Some((m2 / (n - 1) as f64).sqrt())
    } else {
        None
    };
    Ok(ArmSummary {
        arm,
        metric,
        n,
        mean,
        sd,
    })
}

/// Welch's unequal-variance t-test from group summaries.
///
/// The statistic is `(mean_b - mean_a) / sqrt(sd_a²/n_a + sd_b²/n_b)` with
/// Welch–Satterthwaite degrees of freedom. When both groups have zero
/// variance and equal means the test is vacuous and reports p = 1.
pub fn welch_t_test(a: &ArmSummary, b: &ArmSummary, tail: Tail) -> Result<TestResult> {
    if a.n < 2 || b.n < 2 {
        return Err(Error::validation(
            "welch t-test needs at least two observations in each group",
        ));
    }
    let (sd_a, sd_b) = match (a.sd, b.sd) {
        (Some(x), Some(y)) => (x, y),
        _ => {
            return Err(Error::validation(
                "welch t-test needs a standard deviation for each group",
            ))
        }
    };
    let effect = b.mean - a.mean;
    if sd_a == 0.0 && sd_b == 0.0 {
        if effect == 0.0 {
            return Ok(TestResult {
                statistic: 0.0,
                df: Some((a.n + b.n - 2) as f64),
                p_value: 1.0,
                tail,
                effect,
            });
        }
        return Err(Error::validation(
            "welch t-test is undefined: both groups have zero variance and unequal means",
        ));
    }
    let var_a = sd_a * sd_a / a.n as f64;
    let var_b = sd_b * sd_b / b.n as f64;
    let se = (var_a + var_b).sqrt();
    let t = effect / se;
    let df = (var_a + var_b).powi(2)
        / (var_a * var_a / (a.n - 1) as f64 + var_b * var_b / (b.n - 1) as f64);
    let p_value = match tail {
        Tail::Greater => student_t_sf(t, df),
        Tail::Less => 1.0 - student_t_sf(t, df),
        Tail::TwoSided => 2.0 * student_t_sf(t.abs(), df),
    };
    Ok(TestResult {
        statistic: t,
        df: Some(df),
        p_value,
        tail,
        effect,
    })
}

/// Pooled-variance two-proportion z-test for counts `x1/n1` vs `x2/n2`.
pub fn two_proportion_z_test(
    x1: usize,
    n1: usize,
    x2: usize,
    n2: usize,
    tail: Tail,
) -> Result<TestResult> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::validation("z-test groups must be non-empty"));
    }
    if x1 > n1 || x2 > n2 {
        return Err(Error::validation("count exceeds group size"));
    }
    let pooled = (x1 + x2) as f64 / (n1 + n2) as f64;
    if pooled == 0.0 || pooled == 1.0 {
        return Err(Error::validation(
            "degenerate proportions: pooled rate is 0 or 1",
        ));
    }
    let p1 = x1 as f64 / n1 as f64;
    let p2 = x2 as f64 / n2 as f64;
    let effect = p2 - p1;
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    let z = effect / se;
    let p_value = match tail {
        Tail::Greater => normal_sf(z),
        Tail::Less => 1.0 - normal_sf(z),
        Tail::TwoSided => 2.0 * normal_sf(z.abs()),
    };
    Ok(TestResult {
        statistic: z,
        df: None,
        p_value,
        tail,
        effect,
    })
}

/// One cell of the quartile cross-tab: adopters over total for an
/// (ability-quartile, arm) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuartileCell {
    /// Quartile index, 1 (lowest grades) through 4.
    pub quartile: u8,
    pub arm: Arm,
    pub adopters: usize,
    pub total: usize,
}

impl QuartileCell {
    /// Adoption rate; `None` for an empty cell.
    pub fn rate(&self) -> Option<f64> {
        if self.total == 0 {
            None
        } else {
            Some(self.adopters as f64 / self.total as f64)
        }
    }
}

/// Adoption rates by grade-point quartile and assistant arm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuartileTable {
    /// 25/50/75 percentile cut points of the pooled assistant-arm grades.
    pub cuts: [f64; 3],
    /// Eight cells ordered by quartile, then arm (AIOnly before AITrained).
    pub cells: Vec<QuartileCell>,
}

/// Cross-tab of adoption by grade-point quartile for the assistant arms.
///
/// Quartile thresholds come from the pooled grade points of both assistant
/// arms (linear-interpolation percentiles); a value equal to a cut point
/// falls in the lower bin.
pub fn adoption_by_quartile(dataset: &TrialDataset) -> Result<QuartileTable> {
    const AI_ARMS: [Arm; 2] = [Arm::AiOnly, Arm::AiTrained];
    for arm in AI_ARMS {
        if dataset.arm_size(arm) == 0 {
            return Err(Error::validation(format!("arm {arm} is empty")));
        }
    }
    let mut pooled: Vec<f64> = AI_ARMS
        .iter()
        .flat_map(|&arm| dataset.arm_records(arm).map(|r| r.grade_point))
        .collect();
    pooled.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cuts = [
        percentile(&pooled, 0.25)?,
        percentile(&pooled, 0.50)?,
        percentile(&pooled, 0.75)?,
    ];
    let bin_of = |gp: f64| -> u8 {
        if gp <= cuts[0] {
            1
        } else if gp <= cuts[1] {
            2
        } else if gp <= cuts[2] {
            3
        } else {
            4
        }
    };
    let mut cells = Vec::with_capacity(8);
    for quartile in 1..=4u8 {
        for arm in AI_ARMS {
            let mut adopters = 0;
            let mut total = 0;
            for rec in dataset.arm_records(arm) {
                if bin_of(rec.grade_point) == quartile {
                    total += 1;
                    if rec.adopted == Some(true) {
                        adopters += 1;
                    }
                }
            }
            cells.push(QuartileCell {
                quartile,
                arm,
                adopters,
                total,
            });
        }
    }
    Ok(QuartileTable { cuts, cells })
}
